//! The problem-description language (IDB).
//!
//! A rule file has three sections:
//!
//! ```text
//! idbpred            % predicate declarations, typed by unary EDB relations
//! vstd(vtx).
//! hc(vtx,vtx).
//! idbvar             % typed variables
//! vtx X,Y.
//! idbrules           % constraints, Horn rules and post-constraints
//! Select(1,1,Y;edge(X,Y)) hc(X,Y).
//! Horn Forall(X,Y;X!=i,edge(X,Y)) vstd(X), hc(X,Y) -> vstd(Y).
//! vstd(X).
//! ```
//!
//! A predicate is a Horn predicate iff it occurs in the head of a `Horn`
//! rule. Non-Horn rules that mention a Horn predicate, or carry the `Post`
//! prefix, are post-constraints; the rest constrain the guessed atoms.

mod parse;
mod validate;

use std::fmt;

use indexmap::IndexSet;

pub use parse::{parse_idb, IdbError};
pub use validate::{validate, Diagnostic};

use crate::edb::Constant;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PredicateDecl {
    pub name: String,
    pub param_types: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VarDecl {
    pub name: String,
    pub type_name: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Var(String),
    Const(Constant),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Atom {
    pub predicate: String,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn vars(&self) -> impl Iterator<Item = &str> {
        self.args.iter().filter_map(|t| match t {
            Term::Var(v) => Some(v.as_str()),
            Term::Const(_) => None,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    Const(Constant),
    Var(String),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
}

impl Expr {
    fn collect_vars<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Expr::Const(_) => {}
            Expr::Var(v) => out.push(v),
            Expr::Neg(e) => e.collect_vars(out),
            Expr::Bin(_, l, r) => {
                l.collect_vars(out);
                r.collect_vars(out);
            }
        }
    }

    pub(crate) fn has_symbol(&self) -> bool {
        match self {
            Expr::Const(c) => c.as_int().is_none(),
            Expr::Var(_) => false,
            Expr::Neg(e) => e.has_symbol(),
            Expr::Bin(_, l, r) => l.has_symbol() || r.has_symbol(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn is_ordering(self) -> bool {
        !matches!(self, CmpOp::Eq | CmpOp::Ne)
    }
}

/// A grounding-time filter: EDB membership or a comparison.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Condition {
    Edb(Atom),
    Compare { left: Expr, op: CmpOp, right: Expr },
}

impl Condition {
    pub fn vars(&self) -> Vec<&str> {
        let mut out = Vec::new();
        match self {
            Condition::Edb(a) => out.extend(a.vars()),
            Condition::Compare { left, right, .. } => {
                left.collect_vars(&mut out);
                right.collect_vars(&mut out);
            }
        }
        out
    }
}

/// `Forall(X,Y; cond, ...)` quantifier prefix.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Forall {
    pub vars: Vec<String>,
    pub conditions: Vec<Condition>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SelectRule {
    pub lower: u32,
    /// `None` is the unbounded upper limit, written `999` in source.
    pub upper: Option<u32>,
    pub bound_vars: Vec<String>,
    pub conditions: Vec<Condition>,
    pub targets: Vec<Atom>,
}

/// Upper bound value that stands for "no upper bound".
pub const UNBOUNDED_SENTINEL: u32 = 999;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Connective {
    Disjunction,
    Conjunction,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ClauseKind {
    /// At least one atom is false.
    Not(Vec<Atom>),
    /// At least one atom is true.
    Disjunction(Vec<Atom>),
    Implication {
        body: Vec<Atom>,
        head: Vec<Atom>,
        connective: Connective,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Constraint {
    Select(SelectRule),
    Clause {
        forall: Option<Forall>,
        kind: ClauseKind,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstraintRule {
    pub constraint: Constraint,
    /// Written with the `Post` prefix.
    pub explicit_post: bool,
}

impl ConstraintRule {
    pub fn atoms(&self) -> Vec<&Atom> {
        match &self.constraint {
            Constraint::Select(s) => s.targets.iter().collect(),
            Constraint::Clause { kind, .. } => match kind {
                ClauseKind::Not(a) | ClauseKind::Disjunction(a) => a.iter().collect(),
                ClauseKind::Implication { body, head, .. } => body.iter().chain(head).collect(),
            },
        }
    }

    pub fn conditions(&self) -> &[Condition] {
        match &self.constraint {
            Constraint::Select(s) => &s.conditions,
            Constraint::Clause { forall, .. } => forall
                .as_ref()
                .map(|f| f.conditions.as_slice())
                .unwrap_or(&[]),
        }
    }

    /// Variables quantified by a prefix (Select bound variables or Forall).
    pub fn quantified_vars(&self) -> &[String] {
        match &self.constraint {
            Constraint::Select(s) => &s.bound_vars,
            Constraint::Clause { forall, .. } => {
                forall.as_ref().map(|f| f.vars.as_slice()).unwrap_or(&[])
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HornRule {
    pub forall: Option<Forall>,
    pub body: Vec<Atom>,
    pub head: Vec<Atom>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Program {
    pub predicates: Vec<PredicateDecl>,
    pub variables: Vec<VarDecl>,
    pub constraints: Vec<ConstraintRule>,
    pub horn_rules: Vec<HornRule>,
    pub post_constraints: Vec<ConstraintRule>,
}

impl Program {
    /// Predicates occurring in some Horn rule head, in first-occurrence order.
    pub fn horn_predicates(&self) -> IndexSet<&str> {
        self.horn_rules
            .iter()
            .flat_map(|r| r.head.iter().map(|a| a.predicate.as_str()))
            .collect()
    }

    pub fn predicate(&self, name: &str) -> Option<&PredicateDecl> {
        self.predicates.iter().find(|p| p.name == name)
    }

    pub fn variable(&self, name: &str) -> Option<&VarDecl> {
        self.variables.iter().find(|v| v.name == name)
    }

    /// Orders a set of variable names by declaration order. Undeclared names
    /// sort last in first-seen order.
    pub fn order_vars<'a>(&self, vars: impl IntoIterator<Item = &'a str>) -> Vec<String> {
        let wanted: IndexSet<&str> = vars.into_iter().collect();
        let mut out: Vec<String> = self
            .variables
            .iter()
            .filter(|v| wanted.contains(v.name.as_str()))
            .map(|v| v.name.clone())
            .collect();
        for w in wanted {
            if !out.iter().any(|o| o == w) {
                out.push(w.to_string());
            }
        }
        out.dedup();
        out
    }
}

// ---------------------------------------------------------------------------
// Printing. Output re-parses to an equal Program.

fn join<T: fmt::Display>(items: &[T], sep: &str) -> String {
    items
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(sep)
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => f.write_str(v),
            Term::Const(c) => write!(f, "{c}"),
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.predicate)?;
        if !self.args.is_empty() {
            write!(f, "({})", join(&self.args, ","))?;
        }
        Ok(())
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => write!(f, "{c}"),
            Expr::Var(v) => f.write_str(v),
            Expr::Neg(e) => write!(f, "-({e})"),
            Expr::Bin(op, l, r) => {
                let op = match op {
                    BinOp::Add => "+",
                    BinOp::Sub => "-",
                    BinOp::Mul => "*",
                    BinOp::Div => "/",
                    BinOp::Mod => " mod ",
                };
                write!(f, "({l}{op}{r})")
            }
        }
    }
}

impl fmt::Display for CmpOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CmpOp::Eq => "==",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        })
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Condition::Edb(a) => write!(f, "{a}"),
            Condition::Compare { left, op, right } => write!(f, "{left}{op}{right}"),
        }
    }
}

impl fmt::Display for Forall {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Forall({}", self.vars.join(","))?;
        if !self.conditions.is_empty() {
            write!(f, ";{}", join(&self.conditions, ","))?;
        }
        f.write_str(")")
    }
}

impl fmt::Display for SelectRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let upper = self.upper.unwrap_or(UNBOUNDED_SENTINEL);
        write!(f, "Select({},{}", self.lower, upper)?;
        for v in &self.bound_vars {
            write!(f, ",{v}")?;
        }
        if !self.conditions.is_empty() {
            write!(f, ";{}", join(&self.conditions, ","))?;
        }
        write!(f, ") {}.", join(&self.targets, ", "))
    }
}

impl fmt::Display for ConstraintRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.explicit_post {
            f.write_str("Post ")?;
        }
        match &self.constraint {
            Constraint::Select(s) => write!(f, "{s}"),
            Constraint::Clause { forall, kind } => {
                if let Some(fa) = forall {
                    write!(f, "{fa} ")?;
                }
                match kind {
                    ClauseKind::Not(a) => write!(f, "NOT {}.", join(a, ", ")),
                    ClauseKind::Disjunction(a) => write!(f, "{}.", join(a, " | ")),
                    ClauseKind::Implication {
                        body,
                        head,
                        connective,
                    } => {
                        let sep = match connective {
                            Connective::Disjunction => " | ",
                            Connective::Conjunction => ", ",
                        };
                        if body.is_empty() {
                            write!(f, "-> {}.", join(head, sep))
                        } else {
                            write!(f, "{} -> {}.", join(body, ", "), join(head, sep))
                        }
                    }
                }
            }
        }
    }
}

impl fmt::Display for HornRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Horn ")?;
        if let Some(fa) = &self.forall {
            write!(f, "{fa} ")?;
        }
        if !self.body.is_empty() {
            write!(f, "{} ", join(&self.body, ", "))?;
        }
        write!(f, "-> {}.", join(&self.head, ", "))
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "idbpred")?;
        for p in &self.predicates {
            if p.param_types.is_empty() {
                writeln!(f, "{}.", p.name)?;
            } else {
                writeln!(f, "{}({}).", p.name, p.param_types.join(","))?;
            }
        }
        writeln!(f, "idbvar")?;
        for v in &self.variables {
            writeln!(f, "{} {}.", v.type_name, v.name)?;
        }
        writeln!(f, "idbrules")?;
        for r in &self.constraints {
            writeln!(f, "{r}")?;
        }
        for r in &self.horn_rules {
            writeln!(f, "{r}")?;
        }
        for r in &self.post_constraints {
            writeln!(f, "{r}")?;
        }
        Ok(())
    }
}
