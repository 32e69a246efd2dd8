//! Instantiates a validated program over a database.

mod tdc;

use std::collections::HashSet;

use indexmap::{IndexMap, IndexSet};

pub use tdc::{read_tdc, to_tdc_string, write_tdc, TdcError};

use crate::edb::{Constant, ConstantBinding, Database};
use crate::idb::{
    Atom, BinOp, ClauseKind, CmpOp, Condition, Connective, Constraint, ConstraintRule, Expr,
    Program, Term, VarDecl,
};
use crate::theory::{AtomId, AtomKind, Clause, GroundTheory, HornRule, Lit, Select};

/// Variable assignment, in quantification order.
pub type Binding = IndexMap<String, Constant>;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum GroundError {
    #[error("variable {0} is not bound")]
    Unbound(String),
    #[error("arithmetic on non-integer value {0}")]
    NonIntegerArithmetic(Constant),
    #[error("ordered comparison {op} between non-integers {left} and {right}")]
    OrderedNonInteger {
        left: Constant,
        op: CmpOp,
        right: Constant,
    },
    #[error("division by zero")]
    DivisionByZero,
    #[error("integer overflow")]
    Overflow,
}

fn lookup<'b>(binding: &'b Binding, var: &str) -> Result<&'b Constant, GroundError> {
    binding
        .get(var)
        .ok_or_else(|| GroundError::Unbound(var.to_string()))
}

fn resolve(term: &Term, binding: &Binding) -> Result<Constant, GroundError> {
    match term {
        Term::Var(v) => lookup(binding, v).cloned(),
        Term::Const(c) => Ok(c.clone()),
    }
}

fn eval_expr(expr: &Expr, binding: &Binding) -> Result<Constant, GroundError> {
    let int = |c: Constant| c.as_int().ok_or(GroundError::NonIntegerArithmetic(c));
    match expr {
        Expr::Const(c) => Ok(c.clone()),
        Expr::Var(v) => lookup(binding, v).cloned(),
        Expr::Neg(e) => {
            let n = int(eval_expr(e, binding)?)?;
            n.checked_neg()
                .map(Constant::Int)
                .ok_or(GroundError::Overflow)
        }
        Expr::Bin(op, l, r) => {
            let a = int(eval_expr(l, binding)?)?;
            let b = int(eval_expr(r, binding)?)?;
            let v = match op {
                BinOp::Add => a.checked_add(b),
                BinOp::Sub => a.checked_sub(b),
                BinOp::Mul => a.checked_mul(b),
                BinOp::Div | BinOp::Mod if b == 0 => return Err(GroundError::DivisionByZero),
                BinOp::Div => a.checked_div(b),
                BinOp::Mod => a.checked_rem(b),
            };
            v.map(Constant::Int).ok_or(GroundError::Overflow)
        }
    }
}

/// Evaluates a condition under a binding that covers all of its variables.
pub fn eval_condition(
    cond: &Condition,
    binding: &Binding,
    db: &Database,
) -> Result<bool, GroundError> {
    match cond {
        Condition::Edb(atom) => {
            let tuple = atom
                .args
                .iter()
                .map(|t| resolve(t, binding))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(db
                .relation(&atom.predicate)
                .is_some_and(|r| r.contains(&tuple)))
        }
        Condition::Compare { left, op, right } => {
            let l = eval_expr(left, binding)?;
            let r = eval_expr(right, binding)?;
            if let (Some(a), Some(b)) = (l.as_int(), r.as_int()) {
                return Ok(match op {
                    CmpOp::Eq => a == b,
                    CmpOp::Ne => a != b,
                    CmpOp::Lt => a < b,
                    CmpOp::Le => a <= b,
                    CmpOp::Gt => a > b,
                    CmpOp::Ge => a >= b,
                });
            }
            match op {
                CmpOp::Eq => Ok(l.to_string() == r.to_string()),
                CmpOp::Ne => Ok(l.to_string() != r.to_string()),
                _ => Err(GroundError::OrderedNonInteger {
                    left: l,
                    op: *op,
                    right: r,
                }),
            }
        }
    }
}

/// Calls `f` for every extension of `base` to `vars` satisfying `conditions`,
/// in nested-loop order. Each condition is tested as soon as all of its
/// variables are bound.
fn for_each_binding<F>(
    vars: &[VarDecl],
    conditions: &[Condition],
    db: &Database,
    base: &Binding,
    f: &mut F,
) -> Result<(), GroundError>
where
    F: FnMut(&Binding) -> Result<(), GroundError>,
{
    let domains: Vec<Vec<Constant>> = vars
        .iter()
        .map(|v| {
            db.relation(&v.type_name)
                .map(|r| r.domain())
                .unwrap_or_default()
        })
        .collect();

    // Schedule each condition at the first depth where it is fully bound.
    let mut schedule: Vec<Vec<&Condition>> = vec![Vec::new(); vars.len() + 1];
    for c in conditions {
        let depth = c
            .vars()
            .iter()
            .map(|v| {
                vars.iter()
                    .position(|d| d.name == *v)
                    .map(|p| p + 1)
                    .unwrap_or(0)
            })
            .max()
            .unwrap_or(0);
        schedule[depth].push(c);
    }

    fn rec<F>(
        depth: usize,
        vars: &[VarDecl],
        domains: &[Vec<Constant>],
        schedule: &[Vec<&Condition>],
        db: &Database,
        binding: &mut Binding,
        f: &mut F,
    ) -> Result<(), GroundError>
    where
        F: FnMut(&Binding) -> Result<(), GroundError>,
    {
        for c in &schedule[depth] {
            if !eval_condition(c, binding, db)? {
                return Ok(());
            }
        }
        if depth == vars.len() {
            return f(binding);
        }
        for value in &domains[depth] {
            binding.insert(vars[depth].name.clone(), value.clone());
            rec(depth + 1, vars, domains, schedule, db, binding, f)?;
        }
        binding.shift_remove(&vars[depth].name);
        Ok(())
    }

    let mut binding = base.clone();
    rec(0, vars, &domains, &schedule, db, &mut binding, f)
}

/// All bindings of `vars` (cross product of their ranges) that satisfy every
/// condition, in declaration-major nested-loop order.
pub fn enumerate_bindings(
    vars: &[VarDecl],
    conditions: &[Condition],
    db: &Database,
) -> Result<Vec<Binding>, GroundError> {
    let mut out = Vec::new();
    for_each_binding(vars, conditions, db, &Binding::new(), &mut |b| {
        out.push(b.clone());
        Ok(())
    })?;
    Ok(out)
}

struct Grounder<'a> {
    program: &'a Program,
    db: &'a Database,
    horn_preds: IndexSet<&'a str>,
    theory: GroundTheory,
    table: IndexMap<(String, Vec<Constant>), AtomId>,
    seen_clauses: HashSet<Vec<Lit>>,
    seen_post: HashSet<Vec<Lit>>,
    seen_selects: HashSet<(u32, Option<u32>, Vec<AtomId>)>,
    seen_horn: HashSet<(AtomId, Vec<AtomId>)>,
}

impl Grounder<'_> {
    fn forget_seen(&mut self) {
        self.seen_clauses.clear();
        self.seen_post.clear();
        self.seen_selects.clear();
        self.seen_horn.clear();
    }

    fn var_decls<'v>(&self, names: impl IntoIterator<Item = &'v str>) -> Vec<VarDecl> {
        self.program
            .order_vars(names)
            .into_iter()
            .filter_map(|n| self.program.variable(&n).cloned())
            .collect()
    }

    fn atom(&mut self, atom: &Atom, binding: &Binding) -> Result<AtomId, GroundError> {
        let args = atom
            .args
            .iter()
            .map(|t| resolve(t, binding))
            .collect::<Result<Vec<_>, _>>()?;
        let key = (atom.predicate.clone(), args);
        if let Some(&id) = self.table.get(&key) {
            return Ok(id);
        }
        let kind = if self.horn_preds.contains(atom.predicate.as_str()) {
            AtomKind::Horn
        } else {
            AtomKind::Constraint
        };
        let id = self.theory.add_atom(key.0.clone(), key.1.clone(), kind);
        self.table.insert(key, id);
        Ok(id)
    }

    fn push_clause(&mut self, lits: Vec<Lit>, post: bool) {
        let mut clause: Clause = Vec::with_capacity(lits.len());
        for l in lits {
            if clause.contains(&!l) {
                return;
            }
            if !clause.contains(&l) {
                clause.push(l);
            }
        }
        let mut key = clause.clone();
        key.sort();
        let (seen, list) = if post {
            (&mut self.seen_post, &mut self.theory.post)
        } else {
            (&mut self.seen_clauses, &mut self.theory.clauses)
        };
        if seen.insert(key) {
            list.push(clause);
        }
    }

    fn constraint(&mut self, rule: &ConstraintRule, post: bool) -> Result<(), GroundError> {
        let mut names: Vec<&str> = rule.atoms().iter().flat_map(|a| a.vars()).collect();
        names.extend(rule.quantified_vars().iter().map(String::as_str));
        for c in rule.conditions() {
            names.extend(c.vars());
        }

        match &rule.constraint {
            Constraint::Select(sel) => {
                let bound: Vec<&str> = sel.bound_vars.iter().map(String::as_str).collect();
                let outer = self.var_decls(names.iter().copied().filter(|n| !bound.contains(n)));
                let inner = self.var_decls(bound.iter().copied());
                for_each_binding(&outer, &[], self.db, &Binding::new(), &mut |ob| {
                    let mut scope = IndexSet::new();
                    for_each_binding(&inner, &sel.conditions, self.db, ob, &mut |ib| {
                        for t in &sel.targets {
                            scope.insert(self.atom(t, ib)?);
                        }
                        Ok(())
                    })?;
                    if scope.is_empty() {
                        if sel.lower > 0 {
                            self.theory.ground_unsat = true;
                        }
                        return Ok(());
                    }
                    let scope: Vec<AtomId> = scope.into_iter().collect();
                    let mut key = scope.clone();
                    key.sort();
                    if self.seen_selects.insert((sel.lower, sel.upper, key)) {
                        self.theory.selects.push(Select {
                            lower: sel.lower,
                            upper: sel.upper,
                            scope,
                        });
                    }
                    Ok(())
                })
            }
            Constraint::Clause { kind, .. } => {
                let vars = self.var_decls(names);
                for_each_binding(
                    &vars,
                    rule.conditions(),
                    self.db,
                    &Binding::new(),
                    &mut |b| {
                        let ground = |atoms: &[Atom], positive: bool, g: &mut Self| {
                            atoms
                                .iter()
                                .map(|a| g.atom(a, b).map(|id| Lit::new(id, positive)))
                                .collect::<Result<Vec<_>, _>>()
                        };
                        match kind {
                            ClauseKind::Not(atoms) => {
                                let c = ground(atoms, false, self)?;
                                self.push_clause(c, post);
                            }
                            ClauseKind::Disjunction(atoms) => {
                                let c = ground(atoms, true, self)?;
                                self.push_clause(c, post);
                            }
                            ClauseKind::Implication {
                                body,
                                head,
                                connective,
                            } => {
                                let neg_body = ground(body, false, self)?;
                                let heads = ground(head, true, self)?;
                                match connective {
                                    Connective::Disjunction => {
                                        self.push_clause([neg_body, heads].concat(), post);
                                    }
                                    Connective::Conjunction => {
                                        for h in heads {
                                            let mut c = neg_body.clone();
                                            c.push(h);
                                            self.push_clause(c, post);
                                        }
                                    }
                                }
                            }
                        }
                        Ok(())
                    },
                )
            }
        }
    }

    fn horn(&mut self, rule: &crate::idb::HornRule) -> Result<(), GroundError> {
        let mut names: Vec<&str> = rule
            .body
            .iter()
            .chain(&rule.head)
            .flat_map(|a| a.vars())
            .collect();
        let conditions: &[Condition] = match &rule.forall {
            Some(fa) => {
                names.extend(fa.vars.iter().map(String::as_str));
                for c in &fa.conditions {
                    names.extend(c.vars());
                }
                &fa.conditions
            }
            None => &[],
        };
        let vars = self.var_decls(names);
        for_each_binding(&vars, conditions, self.db, &Binding::new(), &mut |b| {
            let mut body = IndexSet::new();
            for a in &rule.body {
                body.insert(self.atom(a, b)?);
            }
            let body: Vec<AtomId> = body.into_iter().collect();
            let mut key = body.clone();
            key.sort();
            for h in &rule.head {
                let head = self.atom(h, b)?;
                if self.seen_horn.insert((head, key.clone())) {
                    self.theory.horn.push(HornRule {
                        head,
                        body: body.clone(),
                    });
                }
            }
            Ok(())
        })
    }
}

/// Grounds `program` over `db`. The program should validate cleanly against
/// `db`; undeclared variables are otherwise silently unquantified.
pub fn ground(program: &Program, db: &Database) -> Result<GroundTheory, GroundError> {
    let mut g = Grounder {
        program,
        db,
        horn_preds: program.horn_predicates(),
        theory: GroundTheory::new(),
        table: IndexMap::new(),
        seen_clauses: HashSet::new(),
        seen_post: HashSet::new(),
        seen_selects: HashSet::new(),
        seen_horn: HashSet::new(),
    };
    // Duplicates are dropped within each rule schema, never across schemas.
    for r in &program.constraints {
        g.forget_seen();
        g.constraint(r, false)?;
    }
    for r in &program.horn_rules {
        g.forget_seen();
        g.horn(r)?;
    }
    for r in &program.post_constraints {
        g.forget_seen();
        g.constraint(r, true)?;
    }
    let mut theory = g.theory;
    if theory.ground_unsat {
        theory.clauses.clear();
        theory.selects.clear();
        theory.horn.clear();
        theory.post.clear();
    }
    Ok(theory)
}

/// Name of the theory file written by `ground`: constant values, data file
/// names and the rule file name joined by `_`, plus `.tdc`.
pub fn output_name(bindings: &[ConstantBinding], data_files: &[&str], rule_file: &str) -> String {
    let mut parts: Vec<&str> = bindings.iter().map(|b| b.value.as_str()).collect();
    parts.extend(data_files);
    parts.push(rule_file);
    format!("{}.tdc", parts.join("_"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::edb::parse_edb;
    use crate::fixtures::{hamilton, GRAPH};
    use crate::idb::{parse_idb, validate};

    fn decl(name: &str, ty: &str) -> VarDecl {
        VarDecl {
            name: name.into(),
            type_name: ty.into(),
        }
    }

    fn pairs(bs: &[Binding]) -> Vec<Vec<String>> {
        bs.iter()
            .map(|b| b.values().map(ToString::to_string).collect())
            .collect()
    }

    fn cond(src: &str) -> Condition {
        let p = parse_idb(&format!(
            "idbpred\np(vtx).\nidbvar\nvtx X,Y.\nidbrules\nForall(X,Y;{src}) NOT p(X)."
        ))
        .unwrap();
        p.constraints[0].conditions()[0].clone()
    }

    /// Independent oracle: full cross product, then filter.
    fn brute_force(db: &Database, keep: impl Fn(&Constant, &Constant) -> bool) -> Vec<Vec<String>> {
        let dom = db.relation("vtx").unwrap().domain();
        let mut out = Vec::new();
        for x in &dom {
            for y in &dom {
                if keep(x, y) {
                    out.push(vec![x.to_string(), y.to_string()]);
                }
            }
        }
        out
    }

    #[test]
    fn bindings_filtered_by_edge() {
        let db = parse_edb(GRAPH).unwrap();
        let vars = [decl("X", "vtx"), decl("Y", "vtx")];
        let got = enumerate_bindings(&vars, &[cond("edge(X,Y)")], &db).unwrap();
        let edge = db.relation("edge").unwrap();
        let expected = brute_force(&db, |x, y| edge.contains(&[x.clone(), y.clone()]));
        assert_eq!(pairs(&got), expected);
        assert_eq!(expected, vec![vec!["1", "3"], vec!["3", "2"]]);
    }

    #[test]
    fn bindings_full_range_and_inequality() {
        let db = parse_edb(GRAPH).unwrap();
        let got = enumerate_bindings(&[decl("X", "vtx")], &[], &db).unwrap();
        assert_eq!(pairs(&got), vec![vec!["1"], vec!["2"], vec!["3"]]);

        let small = parse_edb("vtx(1). vtx(2).").unwrap();
        let vars = [decl("X", "vtx"), decl("Y", "vtx")];
        let got = enumerate_bindings(&vars, &[cond("X != Y")], &small).unwrap();
        assert_eq!(pairs(&got), vec![vec!["1", "2"], vec!["2", "1"]]);
    }

    #[test]
    fn condition_evaluation() {
        let db = parse_edb(GRAPH).unwrap();
        let b: Binding = [
            ("X".to_string(), Constant::Int(1)),
            ("Y".to_string(), Constant::Int(3)),
        ]
        .into_iter()
        .collect();
        assert!(!eval_condition(&cond("X != 1"), &b, &db).unwrap());
        assert!(eval_condition(&cond("edge(X,Y)"), &b, &db).unwrap());
        assert!(eval_condition(&cond("X+1 == 2"), &b, &db).unwrap());
        assert!(eval_condition(&cond("-7 / 2 == -3"), &b, &db).unwrap());
        assert!(eval_condition(&cond("-7 mod 2 == -1"), &b, &db).unwrap());
        assert_eq!(
            eval_condition(&cond("X / 0 == 1"), &b, &db),
            Err(GroundError::DivisionByZero)
        );
        let s: Binding = [("X".to_string(), Constant::from("a"))]
            .into_iter()
            .collect();
        assert!(eval_condition(&cond("X == a"), &s, &db).unwrap());
        assert!(matches!(
            eval_condition(&cond("X < 3"), &s, &db),
            Err(GroundError::OrderedNonInteger { .. })
        ));
    }

    fn names(t: &GroundTheory) -> Vec<String> {
        t.atoms.iter().map(ToString::to_string).collect()
    }

    #[test]
    fn figure_grounding() {
        let db = parse_edb(GRAPH).unwrap();
        let p = hamilton();
        let t = ground(&p, &db).unwrap();
        assert_eq!(
            names(&t),
            vec!["hc(1,3)", "hc(3,2)", "vstd(3)", "vstd(2)", "vstd(1)"]
        );
        assert!(t.ground_unsat);
        assert_eq!(t.num_constraints(), 0);
        assert_eq!(t.atoms[2].kind, AtomKind::Horn);
        assert_eq!(t.atoms[0].kind, AtomKind::Constraint);
    }

    #[test]
    fn single_not_rule() {
        let p = parse_idb("idbpred\np(t).\nidbvar\nt X.\nidbrules\nNOT p(X).").unwrap();
        let db = parse_edb("t(1). t(2).").unwrap();
        let t = ground(&p, &db).unwrap();
        assert_eq!(names(&t), vec!["p(1)", "p(2)"]);
        assert_eq!(
            t.clauses,
            vec![vec![Lit::neg(AtomId(1))], vec![Lit::neg(AtomId(2))]]
        );
    }

    #[test]
    fn implication_shapes_and_dedup() {
        let src = "idbpred\np(t). q(t). r(t).\nidbvar\nt X,Y.\nidbrules\n\
                   p(X) -> q(X) | r(X).\np(X) -> q(X), r(X).\n\
                   p(X) -> p(X).\nForall(X,Y) NOT q(X).";
        let p = parse_idb(src).unwrap();
        let db = parse_edb("t(1). t(2).").unwrap();
        let t = ground(&p, &db).unwrap();
        // Per X: one disjunctive clause, two conjunctive ones, the tautology
        // dropped, and `NOT q(X)` once despite two values of Y.
        assert_eq!(t.clauses.len(), 8);
        assert_eq!(t.clauses[0].len(), 3);
    }

    #[test]
    fn duplicates_survive_across_schemas() {
        let src = "idbpred\np(t). q(t).\nidbvar\nt X.\nidbrules\n\
                   Select(0,1) p(X), q(X).\nSelect(0,1) q(X), p(X).\nNOT p(X).\nNOT p(X).";
        let p = parse_idb(src).unwrap();
        let db = parse_edb("t(1).").unwrap();
        let t = ground(&p, &db).unwrap();
        assert_eq!(t.selects.len(), 2);
        assert_eq!(t.clauses.len(), 2);
    }

    #[test]
    fn empty_scope_with_zero_lower_is_dropped() {
        let src = "idbpred\np(t,t).\nidbvar\nt X,Y.\nidbrules\nSelect(0,1,Y;e(X,Y)) p(X,Y).";
        let p = parse_idb(src).unwrap();
        let db = parse_edb("t(1). t(2). e(1,2).").unwrap();
        assert!(validate(&p, &db).is_empty());
        let t = ground(&p, &db).unwrap();
        assert!(!t.ground_unsat);
        assert_eq!(t.selects.len(), 1);
        assert_eq!(t.selects[0].scope, vec![AtomId(1)]);
    }

    #[test]
    fn output_names() {
        let i1 = [ConstantBinding::new("i", "1")];
        assert_eq!(output_name(&i1, &["1.gph"], "hcp"), "1_1.gph_hcp.tdc");
        assert_eq!(output_name(&[], &["d"], "r"), "d_r.tdc");
        let bn = [
            ConstantBinding::new("b", "3"),
            ConstantBinding::new("n", "14"),
        ];
        assert_eq!(
            output_name(&bn, &["schur.edb"], "schur"),
            "3_14_schur.edb_schur.tdc"
        );
    }
}
