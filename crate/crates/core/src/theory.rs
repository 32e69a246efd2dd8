//! Propositional DC theories and their answer-set semantics.
//!
//! A theory has three parts over atoms split into constraint atoms (guessed)
//! and Horn atoms (derived):
//!
//! * constraint clauses and Select cardinality constraints, over constraint
//!   atoms only;
//! * definite Horn rules whose heads are Horn atoms;
//! * post-constraint clauses over any atoms.
//!
//! A set `M` of constraint atoms is an answer set when it satisfies the
//! constraints and its closure under the Horn rules satisfies the
//! post-constraints.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use crate::edb::Constant;
use crate::Diagnostic;

/// Dense 1-based atom identifier.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AtomId(pub u32);

impl AtomId {
    pub fn index(self) -> usize {
        self.0 as usize - 1
    }

    pub fn from_index(i: usize) -> AtomId {
        AtomId(i as u32 + 1)
    }
}

impl fmt::Display for AtomId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A signed atom: `+id` or `-id`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lit(i32);

impl Lit {
    pub fn new(atom: AtomId, positive: bool) -> Lit {
        let v = atom.0 as i32;
        Lit(if positive { v } else { -v })
    }

    pub fn pos(atom: AtomId) -> Lit {
        Lit::new(atom, true)
    }

    pub fn neg(atom: AtomId) -> Lit {
        Lit::new(atom, false)
    }

    /// From the signed-integer form used in `.tdc` files. Zero is rejected.
    pub fn from_signed(v: i32) -> Option<Lit> {
        (v != 0 && v != i32::MIN).then_some(Lit(v))
    }

    pub fn to_signed(self) -> i32 {
        self.0
    }

    pub fn atom(self) -> AtomId {
        AtomId(self.0.unsigned_abs())
    }

    pub fn is_positive(self) -> bool {
        self.0 > 0
    }
}

impl std::ops::Not for Lit {
    type Output = Lit;
    fn not(self) -> Lit {
        Lit(-self.0)
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AtomKind {
    /// Member of At_C: may be guessed.
    Constraint,
    /// Member of At_H: only ever derived.
    Horn,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroundAtom {
    pub id: AtomId,
    pub predicate: String,
    pub args: Vec<Constant>,
    pub kind: AtomKind,
}

impl fmt::Display for GroundAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.predicate)?;
        if !self.args.is_empty() {
            let args: Vec<String> = self.args.iter().map(ToString::to_string).collect();
            write!(f, "({})", args.join(","))?;
        }
        Ok(())
    }
}

pub type Clause = Vec<Lit>;

/// Between `lower` and `upper` atoms of `scope` are true.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Select {
    pub lower: u32,
    /// `None` is unbounded.
    pub upper: Option<u32>,
    pub scope: Vec<AtomId>,
}

impl Select {
    pub fn admits(&self, count: usize) -> bool {
        count >= self.lower as usize && self.upper.is_none_or(|u| count <= u as usize)
    }
}

/// Definite rule `body → head`; an empty body makes the head a fact.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HornRule {
    pub head: AtomId,
    pub body: Vec<AtomId>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GroundTheory {
    pub atoms: Vec<GroundAtom>,
    pub clauses: Vec<Clause>,
    pub selects: Vec<Select>,
    pub horn: Vec<HornRule>,
    pub post: Vec<Clause>,
    /// Grounding already proved the theory has no answer set.
    pub ground_unsat: bool,
}

impl GroundTheory {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_atom(
        &mut self,
        predicate: impl Into<String>,
        args: Vec<Constant>,
        kind: AtomKind,
    ) -> AtomId {
        let id = AtomId::from_index(self.atoms.len());
        self.atoms.push(GroundAtom {
            id,
            predicate: predicate.into(),
            args,
            kind,
        });
        id
    }

    pub fn atom(&self, id: AtomId) -> &GroundAtom {
        &self.atoms[id.index()]
    }

    pub fn num_atoms(&self) -> usize {
        self.atoms.len()
    }

    pub fn kind(&self, id: AtomId) -> AtomKind {
        self.atoms[id.index()].kind
    }

    pub fn constraint_atoms(&self) -> impl Iterator<Item = AtomId> + '_ {
        self.atoms
            .iter()
            .filter(|a| a.kind == AtomKind::Constraint)
            .map(|a| a.id)
    }

    pub fn horn_atoms(&self) -> impl Iterator<Item = AtomId> + '_ {
        self.atoms
            .iter()
            .filter(|a| a.kind == AtomKind::Horn)
            .map(|a| a.id)
    }

    /// Total number of ground constraints of all three kinds.
    pub fn num_constraints(&self) -> usize {
        self.clauses.len() + self.selects.len() + self.horn.len() + self.post.len()
    }

    /// Atoms occurring in post-constraints.
    pub fn post_atoms(&self) -> BTreeSet<AtomId> {
        self.post.iter().flatten().map(|l| l.atom()).collect()
    }
}

/// Answer set together with its Horn closure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnswerSet {
    pub m: BTreeSet<AtomId>,
    pub closure: BTreeSet<AtomId>,
}

impl AnswerSet {
    /// Horn atoms derived from `m`.
    pub fn derived(&self) -> impl Iterator<Item = AtomId> + '_ {
        self.closure.iter().copied().filter(|a| !self.m.contains(a))
    }
}

/// Least model of `horn ∪ seed` by counter-based forward chaining.
pub fn least_model(horn: &[HornRule], seed: &BTreeSet<AtomId>) -> BTreeSet<AtomId> {
    let max = horn
        .iter()
        .flat_map(|r| r.body.iter().chain(std::iter::once(&r.head)))
        .chain(seed.iter())
        .map(|a| a.0 as usize)
        .max()
        .unwrap_or(0);
    let mut truth = vec![false; max];
    for a in seed {
        truth[a.index()] = true;
    }
    close(horn, &mut truth);
    truth
        .iter()
        .enumerate()
        .filter(|(_, &t)| t)
        .map(|(i, _)| AtomId::from_index(i))
        .collect()
}

/// Extends `truth` (indexed by `AtomId::index`) to its least Horn closure in
/// time linear in the total rule size.
pub(crate) fn close(horn: &[HornRule], truth: &mut [bool]) {
    let mut watchers: Vec<Vec<usize>> = vec![Vec::new(); truth.len()];
    let mut missing = Vec::with_capacity(horn.len());
    let mut queue: Vec<AtomId> = Vec::new();
    for (r, rule) in horn.iter().enumerate() {
        let body: HashSet<AtomId> = rule.body.iter().copied().collect();
        let mut n = 0;
        for a in body {
            if !truth[a.index()] {
                watchers[a.index()].push(r);
                n += 1;
            }
        }
        missing.push(n);
        if n == 0 && !truth[rule.head.index()] {
            truth[rule.head.index()] = true;
            queue.push(rule.head);
        }
    }
    while let Some(a) = queue.pop() {
        for &r in &watchers[a.index()] {
            missing[r] -= 1;
            let head = horn[r].head;
            if missing[r] == 0 && !truth[head.index()] {
                truth[head.index()] = true;
                queue.push(head);
            }
        }
    }
}

fn clause_holds(clause: &[Lit], truth: &[bool]) -> bool {
    clause
        .iter()
        .any(|l| truth[l.atom().index()] == l.is_positive())
}

/// Decides whether `m` is an answer set of `theory`.
pub fn check_answer_set(theory: &GroundTheory, m: &BTreeSet<AtomId>) -> bool {
    if theory.ground_unsat {
        return false;
    }
    let n = theory.num_atoms();
    let mut truth = vec![false; n];
    for &a in m {
        if a.0 == 0 || a.index() >= n || theory.kind(a) != AtomKind::Constraint {
            return false;
        }
        truth[a.index()] = true;
    }
    if !theory.clauses.iter().all(|c| clause_holds(c, &truth)) {
        return false;
    }
    for s in &theory.selects {
        let scope: HashSet<AtomId> = s.scope.iter().copied().collect();
        let count = scope.iter().filter(|a| truth[a.index()]).count();
        if !s.admits(count) {
            return false;
        }
    }
    close(&theory.horn, &mut truth);
    theory.post.iter().all(|c| clause_holds(c, &truth))
}

/// Builds the answer-set record (with closure) for `m`, if it is one.
pub fn answer_set(theory: &GroundTheory, m: BTreeSet<AtomId>) -> Option<AnswerSet> {
    if !check_answer_set(theory, &m) {
        return None;
    }
    let closure = least_model(&theory.horn, &m);
    Some(AnswerSet { m, closure })
}

/// Checks the structural invariants of a theory.
pub fn validate_theory(theory: &GroundTheory) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut report = |m: String| out.push(Diagnostic { message: m });
    let n = theory.num_atoms();
    let valid = |a: AtomId| a.0 >= 1 && (a.0 as usize) <= n;

    let mut names = HashSet::new();
    for (i, a) in theory.atoms.iter().enumerate() {
        if a.id != AtomId::from_index(i) {
            report(format!("atom {} stored at position {}", a.id, i + 1));
        }
        if !names.insert((a.predicate.as_str(), &a.args)) {
            report(format!("atom {a} appears twice"));
        }
    }

    let kind_of = |a: AtomId| theory.atoms[a.index()].kind;
    for (i, c) in theory.clauses.iter().enumerate() {
        if c.is_empty() && !theory.ground_unsat {
            report(format!("clause {} is empty", i + 1));
        }
        for l in c {
            if !valid(l.atom()) {
                report(format!(
                    "clause {} references unknown atom {}",
                    i + 1,
                    l.atom()
                ));
            } else if kind_of(l.atom()) != AtomKind::Constraint {
                report(format!(
                    "clause {} mentions Horn atom {}",
                    i + 1,
                    theory.atom(l.atom())
                ));
            }
        }
    }
    for (i, s) in theory.selects.iter().enumerate() {
        if let Some(u) = s.upper {
            if s.lower > u {
                report(format!(
                    "select {}: lower {} exceeds upper {}",
                    i + 1,
                    s.lower,
                    u
                ));
            }
        }
        if s.scope.is_empty() && !theory.ground_unsat {
            report(format!("select {} has an empty scope", i + 1));
        }
        for &a in &s.scope {
            if !valid(a) {
                report(format!("select {} references unknown atom {a}", i + 1));
            } else if kind_of(a) != AtomKind::Constraint {
                report(format!(
                    "select {} mentions Horn atom {}",
                    i + 1,
                    theory.atom(a)
                ));
            }
        }
    }
    for (i, r) in theory.horn.iter().enumerate() {
        if !valid(r.head) {
            report(format!("horn rule {} has unknown head {}", i + 1, r.head));
        } else if kind_of(r.head) != AtomKind::Horn {
            report(format!(
                "horn rule {} derives constraint atom {}",
                i + 1,
                theory.atom(r.head)
            ));
        }
        for &a in &r.body {
            if !valid(a) {
                report(format!("horn rule {} references unknown atom {a}", i + 1));
            }
        }
    }
    for (i, c) in theory.post.iter().enumerate() {
        for l in c {
            if !valid(l.atom()) {
                report(format!(
                    "post-constraint {} references unknown atom {}",
                    i + 1,
                    l.atom()
                ));
            }
        }
    }
    out
}
