//! Counter-based propagation over clauses, Select constraints, Horn rules and
//! post-constraints.
//!
//! Every constraint keeps counts of its true and false members. Counts are
//! updated when a trail entry is *processed*, not when it is assigned, so
//! `undo_to` only reverses entries below the queue head.
//!
//! Rules applied to exhaustion:
//!
//! 1. unit propagation on constraint clauses;
//! 2. Select bounds: conflict when `t > upper` or `t + u < lower`, all
//!    unassigned false when `t == upper`, all true when `t + u == lower`;
//! 3. Horn chaining: a rule with an all-true body makes its head true;
//! 4. a rule with a false body atom is removed;
//! 5. an unassigned Horn atom with no remaining rules is false;
//! 6. a post-constraint with every literal false is a conflict; when only
//!    one constraint-atom literal is left open it is forced.
//!
//! Horn atoms are never assigned by rules 1, 2 or 6.

use std::collections::HashSet;

use crate::theory::{AtomId, AtomKind, GroundTheory, Lit};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Value {
    Unassigned,
    True,
    False,
}

impl Value {
    fn of(b: bool) -> Value {
        if b {
            Value::True
        } else {
            Value::False
        }
    }
}

/// Why an atom holds its value.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Reason {
    /// Search decision or lookahead probe.
    Branch,
    /// Forced by a clause, Select, post-constraint or failed probe.
    Propagated,
    HornDerived,
    HornExhausted,
    /// Left underived when every constraint atom was assigned.
    Finalized,
}

#[derive(Clone, Debug)]
pub(crate) struct ClauseState {
    pub lits: Vec<Lit>,
    pub post: bool,
    pub n_true: u32,
    pub n_false: u32,
}

impl ClauseState {
    pub fn open(&self) -> u32 {
        self.lits.len() as u32 - self.n_true - self.n_false
    }
}

#[derive(Clone, Debug)]
pub(crate) struct SelectState {
    pub lower: u32,
    pub upper: u32,
    pub scope: Vec<AtomId>,
    pub n_true: u32,
    pub n_false: u32,
}

impl SelectState {
    pub fn open(&self) -> u32 {
        self.scope.len() as u32 - self.n_true - self.n_false
    }

    /// No completion of the current counts can violate the bounds.
    pub fn is_satisfied(&self) -> bool {
        self.n_true >= self.lower && self.n_true + self.open() <= self.upper
    }
}

#[derive(Clone, Debug)]
pub(crate) struct RuleState {
    pub head: AtomId,
    pub body: Vec<AtomId>,
    pub n_true: u32,
    pub n_false: u32,
}

#[derive(Clone, Debug)]
pub struct Propagator {
    kinds: Vec<AtomKind>,
    value: Vec<Value>,
    reason: Vec<Reason>,
    trail: Vec<Lit>,
    qhead: usize,
    pub(crate) clauses: Vec<ClauseState>,
    pub(crate) selects: Vec<SelectState>,
    rules: Vec<RuleState>,
    clause_occ: Vec<Vec<(u32, bool)>>,
    select_occ: Vec<Vec<u32>>,
    body_occ: Vec<Vec<u32>>,
    live_support: Vec<u32>,
    satisfied: u64,
    unassigned_c: usize,
    processed: u64,
    root_conflict: bool,
}

fn dedup<T: Copy + Eq + std::hash::Hash>(items: &[T]) -> Vec<T> {
    let mut seen = HashSet::new();
    items.iter().copied().filter(|x| seen.insert(*x)).collect()
}

impl Propagator {
    /// Builds the propagator and applies everything forced at the root. A
    /// root-level contradiction is reported by [`Propagator::root_conflict`].
    pub fn new(theory: &GroundTheory) -> Propagator {
        let n = theory.num_atoms();
        let mut p = Propagator {
            kinds: theory.atoms.iter().map(|a| a.kind).collect(),
            value: vec![Value::Unassigned; n],
            reason: vec![Reason::Branch; n],
            trail: Vec::with_capacity(n),
            qhead: 0,
            clauses: Vec::new(),
            selects: Vec::new(),
            rules: Vec::new(),
            clause_occ: vec![Vec::new(); n],
            select_occ: vec![Vec::new(); n],
            body_occ: vec![Vec::new(); n],
            live_support: vec![0; n],
            satisfied: 0,
            unassigned_c: theory.constraint_atoms().count(),
            processed: 0,
            root_conflict: theory.ground_unsat,
        };

        let clauses = theory
            .clauses
            .iter()
            .map(|c| (c, false))
            .chain(theory.post.iter().map(|c| (c, true)));
        for (c, post) in clauses {
            let lits = dedup(c);
            if lits.iter().any(|l| lits.contains(&!*l)) {
                continue;
            }
            let ci = p.clauses.len() as u32;
            for l in &lits {
                p.clause_occ[l.atom().index()].push((ci, l.is_positive()));
            }
            p.clauses.push(ClauseState {
                lits,
                post,
                n_true: 0,
                n_false: 0,
            });
        }
        for s in &theory.selects {
            let scope = dedup(&s.scope);
            let si = p.selects.len() as u32;
            for a in &scope {
                p.select_occ[a.index()].push(si);
            }
            p.selects.push(SelectState {
                lower: s.lower,
                upper: s.upper.unwrap_or(u32::MAX),
                scope,
                n_true: 0,
                n_false: 0,
            });
        }
        for r in &theory.horn {
            let body = dedup(&r.body);
            let ri = p.rules.len() as u32;
            for a in &body {
                p.body_occ[a.index()].push(ri);
            }
            p.live_support[r.head.index()] += 1;
            p.rules.push(RuleState {
                head: r.head,
                body,
                n_true: 0,
                n_false: 0,
            });
        }

        if !p.root_conflict {
            p.root_conflict = !p.init();
        }
        p
    }

    fn init(&mut self) -> bool {
        for ci in 0..self.clauses.len() {
            if !self.check_clause(ci) {
                return false;
            }
        }
        for si in 0..self.selects.len() {
            if !self.check_select(si) {
                return false;
            }
        }
        for ri in 0..self.rules.len() {
            if self.rules[ri].body.is_empty() && !self.derive(self.rules[ri].head) {
                return false;
            }
        }
        for i in 0..self.kinds.len() {
            if self.kinds[i] == AtomKind::Horn
                && self.live_support[i] == 0
                && self.value[i] == Value::Unassigned
            {
                self.assign(Lit::neg(AtomId::from_index(i)), Reason::HornExhausted);
            }
        }
        self.propagate()
    }

    pub fn root_conflict(&self) -> bool {
        self.root_conflict
    }

    pub fn value(&self, atom: AtomId) -> Value {
        self.value[atom.index()]
    }

    pub fn reason(&self, atom: AtomId) -> Reason {
        self.reason[atom.index()]
    }

    pub fn kind(&self, atom: AtomId) -> AtomKind {
        self.kinds[atom.index()]
    }

    pub fn num_atoms(&self) -> usize {
        self.kinds.len()
    }

    pub fn lit_value(&self, lit: Lit) -> Value {
        match self.value[lit.atom().index()] {
            Value::Unassigned => Value::Unassigned,
            v => Value::of((v == Value::True) == lit.is_positive()),
        }
    }

    /// Every trail entry has been processed.
    pub fn is_fixpoint(&self) -> bool {
        self.qhead == self.trail.len()
    }

    pub fn trail(&self) -> &[Lit] {
        &self.trail
    }

    /// Unassigned constraint atoms remaining.
    pub fn unassigned_constraint_atoms(&self) -> usize {
        self.unassigned_c
    }

    /// Constraint clauses currently satisfied.
    pub fn satisfied_clauses(&self) -> u64 {
        self.satisfied
    }

    /// Trail entries processed so far, including undone ones.
    pub fn processed(&self) -> u64 {
        self.processed
    }

    pub fn assign(&mut self, lit: Lit, reason: Reason) {
        let i = lit.atom().index();
        debug_assert_eq!(
            self.value[i],
            Value::Unassigned,
            "atom {} assigned twice",
            lit.atom()
        );
        debug_assert!(
            !(reason == Reason::Branch && self.kinds[i] == AtomKind::Horn),
            "Horn atom {} branched on",
            lit.atom()
        );
        self.value[i] = Value::of(lit.is_positive());
        self.reason[i] = reason;
        self.trail.push(lit);
        if self.kinds[i] == AtomKind::Constraint {
            self.unassigned_c -= 1;
        }
    }

    /// Assigns `lit` if its atom is open. Returns false if it is already
    /// assigned the opposite way.
    fn force(&mut self, lit: Lit, reason: Reason) -> bool {
        match self.lit_value(lit) {
            Value::Unassigned => {
                self.assign(lit, reason);
                true
            }
            Value::True => true,
            Value::False => false,
        }
    }

    fn derive(&mut self, head: AtomId) -> bool {
        self.force(Lit::pos(head), Reason::HornDerived)
    }

    fn check_clause(&mut self, ci: usize) -> bool {
        let c = &self.clauses[ci];
        if c.n_true > 0 {
            return true;
        }
        let len = c.lits.len() as u32;
        if c.n_false == len {
            return false;
        }
        if c.n_false + 1 < len {
            return true;
        }
        // One literal left by count; pending assignments may already have
        // settled it, in which case their processing decides.
        let post = c.post;
        let mut open = None;
        for &l in &c.lits {
            match self.lit_value(l) {
                Value::True => return true,
                Value::Unassigned => open = Some(l),
                Value::False => {}
            }
        }
        match open {
            Some(l) if post && self.kinds[l.atom().index()] == AtomKind::Horn => true,
            Some(l) => {
                self.assign(l, Reason::Propagated);
                true
            }
            None => true,
        }
    }

    fn check_select(&mut self, si: usize) -> bool {
        let s = &self.selects[si];
        let (t, u) = (s.n_true, s.open());
        if t > s.upper || t + u < s.lower {
            return false;
        }
        if u == 0 {
            return true;
        }
        let polarity = if t == s.upper {
            false
        } else if t + u == s.lower {
            true
        } else {
            return true;
        };
        for k in 0..self.selects[si].scope.len() {
            let a = self.selects[si].scope[k];
            if self.value[a.index()] == Value::Unassigned {
                self.assign(Lit::new(a, polarity), Reason::Propagated);
            }
        }
        true
    }

    /// Processes pending trail entries to a fixpoint. Returns false on
    /// conflict, leaving the remaining entries unprocessed.
    pub fn propagate(&mut self) -> bool {
        while self.qhead < self.trail.len() {
            let lit = self.trail[self.qhead];
            self.qhead += 1;
            self.processed += 1;
            if !self.process(lit) {
                return false;
            }
        }
        true
    }

    /// Updates every counter touched by `lit`; all updates are applied even
    /// when a conflict is found so that undo stays symmetric.
    fn process(&mut self, lit: Lit) -> bool {
        let a = lit.atom().index();
        let v = lit.is_positive();
        let mut ok = true;

        let occ = std::mem::take(&mut self.clause_occ[a]);
        for &(ci, pol) in &occ {
            let c = &mut self.clauses[ci as usize];
            if pol == v {
                c.n_true += 1;
                if c.n_true == 1 && !c.post {
                    self.satisfied += 1;
                }
            } else {
                c.n_false += 1;
                if ok && !self.check_clause(ci as usize) {
                    ok = false;
                }
            }
        }
        self.clause_occ[a] = occ;

        let occ = std::mem::take(&mut self.select_occ[a]);
        for &si in &occ {
            let s = &mut self.selects[si as usize];
            if v {
                s.n_true += 1;
            } else {
                s.n_false += 1;
            }
            if ok && !self.check_select(si as usize) {
                ok = false;
            }
        }
        self.select_occ[a] = occ;

        let occ = std::mem::take(&mut self.body_occ[a]);
        for &ri in &occ {
            let r = &mut self.rules[ri as usize];
            let head = r.head;
            if v {
                r.n_true += 1;
                if r.n_false == 0 && r.n_true as usize == r.body.len() && ok && !self.derive(head) {
                    ok = false;
                }
            } else {
                r.n_false += 1;
                if r.n_false == 1 {
                    let h = head.index();
                    self.live_support[h] -= 1;
                    if self.live_support[h] == 0 && self.value[h] == Value::Unassigned {
                        self.assign(Lit::neg(head), Reason::HornExhausted);
                    }
                }
            }
        }
        self.body_occ[a] = occ;
        ok
    }

    fn unprocess(&mut self, lit: Lit) {
        let a = lit.atom().index();
        let v = lit.is_positive();
        for &(ci, pol) in &self.clause_occ[a] {
            let c = &mut self.clauses[ci as usize];
            if pol == v {
                c.n_true -= 1;
                if c.n_true == 0 && !c.post {
                    self.satisfied -= 1;
                }
            } else {
                c.n_false -= 1;
            }
        }
        for &si in &self.select_occ[a] {
            let s = &mut self.selects[si as usize];
            if v {
                s.n_true -= 1;
            } else {
                s.n_false -= 1;
            }
        }
        for &ri in &self.body_occ[a] {
            let r = &mut self.rules[ri as usize];
            if v {
                r.n_true -= 1;
            } else {
                r.n_false -= 1;
                if r.n_false == 0 {
                    self.live_support[r.head.index()] += 1;
                }
            }
        }
    }

    /// Retracts every assignment made at or after trail position `mark`.
    pub fn undo_to(&mut self, mark: usize) {
        while self.trail.len() > mark {
            let lit = self.trail.pop().expect("nonempty");
            if self.trail.len() < self.qhead {
                self.unprocess(lit);
            }
            let i = lit.atom().index();
            self.value[i] = Value::Unassigned;
            if self.kinds[i] == AtomKind::Constraint {
                self.unassigned_c += 1;
            }
        }
        self.qhead = self.qhead.min(mark);
    }

    /// Sets false every open Horn atom that cannot be derived even if all open
    /// constraint atoms became true. This catches atoms that only support one
    /// another through a cycle, which rule 5 never sees. Returns the number of
    /// atoms assigned; call [`Propagator::propagate`] afterwards.
    pub fn falsify_underivable(&mut self) -> usize {
        let n = self.kinds.len();
        let mut possible: Vec<bool> = (0..n)
            .map(|i| self.kinds[i] == AtomKind::Constraint && self.value[i] != Value::False)
            .collect();
        let mut missing: Vec<u32> = self
            .rules
            .iter()
            .map(|r| r.body.iter().filter(|a| !possible[a.index()]).count() as u32)
            .collect();
        let mut queue: Vec<usize> = Vec::new();
        for (ri, r) in self.rules.iter().enumerate() {
            let h = r.head.index();
            if missing[ri] == 0 && !possible[h] {
                possible[h] = true;
                queue.push(h);
            }
        }
        while let Some(a) = queue.pop() {
            for &ri in &self.body_occ[a] {
                let ri = ri as usize;
                missing[ri] -= 1;
                let h = self.rules[ri].head.index();
                if missing[ri] == 0 && !possible[h] {
                    possible[h] = true;
                    queue.push(h);
                }
            }
        }
        let mut assigned = 0;
        for i in 0..n {
            if !possible[i] && self.kinds[i] == AtomKind::Horn && self.value[i] == Value::Unassigned
            {
                self.assign(Lit::neg(AtomId::from_index(i)), Reason::HornExhausted);
                assigned += 1;
            }
        }
        assigned
    }

    /// Sets every open Horn atom false: with all constraint atoms assigned and
    /// propagation at a fixpoint, these are exactly the atoms outside the
    /// closure. Returns false if a post-constraint then fails.
    pub fn finalize(&mut self) -> bool {
        for i in 0..self.kinds.len() {
            if self.kinds[i] == AtomKind::Horn && self.value[i] == Value::Unassigned {
                self.assign(Lit::neg(AtomId::from_index(i)), Reason::Finalized);
            }
        }
        self.propagate()
    }

    /// Recomputes all counters from scratch and compares; also checks the
    /// Horn discipline. Only meaningful at a propagation fixpoint.
    pub fn check_consistency(&self) -> Result<(), String> {
        if self.qhead != self.trail.len() {
            return Err("pending trail entries".into());
        }
        let mut seen = vec![false; self.kinds.len()];
        for l in &self.trail {
            let i = l.atom().index();
            if seen[i] {
                return Err(format!("atom {} on the trail twice", l.atom()));
            }
            seen[i] = true;
            if self.value[i] != Value::of(l.is_positive()) {
                return Err(format!("trail and value disagree on {}", l.atom()));
            }
        }
        for i in 0..self.kinds.len() {
            if !seen[i] && self.value[i] != Value::Unassigned {
                return Err(format!("atom {} assigned but not on the trail", i + 1));
            }
            if self.kinds[i] == AtomKind::Horn {
                let ok = match (self.value[i], self.reason[i]) {
                    (Value::Unassigned, _) => true,
                    (Value::True, r) => r == Reason::HornDerived,
                    (Value::False, r) => matches!(r, Reason::HornExhausted | Reason::Finalized),
                };
                if !ok {
                    return Err(format!(
                        "Horn atom {} is {:?} with reason {:?}",
                        i + 1,
                        self.value[i],
                        self.reason[i]
                    ));
                }
            }
        }
        let count = |lits: &mut dyn Iterator<Item = Value>| {
            let mut t = 0;
            let mut f = 0;
            for v in lits {
                match v {
                    Value::True => t += 1,
                    Value::False => f += 1,
                    Value::Unassigned => {}
                }
            }
            (t, f)
        };
        let mut satisfied = 0;
        for (ci, c) in self.clauses.iter().enumerate() {
            let (t, f) = count(&mut c.lits.iter().map(|&l| self.lit_value(l)));
            if (t, f) != (c.n_true, c.n_false) {
                return Err(format!("clause {ci} counters stale"));
            }
            if t > 0 && !c.post {
                satisfied += 1;
            }
        }
        if satisfied != self.satisfied {
            return Err("satisfied-clause count stale".into());
        }
        for (si, s) in self.selects.iter().enumerate() {
            let (t, f) = count(&mut s.scope.iter().map(|&a| self.value(a)));
            if (t, f) != (s.n_true, s.n_false) {
                return Err(format!("select {si} counters stale"));
            }
        }
        let mut live = vec![0u32; self.kinds.len()];
        for (ri, r) in self.rules.iter().enumerate() {
            let (t, f) = count(&mut r.body.iter().map(|&a| self.value(a)));
            if (t, f) != (r.n_true, r.n_false) {
                return Err(format!("rule {ri} counters stale"));
            }
            if f == 0 {
                live[r.head.index()] += 1;
            }
        }
        if live != self.live_support {
            return Err("live support counts stale".into());
        }
        Ok(())
    }

    /// Sum of constraint weights for every open constraint atom, indexed by
    /// atom index. See [`weight`].
    pub fn scores(&self) -> Vec<u64> {
        let mut out = vec![0u64; self.kinds.len()];
        for c in &self.clauses {
            if c.n_true > 0 {
                continue;
            }
            let w = weight(c.open());
            for l in &c.lits {
                let i = l.atom().index();
                if self.value[i] == Value::Unassigned && self.kinds[i] == AtomKind::Constraint {
                    out[i] += w;
                }
            }
        }
        for s in &self.selects {
            if s.is_satisfied() {
                continue;
            }
            let w = weight(s.open());
            for a in &s.scope {
                if self.value[a.index()] == Value::Unassigned {
                    out[a.index()] += w;
                }
            }
        }
        out
    }

    /// Score of a single open constraint atom, from its occurrence lists.
    pub fn score(&self, atom: AtomId) -> u64 {
        let i = atom.index();
        let clauses: u64 = self.clause_occ[i]
            .iter()
            .map(|&(ci, _)| &self.clauses[ci as usize])
            .filter(|c| c.n_true == 0)
            .map(|c| weight(c.open()))
            .sum();
        let selects: u64 = self.select_occ[i]
            .iter()
            .map(|&si| &self.selects[si as usize])
            .filter(|s| !s.is_satisfied())
            .map(|s| weight(s.open()))
            .sum();
        clauses + selects
    }
}

/// Weight of an unsatisfied constraint with `open` unassigned members:
/// `2^(6 - min(open, 6))`. Shorter constraints weigh more.
pub fn weight(open: u32) -> u64 {
    1u64 << (6 - open.min(6))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::edb::Constant;
    use crate::theory::{HornRule, Select};

    fn theory(n_c: usize, n_h: usize) -> GroundTheory {
        let mut t = GroundTheory::new();
        for i in 0..n_c {
            t.add_atom("c", vec![Constant::Int(i as i64 + 1)], AtomKind::Constraint);
        }
        for i in 0..n_h {
            t.add_atom("h", vec![Constant::Int(i as i64 + 1)], AtomKind::Horn);
        }
        t
    }

    fn a(i: u32) -> AtomId {
        AtomId(i)
    }

    #[test]
    fn horn_chaining() {
        let mut t = theory(1, 1);
        t.horn.push(HornRule {
            head: a(2),
            body: vec![a(1)],
        });
        let mut p = Propagator::new(&t);
        assert!(!p.root_conflict());
        p.assign(Lit::pos(a(1)), Reason::Branch);
        assert!(p.propagate());
        assert_eq!(p.value(a(2)), Value::True);
        assert_eq!(p.reason(a(2)), Reason::HornDerived);
        p.check_consistency().unwrap();
    }

    #[test]
    fn exhausted_horn_atom_fails_post_constraint() {
        let mut t = theory(1, 1);
        t.horn.push(HornRule {
            head: a(2),
            body: vec![a(1)],
        });
        t.post.push(vec![Lit::pos(a(2))]);
        let mut p = Propagator::new(&t);
        // The post-constraint cannot force h, so a stays open at the root.
        assert_eq!(p.value(a(1)), Value::Unassigned);
        p.assign(Lit::neg(a(1)), Reason::Branch);
        assert!(!p.propagate());
        assert_eq!(p.value(a(2)), Value::False);
        assert_eq!(p.reason(a(2)), Reason::HornExhausted);
        p.undo_to(0);
        p.check_consistency().unwrap();
    }

    #[test]
    fn exactly_one_select() {
        let mut t = theory(3, 0);
        t.selects.push(Select {
            lower: 1,
            upper: Some(1),
            scope: vec![a(1), a(2), a(3)],
        });
        let mut p = Propagator::new(&t);
        p.assign(Lit::pos(a(1)), Reason::Branch);
        assert!(p.propagate());
        assert_eq!(p.value(a(2)), Value::False);
        assert_eq!(p.value(a(3)), Value::False);
        p.undo_to(0);
        p.assign(Lit::neg(a(1)), Reason::Branch);
        p.assign(Lit::neg(a(2)), Reason::Branch);
        assert!(p.propagate());
        assert_eq!(p.value(a(3)), Value::True);
        p.check_consistency().unwrap();
    }

    #[test]
    fn root_level_facts_and_unsupported_atoms() {
        let mut t = theory(0, 2);
        t.horn.push(HornRule {
            head: a(1),
            body: vec![],
        });
        let p = Propagator::new(&t);
        assert_eq!(p.value(a(1)), Value::True);
        assert_eq!(p.value(a(2)), Value::False);
    }

    #[test]
    fn root_conflicts() {
        let mut t = theory(2, 0);
        t.clauses.push(vec![Lit::pos(a(1))]);
        t.clauses.push(vec![Lit::neg(a(1))]);
        assert!(Propagator::new(&t).root_conflict());

        let mut t = theory(2, 0);
        t.selects.push(Select {
            lower: 3,
            upper: None,
            scope: vec![a(1), a(2)],
        });
        assert!(Propagator::new(&t).root_conflict());

        let mut t = theory(0, 0);
        t.ground_unsat = true;
        assert!(Propagator::new(&t).root_conflict());
    }

    #[test]
    fn post_clause_forces_constraint_atom() {
        let mut t = theory(1, 1);
        t.post.push(vec![Lit::pos(a(1)), Lit::pos(a(2))]);
        // h has no rules, so it is false and the clause forces c.
        let p = Propagator::new(&t);
        assert_eq!(p.value(a(1)), Value::True);
    }

    #[test]
    fn cyclic_support_is_underivable() {
        // h1 <- c, h1 <- h2, h2 <- h1; post: h1.
        let mut t = theory(1, 2);
        t.horn.push(HornRule {
            head: a(2),
            body: vec![a(1)],
        });
        t.horn.push(HornRule {
            head: a(2),
            body: vec![a(3)],
        });
        t.horn.push(HornRule {
            head: a(3),
            body: vec![a(2)],
        });
        t.post.push(vec![Lit::pos(a(2))]);
        let mut p = Propagator::new(&t);
        assert_eq!(p.falsify_underivable(), 0);
        p.assign(Lit::neg(a(1)), Reason::Branch);
        assert!(p.propagate());
        assert_eq!(p.value(a(2)), Value::Unassigned);
        assert_eq!(p.falsify_underivable(), 2);
        assert!(!p.propagate());
    }

    #[test]
    fn weights_and_scores() {
        assert_eq!(weight(2), 16);
        assert_eq!(weight(3), 8);
        assert_eq!(weight(1), 32);
        assert_eq!(weight(9), 1);

        let mut t = theory(4, 0);
        t.clauses.push(vec![Lit::pos(a(1)), Lit::pos(a(2))]);
        t.clauses
            .push(vec![Lit::neg(a(1)), Lit::pos(a(3)), Lit::pos(a(4))]);
        let p = Propagator::new(&t);
        assert_eq!(p.score(a(1)), 24);
        assert_eq!(p.score(a(2)), 16);
        let mut empty = theory(1, 0);
        empty.clauses.clear();
        assert_eq!(Propagator::new(&empty).score(a(1)), 0);
        let bulk = p.scores();
        for i in 1..=4 {
            assert_eq!(bulk[i - 1], p.score(a(i as u32)));
        }
    }

    #[test]
    fn satisfied_clauses_do_not_score() {
        let mut t = theory(3, 0);
        t.clauses
            .push(vec![Lit::pos(a(1)), Lit::pos(a(2)), Lit::pos(a(3))]);
        let mut p = Propagator::new(&t);
        p.assign(Lit::pos(a(1)), Reason::Branch);
        assert!(p.propagate());
        assert_eq!(p.score(a(2)), 0);
        assert_eq!(p.satisfied_clauses(), 1);
    }
}
