//! Complete backtracking search for answer sets.
//!
//! Only constraint atoms are branched on. Each node propagates to a fixpoint,
//! then runs a lookahead over the highest-scoring open atoms: a polarity that
//! fails under propagation forces the other, and otherwise the atom with the
//! best `1024 * min(f+, f-) + f+ + f-` is chosen, where `f` counts atoms
//! fixed by propagating each polarity. Backtracking is chronological.
//!
//! Between propagation and lookahead each node also falsifies Horn atoms
//! that no longer have any possible derivation.

pub mod propagate;

use std::collections::BTreeSet;
use std::time::Instant;

use crate::theory::{check_answer_set, AnswerSet, AtomId, AtomKind, GroundTheory, Lit};
use propagate::{Propagator, Reason, Value};

pub use propagate::weight;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SolverConfig {
    /// Candidates probed per lookahead; `None` uses the default schedule.
    pub lookahead_k: Option<usize>,
    /// Recheck every propagator counter after each fixpoint. Slow.
    pub check_invariants: bool,
}

impl SolverConfig {
    /// Default configuration, with `DC_LOOKAHEAD_K` overriding the lookahead
    /// width when set to a positive integer.
    pub fn from_env() -> SolverConfig {
        let lookahead_k = std::env::var("DC_LOOKAHEAD_K")
            .ok()
            .and_then(|v| v.trim().parse::<usize>().ok())
            .filter(|&k| k > 0);
        SolverConfig {
            lookahead_k,
            check_invariants: false,
        }
    }

    /// Number of candidates to probe with `open` unassigned constraint atoms.
    pub fn lookahead_width(&self, open: usize) -> usize {
        let k = self
            .lookahead_k
            .unwrap_or_else(|| 16.max(open.div_ceil(16)));
        k.min(open)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Stats {
    pub decisions: u64,
    pub backtracks: u64,
    pub lookahead_tests: u64,
    pub propagations: u64,
    pub models_found: u64,
    /// Constraint clauses newly satisfied across all lookahead probes.
    pub lookahead_satisfied: u64,
    pub cpu_ms: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TraceEvent {
    Decide { lit: Lit, level: usize },
    Backtrack { lit: Lit, level: usize },
    Forced { lit: Lit, level: usize },
    Conflict { level: usize },
    Model { index: u64 },
}

struct Decision {
    lit: Lit,
    trail_start: usize,
    flipped: bool,
}

enum Lookahead {
    Conflict,
    /// Something was forced; propagate and look again.
    Progress,
    Branch(Lit),
}

struct Probe {
    atom: AtomId,
    key: u64,
    positive: bool,
}

type Tracer<'a> = Box<dyn FnMut(&TraceEvent) + 'a>;

pub struct Solver<'t> {
    theory: &'t GroundTheory,
    prop: Propagator,
    config: SolverConfig,
    decisions: Vec<Decision>,
    stats: Stats,
    tracer: Option<Tracer<'t>>,
    c_atoms: Vec<AtomId>,
}

impl<'t> Solver<'t> {
    pub fn new(theory: &'t GroundTheory, config: SolverConfig) -> Solver<'t> {
        Solver {
            theory,
            prop: Propagator::new(theory),
            config,
            decisions: Vec::new(),
            stats: Stats::default(),
            tracer: None,
            c_atoms: theory.constraint_atoms().collect(),
        }
    }

    pub fn with_tracer(mut self, tracer: impl FnMut(&TraceEvent) + 't) -> Self {
        self.tracer = Some(Box::new(tracer));
        self
    }

    /// First answer set in search order, if any.
    pub fn solve(self) -> (Option<AnswerSet>, Stats) {
        let mut found = None;
        let stats = self.run(|m| {
            found = Some(m.clone());
            false
        });
        (found, stats)
    }

    /// Number of answer sets.
    pub fn count(self) -> (u64, Stats) {
        let stats = self.run(|_| true);
        (stats.models_found, stats)
    }

    /// Calls `f` on every answer set, each exactly once.
    pub fn enumerate(self, mut f: impl FnMut(&AnswerSet)) -> Stats {
        self.run(|m| {
            f(m);
            true
        })
    }

    fn trace(&mut self, event: TraceEvent) {
        if let Some(t) = &mut self.tracer {
            t(&event);
        }
    }

    fn checkpoint(&self) {
        if self.config.check_invariants {
            if let Err(e) = self.prop.check_consistency() {
                panic!("propagator invariant violated: {e}");
            }
        }
    }

    /// Runs the search, passing each model to `on_model`; stops when it
    /// returns false or the space is exhausted.
    fn run(mut self, mut on_model: impl FnMut(&AnswerSet) -> bool) -> Stats {
        let start = Instant::now();
        let base = self.prop.processed();
        if !self.prop.root_conflict() {
            self.search(&mut on_model);
        }
        self.stats.propagations = self.prop.processed() - base;
        self.stats.cpu_ms = start.elapsed().as_millis() as u64;
        self.stats
    }

    fn search(&mut self, on_model: &mut impl FnMut(&AnswerSet) -> bool) {
        loop {
            let ok = self.prop.propagate()
                && (self.prop.falsify_underivable() > 0
                    || self.prop.unassigned_constraint_atoms() == 0
                    || self.node());
            if !ok {
                self.trace(TraceEvent::Conflict {
                    level: self.decisions.len(),
                });
                if !self.backtrack() {
                    return;
                }
                continue;
            }
            if self.prop.unassigned_constraint_atoms() > 0 || !self.prop.is_fixpoint() {
                continue;
            }
            let mark = self.prop.trail().len();
            if self.prop.finalize() {
                self.checkpoint();
                let model = self.model();
                self.stats.models_found += 1;
                self.trace(TraceEvent::Model {
                    index: self.stats.models_found,
                });
                if !on_model(&model) {
                    return;
                }
            } else {
                self.trace(TraceEvent::Conflict {
                    level: self.decisions.len(),
                });
            }
            self.prop.undo_to(mark);
            if !self.backtrack() {
                return;
            }
        }
    }

    /// One step at a propagated node with open constraint atoms: either a
    /// lookahead that forced something, or a decision. Returns false on
    /// conflict.
    fn node(&mut self) -> bool {
        self.checkpoint();
        match self.lookahead() {
            Lookahead::Conflict => false,
            Lookahead::Progress => true,
            Lookahead::Branch(lit) => {
                self.stats.decisions += 1;
                self.decisions.push(Decision {
                    lit,
                    trail_start: self.prop.trail().len(),
                    flipped: false,
                });
                self.trace(TraceEvent::Decide {
                    lit,
                    level: self.decisions.len(),
                });
                self.prop.assign(lit, Reason::Branch);
                true
            }
        }
    }

    /// Flips the most recent unflipped decision. False when none is left.
    fn backtrack(&mut self) -> bool {
        while let Some(d) = self.decisions.pop() {
            self.prop.undo_to(d.trail_start);
            if d.flipped {
                continue;
            }
            let lit = !d.lit;
            self.stats.backtracks += 1;
            self.decisions.push(Decision {
                lit,
                trail_start: d.trail_start,
                flipped: true,
            });
            self.trace(TraceEvent::Backtrack {
                lit,
                level: self.decisions.len(),
            });
            self.prop.assign(lit, Reason::Branch);
            return true;
        }
        false
    }

    /// Propagates `lit` tentatively. Returns the number of atoms it fixes
    /// beyond itself, or `None` on conflict.
    fn probe(&mut self, lit: Lit) -> Option<u64> {
        let mark = self.prop.trail().len();
        let satisfied = self.prop.satisfied_clauses();
        self.prop.assign(lit, Reason::Branch);
        let ok = self.prop.propagate();
        let fixed = (self.prop.trail().len() - mark - 1) as u64;
        if ok {
            self.stats.lookahead_satisfied += self.prop.satisfied_clauses() - satisfied;
        }
        self.prop.undo_to(mark);
        ok.then_some(fixed)
    }

    fn lookahead(&mut self) -> Lookahead {
        let scores = self.prop.scores();
        let mut open: Vec<AtomId> = self
            .c_atoms
            .iter()
            .copied()
            .filter(|&a| self.prop.value(a) == Value::Unassigned)
            .collect();
        open.sort_by_key(|a| (std::cmp::Reverse(scores[a.index()]), *a));
        open.truncate(self.config.lookahead_width(open.len()));

        let mut forced = false;
        let mut probes = Vec::with_capacity(open.len());
        for a in open {
            if self.prop.value(a) != Value::Unassigned {
                continue;
            }
            self.stats.lookahead_tests += 1;
            let pos = self.probe(Lit::pos(a));
            let neg = self.probe(Lit::neg(a));
            let lit = match (pos, neg) {
                (None, None) => return Lookahead::Conflict,
                (Some(fp), Some(fn_)) => {
                    probes.push(Probe {
                        atom: a,
                        key: 1024 * fp.min(fn_) + fp + fn_,
                        positive: fp >= fn_,
                    });
                    continue;
                }
                (Some(_), None) => Lit::pos(a),
                (None, Some(_)) => Lit::neg(a),
            };
            forced = true;
            self.trace(TraceEvent::Forced {
                lit,
                level: self.decisions.len(),
            });
            self.prop.assign(lit, Reason::Propagated);
            if !self.prop.propagate() {
                return Lookahead::Conflict;
            }
        }
        if forced {
            return Lookahead::Progress;
        }
        let best = probes
            .iter()
            .filter(|p| self.prop.value(p.atom) == Value::Unassigned)
            .max_by_key(|p| (p.key, std::cmp::Reverse(p.atom)))
            .expect("lookahead probed at least one open atom");
        Lookahead::Branch(Lit::new(best.atom, best.positive))
    }

    fn model(&self) -> AnswerSet {
        let mut m = BTreeSet::new();
        let mut closure = BTreeSet::new();
        for i in 0..self.prop.num_atoms() {
            let id = AtomId::from_index(i);
            if self.prop.value(id) == Value::True {
                closure.insert(id);
                if self.prop.kind(id) == AtomKind::Constraint {
                    m.insert(id);
                }
            }
        }
        assert!(
            check_answer_set(self.theory, &m),
            "solver produced a set that is not an answer set"
        );
        AnswerSet { m, closure }
    }
}

/// Searches for one answer set with the environment-derived configuration.
pub fn solve(theory: &GroundTheory) -> (Option<AnswerSet>, Stats) {
    Solver::new(theory, SolverConfig::from_env()).solve()
}

/// Counts all answer sets with the environment-derived configuration.
pub fn count_answer_sets(theory: &GroundTheory) -> (u64, Stats) {
    Solver::new(theory, SolverConfig::from_env()).count()
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

    fn checked() -> SolverConfig {
        SolverConfig {
            lookahead_k: None,
            check_invariants: true,
        }
    }

    fn ids(v: &[u32]) -> BTreeSet<AtomId> {
        v.iter().map(|&i| AtomId(i)).collect()
    }

    #[test]
    fn free_atoms_count() {
        let t = theory(2, 0);
        let (n, _) = Solver::new(&t, checked()).count();
        assert_eq!(n, 4);
    }

    #[test]
    fn empty_theory_has_one_answer_set() {
        let t = GroundTheory::new();
        let (m, stats) = Solver::new(&t, checked()).solve();
        assert_eq!(m.unwrap().m, BTreeSet::new());
        assert_eq!(stats.decisions, 0);
    }

    #[test]
    fn horn_derivation_shows_in_closure() {
        let mut t = theory(1, 1);
        t.clauses.push(vec![Lit::pos(AtomId(1))]);
        t.horn.push(HornRule {
            head: AtomId(2),
            body: vec![AtomId(1)],
        });
        let (m, _) = Solver::new(&t, checked()).solve();
        let m = m.unwrap();
        assert_eq!(m.m, ids(&[1]));
        assert_eq!(m.closure, ids(&[1, 2]));
    }

    #[test]
    fn post_constraint_prunes() {
        // h <- a; post: h. Only {a} survives.
        let mut t = theory(1, 1);
        t.horn.push(HornRule {
            head: AtomId(2),
            body: vec![AtomId(1)],
        });
        t.post.push(vec![Lit::pos(AtomId(2))]);
        let mut models = Vec::new();
        Solver::new(&t, checked()).enumerate(|m| models.push(m.m.clone()));
        assert_eq!(models, vec![ids(&[1])]);
    }

    #[test]
    fn exactly_one_of_three() {
        let mut t = theory(3, 0);
        t.selects.push(Select {
            lower: 1,
            upper: Some(1),
            scope: vec![AtomId(1), AtomId(2), AtomId(3)],
        });
        let mut models = Vec::new();
        Solver::new(&t, checked()).enumerate(|m| models.push(m.m.clone()));
        models.sort();
        assert_eq!(models, vec![ids(&[1]), ids(&[2]), ids(&[3])]);
    }

    #[test]
    fn unsat_at_root() {
        let mut t = theory(1, 0);
        t.clauses.push(vec![Lit::pos(AtomId(1))]);
        t.clauses.push(vec![Lit::neg(AtomId(1))]);
        let (m, stats) = Solver::new(&t, checked()).solve();
        assert!(m.is_none());
        assert_eq!(stats.decisions, 0);
    }

    #[test]
    fn lookahead_forces_failed_polarity() {
        // a -> b, a -> not b: probing a=true fails, so a is forced false
        // without any decision on a.
        let mut t = theory(3, 0);
        let (a, b, c) = (AtomId(1), AtomId(2), AtomId(3));
        t.clauses.push(vec![Lit::neg(a), Lit::pos(b)]);
        t.clauses.push(vec![Lit::neg(a), Lit::neg(b)]);
        t.clauses.push(vec![Lit::pos(b), Lit::pos(c)]);
        let mut events = Vec::new();
        let (n, _) = Solver::new(&t, checked())
            .with_tracer(|e| events.push(e.clone()))
            .count();
        assert_eq!(n, 3);
        assert!(events.contains(&TraceEvent::Forced {
            lit: Lit::neg(a),
            level: 0
        }));
        assert!(!events
            .iter()
            .any(|e| matches!(e, TraceEvent::Decide { lit, .. } if lit.atom() == a)));
    }

    #[test]
    fn first_decision_on_exclusive_pair() {
        // {a, b} with "not both": either polarity of a settles b, the tie
        // goes to the lower atom and to true.
        let mut t = theory(2, 0);
        let (a, b) = (AtomId(1), AtomId(2));
        t.clauses.push(vec![Lit::pos(a), Lit::pos(b)]);
        t.clauses.push(vec![Lit::neg(a), Lit::neg(b)]);
        let mut events = Vec::new();
        let (n, _) = Solver::new(&t, checked())
            .with_tracer(|e| events.push(e.clone()))
            .count();
        assert_eq!(n, 2);
        assert_eq!(
            events.first(),
            Some(&TraceEvent::Decide {
                lit: Lit::pos(a),
                level: 1
            })
        );
    }

    #[test]
    fn lookahead_width_schedule() {
        let c = SolverConfig::default();
        assert_eq!(c.lookahead_width(5), 5);
        assert_eq!(c.lookahead_width(100), 16);
        assert_eq!(c.lookahead_width(1000), 63);
        let c = SolverConfig {
            lookahead_k: Some(3),
            ..c
        };
        assert_eq!(c.lookahead_width(100), 3);
        assert_eq!(c.lookahead_width(2), 2);
    }

    #[test]
    fn four_queens() {
        let mut t = GroundTheory::new();
        let q = |r: i64, c: i64| AtomId(((r - 1) * 4 + c) as u32);
        for r in 1..=4 {
            for c in 1..=4 {
                t.add_atom(
                    "q",
                    vec![Constant::Int(r), Constant::Int(c)],
                    AtomKind::Constraint,
                );
            }
        }
        for r in 1..=4 {
            t.selects.push(Select {
                lower: 1,
                upper: Some(1),
                scope: (1..=4).map(|c| q(r, c)).collect(),
            });
            t.selects.push(Select {
                lower: 0,
                upper: Some(1),
                scope: (1..=4).map(|c| q(c, r)).collect(),
            });
        }
        for (r1, c1, r2, c2) in cell_pairs() {
            if (r1 - r2).abs() == (c1 - c2).abs() {
                t.clauses
                    .push(vec![Lit::neg(q(r1, c1)), Lit::neg(q(r2, c2))]);
            }
        }
        let (n, stats) = Solver::new(&t, checked()).count();
        assert_eq!(n, 2);
        assert!(stats.decisions >= stats.backtracks);
    }

    fn cell_pairs() -> Vec<(i64, i64, i64, i64)> {
        let cells: Vec<(i64, i64)> = (1..=4).flat_map(|r| (1..=4).map(move |c| (r, c))).collect();
        let mut out = Vec::new();
        for (i, &(r1, c1)) in cells.iter().enumerate() {
            for &(r2, c2) in &cells[i + 1..] {
                out.push((r1, c1, r2, c2));
            }
        }
        out
    }
}
