//! Exhaustive reference semantics and random theory generation, for testing
//! the solver.

use std::collections::BTreeSet;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::edb::Constant;
use crate::theory::{check_answer_set, AtomId, AtomKind, GroundTheory, HornRule, Lit, Select};

/// Largest constraint-atom count the oracle will enumerate.
pub const MAX_ORACLE_ATOMS: usize = 20;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("{0} constraint atoms exceed the oracle limit of {MAX_ORACLE_ATOMS}")]
    TooLarge(usize),
}

/// Every answer set, found by checking all subsets of the constraint atoms.
/// Results are in increasing order of the subset bitmask.
pub fn enumerate_answer_sets(theory: &GroundTheory) -> Result<Vec<BTreeSet<AtomId>>, OracleError> {
    let c: Vec<AtomId> = theory.constraint_atoms().collect();
    if c.len() > MAX_ORACLE_ATOMS {
        return Err(OracleError::TooLarge(c.len()));
    }
    let mut out = Vec::new();
    for mask in 0u32..(1u32 << c.len()) {
        let m: BTreeSet<AtomId> = c
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, &a)| a)
            .collect();
        if check_answer_set(theory, &m) {
            out.push(m);
        }
    }
    Ok(out)
}

pub fn count_answer_sets(theory: &GroundTheory) -> Result<u64, OracleError> {
    enumerate_answer_sets(theory).map(|v| v.len() as u64)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TheoryGenParams {
    pub n_c_atoms: usize,
    pub n_h_atoms: usize,
    pub n_clauses: usize,
    pub n_selects: usize,
    pub n_horn: usize,
    pub n_post: usize,
    pub seed: u64,
}

impl TheoryGenParams {
    /// A mixed shape small enough for the oracle, varied by seed.
    pub fn small(seed: u64) -> TheoryGenParams {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        TheoryGenParams {
            n_c_atoms: rng.random_range(1..=10),
            n_h_atoms: rng.random_range(0..=5),
            n_clauses: rng.random_range(0..=10),
            n_selects: rng.random_range(0..=3),
            n_horn: rng.random_range(0..=8),
            n_post: rng.random_range(0..=3),
            seed,
        }
    }
}

fn random_lit(rng: &mut ChaCha8Rng, atoms: &[AtomId]) -> Lit {
    Lit::new(*atoms.choose(rng).expect("nonempty"), rng.random_bool(0.5))
}

fn random_clause(rng: &mut ChaCha8Rng, atoms: &[AtomId]) -> Vec<Lit> {
    let len = if rng.random_bool(0.5) {
        rng.random_range(2..=3)
    } else {
        rng.random_range(1..=4)
    };
    (0..len).map(|_| random_lit(rng, atoms)).collect()
}

/// A valid random theory: Select bounds are consistent, Horn heads are Horn
/// atoms, and post-constraints range over all atoms. Deterministic in the
/// seed.
pub fn random_theory(p: &TheoryGenParams) -> GroundTheory {
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let mut t = GroundTheory::new();
    let c: Vec<AtomId> = (0..p.n_c_atoms)
        .map(|i| t.add_atom("c", vec![Constant::Int(i as i64 + 1)], AtomKind::Constraint))
        .collect();
    let h: Vec<AtomId> = (0..p.n_h_atoms)
        .map(|i| t.add_atom("h", vec![Constant::Int(i as i64 + 1)], AtomKind::Horn))
        .collect();
    let all: Vec<AtomId> = c.iter().chain(&h).copied().collect();

    if !c.is_empty() {
        for _ in 0..p.n_clauses {
            let clause = random_clause(&mut rng, &c);
            t.clauses.push(clause);
        }
        for _ in 0..p.n_selects {
            let size = rng.random_range(1..=c.len().min(5));
            let scope: Vec<AtomId> = c.choose_multiple(&mut rng, size).copied().collect();
            let lower = rng.random_range(0..=size as u32);
            let upper = if rng.random_bool(0.2) {
                None
            } else {
                Some(rng.random_range(lower..=size as u32))
            };
            t.selects.push(Select {
                lower,
                upper,
                scope,
            });
        }
    }
    if !h.is_empty() {
        for _ in 0..p.n_horn {
            let head = *h.choose(&mut rng).expect("nonempty");
            let len = rng.random_range(0..=3);
            let body = (0..len)
                .map(|_| *all.choose(&mut rng).expect("nonempty"))
                .collect();
            t.horn.push(HornRule { head, body });
        }
    }
    if !all.is_empty() {
        for _ in 0..p.n_post {
            let clause = random_clause(&mut rng, &all);
            t.post.push(clause);
        }
    }
    t
}

fn subsets_of_size(items: &[AtomId], k: usize) -> Vec<Vec<AtomId>> {
    if k == 0 {
        return vec![vec![]];
    }
    if items.len() < k {
        return vec![];
    }
    let mut out = subsets_of_size(&items[1..], k);
    for mut rest in subsets_of_size(&items[1..], k - 1) {
        rest.insert(0, items[0]);
        out.push(rest);
    }
    out
}

/// Rewrites each `Select(n, m)` over `s` distinct atoms as plain clauses:
/// every (m+1)-subset has a false atom and every (s-n+1)-subset a true one.
/// Exponential in the scope size.
pub fn expand_selects(t: &GroundTheory) -> GroundTheory {
    let mut out = t.clone();
    out.selects.clear();
    for s in &t.selects {
        let scope: Vec<AtomId> = s
            .scope
            .iter()
            .copied()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let size = scope.len();
        if let Some(m) = s.upper {
            if (m as usize) < size {
                for sub in subsets_of_size(&scope, m as usize + 1) {
                    out.clauses.push(sub.into_iter().map(Lit::neg).collect());
                }
            }
        }
        let n = s.lower as usize;
        if n > size {
            out.clauses.push(vec![]);
        } else if n > 0 {
            for sub in subsets_of_size(&scope, size - n + 1) {
                out.clauses.push(sub.into_iter().map(Lit::pos).collect());
            }
        }
    }
    out
}

#[derive(Clone, Copy)]
enum Item {
    Clause(usize, bool),
    Select(usize),
    Rule(usize),
    Support(AtomId),
}

fn lit_value(v: &[Option<bool>], l: Lit) -> Option<bool> {
    v[l.atom().index()].map(|b| b == l.is_positive())
}

/// Sets `l` true. `None` on contradiction, else whether anything changed.
fn set(v: &mut [Option<bool>], l: Lit) -> Option<bool> {
    match lit_value(v, l) {
        Some(true) => Some(false),
        Some(false) => None,
        None => {
            v[l.atom().index()] = Some(l.is_positive());
            Some(true)
        }
    }
}

/// Naive propagation: assumes `assumptions`, then rescans every clause,
/// Select, Horn rule and Horn atom in a fresh random order each round until
/// nothing changes. Returns the per-atom values, or `None` on conflict.
///
/// Applies unit propagation (for post-constraints only onto constraint
/// atoms), Select bounds, Horn chaining and Horn exhaustion.
pub fn reference_propagate(
    t: &GroundTheory,
    assumptions: &[Lit],
    rng: &mut impl Rng,
) -> Option<Vec<Option<bool>>> {
    if t.ground_unsat {
        return None;
    }
    let mut v = vec![None; t.num_atoms()];
    for &l in assumptions {
        set(&mut v, l)?;
    }
    let mut items: Vec<Item> = (0..t.clauses.len())
        .map(|i| Item::Clause(i, false))
        .chain((0..t.post.len()).map(|i| Item::Clause(i, true)))
        .chain((0..t.selects.len()).map(Item::Select))
        .chain((0..t.horn.len()).map(Item::Rule))
        .chain(t.horn_atoms().map(Item::Support))
        .collect();

    loop {
        let mut changed = false;
        items.shuffle(rng);
        for &item in &items {
            match item {
                Item::Clause(i, post) => {
                    let c = if post { &t.post[i] } else { &t.clauses[i] };
                    if c.iter().any(|&l| lit_value(&v, l) == Some(true)) {
                        continue;
                    }
                    let open: BTreeSet<Lit> = c
                        .iter()
                        .copied()
                        .filter(|&l| lit_value(&v, l).is_none())
                        .collect();
                    match open.len() {
                        0 => return None,
                        1 => {
                            let l = *open.first().expect("one literal");
                            if !(post && t.kind(l.atom()) == AtomKind::Horn) {
                                changed |= set(&mut v, l)?;
                            }
                        }
                        _ => {}
                    }
                }
                Item::Select(i) => {
                    let s = &t.selects[i];
                    let scope: BTreeSet<AtomId> = s.scope.iter().copied().collect();
                    let tr = scope.iter().filter(|a| v[a.index()] == Some(true)).count() as u32;
                    let un = scope.iter().filter(|a| v[a.index()].is_none()).count() as u32;
                    let upper = s.upper.unwrap_or(u32::MAX);
                    if tr > upper || tr + un < s.lower {
                        return None;
                    }
                    if un > 0 && (tr == upper || tr + un == s.lower) {
                        let polarity = tr != upper;
                        for &a in &scope {
                            if v[a.index()].is_none() {
                                changed |= set(&mut v, Lit::new(a, polarity))?;
                            }
                        }
                    }
                }
                Item::Rule(i) => {
                    let r = &t.horn[i];
                    if r.body.iter().all(|b| v[b.index()] == Some(true)) {
                        changed |= set(&mut v, Lit::pos(r.head))?;
                    }
                }
                Item::Support(h) => {
                    let dead = t
                        .horn
                        .iter()
                        .filter(|r| r.head == h)
                        .all(|r| r.body.iter().any(|b| v[b.index()] == Some(false)));
                    if dead && v[h.index()].is_none() {
                        v[h.index()] = Some(false);
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            return Some(v);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::theory::validate_theory;

    #[test]
    fn free_atoms() {
        let mut t = GroundTheory::new();
        t.add_atom("a", vec![], AtomKind::Constraint);
        t.add_atom("b", vec![], AtomKind::Constraint);
        assert_eq!(count_answer_sets(&t), Ok(4));
    }

    #[test]
    fn single_free_atom_and_contradiction() {
        let mut t = GroundTheory::new();
        let a = t.add_atom("a", vec![], AtomKind::Constraint);
        assert_eq!(
            enumerate_answer_sets(&t),
            Ok(vec![BTreeSet::new(), BTreeSet::from([a])])
        );
        t.clauses.push(vec![Lit::pos(a)]);
        t.clauses.push(vec![Lit::neg(a)]);
        assert_eq!(enumerate_answer_sets(&t), Ok(vec![]));
    }

    #[test]
    fn zero_params_give_empty_theory() {
        let p = TheoryGenParams {
            n_c_atoms: 0,
            n_h_atoms: 0,
            n_clauses: 0,
            n_selects: 0,
            n_horn: 0,
            n_post: 0,
            seed: 3,
        };
        assert_eq!(random_theory(&p), GroundTheory::new());
    }

    #[test]
    fn expansion_of_exactly_one() {
        let mut t = GroundTheory::new();
        let ids: Vec<AtomId> = (0..3)
            .map(|i| t.add_atom("a", vec![Constant::Int(i)], AtomKind::Constraint))
            .collect();
        t.selects.push(Select {
            lower: 1,
            upper: Some(1),
            scope: ids.clone(),
        });
        let e = expand_selects(&t);
        // Three pairwise exclusions plus one covering clause.
        assert_eq!(e.clauses.len(), 4);
        assert_eq!(enumerate_answer_sets(&e), enumerate_answer_sets(&t));
    }

    #[test]
    fn refuses_large_theories() {
        let mut t = GroundTheory::new();
        for i in 0..21 {
            t.add_atom("a", vec![Constant::Int(i)], AtomKind::Constraint);
        }
        assert_eq!(enumerate_answer_sets(&t), Err(OracleError::TooLarge(21)));
    }

    #[test]
    fn generated_theories_are_valid_and_deterministic() {
        for seed in 0..200 {
            let p = TheoryGenParams::small(seed);
            let t = random_theory(&p);
            assert_eq!(validate_theory(&t), vec![], "seed {seed}");
            assert_eq!(t, random_theory(&p));
            for s in &t.selects {
                assert!(s.lower as usize <= s.scope.len());
                assert!(s
                    .upper
                    .is_none_or(|u| s.lower <= u && u as usize <= s.scope.len()));
            }
        }
    }
}
