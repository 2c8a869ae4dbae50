//! Consistency-based diagnoses and entailment-based explanations of
//! inconsistency, subset-minimal enumeration, and the faulty-rule
//! coincidence check.
//!
//! A diagnosis (D1, D2) removes the rules of D1 and makes those of D2
//! unconditional; it holds when the modified system is consistent. An
//! explanation (E1, E2) holds when every admissible completion — any rule
//! superset of E1, any unconditional additions avoiding E2 — stays
//! inconsistent. Minimality is pointwise set inclusion on the pair.

use std::collections::BTreeSet;

use crate::error::EngineError;
use crate::model::{Mcs, RuleId};
use crate::semantics::{exists_equilibrium, modify, AccCache, EvalOptions};

/// A candidate repair: remove `d1`, make `d2` unconditional.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord)]
pub struct Diagnosis {
    pub d1: BTreeSet<RuleId>,
    pub d2: BTreeSet<RuleId>,
}

impl Diagnosis {
    pub fn new(d1: impl IntoIterator<Item = RuleId>, d2: impl IntoIterator<Item = RuleId>) -> Self {
        Self {
            d1: d1.into_iter().collect(),
            d2: d2.into_iter().collect(),
        }
    }

    fn dominates(&self, other: &Self) -> bool {
        self.d1.is_subset(&other.d1) && self.d2.is_subset(&other.d2)
    }
}

/// A cause of inconsistency: the joint presence of `e1` and the
/// non-unconditionality of `e2` entail inconsistency.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord)]
pub struct Explanation {
    pub e1: BTreeSet<RuleId>,
    pub e2: BTreeSet<RuleId>,
}

impl Explanation {
    pub fn new(e1: impl IntoIterator<Item = RuleId>, e2: impl IntoIterator<Item = RuleId>) -> Self {
        Self {
            e1: e1.into_iter().collect(),
            e2: e2.into_iter().collect(),
        }
    }

    fn dominates(&self, other: &Self) -> bool {
        self.e1.is_subset(&other.e1) && self.e2.is_subset(&other.e2)
    }
}

fn check_ids(m: &Mcs, ids: &BTreeSet<RuleId>) -> Result<(), EngineError> {
    let known = m.rule_ids();
    for id in ids {
        if !known.contains(id) {
            return Err(EngineError::UnknownRuleId(id.as_str().to_owned()));
        }
    }
    Ok(())
}

fn modified_is_consistent(
    m: &Mcs,
    d: &Diagnosis,
    opts: &EvalOptions,
    cache: &AccCache,
) -> Result<bool, EngineError> {
    let keep: BTreeSet<RuleId> = m.rule_ids().difference(&d.d1).cloned().collect();
    let modified = modify(m, &keep, &d.d2)?;
    exists_equilibrium(&modified, opts, cache)
}

/// Whether `d` is a diagnosis: `M[br ∖ D1 ∪ heads(D2)]` is consistent.
pub fn is_diagnosis(m: &Mcs, d: &Diagnosis, opts: &EvalOptions) -> Result<bool, EngineError> {
    check_ids(m, &d.d1)?;
    check_ids(m, &d.d2)?;
    modified_is_consistent(m, d, opts, &AccCache::default())
}

/// All k-element subsets of `items`, lexicographic within a cardinality.
fn combinations(items: &[RuleId], k: usize) -> Vec<BTreeSet<RuleId>> {
    let mut out = Vec::new();
    fn build(
        items: &[RuleId],
        k: usize,
        start: usize,
        current: &mut Vec<RuleId>,
        out: &mut Vec<BTreeSet<RuleId>>,
    ) {
        if current.len() == k {
            out.push(current.iter().cloned().collect());
            return;
        }
        let needed = k - current.len();
        for i in start..=items.len().saturating_sub(needed) {
            current.push(items[i].clone());
            build(items, k, i + 1, current, out);
            current.pop();
        }
    }
    build(items, k, 0, &mut Vec::new(), &mut out);
    out
}

fn pair_space_cap(what: &str, n: usize, cap: u64) -> Result<(), EngineError> {
    let required = 1u128.checked_shl(2 * n as u32).unwrap_or(u128::MAX);
    if required > cap as u128 {
        return Err(EngineError::CapExceeded {
            what: what.into(),
            required,
            cap,
        });
    }
    Ok(())
}

/// Checks a level of candidates, in order, possibly across worker threads.
/// Results come back aligned with the input order.
fn check_candidates<T: Sync>(
    candidates: &[T],
    jobs: usize,
    check: impl Fn(&T) -> Result<bool, EngineError> + Sync,
) -> Result<Vec<bool>, EngineError> {
    if jobs <= 1 || candidates.len() < 2 {
        return candidates.iter().map(&check).collect();
    }
    let chunk = candidates.len().div_ceil(jobs);
    let results: Vec<Result<Vec<bool>, EngineError>> = std::thread::scope(|scope| {
        let mut handles = Vec::new();
        for slice in candidates.chunks(chunk) {
            let check = &check;
            handles.push(scope.spawn(move || slice.iter().map(check).collect()));
        }
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    let mut out = Vec::with_capacity(candidates.len());
    for r in results {
        out.extend(r?);
    }
    Ok(out)
}

/// Minimal diagnoses whose components are drawn from `universe`. Pointwise
/// inclusion cannot relate pairs over disjoint id families, so restricting
/// the universe restricts minimality to exactly that sub-lattice.
pub(crate) fn minimal_diagnoses_over(
    m: &Mcs,
    universe: &[RuleId],
    opts: &EvalOptions,
    cache: &AccCache,
) -> Result<Vec<Diagnosis>, EngineError> {
    pair_space_cap("diagnosis candidate pairs", universe.len(), opts.cap)?;
    let n = universe.len();
    let mut accepted: Vec<Diagnosis> = Vec::new();
    for level in 0..=(2 * n) {
        let mut survivors: Vec<Diagnosis> = Vec::new();
        for k1 in level.saturating_sub(n)..=level.min(n) {
            let k2 = level - k1;
            for d1 in combinations(universe, k1) {
                for d2 in combinations(universe, k2) {
                    let candidate = Diagnosis { d1: d1.clone(), d2 };
                    if !accepted.iter().any(|a| a.dominates(&candidate)) {
                        survivors.push(candidate);
                    }
                }
            }
        }
        let verdicts = check_candidates(&survivors, opts.jobs, |d| {
            modified_is_consistent(m, d, opts, cache)
        })?;
        for (candidate, ok) in survivors.into_iter().zip(verdicts) {
            if ok {
                accepted.push(candidate);
            }
        }
    }
    accepted.sort();
    Ok(accepted)
}

/// All subset-minimal diagnoses, canonically ordered.
pub fn minimal_diagnoses(m: &Mcs, opts: &EvalOptions) -> Result<Vec<Diagnosis>, EngineError> {
    let universe: Vec<RuleId> = m.rule_ids().into_iter().collect();
    minimal_diagnoses_over(m, &universe, opts, &AccCache::default())
}

/// Every diagnosis, unminimized (exhaustive over all pairs).
pub fn all_diagnoses(m: &Mcs, opts: &EvalOptions) -> Result<Vec<Diagnosis>, EngineError> {
    let universe: Vec<RuleId> = m.rule_ids().into_iter().collect();
    pair_space_cap("diagnosis candidate pairs", universe.len(), opts.cap)?;
    let cache = AccCache::default();
    let mut out = Vec::new();
    for k1 in 0..=universe.len() {
        for d1 in combinations(&universe, k1) {
            for k2 in 0..=universe.len() {
                for d2 in combinations(&universe, k2) {
                    let candidate = Diagnosis { d1: d1.clone(), d2 };
                    if modified_is_consistent(m, &candidate, opts, &cache)? {
                        out.push(candidate);
                    }
                }
            }
        }
    }
    out.sort();
    Ok(out)
}

fn explanation_holds(
    m: &Mcs,
    e: &Explanation,
    opts: &EvalOptions,
    cache: &AccCache,
) -> Result<bool, EngineError> {
    let all: Vec<RuleId> = m.rule_ids().into_iter().collect();
    let free_r1: Vec<RuleId> = all.iter().filter(|r| !e.e1.contains(r)).cloned().collect();
    let free_r2: Vec<RuleId> = all.iter().filter(|r| !e.e2.contains(r)).cloned().collect();
    let required = 1u128
        .checked_shl((free_r1.len() + free_r2.len()) as u32)
        .unwrap_or(u128::MAX);
    if required > opts.cap as u128 {
        return Err(EngineError::CapExceeded {
            what: "explanation completions".into(),
            required,
            cap: opts.cap,
        });
    }
    for k1 in 0..=free_r1.len() {
        for extra in combinations(&free_r1, k1) {
            let r1: BTreeSet<RuleId> = e.e1.union(&extra).cloned().collect();
            for k2 in 0..=free_r2.len() {
                for r2 in combinations(&free_r2, k2) {
                    let modified = modify(m, &r1, &r2)?;
                    if exists_equilibrium(&modified, opts, cache)? {
                        return Ok(false);
                    }
                }
            }
        }
    }
    Ok(true)
}

/// Whether `e` is an explanation: every admissible completion
/// `(R1, R2)` with `E1 ⊆ R1 ⊆ br` and `R2 ⊆ br ∖ E2` leaves
/// `M[R1 ∪ heads(R2)]` inconsistent.
pub fn is_explanation(m: &Mcs, e: &Explanation, opts: &EvalOptions) -> Result<bool, EngineError> {
    check_ids(m, &e.e1)?;
    check_ids(m, &e.e2)?;
    explanation_holds(m, e, opts, &AccCache::default())
}

/// All subset-minimal explanations, canonically ordered. Empty iff the
/// system is consistent.
pub fn minimal_explanations(m: &Mcs, opts: &EvalOptions) -> Result<Vec<Explanation>, EngineError> {
    let universe: Vec<RuleId> = m.rule_ids().into_iter().collect();
    pair_space_cap("explanation candidate pairs", universe.len(), opts.cap)?;
    let cache = AccCache::default();
    if exists_equilibrium(m, opts, &cache)? {
        return Ok(Vec::new());
    }
    let n = universe.len();
    let mut accepted: Vec<Explanation> = Vec::new();
    for level in 0..=(2 * n) {
        let mut survivors: Vec<Explanation> = Vec::new();
        for k1 in level.saturating_sub(n)..=level.min(n) {
            let k2 = level - k1;
            for e1 in combinations(&universe, k1) {
                for e2 in combinations(&universe, k2) {
                    let candidate = Explanation { e1: e1.clone(), e2 };
                    // Explanations are upward closed, so a dominated
                    // candidate is an explanation but never a minimal one.
                    if !accepted.iter().any(|a| a.dominates(&candidate)) {
                        survivors.push(candidate);
                    }
                }
            }
        }
        let verdicts = check_candidates(&survivors, opts.jobs, |e| {
            explanation_holds(m, e, opts, &cache)
        })?;
        for (candidate, ok) in survivors.into_iter().zip(verdicts) {
            if ok {
                accepted.push(candidate);
            }
        }
    }
    accepted.sort();
    Ok(accepted)
}

/// Every explanation, unminimized.
pub fn all_explanations(m: &Mcs, opts: &EvalOptions) -> Result<Vec<Explanation>, EngineError> {
    let universe: Vec<RuleId> = m.rule_ids().into_iter().collect();
    pair_space_cap("explanation candidate pairs", universe.len(), opts.cap)?;
    let cache = AccCache::default();
    let mut out = Vec::new();
    for k1 in 0..=universe.len() {
        for e1 in combinations(&universe, k1) {
            for k2 in 0..=universe.len() {
                for e2 in combinations(&universe, k2) {
                    let candidate = Explanation { e1: e1.clone(), e2 };
                    if explanation_holds(m, &candidate, opts, &cache)? {
                        out.push(candidate);
                    }
                }
            }
        }
    }
    out.sort();
    Ok(out)
}

/// The faulty bridge rules from both angles: the union over minimal
/// diagnoses of `d1 ∪ d2`, and the union over minimal explanations of
/// `e1 ∪ e2`. The two components coincide.
pub fn faulty_rule_sets(
    m: &Mcs,
    opts: &EvalOptions,
) -> Result<(BTreeSet<RuleId>, BTreeSet<RuleId>), EngineError> {
    let from_diagnoses = minimal_diagnoses(m, opts)?
        .into_iter()
        .flat_map(|d| d.d1.into_iter().chain(d.d2))
        .collect();
    let from_explanations = minimal_explanations(m, opts)?
        .into_iter()
        .flat_map(|e| e.e1.into_iter().chain(e.e2))
        .collect();
    Ok((from_diagnoses, from_explanations))
}
