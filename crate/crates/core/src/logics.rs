//! The three shipped semantics: fact bases, clausal model logic and ground
//! answer-set programs with disjunctive heads and constraints.
//!
//! Every `*_acc` function is pure and returns belief sets in canonical
//! order. Answer-set search is brute force over the program's atom
//! universe, guarded by the search cap.

use std::collections::BTreeSet;

use crate::error::EngineError;
use crate::model::{AspKb, AspRule, Atom, BeliefSet, ClausalKb, FactsKb, KnowledgeBase};
use crate::semantics::EvalOptions;

/// ACC of the facts logic: the base itself is the single acceptable set.
pub fn facts_acc(kb: &FactsKb) -> BTreeSet<BeliefSet> {
    [BeliefSet::new(kb.facts.iter().cloned())]
        .into_iter()
        .collect()
}

/// ACC of the clausal logic: every subset of the signature that satisfies
/// all clauses, read as total interpretations (member atoms true, all other
/// signature atoms false).
pub fn clausal_acc(kb: &ClausalKb) -> BTreeSet<BeliefSet> {
    let signature: Vec<&Atom> = kb.signature().iter().collect();
    let mut out = BTreeSet::new();
    for mask in 0u64..(1u64 << signature.len()) {
        let interp: BTreeSet<Atom> = signature
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, a)| (*a).clone())
            .collect();
        let satisfied = kb.clauses().iter().all(|c| {
            c.pos.iter().any(|a| interp.contains(a)) || c.neg.iter().any(|a| !interp.contains(a))
        });
        if satisfied {
            out.insert(BeliefSet { atoms: interp });
        }
    }
    out
}

/// The reduct of `p` relative to `interp`: rules with a not-body atom inside
/// `interp` are deleted, the remaining rules lose their not-bodies.
pub fn reduct(p: &AspKb, interp: &BeliefSet) -> AspKb {
    AspKb::new(p.rules().iter().filter_map(|r| {
        if r.neg.iter().any(|a| interp.contains(a)) {
            None
        } else {
            Some(AspRule::new(
                r.heads.iter().cloned(),
                r.pos.iter().cloned(),
                [],
            ))
        }
    }))
}

/// Whether `interp` satisfies every rule of a not-free program: whenever the
/// positive body holds, some head atom must hold. Constraints have no head
/// and thus reject any interpretation satisfying their body.
fn is_model_of_positive(p: &AspKb, interp: &BeliefSet) -> bool {
    p.rules().iter().all(|r| {
        !r.pos.iter().all(|a| interp.contains(a)) || r.heads.iter().any(|h| interp.contains(h))
    })
}

/// Least model of a not-free, disjunction-free program (ignoring
/// constraints). Used as a fast path for the minimality check.
fn least_model(p: &AspKb) -> BeliefSet {
    let mut derived: BTreeSet<Atom> = BTreeSet::new();
    loop {
        let mut changed = false;
        for r in p.rules() {
            if r.heads.len() == 1 && r.pos.iter().all(|a| derived.contains(a)) {
                let h = r.heads.iter().next().unwrap();
                if derived.insert(h.clone()) {
                    changed = true;
                }
            }
        }
        if !changed {
            return BeliefSet { atoms: derived };
        }
    }
}

/// Head atoms of rules that are pure facts; they belong to every model.
fn fact_atoms(p: &AspKb) -> BTreeSet<Atom> {
    p.rules()
        .iter()
        .filter(|r| r.heads.len() == 1 && r.pos.is_empty() && r.neg.is_empty())
        .map(|r| r.heads.iter().next().unwrap().clone())
        .collect()
}

/// Answer-set test: `interp` is a minimal model of its reduct.
pub fn is_answer_set(p: &AspKb, interp: &BeliefSet) -> bool {
    let red = reduct(p, interp);
    if !is_model_of_positive(&red, interp) {
        return false;
    }
    if red.rules().iter().all(|r| r.heads.len() <= 1) {
        // Disjunction-free reduct: the unique minimal model is the least one.
        return least_model(&red) == *interp;
    }
    // Disjunctive reduct: no proper subset may be a model. Every model
    // contains the facts, so only the remainder varies.
    let forced = fact_atoms(&red);
    let variable: Vec<&Atom> = interp.atoms.difference(&forced).collect();
    let n = variable.len();
    assert!(n < 64, "interpretation too large for the minimality check");
    for mask in 0u64..(1u64 << n) {
        if mask == (1 << n) - 1 {
            continue;
        }
        let mut sub = forced.clone();
        sub.extend(
            variable
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, a)| (*a).clone()),
        );
        if is_model_of_positive(&red, &BeliefSet { atoms: sub }) {
            return false;
        }
    }
    true
}

/// All answer sets of `p`, by exhaustive search.
///
/// An answer set is a minimal model of a reduct, so it contains every fact
/// and nothing outside the head atoms; the search space is the power set of
/// the non-fact head atoms.
pub fn asp_acc(p: &AspKb, opts: &EvalOptions) -> Result<BTreeSet<BeliefSet>, EngineError> {
    let forced = fact_atoms(p);
    let variable: Vec<Atom> = p
        .rules()
        .iter()
        .flat_map(|r| r.heads.iter().cloned())
        .filter(|a| !forced.contains(a))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let required = 1u128
        .checked_shl(variable.len() as u32)
        .unwrap_or(u128::MAX);
    if required > opts.cap as u128 {
        return Err(EngineError::CapExceeded {
            what: format!("answer-set search over {} candidate atoms", variable.len()),
            required,
            cap: opts.cap,
        });
    }
    let mut out = BTreeSet::new();
    for mask in 0u64..(1u64 << variable.len()) {
        let mut atoms = forced.clone();
        atoms.extend(
            variable
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, a)| a.clone()),
        );
        let interp = BeliefSet { atoms };
        if is_answer_set(p, &interp) {
            out.insert(interp);
        }
    }
    Ok(out)
}

/// ACC dispatch over the knowledge-base kinds.
pub fn acc(kb: &KnowledgeBase, opts: &EvalOptions) -> Result<BTreeSet<BeliefSet>, EngineError> {
    match kb {
        KnowledgeBase::Facts(kb) => Ok(facts_acc(kb)),
        KnowledgeBase::Clausal(kb) => Ok(clausal_acc(kb)),
        KnowledgeBase::Asp(kb) => asp_acc(kb, opts),
    }
}
