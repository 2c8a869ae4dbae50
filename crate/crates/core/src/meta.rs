//! Diagnosis assessment: filtering through observer programs, the observed
//! system transformation, and preference selection over diagnoses.
//!
//! Observers are answer-set programs over the reserved input predicates
//! `rule/1`, `d1/1` and `d2/1`; a diagnosis passes the filter when the
//! observer program stays consistent on its encoding. Preference programs
//! compare two encoded diagnoses (`d1a/d2a` versus `d1b/d2b`) and derive
//! `better_a` to rank the first strictly higher.

use std::collections::BTreeSet;

use crate::analysis::{minimal_diagnoses, minimal_diagnoses_over, Diagnosis};
use crate::error::EngineError;
use crate::logics::asp_acc;
use crate::model::{
    AspKb, AspRule, Atom, BeliefLiteral, BridgeRule, Context, ContextId, KnowledgeBase, Mcs,
    RuleHead, RuleId,
};
use crate::semantics::{AccCache, EvalOptions};

/// Reserved input predicates of observer programs.
const OBSERVER_INPUTS: [&str; 3] = ["rule", "d1", "d2"];
/// Reserved input predicates of preference programs.
const PREFERENCE_INPUTS: [&str; 4] = ["d1a", "d2a", "d1b", "d2b"];
/// Predicates the observed-system transformation reserves for itself.
const TRANSFORM_INTERNALS: [&str; 2] = ["applied", "body"];

fn reject_reserved_heads(program: &AspKb, reserved: &[&str]) -> Result<(), EngineError> {
    for rule in program.rules() {
        for head in &rule.heads {
            if reserved.contains(&head.predicate()) {
                return Err(EngineError::ReservedPredicate(head.predicate().to_owned()));
            }
        }
    }
    Ok(())
}

/// A filter on diagnoses, expressed as an answer-set program over the
/// reserved predicates. The scope limits which rules the observer sees;
/// it defaults to all of them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObserverProgram {
    program: AspKb,
    scope: Option<BTreeSet<RuleId>>,
}

impl ObserverProgram {
    pub fn new(program: AspKb) -> Result<Self, EngineError> {
        reject_reserved_heads(&program, &OBSERVER_INPUTS)?;
        Ok(Self {
            program,
            scope: None,
        })
    }

    /// Restricts the observer to a subset of the bridge rules; encodings
    /// omit the `rule`/`d1`/`d2` atoms of everything else.
    pub fn with_scope(program: AspKb, scope: BTreeSet<RuleId>) -> Result<Self, EngineError> {
        reject_reserved_heads(&program, &OBSERVER_INPUTS)?;
        Ok(Self {
            program,
            scope: Some(scope),
        })
    }

    pub fn program(&self) -> &AspKb {
        &self.program
    }

    fn observes(&self, id: &RuleId) -> bool {
        self.scope.as_ref().is_none_or(|s| s.contains(id))
    }

    fn scoped_encoding(&self, d: &Diagnosis, m: &Mcs) -> BTreeSet<Atom> {
        encode_diagnosis(d, m)
            .into_iter()
            .filter(|a| {
                let id = RuleId::new(a.args()[0]);
                self.observes(&id)
            })
            .collect()
    }
}

/// A strict preference relation, expressed as an answer-set program that
/// derives `better_a` when the first encoded diagnosis beats the second.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreferenceProgram {
    program: AspKb,
}

impl PreferenceProgram {
    pub fn new(program: AspKb) -> Result<Self, EngineError> {
        reject_reserved_heads(&program, &PREFERENCE_INPUTS)?;
        Ok(Self { program })
    }

    pub fn program(&self) -> &AspKb {
        &self.program
    }
}

/// The observer-facing encoding of a diagnosis: `rule(r)` for every bridge
/// rule of the system, `d1(r)` for the removed ones, `d2(r)` for the
/// unconditioned ones.
pub fn encode_diagnosis(d: &Diagnosis, m: &Mcs) -> BTreeSet<Atom> {
    let mut atoms = BTreeSet::new();
    for id in m.rule_ids() {
        atoms.insert(Atom::with_args("rule", &[id.as_str()]));
    }
    for id in &d.d1 {
        atoms.insert(Atom::with_args("d1", &[id.as_str()]));
    }
    for id in &d.d2 {
        atoms.insert(Atom::with_args("d2", &[id.as_str()]));
    }
    atoms
}

fn observer_accepts(
    f: &ObserverProgram,
    encoding: &BTreeSet<Atom>,
    opts: &EvalOptions,
) -> Result<bool, EngineError> {
    let mut program = f.program.clone();
    for atom in encoding {
        program.insert(AspRule::fact(atom.clone()));
    }
    Ok(!asp_acc(&program, opts)?.is_empty())
}

/// The minimal diagnoses the observer keeps: those whose encoding leaves
/// the observer program with at least one answer set.
pub fn filter_diagnoses(
    m: &Mcs,
    f: &ObserverProgram,
    opts: &EvalOptions,
) -> Result<Vec<Diagnosis>, EngineError> {
    let mut out = Vec::new();
    for d in minimal_diagnoses(m, opts)? {
        if observer_accepts(f, &f.scoped_encoding(&d, m), opts)? {
            out.push(d);
        }
    }
    Ok(out)
}

/// The observed system M_f: all contexts of `m`, an asp observer context
/// `ob`, and per observed rule an indirection that routes the rule's effect
/// through `ob` while exposing whether the rule fired and whether its body
/// held.
///
/// Observed rules keep their ids on the indirected copy, so diagnoses of
/// M_f touching only original ids project back one-to-one. The observer
/// base derives `d1(r)` when the body holds without the rule firing and
/// `d2(r)` when the rule fires without its body.
pub fn build_observed_mcs(m: &Mcs, f: &ObserverProgram) -> Result<Mcs, EngineError> {
    let ob = ContextId::new("ob");
    if m.context(&ob).is_some() {
        return Err(EngineError::ContextIdClash("ob".into()));
    }
    for rule in f.program.rules() {
        for atom in rule.atoms() {
            if TRANSFORM_INTERNALS.contains(&atom.predicate()) {
                return Err(EngineError::ReservedPredicate(atom.predicate().to_owned()));
            }
        }
    }

    let mut ob_kb = f.program.clone();
    let mut rules: Vec<BridgeRule> = Vec::new();
    let mut taken = m.rule_ids();

    for rule in m.rules() {
        if !f.observes(&rule.id) {
            rules.push(rule.clone());
            continue;
        }
        let id = rule.id.as_str();
        let applied = Atom::with_args("applied", &[id]);
        let body_marker = Atom::with_args("body", &[id]);

        ob_kb.insert(AspRule::fact(Atom::with_args("rule", &[id])));
        ob_kb.insert(AspRule::new(
            [Atom::with_args("d1", &[id])],
            [body_marker.clone()],
            [applied.clone()],
        ));
        ob_kb.insert(AspRule::new(
            [Atom::with_args("d2", &[id])],
            [applied.clone()],
            [body_marker.clone()],
        ));

        // The indirected copy keeps the original id: diagnoses on it are
        // exactly diagnoses on the original rule.
        rules.push(BridgeRule {
            id: rule.id.clone(),
            head_context: ob.clone(),
            head: RuleHead::Formula(applied.clone()),
            body: rule.body.clone(),
        });
        let probe_id = fresh_aux_id(&format!("obx_body_{id}"), &mut taken);
        rules.push(BridgeRule {
            id: probe_id,
            head_context: ob.clone(),
            head: RuleHead::Formula(body_marker),
            body: rule.body.clone(),
        });
        let relay_id = fresh_aux_id(&format!("obx_relay_{id}"), &mut taken);
        rules.push(BridgeRule {
            id: relay_id,
            head_context: rule.head_context.clone(),
            head: rule.head.clone(),
            body: vec![BeliefLiteral::pos("ob", applied)],
        });
    }

    let mut contexts = m.contexts().to_vec();
    contexts.push(Context::new("ob", KnowledgeBase::Asp(ob_kb)));
    Ok(Mcs::new(contexts, rules))
}

fn fresh_aux_id(base: &str, taken: &mut BTreeSet<RuleId>) -> RuleId {
    let mut candidate = RuleId::new(base);
    let mut n = 1;
    while taken.contains(&candidate) {
        n += 1;
        candidate = RuleId::new(format!("{base}_{n}"));
    }
    taken.insert(candidate.clone());
    candidate
}

/// Minimal diagnoses of the observed system that touch only original rule
/// ids. Restricting candidates to the original ids is exact: pointwise
/// inclusion never relates pairs across disjoint id families.
pub fn observed_minimal_diagnoses(
    m_f: &Mcs,
    original_ids: &BTreeSet<RuleId>,
    opts: &EvalOptions,
) -> Result<Vec<Diagnosis>, EngineError> {
    let universe: Vec<RuleId> = original_ids.iter().cloned().collect();
    minimal_diagnoses_over(m_f, &universe, opts, &AccCache::default())
}

/// The comparison encoding: the first diagnosis as `d1a`/`d2a`, the second
/// as `d1b`/`d2b`.
pub fn encode_comparison(a: &Diagnosis, b: &Diagnosis) -> BTreeSet<Atom> {
    let mut atoms = BTreeSet::new();
    for id in &a.d1 {
        atoms.insert(Atom::with_args("d1a", &[id.as_str()]));
    }
    for id in &a.d2 {
        atoms.insert(Atom::with_args("d2a", &[id.as_str()]));
    }
    for id in &b.d1 {
        atoms.insert(Atom::with_args("d1b", &[id.as_str()]));
    }
    for id in &b.d2 {
        atoms.insert(Atom::with_args("d2b", &[id.as_str()]));
    }
    atoms
}

/// Whether the preference program ranks `a` strictly above `b`: `better_a`
/// holds in every answer set of the comparison program, and there is one.
pub fn strictly_better(
    p: &PreferenceProgram,
    a: &Diagnosis,
    b: &Diagnosis,
    opts: &EvalOptions,
) -> Result<bool, EngineError> {
    let mut program = p.program.clone();
    for atom in encode_comparison(a, b) {
        program.insert(AspRule::fact(atom));
    }
    let answer_sets = asp_acc(&program, opts)?;
    let better = Atom::new("better_a");
    Ok(!answer_sets.is_empty() && answer_sets.iter().all(|s| s.contains(&better)))
}

/// The undominated candidates under the preference relation: diagnoses no
/// other candidate strictly beats. Candidates are the filtered minimal
/// diagnoses when an observer is given, all minimal diagnoses otherwise.
pub fn preferred_diagnoses(
    m: &Mcs,
    p: &PreferenceProgram,
    f: Option<&ObserverProgram>,
    opts: &EvalOptions,
) -> Result<Vec<Diagnosis>, EngineError> {
    let candidates = match f {
        Some(f) => filter_diagnoses(m, f, opts)?,
        None => minimal_diagnoses(m, opts)?,
    };
    let mut out = Vec::new();
    'candidate: for b in &candidates {
        for a in &candidates {
            if strictly_better(p, a, b, opts)? {
                continue 'candidate;
            }
        }
        out.push(b.clone());
    }
    Ok(out)
}
