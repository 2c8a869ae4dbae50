//! An engine for heterogeneous nonmonotonic multi-context systems.
//!
//! A system is a collection of contexts — knowledge bases under pluggable
//! semantics (fact bases, clausal models, answer-set programs) — wired
//! together by nonmonotonic bridge rules. The engine evaluates equilibria,
//! decides consistency, enumerates subset-minimal diagnoses and
//! explanations of inconsistency, filters and ranks diagnoses through
//! observer programs, and evaluates managed systems whose bridge rules
//! carry knowledge-base-modifying commands.
//!
//! Entry points:
//! - [`parser::parse_mcs`] / [`parser::serialize_mcs`] for the `.mcs` syntax
//! - [`semantics`] for equilibria and consistency
//! - [`analysis`] for diagnoses and explanations
//! - [`meta`] for observer-based filtering and preference selection
//! - [`managed`] for managed equilibria, total coherence and the
//!   dependency graph

pub mod analysis;
pub mod error;
pub mod logics;
pub mod managed;
pub mod meta;
pub mod model;
pub mod parser;
pub mod semantics;

pub use analysis::{
    all_diagnoses, all_explanations, faulty_rule_sets, is_diagnosis, is_explanation,
    minimal_diagnoses, minimal_explanations, Diagnosis, Explanation,
};
pub use error::EngineError;
pub use logics::{acc, asp_acc, clausal_acc, facts_acc, is_answer_set, reduct};
pub use managed::{
    applicable_ops, classify_cycles, dependency_graph, enumerate_equilibria_managed,
    is_equilibrium_managed, mng_apply, totally_coherent, CycleClass, DepEdge, DependencyGraph,
};
pub use meta::{
    build_observed_mcs, encode_comparison, encode_diagnosis, filter_diagnoses,
    observed_minimal_diagnoses, preferred_diagnoses, strictly_better, ObserverProgram,
    PreferenceProgram,
};
pub use model::{
    validate, AspKb, AspRule, Atom, BeliefLiteral, BeliefSet, BeliefState, BridgeRule, ClausalKb,
    Clause, Context, ContextId, FactsKb, KnowledgeBase, LogicKind, Manager, Mcs, OpCommand, OpKind,
    RuleHead, RuleId, ValidationReport, Violation, ViolationKind,
};
pub use parser::{
    parse_asp_program, parse_mcs, serialize_asp_program, serialize_mcs, ParseError, ParseErrorKind,
    SourceSpan,
};
pub use semantics::{
    app_heads, enumerate_equilibria, is_equilibrium, is_inconsistent, modify, rule_applicable,
    EvalOptions,
};
