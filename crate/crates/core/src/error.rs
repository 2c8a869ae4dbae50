use thiserror::Error;

/// Errors surfaced by the evaluation and analysis operations.
///
/// Structural problems (dangling references, duplicate ids, incompatible
/// heads) are not errors: `validate` reports them and the parser rejects
/// them with positioned diagnostics.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    /// A search would have to examine more candidates than the configured cap.
    /// Never truncates silently.
    #[error("{what} needs {required} candidates, exceeding the search cap of {cap}")]
    CapExceeded {
        what: String,
        required: u128,
        cap: u64,
    },

    #[error("unknown rule id `{0}`")]
    UnknownRuleId(String),

    #[error("unknown context id `{0}`")]
    UnknownContextId(String),

    #[error("context id `{0}` is already in use")]
    ContextIdClash(String),

    #[error("operation `{op}` is not supported by the `{manager}` manager")]
    UnsupportedOp { op: String, manager: String },

    /// Reserved predicates of observer/preference programs may only occur in
    /// rule bodies.
    #[error("reserved predicate `{0}` must not appear in a rule head")]
    ReservedPredicate(String),

    /// A precondition that validation should have excluded was violated.
    #[error("internal defect: {0}")]
    Defect(String),
}
