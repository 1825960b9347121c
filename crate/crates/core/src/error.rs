use thiserror::Error;

use crate::smt::Verdict;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{col}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

/// Everything that can go wrong between parsing a program and reporting a
/// verdict for it.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("syntax error at {0}")]
    Parse(#[from] ParseError),
    #[error("unknown primitive `{0}`")]
    UnknownPrimitive(String),
    #[error("predicate `{0}` registered twice with the same signature")]
    DuplicatePredicate(String),
    #[error("unknown method predicate `{0}`")]
    UnknownPredicate(String),
    #[error("`{name}` expects {expected} argument(s), found {found}")]
    ArityMismatch { name: String, expected: usize, found: usize },
    #[error("sort mismatch: {0}")]
    SortMismatch(String),
    #[error("basic type error ({rule}): {msg}")]
    BasicType { rule: &'static str, msg: String },
    #[error("binding `{0}` has an overapproximate type mentioning a coverage-typed variable; the query would leave EPR")]
    NonEPRContext(String),
    #[error("qualifier variable `{0}` is not bound in the context")]
    UnhousedSymbol(String),
    #[error("solver unavailable: {0}")]
    SolverUnavailable(String),
    #[error("solver crashed: {0}")]
    SolverCrashed(String),
    #[error("solver protocol error: {0}")]
    ProtocolError(String),
    #[error("recursive call of `{func}` cannot be shown to decrease: {detail}")]
    TerminationViolation { func: String, detail: String },
    #[error("context binding `{0}` is infeasible")]
    ContextInfeasible(String),
    #[error("`{0}` is not bound in the context")]
    NotClosed(String),
    #[error("shape violation: {0}")]
    ShapeViolation(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("incomparable kinds: {0}")]
    IncomparableKinds(String),
    #[error("subtyping failed ({verdict}): {goal}")]
    SubtypeFailure { query_id: Option<usize>, goal: String, verdict: Verdict },
    #[error("no rule applies: {0}")]
    NoRuleApplies(String),
    #[error("missing annotation: {0}")]
    MissingAnnotation(String),
    #[error("stuck term: {0}")]
    StuckTerm(String),
    #[error("bounds too small: {0}")]
    BoundsTooSmall(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
