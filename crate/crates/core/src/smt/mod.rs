//! Subtyping obligations as closed validity goals, their SMT-LIB rendering,
//! and the external solver driver.

mod encode;
mod query;
mod solver;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use encode::{is_forall_exists, prenex, render, Encoded};
pub use query::{build_query, closure, err_free_goal, subtype_goal};
pub use solver::{Solver, SolverConfig, SolverStats};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Valid,
    Invalid,
    Unknown,
    Timeout,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Valid => "valid",
            Verdict::Invalid => "invalid",
            Verdict::Unknown => "unknown",
            Verdict::Timeout => "timeout",
        })
    }
}

/// A dispatched obligation.
#[derive(Clone, Debug)]
pub struct SolverQuery {
    pub id: usize,
    pub origin: String,
    pub goal: crate::syntax::Prop,
    pub smt_text: String,
    pub verdict: Verdict,
}
