//! Coverage-type checking for a small functional generator language.

pub mod algebra;
pub mod check;
pub mod error;
pub mod interp;
pub mod prim;
pub mod smt;
pub mod syntax;

pub use error::{Error, ParseError, Result};
pub use interp::{denotation_member, eval_bounded, DomainBounds, ValueSet};
pub use prim::{ty_of, ty_of_op, PredicateRegistry};
pub use smt::{Solver, SolverConfig, Verdict};
pub use syntax::*;
pub use check::{
    basic_check, check_definition, check_parsed, check_program, declared_type, definition_term, CheckConfig,
    DefinitionReport, Measure, Outcome, ProgramReport, TraceStep,
};
