//! Surface and core syntax of the language.

pub mod fresh;
pub mod lexer;
pub mod mnf;
pub mod parse;
pub mod pretty;
pub mod prop;
pub mod term;
pub mod types;

pub use fresh::Fresh;
pub use mnf::normalize_mnf;
pub use parse::{
    parse_base_type, parse_basic_type, parse_context, parse_program, parse_prop, parse_term, parse_type, Definition,
    Param, ParamType, Program,
};
pub use prop::{euclid_mod, sort_guard, CmpOp, Expr, Prop, NU};
pub use term::{Branch, Constant, Ctor, Op, Prim, Term};
pub use types::{BaseType, BasicType, RefinementType, TypeContext};
