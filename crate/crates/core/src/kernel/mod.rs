//! The kernel language: a small C subset for describing loop kernels whose
//! basic operations are counted statically or by execution.

mod ast;
mod count;
mod interp;
mod lexer;
mod parser;
mod value;

pub use ast::*;
pub use count::{
    count_static, count_static_with_budget, expr_cost, StaticCount, DEFAULT_WALK_BUDGET,
};
pub use interp::{
    interpret, interpret_with, ArrayState, Execution, FinalState, InterpError, InterpOptions,
};
pub use parser::{parse, ParseError, ParseErrorKind};
pub use value::Value;
