//! Terms, formulas, the concrete grammar and the bound-variable discipline.

mod ast;
mod discipline;
mod parse;
mod print;
mod var;

pub use ast::{Formula, Symbol, Term};
pub use discipline::{apply_discipline, discipline, is_disciplined};
pub use parse::{parse_formula, parse_formula_with, ParseError, ParseOptions};
pub use print::{print_formula, write_term, Names};
pub use var::{fresh_var_above, OrderKey, VarContext, Variable};
