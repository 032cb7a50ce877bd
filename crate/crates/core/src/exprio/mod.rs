//! Expression parsing, printing and the command-line front end.

mod cli;
mod parse;

pub use cli::{run_cli, run_cli_to};
pub use parse::{parse, parse_coeff, ExprAst, ParseError, ParseErrorKind};

use crate::fieldalg::AlgebraElement;
use crate::scalar::Scalar;

/// Canonical text of an element; `parse` reads it back.
pub fn print<S: Scalar>(e: &AlgebraElement<S>) -> String {
    e.to_string()
}
