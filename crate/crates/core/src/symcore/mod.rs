//! Exact symbolic expression kernel.

mod expr;
mod integrate;
mod parse;
mod poly;
mod scalar;
mod var;

pub use expr::Expr;
pub use parse::parse;
pub use poly::{Monomial, Poly};
pub use scalar::Scalar;
pub use var::{Field, Var};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SymError {
    #[error("syntax error at line {line}, column {col}: {msg}")]
    Syntax {
        line: usize,
        col: usize,
        msg: String,
    },
    #[error("unknown identifier `{name}` at line {line}, column {col}")]
    UnknownIdentifier {
        name: String,
        line: usize,
        col: usize,
    },
    #[error("division by zero")]
    DivisionByZero,
    #[error("log of zero")]
    LogOfZero,
    #[error("unsupported denominator `{0}`")]
    UnsupportedDenominator(String),
    #[error("exp argument must be a polynomial: `{0}`")]
    NonPolynomialExp(String),
    #[error("expression is not separable in the requested variables: `{0}`")]
    NotSeparable(String),
    #[error("no supported antiderivative for `{0}`")]
    Unintegrable(String),
    #[error("series expansion failed: {0}")]
    Series(String),
}

/// Canonical form of an expression. Expressions are always stored
/// canonically, so this is the identity; it exists as the public
/// normalization entry point.
pub fn simplify(e: &Expr) -> Expr {
    e.clone()
}

/// Canonical text form.
pub fn print(e: &Expr) -> String {
    e.to_string()
}
