//! Exact polynomial arithmetic over the rationals and matrices of polynomials.

pub mod linalg;
mod matrix;
mod polynomial;
mod text;
pub mod univariate;

pub use linalg::DEFAULT_PIVOT_TOL;
pub use matrix::{PolyMatrix, Point, Scalar};
pub use polynomial::{int, rat, Monomial, Polynomial, Rational};
pub use text::{format_polynomial, format_rational, Variables};
