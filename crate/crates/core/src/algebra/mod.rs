//! Exact arithmetic: rationals, prime fields, sparse multivariate
//! polynomials, Gröbner bases and dense linear algebra.

pub mod coeff;
pub mod groebner;
pub mod linalg;
pub mod poly;
pub mod univariate;

pub use coeff::{is_prime, Coefficient, Fp, PrimeField, Rational};
pub use groebner::{buchberger, minimal_polynomial, normal_form, MinPoly};
pub use linalg::{matrix_rank, RowEchelon};
pub use poly::{Monomial, MonomialOrder, MultiPoly};
pub use univariate::UniPoly;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("arity mismatch: {left} variables vs {right}")]
    ArityMismatch { left: usize, right: usize },
    #[error("coefficients from different prime fields")]
    ModulusMismatch,
    #[error("modulus {0} is not a prime below 2^32")]
    BadModulus(u64),
    #[error("denominator vanishes modulo the prime")]
    DenominatorVanishes,
    #[error("operation undefined for the zero polynomial")]
    ZeroPolynomial,
    #[error("cannot evaluate a zero polynomial in zero variables")]
    EmptyPoint,
}
