//! Exact arithmetic layer: compatible finite-field towers with Frobenius
//! action, and Laurent polynomials with explicit truncation tracking.

mod fq;
mod laurent;
pub(crate) mod prime;
mod tower;

pub use fq::FieldElem;
pub use laurent::{LaurentPoly, Prec};
pub use tower::{FieldCtx, FieldTower};

pub(crate) use fq::{one_with_ctx, zero_with_ctx};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ArithError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("field tower too large: p={p}, absolute degree {degree} does not fit in u64 order arithmetic")]
    TowerTooLarge { p: u64, degree: u32 },
    #[error("degree-{elem} element does not live inside a degree-{target} field")]
    NotASubfield { elem: u32, target: u32 },
    #[error("insufficient precision: need terms up to exponent {needed}, known below {precision}")]
    InsufficientPrecision { needed: i64, precision: i64 },
    #[error("malformed field or series encoding")]
    BadEncoding,
}
