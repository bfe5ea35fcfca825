//! Bracket expressions, exact Lie closures with certificates, and
//! decomposition in polynomial frames.

mod closure;
mod expr;
mod frame;
pub mod ledger;

use thiserror::Error;

use crate::algebra::AlgebraError;
use crate::fields::FieldError;

pub use closure::{
    closure, vectorize, BasisElement, ClosureBasis, ClosureJson, FieldKey, NamedField,
};
pub use expr::{BracketExpr, Evaluator, Node};
pub use frame::{decompose_in_frame, decompose_many, recombine};

#[derive(Debug, Error)]
pub enum BracketError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("unknown generator '{0}'")]
    UnknownGenerator(String),
    #[error("target degree {degree} exceeds the closure limit {limit}")]
    DegreeOverflow { degree: u32, limit: u32 },
    #[error("certificate {0} does not evaluate to its basis field")]
    CertificateMismatch(usize),
    #[error("stored certificate {0} is dependent on the earlier ones")]
    DependentCertificate(usize),
    #[error("no generators given")]
    NoGenerators,
    #[error("generator {name} has degree {degree} above the cap {cap}")]
    CapTooSmall { name: String, degree: u32, cap: u32 },
}

impl From<AlgebraError> for BracketError {
    fn from(e: AlgebraError) -> Self {
        BracketError::Field(FieldError::Algebra(e))
    }
}
