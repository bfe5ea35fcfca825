//! Exact rational polynomials modulo a single relation, and exact linear algebra.

mod gauss;
mod linalg;
mod monomial;
mod parse;
mod polynomial;
mod ring;

pub use gauss::GaussRational;
pub use linalg::{linear_solve_exact, linear_solve_exact_multi, SparseEchelon};
pub use monomial::{Monomial, MAX_VARS};
pub use parse::parse_polynomial;
pub(crate) use parse::{Parser, Token};
pub use polynomial::{poly_mul, reduce, Polynomial};
pub use ring::{same_ring, CoordinateRing, Ring, RingKind, Variety};

use thiserror::Error;

pub type Rational = num_rational::BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("ring mismatch: {left} vs {right}")]
    RingMismatch { left: String, right: String },
    #[error("unknown variable '{0}'")]
    UnknownVariable(String),
    #[error("unknown variety '{0}' (expected sl2 or quadric)")]
    UnknownVariety(String),
    #[error("expected {expected} entries, found {found}")]
    ArityMismatch { expected: usize, found: usize },
    #[error("parse error at byte {position}: {message}")]
    Parse { position: usize, message: String },
}

/// Parses `p/q`, `p` or a decimal such as `-0.25` into an exact rational.
pub fn parse_rational(text: &str) -> Result<Rational, AlgebraError> {
    let t = text.trim();
    let bad = || AlgebraError::Parse {
        position: 0,
        message: format!("invalid rational '{text}'"),
    };
    if let Some((n, d)) = t.split_once('/') {
        let n: num_bigint::BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: num_bigint::BigInt = d.trim().parse().map_err(|_| bad())?;
        if num_traits::Zero::is_zero(&d) {
            return Err(bad());
        }
        return Ok(Rational::new(n, d));
    }
    if let Some((int, frac)) = t.split_once('.') {
        let negative = int.starts_with('-');
        let digits = format!("{}{}", int.trim_start_matches(['-', '+']), frac);
        if digits.is_empty() || !digits.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let n: num_bigint::BigInt = digits.parse().map_err(|_| bad())?;
        let d = num_traits::pow(num_bigint::BigInt::from(10), frac.len());
        let r = Rational::new(n, d);
        return Ok(if negative { -r } else { r });
    }
    t.parse::<num_bigint::BigInt>()
        .map(Rational::from_integer)
        .map_err(|_| bad())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_literals() {
        let r = |n: i64, d: i64| Rational::new(n.into(), d.into());
        assert_eq!(parse_rational("3/6").unwrap(), r(1, 2));
        assert_eq!(parse_rational("-7").unwrap(), r(-7, 1));
        assert_eq!(parse_rational("-0.25").unwrap(), r(-1, 4));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }
}
