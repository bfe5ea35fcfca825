//! Divergence with respect to the volume form `dx ^ dz / x` on the quadric,
//! computed in the chart `x != 0` where `y = z^2 / x`.

use std::collections::BTreeMap;

use num_traits::Zero;

use super::{FieldError, VectorField};
use crate::algebra::{CoordinateRing, Monomial, Polynomial, Rational, RingKind};

/// Laurent polynomial in `u` (possibly negative powers) times powers of `z`.
#[derive(Default)]
struct Laurent(BTreeMap<(i64, u32), Rational>);

impl Laurent {
    fn add(&mut self, key: (i64, u32), c: Rational) {
        if c.is_zero() {
            return;
        }
        let e = self.0.entry(key).or_insert_with(Rational::zero);
        *e += c;
        if e.is_zero() {
            self.0.remove(&key);
        }
    }

    /// Restriction of a quadric polynomial to the chart with coordinates
    /// `(u, z)`, where `u` is variable `keep` and the eliminated variable is
    /// `z^2 / u`.
    fn restrict(p: &Polynomial, keep: usize, drop: usize) -> Self {
        let mut out = Laurent::default();
        for (m, c) in p.terms() {
            let k = m.exponent(drop) as i64;
            out.add(
                (m.exponent(keep) as i64 - k, m.exponent(2) + 2 * k as u32),
                c.clone(),
            );
        }
        out
    }

    fn d_u(&self) -> Self {
        let mut out = Laurent::default();
        for (&(e, f), c) in &self.0 {
            out.add((e - 1, f), c * Rational::from_integer(e.into()));
        }
        out
    }

    fn d_z(&self) -> Self {
        let mut out = Laurent::default();
        for (&(e, f), c) in &self.0 {
            if f > 0 {
                out.add((e, f - 1), c * Rational::from_integer(f.into()));
            }
        }
        out
    }

    fn div_u(&self) -> Self {
        Laurent(
            self.0
                .iter()
                .map(|(&(e, f), c)| ((e - 1, f), c.clone()))
                .collect(),
        )
    }

    fn sub(mut self, other: &Self) -> Self {
        for (&k, c) in &other.0 {
            self.add(k, -c.clone());
        }
        self
    }

    fn plus(mut self, other: &Self) -> Self {
        for (&k, c) in &other.0 {
            self.add(k, c.clone());
        }
        self
    }

    /// Multiplies by the smallest power of `u` making all exponents
    /// non-negative and returns the numerator in `ring`.
    fn numerator(&self, ring: &crate::algebra::Ring) -> Polynomial {
        let shift = self.0.keys().map(|&(e, _)| e).min().unwrap_or(0).min(0);
        Polynomial::from_terms(
            ring,
            self.0.iter().map(|(&(e, f), c)| {
                (
                    Monomial::from_exponents(&[(e - shift) as u32, f]),
                    c.clone(),
                )
            }),
        )
    }
}

fn chart_divergence(
    a: &VectorField,
    keep: usize,
    drop: usize,
    names: &[&str],
) -> Result<Polynomial, FieldError> {
    if a.ring().kind() != RingKind::Quadric {
        return Err(FieldError::Unsupported(
            "the volume-form divergence is defined on the quadric only".into(),
        ));
    }
    let au = Laurent::restrict(a.coeff(keep), keep, drop);
    let az = Laurent::restrict(a.coeff(2), keep, drop);
    // div = d_u A_u - A_u / u + d_z A_z
    let div = au.d_u().sub(&au.div_u()).plus(&az.d_z());
    Ok(div.numerator(&CoordinateRing::affine(names)))
}

/// Divergence of `a` with respect to `dx ^ dz / x` in the chart `(x, z)`,
/// with the power of `x` in the denominator cleared. Lives in `AFFINE2(x, z)`.
pub fn omega_divergence(a: &VectorField) -> Result<Polynomial, FieldError> {
    chart_divergence(a, 0, 1, &["x", "z"])
}

/// Same divergence in the chart `y != 0`, coordinates `(y, z)`; vanishes
/// exactly when [`omega_divergence`] does.
pub fn omega_divergence_y_chart(a: &VectorField) -> Result<Polynomial, FieldError> {
    chart_divergence(a, 1, 0, &["y", "z"])
}
