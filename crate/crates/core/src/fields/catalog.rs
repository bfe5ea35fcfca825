use std::collections::BTreeMap;

use super::{bracket, FieldError, VectorField};
use crate::algebra::{CoordinateRing, Polynomial, Ring, Variety};

fn field(ring: &Ring, coeffs: &[&str]) -> VectorField {
    VectorField::from_strs(ring, coeffs).expect("catalog field is tangent")
}

/// Named generators of each variety.
///
/// QUADRIC: `THETA`, `XI`, `H`, `X_XI`, `Z_XI`, `Z_H`.
/// SL2: `V`, `W`, `H`, `BCW` (= (b+c)W), `DW`, `DH`.
pub fn catalog(variety: Variety) -> BTreeMap<String, VectorField> {
    let ring = variety.ring();
    let entries: Vec<(&str, [&str; 4])> = match variety {
        Variety::Quadric => vec![
            ("THETA", ["2*z", "0", "y", ""]),
            ("XI", ["0", "2*z", "x", ""]),
            ("H", ["-2*x", "2*y", "0", ""]),
            ("X_XI", ["0", "2*x*z", "x^2", ""]),
            ("Z_XI", ["0", "2*z^2", "x*z", ""]),
            ("Z_H", ["-2*x*z", "2*y*z", "0", ""]),
        ],
        Variety::Sl2 => vec![
            ("V", ["c", "d", "0", "0"]),
            ("W", ["0", "0", "a", "b"]),
            ("H", ["-a", "-b", "c", "d"]),
            ("BCW", ["0", "0", "(b + c)*a", "(b + c)*b"]),
            ("DW", ["0", "0", "d*a", "d*b"]),
            ("DH", ["-d*a", "-d*b", "d*c", "d*d"]),
        ],
    };
    let n = ring.n_vars();
    entries
        .into_iter()
        .map(|(name, coeffs)| (name.to_string(), field(&ring, &coeffs[..n])))
        .collect()
}

/// Catalog lookup, case-insensitive; on the quadric `EULER` is also accepted.
pub fn generator(variety: Variety, name: &str) -> Result<VectorField, FieldError> {
    let key = name.trim().to_ascii_uppercase();
    if variety == Variety::Quadric && key == "EULER" {
        return Ok(euler_field());
    }
    catalog(variety)
        .remove(&key)
        .ok_or_else(|| FieldError::UnknownField {
            variety: variety.name().to_string(),
            name: name.to_string(),
        })
}

/// `x d/dx + y d/dy + z d/dz` on the quadric.
pub fn euler_field() -> VectorField {
    field(&CoordinateRing::quadric(), &["x", "y", "z"])
}

fn univariate_in(p: &Polynomial, var: &str) -> Result<(), FieldError> {
    let idx = p.ring().variable_index(var).expect("quadric variable");
    if p.terms().all(|(m, _)| m.degree() == m.exponent(idx)) {
        Ok(())
    } else {
        Err(FieldError::Unsupported(format!(
            "shear coefficient must be a polynomial in {var} alone, got {}",
            p.to_text()
        )))
    }
}

/// `f(x) * Xi` on the quadric.
pub fn shear_xi(f: &Polynomial) -> Result<VectorField, FieldError> {
    univariate_in(f, "x")?;
    catalog(Variety::Quadric)["XI"].mul_poly(f)
}

/// `g(y) * Theta` on the quadric.
pub fn shear_theta(g: &Polynomial) -> Result<VectorField, FieldError> {
    univariate_in(g, "y")?;
    catalog(Variety::Quadric)["THETA"].mul_poly(g)
}

/// `[h f G, g D] - [f G, h g D]`.
pub fn kk_combination(
    f: &Polynomial,
    g: &Polynomial,
    h: &Polynomial,
    gamma: &VectorField,
    delta: &VectorField,
) -> Result<VectorField, FieldError> {
    let hf = f.checked_mul(h)?;
    let hg = g.checked_mul(h)?;
    let left = bracket(&gamma.mul_poly(&hf)?, &delta.mul_poly(g)?)?;
    let right = bracket(&gamma.mul_poly(f)?, &delta.mul_poly(&hg)?)?;
    left.checked_sub(&right)
}

/// `-g f D(h) G - f g G(h) D`, the closed form of [`kk_combination`].
pub fn kk_expected(
    f: &Polynomial,
    g: &Polynomial,
    h: &Polynomial,
    gamma: &VectorField,
    delta: &VectorField,
) -> Result<VectorField, FieldError> {
    let fg = f.checked_mul(g)?;
    let a = gamma.mul_poly(&fg.checked_mul(&delta.apply(h)?)?)?;
    let b = delta.mul_poly(&fg.checked_mul(&gamma.apply(h)?)?)?;
    Ok(a.checked_add(&b)?
        .scale(&-crate::algebra::Rational::from_integer(1.into())))
}
