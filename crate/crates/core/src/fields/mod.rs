//! Tangent polynomial derivations of a coordinate ring and their Lie bracket.

mod catalog;
mod divergence;
mod point;

pub use catalog::{
    catalog, euler_field, generator, kk_combination, kk_expected, shear_theta, shear_xi,
};
pub use divergence::{omega_divergence, omega_divergence_y_chart};
pub use point::{
    evaluate, format_complex, numeric_rank, parse_complex, span_rank_at, Point, PointJson,
};

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{
    same_ring, AlgebraError, CoordinateRing, Parser, Polynomial, Rational, Ring, Token, Variety,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FieldError {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("field is not tangent: applying it to the relation leaves {0}")]
    NotTangent(String),
    #[error("unknown field '{name}' for {variety}")]
    UnknownField { variety: String, name: String },
    #[error("point is off the variety (relation defect {0:e})")]
    OffVariety(f64),
    #[error("{0}")]
    Unsupported(String),
}

/// A derivation `sum_i coeffs[i] * d/dv_i` tangent to the ring's variety,
/// with every coefficient in normal form.
#[derive(Clone, PartialEq, Eq)]
pub struct VectorField {
    ring: Ring,
    coeffs: Vec<Polynomial>,
}

impl VectorField {
    /// Builds a field from coefficients, checking arity, ring and tangency.
    pub fn new(ring: &Ring, coeffs: Vec<Polynomial>) -> Result<Self, FieldError> {
        let field = Self::from_parts(ring, coeffs)?;
        let defect = field.tangency_defect();
        if !defect.is_zero() {
            return Err(FieldError::NotTangent(defect.to_text()));
        }
        Ok(field)
    }

    fn from_parts(ring: &Ring, coeffs: Vec<Polynomial>) -> Result<Self, FieldError> {
        if coeffs.len() != ring.n_vars() {
            return Err(AlgebraError::ArityMismatch {
                expected: ring.n_vars(),
                found: coeffs.len(),
            }
            .into());
        }
        let coeffs = coeffs
            .into_iter()
            .map(|c| {
                if same_ring(c.ring(), ring) {
                    Ok(c)
                } else if c.ring().variables() == ring.variables() {
                    c.to_ring(ring)
                } else {
                    Err(AlgebraError::RingMismatch {
                        left: ring.name().to_string(),
                        right: c.ring().name().to_string(),
                    })
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            ring: ring.clone(),
            coeffs,
        })
    }

    /// Coefficients given as text, e.g. `["2*z", "0", "y"]`.
    pub fn from_strs(ring: &Ring, coeffs: &[&str]) -> Result<Self, FieldError> {
        let polys = coeffs
            .iter()
            .map(|s| crate::algebra::parse_polynomial(ring, s))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(ring, polys)
    }

    pub fn zero(ring: &Ring) -> Self {
        Self {
            ring: ring.clone(),
            coeffs: vec![Polynomial::zero(ring); ring.n_vars()],
        }
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn coeffs(&self) -> &[Polynomial] {
        &self.coeffs
    }

    pub fn coeff(&self, index: usize) -> &Polynomial {
        &self.coeffs[index]
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Polynomial::is_zero)
    }

    /// Largest coefficient degree.
    pub fn degree(&self) -> u32 {
        self.coeffs
            .iter()
            .map(Polynomial::degree)
            .max()
            .unwrap_or(0)
    }

    /// The field applied to the defining relation, as a normal form; zero
    /// exactly when the field is tangent.
    pub fn tangency_defect(&self) -> Polynomial {
        let rel = self.ring.relation_terms();
        let mut out = Polynomial::zero(&self.ring);
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let partial = Polynomial::from_terms(
                &self.ring,
                rel.iter().filter_map(|(m, k)| {
                    m.derivative(i)
                        .map(|(e, dm)| (dm, k * Rational::from_integer(e.into())))
                }),
            );
            out = &out + &(c * &partial);
        }
        out
    }

    pub fn is_tangent(&self) -> bool {
        self.tangency_defect().is_zero()
    }

    /// `A(p) = sum_i A_i * dp/dv_i`, reduced.
    pub fn apply(&self, p: &Polynomial) -> Result<Polynomial, FieldError> {
        self.check_ring(p.ring())?;
        let mut out = Polynomial::zero(&self.ring);
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let d = p.derivative(i);
            if !d.is_zero() {
                out = &out + &(c * &d);
            }
        }
        Ok(out)
    }

    fn check_ring(&self, other: &Ring) -> Result<(), FieldError> {
        if same_ring(&self.ring, other) {
            Ok(())
        } else {
            Err(AlgebraError::RingMismatch {
                left: self.ring.name().to_string(),
                right: other.name().to_string(),
            }
            .into())
        }
    }

    pub fn scale(&self, c: &Rational) -> Self {
        Self {
            ring: self.ring.clone(),
            coeffs: self.coeffs.iter().map(|p| p.scale(c)).collect(),
        }
    }

    /// `p * self`; tangency is preserved.
    pub fn mul_poly(&self, p: &Polynomial) -> Result<Self, FieldError> {
        self.check_ring(p.ring())?;
        Ok(Self {
            ring: self.ring.clone(),
            coeffs: self.coeffs.iter().map(|c| p * c).collect(),
        })
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self, FieldError> {
        self.check_ring(&other.ring)?;
        Ok(Self {
            ring: self.ring.clone(),
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self, FieldError> {
        self.check_ring(&other.ring)?;
        Ok(Self {
            ring: self.ring.clone(),
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    /// Reinterprets the coefficients in a ring on the same variables and
    /// reduces there; used to move ambient computations onto a variety.
    pub fn to_ring(&self, ring: &Ring) -> Result<Self, FieldError> {
        Self::new(
            ring,
            self.coeffs
                .iter()
                .map(|c| c.to_ring(ring))
                .collect::<Result<Vec<_>, _>>()?,
        )
    }

    /// Human-readable form `2*z d/dx + y d/dz`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (c, v) in self.coeffs.iter().zip(self.ring.variables()) {
            if c.is_zero() {
                continue;
            }
            let text = c.to_text();
            let (negative, body) = if c.n_terms() == 1 {
                match text.strip_prefix('-') {
                    Some(rest) => (true, rest.to_string()),
                    None => (false, text),
                }
            } else {
                (false, format!("({text})"))
            };
            let body = if body == "1" {
                String::new()
            } else {
                format!("{body} ")
            };
            if out.is_empty() {
                if negative {
                    out.push('-');
                }
            } else {
                out.push_str(if negative { " - " } else { " + " });
            }
            out.push_str(&format!("{body}d/d{v}"));
        }
        if out.is_empty() {
            "0".to_string()
        } else {
            out
        }
    }

    /// Parses the output of [`Self::to_text`] (any coefficient expression
    /// is accepted before each `d/dv`).
    pub fn parse(ring: &Ring, text: &str) -> Result<Self, FieldError> {
        let mut p = Parser::new(ring, text)?;
        let mut coeffs = vec![Polynomial::zero(ring); ring.n_vars()];
        let mut first = true;
        while !p.at_end() {
            let mut sign = Rational::from_integer(1.into());
            if !first {
                match p.next() {
                    Some(Token::Plus) => {}
                    Some(Token::Minus) => sign = -sign,
                    _ => return Err(p.error("expected '+' or '-'").into()),
                }
            }
            first = false;
            let coeff = if matches!(p.peek(), Some(Token::Deriv(_))) {
                Polynomial::one(ring)
            } else if matches!(p.peek(), Some(Token::Minus))
                && matches!(p.tokens_ahead(1), Some(Token::Deriv(_)))
            {
                p.next();
                Polynomial::integer(ring, -1)
            } else {
                p.parse_term()?
            };
            match p.next() {
                Some(Token::Deriv(v)) => {
                    let i = ring
                        .variable_index(&v)
                        .ok_or_else(|| AlgebraError::UnknownVariable(v.clone()))?;
                    coeffs[i] = &coeffs[i] + &coeff.scale(&sign);
                }
                None if coeff.is_zero() && p.at_end() => {}
                _ => return Err(p.error("expected d/d<variable>").into()),
            }
        }
        if first {
            return Err(p.error("empty field").into());
        }
        Self::new(ring, coeffs)
    }

    pub fn to_json(&self) -> FieldJson {
        FieldJson {
            ring: self.ring.name().to_string(),
            coeffs: self.coeffs.iter().map(Polynomial::to_text).collect(),
        }
    }

    pub fn from_json(json: &FieldJson) -> Result<Self, FieldError> {
        let variety: Variety = json.ring.parse()?;
        let ring = variety.ring();
        let strs: Vec<&str> = json.coeffs.iter().map(String::as_str).collect();
        Self::from_strs(&ring, &strs)
    }
}

/// Serialized field: ring name plus one polynomial string per variable.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldJson {
    pub ring: String,
    pub coeffs: Vec<String>,
}

/// Lie bracket `[A, B]_i = A(B_i) - B(A_i)`.
pub fn bracket(a: &VectorField, b: &VectorField) -> Result<VectorField, FieldError> {
    a.check_ring(&b.ring)?;
    let coeffs = (0..a.ring.n_vars())
        .map(|i| Ok(&a.apply(&b.coeffs[i])? - &b.apply(&a.coeffs[i])?))
        .collect::<Result<Vec<_>, FieldError>>()?;
    Ok(VectorField {
        ring: a.ring.clone(),
        coeffs,
    })
}

/// `A(p)` for a field and a polynomial of the same ring.
pub fn apply_derivation(a: &VectorField, p: &Polynomial) -> Result<Polynomial, FieldError> {
    a.apply(p)
}

impl fmt::Display for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl fmt::Debug for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{}]", self.ring.name(), self.to_text())
    }
}

/// Ambient ring of a variety, for computations before reduction.
pub fn ambient_of(variety: Variety) -> Ring {
    CoordinateRing::ambient(&variety.ring())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::parse_polynomial;

    fn quadric() -> Ring {
        CoordinateRing::quadric()
    }

    #[test]
    fn theta_xi_bracket_is_h() {
        let c = catalog(Variety::Quadric);
        assert_eq!(bracket(&c["THETA"], &c["XI"]).unwrap(), c["H"]);
    }

    #[test]
    fn theta_on_x_xi() {
        let c = catalog(Variety::Quadric);
        let lhs = bracket(&c["THETA"], &c["X_XI"]).unwrap();
        let z = Polynomial::var_named(&quadric(), "z").unwrap();
        let x = Polynomial::var_named(&quadric(), "x").unwrap();
        let rhs = c["XI"]
            .mul_poly(&z.scale(&Rational::from_integer(2.into())))
            .unwrap()
            .checked_add(&c["H"].mul_poly(&x).unwrap())
            .unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn v_on_b_w() {
        let c = catalog(Variety::Sl2);
        let ring = CoordinateRing::sl2();
        let b = Polynomial::var_named(&ring, "b").unwrap();
        let d = Polynomial::var_named(&ring, "d").unwrap();
        let lhs = bracket(&c["V"], &c["W"].mul_poly(&b).unwrap()).unwrap();
        let rhs = c["W"]
            .mul_poly(&d)
            .unwrap()
            .checked_add(&c["H"].mul_poly(&b).unwrap())
            .unwrap();
        assert_eq!(lhs, rhs);
        assert!(bracket(&c["V"], &c["V"]).unwrap().is_zero());
    }

    #[test]
    fn derivation_examples() {
        let ring = quadric();
        let c = catalog(Variety::Quadric);
        let x = parse_polynomial(&ring, "x").unwrap();
        assert_eq!(c["THETA"].apply(&x).unwrap().to_text(), "2*z");
        // z^2 normalizes to xy; Xi(xy) = x * Xi(y) = 2xz
        let z2 = parse_polynomial(&ring, "z^2").unwrap();
        assert_eq!(c["XI"].apply(&z2).unwrap().to_text(), "2*x*z");
        let s = CoordinateRing::sl2();
        let ad = parse_polynomial(&s, "a*d").unwrap();
        assert!(catalog(Variety::Sl2)["H"].apply(&ad).unwrap().is_zero());
    }

    #[test]
    fn sl2_triples() {
        let two = Rational::from_integer(2.into());
        for (v, w) in [
            (Variety::Sl2, ("V", "W")),
            (Variety::Quadric, ("THETA", "XI")),
        ] {
            let c = catalog(v);
            let (a, b) = (&c[w.0], &c[w.1]);
            assert_eq!(bracket(&c["H"], a).unwrap(), a.scale(&two));
            assert_eq!(bracket(&c["H"], b).unwrap(), b.scale(&-two.clone()));
        }
    }

    #[test]
    fn non_tangent_field_rejected() {
        let err = VectorField::from_strs(&quadric(), &["1", "0", "0"]).unwrap_err();
        assert!(matches!(err, FieldError::NotTangent(_)));
        assert!(euler_field().is_tangent());
    }

    #[test]
    fn text_round_trip() {
        for v in [Variety::Quadric, Variety::Sl2] {
            for (name, f) in catalog(v) {
                let text = f.to_text();
                let back = VectorField::parse(&v.ring(), &text).unwrap();
                assert_eq!(back, f, "{name}: {text}");
            }
        }
        let theta = VectorField::parse(&quadric(), "2*z d/dx + y d/dz").unwrap();
        assert_eq!(theta, catalog(Variety::Quadric)["THETA"]);
        assert_eq!(theta.to_text(), "2*z d/dx + y d/dz");
        assert_eq!(
            catalog(Variety::Quadric)["H"].to_text(),
            "-2*x d/dx + 2*y d/dy"
        );
        let zero = VectorField::parse(&quadric(), "0").unwrap();
        assert!(zero.is_zero());
        assert_eq!(zero.to_text(), "0");
        assert!(VectorField::parse(&quadric(), "x d/dw").is_err());
        assert!(VectorField::parse(&quadric(), "x").is_err());
    }

    #[test]
    fn json_round_trip() {
        let f = catalog(Variety::Quadric)["Z_XI"].clone();
        let json = f.to_json();
        assert_eq!(json.ring, "QUADRIC");
        assert_eq!(json.coeffs, vec!["0", "2*x*y", "x*z"]);
        assert_eq!(VectorField::from_json(&json).unwrap(), f);
    }

    #[test]
    fn bracket_drops_degree_by_one() {
        let c = catalog(Variety::Quadric);
        let b = bracket(&c["Z_XI"], &c["Z_H"]).unwrap();
        assert!(b.degree() < c["Z_XI"].degree() + c["Z_H"].degree());
    }
}
