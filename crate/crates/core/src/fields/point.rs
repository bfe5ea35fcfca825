use num_complex::Complex64;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::{FieldError, VectorField};
use crate::algebra::{same_ring, Ring};

const RELATION_TOLERANCE: f64 = 1e-9;

/// A complex point of a variety, one coordinate per ring variable.
#[derive(Clone, Debug, PartialEq)]
pub struct Point {
    ring: Ring,
    coords: Vec<Complex64>,
}

impl Point {
    /// Checks `|relation| <= 1e-9 * max(1, |p|^2)`.
    pub fn new(ring: &Ring, coords: Vec<Complex64>) -> Result<Self, FieldError> {
        let p = Self::unchecked(ring, coords);
        let defect = p.relation_defect();
        if defect > RELATION_TOLERANCE * p.norm().powi(2).max(1.0) || !defect.is_finite() {
            return Err(FieldError::OffVariety(defect));
        }
        Ok(p)
    }

    pub fn real(ring: &Ring, coords: &[f64]) -> Result<Self, FieldError> {
        Self::new(
            ring,
            coords.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        )
    }

    /// No relation check; for intermediate numeric images.
    pub fn unchecked(ring: &Ring, coords: Vec<Complex64>) -> Self {
        assert_eq!(coords.len(), ring.n_vars(), "point arity");
        Self {
            ring: ring.clone(),
            coords,
        }
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn coords(&self) -> &[Complex64] {
        &self.coords
    }

    pub fn norm(&self) -> f64 {
        self.coords.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn distance(&self, other: &Point) -> f64 {
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// `|relation(p)|`, zero for affine rings.
    pub fn relation_defect(&self) -> f64 {
        let mut sum = Complex64::zero();
        for (m, c) in self.ring.relation_terms() {
            let mut v = Complex64::new(c.to_f64().unwrap_or(f64::NAN), 0.0);
            for (i, &x) in self.coords.iter().enumerate() {
                let e = m.exponent(i);
                if e > 0 {
                    v *= x.powu(e);
                }
            }
            sum += v;
        }
        sum.norm()
    }

    pub fn to_json(&self) -> Vec<String> {
        self.coords.iter().map(|&c| format_complex(c)).collect()
    }
}

/// `a+bi` with shortest round-trip decimals; purely real values print as `a`.
pub fn format_complex(c: Complex64) -> String {
    if c.im == 0.0 {
        format!("{:?}", c.re)
    } else if c.im < 0.0 {
        format!("{:?}-{:?}i", c.re, -c.im)
    } else {
        format!("{:?}+{:?}i", c.re, c.im)
    }
}

/// Parses `a`, `bi`, `a+bi`, `a-bi` (also `i`, `-i`, exponents like `1e-3`).
pub fn parse_complex(text: &str) -> Option<Complex64> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return None;
    }
    let Some(body) = s.strip_suffix('i') else {
        return s.parse::<f64>().ok().map(|re| Complex64::new(re, 0.0));
    };
    // split at the last sign that is not the leading one and not part of an exponent
    let bytes = body.as_bytes();
    let mut split = None;
    for k in (1..bytes.len()).rev() {
        if (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E') {
            split = Some(k);
            break;
        }
    }
    let imag = |t: &str| -> Option<f64> {
        match t {
            "" | "+" => Some(1.0),
            "-" => Some(-1.0),
            _ => t.parse().ok(),
        }
    };
    match split {
        Some(k) => Some(Complex64::new(body[..k].parse().ok()?, imag(&body[k..])?)),
        None => Some(Complex64::new(0.0, imag(body)?)),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointJson(pub Vec<String>);

/// The ambient tangent vector of `a` at `p`.
pub fn evaluate(a: &VectorField, p: &Point) -> Result<Vec<Complex64>, FieldError> {
    if !same_ring(a.ring(), p.ring()) {
        return Err(crate::algebra::AlgebraError::RingMismatch {
            left: a.ring().name().to_string(),
            right: p.ring().name().to_string(),
        }
        .into());
    }
    Ok(a.coeffs()
        .iter()
        .map(|c| c.eval_complex(p.coords()))
        .collect())
}

/// Rank by Gaussian elimination with full pivoting; entries below `tol`
/// (absolute) count as zero.
pub fn numeric_rank(rows: &[Vec<Complex64>], tol: f64) -> usize {
    let mut m: Vec<Vec<Complex64>> = rows.to_vec();
    let n_rows = m.len();
    let n_cols = m.first().map_or(0, Vec::len);
    let mut rank = 0;
    while rank < n_rows.min(n_cols) {
        let mut best = (0.0, rank, rank);
        for (i, row) in m.iter().enumerate().skip(rank) {
            for (j, v) in row.iter().enumerate().skip(rank) {
                if v.norm() > best.0 {
                    best = (v.norm(), i, j);
                }
            }
        }
        if best.0 <= tol {
            break;
        }
        let (_, pi, pj) = best;
        m.swap(rank, pi);
        for row in m.iter_mut() {
            row.swap(rank, pj);
        }
        let pivot = m[rank][rank];
        let pivot_row = m[rank].clone();
        for row in m.iter_mut().skip(rank + 1) {
            let f = row[rank] / pivot;
            for (v, pv) in row.iter_mut().zip(&pivot_row).skip(rank) {
                *v -= f * pv;
            }
        }
        rank += 1;
    }
    rank
}

/// Dimension of the span of the fields' values at `p` (tolerance 1e-8).
pub fn span_rank_at(fields: &[VectorField], p: &Point) -> Result<usize, FieldError> {
    let rows = fields
        .iter()
        .map(|f| evaluate(f, p))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(numeric_rank(&rows, 1e-8))
}
