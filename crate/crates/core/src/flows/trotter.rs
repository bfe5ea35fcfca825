use num_complex::Complex64;

use super::{flow, FlowError, FlowKind};
use crate::fields::{bracket, generator, FieldError, Point, VectorField};

#[derive(Clone, Debug, PartialEq)]
pub struct TrotterResult {
    pub point: Point,
    pub reference: Point,
    pub error: f64,
}

fn field_of(kind: &FlowKind) -> Result<VectorField, FlowError> {
    let name = kind
        .field_name()
        .ok_or_else(|| FieldError::Unsupported(format!("{kind} has no catalog field")))?;
    Ok(generator(kind.variety(), name)?)
}

/// The catalog flow generated by `[a, b]`, or `None` when the bracket vanishes.
pub fn bracket_flow_kind(a: &FlowKind, b: &FlowKind) -> Result<Option<FlowKind>, FlowError> {
    let h = bracket(&field_of(a)?, &field_of(b)?)?;
    if h.is_zero() {
        return Ok(None);
    }
    for name in FlowKind::SIMPLE_NAMES {
        let k = FlowKind::simple(name)?;
        if k.variety() == a.variety() && field_of(&k)? == h {
            return Ok(Some(k));
        }
    }
    Err(FieldError::Unsupported(format!("[{a}, {b}] = {} has no catalog flow", h.to_text())).into())
}

/// `n` rounds of `phi^B_{-s} o phi^A_{-s} o phi^B_s o phi^A_s` with
/// `s = sqrt(T/n)`, compared with the time-`T` flow of `[A, B]`.
pub fn trotter_bracket_flow(
    a: &FlowKind,
    b: &FlowKind,
    total: f64,
    n: usize,
    p: &Point,
) -> Result<TrotterResult, FlowError> {
    let reference = match bracket_flow_kind(a, b)? {
        Some(k) => flow(&k, Complex64::new(total, 0.0), p)?,
        None => p.clone(),
    };
    let mut q = p.clone();
    if n > 0 {
        let s = Complex64::new(total / n as f64, 0.0).sqrt();
        for _ in 0..n {
            q = flow(a, s, &q)?;
            q = flow(b, s, &q)?;
            q = flow(a, -s, &q)?;
            q = flow(b, -s, &q)?;
        }
    }
    let error = q.distance(&reference);
    Ok(TrotterResult {
        point: q,
        reference,
        error,
    })
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let cov: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    cov / var
}
