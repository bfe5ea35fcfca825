use std::fmt::Write;

use num_complex::Complex64;

use super::FlowError;
use crate::algebra::{GaussRational, Polynomial, Rational};
use crate::fields::{format_complex, parse_complex};

/// Univariate complex polynomial `scale * prod (v - root)`, kept factored so
/// that a root copied from a coordinate vanishes there exactly.
#[derive(Clone, Debug, PartialEq)]
pub struct ShearPoly {
    pub scale: Complex64,
    pub roots: Vec<Complex64>,
}

impl ShearPoly {
    pub fn new(scale: Complex64, roots: Vec<Complex64>) -> Self {
        Self { scale, roots }
    }

    pub fn constant(c: Complex64) -> Self {
        Self::new(c, Vec::new())
    }

    /// Vanishes at each of `zeros` and takes `value` at `at`.
    pub fn lagrange(zeros: &[Complex64], at: Complex64, value: Complex64) -> Self {
        let denom: Complex64 = zeros.iter().map(|r| at - r).product();
        Self::new(value / denom, zeros.to_vec())
    }

    pub fn degree(&self) -> usize {
        self.roots.len()
    }

    pub fn eval(&self, v: Complex64) -> Complex64 {
        self.roots.iter().fold(self.scale, |acc, r| acc * (v - r))
    }

    /// Exact value in Q(i) with every double read as its dyadic value.
    pub fn eval_exact(&self, v: &GaussRational) -> Option<GaussRational> {
        let mut acc = GaussRational::from_complex(self.scale)?;
        for r in &self.roots {
            acc = &acc * &(v - &GaussRational::from_complex(*r)?);
        }
        Some(acc)
    }

    /// `f(v)` for a polynomial argument, when all data are real.
    pub fn eval_polynomial(&self, v: &Polynomial) -> Option<Polynomial> {
        let ring = v.ring();
        let real = |c: Complex64| (c.im == 0.0).then(|| Rational::from_float(c.re)).flatten();
        let mut acc = Polynomial::constant(ring, real(self.scale)?);
        for r in &self.roots {
            acc = &acc * &(v - &Polynomial::constant(ring, real(*r)?));
        }
        Some(acc)
    }

    /// `(0.5+0.25i)*(x - (1+2i))*(x - 2)`; a unit scale is omitted.
    pub fn to_text(&self, var: &str) -> String {
        let mut parts = Vec::new();
        if self.scale != Complex64::new(1.0, 0.0) || self.roots.is_empty() {
            parts.push(if self.scale.im == 0.0 {
                format!("{:?}", self.scale.re)
            } else {
                format!("({})", format_complex(self.scale))
            });
        }
        for r in &self.roots {
            let mut s = String::new();
            if *r == Complex64::new(0.0, 0.0) {
                s.push_str(var);
            } else if r.im != 0.0 {
                write!(s, "({var} - ({}))", format_complex(*r)).expect("string write");
            } else if r.re < 0.0 {
                write!(s, "({var} + {:?})", -r.re).expect("string write");
            } else {
                write!(s, "({var} - {:?})", r.re).expect("string write");
            }
            parts.push(s);
        }
        parts.join("*")
    }

    /// Parses a product of complex scalars and factors `v`, `(v - c)`,
    /// `(v + c)`, each optionally raised to `^k`.
    pub fn parse(text: &str, var: &str) -> Result<Self, FlowError> {
        let bad = |m: &str| FlowError::Parse(format!("shear polynomial '{text}': {m}"));
        let mut out = Self::constant(Complex64::new(1.0, 0.0));
        for factor in split_top(text, '*') {
            let factor = factor.trim();
            let (base, power) = match rsplit_top(factor, '^') {
                Some((b, e)) => (
                    b.trim(),
                    e.trim().parse::<u32>().map_err(|_| bad("bad exponent"))?,
                ),
                None => (factor, 1),
            };
            let (scale, root) = parse_factor(base, var)
                .ok_or_else(|| bad("expected a product of linear factors"))?;
            for _ in 0..power {
                out.scale *= scale;
                out.roots.extend(root);
            }
        }
        Ok(out)
    }
}

fn strip_parens(s: &str) -> Option<&str> {
    let inner = s.strip_prefix('(')?.strip_suffix(')')?;
    // the outer pair must match each other
    let mut depth = 0i32;
    for ch in inner.chars() {
        match ch {
            '(' => depth += 1,
            ')' => {
                depth -= 1;
                if depth < 0 {
                    return None;
                }
            }
            _ => {}
        }
    }
    (depth == 0).then_some(inner)
}

fn parse_scalar(s: &str) -> Option<Complex64> {
    let s = s.trim();
    match strip_parens(s) {
        Some(inner) => parse_scalar(inner),
        None => parse_complex(s),
    }
}

/// `(scale, optional root)` of one factor.
fn parse_factor(s: &str, var: &str) -> Option<(Complex64, Option<Complex64>)> {
    let one = Complex64::new(1.0, 0.0);
    if s == var {
        return Some((one, Some(Complex64::new(0.0, 0.0))));
    }
    if let Some(inner) = strip_parens(s) {
        let inner = inner.trim();
        if let Some(rest) = inner.strip_prefix(var) {
            let rest = rest.trim_start();
            if rest.is_empty() {
                return Some((one, Some(Complex64::new(0.0, 0.0))));
            }
            let mut chars = rest.chars();
            let sign = chars.next()?;
            let c = parse_scalar(chars.as_str())?;
            return match sign {
                '-' => Some((one, Some(c))),
                '+' => Some((one, Some(-c))),
                _ => None,
            };
        }
    }
    parse_scalar(s).map(|c| (c, None))
}

fn split_top(s: &str, sep: char) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0;
    let mut start = 0;
    for (i, ch) in s.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            c if c == sep && depth == 0 => {
                out.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(&s[start..]);
    out
}

fn rsplit_top(s: &str, sep: char) -> Option<(&str, &str)> {
    let parts = split_top(s, sep);
    if parts.len() < 2 {
        return None;
    }
    let last = parts[parts.len() - 1];
    Some((&s[..s.len() - last.len() - 1], last))
}
