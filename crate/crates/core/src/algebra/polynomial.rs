use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::monomial::Monomial;
use super::ring::{add_term, same_ring, Ring};
use super::{AlgebraError, Rational};

/// Exact multivariate polynomial over Q, always kept in the normal form of
/// its coordinate ring.
#[derive(Clone)]
pub struct Polynomial {
    ring: Ring,
    terms: BTreeMap<Monomial, Rational>,
}

impl Polynomial {
    pub fn zero(ring: &Ring) -> Self {
        Self {
            ring: ring.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn one(ring: &Ring) -> Self {
        Self::constant(ring, Rational::one())
    }

    pub fn constant(ring: &Ring, c: Rational) -> Self {
        let mut p = Self::zero(ring);
        add_term(&mut p.terms, Monomial::one(), c);
        p
    }

    pub fn integer(ring: &Ring, n: i64) -> Self {
        Self::constant(ring, Rational::from_integer(n.into()))
    }

    pub fn var(ring: &Ring, index: usize) -> Self {
        assert!(index < ring.n_vars(), "variable index out of range");
        Self::monomial(ring, Monomial::var(index), Rational::one())
    }

    pub fn var_named(ring: &Ring, name: &str) -> Result<Self, AlgebraError> {
        ring.variable_index(name)
            .map(|i| Self::var(ring, i))
            .ok_or_else(|| AlgebraError::UnknownVariable(name.to_string()))
    }

    /// `c * m` reduced to normal form.
    pub fn monomial(ring: &Ring, m: Monomial, c: Rational) -> Self {
        Self::from_terms(ring, std::iter::once((m, c)))
    }

    /// Normal form of an arbitrary ambient term list.
    pub fn from_terms(ring: &Ring, terms: impl IntoIterator<Item = (Monomial, Rational)>) -> Self {
        let mut acc = BTreeMap::new();
        for (m, c) in terms {
            debug_assert!(m.uses_only(ring.n_vars()));
            ring.reduce_term_into(m, c, &mut acc);
        }
        Self {
            ring: ring.clone(),
            terms: acc,
        }
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Rational)> + '_ {
        self.terms.iter()
    }

    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms.get(&Monomial::one()).is_some_and(|c| c.is_one())
    }

    pub fn as_constant(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => self.terms.get(&Monomial::one()).cloned(),
            _ => None,
        }
    }

    /// Total degree of the normal form; zero for the zero polynomial.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn coefficient(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn leading_term(&self) -> Option<(&Monomial, &Rational)> {
        self.terms.iter().next_back()
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero(&self.ring);
        }
        Self {
            ring: self.ring.clone(),
            terms: self.terms.iter().map(|(m, v)| (*m, v * c)).collect(),
        }
    }

    fn check_ring(&self, other: &Self) -> Result<(), AlgebraError> {
        if same_ring(&self.ring, &other.ring) {
            Ok(())
        } else {
            Err(AlgebraError::RingMismatch {
                left: self.ring.name().to_string(),
                right: other.ring.name().to_string(),
            })
        }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.check_ring(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            add_term(&mut out.terms, *m, c.clone());
        }
        Ok(out)
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.check_ring(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            add_term(&mut out.terms, *m, -c);
        }
        Ok(out)
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.check_ring(other)?;
        let mut acc = BTreeMap::new();
        let rewrite_head = self.ring.rewrite().map(|rw| rw.head);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                let m = m1.mul(m2);
                let c = c1 * c2;
                match rewrite_head {
                    Some(h) if h.divides(&m) => self.ring.reduce_term_into(m, c, &mut acc),
                    _ => add_term(&mut acc, m, c),
                }
            }
        }
        Ok(Self {
            ring: self.ring.clone(),
            terms: acc,
        })
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut result = Self::one(&self.ring);
        for _ in 0..k {
            result = &result * self;
        }
        result
    }

    /// Partial derivative of the normal-form representative, reduced again.
    pub fn derivative(&self, index: usize) -> Self {
        let terms = self.terms.iter().filter_map(|(m, c)| {
            m.derivative(index)
                .map(|(e, dm)| (dm, c * Rational::from_integer(e.into())))
        });
        Self::from_terms(&self.ring, terms)
    }

    /// Reinterprets the terms in `ring` (which must have at least as many
    /// variables) and reduces there.
    pub fn to_ring(&self, ring: &Ring) -> Result<Self, AlgebraError> {
        if ring.n_vars() < self.ring.n_vars()
            && self.terms.keys().any(|m| !m.uses_only(ring.n_vars()))
        {
            return Err(AlgebraError::RingMismatch {
                left: self.ring.name().to_string(),
                right: ring.name().to_string(),
            });
        }
        Ok(Self::from_terms(
            ring,
            self.terms.iter().map(|(m, c)| (*m, c.clone())),
        ))
    }

    /// Substitutes `images[i]` for variable `i`; the result lives in the
    /// images' ring.
    pub fn substitute(&self, images: &[Polynomial]) -> Result<Self, AlgebraError> {
        if images.len() != self.ring.n_vars() {
            return Err(AlgebraError::ArityMismatch {
                expected: self.ring.n_vars(),
                found: images.len(),
            });
        }
        let target = images
            .first()
            .map(|p| p.ring.clone())
            .unwrap_or_else(|| self.ring.clone());
        for p in images {
            if !same_ring(&p.ring, &target) {
                return Err(AlgebraError::RingMismatch {
                    left: target.name().to_string(),
                    right: p.ring.name().to_string(),
                });
            }
        }
        let mut power_cache: Vec<Vec<Polynomial>> = images
            .iter()
            .map(|p| vec![Polynomial::one(&target), p.clone()])
            .collect();
        let mut out = Polynomial::zero(&target);
        for (m, c) in &self.terms {
            let mut term = Polynomial::constant(&target, c.clone());
            for (i, cache) in power_cache.iter_mut().enumerate() {
                let e = m.exponent(i) as usize;
                if e == 0 {
                    continue;
                }
                while cache.len() <= e {
                    let next = &cache[cache.len() - 1] * &images[i];
                    cache.push(next);
                }
                term = &term * &cache[e];
            }
            out = &out + &term;
        }
        Ok(out)
    }

    pub fn eval_complex(&self, point: &[Complex64]) -> Complex64 {
        assert_eq!(point.len(), self.ring.n_vars(), "point arity");
        let mut sum = Complex64::zero();
        for (m, c) in &self.terms {
            let mut v = Complex64::new(c.to_f64().unwrap_or(f64::NAN), 0.0);
            for (i, &x) in point.iter().enumerate() {
                let e = m.exponent(i);
                if e > 0 {
                    v *= x.powu(e);
                }
            }
            sum += v;
        }
        sum
    }

    pub fn eval_rational(&self, point: &[Rational]) -> Rational {
        assert_eq!(point.len(), self.ring.n_vars(), "point arity");
        let mut sum = Rational::zero();
        for (m, c) in &self.terms {
            let mut v = c.clone();
            for (i, x) in point.iter().enumerate() {
                let e = m.exponent(i);
                if e > 0 {
                    v *= num_traits::pow(x.clone(), e as usize);
                }
            }
            sum += v;
        }
        sum
    }

    /// Canonical text form: terms in descending degree-lexicographic order,
    /// `coef*var^e*...` joined by ` + ` / ` - `.
    pub fn to_text(&self) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let names = self.ring.variables();
        let mut out = String::new();
        for (idx, (m, c)) in self.terms.iter().rev().enumerate() {
            let negative = c.is_negative();
            if idx == 0 {
                if negative {
                    out.push('-');
                }
            } else {
                out.push_str(if negative { " - " } else { " + " });
            }
            let mag = c.abs();
            if m.is_one() {
                out.push_str(&mag.to_string());
            } else if mag.is_one() {
                out.push_str(&m.format_with(names));
            } else {
                out.push_str(&mag.to_string());
                out.push('*');
                out.push_str(&m.format_with(names));
            }
        }
        out
    }
}

/// Normal form of an ambient polynomial in `ring` (the ambient ring must use
/// the same variable list).
pub fn reduce(p: &Polynomial, ring: &Ring) -> Result<Polynomial, AlgebraError> {
    if p.ring.variables() != ring.variables() {
        return Err(AlgebraError::RingMismatch {
            left: p.ring.name().to_string(),
            right: ring.name().to_string(),
        });
    }
    p.to_ring(ring)
}

pub fn poly_mul(p: &Polynomial, q: &Polynomial) -> Result<Polynomial, AlgebraError> {
    p.checked_mul(q)
}

impl PartialEq for Polynomial {
    fn eq(&self, other: &Self) -> bool {
        same_ring(&self.ring, &other.ring) && self.terms == other.terms
    }
}

impl Eq for Polynomial {}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{}]", self.ring.name(), self.to_text())
    }
}

// Operator forms panic on ring mismatch; use the `checked_*` methods where
// the rings are not known to agree.
impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        self.checked_add(rhs).expect("ring mismatch in +")
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        self.checked_sub(rhs).expect("ring mismatch in -")
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        self.checked_mul(rhs).expect("ring mismatch in *")
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.scale(&-Rational::one())
    }
}

impl Add for Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: Polynomial) -> Polynomial {
        &self + &rhs
    }
}

impl Sub for Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: Polynomial) -> Polynomial {
        &self - &rhs
    }
}

impl Mul for Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: Polynomial) -> Polynomial {
        &self * &rhs
    }
}

impl Neg for Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        -&self
    }
}
