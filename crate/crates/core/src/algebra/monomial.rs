use std::cmp::Ordering;
use std::fmt;

/// Largest number of ambient variables any ring in this crate uses
/// (SL2 plus a time variable needs five).
pub const MAX_VARS: usize = 6;

/// A power product `v0^e0 * v1^e1 * ...`, ordered degree-lexicographically.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Monomial {
    exps: [u16; MAX_VARS],
}

impl Monomial {
    pub fn one() -> Self {
        Self::default()
    }

    pub fn var(index: usize) -> Self {
        let mut m = Self::default();
        m.exps[index] = 1;
        m
    }

    pub fn from_exponents(exps: &[u32]) -> Self {
        assert!(exps.len() <= MAX_VARS, "too many variables");
        let mut m = Self::default();
        for (slot, &e) in m.exps.iter_mut().zip(exps) {
            *slot = u16::try_from(e).expect("exponent overflow");
        }
        m
    }

    pub fn exponent(&self, index: usize) -> u32 {
        self.exps[index] as u32
    }

    pub fn exponents(&self) -> &[u16; MAX_VARS] {
        &self.exps
    }

    pub fn degree(&self) -> u32 {
        self.exps.iter().map(|&e| e as u32).sum()
    }

    pub fn is_one(&self) -> bool {
        self.exps.iter().all(|&e| e == 0)
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut m = *self;
        for (a, b) in m.exps.iter_mut().zip(other.exps.iter()) {
            *a = a.checked_add(*b).expect("exponent overflow");
        }
        m
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut m = *self;
        for e in m.exps.iter_mut() {
            *e = u16::try_from(*e as u32 * k).expect("exponent overflow");
        }
        m
    }

    pub fn divides(&self, other: &Self) -> bool {
        self.exps.iter().zip(other.exps.iter()).all(|(a, b)| a <= b)
    }

    pub fn checked_div(&self, divisor: &Self) -> Option<Self> {
        if !divisor.divides(self) {
            return None;
        }
        let mut m = *self;
        for (a, b) in m.exps.iter_mut().zip(divisor.exps.iter()) {
            *a -= *b;
        }
        Some(m)
    }

    /// Largest `k` with `divisor^k | self`. `divisor` must not be 1.
    pub fn multiplicity_of(&self, divisor: &Self) -> u32 {
        divisor
            .exps
            .iter()
            .zip(self.exps.iter())
            .filter(|(d, _)| **d > 0)
            .map(|(d, s)| (*s / *d) as u32)
            .min()
            .unwrap_or(0)
    }

    /// `d/dv_index` of the monomial as (multiplier, monomial).
    pub fn derivative(&self, index: usize) -> Option<(u32, Self)> {
        let e = self.exps[index];
        if e == 0 {
            return None;
        }
        let mut m = *self;
        m.exps[index] -= 1;
        Some((e as u32, m))
    }

    /// Number of variables with a nonzero exponent beyond `n_vars`.
    pub(crate) fn uses_only(&self, n_vars: usize) -> bool {
        self.exps[n_vars..].iter().all(|&e| e == 0)
    }

    pub fn format_with(&self, names: &[String]) -> String {
        let mut parts = Vec::new();
        for (i, &e) in self.exps.iter().enumerate() {
            match e {
                0 => {}
                1 => parts.push(names[i].clone()),
                _ => parts.push(format!("{}^{}", names[i], e)),
            }
        }
        if parts.is_empty() {
            "1".to_string()
        } else {
            parts.join("*")
        }
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.exps.cmp(&other.exps))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Monomial({:?})", self.exps)
    }
}
