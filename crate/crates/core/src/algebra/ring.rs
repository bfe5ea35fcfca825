use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Arc, OnceLock};

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::monomial::{Monomial, MAX_VARS};
use super::{AlgebraError, Rational};

/// The two varieties carrying generator catalogs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Variety {
    #[serde(rename = "SL2")]
    Sl2,
    #[serde(rename = "QUADRIC")]
    Quadric,
}

impl Variety {
    pub fn ring(self) -> Ring {
        match self {
            Variety::Sl2 => CoordinateRing::sl2(),
            Variety::Quadric => CoordinateRing::quadric(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Variety::Sl2 => "SL2",
            Variety::Quadric => "QUADRIC",
        }
    }
}

impl fmt::Display for Variety {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Variety {
    type Err = AlgebraError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "sl2" => Ok(Variety::Sl2),
            "quadric" => Ok(Variety::Quadric),
            _ => Err(AlgebraError::UnknownVariety(s.to_string())),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RingKind {
    Sl2,
    Quadric,
    Affine,
}

/// Single rewrite rule `head -> tail`; the head divides no tail monomial.
#[derive(Clone, Debug)]
pub struct Rewrite {
    pub head: Monomial,
    pub tail: Vec<(Monomial, Rational)>,
}

const CACHED_TAIL_POWERS: usize = 24;

/// Polynomial ring modulo at most one relation, with the normal form given
/// by a single rewrite rule.
pub struct CoordinateRing {
    kind: RingKind,
    name: String,
    variables: Vec<String>,
    relation: Vec<(Monomial, Rational)>,
    rewrite: Option<Rewrite>,
    tail_powers: Vec<Vec<(Monomial, Rational)>>,
}

pub type Ring = Arc<CoordinateRing>;

fn int(n: i64) -> Rational {
    Rational::from_integer(n.into())
}

fn mul_raw(p: &[(Monomial, Rational)], q: &[(Monomial, Rational)]) -> Vec<(Monomial, Rational)> {
    let mut acc: BTreeMap<Monomial, Rational> = BTreeMap::new();
    for (m1, c1) in p {
        for (m2, c2) in q {
            let entry = acc.entry(m1.mul(m2)).or_insert_with(Rational::zero);
            *entry += c1 * c2;
        }
    }
    acc.into_iter().filter(|(_, c)| !c.is_zero()).collect()
}

impl CoordinateRing {
    fn build(
        kind: RingKind,
        name: &str,
        variables: &[&str],
        relation: Vec<(Monomial, Rational)>,
        rewrite: Option<Rewrite>,
    ) -> Self {
        assert!(variables.len() <= MAX_VARS);
        let mut tail_powers = Vec::new();
        if let Some(rw) = &rewrite {
            assert!(
                rw.tail.iter().all(|(m, _)| !rw.head.divides(m)),
                "rewrite head must not divide its replacement"
            );
            let mut current = vec![(Monomial::one(), Rational::one())];
            for _ in 0..CACHED_TAIL_POWERS {
                tail_powers.push(current.clone());
                current = mul_raw(&current, &rw.tail);
            }
        }
        Self {
            kind,
            name: name.to_string(),
            variables: variables.iter().map(|s| s.to_string()).collect(),
            relation,
            rewrite,
            tail_powers,
        }
    }

    /// Coordinate ring of SL2 in (a, b, c, d): relation ad - bc - 1, rewrite ad -> bc + 1.
    pub fn sl2() -> Ring {
        static RING: OnceLock<Ring> = OnceLock::new();
        RING.get_or_init(|| {
            let ad = Monomial::from_exponents(&[1, 0, 0, 1]);
            let bc = Monomial::from_exponents(&[0, 1, 1, 0]);
            Arc::new(Self::build(
                RingKind::Sl2,
                "SL2",
                &["a", "b", "c", "d"],
                vec![(ad, int(1)), (bc, int(-1)), (Monomial::one(), int(-1))],
                Some(Rewrite {
                    head: ad,
                    tail: vec![(bc, int(1)), (Monomial::one(), int(1))],
                }),
            ))
        })
        .clone()
    }

    /// Coordinate ring of the quadric in (x, y, z): relation xy - z^2, rewrite z^2 -> xy.
    pub fn quadric() -> Ring {
        static RING: OnceLock<Ring> = OnceLock::new();
        RING.get_or_init(|| {
            let xy = Monomial::from_exponents(&[1, 1, 0]);
            let z2 = Monomial::from_exponents(&[0, 0, 2]);
            Arc::new(Self::build(
                RingKind::Quadric,
                "QUADRIC",
                &["x", "y", "z"],
                vec![(xy, int(1)), (z2, int(-1))],
                Some(Rewrite {
                    head: z2,
                    tail: vec![(xy, int(1))],
                }),
            ))
        })
        .clone()
    }

    /// Polynomial ring without relation; named `AFFINE<n>`.
    pub fn affine(variables: &[&str]) -> Ring {
        let name = format!("AFFINE{}", variables.len());
        Arc::new(Self::build(
            RingKind::Affine,
            &name,
            variables,
            Vec::new(),
            None,
        ))
    }

    /// The ambient polynomial ring on the same variables.
    pub fn ambient(&self) -> Ring {
        let vars: Vec<&str> = self.variables.iter().map(String::as_str).collect();
        Self::affine(&vars)
    }

    pub fn kind(&self) -> RingKind {
        self.kind
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn n_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn variable_index(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v == name)
    }

    pub fn variety(&self) -> Option<Variety> {
        match self.kind {
            RingKind::Sl2 => Some(Variety::Sl2),
            RingKind::Quadric => Some(Variety::Quadric),
            RingKind::Affine => None,
        }
    }

    /// Defining relation as ambient terms; empty for affine rings.
    pub fn relation_terms(&self) -> &[(Monomial, Rational)] {
        &self.relation
    }

    pub fn rewrite(&self) -> Option<&Rewrite> {
        self.rewrite.as_ref()
    }

    pub fn is_normal(&self, m: &Monomial) -> bool {
        match &self.rewrite {
            Some(rw) => !rw.head.divides(m),
            None => true,
        }
    }

    /// Accumulates the normal form of `c * m` into `acc`.
    pub fn reduce_term_into(
        &self,
        m: Monomial,
        c: Rational,
        acc: &mut BTreeMap<Monomial, Rational>,
    ) {
        let Some(rw) = &self.rewrite else {
            add_term(acc, m, c);
            return;
        };
        let mut work = vec![(m, c)];
        while let Some((m, c)) = work.pop() {
            if !rw.head.divides(&m) {
                add_term(acc, m, c);
                continue;
            }
            let k = m.multiplicity_of(&rw.head);
            let rest = m.checked_div(&rw.head.pow(k)).expect("head power divides");
            let owned;
            let power: &[(Monomial, Rational)] = if (k as usize) < self.tail_powers.len() {
                &self.tail_powers[k as usize]
            } else {
                let mut p = self.tail_powers[CACHED_TAIL_POWERS - 1].clone();
                for _ in (CACHED_TAIL_POWERS - 1)..(k as usize) {
                    p = mul_raw(&p, &rw.tail);
                }
                owned = p;
                &owned
            };
            for (tm, tc) in power {
                let nm = rest.mul(tm);
                let nc = &c * tc;
                if rw.head.divides(&nm) {
                    work.push((nm, nc));
                } else {
                    add_term(acc, nm, nc);
                }
            }
        }
    }

    /// Normal-form monomials of total degree at most `max_degree`, in
    /// ascending degree-lexicographic order.
    pub fn normal_monomials(&self, max_degree: u32) -> Vec<Monomial> {
        let mut out = Vec::new();
        let mut exps = vec![0u32; self.n_vars()];
        fn rec(
            ring: &CoordinateRing,
            idx: usize,
            remaining: u32,
            exps: &mut Vec<u32>,
            out: &mut Vec<Monomial>,
        ) {
            if idx == exps.len() {
                let m = Monomial::from_exponents(exps);
                if ring.is_normal(&m) {
                    out.push(m);
                }
                return;
            }
            for e in 0..=remaining {
                exps[idx] = e;
                rec(ring, idx + 1, remaining - e, exps, out);
            }
            exps[idx] = 0;
        }
        rec(self, 0, max_degree, &mut exps, &mut out);
        out.sort();
        out
    }
}

pub(crate) fn add_term(acc: &mut BTreeMap<Monomial, Rational>, m: Monomial, c: Rational) {
    if c.is_zero() {
        return;
    }
    match acc.entry(m) {
        std::collections::btree_map::Entry::Vacant(v) => {
            v.insert(c);
        }
        std::collections::btree_map::Entry::Occupied(mut o) => {
            *o.get_mut() += c;
            if o.get().is_zero() {
                o.remove();
            }
        }
    }
}

impl PartialEq for CoordinateRing {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind && self.name == other.name && self.variables == other.variables
    }
}

impl Eq for CoordinateRing {}

impl fmt::Debug for CoordinateRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.name, self.variables.join(","))
    }
}

pub fn same_ring(a: &Ring, b: &Ring) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}
