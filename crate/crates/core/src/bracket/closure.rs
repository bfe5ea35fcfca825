use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{BracketError, BracketExpr, Evaluator};
use crate::algebra::{same_ring, Monomial, Rational, Ring, SparseEchelon};
use crate::fields::{bracket, FieldJson, VectorField};

/// Coordinates of a field: `(monomial, variable index) -> coefficient`.
/// The key order sorts by monomial degree first, so the largest key of a
/// field sits in its top degree.
pub type FieldKey = (Monomial, usize);

pub fn vectorize(f: &VectorField) -> BTreeMap<FieldKey, Rational> {
    let mut out = BTreeMap::new();
    for (i, c) in f.coeffs().iter().enumerate() {
        for (m, v) in c.terms() {
            out.insert((*m, i), v.clone());
        }
    }
    out
}

#[derive(Clone, Debug)]
pub struct BasisElement {
    pub field: VectorField,
    pub certificate: BracketExpr,
}

/// A linearly independent family spanning the part of the generated Lie
/// algebra reachable through brackets of degree at most `D + slack`.
#[derive(Clone, Debug)]
pub struct ClosureBasis {
    ring: Ring,
    generators: BTreeMap<String, VectorField>,
    generator_order: Vec<String>,
    degree_cap: u32,
    slack: u32,
    basis: Vec<BasisElement>,
    echelon: SparseEchelon<FieldKey>,
    pairs_bracketed: usize,
}

fn bracket_bound(d1: u32, d2: u32) -> u32 {
    (d1 + d2).max(1) - 1
}

impl ClosureBasis {
    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn generators(&self) -> &BTreeMap<String, VectorField> {
        &self.generators
    }

    /// Generator names in the order they were given.
    pub fn generator_names(&self) -> &[String] {
        &self.generator_order
    }

    pub fn degree_cap(&self) -> u32 {
        self.degree_cap
    }

    pub fn slack(&self) -> u32 {
        self.slack
    }

    pub fn basis(&self) -> &[BasisElement] {
        &self.basis
    }

    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn pairs_bracketed(&self) -> usize {
        self.pairs_bracketed
    }

    /// Number of basis directions whose leading term has each degree; the
    /// partial sums are the dimensions of the span intersected with
    /// `{fields of degree <= d}`.
    pub fn dimension_by_degree(&self) -> BTreeMap<u32, usize> {
        let mut out = BTreeMap::new();
        for (m, _) in self.echelon.pivots() {
            *out.entry(m.degree()).or_insert(0) += 1;
        }
        out
    }

    /// Dimension of the span intersected with fields of degree `<= d`.
    pub fn dimension_up_to(&self, d: u32) -> usize {
        self.echelon
            .pivots()
            .filter(|(m, _)| m.degree() <= d)
            .count()
    }

    fn try_push(&mut self, field: VectorField, certificate: BracketExpr) -> bool {
        if field.is_zero() {
            return false;
        }
        if self.echelon.insert(&vectorize(&field)).is_some() {
            self.basis.push(BasisElement { field, certificate });
            true
        } else {
            false
        }
    }

    pub fn contains(&self, target: &VectorField) -> bool {
        self.echelon.contains(&vectorize(target))
    }

    /// Certificate for `target` as a rational combination of basis words,
    /// or `None` if it is not in the span. Targets above `D + slack` are
    /// rejected.
    pub fn member(&self, target: &VectorField) -> Result<Option<BracketExpr>, BracketError> {
        if !same_ring(target.ring(), &self.ring) {
            return Err(BracketError::Field(crate::fields::FieldError::Algebra(
                crate::algebra::AlgebraError::RingMismatch {
                    left: self.ring.name().to_string(),
                    right: target.ring().name().to_string(),
                },
            )));
        }
        let limit = self.degree_cap + self.slack;
        if target.degree() > limit {
            return Err(BracketError::DegreeOverflow {
                degree: target.degree(),
                limit,
            });
        }
        Ok(self.echelon.express(&vectorize(target)).map(|combo| {
            BracketExpr::combination(
                combo
                    .into_iter()
                    .map(|(i, c)| (c, self.basis[i].certificate.clone())),
            )
        }))
    }

    /// Re-evaluates every basis certificate and compares with the stored field.
    pub fn verify_certificates(&self) -> Result<usize, BracketError> {
        let mut ev = Evaluator::new(&self.generators);
        for (i, el) in self.basis.iter().enumerate() {
            let v = ev.eval(&el.certificate)?;
            if v != el.field {
                return Err(BracketError::CertificateMismatch(i));
            }
        }
        Ok(self.basis.len())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NamedField {
    pub name: String,
    pub field: FieldJson,
}

/// A closure stored as its generators and one certificate per basis element.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClosureJson {
    pub generators: Vec<NamedField>,
    pub degree_cap: u32,
    pub slack: u32,
    pub pairs_bracketed: usize,
    pub basis: Vec<String>,
}

impl ClosureBasis {
    pub fn to_json(&self) -> ClosureJson {
        ClosureJson {
            generators: self
                .generator_order
                .iter()
                .map(|n| NamedField {
                    name: n.clone(),
                    field: self.generators[n].to_json(),
                })
                .collect(),
            degree_cap: self.degree_cap,
            slack: self.slack,
            pairs_bracketed: self.pairs_bracketed,
            basis: self
                .basis
                .iter()
                .map(|b| b.certificate.to_sexpr())
                .collect(),
        }
    }

    /// Rebuilds a closure by evaluating every stored certificate; a
    /// certificate that adds nothing to the earlier ones is rejected.
    pub fn from_json(json: &ClosureJson) -> Result<Self, BracketError> {
        let generators = json
            .generators
            .iter()
            .map(|g| Ok((g.name.clone(), VectorField::from_json(&g.field)?)))
            .collect::<Result<Vec<_>, BracketError>>()?;
        let ring = generators
            .first()
            .map(|(_, f)| f.ring().clone())
            .ok_or(BracketError::NoGenerators)?;
        let mut cb = ClosureBasis {
            ring,
            generators: generators.iter().cloned().collect(),
            generator_order: generators.iter().map(|(n, _)| n.clone()).collect(),
            degree_cap: json.degree_cap,
            slack: json.slack,
            basis: Vec::new(),
            echelon: SparseEchelon::new(),
            pairs_bracketed: json.pairs_bracketed,
        };
        let certificates = json
            .basis
            .iter()
            .map(|text| BracketExpr::parse(text, &cb.ring))
            .collect::<Result<Vec<_>, _>>()?;
        let mut ev = Evaluator::new(&cb.generators);
        let fields = certificates
            .iter()
            .map(|c| ev.eval(c))
            .collect::<Result<Vec<_>, _>>()?;
        for (i, (field, certificate)) in fields.into_iter().zip(certificates).enumerate() {
            if !cb.try_push(field, certificate) {
                return Err(BracketError::DependentCertificate(i));
            }
        }
        Ok(cb)
    }
}

/// Semi-naive closure: every new basis element is bracketed with all
/// earlier ones (when the degree bound allows) and independent results are
/// appended. Brackets for one element are computed in parallel and
/// committed in index order, so the result does not depend on scheduling.
pub fn closure(
    generators: &[(String, VectorField)],
    degree_cap: u32,
    slack: u32,
) -> Result<ClosureBasis, BracketError> {
    let ring = generators
        .first()
        .map(|(_, f)| f.ring().clone())
        .ok_or(BracketError::NoGenerators)?;
    let limit = degree_cap + slack;
    for (name, f) in generators {
        if !same_ring(f.ring(), &ring) {
            return Err(BracketError::Field(crate::fields::FieldError::Algebra(
                crate::algebra::AlgebraError::RingMismatch {
                    left: ring.name().to_string(),
                    right: f.ring().name().to_string(),
                },
            )));
        }
        if !f.is_tangent() {
            return Err(BracketError::Field(crate::fields::FieldError::NotTangent(
                name.clone(),
            )));
        }
        if f.degree() > degree_cap {
            return Err(BracketError::CapTooSmall {
                name: name.clone(),
                degree: f.degree(),
                cap: degree_cap,
            });
        }
    }
    let mut cb = ClosureBasis {
        ring,
        generators: generators.iter().cloned().collect(),
        generator_order: generators.iter().map(|(n, _)| n.clone()).collect(),
        degree_cap,
        slack,
        basis: Vec::new(),
        echelon: SparseEchelon::new(),
        pairs_bracketed: 0,
    };
    for (name, f) in generators {
        cb.try_push(f.clone(), BracketExpr::gen(name));
    }

    let mut next = 0;
    while next < cb.basis.len() {
        let current = cb.basis[next].clone();
        let d = current.field.degree();
        let partners: Vec<usize> = (0..next)
            .filter(|&j| bracket_bound(cb.basis[j].field.degree(), d) <= limit)
            .collect();
        let results: Vec<(usize, Result<VectorField, _>)> = partners
            .par_iter()
            .map(|&j| (j, bracket(&cb.basis[j].field, &current.field)))
            .collect();
        cb.pairs_bracketed += results.len();
        for (j, result) in results {
            let field = result?;
            if field.degree() > limit {
                continue;
            }
            let cert = BracketExpr::brk(&cb.basis[j].certificate, &current.certificate);
            cb.try_push(field, cert);
        }
        next += 1;
    }
    Ok(cb)
}
