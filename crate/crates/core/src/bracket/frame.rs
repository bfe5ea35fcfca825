use std::collections::BTreeMap;

use num_traits::Zero;

use super::closure::{vectorize, FieldKey};
use super::BracketError;
use crate::algebra::{linear_solve_exact_multi, same_ring, Polynomial, Rational};
use crate::fields::VectorField;

/// Polynomials `f_i` of degree `<= coeff_degree` with `target = sum f_i * frame_i`,
/// found by one exact linear solve over the monomial coefficients.
pub fn decompose_in_frame(
    target: &VectorField,
    frame: &[VectorField],
    coeff_degree: u32,
) -> Result<Option<Vec<Polynomial>>, BracketError> {
    Ok(
        decompose_many(std::slice::from_ref(target), frame, coeff_degree)?
            .pop()
            .expect("one target"),
    )
}

/// [`decompose_in_frame`] for several targets sharing one elimination.
pub fn decompose_many(
    targets: &[VectorField],
    frame: &[VectorField],
    coeff_degree: u32,
) -> Result<Vec<Option<Vec<Polynomial>>>, BracketError> {
    let Some(first) = frame.first() else {
        return Ok(targets.iter().map(|t| t.is_zero().then(Vec::new)).collect());
    };
    let ring = first.ring().clone();
    for f in frame.iter().chain(targets) {
        if !same_ring(f.ring(), &ring) {
            return Err(BracketError::Field(crate::fields::FieldError::Algebra(
                crate::algebra::AlgebraError::RingMismatch {
                    left: ring.name().to_string(),
                    right: f.ring().name().to_string(),
                },
            )));
        }
    }
    let monomials = ring.normal_monomials(coeff_degree);
    let mut unknowns = Vec::new();
    let mut columns = Vec::new();
    for (i, f) in frame.iter().enumerate() {
        for m in &monomials {
            let p = Polynomial::monomial(&ring, *m, Rational::from_integer(1.into()));
            unknowns.push((i, *m));
            columns.push(vectorize(&f.mul_poly(&p)?));
        }
    }
    let rhs_vectors: Vec<BTreeMap<FieldKey, Rational>> = targets.iter().map(vectorize).collect();
    let mut keys: Vec<FieldKey> = columns
        .iter()
        .chain(&rhs_vectors)
        .flat_map(|v| v.keys().cloned())
        .collect();
    keys.sort();
    keys.dedup();
    let row_of: BTreeMap<&FieldKey, usize> = keys.iter().enumerate().map(|(r, k)| (k, r)).collect();

    let zero = Rational::zero();
    let mut a = vec![vec![zero.clone(); columns.len()]; keys.len()];
    for (j, col) in columns.iter().enumerate() {
        for (k, v) in col {
            a[row_of[k]][j] = v.clone();
        }
    }
    let rhs: Vec<Vec<Rational>> = rhs_vectors
        .iter()
        .map(|v| {
            let mut b = vec![zero.clone(); keys.len()];
            for (k, c) in v {
                b[row_of[k]] = c.clone();
            }
            b
        })
        .collect();

    Ok(linear_solve_exact_multi(&a, &rhs)
        .into_iter()
        .map(|sol| {
            sol.map(|x| {
                (0..frame.len())
                    .map(|i| {
                        Polynomial::from_terms(
                            &ring,
                            unknowns
                                .iter()
                                .zip(&x)
                                .filter(|((fi, _), _)| *fi == i)
                                .map(|((_, m), c)| (*m, c.clone())),
                        )
                    })
                    .collect()
            })
        })
        .collect())
}

/// `sum f_i * frame_i`.
pub fn recombine(
    coeffs: &[Polynomial],
    frame: &[VectorField],
) -> Result<VectorField, BracketError> {
    let mut acc = VectorField::zero(frame[0].ring());
    for (f, v) in coeffs.iter().zip(frame) {
        acc = acc.checked_add(&v.mul_poly(f)?)?;
    }
    Ok(acc)
}
