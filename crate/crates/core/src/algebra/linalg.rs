use std::collections::BTreeMap;

use num_traits::{One, Zero};

use super::Rational;

/// Solves `A x = b` exactly by Gauss-Jordan elimination over Q.
///
/// Returns one solution (free variables set to zero) or `None` when the
/// system is inconsistent.
pub fn linear_solve_exact(a: &[Vec<Rational>], b: &[Rational]) -> Option<Vec<Rational>> {
    let mut sols = linear_solve_exact_multi(a, std::slice::from_ref(&b.to_vec()));
    sols.pop().expect("one right-hand side")
}

/// Same as [`linear_solve_exact`] for several right-hand sides sharing `A`.
pub fn linear_solve_exact_multi(
    a: &[Vec<Rational>],
    rhs: &[Vec<Rational>],
) -> Vec<Option<Vec<Rational>>> {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    assert!(a.iter().all(|r| r.len() == cols), "ragged matrix");
    assert!(rhs.iter().all(|b| b.len() == rows), "rhs length");
    let k = rhs.len();
    let mut m: Vec<Vec<Rational>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend(rhs.iter().map(|b| b[i].clone()));
            r
        })
        .collect();

    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = Rational::one() / &m[r][c];
        for v in m[r].iter_mut().skip(c) {
            if !v.is_zero() {
                *v *= &inv;
            }
        }
        let pivot_row = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (j, pv) in pivot_row.iter().enumerate().skip(c) {
                if !pv.is_zero() {
                    row[j] -= &f * pv;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows {
            break;
        }
    }

    (0..k)
        .map(|s| {
            if m[r..].iter().any(|row| !row[cols + s].is_zero()) {
                return None;
            }
            let mut x = vec![Rational::zero(); cols];
            for (i, &c) in pivots.iter().enumerate() {
                x[c] = m[i][cols + s].clone();
            }
            Some(x)
        })
        .collect()
}

/// Sparse reduced row echelon form. The leading key of a vector is its
/// largest key; every row has leading coefficient 1 and no row has a nonzero
/// entry at another row's pivot. Each row carries its expression as a
/// combination of the independent vectors inserted so far.
#[derive(Clone, Debug)]
pub struct SparseEchelon<K: Ord + Clone> {
    rows: BTreeMap<K, Row<K>>,
    count: usize,
}

#[derive(Clone, Debug)]
struct Row<K: Ord + Clone> {
    entries: BTreeMap<K, Rational>,
    provenance: BTreeMap<usize, Rational>,
}

impl<K: Ord + Clone> Default for SparseEchelon<K> {
    fn default() -> Self {
        Self {
            rows: BTreeMap::new(),
            count: 0,
        }
    }
}

fn axpy<K: Ord + Clone>(acc: &mut BTreeMap<K, Rational>, f: &Rational, v: &BTreeMap<K, Rational>) {
    for (k, c) in v {
        let prod = f * c;
        match acc.entry(k.clone()) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(prod);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += prod;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }
}

impl<K: Ord + Clone> SparseEchelon<K> {
    pub fn new() -> Self {
        Self::default()
    }

    /// Number of independent vectors inserted.
    pub fn rank(&self) -> usize {
        self.count
    }

    pub fn pivots(&self) -> impl Iterator<Item = &K> + '_ {
        self.rows.keys()
    }

    /// `v` minus its projection onto the rows; zero iff `v` is in the span.
    pub fn residue(&self, v: &BTreeMap<K, Rational>) -> BTreeMap<K, Rational> {
        let mut residue = v.clone();
        for (k, c) in v {
            if let Some(row) = self.rows.get(k) {
                axpy(&mut residue, &-c, &row.entries);
            }
        }
        residue
    }

    pub fn contains(&self, v: &BTreeMap<K, Rational>) -> bool {
        self.residue(v).is_empty()
    }

    fn combination(&self, v: &BTreeMap<K, Rational>) -> BTreeMap<usize, Rational> {
        let mut combo = BTreeMap::new();
        for (k, c) in v {
            if let Some(row) = self.rows.get(k) {
                axpy(&mut combo, c, &row.provenance);
            }
        }
        combo
    }

    /// Coefficients `c_i` with `v = sum c_i * inserted_i`, if `v` is in the span.
    pub fn express(&self, v: &BTreeMap<K, Rational>) -> Option<BTreeMap<usize, Rational>> {
        self.contains(v).then(|| self.combination(v))
    }

    /// Inserts `v` if it is independent of the rows, as inserted vector
    /// number `self.rank()`, and returns its pivot.
    pub fn insert(&mut self, v: &BTreeMap<K, Rational>) -> Option<K> {
        let residue = self.residue(v);
        let (lead, lead_coeff) = residue.iter().next_back()?;
        let lead = lead.clone();
        let inv = Rational::one() / lead_coeff;
        let mut provenance = BTreeMap::new();
        axpy(&mut provenance, &-&inv, &self.combination(v));
        provenance.insert(self.count, inv.clone());
        let mut entries = BTreeMap::new();
        axpy(&mut entries, &inv, &residue);
        for row in self.rows.values_mut() {
            if let Some(f) = row.entries.get(&lead).cloned() {
                axpy(&mut row.entries, &-&f, &entries);
                axpy(&mut row.provenance, &-&f, &provenance);
            }
        }
        self.rows.insert(
            lead.clone(),
            Row {
                entries,
                provenance,
            },
        );
        self.count += 1;
        Some(lead)
    }
}
