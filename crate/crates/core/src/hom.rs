//! `Hom(M, N)` by solving the naturality equations
//! `N(e)·α_u − α_v·M(e) = 0` over every generating arrow `e: u → v`.
//!
//! Unknowns are the entries of the per-vertex matrices `α_v`, ordered by
//! vertex and then row-major inside each block. The system is sparse (each
//! equation touches two vertices), so it is reduced with a sparse row
//! echelon routine; [`constraint_matrix`] exposes the same system densely.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::field::{kernel_from_echelon, FieldSpec, Matrix, Scalar};
use crate::morphism::{ModuleMap, Representation};
use crate::sample;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HomError {
    #[error("modules live over different index categories or fields")]
    ShapeMismatch,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HomSpace {
    pub basis: Vec<ModuleMap>,
}

impl HomSpace {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }
}

/// Search outcome when no isomorphism was found.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NotIsomorphic {
    /// Dims matched, so the verdict comes from a bounded search rather than a proof.
    pub search_based: bool,
    pub attempts: usize,
}

struct Layout {
    offsets: Vec<usize>,
    src: Vec<usize>,
    tgt: Vec<usize>,
    total: usize,
}

impl Layout {
    fn new(src: &[usize], tgt: &[usize]) -> Self {
        let mut offsets = Vec::with_capacity(src.len());
        let mut total = 0;
        for (s, t) in src.iter().zip(tgt) {
            offsets.push(total);
            total += s * t;
        }
        Layout { offsets, src: src.to_vec(), tgt: tgt.to_vec(), total }
    }

    fn var(&self, v: usize, r: usize, c: usize) -> usize {
        self.offsets[v] + r * self.src[v] + c
    }
}

type SparseRow = Vec<(usize, Scalar)>;

fn equations<R: Representation>(m: &R, n: &R, layout: &Layout) -> Vec<SparseRow> {
    let f = m.field();
    let mut rows = Vec::new();
    for ((u, v, a), (_, _, b)) in m.generating_arrows().into_iter().zip(n.generating_arrows()) {
        // entry (i, j) of b·α_u − α_v·a, i < t_v, j < s_u
        for i in 0..layout.tgt[v] {
            for j in 0..layout.src[u] {
                let mut row: BTreeMap<usize, Scalar> = BTreeMap::new();
                for k in 0..layout.tgt[u] {
                    let coeff = b.get(i, k);
                    if !coeff.is_zero() {
                        let e = row.entry(layout.var(u, k, j)).or_insert_with(|| f.zero());
                        *e = f.add(e, coeff);
                    }
                }
                for l in 0..layout.src[v] {
                    let coeff = a.get(l, j);
                    if !coeff.is_zero() {
                        let e = row.entry(layout.var(v, i, l)).or_insert_with(|| f.zero());
                        *e = f.sub(e, coeff);
                    }
                }
                let row: SparseRow = row.into_iter().filter(|(_, s)| !s.is_zero()).collect();
                if !row.is_empty() {
                    rows.push(row);
                }
            }
        }
    }
    rows
}

fn check_compatible<R: Representation>(m: &R, n: &R) -> Result<(), HomError> {
    if !m.same_index(n) || m.field() != n.field() {
        return Err(HomError::ShapeMismatch);
    }
    Ok(())
}

/// The stacked naturality system as a dense matrix (one column per unknown).
pub fn constraint_matrix<R: Representation>(m: &R, n: &R) -> Result<Matrix, HomError> {
    check_compatible(m, n)?;
    let layout = Layout::new(m.vertex_dims(), n.vertex_dims());
    let rows = equations(m, n, &layout);
    let f = m.field();
    let mut out = Matrix::zeros(f, rows.len(), layout.total);
    for (r, row) in rows.iter().enumerate() {
        for (c, v) in row {
            out.set(r, *c, v.clone());
        }
    }
    Ok(out)
}

/// `a - s·b` for sorted sparse rows.
fn axpy(f: FieldSpec, a: &SparseRow, s: &Scalar, b: &SparseRow) -> SparseRow {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let take_a = j == b.len() || (i < a.len() && a[i].0 < b[j].0);
        let take_b = i == a.len() || (j < b.len() && b[j].0 < a[i].0);
        if take_a {
            out.push(a[i].clone());
            i += 1;
        } else if take_b {
            out.push((b[j].0, f.neg(&f.mul(s, &b[j].1))));
            j += 1;
        } else {
            let v = f.sub(&a[i].1, &f.mul(s, &b[j].1));
            if !v.is_zero() {
                out.push((a[i].0, v));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

/// Sparse reduced row echelon form; pivot rows keyed by pivot column.
fn sparse_rref(f: FieldSpec, rows: Vec<SparseRow>) -> BTreeMap<usize, SparseRow> {
    let mut pivots: BTreeMap<usize, SparseRow> = BTreeMap::new();
    for mut row in rows {
        while let Some((lead, coeff)) = row.first().cloned() {
            match pivots.get(&lead) {
                Some(p) => row = axpy(f, &row, &coeff, p),
                None => {
                    let inv = f.inv(&coeff).expect("nonzero lead");
                    for e in row.iter_mut() {
                        e.1 = f.mul(&e.1, &inv);
                    }
                    pivots.insert(lead, row);
                    break;
                }
            }
        }
    }
    // back substitution, largest pivot first
    let cols: Vec<usize> = pivots.keys().rev().copied().collect();
    for c in cols {
        let mut row = pivots.remove(&c).unwrap();
        loop {
            let hit = row.iter().skip(1).find(|(col, _)| pivots.contains_key(col)).cloned();
            let Some((col, coeff)) = hit else { break };
            row = axpy(f, &row, &coeff, &pivots[&col]);
        }
        pivots.insert(c, row);
    }
    pivots
}

pub fn hom_space<R: Representation>(m: &R, n: &R) -> Result<HomSpace, HomError> {
    check_compatible(m, n)?;
    let f = m.field();
    let layout = Layout::new(m.vertex_dims(), n.vertex_dims());
    let rref = sparse_rref(f, equations(m, n, &layout));
    let pivot_cols: Vec<usize> = rref.keys().copied().collect();
    let pivot_rows: Vec<&SparseRow> = rref.values().collect();
    let kernel = kernel_from_echelon(f, layout.total, &pivot_cols, |r, c| {
        let row = pivot_rows[r];
        match row.binary_search_by_key(&c, |e| e.0) {
            Ok(pos) => row[pos].1.clone(),
            Err(_) => f.zero(),
        }
    });
    let basis = (0..kernel.cols()).map(|k| unflatten(f, &layout, |var| kernel.get(var, k).clone())).collect();
    Ok(HomSpace { basis })
}

fn unflatten(f: FieldSpec, layout: &Layout, value: impl Fn(usize) -> Scalar) -> ModuleMap {
    let mats = (0..layout.src.len())
        .map(|v| {
            let (t, s) = (layout.tgt[v], layout.src[v]);
            let mut mat = Matrix::zeros(f, t, s);
            for r in 0..t {
                for c in 0..s {
                    mat.set(r, c, value(layout.var(v, r, c)));
                }
            }
            mat
        })
        .collect();
    ModuleMap::new(mats)
}

pub fn end_dim<R: Representation>(m: &R) -> usize {
    hom_space(m, m).expect("a module is compatible with itself").dim()
}

/// Number of random combinations tried after the basis vectors.
pub const ISO_SEARCH_COMBINATIONS: usize = 50;

/// Looks for an element of `Hom(m, n)` invertible at every vertex: first each
/// basis vector, then seeded random combinations.
pub fn are_isomorphic<R: Representation>(m: &R, n: &R, seed: u64) -> Result<Result<ModuleMap, NotIsomorphic>, HomError> {
    check_compatible(m, n)?;
    if m.vertex_dims() != n.vertex_dims() {
        return Ok(Err(NotIsomorphic { search_based: false, attempts: 0 }));
    }
    let hom = hom_space(m, n)?;
    let mut attempts = 0;
    for b in &hom.basis {
        attempts += 1;
        if b.is_invertible_everywhere() {
            return Ok(Ok(b.clone()));
        }
    }
    if hom.dim() > 1 {
        let f = m.field();
        let mut rng = sample::rng(seed);
        for _ in 0..ISO_SEARCH_COMBINATIONS {
            attempts += 1;
            let coeffs: Vec<Scalar> = (0..hom.dim()).map(|_| sample::scalar(f, 0.1, &mut rng)).collect();
            let mats = (0..m.vertex_dims().len())
                .map(|v| {
                    hom.basis.iter().zip(&coeffs).fold(hom.basis[0].at(v).scale(&f.zero()), |acc, (b, c)| {
                        acc.add(&b.at(v).scale(c)).expect("same shapes")
                    })
                })
                .collect();
            let candidate = ModuleMap::new(mats);
            if candidate.is_invertible_everywhere() {
                return Ok(Ok(candidate));
            }
        }
    }
    Ok(Err(NotIsomorphic { search_based: true, attempts }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{GridShape, PersistenceModule, Region};

    const Q: FieldSpec = FieldSpec::Rational;

    fn full_interval(s: &[usize]) -> PersistenceModule {
        let shape = GridShape::new(s).unwrap();
        PersistenceModule::interval_module(Q, shape.clone(), &Region::full(&shape)).unwrap()
    }

    #[test]
    fn interval_endomorphisms_are_scalars() {
        let i = full_interval(&[3, 2]);
        assert_eq!(end_dim(&i), 1);
        let z = PersistenceModule::zero(Q, i.shape().clone());
        assert_eq!(hom_space(&i, &z).unwrap().dim(), 0);
    }

    #[test]
    fn doubled_interval_has_matrix_endomorphisms() {
        let i = full_interval(&[2, 2]);
        assert_eq!(end_dim(&i.direct_sum(&i).unwrap()), 4);
    }

    #[test]
    fn basis_elements_are_natural() {
        let i = full_interval(&[2, 3]);
        let ii = i.direct_sum(&i).unwrap();
        for b in hom_space(&i, &ii).unwrap().basis {
            assert!(b.is_natural(&i, &ii));
        }
    }

    #[test]
    fn sparse_kernel_matches_dense_kernel() {
        let shape = GridShape::new(&[3, 3]).unwrap();
        let m = crate::grid::random_thin_module(FieldSpec::Prime(5), shape.clone(), 0.8, 7).unwrap();
        let n = crate::grid::random_thin_module(FieldSpec::Prime(5), shape, 0.8, 8).unwrap();
        let dense = constraint_matrix(&m, &n).unwrap().kernel_basis();
        let hom = hom_space(&m, &n).unwrap();
        assert_eq!(dense.cols(), hom.dim());
        for (k, b) in hom.basis.iter().enumerate() {
            let flat: Vec<Scalar> = b.mats().iter().flat_map(|mat| mat.data().to_vec()).collect();
            let col: Vec<Scalar> = (0..dense.rows()).map(|r| dense.get(r, k).clone()).collect();
            assert_eq!(flat, col);
        }
    }

    #[test]
    fn isomorphism_search() {
        let i = full_interval(&[2, 2]);
        assert!(are_isomorphic(&i, &i, 0).unwrap().is_ok());
        let shape = i.shape().clone();
        let corner = Region::from_indices(&shape, [0]);
        let j = PersistenceModule::interval_module(Q, shape, &corner).unwrap();
        assert_eq!(are_isomorphic(&i, &j, 0).unwrap(), Err(NotIsomorphic { search_based: false, attempts: 0 }));
    }

    #[test]
    fn mismatched_shapes_rejected() {
        assert_eq!(hom_space(&full_interval(&[2, 2]), &full_interval(&[2, 3])), Err(HomError::ShapeMismatch));
    }
}
