//! Natural transformations between representations of a common index quiver
//! (grid modules over one shape, or poset modules over one poset).

use crate::field::{FieldSpec, Matrix};
use crate::grid::PersistenceModule;
use crate::poset::PosetModule;

/// Anything given by a space per vertex and a matrix per generating arrow.
pub trait Representation {
    fn field(&self) -> FieldSpec;
    fn vertex_dims(&self) -> &[usize];
    /// `(source, target, matrix)` for every generating arrow, in a fixed order.
    fn generating_arrows(&self) -> Vec<(usize, usize, &Matrix)>;
    /// Same index category (same grid shape, or same poset).
    fn same_index(&self, other: &Self) -> bool;
    fn vertex_label(&self, v: usize) -> String;
}

impl Representation for PersistenceModule {
    fn field(&self) -> FieldSpec {
        PersistenceModule::field(self)
    }

    fn vertex_dims(&self) -> &[usize] {
        self.dims()
    }

    fn generating_arrows(&self) -> Vec<(usize, usize, &Matrix)> {
        self.shape().arrows().map(|(i, k, j)| (i, j, self.arrow(i, k).expect("in range"))).collect()
    }

    fn same_index(&self, other: &Self) -> bool {
        self.shape() == other.shape()
    }

    fn vertex_label(&self, v: usize) -> String {
        self.shape().cell(v).to_string()
    }
}

impl Representation for PosetModule {
    fn field(&self) -> FieldSpec {
        PosetModule::field(self)
    }

    fn vertex_dims(&self) -> &[usize] {
        self.dims()
    }

    fn generating_arrows(&self) -> Vec<(usize, usize, &Matrix)> {
        self.poset().hasse().iter().zip(self.edge_matrices()).map(|(&(p, q), m)| (p, q, m)).collect()
    }

    fn same_index(&self, other: &Self) -> bool {
        self.poset() == other.poset()
    }

    fn vertex_label(&self, v: usize) -> String {
        v.to_string()
    }
}

/// One matrix per vertex, `target.dim(v) × source.dim(v)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModuleMap {
    mats: Vec<Matrix>,
}

impl ModuleMap {
    pub fn new(mats: Vec<Matrix>) -> Self {
        ModuleMap { mats }
    }

    pub fn identity<R: Representation>(m: &R) -> Self {
        ModuleMap { mats: m.vertex_dims().iter().map(|&d| Matrix::identity(m.field(), d)).collect() }
    }

    pub fn mats(&self) -> &[Matrix] {
        &self.mats
    }

    pub fn at(&self, v: usize) -> &Matrix {
        &self.mats[v]
    }

    pub fn len(&self) -> usize {
        self.mats.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mats.is_empty()
    }

    fn shapes_fit<R: Representation>(&self, source: &R, target: &R) -> bool {
        self.mats.len() == source.vertex_dims().len()
            && source.same_index(target)
            && self
                .mats
                .iter()
                .enumerate()
                .all(|(v, m)| m.shape() == (target.vertex_dims()[v], source.vertex_dims()[v]))
    }

    /// First generating arrow `(u, v)` whose square fails
    /// `target(e)·α_u = α_v·source(e)`. A shape mismatch reports `None` from
    /// [`is_natural`](Self::is_natural) instead.
    pub fn naturality_failure<R: Representation>(&self, source: &R, target: &R) -> Option<(usize, usize)> {
        let src = source.generating_arrows();
        let tgt = target.generating_arrows();
        for ((u, v, a), (_, _, b)) in src.into_iter().zip(tgt) {
            let left = b.mul(&self.mats[u]).expect("shapes checked");
            let right = self.mats[v].mul(a).expect("shapes checked");
            if left != right {
                return Some((u, v));
            }
        }
        None
    }

    pub fn is_natural<R: Representation>(&self, source: &R, target: &R) -> bool {
        self.shapes_fit(source, target) && self.naturality_failure(source, target).is_none()
    }

    pub fn is_invertible_everywhere(&self) -> bool {
        self.mats.iter().all(Matrix::is_invertible)
    }

    pub fn is_isomorphism<R: Representation>(&self, source: &R, target: &R) -> bool {
        self.is_natural(source, target) && self.is_invertible_everywhere()
    }

    /// Cellwise inverse; `None` when some component is singular.
    pub fn inverse(&self) -> Option<ModuleMap> {
        let mats = self.mats.iter().map(|m| m.invert().ok()).collect::<Option<Vec<_>>>()?;
        Some(ModuleMap { mats })
    }

    /// `self ∘ first`.
    pub fn compose(&self, first: &ModuleMap) -> Option<ModuleMap> {
        let mats = self.mats.iter().zip(&first.mats).map(|(a, b)| a.mul(b).ok()).collect::<Option<Vec<_>>>()?;
        Some(ModuleMap { mats })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{GridShape, Region};

    #[test]
    fn identity_is_an_isomorphism() {
        let shape = GridShape::new(&[3, 3]).unwrap();
        let m = PersistenceModule::interval_module(FieldSpec::Rational, shape.clone(), &Region::full(&shape)).unwrap();
        let id = ModuleMap::identity(&m);
        assert!(id.is_isomorphism(&m, &m));
    }

    #[test]
    fn scaling_one_cell_breaks_naturality() {
        let f = FieldSpec::Rational;
        let shape = GridShape::new(&[2, 1]).unwrap();
        let m = PersistenceModule::constant(f, shape, 1);
        let bad = ModuleMap::new(vec![Matrix::from_rows(f, &[&[2]]), Matrix::from_rows(f, &[&[1]])]);
        assert_eq!(bad.naturality_failure(&m, &m), Some((0, 1)));
    }
}
