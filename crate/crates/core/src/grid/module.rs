use super::{Cell, GridError, GridShape, Region};
use crate::field::{FieldSpec, Matrix};

/// Default cap on `cells × max_dim²`.
pub const DEFAULT_ENTRY_BUDGET: u64 = 100_000_000;

/// A persistence module on a finite grid: one vector space dimension per cell
/// and one matrix per elementary arrow `c → c + e_k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PersistenceModule {
    field: FieldSpec,
    shape: GridShape,
    dims: Vec<usize>,
    /// `maps[k][c]` is the arrow `c → c + e_k`, present iff that arrow is in range.
    maps: Vec<Vec<Option<Matrix>>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// Arrow matrix does not match `dims(target) × dims(source)`.
    Shape { cell: Cell, axis: usize, expected: (usize, usize), found: (usize, usize) },
    /// The unit square at `cell` spanned by two axes does not commute.
    Square { cell: Cell, axes: (usize, usize) },
    /// Matrix over another field.
    Field { cell: Cell, axis: usize },
}

/// First violations found by [`PersistenceModule::validate`], in linear cell order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    pub total: usize,
}

impl ValidationReport {
    pub const MAX_LISTED: usize = 10;

    pub fn is_ok(&self) -> bool {
        self.total == 0
    }

    fn push(&mut self, v: Violation) {
        if self.violations.len() < Self::MAX_LISTED {
            self.violations.push(v);
        }
        self.total += 1;
    }
}

impl PersistenceModule {
    /// Structural constructor: checks that `dims` covers the grid and that an
    /// arrow matrix is present exactly where the arrow is in range. Matrix
    /// shapes and commutativity are checked by [`validate`](Self::validate).
    pub fn new(
        field: FieldSpec,
        shape: GridShape,
        dims: Vec<usize>,
        maps: Vec<Vec<Option<Matrix>>>,
    ) -> Result<Self, GridError> {
        Self::new_with_budget(field, shape, dims, maps, DEFAULT_ENTRY_BUDGET)
    }

    pub fn new_with_budget(
        field: FieldSpec,
        shape: GridShape,
        dims: Vec<usize>,
        maps: Vec<Vec<Option<Matrix>>>,
        budget: u64,
    ) -> Result<Self, GridError> {
        if dims.len() != shape.len() {
            return Err(GridError::Malformed(format!("{} dims for {} cells", dims.len(), shape.len())));
        }
        let max_dim = dims.iter().copied().max().unwrap_or(0) as u64;
        let needed = (shape.len() as u64).saturating_mul(max_dim.saturating_mul(max_dim));
        if needed > budget {
            return Err(GridError::BudgetExceeded { needed, budget });
        }
        if maps.len() != shape.n() {
            return Err(GridError::Malformed(format!("{} arrow families for {} axes", maps.len(), shape.n())));
        }
        for (k, family) in maps.iter().enumerate() {
            if family.len() != shape.len() {
                return Err(GridError::Malformed(format!("axis {k}: {} slots", family.len())));
            }
            for (i, m) in family.iter().enumerate() {
                if m.is_some() != shape.step(i, k).is_some() {
                    return Err(GridError::Malformed(format!("axis {k}: arrow presence wrong at {}", shape.cell(i))));
                }
            }
        }
        Ok(PersistenceModule { field, shape, dims, maps })
    }

    /// Builds a module by asking `arrow(source, axis, target)` for every
    /// elementary arrow.
    pub fn from_arrows<F>(field: FieldSpec, shape: GridShape, dims: Vec<usize>, mut arrow: F) -> Result<Self, GridError>
    where
        F: FnMut(usize, usize, usize) -> Matrix,
    {
        let maps = (0..shape.n())
            .map(|k| (0..shape.len()).map(|i| shape.step(i, k).map(|j| arrow(i, k, j))).collect())
            .collect();
        Self::new(field, shape, dims, maps)
    }

    pub fn zero(field: FieldSpec, shape: GridShape) -> Self {
        let dims = vec![0; shape.len()];
        Self::from_arrows(field, shape, dims, |_, _, _| Matrix::zeros(field, 0, 0)).expect("zero module")
    }

    /// Constant module `F^d` with identity arrows.
    pub fn constant(field: FieldSpec, shape: GridShape, d: usize) -> Self {
        let dims = vec![d; shape.len()];
        Self::from_arrows(field, shape, dims, |_, _, _| Matrix::identity(field, d)).expect("constant module")
    }

    /// The interval module: `F` with identity arrows on `support`, zero elsewhere.
    pub fn interval_module(field: FieldSpec, shape: GridShape, support: &Region) -> Result<Self, GridError> {
        if support.shape() != &shape {
            return Err(GridError::ShapeMismatch("support lives on another grid".into()));
        }
        if support.is_empty() {
            return Err(GridError::NotInterval("empty support".into()));
        }
        if let Some(w) = support.convexity_violation() {
            return Err(GridError::NotInterval(format!(
                "not convex: {} <= {} <= {} with the middle missing",
                w.lower, w.middle, w.upper
            )));
        }
        if support.unit_components().len() > 1 {
            return Err(GridError::NotInterval("not connected".into()));
        }
        let dims: Vec<usize> = (0..shape.len()).map(|i| usize::from(support.contains(i))).collect();
        Self::from_arrows(field, shape, dims.clone(), |i, _, j| {
            if dims[i] == 1 && dims[j] == 1 {
                Matrix::identity(field, 1)
            } else {
                Matrix::zeros(field, dims[j], dims[i])
            }
        })
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn shape(&self) -> &GridShape {
        &self.shape
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self, idx: usize) -> usize {
        self.dims[idx]
    }

    pub fn dim_at(&self, c: &Cell) -> usize {
        self.dims[self.shape.index(c)]
    }

    /// Arrow `idx → idx + e_axis`.
    pub fn arrow(&self, idx: usize, axis: usize) -> Option<&Matrix> {
        self.maps[axis][idx].as_ref()
    }

    pub fn arrow_family(&self, axis: usize) -> &[Option<Matrix>] {
        &self.maps[axis]
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().sum()
    }

    pub fn is_thin(&self) -> bool {
        self.dims.iter().all(|&d| d <= 1)
    }

    /// Cells with a nonzero space.
    pub fn support(&self) -> Region {
        Region::from_indices(&self.shape, (0..self.shape.len()).filter(|&i| self.dims[i] > 0))
    }

    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        let shape = &self.shape;
        let mut shape_ok = vec![vec![true; shape.len()]; shape.n()];
        for (i, k, j) in shape.arrows() {
            let m = self.arrow(i, k).expect("arrow in range");
            if m.field() != self.field {
                shape_ok[k][i] = false;
                report.push(Violation::Field { cell: shape.cell(i), axis: k });
            } else if m.shape() != (self.dims[j], self.dims[i]) {
                shape_ok[k][i] = false;
                report.push(Violation::Shape {
                    cell: shape.cell(i),
                    axis: k,
                    expected: (self.dims[j], self.dims[i]),
                    found: m.shape(),
                });
            }
        }
        for i in 0..shape.len() {
            for a in 0..shape.n() {
                for b in a + 1..shape.n() {
                    let (Some(ia), Some(ib)) = (shape.step(i, a), shape.step(i, b)) else {
                        continue;
                    };
                    if !(shape_ok[a][i] && shape_ok[b][i] && shape_ok[b][ia] && shape_ok[a][ib]) {
                        continue;
                    }
                    let via_a = self.arrow(ia, b).unwrap().mul(self.arrow(i, a).unwrap()).unwrap();
                    let via_b = self.arrow(ib, a).unwrap().mul(self.arrow(i, b).unwrap()).unwrap();
                    if via_a != via_b {
                        report.push(Violation::Square { cell: shape.cell(i), axes: (a, b) });
                    }
                }
            }
        }
        report
    }

    /// `M(a ≤ b)` composed along the axis-ascending staircase.
    pub fn map_between(&self, a: &Cell, b: &Cell) -> Result<Matrix, GridError> {
        let ia = self.shape.checked_index(a)?;
        let ib = self.shape.checked_index(b)?;
        if !a.leq(b) {
            return Err(GridError::NotComparable(*a, *b));
        }
        Ok(self.map_between_idx(ia, ib))
    }

    /// Index form of [`map_between`](Self::map_between); requires `a ≤ b`.
    pub fn map_between_idx(&self, a: usize, b: usize) -> Matrix {
        debug_assert!(self.shape.leq_idx(a, b));
        let mut acc = Matrix::identity(self.field, self.dims[a]);
        let mut cur = a;
        for k in 0..self.shape.n() {
            let steps = self.shape.coord(b, k) - self.shape.coord(cur, k);
            for _ in 0..steps {
                let m = self.arrow(cur, k).expect("step in range");
                acc = m.mul(&acc).expect("validated shapes");
                cur += self.shape.stride(k);
            }
        }
        acc
    }

    pub fn direct_sum(&self, other: &PersistenceModule) -> Result<PersistenceModule, GridError> {
        if self.shape != other.shape {
            return Err(GridError::ShapeMismatch(format!("{} vs {}", self.shape, other.shape)));
        }
        if self.field != other.field {
            return Err(GridError::Field(crate::field::FieldError::FieldMismatch(self.field, other.field)));
        }
        let dims = self.dims.iter().zip(&other.dims).map(|(a, b)| a + b).collect();
        let maps = (0..self.shape.n())
            .map(|k| {
                (0..self.shape.len())
                    .map(|i| match (self.arrow(i, k), other.arrow(i, k)) {
                        (Some(x), Some(y)) => Some(x.block_diag(y).expect("same field")),
                        _ => None,
                    })
                    .collect()
            })
            .collect();
        PersistenceModule::new(self.field, self.shape.clone(), dims, maps)
    }

    /// Keeps the spaces on `region` and every arrow between region cells;
    /// everything else becomes zero.
    pub fn restrict(&self, region: &Region) -> PersistenceModule {
        let f = self.field;
        let dims: Vec<usize> = (0..self.shape.len()).map(|i| if region.contains(i) { self.dims[i] } else { 0 }).collect();
        Self::from_arrows(f, self.shape.clone(), dims.clone(), |i, k, j| {
            if region.contains(i) && region.contains(j) {
                self.arrow(i, k).unwrap().clone()
            } else {
                Matrix::zeros(f, dims[j], dims[i])
            }
        })
        .expect("restriction keeps structure")
    }

    /// Cellwise base change: arrow `c → c'` becomes `g_{c'} · M(e) · g_c⁻¹`.
    pub fn twist(&self, g: &[Matrix]) -> Result<PersistenceModule, GridError> {
        if g.len() != self.shape.len() {
            return Err(GridError::ShapeMismatch("one base change per cell required".into()));
        }
        let inverses: Vec<Matrix> = g.iter().map(Matrix::invert).collect::<Result<_, _>>()?;
        let mut maps = Vec::with_capacity(self.shape.n());
        for k in 0..self.shape.n() {
            let family = inverses
                .iter()
                .enumerate()
                .map(|(i, inv)| match (self.arrow(i, k), self.shape.step(i, k)) {
                    (Some(m), Some(j)) => Ok(Some(g[j].mul(m)?.mul(inv)?)),
                    _ => Ok(None),
                })
                .collect::<Result<Vec<_>, GridError>>()?;
            maps.push(family);
        }
        PersistenceModule::new(self.field, self.shape.clone(), self.dims.clone(), maps)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Scalar;

    const Q: FieldSpec = FieldSpec::Rational;

    fn shape(s: &[usize]) -> GridShape {
        GridShape::new(s).unwrap()
    }

    fn scalar_module(field: FieldSpec, sh: GridShape, value: impl Fn(usize, usize) -> i64) -> PersistenceModule {
        let dims = vec![1; sh.len()];
        PersistenceModule::from_arrows(field, sh, dims, |i, k, _| Matrix::from_rows(field, &[&[value(i, k)]])).unwrap()
    }

    #[test]
    fn broken_square_is_reported() {
        // three arrows 1, the vertical arrow out of (1,0) is 2
        let m = scalar_module(Q, shape(&[2, 2]), |i, k| if i == 1 && k == 1 { 2 } else { 1 });
        let report = m.validate();
        assert_eq!(report.total, 1);
        assert_eq!(report.violations, vec![Violation::Square { cell: Cell::new(&[0, 0]), axes: (0, 1) }]);
    }

    #[test]
    fn wrong_matrix_shape_is_reported() {
        let sh = shape(&[2, 1]);
        let maps = vec![vec![Some(Matrix::from_rows(Q, &[&[1], &[1]])), None], vec![None, None]];
        let m = PersistenceModule::new(Q, sh, vec![1, 1], maps).unwrap();
        let report = m.validate();
        assert!(matches!(report.violations[0], Violation::Shape { expected: (1, 1), found: (2, 1), .. }));
    }

    #[test]
    fn map_between_examples() {
        let gf5 = FieldSpec::Prime(5);
        let m = scalar_module(gf5, shape(&[2, 2]), |i, k| match (i, k) {
            (0, 0) => 2,
            (1, 1) => 3,
            (0, 1) => 3,
            (2, 0) => 2,
            _ => 1,
        });
        assert!(m.validate().is_ok());
        let a = Cell::new(&[0, 0]);
        let b = Cell::new(&[1, 1]);
        assert_eq!(m.map_between(&a, &b).unwrap(), Matrix::scalar(gf5, Scalar::Mod((2 * 3) % 5)));
        assert!(m.map_between(&a, &a).unwrap().is_identity());
        assert!(matches!(m.map_between(&b, &a), Err(GridError::NotComparable(..))));
    }

    #[test]
    fn interval_modules() {
        let sh = shape(&[2, 2]);
        let full = PersistenceModule::interval_module(Q, sh.clone(), &Region::full(&sh)).unwrap();
        assert!(full.validate().is_ok());
        assert!(full.map_between(&Cell::new(&[0, 0]), &Cell::new(&[1, 1])).unwrap().is_identity());

        let l = Region::from_cells(&sh, &[Cell::new(&[0, 0]), Cell::new(&[1, 0]), Cell::new(&[0, 1])]);
        let lm = PersistenceModule::interval_module(Q, sh.clone(), &l).unwrap();
        assert!(lm.validate().is_ok());
        assert!(lm.is_thin());

        // (0,0) <= (0,1) <= (1,1) leaves this L-shape non-convex
        let hook = Region::from_cells(&sh, &[Cell::new(&[0, 0]), Cell::new(&[1, 0]), Cell::new(&[1, 1])]);
        assert!(matches!(PersistenceModule::interval_module(Q, sh.clone(), &hook), Err(GridError::NotInterval(_))));

        let diag = Region::from_cells(&sh, &[Cell::new(&[0, 0]), Cell::new(&[1, 1])]);
        assert!(matches!(PersistenceModule::interval_module(Q, sh, &diag), Err(GridError::NotInterval(_))));
    }

    #[test]
    fn direct_sums() {
        let sh = shape(&[3, 2]);
        let i = PersistenceModule::interval_module(Q, sh.clone(), &Region::full(&sh)).unwrap();
        let z = PersistenceModule::zero(Q, sh.clone());
        assert_eq!(i.direct_sum(&z).unwrap(), i);
        let ii = i.direct_sum(&i).unwrap();
        assert!(ii.dims().iter().all(|&d| d == 2));
        assert!(!ii.is_thin());
        assert!(ii.validate().is_ok());
        assert!(z.is_thin());
    }

    #[test]
    fn twisting_preserves_validity() {
        let sh = shape(&[2, 2]);
        let m = PersistenceModule::constant(Q, sh.clone(), 2);
        let g: Vec<Matrix> = (0..4).map(|i| Matrix::from_rows(Q, &[&[1, i as i64], &[0, 1]])).collect();
        let t = m.twist(&g).unwrap();
        assert!(t.validate().is_ok());
        assert_ne!(t, m);
    }
}
