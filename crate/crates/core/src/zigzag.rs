//! Zigzag paths and transport: good steps go up the order and apply the
//! module map, bad steps go down and apply its inverse.

use std::collections::{HashMap, VecDeque};

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::field::Matrix;
use crate::grid::{Cell, ConvexityWitness, GridError, PersistenceModule, Region};
use crate::sample;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ZigzagError {
    #[error("a zigzag path needs at least one cell")]
    Empty,
    #[error("consecutive cells {0} and {1} are not comparable")]
    NotComparable(Cell, Cell),
    #[error("the map between {0} and {1} is not invertible")]
    NonInvertibleArrow(Cell, Cell),
    #[error("region is not convex: {} <= {} <= {}", .0.lower, .0.middle, .0.upper)]
    RegionNotConvex(ConvexityWitness),
    #[error("cell {0} is outside the region")]
    OutsideRegion(Cell),
    #[error("no zigzag path from {0} to {1} inside the region")]
    Unreachable(Cell, Cell),
    #[error("staircase reduction needs a 2-parameter grid, got {0}")]
    UnsupportedDimension(usize),
    #[error(transparent)]
    Grid(#[from] GridError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ArrowKind {
    Good,
    Bad,
}

/// A sequence of cells with consecutive cells comparable.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ZigzagPath {
    cells: Vec<Cell>,
}

impl ZigzagPath {
    pub fn new(cells: Vec<Cell>) -> Result<Self, ZigzagError> {
        if cells.is_empty() {
            return Err(ZigzagError::Empty);
        }
        for w in cells.windows(2) {
            if w[0].n() != w[1].n() || !w[0].comparable(&w[1]) {
                return Err(ZigzagError::NotComparable(w[0], w[1]));
            }
        }
        Ok(ZigzagPath { cells })
    }

    pub fn single(c: Cell) -> Self {
        ZigzagPath { cells: vec![c] }
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn start(&self) -> Cell {
        self.cells[0]
    }

    pub fn end(&self) -> Cell {
        *self.cells.last().expect("nonempty")
    }

    /// Number of steps.
    pub fn steps(&self) -> usize {
        self.cells.len() - 1
    }

    pub fn kinds(&self) -> Vec<ArrowKind> {
        self.cells.windows(2).map(|w| if w[0].leq(&w[1]) { ArrowKind::Good } else { ArrowKind::Bad }).collect()
    }

    pub fn reversed(&self) -> Self {
        let mut cells = self.cells.clone();
        cells.reverse();
        ZigzagPath { cells }
    }

    /// `self` followed by `next`; `next` must start where `self` ends.
    pub fn concat(&self, next: &ZigzagPath) -> Option<Self> {
        (self.end() == next.start()).then(|| {
            let mut cells = self.cells.clone();
            cells.extend_from_slice(&next.cells[1..]);
            ZigzagPath { cells }
        })
    }

    /// No two consecutive steps move along the same axis.
    pub fn is_reduced(&self) -> bool {
        let axes: Vec<Option<usize>> = self.cells.windows(2).map(|w| single_axis(&w[0], &w[1])).collect();
        axes.iter().all(Option::is_some) && axes.windows(2).all(|w| w[0] != w[1])
    }

    pub fn is_simple(&self) -> bool {
        let mut seen = std::collections::HashSet::new();
        self.cells.iter().all(|c| seen.insert(*c))
    }
}

fn single_axis(a: &Cell, b: &Cell) -> Option<usize> {
    let diff: Vec<usize> = (0..a.n()).filter(|&k| a.coords()[k] != b.coords()[k]).collect();
    (diff.len() == 1).then(|| diff[0])
}

/// `M(a ⇝ b)` along `p`.
pub fn transport(m: &PersistenceModule, p: &ZigzagPath) -> Result<Matrix, ZigzagError> {
    let shape = m.shape();
    let start = shape.checked_index(&p.start())?;
    let mut acc = Matrix::identity(m.field(), m.dim(start));
    for w in p.cells.windows(2) {
        let (a, b) = (shape.checked_index(&w[0])?, shape.checked_index(&w[1])?);
        acc = step_matrix(m, a, b)?.mul(&acc).expect("dims agree along a path");
    }
    Ok(acc)
}

/// `M(a ≤ b)` for a good step, `M(b ≤ a)⁻¹` for a bad one.
pub(crate) fn step_matrix(m: &PersistenceModule, a: usize, b: usize) -> Result<Matrix, ZigzagError> {
    let shape = m.shape();
    if shape.leq_idx(a, b) {
        Ok(m.map_between_idx(a, b))
    } else if shape.leq_idx(b, a) {
        m.map_between_idx(b, a)
            .invert()
            .map_err(|_| ZigzagError::NonInvertibleArrow(shape.cell(b), shape.cell(a)))
    } else {
        Err(ZigzagError::NotComparable(shape.cell(a), shape.cell(b)))
    }
}

/// Unit-step staircase from `a` to a comparable `b`, axis 0 first.
fn unit_staircase(a: &Cell, b: &Cell, out: &mut Vec<Cell>) {
    let mut cur = *a;
    for k in 0..a.n() {
        let mut coords = cur.coords().to_vec();
        while coords[k] != b.coords()[k] {
            if coords[k] < b.coords()[k] {
                coords[k] += 1;
            } else {
                coords[k] -= 1;
            }
            cur = Cell::new(&coords);
            out.push(cur);
        }
    }
}

/// Equivalent reduced staircase inside a convex 2-parameter region: steps are
/// expanded into unit steps, loops are cut at the first revisit, and runs
/// along one axis are merged.
pub fn reduce_to_staircase(p: &ZigzagPath, region: &Region) -> Result<ZigzagPath, ZigzagError> {
    let shape = region.shape();
    if shape.n() != 2 {
        return Err(ZigzagError::UnsupportedDimension(shape.n()));
    }
    if let Some(w) = region.convexity_violation() {
        return Err(ZigzagError::RegionNotConvex(w));
    }
    if let Some(c) = p.cells.iter().find(|c| !region.contains_cell(c)) {
        return Err(ZigzagError::OutsideRegion(*c));
    }
    let mut units = vec![p.start()];
    for w in p.cells.windows(2) {
        unit_staircase(&w[0], &w[1], &mut units);
    }
    let mut simple: Vec<Cell> = Vec::with_capacity(units.len());
    let mut position: HashMap<Cell, usize> = HashMap::new();
    for c in units {
        if let Some(&at) = position.get(&c) {
            for dropped in simple.drain(at + 1..) {
                position.remove(&dropped);
            }
        } else {
            position.insert(c, simple.len());
            simple.push(c);
        }
    }
    let mut cells = vec![simple[0]];
    for i in 1..simple.len() {
        let axis = single_axis(&simple[i - 1], &simple[i]);
        let extends = cells.len() >= 2 && single_axis(&cells[cells.len() - 2], &simple[i - 1]) == axis;
        if extends {
            *cells.last_mut().unwrap() = simple[i];
        } else {
            cells.push(simple[i]);
        }
    }
    Ok(ZigzagPath { cells })
}

/// `4 ×` the perimeter of the region's bounding box.
pub fn default_max_len(region: &Region) -> usize {
    let shape = region.shape();
    let perimeter: usize = (0..shape.n())
        .map(|k| {
            let coords = region.indices().iter().map(|&i| shape.coord(i, k));
            let (lo, hi) = coords.fold((usize::MAX, 0), |(lo, hi), x| (lo.min(x), hi.max(x)));
            if lo == usize::MAX {
                0
            } else {
                2 * (hi - lo + 1)
            }
        })
        .sum();
    4 * perimeter.max(1)
}

/// Breadth-first parents towards `target` over unit steps inside the region,
/// plus arbitrary comparable steps when the region is not unit-connected.
fn parents_towards(region: &Region, target: usize) -> HashMap<usize, usize> {
    let shape = region.shape();
    let jumps = region.unit_components().len() > 1;
    let mut parent = HashMap::from([(target, target)]);
    let mut queue = VecDeque::from([target]);
    while let Some(v) = queue.pop_front() {
        let mut next: Vec<usize> = shape.neighbours(v).filter(|&w| region.contains(w)).collect();
        if jumps {
            next.extend(region.indices().iter().copied().filter(|&w| w != v && shape.comparable_idx(v, w)));
        }
        for w in next {
            if let std::collections::hash_map::Entry::Vacant(e) = parent.entry(w) {
                e.insert(v);
                queue.push_back(w);
            }
        }
    }
    parent
}

/// Random zigzag path from `a` to `b` inside `region`: a bounded random walk
/// mixing unit steps and longer comparable jumps, completed by a shortest
/// path when it runs out of length.
pub fn random_zigzag(region: &Region, a: &Cell, b: &Cell, max_len: usize, seed: u64) -> Result<ZigzagPath, ZigzagError> {
    let shape = region.shape();
    for c in [a, b] {
        if !region.contains_cell(c) {
            return Err(ZigzagError::OutsideRegion(*c));
        }
    }
    let (ia, ib) = (shape.index(a), shape.index(b));
    if ia == ib {
        return Ok(ZigzagPath::single(*a));
    }
    let parent = parents_towards(region, ib);
    if !parent.contains_key(&ia) {
        return Err(ZigzagError::Unreachable(*a, *b));
    }
    let mut rng = sample::rng(seed);
    let members = region.indices();
    let mut walk = vec![ia];
    let mut cur = ia;
    while cur != ib && walk.len() < max_len {
        let roll: f64 = rng.gen();
        let next = if roll < 0.2 && shape.comparable_idx(cur, ib) {
            Some(ib)
        } else if roll < 0.55 {
            (0..8).map(|_| members[rng.gen_range(0..members.len())]).find(|&w| w != cur && shape.comparable_idx(cur, w))
        } else {
            let near: Vec<usize> = shape.neighbours(cur).filter(|&w| region.contains(w)).collect();
            near.choose(&mut rng).copied()
        };
        if let Some(n) = next {
            walk.push(n);
            cur = n;
        }
    }
    while cur != ib {
        cur = parent[&cur];
        walk.push(cur);
    }
    ZigzagPath::new(walk.into_iter().map(|i| shape.cell(i)).collect())
}

/// Two paths with the same endpoints whose transports differ.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathWitness {
    pub first: ZigzagPath,
    pub second: ZigzagPath,
    pub first_matrix: Matrix,
    pub second_matrix: Matrix,
}

/// Seed of the `k`-th independent stream derived from `seed`.
pub(crate) fn derive_seed(seed: u64, k: u64) -> u64 {
    let mut z = seed ^ k.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Samples `trials` endpoint pairs in `region` with two random zigzag paths
/// each and compares their transports. Every elementary arrow inside the
/// region must be invertible.
pub fn verify_path_independence(
    m: &PersistenceModule,
    region: &Region,
    trials: usize,
    seed: u64,
) -> Result<Option<PathWitness>, ZigzagError> {
    let shape = m.shape();
    if region.shape() != shape {
        return Err(GridError::ShapeMismatch("region lives on another grid".into()).into());
    }
    for (i, k, j) in shape.arrows() {
        if region.contains(i) && region.contains(j) && !m.arrow(i, k).expect("in range").is_invertible() {
            return Err(ZigzagError::NonInvertibleArrow(shape.cell(i), shape.cell(j)));
        }
    }
    if region.is_empty() {
        return Ok(None);
    }
    let max_len = default_max_len(region);
    let members = region.indices();
    let outcomes: Vec<Result<Option<PathWitness>, ZigzagError>> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = sample::rng(derive_seed(seed, t));
            let a = shape.cell(members[rng.gen_range(0..members.len())]);
            let b = shape.cell(members[rng.gen_range(0..members.len())]);
            let first = random_zigzag(region, &a, &b, max_len, rng.gen())?;
            let second = random_zigzag(region, &a, &b, max_len, rng.gen())?;
            let (x, y) = (transport(m, &first)?, transport(m, &second)?);
            Ok((x != y).then_some(PathWitness { first, second, first_matrix: x, second_matrix: y }))
        })
        .collect();
    for o in outcomes {
        if o.as_ref().map_or(true, Option::is_some) {
            return o;
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldSpec;
    use crate::grid::GridShape;

    fn c(x: usize, y: usize) -> Cell {
        Cell::new(&[x, y])
    }

    fn path(cells: &[(usize, usize)]) -> ZigzagPath {
        ZigzagPath::new(cells.iter().map(|&(x, y)| c(x, y)).collect()).unwrap()
    }

    /// 2×2 thin module over GF(5), horizontal arrows `h`, vertical arrows 1.
    fn pair(h: i64) -> PersistenceModule {
        let f = FieldSpec::Prime(5);
        let shape = GridShape::new(&[2, 2]).unwrap();
        PersistenceModule::from_arrows(f, shape, vec![1; 4], |_, k, _| Matrix::from_rows(f, &[&[if k == 0 { h } else { 1 }]]))
        .unwrap()
    }

    #[test]
    fn single_cell_and_back_and_forth() {
        let m = pair(2);
        assert!(transport(&m, &path(&[(0, 0)])).unwrap().is_identity());
        assert!(transport(&m, &path(&[(0, 0), (1, 0), (0, 0)])).unwrap().is_identity());
    }

    #[test]
    fn good_then_bad_over_gf5() {
        // horizontal arrows 2, vertical arrows 3: good step 2 then bad step 3
        let f = FieldSpec::Prime(5);
        let shape = GridShape::new(&[2, 2]).unwrap();
        let m = PersistenceModule::from_arrows(f, shape, vec![1; 4], |_, k, _| {
            Matrix::from_rows(f, &[&[if k == 0 { 2 } else { 3 }]])
        })
        .unwrap();
        assert!(m.validate().is_ok());
        let t = transport(&m, &path(&[(0, 1), (1, 1), (1, 0)])).unwrap();
        assert_eq!(t, Matrix::from_rows(f, &[&[4]]));
        assert_eq!(path(&[(0, 1), (1, 1), (1, 0)]).kinds(), vec![ArrowKind::Good, ArrowKind::Bad]);
    }

    #[test]
    fn bad_step_over_zero_fails() {
        let m = pair(0);
        assert_eq!(
            transport(&m, &path(&[(1, 0), (0, 0)])),
            Err(ZigzagError::NonInvertibleArrow(c(0, 0), c(1, 0)))
        );
    }

    #[test]
    fn reduction_rules() {
        let shape = GridShape::new(&[4, 4]).unwrap();
        let full = Region::full(&shape);
        let stair = path(&[(0, 0), (2, 0), (2, 3)]);
        assert_eq!(reduce_to_staircase(&stair, &full).unwrap(), stair);
        let merged = reduce_to_staircase(&path(&[(0, 0), (1, 0), (3, 0)]), &full).unwrap();
        assert_eq!(merged, path(&[(0, 0), (3, 0)]));
        let cancel = reduce_to_staircase(&path(&[(0, 0), (2, 0), (0, 0)]), &full).unwrap();
        assert_eq!(cancel, path(&[(0, 0)]));
        let hook = Region::from_cells(&shape, &[c(0, 0), c(1, 1)]);
        assert!(matches!(reduce_to_staircase(&stair, &hook), Err(ZigzagError::RegionNotConvex(_))));
    }

    #[test]
    fn reduced_paths_are_simple_and_alternate() {
        let shape = GridShape::new(&[5, 5]).unwrap();
        let full = Region::full(&shape);
        for seed in 0..200 {
            let p = random_zigzag(&full, &c(1, 4), &c(3, 0), 40, seed).unwrap();
            let r = reduce_to_staircase(&p, &full).unwrap();
            assert!(r.is_reduced() || r.steps() == 0);
            assert!(r.is_simple());
            assert_eq!((r.start(), r.end()), (p.start(), p.end()));
        }
    }

    #[test]
    fn random_paths_stay_inside() {
        let shape = GridShape::new(&[4, 3]).unwrap();
        let diag = Region::from_cells(&shape, &[c(0, 0), c(3, 2)]);
        let p = random_zigzag(&diag, &c(0, 0), &c(3, 2), 10, 3).unwrap();
        assert!(p.cells().iter().all(|x| diag.contains_cell(x)));
        let apart = Region::from_cells(&shape, &[c(3, 0), c(0, 2)]);
        assert_eq!(random_zigzag(&apart, &c(3, 0), &c(0, 2), 10, 0), Err(ZigzagError::Unreachable(c(3, 0), c(0, 2))));
        assert_eq!(random_zigzag(&apart, &c(3, 0), &c(3, 0), 10, 0).unwrap().steps(), 0);
    }

    #[test]
    fn constant_module_is_path_independent() {
        let shape = GridShape::new(&[4, 4]).unwrap();
        let m = PersistenceModule::constant(FieldSpec::Rational, shape.clone(), 2);
        assert_eq!(verify_path_independence(&m, &Region::full(&shape), 30, 1), Ok(None));
        let z = pair(0);
        assert!(matches!(
            verify_path_independence(&z, &Region::full(z.shape()), 5, 1),
            Err(ZigzagError::NonInvertibleArrow(..))
        ));
    }
}
