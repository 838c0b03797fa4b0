//! Finite grid posets `[0,s_0) × … × [0,s_{n-1})` under the product order, and
//! persistence modules on them.
//!
//! Cells are addressed either by [`Cell`] coordinates or by their linear index
//! (axis 0 fastest). Algorithms work on indices; the public surface accepts
//! both.

mod module;
mod random;
mod region;

pub use module::{PersistenceModule, ValidationReport, Violation, DEFAULT_ENTRY_BUDGET};
pub use random::random_thin_module;
pub use region::{ConvexityWitness, Region};

use std::fmt;

use thiserror::Error;

use crate::field::FieldError;

pub const MAX_AXES: usize = 3;
pub const MAX_CELLS: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GridError {
    #[error("invalid grid shape: {0}")]
    InvalidShape(String),
    #[error("cell {0} is outside the grid")]
    CellOutOfRange(Cell),
    #[error("cells {0} and {1} are not comparable")]
    NotComparable(Cell, Cell),
    #[error("support is not an interval: {0}")]
    NotInterval(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("malformed module: {0}")]
    Malformed(String),
    #[error("module needs {needed} scalar entries, budget is {budget}")]
    BudgetExceeded { needed: u64, budget: u64 },
    #[error("quantization is not monotone on the arrow {0} -> {1}")]
    NonMonotoneQuantization(Cell, Cell),
    #[error("operation does not support {0}-parameter grids")]
    UnsupportedDimension(usize),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// A grid point. Ordering is lexicographic on coordinates.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cell {
    coords: [usize; MAX_AXES],
    n: u8,
}

impl Cell {
    pub fn new(coords: &[usize]) -> Self {
        assert!(!coords.is_empty() && coords.len() <= MAX_AXES, "cells have 1..=3 coordinates");
        let mut c = [0; MAX_AXES];
        c[..coords.len()].copy_from_slice(coords);
        Cell { coords: c, n: coords.len() as u8 }
    }

    pub fn coords(&self) -> &[usize] {
        &self.coords[..self.n as usize]
    }

    pub fn n(&self) -> usize {
        self.n as usize
    }

    /// Componentwise order.
    pub fn leq(&self, other: &Cell) -> bool {
        self.n == other.n && self.coords().iter().zip(other.coords()).all(|(a, b)| a <= b)
    }

    pub fn comparable(&self, other: &Cell) -> bool {
        self.leq(other) || other.leq(self)
    }
}

impl fmt::Debug for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords().iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GridShape {
    sizes: Vec<usize>,
    strides: Vec<usize>,
    len: usize,
}

impl GridShape {
    pub fn new(sizes: &[usize]) -> Result<Self, GridError> {
        if sizes.is_empty() || sizes.len() > MAX_AXES {
            return Err(GridError::InvalidShape(format!("{} axes (expected 1..=3)", sizes.len())));
        }
        if sizes.contains(&0) {
            return Err(GridError::InvalidShape("every axis needs at least one cell".into()));
        }
        let mut strides = Vec::with_capacity(sizes.len());
        let mut len: usize = 1;
        for &s in sizes {
            strides.push(len);
            len = len.checked_mul(s).filter(|&l| l <= MAX_CELLS).ok_or_else(|| {
                GridError::InvalidShape(format!("more than {MAX_CELLS} cells"))
            })?;
        }
        Ok(GridShape { sizes: sizes.to_vec(), strides, len })
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn n(&self) -> usize {
        self.sizes.len()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn contains(&self, c: &Cell) -> bool {
        c.n() == self.n() && c.coords().iter().zip(&self.sizes).all(|(x, s)| x < s)
    }

    pub fn index(&self, c: &Cell) -> usize {
        debug_assert!(self.contains(c), "{c} outside {:?}", self.sizes);
        c.coords().iter().zip(&self.strides).map(|(x, s)| x * s).sum()
    }

    pub fn checked_index(&self, c: &Cell) -> Result<usize, GridError> {
        if self.contains(c) {
            Ok(self.index(c))
        } else {
            Err(GridError::CellOutOfRange(*c))
        }
    }

    pub fn cell(&self, idx: usize) -> Cell {
        let mut coords = [0; MAX_AXES];
        let mut rest = idx;
        for (k, &s) in self.sizes.iter().enumerate() {
            coords[k] = rest % s;
            rest /= s;
        }
        Cell { coords, n: self.n() as u8 }
    }

    pub fn coord(&self, idx: usize, axis: usize) -> usize {
        (idx / self.strides[axis]) % self.sizes[axis]
    }

    pub fn stride(&self, axis: usize) -> usize {
        self.strides[axis]
    }

    /// `idx + e_axis`, when in range.
    pub fn step(&self, idx: usize, axis: usize) -> Option<usize> {
        (self.coord(idx, axis) + 1 < self.sizes[axis]).then(|| idx + self.strides[axis])
    }

    /// `idx - e_axis`, when in range.
    pub fn step_back(&self, idx: usize, axis: usize) -> Option<usize> {
        (self.coord(idx, axis) > 0).then(|| idx - self.strides[axis])
    }

    pub fn leq_idx(&self, a: usize, b: usize) -> bool {
        (0..self.n()).all(|k| self.coord(a, k) <= self.coord(b, k))
    }

    pub fn comparable_idx(&self, a: usize, b: usize) -> bool {
        self.leq_idx(a, b) || self.leq_idx(b, a)
    }

    /// All elementary arrows `(source, axis, target)` in linear cell order.
    pub fn arrows(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        (0..self.len).flat_map(move |i| (0..self.n()).filter_map(move |k| self.step(i, k).map(|j| (i, k, j))))
    }

    /// Unit-step neighbours (both directions).
    pub fn neighbours(&self, idx: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.n()).flat_map(move |k| self.step_back(idx, k).into_iter().chain(self.step(idx, k)))
    }

    /// Cell indices sorted lexicographically by coordinates.
    pub fn lex_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.len).collect();
        order.sort_by_key(|&i| self.cell(i));
        order
    }
}

impl fmt::Display for GridShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.sizes.iter().map(|s| s.to_string()).collect();
        write!(f, "{}", parts.join("x"))
    }
}
