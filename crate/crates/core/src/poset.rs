//! Finite posets given by generating relations, modules over them, and
//! pullback of such modules along a monotone quantization of a grid.

use std::collections::HashMap;

use thiserror::Error;

use crate::field::{FieldSpec, Matrix};
use crate::grid::{GridError, GridShape, PersistenceModule};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PosetError {
    #[error("relation is not antisymmetric: {p} <= {q} <= {p}")]
    Antisymmetry { p: usize, q: usize },
    #[error("malformed poset module: {0}")]
    Malformed(String),
    #[error("paths from {p} to {q} compose to different maps")]
    Functoriality { p: usize, q: usize, first: Matrix, second: Matrix },
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct BitSet {
    words: Vec<u64>,
}

impl BitSet {
    fn new(n: usize) -> Self {
        BitSet { words: vec![0; n.div_ceil(64)] }
    }

    fn insert(&mut self, i: usize) -> bool {
        let (w, b) = (i / 64, 1u64 << (i % 64));
        let fresh = self.words[w] & b == 0;
        self.words[w] |= b;
        fresh
    }

    fn contains(&self, i: usize) -> bool {
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(w, &bits)| {
            (0..64).filter(move |b| bits >> b & 1 == 1).map(move |b| w * 64 + b)
        })
    }
}

/// A partial order on `0..len`, stored as its reflexive-transitive closure
/// plus the cover (Hasse) edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FinitePoset {
    len: usize,
    up: Vec<BitSet>,
    hasse: Vec<(usize, usize)>,
}

impl FinitePoset {
    /// Transitive closure of `relation`; fails when the closure identifies two
    /// distinct elements.
    pub fn from_relation(len: usize, relation: impl IntoIterator<Item = (usize, usize)>) -> Result<Self, PosetError> {
        let mut succ: Vec<Vec<usize>> = vec![Vec::new(); len];
        for (p, q) in relation {
            if p >= len || q >= len {
                return Err(PosetError::Malformed(format!("relation {p} -> {q} outside 0..{len}")));
            }
            if p != q {
                succ[p].push(q);
            }
        }
        let mut up: Vec<BitSet> = Vec::with_capacity(len);
        for p in 0..len {
            let mut seen = BitSet::new(len);
            seen.insert(p);
            let mut stack = vec![p];
            while let Some(x) = stack.pop() {
                for &y in &succ[x] {
                    if seen.insert(y) {
                        stack.push(y);
                    }
                }
            }
            up.push(seen);
        }
        for p in 0..len {
            for q in up[p].iter() {
                if q != p && up[q].contains(p) {
                    return Err(PosetError::Antisymmetry { p: p.min(q), q: p.max(q) });
                }
            }
        }
        let mut hasse = Vec::new();
        for p in 0..len {
            let mut covered = BitSet::new(len);
            for r in up[p].iter().filter(|&r| r != p) {
                for s in up[r].iter().filter(|&s| s != r) {
                    covered.insert(s);
                }
            }
            for q in up[p].iter() {
                if q != p && !covered.contains(q) {
                    hasse.push((p, q));
                }
            }
        }
        hasse.sort_unstable();
        Ok(FinitePoset { len, up, hasse })
    }

    /// Poset whose cover relation must be exactly `hasse`.
    pub fn from_hasse(len: usize, hasse: &[(usize, usize)]) -> Result<Self, PosetError> {
        let poset = Self::from_relation(len, hasse.iter().copied())?;
        let mut given = hasse.to_vec();
        given.sort_unstable();
        given.dedup();
        if given != poset.hasse {
            return Err(PosetError::Malformed("listed edges are not the cover relation of their closure".into()));
        }
        Ok(poset)
    }

    pub fn chain(len: usize) -> Self {
        Self::from_relation(len, (1..len).map(|i| (i - 1, i))).expect("chains are posets")
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn leq(&self, p: usize, q: usize) -> bool {
        self.up[p].contains(q)
    }

    pub fn hasse(&self) -> &[(usize, usize)] {
        &self.hasse
    }

    /// Elements `q ≥ p`, increasing.
    pub fn above(&self, p: usize) -> Vec<usize> {
        self.up[p].iter().collect()
    }

    /// A linear extension (Kahn's algorithm, smallest index first).
    pub fn linear_extension(&self) -> Vec<usize> {
        let mut indeg = vec![0usize; self.len];
        for &(_, q) in &self.hasse {
            indeg[q] += 1;
        }
        let mut ready: std::collections::BTreeSet<usize> = (0..self.len).filter(|&p| indeg[p] == 0).collect();
        let mut order = Vec::with_capacity(self.len);
        while let Some(p) = ready.pop_first() {
            order.push(p);
            for &(a, q) in &self.hasse {
                if a == p {
                    indeg[q] -= 1;
                    if indeg[q] == 0 {
                        ready.insert(q);
                    }
                }
            }
        }
        order
    }

    /// Number of related pairs `p ≤ q`, including `p = p`.
    pub fn relation_count(&self) -> usize {
        self.up.iter().map(|s| s.iter().count()).sum()
    }
}

/// A module over a finite poset: a space per element and a matrix per cover edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PosetModule {
    field: FieldSpec,
    poset: FinitePoset,
    dims: Vec<usize>,
    /// aligned with `poset.hasse()`
    mats: Vec<Matrix>,
}

impl PosetModule {
    /// Checks matrix shapes; functoriality is checked separately.
    pub fn new(field: FieldSpec, poset: FinitePoset, dims: Vec<usize>, mats: Vec<Matrix>) -> Result<Self, PosetError> {
        if dims.len() != poset.len() {
            return Err(PosetError::Malformed(format!("{} dims for {} elements", dims.len(), poset.len())));
        }
        if mats.len() != poset.hasse().len() {
            return Err(PosetError::Malformed(format!("{} matrices for {} cover edges", mats.len(), poset.hasse().len())));
        }
        for (&(p, q), m) in poset.hasse().iter().zip(&mats) {
            if m.field() != field {
                return Err(PosetError::Malformed(format!("edge {p}->{q} over {}", m.field())));
            }
            if m.shape() != (dims[q], dims[p]) {
                return Err(PosetError::Malformed(format!(
                    "edge {p}->{q} is {:?}, expected {:?}",
                    m.shape(),
                    (dims[q], dims[p])
                )));
            }
        }
        Ok(PosetModule { field, poset, dims, mats })
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn poset(&self) -> &FinitePoset {
        &self.poset
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn edge_matrices(&self) -> &[Matrix] {
        &self.mats
    }

    pub fn edge_matrix(&self, p: usize, q: usize) -> Option<&Matrix> {
        let pos = self.poset.hasse().binary_search(&(p, q)).ok()?;
        Some(&self.mats[pos])
    }

    pub fn with_edge_matrix(&self, p: usize, q: usize, m: Matrix) -> Result<Self, PosetError> {
        let pos = self
            .poset
            .hasse()
            .binary_search(&(p, q))
            .map_err(|_| PosetError::Malformed(format!("{p}->{q} is not a cover edge")))?;
        let mut mats = self.mats.clone();
        mats[pos] = m;
        Self::new(self.field, self.poset.clone(), self.dims.clone(), mats)
    }

    /// `H(p ≤ q)` for every `q ≥ p` (None elsewhere), composing along the
    /// first cover path found. When `check` is set, every other path is
    /// compared against it.
    fn maps_from(&self, p: usize, order: &[usize], check: bool) -> Result<Vec<Option<Matrix>>, PosetError> {
        let mut comp: Vec<Option<Matrix>> = vec![None; self.poset.len()];
        comp[p] = Some(Matrix::identity(self.field, self.dims[p]));
        for &q in order {
            if q == p || !self.poset.leq(p, q) {
                continue;
            }
            for (&(r, t), m) in self.poset.hasse().iter().zip(&self.mats) {
                if t != q {
                    continue;
                }
                let Some(base) = comp[r].as_ref() else { continue };
                let candidate = m.mul(base).expect("shapes checked on construction");
                match &comp[q] {
                    None => comp[q] = Some(candidate),
                    Some(first) if check && *first != candidate => {
                        return Err(PosetError::Functoriality { p, q, first: first.clone(), second: candidate });
                    }
                    Some(_) => {}
                }
                if !check {
                    break;
                }
            }
        }
        Ok(comp)
    }

    /// All cover paths between related elements compose to the same map.
    pub fn check_functorial(&self) -> Result<(), PosetError> {
        let order = self.poset.linear_extension();
        for p in 0..self.poset.len() {
            self.maps_from(p, &order, true)?;
        }
        Ok(())
    }

    /// `H(p ≤ q)`, or `None` when `p ≰ q`.
    pub fn map(&self, p: usize, q: usize) -> Option<Matrix> {
        if !self.poset.leq(p, q) {
            return None;
        }
        let order = self.poset.linear_extension();
        self.maps_from(p, &order, false).ok()?.swap_remove(q)
    }

    /// Pullback along `quant`: the grid module `H ∘ quant`.
    pub fn inflate(&self, quant: &Quantization) -> Result<PersistenceModule, GridError> {
        inflate(self, quant)
    }
}

/// Monotone assignment of grid cells to poset elements.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Quantization {
    shape: GridShape,
    map: Vec<usize>,
}

impl Quantization {
    pub fn new(shape: GridShape, map: Vec<usize>) -> Result<Self, GridError> {
        if map.len() != shape.len() {
            return Err(GridError::Malformed(format!("{} entries for {} cells", map.len(), shape.len())));
        }
        Ok(Quantization { shape, map })
    }

    pub fn shape(&self) -> &GridShape {
        &self.shape
    }

    pub fn element(&self, idx: usize) -> usize {
        self.map[idx]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.map
    }

    /// First elementary arrow whose endpoints are sent to unrelated or
    /// reversed elements.
    pub fn monotonicity_violation(&self, poset: &FinitePoset) -> Option<(usize, usize)> {
        self.shape.arrows().find(|&(i, _, j)| !poset.leq(self.map[i], self.map[j])).map(|(i, _, j)| (i, j))
    }
}

/// Pullback of `h` along `quant`. Arrows inside one fibre are identities.
pub fn inflate(h: &PosetModule, quant: &Quantization) -> Result<PersistenceModule, GridError> {
    let shape = quant.shape().clone();
    if let Some(&bad) = quant.map.iter().find(|&&e| e >= h.poset.len()) {
        return Err(GridError::Malformed(format!("quantization hits element {bad} outside the poset")));
    }
    if let Some((i, j)) = quant.monotonicity_violation(&h.poset) {
        return Err(GridError::NonMonotoneQuantization(shape.cell(i), shape.cell(j)));
    }
    let order = h.poset.linear_extension();
    let mut cache: HashMap<usize, Vec<Option<Matrix>>> = HashMap::new();
    let dims: Vec<usize> = quant.map.iter().map(|&p| h.dims[p]).collect();
    let field = h.field;
    PersistenceModule::from_arrows(field, shape, dims, |i, _, j| {
        let (p, q) = (quant.map[i], quant.map[j]);
        if p == q {
            return Matrix::identity(field, h.dims[p]);
        }
        let row = cache.entry(p).or_insert_with(|| h.maps_from(p, &order, false).expect("unchecked"));
        row[q].clone().expect("monotone")
    })
}
