//! Thin modules: support quiver, splitting into connected summands, and
//! rescaling a summand to an interval module when its holonomy is trivial.

use std::collections::VecDeque;

use rand::Rng;
use thiserror::Error;

use crate::field::{FieldSpec, Matrix, Scalar};
use crate::grid::{Cell, GridError, GridShape, PersistenceModule, Region};
use crate::morphism::ModuleMap;
use crate::sample;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ThinError {
    #[error("module is not thin at {0}")]
    NotThin(Cell),
    #[error("nonzero arrow from {0} to {1} joins different components")]
    CrossComponentNonzero(Cell, Cell),
    #[error("support is not an interval: {0}")]
    NotIntervalSupport(String),
    #[error("cycle through the arrow {} -> {} has holonomy {}", .0.edge.0, .0.edge.1, .0.value)]
    NontrivialHolonomy(Box<Holonomy>),
    #[error("rescaling is not natural on the arrow from {cell} along axis {axis}")]
    NaturalityFailure { cell: Cell, axis: usize },
    #[error("the parameter m must be nonzero")]
    ZeroParameter,
    #[error(transparent)]
    Grid(#[from] GridError),
}

/// A nonzero elementary arrow between support cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuiverEdge {
    pub source: usize,
    pub target: usize,
    pub axis: usize,
    pub scalar: Scalar,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupportQuiver {
    /// Support cells in linear order.
    pub vertices: Vec<usize>,
    pub edges: Vec<QuiverEdge>,
    /// Per grid cell, the component of a support cell.
    pub component_of: Vec<Option<usize>>,
    /// Sorted cells of each component, ordered by least cell.
    pub components: Vec<Vec<usize>>,
}

fn require_thin(m: &PersistenceModule) -> Result<(), ThinError> {
    match (0..m.shape().len()).find(|&i| m.dim(i) > 1) {
        Some(i) => Err(ThinError::NotThin(m.shape().cell(i))),
        None => Ok(()),
    }
}

pub fn support_quiver(m: &PersistenceModule) -> Result<SupportQuiver, ThinError> {
    require_thin(m)?;
    let shape = m.shape();
    let vertices: Vec<usize> = (0..shape.len()).filter(|&i| m.dim(i) == 1).collect();
    let edges: Vec<QuiverEdge> = shape
        .arrows()
        .filter(|&(i, _, j)| m.dim(i) == 1 && m.dim(j) == 1)
        .filter_map(|(i, k, j)| {
            let s = m.arrow(i, k).unwrap().get(0, 0).clone();
            (!s.is_zero()).then_some(QuiverEdge { source: i, target: j, axis: k, scalar: s })
        })
        .collect();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); shape.len()];
    for e in &edges {
        adj[e.source].push(e.target);
        adj[e.target].push(e.source);
    }
    let mut component_of: Vec<Option<usize>> = vec![None; shape.len()];
    let mut components: Vec<Vec<usize>> = Vec::new();
    for start in shape.lex_order() {
        if m.dim(start) != 1 || component_of[start].is_some() {
            continue;
        }
        let id = components.len();
        component_of[start] = Some(id);
        let mut comp = vec![start];
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            for &w in &adj[v] {
                if component_of[w].is_none() {
                    component_of[w] = Some(id);
                    comp.push(w);
                    queue.push_back(w);
                }
            }
        }
        comp.sort_unstable();
        components.push(comp);
    }
    Ok(SupportQuiver { vertices, edges, component_of, components })
}

/// One thin module per component of the support quiver; their direct sum is `m`.
pub fn split_components(m: &PersistenceModule) -> Result<Vec<PersistenceModule>, ThinError> {
    let q = support_quiver(m)?;
    let shape = m.shape();
    for (i, k, j) in shape.arrows() {
        if let (Some(a), Some(b)) = (q.component_of[i], q.component_of[j]) {
            if a != b && !m.arrow(i, k).unwrap().is_zero() {
                return Err(ThinError::CrossComponentNonzero(shape.cell(i), shape.cell(j)));
            }
        }
    }
    Ok(q.components.iter().map(|c| m.restrict(&Region::from_indices(shape, c.iter().copied()))).collect())
}

/// Zigzag-connected and order-convex.
pub fn check_interval_support(cells: &[Cell], shape: &GridShape) -> bool {
    if cells.iter().any(|c| !shape.contains(c)) {
        return false;
    }
    let r = Region::from_cells(shape, cells);
    !r.is_empty() && r.is_convex() && r.is_zigzag_connected()
}

/// Comparable pairs inside a component checked exhaustively up to this size.
pub const EXHAUSTIVE_COMPONENT: usize = 64;

/// A comparable pair `a ≤ b` in `component` with `M(a ≤ b) = 0`, if one is
/// found among `trials` random pairs (all pairs for small components).
pub fn check_zigzag_nonvanishing(m: &PersistenceModule, component: &[usize], trials: usize, seed: u64) -> Option<(Cell, Cell)> {
    let shape = m.shape();
    let vanishes = |a: usize, b: usize| shape.leq_idx(a, b) && m.map_between_idx(a, b).is_zero();
    let hit = if component.len() <= EXHAUSTIVE_COMPONENT {
        component.iter().flat_map(|&a| component.iter().map(move |&b| (a, b))).find(|&(a, b)| vanishes(a, b))
    } else {
        let mut rng = sample::rng(seed);
        (0..trials)
            .map(|_| (component[rng.gen_range(0..component.len())], component[rng.gen_range(0..component.len())]))
            .map(|(a, b)| if shape.leq_idx(a, b) { (a, b) } else { (b, a) })
            .find(|&(a, b)| vanishes(a, b))
    };
    hit.map(|(a, b)| (shape.cell(a), shape.cell(b)))
}

/// The cycle closed by a non-tree edge and the product of its scalars,
/// inverted on edges traversed backwards.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Holonomy {
    pub edge: (Cell, Cell),
    /// Starts at the edge source, crosses the edge, returns along the tree.
    pub cycle: Vec<Cell>,
    pub value: Scalar,
}

/// Spanning tree of a component (unit-scalar edges preferred) with the
/// potential `s(root) = 1`, `s(target) = λ·s(source)` along tree edges.
struct Tree {
    parent: Vec<Option<usize>>,
    potential: Vec<Option<Scalar>>,
    non_tree: Vec<usize>,
}

fn spanning_tree(f: FieldSpec, shape: &GridShape, q: &SupportQuiver, component: usize) -> Tree {
    let cells = &q.components[component];
    let root = *cells.iter().min_by_key(|&&i| shape.cell(i)).expect("nonempty component");
    let mut order: Vec<usize> = (0..q.edges.len()).filter(|&e| q.component_of[q.edges[e].source] == Some(component)).collect();
    order.sort_by_key(|&e| !q.edges[e].scalar.is_one());
    let mut uf: Vec<usize> = (0..shape.len()).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let mut tree_adj: Vec<Vec<usize>> = vec![Vec::new(); shape.len()];
    let mut non_tree = Vec::new();
    for e in order {
        let (a, b) = (find(&mut uf, q.edges[e].source), find(&mut uf, q.edges[e].target));
        if a == b {
            non_tree.push(e);
        } else {
            uf[a] = b;
            tree_adj[q.edges[e].source].push(e);
            tree_adj[q.edges[e].target].push(e);
        }
    }
    non_tree.sort_unstable();
    let mut parent = vec![None; shape.len()];
    let mut potential: Vec<Option<Scalar>> = vec![None; shape.len()];
    potential[root] = Some(f.one());
    let mut queue = VecDeque::from([root]);
    while let Some(v) = queue.pop_front() {
        for &e in &tree_adj[v] {
            let edge = &q.edges[e];
            let w = if edge.source == v { edge.target } else { edge.source };
            if potential[w].is_some() {
                continue;
            }
            let sv = potential[v].as_ref().unwrap();
            potential[w] = Some(if edge.source == v {
                f.mul(&edge.scalar, sv)
            } else {
                f.div(sv, &edge.scalar).expect("edge scalars are nonzero")
            });
            parent[w] = Some(v);
            queue.push_back(w);
        }
    }
    Tree { parent, potential, non_tree }
}

fn tree_path(tree: &Tree, from: usize, to: usize) -> Vec<usize> {
    let up = |mut v: usize| {
        let mut path = vec![v];
        while let Some(p) = tree.parent[v] {
            path.push(p);
            v = p;
        }
        path
    };
    let (a, b) = (up(from), up(to));
    let common = a.iter().find(|v| b.contains(v)).copied().expect("same tree");
    let mut path: Vec<usize> = a.into_iter().take_while(|&v| v != common).collect();
    path.push(common);
    let tail: Vec<usize> = b.into_iter().take_while(|&v| v != common).collect();
    path.extend(tail.into_iter().rev());
    path
}

/// Nontrivial cycle holonomies of one component, one per offending non-tree edge.
pub fn holonomy_obstruction(m: &PersistenceModule, q: &SupportQuiver, component: usize) -> Vec<Holonomy> {
    let f = m.field();
    let shape = m.shape();
    let tree = spanning_tree(f, shape, q, component);
    tree.non_tree
        .iter()
        .filter_map(|&e| {
            let edge = &q.edges[e];
            let su = tree.potential[edge.source].as_ref().unwrap();
            let sv = tree.potential[edge.target].as_ref().unwrap();
            let value = f.div(&f.mul(&edge.scalar, su), sv).expect("potentials are nonzero");
            (!value.is_one()).then(|| {
                let mut cycle = vec![shape.cell(edge.source)];
                cycle.extend(tree_path(&tree, edge.target, edge.source).into_iter().map(|v| shape.cell(v)));
                Holonomy { edge: (shape.cell(edge.source), shape.cell(edge.target)), cycle, value }
            })
        })
        .collect()
}

/// `α : F_I → M` with `α_b` the transport scalar from the least support cell.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntervalIso {
    pub interval: PersistenceModule,
    pub alpha: ModuleMap,
}

/// Exhibits a thin module with connected interval support and trivial
/// holonomy as isomorphic to the interval module on its support.
pub fn iso_to_interval(m: &PersistenceModule) -> Result<IntervalIso, ThinError> {
    let q = support_quiver(m)?;
    let shape = m.shape();
    if q.components.len() != 1 {
        return Err(ThinError::NotIntervalSupport(format!("{} components", q.components.len())));
    }
    let support = m.support();
    if let Some(w) = support.convexity_violation() {
        return Err(ThinError::NotIntervalSupport(format!("{} <= {} <= {} with the middle missing", w.lower, w.middle, w.upper)));
    }
    if let Some(h) = holonomy_obstruction(m, &q, 0).into_iter().next() {
        return Err(ThinError::NontrivialHolonomy(Box::new(h)));
    }
    let f = m.field();
    let tree = spanning_tree(f, shape, &q, 0);
    let interval = PersistenceModule::interval_module(f, shape.clone(), &support)?;
    let alpha = ModuleMap::new(
        (0..shape.len())
            .map(|i| match &tree.potential[i] {
                Some(s) => Matrix::scalar(f, s.clone()),
                None => Matrix::zeros(f, 0, 0),
            })
            .collect(),
    );
    for (i, k, j) in shape.arrows() {
        let lhs = m.arrow(i, k).unwrap().mul(alpha.at(i)).expect("dims agree");
        let rhs = alpha.at(j).mul(interval.arrow(i, k).unwrap()).expect("dims agree");
        if lhs != rhs {
            return Err(ThinError::NaturalityFailure { cell: shape.cell(i), axis: k });
        }
    }
    debug_assert!(alpha.is_invertible_everywhere());
    Ok(IntervalIso { interval, alpha })
}

/// The 3-parameter module on `Q = {x ∈ {0,1}³ : 1 ≤ x₀+x₁+x₂ ≤ 2}` with every
/// arrow inside `Q` the identity except `(0,1,0) → (1,1,0)`, which is `m`.
pub fn ex_dim3(field: FieldSpec, m: &Scalar) -> Result<PersistenceModule, ThinError> {
    if m.is_zero() {
        return Err(ThinError::ZeroParameter);
    }
    let shape = GridShape::new(&[2, 2, 2])?;
    let in_q = |i: usize| (1..=2).contains(&shape.cell(i).coords().iter().sum::<usize>());
    let dims: Vec<usize> = (0..shape.len()).map(|i| usize::from(in_q(i))).collect();
    let special = (shape.index(&Cell::new(&[0, 1, 0])), shape.index(&Cell::new(&[1, 1, 0])));
    PersistenceModule::from_arrows(field, shape.clone(), dims.clone(), |i, _, j| {
        if dims[i] == 0 || dims[j] == 0 {
            Matrix::zeros(field, dims[j], dims[i])
        } else if (i, j) == special {
            Matrix::scalar(field, m.clone())
        } else {
            Matrix::identity(field, 1)
        }
    })
    .map_err(Into::into)
}

/// Verdicts for one summand.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentReport {
    pub cells: Vec<Cell>,
    pub interval_support: bool,
    pub vanishing_pair: Option<(Cell, Cell)>,
    pub holonomy: Vec<Holonomy>,
    /// `(cell, α scalar)` when the rescaling to an interval module succeeded.
    pub alpha: Option<Vec<(Cell, Scalar)>>,
}

impl ComponentReport {
    pub fn is_interval_summand(&self) -> bool {
        self.interval_support && self.vanishing_pair.is_none() && self.holonomy.is_empty() && self.alpha.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecompositionReport {
    pub components: Vec<ComponentReport>,
}

impl DecompositionReport {
    pub fn all_intervals(&self) -> bool {
        self.components.iter().all(ComponentReport::is_interval_summand)
    }
}

/// Runs every check on every summand of a thin module.
pub fn decompose(m: &PersistenceModule, trials: usize, seed: u64) -> Result<DecompositionReport, ThinError> {
    let q = support_quiver(m)?;
    let shape = m.shape();
    let summands = split_components(m)?;
    let components = q
        .components
        .iter()
        .zip(&summands)
        .enumerate()
        .map(|(id, (cells, summand))| {
            let as_cells: Vec<Cell> = cells.iter().map(|&i| shape.cell(i)).collect();
            let alpha = iso_to_interval(summand)
                .ok()
                .map(|iso| cells.iter().map(|&i| (shape.cell(i), iso.alpha.at(i).get(0, 0).clone())).collect());
            ComponentReport {
                interval_support: check_interval_support(&as_cells, shape),
                vanishing_pair: check_zigzag_nonvanishing(m, cells, trials, seed ^ id as u64),
                holonomy: holonomy_obstruction(m, &q, id),
                alpha,
                cells: as_cells,
            }
        })
        .collect();
    Ok(DecompositionReport { components })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::random_thin_module;
    use crate::hom::end_dim;

    const Q: FieldSpec = FieldSpec::Rational;

    fn cells(v: &[[usize; 2]]) -> Vec<Cell> {
        v.iter().map(|c| Cell::new(c)).collect()
    }

    #[test]
    fn interval_module_is_one_interval_summand() {
        let shape = GridShape::new(&[3, 3]).unwrap();
        let r = Region::from_cells(&shape, &cells(&[[0, 0], [1, 0], [0, 1], [1, 1], [0, 2]]));
        let m = PersistenceModule::interval_module(Q, shape, &r).unwrap();
        assert_eq!(split_components(&m).unwrap(), vec![m.clone()]);
        let iso = iso_to_interval(&m).unwrap();
        assert_eq!(iso.interval, m);
        assert!(iso.alpha.mats().iter().all(|a| a.rows() == 0 || a.is_identity()));
        assert!(decompose(&m, 10, 0).unwrap().all_intervals());
    }

    #[test]
    fn zero_arrow_splits_support() {
        let shape = GridShape::new(&[2, 1]).unwrap();
        let m = PersistenceModule::from_arrows(Q, shape, vec![1, 1], |_, _, _| Matrix::zeros(Q, 1, 1)).unwrap();
        let parts = split_components(&m).unwrap();
        assert_eq!(parts.len(), 2);
        assert_eq!(parts[0].direct_sum(&parts[1]).unwrap(), m);
    }

    #[test]
    fn interval_support_checks() {
        let shape = GridShape::new(&[3, 3]).unwrap();
        assert!(check_interval_support(&cells(&[[0, 0], [1, 0], [0, 1], [1, 1]]), &shape));
        assert!(!check_interval_support(&cells(&[[0, 0], [1, 1]]), &shape));
        assert!(check_interval_support(&cells(&[[0, 2], [1, 2], [1, 1], [2, 1], [2, 0]]), &shape));
    }

    #[test]
    fn random_thin_components_are_intervals() {
        for seed in 0..40 {
            for f in [FieldSpec::Prime(5), Q] {
                let m = random_thin_module(f, GridShape::new(&[6, 6]).unwrap(), 0.75, seed).unwrap();
                let report = decompose(&m, 50, seed).unwrap();
                assert!(report.all_intervals(), "seed {seed} {f}: {report:?}");
                let parts = split_components(&m).unwrap();
                let sum = parts.iter().skip(1).fold(parts.first().cloned().unwrap_or_else(|| PersistenceModule::zero(f, m.shape().clone())), |acc, p| acc.direct_sum(p).unwrap());
                assert_eq!(sum, m);
            }
        }
    }

    #[test]
    fn ex_dim3_holonomy() {
        for f in [Q, FieldSpec::Prime(5)] {
            let one = ex_dim3(f, &f.one()).unwrap();
            assert!(one.validate().is_ok());
            let iso = iso_to_interval(&one).unwrap();
            assert!(iso.alpha.is_isomorphism(&iso.interval, &one));
            let two = ex_dim3(f, &f.from_i64(2)).unwrap();
            assert!(two.validate().is_ok());
            assert!(two.is_thin());
            assert_eq!(end_dim(&two), 1);
            let q = support_quiver(&two).unwrap();
            assert_eq!(q.components.len(), 1);
            let h = holonomy_obstruction(&two, &q, 0);
            assert_eq!(h.len(), 1);
            assert_eq!(h[0].value, f.from_i64(2));
            assert_eq!(h[0].cycle.first(), h[0].cycle.last());
            assert!(matches!(iso_to_interval(&two), Err(ThinError::NontrivialHolonomy(_))));
            assert_eq!(check_zigzag_nonvanishing(&two, &q.components[0], 10, 0), None);
        }
        assert_eq!(ex_dim3(Q, &Q.zero()), Err(ThinError::ZeroParameter));
    }

    #[test]
    fn not_thin_rejected() {
        let shape = GridShape::new(&[2, 2]).unwrap();
        let m = PersistenceModule::constant(Q, shape, 2);
        assert_eq!(support_quiver(&m), Err(ThinError::NotThin(Cell::new(&[0, 0]))));
    }
}
