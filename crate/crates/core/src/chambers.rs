//! Isotopy subdivisions of 2-parameter grid modules into convex chambers,
//! the chamber poset, and condensation of a module to a module over that
//! poset.

use std::collections::VecDeque;

use rand::Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::field::{FieldSpec, Matrix};
use crate::generate::random_poset_module;
use crate::grid::{Cell, ConvexityWitness, GridError, GridShape, PersistenceModule, Region};
use crate::hom::hom_space;
use crate::morphism::ModuleMap;
use crate::poset::{FinitePoset, PosetError, PosetModule, Quantization};
use crate::sample;
use crate::zigzag::{derive_seed, step_matrix, ZigzagError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChamberError {
    #[error("chamber operations need a 2-parameter grid, got {0}")]
    UnsupportedDimension(usize),
    #[error("chamber {chamber} is not convex: {} <= {} <= {}", .witness.lower, .witness.middle, .witness.upper)]
    NonConvexChamber { chamber: usize, witness: ConvexityWitness },
    #[error("chamber {chamber} is not zigzag-connected")]
    DisconnectedChamber { chamber: usize },
    #[error("chamber {chamber} contains {a} <= {b} mapped by a non-isomorphism")]
    NonIsoWithinChamber { chamber: usize, a: Cell, b: Cell },
    #[error("chambers {p} and {q} lie below each other")]
    AntisymmetryViolation { p: usize, q: usize, witnesses: Vec<(Cell, Cell)> },
    #[error("no cell of chamber {from} lies below a cell of chamber {to}")]
    NoComparableWitness { from: usize, to: usize },
    #[error("witnesses {:?} and {:?} induce different morphisms {} -> {}", .0.first, .0.second, .0.from, .0.to)]
    WellDefinednessFailure(Box<Incoherence>),
    #[error("cover paths from {p} to {q} compose differently")]
    FunctorialityFailure { p: usize, q: usize, first: Matrix, second: Matrix },
    #[error("naturality fails on the arrow from {cell} along axis {axis}")]
    NaturalityFailure { cell: Cell, axis: usize },
    #[error("malformed subdivision: {0}")]
    Malformed(String),
    #[error(transparent)]
    Zigzag(#[from] ZigzagError),
    #[error(transparent)]
    Grid(#[from] GridError),
}

/// Two comparable witness pairs between the same chambers whose canonical
/// morphisms differ.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Incoherence {
    pub from: usize,
    pub to: usize,
    pub first: (Cell, Cell),
    pub second: (Cell, Cell),
    pub first_matrix: Matrix,
    pub second_matrix: Matrix,
}

impl From<PosetError> for ChamberError {
    fn from(e: PosetError) -> Self {
        match e {
            PosetError::Functoriality { p, q, first, second } => ChamberError::FunctorialityFailure { p, q, first, second },
            other => ChamberError::Malformed(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chamber {
    pub id: usize,
    /// Member cells in linear order.
    pub cells: Vec<usize>,
    /// Lexicographically least member.
    pub basepoint: usize,
}

/// A partition of the grid into chambers `0..len()`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subdivision {
    shape: GridShape,
    chambers: Vec<Chamber>,
    cell_to_chamber: Vec<usize>,
}

impl Subdivision {
    /// Uses the labels as chamber ids; they must be exactly `0..k`.
    pub fn from_assignment(shape: GridShape, labels: Vec<usize>) -> Result<Self, ChamberError> {
        if labels.len() != shape.len() {
            return Err(ChamberError::Malformed(format!("{} labels for {} cells", labels.len(), shape.len())));
        }
        let k = labels.iter().copied().max().map_or(0, |m| m + 1);
        let mut cells = vec![Vec::new(); k];
        for (i, &l) in labels.iter().enumerate() {
            cells[l].push(i);
        }
        if let Some(id) = cells.iter().position(Vec::is_empty) {
            return Err(ChamberError::Malformed(format!("chamber {id} is empty")));
        }
        let chambers = cells
            .into_iter()
            .enumerate()
            .map(|(id, cells)| {
                let basepoint = *cells.iter().min_by_key(|&&i| shape.cell(i)).expect("nonempty");
                Chamber { id, cells, basepoint }
            })
            .collect();
        Ok(Subdivision { shape, chambers, cell_to_chamber: labels })
    }

    /// Renumbers arbitrary labels so ids increase with the basepoint.
    pub fn canonical(shape: GridShape, labels: &[usize]) -> Result<Self, ChamberError> {
        if labels.len() != shape.len() {
            return Err(ChamberError::Malformed(format!("{} labels for {} cells", labels.len(), shape.len())));
        }
        let mut first: Vec<(Cell, usize)> = Vec::new();
        let mut seen = std::collections::HashMap::new();
        for i in shape.lex_order() {
            seen.entry(labels[i]).or_insert_with(|| {
                first.push((shape.cell(i), labels[i]));
            });
        }
        let renumber: std::collections::HashMap<usize, usize> =
            first.iter().enumerate().map(|(id, &(_, l))| (l, id)).collect();
        Self::from_assignment(shape, labels.iter().map(|l| renumber[l]).collect())
    }

    pub fn shape(&self) -> &GridShape {
        &self.shape
    }

    pub fn chambers(&self) -> &[Chamber] {
        &self.chambers
    }

    pub fn len(&self) -> usize {
        self.chambers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chambers.is_empty()
    }

    pub fn chamber_of(&self, idx: usize) -> usize {
        self.cell_to_chamber[idx]
    }

    pub fn assignment(&self) -> &[usize] {
        &self.cell_to_chamber
    }

    pub fn region(&self, id: usize) -> Region {
        Region::from_indices(&self.shape, self.chambers[id].cells.iter().copied())
    }

    /// Chamber invariants for `m`: convex, zigzag-connected, and every
    /// elementary arrow inside a chamber invertible.
    pub fn check(&self, m: &PersistenceModule) -> Result<(), ChamberError> {
        if m.shape() != &self.shape {
            return Err(GridError::ShapeMismatch("subdivision lives on another grid".into()).into());
        }
        for c in &self.chambers {
            let r = self.region(c.id);
            if let Some(witness) = r.convexity_violation() {
                return Err(ChamberError::NonConvexChamber { chamber: c.id, witness });
            }
            if !r.is_zigzag_connected() {
                return Err(ChamberError::DisconnectedChamber { chamber: c.id });
            }
        }
        self.check_isomorphisms(m)
    }

    fn check_isomorphisms(&self, m: &PersistenceModule) -> Result<(), ChamberError> {
        for (i, k, j) in self.shape.arrows() {
            let chamber = self.cell_to_chamber[i];
            if chamber == self.cell_to_chamber[j] && !m.arrow(i, k).expect("in range").is_invertible() {
                return Err(ChamberError::NonIsoWithinChamber {
                    chamber,
                    a: self.shape.cell(i),
                    b: self.shape.cell(j),
                });
            }
        }
        Ok(())
    }
}

fn require_planar(shape: &GridShape) -> Result<(), ChamberError> {
    if shape.n() != 2 {
        return Err(ChamberError::UnsupportedDimension(shape.n()));
    }
    Ok(())
}

/// Components of the graph of invertible elementary arrows, checked to be
/// convex and free of non-isomorphisms.
pub fn detect_isotopy_subdivision(m: &PersistenceModule) -> Result<Subdivision, ChamberError> {
    let shape = m.shape();
    require_planar(shape)?;
    let mut parent: Vec<usize> = (0..shape.len()).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for (i, k, j) in shape.arrows() {
        if m.arrow(i, k).expect("in range").is_invertible() {
            let (a, b) = (find(&mut parent, i), find(&mut parent, j));
            parent[a] = b;
        }
    }
    let labels: Vec<usize> = (0..shape.len()).map(|i| find(&mut parent, i)).collect();
    let s = Subdivision::canonical(shape.clone(), &labels)?;
    for c in &s.chambers {
        if let Some(witness) = s.region(c.id).convexity_violation() {
            return Err(ChamberError::NonConvexChamber { chamber: c.id, witness });
        }
    }
    s.check_isomorphisms(m)?;
    Ok(s)
}

/// Lexicographically first `(a, b)` with `a ∈ J_p`, `b ∈ J_q`, `a ≤ b`.
fn first_witness(s: &Subdivision, p: usize, q: usize) -> Option<(usize, usize)> {
    let shape = &s.shape;
    let below_q = s.region(q).down_closure();
    let a = s.chambers[p].cells.iter().copied().filter(|&a| below_q[a]).min_by_key(|&a| shape.cell(a))?;
    let b = s.chambers[q].cells.iter().copied().filter(|&b| shape.leq_idx(a, b)).min_by_key(|&b| shape.cell(b))?;
    Some((a, b))
}

/// Transitive closure of "some cell of `J_p` lies below some cell of `J_q`".
pub fn chamber_poset(s: &Subdivision) -> Result<FinitePoset, ChamberError> {
    require_planar(&s.shape)?;
    let mut relation = Vec::new();
    for c in &s.chambers {
        let up = s.region(c.id).up_closure();
        let mut hit = vec![false; s.len()];
        for (i, &u) in up.iter().enumerate() {
            if u {
                hit[s.cell_to_chamber[i]] = true;
            }
        }
        relation.extend((0..s.len()).filter(|&q| hit[q] && q != c.id).map(|q| (c.id, q)));
    }
    FinitePoset::from_relation(s.len(), relation).map_err(|e| match e {
        PosetError::Antisymmetry { p, q } => {
            let cell = |(a, b): (usize, usize)| (s.shape.cell(a), s.shape.cell(b));
            let witnesses = [first_witness(s, p, q), first_witness(s, q, p)].into_iter().flatten().map(cell).collect();
            ChamberError::AntisymmetryViolation { p, q, witnesses }
        }
        other => other.into(),
    })
}

/// The quantization sending each cell to its chamber.
pub fn quantization_f(s: &Subdivision, poset: &FinitePoset) -> Quantization {
    let q = Quantization::new(s.shape.clone(), s.cell_to_chamber.clone()).expect("one label per cell");
    assert!(q.monotonicity_violation(poset).is_none(), "chamber poset must contain every arrow");
    q
}

/// `lim_J M`, represented by the space at the basepoint, with the legs
/// `σ_c : M(basepoint) → M(c)` aligned with the chamber's cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChamberLimit {
    pub chamber: usize,
    pub dim: usize,
    pub legs: Vec<Matrix>,
}

impl ChamberLimit {
    pub fn leg(&self, s: &Subdivision, idx: usize) -> &Matrix {
        let pos = s.chambers[self.chamber].cells.binary_search(&idx).expect("cell in chamber");
        &self.legs[pos]
    }
}

/// Legs by breadth-first transport from the basepoint (unit steps, plus
/// comparable jumps when the chamber is not unit-connected). Pieces that no
/// zigzag reaches are tied to the basepoint by the identity of equal dims.
pub fn limit_over_chamber(m: &PersistenceModule, s: &Subdivision, id: usize) -> Result<ChamberLimit, ChamberError> {
    let shape = m.shape();
    let chamber = &s.chambers[id];
    let region = s.region(id);
    let jumps = region.unit_components().len() > 1;
    let dim = m.dim(chamber.basepoint);
    let mut legs: Vec<Option<Matrix>> = vec![None; chamber.cells.len()];
    let pos = |i: usize| chamber.cells.binary_search(&i).expect("cell in chamber");
    let mut roots: Vec<usize> = chamber.cells.clone();
    roots.sort_by_key(|&i| (i != chamber.basepoint, shape.cell(i)));
    for root in roots {
        if legs[pos(root)].is_some() {
            continue;
        }
        if m.dim(root) != dim {
            return Err(ChamberError::NonIsoWithinChamber {
                chamber: id,
                a: shape.cell(chamber.basepoint),
                b: shape.cell(root),
            });
        }
        legs[pos(root)] = Some(Matrix::identity(m.field(), dim));
        let mut queue = VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            let mut next: Vec<usize> = shape.neighbours(v).filter(|&w| region.contains(w)).collect();
            if jumps {
                next.extend(chamber.cells.iter().copied().filter(|&w| w != v && shape.comparable_idx(v, w)));
            }
            for w in next {
                if legs[pos(w)].is_none() {
                    let leg = step_matrix(m, v, w)?.mul(legs[pos(v)].as_ref().unwrap()).expect("dims agree");
                    legs[pos(w)] = Some(leg);
                    queue.push_back(w);
                }
            }
        }
    }
    Ok(ChamberLimit { chamber: id, dim, legs: legs.into_iter().map(Option::unwrap).collect() })
}

/// Extra witness pairs compared against the first one.
pub const WITNESS_SAMPLES: usize = 20;
/// Pair counts up to this are checked exhaustively.
pub const EXHAUSTIVE_WITNESSES: usize = 64;

/// `φ = τ_b⁻¹ · M(a ≤ b) · σ_a` for the first witness pair, checked against
/// further witness pairs.
pub fn canonical_morphism(
    m: &PersistenceModule,
    s: &Subdivision,
    from: &ChamberLimit,
    to: &ChamberLimit,
) -> Result<Matrix, ChamberError> {
    let shape = m.shape();
    let (p, q) = (from.chamber, to.chamber);
    let phi = |a: usize, b: usize| -> Result<Matrix, ChamberError> {
        let tau_inv = to.leg(s, b).invert().map_err(|_| ZigzagError::NonInvertibleArrow(shape.cell(to_base(s, q)), shape.cell(b)))?;
        Ok(tau_inv.mul(&m.map_between_idx(a, b)).and_then(|x| x.mul(from.leg(s, a))).expect("dims agree"))
    };
    let (a0, b0) = first_witness(s, p, q).ok_or(ChamberError::NoComparableWitness { from: p, to: q })?;
    let first = phi(a0, b0)?;
    let (jp, jq) = (&s.chambers[p].cells, &s.chambers[q].cells);
    let mut others: Vec<(usize, usize)> = Vec::new();
    if jp.len() * jq.len() <= 64 * EXHAUSTIVE_WITNESSES {
        let all: Vec<(usize, usize)> =
            jp.iter().flat_map(|&a| jq.iter().filter(move |&&b| shape.leq_idx(a, b)).map(move |&b| (a, b))).collect();
        if all.len() <= EXHAUSTIVE_WITNESSES {
            others = all;
        } else {
            let mut rng = sample::rng(derive_seed(p as u64, q as u64));
            others.extend((0..WITNESS_SAMPLES).map(|_| all[rng.gen_range(0..all.len())]));
        }
    } else {
        let below_q = s.region(q).down_closure();
        let lower: Vec<usize> = jp.iter().copied().filter(|&a| below_q[a]).collect();
        let mut rng = sample::rng(derive_seed(p as u64, q as u64));
        for _ in 0..WITNESS_SAMPLES {
            let a = lower[rng.gen_range(0..lower.len())];
            let above: Vec<usize> = jq.iter().copied().filter(|&b| shape.leq_idx(a, b)).collect();
            others.push((a, above[rng.gen_range(0..above.len())]));
        }
    }
    for (a, b) in others {
        let second = phi(a, b)?;
        if second != first {
            return Err(ChamberError::WellDefinednessFailure(Box::new(Incoherence {
                from: p,
                to: q,
                first: (shape.cell(a0), shape.cell(b0)),
                second: (shape.cell(a), shape.cell(b)),
                first_matrix: first,
                second_matrix: second,
            })));
        }
    }
    Ok(first)
}

fn to_base(s: &Subdivision, q: usize) -> usize {
    s.chambers[q].basepoint
}

/// The module over the chamber poset, its quantization, and the legs used.
#[derive(Debug, Clone)]
pub struct Condensation {
    pub module: PosetModule,
    pub quantization: Quantization,
    pub limits: Vec<ChamberLimit>,
}

/// `Ñ` with `Ñ(p)` the limit over `J_p` and cover maps the canonical morphisms.
pub fn condense(m: &PersistenceModule, s: &Subdivision, poset: &FinitePoset) -> Result<Condensation, ChamberError> {
    require_planar(m.shape())?;
    if m.shape() != &s.shape || poset.len() != s.len() {
        return Err(ChamberError::Malformed("module, subdivision and poset disagree".into()));
    }
    let limits: Vec<ChamberLimit> =
        (0..s.len()).into_par_iter().map(|id| limit_over_chamber(m, s, id)).collect::<Result<_, _>>()?;
    let mats: Vec<Matrix> = poset
        .hasse()
        .par_iter()
        .map(|&(p, q)| canonical_morphism(m, s, &limits[p], &limits[q]))
        .collect::<Result<_, _>>()?;
    let dims = limits.iter().map(|l| l.dim).collect();
    let module = PosetModule::new(m.field(), poset.clone(), dims, mats)?;
    module.check_functorial()?;
    Ok(Condensation { module, quantization: quantization_f(s, poset), limits })
}

/// The natural isomorphism `α : Ñ ∘ F → M` with `α_c` the leg at `c`.
pub fn verify_condensation(m: &PersistenceModule, n: &PosetModule, quant: &Quantization) -> Result<ModuleMap, ChamberError> {
    let s = Subdivision::from_assignment(m.shape().clone(), quant.as_slice().to_vec())?;
    let limits: Vec<ChamberLimit> =
        (0..s.len()).into_par_iter().map(|id| limit_over_chamber(m, &s, id)).collect::<Result<_, _>>()?;
    let pulled = n.inflate(quant)?;
    if pulled.dims() != m.dims() {
        let i = (0..m.dims().len()).find(|&i| pulled.dim(i) != m.dim(i)).expect("dims differ somewhere");
        return Err(ChamberError::Malformed(format!("dimension differs at {}", m.shape().cell(i))));
    }
    let alpha = ModuleMap::new((0..m.shape().len()).map(|i| limits[s.chamber_of(i)].leg(&s, i).clone()).collect());
    let shape = m.shape();
    for (i, k, j) in shape.arrows() {
        let lhs = m.arrow(i, k).unwrap().mul(alpha.at(i)).expect("dims agree");
        let rhs = alpha.at(j).mul(pulled.arrow(i, k).unwrap()).expect("dims agree");
        if lhs != rhs {
            return Err(ChamberError::NaturalityFailure { cell: shape.cell(i), axis: k });
        }
    }
    if let Some(i) = (0..shape.len()).find(|&i| !alpha.at(i).is_invertible()) {
        return Err(ChamberError::Malformed(format!("leg at {} is singular", shape.cell(i))));
    }
    Ok(alpha)
}

/// A pair of poset modules whose Hom dimension changes under pullback.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FaithfulnessWitness {
    pub sample: usize,
    pub over_poset: usize,
    pub over_grid: usize,
}

/// Compares `dim Hom(N, N')` over the poset with the Hom dimension of the
/// pullbacks for `samples` random pairs.
pub fn check_fully_faithful(
    field: FieldSpec,
    poset: &FinitePoset,
    quant: &Quantization,
    max_dim: usize,
    samples: usize,
    seed: u64,
) -> Result<Option<FaithfulnessWitness>, ChamberError> {
    let outcomes: Vec<Result<Option<FaithfulnessWitness>, ChamberError>> = (0..samples)
        .into_par_iter()
        .map(|t| {
            let n = random_poset_module(field, poset, max_dim, derive_seed(seed, 2 * t as u64));
            let n2 = random_poset_module(field, poset, max_dim, derive_seed(seed, 2 * t as u64 + 1));
            let over_poset = hom_space(&n, &n2).expect("same poset").dim();
            let over_grid = hom_space(&n.inflate(quant)?, &n2.inflate(quant)?).expect("same grid").dim();
            Ok((over_poset != over_grid).then_some(FaithfulnessWitness { sample: t, over_poset, over_grid }))
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
    use crate::fixtures;
    use crate::generate::inflated_module;

    const Q: FieldSpec = FieldSpec::Rational;

    fn split(w: usize, h: usize, at: usize) -> (GridShape, Subdivision) {
        let shape = GridShape::new(&[w, h]).unwrap();
        let labels = (0..shape.len()).map(|i| usize::from(shape.coord(i, 0) >= at)).collect();
        (shape.clone(), Subdivision::from_assignment(shape, labels).unwrap())
    }

    #[test]
    fn constant_module_is_one_chamber() {
        let shape = GridShape::new(&[4, 3]).unwrap();
        let m = PersistenceModule::constant(Q, shape, 2);
        let s = detect_isotopy_subdivision(&m).unwrap();
        assert_eq!(s.len(), 1);
        let p = chamber_poset(&s).unwrap();
        assert_eq!(p.len(), 1);
        let c = condense(&m, &s, &p).unwrap();
        assert_eq!(c.module.dims(), &[2]);
        let alpha = verify_condensation(&m, &c.module, &c.quantization).unwrap();
        assert!(alpha.mats().iter().all(Matrix::is_identity));
    }

    #[test]
    fn split_grid_is_a_two_chain() {
        let (_, s) = split(4, 3, 2);
        let p = chamber_poset(&s).unwrap();
        assert!(p.leq(0, 1) && !p.leq(1, 0));
        assert_eq!(p.hasse(), &[(0, 1)]);
    }

    #[test]
    fn axes_cross_detects_four_chambers() {
        let (m, _) = fixtures::axes_cross(Q, 3);
        let s = detect_isotopy_subdivision(&m).unwrap();
        assert_eq!(s.len(), 4);
        let p = chamber_poset(&s).unwrap();
        let origin = s.chamber_of(m.shape().len() - 1);
        let arms: Vec<usize> = (0..4).filter(|&c| m.dim(s.chambers()[c].basepoint) == 1).collect();
        assert_eq!(arms.len(), 2);
        for &a in &arms {
            assert!(p.leq(a, origin));
        }
        let union = Region::from_indices(m.shape(), arms.iter().flat_map(|&a| s.chambers()[a].cells.clone()));
        assert!(!union.is_zigzag_connected());
    }

    #[test]
    fn axes_cross_with_merged_arms_has_no_canonical_morphism() {
        let (m, labels) = fixtures::axes_cross(Q, 3);
        let s = Subdivision::from_assignment(m.shape().clone(), labels).unwrap();
        let p = chamber_poset(&s).unwrap();
        assert!(matches!(condense(&m, &s, &p), Err(ChamberError::WellDefinednessFailure(_))));
        assert!(matches!(s.check(&m), Err(ChamberError::DisconnectedChamber { .. })));
    }

    #[test]
    fn punctured_plane_is_not_convex() {
        let m = fixtures::punctured_plane(Q, 2);
        match detect_isotopy_subdivision(&m) {
            Err(ChamberError::NonConvexChamber { witness, .. }) => assert_eq!(witness.middle, Cell::new(&[2, 2])),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn untwisted_condensation_recovers_the_generator() {
        let shape = GridShape::new(&[7, 6]).unwrap();
        for seed in 0..15 {
            let sample = inflated_module(FieldSpec::Prime(5), &shape, 9, 3, false, seed).unwrap();
            let s = detect_isotopy_subdivision(&sample.module).unwrap();
            assert_eq!(s, sample.subdivision);
            let p = chamber_poset(&s).unwrap();
            let c = condense(&sample.module, &s, &p).unwrap();
            assert_eq!(c.module, sample.generator);
        }
    }

    #[test]
    fn twisted_condensation_verifies() {
        let shape = GridShape::new(&[6, 6]).unwrap();
        for seed in 0..15 {
            let sample = inflated_module(Q, &shape, 9, 3, true, seed).unwrap();
            let s = detect_isotopy_subdivision(&sample.module).unwrap();
            assert_eq!(s.len(), sample.subdivision.len());
            let p = chamber_poset(&s).unwrap();
            let c = condense(&sample.module, &s, &p).unwrap();
            let alpha = verify_condensation(&sample.module, &c.module, &c.quantization).unwrap();
            let pulled = c.module.inflate(&c.quantization).unwrap();
            assert!(alpha.is_isomorphism(&pulled, &sample.module));
        }
    }

    #[test]
    fn corrupted_condensation_fails_naturality() {
        let shape = GridShape::new(&[6, 6]).unwrap();
        let seed = (0..100)
            .find(|&seed| {
                let s = inflated_module(Q, &shape, 9, 3, true, seed).unwrap();
                s.generator.edge_matrices().iter().any(|m| !m.is_zero())
            })
            .unwrap();
        let sample = inflated_module(Q, &shape, 9, 3, true, seed).unwrap();
        let s = detect_isotopy_subdivision(&sample.module).unwrap();
        let p = chamber_poset(&s).unwrap();
        let c = condense(&sample.module, &s, &p).unwrap();
        let e = c.module.edge_matrices().iter().position(|m| !m.is_zero()).unwrap();
        let (from, to) = p.hasse()[e];
        let doubled = c.module.edge_matrices()[e].scale(&Q.from_i64(2));
        let bad = c.module.with_edge_matrix(from, to, doubled).unwrap();
        assert!(matches!(verify_condensation(&sample.module, &bad, &c.quantization), Err(ChamberError::NaturalityFailure { .. })));
    }

    #[test]
    fn three_parameters_rejected() {
        let shape = GridShape::new(&[2, 2, 2]).unwrap();
        let m = PersistenceModule::constant(Q, shape, 1);
        assert_eq!(detect_isotopy_subdivision(&m), Err(ChamberError::UnsupportedDimension(3)));
    }

    #[test]
    fn pullback_preserves_hom_on_split_grid() {
        let (_, s) = split(3, 3, 1);
        let p = chamber_poset(&s).unwrap();
        let q = quantization_f(&s, &p);
        assert_eq!(check_fully_faithful(FieldSpec::Prime(3), &p, &q, 2, 10, 9), Ok(None));
    }
}
