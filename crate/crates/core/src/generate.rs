//! Seeded generators: random modules over finite posets, rectangular chamber
//! layouts, and grid modules obtained by pulling those back.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::chambers::{chamber_poset, quantization_f, ChamberError, Subdivision};
use crate::field::{FieldSpec, Matrix};
use crate::grid::{GridShape, PersistenceModule};
use crate::poset::{FinitePoset, PosetModule, Quantization};
use crate::sample;

/// Random module over `poset` with dims drawn from `0..=max_dim`.
pub fn random_poset_module(field: FieldSpec, poset: &FinitePoset, max_dim: usize, seed: u64) -> PosetModule {
    let mut rng = sample::rng(seed);
    let dims: Vec<usize> = (0..poset.len()).map(|_| rng.gen_range(0..=max_dim)).collect();
    poset_module_with_dims(field, poset, &dims, &mut rng)
}

/// Random module with the given dims. Each element's incoming maps are a
/// random map out of the colimit of everything strictly below it, which makes
/// every composite agree by construction.
pub fn poset_module_with_dims(field: FieldSpec, poset: &FinitePoset, dims: &[usize], rng: &mut impl Rng) -> PosetModule {
    let hasse = poset.hasse();
    let mut mats: Vec<Option<Matrix>> = vec![None; hasse.len()];
    for q in poset.linear_extension() {
        let below: Vec<usize> = (0..poset.len()).filter(|&r| r != q && poset.leq(r, q)).collect();
        if below.is_empty() {
            continue;
        }
        let mut offset = vec![usize::MAX; poset.len()];
        let mut total = 0;
        for &r in &below {
            offset[r] = total;
            total += dims[r];
        }
        // columns ι_r x − ι_s H(r⋖s) x over covers inside the down-set
        let mut relations: Vec<Vec<crate::field::Scalar>> = Vec::new();
        for (e, &(r, s)) in hasse.iter().enumerate() {
            if s == q || offset[s] == usize::MAX {
                continue;
            }
            let h = mats[e].as_ref().expect("lower edges come first");
            for x in 0..dims[r] {
                let mut col = vec![field.zero(); total];
                col[offset[r] + x] = field.one();
                for y in 0..dims[s] {
                    col[offset[s] + y] = field.neg(h.get(y, x));
                }
                relations.push(col);
            }
        }
        let mut rt = Matrix::zeros(field, relations.len(), total);
        for (i, col) in relations.into_iter().enumerate() {
            for (j, v) in col.into_iter().enumerate() {
                rt.set(i, j, v);
            }
        }
        let annihilator = rt.kernel_basis();
        let coeffs = sample::matrix(field, dims[q], annihilator.cols(), 0.2, rng);
        let g = coeffs.mul(&annihilator.transpose()).expect("shapes agree");
        for (e, &(p, t)) in hasse.iter().enumerate() {
            if t == q {
                let mut block = Matrix::zeros(field, dims[q], dims[p]);
                for i in 0..dims[q] {
                    for j in 0..dims[p] {
                        block.set(i, j, g.get(i, offset[p] + j).clone());
                    }
                }
                mats[e] = Some(block);
            }
        }
    }
    let mats = mats.into_iter().map(|m| m.expect("every edge has a target")).collect();
    PosetModule::new(field, poset.clone(), dims.to_vec(), mats).expect("shapes by construction")
}

/// Random guillotine partition of the grid into at most `max_parts`
/// rectangles, as a cell labelling.
pub fn guillotine_layout(shape: &GridShape, max_parts: usize, rng: &mut impl Rng) -> Vec<usize> {
    assert_eq!(shape.n(), 2, "layouts are 2-parameter");
    let (w, h) = (shape.sizes()[0], shape.sizes()[1]);
    let target = rng.gen_range(1..=max_parts.max(1));
    // (x0, y0, x1, y1), half-open
    let mut rects = vec![(0, 0, w, h)];
    while rects.len() < target {
        let splittable: Vec<usize> = (0..rects.len()).filter(|&i| rects[i].2 - rects[i].0 > 1 || rects[i].3 - rects[i].1 > 1).collect();
        let Some(&i) = splittable.choose(rng) else { break };
        let (x0, y0, x1, y1) = rects[i];
        let vertical = if x1 - x0 > 1 && y1 - y0 > 1 { rng.gen_bool(0.5) } else { x1 - x0 > 1 };
        if vertical {
            let x = rng.gen_range(x0 + 1..x1);
            rects[i] = (x0, y0, x, y1);
            rects.push((x, y0, x1, y1));
        } else {
            let y = rng.gen_range(y0 + 1..y1);
            rects[i] = (x0, y0, x1, y);
            rects.push((x0, y, x1, y1));
        }
    }
    let mut label = vec![0; shape.len()];
    for (id, &(x0, y0, x1, y1)) in rects.iter().enumerate() {
        for y in y0..y1 {
            for x in x0..x1 {
                label[x + w * y] = id;
            }
        }
    }
    label
}

/// Pairs of distinct chambers joined by some elementary arrow.
pub fn adjacent_chambers(s: &Subdivision) -> Vec<(usize, usize)> {
    let mut pairs: Vec<(usize, usize)> = s
        .shape()
        .arrows()
        .map(|(i, _, j)| (s.chamber_of(i), s.chamber_of(j)))
        .filter(|(p, q)| p != q)
        .map(|(p, q)| (p.min(q), p.max(q)))
        .collect();
    pairs.sort_unstable();
    pairs.dedup();
    pairs
}

/// Dims in `0..=max_dim` differing across every adjacent pair, by randomized
/// backtracking.
fn separating_dims(k: usize, adjacent: &[(usize, usize)], max_dim: usize, rng: &mut impl Rng) -> Option<Vec<usize>> {
    fn go(v: usize, dims: &mut Vec<usize>, adj: &[Vec<usize>], options: &[Vec<usize>]) -> bool {
        if v == dims.len() {
            return true;
        }
        for &d in &options[v] {
            if adj[v].iter().all(|&u| u > v || dims[u] != d) {
                dims[v] = d;
                if go(v + 1, dims, adj, options) {
                    return true;
                }
            }
        }
        false
    }
    let mut adj = vec![Vec::new(); k];
    for &(p, q) in adjacent {
        adj[p].push(q);
        adj[q].push(p);
    }
    let options: Vec<Vec<usize>> = (0..k)
        .map(|_| {
            let mut o: Vec<usize> = (0..=max_dim).collect();
            o.shuffle(rng);
            o
        })
        .collect();
    let mut dims = vec![0; k];
    go(0, &mut dims, &adj, &options).then_some(dims)
}

/// A grid module pulled back from a random poset module over a random
/// rectangular layout, together with what generated it.
#[derive(Debug, Clone)]
pub struct InflatedSample {
    pub module: PersistenceModule,
    pub generator: PosetModule,
    pub subdivision: Subdivision,
    pub quantization: Quantization,
}

/// Chambers are the layout rectangles; adjacent chambers get different dims
/// so every arrow leaving a chamber is a non-isomorphism (`max_dim ≥ 3`
/// always suffices, layouts being planar). With `twist`, each
/// cell gets a random change of basis, so arrows inside chambers are no
/// longer identities.
pub fn inflated_module(
    field: FieldSpec,
    shape: &GridShape,
    max_chambers: usize,
    max_dim: usize,
    twist: bool,
    seed: u64,
) -> Result<InflatedSample, ChamberError> {
    let mut rng = sample::rng(seed);
    let layout = guillotine_layout(shape, max_chambers, &mut rng);
    let subdivision = Subdivision::canonical(shape.clone(), &layout)?;
    let poset = chamber_poset(&subdivision)?;
    let adjacent = adjacent_chambers(&subdivision);
    let dims = separating_dims(subdivision.len(), &adjacent, max_dim, &mut rng)
        .ok_or_else(|| ChamberError::Malformed(format!("adjacent chambers cannot get distinct dims below {max_dim}")))?;
    let generator = poset_module_with_dims(field, &poset, &dims, &mut rng);
    let quantization = quantization_f(&subdivision, &poset);
    let mut module = generator.inflate(&quantization)?;
    if twist {
        let g: Vec<Matrix> = module.dims().iter().map(|&d| sample::invertible(field, d, &mut rng)).collect();
        module = module.twist(&g)?;
    }
    Ok(InflatedSample { module, generator, subdivision, quantization })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_poset_modules_are_functorial() {
        let diamond = FinitePoset::from_hasse(4, &[(0, 1), (0, 2), (1, 3), (2, 3)]).unwrap();
        for seed in 0..50 {
            for field in [FieldSpec::Prime(2), FieldSpec::Prime(7), FieldSpec::Rational] {
                let h = random_poset_module(field, &diamond, 3, seed);
                assert_eq!(h.check_functorial(), Ok(()), "seed {seed} {field}");
            }
        }
    }

    #[test]
    fn layouts_cover_the_grid_with_rectangles() {
        let shape = GridShape::new(&[7, 5]).unwrap();
        let mut rng = sample::rng(3);
        for _ in 0..50 {
            let label = guillotine_layout(&shape, 9, &mut rng);
            let s = Subdivision::canonical(shape.clone(), &label).unwrap();
            assert!(s.len() <= 9);
            for c in s.chambers() {
                assert!(s.region(c.id).is_interval());
            }
        }
    }

    #[test]
    fn inflated_samples_validate() {
        let shape = GridShape::new(&[6, 6]).unwrap();
        for seed in 0..20 {
            let s = inflated_module(FieldSpec::Prime(5), &shape, 9, 3, seed % 2 == 0, seed).unwrap();
            assert!(s.module.validate().is_ok());
            for (p, q) in adjacent_chambers(&s.subdivision) {
                assert_ne!(s.generator.dims()[p], s.generator.dims()[q]);
            }
        }
    }
}
