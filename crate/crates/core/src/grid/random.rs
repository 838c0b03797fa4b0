use rand::Rng;

use super::{GridError, GridShape, PersistenceModule};
use crate::field::{FieldSpec, Matrix, Scalar};
use crate::sample;

/// Probability that a free arrow between two support cells is zero.
const ZERO_ARROW_PROB: f64 = 0.15;

/// Seeded random thin module on a 1- or 2-parameter grid.
///
/// Dims are 1 with probability `density`. Cells are swept in linear order and
/// the arrows entering each cell are chosen together so that the unit square
/// whose top corner is that cell commutes; when the other three arrows of the
/// square are nonzero the fourth is forced to the commuting value.
pub fn random_thin_module(
    field: FieldSpec,
    shape: GridShape,
    density: f64,
    seed: u64,
) -> Result<PersistenceModule, GridError> {
    if !(0.0..=1.0).contains(&density) {
        return Err(GridError::Malformed(format!("density {density} outside [0,1]")));
    }
    if shape.n() > 2 {
        return Err(GridError::UnsupportedDimension(shape.n()));
    }
    let mut rng = sample::rng(seed);
    let dims: Vec<usize> = (0..shape.len()).map(|_| usize::from(rng.gen_bool(density))).collect();

    // scalar on each arrow, zero when either endpoint vanishes
    let mut value: Vec<Vec<Scalar>> = vec![vec![field.zero(); shape.len()]; shape.n()];
    for d in 0..shape.len() {
        if dims[d] == 0 {
            continue;
        }
        let left = shape.step_back(d, 0).filter(|&u| dims[u] == 1);
        let below = if shape.n() == 2 { shape.step_back(d, 1).filter(|&r| dims[r] == 1) } else { None };
        // square c -> r -> d and c -> u -> d with c = d - e0 - e1; arrows out
        // of c are already fixed (zero when an endpoint vanishes)
        let corner = (shape.n() == 2)
            .then(|| shape.step_back(d, 0).and_then(|x| shape.step_back(x, 1)))
            .flatten()
            .filter(|&c| dims[c] == 1);
        let (bottom, side) = match corner {
            Some(c) => (value[0][c].clone(), value[1][c].clone()),
            None => (field.zero(), field.zero()),
        };
        let mut free = |present: bool| {
            if present {
                sample::scalar(field, ZERO_ARROW_PROB, &mut rng)
            } else {
                field.zero()
            }
        };
        // need v_right·bottom = h_top·side
        let (h_top, v_right) = match (bottom.is_zero(), side.is_zero()) {
            (false, false) => {
                let h = free(true);
                let v = field.div(&field.mul(&h, &side), &bottom).expect("bottom is nonzero");
                (h, v)
            }
            (false, true) => (free(left.is_some()), field.zero()),
            (true, false) => (field.zero(), free(below.is_some())),
            (true, true) => (free(left.is_some()), free(below.is_some())),
        };
        if let Some(u) = left {
            value[0][u] = h_top;
        }
        if let Some(r) = below {
            value[1][r] = v_right;
        }
    }
    PersistenceModule::from_arrows(field, shape, dims.clone(), |i, k, j| {
        if dims[i] == 1 && dims[j] == 1 {
            Matrix::scalar(field, value[k][i].clone())
        } else {
            Matrix::zeros(field, dims[j], dims[i])
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn density_zero_gives_zero_module() {
        let sh = GridShape::new(&[4, 3]).unwrap();
        let m = random_thin_module(FieldSpec::Prime(5), sh.clone(), 0.0, 1).unwrap();
        assert_eq!(m, PersistenceModule::zero(FieldSpec::Prime(5), sh));
    }

    #[test]
    fn outputs_validate() {
        for seed in 0..200 {
            for field in [FieldSpec::Prime(2), FieldSpec::Prime(5), FieldSpec::Rational] {
                let sh = GridShape::new(&[1 + (seed as usize % 6), 1 + (seed as usize / 6 % 5)]).unwrap();
                let m = random_thin_module(field, sh, 0.8, seed).unwrap();
                assert!(m.is_thin());
                assert!(m.validate().is_ok(), "seed {seed} over {field}");
            }
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let sh = GridShape::new(&[5, 5]).unwrap();
        let a = random_thin_module(FieldSpec::Rational, sh.clone(), 0.7, 42).unwrap();
        let b = random_thin_module(FieldSpec::Rational, sh, 0.7, 42).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn three_parameters_rejected() {
        let sh = GridShape::new(&[2, 2, 2]).unwrap();
        assert!(matches!(
            random_thin_module(FieldSpec::Prime(5), sh, 0.5, 0),
            Err(GridError::UnsupportedDimension(3))
        ));
    }
}
