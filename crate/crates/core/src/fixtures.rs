//! The two planar counterexample modules, on finite grids.

use crate::field::{FieldSpec, Matrix};
use crate::grid::{GridShape, PersistenceModule};

/// Two arms of length `arm` meeting at the top-right corner cell: `F` on the
/// arms, `F²` at the corner, zero elsewhere. The horizontal arm enters the
/// corner by `[1,0]ᵀ`, the vertical arm by `[0,1]ᵀ`.
///
/// Also returns the labelling that puts both arms into one chamber:
/// 0 = zero region, 1 = arms, 2 = corner.
pub fn axes_cross(field: FieldSpec, arm: usize) -> (PersistenceModule, Vec<usize>) {
    let n = arm + 1;
    let shape = GridShape::new(&[n, n]).expect("small grid");
    let label: Vec<usize> = (0..shape.len())
        .map(|i| match (shape.coord(i, 0) == arm, shape.coord(i, 1) == arm) {
            (true, true) => 2,
            (false, false) => 0,
            _ => 1,
        })
        .collect();
    let dims = label.clone();
    let m = PersistenceModule::from_arrows(field, shape, dims.clone(), |i, k, j| match (dims[i], dims[j]) {
        (1, 1) => Matrix::identity(field, 1),
        (1, 2) if k == 0 => Matrix::from_rows(field, &[&[1], &[0]]),
        (1, 2) => Matrix::from_rows(field, &[&[0], &[1]]),
        (a, b) => Matrix::zeros(field, b, a),
    })
    .expect("well-formed");
    (m, label)
}

/// `F` everywhere except `F²` at the centre of a `(2r+1)²` grid, entered by
/// `[1,0]ᵀ` and left by `[1 1]`.
pub fn punctured_plane(field: FieldSpec, radius: usize) -> PersistenceModule {
    let n = 2 * radius + 1;
    let shape = GridShape::new(&[n, n]).expect("small grid");
    let centre = radius + n * radius;
    let dims: Vec<usize> = (0..shape.len()).map(|i| if i == centre { 2 } else { 1 }).collect();
    PersistenceModule::from_arrows(field, shape, dims, |i, _, j| {
        if j == centre {
            Matrix::from_rows(field, &[&[1], &[0]])
        } else if i == centre {
            Matrix::from_rows(field, &[&[1, 1]])
        } else {
            Matrix::identity(field, 1)
        }
    })
    .expect("well-formed")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_validate() {
        for f in [FieldSpec::Prime(2), FieldSpec::Rational] {
            for k in 1..5 {
                assert!(axes_cross(f, k).0.validate().is_ok());
                assert!(punctured_plane(f, k).validate().is_ok());
            }
        }
    }
}
