//! Seeded random scalars and matrices used by the generators.

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::field::{FieldSpec, Matrix, Scalar};

pub type SeededRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform nonzero residue, or a small nonzero fraction over the rationals.
pub fn nonzero_scalar(field: FieldSpec, rng: &mut impl Rng) -> Scalar {
    match field {
        FieldSpec::Prime(p) => Scalar::Mod(rng.gen_range(1..p)),
        FieldSpec::Rational => {
            let mut num: i64 = rng.gen_range(1..=7);
            if rng.gen_bool(0.5) {
                num = -num;
            }
            let den: i64 = rng.gen_range(1..=4);
            Scalar::Rat(BigRational::new(BigInt::from(num), BigInt::from(den)))
        }
    }
}

/// Any scalar; zero with probability `p_zero`.
pub fn scalar(field: FieldSpec, p_zero: f64, rng: &mut impl Rng) -> Scalar {
    if rng.gen_bool(p_zero) {
        field.zero()
    } else {
        nonzero_scalar(field, rng)
    }
}

pub fn matrix(field: FieldSpec, rows: usize, cols: usize, p_zero: f64, rng: &mut impl Rng) -> Matrix {
    let data = (0..rows * cols).map(|_| scalar(field, p_zero, rng)).collect();
    Matrix::new(field, rows, cols, data).expect("sampled entries lie in the field")
}

/// Random invertible matrix built from elementary row operations on the identity.
pub fn invertible(field: FieldSpec, n: usize, rng: &mut impl Rng) -> Matrix {
    let mut m = Matrix::identity(field, n);
    for r in 0..n {
        let s = nonzero_scalar(field, rng);
        for c in 0..n {
            let v = field.mul(m.get(r, c), &s);
            m.set(r, c, v);
        }
    }
    if n < 2 {
        return m;
    }
    for _ in 0..2 * n {
        let a = rng.gen_range(0..n);
        let b = (a + rng.gen_range(1..n)) % n;
        let s = nonzero_scalar(field, rng);
        for c in 0..n {
            let v = field.add(m.get(a, c), &field.mul(&s, m.get(b, c)));
            m.set(a, c, v);
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn invertible_really_is() {
        let mut r = rng(3);
        for field in [FieldSpec::Prime(2), FieldSpec::Prime(5), FieldSpec::Rational] {
            for n in 0..4 {
                let m = invertible(field, n, &mut r);
                assert!(m.invert().unwrap().mul(&m).unwrap().is_identity());
            }
        }
    }
}
