//! Exact scalars and dense matrices over prime fields `GF(p)` and the rationals.
//!
//! Every matrix carries its [`FieldSpec`]; binary operations refuse to mix
//! fields. Elimination routines return reduced row echelon data with leading
//! coefficient one, so bases produced here are deterministic.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("field mismatch: {0} vs {1}")]
    FieldMismatch(FieldSpec, FieldSpec),
    #[error("matrix is singular")]
    Singular,
    #[error("invalid field: {0}")]
    InvalidField(String),
    #[error("invalid scalar: {0}")]
    InvalidScalar(String),
}

/// Ground field of a computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FieldSpec {
    Prime(u32),
    Rational,
}

fn is_prime(p: u32) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= p as u64 {
        if (p as u64).is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

impl FieldSpec {
    pub fn prime(p: u32) -> Result<Self, FieldError> {
        if p >= (1 << 31) || !is_prime(p) {
            return Err(FieldError::InvalidField(format!("{p} is not a prime below 2^31")));
        }
        Ok(FieldSpec::Prime(p))
    }

    /// Parses `prime:P` or `rational`.
    pub fn parse(s: &str) -> Result<Self, FieldError> {
        let s = s.trim();
        if s == "rational" || s == "Q" {
            return Ok(FieldSpec::Rational);
        }
        if let Some(rest) = s.strip_prefix("prime:") {
            let p: u32 = rest
                .parse()
                .map_err(|_| FieldError::InvalidField(s.to_string()))?;
            return FieldSpec::prime(p);
        }
        Err(FieldError::InvalidField(s.to_string()))
    }

    pub fn zero(&self) -> Scalar {
        match self {
            FieldSpec::Prime(_) => Scalar::Mod(0),
            FieldSpec::Rational => Scalar::Rat(BigRational::zero()),
        }
    }

    pub fn one(&self) -> Scalar {
        match self {
            FieldSpec::Prime(_) => Scalar::Mod(1),
            FieldSpec::Rational => Scalar::Rat(BigRational::one()),
        }
    }

    pub fn from_i64(&self, v: i64) -> Scalar {
        match self {
            FieldSpec::Prime(p) => Scalar::Mod(v.rem_euclid(*p as i64) as u32),
            FieldSpec::Rational => Scalar::Rat(BigRational::from_integer(BigInt::from(v))),
        }
    }

    /// `num/den` as a field element; `None` when the denominator vanishes in the field.
    pub fn from_fraction(&self, num: i64, den: i64) -> Option<Scalar> {
        let d = self.from_i64(den);
        if d.is_zero() {
            return None;
        }
        Some(self.mul(&self.from_i64(num), &self.inv(&d)?))
    }

    pub fn add(&self, a: &Scalar, b: &Scalar) -> Scalar {
        match (self, a, b) {
            (FieldSpec::Prime(p), Scalar::Mod(x), Scalar::Mod(y)) => {
                Scalar::Mod(((*x as u64 + *y as u64) % *p as u64) as u32)
            }
            (FieldSpec::Rational, Scalar::Rat(x), Scalar::Rat(y)) => Scalar::Rat(x + y),
            _ => panic!("scalar does not belong to {self}"),
        }
    }

    pub fn neg(&self, a: &Scalar) -> Scalar {
        match (self, a) {
            (FieldSpec::Prime(p), Scalar::Mod(x)) => Scalar::Mod(if *x == 0 { 0 } else { p - x }),
            (FieldSpec::Rational, Scalar::Rat(x)) => Scalar::Rat(-x),
            _ => panic!("scalar does not belong to {self}"),
        }
    }

    pub fn sub(&self, a: &Scalar, b: &Scalar) -> Scalar {
        self.add(a, &self.neg(b))
    }

    pub fn mul(&self, a: &Scalar, b: &Scalar) -> Scalar {
        match (self, a, b) {
            (FieldSpec::Prime(p), Scalar::Mod(x), Scalar::Mod(y)) => {
                Scalar::Mod(((*x as u64 * *y as u64) % *p as u64) as u32)
            }
            (FieldSpec::Rational, Scalar::Rat(x), Scalar::Rat(y)) => Scalar::Rat(x * y),
            _ => panic!("scalar does not belong to {self}"),
        }
    }

    /// Multiplicative inverse, `None` for zero.
    pub fn inv(&self, a: &Scalar) -> Option<Scalar> {
        if a.is_zero() {
            return None;
        }
        match (self, a) {
            (FieldSpec::Prime(p), Scalar::Mod(x)) => Some(Scalar::Mod(pow_mod(*x as u64, *p as u64 - 2, *p as u64) as u32)),
            (FieldSpec::Rational, Scalar::Rat(x)) => Some(Scalar::Rat(x.recip())),
            _ => panic!("scalar does not belong to {self}"),
        }
    }

    pub fn div(&self, a: &Scalar, b: &Scalar) -> Option<Scalar> {
        Some(self.mul(a, &self.inv(b)?))
    }

    pub fn contains(&self, a: &Scalar) -> bool {
        match (self, a) {
            (FieldSpec::Prime(p), Scalar::Mod(x)) => x < p,
            (FieldSpec::Rational, Scalar::Rat(_)) => true,
            _ => false,
        }
    }

    /// Parses the JSON-facing text form: residues for prime fields,
    /// `num/den` or an integer for rationals.
    pub fn parse_scalar(&self, s: &str) -> Result<Scalar, FieldError> {
        let bad = || FieldError::InvalidScalar(s.to_string());
        match self {
            FieldSpec::Prime(p) => {
                let v: u64 = s.trim().parse().map_err(|_| bad())?;
                if v >= *p as u64 {
                    return Err(bad());
                }
                Ok(Scalar::Mod(v as u32))
            }
            FieldSpec::Rational => {
                let s = s.trim();
                let (num, den) = match s.split_once('/') {
                    Some((n, d)) => (n, d),
                    None => (s, "1"),
                };
                let num: BigInt = num.parse().map_err(|_| bad())?;
                let den: BigInt = den.parse().map_err(|_| bad())?;
                if den.is_zero() {
                    return Err(bad());
                }
                Ok(Scalar::Rat(BigRational::new(num, den)))
            }
        }
    }
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % m;
        }
        base = base * base % m;
        exp >>= 1;
    }
    acc
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldSpec::Prime(p) => write!(f, "GF({p})"),
            FieldSpec::Rational => write!(f, "Q"),
        }
    }
}

/// A field element in canonical form: a residue `0..p`, or a reduced
/// fraction with positive denominator.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Scalar {
    Mod(u32),
    Rat(BigRational),
}

impl Scalar {
    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Mod(x) => *x == 0,
            Scalar::Rat(x) => x.is_zero(),
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Scalar::Mod(x) => *x == 1,
            Scalar::Rat(x) => x.is_one(),
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Mod(x) => write!(f, "{x}"),
            Scalar::Rat(x) => {
                if x.denom().is_one() {
                    write!(f, "{}", x.numer())
                } else {
                    debug_assert!(x.denom().is_positive());
                    write!(f, "{}/{}", x.numer(), x.denom())
                }
            }
        }
    }
}

/// Dense row-major matrix. Rows index the target space, columns the source.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Matrix {
    field: FieldSpec,
    rows: usize,
    cols: usize,
    data: Vec<Scalar>,
}

/// Result of reducing a matrix to reduced row echelon form.
#[derive(Debug, Clone)]
pub struct Echelon {
    pub reduced: Matrix,
    /// Pivot column of each nonzero row, increasing.
    pub pivots: Vec<usize>,
}

impl Matrix {
    pub fn new(field: FieldSpec, rows: usize, cols: usize, data: Vec<Scalar>) -> Result<Self, FieldError> {
        if data.len() != rows * cols {
            return Err(FieldError::ShapeMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if let Some(bad) = data.iter().find(|s| !field.contains(s)) {
            return Err(FieldError::InvalidScalar(format!("{bad} not in {field}")));
        }
        Ok(Matrix { field, rows, cols, data })
    }

    /// Builds a matrix from integer rows; convenient for tests and fixtures.
    pub fn from_rows(field: FieldSpec, rows: &[&[i64]]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        let data = rows.iter().flat_map(|row| row.iter().map(|&v| field.from_i64(v))).collect();
        Matrix { field, rows: r, cols: c, data }
    }

    pub fn zeros(field: FieldSpec, rows: usize, cols: usize) -> Self {
        Matrix { field, rows, cols, data: vec![field.zero(); rows * cols] }
    }

    pub fn identity(field: FieldSpec, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m.data[i * n + i] = field.one();
        }
        m
    }

    pub fn scalar(field: FieldSpec, s: Scalar) -> Self {
        Matrix { field, rows: 1, cols: 1, data: vec![s] }
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn data(&self) -> &[Scalar] {
        &self.data
    }

    pub fn get(&self, r: usize, c: usize) -> &Scalar {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Scalar) {
        debug_assert!(self.field.contains(&v));
        self.data[r * self.cols + c] = v;
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Scalar::is_zero)
    }

    pub fn is_identity(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|r| {
                (0..self.cols).all(|c| {
                    let v = self.get(r, c);
                    if r == c { v.is_one() } else { v.is_zero() }
                })
            })
    }

    fn check_field(&self, other: &Matrix) -> Result<(), FieldError> {
        if self.field != other.field {
            return Err(FieldError::FieldMismatch(self.field, other.field));
        }
        Ok(())
    }

    /// `self · rhs`.
    pub fn mul(&self, rhs: &Matrix) -> Result<Matrix, FieldError> {
        self.check_field(rhs)?;
        if self.cols != rhs.rows {
            return Err(FieldError::ShapeMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let f = self.field;
        let mut out = Matrix::zeros(f, self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let b = rhs.get(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    let idx = i * rhs.cols + j;
                    out.data[idx] = f.add(&out.data[idx], &f.mul(a, b));
                }
            }
        }
        Ok(out)
    }

    pub fn add(&self, rhs: &Matrix) -> Result<Matrix, FieldError> {
        self.check_field(rhs)?;
        if self.shape() != rhs.shape() {
            return Err(FieldError::ShapeMismatch(format!("{:?} plus {:?}", self.shape(), rhs.shape())));
        }
        let f = self.field;
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| f.add(a, b)).collect();
        Ok(Matrix { field: f, rows: self.rows, cols: self.cols, data })
    }

    pub fn scale(&self, s: &Scalar) -> Matrix {
        let f = self.field;
        let data = self.data.iter().map(|a| f.mul(a, s)).collect();
        Matrix { field: f, rows: self.rows, cols: self.cols, data }
    }

    pub fn transpose(&self) -> Matrix {
        let mut out = Matrix::zeros(self.field, self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.data[c * self.rows + r] = self.get(r, c).clone();
            }
        }
        out
    }

    /// Block-diagonal sum `self ⊕ other`.
    pub fn block_diag(&self, other: &Matrix) -> Result<Matrix, FieldError> {
        self.check_field(other)?;
        let mut out = Matrix::zeros(self.field, self.rows + other.rows, self.cols + other.cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.set(r, c, self.get(r, c).clone());
            }
        }
        for r in 0..other.rows {
            for c in 0..other.cols {
                out.set(self.rows + r, self.cols + c, other.get(r, c).clone());
            }
        }
        Ok(out)
    }

    /// Reduced row echelon form with unit pivots.
    pub fn echelon(&self) -> Echelon {
        let f = self.field;
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..m.cols {
            if row == m.rows {
                break;
            }
            let Some(p) = (row..m.rows).find(|&r| !m.get(r, col).is_zero()) else {
                continue;
            };
            m.swap_rows(row, p);
            let inv = f.inv(m.get(row, col)).expect("nonzero pivot");
            for c in col..m.cols {
                let v = f.mul(m.get(row, c), &inv);
                m.set(row, c, v);
            }
            for r in 0..m.rows {
                if r == row || m.get(r, col).is_zero() {
                    continue;
                }
                let factor = m.get(r, col).clone();
                for c in col..m.cols {
                    let v = f.sub(m.get(r, c), &f.mul(&factor, m.get(row, c)));
                    m.set(r, c, v);
                }
            }
            pivots.push(col);
            row += 1;
        }
        Echelon { reduced: m, pivots }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    pub fn rank(&self) -> usize {
        self.echelon().pivots.len()
    }

    pub fn is_invertible(&self) -> bool {
        self.is_square() && self.rank() == self.rows
    }

    pub fn invert(&self) -> Result<Matrix, FieldError> {
        if !self.is_square() {
            return Err(FieldError::ShapeMismatch(format!("cannot invert a {}x{} matrix", self.rows, self.cols)));
        }
        let n = self.rows;
        let f = self.field;
        let mut aug = Matrix::zeros(f, n, 2 * n);
        for r in 0..n {
            for c in 0..n {
                aug.set(r, c, self.get(r, c).clone());
            }
            aug.set(r, n + r, f.one());
        }
        let ech = aug.echelon();
        if ech.pivots.len() < n || (n > 0 && ech.pivots[n - 1] >= n) {
            return Err(FieldError::Singular);
        }
        let mut out = Matrix::zeros(f, n, n);
        for r in 0..n {
            for c in 0..n {
                out.set(r, c, ech.reduced.get(r, n + c).clone());
            }
        }
        Ok(out)
    }

    /// Columns form a basis of the null space; one column per free variable
    /// of the reduced echelon form, with a one in that variable's slot.
    pub fn kernel_basis(&self) -> Matrix {
        let ech = self.echelon();
        kernel_from_echelon(self.field, self.cols, &ech.pivots, |r, c| ech.reduced.get(r, c).clone())
    }
}

/// Shared by the dense and sparse eliminations: builds the canonical kernel
/// basis from an RREF given by its pivots and an entry accessor.
pub(crate) fn kernel_from_echelon<F>(field: FieldSpec, cols: usize, pivots: &[usize], entry: F) -> Matrix
where
    F: Fn(usize, usize) -> Scalar,
{
    let mut is_pivot = vec![false; cols];
    for &p in pivots {
        is_pivot[p] = true;
    }
    let free: Vec<usize> = (0..cols).filter(|&c| !is_pivot[c]).collect();
    let mut basis = Matrix::zeros(field, cols, free.len());
    for (k, &fc) in free.iter().enumerate() {
        basis.set(fc, k, field.one());
        for (r, &pc) in pivots.iter().enumerate() {
            let v = entry(r, fc);
            if !v.is_zero() {
                basis.set(pc, k, field.neg(&v));
            }
        }
    }
    basis
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for r in 0..self.rows {
            if r > 0 {
                write!(f, "; ")?;
            }
            for c in 0..self.cols {
                if c > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{}", self.get(r, c))?;
            }
        }
        write!(f, "] ({}x{})", self.rows, self.cols)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const GF5: FieldSpec = FieldSpec::Prime(5);
    const Q: FieldSpec = FieldSpec::Rational;

    #[test]
    fn identity_product() {
        let i2 = Matrix::identity(Q, 2);
        assert_eq!(i2.mul(&i2).unwrap(), i2);
    }

    #[test]
    fn gf5_product_matches_enumeration() {
        // 2·3 = 6 ≡ 1 (mod 5), confirmed by counting.
        let expected = (0..5).find(|&v| (2 * 3 - v) % 5 == 0).unwrap();
        let a = Matrix::from_rows(GF5, &[&[2]]);
        let b = Matrix::from_rows(GF5, &[&[3]]);
        assert_eq!(a.mul(&b).unwrap(), Matrix::from_rows(GF5, &[&[expected]]));
    }

    #[test]
    fn empty_composition_is_zero_matrix() {
        let a = Matrix::zeros(Q, 2, 0);
        let b = Matrix::zeros(Q, 0, 3);
        let c = a.mul(&b).unwrap();
        assert_eq!(c.shape(), (2, 3));
        assert!(c.is_zero());
    }

    #[test]
    fn mismatches_are_reported() {
        let a = Matrix::identity(Q, 2);
        let b = Matrix::identity(Q, 3);
        assert!(matches!(a.mul(&b), Err(FieldError::ShapeMismatch(_))));
        let c = Matrix::identity(GF5, 2);
        assert!(matches!(a.mul(&c), Err(FieldError::FieldMismatch(..))));
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(Matrix::identity(Q, 3).invert().unwrap(), Matrix::identity(Q, 3));
        let inv2 = (1..5).find(|v| (2 * v) % 5 == 1).unwrap();
        assert_eq!(Matrix::from_rows(GF5, &[&[2]]).invert().unwrap(), Matrix::from_rows(GF5, &[&[inv2]]));
        assert_eq!(Matrix::from_rows(Q, &[&[1, 1], &[1, 1]]).invert(), Err(FieldError::Singular));
        assert_eq!(Matrix::zeros(Q, 0, 0).invert().unwrap().shape(), (0, 0));
    }

    #[test]
    fn kernel_examples() {
        assert_eq!(Matrix::zeros(Q, 2, 2).kernel_basis().cols(), 2);
        assert_eq!(Matrix::identity(Q, 2).kernel_basis().shape(), (2, 0));

        let a = Matrix::from_rows(GF5, &[&[1, 2]]);
        let k = a.kernel_basis();
        assert_eq!(k.shape(), (2, 1));
        let v0 = match k.get(0, 0) { Scalar::Mod(x) => *x as i64, _ => unreachable!() };
        let v1 = match k.get(1, 0) { Scalar::Mod(x) => *x as i64, _ => unreachable!() };
        let solutions: Vec<(i64, i64)> = (0..5)
            .flat_map(|x| (0..5).map(move |y| (x, y)))
            .filter(|&(x, y)| (x, y) != (0, 0) && (x + 2 * y) % 5 == 0)
            .collect();
        assert_eq!(solutions.len(), 4);
        assert!(solutions.contains(&(v0, v1)));
    }

    #[test]
    fn rank_examples() {
        assert_eq!(Matrix::identity(Q, 4).rank(), 4);
        assert_eq!(Matrix::zeros(Q, 3, 5).rank(), 0);
        assert_eq!(Matrix::from_rows(Q, &[&[1, 2], &[2, 4]]).rank(), 1);
    }

    #[test]
    fn rational_text_round_trip() {
        let s = Q.parse_scalar("-4/14").unwrap();
        assert_eq!(s.to_string(), "-2/7");
        assert_eq!(Q.parse_scalar("6/2").unwrap().to_string(), "3");
        assert!(Q.parse_scalar("1/0").is_err());
        assert!(GF5.parse_scalar("5").is_err());
    }

    #[test]
    fn field_parsing() {
        assert_eq!(FieldSpec::parse("prime:7").unwrap(), FieldSpec::Prime(7));
        assert_eq!(FieldSpec::parse("rational").unwrap(), Q);
        assert!(FieldSpec::parse("prime:9").is_err());
        assert!(FieldSpec::prime(1).is_err());
    }
}
