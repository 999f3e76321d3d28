//! Dense real square matrices and vectors.
//!
//! Every matrix-by-matrix product that belongs to an algorithm under test goes
//! through [`mat_mul`] (or the crate-internal [`mul`]) with a [`MulCounter`],
//! so that the multiplication counts predicted for a factorization plan can be
//! compared with the counts actually consumed. Additions, subtractions and
//! scalings are free in this cost model.

mod factor;
pub mod io;
mod spectral;

use std::fmt;
use std::ops::{Add, AddAssign, Index, Sub};

use crate::error::{Error, Result};

pub use factor::{cholesky, is_positive_definite, solve_spd, Cholesky};
pub use spectral::{
    spectral_radius, spectral_radius_default, symmetric_eigenvalues, DEFAULT_MAX_ITER,
    DEFAULT_TOL,
};

/// Counts matrix-by-matrix (`mmm`) and matrix-by-vector (`mvm`) products.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct MulCounter {
    pub mmm: u64,
    pub mvm: u64,
}

impl MulCounter {
    pub fn new() -> Self {
        Self::default()
    }

    /// Counts accumulated since `earlier`, a snapshot of this same counter.
    pub fn since(&self, earlier: &MulCounter) -> MulCounter {
        MulCounter {
            mmm: self.mmm - earlier.mmm,
            mvm: self.mvm - earlier.mvm,
        }
    }
}

impl Add for MulCounter {
    type Output = MulCounter;

    fn add(self, rhs: MulCounter) -> MulCounter {
        MulCounter {
            mmm: self.mmm + rhs.mmm,
            mvm: self.mvm + rhs.mvm,
        }
    }
}

impl AddAssign for MulCounter {
    fn add_assign(&mut self, rhs: MulCounter) {
        self.mmm += rhs.mmm;
        self.mvm += rhs.mvm;
    }
}

/// Frobenius and maximum-row-sum norms of a matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Norms {
    pub frobenius: f64,
    pub inf_norm: f64,
}

/// Dense real square matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct Matrix {
    dim: usize,
    data: Vec<f64>,
}

impl Matrix {
    /// Builds a `dim × dim` matrix from row-major entries.
    pub fn new(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::EmptyMatrix);
        }
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: data.len(),
            });
        }
        if let Some(index) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { dim, data })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            let row = row.as_ref();
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Self::new(dim, data)
    }

    /// Builds a matrix from a closure over `(row, col)`.
    ///
    /// Panics if `dim == 0` or the closure yields a non-finite value.
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        Self::new(dim, data).expect("from_fn produced an invalid matrix")
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim > 0, "matrix dimension must be positive");
        Self {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = 1.0;
        }
        m
    }

    pub fn diagonal(diag: &[f64]) -> Result<Self> {
        let dim = diag.len();
        if dim == 0 {
            return Err(Error::EmptyMatrix);
        }
        let mut data = vec![0.0; dim * dim];
        for (i, &d) in diag.iter().enumerate() {
            data[i * dim + i] = d;
        }
        Self::new(dim, data)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.dim, |i, j| self.get(j, i))
    }

    pub fn scale(&self, c: f64) -> Matrix {
        Matrix {
            dim: self.dim,
            data: self.data.iter().map(|v| c * v).collect(),
        }
    }

    /// `c·I + self`.
    pub fn add_identity(&self, c: f64) -> Matrix {
        let mut out = self.clone();
        for i in 0..self.dim {
            out.data[i * self.dim + i] += c;
        }
        out
    }

    /// `I − self`.
    pub fn identity_minus(&self) -> Matrix {
        let mut out = self.scale(-1.0);
        for i in 0..self.dim {
            out.data[i * self.dim + i] += 1.0;
        }
        out
    }

    /// `(self + selfᵀ) / 2`.
    pub fn symmetrized(&self) -> Matrix {
        Matrix::from_fn(self.dim, |i, j| 0.5 * (self.get(i, j) + self.get(j, i)))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn inf_norm(&self) -> f64 {
        (0..self.dim)
            .map(|i| self.row(i).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn norms(&self) -> Norms {
        norms(self)
    }

    /// `‖A − Aᵀ‖_F / ‖A‖_F`, zero for the zero matrix.
    pub fn asymmetry(&self) -> f64 {
        let fro = self.frobenius_norm();
        if fro == 0.0 {
            return 0.0;
        }
        let mut acc = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                let d = self.get(i, j) - self.get(j, i);
                acc += d * d;
            }
        }
        acc.sqrt() / fro
    }

    pub fn is_symmetric(&self, rel_tol: f64) -> bool {
        self.asymmetry() <= rel_tol
    }

    /// Largest absolute entrywise difference.
    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub(crate) fn check_same_dim(&self, other: &Matrix) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        Ok(())
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.dim + j]
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix({}x{}) [", self.dim, self.dim)?;
        for i in 0..self.dim {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        write!(f, "]")
    }
}

impl Add for &Matrix {
    type Output = Matrix;

    fn add(self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.dim, rhs.dim, "matrix dimension mismatch in addition");
        Matrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &Matrix {
    type Output = Matrix;

    fn sub(self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.dim, rhs.dim, "matrix dimension mismatch in subtraction");
        Matrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

/// Dense real vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Vector(Vec<f64>);

impl Vector {
    pub fn new(data: Vec<f64>) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::EmptyMatrix);
        }
        if let Some(index) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self(data))
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim > 0, "vector dimension must be positive");
        Self(vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn norm2(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn scale(&self, c: f64) -> Vector {
        Vector(self.0.iter().map(|v| c * v).collect())
    }
}

impl Index<usize> for Vector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl Add for &Vector {
    type Output = Vector;

    fn add(self, rhs: &Vector) -> Vector {
        assert_eq!(self.dim(), rhs.dim(), "vector dimension mismatch");
        Vector(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &Vector {
    type Output = Vector;

    fn sub(self, rhs: &Vector) -> Vector {
        assert_eq!(self.dim(), rhs.dim(), "vector dimension mismatch");
        Vector(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

/// Dense product `a·b`; counts one `mmm`.
pub fn mat_mul(a: &Matrix, b: &Matrix, ctr: &mut MulCounter) -> Result<Matrix> {
    a.check_same_dim(b)?;
    Ok(mul(a, b, ctr))
}

/// Counted product for callers that have already validated dimensions.
pub(crate) fn mul(a: &Matrix, b: &Matrix, ctr: &mut MulCounter) -> Matrix {
    ctr.mmm += 1;
    product(a, b)
}

/// `I − x·a`; one counted product.
pub(crate) fn residual(x: &Matrix, a: &Matrix, ctr: &mut MulCounter) -> Matrix {
    mul(x, a, ctr).identity_minus()
}

fn product(a: &Matrix, b: &Matrix) -> Matrix {
    debug_assert_eq!(a.dim, b.dim);
    let n = a.dim;
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        let out_row = &mut out[i * n..(i + 1) * n];
        for k in 0..n {
            let aik = a.data[i * n + k];
            if aik == 0.0 {
                continue;
            }
            let b_row = &b.data[k * n..(k + 1) * n];
            for (o, bkj) in out_row.iter_mut().zip(b_row) {
                *o += aik * bkj;
            }
        }
    }
    Matrix { dim: n, data: out }
}

/// `a^e` by binary exponentiation, not counted: this is an oracle for the
/// exponent models, not an algorithm under test.
pub fn mat_pow(a: &Matrix, e: u64) -> Matrix {
    let mut scratch = MulCounter::new();
    mat_pow_counted(a, e, &mut scratch)
}

/// `a^e` by binary exponentiation, counting every product.
pub fn mat_pow_counted(a: &Matrix, mut e: u64, ctr: &mut MulCounter) -> Matrix {
    let mut result: Option<Matrix> = None;
    let mut base = a.clone();
    while e > 0 {
        if e & 1 == 1 {
            result = Some(match result {
                None => base.clone(),
                Some(r) => mul(&r, &base, ctr),
            });
        }
        e >>= 1;
        if e > 0 {
            base = mul(&base, &base, ctr);
        }
    }
    result.unwrap_or_else(|| Matrix::identity(a.dim))
}

/// `a·v`; counts one `mvm`.
pub fn mat_vec(a: &Matrix, v: &Vector, ctr: &mut MulCounter) -> Result<Vector> {
    if a.dim != v.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim,
            found: v.dim(),
        });
    }
    ctr.mvm += 1;
    Ok(apply(a, v))
}

pub(crate) fn apply(a: &Matrix, v: &Vector) -> Vector {
    Vector(
        (0..a.dim)
            .map(|i| a.row(i).iter().zip(&v.0).map(|(x, y)| x * y).sum())
            .collect(),
    )
}

pub fn norms(a: &Matrix) -> Norms {
    Norms {
        frobenius: a.frobenius_norm(),
        inf_norm: a.inf_norm(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive(a: &Matrix, b: &Matrix) -> Matrix {
        let n = a.dim();
        Matrix::from_fn(n, |i, j| {
            let mut s = 0.0;
            for k in 0..n {
                s += a.get(i, k) * b.get(k, j);
            }
            s
        })
    }

    #[test]
    fn identity_product_counts_one() {
        let m = Matrix::from_rows(&[[1.0, 2.0, 3.0], [4.0, 5.0, 6.0], [7.0, 8.0, 10.0]]).unwrap();
        let mut ctr = MulCounter::new();
        let p = mat_mul(&Matrix::identity(3), &m, &mut ctr).unwrap();
        assert_eq!(p, m);
        assert_eq!(ctr.mmm, 1);
        assert_eq!(ctr.mvm, 0);
    }

    #[test]
    fn diagonal_product() {
        let mut ctr = MulCounter::new();
        let p = mat_mul(
            &Matrix::diagonal(&[2.0, 3.0]).unwrap(),
            &Matrix::diagonal(&[5.0, 7.0]).unwrap(),
            &mut ctr,
        )
        .unwrap();
        assert_eq!(p, Matrix::diagonal(&[10.0, 21.0]).unwrap());
    }

    #[test]
    fn product_matches_triple_loop() {
        let a = Matrix::from_fn(4, |i, j| ((i * 7 + j * 3) % 5) as f64 - 1.5 + 0.1 * j as f64);
        let b = Matrix::from_fn(4, |i, j| ((i * 2 + j * 5) % 7) as f64 * 0.25 - 0.3 * i as f64);
        let mut ctr = MulCounter::new();
        let p = mat_mul(&a, &b, &mut ctr).unwrap();
        let q = naive(&a, &b);
        for (x, y) in p.as_slice().iter().zip(q.as_slice()) {
            assert!((x - y).abs() <= 4.0 * f64::EPSILON * x.abs().max(1.0));
        }
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let mut ctr = MulCounter::new();
        let err = mat_mul(&Matrix::identity(2), &Matrix::identity(3), &mut ctr).unwrap_err();
        assert_eq!(err, Error::DimensionMismatch { expected: 2, found: 3 });
        assert_eq!(ctr.mmm, 0);
    }

    #[test]
    fn construction_rejects_bad_input() {
        assert_eq!(Matrix::new(0, vec![]).unwrap_err(), Error::EmptyMatrix);
        assert!(matches!(
            Matrix::new(2, vec![1.0; 3]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert_eq!(
            Matrix::new(1, vec![f64::NAN]).unwrap_err(),
            Error::NonFinite { index: 0 }
        );
        assert!(Vector::new(vec![1.0, f64::INFINITY]).is_err());
    }

    #[test]
    fn powers() {
        let m = Matrix::diagonal(&[0.5, 0.2]).unwrap();
        assert_eq!(mat_pow(&m, 0), Matrix::identity(2));
        assert_eq!(mat_pow(&m, 1), m);
        let p6 = mat_pow(&m, 6);
        assert!((p6.get(0, 0) - 0.015625).abs() < 1e-18);
        assert!((p6.get(1, 1) - 0.000064).abs() < 1e-18);
        assert_eq!(p6.get(0, 1), 0.0);
    }

    #[test]
    fn counted_power_uses_binary_method() {
        let m = Matrix::diagonal(&[0.5, 0.2]).unwrap();
        let mut ctr = MulCounter::new();
        mat_pow_counted(&m, 13, &mut ctr);
        // 13 = 0b1101: three squarings, two accumulating products.
        assert_eq!(ctr.mmm, 5);
    }

    #[test]
    fn norm_examples() {
        let m = Matrix::from_rows(&[[1.0, -2.0], [3.0, 4.0]]).unwrap();
        assert_eq!(m.inf_norm(), 7.0);
        assert!((Matrix::identity(5).frobenius_norm() - 5f64.sqrt()).abs() < 1e-15);
        let z = Matrix::zeros(3).norms();
        assert_eq!(z.frobenius, 0.0);
        assert_eq!(z.inf_norm, 0.0);
    }

    #[test]
    fn mat_vec_counts_mvm() {
        let mut ctr = MulCounter::new();
        let v = Vector::new(vec![1.0, 2.0]).unwrap();
        let m = Matrix::from_rows(&[[1.0, 1.0], [0.0, 2.0]]).unwrap();
        let r = mat_vec(&m, &v, &mut ctr).unwrap();
        assert_eq!(r.as_slice(), &[3.0, 4.0]);
        assert_eq!(ctr, MulCounter { mmm: 0, mvm: 1 });
    }

    #[test]
    fn counters_merge_by_summation() {
        let a = MulCounter { mmm: 3, mvm: 1 };
        let b = MulCounter { mmm: 4, mvm: 2 };
        assert_eq!(a + b, MulCounter { mmm: 7, mvm: 3 });
        assert_eq!((a + b).since(&a), b);
    }
}
