use super::{Matrix, Vector};
use crate::error::{Error, Result};

/// Lower-triangular Cholesky factor `L` with `A = L·Lᵀ`.
#[derive(Debug, Clone)]
pub struct Cholesky {
    l: Matrix,
}

/// Cholesky factorization of the symmetric part of `a`.
///
/// A pivot at or below `1e-12·‖A‖∞` is treated as a failure, so nearly
/// singular matrices are reported as not positive definite.
pub fn cholesky(a: &Matrix) -> Result<Cholesky> {
    let n = a.dim();
    let tol = 1e-12 * a.inf_norm();
    let mut l = vec![0.0; n * n];
    for j in 0..n {
        let mut d = a.get(j, j);
        for k in 0..j {
            d -= l[j * n + k] * l[j * n + k];
        }
        if !(d > tol) {
            return Err(Error::NotPositiveDefinite { pivot: j, value: d });
        }
        let djj = d.sqrt();
        l[j * n + j] = djj;
        for i in j + 1..n {
            let mut s = 0.5 * (a.get(i, j) + a.get(j, i));
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            l[i * n + j] = s / djj;
        }
    }
    Ok(Cholesky {
        l: Matrix::new(n, l)?,
    })
}

pub fn is_positive_definite(a: &Matrix) -> bool {
    cholesky(a).is_ok()
}

impl Cholesky {
    pub fn factor(&self) -> &Matrix {
        &self.l
    }

    pub fn solve(&self, b: &Vector) -> Result<Vector> {
        let n = self.l.dim();
        if b.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: b.dim(),
            });
        }
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut s = b[i];
            for k in 0..i {
                s -= self.l.get(i, k) * y[k];
            }
            y[i] = s / self.l.get(i, i);
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in i + 1..n {
                s -= self.l.get(k, i) * x[k];
            }
            x[i] = s / self.l.get(i, i);
        }
        Vector::new(x)
    }
}

/// Direct solve of `a·x = b` for symmetric positive definite `a`.
pub fn solve_spd(a: &Matrix, b: &Vector) -> Result<Vector> {
    cholesky(a)?.solve(b)
}
