//! Splitting `A = S − D` of a symmetric positive definite matrix and the
//! preconditioned residual `B = S⁻¹D = I − S⁻¹A`.
//!
//! Two preconditioners are provided: the diagonal of a strictly diagonally
//! dominant `A`, and the scalar `S = α·I` with `α = ‖A‖∞/2 + ε`. In both cases
//! `S` is diagonal, so `B` is similar to the symmetric matrix
//! `S^{1/2} B S^{-1/2}` and has real eigenvalues.

use crate::error::{Error, Result};
use crate::matrix::{is_positive_definite, symmetric_eigenvalues, Matrix};

/// Relative asymmetry tolerated before a matrix is rejected as non-symmetric.
pub const SYMMETRY_TOL: f64 = 1e-10;

/// Scalar preconditioner offset used when the caller does not pick one: `ε = 1e-3·‖A‖∞`.
pub const DEFAULT_EPS_FACTOR: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplittingKind {
    Diagonal,
    Scalar,
}

/// `A = S − D` together with `S⁻¹` and `B = S⁻¹D`.
#[derive(Debug, Clone)]
pub struct Splitting {
    a: Matrix,
    s_diag: Vec<f64>,
    s_inv: Matrix,
    b_mat: Matrix,
    rho_hint: Option<f64>,
    kind: SplittingKind,
}

impl Splitting {
    /// The symmetrized input matrix.
    pub fn a(&self) -> &Matrix {
        &self.a
    }

    pub fn s(&self) -> Matrix {
        Matrix::diagonal(&self.s_diag).expect("splitting diagonal is non-empty")
    }

    pub fn s_inv(&self) -> &Matrix {
        &self.s_inv
    }

    pub fn b_mat(&self) -> &Matrix {
        &self.b_mat
    }

    /// `ρ(B)`, computed from the eigenvalues of the symmetric matrix similar to `B`.
    pub fn rho_hint(&self) -> Option<f64> {
        self.rho_hint
    }

    pub fn kind(&self) -> SplittingKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.a.dim()
    }

    /// `sqrt(max sᵢ / min sᵢ)`: bounds `‖Bᵉx‖₂ ≤ κ·ρ(B)ᵉ·‖x‖₂`.
    pub fn similarity_factor(&self) -> f64 {
        let max = self.s_diag.iter().cloned().fold(f64::MIN, f64::max);
        let min = self.s_diag.iter().cloned().fold(f64::MAX, f64::min);
        (max / min).sqrt()
    }

    /// Jacobi splitting `S = diag(A)` without the dominance check.
    ///
    /// Requires only a symmetric `A` with positive diagonal; `ρ(B) < 1` is not
    /// guaranteed (see [`check_two_s_minus_a`]).
    pub fn jacobi(a: &Matrix) -> Result<Splitting> {
        let a = symmetric_input(a)?;
        let diag = a.diag();
        if let Some(row) = diag.iter().position(|&d| !(d > 0.0)) {
            return Err(Error::NonPositiveDiagonal { row });
        }
        Self::from_diagonal_preconditioner(a, diag, SplittingKind::Diagonal)
    }

    fn from_diagonal_preconditioner(
        a: Matrix,
        s_diag: Vec<f64>,
        kind: SplittingKind,
    ) -> Result<Splitting> {
        let n = a.dim();
        let inv: Vec<f64> = s_diag.iter().map(|s| 1.0 / s).collect();
        let s_inv = Matrix::diagonal(&inv)?;
        // B = I − S⁻¹A, row i scaled by 1/sᵢ.
        let b_mat = Matrix::from_fn(n, |i, j| {
            let delta = if i == j { 1.0 } else { 0.0 };
            delta - inv[i] * a.get(i, j)
        });
        // S^{-1/2} A S^{-1/2} is symmetric with the same spectrum as S⁻¹A.
        let sym = Matrix::from_fn(n, |i, j| {
            let delta = if i == j { 1.0 } else { 0.0 };
            delta - inv[i].sqrt() * a.get(i, j) * inv[j].sqrt()
        });
        let rho_hint = symmetric_eigenvalues(&sym)
            .ok()
            .map(|e| e.iter().fold(0.0f64, |m, v| m.max(v.abs())));
        Ok(Splitting {
            a,
            s_diag,
            s_inv,
            b_mat,
            rho_hint,
            kind,
        })
    }
}

fn symmetric_input(a: &Matrix) -> Result<Matrix> {
    let asymmetry = a.asymmetry();
    if asymmetry > SYMMETRY_TOL {
        return Err(Error::NotSymmetric { asymmetry });
    }
    Ok(a.symmetrized())
}

/// Diagonal preconditioner for a symmetric, strictly diagonally dominant matrix
/// with positive diagonal.
pub fn split_diagonal(a: &Matrix) -> Result<Splitting> {
    let sym = symmetric_input(a)?;
    let n = sym.dim();
    for i in 0..n {
        let d = sym.get(i, i);
        if !(d > 0.0) {
            return Err(Error::NonPositiveDiagonal { row: i });
        }
        let off: f64 = (0..n).filter(|&j| j != i).map(|j| sym.get(i, j).abs()).sum();
        if d.abs() <= off {
            return Err(Error::NotDiagonallyDominant { row: i });
        }
    }
    let diag = sym.diag();
    Splitting::from_diagonal_preconditioner(sym, diag, SplittingKind::Diagonal)
}

/// Scalar preconditioner `S⁻¹ = I/α`, `α = ‖A‖∞/2 + eps`, for symmetric positive definite `a`.
pub fn split_scalar(a: &Matrix, eps: f64) -> Result<Splitting> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "scalar preconditioner offset must be positive, got {eps}"
        )));
    }
    let sym = symmetric_input(a)?;
    crate::matrix::cholesky(&sym)?;
    let alpha = sym.inf_norm() / 2.0 + eps;
    let n = sym.dim();
    Splitting::from_diagonal_preconditioner(sym, vec![alpha; n], SplittingKind::Scalar)
}

/// [`split_scalar`] with `eps = 1e-3·‖A‖∞`.
pub fn split_scalar_default(a: &Matrix) -> Result<Splitting> {
    split_scalar(a, DEFAULT_EPS_FACTOR * a.inf_norm())
}

/// Diagonal splitting when `a` is strictly diagonally dominant, scalar otherwise.
pub fn split_auto(a: &Matrix) -> Result<Splitting> {
    match split_diagonal(a) {
        Ok(s) => Ok(s),
        Err(Error::NotDiagonallyDominant { .. }) | Err(Error::NonPositiveDiagonal { .. }) => {
            split_scalar_default(a)
        }
        Err(e) => Err(e),
    }
}

/// Whether `2S − A` is positive definite, the convergence condition `ρ(B) < 1`
/// for symmetric positive definite `A` and `S`.
pub fn check_two_s_minus_a(a: &Matrix, splitting: &Splitting) -> bool {
    if a.dim() != splitting.dim() {
        return false;
    }
    let s = splitting.s().scale(2.0);
    is_positive_definite(&(&s - &a.symmetrized()))
}
