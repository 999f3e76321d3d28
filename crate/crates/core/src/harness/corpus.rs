//! Seeded random test matrices.

use rand::{Rng, SeedableRng};
use rand_xoshiro::SplitMix64;

use crate::error::{Error, Result};
use crate::matrix::Matrix;

pub fn rng(seed: u64) -> SplitMix64 {
    SplitMix64::seed_from_u64(seed)
}

/// Symmetric, strictly diagonally dominant matrix whose Jacobi residual has
/// spectral radius exactly `rho`.
///
/// Off-diagonal entries are drawn from `[0.1, 1)` and each diagonal entry is
/// `row_sum / rho`, so `S⁻¹D` is `−rho` times a row-stochastic matrix.
pub fn sdd_with_radius(dim: usize, rho: f64, rng: &mut SplitMix64) -> Result<Matrix> {
    if dim < 2 {
        return Err(Error::InvalidArgument("sdd corpus needs dim >= 2".into()));
    }
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::InvalidArgument(format!("target radius must lie in (0, 1), got {rho}")));
    }
    let mut off = vec![0.0; dim * dim];
    for i in 0..dim {
        for j in i + 1..dim {
            let v = rng.random_range(0.1..1.0);
            off[i * dim + j] = v;
            off[j * dim + i] = v;
        }
    }
    let mut data = off.clone();
    for i in 0..dim {
        let row: f64 = off[i * dim..(i + 1) * dim].iter().sum();
        data[i * dim + i] = row / rho;
    }
    Matrix::new(dim, data)
}

/// `count` matrices of [`sdd_with_radius`] with radii uniform in `[rho_lo, rho_hi]`.
pub fn sdd_corpus(count: usize, dim: usize, rho_lo: f64, rho_hi: f64, seed: u64) -> Result<Vec<Matrix>> {
    let mut r = rng(seed);
    (0..count)
        .map(|_| {
            let rho = if rho_hi > rho_lo { r.random_range(rho_lo..=rho_hi) } else { rho_lo };
            sdd_with_radius(dim, rho, &mut r)
        })
        .collect()
}

/// Radii for corpora whose exponent-model powers stay well above rounding:
/// `0.998^2500 ≈ 7e-3`.
pub const SLOW_RHO: (f64, f64) = (0.998, 0.9995);

/// Random orthogonal `Q` (Gram-Schmidt on uniform entries) and `A = Q Λ Qᵀ`
/// with eigenvalues spread over `[lo, hi]`, both ends included.
pub fn random_spd(dim: usize, lo: f64, hi: f64, rng: &mut SplitMix64) -> Result<Matrix> {
    if !(lo > 0.0 && hi >= lo) || dim == 0 {
        return Err(Error::InvalidArgument("random_spd needs dim >= 1 and 0 < lo <= hi".into()));
    }
    let mut q: Vec<Vec<f64>> = Vec::with_capacity(dim);
    while q.len() < dim {
        let mut v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        for u in &q {
            let d: f64 = v.iter().zip(u).map(|(a, b)| a * b).sum();
            v.iter_mut().zip(u).for_each(|(a, b)| *a -= d * b);
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-6 {
            q.push(v.into_iter().map(|x| x / norm).collect());
        }
    }
    let eig: Vec<f64> = (0..dim)
        .map(|i| match i {
            0 => lo,
            _ if i == dim - 1 => hi,
            _ => rng.random_range(lo..=hi),
        })
        .collect();
    let a = Matrix::from_fn(dim, |i, j| (0..dim).map(|m| q[m][i] * eig[m] * q[m][j]).sum());
    Ok(a.symmetrized())
}
