use rand::{Rng, SeedableRng};
use rand_xoshiro::SplitMix64;

use super::{apply, Matrix, Vector};
use crate::error::{Error, Result};

pub const DEFAULT_TOL: f64 = 1e-12;
pub const DEFAULT_MAX_ITER: usize = 10_000;

const RESTARTS: usize = 4;
const SEED: u64 = 0x9e37_79b9_7f4a_7c15;

/// Dominant `|eigenvalue|` of `a` by power iteration on `a²`.
///
/// Iterating with `a²` makes a `±ρ` eigenvalue pair (common for splitting
/// residuals) converge instead of oscillate. For symmetric input the estimate
/// is the Rayleigh quotient of `a²`. An iterate that collapses to zero is
/// restarted from a fresh random vector; repeated collapse means `a²` kills
/// generic vectors, so `ρ = 0`.
pub fn spectral_radius(a: &Matrix, tol: f64, max_iter: usize) -> Result<f64> {
    if !(tol > 0.0) || max_iter == 0 {
        return Err(Error::InvalidArgument(
            "spectral_radius needs tol > 0 and max_iter > 0".into(),
        ));
    }
    let scale = a.frobenius_norm();
    if scale == 0.0 {
        return Ok(0.0);
    }
    let m = a.scale(1.0 / scale);
    let symmetric = a.is_symmetric(1e-14);
    let n = a.dim();
    let mut rng = SplitMix64::seed_from_u64(SEED ^ n as u64);
    let mut best = 0.0;

    for _ in 0..RESTARTS {
        let mut x = random_unit(n, &mut rng);
        let mut prev = f64::NAN;
        let mut stable = 0;
        let mut collapsed = false;
        for _ in 0..max_iter {
            let y = apply(&m, &x);
            let z = apply(&m, &y);
            let nz = z.norm2();
            if nz < f64::MIN_POSITIVE {
                collapsed = true;
                break;
            }
            let est = if symmetric { y.norm2() } else { nz.sqrt() };
            x = z.scale(1.0 / nz);
            best = est * scale;
            if (est - prev).abs() <= tol * est {
                stable += 1;
                if stable >= 2 {
                    return Ok(best);
                }
            } else {
                stable = 0;
            }
            prev = est;
        }
        if !collapsed {
            return Err(Error::NoConvergence {
                best,
                iterations: max_iter,
            });
        }
    }
    Ok(0.0)
}

/// [`spectral_radius`] with tolerance `1e-12` and `10 000` iterations.
pub fn spectral_radius_default(a: &Matrix) -> Result<f64> {
    spectral_radius(a, DEFAULT_TOL, DEFAULT_MAX_ITER)
}

fn random_unit(n: usize, rng: &mut SplitMix64) -> Vector {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-3 {
            return Vector(v.into_iter().map(|x| x / norm).collect());
        }
    }
}

/// Eigenvalues of a symmetric matrix in ascending order (cyclic Jacobi rotations).
pub fn symmetric_eigenvalues(a: &Matrix) -> Result<Vec<f64>> {
    let asym = a.asymmetry();
    if asym > 1e-10 {
        return Err(Error::NotSymmetric { asymmetry: asym });
    }
    let n = a.dim();
    let mut m: Vec<f64> = a.symmetrized().as_slice().to_vec();
    let total: f64 = m.iter().map(|v| v * v).sum::<f64>();
    let threshold = total * 1e-32;

    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    off += m[i * n + j] * m[i * n + j];
                }
            }
        }
        if off <= threshold {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = m[k * n + p];
                    let akq = m[k * n + q];
                    m[k * n + p] = c * akp - s * akq;
                    m[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = m[p * n + k];
                    let aqk = m[q * n + k];
                    m[p * n + k] = c * apk - s * aqk;
                    m[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| m[i * n + i]).collect();
    eig.sort_by(f64::total_cmp);
    Ok(eig)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_spectrum() {
        let m = Matrix::diagonal(&[0.9, 0.1]).unwrap();
        let rho = spectral_radius_default(&m).unwrap();
        assert!((rho - 0.9).abs() <= 1e-12 * 0.9);
    }

    #[test]
    fn identity_has_unit_radius() {
        let rho = spectral_radius_default(&Matrix::identity(4)).unwrap();
        assert!((rho - 1.0).abs() < 1e-14);
    }

    #[test]
    fn opposite_pair_converges() {
        let m = Matrix::from_rows(&[[0.0, -0.5], [-0.5, 0.0]]).unwrap();
        let rho = spectral_radius_default(&m).unwrap();
        assert!((rho - 0.5).abs() < 1e-13);
    }

    #[test]
    fn nilpotent_and_zero() {
        assert_eq!(spectral_radius_default(&Matrix::zeros(3)).unwrap(), 0.0);
        let n = Matrix::from_rows(&[[0.0, 1.0], [0.0, 0.0]]).unwrap();
        assert_eq!(spectral_radius_default(&n).unwrap(), 0.0);
    }

    #[test]
    fn rotations_have_norm_preserving_squares() {
        // Eigenvalues ±0.8i: a² = -0.64 I, so the estimate is exact immediately.
        let r = Matrix::from_rows(&[[0.0, -0.8], [0.8, 0.0]]).unwrap();
        let rho = spectral_radius_default(&r).unwrap();
        assert!((rho - 0.8).abs() < 1e-13);
        // A scaled rotation squares to a scaled rotation.
        let c = (0.3f64).cos() * 0.9;
        let s = (0.3f64).sin() * 0.9;
        let r = Matrix::from_rows(&[[c, -s], [s, c]]).unwrap();
        match spectral_radius(&r, 1e-12, 50) {
            Ok(rho) => assert!((rho - 0.9).abs() < 1e-10),
            Err(Error::NoConvergence { best, .. }) => assert!(best > 0.0),
            Err(e) => panic!("unexpected error {e}"),
        }
    }

    #[test]
    fn jacobi_eigenvalues_of_small_matrix() {
        let m = Matrix::from_rows(&[[2.0, 1.0], [1.0, 2.0]]).unwrap();
        let e = symmetric_eigenvalues(&m).unwrap();
        assert!((e[0] - 1.0).abs() < 1e-14);
        assert!((e[1] - 3.0).abs() < 1e-14);
        assert!(symmetric_eigenvalues(&Matrix::from_rows(&[[1.0, 2.0], [0.0, 1.0]]).unwrap()).is_err());
    }

    #[test]
    fn bad_parameters() {
        assert!(spectral_radius(&Matrix::identity(2), 0.0, 10).is_err());
        assert!(spectral_radius(&Matrix::identity(2), 1e-3, 0).is_err());
    }
}
