//! Information matrix of a harmonic regressor.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::matrix::{cholesky, mat_vec, symmetric_eigenvalues, Matrix, MulCounter, Vector};

#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicRegressorSpec {
    /// Radian frequencies in `(0, π)`.
    pub frequencies: Vec<f64>,
    pub num_samples: usize,
    pub theta_star: Vector,
    /// Appends a constant `1` to the regressor.
    pub bias: bool,
}

impl Default for HarmonicRegressorSpec {
    fn default() -> Self {
        Self {
            frequencies: vec![0.10, 0.11, 0.12],
            num_samples: 200,
            theta_star: Vector::new(vec![1.0, -1.0, 0.5, -0.5, 0.25, -0.25]).expect("finite"),
            bias: false,
        }
    }
}

impl HarmonicRegressorSpec {
    pub fn dim(&self) -> usize {
        2 * self.frequencies.len() + usize::from(self.bias)
    }

    /// Same frequencies and samples with `θ_* = (1, −1, 1/2, −1/2, …)`.
    pub fn with_default_theta(frequencies: Vec<f64>, num_samples: usize, bias: bool) -> Result<Self> {
        let dim = 2 * frequencies.len() + usize::from(bias);
        let theta = (0..dim)
            .map(|i| {
                let mag = 0.5f64.powi((i / 2) as i32);
                if i % 2 == 0 { mag } else { -mag }
            })
            .collect();
        Ok(Self {
            frequencies,
            num_samples,
            theta_star: Vector::new(theta)?,
            bias,
        })
    }

    fn validate(&self) -> Result<()> {
        if self.frequencies.is_empty() {
            return Err(Error::InvalidArgument("harmonic regressor needs at least one frequency".into()));
        }
        if let Some(f) = self.frequencies.iter().find(|f| !(**f > 0.0 && **f < PI)) {
            return Err(Error::InvalidArgument(format!("frequency {f} is outside (0, pi)")));
        }
        for (i, a) in self.frequencies.iter().enumerate() {
            if self.frequencies[i + 1..].contains(a) {
                return Err(Error::InvalidArgument(format!("frequency {a} is repeated")));
            }
        }
        if self.num_samples == 0 {
            return Err(Error::InvalidArgument("harmonic regressor needs at least one sample".into()));
        }
        if self.theta_star.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: self.theta_star.dim(),
            });
        }
        Ok(())
    }

    pub fn regressor(&self, t: usize) -> Vec<f64> {
        let t = t as f64;
        let mut phi: Vec<f64> = self
            .frequencies
            .iter()
            .flat_map(|w| [(w * t).cos(), (w * t).sin()])
            .collect();
        if self.bias {
            phi.push(1.0);
        }
        phi
    }
}

#[derive(Debug, Clone)]
pub struct HarmonicSystem {
    pub a: Matrix,
    pub b: Vector,
    pub theta_star: Vector,
    /// `λ_max / λ_min` of `A`.
    pub condition_number: f64,
}

/// `A = Σ_{t=1..N} φ(t)φ(t)ᵀ`, `b = Aθ_*`.
pub fn gen_harmonic_matrix(spec: &HarmonicRegressorSpec) -> Result<HarmonicSystem> {
    spec.validate()?;
    let d = spec.dim();
    let mut acc = vec![0.0; d * d];
    for t in 1..=spec.num_samples {
        let phi = spec.regressor(t);
        for i in 0..d {
            for j in 0..d {
                acc[i * d + j] += phi[i] * phi[j];
            }
        }
    }
    let a = Matrix::new(d, acc)?;
    if cholesky(&a).is_err() {
        return Err(Error::InvalidArgument(
            "regressor information matrix is singular (too few samples or aliased frequencies)".into(),
        ));
    }
    let eig = symmetric_eigenvalues(&a)?;
    let mut ctr = MulCounter::new();
    let b = mat_vec(&a, &spec.theta_star, &mut ctr)?;
    Ok(HarmonicSystem {
        condition_number: eig[d - 1] / eig[0],
        a,
        b,
        theta_star: spec.theta_star.clone(),
    })
}
