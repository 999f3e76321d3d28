//! Oracle check of every tabulated factorization against the direct Horner sum.

use std::time::{Duration, Instant};

use super::corpus::{random_spd, rng};
use crate::error::Result;
use crate::matrix::MulCounter;
use crate::series::{horner_eval_full, nested_45, table_plans, FactorPlan};
use crate::splitting::split_scalar_default;

pub const TABLE_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct TableCheck {
    pub plan: String,
    pub order: usize,
    pub mmm_cost: u64,
    pub max_rel_err: f64,
    /// Every evaluation consumed exactly `mmm_cost` products.
    pub count_ok: bool,
}

impl TableCheck {
    pub fn passed(&self, tol: f64) -> bool {
        self.count_ok && self.max_rel_err <= tol
    }
}

#[derive(Debug, Clone)]
pub struct TableReport {
    pub checks: Vec<TableCheck>,
    pub instances: usize,
    pub elapsed: Duration,
}

impl TableReport {
    pub fn passed(&self, tol: f64) -> bool {
        self.checks.iter().all(|c| c.passed(tol))
    }
}

/// The tabulated plans for orders 2..=19 plus the order-45 nested plan.
pub fn oracle_plans() -> Vec<FactorPlan> {
    let mut plans = table_plans();
    plans.push(nested_45());
    plans
}

/// Evaluates every plan on `instances` random `dim × dim` pairs `(X, A)` with
/// `X = S⁻¹` from the scalar splitting of a random SPD `A`.
pub fn verify_tables(instances: usize, dim: usize, seed: u64) -> Result<TableReport> {
    let start = Instant::now();
    let plans = oracle_plans();
    let mut r = rng(seed);
    let mut checks: Vec<TableCheck> = plans
        .iter()
        .map(|p| TableCheck {
            plan: p.to_string(),
            order: p.order(),
            mmm_cost: p.mmm_cost(),
            max_rel_err: 0.0,
            count_ok: true,
        })
        .collect();
    for _ in 0..instances {
        let a = random_spd(dim, 1.0, 20.0, &mut r)?;
        let split = split_scalar_default(&a)?;
        let x = split.s_inv();
        for (plan, check) in plans.iter().zip(checks.iter_mut()) {
            let mut ctr = MulCounter::new();
            let z = plan.eval(x, split.a(), &mut ctr)?;
            let mut scratch = MulCounter::new();
            let zh = horner_eval_full(x, split.a(), plan.order(), &mut scratch)?;
            let rel = (&z - &zh).frobenius_norm() / zh.frobenius_norm();
            check.max_rel_err = check.max_rel_err.max(rel);
            check.count_ok &= ctr.mmm == plan.mmm_cost();
        }
    }
    Ok(TableReport {
        checks,
        instances,
        elapsed: start.elapsed(),
    })
}
