//! Test fixtures, comparison runs and CSV output.

pub mod corpus;
pub mod harmonic;
pub mod records;
pub mod surfaces;
pub mod verify;

use std::time::Instant;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matrix::{mat_vec, spectral_radius_default, Matrix, MulCounter, Vector};
use crate::newton_schulz::{
    composite_step, double_ns_step, initial_series, ns_step, sri_step, DoubleNsState, Execution, NsState,
    RateSchedule, SriState,
};
use crate::richardson::{richardson_recursive_step, richardson_step, RichardsonState};
use crate::series::{plan_binary, plan_order, FactorPlan, MAX_PLAN_ORDER};
use crate::splitting::{split_auto, Splitting};

pub use harmonic::{gen_harmonic_matrix, HarmonicRegressorSpec, HarmonicSystem};
pub use records::{Method, RunRecord};

/// Error growth over the initial error that marks a run as divergent.
pub const DIVERGENCE_FACTOR: f64 = 1e3;

/// One method of a comparison run.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodSpec {
    pub method: Method,
    /// Newton-Schulz order `n` (the order `p` of the two-loop scheme).
    pub order_n: usize,
    /// Order of the initial series.
    pub h: usize,
    /// Neumann order of the direct Richardson form.
    pub q: usize,
    pub rates: RateSchedule,
}

impl MethodSpec {
    pub fn new(method: Method, order_n: usize) -> Self {
        Self {
            method,
            order_n,
            h: 1,
            q: order_n,
            rates: RateSchedule::Power { m: 2, w: 2 },
        }
    }

    pub fn with_h(mut self, h: usize) -> Self {
        self.h = h;
        self
    }

    pub fn with_q(mut self, q: usize) -> Self {
        self.q = q;
        self
    }

    pub fn with_rates(mut self, rates: RateSchedule) -> Self {
        self.rates = rates;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RunOptions {
    /// Record wall-clock time per step; off gives byte-identical output across runs.
    pub timing: bool,
    pub exec: Execution,
}

/// A splitting plus, for the estimators, the right-hand side and reference solution.
#[derive(Debug, Clone)]
pub struct Problem {
    pub split: Splitting,
    pub rhs: Option<(Vector, Vector)>,
}

impl Problem {
    pub fn inversion(split: Splitting) -> Self {
        Self { split, rhs: None }
    }

    pub fn estimation(split: Splitting, b: Vector, theta_star: Vector) -> Result<Self> {
        let n = split.dim();
        for v in [&b, &theta_star] {
            if v.dim() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: v.dim(),
                });
            }
        }
        Ok(Self {
            split,
            rhs: Some((b, theta_star)),
        })
    }

    fn rhs(&self, m: Method) -> Result<(&Vector, &Vector)> {
        self.rhs
            .as_ref()
            .map(|(b, t)| (b, t))
            .ok_or_else(|| Error::InvalidArgument(format!("method {m} needs a right-hand side")))
    }

    fn rho(&self) -> Result<f64> {
        match self.split.rho_hint() {
            Some(r) => Ok(r),
            None => spectral_radius_default(self.split.b_mat()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Comparison {
    pub records: Vec<RunRecord>,
    /// Methods whose error grew past [`DIVERGENCE_FACTOR`] times the initial error.
    pub diverged: Vec<Method>,
    pub rho: f64,
}

impl Comparison {
    pub fn for_method(&self, m: Method) -> impl Iterator<Item = &RunRecord> {
        self.records.iter().filter(move |r| r.method == m)
    }

    pub fn final_error(&self, m: Method) -> Option<f64> {
        self.for_method(m).last().map(|r| r.error_norm)
    }
}

/// Searched plan up to order 64, doubling plan beyond.
pub fn plan_for(h: usize) -> Result<FactorPlan> {
    if h <= MAX_PLAN_ORDER {
        plan_order(h)
    } else {
        plan_binary(h)
    }
}

/// [`run_problem`] on `split_auto(a)`.
pub fn run_comparison(
    a: &Matrix,
    b: &Vector,
    theta_star: &Vector,
    methods: &[MethodSpec],
    steps: usize,
    opts: RunOptions,
) -> Result<Comparison> {
    let problem = Problem::estimation(split_auto(a)?, b.clone(), theta_star.clone())?;
    run_problem(&problem, methods, steps, opts)
}

/// Runs every method for `steps` steps; methods run on separate workers and
/// records keep the order of `methods`.
pub fn run_problem(problem: &Problem, methods: &[MethodSpec], steps: usize, opts: RunOptions) -> Result<Comparison> {
    let rho = problem.rho()?;
    let runs: Vec<Result<(Vec<RunRecord>, bool)>> = methods
        .par_iter()
        .map(|spec| run_method(problem, spec, steps, rho, opts))
        .collect();
    let mut records = Vec::new();
    let mut diverged = Vec::new();
    for (spec, run) in methods.iter().zip(runs) {
        let (recs, div) = run?;
        records.extend(recs);
        if div {
            diverged.push(spec.method);
        }
    }
    Ok(Comparison { records, diverged, rho })
}

fn pow_bound(scale: f64, rho: f64, e: Option<u128>) -> f64 {
    match e {
        Some(e) => scale * rho.powf(e as f64),
        None if rho < 1.0 => 0.0,
        None => f64::INFINITY,
    }
}

enum Runner {
    Ns(NsState, Option<FactorPlan>),
    Composite(NsState),
    Double(DoubleNsState),
    Sri(SriState),
    Rich(RichardsonState, bool),
}

struct Measure {
    error: f64,
    bound: f64,
    exponent: Option<u128>,
    mmm: u64,
}

fn run_method(
    problem: &Problem,
    spec: &MethodSpec,
    steps: usize,
    rho: f64,
    opts: RunOptions,
) -> Result<(Vec<RunRecord>, bool)> {
    let split = &problem.split;
    let a = split.a();
    let kappa = split.similarity_factor();
    let inv_scale = (split.dim() as f64).sqrt() * kappa;
    if spec.order_n == 0 || spec.h == 0 {
        return Err(Error::InvalidArgument("methods need order >= 1 and h >= 1".into()));
    }

    let clock = Instant::now();
    let st0 = initial_series(split, &plan_for(spec.h)?, spec.order_n)?;
    let ns_plan = if spec.order_n >= 2 { Some(plan_for(spec.order_n)?) } else { None };
    let mut runner = match spec.method {
        Method::Ns | Method::NsEstimator => Runner::Ns(st0, ns_plan),
        Method::Composite => Runner::Composite(st0),
        Method::Double => Runner::Double(DoubleNsState::init(&st0, a)?),
        Method::Sri => Runner::Sri(SriState::init(&st0, spec.order_n)?),
        Method::Richardson => {
            let (b, _) = problem.rhs(spec.method)?;
            Runner::Rich(RichardsonState::new(DoubleNsState::init(&st0, a)?, b, spec.q)?, false)
        }
        Method::RichardsonRecursive => {
            let (b, _) = problem.rhs(spec.method)?;
            Runner::Rich(RichardsonState::new_recursive(DoubleNsState::init(&st0, a)?, b)?, true)
        }
    };
    let init_ns = clock.elapsed().as_nanos();

    let mut theta0_err = None;
    let mut measure = |runner: &Runner| -> Result<Measure> {
        let inv = |f: &Matrix, e: Option<u128>, c: MulCounter| Measure {
            error: f.frobenius_norm(),
            bound: pow_bound(inv_scale, rho, e),
            exponent: e,
            mmm: c.mmm,
        };
        Ok(match runner {
            Runner::Ns(st, _) if spec.method == Method::NsEstimator => {
                let (b, theta_star) = problem.rhs(spec.method)?;
                let mut scratch = MulCounter::new();
                let theta = mat_vec(st.g(), b, &mut scratch)?;
                Measure {
                    error: (&theta - theta_star).norm2(),
                    bound: pow_bound(kappa * theta_star.norm2(), rho, st.exponent()),
                    exponent: st.exponent(),
                    mmm: st.counter().mmm,
                }
            }
            Runner::Ns(st, _) | Runner::Composite(st) => inv(st.f(), st.exponent(), st.counter()),
            Runner::Double(st) => inv(st.f(), st.exponent(), st.counter()),
            Runner::Sri(st) => inv(st.f(), st.exponent(), st.counter()),
            Runner::Rich(st, _) => {
                let (_, theta_star) = problem.rhs(spec.method)?;
                let err = (st.theta() - theta_star).norm2();
                let e0 = *theta0_err.get_or_insert(err);
                Measure {
                    error: err,
                    bound: pow_bound(kappa * e0, rho, st.gamma()),
                    exponent: st.gamma(),
                    mmm: st.counter().mmm,
                }
            }
        })
    };

    let mut records = Vec::with_capacity(steps + 1);
    let mut push = |k: usize, m: Measure, ns: u128| {
        records.push(RunRecord {
            method: spec.method,
            k,
            error_norm: m.error,
            predicted_bound: m.bound,
            exponent: m.exponent,
            mmm_cum: m.mmm,
            wall_ns: if opts.timing { ns as u64 } else { 0 },
        });
    };
    let first = measure(&runner)?;
    let initial_error = first.error;
    let mut diverged = false;
    push(0, first, init_ns);

    for k in 1..=steps {
        let clock = Instant::now();
        runner = match runner {
            Runner::Ns(st, plan) => {
                let next = ns_step(&st, a, plan.as_ref())?;
                Runner::Ns(next, plan)
            }
            Runner::Composite(st) => Runner::Composite(composite_step(&st, split, &spec.rates.at(k)?, opts.exec)?),
            Runner::Double(st) => Runner::Double(double_ns_step(&st, a, opts.exec)?),
            Runner::Sri(st) => Runner::Sri(sri_step(&st, a)?),
            Runner::Rich(st, recursive) => {
                let (b, _) = problem.rhs(spec.method)?;
                let next = if recursive {
                    richardson_recursive_step(&st, a, b, opts.exec)?
                } else {
                    richardson_step(&st, a, b, opts.exec)?
                };
                Runner::Rich(next, recursive)
            }
        };
        let m = measure(&runner)?;
        if !m.error.is_finite() || m.error > DIVERGENCE_FACTOR * initial_error.max(f64::MIN_POSITIVE) {
            diverged = true;
        }
        push(k, m, clock.elapsed().as_nanos());
    }
    Ok((records, diverged))
}
