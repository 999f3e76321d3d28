//! High-order Newton-Schulz iterations for `A⁻¹` started from a splitting.
//!
//! Every state tracks the exponent `e` with `F_k = Bᵉ` under exact arithmetic,
//! `None` once it no longer fits in a `u128`.

use crate::error::{Error, Result};
use crate::matrix::{mul, residual, Matrix, MulCounter};
use crate::series::{plan_binary, plan_order, FactorPlan};
use crate::splitting::Splitting;

/// Iteration cap used by callers that stop on convergence.
pub const DEFAULT_K_MAX: usize = 30;

/// Largest composite rate evaluated with a searched plan; larger ones use doubling.
const PLANNED_RATE_MAX: usize = 19;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    #[default]
    Serial,
    Concurrent,
}

impl Execution {
    pub(crate) fn join<A, B>(
        self,
        fa: impl FnOnce() -> A + Send,
        fb: impl FnOnce() -> B + Send,
    ) -> (A, B)
    where
        A: Send,
        B: Send,
    {
        match self {
            Execution::Serial => {
                let a = fa();
                (a, fb())
            }
            Execution::Concurrent => rayon::join(fa, fb),
        }
    }
}

/// `‖F‖_F ≤ 1e-13·√dim`.
pub fn has_converged(f: &Matrix) -> bool {
    f.frobenius_norm() <= 1e-13 * (f.dim() as f64).sqrt()
}

pub(crate) fn horner(y: &Matrix, x: &Matrix, n: usize, ctr: &mut MulCounter) -> Matrix {
    let mut z = x.clone();
    for _ in 1..n {
        z = &mul(y, &z, ctr) + x;
    }
    z
}

fn check_order(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidArgument("iteration order must be at least 1".into()));
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct NsState {
    pub(crate) g: Matrix,
    pub(crate) f: Matrix,
    pub(crate) k: usize,
    pub(crate) order_n: usize,
    pub(crate) h0: usize,
    pub(crate) ctr: MulCounter,
    pub(crate) exponent: Option<u128>,
}

impl NsState {
    /// `G_k`, the current estimate of `A⁻¹`.
    pub fn g(&self) -> &Matrix {
        &self.g
    }

    /// `F_k = I − G_k·A`.
    pub fn f(&self) -> &Matrix {
        &self.f
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn order_n(&self) -> usize {
        self.order_n
    }

    pub fn h0(&self) -> usize {
        self.h0
    }

    pub fn counter(&self) -> MulCounter {
        self.ctr
    }

    pub fn exponent(&self) -> Option<u128> {
        self.exponent
    }
}

/// `G₀ = Σ_{j<h} Bʲ S⁻¹` through `plan` with `Y = B` supplied, then `F₀ = I − G₀A`.
pub fn initial_series(split: &Splitting, plan: &FactorPlan, order_n: usize) -> Result<NsState> {
    check_order(order_n)?;
    let a = split.a();
    let mut ctr = MulCounter::new();
    let g = plan.eval_with_residual(split.b_mat(), split.s_inv(), a, &mut ctr)?;
    let f = residual(&g, a, &mut ctr);
    Ok(NsState {
        g,
        f,
        k: 0,
        order_n,
        h0: plan.order(),
        ctr,
        exponent: Some(plan.order() as u128),
    })
}

/// [`initial_series`] with the plain two-level plan of order `(p + 1)·w`.
pub fn initial_series_factored(
    split: &Splitting,
    p: usize,
    w: usize,
    order_n: usize,
) -> Result<NsState> {
    if w == 0 {
        return Err(Error::InvalidArgument("initial series needs w >= 1".into()));
    }
    initial_series(split, &FactorPlan::split(p, w)?, order_n)
}

/// `G_k = {Σ_{j<n} F_{k−1}ʲ} G_{k−1}`, by Horner's rule or through `plan`.
pub fn ns_step(st: &NsState, a: &Matrix, plan: Option<&FactorPlan>) -> Result<NsState> {
    st.g.check_same_dim(a)?;
    let n = st.order_n;
    let mut ctr = st.ctr;
    let g = match plan {
        Some(p) if p.order() != n => {
            return Err(Error::InvalidArgument(format!(
                "plan order {} does not match iteration order {n}",
                p.order()
            )))
        }
        Some(p) => p.eval_with_residual(&st.f, &st.g, a, &mut ctr)?,
        None => horner(&st.f, &st.g, n, &mut ctr),
    };
    let f = residual(&g, a, &mut ctr);
    Ok(NsState {
        g,
        f,
        k: st.k + 1,
        order_n: n,
        h0: st.h0,
        ctr,
        exponent: st.exponent.and_then(|e| e.checked_mul(n as u128)),
    })
}

/// Rates `x_1, …, x_w` of one composite step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompositeSpec {
    rates: Vec<usize>,
}

impl CompositeSpec {
    pub fn new(rates: Vec<usize>) -> Result<Self> {
        if rates.is_empty() {
            return Err(Error::InvalidArgument("composite spec needs at least one rate".into()));
        }
        if rates.contains(&0) {
            return Err(Error::InvalidArgument("composite rates must be at least 1".into()));
        }
        Ok(Self { rates })
    }

    pub fn rates(&self) -> &[usize] {
        &self.rates
    }

    pub fn w(&self) -> usize {
        self.rates.len()
    }

    pub fn total(&self) -> u128 {
        self.rates.iter().map(|&x| x as u128).sum()
    }
}

/// Rates as a function of the step number `k ≥ 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RateSchedule {
    Constant(CompositeSpec),
    /// `w` rates equal to `m^k`.
    Power { m: usize, w: usize },
}

impl RateSchedule {
    pub fn at(&self, k: usize) -> Result<CompositeSpec> {
        match self {
            RateSchedule::Constant(spec) => Ok(spec.clone()),
            RateSchedule::Power { m, w } => {
                let x = u32::try_from(k)
                    .ok()
                    .and_then(|k| m.checked_pow(k))
                    .ok_or(Error::Overflow("composite rate m^k"))?;
                CompositeSpec::new(vec![x; *w])
            }
        }
    }
}

fn rate_plan(x: usize) -> Result<FactorPlan> {
    if x <= PLANNED_RATE_MAX {
        plan_order(x)
    } else {
        plan_binary(x)
    }
}

/// `G_k = T_c + Γ_c {Σ_{j<n} F_{k−1}ʲ} G_{k−1}` with `T_i = Σ_{j<x_i} Bʲ S⁻¹`
/// and `Γ_i = I − T_i A`.
pub fn composite_step(
    st: &NsState,
    split: &Splitting,
    spec: &CompositeSpec,
    exec: Execution,
) -> Result<NsState> {
    let a = split.a();
    st.g.check_same_dim(a)?;
    let plans = spec.rates.iter().map(|&x| rate_plan(x)).collect::<Result<Vec<_>>>()?;
    let term = |plan: &FactorPlan| -> (Matrix, Matrix, MulCounter) {
        let mut c = MulCounter::new();
        let t = plan
            .eval_with_residual(split.b_mat(), split.s_inv(), a, &mut c)
            .expect("splitting matrices share a dimension");
        let gamma = residual(&t, a, &mut c);
        (t, gamma, c)
    };
    let terms: Vec<(Matrix, Matrix, MulCounter)> = match exec {
        Execution::Serial => plans.iter().map(term).collect(),
        Execution::Concurrent => {
            use rayon::prelude::*;
            plans.par_iter().map(term).collect()
        }
    };
    let mut ctr = st.ctr;
    for (_, _, c) in &terms {
        ctr += *c;
    }
    let (t_last, g_last, _) = terms.last().expect("spec is non-empty");
    let mut t_c = t_last.clone();
    let mut gamma_c = g_last.clone();
    for (t, gamma, _) in terms.iter().rev().skip(1) {
        t_c = t + &mul(gamma, &t_c, &mut ctr);
        gamma_c = mul(gamma, &gamma_c, &mut ctr);
    }
    let n = st.order_n;
    let s = horner(&st.f, &st.g, n, &mut ctr);
    let g = &t_c + &mul(&gamma_c, &s, &mut ctr);
    let f = residual(&g, a, &mut ctr);
    Ok(NsState {
        g,
        f,
        k: st.k + 1,
        order_n: n,
        h0: st.h0,
        ctr,
        exponent: st
            .exponent
            .and_then(|e| e.checked_mul(n as u128))
            .and_then(|e| e.checked_add(spec.total())),
    })
}

#[derive(Debug, Clone)]
pub struct DoubleNsState {
    pub(crate) l: Matrix,
    pub(crate) gamma_n: Matrix,
    pub(crate) g: Matrix,
    pub(crate) f: Matrix,
    pub(crate) k: usize,
    pub(crate) order_n: usize,
    pub(crate) h0: usize,
    pub(crate) ctr: MulCounter,
    pub(crate) exponent: Option<u128>,
    pub(crate) gamma_exponent: Option<u128>,
}

impl DoubleNsState {
    /// `T₀ = G₀`, `Γ₀ = I − T₀A`, `L₀ = {Σ_{j<n} Γ₀ʲ} T₀` and `Γ₀ⁿ = I − L₀A`.
    pub fn init(st: &NsState, a: &Matrix) -> Result<Self> {
        st.g.check_same_dim(a)?;
        if st.k != 0 {
            return Err(Error::InvalidArgument("double iteration starts from the initial series".into()));
        }
        let n = st.order_n;
        let mut ctr = st.ctr;
        let l = horner(&st.f, &st.g, n, &mut ctr);
        let gamma_n = residual(&l, a, &mut ctr);
        Ok(Self {
            l,
            gamma_n,
            g: st.g.clone(),
            f: st.f.clone(),
            k: 0,
            order_n: n,
            h0: st.h0,
            ctr,
            exponent: st.exponent,
            gamma_exponent: st.exponent.and_then(|e| e.checked_mul(n as u128)),
        })
    }

    pub fn l(&self) -> &Matrix {
        &self.l
    }

    /// `Γⁿ_k = I − L_k A`.
    pub fn gamma_n(&self) -> &Matrix {
        &self.gamma_n
    }

    pub fn g(&self) -> &Matrix {
        &self.g
    }

    pub fn f(&self) -> &Matrix {
        &self.f
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn order_n(&self) -> usize {
        self.order_n
    }

    pub fn h0(&self) -> usize {
        self.h0
    }

    pub fn counter(&self) -> MulCounter {
        self.ctr
    }

    pub fn exponent(&self) -> Option<u128> {
        self.exponent
    }

    /// Exponent of `Γⁿ_k` with respect to `B`.
    pub fn gamma_exponent(&self) -> Option<u128> {
        self.gamma_exponent
    }
}

/// Advances the accelerator loop (`L_k`, `Γⁿ_k`) and the Newton-Schulz loop
/// (`{Σ F_{k−1}ʲ} G_{k−1}`), then merges them into `G_k = L_k + Γⁿ_k·N`.
pub fn double_ns_step(st: &DoubleNsState, a: &Matrix, exec: Execution) -> Result<DoubleNsState> {
    st.g.check_same_dim(a)?;
    let n = st.order_n;
    let ((l, gamma_n, ca), (s, cb)) = exec.join(
        || {
            let mut c = MulCounter::new();
            let l = horner(&st.gamma_n, &st.l, n, &mut c);
            let gamma_n = residual(&l, a, &mut c);
            (l, gamma_n, c)
        },
        || {
            let mut c = MulCounter::new();
            let s = horner(&st.f, &st.g, n, &mut c);
            (s, c)
        },
    );
    let mut ctr = st.ctr + ca + cb;
    let g = &l + &mul(&gamma_n, &s, &mut ctr);
    let f = residual(&g, a, &mut ctr);
    let gamma_exponent = st.gamma_exponent.and_then(|e| e.checked_mul(n as u128));
    let exponent = st
        .exponent
        .and_then(|e| e.checked_mul(n as u128))
        .zip(gamma_exponent)
        .and_then(|(e, eg)| e.checked_add(eg));
    Ok(DoubleNsState {
        l,
        gamma_n,
        g,
        f,
        k: st.k + 1,
        order_n: n,
        h0: st.h0,
        ctr,
        exponent,
        gamma_exponent,
    })
}

/// The two-loop scheme `Z_k = Σ_{j<p} (I − Z_{k−1}A)ʲ Z_{k−1}`,
/// `G_k = G_{k−1} + (I − G_{k−1}A) Z_k`.
#[derive(Debug, Clone)]
pub struct SriState {
    pub(crate) z: Matrix,
    pub(crate) l: Matrix,
    pub(crate) g: Matrix,
    pub(crate) f: Matrix,
    pub(crate) k: usize,
    pub(crate) p: usize,
    pub(crate) ctr: MulCounter,
    pub(crate) exponent: Option<u128>,
    pub(crate) l_exponent: Option<u128>,
}

impl SriState {
    /// Starts both loops from the initial series: `Z₀ = G₀`.
    pub fn init(st: &NsState, p: usize) -> Result<Self> {
        check_sri_order(p)?;
        Ok(Self {
            z: st.g.clone(),
            l: st.f.clone(),
            g: st.g.clone(),
            f: st.f.clone(),
            k: 0,
            p,
            ctr: st.ctr,
            exponent: st.exponent,
            l_exponent: st.exponent,
        })
    }

    pub fn z(&self) -> &Matrix {
        &self.z
    }

    /// `L_k = I − Z_k A`.
    pub fn l(&self) -> &Matrix {
        &self.l
    }

    pub fn g(&self) -> &Matrix {
        &self.g
    }

    pub fn f(&self) -> &Matrix {
        &self.f
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn counter(&self) -> MulCounter {
        self.ctr
    }

    pub fn exponent(&self) -> Option<u128> {
        self.exponent
    }

    pub fn l_exponent(&self) -> Option<u128> {
        self.l_exponent
    }
}

fn check_sri_order(p: usize) -> Result<()> {
    if p < 2 {
        return Err(Error::InvalidArgument(format!("sri order must be at least 2, got {p}")));
    }
    Ok(())
}

pub fn sri_step(st: &SriState, a: &Matrix) -> Result<SriState> {
    st.g.check_same_dim(a)?;
    let mut ctr = st.ctr;
    let z = horner(&st.l, &st.z, st.p, &mut ctr);
    let g = &st.g + &mul(&st.f, &z, &mut ctr);
    let l = residual(&z, a, &mut ctr);
    let f = residual(&g, a, &mut ctr);
    let l_exponent = st.l_exponent.and_then(|e| e.checked_mul(st.p as u128));
    let exponent = st.exponent.zip(l_exponent).and_then(|(e, el)| e.checked_add(el));
    Ok(SriState {
        z,
        l,
        g,
        f,
        k: st.k + 1,
        p: st.p,
        ctr,
        exponent,
        l_exponent,
    })
}

/// One step of the two-loop scheme on bare matrices: returns `(Z_k, G_k)`.
pub fn sri_step_matrices(
    z: &Matrix,
    g: &Matrix,
    a: &Matrix,
    p: usize,
    ctr: &mut MulCounter,
) -> Result<(Matrix, Matrix)> {
    check_sri_order(p)?;
    z.check_same_dim(a)?;
    g.check_same_dim(a)?;
    let l = residual(z, a, ctr);
    let f = residual(g, a, ctr);
    let z_next = horner(&l, z, p, ctr);
    let g_next = g + &mul(&f, &z_next, ctr);
    Ok((z_next, g_next))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NsKind {
    Classical,
    Double,
    Composite(RateSchedule),
    Sri(usize),
}

/// Exponent `e` with `F_k = Bᵉ` in exact arithmetic, `None` on overflow.
///
/// `n` is the iteration order; [`NsKind::Sri`] carries its own order.
pub fn predicted_ns_exponent(kind: &NsKind, k: usize, n: usize, h: usize) -> Option<u128> {
    let n = n as u128;
    let mut e = h as u128;
    match kind {
        NsKind::Classical => {
            for _ in 0..k {
                e = e.checked_mul(n)?;
            }
        }
        NsKind::Double => {
            let mut eg = e.checked_mul(n)?;
            for _ in 0..k {
                eg = eg.checked_mul(n)?;
                e = e.checked_mul(n)?.checked_add(eg)?;
            }
        }
        NsKind::Composite(schedule) => {
            for step in 1..=k {
                let total = schedule.at(step).ok()?.total();
                e = e.checked_mul(n)?.checked_add(total)?;
            }
        }
        NsKind::Sri(p) => {
            let mut el = e;
            for _ in 0..k {
                el = el.checked_mul(*p as u128)?;
                e = e.checked_add(el)?;
            }
        }
    }
    Some(e)
}
