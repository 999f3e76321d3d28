//! Richardson iteration for `Aθ = b` driven by the accelerated double
//! Newton-Schulz inverse, with the transient exponent models.

use crate::error::{Error, Result};
use crate::matrix::{mat_vec, mul, residual, Matrix, MulCounter, Vector};
use crate::newton_schulz::{double_ns_step, horner, DoubleNsState, Execution};

#[derive(Debug, Clone)]
pub struct RichardsonState {
    theta: Vector,
    inner: DoubleNsState,
    q: usize,
    omega: Option<Matrix>,
    ns_sum: Option<Matrix>,
    k: usize,
    exponent: Option<u128>,
}

impl RichardsonState {
    /// `θ₀ = L₀ b` for the direct form with Neumann order `q`.
    pub fn new(inner: DoubleNsState, b: &Vector, q: usize) -> Result<Self> {
        if q == 0 {
            return Err(Error::InvalidArgument("neumann order q must be at least 1".into()));
        }
        if inner.k != 0 {
            return Err(Error::InvalidArgument("richardson starts from an initialized double iteration".into()));
        }
        let mut inner = inner;
        let theta = mat_vec(&inner.l, b, &mut inner.ctr)?;
        let exponent = inner.gamma_exponent;
        Ok(Self {
            theta,
            inner,
            q,
            omega: None,
            ns_sum: None,
            k: 0,
            exponent,
        })
    }

    /// [`RichardsonState::new`] with `q = n`, also forming
    /// `ω₀ = L₀ + Γ₀ⁿ {Σ_{j<n} F₀ʲ} G₀` for the recursive form.
    pub fn new_recursive(inner: DoubleNsState, b: &Vector) -> Result<Self> {
        let n = inner.order_n;
        let mut st = Self::new(inner, b, n)?;
        let inner = &mut st.inner;
        let s = horner(&inner.f, &inner.g, n, &mut inner.ctr);
        let omega = &inner.l + &mul(&inner.gamma_n, &s, &mut inner.ctr);
        st.omega = Some(omega);
        st.ns_sum = Some(s);
        Ok(st)
    }

    pub fn theta(&self) -> &Vector {
        &self.theta
    }

    pub fn inner(&self) -> &DoubleNsState {
        &self.inner
    }

    pub fn q(&self) -> usize {
        self.q
    }

    /// `ω_k`, kept only by the recursive form.
    pub fn omega(&self) -> Option<&Matrix> {
        self.omega.as_ref()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn counter(&self) -> MulCounter {
        self.inner.ctr
    }

    /// `γ_k` with `θ̃_k = B^{γ_k}·(−θ_*)`; `θ̃₀ = −Γ₀ⁿ θ_*` contributes `h·n`.
    pub fn exponent(&self) -> Option<u128> {
        self.exponent
    }

    /// Cumulative exponent relative to `θ̃₀`.
    pub fn gamma(&self) -> Option<u128> {
        self.exponent
            .zip(self.inner.h0.checked_mul(self.inner.order_n))
            .map(|(e, e0)| e - e0 as u128)
    }
}

fn update_theta(theta: &Vector, w: &Matrix, a: &Matrix, b: &Vector, ctr: &mut MulCounter) -> Result<Vector> {
    let r = &mat_vec(a, theta, ctr)? - b;
    Ok(theta - &mat_vec(w, &r, ctr)?)
}

fn step_exponent(prev: Option<u128>, inner: &DoubleNsState, q: usize) -> Option<u128> {
    inner
        .exponent
        .and_then(|e| e.checked_mul(q as u128))
        .zip(inner.gamma_exponent)
        .and_then(|(ef, eg)| ef.checked_add(eg))
        .zip(prev)
        .and_then(|(inc, p)| p.checked_add(inc))
}

/// `θ_k = θ_{k−1} − [L_k + Γⁿ_k {Σ_{j<q} F_kʲ} G_k](Aθ_{k−1} − b)`.
pub fn richardson_step(st: &RichardsonState, a: &Matrix, b: &Vector, exec: Execution) -> Result<RichardsonState> {
    let mut inner = double_ns_step(&st.inner, a, exec)?;
    let s = horner(&inner.f, &inner.g, st.q, &mut inner.ctr);
    let w = &inner.l + &mul(&inner.gamma_n, &s, &mut inner.ctr);
    let theta = update_theta(&st.theta, &w, a, b, &mut inner.ctr)?;
    let exponent = step_exponent(st.exponent, &inner, st.q);
    Ok(RichardsonState {
        theta,
        inner,
        q: st.q,
        omega: None,
        ns_sum: None,
        k: st.k + 1,
        exponent,
    })
}

/// The same step with `G_k` recovered from `ω_{k−1}` in one product and the
/// two halves sharing `P = Σ_{j<n} Γ_kʲ`.
pub fn richardson_recursive_step(
    st: &RichardsonState,
    a: &Matrix,
    b: &Vector,
    exec: Execution,
) -> Result<RichardsonState> {
    let (omega_prev, ns_prev) = match (&st.omega, &st.ns_sum) {
        (Some(o), Some(s)) => (o, s),
        _ => {
            return Err(Error::InvalidArgument(
                "recursive step needs a state built with new_recursive (q = n)".into(),
            ))
        }
    };
    let prev = &st.inner;
    let n = prev.order_n;
    if st.q != n {
        return Err(Error::InvalidArgument(format!("recursive form needs q = n, got q = {} and n = {n}", st.q)));
    }
    prev.g.check_same_dim(a)?;
    let mut ctr = prev.ctr;
    let p = power_sum(&prev.gamma_n, n, &mut ctr);

    let ((g, f, s, c1), (l, gamma_n, c2)) = exec.join(
        || {
            let mut c = MulCounter::new();
            let g = &mul(&p, &(omega_prev - ns_prev), &mut c) + ns_prev;
            let f = residual(&g, a, &mut c);
            let s = horner(&f, &g, n, &mut c);
            (g, f, s, c)
        },
        || {
            let mut c = MulCounter::new();
            let l = mul(&p, &prev.l, &mut c);
            let gamma_n = residual(&l, a, &mut c);
            (l, gamma_n, c)
        },
    );
    ctr += c1 + c2;
    let omega = &l + &mul(&gamma_n, &s, &mut ctr);
    let theta = update_theta(&st.theta, &omega, a, b, &mut ctr)?;

    let gamma_exponent = prev.gamma_exponent.and_then(|e| e.checked_mul(n as u128));
    let f_exponent = prev
        .exponent
        .and_then(|e| e.checked_mul(n as u128))
        .zip(gamma_exponent)
        .and_then(|(e, eg)| e.checked_add(eg));
    let inner = DoubleNsState {
        l,
        gamma_n,
        g,
        f,
        k: prev.k + 1,
        order_n: n,
        h0: prev.h0,
        ctr,
        exponent: f_exponent,
        gamma_exponent,
    };
    let exponent = step_exponent(st.exponent, &inner, n);
    Ok(RichardsonState {
        theta,
        inner,
        q: n,
        omega: Some(omega),
        ns_sum: Some(s),
        k: st.k + 1,
        exponent,
    })
}

/// `Σ_{j<n} Γʲ` by Horner's rule starting from `I + Γ`: `n − 2` products.
fn power_sum(gamma: &Matrix, n: usize, ctr: &mut MulCounter) -> Matrix {
    let id = Matrix::identity(gamma.dim());
    if n == 1 {
        return id;
    }
    let mut z = gamma + &id;
    for _ in 2..n {
        z = mul(gamma, &z, ctr).add_identity(1.0);
    }
    z
}

/// `γ_k = h n² (k n^{k+2} − (k−1) n^{k+1} − 2nᵏ − n + 2) / (n−1)²`.
pub fn gamma_closed_form(k: usize, n: usize, h: usize) -> Result<u128> {
    if n < 2 {
        return Err(Error::InvalidArgument("closed form needs n >= 2".into()));
    }
    if k == 0 || h == 0 {
        return Err(Error::InvalidArgument("closed form needs k >= 1 and h >= 1".into()));
    }
    let ov = || Error::Overflow("gamma closed form");
    let (ki, ni, hi) = (k as i128, n as i128, h as i128);
    let kk = u32::try_from(k).map_err(|_| ov())?;
    let pow = |e: u32| ni.checked_pow(e).ok_or_else(ov);
    let num = ki
        .checked_mul(pow(kk + 2)?)
        .and_then(|t| t.checked_sub((ki - 1).checked_mul(pow(kk + 1).ok()?)?))
        .and_then(|t| t.checked_sub(2 * pow(kk).ok()?))
        .map(|t| t - ni + 2)
        .ok_or_else(ov)?;
    let num = num.checked_mul(hi * ni * ni).ok_or_else(ov)?;
    let den = (ni - 1) * (ni - 1);
    if num % den != 0 {
        return Err(Error::InvalidArgument(format!("closed form numerator {num} is not divisible by {den}")));
    }
    u128::try_from(num / den).map_err(|_| ov())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransientKind {
    GeneralQ(usize),
    QEqualsN,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransientModel {
    /// Cumulative exponent over steps `1..=k`.
    pub gamma_k: u128,
    /// Exponent increment of step `k`.
    pub per_step: u128,
    pub rho: f64,
    /// `ρ^{γ_k}·‖θ̃₀‖`.
    pub bound: f64,
}

/// Exponent increment of Richardson step `k ≥ 1`.
pub fn per_step_exponent(kind: TransientKind, k: usize, n: usize, h: usize) -> Option<u128> {
    let (k, n, h) = (k as u128, n as u128, h as u128);
    let kk = u32::try_from(k).ok()?;
    let nk = n.checked_pow(kk)?;
    let nk1 = n.checked_pow(kk + 1)?;
    let f = k.checked_mul(nk1)?.checked_add(nk)?;
    let inner = match kind {
        TransientKind::GeneralQ(q) => f.checked_mul(q as u128)?.checked_add(nk1)?,
        TransientKind::QEqualsN => k.checked_mul(n.checked_pow(kk + 2)?)?.checked_add(nk1.checked_mul(2)?)?,
    };
    h.checked_mul(inner)
}

pub fn transient_model(
    kind: TransientKind,
    k: usize,
    n: usize,
    h: usize,
    rho: f64,
    theta0_norm: f64,
) -> Result<TransientModel> {
    if n == 0 || h == 0 {
        return Err(Error::InvalidArgument("transient model needs n >= 1 and h >= 1".into()));
    }
    let ov = || Error::Overflow("transient exponent");
    let mut gamma_k: u128 = 0;
    let mut per_step = 0;
    for j in 1..=k {
        per_step = per_step_exponent(kind, j, n, h).ok_or_else(ov)?;
        gamma_k = gamma_k.checked_add(per_step).ok_or_else(ov)?;
    }
    let bound = if gamma_k == 0 { theta0_norm } else { rho.powf(gamma_k as f64) * theta0_norm };
    Ok(TransientModel {
        gamma_k,
        per_step,
        rho,
        bound,
    })
}
