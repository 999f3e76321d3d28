//! Truncated geometric matrix series `Z = Σ_{j<h} Yʲ X` and cost-optimal
//! factorizations of it.
//!
//! Costs are counted in two conventions. The *poly* cost assumes `Y` is
//! already available; the *full* cost adds the one product that forms
//! `Y = I − X·A`. [`FactorPlan::mmm_cost`] reports the full cost.

pub mod dag;

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::matrix::{mul, residual, Matrix, MulCounter};
pub use dag::{LinComb, PolyDag};

/// Largest order accepted by [`plan_order`].
pub const MAX_PLAN_ORDER: usize = 64;
const DEPTH_BUDGET: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub enum PlanNode {
    /// `Z_i = Y·Z_{i−1} + X`, `order − 1` products.
    Horner(usize),
    /// `U = inner(Y, X)` of order `p + 1`, `W = I − U·A` (`Y` when `p = 0`),
    /// then `outer(W, U)` of order `w`.
    Split {
        p: usize,
        w: usize,
        inner: Box<PlanNode>,
        outer: Box<PlanNode>,
    },
    /// `X + Y·inner(Y, X)`: one order higher than `inner`.
    PrimeWrap(Box<PlanNode>),
    Dag(PolyDag),
}

impl PlanNode {
    pub fn split(p: usize, w: usize) -> PlanNode {
        PlanNode::Split {
            p,
            w,
            inner: Box::new(PlanNode::Horner(p + 1)),
            outer: Box::new(PlanNode::Horner(w)),
        }
    }

    pub fn split_with(p: usize, w: usize, inner: PlanNode, outer: PlanNode) -> PlanNode {
        PlanNode::Split {
            p,
            w,
            inner: Box::new(inner),
            outer: Box::new(outer),
        }
    }

    pub fn prime(inner: PlanNode) -> PlanNode {
        PlanNode::PrimeWrap(Box::new(inner))
    }

    pub fn order(&self) -> usize {
        match self {
            PlanNode::Horner(m) => *m,
            PlanNode::Split { p, w, .. } => (p + 1) * w,
            PlanNode::PrimeWrap(inner) => inner.order() + 1,
            PlanNode::Dag(d) => d.order(),
        }
    }

    pub fn poly_cost(&self) -> u64 {
        match self {
            PlanNode::Horner(m) => *m as u64 - 1,
            PlanNode::Split { p, w, inner, outer } => {
                let mut c = inner.poly_cost();
                if *w > 1 {
                    c += u64::from(*p > 0) + outer.poly_cost();
                }
                c
            }
            PlanNode::PrimeWrap(inner) => inner.poly_cost() + 1,
            PlanNode::Dag(d) => d.poly_cost(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            PlanNode::Horner(_) | PlanNode::Dag(_) => 0,
            PlanNode::Split { inner, outer, .. } => 1 + inner.depth().max(outer.depth()),
            PlanNode::PrimeWrap(inner) => 1 + inner.depth(),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            PlanNode::Horner(0) => Err(Error::MalformedPlan("horner order must be at least 1".into())),
            PlanNode::Horner(_) | PlanNode::Dag(_) => Ok(()),
            PlanNode::Split { p, w, inner, outer } => {
                if *w == 0 {
                    return Err(Error::MalformedPlan("split needs w >= 1".into()));
                }
                if inner.order() != p + 1 {
                    return Err(Error::MalformedPlan(format!(
                        "split inner has order {}, expected {}",
                        inner.order(),
                        p + 1
                    )));
                }
                if outer.order() != *w {
                    return Err(Error::MalformedPlan(format!(
                        "split outer has order {}, expected {w}",
                        outer.order()
                    )));
                }
                inner.validate()?;
                outer.validate()
            }
            PlanNode::PrimeWrap(inner) => inner.validate(),
        }
    }

    fn eval(&self, y: &Matrix, x: &Matrix, a: &Matrix, ctr: &mut MulCounter) -> Matrix {
        match self {
            PlanNode::Horner(m) => horner(y, x, *m, ctr),
            PlanNode::Split { p, w, inner, outer } => {
                let u = inner.eval(y, x, a, ctr);
                if *w == 1 {
                    return u;
                }
                let wm = if *p == 0 { y.clone() } else { residual(&u, a, ctr) };
                outer.eval(&wm, &u, a, ctr)
            }
            PlanNode::PrimeWrap(inner) => {
                let v = inner.eval(y, x, a, ctr);
                &mul(y, &v, ctr) + x
            }
            PlanNode::Dag(d) => d.eval(y, x, ctr),
        }
    }
}

impl fmt::Display for PlanNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PlanNode::Horner(m) => write!(f, "horner({m})"),
            PlanNode::Split { p, w, inner, outer } => {
                let plain = matches!(**inner, PlanNode::Horner(_)) && matches!(**outer, PlanNode::Horner(_));
                if plain {
                    write!(f, "split(p={p},w={w})")
                } else {
                    write!(f, "split(p={p},w={w}, inner={inner}, outer={outer})")
                }
            }
            PlanNode::PrimeWrap(inner) => write!(f, "prime({inner})"),
            PlanNode::Dag(d) => write!(f, "{d}"),
        }
    }
}

fn horner(y: &Matrix, x: &Matrix, h: usize, ctr: &mut MulCounter) -> Matrix {
    let mut z = x.clone();
    for _ in 1..h {
        z = &mul(y, &z, ctr) + x;
    }
    z
}

#[derive(Debug, Clone, PartialEq)]
pub struct FactorPlan {
    root: PlanNode,
    order: usize,
    mmm_cost: u64,
    efficiency_index: f64,
    label: Option<String>,
}

impl FactorPlan {
    pub fn new(root: PlanNode) -> Result<Self> {
        root.validate()?;
        let order = root.order();
        let mmm_cost = root.poly_cost() + 1;
        Ok(Self {
            efficiency_index: (order as f64).powf(1.0 / mmm_cost as f64),
            order,
            mmm_cost,
            root,
            label: None,
        })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn horner(h: usize) -> Result<Self> {
        Self::new(PlanNode::Horner(h))
    }

    pub fn split(p: usize, w: usize) -> Result<Self> {
        Self::new(PlanNode::split(p, w))
    }

    pub fn root(&self) -> &PlanNode {
        &self.root
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Products including the one that forms `Y = I − X·A`.
    pub fn mmm_cost(&self) -> u64 {
        self.mmm_cost
    }

    pub fn poly_cost(&self) -> u64 {
        self.mmm_cost - 1
    }

    /// `order^(1/mmm_cost)`.
    pub fn efficiency_index(&self) -> f64 {
        self.efficiency_index
    }

    pub fn depth(&self) -> usize {
        self.root.depth()
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    /// Forms `Y = I − X·A` and evaluates the series.
    pub fn eval(&self, x: &Matrix, a: &Matrix, ctr: &mut MulCounter) -> Result<Matrix> {
        check_dims(&[x, a])?;
        let y = residual(x, a, ctr);
        Ok(self.root.eval(&y, x, a, ctr))
    }

    /// Evaluates the series with `Y = I − X·A` supplied by the caller.
    pub fn eval_with_residual(
        &self,
        y: &Matrix,
        x: &Matrix,
        a: &Matrix,
        ctr: &mut MulCounter,
    ) -> Result<Matrix> {
        check_dims(&[y, x, a])?;
        Ok(self.root.eval(y, x, a, ctr))
    }
}

impl fmt::Display for FactorPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.root.fmt(f)
    }
}

fn check_dims(ms: &[&Matrix]) -> Result<()> {
    let n = ms[0].dim();
    for m in &ms[1..] {
        if m.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: m.dim(),
            });
        }
    }
    Ok(())
}

/// `Σ_{j<h} Yʲ X` by Horner's rule: `h − 1` products.
pub fn horner_eval(y: &Matrix, x: &Matrix, h: usize, ctr: &mut MulCounter) -> Result<Matrix> {
    if h == 0 {
        return Err(Error::InvalidArgument("series order must be at least 1".into()));
    }
    check_dims(&[y, x])?;
    Ok(horner(y, x, h, ctr))
}

/// [`horner_eval`] after forming `Y = I − X·A`: `h` products.
pub fn horner_eval_full(x: &Matrix, a: &Matrix, h: usize, ctr: &mut MulCounter) -> Result<Matrix> {
    FactorPlan::horner(h)
        .map_err(|_| Error::InvalidArgument("series order must be at least 1".into()))?
        .eval(x, a, ctr)
}

/// Order `(p + 1)·w` through the two-level factorization, `Y` formed here.
pub fn factored_eval(
    x: &Matrix,
    a: &Matrix,
    p: usize,
    w: usize,
    ctr: &mut MulCounter,
) -> Result<Matrix> {
    if w == 0 {
        return Err(Error::InvalidArgument("factored series needs w >= 1".into()));
    }
    FactorPlan::split(p, w)?.eval(x, a, ctr)
}

pub fn nested_eval(x: &Matrix, a: &Matrix, plan: &FactorPlan, ctr: &mut MulCounter) -> Result<Matrix> {
    plan.eval(x, a, ctr)
}

/// Full product count of the plain two-level factorization.
pub fn split_cost(p: usize, w: usize) -> u64 {
    match (p, w) {
        (_, 1) => p as u64 + 1,
        (0, _) => w as u64,
        _ => (p + w + 1) as u64,
    }
}

/// `(w(p+1))^(1/N)` with `N` the full product count of the split.
pub fn efficiency_index(p: usize, w: usize) -> Result<f64> {
    if w == 0 {
        return Err(Error::InvalidArgument("efficiency index needs w >= 1".into()));
    }
    let order = ((p + 1) * w) as f64;
    Ok(order.powf(1.0 / split_cost(p, w) as f64))
}

/// Search key: cheaper first, then structural nodes over leaves, then a
/// smaller inner degree, then shallower.
fn rank(node: &PlanNode) -> (u64, u8, usize, usize) {
    let (kind, p) = match node {
        PlanNode::Split { p, .. } => (0, *p),
        PlanNode::PrimeWrap(_) => (0, 0),
        PlanNode::Horner(_) | PlanNode::Dag(_) => (1, 0),
    };
    (node.poly_cost(), kind, p, node.depth())
}

struct Search {
    dags: Vec<PolyDag>,
    memo: HashMap<(usize, usize), PlanNode>,
}

impl Search {
    fn new() -> Self {
        Self {
            dags: dag::library(),
            memo: HashMap::new(),
        }
    }

    fn best(&mut self, h: usize, budget: usize) -> PlanNode {
        if let Some(n) = self.memo.get(&(h, budget)) {
            return n.clone();
        }
        let node = self.compute(h, budget);
        self.memo.insert((h, budget), node.clone());
        node
    }

    fn compute(&mut self, h: usize, budget: usize) -> PlanNode {
        if h == 1 {
            return PlanNode::Horner(1);
        }
        if h == 2 {
            return PlanNode::split(1, 1);
        }
        let mut cands = vec![PlanNode::Horner(h)];
        cands.extend(self.dags.iter().filter(|d| d.order() == h).cloned().map(PlanNode::Dag));
        if budget > 0 {
            let divisors: Vec<usize> = (2..=h / 2).filter(|a| h % a == 0).collect();
            if divisors.is_empty() {
                cands.push(PlanNode::prime(self.best(h - 1, budget - 1)));
            }
            for a in divisors {
                let inner = self.best(a, budget - 1);
                let outer = self.best(h / a, budget - 1);
                cands.push(PlanNode::split_with(a - 1, h / a, inner, outer));
            }
        }
        cands.into_iter().min_by_key(rank).expect("at least the horner candidate")
    }
}

/// Cheapest plan found for order `h` (`1 ≤ h ≤ 64`).
pub fn plan_order(h: usize) -> Result<FactorPlan> {
    if h == 0 || h > MAX_PLAN_ORDER {
        return Err(Error::InvalidArgument(format!(
            "plan order must lie in 1..={MAX_PLAN_ORDER}, got {h}"
        )));
    }
    FactorPlan::new(Search::new().best(h, DEPTH_BUDGET))
}

/// One two-level split of an order: the plain Horner-leaf form and the form
/// with the best sub-plans as leaves.
#[derive(Debug, Clone)]
pub struct SplitCandidate {
    pub p: usize,
    pub w: usize,
    pub plain: FactorPlan,
    pub nested: FactorPlan,
}

/// Every split `(p + 1)·w = h` with `p ≥ 1` and `w ≥ 2`.
pub fn split_candidates(h: usize) -> Result<Vec<SplitCandidate>> {
    if h == 0 || h > MAX_PLAN_ORDER {
        return Err(Error::InvalidArgument(format!(
            "plan order must lie in 1..={MAX_PLAN_ORDER}, got {h}"
        )));
    }
    let mut search = Search::new();
    let mut out = Vec::new();
    for a in (2..=h / 2).filter(|a| h % a == 0) {
        let inner = search.best(a, DEPTH_BUDGET - 1);
        let outer = search.best(h / a, DEPTH_BUDGET - 1);
        out.push(SplitCandidate {
            p: a - 1,
            w: h / a,
            plain: FactorPlan::split(a - 1, h / a)?,
            nested: FactorPlan::new(PlanNode::split_with(a - 1, h / a, inner, outer))?,
        });
    }
    Ok(out)
}

/// Order `h` by repeated doubling: about `2·log₂ h` products for any `h ≥ 1`.
pub fn plan_binary(h: usize) -> Result<FactorPlan> {
    fn build(h: usize) -> PlanNode {
        match h {
            1 => PlanNode::Horner(1),
            2 => PlanNode::split(1, 1),
            _ if h % 2 == 0 => PlanNode::split_with(h / 2 - 1, 2, build(h / 2), PlanNode::Horner(2)),
            _ => PlanNode::prime(build(h - 1)),
        }
    }
    if h == 0 {
        return Err(Error::InvalidArgument("series order must be at least 1".into()));
    }
    FactorPlan::new(build(h))
}

/// Order 45 in ten products: `split(p=8,w=5)` with a three-by-three inner
/// split and the quartic DAG outside.
pub fn nested_45() -> FactorPlan {
    FactorPlan::new(PlanNode::split_with(
        8,
        5,
        PlanNode::split(2, 3),
        PlanNode::Dag(dag::quartic()),
    ))
    .expect("nested 45 plan is well formed")
    .with_label("(I + (W + W²)(I + W²)) Σ_{j<3}Vʲ Σ_{j<3}Yʲ X, V = Y³, W = Y⁹")
}

/// Every tabulated factorization for orders 2 through 19.
pub fn table_plans() -> Vec<FactorPlan> {
    use PlanNode as P;
    let q = || P::Dag(dag::quartic());
    let entries: Vec<(PlanNode, &str)> = vec![
        (P::split(1, 1), "(I + Y) X"),
        (P::prime(P::split(1, 1)), "(I + Y(I + Y)) X"),
        (P::split(1, 2), "(I + Y²)(I + Y) X"),
        (P::prime(P::split(1, 2)), "(I + Y(I + Y²)(I + Y)) X"),
        (P::Dag(dag::order5_chain()), "(I + Y + Y² + Y²(Y + Y²)) X"),
        (P::split(2, 2), "(I + Y³)(I + Y + Y²) X"),
        (P::prime(P::split(2, 2)), "(I + Y(I + Y³)(I + Y + Y²)) X"),
        (P::Dag(dag::order7()), "(I + (Y + Y⁴)(I + Y + Y²)) X"),
        (P::split(3, 2), "(I + Y⁴)(I + Y + Y² + Y³) X"),
        (P::Dag(dag::order8()), "(I + Y⁴)(I + Y²)(I + Y) X"),
        (P::split(2, 3), "(I + Y³ + Y⁶)(I + Y + Y²) X"),
        (P::Dag(dag::order9()), "(I + (I + Y⁴)(I + Y²)(Y + Y²)) X"),
        (P::prime(P::split(2, 3)), "(I + Y(I + Y³ + Y⁶)(I + Y + Y²)) X"),
        (P::split_with(4, 2, q(), P::Horner(2)), "(I + Y⁵)(I + (Y + Y²)(I + Y²)) X"),
        (
            P::prime(P::split_with(4, 2, q(), P::Horner(2))),
            "(I + Y(I + Y⁵)(I + (Y + Y²)(I + Y²))) X",
        ),
        (P::Dag(dag::order11()), "(I + Y(I + (Y² + Y⁴)(I + Y⁴))(I + Y)) X"),
        (P::split(3, 3), "(I + Y⁴ + Y⁸)(I + Y + Y² + Y³) X"),
        (P::prime(P::split(3, 3)), "(I + Y(I + Y⁴ + Y⁸)(I + Y + Y² + Y³)) X"),
        (P::split(6, 2), "(I + Y⁷) Σ_{j<7}Yʲ X"),
        (P::split(2, 5), "Σ_{j<5}Y³ʲ (I + Y + Y²) X"),
        (P::split_with(2, 5, P::Horner(3), q()), "(I + (W + W²)(I + W²))(I + Y + Y²) X, W = Y³"),
        (P::split(3, 4), "(I + Y⁴ + Y⁸ + Y¹²)(I + Y + Y² + Y³) X"),
        (P::prime(P::split(3, 4)), "(I + (Y + Y² + Y³ + Y⁴)(I + Y⁴ + Y⁸ + Y¹²)) X"),
        (P::split(5, 3), "(I + Y⁶ + Y¹²) Σ_{j<6}Yʲ X"),
        (P::prime(P::split(5, 3)), "(I + Y(I + Y⁶ + Y¹²) Σ_{j<6}Yʲ) X"),
        (P::Dag(dag::order19()), "(I + (Y + Y²)(I + Y² + Y⁴)(I + Y⁶ + Y¹²)) X"),
    ];
    entries
        .into_iter()
        .map(|(n, l)| FactorPlan::new(n).expect("tabulated plan is well formed").with_label(l))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn geometric(y: &Matrix, x: &Matrix, h: usize) -> Matrix {
        // Σ Yʲ X accumulated from explicit powers.
        let mut acc = Matrix::zeros(x.dim());
        let mut pw = x.clone();
        let mut ctr = MulCounter::new();
        for _ in 0..h {
            acc = &acc + &pw;
            pw = mul(y, &pw, &mut ctr);
        }
        acc
    }

    fn test_pair() -> (Matrix, Matrix) {
        let a = Matrix::from_rows(&[[4.0, 1.0, 0.5], [1.0, 3.0, 0.2], [0.5, 0.2, 2.0]]).unwrap();
        let x = Matrix::diagonal(&[0.2, 0.25, 0.4]).unwrap();
        (a, x)
    }

    #[test]
    fn horner_order_one_is_identity_map() {
        let (a, x) = test_pair();
        let y = Matrix::identity(3).scale(0.3);
        let mut ctr = MulCounter::new();
        let z = horner_eval(&y, &x, 1, &mut ctr).unwrap();
        assert_eq!(z, x);
        assert_eq!(ctr.mmm, 0);
        let mut ctr = MulCounter::new();
        horner_eval_full(&x, &a, 1, &mut ctr).unwrap();
        assert_eq!(ctr.mmm, 1);
    }

    #[test]
    fn horner_with_zero_y_returns_x() {
        let x = Matrix::diagonal(&[1.0, 2.0]).unwrap();
        let mut ctr = MulCounter::new();
        let z = horner_eval(&Matrix::zeros(2), &x, 4, &mut ctr).unwrap();
        assert_eq!(z, x);
        assert_eq!(ctr.mmm, 3);
    }

    #[test]
    fn horner_scalar_geometric_sum() {
        let y = Matrix::identity(2).scale(0.5);
        let mut ctr = MulCounter::new();
        let z = horner_eval(&y, &Matrix::identity(2), 4, &mut ctr).unwrap();
        assert!((z.get(0, 0) - 1.875).abs() < 1e-15);
        assert!((z.get(1, 1) - 1.875).abs() < 1e-15);
        assert_eq!(z.get(0, 1), 0.0);
    }

    #[test]
    fn horner_rejects_order_zero_and_mismatch() {
        let mut ctr = MulCounter::new();
        assert!(horner_eval(&Matrix::identity(2), &Matrix::identity(2), 0, &mut ctr).is_err());
        assert!(horner_eval(&Matrix::identity(2), &Matrix::identity(3), 2, &mut ctr).is_err());
    }

    #[test]
    fn factored_matches_horner() {
        let (a, x) = test_pair();
        for (p, w) in [(2, 3), (0, 4), (3, 1), (8, 5), (1, 1)] {
            let mut c1 = MulCounter::new();
            let z = factored_eval(&x, &a, p, w, &mut c1).unwrap();
            let mut c2 = MulCounter::new();
            let zh = horner_eval_full(&x, &a, (p + 1) * w, &mut c2).unwrap();
            assert!(z.max_abs_diff(&zh) <= 1e-12 * zh.frobenius_norm(), "p={p} w={w}");
            assert_eq!(c1.mmm, split_cost(p, w), "p={p} w={w}");
        }
    }

    #[test]
    fn factored_costs() {
        assert_eq!(split_cost(8, 5), 14);
        assert_eq!(split_cost(0, 1), 1);
        assert_eq!(split_cost(4, 1), 5);
        assert_eq!(split_cost(0, 6), 6);
        let mut ctr = MulCounter::new();
        assert!(factored_eval(&Matrix::identity(2), &Matrix::identity(2), 1, 0, &mut ctr).is_err());
    }

    #[test]
    fn efficiency_indices() {
        assert!((efficiency_index(1, 1).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        assert!((efficiency_index(8, 5).unwrap() - 45f64.powf(1.0 / 14.0)).abs() < 1e-15);
        assert_eq!(efficiency_index(0, 1).unwrap(), 1.0);
        assert!(efficiency_index(1, 0).is_err());
    }

    #[test]
    fn nested_45_costs_ten() {
        let plan = nested_45();
        assert_eq!(plan.order(), 45);
        assert_eq!(plan.mmm_cost(), 10);
        assert!((plan.efficiency_index() - 1.4633).abs() < 5e-5);
        assert_eq!(plan.to_string(), "split(p=8,w=5, inner=split(p=2,w=3), outer=quartic)");
        let (a, x) = test_pair();
        let mut ctr = MulCounter::new();
        let z = nested_eval(&x, &a, &plan, &mut ctr).unwrap();
        assert_eq!(ctr.mmm, 10);
        let mut c2 = MulCounter::new();
        let y = residual(&x, &a, &mut c2);
        let zh = geometric(&y, &x, 45);
        assert!(z.max_abs_diff(&zh) <= 1e-11 * zh.frobenius_norm());
    }

    #[test]
    fn table_costs() {
        let got: Vec<(usize, u64)> = table_plans().iter().map(|p| (p.order(), p.mmm_cost())).collect();
        let expected = vec![
            (2, 2), (3, 3), (4, 4), (5, 5), (5, 4), (6, 5), (7, 6), (7, 5), (8, 6), (8, 6),
            (9, 6), (9, 6), (10, 7), (10, 6), (11, 7), (11, 6), (12, 7), (13, 8), (14, 9),
            (15, 8), (15, 7), (16, 8), (17, 9), (18, 9), (19, 10), (19, 8),
        ];
        assert_eq!(got, expected);
    }

    #[test]
    fn table_plans_evaluate_geometric_sums() {
        let (a, x) = test_pair();
        let mut c = MulCounter::new();
        let y = residual(&x, &a, &mut c);
        for plan in table_plans() {
            let mut ctr = MulCounter::new();
            let z = plan.eval(&x, &a, &mut ctr).unwrap();
            let zh = geometric(&y, &x, plan.order());
            assert!(z.max_abs_diff(&zh) <= 1e-12 * zh.frobenius_norm(), "{plan}");
            assert_eq!(ctr.mmm, plan.mmm_cost(), "{plan}");
        }
    }

    #[test]
    fn plan_order_small_cases() {
        assert_eq!(plan_order(2).unwrap().to_string(), "split(p=1,w=1)");
        assert_eq!(plan_order(2).unwrap().mmm_cost(), 2);
        assert_eq!(plan_order(3).unwrap().to_string(), "prime(split(p=1,w=1))");
        assert_eq!(plan_order(1).unwrap().mmm_cost(), 1);
        assert!(plan_order(0).is_err());
        assert!(plan_order(65).is_err());
    }

    #[test]
    fn plan_order_reaches_nested_45() {
        assert_eq!(plan_order(45).unwrap().mmm_cost(), 10);
        assert!(plan_order(15).unwrap().mmm_cost() <= 7);
    }

    #[test]
    fn order_18_candidates() {
        let c = split_candidates(18).unwrap();
        let pw: Vec<(usize, usize)> = c.iter().map(|s| (s.p, s.w)).collect();
        assert_eq!(pw, vec![(1, 9), (2, 6), (5, 3), (8, 2)]);
        let plain: Vec<u64> = c.iter().map(|s| s.plain.mmm_cost()).collect();
        assert_eq!(plain, vec![11, 9, 9, 11]);
        let best = plan_order(18).unwrap();
        assert!(c.iter().all(|s| best.mmm_cost() <= s.nested.mmm_cost()));
    }

    #[test]
    fn binary_plans() {
        for h in [1, 2, 3, 20, 37, 64, 100] {
            let p = plan_binary(h).unwrap();
            assert_eq!(p.order(), h);
            assert!(p.mmm_cost() as f64 <= 2.0 * (h as f64).log2() + 2.0, "h={h}");
        }
    }

    #[test]
    fn malformed_plans_are_rejected() {
        let bad = PlanNode::split_with(2, 3, PlanNode::Horner(2), PlanNode::Horner(3));
        assert!(matches!(FactorPlan::new(bad), Err(Error::MalformedPlan(_))));
        assert!(FactorPlan::new(PlanNode::Horner(0)).is_err());
    }
}
