//! Acceptance gate: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines.

use std::time::Instant;

use hyperpower::harness::corpus::{sdd_corpus, SLOW_RHO};
use hyperpower::harness::surfaces::emit_mmm_surface;
use hyperpower::harness::verify::{verify_tables, TABLE_TOL};
use hyperpower::harness::{
    gen_harmonic_matrix, run_comparison, HarmonicRegressorSpec, Method, MethodSpec, RunOptions,
};
use hyperpower::matrix::{mat_pow, mat_vec, Matrix, MulCounter, Vector};
use hyperpower::newton_schulz::{
    composite_step, double_ns_step, initial_series, ns_step, predicted_ns_exponent, CompositeSpec, DoubleNsState,
    Execution, NsKind,
};
use hyperpower::richardson::{
    gamma_closed_form, per_step_exponent, richardson_recursive_step, richardson_step, RichardsonState,
    TransientKind,
};
use hyperpower::series::{factored_eval, horner_eval_full, nested_45, plan_order, split_cost};
use hyperpower::splitting::{split_auto, split_diagonal, Splitting};

const EXPONENT_TOL: f64 = 1e-8;
const UNDERFLOW: f64 = 1e-250;
const UNDERFLOW_FALLBACK: f64 = 1e-200;
const EQUIV_TOL: f64 = 1e-9;

struct Gate {
    lines: Vec<(usize, bool, String)>,
}

impl Gate {
    fn record(&mut self, id: usize, pass: bool, detail: String) {
        println!("criterion {id}: {} {detail}", if pass { "PASS" } else { "FAIL" });
        self.lines.push((id, pass, detail));
    }
}

fn corpus(dim: usize, seed: u64) -> Vec<Splitting> {
    sdd_corpus(4, dim, SLOW_RHO.0, SLOW_RHO.1, seed)
        .unwrap()
        .iter()
        .map(|a| split_diagonal(a).unwrap())
        .collect()
}

/// Relative distance of `got` from `B^e·x`, or the underflow fallback.
fn exponent_ok(got: f64, diff: f64, oracle_norm: f64) -> bool {
    if oracle_norm < UNDERFLOW {
        got <= UNDERFLOW_FALLBACK
    } else {
        diff <= EXPONENT_TOL * oracle_norm
    }
}

fn criterion_1(g: &mut Gate) {
    let report = verify_tables(50, 5, 2024).unwrap();
    let worst = report.checks.iter().map(|c| c.max_rel_err).fold(0.0, f64::max);
    let secs = report.elapsed.as_secs_f64();
    let orders: Vec<usize> = report.checks.iter().map(|c| c.order).collect();
    let covered = (2..=19).all(|h| orders.contains(&h))
        && [10, 11, 15].iter().all(|h| orders.iter().filter(|&&o| o == *h).count() >= 2);
    let pass = report.passed(TABLE_TOL) && covered && secs < 10.0;
    g.record(
        1,
        pass,
        format!("{} plans x {} instances, worst rel err {worst:.2e}, {secs:.2}s", report.checks.len(), report.instances),
    );
}

fn criterion_2(g: &mut Gate) {
    let plan = nested_45();
    let split = &corpus(5, 45)[0];
    let mut ctr = MulCounter::new();
    let z = plan.eval(split.s_inv(), split.a(), &mut ctr).unwrap();
    let mut c2 = MulCounter::new();
    let zh = horner_eval_full(split.s_inv(), split.a(), 45, &mut c2).unwrap();
    let rel = (&z - &zh).frobenius_norm() / zh.frobenius_norm();
    let ei = plan.efficiency_index();
    let pass = ctr.mmm == 10 && (ei - 1.4633).abs() <= 5e-5 && rel <= 1e-8 && plan_order(45).unwrap().mmm_cost() == 10;
    g.record(2, pass, format!("mmm {}, EI {ei:.5}, rel err {rel:.2e}", ctr.mmm));
}

fn criterion_3(g: &mut Gate) {
    let split = &corpus(4, 3)[0];
    let surface = emit_mmm_surface(1..=7, 1..=6);
    let mut bad = Vec::new();
    let mut caption_cells = 0;
    for p in 0..=7 {
        for w in 1..=6 {
            let mut ctr = MulCounter::new();
            factored_eval(split.s_inv(), split.a(), p, w, &mut ctr).unwrap();
            let law = match (p, w) {
                (_, 1) => p + 1,
                (0, _) => w,
                _ => p + w + 1,
            } as u64;
            if ctr.mmm != law || split_cost(p, w) != law {
                bad.push((p, w, ctr.mmm));
            }
            if p >= 1 && w >= 2 {
                let row = surface.iter().find(|r| r.p == p && r.w == w).unwrap();
                caption_cells += 1;
                if row.n_p as u64 != ctr.mmm || row.h != (p + 1) * w {
                    bad.push((p, w, ctr.mmm));
                }
            }
        }
    }
    g.record(
        3,
        bad.is_empty(),
        format!("48 grid points counted, {caption_cells} surface cells equal, mismatches {bad:?}"),
    );
}

fn ns_grid<F>(mut check: F) -> (usize, usize)
where
    F: FnMut(&Splitting, usize, usize) -> (usize, usize),
{
    let mut total = (0, 0);
    for split in &corpus(4, 77) {
        for n in 2..=4 {
            for h in 1..=3 {
                let (ok, all) = check(split, n, h);
                total.0 += ok;
                total.1 += all;
            }
        }
    }
    total
}

fn criterion_4(g: &mut Gate) {
    let mut worst: f64 = 0.0;
    let (ok, all) = ns_grid(|split, n, h| {
        let mut st = initial_series(split, &plan_order(h).unwrap(), n).unwrap();
        let mut ok = 0;
        for k in 0..=3 {
            if k > 0 {
                st = ns_step(&st, split.a(), None).unwrap();
            }
            let e = predicted_ns_exponent(&NsKind::Classical, k, n, h).unwrap();
            assert_eq!(st.exponent(), Some(e));
            let oracle = mat_pow(split.b_mat(), e as u64);
            let diff = (st.f() - &oracle).frobenius_norm();
            worst = worst.max(diff / oracle.frobenius_norm().max(f64::MIN_POSITIVE));
            ok += usize::from(exponent_ok(st.f().frobenius_norm(), diff, oracle.frobenius_norm()));
        }
        (ok, 4)
    });
    g.record(4, ok == all, format!("{ok}/{all} (matrix, n, h, k) points, worst rel err {worst:.2e}"));
}

fn criterion_5(g: &mut Gate) {
    let mut worst: f64 = 0.0;
    let (ok, all) = ns_grid(|split, n, h| {
        let st0 = initial_series(split, &plan_order(h).unwrap(), n).unwrap();
        let mut st = DoubleNsState::init(&st0, split.a()).unwrap();
        let mut ok = 0;
        for k in 0..=3 {
            if k > 0 {
                st = double_ns_step(&st, split.a(), Execution::Serial).unwrap();
            }
            let e = (h * (k * n.pow(k as u32 + 1) + n.pow(k as u32))) as u64;
            assert_eq!(predicted_ns_exponent(&NsKind::Double, k, n, h), Some(e as u128));
            let oracle = mat_pow(split.b_mat(), e);
            let diff = (st.f() - &oracle).frobenius_norm();
            worst = worst.max(diff / oracle.frobenius_norm().max(f64::MIN_POSITIVE));
            ok += usize::from(exponent_ok(st.f().frobenius_norm(), diff, oracle.frobenius_norm()));
        }
        (ok, 4)
    });
    let mut dominance = true;
    for n in 2..=6 {
        for k in 1..=10 {
            for h in 1..=4 {
                let d = predicted_ns_exponent(&NsKind::Double, k, n, h).unwrap();
                let c = predicted_ns_exponent(&NsKind::Classical, k, n, h).unwrap();
                let s = predicted_ns_exponent(&NsKind::Sri(n), k, n, h).unwrap();
                dominance &= d > c && d > s;
            }
        }
    }
    g.record(
        5,
        ok == all && dominance,
        format!("{ok}/{all} exponent points, worst rel err {worst:.2e}, dominance over grid {dominance}"),
    );
}

fn criterion_6(g: &mut Gate) {
    let mut ok = 0;
    let mut all = 0;
    let mut worst: f64 = 0.0;
    for (dim, seed) in [(4, 6), (5, 7), (6, 8)] {
        for split in corpus(dim, seed) {
            let theta_star = Vector::new((0..dim).map(|i| 1.0 - 0.3 * i as f64).collect()).unwrap();
            let mut c = MulCounter::new();
            let b = mat_vec(split.a(), &theta_star, &mut c).unwrap();
            for n in 2..=3 {
                for h in 1..=2 {
                    let st0 = initial_series(&split, &plan_order(h).unwrap(), n).unwrap();
                    let d = DoubleNsState::init(&st0, split.a()).unwrap();
                    let mut st = RichardsonState::new(d, &b, n).unwrap();
                    let e0 = st.theta() - &theta_star;
                    for k in 1..=3 {
                        st = richardson_step(&st, split.a(), &b, Execution::Serial).unwrap();
                        let gamma = gamma_closed_form(k, n, h).unwrap();
                        assert_eq!(st.gamma(), Some(gamma));
                        let oracle = mat_vec(&mat_pow(split.b_mat(), gamma as u64), &e0, &mut c).unwrap();
                        let err = st.theta() - &theta_star;
                        let diff = (&err - &oracle).norm2();
                        worst = worst.max(diff / oracle.norm2().max(f64::MIN_POSITIVE));
                        ok += usize::from(exponent_ok(err.norm2(), diff, oracle.norm2()));
                        all += 1;
                    }
                }
            }
        }
    }
    let mut telescoped = true;
    for n in 2..=6 {
        for h in 1..=4 {
            let mut sum = 0u128;
            for k in 1..=12 {
                sum += per_step_exponent(TransientKind::QEqualsN, k, n, h).unwrap();
                telescoped &= gamma_closed_form(k, n, h).unwrap() == sum;
            }
        }
    }
    g.record(
        6,
        ok == all && telescoped,
        format!("{ok}/{all} transient points, worst rel err {worst:.2e}, closed form == telescoped {telescoped}"),
    );
}

fn criterion_7(g: &mut Gate) {
    let sys = gen_harmonic_matrix(&HarmonicRegressorSpec::default()).unwrap();
    let mut problems: Vec<(Splitting, Vector)> = corpus(5, 9)
        .into_iter()
        .map(|s| {
            let b = Vector::new(vec![1.0, -2.0, 0.5, 3.0, -1.0]).unwrap();
            (s, b)
        })
        .collect();
    problems.push((split_auto(&sys.a).unwrap(), sys.b.clone()));
    let mut worst: f64 = 0.0;
    let mut cheaper = true;
    let mut steps = 0;
    for (split, b) in &problems {
        for n in 2..=4 {
            let st0 = initial_series(split, &plan_order(1).unwrap(), n).unwrap();
            let d = DoubleNsState::init(&st0, split.a()).unwrap();
            let mut direct = RichardsonState::new(d.clone(), b, n).unwrap();
            let mut rec = RichardsonState::new_recursive(d, b).unwrap();
            for k in 1..=4 {
                let (c0, r0) = (direct.counter().mmm, rec.counter().mmm);
                direct = richardson_step(&direct, split.a(), b, Execution::Serial).unwrap();
                rec = richardson_recursive_step(&rec, split.a(), b, Execution::Serial).unwrap();
                let rel = (rec.theta() - direct.theta()).norm2() / direct.theta().norm2();
                worst = worst.max(rel);
                if k >= 2 {
                    cheaper &= rec.counter().mmm - r0 < direct.counter().mmm - c0;
                }
                steps += 1;
            }
        }
    }
    g.record(
        7,
        worst <= EQUIV_TOL && cheaper,
        format!("{steps} steps, worst rel gap {worst:.2e}, recursive strictly cheaper for k >= 2: {cheaper}"),
    );
}

fn criterion_8(g: &mut Gate) {
    let sys = gen_harmonic_matrix(&HarmonicRegressorSpec::default()).unwrap();
    let methods = [MethodSpec::new(Method::Richardson, 3), MethodSpec::new(Method::NsEstimator, 8)];
    let run = run_comparison(&sys.a, &sys.b, &sys.theta_star, &methods, 5, RunOptions::default()).unwrap();
    let reach = |m: Method| run.for_method(m).find(|r| r.error_norm <= 1e-10).map(|r| r.k);
    let (kr, kn) = (reach(Method::Richardson), reach(Method::NsEstimator));
    let fr = run.final_error(Method::Richardson).unwrap();
    let fnn = run.final_error(Method::NsEstimator).unwrap();
    let pass = kr.is_some() && kn.is_some() && fr <= fnn;
    g.record(
        8,
        pass,
        format!(
            "cond {:.1}, rho {:.5}; richardson reaches 1e-10 at k={kr:?} (final {fr:.3e}), ns order 8 at k={kn:?} (final {fnn:.3e}), ratio {:.2}",
            sys.condition_number,
            run.rho,
            fnn / fr.max(f64::MIN_POSITIVE)
        ),
    );
}

fn bitwise(a: &Matrix, b: &Matrix) -> bool {
    a.as_slice().iter().zip(b.as_slice()).all(|(x, y)| x.to_bits() == y.to_bits())
}

fn bitwise_v(a: &Vector, b: &Vector) -> bool {
    a.as_slice().iter().zip(b.as_slice()).all(|(x, y)| x.to_bits() == y.to_bits())
}

fn criterion_9(g: &mut Gate, start: Instant) {
    let sys = gen_harmonic_matrix(&HarmonicRegressorSpec::default()).unwrap();
    let split = split_auto(&sys.a).unwrap();
    let a = split.a();
    let mut same = true;
    for n in 2..=4 {
        let st0 = initial_series(&split, &plan_order(2).unwrap(), n).unwrap();
        let d0 = DoubleNsState::init(&st0, a).unwrap();
        let (mut ds, mut dc) = (d0.clone(), d0.clone());
        let mut rs = RichardsonState::new(d0.clone(), &sys.b, n).unwrap();
        let mut rc = rs.clone();
        let mut qs = RichardsonState::new_recursive(d0, &sys.b).unwrap();
        let mut qc = qs.clone();
        let (mut cs, mut cc) = (st0.clone(), st0);
        let spec = CompositeSpec::new(vec![2, 3, 5]).unwrap();
        for _ in 0..3 {
            ds = double_ns_step(&ds, a, Execution::Serial).unwrap();
            dc = double_ns_step(&dc, a, Execution::Concurrent).unwrap();
            rs = richardson_step(&rs, a, &sys.b, Execution::Serial).unwrap();
            rc = richardson_step(&rc, a, &sys.b, Execution::Concurrent).unwrap();
            qs = richardson_recursive_step(&qs, a, &sys.b, Execution::Serial).unwrap();
            qc = richardson_recursive_step(&qc, a, &sys.b, Execution::Concurrent).unwrap();
            cs = composite_step(&cs, &split, &spec, Execution::Serial).unwrap();
            cc = composite_step(&cc, &split, &spec, Execution::Concurrent).unwrap();
            same &= bitwise(ds.g(), dc.g()) && bitwise(ds.f(), dc.f()) && ds.counter() == dc.counter();
            same &= bitwise_v(rs.theta(), rc.theta()) && bitwise_v(qs.theta(), qc.theta());
            same &= bitwise(qs.omega().unwrap(), qc.omega().unwrap()) && bitwise(cs.g(), cc.g());
        }
    }
    let secs = start.elapsed().as_secs_f64();
    g.record(
        9,
        same && secs < 60.0,
        format!("serial and concurrent bitwise identical: {same}; suite wall clock {secs:.2}s"),
    );
}

#[test]
fn acceptance() {
    let start = Instant::now();
    let mut g = Gate { lines: Vec::new() };
    criterion_1(&mut g);
    criterion_2(&mut g);
    criterion_3(&mut g);
    criterion_4(&mut g);
    criterion_5(&mut g);
    criterion_6(&mut g);
    criterion_7(&mut g);
    criterion_8(&mut g);
    criterion_9(&mut g, start);
    let failed: Vec<usize> = g.lines.iter().filter(|l| !l.1).map(|l| l.0).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
