//! End-to-end acceptance suite. Each criterion prints one PASS/FAIL line; the
//! test fails if any criterion fails.

mod common;

use std::time::{Duration, Instant};

use common::*;
use padmm::diagnostics::{
    check_subgradient_bound, check_sufficient_decrease, dual_step_identity_max_error, finite_length_monitor,
    kl_rate_fit, stationarity_measure, trace_error_sequence, BurnIn, Regime,
};
use padmm::nalgebra::DVector;
use padmm::oracles::{FnBlock, FnSmooth};
use padmm::problems::{build_slr_decomposition, gen_slr_instance, unflatten, SlrConfig};
use padmm::prox::{mcp_prox, scad_prox, soft_threshold};
use padmm::{
    padmm_iterate, solve, BlockSpec, CheckLevel, Iterate, LinearOperator, McpParams, ProblemSpec, ScadParams,
    SolverConfig,
};
use rand::Rng;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

fn within_budget(elapsed: Duration, budget_s: f64) -> bool {
    elapsed.as_secs_f64() <= budget_s
}

fn criterion_1() -> Outcome {
    let t = Instant::now();
    let mut solver = regression_solver(1.0);
    solver.check_level = CheckLevel::Full;
    let p = regression_problem(scad(), &solver);
    let out = solve(&p, &solver, None).unwrap();
    let err = dual_step_identity_max_error(&out.trace).unwrap_or(f64::INFINITY);
    let el = t.elapsed();
    outcome(
        err <= 1e-9 && within_budget(el, 5.0),
        format!("max relative error {err:.2e} over {} iterations, {:.2}s", out.trace.len(), el.as_secs_f64()),
    )
}

fn criterion_2_3() -> (Outcome, Outcome) {
    let solver = regression_solver(1.0);
    let p = regression_problem(scad(), &solver);
    let out = solve(&p, &solver, None).unwrap();
    let c = &out.constants;
    let dec = check_sufficient_decrease(c, &out.trace);
    let dec_fail = dec.iter().filter(|r| !r.passed || r.informational).count();
    let sub = check_subgradient_bound(c, &out.trace);
    let sub_fail = sub.iter().filter(|r| !r.passed).count();
    (
        outcome(
            c.sigma > 0.0 && dec_fail == 0 && !dec.is_empty(),
            format!("sigma = {:.3e}, {dec_fail}/{} consecutive pairs fail", c.sigma, dec.len()),
        ),
        outcome(sub_fail == 0, format!("rho = {:.3e}, {sub_fail}/{} iterations fail", c.rho_sub, sub.len())),
    )
}

fn criterion_4() -> Outcome {
    let mut rng = padmm::problems::rng_from_seed(4);
    let mut worst_arg: f64 = 0.0;
    let mut worst_obj: f64 = 0.0;
    for _ in 0..1000 {
        let v = rng.random_range(-5.0..5.0);
        let lambda = rng.random_range(0.1..2.0);
        let rho = rng.random_range(0.2..5.0);
        let theta_s = rng.random_range(2.1..6.0);
        let theta_m = rng.random_range(1.1..6.0);

        let t = scad_prox(v, ScadParams::new(lambda, theta_s).unwrap(), rho);
        let (tg, og) = grid_prox(|s| scad_ref(s, lambda, theta_s), v, rho, 1e-4);
        let o = scad_ref(t, lambda, theta_s) + 0.5 * rho * (t - v) * (t - v);
        worst_arg = worst_arg.max((t - tg).abs());
        worst_obj = worst_obj.max((o - og).abs());

        let t = mcp_prox(v, McpParams::new(lambda, theta_m).unwrap(), rho);
        let (tg, og) = grid_prox(|s| mcp_ref(s, lambda, theta_m), v, rho, 1e-4);
        let o = mcp_ref(t, lambda, theta_m) + 0.5 * rho * (t - v) * (t - v);
        worst_arg = worst_arg.max((t - tg).abs());
        worst_obj = worst_obj.max((o - og).abs());
    }
    outcome(
        worst_arg <= 1e-3 && worst_obj <= 1e-6,
        format!("2000 draws, worst argmin gap {worst_arg:.2e}, worst objective gap {worst_obj:.2e}"),
    )
}

fn criterion_5() -> Outcome {
    let t = Instant::now();
    let mut ok = true;
    let mut parts = Vec::new();
    for beta in [0.5, 1.0, 1.5] {
        let solver = regression_solver(beta);
        let p = regression_problem(scad(), &solver);
        let out = solve(&p, &solver, None).unwrap();
        let prev = out.previous.as_ref().unwrap();
        let stat = stationarity_measure(&p, &solver, &out.iterate, prev).unwrap();
        let res = out.trace.last().unwrap().residual_norm;
        let good = out.reason == padmm::TerminationReason::Converged && res <= 1e-6 && stat <= 1e-5;
        ok &= good;
        parts.push(format!("beta {beta}: {} its, residual {res:.1e}, stationarity {stat:.1e}", out.trace.len()));
    }
    let el = t.elapsed();
    outcome(ok && within_budget(el, 30.0), format!("{}; {:.2}s", parts.join("; "), el.as_secs_f64()))
}

fn criterion_6() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, pen) in [("SCAD", scad()), ("MCP", mcp())] {
        let solver = regression_solver(1.0);
        let p = regression_problem(pen, &solver);
        let out = solve(&p, &solver, None).unwrap();
        let est = kl_rate_fit(&trace_error_sequence(&out.trace), BurnIn::default());
        let q = est.q_hat.unwrap_or(f64::NAN);
        ok &= est.regime == Regime::Linear && q > 0.0 && q < 1.0 && est.fit_r2 >= 0.95;
        parts.push(format!("{name}: {:?}, Q = {q:.4}, R2 = {:.4}", est.regime, est.fit_r2));
    }
    outcome(ok, parts.join("; "))
}

fn criterion_7() -> Outcome {
    let t = Instant::now();
    let (m, n, r, s) = (30, 30, 2, 20);
    let inst = gen_slr_instance(m, n, r, s, SEED).unwrap();
    let mut cfg = SlrConfig::new(inst.a.clone(), r, s, 0.1);
    cfg.q1 = 1.0;
    cfg.q2 = 1.0;
    let solver = SolverConfig::new(1.0, 1.0, LinearOperator::zeros(m * n));
    let p = build_slr_decomposition(&cfg, &solver).unwrap();
    let mut it = Iterate::zeros(&p);
    let mut feasible = true;
    for _ in 0..2000 {
        it = padmm_iterate(&p, &solver, &it).unwrap();
        let x1 = unflatten(&it.x[0], m, n);
        feasible &= padmm::linalg::numerical_rank(&x1) <= r;
        feasible &= it.x[1].iter().filter(|v| **v != 0.0).count() <= s;
    }
    let rel = p.residual(&it.x, &it.y).norm() / inst.a.norm();
    let el = t.elapsed();
    outcome(
        rel <= 1e-3 && feasible && within_budget(el, 60.0),
        format!("relative reconstruction error {rel:.2e}, constraints held at every iterate: {feasible}, {:.2}s", el.as_secs_f64()),
    )
}

/// `min |x| + (μ/2)(y − 1)²  s.t.  x − y = 0`.
fn scalar_toy(mu: f64) -> ProblemSpec {
    let block = BlockSpec::new(
        LinearOperator::identity(1),
        LinearOperator::zeros(1),
        FnBlock::new(
            |x| x[0].abs(),
            |sub| {
                // argmin |x| + (α/2)(x + shift)²
                Ok(DVector::from_element(1, soft_threshold(-sub.shift[0], 1.0 / sub.alpha)))
            },
        ),
    );
    let smooth = FnSmooth::new(
        move |y| 0.5 * mu * (y[0] - 1.0).powi(2),
        move |y| DVector::from_element(1, mu * (y[0] - 1.0)),
        mu,
        move |sub| {
            // With B = −1: μ(y − 1) − α(shift − y) = 0.
            let s = sub.shift[0];
            Ok(DVector::from_element(1, (mu + sub.alpha * s) / (mu + sub.alpha)))
        },
    );
    ProblemSpec::new(vec![block], smooth, LinearOperator::scaled_identity(1, -1.0), DVector::zeros(1)).unwrap()
}

fn criterion_8() -> Outcome {
    let (mu, alpha, beta) = (2.0, 3.0, 1.3);
    let p = scalar_toy(mu);
    let solver = SolverConfig::new(alpha, beta, LinearOperator::zeros(1));
    let mut it = Iterate::from_point(vec![DVector::from_element(1, 0.7)], DVector::from_element(1, -0.4), DVector::from_element(1, 0.25));
    // Plain ADMM on the Lagrangian, written directly.
    let (mut y, mut z) = (-0.4_f64, 0.25_f64);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let x = soft_threshold(y - z / alpha, 1.0 / alpha);
        y = (mu + z + alpha * x) / (mu + alpha);
        z += alpha * beta * (x - y);
        it = padmm_iterate(&p, &solver, &it).unwrap();
        worst = worst.max((it.x[0][0] - x).abs()).max((it.y[0] - y).abs()).max((it.z[0] - z).abs());
    }
    outcome(worst <= 1e-12, format!("200 iterations, largest componentwise gap {worst:.2e}"))
}

fn criterion_9() -> Outcome {
    let solver = regression_solver(1.0);
    let p = regression_problem(scad(), &solver);
    let out = solve(&p, &solver, None).unwrap();
    match finite_length_monitor(&out.trace) {
        Some(rep) => outcome(
            rep.tail_ratio < 1.0 && rep.final_fraction < 0.01,
            format!("tail ratio {:.4}, final 10% share {:.2e}, total {:.4}", rep.tail_ratio, rep.final_fraction, rep.total),
        ),
        None => outcome(false, "trace too short"),
    }
}

fn criterion_10() -> Outcome {
    let geo: Vec<f64> = (1..=60).map(|k| 0.5f64.powi(k)).collect();
    let g = kl_rate_fit(&geo, BurnIn::default());
    let pow: Vec<f64> = (1..=500).map(|k| (k as f64).powi(-2)).collect();
    let s = kl_rate_fit(&pow, BurnIn::default());
    let fin: Vec<f64> = (1..=60).map(|k| if k < 8 { 1.0 / k as f64 } else { 0.0 }).collect();
    let f = kl_rate_fit(&fin, BurnIn::default());
    let q = g.q_hat.unwrap_or(f64::NAN);
    let r = s.r_hat.unwrap_or(f64::NAN);
    let th = s.theta_hat.unwrap_or(f64::NAN);
    let ok = g.regime == Regime::Linear
        && (q - 0.5).abs() <= 1e-3
        && s.regime == Regime::Sublinear
        && (r - 2.0).abs() <= 0.02
        && (th - 0.6).abs() <= 0.01
        && f.regime == Regime::Finite;
    outcome(
        ok,
        format!("geometric: {:?} Q = {q:.6}; power: {:?} r = {r:.4}, theta = {th:.4}; zero tail: {:?}", g.regime, s.regime, f.regime),
    )
}

#[test]
fn acceptance() {
    let (c2, c3) = criterion_2_3();
    let results = vec![
        ("exact dual identity", criterion_1()),
        ("Lyapunov decrease", c2),
        ("subgradient bound", c3),
        ("prox oracle equivalence", criterion_4()),
        ("convergence across beta", criterion_5()),
        ("linear-rate regime", criterion_6()),
        ("sparse + low-rank recovery", criterion_7()),
        ("plain ADMM reduction", criterion_8()),
        ("finite length", criterion_9()),
        ("rate-fitter calibration", criterion_10()),
    ];
    let mut failed = Vec::new();
    for (i, (name, o)) in results.iter().enumerate() {
        println!("criterion {:>2} {:<28} {}  {}", i + 1, name, if o.passed { "PASS" } else { "FAIL" }, o.detail);
        if !o.passed {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
