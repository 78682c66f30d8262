//! The three subcommands. Each returns the process exit code and writes its
//! human-facing output to `out`.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use anyhow::Result;
use padmm::diagnostics::{
    check_dual_bounds, check_per_update_decrease, check_subgradient_bound, check_sufficient_decrease,
    error_sequence, finite_length_monitor, kl_rate_fit, stationarity_measure, BurnIn, CheckReport, DualBoundsOutcome,
    RateEstimate,
};
use padmm::{solve, CheckLevel, ConstantsBundle, ProblemSpec, SolveOutput, SolverConfig, TerminationReason};
use serde::Serialize;

use crate::atomic::write_atomic;
use crate::config::{LoadedConfig, ReportFormat};
use crate::trace_io::{read_trace, render_trace, TraceRow};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_MAX_ITER: i32 = 2;

#[derive(Debug, Serialize)]
pub struct Flags {
    pub sigma_positive: bool,
    pub r1_positive: bool,
    pub r2_positive: bool,
    pub all_blocks_exact: bool,
}

#[derive(Debug, Serialize)]
pub struct RunSummary<'a> {
    pub seed: u64,
    pub reason: TerminationReason,
    pub iterations: usize,
    pub final_objective: Option<f64>,
    pub residual: Option<f64>,
    pub stationarity: Option<f64>,
    pub failure: Option<String>,
    pub flags: Flags,
    pub constants: &'a ConstantsBundle,
}

fn summarize<'a>(seed: u64, problem: &ProblemSpec, solver: &SolverConfig, out: &'a SolveOutput) -> Result<RunSummary<'a>> {
    let last = out.trace.last();
    let stationarity = match &out.previous {
        Some(prev) => Some(stationarity_measure(problem, solver, &out.iterate, prev)?),
        None => None,
    };
    let c = &out.constants;
    Ok(RunSummary {
        seed,
        reason: out.reason,
        iterations: out.trace.len(),
        final_objective: last.map(|r| r.objective),
        residual: last.map(|r| r.residual_norm),
        stationarity,
        failure: out.failure.as_ref().map(|e| e.to_string()),
        flags: Flags {
            sigma_positive: c.sigma_positive(),
            r1_positive: c.r1_positive(),
            r2_positive: c.r2_positive(),
            all_blocks_exact: problem.blocks().iter().all(|b| b.oracle.is_exact()),
        },
        constants: c,
    })
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), |v| format!("{v:.6e}"))
}

fn render_summary(s: &RunSummary<'_>) -> String {
    let c = s.constants;
    let mut t = String::new();
    t += &format!("reason           {:?}\n", s.reason);
    t += &format!("iterations       {}\n", s.iterations);
    t += &format!("objective        {}\n", fmt_opt(s.final_objective));
    t += &format!("residual         {}\n", fmt_opt(s.residual));
    t += &format!("stationarity     {}\n", fmt_opt(s.stationarity));
    t += &format!("sigma            {:.6e} (positive: {})\n", c.sigma, s.flags.sigma_positive);
    t += &format!("lambda_min(Dbar) {:.6e}\n", c.lambda_min_d_bar);
    t += &format!("rho_sub          {:.6e}\n", c.rho_sub);
    if let Some(f) = &s.failure {
        t += &format!("failure          {f}\n");
    }
    t
}

fn emit<T: Serialize>(format: ReportFormat, value: &T, text: impl FnOnce() -> String) -> Result<String> {
    Ok(match format {
        ReportFormat::Json => serde_json::to_string_pretty(value)? + "\n",
        ReportFormat::Text => text(),
    })
}

fn write_trace_file(cfg: &LoadedConfig, out: &SolveOutput) -> Result<()> {
    if let Some(path) = cfg.trace_path() {
        let rows: Vec<TraceRow> = out.trace.iter().map(TraceRow::from).collect();
        write_atomic(&path, render_trace(&rows).as_bytes())?;
    }
    Ok(())
}

fn exit_for(reason: TerminationReason) -> i32 {
    match reason {
        TerminationReason::Converged => EXIT_OK,
        TerminationReason::MaxIter => EXIT_MAX_ITER,
        TerminationReason::OracleFailure => EXIT_ERROR,
    }
}

fn load(config_path: &Path, seed: Option<u64>) -> Result<LoadedConfig> {
    let mut cfg = LoadedConfig::from_file(config_path)?;
    if let Some(s) = seed {
        cfg.config.seed = s;
    }
    Ok(cfg)
}

pub fn cmd_run(config_path: &Path, seed: Option<u64>, out: &mut dyn Write) -> Result<i32> {
    let cfg = load(config_path, seed)?;
    let (problem, solver) = cfg.build()?;
    let result = solve(&problem, &solver, None)?;
    write_trace_file(&cfg, &result)?;
    let summary = summarize(cfg.config.seed, &problem, &solver, &result)?;
    let format = cfg.config.output.format;
    let rendered = emit(format, &summary, || render_summary(&summary))?;
    if let Some(path) = cfg.report_path() {
        write_atomic(&path, rendered.as_bytes())?;
    }
    out.write_all(rendered.as_bytes())?;
    Ok(exit_for(result.reason))
}

/// Aggregate of all reports sharing a name.
#[derive(Debug, Serialize)]
pub struct CheckSummary {
    pub name: String,
    pub checked: usize,
    pub failed: usize,
    pub informational: bool,
    pub worst_relative_violation: f64,
}

#[derive(Debug, Serialize)]
pub struct FiniteLengthSummary {
    pub total: f64,
    pub tail_ratio: f64,
    pub final_fraction: f64,
}

#[derive(Debug, Serialize)]
pub struct VerifyReport<'a> {
    pub run: RunSummary<'a>,
    pub passed: bool,
    pub checks: Vec<CheckSummary>,
    pub dual_bounds_skipped: Option<String>,
    pub finite_length: Option<FiniteLengthSummary>,
    pub rate: RateEstimate,
    pub failures: Vec<CheckReport>,
}

/// All trace checks. Lyapunov decrease is only guaranteed for exact block
/// minimisers, so it is informational when any block is inexact.
pub fn collect_checks(problem: &ProblemSpec, solver: &SolverConfig, out: &SolveOutput) -> (Vec<CheckReport>, Option<String>) {
    let exact = problem.blocks().iter().all(|b| b.oracle.is_exact());
    let c = &out.constants;
    let mut reps: Vec<CheckReport> = check_sufficient_decrease(c, &out.trace)
        .into_iter()
        .map(|r| if exact { r } else { r.informational() })
        .collect();
    reps.extend(check_subgradient_bound(c, &out.trace));
    reps.extend(check_per_update_decrease(&out.trace));
    let skipped = match check_dual_bounds(problem, solver, c, &out.trace) {
        DualBoundsOutcome::Checked(r) => {
            reps.extend(r);
            None
        }
        DualBoundsOutcome::Skipped(why) => Some(why),
    };
    (reps, skipped)
}

pub fn summarize_checks(reps: &[CheckReport]) -> Vec<CheckSummary> {
    let mut by_name: BTreeMap<&str, CheckSummary> = BTreeMap::new();
    for r in reps {
        let s = by_name.entry(&r.name).or_insert_with(|| CheckSummary {
            name: r.name.clone(),
            checked: 0,
            failed: 0,
            informational: true,
            worst_relative_violation: 0.0,
        });
        s.checked += 1;
        s.failed += usize::from(!r.passed);
        s.informational &= r.informational;
        s.worst_relative_violation = s.worst_relative_violation.max(r.relative_violation());
    }
    by_name.into_values().collect()
}

fn render_verify(v: &VerifyReport<'_>) -> String {
    let mut t = render_summary(&v.run);
    t += &format!("\n{:<26} {:>8} {:>8} {:>10} {:>14}\n", "check", "checked", "failed", "enforced", "worst_rel_viol");
    for c in &v.checks {
        t += &format!(
            "{:<26} {:>8} {:>8} {:>10} {:>14.3e}\n",
            c.name, c.checked, c.failed, !c.informational, c.worst_relative_violation
        );
    }
    if let Some(why) = &v.dual_bounds_skipped {
        t += &format!("dual bounds skipped: {why}\n");
    }
    if let Some(f) = &v.finite_length {
        t += &format!("finite length: total {:.6e}, tail ratio {:.4}, final share {:.3e}\n", f.total, f.tail_ratio, f.final_fraction);
    }
    t += &format!("rate regime: {:?} (R^2 {:.4})\n", v.rate.regime, v.rate.fit_r2);
    t += &format!("verdict: {}\n", if v.passed { "PASS" } else { "FAIL" });
    t
}

pub fn cmd_verify(config_path: &Path, seed: Option<u64>, out: &mut dyn Write) -> Result<i32> {
    let cfg = load(config_path, seed)?;
    let (problem, mut solver) = cfg.build()?;
    solver.check_level = CheckLevel::Full;
    let result = solve(&problem, &solver, None)?;
    write_trace_file(&cfg, &result)?;
    let (reps, dual_bounds_skipped) = collect_checks(&problem, &solver, &result);
    let failures: Vec<CheckReport> = reps.iter().filter(|r| !r.passed && !r.informational).cloned().collect();
    let l_bar: Vec<f64> = result.trace.iter().map(|r| r.l_bar).collect();
    let report = VerifyReport {
        run: summarize(cfg.config.seed, &problem, &solver, &result)?,
        passed: failures.is_empty() && result.reason != TerminationReason::OracleFailure,
        checks: summarize_checks(&reps),
        dual_bounds_skipped,
        finite_length: finite_length_monitor(&result.trace).map(|f| FiniteLengthSummary {
            total: f.total,
            tail_ratio: f.tail_ratio,
            final_fraction: f.final_fraction,
        }),
        rate: kl_rate_fit(&error_sequence(&l_bar), BurnIn::default()),
        failures,
    };
    // The table always goes to the terminal; the report file follows the format.
    let table = render_verify(&report);
    if let Some(path) = cfg.report_path() {
        let rendered = emit(cfg.config.output.format, &report, || table.clone())?;
        write_atomic(&path, rendered.as_bytes())?;
    }
    out.write_all(table.as_bytes())?;
    Ok(if report.passed { EXIT_OK } else { EXIT_ERROR })
}

pub fn rate_from_rows(rows: &[TraceRow], burn_in: BurnIn) -> RateEstimate {
    let l_bar: Vec<f64> = rows.iter().map(|r| r.l_bar).collect();
    kl_rate_fit(&error_sequence(&l_bar), burn_in)
}

pub fn cmd_rate(trace_path: &Path, burn_in: BurnIn, out: &mut dyn Write) -> Result<i32> {
    let rows = read_trace(trace_path)?;
    let est = rate_from_rows(&rows, burn_in);
    writeln!(out, "{}", serde_json::to_string_pretty(&est)?)?;
    Ok(EXIT_OK)
}
