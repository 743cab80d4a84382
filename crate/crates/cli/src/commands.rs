use siee_core::fairness::{fairness_experiment, FairnessTrialConfig, Metric};
use siee_core::scenario::ScenarioConfig;
use siee_core::solver::{
    default_start, dinkelbach_min_scalar, solve_siee, sum_rate_max_baseline, transform_min_scalar, ScalarSolution,
    SolveReport, SolveStatus,
};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::Output;

/// Interval and tolerance of the scalar demonstration problem.
const DEMO_DOMAIN: (f64, f64) = (0.1, 100.0);
const DEMO_TOL: f64 = 1e-9;

fn status_name(s: SolveStatus) -> &'static str {
    match s {
        SolveStatus::Converged => "converged",
        SolveStatus::IterationCap => "iteration_cap",
    }
}

/// Minimizes `(x^2 + 100)/x` with both scalar methods and writes every
/// iterate, starting from the shared initial point as iteration 0.
pub fn demo_scalar(out: &mut Output) -> Result<(), CliError> {
    let num = |x: f64| x * x + 100.0;
    let den = |x: f64| x;
    let runs: [(&str, ScalarSolution); 2] = [
        ("dinkelbach", dinkelbach_min_scalar(num, den, DEMO_DOMAIN, DEMO_TOL)?),
        ("transform", transform_min_scalar(num, den, DEMO_DOMAIN, DEMO_TOL)?),
    ];
    let x0 = 0.5 * (DEMO_DOMAIN.0 + DEMO_DOMAIN.1);
    let mut rows = Vec::new();
    for (method, sol) in &runs {
        rows.push(vec!["0".to_string(), method.to_string(), x0.to_string(), (num(x0) / den(x0)).to_string()]);
        for (k, it) in sol.trace.iter().enumerate() {
            rows.push(vec![(k + 1).to_string(), method.to_string(), it.x.to_string(), it.ratio.to_string()]);
        }
        println!("{method}: x = {} ratio = {} after {} iterations", sol.x, sol.value, sol.iterations());
    }
    out.csv("demo_scalar.csv", &["iter", "method", "x", "ratio"], rows)
}

fn user_rows(method: &str, report: &SolveReport, p_max: &[f64]) -> Vec<Vec<String>> {
    let sum: f64 = report.per_user_iee.iter().sum();
    report
        .p_star
        .as_slice()
        .iter()
        .zip(p_max)
        .zip(&report.per_user_iee)
        .enumerate()
        .map(|(i, ((p, cap), iee))| {
            vec![method.to_string(), i.to_string(), p.to_string(), cap.to_string(), iee.to_string(), sum.to_string()]
        })
        .collect()
}

const USER_HEADER: [&str; 6] = ["method", "user", "p_w", "p_max_w", "iee", "sum_iee"];

/// Solves one random instance and writes the report.
pub fn solve(cfg: &RunConfig, out: &mut Output) -> Result<(), CliError> {
    let params = cfg.scenario.generate()?;
    let report = solve_siee(&params, &cfg.solver, &default_start(&params))?;

    out.csv("solve_users.csv", &USER_HEADER, user_rows("siee", &report, params.p_max()))?;
    let mut inner = vec![0];
    inner.extend(&report.inner_iterations);
    out.csv(
        "solve_trajectory.csv",
        &["outer_iter", "objective", "admm_iterations"],
        report
            .objective_trajectory
            .iter()
            .zip(&inner)
            .enumerate()
            .map(|(k, (f, n))| [k.to_string(), f.to_string(), n.to_string()]),
    )?;
    out.csv(
        "solve_residual.csv",
        &["admm_iter", "primal_residual_w", "newton_iterations"],
        report
            .residual_trace
            .iter()
            .zip(&report.newton_iterations)
            .enumerate()
            .map(|(k, (r, n))| [(k + 1).to_string(), (r * report.power_unit).to_string(), n.to_string()]),
    )?;
    let summary = [
        ("objective", report.objective.to_string()),
        ("status", status_name(report.status).to_string()),
        ("outer_iterations", report.inner_iterations.len().to_string()),
        ("admm_iterations", report.residual_trace.len().to_string()),
        ("penalty_ratio", report.penalty_ratio.to_string()),
        ("theta", report.theta.to_string()),
        ("power_unit_w", report.power_unit.to_string()),
    ];
    for (k, v) in &summary {
        println!("{k}: {v}");
    }
    out.csv("solve_summary.csv", &["key", "value"], summary.iter().map(|(k, v)| [k.to_string(), v.clone()]))
}

/// Solves the weak-user instance with both methods.
pub fn compare_baseline(cfg: &RunConfig, out: &mut Output) -> Result<(), CliError> {
    let params = cfg.scenario.weak_user_instance(0)?;
    let ours = solve_siee(&params, &cfg.solver, &default_start(&params))?;
    let base = sum_rate_max_baseline(&params, cfg.resolution)?;
    println!("siee minimization: sum IEE {}", ours.objective);
    println!("sum-rate maximization: sum IEE {}", base.objective);
    let mut rows = user_rows("siee_min", &ours, params.p_max());
    rows.extend(user_rows("rate_max", &base, params.p_max()));
    out.csv("compare_baseline.csv", &USER_HEADER, rows)
}

/// Percentage of trials in which SIMin is at least as fair as SMax, for
/// each metric, range and number of terms.
pub fn fairness_mc(cfg: &RunConfig, out: &mut Output) -> Result<(), CliError> {
    if cfg.terms < 2 {
        return Err(CliError::Config(format!("terms must be at least 2, got {}", cfg.terms)));
    }
    let mut rows = Vec::new();
    for (name, metric) in [("jain", Metric::Jain), ("max_min_ratio", Metric::MaxMinInverse)] {
        for &range_max in &cfg.ranges {
            for n_terms in 2..=cfg.terms {
                let trial = FairnessTrialConfig {
                    n_terms,
                    range_max,
                    n_candidates: cfg.candidates,
                    n_trials: cfg.trials,
                    seed: cfg.scenario.seed,
                };
                let pct = fairness_experiment(&trial, &metric)?;
                println!("{name} range {range_max} terms {n_terms}: {pct}%");
                rows.push([name.to_string(), range_max.to_string(), n_terms.to_string(), pct.to_string()]);
            }
        }
    }
    out.csv("fairness_mc.csv", &["metric", "range_max", "n_terms", "percentage"], rows)
}

/// Newton iteration counts, primal residual traces and penalty ratios for
/// every instance size from 1 to `n_bs`.
pub fn admm_diag(cfg: &RunConfig, out: &mut Output) -> Result<(), CliError> {
    let mut newton = Vec::new();
    let mut residual = Vec::new();
    let mut penalty = Vec::new();
    for n in 1..=cfg.scenario.n_bs {
        let scenario = ScenarioConfig { n_bs: n, ..cfg.scenario };
        let params = scenario.generate()?;
        let report = solve_siee(&params, &cfg.solver, &default_start(&params))?;
        for (k, (r, it)) in report.residual_trace.iter().zip(&report.newton_iterations).enumerate() {
            newton.push([n.to_string(), (k + 1).to_string(), it.to_string()]);
            residual.push([n.to_string(), (k + 1).to_string(), (r * report.power_unit).to_string()]);
        }
        let max_newton = report.newton_iterations.iter().max().copied().unwrap_or(0);
        println!("I = {n}: penalty ratio {} max Newton iterations {max_newton}", report.penalty_ratio);
        penalty.push([
            n.to_string(),
            report.penalty_ratio.to_string(),
            report.theta.to_string(),
            status_name(report.status).to_string(),
        ]);
    }
    out.csv("admm_newton.csv", &["n_users", "admm_iter", "newton_iterations"], newton)?;
    out.csv("admm_residual.csv", &["n_users", "admm_iter", "primal_residual_w"], residual)?;
    out.csv("admm_penalty.csv", &["n_users", "penalty_ratio", "theta", "status"], penalty)
}
