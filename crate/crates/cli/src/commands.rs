use std::path::Path;

use agebench::mg11::{Analyzer, SystemSpec};
use agebench::optimizer::{
    equal_allocation, solve_equalize, solve_newton_barrier, sweep_allocation, AllocationProblem, AllocationResult,
};
use agebench::sim::{self, Estimate, SimResult, SimRun};
use agebench::{mm11, Method, Metric, ServiceModel, ServiceSpec};
use serde::Serialize;

use crate::error::{CliError, Result};
use crate::output::{join, BudgetSweepRow, ComparisonRow, MomentRow, OutDir, RateSweepRow, TidyRow};
use crate::plots;
use crate::spec::{metrics_or_both, source_indices, ExperimentSpec, SystemSection};

/// Largest tolerated gap between the closed-form and general routes.
const ROUTE_TOLERANCE: f64 = 1e-6;
/// Largest tolerated objective gap between the two allocation solvers.
const SOLVER_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Analyze,
    Simulate,
    Optimize,
    Sweep,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Analyze => "analyze",
            Command::Simulate => "simulate",
            Command::Optimize => "optimize",
            Command::Sweep => "sweep",
        }
    }
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    command: &'a str,
    name: Option<&'a str>,
    schema: u32,
    seed: Option<u64>,
    files: Vec<String>,
}

/// Runs `command`, writing every output under `out`. Outputs are complete
/// even when the returned error is a mismatch or a solver disagreement.
pub fn run(command: Command, spec: &ExperimentSpec, out: &Path, seed: Option<u64>) -> Result<Vec<String>> {
    let mut dir = OutDir::create(out)?;
    let mut report = Vec::new();
    let deferred = match command {
        Command::Analyze => analyze(spec, &mut dir, &mut report)?,
        Command::Simulate => simulate(spec, &mut dir, seed, &mut report)?,
        Command::Optimize => optimize(spec, &mut dir, &mut report)?,
        Command::Sweep => sweep(spec, &mut dir, &mut report)?,
    };
    dir.text("spec.json", &(spec.to_json() + "\n"))?;
    let seed_used = match command {
        Command::Simulate => spec.simulate.as_ref().map(|s| seed.unwrap_or(s.config.seed)),
        _ => None,
    };
    let manifest = Manifest {
        command: command.name(),
        name: spec.name.as_deref(),
        schema: spec.schema,
        seed: seed_used,
        files: dir.files(),
    };
    dir.json("run.json", &manifest)?;
    report.push(format!("wrote {} files to {}", dir.files().len(), out.display()));
    match deferred {
        Some(e) => Err(e),
        None => Ok(report),
    }
}

fn missing(section: &str) -> CliError {
    CliError::Schema(format!("the spec has no {section} section"))
}

fn system(spec: &ExperimentSpec) -> Result<&SystemSection> {
    spec.system.as_ref().ok_or_else(|| missing("system"))
}

/// File-name labels for service laws, made unique by a numeric suffix.
fn law_labels(laws: &[ServiceModel<f64>]) -> Vec<String> {
    let mut labels: Vec<String> = Vec::with_capacity(laws.len());
    for m in laws {
        let base = m.kendall().to_string();
        let mut label = base.clone();
        let mut k = 2;
        while labels.contains(&label) {
            label = format!("{base}{k}");
            k += 1;
        }
        labels.push(label);
    }
    labels
}

fn build_laws(laws: &[ServiceSpec]) -> Result<Vec<ServiceModel<f64>>> {
    laws.iter().map(|l| l.build::<f64>().map_err(CliError::from)).collect()
}

fn closed_violation(metric: Metric, total: f64, mu: f64, rate: f64, x: f64) -> Result<f64> {
    Ok(match metric {
        Metric::Aoi => mm11::aoi_violation(total, mu, rate, x)?,
        Metric::Paoi => mm11::paoi_violation(total, mu, rate, x)?,
    })
}

fn general_violation(a: &Analyzer<f64>, metric: Metric, i: usize, x: f64) -> Result<f64> {
    Ok(match metric {
        Metric::Aoi => a.aoi_violation(i, x)?,
        Metric::Paoi => a.paoi_violation(i, x)?,
    })
}

fn analyze(spec: &ExperimentSpec, dir: &mut OutDir, report: &mut Vec<String>) -> Result<Option<CliError>> {
    let sys = system(spec)?;
    let sec = spec.analyze.as_ref().ok_or_else(|| missing("analyze"))?;
    let thresholds = sec.thresholds.values()?;
    let metrics = metrics_or_both(&sec.metrics);
    let sources = source_indices(&sec.sources, sys.rates.len())?;
    let laws = build_laws(&sec.laws(sys))?;
    let labels = law_labels(&laws);
    let total: f64 = sys.rates.iter().sum();

    let mut moments = Vec::new();
    let mut worst_gap = 0.0f64;
    for (law, label) in laws.iter().zip(&labels) {
        let analyzer = Analyzer::new(SystemSpec::new(sys.rates.clone(), law.clone())?);
        let mu = law.mean().recip();
        let mut rows = Vec::new();
        for &i in &sources {
            let rate = sys.rates[i];
            for &metric in &metrics {
                for &x in &thresholds {
                    let general = general_violation(&analyzer, metric, i, x)?;
                    if law.is_exponential() {
                        let closed = closed_violation(metric, total, mu, rate, x)?;
                        worst_gap = worst_gap.max((closed - general).abs());
                        rows.push(tidy(i, metric, x, closed, "closed", None));
                    }
                    rows.push(tidy(i, metric, x, general, "general", None));
                }
            }
            let m = analyzer.moments(i)?;
            moments.push(MomentRow {
                service: label.clone(),
                source: i + 1,
                method: "general".into(),
                mean_aoi: m.mean_aoi,
                var_aoi: m.var_aoi,
                mean_paoi: m.mean_paoi,
                var_paoi: m.var_paoi,
            });
            if law.is_exponential() {
                let c = mm11::moments(total, mu, rate)?;
                moments.push(MomentRow {
                    service: label.clone(),
                    source: i + 1,
                    method: "closed".into(),
                    mean_aoi: c.mean_aoi,
                    var_aoi: c.var_aoi,
                    mean_paoi: c.mean_paoi,
                    var_paoi: c.var_paoi,
                });
            }
        }
        let name = format!("analyze_{label}.csv");
        report.push(format!("{name}: {} rows", rows.len()));
        dir.csv(&name, &rows)?;
    }
    dir.csv("moments.csv", &moments)?;
    dir.text("plot_analyze.py", plots::ANALYZE)?;
    if worst_gap > ROUTE_TOLERANCE {
        return Ok(Some(CliError::Numeric(format!(
            "closed-form and general routes differ by {worst_gap:.3e} for exponential service"
        ))));
    }
    Ok(None)
}

fn tidy(i: usize, metric: Metric, x: f64, value: f64, method: &str, ci: Option<f64>) -> TidyRow {
    TidyRow {
        source: i + 1,
        metric: metric.label().to_string(),
        threshold: x,
        value,
        method: method.to_string(),
        ci_halfwidth: ci,
    }
}

#[derive(Debug, Serialize)]
struct SimulatedLaw {
    service: String,
    result: SimResult,
}

#[derive(Debug, Serialize)]
struct SimulateSummary {
    seed: u64,
    replications: usize,
    max_z: f64,
    /// No comparison exceeded `max_z` standard errors.
    agreement: bool,
    laws: Vec<SimulatedLaw>,
}

/// Pools the estimate at `x` over replications; AoI by horizon, PAoI by
/// delivered count.
fn pooled(runs: &[SimRun], metric: Metric, i: usize, x: f64) -> Estimate {
    let parts: Vec<(f64, Estimate)> = runs
        .iter()
        .map(|r| match metric {
            Metric::Aoi => (r.horizon(), r.aoi_violation(i, x)),
            Metric::Paoi => (r.delivered(i) as f64, r.paoi_violation(i, x)),
        })
        .collect();
    sim::pool_estimates(&parts)
}

fn simulate(
    spec: &ExperimentSpec,
    dir: &mut OutDir,
    seed: Option<u64>,
    report: &mut Vec<String>,
) -> Result<Option<CliError>> {
    let sys = system(spec)?;
    let sec = spec.simulate.as_ref().ok_or_else(|| missing("simulate"))?;
    let thresholds = sec.thresholds.values()?;
    let sources = source_indices(&sec.sources, sys.rates.len())?;
    let laws = build_laws(&sec.laws(sys))?;
    let labels = law_labels(&laws);
    let mut cfg = sec.config.clone();
    if let Some(s) = seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    let total: f64 = sys.rates.iter().sum();

    let mut summary = SimulateSummary {
        seed: cfg.seed,
        replications: sec.replications,
        max_z: sec.max_z,
        agreement: true,
        laws: Vec::new(),
    };
    let mut flagged = Vec::new();
    for (law, label) in laws.iter().zip(&labels) {
        let system = SystemSpec::new(sys.rates.clone(), law.clone())?;
        let runs = sim::run_replications(&system, &cfg, sec.replications, sec.threads)?;
        let analyzer = Analyzer::new(system);
        let mu = law.mean().recip();
        let mut rows = Vec::new();
        let mut comparison = Vec::new();
        for &i in &sources {
            let delivered: usize = runs.iter().map(|r| r.delivered(i)).sum();
            for metric in [Metric::Aoi, Metric::Paoi] {
                for &x in &thresholds {
                    let est = pooled(&runs, metric, i, x);
                    rows.push(tidy(i, metric, x, est.value, "sim", Some(est.ci_halfwidth)));
                    let analytic = if law.is_exponential() {
                        closed_violation(metric, total, mu, sys.rates[i], x)?
                    } else {
                        general_violation(&analyzer, metric, i, x)?
                    };
                    // batch means cannot resolve probabilities that few
                    // samples hit, so the binomial error is a floor
                    let binomial = (analytic * (1.0 - analytic) / delivered.max(1) as f64).sqrt();
                    let se = est.standard_error(cfg.batches).max(binomial);
                    let diff = (analytic - est.value).abs();
                    let z = if se > 0.0 {
                        diff / se
                    } else if diff == 0.0 {
                        0.0
                    } else {
                        f64::INFINITY
                    };
                    let flag = z > sec.max_z;
                    if flag {
                        flagged.push(format!("{label} source {} {} at {x}: z = {z:.2}", i + 1, metric.label()));
                    }
                    comparison.push(ComparisonRow {
                        source: i + 1,
                        metric: metric.label().to_string(),
                        threshold: x,
                        analytic,
                        empirical: est.value,
                        standard_error: se,
                        z,
                        flagged: flag,
                    });
                }
            }
        }
        let results: Vec<SimResult> = runs.iter().map(SimRun::summarize).collect();
        summary.laws.push(SimulatedLaw {
            service: label.clone(),
            result: sim::merge(&results)?,
        });
        let n_flag = comparison.iter().filter(|c| c.flagged).count();
        report.push(format!(
            "{label}: {} comparisons, {n_flag} beyond {} standard errors",
            comparison.len(),
            sec.max_z
        ));
        dir.csv(&format!("simulate_{label}.csv"), &rows)?;
        dir.csv(&format!("comparison_{label}.csv"), &comparison)?;
    }
    summary.agreement = flagged.is_empty();
    dir.json("simulate.json", &summary)?;
    dir.text("plot_simulate.py", plots::SIMULATE)?;
    if flagged.is_empty() {
        Ok(None)
    } else {
        Ok(Some(CliError::Mismatch(flagged.join("; "))))
    }
}

#[derive(Debug, Serialize)]
struct AllocationRecord {
    method: Method,
    rates: Vec<f64>,
    objective: f64,
    per_source_probs: Vec<f64>,
    iterations: usize,
    converged: bool,
    equalization_spread: f64,
}

impl From<&AllocationResult<f64>> for AllocationRecord {
    fn from(r: &AllocationResult<f64>) -> Self {
        Self {
            method: r.method,
            rates: r.rates.clone(),
            objective: r.objective,
            per_source_probs: r.per_source_probs.clone(),
            iterations: r.iterations,
            converged: r.converged,
            equalization_spread: r.equalization_spread,
        }
    }
}

#[derive(Debug, Serialize)]
struct OptimizeEntry {
    metric: Metric,
    thresholds: Vec<f64>,
    total_rate: f64,
    service_rate: f64,
    results: Vec<AllocationRecord>,
    /// Objective gap between the two solvers.
    solver_gap: f64,
}

fn problem(
    metric: Metric,
    thresholds: &[f64],
    total: f64,
    mu: f64,
    tolerance: Option<f64>,
    max_iterations: Option<usize>,
) -> Result<AllocationProblem<f64>> {
    let mut p = AllocationProblem::new(metric, thresholds.to_vec(), total, mu)?;
    if let Some(t) = tolerance {
        p = p.with_tolerance(t);
    }
    if let Some(m) = max_iterations {
        p = p.with_max_iterations(m);
    }
    p.validate()?;
    Ok(p)
}

fn optimize(spec: &ExperimentSpec, dir: &mut OutDir, report: &mut Vec<String>) -> Result<Option<CliError>> {
    let sec = spec.optimize.as_ref().ok_or_else(|| missing("optimize"))?;
    let mut entries = Vec::new();
    let mut sweep_rows = Vec::new();
    let mut disagreements = Vec::new();
    for metric in metrics_or_both(&sec.metrics) {
        for set in &sec.threshold_sets {
            let p = problem(metric, set, sec.total_rate, sec.service_rate, sec.tolerance, sec.max_iterations)?;
            let eq = solve_equalize(&p)?;
            let nb = solve_newton_barrier(&p, sec.initial_rates.as_deref())?;
            let split = equal_allocation(&p)?;
            let gap = (eq.objective - nb.objective).abs();
            if gap > SOLVER_TOLERANCE {
                disagreements.push(format!("{} {:?}: objectives differ by {gap:.3e}", metric.label(), set));
            }
            report.push(format!(
                "{} thresholds {}: optimum {:.6} at rates {}, equal split {:.6}",
                metric.label(),
                join(set),
                eq.objective,
                join(&eq.rates),
                split.objective
            ));
            if let Some(range) = &sec.sweep {
                let source = sec
                    .sweep_source
                    .checked_sub(1)
                    .filter(|&s| s < set.len())
                    .ok_or_else(|| CliError::Schema(format!("sweep_source {} out of range", sec.sweep_source)))?;
                for pt in sweep_allocation(&p, source, &range.values()?)? {
                    sweep_rows.push(RateSweepRow {
                        metric: metric.label().to_string(),
                        thresholds: join(set),
                        source: source + 1,
                        rate: pt.rate,
                        objective: pt.objective,
                        argmax: pt.argmax + 1,
                        probabilities: join(&pt.per_source_probs),
                    });
                }
            }
            entries.push(OptimizeEntry {
                metric,
                thresholds: set.clone(),
                total_rate: sec.total_rate,
                service_rate: sec.service_rate,
                results: vec![(&eq).into(), (&nb).into(), (&split).into()],
                solver_gap: gap,
            });
        }
    }
    dir.json("optimize.json", &entries)?;
    if sec.sweep.is_some() {
        dir.csv("optimize_sweep.csv", &sweep_rows)?;
    }
    dir.text("plot_optimize.py", plots::OPTIMIZE)?;
    if disagreements.is_empty() {
        Ok(None)
    } else {
        Ok(Some(CliError::Solver(disagreements.join("; "))))
    }
}

fn sweep(spec: &ExperimentSpec, dir: &mut OutDir, report: &mut Vec<String>) -> Result<Option<CliError>> {
    let sec = spec.sweep.as_ref().ok_or_else(|| missing("sweep"))?;
    let totals = sec.total_rates.values()?;
    let mut rows = Vec::new();
    for metric in metrics_or_both(&sec.metrics) {
        for set in &sec.threshold_sets {
            for &total in &totals {
                let p = problem(metric, set, total, sec.service_rate, sec.tolerance, sec.max_iterations)?;
                for (label, r) in [("optimal", solve_equalize(&p)?), ("equal", equal_allocation(&p)?)] {
                    rows.push(BudgetSweepRow {
                        metric: metric.label().to_string(),
                        thresholds: join(set),
                        total_rate: total,
                        allocation: label.to_string(),
                        objective: r.objective,
                        rates: join(&r.rates),
                    });
                }
            }
        }
    }
    report.push(format!("sweep.csv: {} rows", rows.len()));
    dir.csv("sweep.csv", &rows)?;
    dir.text("plot_sweep.py", plots::SWEEP)?;
    Ok(None)
}
