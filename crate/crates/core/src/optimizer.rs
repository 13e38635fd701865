//! Min-max allocation of a total arrival rate among sources.
//!
//! With exponential service each source's violation probability depends on
//! its own rate `λ_i` only (the total `λ` being fixed by the budget), and is
//! strictly decreasing and convex in `λ_i`. Minimizing the largest
//! violation probability subject to `Σ λ_i = λ` therefore has a unique
//! solution at which all probabilities are equal. Two independent solvers
//! are provided:
//!
//! * [`solve_equalize`] bisects on the common level `q`, inverting each
//!   source's probability for the rate that attains `q`;
//! * [`solve_newton_barrier`] solves the epigraph problem
//!   `min t  s.t.  P_i(λ_i) <= t, Σ λ_i = λ, λ_i > 0` with a log-barrier and
//!   equality-constrained Newton steps.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::laplace::bisect_monotone_traced;
use crate::mm11;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Aoi,
    Paoi,
}

impl Metric {
    pub fn label(&self) -> &'static str {
        match self {
            Metric::Aoi => "AoI",
            Metric::Paoi => "PAoI",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Equalize,
    NewtonBarrier,
    /// Baseline `λ_i = λ/N`, not an optimizer.
    EqualSplit,
}

/// Thresholds, budget and solver settings.
#[derive(Debug, Clone, PartialEq)]
pub struct AllocationProblem<T> {
    pub metric: Metric,
    pub thresholds: Vec<T>,
    pub total_rate: T,
    pub service_rate: T,
    pub tolerance: T,
    pub max_iterations: usize,
}

impl<T: Real> AllocationProblem<T> {
    pub fn new(metric: Metric, thresholds: Vec<T>, total_rate: T, service_rate: T) -> Result<Self> {
        let p = Self {
            metric,
            thresholds,
            total_rate,
            service_rate,
            tolerance: if T::epsilon() < T::of(1e-10) { T::of(1e-8) } else { T::of(1e-4) },
            max_iterations: 500,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_tolerance(mut self, tolerance: T) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn with_max_iterations(mut self, max_iterations: usize) -> Self {
        self.max_iterations = max_iterations;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.thresholds.is_empty() {
            return Err(domain("at least one source is required"));
        }
        if self.thresholds.iter().any(|t| !(*t > T::zero() && t.is_finite())) {
            return Err(domain("thresholds must be positive and finite"));
        }
        if !(self.total_rate > T::zero() && self.total_rate.is_finite()) {
            return Err(domain("total rate must be positive"));
        }
        if !(self.service_rate > T::zero() && self.service_rate.is_finite()) {
            return Err(domain("service rate must be positive"));
        }
        if !(self.tolerance > T::zero()) || self.max_iterations == 0 {
            return Err(domain("tolerance and iteration budget must be positive"));
        }
        Ok(())
    }

    pub fn n_sources(&self) -> usize {
        self.thresholds.len()
    }

    /// `P_i(λ_i)` with the total held at `total_rate`.
    pub fn probability(&self, i: usize, rate: T) -> Result<T> {
        let (l, mu, x) = (self.total_rate, self.service_rate, self.thresholds[i]);
        match self.metric {
            Metric::Aoi => mm11::aoi_violation(l, mu, rate, x),
            Metric::Paoi => mm11::paoi_violation(l, mu, rate, x),
        }
    }

    pub fn gradient(&self, i: usize, rate: T) -> Result<T> {
        let (l, mu, x) = (self.total_rate, self.service_rate, self.thresholds[i]);
        match self.metric {
            Metric::Aoi => mm11::aoi_violation_grad(l, mu, rate, x),
            Metric::Paoi => mm11::paoi_violation_grad(l, mu, rate, x),
        }
    }

    pub fn hessian(&self, i: usize, rate: T) -> Result<T> {
        let (l, mu, x) = (self.total_rate, self.service_rate, self.thresholds[i]);
        match self.metric {
            Metric::Aoi => mm11::aoi_violation_hess(l, mu, rate, x),
            Metric::Paoi => mm11::paoi_violation_hess(l, mu, rate, x),
        }
    }

    fn probabilities(&self, rates: &[T]) -> Result<Vec<T>> {
        rates.iter().enumerate().map(|(i, &r)| self.probability(i, r)).collect()
    }

    fn sum_slack(&self) -> T {
        (T::of(1e-9)).max(T::epsilon() * T::of(64.0)) * self.total_rate
    }
}

/// Allocation returned by a solver (or the equal-split baseline).
#[derive(Debug, Clone, PartialEq)]
pub struct AllocationResult<T> {
    pub rates: Vec<T>,
    pub objective: T,
    pub per_source_probs: Vec<T>,
    pub method: Method,
    pub iterations: usize,
    pub converged: bool,
    pub equalization_spread: T,
    /// Objective at the end of each barrier stage (Newton only).
    pub stage_objectives: Vec<T>,
}

fn finish<T: Real>(
    problem: &AllocationProblem<T>,
    mut rates: Vec<T>,
    method: Method,
    iterations: usize,
    converged: bool,
    stage_objectives: Vec<T>,
) -> Result<AllocationResult<T>> {
    // remove rounding drift from the budget
    let sum: T = rates.iter().copied().sum();
    let scale = problem.total_rate / sum;
    for r in &mut rates {
        *r *= scale;
    }
    let probs = problem.probabilities(&rates)?;
    let hi = probs.iter().copied().fold(T::neg_infinity(), T::max);
    let lo = probs.iter().copied().fold(T::infinity(), T::min);
    Ok(AllocationResult {
        rates,
        objective: hi,
        per_source_probs: probs,
        method,
        iterations,
        converged,
        equalization_spread: hi - lo,
        stage_objectives,
    })
}

/// Largest per-source violation probability at `rates`.
pub fn max_violation<T: Real>(rates: &[T], problem: &AllocationProblem<T>) -> Result<T> {
    problem.validate()?;
    if rates.len() != problem.n_sources() {
        return Err(domain(format!(
            "expected {} rates, got {}",
            problem.n_sources(),
            rates.len()
        )));
    }
    if rates.iter().any(|r| !(*r > T::zero())) {
        return Err(domain("rates must be strictly positive"));
    }
    let sum: T = rates.iter().copied().sum();
    if (sum - problem.total_rate).abs() > problem.sum_slack() {
        return Err(domain(format!(
            "rates sum to {} but the budget is {}",
            sum.as_f64(),
            problem.total_rate.as_f64()
        )));
    }
    Ok(problem
        .probabilities(rates)?
        .into_iter()
        .fold(T::neg_infinity(), T::max))
}

/// `λ_i = λ/N` for every source.
pub fn equal_allocation<T: Real>(problem: &AllocationProblem<T>) -> Result<AllocationResult<T>> {
    problem.validate()?;
    let n = problem.n_sources();
    let rates = vec![problem.total_rate / T::of(n as f64); n];
    finish(problem, rates, Method::EqualSplit, 0, true, Vec::new())
}

/// Rate at which source `i` reaches level `q`, saturating at the budget.
fn rate_for_level<T: Real>(problem: &AllocationProblem<T>, i: usize, q: T) -> Result<(T, usize)> {
    let lambda = problem.total_rate;
    let lo = lambda * T::of(1e-12);
    if problem.probability(i, lambda)? >= q {
        return Ok((lambda, 0));
    }
    if problem.probability(i, lo)? <= q {
        return Ok((lo, 0));
    }
    let tol = T::epsilon() * T::of(16.0);
    let b = bisect_monotone_traced(
        |r| problem.probability(i, r).unwrap_or(T::one()) - q,
        lo,
        lambda,
        tol * lambda,
    )?;
    Ok((b.root, b.iterations))
}

/// Equalizes all violation probabilities by bisection on their common level.
pub fn solve_equalize<T: Real>(problem: &AllocationProblem<T>) -> Result<AllocationResult<T>> {
    problem.validate()?;
    let n = problem.n_sources();
    let lambda = problem.total_rate;
    let share = lambda / T::of(n as f64);
    let mut q_lo = T::zero();
    let mut q_hi = T::zero();
    for i in 0..n {
        q_lo = q_lo.max(problem.probability(i, lambda)?);
        q_hi = q_hi.max(problem.probability(i, share)?);
    }
    if n == 1 {
        return finish(problem, vec![lambda], Method::Equalize, 0, true, Vec::new());
    }
    // the bracket ends are exact only up to rounding; nudge them outward
    let widen = T::epsilon() * T::of(1e3);
    q_lo *= T::one() - widen;
    q_hi = q_hi * (T::one() + widen) + T::min_positive_value();

    let excess = |q: T| -> T {
        let mut sum = T::zero();
        for i in 0..n {
            sum += rate_for_level(problem, i, q).map(|r| r.0).unwrap_or(lambda);
        }
        sum - lambda
    };
    let tol = T::epsilon() * T::of(16.0);
    let outer = bisect_monotone_traced(excess, q_lo, q_hi, tol).map_err(|e| Error::Solver {
        method: "equalize",
        iterations: 0,
        reason: e.to_string(),
        objective: q_hi.as_f64(),
    })?;
    if outer.iterations > problem.max_iterations {
        return Err(Error::Solver {
            method: "equalize",
            iterations: outer.iterations,
            reason: "level bisection exceeded the iteration budget".into(),
            objective: outer.root.as_f64(),
        });
    }
    let mut rates = Vec::with_capacity(n);
    for i in 0..n {
        rates.push(rate_for_level(problem, i, outer.root)?.0);
    }
    let result = finish(problem, rates, Method::Equalize, outer.iterations, true, Vec::new())?;
    Ok(AllocationResult {
        converged: result.equalization_spread <= problem.tolerance.max(T::epsilon() * T::of(1e4)),
        ..result
    })
}

struct BarrierPoint<T> {
    rates: Vec<T>,
    t: T,
}

fn barrier_value<T: Real>(problem: &AllocationProblem<T>, x: &BarrierPoint<T>, tau: T) -> Option<T> {
    let mut v = tau * x.t;
    for (i, &r) in x.rates.iter().enumerate() {
        if !(r > T::zero()) || r > problem.total_rate {
            return None;
        }
        let slack = x.t - problem.probability(i, r).ok()?;
        if !(slack > T::zero()) {
            return None;
        }
        v = v - slack.ln() - r.ln();
    }
    Some(v)
}

/// Log-barrier Newton method on the epigraph form. `initial_rates` must be
/// strictly positive and sum to the budget; `None` starts from `λ/N`.
pub fn solve_newton_barrier<T: Real>(
    problem: &AllocationProblem<T>,
    initial_rates: Option<&[T]>,
) -> Result<AllocationResult<T>> {
    problem.validate()?;
    let n = problem.n_sources();
    let lambda = problem.total_rate;
    let rates = match initial_rates {
        Some(r) => {
            max_violation(r, problem)?;
            r.to_vec()
        }
        None => vec![lambda / T::of(n as f64); n],
    };
    if n == 1 {
        return finish(problem, rates, Method::NewtonBarrier, 0, true, Vec::new());
    }
    let p0 = problem.probabilities(&rates)?.into_iter().fold(T::zero(), T::max);
    let mut x = BarrierPoint {
        rates,
        t: p0 + (T::one() - p0).max(T::of(0.1)) * T::of(0.1),
    };

    let constraints = T::of((2 * n) as f64);
    let gap_target = problem.tolerance * T::of(1e-2);
    let growth = T::of(10.0);
    let mut tau = T::one();
    let mut iterations = 0usize;
    let mut stages = Vec::new();
    let solver_error = |iterations: usize, reason: String, x: &BarrierPoint<T>| Error::Solver {
        method: "newton_barrier",
        iterations,
        reason,
        objective: x.t.as_f64(),
    };

    loop {
        // centering
        let mut previous = T::infinity();
        for _ in 0..200 {
            iterations += 1;
            if iterations > problem.max_iterations {
                return Err(solver_error(iterations, "iteration budget exhausted".into(), &x));
            }
            let mut g = vec![T::zero(); n];
            let mut h = vec![T::zero(); n];
            let mut c = vec![T::zero(); n];
            let mut g_t = tau;
            let mut h_t = T::zero();
            for i in 0..n {
                let r = x.rates[i];
                let p = problem.probability(i, r)?;
                let dp = problem.gradient(i, r)?;
                let d2p = problem.hessian(i, r)?;
                let d = x.t - p;
                g[i] = dp / d - r.recip();
                h[i] = d2p / d + (dp / d) * (dp / d) + (r * r).recip();
                c[i] = -dp / (d * d);
                g_t -= d.recip();
                h_t += (d * d).recip();
            }
            // eliminate Δλ_i = (-g_i - c_i Δt - ν) / h_i
            let (mut s_c, mut s_1, mut s_g, mut s_cc, mut s_cg) = (T::zero(), T::zero(), T::zero(), T::zero(), T::zero());
            for i in 0..n {
                s_c += c[i] / h[i];
                s_1 += h[i].recip();
                s_g += g[i] / h[i];
                s_cc += c[i] * c[i] / h[i];
                s_cg += c[i] * g[i] / h[i];
            }
            // [s_c, s_1; h_t - s_cc, -s_c] [Δt; ν] = [-s_g; -g_t + s_cg]
            let (a11, a12, a21, a22) = (s_c, s_1, h_t - s_cc, -s_c);
            let (b1, b2) = (-s_g, -g_t + s_cg);
            let det = a11 * a22 - a12 * a21;
            if !(det.abs() > T::zero()) || !det.is_finite() {
                return Err(solver_error(iterations, "singular KKT system".into(), &x));
            }
            let dt = (b1 * a22 - a12 * b2) / det;
            let nu = (a11 * b2 - b1 * a21) / det;
            let dl: Vec<T> = (0..n).map(|i| (-g[i] - c[i] * dt - nu) / h[i]).collect();

            let slope = g.iter().zip(&dl).map(|(a, b)| *a * *b).sum::<T>() + g_t * dt;
            let decrement = -slope;
            if decrement * T::half() <= T::of(1e-12).max(T::epsilon() * T::of(64.0)) {
                break;
            }
            // quadratic convergence has stalled at the rounding floor
            if decrement < T::of(1e-6) && decrement > previous * T::half() {
                break;
            }
            previous = decrement;

            let f0 = barrier_value(problem, &x, tau)
                .ok_or_else(|| solver_error(iterations, "iterate left the feasible region".into(), &x))?;
            let quadratic = decrement < T::of(1e-3);
            let rounding = f0.abs() * T::epsilon() * T::of(16.0);
            let mut step = T::one();
            let accepted = loop {
                let trial = BarrierPoint {
                    rates: x.rates.iter().zip(&dl).map(|(r, d)| *r + step * *d).collect(),
                    t: x.t + step * dt,
                };
                if let Some(f1) = barrier_value(problem, &trial, tau) {
                    // near the center full steps converge quadratically, and
                    // the barrier value is too rounded to judge them
                    if quadratic || f1 <= f0 + T::of(0.25) * step * slope + rounding {
                        break Some(trial);
                    }
                }
                step *= T::half();
                if step < T::of(1e-20) {
                    break None;
                }
            };
            match accepted {
                Some(trial) => x = trial,
                None => {
                    // no decrease possible at working precision: treat as centered
                    break;
                }
            }
        }
        let probs = problem.probabilities(&x.rates)?;
        stages.push(probs.into_iter().fold(T::zero(), T::max));
        if constraints / tau <= gap_target {
            break;
        }
        tau *= growth;
    }
    finish(problem, x.rates, Method::NewtonBarrier, iterations, true, stages)
}

/// One point of an allocation sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint<T> {
    pub rate: T,
    pub objective: T,
    /// Source attaining the maximum (0-based).
    pub argmax: usize,
    pub per_source_probs: Vec<T>,
}

/// Maximal violation probability as `λ_source` moves along `grid`; the
/// remaining budget is split equally among the other sources.
pub fn sweep_allocation<T: Real>(
    problem: &AllocationProblem<T>,
    source: usize,
    grid: &[T],
) -> Result<Vec<SweepPoint<T>>> {
    problem.validate()?;
    let n = problem.n_sources();
    if source >= n {
        return Err(domain(format!("source index {source} out of range (N = {n})")));
    }
    if n < 2 {
        return Err(domain("a sweep needs at least two sources"));
    }
    let lambda = problem.total_rate;
    grid.iter()
        .map(|&r| {
            if !(r > T::zero() && r < lambda) {
                return Err(domain(format!("sweep rate {} outside (0, λ)", r.as_f64())));
            }
            let other = (lambda - r) / T::of((n - 1) as f64);
            let rates: Vec<T> = (0..n).map(|j| if j == source { r } else { other }).collect();
            let probs = problem.probabilities(&rates)?;
            let (argmax, objective) = probs
                .iter()
                .copied()
                .enumerate()
                .fold((0, T::neg_infinity()), |acc, (j, p)| if p > acc.1 { (j, p) } else { acc });
            Ok(SweepPoint {
                rate: r,
                objective,
                argmax,
                per_source_probs: probs,
            })
        })
        .collect()
}
