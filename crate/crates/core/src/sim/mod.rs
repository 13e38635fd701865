//! Discrete-event simulation of the bufferless preemptive queue.
//!
//! Arrivals form one Poisson stream of rate `λ`; each arrival is assigned to
//! source `i` with probability `λ_i/λ`, discards whatever is in service and
//! starts a fresh service draw. A completed service delivers the update and
//! resets the source's age to the update's system time.
//!
//! Randomness comes from four ChaCha8 streams derived from the seed:
//! 0 inter-arrival times, 1 source selection, 2 service times, 3 the
//! sampled-moment times. A run is a deterministic function of
//! `(spec, config)`.
//!
//! After a warmup (a fraction of the delivery target, and at least one
//! delivery from every source), the measurement window runs from the
//! delivery that ends the warmup to the delivery that reaches the target.
//! Time-average quantities are integrated exactly over that window and split
//! into equal-length time batches; per-update quantities are batched by
//! count. Confidence intervals are batch-means Student-t intervals.

mod stats;
mod trace;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mg11::SystemSpec;
use crate::service::ServiceModel;

pub use stats::{Estimate, Histogram};
pub use trace::{sample_paths, write_trace_csv, SamplePaths, TraceEvent, TraceKind};

const STREAM_ARRIVALS: u64 = 0;
const STREAM_THINNING: u64 = 1;
const STREAM_SERVICE: u64 = 2;
const STREAM_SAMPLING: u64 = 3;

/// Run-length and estimator settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimConfig {
    pub seed: u64,
    /// Deliveries (all sources together) in the measurement window.
    pub target_delivered_updates: usize,
    /// Uniformly placed observation times for the sampled AoI estimator.
    pub sampled_moments: usize,
    /// Warmup length as a fraction of the delivery target.
    pub warmup_fraction: f64,
    pub batches: usize,
    /// Bins of the inter-departure histogram in [`SimResult`].
    pub histogram_bins: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            target_delivered_updates: 600_000,
            sampled_moments: 1_000_000,
            warmup_fraction: 0.02,
            batches: 30,
            histogram_bins: 60,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if self.target_delivered_updates == 0 {
            return bad("target_delivered_updates must be positive");
        }
        if self.sampled_moments == 0 {
            return bad("sampled_moments must be positive");
        }
        if !(0.0..0.5).contains(&self.warmup_fraction) {
            return bad("warmup_fraction must lie in [0, 0.5)");
        }
        if self.batches < 10 {
            return bad("at least 10 batches are required");
        }
        if self.histogram_bins == 0 {
            return bad("histogram_bins must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) enum Step {
    Arrival { source: usize, preempted: Option<usize> },
    Delivery { source: usize, generated: f64 },
}

/// The event loop shared by [`run`] and [`sample_paths`].
pub(crate) struct Engine<'a> {
    cumulative: Vec<f64>,
    total: f64,
    service: &'a ServiceModel<f64>,
    interarrival: Exp<f64>,
    arrivals_rng: ChaCha8Rng,
    thinning_rng: ChaCha8Rng,
    service_rng: ChaCha8Rng,
    next_arrival: f64,
    /// `(source, generation time, completion time)` of the update in service.
    busy: Option<(usize, f64, f64)>,
}

pub(crate) fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

impl<'a> Engine<'a> {
    pub(crate) fn new(spec: &'a SystemSpec<f64>, seed: u64) -> Self {
        let mut acc = 0.0;
        let cumulative = spec
            .rates()
            .iter()
            .map(|r| {
                acc += r;
                acc
            })
            .collect();
        let total = spec.total_rate();
        let interarrival = Exp::new(total).expect("positive total rate");
        let mut arrivals_rng = stream(seed, STREAM_ARRIVALS);
        let next_arrival = interarrival.sample(&mut arrivals_rng);
        Self {
            cumulative,
            total,
            service: spec.service(),
            interarrival,
            arrivals_rng,
            thinning_rng: stream(seed, STREAM_THINNING),
            service_rng: stream(seed, STREAM_SERVICE),
            next_arrival,
            busy: None,
        }
    }

    pub(crate) fn step(&mut self) -> (f64, Step) {
        if let Some((source, generated, done)) = self.busy {
            if done <= self.next_arrival {
                self.busy = None;
                return (done, Step::Delivery { source, generated });
            }
        }
        let t = self.next_arrival;
        let u = self.thinning_rng.random::<f64>() * self.total;
        let source = self
            .cumulative
            .partition_point(|&c| c <= u)
            .min(self.cumulative.len() - 1);
        let preempted = self.busy.map(|b| b.0);
        let s = self.service.sample(&mut self.service_rng);
        self.busy = Some((source, t, t + s));
        self.next_arrival = t + self.interarrival.sample(&mut self.arrivals_rng);
        (t, Step::Arrival { source, preempted })
    }
}

#[derive(Debug, Clone, Copy)]
struct Delivery {
    time: f64,
    generated: f64,
}

/// Raw output of one replication; estimators are evaluated on demand so
/// that any threshold grid can be queried without re-simulating.
#[derive(Debug, Clone)]
pub struct SimRun {
    seed: u64,
    batches: usize,
    window: (f64, f64),
    /// Per source: last delivery before the window, then every delivery inside it.
    history: Vec<Vec<Delivery>>,
    arrivals: Vec<u64>,
    discarded: Vec<u64>,
    total_arrivals: u64,
    /// Per source, the age at each sampled time (time order).
    sampled_ages: Vec<Vec<f64>>,
    /// End index (exclusive) of each time batch within `sampled_ages[i]`.
    sample_batch_ends: Vec<usize>,
    interdepartures: Vec<Vec<f64>>,
    peaks: Vec<Vec<f64>>,
    system_times: Vec<Vec<f64>>,
    thresholds_aoi: Vec<f64>,
    thresholds_paoi: Vec<f64>,
    histogram_bins: usize,
}

/// Simulates one replication.
pub fn run(spec: &SystemSpec<f64>, cfg: &SimConfig) -> Result<SimRun> {
    cfg.validate()?;
    let n = spec.n_sources();
    let mut engine = Engine::new(spec, cfg.seed);
    let warmup = (cfg.warmup_fraction * cfg.target_delivered_updates as f64).round() as usize;

    let mut last: Vec<Option<Delivery>> = vec![None; n];
    let mut history: Vec<Vec<Delivery>> = vec![Vec::new(); n];
    let mut arrivals = vec![0u64; n];
    let mut discarded = vec![0u64; n];
    let mut total_arrivals = 0u64;
    let mut delivered = 0usize;
    let mut window_start: Option<f64> = None;
    let window_end;

    loop {
        let (t, step) = engine.step();
        match step {
            Step::Arrival { source, preempted } => {
                if window_start.is_some() {
                    arrivals[source] += 1;
                    total_arrivals += 1;
                    if let Some(p) = preempted {
                        discarded[p] += 1;
                    }
                }
            }
            Step::Delivery { source, generated } => {
                let d = Delivery { time: t, generated };
                match window_start {
                    None => {
                        last[source] = Some(d);
                        delivered += 1;
                        if delivered >= warmup && last.iter().all(Option::is_some) {
                            window_start = Some(t);
                            for (h, l) in history.iter_mut().zip(&last) {
                                h.push(l.expect("every source delivered"));
                            }
                            delivered = 0;
                        } else if delivered >= warmup + cfg.target_delivered_updates {
                            let missing = last.iter().position(Option::is_none).expect("some source missing");
                            return Err(Error::InsufficientData {
                                index: missing,
                                delivered: 0,
                            });
                        }
                    }
                    Some(_) => {
                        history[source].push(d);
                        delivered += 1;
                        if delivered >= cfg.target_delivered_updates {
                            window_end = t;
                            break;
                        }
                    }
                }
            }
        }
    }
    let window = (window_start.expect("window opened"), window_end);

    for (i, h) in history.iter().enumerate() {
        // the prelude entry is not a window delivery
        let inside = h.len() - 1;
        if inside < cfg.batches + 1 {
            return Err(Error::InsufficientData {
                index: i,
                delivered: inside,
            });
        }
    }

    let inside = |h: &Vec<Delivery>| h[1..].to_vec();
    let interdepartures = history
        .iter()
        .map(|h| inside(h).windows(2).map(|w| w[1].time - w[0].time).collect())
        .collect();
    let peaks = history
        .iter()
        .map(|h| inside(h).windows(2).map(|w| w[1].time - w[0].generated).collect())
        .collect();
    let system_times = history
        .iter()
        .map(|h| h[1..].iter().map(|d| d.time - d.generated).collect())
        .collect();

    let (sampled_ages, sample_batch_ends) = sample_ages(&history, window, cfg);

    Ok(SimRun {
        seed: cfg.seed,
        batches: cfg.batches,
        window,
        history,
        arrivals,
        discarded,
        total_arrivals,
        sampled_ages,
        sample_batch_ends,
        interdepartures,
        peaks,
        system_times,
        thresholds_aoi: spec.thresholds_aoi().to_vec(),
        thresholds_paoi: spec.thresholds_paoi().to_vec(),
        histogram_bins: cfg.histogram_bins,
    })
}

/// Ages of every source at `cfg.sampled_moments` sorted uniform times in
/// the window, generated from exponential spacings.
fn sample_ages(history: &[Vec<Delivery>], window: (f64, f64), cfg: &SimConfig) -> (Vec<Vec<f64>>, Vec<usize>) {
    let m = cfg.sampled_moments;
    let mut rng = stream(cfg.seed, STREAM_SAMPLING);
    let unit = Exp::new(1.0).expect("unit rate");
    let spacings: Vec<f64> = (0..=m).map(|_| unit.sample(&mut rng)).collect();
    let total: f64 = spacings.iter().sum();
    let (lo, hi) = window;
    let len = hi - lo;
    let mut times = Vec::with_capacity(m);
    let mut acc = 0.0;
    for s in &spacings[..m] {
        acc += s;
        times.push(lo + len * (acc / total));
    }

    let width = len / cfg.batches as f64;
    let mut ends = vec![0usize; cfg.batches];
    for (k, &t) in times.iter().enumerate() {
        let b = (((t - lo) / width) as usize).min(cfg.batches - 1);
        ends[b] = k + 1;
    }
    for b in 1..cfg.batches {
        ends[b] = ends[b].max(ends[b - 1]);
    }

    let ages = history
        .iter()
        .map(|h| {
            let mut j = 0;
            times
                .iter()
                .map(|&t| {
                    while j + 1 < h.len() && h[j + 1].time <= t {
                        j += 1;
                    }
                    t - h[j].generated
                })
                .collect()
        })
        .collect();
    (ages, ends)
}

impl SimRun {
    pub fn n_sources(&self) -> usize {
        self.history.len()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn batches(&self) -> usize {
        self.batches
    }

    /// `(start, end)` of the measurement window.
    pub fn window(&self) -> (f64, f64) {
        self.window
    }

    pub fn horizon(&self) -> f64 {
        self.window.1 - self.window.0
    }

    /// Deliveries of source `i` inside the window.
    pub fn delivered(&self, i: usize) -> usize {
        self.history[i].len() - 1
    }

    pub fn arrivals(&self, i: usize) -> u64 {
        self.arrivals[i]
    }

    pub fn discarded(&self, i: usize) -> u64 {
        self.discarded[i]
    }

    pub fn total_arrivals(&self) -> u64 {
        self.total_arrivals
    }

    pub fn interdepartures(&self, i: usize) -> &[f64] {
        &self.interdepartures[i]
    }

    pub fn peaks(&self, i: usize) -> &[f64] {
        &self.peaks[i]
    }

    pub fn system_times(&self, i: usize) -> &[f64] {
        &self.system_times[i]
    }

    pub fn sampled_ages(&self, i: usize) -> &[f64] {
        &self.sampled_ages[i]
    }

    /// Integrates `f(u0, u1)` over every age segment of source `i`, where
    /// the age grows linearly from `u0` to `u1`, split into time batches.
    /// Returns per-batch integrals divided by the batch length.
    fn time_batches(&self, i: usize, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        let (lo, hi) = self.window;
        let b = self.batches;
        let width = (hi - lo) / b as f64;
        let mut acc = vec![0.0; b];
        let h = &self.history[i];
        for k in 0..h.len() {
            let start = h[k].time.max(lo);
            let end = if k + 1 < h.len() { h[k + 1].time } else { hi }.min(hi);
            let g = h[k].generated;
            let mut s = start;
            let mut batch = (((s - lo) / width) as usize).min(b - 1);
            while s < end {
                let edge = if batch + 1 == b { end } else { (lo + (batch + 1) as f64 * width).min(end) };
                if edge > s {
                    acc[batch] += f(s - g, edge - g);
                }
                s = edge;
                batch += 1;
                if batch >= b {
                    break;
                }
            }
        }
        acc.iter().map(|a| a / width).collect()
    }

    fn time_average(&self, per_batch: &[f64]) -> f64 {
        per_batch.iter().sum::<f64>() / per_batch.len() as f64
    }

    /// Time fraction with `Δ_i(t) > w`, from the exact violation time of
    /// every inter-departure interval.
    pub fn aoi_violation(&self, i: usize, w: f64) -> Estimate {
        let per = self.time_batches(i, |u0, u1| (u1 - u0.max(w)).max(0.0));
        stats::batch_estimate(self.time_average(&per), &per)
    }

    /// Fraction of sampled times with `Δ_i(t) > w`.
    pub fn aoi_violation_sampled(&self, i: usize, w: f64) -> Estimate {
        let ages = &self.sampled_ages[i];
        let mut per = Vec::with_capacity(self.batches);
        let mut start = 0;
        for &end in &self.sample_batch_ends {
            let s = &ages[start..end];
            per.push(s.iter().filter(|&&a| a > w).count() as f64 / s.len().max(1) as f64);
            start = end;
        }
        let value = ages.iter().filter(|&&a| a > w).count() as f64 / ages.len() as f64;
        stats::batch_estimate(value, &per)
    }

    /// Fraction of peak ages above `p`.
    pub fn paoi_violation(&self, i: usize, p: f64) -> Estimate {
        stats::exceedance(&self.peaks[i], p, self.batches)
    }

    /// Time-average AoI.
    pub fn aoi_mean(&self, i: usize) -> Estimate {
        let per = self.time_batches(i, |u0, u1| (u1 * u1 - u0 * u0) / 2.0);
        stats::batch_estimate(self.time_average(&per), &per)
    }

    /// Time-average variance of AoI.
    pub fn aoi_variance(&self, i: usize) -> Estimate {
        let m1 = self.time_batches(i, |u0, u1| (u1 * u1 - u0 * u0) / 2.0);
        let m2 = self.time_batches(i, |u0, u1| (u1.powi(3) - u0.powi(3)) / 3.0);
        let per: Vec<f64> = m1.iter().zip(&m2).map(|(a, b)| b - a * a).collect();
        let (a, b) = (self.time_average(&m1), self.time_average(&m2));
        stats::batch_estimate(b - a * a, &per)
    }

    pub fn paoi_mean(&self, i: usize) -> Estimate {
        stats::mean_estimate(&self.peaks[i], self.batches)
    }

    pub fn paoi_variance(&self, i: usize) -> Estimate {
        stats::variance_estimate(&self.peaks[i], self.batches)
    }

    pub fn mean_interdeparture(&self, i: usize) -> Estimate {
        stats::mean_estimate(&self.interdepartures[i], self.batches)
    }

    /// Share of arrivals that belong to source `i`.
    pub fn arrival_share(&self, i: usize) -> f64 {
        self.arrivals[i] as f64 / self.total_arrivals.max(1) as f64
    }

    /// Normalized histogram of source `i`'s inter-departure times.
    pub fn interdeparture_histogram(&self, i: usize, edges: Vec<f64>) -> Histogram {
        Histogram::from_samples(&self.interdepartures[i], edges)
    }

    /// Summary at the thresholds stored in the spec (if any).
    pub fn summarize(&self) -> SimResult {
        let sources = (0..self.n_sources())
            .map(|i| {
                let y = &self.interdepartures[i];
                let top = y.iter().copied().fold(0.0, f64::max);
                let w = self.thresholds_aoi.get(i).copied();
                let p = self.thresholds_paoi.get(i).copied();
                SourceStats {
                    source: i + 1,
                    delivered: self.delivered(i),
                    arrivals: self.arrivals[i],
                    discarded: self.discarded[i],
                    aoi_threshold: w,
                    paoi_threshold: p,
                    aoi_violation_time: w.map(|w| self.aoi_violation(i, w)),
                    aoi_violation_sampled: w.map(|w| self.aoi_violation_sampled(i, w)),
                    paoi_violation: p.map(|p| self.paoi_violation(i, p)),
                    mean_aoi: self.aoi_mean(i),
                    var_aoi: self.aoi_variance(i),
                    mean_paoi: self.paoi_mean(i),
                    var_paoi: self.paoi_variance(i),
                    mean_interdeparture: self.mean_interdeparture(i),
                    interdeparture_histogram: Histogram::uniform(y, 0.0, top, self.histogram_bins),
                }
            })
            .collect();
        SimResult {
            seed: self.seed,
            window_start: self.window.0,
            window_end: self.window.1,
            horizon: self.horizon(),
            batches: self.batches,
            sources,
        }
    }
}

/// Per-source part of [`SimResult`]; sources are numbered from 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceStats {
    pub source: usize,
    pub delivered: usize,
    pub arrivals: u64,
    pub discarded: u64,
    pub aoi_threshold: Option<f64>,
    pub paoi_threshold: Option<f64>,
    pub aoi_violation_time: Option<Estimate>,
    pub aoi_violation_sampled: Option<Estimate>,
    pub paoi_violation: Option<Estimate>,
    pub mean_aoi: Estimate,
    pub var_aoi: Estimate,
    pub mean_paoi: Estimate,
    pub var_paoi: Estimate,
    pub mean_interdeparture: Estimate,
    pub interdeparture_histogram: Histogram,
}

/// Serializable summary of one replication (or of merged replications).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub seed: u64,
    pub window_start: f64,
    pub window_end: f64,
    pub horizon: f64,
    pub batches: usize,
    pub sources: Vec<SourceStats>,
}

/// Runs `replications` independent replications (seeds `cfg.seed + k`) on
/// up to `threads` worker threads. Output order follows `k`, so the result
/// does not depend on the thread count.
pub fn run_replications(
    spec: &SystemSpec<f64>,
    cfg: &SimConfig,
    replications: usize,
    threads: usize,
) -> Result<Vec<SimRun>> {
    let threads = threads.clamp(1, replications.max(1));
    let mut slots: Vec<Option<Result<SimRun>>> = (0..replications).map(|_| None).collect();
    std::thread::scope(|scope| {
        for (t, chunk) in slots.chunks_mut(replications.div_ceil(threads).max(1)).enumerate() {
            let base = t * replications.div_ceil(threads).max(1);
            scope.spawn(move || {
                for (j, slot) in chunk.iter_mut().enumerate() {
                    let mut c = cfg.clone();
                    c.seed = cfg.seed.wrapping_add((base + j) as u64);
                    *slot = Some(run(spec, &c));
                }
            });
        }
    });
    slots.into_iter().map(|s| s.expect("every replication ran")).collect()
}

/// Weighted average of independent estimates; half-widths add in quadrature.
pub fn pool_estimates(parts: &[(f64, Estimate)]) -> Estimate {
    let total: f64 = parts.iter().map(|p| p.0).sum();
    let value = parts.iter().map(|(w, e)| w * e.value).sum::<f64>() / total;
    let hw = parts
        .iter()
        .map(|(w, e)| (w / total * e.ci_halfwidth).powi(2))
        .sum::<f64>()
        .sqrt();
    Estimate {
        value,
        ci_halfwidth: hw,
    }
}

/// Weighted average of replication summaries: time-average quantities are
/// weighted by horizon, per-update quantities by delivered count.
pub fn merge(results: &[SimResult]) -> Result<SimResult> {
    let first = results
        .first()
        .ok_or_else(|| Error::InvalidConfig("nothing to merge".into()))?;
    let n = first.sources.len();
    if results.iter().any(|r| r.sources.len() != n) {
        return Err(Error::InvalidConfig("replications disagree on the number of sources".into()));
    }
    let sources = (0..n)
        .map(|i| {
            let by_time = |f: &dyn Fn(&SourceStats) -> Estimate| {
                pool_estimates(&results.iter().map(|r| (r.horizon, f(&r.sources[i]))).collect::<Vec<_>>())
            };
            let by_count = |f: &dyn Fn(&SourceStats) -> Estimate| {
                pool_estimates(
                    &results
                        .iter()
                        .map(|r| (r.sources[i].delivered as f64, f(&r.sources[i])))
                        .collect::<Vec<_>>(),
                )
            };
            let opt_time = |f: &dyn Fn(&SourceStats) -> Option<Estimate>| {
                if results.iter().all(|r| f(&r.sources[i]).is_some()) {
                    Some(by_time(&|s| f(s).expect("checked")))
                } else {
                    None
                }
            };
            let s0 = &first.sources[i];
            let mut hist = s0.interdeparture_histogram.clone();
            let same_edges = results
                .iter()
                .all(|r| r.sources[i].interdeparture_histogram.edges == hist.edges);
            if same_edges {
                let count: usize = results.iter().map(|r| r.sources[i].interdeparture_histogram.count).sum();
                let weight = |r: &SimResult| r.sources[i].interdeparture_histogram.count as f64 / count as f64;
                for (k, m) in hist.masses.iter_mut().enumerate() {
                    *m = results
                        .iter()
                        .map(|r| weight(r) * r.sources[i].interdeparture_histogram.masses[k])
                        .sum();
                }
                hist.overflow = results
                    .iter()
                    .map(|r| weight(r) * r.sources[i].interdeparture_histogram.overflow)
                    .sum();
                hist.count = count;
            }
            SourceStats {
                source: s0.source,
                delivered: results.iter().map(|r| r.sources[i].delivered).sum(),
                arrivals: results.iter().map(|r| r.sources[i].arrivals).sum(),
                discarded: results.iter().map(|r| r.sources[i].discarded).sum(),
                aoi_threshold: s0.aoi_threshold,
                paoi_threshold: s0.paoi_threshold,
                aoi_violation_time: opt_time(&|s| s.aoi_violation_time),
                aoi_violation_sampled: opt_time(&|s| s.aoi_violation_sampled),
                paoi_violation: if results.iter().all(|r| r.sources[i].paoi_violation.is_some()) {
                    Some(by_count(&|s| s.paoi_violation.expect("checked")))
                } else {
                    None
                },
                mean_aoi: by_time(&|s| s.mean_aoi),
                var_aoi: by_time(&|s| s.var_aoi),
                mean_paoi: by_count(&|s| s.mean_paoi),
                var_paoi: by_count(&|s| s.var_paoi),
                mean_interdeparture: by_count(&|s| s.mean_interdeparture),
                interdeparture_histogram: hist,
            }
        })
        .collect();
    Ok(SimResult {
        seed: first.seed,
        window_start: first.window_start,
        window_end: first.window_end,
        horizon: results.iter().map(|r| r.horizon).sum(),
        batches: first.batches,
        sources,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mm11;

    fn fig3_spec(service: ServiceModel<f64>) -> SystemSpec<f64> {
        SystemSpec::new(vec![0.2, 0.4], service)
            .unwrap()
            .with_thresholds(vec![8.0, 8.0], vec![8.625, 8.625])
            .unwrap()
    }

    fn small_cfg(seed: u64) -> SimConfig {
        SimConfig {
            seed,
            target_delivered_updates: 60_000,
            sampled_moments: 100_000,
            ..SimConfig::default()
        }
    }

    #[test]
    fn config_validation() {
        let mut c = SimConfig::default();
        assert!(c.validate().is_ok());
        c.target_delivered_updates = 0;
        assert!(matches!(c.validate(), Err(Error::InvalidConfig(_))));
        let c = SimConfig {
            batches: 5,
            ..SimConfig::default()
        };
        assert!(c.validate().is_err());
        let c = SimConfig {
            warmup_fraction: 0.5,
            ..SimConfig::default()
        };
        assert!(c.validate().is_err());
    }

    #[test]
    fn deterministic_for_a_seed() {
        let spec = fig3_spec(ServiceModel::exponential(1.0).unwrap());
        let a = run(&spec, &small_cfg(11)).unwrap().summarize();
        let b = run(&spec, &small_cfg(11)).unwrap().summarize();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        let c = run(&spec, &small_cfg(12)).unwrap().summarize();
        assert_ne!(a, c);
    }

    #[test]
    fn bookkeeping_invariants() {
        let spec = fig3_spec(ServiceModel::exponential(1.0).unwrap());
        let r = run(&spec, &small_cfg(3)).unwrap();
        let total: usize = (0..2).map(|i| r.delivered(i)).sum();
        assert_eq!(total, 60_000);
        for i in 0..2 {
            assert_eq!(r.peaks(i).len(), r.delivered(i) - 1);
            assert_eq!(r.interdepartures(i).len(), r.delivered(i) - 1);
            assert!(r.system_times(i).iter().all(|&t| t > 0.0));
            assert!(r.discarded(i) <= r.arrivals(i));
        }
        let s = r.summarize();
        for src in &s.sources {
            assert!((src.interdeparture_histogram.total_mass() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn thinning_matches_rates() {
        let spec = fig3_spec(ServiceModel::exponential(1.0).unwrap());
        let r = run(&spec, &small_cfg(5)).unwrap();
        let n = r.total_arrivals() as f64;
        for (i, want) in [(0, 1.0 / 3.0), (1, 2.0 / 3.0)] {
            let se = (want * (1.0 - want) / n).sqrt();
            assert!((r.arrival_share(i) - want).abs() < 3.0 * se);
        }
    }

    #[test]
    fn estimates_near_closed_forms() {
        let spec = fig3_spec(ServiceModel::exponential(1.0).unwrap());
        let r = run(&spec, &small_cfg(9)).unwrap();
        let exact = mm11::aoi_violation(0.6, 1.0, 0.2, 8.0).unwrap();
        assert!((r.aoi_violation(0, 8.0).value - exact).abs() < 0.02);
        assert!((r.aoi_violation_sampled(0, 8.0).value - exact).abs() < 0.02);
        let exact = mm11::paoi_violation(0.6, 1.0, 0.2, 8.625).unwrap();
        assert!((r.paoi_violation(0, 8.625).value - exact).abs() < 0.02);
        assert!((r.aoi_mean(0).value - 8.0).abs() < 0.4);
        assert!((r.mean_interdeparture(0).value - 8.0).abs() < 0.4);
    }

    #[test]
    fn sparse_arrivals_deliver_everything() {
        let spec = SystemSpec::new(vec![0.001], ServiceModel::deterministic(1.0).unwrap()).unwrap();
        let cfg = SimConfig {
            target_delivered_updates: 5_000,
            sampled_moments: 10_000,
            ..SimConfig::default()
        };
        let r = run(&spec, &cfg).unwrap();
        let lost = r.discarded(0) as f64 / r.arrivals(0) as f64;
        assert!(lost < 0.01);
        let expect = (0.001f64).exp() / 0.001;
        assert!((r.mean_interdeparture(0).value - expect).abs() < 0.05 * expect);
        assert!(r.system_times(0).iter().all(|&t| t == 1.0));
    }

    #[test]
    fn starving_source_reports_insufficient_data() {
        let spec = SystemSpec::new(vec![1.0, 1e-7], ServiceModel::exponential(1.0).unwrap()).unwrap();
        let cfg = SimConfig {
            target_delivered_updates: 2_000,
            sampled_moments: 100,
            ..SimConfig::default()
        };
        match run(&spec, &cfg) {
            Err(Error::InsufficientData { index, .. }) => assert_eq!(index, 1),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn replications_independent_of_thread_count() {
        let spec = fig3_spec(ServiceModel::uniform(1.0).unwrap());
        let cfg = SimConfig {
            target_delivered_updates: 10_000,
            sampled_moments: 10_000,
            ..SimConfig::default()
        };
        let one: Vec<_> = run_replications(&spec, &cfg, 4, 1).unwrap().iter().map(|r| r.summarize()).collect();
        let many: Vec<_> = run_replications(&spec, &cfg, 4, 3).unwrap().iter().map(|r| r.summarize()).collect();
        assert_eq!(one, many);
        let merged = merge(&one).unwrap();
        assert_eq!(merged.sources[0].delivered, one.iter().map(|r| r.sources[0].delivered).sum::<usize>());
        let horizon: f64 = one.iter().map(|r| r.horizon).sum();
        assert!((merged.horizon - horizon).abs() < 1e-9 * horizon);
    }
}
