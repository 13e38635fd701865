use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

/// Point estimate with a 95% confidence half-width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub ci_halfwidth: f64,
}

impl Estimate {
    pub fn contains(&self, x: f64) -> bool {
        (self.value - x).abs() <= self.ci_halfwidth
    }

    /// Standard error implied by the half-width and the batch count used.
    pub fn standard_error(&self, batches: usize) -> f64 {
        self.ci_halfwidth / t_quantile_975(batches.saturating_sub(1).max(1))
    }
}

pub(crate) fn t_quantile_975(dof: usize) -> f64 {
    StudentsT::new(0.0, 1.0, dof as f64)
        .expect("positive degrees of freedom")
        .inverse_cdf(0.975)
}

/// Batch-means interval around `value` from per-batch estimates.
pub(crate) fn batch_estimate(value: f64, batches: &[f64]) -> Estimate {
    let b = batches.len();
    if b < 2 {
        return Estimate {
            value,
            ci_halfwidth: f64::INFINITY,
        };
    }
    let mean = batches.iter().sum::<f64>() / b as f64;
    let var = batches.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (b - 1) as f64;
    Estimate {
        value,
        ci_halfwidth: t_quantile_975(b - 1) * (var / b as f64).sqrt(),
    }
}

/// Splits `0..n` into `batches` contiguous ranges of near-equal length.
pub(crate) fn batch_ranges(n: usize, batches: usize) -> impl Iterator<Item = std::ops::Range<usize>> {
    (0..batches).map(move |k| (k * n / batches)..((k + 1) * n / batches))
}

/// Batch-means estimate of the fraction of `samples` above `threshold`.
pub(crate) fn exceedance(samples: &[f64], threshold: f64, batches: usize) -> Estimate {
    let frac = |s: &[f64]| s.iter().filter(|&&x| x > threshold).count() as f64 / s.len().max(1) as f64;
    let per: Vec<f64> = batch_ranges(samples.len(), batches).map(|r| frac(&samples[r])).collect();
    batch_estimate(frac(samples), &per)
}

pub(crate) fn mean_estimate(samples: &[f64], batches: usize) -> Estimate {
    let mean = |s: &[f64]| s.iter().sum::<f64>() / s.len().max(1) as f64;
    let per: Vec<f64> = batch_ranges(samples.len(), batches).map(|r| mean(&samples[r])).collect();
    batch_estimate(mean(samples), &per)
}

pub(crate) fn variance_estimate(samples: &[f64], batches: usize) -> Estimate {
    let var = |s: &[f64]| {
        let n = s.len().max(2) as f64;
        let m = s.iter().sum::<f64>() / n;
        s.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0)
    };
    let per: Vec<f64> = batch_ranges(samples.len(), batches).map(|r| var(&samples[r])).collect();
    batch_estimate(var(samples), &per)
}

/// Normalized histogram on fixed edges; mass beyond the last edge is
/// reported separately so that `masses + overflow` sums to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub masses: Vec<f64>,
    pub overflow: f64,
    pub count: usize,
}

impl Histogram {
    pub fn from_samples(samples: &[f64], edges: Vec<f64>) -> Self {
        let k = edges.len().saturating_sub(1);
        let mut counts = vec![0usize; k];
        let mut over = 0usize;
        for &x in samples {
            let j = edges.partition_point(|&e| e <= x);
            if j == 0 {
                // below the first edge; edges start at zero for ages
                counts[0] += 1;
            } else if j > k && x > edges[k] {
                over += 1;
            } else if j > k {
                // the last bin is closed on the right
                counts[k - 1] += 1;
            } else {
                counts[j - 1] += 1;
            }
        }
        let n = samples.len().max(1) as f64;
        Self {
            masses: counts.iter().map(|&c| c as f64 / n).collect(),
            overflow: over as f64 / n,
            count: samples.len(),
            edges,
        }
    }

    pub fn uniform(samples: &[f64], lo: f64, hi: f64, bins: usize) -> Self {
        let edges = (0..=bins).map(|k| lo + (hi - lo) * k as f64 / bins as f64).collect();
        Self::from_samples(samples, edges)
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.iter().sum::<f64>() + self.overflow
    }
}
