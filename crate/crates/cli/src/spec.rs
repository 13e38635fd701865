//! Experiment spec files.
//!
//! A spec is a JSON object with `"schema": 1` and one optional section per
//! command. Unknown keys are rejected at every level. Sources are numbered
//! from 1 in spec files and outputs.

use std::path::Path;

use agebench::mg11::SystemSpec;
use agebench::sim::SimConfig;
use agebench::{Metric, ServiceSpec};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub schema: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system: Option<SystemSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub analyze: Option<AnalyzeSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulate: Option<SimulateSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub optimize: Option<OptimizeSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
}

/// Evenly spaced values `start, start + step, ...` up to `stop` inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Range {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

const MAX_RANGE_POINTS: usize = 1_000_000;

impl Range {
    pub fn new(start: f64, stop: f64, step: f64) -> Self {
        Self { start, stop, step }
    }

    pub fn values(&self) -> Result<Vec<f64>> {
        let Range { start, stop, step } = *self;
        if !(start.is_finite() && stop.is_finite() && step > 0.0 && step.is_finite() && stop >= start) {
            return Err(CliError::Schema(format!(
                "range needs finite start <= stop and step > 0, got {start}..{stop} by {step}"
            )));
        }
        let n = ((stop - start) / step + 1e-9).floor() as usize;
        if n >= MAX_RANGE_POINTS {
            return Err(CliError::Schema(format!("range has more than {MAX_RANGE_POINTS} points")));
        }
        // rounding keeps grid points such as 0.4 exact
        Ok((0..=n)
            .map(|k| ((start + k as f64 * step) * 1e12).round() / 1e12)
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSection {
    pub rates: Vec<f64>,
    pub service: ServiceSpec,
}

impl SystemSection {
    pub fn build(&self, service: &ServiceSpec) -> Result<SystemSpec<f64>> {
        Ok(SystemSpec::new(self.rates.clone(), service.build()?)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalyzeSection {
    pub thresholds: Range,
    /// Service laws to evaluate; defaults to the system's own.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub services: Option<Vec<ServiceSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sources: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metrics: Option<Vec<Metric>>,
}

fn one() -> usize {
    1
}

fn three() -> f64 {
    3.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateSection {
    pub thresholds: Range,
    #[serde(default)]
    pub config: SimConfig,
    /// Service laws to simulate; defaults to the system's own.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub services: Option<Vec<ServiceSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sources: Option<Vec<usize>>,
    #[serde(default = "one")]
    pub replications: usize,
    #[serde(default = "one")]
    pub threads: usize,
    /// Largest tolerated |analytic - empirical| in standard errors.
    #[serde(default = "three")]
    pub max_z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizeSection {
    pub service_rate: f64,
    pub total_rate: f64,
    pub threshold_sets: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metrics: Option<Vec<Metric>>,
    /// Grid of rates for the swept source; omitted means no sweep.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Range>,
    #[serde(default = "one")]
    pub sweep_source: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_rates: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iterations: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub service_rate: f64,
    pub threshold_sets: Vec<Vec<f64>>,
    pub total_rates: Range,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metrics: Option<Vec<Metric>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iterations: Option<usize>,
}

impl AnalyzeSection {
    pub fn laws(&self, system: &SystemSection) -> Vec<ServiceSpec> {
        self.services.clone().unwrap_or_else(|| vec![system.service.clone()])
    }
}

impl SimulateSection {
    pub fn laws(&self, system: &SystemSection) -> Vec<ServiceSpec> {
        self.services.clone().unwrap_or_else(|| vec![system.service.clone()])
    }
}

pub fn metrics_or_both(m: &Option<Vec<Metric>>) -> Vec<Metric> {
    match m {
        Some(v) if !v.is_empty() => v.clone(),
        _ => vec![Metric::Aoi, Metric::Paoi],
    }
}

/// Converts 1-based source numbers to 0-based indices, defaulting to all.
pub fn source_indices(sources: &Option<Vec<usize>>, n: usize) -> Result<Vec<usize>> {
    match sources {
        None => Ok((0..n).collect()),
        Some(v) => v
            .iter()
            .map(|&s| {
                if (1..=n).contains(&s) {
                    Ok(s - 1)
                } else {
                    Err(CliError::Schema(format!("source {s} out of range 1..={n}")))
                }
            })
            .collect(),
    }
}

impl ExperimentSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: ExperimentSpec = serde_json::from_str(text).map_err(|e| CliError::Schema(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema != SCHEMA_VERSION {
            return Err(CliError::Schema(format!(
                "unsupported schema version {} (expected {SCHEMA_VERSION})",
                self.schema
            )));
        }
        if let Some(sys) = &self.system {
            sys.build(&sys.service)?;
        }
        if let Some(a) = &self.analyze {
            a.thresholds.values()?;
            if self.system.is_none() {
                return Err(CliError::Schema("analyze needs a system section".into()));
            }
            for s in a.services.iter().flatten() {
                s.build::<f64>()?;
            }
        }
        if let Some(s) = &self.simulate {
            s.thresholds.values()?;
            s.config.validate()?;
            if self.system.is_none() {
                return Err(CliError::Schema("simulate needs a system section".into()));
            }
            if s.replications == 0 || s.threads == 0 {
                return Err(CliError::Schema("replications and threads must be at least 1".into()));
            }
            if s.max_z.is_nan() || s.max_z <= 0.0 {
                return Err(CliError::Schema("max_z must be positive".into()));
            }
            for svc in s.services.iter().flatten() {
                svc.build::<f64>()?;
            }
        }
        if let Some(o) = &self.optimize {
            if o.threshold_sets.is_empty() {
                return Err(CliError::Schema("optimize needs at least one threshold set".into()));
            }
            if let Some(r) = &o.sweep {
                r.values()?;
            }
        }
        if let Some(s) = &self.sweep {
            s.total_rates.values()?;
            if s.threshold_sets.is_empty() {
                return Err(CliError::Schema("sweep needs at least one threshold set".into()));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }
}
