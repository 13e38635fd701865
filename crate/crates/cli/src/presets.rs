//! Built-in experiment specs.

use agebench::service::ServiceKindTag;
use agebench::sim::SimConfig;
use agebench::{Metric, ServiceSpec};

use crate::error::{CliError, Result};
use crate::spec::{
    AnalyzeSection, ExperimentSpec, OptimizeSection, Range, SimulateSection, SweepSection, SystemSection,
    SCHEMA_VERSION,
};

pub const PRESET_NAMES: &[&str] = &["fig3", "fig4", "fig5", "fig6"];

fn service(kind: ServiceKindTag, mu: f64) -> ServiceSpec {
    ServiceSpec {
        kind,
        mu: Some(mu),
        grid: None,
    }
}

fn empty(name: &str) -> ExperimentSpec {
    ExperimentSpec {
        schema: SCHEMA_VERSION,
        name: Some(name.to_string()),
        system: None,
        analyze: None,
        simulate: None,
        optimize: None,
        sweep: None,
    }
}

/// Violation probabilities of two sources under M, D and U service.
pub fn fig3() -> ExperimentSpec {
    let laws = vec![
        service(ServiceKindTag::Exponential, 1.0),
        service(ServiceKindTag::Deterministic, 1.0),
        service(ServiceKindTag::Uniform, 1.0),
    ];
    ExperimentSpec {
        system: Some(SystemSection {
            rates: vec![0.2, 0.4],
            service: laws[0].clone(),
        }),
        analyze: Some(AnalyzeSection {
            thresholds: Range::new(0.0, 20.0, 0.5),
            services: Some(laws.clone()),
            sources: None,
            metrics: None,
        }),
        simulate: Some(SimulateSection {
            thresholds: Range::new(2.0, 20.0, 2.0),
            config: SimConfig::default(),
            services: Some(laws),
            sources: None,
            replications: 1,
            threads: 1,
            max_z: 3.0,
        }),
        ..empty("fig3")
    }
}

/// Maximal violation probability as the rate of source 1 sweeps the budget.
pub fn fig4() -> ExperimentSpec {
    ExperimentSpec {
        optimize: Some(OptimizeSection {
            service_rate: 1.0,
            total_rate: 0.8,
            threshold_sets: vec![vec![10.0, 10.0], vec![5.0, 10.0], vec![15.0, 10.0]],
            metrics: Some(vec![Metric::Aoi, Metric::Paoi]),
            sweep: Some(Range::new(0.01, 0.79, 0.01)),
            sweep_source: 1,
            initial_rates: None,
            tolerance: None,
            max_iterations: None,
        }),
        ..empty("fig4")
    }
}

fn budget_sweep(name: &str, metric: Metric) -> ExperimentSpec {
    ExperimentSpec {
        sweep: Some(SweepSection {
            service_rate: 1.0,
            threshold_sets: vec![vec![7.5, 7.5], vec![5.0, 10.0], vec![2.0, 13.0]],
            total_rates: Range::new(0.2, 2.0, 0.1),
            metrics: Some(vec![metric]),
            tolerance: None,
            max_iterations: None,
        }),
        ..empty(name)
    }
}

/// Optimal against equal allocation of the AoI objective over the budget.
pub fn fig5() -> ExperimentSpec {
    budget_sweep("fig5", Metric::Aoi)
}

/// Same as [`fig5`] for PAoI.
pub fn fig6() -> ExperimentSpec {
    budget_sweep("fig6", Metric::Paoi)
}

pub fn preset(name: &str) -> Result<ExperimentSpec> {
    match name {
        "fig3" => Ok(fig3()),
        "fig4" => Ok(fig4()),
        "fig5" => Ok(fig5()),
        "fig6" => Ok(fig6()),
        _ => Err(CliError::Schema(format!(
            "unknown preset {name:?}; available: {}",
            PRESET_NAMES.join(", ")
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate_and_round_trip() {
        for name in PRESET_NAMES {
            let spec = preset(name).unwrap();
            spec.validate().unwrap();
            assert_eq!(ExperimentSpec::from_json(&spec.to_json()).unwrap(), spec);
        }
        assert!(preset("fig9").is_err());
    }
}
