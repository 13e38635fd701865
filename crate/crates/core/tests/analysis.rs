use agebench::mg11::{AgeKind, Analyzer, SystemSpec};
use agebench::{mm11, ServiceModel, ServiceSpec};
use proptest::prelude::*;

fn exponential(rates: Vec<f64>, mu: f64) -> Analyzer<f64> {
    Analyzer::new(SystemSpec::new(rates, ServiceModel::exponential(mu).unwrap()).unwrap())
}

#[test]
fn reference_point_values() {
    assert!((mm11::aoi_violation(0.6f64, 1.0, 0.2, 8.0).unwrap() - 0.3695946843).abs() < 1e-9);
    assert!((mm11::paoi_violation(0.6f64, 1.0, 0.2, 8.625).unwrap() - 0.3710258635).abs() < 1e-9);
    assert!((mm11::aoi_violation(0.8f64, 1.0, 0.4, 10.0).unwrap() - 0.0896144161).abs() < 1e-9);
    let r = mm11::roots(0.6f64, 1.0, 0.2).unwrap();
    assert!((mm11::interdeparture_pdf_closed(&r, 0.2, 1.0, 8.0) - 0.05051324287).abs() < 1e-10);
}

#[test]
fn general_moments_match_closed_forms() {
    let a = exponential(vec![0.2, 0.4], 1.0);
    for i in 0..2 {
        let g = a.moments(i).unwrap();
        let c = mm11::moments(0.6, 1.0, [0.2, 0.4][i]).unwrap();
        assert!((g.mean_aoi - c.mean_aoi).abs() < 1e-10);
        assert!((g.var_aoi - c.var_aoi).abs() < 1e-8);
        assert!((g.mean_paoi - c.mean_paoi).abs() < 1e-10);
        assert!((g.var_paoi - c.var_paoi).abs() < 1e-8);
    }
}

#[test]
fn tabulated_uniform_matches_builtin() {
    let grid: Vec<(f64, f64)> = (0..=50).map(|k| (k as f64 * 0.04, 0.5)).collect();
    let custom = Analyzer::new(SystemSpec::new(vec![0.2, 0.4], ServiceModel::custom(&grid).unwrap()).unwrap());
    let builtin = Analyzer::new(SystemSpec::new(vec![0.2, 0.4], ServiceModel::uniform(1.0).unwrap()).unwrap());
    for w in [1.0, 3.0, 7.0, 15.0] {
        assert!((custom.aoi_violation(0, w).unwrap() - builtin.aoi_violation(0, w).unwrap()).abs() < 1e-7);
        assert!((custom.paoi_violation(1, w).unwrap() - builtin.paoi_violation(1, w).unwrap()).abs() < 1e-7);
    }
}

#[test]
fn shifted_custom_support_near_its_start() {
    // density supported on [0.5, 1.5]; the inter-departure time cannot be shorter than 0.5
    let grid: Vec<(f64, f64)> = (0..=40).map(|k| (0.5 + k as f64 * 0.025, 1.0)).collect();
    let a = Analyzer::new(SystemSpec::new(vec![0.3, 0.3], ServiceModel::custom(&grid).unwrap()).unwrap());
    assert_eq!(a.interdeparture_cdf(0, 0.4).unwrap(), 0.0);
    let near = a.interdeparture_cdf(0, 0.51).unwrap();
    assert!((0.0..1e-2).contains(&near));
    assert!(a.interdeparture_pdf(0, 0.505).unwrap().is_finite());
}

#[test]
fn deterministic_dominates_exponential() {
    let d = Analyzer::new(SystemSpec::new(vec![0.2, 0.4], ServiceModel::deterministic(1.0).unwrap()).unwrap());
    let m = exponential(vec![0.2, 0.4], 1.0);
    for w in 2..=20 {
        let w = w as f64;
        assert!(d.aoi_violation(0, w).unwrap() > m.aoi_violation(0, w).unwrap());
    }
}

#[test]
fn paoi_density_integrates_to_its_cdf() {
    let a = Analyzer::new(SystemSpec::new(vec![0.2, 0.4], ServiceModel::deterministic(1.0).unwrap()).unwrap());
    let dist = a.distribution(0, AgeKind::Paoi).unwrap();
    for x in [4.0f64, 9.0] {
        let direct = dist.cdf(x).unwrap();
        let integrated = dist.integrated_pdf(x, 1e-9).unwrap();
        assert!((direct - integrated).abs() < 1e-6, "{x}: {direct} vs {integrated}");
    }
}

#[test]
fn json_service_spec_drives_the_analyzer() {
    let spec: ServiceSpec = serde_json::from_str(r#"{"kind":"deterministic","mu":2.0}"#).unwrap();
    let svc = spec.build::<f64>().unwrap();
    assert_eq!(svc.kendall(), "D");
    assert!((svc.mean() - 0.5).abs() < 1e-15);
    assert!(serde_json::from_str::<ServiceSpec>(r#"{"kind":"uniform","mu":1,"extra":0}"#).is_err());
}

#[test]
fn single_precision_closed_forms() {
    let a = mm11::aoi_violation(0.6f32, 1.0, 0.2, 8.0).unwrap();
    assert!((a as f64 - 0.3695946843).abs() < 1e-5);
    let g = mm11::paoi_violation_grad(0.6f32, 1.0, 0.2, 8.0).unwrap();
    assert!(g < 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn general_route_matches_closed_form(
        mu in 0.5f64..2.0,
        load in 0.2f64..2.0,
        share in 0.1f64..0.9,
        x in 0.5f64..25.0,
    ) {
        let total = mu * load;
        let rate = total * share;
        let a = exponential(vec![rate, total - rate], mu);
        let gen_a = a.aoi_violation(0, x).unwrap();
        let gen_p = a.paoi_violation(0, x).unwrap();
        prop_assert!((gen_a - mm11::aoi_violation(total, mu, rate, x).unwrap()).abs() < 1e-6);
        prop_assert!((gen_p - mm11::paoi_violation(total, mu, rate, x).unwrap()).abs() < 1e-6);
    }

    #[test]
    fn violation_probabilities_are_survival_functions(
        kind in 0usize..3,
        share in 0.1f64..0.9,
        x in 0.5f64..20.0,
    ) {
        let svc = [ServiceModel::exponential(1.0), ServiceModel::deterministic(1.0), ServiceModel::<f64>::uniform(1.0)][kind].clone().unwrap();
        let a = Analyzer::new(SystemSpec::new(vec![0.6 * share, 0.6 * (1.0 - share)], svc).unwrap());
        let (p0, p1) = (a.aoi_violation(0, x).unwrap(), a.aoi_violation(0, x + 0.5).unwrap());
        prop_assert!((0.0..=1.0).contains(&p0));
        prop_assert!(p1 <= p0 + 1e-9);
        let (q0, q1) = (a.paoi_violation(0, x).unwrap(), a.paoi_violation(0, x + 0.5).unwrap());
        prop_assert!(q1 <= q0 + 1e-9);
        // PAoI is Y + T, and the AoI shares the law of Y
        prop_assert!(q0 >= p0 - 1e-9);
    }
}
