use agebench::optimizer::{
    equal_allocation, max_violation, solve_equalize, solve_newton_barrier, sweep_allocation, AllocationProblem,
    Metric,
};
use proptest::prelude::*;

fn metric() -> impl Strategy<Value = Metric> {
    prop_oneof![Just(Metric::Aoi), Just(Metric::Paoi)]
}

fn problem() -> impl Strategy<Value = AllocationProblem<f64>> {
    (metric(), 2usize..=5, 0.5f64..2.0, 0.2f64..2.0).prop_flat_map(|(m, n, mu, load)| {
        prop::collection::vec(1.0f64..20.0, n)
            .prop_map(move |w| AllocationProblem::new(m, w, mu * load, mu).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn solvers_agree(p in problem()) {
        let e = solve_equalize(&p).unwrap();
        let b = solve_newton_barrier(&p, None).unwrap();
        prop_assert!((e.objective - b.objective).abs() < 1e-6);
        for (x, y) in e.rates.iter().zip(&b.rates) {
            prop_assert!((x - y).abs() < 1e-5);
        }
        prop_assert!(e.equalization_spread < 1e-6);
        prop_assert!(b.equalization_spread < 1e-6);
        prop_assert!((e.rates.iter().sum::<f64>() - p.total_rate).abs() < 1e-10);
    }

    #[test]
    fn optimum_beats_random_feasible_points(p in problem(), weights in prop::collection::vec(0.05f64..1.0, 5)) {
        let n = p.n_sources();
        let total: f64 = weights[..n].iter().sum();
        let rates: Vec<f64> = weights[..n].iter().map(|w| w / total * p.total_rate).collect();
        let opt = solve_equalize(&p).unwrap();
        prop_assert!(opt.objective <= max_violation(&rates, &p).unwrap() + 1e-12);
        prop_assert!(opt.objective <= equal_allocation(&p).unwrap().objective + 1e-12);
    }

    #[test]
    fn tighter_thresholds_get_more_rate(p in problem()) {
        let opt = solve_equalize(&p).unwrap();
        for i in 0..p.n_sources() {
            for j in 0..p.n_sources() {
                if p.thresholds[i] < p.thresholds[j] - 1e-9 {
                    prop_assert!(opt.rates[i] > opt.rates[j]);
                }
            }
        }
    }

    #[test]
    fn start_point_does_not_matter(m in metric(), w1 in 1.0f64..20.0, w2 in 1.0f64..20.0, start in 0.05f64..0.75) {
        let p = AllocationProblem::new(m, vec![w1, w2], 0.8, 1.0).unwrap();
        let a = solve_newton_barrier(&p, Some(&[start, 0.8 - start])).unwrap();
        let b = solve_newton_barrier(&p, None).unwrap();
        prop_assert!((a.objective - b.objective).abs() < 1e-7);
    }
}

#[test]
fn larger_budget_lowers_the_optimum() {
    for m in [Metric::Aoi, Metric::Paoi] {
        for w in [[7.5, 7.5], [5.0, 10.0], [2.0, 13.0]] {
            let objectives: Vec<f64> = [0.4, 0.6, 0.8, 1.0]
                .iter()
                .map(|&l| solve_equalize(&AllocationProblem::new(m, w.to_vec(), l, 1.0).unwrap()).unwrap().objective)
                .collect();
            assert!(objectives.windows(2).all(|x| x[1] < x[0]), "{m:?} {w:?} {objectives:?}");
        }
    }
}

#[test]
fn identical_thresholds_get_identical_rates() {
    let p = AllocationProblem::new(Metric::Paoi, vec![4.0, 9.0, 4.0, 9.0], 1.3, 1.0).unwrap();
    let r = solve_equalize(&p).unwrap();
    assert_eq!(r.rates[0], r.rates[2]);
    assert_eq!(r.rates[1], r.rates[3]);
}

#[test]
fn sweep_branches_meet_at_the_optimum() {
    let p = AllocationProblem::new(Metric::Aoi, vec![5.0, 10.0], 0.8, 1.0).unwrap();
    let opt = solve_equalize(&p).unwrap();
    let step = 1e-3;
    let grid: Vec<f64> = (1..800).map(|k| k as f64 * step).collect();
    let curve = sweep_allocation(&p, 0, &grid).unwrap();
    let best = curve
        .iter()
        .min_by(|a, b| a.objective.total_cmp(&b.objective))
        .unwrap();
    assert!((best.rate - opt.rates[0]).abs() <= step);
    assert!(best.objective >= opt.objective - 1e-12);
    for c in &curve {
        let left = c.rate < opt.rates[0];
        assert_eq!(c.argmax, if left { 0 } else { 1 }, "rate {}", c.rate);
    }
}

#[test]
fn single_precision_matches_double() {
    let p64 = AllocationProblem::new(Metric::Aoi, vec![5.0, 10.0], 0.8, 1.0).unwrap();
    let p32 = AllocationProblem::new(Metric::Aoi, vec![5.0f32, 10.0], 0.8, 1.0).unwrap();
    let a = solve_equalize(&p64).unwrap();
    let b = solve_equalize(&p32).unwrap();
    assert!((a.objective - b.objective as f64).abs() < 1e-4);
    assert!((a.rates[0] - b.rates[0] as f64).abs() < 1e-4);
}
