use ivp_core::blackwell::{binary_symmetric, fully_informative, uninformative};
use ivp_core::testing::{
    comparative_statics, monopolist_certifier, solve_equilibrium_cutoffs, CutoffKind, LabeledTest,
};
use ivp_core::TestingModel64;

fn canonical(test: ivp_core::Experiment64, cost: f64) -> TestingModel64 {
    TestingModel64::canonical(test, cost).unwrap()
}

fn accuracy_ladder() -> Vec<LabeledTest<f64>> {
    [0.5, 0.7, 0.9, 1.0]
        .into_iter()
        .map(|q| LabeledTest::new(format!("bsc_{q}"), q, binary_symmetric(q).unwrap()))
        .collect()
}

#[test]
fn interim_beliefs_of_uniform_marginal_model() {
    let m = canonical(uninformative(2).unwrap(), 0.3);
    let g = m.gain_terms(0.5).unwrap();
    assert!((g.delta_minus_mean - 0.25).abs() < 1e-6);
    assert!((g.delta_plus_mean - 0.75).abs() < 1e-6);
    let (_, hi) = m.interim_beliefs(1.0).unwrap();
    assert_eq!(hi, m.private_belief(1.0).unwrap());
}

#[test]
fn gain_closed_forms() {
    let flat = canonical(uninformative(2).unwrap(), 0.3);
    let full = canonical(fully_informative(2).unwrap(), 0.3);
    for t in [0.1, 0.25, 0.5, 0.75, 0.9] {
        assert!((flat.cutoff_gain(t).unwrap() - 0.2).abs() < 1e-6, "t={t}");
        assert!((full.cutoff_gain(t).unwrap() - (t / 2.0 - 0.3)).abs() < 1e-6, "t={t}");
    }
}

#[test]
fn cutoffs_for_extreme_tests() {
    let eq = solve_equilibrium_cutoffs(&canonical(uninformative(2).unwrap(), 0.3)).unwrap();
    assert_eq!(eq.cutoffs.len(), 1);
    assert_eq!(eq.cutoffs[0].kind, CutoffKind::AllTest);
    assert_eq!(eq.smallest(), 0.0);

    let eq = solve_equilibrium_cutoffs(&canonical(fully_informative(2).unwrap(), 0.3)).unwrap();
    let interior: Vec<_> = eq.interior().collect();
    assert_eq!(interior.len(), 1);
    assert!((interior[0].t_star - 0.6).abs() < 1e-6);
    // full revelation: t* − δ^e₋(t*) = c
    let g = &interior[0].terms;
    assert!((g.t_star - g.delta_minus_mean - 0.3).abs() < 1e-6);

    let eq = solve_equilibrium_cutoffs(&canonical(uninformative(2).unwrap(), 0.6)).unwrap();
    assert_eq!(eq.largest(), 1.0);
    assert!(eq.cutoffs.iter().any(|c| c.kind == CutoffKind::NoTest));
}

#[test]
fn knife_edge_cost_gives_an_interval() {
    let eq = solve_equilibrium_cutoffs(&canonical(uninformative(2).unwrap(), 0.5)).unwrap();
    assert_eq!(eq.smallest(), 0.0);
    assert_eq!(eq.largest(), 1.0);
    assert!(eq.cutoffs.iter().any(|c| matches!(c.kind, CutoffKind::Flat { .. })));
}

#[test]
fn interior_cutoffs_satisfy_the_sandwich() {
    for q in [0.6, 0.75, 0.9, 1.0] {
        for c in [0.05, 0.15, 0.3, 0.45] {
            let eq = solve_equilibrium_cutoffs(&canonical(binary_symmetric(q).unwrap(), c)).unwrap();
            assert!(!eq.cutoffs.is_empty());
            for cut in eq.interior() {
                assert!(cut.residual.abs() <= 1e-7, "q={q} c={c} residual={}", cut.residual);
                assert!(cut.sandwich_holds(1e-9), "q={q} c={c} t*={}", cut.t_star);
            }
        }
    }
}

#[test]
fn grid_refinement_moves_cutoffs_little() {
    let test = binary_symmetric(0.8).unwrap();
    let coarse = TestingModel64::binary_with_marginal(|t| 0.5 + t, 2001, test.clone(), 0.2).unwrap();
    let fine = TestingModel64::binary_with_marginal(|t| 0.5 + t, 4001, test, 0.2).unwrap();
    let a = solve_equilibrium_cutoffs(&coarse).unwrap();
    let b = solve_equilibrium_cutoffs(&fine).unwrap();
    assert!((a.smallest() - b.smallest()).abs() < 1e-4);
    assert!((a.largest() - b.largest()).abs() < 1e-4);
}

#[test]
fn gain_is_continuous_on_the_grid() {
    let m = canonical(binary_symmetric(0.8).unwrap(), 0.2);
    let n = 400;
    let gains: Vec<f64> = (0..=n).map(|i| m.cutoff_gain(f64::from(i) / f64::from(n)).unwrap()).collect();
    let jump = gains.windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0, f64::max);
    assert!(jump < 0.02, "largest step {jump}");
}

#[test]
fn more_informative_tests_raise_cutoffs() {
    let m = canonical(uninformative(2).unwrap(), 0.3);
    let table = comparative_statics(&m, &accuracy_ladder()).unwrap();
    assert!(table.monotone, "worst decrease {}", table.worst_decrease);
    assert_eq!(table.rows[0].smallest_cutoff, 0.0);
    assert!((table.rows[3].smallest_cutoff - 0.6).abs() < 1e-6);

    // oracle: first sign change of the gain on a fine uniform scan
    for (row, test) in table.rows.iter().zip(accuracy_ladder()) {
        let mq = m.with_test(test.experiment).unwrap();
        let n = 20_000;
        let gain = |i: u32| mq.cutoff_gain(f64::from(i) / f64::from(n)).unwrap();
        let first = if gain(0) >= 0.0 {
            0.0
        } else {
            let i = (1..=n).find(|&i| gain(i) >= 0.0).unwrap_or(n);
            let (a, b) = (gain(i - 1), gain(i));
            (f64::from(i - 1) + a / (a - b)) / f64::from(n)
        };
        assert!((row.smallest_cutoff - first).abs() < 1e-4, "{}: {} vs {first}", row.test_id, row.smallest_cutoff);
    }

    let same = vec![accuracy_ladder()[1].clone(), accuracy_ladder()[1].clone()];
    let table = comparative_statics(&m, &same).unwrap();
    assert_eq!(table.rows[0].smallest_cutoff, table.rows[1].smallest_cutoff);

    let mut reversed = accuracy_ladder();
    reversed.reverse();
    assert!(comparative_statics(&m, &reversed).is_err());
}

#[test]
fn certifier_prefers_the_uninformative_test() {
    let m = canonical(uninformative(2).unwrap(), 0.0);
    let tests = vec![
        LabeledTest::new("uninformative", 0.5, uninformative(2).unwrap()),
        LabeledTest::new("full", 1.0, fully_informative(2).unwrap()),
    ];
    let prices: Vec<f64> = (0..=100).map(|i| f64::from(i) / 100.0).collect();
    let best = monopolist_certifier(&m, &tests, &prices).unwrap();
    assert_eq!(best.test_id, "uninformative");
    assert!((best.price - 0.5).abs() < 1e-12);
    assert_eq!(best.cutoff, 0.0);
    assert!((best.profit - 0.5).abs() < 1e-9);

    let only_full = monopolist_certifier(&m, &tests[1..], &[0.3]).unwrap();
    assert!((only_full.profit - 0.12).abs() < 1e-6);
    assert_eq!(monopolist_certifier(&m, &tests, &[0.0]).unwrap().profit, 0.0);
}
