//! One function per subcommand: resolve the config, run the core routines,
//! collect assertions and tables.

use ivp_core::belief::{Belief, StateSpace};
use ivp_core::blackwell::{
    apply_garbling, binary_symmetric, find_garbling, max_abs_difference, middle_reveal, random_mlrp_experiment,
    sample_garbling, sample_mlrp_experiment, uninformative,
};
use ivp_core::ivp::{
    check_decomposed, counterexample_direction, counterexample_undershoot, run_counterexample_campaign,
    run_property_campaign, CampaignConfig, Counterexample,
};
use ivp_core::rng::substream;
use ivp_core::signaling::reversals::{convex_payoff_check, three_state_check};
use ivp_core::signaling::{
    compare_informativeness, lcse::uninformative_quadratic_type, marginal_benefit, solve_lcse, CostFunction,
    SignalingModel, DEFAULT_EPS, DEFAULT_STEP,
};
use ivp_core::testing::{comparative_statics, monopolist_certifier, CutoffKind, LabeledTest, DEFAULT_GRID};
use ivp_core::{Experiment64, TestingModel64};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::config::{
    at_least, in_open, ReversalArgs, BlackwellArgs, ConfigFile, CostKind, CounterexampleArgs, ExampleKind,
    ExperimentSpec, FloatList, OptionalExperiment, Resolver, SignalingArgs, TestingArgs, VerifyIvpArgs,
};
use crate::report::{to_value, Assertion, Cell, Outcome, Table};
use crate::RunError;

/// Residual tolerance for the inequality chain.
const CHAIN_TOL: f64 = 1e-10;
/// Slack for monotone comparative statics and signaling comparisons.
const ORDER_SLACK: f64 = 1e-7;
/// Reproduction tolerance for recovered garbling kernels.
const KERNEL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Serialize)]
pub struct VerifyIvpConfig {
    pub trials: usize,
    pub seed: u64,
    pub max_states: usize,
    pub max_signals: usize,
}

pub fn verify_ivp(args: &VerifyIvpArgs, file: &ConfigFile) -> Result<Outcome, RunError> {
    let mut r = Resolver::new(file);
    let cfg = VerifyIvpConfig {
        trials: r.checked("trials", args.trials, 10_000, at_least(1))?,
        seed: r.get("seed", args.seed, 0)?,
        max_states: r.checked("max_states", args.max_states, 6, at_least(2))?,
        max_signals: r.checked("max_signals", args.max_signals, 8, at_least(1))?,
    };
    r.finish()?;

    let summary = run_property_campaign::<f64>(&CampaignConfig {
        trials: cfg.trials,
        max_states: cfg.max_states,
        max_signals: cfg.max_signals,
        seed: cfg.seed,
    });
    let assertions = vec![
        Assertion::none("chain_violations", summary.chain_violations),
        Assertion::none("disagreement_violations", summary.disagreement_violations),
        Assertion::none("verdict_mismatches", summary.verdict_mismatches),
        Assertion::none("trial_errors", summary.errors),
        Assertion::le("min_chain_residual", -CHAIN_TOL, summary.min_chain_residual, 0.0),
        Assertion::le("min_disagreement_residual", -CHAIN_TOL, summary.min_disagreement_residual, 0.0),
    ];
    let results = json!({
        "pooling_trials": summary.pooling_trials,
        "garbling_trials": summary.garbling_trials,
        "chain_violations": summary.chain_violations,
        "disagreement_violations": summary.disagreement_violations,
        "verdict_mismatches": summary.verdict_mismatches,
        "trial_errors": summary.errors,
        "min_chain_residual": summary.min_chain_residual,
        "min_disagreement_residual": summary.min_disagreement_residual,
        "failed_trials": summary.failures.len(),
    });
    let mut out = Outcome::new("verify-ivp", &cfg, results, assertions, vec![]);
    if !summary.failures.is_empty() {
        out = out.with_dump("failures", to_value(&summary.failures));
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct CounterexampleConfig {
    pub example: ExampleKind,
    pub x: FloatList,
    pub states: FloatList,
    pub prior_a: FloatList,
    pub prior_b: FloatList,
    pub samples: usize,
    pub seed: u64,
    pub max_states: usize,
}

pub fn counterexamples(args: &CounterexampleArgs, file: &ConfigFile) -> Result<Outcome, RunError> {
    let mut r = Resolver::new(file);
    let example = r.get("example", args.example, ExampleKind::MiddleReveal)?;
    let (default_a, default_b) = match example {
        ExampleKind::Undershoot => (vec![0.2, 0.2, 0.6], vec![0.1, 0.6, 0.3]),
        _ => (vec![0.4, 0.6, 0.0], vec![0.5, 0.0, 0.5]),
    };
    let unit = |v: &FloatList| {
        if v.0.iter().all(|x| (0.0..=1.0).contains(x)) { Ok(()) } else { Err("values must lie in [0, 1]".into()) }
    };
    let cfg = CounterexampleConfig {
        example,
        x: r.checked("x", args.x.clone(), FloatList(vec![0.1, 0.5, 0.9]), unit)?,
        states: r.checked("states", args.states.clone(), FloatList(vec![0.0, 1.0, 2.0]), |v| {
            if v.0.len() >= 2 { Ok(()) } else { Err(format!("need at least 2 states, got {}", v.0.len())) }
        })?,
        prior_a: r.get("prior_a", args.prior_a.clone(), FloatList(default_a))?,
        prior_b: r.get("prior_b", args.prior_b.clone(), FloatList(default_b))?,
        samples: r.checked("samples", args.samples, 1000, at_least(1))?,
        seed: r.get("seed", args.seed, 0)?,
        max_states: r.checked("max_states", args.max_states, 6, at_least(3))?,
    };
    r.finish()?;

    match cfg.example {
        ExampleKind::MiddleReveal => middle_reveal_example(&cfg),
        ExampleKind::Direction | ExampleKind::Undershoot => construction(&cfg),
        ExampleKind::Sampled => sampled_constructions(&cfg),
    }
}

fn middle_reveal_example(cfg: &CounterexampleConfig) -> Result<Outcome, RunError> {
    let states = StateSpace::integers(3)?;
    let exp = middle_reveal::<f64>()?;
    let a = Belief::new(vec![1.0, 0.0, 0.0])?;
    let mut table = Table::new("middle_reveal", vec!["x", "m_a", "m_b", "a_expects_b", "a_direction_residual"]);
    let mut assertions = Vec::new();
    let mut rows = Vec::new();
    for &x in &cfg.x.0 {
        let b = Belief::new(vec![0.0, x, 1.0 - x])?;
        let rep = check_decomposed(&states, &a, &b, &exp)?;
        let expects = rep.a_expects_b.unwrap_or(f64::NAN);
        // the top state value, exactly
        assertions.push(Assertion::close(format!("a_expects_b_is_top_state_x{x}"), expects, 2.0, 0.0));
        assertions.push(Assertion::lt(format!("direction_fails_x{x}"), rep.m_b, expects, CHAIN_TOL));
        table.push(vec![
            x.into(),
            rep.m_a.into(),
            rep.m_b.into(),
            expects.into(),
            rep.a_direction_residual().unwrap_or(f64::NAN).into(),
        ]);
        rows.push(json!({ "x": x, "report": rep }));
    }
    Ok(Outcome::new("counterexamples", cfg, json!({ "experiment": exp, "rows": rows }), assertions, vec![table]))
}

fn construction(cfg: &CounterexampleConfig) -> Result<Outcome, RunError> {
    let states = StateSpace::new(cfg.states.0.clone())?;
    let a = Belief::new(cfg.prior_a.0.clone())?;
    let b = Belief::new(cfg.prior_b.0.clone())?;
    let (cx, assertion): (Counterexample, Assertion) = if cfg.example == ExampleKind::Direction {
        let cx = counterexample_direction(&states, &a, &b)?;
        let x = cx.report.a_expects_b.unwrap_or(f64::NAN);
        let a = Assertion::lt("direction_violation", cx.report.m_b, x, CHAIN_TOL);
        (cx, a)
    } else {
        let cx = counterexample_undershoot(&states, &a, &b)?;
        let x = cx.report.a_expects_b.unwrap_or(f64::NAN);
        let a = Assertion::lt("undershoot_violation", x, cx.report.m_a, CHAIN_TOL);
        (cx, a)
    };
    Ok(Outcome::new("counterexamples", cfg, to_value(&cx), vec![assertion], vec![]))
}

fn sampled_constructions(cfg: &CounterexampleConfig) -> Result<Outcome, RunError> {
    let s = run_counterexample_campaign::<f64>(cfg.seed, cfg.samples, cfg.max_states)?;
    let assertions = vec![
        Assertion::none("direction_failures", s.direction_failures.len()),
        Assertion::none("undershoot_failures", s.undershoot_failures.len()),
        Assertion::lt("direction_max_residual", s.direction_max_residual, -CHAIN_TOL, 0.0),
        Assertion::lt("undershoot_max_residual", s.undershoot_max_residual, -CHAIN_TOL, 0.0),
    ];
    Ok(Outcome::new("counterexamples", cfg, to_value(&s), assertions, vec![]))
}

#[derive(Debug, Clone, Serialize)]
pub struct BlackwellConfig {
    pub more: ExperimentSpec,
    pub less: ExperimentSpec,
    pub trials: usize,
    pub seed: u64,
    pub states: usize,
    pub signals: usize,
}

pub fn blackwell_check(args: &BlackwellArgs, file: &ConfigFile) -> Result<Outcome, RunError> {
    let mut r = Resolver::new(file);
    let cfg = BlackwellConfig {
        more: r.get("more", args.more.clone(), ExperimentSpec::BinarySymmetric(0.9))?,
        less: r.get("less", args.less.clone(), ExperimentSpec::BinarySymmetric(0.7))?,
        trials: r.get("trials", args.trials, 1000)?,
        seed: r.get("seed", args.seed, 0)?,
        states: r.checked("states", args.states, 4, at_least(2))?,
        signals: r.checked("signals", args.signals, 6, at_least(1))?,
    };
    r.finish()?;
    let more = cfg.more.build()?;
    let less = cfg.less.build()?;

    let mut assertions = Vec::new();
    let mut kernel_table = Table::new("kernel", vec!["from", "to", "q"]);
    let forward = find_garbling(&more, &less)?;
    let reverse = find_garbling(&less, &more)?;
    let mut reproduction = None;
    if let Some(k) = &forward {
        let err = max_abs_difference(&apply_garbling(&more, k)?, &less).unwrap_or(f64::INFINITY);
        assertions.push(Assertion::le("kernel_reproduces_less", err, KERNEL_TOL, 0.0));
        reproduction = Some(err);
        for (s, row) in k.rows().iter().enumerate() {
            for (t, &q) in row.iter().enumerate() {
                kernel_table.push(vec![s.into(), t.into(), q.into()]);
            }
        }
    }

    let outcomes: Vec<Result<f64, String>> = (0..cfg.trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = substream(cfg.seed, i as u64);
            let k = rng.random_range(1..=cfg.signals);
            let kd = rng.random_range(1..=cfg.signals);
            let mut round_trip = || -> ivp_core::Result<Option<f64>> {
                let e = sample_mlrp_experiment::<f64, _>(&mut rng, cfg.states, k)?;
                let q = sample_garbling::<f64, _>(&mut rng, k, kd)?;
                let garbled = apply_garbling(&e, &q)?;
                Ok(match find_garbling(&e, &garbled)? {
                    Some(found) => max_abs_difference(&apply_garbling(&e, &found)?, &garbled),
                    None => None,
                })
            };
            match round_trip() {
                Ok(Some(err)) if err <= KERNEL_TOL => Ok(err),
                Ok(Some(err)) => Err(format!("trial {i}: reproduction error {err:e}")),
                Ok(None) => Err(format!("trial {i}: garbled experiment reported not dominated")),
                Err(e) => Err(format!("trial {i}: {e}")),
            }
        })
        .collect();
    let failures: Vec<&String> = outcomes.iter().filter_map(|o| o.as_ref().err()).collect();
    let worst = outcomes.iter().filter_map(|o| o.as_ref().ok()).copied().fold(0.0, f64::max);
    assertions.push(Assertion::none("round_trip_failures", failures.len()));
    assertions.push(Assertion::le("round_trip_worst_error", worst, KERNEL_TOL, 0.0));

    let results = json!({
        "more_dominates_less": forward.is_some(),
        "less_dominates_more": reverse.is_some(),
        "kernel": forward,
        "kernel_reproduction_error": reproduction,
        "round_trips": cfg.trials,
        "round_trip_failures": failures,
        "round_trip_worst_error": worst,
    });
    let tables = if forward.is_some() { vec![kernel_table] } else { vec![] };
    Ok(Outcome::new("blackwell-check", &cfg, results, assertions, tables))
}

#[derive(Debug, Clone, Serialize)]
pub struct TestingConfig {
    pub cost: f64,
    pub grid: usize,
    pub accuracies: FloatList,
    pub prices: usize,
    pub price_max: f64,
}

pub fn testing_game(args: &TestingArgs, file: &ConfigFile) -> Result<Outcome, RunError> {
    let mut r = Resolver::new(file);
    let cfg = TestingConfig {
        cost: r.checked("cost", args.cost, 0.3, |c: &f64| {
            if c.is_finite() && *c >= 0.0 { Ok(()) } else { Err(format!("must be non-negative, got {c}")) }
        })?,
        grid: r.checked("grid", args.grid, DEFAULT_GRID, at_least(3))?,
        accuracies: r.checked(
            "accuracies",
            args.accuracies.clone(),
            FloatList(vec![0.5, 0.7, 0.9, 1.0]),
            |v| {
                if v.0.is_empty() || v.0.iter().any(|q| !(0.5..=1.0).contains(q)) {
                    Err("accuracies must lie in [0.5, 1]".into())
                } else {
                    Ok(())
                }
            },
        )?,
        prices: r.checked("prices", args.prices, 101, at_least(2))?,
        price_max: r.checked("price_max", args.price_max, 1.0, |p: &f64| {
            if *p > 0.0 && p.is_finite() { Ok(()) } else { Err(format!("must be positive, got {p}")) }
        })?,
    };
    r.finish()?;

    let model = TestingModel64::binary_with_marginal(|_| 1.0, cfg.grid, uninformative(2)?, cfg.cost)?;
    let tests: Vec<LabeledTest<f64>> = cfg
        .accuracies
        .0
        .iter()
        .map(|&q| Ok(LabeledTest::new(format!("binary_symmetric_{q}"), q, binary_symmetric(q)?)))
        .collect::<ivp_core::Result<_>>()?;
    let table = comparative_statics(&model, &tests)?;

    let mut assertions = vec![Assertion::le("cutoff_worst_decrease", table.worst_decrease, ORDER_SLACK, 0.0)];
    let mut statics = Table::new(
        "statics",
        vec![
            "test_id",
            "informativeness_param",
            "smallest_cutoff",
            "largest_cutoff",
            "tested_mass",
            "agent_exante_cost",
        ],
    );
    let mut equilibria = Table::new(
        "equilibria",
        vec![
            "test_id",
            "kind",
            "t_star",
            "upper",
            "residual",
            "delta_minus_mean",
            "test_value",
            "delta_plus_mean",
        ],
    );
    for row in &table.rows {
        statics.push(vec![
            row.test_id.clone().into(),
            row.informativeness_param.into(),
            row.smallest_cutoff.into(),
            row.largest_cutoff.into(),
            row.tested_mass.into(),
            row.agent_exante_cost.into(),
        ]);
        for c in &row.equilibria.cutoffs {
            let kind = match c.kind {
                CutoffKind::Interior => "interior",
                CutoffKind::AllTest => "all_test",
                CutoffKind::NoTest => "no_test",
                CutoffKind::Flat { .. } => "flat",
            };
            equilibria.push(vec![
                row.test_id.clone().into(),
                kind.into(),
                c.t_star.into(),
                c.upper().into(),
                c.residual.into(),
                c.terms.delta_minus_mean.into(),
                c.terms.test_value.into(),
                c.terms.delta_plus_mean.into(),
            ]);
            if c.kind == CutoffKind::Interior {
                let name = format!("{}_t{:.6}", row.test_id, c.t_star);
                assertions.push(Assertion::close(format!("{name}_residual"), c.residual, 0.0, ORDER_SLACK));
                assertions.push(Assertion::flag(format!("{name}_sandwich"), c.sandwich_holds(1e-9)));
            }
        }
        // closed forms of the uniform-type model
        if cfg.cost < 0.5 && row.informativeness_param == 0.5 {
            assertions.push(Assertion::close(format!("{}_closed_form", row.test_id), row.smallest_cutoff, 0.0, 1e-9));
        }
        if cfg.cost < 0.5 && row.informativeness_param == 1.0 {
            let t = 2.0 * cfg.cost;
            assertions.push(Assertion::close(format!("{}_closed_form", row.test_id), row.smallest_cutoff, t, 1e-6));
        }
    }

    let prices: Vec<f64> = (0..cfg.prices)
        .map(|i| cfg.price_max * i as f64 / (cfg.prices - 1) as f64)
        .collect();
    let best = monopolist_certifier(&model, &tests, &prices)?;
    let (t_lo, _) = model.type_bounds();
    let target = model.prior_mean() - t_lo;
    let price_on_grid = prices.iter().any(|p| (p - target).abs() <= 1e-12);
    if tests.iter().any(|t| t.experiment.is_uninformative()) && price_on_grid {
        assertions.push(Assertion::close("certifier_price", best.price, target, 1e-9));
        assertions.push(Assertion::close("certifier_cutoff", best.cutoff, t_lo, 1e-9));
        assertions.push(Assertion::close("certifier_profit", best.profit, target, 1e-9));
    }
    let results = json!({
        "prior_mean": model.prior_mean(),
        "monotone": table.monotone,
        "worst_decrease": table.worst_decrease,
        "rows": table.rows.iter().map(|r| json!({
            "test_id": r.test_id,
            "smallest_cutoff": r.smallest_cutoff,
            "largest_cutoff": r.largest_cutoff,
            "equilibria": r.equilibria.cutoffs.len(),
        })).collect::<Vec<_>>(),
        "certifier": best,
    });
    Ok(Outcome::new("testing-game", &cfg, results, assertions, vec![statics, equilibria]))
}

#[derive(Debug, Clone, Serialize)]
pub struct SignalingConfig {
    pub experiment: ExperimentSpec,
    pub compare: OptionalExperiment,
    pub cost: CostKind,
    pub eps: f64,
    pub step: f64,
    pub points: usize,
    pub pairs: usize,
    pub seed: u64,
    pub signals: usize,
}

/// Some signal is possible in exactly one state.
fn rules_out_a_state(e: &Experiment64) -> bool {
    (0..e.num_signals()).any(|s| (e.p(0, s) > 0.0) != (e.p(1, s) > 0.0))
}

fn signaling_model(e: &Experiment64, boundary: bool, cfg: &SignalingConfig) -> ivp_core::Result<SignalingModel<f64>> {
    let e = e.sorted_by_likelihood_ratio()?;
    let m = if boundary {
        SignalingModel::boundary_informative(e, CostFunction::Quadratic)?
    } else {
        SignalingModel::new(e, CostFunction::Quadratic)?
    };
    m.with_eps(cfg.eps)?.with_step(cfg.step)
}

pub fn signaling_game(args: &SignalingArgs, file: &ConfigFile) -> Result<Outcome, RunError> {
    let mut r = Resolver::new(file);
    let cfg = SignalingConfig {
        experiment: r.get("experiment", args.experiment.clone(), ExperimentSpec::BinarySymmetric(0.75))?,
        compare: r.get(
            "compare",
            args.compare.clone(),
            OptionalExperiment(None),
        )?,
        cost: r.get("cost", args.cost, CostKind::Quadratic)?,
        eps: r.checked("eps", args.eps, DEFAULT_EPS, in_open(0.0, 0.5))?,
        step: r.checked("step", args.step, DEFAULT_STEP, |h: &f64| {
            if *h > 0.0 && *h <= 0.1 { Ok(()) } else { Err(format!("must lie in (0, 0.1], got {h}")) }
        })?,
        points: r.checked("points", args.points, 101, at_least(2))?,
        pairs: r.get("pairs", args.pairs, 0)?,
        seed: r.get("seed", args.seed, 0)?,
        signals: r.checked("signals", args.signals, 4, at_least(2))?,
    };
    r.finish()?;

    let exp = cfg.experiment.build()?;
    let model = signaling_model(&exp, rules_out_a_state(&exp), &cfg)?;
    let sol = solve_lcse(&model)?;
    let mut assertions = vec![
        Assertion::le("ode_residual", sol.max_residual, model.residual_tol(), 0.0),
        Assertion::flag("report_strictly_increasing", sol.monotone),
        Assertion::flag("report_above_truth", sol.above_truth || sol.truthful),
    ];
    let martingale = sol
        .t
        .iter()
        .map(|&t| Ok((model.expected_posterior(t, t)? - t).abs()))
        .collect::<ivp_core::Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    assertions.push(Assertion::le("receiver_posterior_martingale", martingale, 1e-10, 0.0));
    let mut closed_form_defect = None;
    if exp.is_uninformative() {
        let defect = sol
            .t
            .iter()
            .zip(&sol.rho)
            .map(|(&t, &rho)| (uninformative_quadratic_type(rho) - t).abs())
            .fold(0.0, f64::max);
        assertions.push(Assertion::le("closed_form_defect", defect, 1e-6, 0.0));
        closed_form_defect = Some(defect);
    }
    let mut lcse = Table::new("lcse", vec!["t", "rho", "cost", "marginal_benefit"]);
    for i in 0..sol.len() {
        lcse.push(vec![sol.t[i].into(), sol.rho[i].into(), sol.cost[i].into(), sol.marginal_benefit[i].into()]);
    }
    let mut tables = vec![lcse];

    let mut comparison_summary = None;
    if let Some(spec) = &cfg.compare.0 {
        let less = spec.build()?;
        let boundary = rules_out_a_state(&exp) || rules_out_a_state(&less);
        let base = signaling_model(&exp, boundary, &cfg)?;
        let cmp = compare_informativeness(&base, &exp, &less, cfg.points)?;
        assertions.push(Assertion::le("compare_marginal_benefit", cmp.worst_mb_gap, 0.0, ORDER_SLACK));
        assertions.push(Assertion::le("compare_report", cmp.worst_rho_gap, 0.0, ORDER_SLACK));
        assertions.push(Assertion::le("compare_cost", cmp.worst_cost_gap, 0.0, ORDER_SLACK));
        let mut t = Table::new(
            "comparison",
            vec!["t", "mb_more", "mb_less", "rho_more", "rho_less", "cost_more", "cost_less"],
        );
        for row in &cmp.rows {
            t.push(vec![
                row.t.into(),
                row.mb_more.into(),
                row.mb_less.into(),
                row.rho_more.into(),
                row.rho_less.into(),
                row.cost_more.into(),
                row.cost_less.into(),
            ]);
        }
        tables.push(t);
        comparison_summary = Some(json!({
            "less": spec,
            "worst_mb_gap": cmp.worst_mb_gap,
            "worst_rho_gap": cmp.worst_rho_gap,
            "worst_cost_gap": cmp.worst_cost_gap,
        }));
    }

    let mut pairs_summary = None;
    if cfg.pairs > 0 {
        let p = ranked_pairs(&cfg)?;
        assertions.push(Assertion::none("pair_marginal_benefit_violations", p.mb_violations));
        assertions.push(Assertion::none("pair_cost_violations", p.cost_violations));
        pairs_summary = Some(to_value(&p));
    }

    let results = json!({
        "nodes": sol.len(),
        "t_max": sol.t_max(),
        "max_residual": sol.max_residual,
        "step": sol.step,
        "retries": sol.retries,
        "truthful": sol.truthful,
        "martingale_error": martingale,
        "closed_form_defect": closed_form_defect,
        "single_crossing_violations": sol.single_crossing.violations.len(),
        "single_crossing_min_violating_r": sol.single_crossing.min_violating_r,
        "comparison": comparison_summary,
        "pairs": pairs_summary,
    });
    Ok(Outcome::new("signaling-game", &cfg, results, assertions, tables))
}

#[derive(Debug, Clone, Serialize)]
pub struct PairSummary {
    pub pairs: usize,
    pub mb_violations: usize,
    pub cost_violations: usize,
    /// Pairs whose equilibria could not both be solved; the cost ordering is
    /// only asserted where both solves converge.
    pub solve_failures: usize,
    pub worst_mb_gap: f64,
    pub worst_cost_gap: f64,
}

/// Random binary-state MLRP experiments and random garblings of them.
fn ranked_pairs(cfg: &SignalingConfig) -> Result<PairSummary, RunError> {
    type PairResult = (f64, bool, Option<(f64, bool)>);
    let results: Vec<ivp_core::Result<PairResult>> = (0..cfg.pairs)
        .into_par_iter()
        .map(|i| {
            let mut rng = substream(cfg.seed, i as u64);
            let k = rng.random_range(2..=cfg.signals);
            let kd = rng.random_range(1..=cfg.signals);
            let more = sample_mlrp_experiment::<f64, _>(&mut rng, 2, k)?;
            let q = sample_garbling::<f64, _>(&mut rng, k, kd)?;
            let less = apply_garbling(&more, &q)?;
            let mut mb_gap = f64::NEG_INFINITY;
            for j in 0..cfg.points {
                let t = j as f64 / (cfg.points - 1) as f64;
                mb_gap = mb_gap.max(marginal_benefit(t, &more)? - marginal_benefit(t, &less)?);
            }
            let boundary = rules_out_a_state(&more) || rules_out_a_state(&less);
            let base = signaling_model(&more, boundary, cfg)?;
            let cost = match compare_informativeness(&base, &more, &less, cfg.points) {
                Ok(c) => Some((c.worst_cost_gap, c.cost_ordered)),
                Err(ivp_core::Error::IntegrationFailed(_)) => None,
                Err(e) => return Err(e),
            };
            Ok((mb_gap, mb_gap <= ORDER_SLACK, cost))
        })
        .collect();
    let mut s = PairSummary {
        pairs: cfg.pairs,
        mb_violations: 0,
        cost_violations: 0,
        solve_failures: 0,
        worst_mb_gap: f64::NEG_INFINITY,
        worst_cost_gap: f64::NEG_INFINITY,
    };
    for r in results {
        let (mb_gap, mb_ok, cost) = r?;
        s.worst_mb_gap = s.worst_mb_gap.max(mb_gap);
        s.mb_violations += usize::from(!mb_ok);
        match cost {
            Some((gap, ok)) => {
                s.worst_cost_gap = s.worst_cost_gap.max(gap);
                s.cost_violations += usize::from(!ok);
            }
            None => s.solve_failures += 1,
        }
    }
    Ok(s)
}

#[derive(Debug, Clone, Serialize)]
pub struct ReversalConfig {
    pub z: f64,
    pub points: usize,
    pub samples: usize,
    pub seed: u64,
    pub signals: usize,
}

pub fn reversals(args: &ReversalArgs, file: &ConfigFile) -> Result<Outcome, RunError> {
    let mut r = Resolver::new(file);
    let cfg = ReversalConfig {
        z: r.checked("z", args.z, 0.3, in_open(0.0, 0.5))?,
        points: r.checked("points", args.points, 21, at_least(3))?,
        samples: r.get("samples", args.samples, 200)?,
        seed: r.get("seed", args.seed, 0)?,
        signals: r.checked("signals", args.signals, 4, at_least(2))?,
    };
    r.finish()?;
    let n = cfg.points - 1;
    let closed: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
    let interior = &closed[1..n];

    // convex payoff: equality for the uninformative experiment, strict otherwise
    let mut convex = Table::new("convex_payoff", vec!["experiment", "t", "value", "uninformative"]);
    let mut named: Vec<(String, Experiment64)> = vec![
        ("uninformative:2".into(), uninformative(2)?),
        ("binary_symmetric:0.75".into(), binary_symmetric(0.75)?),
    ];
    for i in 0..cfg.samples {
        let seed = cfg.seed.wrapping_add(i as u64);
        let k = 2 + (i % (cfg.signals - 1));
        named.push((format!("random_mlrp:{seed}:2:{k}"), random_mlrp_experiment(seed, 2, k)?));
    }
    let (mut reversal_failures, mut equality_mismatches, mut extreme) = (0, 0, 0);
    for (name, e) in &named {
        let rep = convex_payoff_check(e, interior)?;
        extreme += usize::from(rep.extreme);
        reversal_failures += rep.rows.iter().filter(|r| !r.reversal_holds).count();
        let informative = !e.is_uninformative();
        equality_mismatches += rep.rows.iter().filter(|r| r.strict != informative).count();
        for row in &rep.rows {
            convex.push(vec![
                name.clone().into(),
                row.t.into(),
                row.value.map_or(Cell::Text("inf".into()), Cell::Float),
                row.uninformative.into(),
            ]);
        }
    }

    let three = three_state_check(cfg.z, &closed)?;
    let mut three_table = Table::new(
        "three_state",
        vec!["t", "uninformative", "informative", "uninformative_numeric", "informative_numeric"],
    );
    for row in &three.rows {
        three_table.push(vec![
            row.t.into(),
            row.uninformative.into(),
            row.informative.into(),
            row.uninformative_numeric.into(),
            row.informative_numeric.into(),
        ]);
    }
    let three_failures = three.rows.iter().filter(|r| !r.reversal_holds).count();
    let min_gain = three.rows.iter().map(|r| r.informative - r.uninformative).fold(f64::INFINITY, f64::min);
    let assertions = vec![
        Assertion::none("convex_reversal_failures", reversal_failures),
        Assertion::none("convex_equality_only_if_uninformative", equality_mismatches),
        Assertion::none("three_state_reversal_failures", three_failures),
        Assertion::le("three_state_numeric_error", three.max_numeric_error(), 1e-8, 0.0),
        Assertion::le("three_state_informative_above_uninformative", 0.0, min_gain, 0.0),
    ];
    let results = json!({
        "convex_experiments": named.len(),
        "convex_extreme": extreme,
        "three_state_max_numeric_error": three.max_numeric_error(),
    });
    Ok(Outcome::new("appendix-b", &cfg, results, assertions, vec![convex, three_table]))
}
