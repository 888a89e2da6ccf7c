//! Randomized verification campaigns.
//!
//! Each trial draws from its own ChaCha stream keyed by `(seed, trial)`, and
//! trials are evaluated in parallel with rayon. Aggregation is a fold over
//! trials in index order, so summaries do not depend on the thread count.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{
    check_disagreement, check_ivp_chain, counterexample_direction, counterexample_undershoot,
    DisagreementReport, IvpReport, A_DISAGREEMENT, A_INTENSITY, B_DISAGREEMENT, B_INTENSITY,
};
use crate::belief::{is_fosd_dominated, is_lr_dominated, Belief, Experiment, StateSpace};
use crate::blackwell::{
    apply_garbling, pooling_kernel, sample_full_support_belief, sample_garbling,
    sample_interval_blocks, sample_mlrp_experiment,
};
use crate::rng::{substream, StreamRng};
use crate::{GarblingKernel, Result, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CampaignConfig {
    pub trials: usize,
    pub max_states: usize,
    pub max_signals: usize,
    pub seed: u64,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        Self {
            trials: 10_000,
            max_states: 6,
            max_signals: 8,
            seed: 0,
        }
    }
}

/// How the less informative experiment was derived.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GarblingMode {
    /// Interval pooling of the MLRP experiment; MLRP is preserved and the
    /// full chain is asserted.
    Pooling,
    /// Arbitrary kernel; only undershooting and intensity are asserted.
    Garbling,
}

/// Replayable dump of a failing trial.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FailedTrial<T = f64> {
    pub trial: usize,
    pub seed: u64,
    pub mode: GarblingMode,
    pub states: StateSpace<T>,
    pub prior_a: Belief<T>,
    pub prior_b: Belief<T>,
    pub more: Experiment<T>,
    pub less: Experiment<T>,
    pub kernel: GarblingKernel<T>,
    pub failed: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CampaignSummary<T = f64> {
    pub config: CampaignConfig,
    pub pooling_trials: usize,
    pub garbling_trials: usize,
    pub chain_violations: usize,
    pub disagreement_violations: usize,
    /// Trials where a disagreement verdict differs from the matching
    /// intensity verdict.
    pub verdict_mismatches: usize,
    pub errors: usize,
    /// Smallest residual over every asserted chain inequality.
    pub min_chain_residual: T,
    pub min_disagreement_residual: T,
    pub failures: Vec<FailedTrial<T>>,
}

impl<T: Scalar> CampaignSummary<T> {
    pub fn passed(&self) -> bool {
        self.chain_violations + self.disagreement_violations + self.verdict_mismatches + self.errors == 0
    }
}

struct Instance<T> {
    mode: GarblingMode,
    states: StateSpace<T>,
    prior_a: Belief<T>,
    prior_b: Belief<T>,
    more: Experiment<T>,
    less: Experiment<T>,
    kernel: GarblingKernel<T>,
}

struct TrialOutcome<T> {
    mode: GarblingMode,
    chain_ok: bool,
    disagreement_ok: bool,
    verdicts_match: bool,
    errored: bool,
    min_chain: T,
    min_disagreement: T,
    failure: Option<FailedTrial<T>>,
}

fn sample_states<T: Scalar>(rng: &mut StreamRng, n: usize) -> Result<StateSpace<T>> {
    let mut v = rng.random_range(-2.0..2.0);
    let mut values = Vec::with_capacity(n);
    for _ in 0..n {
        values.push(T::lit(v));
        v += rng.random_range(0.1..1.5);
    }
    StateSpace::new(values)
}

/// `β_B ∝ β_A·exp(τ)` for a nondecreasing tilt `τ`, so `β_A ≤_LR β_B`.
fn sample_lr_ordered_pair<T: Scalar>(rng: &mut StreamRng, n: usize) -> Result<(Belief<T>, Belief<T>)> {
    let a: Belief<T> = sample_full_support_belief(rng, n)?;
    let mut tau = 0.0_f64;
    let mut w = Vec::with_capacity(n);
    for p in a.probs() {
        w.push(*p * T::lit(tau.exp()));
        if rng.random_bool(0.9) {
            tau += rng.random_range(0.0..1.5);
        }
    }
    Ok((a, Belief::from_weights(w)?))
}

fn sample_instance<T: Scalar>(cfg: &CampaignConfig, rng: &mut StreamRng) -> Result<Instance<T>> {
    let n_states = rng.random_range(2..=cfg.max_states.max(2));
    let n_signals = rng.random_range(1..=cfg.max_signals.max(1));
    let states = sample_states(rng, n_states)?;
    let (prior_a, prior_b) = sample_lr_ordered_pair(rng, n_states)?;
    let more = sample_mlrp_experiment(rng, n_states, n_signals)?;
    let (mode, kernel) = if rng.random_bool(0.5) {
        let blocks = sample_interval_blocks(rng, n_signals);
        (GarblingMode::Pooling, pooling_kernel(n_signals, &blocks)?)
    } else {
        let k_dst = rng.random_range(1..=cfg.max_signals.max(1));
        (GarblingMode::Garbling, sample_garbling(rng, n_signals, k_dst)?)
    };
    let less = apply_garbling(&more, &kernel)?;
    Ok(Instance {
        mode,
        states,
        prior_a,
        prior_b,
        more,
        less,
        kernel,
    })
}

fn evaluate<T: Scalar>(inst: &Instance<T>) -> Result<(IvpReport<T>, DisagreementReport<T>)> {
    let chain = check_ivp_chain(
        &inst.states,
        &inst.prior_a,
        &inst.prior_b,
        &inst.more,
        &inst.less,
        Some(&inst.kernel),
    )?;
    let dis = check_disagreement(
        &inst.states,
        &inst.prior_a,
        &inst.prior_b,
        &inst.more,
        &inst.less,
        Some(&inst.kernel),
    )?;
    Ok((chain, dis))
}

fn run_trial<T: Scalar>(cfg: &CampaignConfig, trial: usize) -> TrialOutcome<T> {
    let mut rng = substream(cfg.seed, trial as u64);
    let inst = match sample_instance::<T>(cfg, &mut rng) {
        Ok(i) => i,
        // sampling only fails on invalid dimensions, which the config rules out
        Err(e) => panic!("trial {trial}: instance sampling failed: {e}"),
    };
    let dump = |failed: Vec<String>| FailedTrial {
        trial,
        seed: cfg.seed,
        mode: inst.mode,
        states: inst.states.clone(),
        prior_a: inst.prior_a.clone(),
        prior_b: inst.prior_b.clone(),
        more: inst.more.clone(),
        less: inst.less.clone(),
        kernel: inst.kernel.clone(),
        failed,
    };
    let (chain, dis) = match evaluate(&inst) {
        Ok(r) => r,
        Err(e) => {
            return TrialOutcome {
                mode: inst.mode,
                chain_ok: false,
                disagreement_ok: false,
                verdicts_match: false,
                errored: true,
                min_chain: T::zero(),
                min_disagreement: T::zero(),
                failure: Some(dump(vec![format!("error: {e}")])),
            }
        }
    };

    let asserted: Vec<_> = match inst.mode {
        GarblingMode::Pooling => chain.inequalities.iter().collect(),
        GarblingMode::Garbling => chain
            .inequalities
            .iter()
            .filter(|i| [super::A_UNDERSHOOT, A_INTENSITY, B_INTENSITY, super::B_UNDERSHOOT].contains(&i.name))
            .collect(),
    };
    let mut failed: Vec<String> = asserted
        .iter()
        .filter(|i| !i.holds())
        .map(|i| i.name.to_string())
        .collect();
    let chain_ok = failed.is_empty();
    let disagreement_ok = dis.holds();
    failed.extend(
        dis.inequalities
            .iter()
            .filter(|i| !i.holds())
            .map(|i| i.name.to_string()),
    );
    let pairs = [(A_DISAGREEMENT, A_INTENSITY), (B_DISAGREEMENT, B_INTENSITY)];
    let verdicts_match = pairs.iter().all(|(d, c)| {
        dis.get(d).map(|i| i.holds()) == chain.get(c).map(|i| i.holds())
    });
    if !verdicts_match {
        failed.push("verdict_mismatch".to_string());
    }
    let min_chain = asserted.iter().map(|i| i.residual).fold(T::infinity(), T::min);
    let min_disagreement = dis.inequalities.iter().map(|i| i.residual).fold(T::infinity(), T::min);
    TrialOutcome {
        mode: inst.mode,
        chain_ok,
        disagreement_ok,
        verdicts_match,
        errored: false,
        min_chain,
        min_disagreement,
        failure: (!failed.is_empty()).then(|| dump(failed)),
    }
}

/// Runs `config.trials` independent trials on LR-ordered full-support priors
/// and a random MLRP experiment with a garbled or interval-pooled companion.
/// Violations are reported in the summary, never as errors.
pub fn run_property_campaign<T: Scalar>(config: &CampaignConfig) -> CampaignSummary<T> {
    let outcomes: Vec<TrialOutcome<T>> = (0..config.trials)
        .into_par_iter()
        .map(|t| run_trial(config, t))
        .collect();
    let mut s = CampaignSummary {
        config: *config,
        pooling_trials: 0,
        garbling_trials: 0,
        chain_violations: 0,
        disagreement_violations: 0,
        verdict_mismatches: 0,
        errors: 0,
        min_chain_residual: T::infinity(),
        min_disagreement_residual: T::infinity(),
        failures: Vec::new(),
    };
    for o in outcomes {
        match o.mode {
            GarblingMode::Pooling => s.pooling_trials += 1,
            GarblingMode::Garbling => s.garbling_trials += 1,
        }
        if o.errored {
            s.errors += 1;
        } else {
            s.chain_violations += usize::from(!o.chain_ok);
            s.disagreement_violations += usize::from(!o.disagreement_ok);
            s.verdict_mismatches += usize::from(!o.verdicts_match);
            s.min_chain_residual = s.min_chain_residual.min(o.min_chain);
            s.min_disagreement_residual = s.min_disagreement_residual.min(o.min_disagreement);
        }
        if let Some(f) = o.failure {
            s.failures.push(f);
        }
    }
    s
}

/// Results of certifying both counterexample constructions on sampled priors.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CounterexampleSummary<T = f64> {
    pub seed: u64,
    pub samples: usize,
    pub direction_certified: usize,
    pub undershoot_certified: usize,
    /// Largest (least negative) certified residual over all samples.
    pub direction_max_residual: T,
    pub undershoot_max_residual: T,
    /// Sample indices where a construction failed to certify.
    pub direction_failures: Vec<usize>,
    pub undershoot_failures: Vec<usize>,
}

impl<T: Scalar> CounterexampleSummary<T> {
    pub fn passed(&self) -> bool {
        self.direction_failures.is_empty() && self.undershoot_failures.is_empty()
    }
}

const MAX_REJECTIONS: usize = 10_000;

fn sample_direction_case<T: Scalar>(
    rng: &mut StreamRng,
    max_states: usize,
) -> Result<(StateSpace<T>, Belief<T>, Belief<T>)> {
    for _ in 0..MAX_REJECTIONS {
        let n = rng.random_range(3..=max_states.max(3));
        let states = sample_states::<T>(rng, n)?;
        let a = sample_full_support_belief::<T, _>(rng, n)?;
        let b = sample_full_support_belief::<T, _>(rng, n)?;
        if a.mean(&states)? <= b.mean(&states)? && !is_fosd_dominated(&a, &b) {
            return Ok((states, a, b));
        }
    }
    Err(crate::Error::InvalidParameter("could not sample a direction case".into()))
}

fn sample_undershoot_case<T: Scalar>(
    rng: &mut StreamRng,
    max_states: usize,
) -> Result<(StateSpace<T>, Belief<T>, Belief<T>)> {
    for _ in 0..MAX_REJECTIONS {
        let n = rng.random_range(2..=max_states.max(2));
        let states = sample_states::<T>(rng, n)?;
        let a = sample_full_support_belief::<T, _>(rng, n)?;
        let b = sample_full_support_belief::<T, _>(rng, n)?;
        if !is_lr_dominated(&a, &b) {
            return Ok((states, a, b));
        }
    }
    Err(crate::Error::InvalidParameter("could not sample an undershoot case".into()))
}

/// Samples `samples` full-support prior pairs meeting each construction's
/// hypotheses and checks that each construction certifies a strict violation.
pub fn run_counterexample_campaign<T: Scalar>(
    seed: u64,
    samples: usize,
    max_states: usize,
) -> Result<CounterexampleSummary<T>> {
    type Outcome<T> = (Option<T>, Option<T>);
    let outcomes: Vec<Result<Outcome<T>>> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = substream(seed, i as u64);
            let (om, a, b) = sample_direction_case::<T>(&mut rng, max_states)?;
            let d = counterexample_direction(&om, &a, &b)
                .ok()
                .and_then(|c| c.report.a_direction_residual());
            let (om, a, b) = sample_undershoot_case::<T>(&mut rng, max_states)?;
            let u = counterexample_undershoot(&om, &a, &b)
                .ok()
                .and_then(|c| c.report.a_undershoot_residual());
            Ok((d, u))
        })
        .collect();
    let mut s = CounterexampleSummary {
        seed,
        samples,
        direction_certified: 0,
        undershoot_certified: 0,
        direction_max_residual: T::neg_infinity(),
        undershoot_max_residual: T::neg_infinity(),
        direction_failures: Vec::new(),
        undershoot_failures: Vec::new(),
    };
    for (i, o) in outcomes.into_iter().enumerate() {
        let (d, u) = o?;
        match d {
            Some(r) if r < -T::inequality_tol() => {
                s.direction_certified += 1;
                s.direction_max_residual = s.direction_max_residual.max(r);
            }
            _ => s.direction_failures.push(i),
        }
        match u {
            Some(r) if r < -T::inequality_tol() => {
                s.undershoot_certified += 1;
                s.undershoot_max_residual = s.undershoot_max_residual.max(r);
            }
            _ => s.undershoot_failures.push(i),
        }
    }
    Ok(s)
}
