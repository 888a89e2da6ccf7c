//! Finite state spaces, beliefs, experiments and Bayes updating, together with
//! the likelihood-ratio, first-order and MLRP order predicates.
//!
//! Experiments are stored state-major: row `l` is the signal distribution
//! `p(·|ω_l)`, column `k` is signal `s_k`. Signal order is index order.

use serde::Serialize;

use crate::{Error, Result, Scalar};

/// Ordered finite (multi-)set of real states `ω_1 ≤ … ≤ ω_L`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StateSpace<T = f64> {
    values: Vec<T>,
}

impl<T: Scalar> StateSpace<T> {
    pub fn new(values: Vec<T>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidStateSpace(format!(
                "need at least 2 states, got {}",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidStateSpace("non-finite state value".into()));
        }
        if values.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidStateSpace("state values must be sorted ascending".into()));
        }
        Ok(Self { values })
    }

    /// States `0, 1, …, n-1`.
    pub fn integers(n: usize) -> Result<Self> {
        Self::new((0..n).map(|i| T::lit(i as f64)).collect())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn is_strictly_increasing(&self) -> bool {
        self.values.windows(2).all(|w| w[0] < w[1])
    }

    /// State space with each value replaced by `h(ω)`; `h` must be weakly increasing.
    pub fn relabel<F: Fn(T) -> T>(&self, h: F) -> Result<Self> {
        let mapped: Vec<T> = self.values.iter().map(|&v| h(v)).collect();
        if mapped.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::NonMonotoneMap);
        }
        Self::new(mapped)
    }
}

/// Probability vector over the states of some [`StateSpace`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Belief<T = f64> {
    probs: Vec<T>,
}

impl<T: Scalar> Belief<T> {
    pub fn new(probs: Vec<T>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidBelief("empty probability vector".into()));
        }
        if probs.iter().any(|p| !p.is_finite() || *p < T::zero()) {
            return Err(Error::InvalidBelief("entries must be finite and non-negative".into()));
        }
        let total: T = probs.iter().copied().sum();
        if (total - T::one()).abs() > T::stochastic_tol() {
            return Err(Error::InvalidBelief(format!("entries sum to {total}, not 1")));
        }
        Ok(Self { probs })
    }

    /// Normalizes non-negative weights with positive total mass.
    pub fn from_weights(weights: Vec<T>) -> Result<Self> {
        if weights.iter().any(|w| !w.is_finite() || *w < T::zero()) {
            return Err(Error::InvalidBelief("weights must be finite and non-negative".into()));
        }
        let total: T = weights.iter().copied().sum();
        if total <= T::zero() {
            return Err(Error::InvalidBelief("weights have zero total mass".into()));
        }
        Ok(Self {
            probs: weights.into_iter().map(|w| w / total).collect(),
        })
    }

    pub fn uniform(n: usize) -> Result<Self> {
        Self::from_weights(vec![T::one(); n])
    }

    /// Degenerate belief on state `index`.
    pub fn point(n: usize, index: usize) -> Result<Self> {
        if index >= n {
            return Err(Error::InvalidBelief(format!("index {index} out of range for {n} states")));
        }
        let mut probs = vec![T::zero(); n];
        probs[index] = T::one();
        Ok(Self { probs })
    }

    pub fn probs(&self) -> &[T] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn full_support(&self) -> bool {
        self.probs.iter().all(|p| *p > T::zero())
    }

    /// Mean of the state values; shorthand for [`posterior_mean`] without relabeling.
    pub fn mean(&self, states: &StateSpace<T>) -> Result<T> {
        posterior_mean(self, states, None)
    }
}

/// State-conditional signal distributions `p(s_k|ω_l)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Experiment<T = f64> {
    likelihood: Vec<Vec<T>>,
}

impl<T: Scalar> Experiment<T> {
    /// Builds an experiment from state-major rows.
    pub fn new(likelihood: Vec<Vec<T>>) -> Result<Self> {
        if likelihood.is_empty() {
            return Err(Error::InvalidExperiment("no states".into()));
        }
        let k = likelihood[0].len();
        if k == 0 {
            return Err(Error::InvalidExperiment("no signals".into()));
        }
        for (l, row) in likelihood.iter().enumerate() {
            if row.len() != k {
                return Err(Error::InvalidExperiment(format!(
                    "row {l} has {} signals, expected {k}",
                    row.len()
                )));
            }
            if row.iter().any(|p| !p.is_finite() || *p < T::zero()) {
                return Err(Error::InvalidExperiment(format!(
                    "row {l} has a negative or non-finite entry"
                )));
            }
            let total: T = row.iter().copied().sum();
            if (total - T::one()).abs() > T::stochastic_tol() {
                return Err(Error::InvalidExperiment(format!("row {l} sums to {total}, not 1")));
            }
        }
        Ok(Self { likelihood })
    }

    pub fn num_states(&self) -> usize {
        self.likelihood.len()
    }

    pub fn num_signals(&self) -> usize {
        self.likelihood[0].len()
    }

    #[inline]
    pub fn p(&self, state: usize, signal: usize) -> T {
        self.likelihood[state][signal]
    }

    pub fn row(&self, state: usize) -> &[T] {
        &self.likelihood[state]
    }

    pub fn rows(&self) -> &[Vec<T>] {
        &self.likelihood
    }

    pub fn column(&self, signal: usize) -> Vec<T> {
        self.likelihood.iter().map(|row| row[signal]).collect()
    }

    /// Every state induces the same signal distribution.
    pub fn is_uninformative(&self) -> bool {
        let first = &self.likelihood[0];
        self.likelihood.iter().all(|row| {
            row.iter()
                .zip(first)
                .all(|(a, b)| (*a - *b).abs() <= T::stochastic_tol())
        })
    }

    /// Every signal is possible in at most one state.
    pub fn is_fully_informative(&self) -> bool {
        (0..self.num_signals()).all(|k| {
            self.likelihood
                .iter()
                .filter(|row| row[k] > T::zero())
                .count()
                <= 1
        })
    }

    /// Signals sorted so that the likelihood ratio `p(s|ω_2)/p(s|ω_1)` is
    /// nondecreasing. Any two-state experiment becomes MLRP under this order.
    pub fn sorted_by_likelihood_ratio(&self) -> Result<Self> {
        if self.num_states() != 2 {
            return Err(Error::InvalidExperiment(
                "likelihood-ratio sorting needs exactly two states".into(),
            ));
        }
        // p(s|1)/(p(s|0)+p(s|1)) is increasing in the ratio and stays a total
        // order when a signal has probability zero in both states
        let weight = |k: usize| {
            let total = self.p(0, k) + self.p(1, k);
            if total > T::zero() { self.p(1, k) / total } else { T::zero() }
        };
        let mut order: Vec<usize> = (0..self.num_signals()).collect();
        order.sort_by(|&a, &b| weight(a).partial_cmp(&weight(b)).unwrap_or(std::cmp::Ordering::Equal));
        let rows = self
            .likelihood
            .iter()
            .map(|row| order.iter().map(|&k| row[k]).collect())
            .collect();
        Ok(Self { likelihood: rows })
    }
}

/// Posterior, posterior mean and marginal probability for one reachable signal.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SignalPosterior<T = f64> {
    pub signal: usize,
    pub probability: T,
    pub posterior: Belief<T>,
    pub mean: T,
}

/// Bayes posteriors for every signal with positive marginal probability.
/// Unreachable signals are omitted.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PosteriorReport<T = f64> {
    pub signals: Vec<SignalPosterior<T>>,
}

impl<T: Scalar> PosteriorReport<T> {
    /// `Σ_s P(s)·β^s`, which equals the prior.
    pub fn mixture(&self) -> Vec<T> {
        let n = self.signals.first().map_or(0, |s| s.posterior.len());
        let mut out = vec![T::zero(); n];
        for s in &self.signals {
            for (o, p) in out.iter_mut().zip(s.posterior.probs()) {
                *o = *o + s.probability * *p;
            }
        }
        out
    }

    /// `Σ_s P(s)·m^s`, which equals the prior mean.
    pub fn expected_mean(&self) -> T {
        self.signals.iter().map(|s| s.probability * s.mean).sum()
    }
}

fn check_dims<T: Scalar>(prior: &Belief<T>, exp: &Experiment<T>) -> Result<()> {
    if prior.len() != exp.num_states() {
        return Err(Error::DimensionMismatch(format!(
            "belief has {} states, experiment has {}",
            prior.len(),
            exp.num_states()
        )));
    }
    Ok(())
}

fn signal_mass<T: Scalar>(prior: &Belief<T>, exp: &Experiment<T>, signal: usize) -> T {
    prior
        .probs()
        .iter()
        .enumerate()
        .map(|(l, b)| *b * exp.p(l, signal))
        .sum()
}

/// Bayes posterior after observing `signal`.
pub fn update<T: Scalar>(prior: &Belief<T>, exp: &Experiment<T>, signal: usize) -> Result<Belief<T>> {
    check_dims(prior, exp)?;
    if signal >= exp.num_signals() {
        return Err(Error::DimensionMismatch(format!(
            "signal {signal} out of range for {} signals",
            exp.num_signals()
        )));
    }
    let mass = signal_mass(prior, exp, signal);
    if mass <= T::zero() {
        return Err(Error::UnreachableSignal { signal });
    }
    let probs = prior
        .probs()
        .iter()
        .enumerate()
        .map(|(l, b)| *b * exp.p(l, signal) / mass)
        .collect();
    Ok(Belief { probs })
}

/// `Σ_l h(ω_l)·b_l`, with `h` the identity when absent.
pub fn posterior_mean<T: Scalar>(
    b: &Belief<T>,
    states: &StateSpace<T>,
    h: Option<&dyn Fn(T) -> T>,
) -> Result<T> {
    if b.len() != states.len() {
        return Err(Error::DimensionMismatch(format!(
            "belief has {} states, state space has {}",
            b.len(),
            states.len()
        )));
    }
    let labels = relabeled(states, h)?;
    Ok(b.probs().iter().zip(&labels).map(|(p, w)| *p * *w).sum())
}

fn relabeled<T: Scalar>(states: &StateSpace<T>, h: Option<&dyn Fn(T) -> T>) -> Result<Vec<T>> {
    match h {
        None => Ok(states.values().to_vec()),
        Some(h) => {
            let mapped: Vec<T> = states.values().iter().map(|&v| h(v)).collect();
            if mapped.windows(2).any(|w| w[1] < w[0]) {
                return Err(Error::NonMonotoneMap);
            }
            Ok(mapped)
        }
    }
}

/// Marginal signal distribution `P(s_k) = Σ_l β_l p(s_k|ω_l)`.
pub fn marginal<T: Scalar>(prior: &Belief<T>, exp: &Experiment<T>) -> Result<Vec<T>> {
    check_dims(prior, exp)?;
    Ok((0..exp.num_signals()).map(|k| signal_mass(prior, exp, k)).collect())
}

pub fn posterior_report<T: Scalar>(
    prior: &Belief<T>,
    exp: &Experiment<T>,
    states: &StateSpace<T>,
) -> Result<PosteriorReport<T>> {
    let probs = marginal(prior, exp)?;
    let mut signals = Vec::new();
    for (k, p) in probs.into_iter().enumerate() {
        if p <= T::zero() {
            continue;
        }
        let posterior = update(prior, exp, k)?;
        let mean = posterior_mean(&posterior, states, None)?;
        signals.push(SignalPosterior {
            signal: k,
            probability: p,
            posterior,
            mean,
        });
    }
    Ok(PosteriorReport { signals })
}

/// `𝔼_i[m_j^s]`: individual `i`'s expectation of `j`'s posterior mean.
///
/// Fails with [`Error::UnreachableSignal`] when `i` assigns positive
/// probability to a signal that `j` considers impossible.
pub fn expected_cross_posterior_mean<T: Scalar>(
    prior_i: &Belief<T>,
    prior_j: &Belief<T>,
    exp: &Experiment<T>,
    states: &StateSpace<T>,
    h: Option<&dyn Fn(T) -> T>,
) -> Result<T> {
    check_dims(prior_i, exp)?;
    check_dims(prior_j, exp)?;
    if states.len() != exp.num_states() {
        return Err(Error::DimensionMismatch(format!(
            "state space has {} states, experiment has {}",
            states.len(),
            exp.num_states()
        )));
    }
    let labels = relabeled(states, h)?;
    let mut total = T::zero();
    for k in 0..exp.num_signals() {
        let p_i = signal_mass(prior_i, exp, k);
        if p_i <= T::zero() {
            continue;
        }
        let p_j = signal_mass(prior_j, exp, k);
        if p_j <= T::zero() {
            return Err(Error::UnreachableSignal { signal: k });
        }
        let weighted: T = prior_j
            .probs()
            .iter()
            .zip(&labels)
            .enumerate()
            .map(|(l, (b, w))| *b * exp.p(l, k) * *w)
            .sum();
        total = total + p_i * weighted / p_j;
    }
    Ok(total)
}

/// `lo ≤_LR hi`: `hi(ω')lo(ω) ≥ lo(ω')hi(ω)` for every index pair `ω' > ω`.
pub fn is_lr_dominated<T: Scalar>(lo: &Belief<T>, hi: &Belief<T>) -> bool {
    if lo.len() != hi.len() {
        return false;
    }
    let (a, b) = (lo.probs(), hi.probs());
    let tol = T::stochastic_tol();
    (0..a.len()).all(|w| (w + 1..a.len()).all(|v| b[v] * a[w] >= a[v] * b[w] - tol))
}

/// `lo ≤_FOSD hi`: every upper cumulative sum of `hi` weakly exceeds that of `lo`.
pub fn is_fosd_dominated<T: Scalar>(lo: &Belief<T>, hi: &Belief<T>) -> bool {
    if lo.len() != hi.len() {
        return false;
    }
    let tol = T::stochastic_tol();
    let (mut up_lo, mut up_hi) = (T::zero(), T::zero());
    for l in (0..lo.len()).rev() {
        up_lo = up_lo + lo.probs()[l];
        up_hi = up_hi + hi.probs()[l];
        if up_hi < up_lo - tol {
            return false;
        }
    }
    true
}

/// Every `2×2` minor `p(s'|ω')p(s|ω) − p(s'|ω)p(s|ω')` with `s' ≻ s`,
/// `ω' > ω` is nonnegative up to the stochastic tolerance.
pub fn is_mlrp_experiment<T: Scalar>(exp: &Experiment<T>) -> bool {
    let (n_states, n_signals) = (exp.num_states(), exp.num_signals());
    let tol = T::stochastic_tol();
    for w in 0..n_states {
        for v in w + 1..n_states {
            for s in 0..n_signals {
                for t in s + 1..n_signals {
                    let det = exp.p(v, t) * exp.p(w, s) - exp.p(w, t) * exp.p(v, s);
                    if det < -tol {
                        return false;
                    }
                }
            }
        }
    }
    true
}
