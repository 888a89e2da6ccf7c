//! Expected cross-posterior means along the Blackwell order.
//!
//! For likelihood-ratio ordered priors `β_A ≤_LR β_B` and MLRP experiments
//! `E ≽ Ẽ`, the checks here evaluate
//!
//! ```text
//! m_A ≤ 𝔼_A^E[m_B] ≤ 𝔼_A^Ẽ[m_B] ≤ m_B
//! m_A ≤ 𝔼_B^Ẽ[m_A] ≤ 𝔼_B^E[m_A] ≤ m_B
//! ```
//!
//! and the matching expected-disagreement ordering, plus the experiments that
//! break the direction and undershooting parts when the prior ordering fails.

mod campaign;

pub use campaign::{
    run_counterexample_campaign, run_property_campaign, CampaignConfig, CampaignSummary,
    CounterexampleSummary, FailedTrial, GarblingMode,
};

use serde::Serialize;

use crate::belief::{
    expected_cross_posterior_mean, is_fosd_dominated, is_lr_dominated, is_mlrp_experiment, update,
    marginal, Belief, Experiment, StateSpace,
};
use crate::blackwell::{apply_garbling, find_garbling, max_abs_difference, pool_pair_reveal, threshold_reveal};
use crate::{Error, GarblingKernel, Result, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Strict,
    /// Residual within the inequality tolerance of zero.
    WeakTie,
    Fail,
}

/// One weak inequality `lhs ≤ rhs`; `residual = rhs − lhs`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Inequality<T = f64> {
    pub name: &'static str,
    pub lhs: T,
    pub rhs: T,
    pub residual: T,
    pub verdict: Verdict,
}

impl<T: Scalar> Inequality<T> {
    pub fn new(name: &'static str, lhs: T, rhs: T) -> Self {
        let residual = rhs - lhs;
        let tol = T::inequality_tol();
        let verdict = if residual.abs() <= tol {
            Verdict::WeakTie
        } else if residual > T::zero() {
            Verdict::Strict
        } else {
            Verdict::Fail
        };
        Self {
            name,
            lhs,
            rhs,
            residual,
            verdict,
        }
    }

    pub fn holds(&self) -> bool {
        self.verdict != Verdict::Fail
    }

    pub fn is_strict(&self) -> bool {
        self.verdict == Verdict::Strict
    }
}

pub const A_UNDERSHOOT: &str = "a_undershoot";
pub const A_INTENSITY: &str = "a_intensity";
pub const A_DIRECTION: &str = "a_direction";
pub const B_DIRECTION: &str = "b_direction";
pub const B_INTENSITY: &str = "b_intensity";
pub const B_UNDERSHOOT: &str = "b_undershoot";

/// The full inequality chain for one instance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IvpReport<T = f64> {
    pub m_a: T,
    pub m_b: T,
    /// `𝔼_A^E[m_B^s]`
    pub a_expects_b_more: T,
    /// `𝔼_A^Ẽ[m_B^s̃]`
    pub a_expects_b_less: T,
    /// `𝔼_B^E[m_A^s]`
    pub b_expects_a_more: T,
    /// `𝔼_B^Ẽ[m_A^s̃]`
    pub b_expects_a_less: T,
    /// In chain order: A's three links, then B's three links.
    pub inequalities: Vec<Inequality<T>>,
    pub warnings: Vec<String>,
}

impl<T: Scalar> IvpReport<T> {
    pub fn holds(&self) -> bool {
        self.inequalities.iter().all(Inequality::holds)
    }

    pub fn get(&self, name: &str) -> Option<&Inequality<T>> {
        self.inequalities.iter().find(|i| i.name == name)
    }

    /// Undershooting under `E` and intensity, for both individuals; these need
    /// no assumption on the less informative experiment.
    pub fn undershoot_intensity_holds(&self) -> bool {
        [A_UNDERSHOOT, A_INTENSITY, B_INTENSITY, B_UNDERSHOOT]
            .iter()
            .all(|n| self.get(n).is_some_and(Inequality::holds))
    }

    pub fn failures(&self) -> Vec<&'static str> {
        self.inequalities.iter().filter(|i| !i.holds()).map(|i| i.name).collect()
    }
}

/// `𝔼_i^E[|m_i^s − m_j^s|]` under both experiments for both individuals.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DisagreementReport<T = f64> {
    pub a_more: T,
    pub a_less: T,
    pub b_more: T,
    pub b_less: T,
    pub inequalities: Vec<Inequality<T>>,
}

pub const A_DISAGREEMENT: &str = "a_disagreement";
pub const B_DISAGREEMENT: &str = "b_disagreement";

impl<T: Scalar> DisagreementReport<T> {
    pub fn holds(&self) -> bool {
        self.inequalities.iter().all(Inequality::holds)
    }

    pub fn get(&self, name: &str) -> Option<&Inequality<T>> {
        self.inequalities.iter().find(|i| i.name == name)
    }
}

/// Direction and undershooting for a single experiment. One side's fields
/// are `None` when that agent assigns positive probability to a signal the
/// other rules out, so the expectation is undefined.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecomposedReport<T = f64> {
    pub m_a: T,
    pub m_b: T,
    pub a_expects_b: Option<T>,
    pub b_expects_a: Option<T>,
    /// `𝔼_A[m_B] ≤ m_B`
    pub a_direction: Option<Inequality<T>>,
    /// `m_A ≤ 𝔼_A[m_B]`
    pub a_undershoot: Option<Inequality<T>>,
    /// `m_A ≤ 𝔼_B[m_A]`
    pub b_direction: Option<Inequality<T>>,
    /// `𝔼_B[m_A] ≤ m_B`
    pub b_undershoot: Option<Inequality<T>>,
}

impl<T: Scalar> DecomposedReport<T> {
    pub fn a_direction_residual(&self) -> Option<T> {
        self.a_direction.as_ref().map(|i| i.residual)
    }

    pub fn a_undershoot_residual(&self) -> Option<T> {
        self.a_undershoot.as_ref().map(|i| i.residual)
    }

    /// Every defined inequality, A's first.
    pub fn inequalities(&self) -> impl Iterator<Item = &Inequality<T>> {
        [&self.a_direction, &self.a_undershoot, &self.b_direction, &self.b_undershoot]
            .into_iter()
            .flatten()
    }
}

/// Experiment built to violate part of the chain, with the certifying report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Counterexample<T = f64> {
    /// 1-based index of the threshold or pooled pair.
    pub index: usize,
    pub experiment: Experiment<T>,
    pub report: DecomposedReport<T>,
}

fn check_shapes<T: Scalar>(states: &StateSpace<T>, a: &Belief<T>, b: &Belief<T>) -> Result<()> {
    if a.len() != states.len() || b.len() != states.len() {
        return Err(Error::DimensionMismatch(format!(
            "priors of length {} and {} over {} states",
            a.len(),
            b.len(),
            states.len()
        )));
    }
    Ok(())
}

fn cross<T: Scalar>(
    i: &Belief<T>,
    j: &Belief<T>,
    exp: &Experiment<T>,
    states: &StateSpace<T>,
) -> Result<T> {
    expected_cross_posterior_mean(i, j, exp, states, None)
}

/// Resolves the kernel relating `more` to `less`, verifying a supplied one.
fn ranking_kernel<T: Scalar>(
    more: &Experiment<T>,
    less: &Experiment<T>,
    kernel: Option<&GarblingKernel<T>>,
) -> Result<GarblingKernel<T>> {
    match kernel {
        Some(k) => {
            let garbled = apply_garbling(more, k)?;
            match max_abs_difference(&garbled, less) {
                Some(d) if d <= T::lp_tol() => Ok(k.clone()),
                _ => Err(Error::NotBlackwellRanked(
                    "supplied kernel does not map the more informative experiment onto the less informative one"
                        .into(),
                )),
            }
        }
        None => find_garbling(more, less)?.ok_or_else(|| {
            Error::NotBlackwellRanked("no garbling maps the first experiment onto the second".into())
        }),
    }
}

fn chain_preconditions<T: Scalar>(
    states: &StateSpace<T>,
    a: &Belief<T>,
    b: &Belief<T>,
    more: &Experiment<T>,
    less: &Experiment<T>,
    kernel: Option<&GarblingKernel<T>>,
) -> Result<Vec<String>> {
    check_shapes(states, a, b)?;
    if !is_lr_dominated(a, b) {
        return Err(Error::NotLrOrdered);
    }
    ranking_kernel(more, less, kernel)?;
    let mut warnings = Vec::new();
    if !is_mlrp_experiment(more) {
        warnings.push("more informative experiment is not MLRP".to_string());
    }
    if !is_mlrp_experiment(less) {
        warnings.push("less informative experiment is not MLRP".to_string());
    }
    Ok(warnings)
}

/// Evaluates all six inequalities of the chain for `β_A ≤_LR β_B`, `E ≽ Ẽ`.
///
/// A non-MLRP experiment produces a warning, not an error; the undershooting
/// and intensity links hold without MLRP of `Ẽ`.
pub fn check_ivp_chain<T: Scalar>(
    states: &StateSpace<T>,
    prior_a: &Belief<T>,
    prior_b: &Belief<T>,
    more: &Experiment<T>,
    less: &Experiment<T>,
    kernel: Option<&GarblingKernel<T>>,
) -> Result<IvpReport<T>> {
    let warnings = chain_preconditions(states, prior_a, prior_b, more, less, kernel)?;
    let m_a = prior_a.mean(states)?;
    let m_b = prior_b.mean(states)?;
    let a_more = cross(prior_a, prior_b, more, states)?;
    let a_less = cross(prior_a, prior_b, less, states)?;
    let b_more = cross(prior_b, prior_a, more, states)?;
    let b_less = cross(prior_b, prior_a, less, states)?;
    let inequalities = vec![
        Inequality::new(A_UNDERSHOOT, m_a, a_more),
        Inequality::new(A_INTENSITY, a_more, a_less),
        Inequality::new(A_DIRECTION, a_less, m_b),
        Inequality::new(B_DIRECTION, m_a, b_less),
        Inequality::new(B_INTENSITY, b_less, b_more),
        Inequality::new(B_UNDERSHOOT, b_more, m_b),
    ];
    Ok(IvpReport {
        m_a,
        m_b,
        a_expects_b_more: a_more,
        a_expects_b_less: a_less,
        b_expects_a_more: b_more,
        b_expects_a_less: b_less,
        inequalities,
        warnings,
    })
}

/// `𝔼_i[|m_i^s − m_j^s|]` over signals `i` can observe.
pub fn expected_mean_gap<T: Scalar>(
    prior_i: &Belief<T>,
    prior_j: &Belief<T>,
    exp: &Experiment<T>,
    states: &StateSpace<T>,
) -> Result<T> {
    let p_i = marginal(prior_i, exp)?;
    let mut total = T::zero();
    for (k, p) in p_i.into_iter().enumerate() {
        if p <= T::zero() {
            continue;
        }
        let m_i = update(prior_i, exp, k)?.mean(states)?;
        let m_j = update(prior_j, exp, k)?.mean(states)?;
        total = total + p * (m_i - m_j).abs();
    }
    Ok(total)
}

/// Expected absolute posterior-mean disagreement under `E` versus `Ẽ`.
pub fn check_disagreement<T: Scalar>(
    states: &StateSpace<T>,
    prior_a: &Belief<T>,
    prior_b: &Belief<T>,
    more: &Experiment<T>,
    less: &Experiment<T>,
    kernel: Option<&GarblingKernel<T>>,
) -> Result<DisagreementReport<T>> {
    chain_preconditions(states, prior_a, prior_b, more, less, kernel)?;
    let a_more = expected_mean_gap(prior_a, prior_b, more, states)?;
    let a_less = expected_mean_gap(prior_a, prior_b, less, states)?;
    let b_more = expected_mean_gap(prior_b, prior_a, more, states)?;
    let b_less = expected_mean_gap(prior_b, prior_a, less, states)?;
    Ok(DisagreementReport {
        a_more,
        a_less,
        b_more,
        b_less,
        inequalities: vec![
            Inequality::new(A_DISAGREEMENT, a_more, a_less),
            Inequality::new(B_DISAGREEMENT, b_more, b_less),
        ],
    })
}

/// Direction and undershooting verdicts for one experiment, without checking
/// any hypothesis on the priors or the experiment.
pub fn check_decomposed<T: Scalar>(
    states: &StateSpace<T>,
    prior_a: &Belief<T>,
    prior_b: &Belief<T>,
    exp: &Experiment<T>,
) -> Result<DecomposedReport<T>> {
    check_shapes(states, prior_a, prior_b)?;
    let m_a = prior_a.mean(states)?;
    let m_b = prior_b.mean(states)?;
    let defined = |r: Result<T>| match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::UnreachableSignal { .. }) => Ok(None),
        Err(e) => Err(e),
    };
    let a_x = defined(cross(prior_a, prior_b, exp, states))?;
    let b_x = defined(cross(prior_b, prior_a, exp, states))?;
    Ok(DecomposedReport {
        m_a,
        m_b,
        a_expects_b: a_x,
        b_expects_a: b_x,
        a_direction: a_x.map(|x| Inequality::new(A_DIRECTION, x, m_b)),
        a_undershoot: a_x.map(|x| Inequality::new(A_UNDERSHOOT, m_a, x)),
        b_direction: b_x.map(|x| Inequality::new(B_DIRECTION, m_a, x)),
        b_undershoot: b_x.map(|x| Inequality::new(B_UNDERSHOOT, x, m_b)),
    })
}

fn upper_sums<T: Scalar>(b: &Belief<T>) -> Vec<T> {
    let mut out = vec![T::zero(); b.len()];
    let mut acc = T::zero();
    for l in (0..b.len()).rev() {
        acc = acc + b.probs()[l];
        out[l] = acc;
    }
    out
}

fn pick_most_negative<T: Scalar>(
    best: Option<(T, Counterexample<T>)>,
    residual: T,
    cand: Counterexample<T>,
) -> Option<(T, Counterexample<T>)> {
    match best {
        Some(b) if b.0 <= residual => Some(b),
        _ => Some((residual, cand)),
    }
}

/// With `m_A ≤ m_B` but `β_A ≰_FOSD β_B`, reveals only whether the state is
/// below a threshold where B's upper tail is lighter than A's; A then expects
/// B's posterior mean to exceed `m_B`.
pub fn counterexample_direction<T: Scalar>(
    states: &StateSpace<T>,
    prior_a: &Belief<T>,
    prior_b: &Belief<T>,
) -> Result<Counterexample<T>> {
    check_shapes(states, prior_a, prior_b)?;
    let n = states.len();
    let (m_a, m_b) = (prior_a.mean(states)?, prior_b.mean(states)?);
    if m_a > m_b + T::inequality_tol() {
        return Err(Error::NoViolatingIndex("requires m_A <= m_B".into()));
    }
    if is_fosd_dominated(prior_a, prior_b) {
        return Err(Error::NoViolatingIndex("priors are FOSD ordered".into()));
    }
    if states.values()[0] >= states.values()[n - 1] {
        return Err(Error::NoViolatingIndex("requires ω_1 < ω_L".into()));
    }
    let (up_a, up_b) = (upper_sums(prior_a), upper_sums(prior_b));
    let mut best = None;
    for k in 2..=n {
        if up_b[k - 1] >= up_a[k - 1] - T::stochastic_tol() {
            continue;
        }
        let experiment = threshold_reveal(n, k)?;
        let Ok(report) = check_decomposed(states, prior_a, prior_b, &experiment) else {
            continue;
        };
        let Some(residual) = report.a_direction_residual() else {
            continue;
        };
        if residual < -T::inequality_tol() {
            let cand = Counterexample {
                index: k,
                experiment,
                report,
            };
            best = pick_most_negative(best, residual, cand);
        }
    }
    best.map(|b| b.1)
        .ok_or_else(|| Error::NoViolatingIndex("no threshold certifies a direction violation".into()))
}

/// With `β_A ≰_LR β_B`, pools an adjacent pair `(ω_l, ω_{l+1})` on which B's
/// likelihood ratio falls below A's and reveals every other state; A then
/// expects B's posterior mean to fall below `m_A`.
pub fn counterexample_undershoot<T: Scalar>(
    states: &StateSpace<T>,
    prior_a: &Belief<T>,
    prior_b: &Belief<T>,
) -> Result<Counterexample<T>> {
    check_shapes(states, prior_a, prior_b)?;
    if !states.is_strictly_increasing() {
        return Err(Error::NoViolatingIndex("requires strictly increasing states".into()));
    }
    if is_lr_dominated(prior_a, prior_b) {
        return Err(Error::NoViolatingIndex("priors are LR ordered".into()));
    }
    let (a, b) = (prior_a.probs(), prior_b.probs());
    let mut best = None;
    for l in 1..states.len() {
        let (lo, hi) = (l - 1, l);
        if b[hi] * a[lo] >= a[hi] * b[lo] - T::stochastic_tol() {
            continue;
        }
        let experiment = pool_pair_reveal(states.len(), l)?;
        let Ok(report) = check_decomposed(states, prior_a, prior_b, &experiment) else {
            continue;
        };
        let Some(residual) = report.a_undershoot_residual() else {
            continue;
        };
        if residual < -T::inequality_tol() {
            let cand = Counterexample {
                index: l,
                experiment,
                report,
            };
            best = pick_most_negative(best, residual, cand);
        }
    }
    best.map(|b| b.1)
        .ok_or_else(|| Error::NoViolatingIndex("no adjacent likelihood-ratio reversal".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blackwell::{binary_symmetric, fully_informative, middle_reveal, uninformative};

    fn b(p: &[f64]) -> Belief {
        Belief::new(p.to_vec()).unwrap()
    }

    fn bin() -> StateSpace {
        StateSpace::integers(2).unwrap()
    }

    /// Independent 2-signal summation for binary states with values (0, 1).
    fn cross_binary(i: &[f64; 2], j: &[f64; 2], q: f64) -> f64 {
        let lik = [[q, 1.0 - q], [1.0 - q, q]];
        (0..2)
            .map(|s| {
                let p_i = i[0] * lik[0][s] + i[1] * lik[1][s];
                let p_j = j[0] * lik[0][s] + j[1] * lik[1][s];
                p_i * (j[1] * lik[1][s] / p_j)
            })
            .sum()
    }

    #[test]
    fn identical_experiments_tie_on_intensity() {
        let e = binary_symmetric(0.8).unwrap();
        let r = check_ivp_chain(&bin(), &b(&[0.6, 0.4]), &b(&[0.3, 0.7]), &e, &e, None).unwrap();
        assert!(r.holds());
        assert_eq!(r.get(A_INTENSITY).unwrap().verdict, Verdict::WeakTie);
        assert_eq!(r.get(B_INTENSITY).unwrap().verdict, Verdict::WeakTie);
    }

    #[test]
    fn extreme_experiments() {
        let om = StateSpace::integers(3).unwrap();
        let (pa, pb) = (b(&[0.5, 0.3, 0.2]), b(&[0.2, 0.3, 0.5]));
        let r = check_ivp_chain(
            &om,
            &pa,
            &pb,
            &fully_informative(3).unwrap(),
            &uninformative(3).unwrap(),
            None,
        )
        .unwrap();
        assert!(r.holds());
        assert!((r.a_expects_b_more - r.m_a).abs() < 1e-14);
        assert!((r.a_expects_b_less - r.m_b).abs() < 1e-14);
        assert!((r.b_expects_a_more - r.m_b).abs() < 1e-14);
        assert!((r.b_expects_a_less - r.m_a).abs() < 1e-14);
    }

    #[test]
    fn binary_symmetric_chain_is_strict() {
        let (pa, pb) = ([0.7, 0.3], [0.3, 0.7]);
        let r = check_ivp_chain(
            &bin(),
            &b(&pa),
            &b(&pb),
            &binary_symmetric(0.9).unwrap(),
            &binary_symmetric(0.7).unwrap(),
            None,
        )
        .unwrap();
        assert!((r.a_expects_b_more - cross_binary(&pa, &pb, 0.9)).abs() < 1e-14);
        assert!((r.a_expects_b_less - cross_binary(&pa, &pb, 0.7)).abs() < 1e-14);
        assert!((r.b_expects_a_more - cross_binary(&pb, &pa, 0.9)).abs() < 1e-14);
        assert!(r.inequalities.iter().all(Inequality::is_strict), "{r:#?}");
    }

    #[test]
    fn chain_preconditions_enforced() {
        let e = binary_symmetric(0.9).unwrap();
        let f = binary_symmetric(0.7).unwrap();
        assert_eq!(
            check_ivp_chain(&bin(), &b(&[0.3, 0.7]), &b(&[0.7, 0.3]), &e, &f, None).unwrap_err(),
            Error::NotLrOrdered
        );
        assert!(matches!(
            check_ivp_chain(&bin(), &b(&[0.7, 0.3]), &b(&[0.3, 0.7]), &f, &e, None),
            Err(Error::NotBlackwellRanked(_))
        ));
        let wrong = GarblingKernel::identity(2).unwrap();
        assert!(matches!(
            check_ivp_chain(&bin(), &b(&[0.7, 0.3]), &b(&[0.3, 0.7]), &e, &f, Some(&wrong)),
            Err(Error::NotBlackwellRanked(_))
        ));
    }

    #[test]
    fn non_mlrp_warns() {
        let om = StateSpace::integers(3).unwrap();
        let (pa, pb) = (b(&[0.5, 0.3, 0.2]), b(&[0.2, 0.3, 0.5]));
        let r = check_ivp_chain(
            &om,
            &pa,
            &pb,
            &fully_informative(3).unwrap(),
            &middle_reveal().unwrap(),
            None,
        )
        .unwrap();
        assert_eq!(r.warnings.len(), 1);
    }

    #[test]
    fn disagreement_examples() {
        let om = StateSpace::integers(3).unwrap();
        let (pa, pb) = (b(&[0.5, 0.3, 0.2]), b(&[0.2, 0.3, 0.5]));
        let d = check_disagreement(
            &om,
            &pa,
            &pb,
            &fully_informative(3).unwrap(),
            &uninformative(3).unwrap(),
            None,
        )
        .unwrap();
        assert_eq!(d.a_more, 0.0);
        assert_eq!(d.b_more, 0.0);
        let gap = (pa.mean(&om).unwrap() - pb.mean(&om).unwrap()).abs();
        assert!((d.a_less - gap).abs() < 1e-14 && (d.b_less - gap).abs() < 1e-14);

        let d = check_disagreement(
            &bin(),
            &b(&[0.7, 0.3]),
            &b(&[0.3, 0.7]),
            &binary_symmetric(0.9).unwrap(),
            &binary_symmetric(0.7).unwrap(),
            None,
        )
        .unwrap();
        assert!(d.inequalities.iter().all(Inequality::is_strict));
    }

    #[test]
    fn decomposed_non_mlrp_direction_failure() {
        let om = StateSpace::integers(3).unwrap();
        for x in [0.1, 0.5, 0.9] {
            let r = check_decomposed(&om, &b(&[1.0, 0.0, 0.0]), &b(&[0.0, x, 1.0 - x]), &middle_reveal().unwrap())
                .unwrap();
            assert_eq!(r.a_expects_b, Some(2.0));
            assert_eq!(r.a_direction.unwrap().verdict, Verdict::Fail);
            assert!(r.a_undershoot.unwrap().holds());
            assert!(r.b_expects_a.is_none());
        }
    }

    #[test]
    fn direction_counterexample() {
        let om = StateSpace::integers(3).unwrap();
        let (pa, pb) = (b(&[0.4, 0.6, 0.0]), b(&[0.5, 0.0, 0.5]));
        let cx = counterexample_direction(&om, &pa, &pb).unwrap();
        assert_eq!(cx.index, 2);
        // A: P(high) = 0.6; B's high posterior puts all mass on ω_3
        assert!((cx.report.a_expects_b.unwrap() - 1.2).abs() < 1e-14);
        assert!(cx.report.a_direction_residual().unwrap() < -1e-10);

        assert!(counterexample_direction(&om, &b(&[0.5, 0.3, 0.2]), &b(&[0.2, 0.3, 0.5])).is_err());
        let flat = StateSpace::new(vec![1.0, 1.0, 1.0]).unwrap();
        assert!(counterexample_direction(&flat, &pa, &pb).is_err());
    }

    #[test]
    fn undershoot_counterexample() {
        let om = StateSpace::integers(3).unwrap();
        let (pa, pb) = (b(&[0.2, 0.2, 0.6]), b(&[0.1, 0.6, 0.3]));
        let cx = counterexample_undershoot(&om, &pa, &pb).unwrap();
        assert_eq!(cx.index, 2);
        // pooled {ω_2, ω_3}: B's pooled mean = (0.6 + 0.6)/0.9
        let expected = 0.2 * 0.0 + 0.8 * (1.2 / 0.9);
        assert!((cx.report.a_expects_b.unwrap() - expected).abs() < 1e-14);
        assert!(cx.report.a_undershoot_residual().unwrap() < -1e-10);

        assert!(counterexample_undershoot(&om, &b(&[0.5, 0.3, 0.2]), &b(&[0.2, 0.3, 0.5])).is_err());
    }

    #[test]
    fn undershoot_counterexample_binary_reversed_pair() {
        // the reversed binary pair pools both states: the uninformative experiment
        let cx = counterexample_undershoot(&bin(), &b(&[0.3, 0.7]), &b(&[0.7, 0.3])).unwrap();
        assert!(cx.experiment.is_uninformative());
        assert!((cx.report.a_expects_b.unwrap() - 0.3).abs() < 1e-15);
    }
}
