//! Voluntary testing with a privately informed agent.
//!
//! Quality `q` is drawn from a finite prior; the agent's type `t` has density
//! `f(t|q)` on a uniform grid, normalized so that `𝔼[q|t] = t`. Types above a
//! cutoff `t*` pay `c` to take a test `g(s|q)`; the market pays its posterior
//! mean. An interior cutoff solves
//!
//! ```text
//! 𝔼_{s|t*}[δ^e(s; δ₊(t*))] = δ^e₋(t*) + c
//! ```
//!
//! and the two corners follow the weak inequalities at `t̲` and `t̄`.
//!
//! Densities are linearly interpolated between grid nodes, so type-space
//! integrals are exact trapezoid integrals and every quantity is continuous
//! in the cutoff.

use rayon::prelude::*;
use serde::Serialize;

use crate::belief::{expected_cross_posterior_mean, is_lr_dominated, is_mlrp_experiment, Belief, Experiment, StateSpace};
use crate::blackwell::find_garbling;
use crate::{Error, Result, Scalar};

pub const DEFAULT_GRID: usize = 2001;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestingModel<T = f64> {
    qualities: StateSpace<T>,
    prior: Belief<T>,
    lo: T,
    hi: T,
    /// `densities[q][i] = f(t_i|q)`, normalized to unit trapezoid mass.
    densities: Vec<Vec<T>>,
    /// `cumulative[q][i] = ∫_{t̲}^{t_i} f(t|q) dt`.
    cumulative: Vec<Vec<T>>,
    test: Experiment<T>,
    cost: T,
}

impl<T: Scalar> TestingModel<T> {
    /// Validates and builds a model from tabulated densities on `n` uniform
    /// nodes spanning `[lo, hi]`.
    pub fn new(
        qualities: StateSpace<T>,
        prior: Belief<T>,
        lo: T,
        hi: T,
        densities: Vec<Vec<T>>,
        test: Experiment<T>,
        cost: T,
    ) -> Result<Self> {
        let nq = qualities.len();
        if prior.len() != nq || densities.len() != nq || test.num_states() != nq {
            return Err(Error::DimensionMismatch(
                "prior, densities and test must cover every quality".into(),
            ));
        }
        if !prior.full_support() {
            return Err(Error::InvalidModel("quality prior must have full support".into()));
        }
        if !(lo < hi) {
            return Err(Error::InvalidModel("type interval must satisfy lo < hi".into()));
        }
        let n = densities[0].len();
        if n < 2 || densities.iter().any(|d| d.len() != n) {
            return Err(Error::InvalidModel("densities need a common grid of >= 2 nodes".into()));
        }
        if densities.iter().flatten().any(|f| !f.is_finite() || *f < T::zero()) {
            return Err(Error::InvalidModel("densities must be finite and non-negative".into()));
        }
        if !is_mlrp_experiment(&test) {
            return Err(Error::InvalidModel("test must satisfy MLRP".into()));
        }
        if !(cost >= T::zero()) {
            return Err(Error::InvalidModel("cost must be non-negative".into()));
        }
        let h = (hi - lo) / T::lit((n - 1) as f64);
        let mut normalized = Vec::with_capacity(nq);
        let mut cumulative = Vec::with_capacity(nq);
        for (q, f) in densities.into_iter().enumerate() {
            let cum = trapezoid_cumulative(&f, h);
            let mass = cum[n - 1];
            if (mass - T::one()).abs() > T::quadrature_tol() {
                return Err(Error::InvalidModel(format!(
                    "density for quality {q} integrates to {mass}, not 1"
                )));
            }
            normalized.push(f.iter().map(|v| *v / mass).collect::<Vec<T>>());
            cumulative.push(cum.iter().map(|v| *v / mass).collect::<Vec<T>>());
        }
        let model = Self {
            qualities,
            prior,
            lo,
            hi,
            densities: normalized,
            cumulative,
            test,
            cost,
        };
        model.check_strict_mlrp()?;
        model.check_mean_normalization()?;
        Ok(model)
    }

    /// Binary quality `{0, 1}` on types `[0, 1]` with the given type marginal
    /// density: `π(1) = ∫ t m(t)`, `f(t|1) = t m(t)/π(1)`, `f(t|0) = (1−t) m(t)/π(0)`.
    pub fn binary_with_marginal<F: Fn(T) -> T>(
        marginal: F,
        n: usize,
        test: Experiment<T>,
        cost: T,
    ) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidModel("need at least 2 grid nodes".into()));
        }
        let h = T::one() / T::lit((n - 1) as f64);
        let nodes: Vec<T> = (0..n).map(|i| T::lit(i as f64) * h).collect();
        let m: Vec<T> = nodes.iter().map(|&t| marginal(t)).collect();
        let mass = trapezoid_cumulative(&m, h)[n - 1];
        if !(mass > T::zero()) {
            return Err(Error::InvalidModel("marginal density has no mass".into()));
        }
        let m: Vec<T> = m.into_iter().map(|v| v / mass).collect();
        let tm: Vec<T> = nodes.iter().zip(&m).map(|(t, v)| *t * *v).collect();
        let p1 = trapezoid_cumulative(&tm, h)[n - 1];
        let p0 = T::one() - p1;
        let f1 = tm.iter().map(|v| *v / p1).collect();
        let f0 = nodes.iter().zip(&m).map(|(t, v)| (T::one() - *t) * *v / p0).collect();
        Self::new(
            StateSpace::integers(2)?,
            Belief::new(vec![p0, p1])?,
            T::zero(),
            T::one(),
            vec![f0, f1],
            test,
            cost,
        )
    }

    /// Binary quality, `π = (½, ½)`, `f(t|1) = 2t`, `f(t|0) = 2(1−t)`: the type
    /// marginal is uniform on `[0, 1]` and `𝔼[q|t] = t` exactly.
    pub fn canonical(test: Experiment<T>, cost: T) -> Result<Self> {
        Self::binary_with_marginal(|_| T::one(), DEFAULT_GRID, test, cost)
    }

    pub fn with_cost(&self, cost: T) -> Result<Self> {
        if !(cost >= T::zero()) {
            return Err(Error::InvalidModel("cost must be non-negative".into()));
        }
        Ok(Self { cost, ..self.clone() })
    }

    pub fn with_test(&self, test: Experiment<T>) -> Result<Self> {
        if test.num_states() != self.qualities.len() {
            return Err(Error::DimensionMismatch("test must cover every quality".into()));
        }
        if !is_mlrp_experiment(&test) {
            return Err(Error::InvalidModel("test must satisfy MLRP".into()));
        }
        Ok(Self { test, ..self.clone() })
    }

    pub fn qualities(&self) -> &StateSpace<T> {
        &self.qualities
    }

    pub fn prior(&self) -> &Belief<T> {
        &self.prior
    }

    pub fn test(&self) -> &Experiment<T> {
        &self.test
    }

    pub fn cost(&self) -> T {
        self.cost
    }

    pub fn type_bounds(&self) -> (T, T) {
        (self.lo, self.hi)
    }

    pub fn grid_len(&self) -> usize {
        self.densities[0].len()
    }

    fn spacing(&self) -> T {
        (self.hi - self.lo) / T::lit((self.grid_len() - 1) as f64)
    }

    pub fn node(&self, i: usize) -> T {
        if i + 1 == self.grid_len() {
            self.hi
        } else {
            self.lo + T::lit(i as f64) * self.spacing()
        }
    }

    /// `π^e`
    pub fn prior_mean(&self) -> T {
        self.prior.mean(&self.qualities).expect("validated dimensions")
    }

    fn locate(&self, t: T) -> (usize, T) {
        let n = self.grid_len();
        let h = self.spacing();
        let pos = ((t - self.lo) / h).floor().to_usize().unwrap_or(0);
        let i = pos.min(n - 2);
        (i, t - self.node(i))
    }

    fn density_at(&self, q: usize, t: T) -> T {
        let (i, d) = self.locate(t);
        let f = &self.densities[q];
        f[i] + (f[i + 1] - f[i]) * d / self.spacing()
    }

    fn cdf(&self, q: usize, t: T) -> T {
        if t <= self.lo {
            return T::zero();
        }
        if t >= self.hi {
            return T::one();
        }
        let (i, d) = self.locate(t);
        let f = &self.densities[q];
        let h = self.spacing();
        self.cumulative[q][i] + f[i] * d + (f[i + 1] - f[i]) * d * d / (T::lit(2.0) * h)
    }

    /// Mass of the type marginal above `t`.
    pub fn mass_above(&self, t: T) -> T {
        self.prior
            .probs()
            .iter()
            .enumerate()
            .map(|(q, p)| *p * (T::one() - self.cdf(q, t)))
            .sum()
    }

    /// `β(t)`: the type's private belief over qualities.
    pub fn private_belief(&self, t: T) -> Result<Belief<T>> {
        self.check_in_range(t)?;
        Belief::from_weights(
            self.prior
                .probs()
                .iter()
                .enumerate()
                .map(|(q, p)| *p * self.density_at(q, t))
                .collect(),
        )
    }

    fn check_in_range(&self, t: T) -> Result<()> {
        if !(t >= self.lo && t <= self.hi) {
            return Err(Error::InvalidParameter(format!(
                "type {t} outside [{}, {}]",
                self.lo, self.hi
            )));
        }
        Ok(())
    }

    /// Market beliefs `(δ₋, δ₊)` given that exactly the types above `t_star`
    /// test. At `t̲` the off-path no-test belief is `β(t̲)`; at `t̄` the
    /// off-path test belief is `β(t̄)`. A side with no mass is treated as the
    /// matching corner.
    pub fn interim_beliefs(&self, t_star: T) -> Result<(Belief<T>, Belief<T>)> {
        self.check_in_range(t_star)?;
        let below: Vec<T> = (0..self.qualities.len())
            .map(|q| self.prior.probs()[q] * self.cdf(q, t_star))
            .collect();
        let above: Vec<T> = (0..self.qualities.len())
            .map(|q| self.prior.probs()[q] * (T::one() - self.cdf(q, t_star)))
            .collect();
        let below_mass: T = below.iter().copied().sum();
        let above_mass: T = above.iter().copied().sum();
        let minus = if t_star <= self.lo || below_mass <= T::zero() {
            self.private_belief(self.lo)?
        } else {
            Belief::from_weights(below)?
        };
        let plus = if t_star >= self.hi || above_mass <= T::zero() {
            self.private_belief(self.hi)?
        } else {
            Belief::from_weights(above)?
        };
        Ok((minus, plus))
    }

    /// Whether `δ₋(t*) ≤_LR β(t*) ≤_LR δ₊(t*)`.
    pub fn interim_beliefs_bracket_cutoff(&self, t_star: T) -> Result<bool> {
        let (minus, plus) = self.interim_beliefs(t_star)?;
        let b = self.private_belief(t_star)?;
        Ok(is_lr_dominated(&minus, &b) && is_lr_dominated(&b, &plus))
    }

    /// Both sides of the cutoff condition at `t_star`.
    pub fn gain_terms(&self, t_star: T) -> Result<GainTerms<T>> {
        let (minus, plus) = self.interim_beliefs(t_star)?;
        let private = self.private_belief(t_star)?;
        let test_value = expected_cross_posterior_mean(&private, &plus, &self.test, &self.qualities, None)?;
        let minus_mean = minus.mean(&self.qualities)?;
        let plus_mean = plus.mean(&self.qualities)?;
        let private_mean = private.mean(&self.qualities)?;
        let no_test_value = minus_mean + self.cost;
        Ok(GainTerms {
            t_star,
            delta_minus: minus,
            delta_plus: plus,
            delta_minus_mean: minus_mean,
            delta_plus_mean: plus_mean,
            private_mean,
            test_value,
            no_test_value,
            gain: test_value - no_test_value,
        })
    }

    /// `L(t*; g) − R(t*)`: the cutoff type's net benefit of testing.
    pub fn cutoff_gain(&self, t_star: T) -> Result<T> {
        Ok(self.gain_terms(t_star)?.gain)
    }

    fn check_strict_mlrp(&self) -> Result<()> {
        let n = self.grid_len();
        for q in 0..self.qualities.len() {
            for r in q + 1..self.qualities.len() {
                let (lo, hi) = (&self.densities[q], &self.densities[r]);
                for i in 0..n - 1 {
                    if hi[i + 1] * lo[i] - lo[i + 1] * hi[i] <= T::zero() {
                        return Err(Error::InvalidModel(format!(
                            "type densities violate strict MLRP between nodes {i} and {}",
                            i + 1
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    fn check_mean_normalization(&self) -> Result<()> {
        for i in 0..self.grid_len() {
            let t = self.node(i);
            let m = self.private_belief(t)?.mean(&self.qualities)?;
            if (m - t).abs() > T::grid_tol() {
                return Err(Error::InvalidModel(format!("E[q|t] = {m} at t = {t}")));
            }
        }
        Ok(())
    }
}

fn trapezoid_cumulative<T: Scalar>(f: &[T], h: T) -> Vec<T> {
    let half = T::lit(0.5);
    let mut out = Vec::with_capacity(f.len());
    let mut acc = T::zero();
    out.push(acc);
    for w in f.windows(2) {
        acc = acc + half * h * (w[0] + w[1]);
        out.push(acc);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GainTerms<T = f64> {
    pub t_star: T,
    pub delta_minus: Belief<T>,
    pub delta_plus: Belief<T>,
    pub delta_minus_mean: T,
    pub delta_plus_mean: T,
    /// `𝔼[q|t*]`
    pub private_mean: T,
    /// `L(t*) = 𝔼_{s|t*}[δ^e(s; δ₊(t*))]`
    pub test_value: T,
    /// `R(t*) = δ^e₋(t*) + c`
    pub no_test_value: T,
    pub gain: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum CutoffKind<T = f64> {
    Interior,
    /// `t* = t̲`: every type tests.
    AllTest,
    /// `t* = t̄`: no type tests.
    NoTest,
    /// Gain vanishes on `[t_star, end]`; every point is an equilibrium cutoff.
    Flat { end: T },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquilibriumCutoff<T = f64> {
    pub t_star: T,
    pub kind: CutoffKind<T>,
    /// Gain at `t_star`.
    pub residual: T,
    pub terms: GainTerms<T>,
}

impl<T: Scalar> EquilibriumCutoff<T> {
    pub fn upper(&self) -> T {
        match self.kind {
            CutoffKind::Flat { end } => end,
            _ => self.t_star,
        }
    }

    /// `δ^e₋ < t* ≤ 𝔼_{s|t*}[δ^e] ≤ δ^e₊` with slack `tol` on the weak links.
    pub fn sandwich_holds(&self, tol: T) -> bool {
        let g = &self.terms;
        g.delta_minus_mean < g.private_mean
            && g.private_mean <= g.test_value + tol
            && g.test_value <= g.delta_plus_mean + tol
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquilibriumSet<T = f64> {
    pub cutoffs: Vec<EquilibriumCutoff<T>>,
}

impl<T: Scalar> EquilibriumSet<T> {
    pub fn smallest(&self) -> T {
        self.cutoffs.iter().map(|c| c.t_star).fold(T::infinity(), T::min)
    }

    pub fn largest(&self) -> T {
        self.cutoffs.iter().map(EquilibriumCutoff::upper).fold(T::neg_infinity(), T::max)
    }

    pub fn interior(&self) -> impl Iterator<Item = &EquilibriumCutoff<T>> {
        self.cutoffs.iter().filter(|c| c.kind == CutoffKind::Interior)
    }
}

fn bisect<T: Scalar>(model: &TestingModel<T>, mut a: T, mut b: T, mut ga: T) -> Result<T> {
    let tol = T::lit(1e-9).max(T::epsilon() * T::lit(4.0) * (model.hi - model.lo));
    for _ in 0..200 {
        if b - a <= tol {
            break;
        }
        let mid = a + (b - a) / T::lit(2.0);
        if mid <= a || mid >= b {
            break;
        }
        let gm = model.cutoff_gain(mid)?;
        if gm == T::zero() {
            return Ok(mid);
        }
        if (gm > T::zero()) == (ga > T::zero()) {
            a = mid;
            ga = gm;
        } else {
            b = mid;
        }
    }
    Ok(a + (b - a) / T::lit(2.0))
}

/// All equilibrium cutoffs found by scanning the type grid: admissible
/// corners, bisected sign changes, isolated grid zeros and flat segments.
pub fn solve_equilibrium_cutoffs<T: Scalar>(model: &TestingModel<T>) -> Result<EquilibriumSet<T>> {
    let n = model.grid_len();
    let nodes: Vec<T> = (0..n).map(|i| model.node(i)).collect();
    let gains: Vec<T> = nodes
        .iter()
        .map(|&t| model.cutoff_gain(t))
        .collect::<Result<_>>()?;
    let zero = T::stochastic_tol();
    let sign = |g: T| {
        if g.abs() <= zero {
            0
        } else if g > T::zero() {
            1
        } else {
            -1
        }
    };
    let mut cutoffs = Vec::new();
    let mut push = |t: T, kind: CutoffKind<T>| -> Result<()> {
        let terms = model.gain_terms(t)?;
        cutoffs.push(EquilibriumCutoff {
            t_star: t,
            kind,
            residual: terms.gain,
            terms,
        });
        Ok(())
    };

    if gains[0] >= -zero {
        push(model.lo, CutoffKind::AllTest)?;
    }
    let mut i = 0;
    while i < n {
        if sign(gains[i]) == 0 {
            let start = i;
            while i + 1 < n && sign(gains[i + 1]) == 0 {
                i += 1;
            }
            if i > start {
                push(nodes[start], CutoffKind::Flat { end: nodes[i] })?;
            } else if start > 0 && start < n - 1 {
                push(nodes[start], CutoffKind::Interior)?;
            }
        } else if i + 1 < n && sign(gains[i + 1]) == -sign(gains[i]) {
            let t = bisect(model, nodes[i], nodes[i + 1], gains[i])?;
            push(t, CutoffKind::Interior)?;
        }
        i += 1;
    }
    if gains[n - 1] <= zero {
        push(model.hi, CutoffKind::NoTest)?;
    }

    if cutoffs.is_empty() {
        return Err(Error::InvalidModel("no equilibrium cutoff found on the grid".into()));
    }
    cutoffs.sort_by(|a, b| a.t_star.partial_cmp(&b.t_star).unwrap_or(std::cmp::Ordering::Equal));
    Ok(EquilibriumSet { cutoffs })
}

/// A test with an identifier and a scalar informativeness parameter.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LabeledTest<T = f64> {
    pub id: String,
    pub param: T,
    pub experiment: Experiment<T>,
}

impl<T: Scalar> LabeledTest<T> {
    pub fn new(id: impl Into<String>, param: T, experiment: Experiment<T>) -> Self {
        Self {
            id: id.into(),
            param,
            experiment,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StaticsRow<T = f64> {
    pub test_id: String,
    pub informativeness_param: T,
    pub smallest_cutoff: T,
    pub largest_cutoff: T,
    /// Mass of types testing at the largest cutoff.
    pub tested_mass: T,
    /// `c × tested_mass`.
    pub agent_exante_cost: T,
    pub equilibria: EquilibriumSet<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StaticsTable<T = f64> {
    pub rows: Vec<StaticsRow<T>>,
    /// Largest drop of either extremal cutoff between consecutive tests.
    pub worst_decrease: T,
    pub monotone: bool,
}

const MONOTONE_SLACK: f64 = 1e-7;

/// Extremal cutoffs for each test in a list ordered from least to most
/// informative. Consecutive tests must be Blackwell ranked.
pub fn comparative_statics<T: Scalar>(
    model: &TestingModel<T>,
    tests: &[LabeledTest<T>],
) -> Result<StaticsTable<T>> {
    for pair in tests.windows(2) {
        if find_garbling(&pair[1].experiment, &pair[0].experiment)?.is_none() {
            return Err(Error::NotBlackwellRanked(format!(
                "test '{}' is not more informative than '{}'",
                pair[1].id, pair[0].id
            )));
        }
    }
    let rows: Vec<StaticsRow<T>> = tests
        .par_iter()
        .map(|t| {
            let m = model.with_test(t.experiment.clone())?;
            let eq = solve_equilibrium_cutoffs(&m)?;
            let largest = eq.largest();
            let tested_mass = m.mass_above(largest);
            Ok(StaticsRow {
                test_id: t.id.clone(),
                informativeness_param: t.param,
                smallest_cutoff: eq.smallest(),
                largest_cutoff: largest,
                tested_mass,
                agent_exante_cost: m.cost() * tested_mass,
                equilibria: eq,
            })
        })
        .collect::<Result<_>>()?;
    let worst_decrease = rows
        .windows(2)
        .map(|w| {
            (w[0].smallest_cutoff - w[1].smallest_cutoff).max(w[0].largest_cutoff - w[1].largest_cutoff)
        })
        .fold(T::neg_infinity(), T::max);
    let monotone = rows.len() < 2 || worst_decrease <= T::lit(MONOTONE_SLACK);
    Ok(StaticsTable {
        rows,
        worst_decrease,
        monotone,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertifierOptimum<T = f64> {
    pub test_id: String,
    pub price: T,
    /// Smallest (profit-maximizing) equilibrium cutoff.
    pub cutoff: T,
    pub tested_mass: T,
    pub profit: T,
    /// Candidate test pairs ranked in neither direction.
    pub incomparable_pairs: Vec<(String, String)>,
}

/// Profit-maximizing test and price for a monopolist certifier who earns the
/// price on every tested type, selecting the smallest equilibrium cutoff.
/// Ties keep the earliest candidate (test-major, then price order).
pub fn monopolist_certifier<T: Scalar>(
    model: &TestingModel<T>,
    tests: &[LabeledTest<T>],
    prices: &[T],
) -> Result<CertifierOptimum<T>> {
    if tests.is_empty() || prices.is_empty() {
        return Err(Error::InvalidParameter("empty candidate tests or prices".into()));
    }
    let mut incomparable_pairs = Vec::new();
    for (i, a) in tests.iter().enumerate() {
        for b in &tests[i + 1..] {
            let ab = find_garbling(&a.experiment, &b.experiment)?.is_some();
            let ba = find_garbling(&b.experiment, &a.experiment)?.is_some();
            if !ab && !ba {
                incomparable_pairs.push((a.id.clone(), b.id.clone()));
            }
        }
    }
    let combos: Vec<(usize, T)> = (0..tests.len())
        .flat_map(|i| prices.iter().map(move |p| (i, *p)))
        .collect();
    let evaluated: Vec<(usize, T, T, T, T)> = combos
        .par_iter()
        .map(|&(i, price)| {
            let m = model.with_test(tests[i].experiment.clone())?.with_cost(price)?;
            let cutoff = solve_equilibrium_cutoffs(&m)?.smallest();
            let mass = m.mass_above(cutoff);
            Ok((i, price, cutoff, mass, price * mass))
        })
        .collect::<Result<_>>()?;
    let mut best = evaluated[0];
    for e in &evaluated[1..] {
        if e.4 > best.4 {
            best = *e;
        }
    }
    Ok(CertifierOptimum {
        test_id: tests[best.0].id.clone(),
        price: best.1,
        cutoff: best.2,
        tested_mass: best.3,
        profit: best.4,
        incomparable_pairs,
    })
}
