//! Costly signaling with exogenous receiver information.
//!
//! A sender of type `t ∈ [0, 1]` (his belief that `ω = 1`) sends a report `r`
//! at cost `c(r, t)`. The receiver forms an interim belief `π(r)`, observes a
//! signal `s ~ g(·|ω)` and pays her posterior `β(s; π)`. In the least-cost
//! separating equilibrium `π(ρ(t)) = t` and `ρ` solves
//!
//! ```text
//! ∂c(ρ(t), t)/∂r · ρ'(t) = MB(t),   ρ(0) = 0,
//! ```
//!
//! where `MB(t) = ∂𝔼_{s|t}[β(s; π)]/∂π` at `π = t`.

pub mod reversals;
pub mod cost;
pub mod lcse;

use rayon::prelude::*;
use serde::Serialize;

use crate::belief::{is_mlrp_experiment, Experiment};
use crate::blackwell::find_garbling;
use crate::{Error, Result, Scalar};

pub use cost::{check_single_crossing, Cost, CostFunction, FnCost, QuadraticCost, SingleCrossingReport};
pub use lcse::{solve_lcse, LcseSolution};

pub const DEFAULT_EPS: f64 = 1e-4;
pub const DEFAULT_STEP: f64 = 1.0 / 4000.0;
pub const RESIDUAL_TOL: f64 = 1e-7;

/// `RESIDUAL_TOL`, widened where differencing noise of order `ε/h` exceeds it.
fn default_residual_tol<T: Scalar>() -> T {
    T::lit(RESIDUAL_TOL).max(T::epsilon() * T::lit(1e5))
}

/// Binary-state signaling model.
#[derive(Debug, Clone)]
pub struct SignalingModel<T = f64> {
    experiment: Experiment<T>,
    cost: CostFunction<T>,
    eps: T,
    step: T,
    residual_tol: T,
    boundary_informative: bool,
}

impl<T: Scalar> SignalingModel<T> {
    /// Requires two states, MLRP signal order and `g(s|ω) > 0` for every
    /// reachable signal.
    pub fn new(experiment: Experiment<T>, cost: CostFunction<T>) -> Result<Self> {
        Self::build(experiment, cost, false)
    }

    /// Like [`SignalingModel::new`] but admits signals that rule out a state.
    pub fn boundary_informative(experiment: Experiment<T>, cost: CostFunction<T>) -> Result<Self> {
        Self::build(experiment, cost, true)
    }

    fn build(experiment: Experiment<T>, cost: CostFunction<T>, boundary_informative: bool) -> Result<Self> {
        if experiment.num_states() != 2 {
            return Err(Error::InvalidModel("signaling needs exactly two states".into()));
        }
        if !is_mlrp_experiment(&experiment) {
            return Err(Error::InvalidModel("experiment must satisfy MLRP".into()));
        }
        if !boundary_informative {
            for s in 0..experiment.num_signals() {
                let (g0, g1) = (experiment.p(0, s), experiment.p(1, s));
                if (g0 > T::zero()) != (g1 > T::zero()) {
                    return Err(Error::InvalidModel(format!(
                        "signal {s} rules out a state; use the boundary-informative constructor"
                    )));
                }
            }
        }
        cost.validate(T::lit(2.0), 21)?;
        Ok(Self {
            experiment,
            cost,
            eps: T::lit(DEFAULT_EPS),
            step: T::lit(DEFAULT_STEP),
            residual_tol: default_residual_tol(),
            boundary_informative,
        })
    }

    pub fn with_eps(mut self, eps: T) -> Result<Self> {
        if !(eps > T::zero() && eps < T::lit(0.5)) {
            return Err(Error::InvalidParameter(format!("eps must lie in (0, 0.5), got {eps}")));
        }
        self.eps = eps;
        Ok(self)
    }

    pub fn with_step(mut self, step: T) -> Result<Self> {
        if !(step > T::zero() && step <= T::lit(0.1)) {
            return Err(Error::InvalidParameter(format!("step must lie in (0, 0.1], got {step}")));
        }
        self.step = step;
        Ok(self)
    }

    pub fn experiment(&self) -> &Experiment<T> {
        &self.experiment
    }

    pub fn cost(&self) -> &CostFunction<T> {
        &self.cost
    }

    pub fn eps(&self) -> T {
        self.eps
    }

    pub fn step(&self) -> T {
        self.step
    }

    pub fn residual_tol(&self) -> T {
        self.residual_tol
    }

    pub fn is_boundary_informative(&self) -> bool {
        self.boundary_informative
    }

    pub fn marginal_benefit(&self, t: T) -> Result<T> {
        marginal_benefit(t, &self.experiment)
    }

    /// `𝔼_{s|t}[β(s; π)]`
    pub fn expected_posterior(&self, t: T, pi: T) -> Result<T> {
        let g = &self.experiment;
        let mut total = T::zero();
        for s in 0..g.num_signals() {
            let p = t * g.p(1, s) + (T::one() - t) * g.p(0, s);
            if p > T::zero() {
                total = total + p * posterior_beta(g, s, pi)?;
            }
        }
        Ok(total)
    }
}

/// Receiver posterior on `ω = 1` after signal `s` from interim belief `π`.
pub fn posterior_beta<T: Scalar>(exp: &Experiment<T>, signal: usize, pi: T) -> Result<T> {
    if !(pi >= T::zero() && pi <= T::one()) {
        return Err(Error::InvalidParameter(format!("interim belief {pi} outside [0, 1]")));
    }
    if exp.num_states() != 2 || signal >= exp.num_signals() {
        return Err(Error::DimensionMismatch("need a two-state experiment and a valid signal".into()));
    }
    let num = pi * exp.p(1, signal);
    let den = num + (T::one() - pi) * exp.p(0, signal);
    if !(den > T::zero()) {
        return Err(Error::UnreachableSignal { signal });
    }
    Ok(num / den)
}

/// `∂𝔼_{s|t}[β(s; π)]/∂π` at `π = t`, which simplifies to
/// `Σ_s g(s|1) g(s|0) / (t g(s|1) + (1−t) g(s|0))`. The endpoints take the
/// one-sided limits `Σ g(s|1)` over `g(s|0) > 0` and vice versa.
pub fn marginal_benefit<T: Scalar>(t: T, exp: &Experiment<T>) -> Result<T> {
    if !(t >= T::zero() && t <= T::one()) {
        return Err(Error::InvalidParameter(format!("type {t} outside [0, 1]")));
    }
    if exp.num_states() != 2 {
        return Err(Error::DimensionMismatch("marginal benefit needs two states".into()));
    }
    let mut total = T::zero();
    for s in 0..exp.num_signals() {
        let (g0, g1) = (exp.p(0, s), exp.p(1, s));
        if g0 > T::zero() && g1 > T::zero() {
            total = total + g1 * g0 / (t * g1 + (T::one() - t) * g0);
        }
    }
    Ok(total)
}

/// One row of the pointwise comparison between a more and a less
/// informative experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow<T = f64> {
    pub t: T,
    pub mb_more: T,
    pub mb_less: T,
    pub rho_more: T,
    pub rho_less: T,
    pub cost_more: T,
    pub cost_less: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison<T = f64> {
    pub rows: Vec<ComparisonRow<T>>,
    /// Largest `mb_more − mb_less`; non-positive when ordered.
    pub worst_mb_gap: T,
    pub worst_rho_gap: T,
    pub worst_cost_gap: T,
    pub mb_ordered: bool,
    pub rho_ordered: bool,
    pub cost_ordered: bool,
    pub more: LcseSolution<T>,
    pub less: LcseSolution<T>,
}

impl<T: Scalar> Comparison<T> {
    pub fn ordered(&self) -> bool {
        self.mb_ordered && self.rho_ordered && self.cost_ordered
    }
}

/// Solves both equilibria and compares marginal benefit, report and cost on
/// `n` uniform types in `[0, 1−ε]`. `more` must Blackwell-dominate `less`.
pub fn compare_informativeness<T: Scalar>(
    model: &SignalingModel<T>,
    more: &Experiment<T>,
    less: &Experiment<T>,
    n: usize,
) -> Result<Comparison<T>> {
    if find_garbling(more, less)?.is_none() {
        return Err(Error::NotBlackwellRanked(
            "first experiment does not dominate the second".into(),
        ));
    }
    let build = |e: &Experiment<T>| {
        let e = e.sorted_by_likelihood_ratio()?;
        let m = if model.boundary_informative {
            SignalingModel::boundary_informative(e, model.cost.clone())?
        } else {
            SignalingModel::new(e, model.cost.clone())?
        };
        m.with_eps(model.eps)?.with_step(model.step)
    };
    let models = [build(more)?, build(less)?];
    let mut sols: Vec<LcseSolution<T>> = models
        .par_iter()
        .map(solve_lcse)
        .collect::<Result<_>>()?;
    let less_sol = sols.pop().expect("two solves");
    let more_sol = sols.pop().expect("two solves");

    let n = n.max(2);
    let top = T::one() - model.eps;
    let slack = default_residual_tol::<T>();
    let mut rows = Vec::with_capacity(n);
    for i in 0..n {
        let t = top * T::lit(i as f64) / T::lit((n - 1) as f64);
        let rho_more = more_sol.rho_at(t)?;
        let rho_less = less_sol.rho_at(t)?;
        rows.push(ComparisonRow {
            t,
            mb_more: marginal_benefit(t, more)?,
            mb_less: marginal_benefit(t, less)?,
            rho_more,
            rho_less,
            cost_more: model.cost.cost(rho_more, t),
            cost_less: model.cost.cost(rho_less, t),
        });
    }
    let worst = |f: &dyn Fn(&ComparisonRow<T>) -> T| rows.iter().map(f).fold(T::neg_infinity(), T::max);
    let worst_mb_gap = worst(&|r| r.mb_more - r.mb_less);
    let worst_rho_gap = worst(&|r| r.rho_more - r.rho_less);
    let worst_cost_gap = worst(&|r| r.cost_more - r.cost_less);
    Ok(Comparison {
        mb_ordered: worst_mb_gap <= slack,
        rho_ordered: worst_rho_gap <= slack,
        cost_ordered: worst_cost_gap <= slack,
        worst_mb_gap,
        worst_rho_gap,
        worst_cost_gap,
        rows,
        more: more_sol,
        less: less_sol,
    })
}
