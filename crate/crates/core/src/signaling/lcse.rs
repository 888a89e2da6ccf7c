//! Least-cost separating equilibrium.
//!
//! The boundary `ρ(0) = 0` is a 0/0 point of the equation in `t`, because the
//! marginal cost of a truthful report vanishes. Swapping the roles of the
//! variables removes it: `t(ρ)` solves
//!
//! ```text
//! dt/dρ = ∂c(ρ, t)/∂r / MB(t),   t(0) = 0,
//! ```
//!
//! which is regular at the origin. It is integrated with classical RK4 until
//! `t` reaches `1 − ε`.

use serde::Serialize;

use super::cost::{check_single_crossing, Cost, SingleCrossingReport};
use super::{marginal_benefit, SignalingModel};
use crate::{Error, Result, Scalar};

const MAX_RETRIES: usize = 4;
const MAX_STEPS: usize = 20_000_000;
/// Largest step relative to the local stiffness `1/|∂f/∂t|`.
const STIFF_FRACTION: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LcseSolution<T = f64> {
    /// Integrator nodes, strictly increasing from `(0, 0)` to `t = 1 − ε`.
    pub t: Vec<T>,
    pub rho: Vec<T>,
    /// `dt/dρ` at each node.
    pub slope: Vec<T>,
    /// `c(ρ(t), t)`
    pub cost: Vec<T>,
    pub marginal_benefit: Vec<T>,
    pub monotone: bool,
    /// `ρ(t) > t` at every node with `t > ε`.
    pub above_truth: bool,
    /// Largest `|∂c/∂r · ρ'(t) − MB(t)|` over nodes in `[ε, 1−ε]`, with `ρ'`
    /// from a five-point finite difference of the solved path.
    pub max_residual: T,
    pub step: T,
    pub retries: usize,
    pub truthful: bool,
    pub single_crossing: SingleCrossingReport<T>,
}

impl<T: Scalar> LcseSolution<T> {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn t_max(&self) -> T {
        *self.t.last().expect("solutions are non-empty")
    }

    /// `ρ(t)` by cubic Hermite inversion of the solved `t(ρ)`.
    pub fn rho_at(&self, t: T) -> Result<T> {
        let top = self.t_max();
        if !(t >= T::zero() && t <= top) {
            return Err(Error::InvalidParameter(format!("type {t} outside the solved range [0, {top}]")));
        }
        let i = match self.t.partition_point(|v| *v <= t) {
            0 => 0,
            p => (p - 1).min(self.t.len() - 2),
        };
        if t == self.t[i] {
            return Ok(self.rho[i]);
        }
        let (r0, r1) = (self.rho[i], self.rho[i + 1]);
        let h = r1 - r0;
        let (t0, t1) = (self.t[i], self.t[i + 1]);
        let (m0, m1) = (self.slope[i] * h, self.slope[i + 1] * h);
        let hermite = |u: T| {
            let u2 = u * u;
            let u3 = u2 * u;
            let two = T::lit(2.0);
            let three = T::lit(3.0);
            (two * u3 - three * u2 + T::one()) * t0
                + (u3 - two * u2 + u) * m0
                + (-two * u3 + three * u2) * t1
                + (u3 - u2) * m1
        };
        let (mut lo, mut hi) = (T::zero(), T::one());
        for _ in 0..200 {
            let mid = (lo + hi) / T::lit(2.0);
            if mid <= lo || mid >= hi {
                break;
            }
            if hermite(mid) < t {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(r0 + h * (lo + hi) / T::lit(2.0))
    }

    /// Values at `n` uniform types spanning `[0, 1 − ε]`: `(t, ρ, c, MB)`.
    pub fn sample(&self, model: &SignalingModel<T>, n: usize) -> Result<Vec<[T; 4]>> {
        let n = n.max(2);
        let top = self.t_max();
        (0..n)
            .map(|i| {
                let t = if i + 1 == n {
                    top
                } else {
                    top * T::lit(i as f64) / T::lit((n - 1) as f64)
                };
                let rho = self.rho_at(t)?;
                Ok([t, rho, model.cost().cost(rho, t), model.marginal_benefit(t)?])
            })
            .collect()
    }
}

/// `t` on the uninformative-experiment path for quadratic cost.
pub fn uninformative_quadratic_type<T: Scalar>(rho: T) -> T {
    let half = T::lit(0.5);
    rho - half + half * (T::lit(-2.0) * rho).exp()
}

struct Path<T> {
    t: Vec<T>,
    rho: Vec<T>,
    slope: Vec<T>,
}

fn rhs<T: Scalar>(model: &SignalingModel<T>, rho: T, t: T) -> Result<T> {
    let t = t.max(T::zero()).min(T::one());
    let mb = marginal_benefit(t, model.experiment())?;
    if !(mb > T::zero()) {
        return Err(Error::IntegrationFailed(format!("marginal benefit vanishes at t = {t}")));
    }
    Ok(model.cost().d_r(rho, t) / mb)
}

fn rk4<T: Scalar>(model: &SignalingModel<T>, rho: T, t: T, h: T) -> Result<T> {
    let half = T::lit(0.5);
    let k1 = rhs(model, rho, t)?;
    let k2 = rhs(model, rho + half * h, t + half * h * k1)?;
    let k3 = rhs(model, rho + half * h, t + half * h * k2)?;
    let k4 = rhs(model, rho + h, t + h * k3)?;
    Ok(t + h / T::lit(6.0) * (k1 + T::lit(2.0) * k2 + T::lit(2.0) * k3 + k4))
}

fn local_stiffness<T: Scalar>(model: &SignalingModel<T>, rho: T, t: T) -> Result<T> {
    let d = T::lit(1e-6);
    let lo = (t - d).max(T::zero());
    let hi = (t + d).min(T::one());
    Ok(((rhs(model, rho, hi)? - rhs(model, rho, lo)?) / (hi - lo)).abs())
}

fn integrate<T: Scalar>(model: &SignalingModel<T>, step: T) -> Result<Path<T>> {
    let top = T::one() - model.eps();
    let (mut rho, mut t) = (T::zero(), T::zero());
    let mut path = Path {
        t: vec![t],
        rho: vec![rho],
        slope: vec![rhs(model, rho, t)?],
    };
    let limit = T::lit(STIFF_FRACTION);
    for _ in 0..MAX_STEPS {
        let stiff = local_stiffness(model, rho, t)?;
        let h = if stiff * step > limit { limit / stiff } else { step };
        let mut next = rk4(model, rho, t, h)?;
        let mut h_taken = h;
        if next >= top {
            // shrink the final step so that it lands on t = 1 − ε
            let (mut lo, mut hi) = (T::zero(), h);
            for _ in 0..200 {
                let mid = (lo + hi) / T::lit(2.0);
                if mid <= lo || mid >= hi {
                    break;
                }
                if rk4(model, rho, t, mid)? < top {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            h_taken = hi;
            next = top;
        }
        if !(next > t) || !next.is_finite() {
            return Err(Error::IntegrationFailed(format!(
                "type path stalled at rho = {rho}, t = {t}"
            )));
        }
        rho = rho + h_taken;
        t = next;
        path.t.push(t);
        path.rho.push(rho);
        path.slope.push(rhs(model, rho, t)?);
        if t >= top {
            return Ok(path);
        }
    }
    Err(Error::IntegrationFailed(format!(
        "no convergence to t = {top} within {MAX_STEPS} steps (reached t = {t})"
    )))
}

/// Derivative at `x[k]` of the interpolating polynomial through `(x, y)`.
fn lagrange_derivative<T: Scalar>(x: &[T], y: &[T], k: usize) -> T {
    let mut total = T::zero();
    for j in 0..x.len() {
        let w = if j == k {
            (0..x.len())
                .filter(|&m| m != k)
                .map(|m| T::one() / (x[k] - x[m]))
                .sum()
        } else {
            let num: T = (0..x.len())
                .filter(|&m| m != j && m != k)
                .fold(T::one(), |acc, m| acc * (x[k] - x[m]));
            let den: T = (0..x.len())
                .filter(|&m| m != j)
                .fold(T::one(), |acc, m| acc * (x[j] - x[m]));
            num / den
        };
        total = total + w * y[j];
    }
    total
}

fn max_residual<T: Scalar>(model: &SignalingModel<T>, path: &Path<T>) -> Result<T> {
    let n = path.t.len();
    let eps = model.eps();
    let mut worst = T::zero();
    // the final node is a partial step; keep it out of the stencils
    for i in 2..n.saturating_sub(3) {
        let t = path.t[i];
        if t < eps {
            continue;
        }
        let slope = lagrange_derivative(&path.rho[i - 2..=i + 2], &path.t[i - 2..=i + 2], 2);
        let lhs = model.cost().d_r(path.rho[i], t) / slope;
        let r = (lhs - marginal_benefit(t, model.experiment())?).abs();
        if !r.is_finite() {
            return Ok(T::infinity());
        }
        worst = worst.max(r);
    }
    Ok(worst)
}

fn diagnostics<T: Scalar>(model: &SignalingModel<T>, rho_max: T) -> SingleCrossingReport<T> {
    let top = T::one() - model.eps();
    let t_grid: Vec<T> = (0..21).map(|i| top * T::lit(i as f64 / 20.0)).collect();
    let r_grid: Vec<T> = (1..=40).map(|j| rho_max * T::lit(j as f64 / 40.0)).collect();
    check_single_crossing(model.cost(), &t_grid, &r_grid)
}

fn assemble<T: Scalar>(
    model: &SignalingModel<T>,
    path: Path<T>,
    max_residual: T,
    step: T,
    retries: usize,
    truthful: bool,
) -> Result<LcseSolution<T>> {
    let eps = model.eps();
    let cost = path
        .t
        .iter()
        .zip(&path.rho)
        .map(|(t, r)| model.cost().cost(*r, *t))
        .collect();
    let marginal_benefit = path
        .t
        .iter()
        .map(|t| model.marginal_benefit(*t))
        .collect::<Result<_>>()?;
    let monotone = path.t.windows(2).all(|w| w[1] > w[0]) && path.rho.windows(2).all(|w| w[1] > w[0]);
    let above_truth = truthful || path.t.iter().zip(&path.rho).all(|(t, r)| *t <= eps || r > t);
    let rho_max = *path.rho.last().expect("non-empty path");
    Ok(LcseSolution {
        single_crossing: diagnostics(model, rho_max.max(T::one())),
        t: path.t,
        rho: path.rho,
        slope: path.slope,
        cost,
        marginal_benefit,
        monotone,
        above_truth,
        max_residual,
        step,
        retries,
        truthful,
    })
}

/// Solves for the least-cost separating strategy. Fully informative
/// experiments give zero marginal benefit, and the truthful strategy
/// `ρ(t) = t` is returned. Otherwise the step is halved up to four times
/// until the equation residual is within tolerance.
pub fn solve_lcse<T: Scalar>(model: &SignalingModel<T>) -> Result<LcseSolution<T>> {
    let top = T::one() - model.eps();
    if model.experiment().is_fully_informative() {
        let n = (top / model.step()).ceil().to_usize().unwrap_or(1).max(1);
        let t: Vec<T> = (0..=n)
            .map(|i| if i == n { top } else { model.step() * T::lit(i as f64) })
            .collect();
        let path = Path {
            rho: t.clone(),
            slope: vec![T::one(); t.len()],
            t,
        };
        return assemble(model, path, T::zero(), model.step(), 0, true);
    }
    let mut step = model.step();
    let mut last = T::infinity();
    for retry in 0..=MAX_RETRIES {
        let path = integrate(model, step)?;
        let residual = max_residual(model, &path)?;
        if residual <= model.residual_tol() {
            return assemble(model, path, residual, step, retry, false);
        }
        last = residual;
        step = step / T::lit(2.0);
    }
    Err(Error::IntegrationFailed(format!(
        "equation residual {last} above {} after {MAX_RETRIES} step halvings",
        model.residual_tol()
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blackwell::{binary_symmetric, fully_informative, uninformative};
    use crate::signaling::CostFunction;

    #[test]
    fn uninformative_matches_closed_form() {
        let m: SignalingModel = SignalingModel::new(uninformative(2).unwrap(), CostFunction::Quadratic).unwrap();
        let s = solve_lcse(&m).unwrap();
        assert!(s.monotone && s.above_truth && !s.truthful);
        assert!(s.max_residual <= 1e-7, "{}", s.max_residual);
        let worst = s
            .t
            .iter()
            .zip(&s.rho)
            .map(|(t, r)| (t - uninformative_quadratic_type(*r)).abs())
            .fold(0.0, f64::max);
        assert!(worst < 1e-10, "{worst}");
        assert!((s.t_max() - (1.0 - 1e-4)).abs() < 1e-15);
        // interpolated inverse
        for t in [0.01, 0.25, 0.5, 0.8, 0.9999] {
            let r = s.rho_at(t).unwrap();
            assert!((uninformative_quadratic_type(r) - t).abs() < 1e-9);
        }
        // quadratic cost violates single crossing only above r = 1
        assert!(s.single_crossing.min_violating_r.unwrap() > 1.0);
    }

    #[test]
    fn fully_informative_is_truthful() {
        let m = SignalingModel::boundary_informative(fully_informative(2).unwrap(), CostFunction::Quadratic).unwrap();
        let s = solve_lcse(&m).unwrap();
        assert!(s.truthful);
        assert!(s.cost.iter().all(|c| *c == 0.0));
        assert_eq!(s.rho_at(0.3).unwrap(), 0.3);
    }

    #[test]
    fn intermediate_experiment_is_bracketed() {
        let m = SignalingModel::new(binary_symmetric(0.75).unwrap(), CostFunction::Quadratic).unwrap();
        let s = solve_lcse(&m).unwrap();
        assert!(s.max_residual <= 1e-7);
        assert!(s.monotone && s.above_truth);
        let u = solve_lcse(&SignalingModel::new(uninformative(2).unwrap(), CostFunction::Quadratic).unwrap()).unwrap();
        for t in [0.1, 0.3, 0.5, 0.7, 0.9] {
            let r = s.rho_at(t).unwrap();
            assert!(r > t && r < u.rho_at(t).unwrap());
        }
        assert!(s.rho_at(1.0).is_err());
    }

    #[test]
    fn lagrange_weights_exact_on_quartic() {
        let x = [0.0, 0.1, 0.25, 0.3, 0.5];
        let y: Vec<f64> = x.iter().map(|v| v * v * v * v - v).collect();
        let d = lagrange_derivative(&x, &y, 2);
        assert!((d - (4.0 * 0.25f64.powi(3) - 1.0)).abs() < 1e-12);
    }
}
