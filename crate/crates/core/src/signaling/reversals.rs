//! Two cases where more receiver information raises the marginal benefit of
//! signaling: a payoff convex in the posterior, and a three-state experiment
//! without MLRP.

use serde::Serialize;

use crate::belief::{expected_cross_posterior_mean, Belief, Experiment, StateSpace};
use crate::blackwell::{middle_reveal, uninformative};
use crate::{Error, Result, Scalar};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvexPayoffRow<T = f64> {
    pub t: T,
    /// `∂𝔼_{s|t}[V(β(s; π))]/∂π` at `π = t` for `V(β) = β/(1−β)`; `None` when
    /// a signal rules out `ω = 0` and the payoff is unbounded.
    pub value: Option<T>,
    /// `1/(1−t)²`, the value under an uninformative experiment.
    pub uninformative: T,
    pub reversal_holds: bool,
    pub strict: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvexPayoffReport<T = f64> {
    /// `Σ_s g(s|1)²/g(s|0)`, at least 1 with equality iff uninformative.
    pub chi_square_moment: Option<T>,
    /// Some signal has `g(s|0) = 0 < g(s|1)`.
    pub extreme: bool,
    pub rows: Vec<ConvexPayoffRow<T>>,
}

impl<T: Scalar> ConvexPayoffReport<T> {
    pub fn holds(&self) -> bool {
        self.rows.iter().all(|r| r.reversal_holds)
    }
}

/// Marginal benefit under `V(β) = β/(1−β)`. By Bayes' rule
/// `𝔼_{s|t}[V(β(s; π))] = π/(1−π) · 𝔼_{s|t}[g(s|1)/g(s|0)]`, so at `π = t`
/// the derivative is `(t χ + 1 − t)/(1−t)²` with `χ = Σ g(s|1)²/g(s|0)`.
pub fn convex_payoff_check<T: Scalar>(exp: &Experiment<T>, t_grid: &[T]) -> Result<ConvexPayoffReport<T>> {
    if exp.num_states() != 2 {
        return Err(Error::DimensionMismatch("convex-payoff check needs two states".into()));
    }
    let mut chi = T::zero();
    let mut extreme = false;
    for s in 0..exp.num_signals() {
        let (g0, g1) = (exp.p(0, s), exp.p(1, s));
        if g0 > T::zero() {
            chi = chi + g1 * g1 / g0;
        } else if g1 > T::zero() {
            extreme = true;
        }
    }
    let tol = T::inequality_tol();
    let rows = t_grid
        .iter()
        .map(|&t| {
            if !(t >= T::zero() && t < T::one()) {
                return Err(Error::InvalidParameter(format!("type {t} outside [0, 1)")));
            }
            let one_minus = T::one() - t;
            let uninformative = T::one() / (one_minus * one_minus);
            let value = (!extreme).then(|| (t * chi + one_minus) / (one_minus * one_minus));
            let (reversal_holds, strict) = match value {
                Some(v) => (v >= uninformative - tol, v > uninformative + tol),
                None => (true, t > T::zero()),
            };
            Ok(ConvexPayoffRow {
                t,
                value,
                uninformative,
                reversal_holds,
                strict,
            })
        })
        .collect::<Result<_>>()?;
    Ok(ConvexPayoffReport {
        chi_square_moment: (!extreme).then_some(chi),
        extreme,
        rows,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThreeStateRow<T = f64> {
    pub t: T,
    /// Closed form `z`.
    pub uninformative: T,
    /// Closed form `2z/(1+t)`.
    pub informative: T,
    pub uninformative_numeric: T,
    pub informative_numeric: T,
    pub reversal_holds: bool,
}

impl<T: Scalar> ThreeStateRow<T> {
    pub fn max_numeric_error(&self) -> T {
        (self.uninformative - self.uninformative_numeric)
            .abs()
            .max((self.informative - self.informative_numeric).abs())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThreeStateReport<T = f64> {
    pub z: T,
    pub rows: Vec<ThreeStateRow<T>>,
}

impl<T: Scalar> ThreeStateReport<T> {
    pub fn max_numeric_error(&self) -> T {
        self.rows.iter().map(ThreeStateRow::max_numeric_error).fold(T::zero(), T::max)
    }

    pub fn holds(&self) -> bool {
        self.rows.iter().all(|r| r.reversal_holds)
    }
}

/// Sender belief `(z, 1 − z(1+t), z t)` over states `{0, 1, 2}`.
pub fn three_state_belief<T: Scalar>(z: T, t: T) -> Result<Belief<T>> {
    Belief::new(vec![z, T::one() - z * (T::one() + t), z * t])
}

/// Compares the closed-form derivatives in the receiver's inferred type
/// against finite differences of the sender's expectation of the receiver's
/// posterior mean, for an uninformative experiment and for the non-MLRP
/// experiment that reveals whether the state is the middle one.
pub fn three_state_check<T: Scalar>(z: T, t_grid: &[T]) -> Result<ThreeStateReport<T>> {
    if !(z > T::zero() && z < T::lit(0.5)) {
        return Err(Error::InvalidParameter(format!("z must lie in (0, 1/2), got {z}")));
    }
    let states = StateSpace::integers(3)?;
    let blind = uninformative::<T>(3)?;
    let middle = middle_reveal::<T>()?;
    let delta = T::lit(1e-5);
    let rows = t_grid
        .iter()
        .map(|&t| {
            if !(t >= T::zero() && t <= T::one()) {
                return Err(Error::InvalidParameter(format!("type {t} outside [0, 1]")));
            }
            let sender = three_state_belief(z, t)?;
            let value = |exp: &Experiment<T>, t_hat: T| {
                expected_cross_posterior_mean(&sender, &three_state_belief(z, t_hat)?, exp, &states, None)
            };
            let derivative = |exp: &Experiment<T>| -> Result<T> {
                if t < delta {
                    let f0 = value(exp, t)?;
                    let f1 = value(exp, t + delta)?;
                    let f2 = value(exp, t + delta + delta)?;
                    Ok((T::lit(-3.0) * f0 + T::lit(4.0) * f1 - f2) / (T::lit(2.0) * delta))
                } else {
                    Ok((value(exp, t + delta)? - value(exp, t - delta)?) / (T::lit(2.0) * delta))
                }
            };
            let informative = T::lit(2.0) * z / (T::one() + t);
            Ok(ThreeStateRow {
                t,
                uninformative: z,
                informative,
                uninformative_numeric: derivative(&blind)?,
                informative_numeric: derivative(&middle)?,
                reversal_holds: informative >= z,
            })
        })
        .collect::<Result<_>>()?;
    Ok(ThreeStateReport { z, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blackwell::{binary_symmetric, fully_informative};

    #[test]
    fn convex_payoff_examples() {
        let u = convex_payoff_check(&uninformative::<f64>(2).unwrap(), &[0.5]).unwrap();
        assert!((u.rows[0].value.unwrap() - 4.0).abs() < 1e-12);
        assert!(!u.rows[0].strict);

        let q: f64 = 0.75;
        let r = convex_payoff_check(&binary_symmetric(q).unwrap(), &[0.5]).unwrap();
        let expected = (0.5 * (q * q / (1.0 - q) + (1.0 - q).powi(2) / q) + 0.5) / 0.25;
        assert!((r.rows[0].value.unwrap() - expected).abs() < 1e-12);
        assert!(r.rows[0].strict && r.holds());

        let f = convex_payoff_check(&fully_informative::<f64>(2).unwrap(), &[0.5]).unwrap();
        assert!(f.extreme && f.rows[0].value.is_none() && f.holds());
        assert!(convex_payoff_check(&u_exp(), &[1.0]).is_err());
    }

    fn u_exp() -> Experiment {
        uninformative(2).unwrap()
    }

    #[test]
    fn convex_payoff_direct_expectation() {
        // (1/(t(1−t))) 𝔼_{s|t}[β/(1−β)] evaluated signal by signal
        let e = binary_symmetric(0.8).unwrap();
        let t: f64 = 0.3;
        let mut direct = 0.0;
        for s in 0..2 {
            let (g0, g1) = (e.p(0, s), e.p(1, s));
            let p = t * g1 + (1.0 - t) * g0;
            let beta = t * g1 / p;
            direct += p * beta / (1.0 - beta);
        }
        direct /= t * (1.0 - t);
        let r = convex_payoff_check(&e, &[t]).unwrap();
        assert!((r.rows[0].value.unwrap() - direct).abs() < 1e-12);
    }

    #[test]
    fn three_state_examples() {
        let r = three_state_check(0.3_f64, &[0.0, 0.5, 1.0]).unwrap();
        assert!((r.rows[1].uninformative - 0.3).abs() < 1e-15);
        assert!((r.rows[1].informative - 0.4).abs() < 1e-15);
        assert!((r.rows[2].informative - 0.3).abs() < 1e-15);
        assert!((r.rows[0].informative - 0.6).abs() < 1e-15);
        assert!(r.max_numeric_error() < 1e-8, "{}", r.max_numeric_error());
        assert!(r.holds());
        assert!(three_state_check(0.5, &[0.5]).is_err());
        assert!(three_state_check(0.3, &[1.5]).is_err());
    }
}
