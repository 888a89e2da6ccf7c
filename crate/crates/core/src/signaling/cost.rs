use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::{Error, Result, Scalar};

/// Reporting cost `c(r, t)` with the partial derivatives the equilibrium
/// conditions need.
pub trait Cost<T: Scalar>: Send + Sync {
    fn cost(&self, r: T, t: T) -> T;
    /// `∂c/∂r`
    fn d_r(&self, r: T, t: T) -> T;
    /// `∂²c/∂r²`
    fn d_rr(&self, r: T, t: T) -> T;
    /// `∂²c/∂r∂t`
    fn d_rt(&self, r: T, t: T) -> T;
}

/// `c(r, t) = (r − t)²`
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct QuadraticCost;

impl<T: Scalar> Cost<T> for QuadraticCost {
    fn cost(&self, r: T, t: T) -> T {
        (r - t) * (r - t)
    }

    fn d_r(&self, r: T, t: T) -> T {
        T::lit(2.0) * (r - t)
    }

    fn d_rr(&self, _r: T, _t: T) -> T {
        T::lit(2.0)
    }

    fn d_rt(&self, _r: T, _t: T) -> T {
        T::lit(-2.0)
    }
}

type Eval<T> = Arc<dyn Fn(T, T) -> T + Send + Sync>;

/// Cost given by user-supplied closures.
#[derive(Clone)]
pub struct FnCost<T> {
    cost: Eval<T>,
    d_r: Eval<T>,
    d_rr: Eval<T>,
    d_rt: Eval<T>,
}

impl<T> FnCost<T> {
    pub fn new<C, R, RR, RT>(cost: C, d_r: R, d_rr: RR, d_rt: RT) -> Self
    where
        C: Fn(T, T) -> T + Send + Sync + 'static,
        R: Fn(T, T) -> T + Send + Sync + 'static,
        RR: Fn(T, T) -> T + Send + Sync + 'static,
        RT: Fn(T, T) -> T + Send + Sync + 'static,
    {
        Self {
            cost: Arc::new(cost),
            d_r: Arc::new(d_r),
            d_rr: Arc::new(d_rr),
            d_rt: Arc::new(d_rt),
        }
    }
}

impl<T> fmt::Debug for FnCost<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("FnCost")
    }
}

impl<T: Scalar> Cost<T> for FnCost<T> {
    fn cost(&self, r: T, t: T) -> T {
        (self.cost)(r, t)
    }

    fn d_r(&self, r: T, t: T) -> T {
        (self.d_r)(r, t)
    }

    fn d_rr(&self, r: T, t: T) -> T {
        (self.d_rr)(r, t)
    }

    fn d_rt(&self, r: T, t: T) -> T {
        (self.d_rt)(r, t)
    }
}

/// Built-in or custom cost.
#[derive(Debug, Clone)]
pub enum CostFunction<T> {
    Quadratic,
    Custom(FnCost<T>),
}

impl<T: Scalar> CostFunction<T> {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Quadratic => "quadratic",
            Self::Custom(_) => "custom",
        }
    }

    /// Checks `∂c(t,t)/∂r = 0`, `∂²c/∂r² > 0` and `∂²c/∂r∂t < 0` on an
    /// `n × n` grid of `[0, 1] × [0, r_max]`.
    pub fn validate(&self, r_max: T, n: usize) -> Result<()> {
        let n = n.max(2);
        let step = |hi: T, i: usize| hi * T::lit(i as f64) / T::lit((n - 1) as f64);
        let truth_tol = T::lit(1e-10).max(T::epsilon() * T::lit(64.0));
        for i in 0..n {
            let t = step(T::one(), i);
            let slope = self.d_r(t, t);
            if !(slope.abs() <= truth_tol) {
                return Err(Error::InvalidModel(format!(
                    "marginal cost of truthful report is {slope} at t = {t}"
                )));
            }
            for j in 0..n {
                let r = step(r_max, j);
                if !(self.d_rr(r, t) > T::zero()) {
                    return Err(Error::InvalidModel(format!("cost is not strictly convex in r at ({r}, {t})")));
                }
                if !(self.d_rt(r, t) < T::zero()) {
                    return Err(Error::InvalidModel(format!(
                        "marginal cost is not decreasing in type at ({r}, {t})"
                    )));
                }
            }
        }
        Ok(())
    }
}

impl<T: Scalar> Cost<T> for CostFunction<T> {
    fn cost(&self, r: T, t: T) -> T {
        match self {
            Self::Quadratic => QuadraticCost.cost(r, t),
            Self::Custom(c) => c.cost(r, t),
        }
    }

    fn d_r(&self, r: T, t: T) -> T {
        match self {
            Self::Quadratic => QuadraticCost.d_r(r, t),
            Self::Custom(c) => c.d_r(r, t),
        }
    }

    fn d_rr(&self, r: T, t: T) -> T {
        match self {
            Self::Quadratic => QuadraticCost.d_rr(r, t),
            Self::Custom(c) => c.d_rr(r, t),
        }
    }

    fn d_rt(&self, r: T, t: T) -> T {
        match self {
            Self::Quadratic => QuadraticCost.d_rt(r, t),
            Self::Custom(c) => c.d_rt(r, t),
        }
    }
}

/// Grid points where `(∂²c/∂r∂t)/(∂c/∂r) ≤ −1/(1−t)` fails.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SingleCrossingReport<T = f64> {
    pub points_checked: usize,
    /// `(t, r)` pairs violating the condition.
    pub violations: Vec<(T, T)>,
    /// Smallest violating report, if any.
    pub min_violating_r: Option<T>,
}

impl<T: Scalar> SingleCrossingReport<T> {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks the single-crossing condition at every `(t, r)` with `t < 1` and
/// `r > t`; other pairs are skipped.
pub fn check_single_crossing<T: Scalar, C: Cost<T> + ?Sized>(
    cost: &C,
    t_grid: &[T],
    r_grid: &[T],
) -> SingleCrossingReport<T> {
    let slack = T::lit(1e-12).max(T::epsilon() * T::lit(16.0));
    let mut points_checked = 0;
    let mut violations = Vec::new();
    for &t in t_grid {
        if !(t < T::one()) {
            continue;
        }
        let bound = -T::one() / (T::one() - t);
        for &r in r_grid {
            if !(r > t) {
                continue;
            }
            points_checked += 1;
            let ratio = cost.d_rt(r, t) / cost.d_r(r, t);
            if !(ratio <= bound + slack * bound.abs()) {
                violations.push((t, r));
            }
        }
    }
    let min_violating_r = violations.iter().map(|v| v.1).reduce(T::min);
    SingleCrossingReport {
        points_checked,
        violations,
        min_violating_r,
    }
}
