//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive};

/// Floating-point scalar with the tolerances used by the order predicates,
/// the inequality checks and the garbling LP.
pub trait Scalar: Float + FromPrimitive + Debug + Display + Default + Sum + Send + Sync + 'static {
    /// Absolute slack for stochastic-vector row sums and product-form order checks.
    fn stochastic_tol() -> Self;
    /// Residual slack for weak inequalities in inequality checks.
    fn inequality_tol() -> Self;
    /// Feasibility slack for the garbling LP.
    fn lp_tol() -> Self;
    /// Slack for grid quadrature identities such as densities integrating to one.
    fn quadrature_tol() -> Self;
    /// Slack for grid-level model identities and numerical-derivative checks.
    fn grid_tol() -> Self;

    /// Converts an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    fn stochastic_tol() -> Self {
        1e-12
    }
    fn inequality_tol() -> Self {
        1e-10
    }
    fn lp_tol() -> Self {
        1e-9
    }
    fn quadrature_tol() -> Self {
        1e-8
    }
    fn grid_tol() -> Self {
        1e-6
    }
}

impl Scalar for f32 {
    fn stochastic_tol() -> Self {
        1e-5
    }
    fn inequality_tol() -> Self {
        1e-4
    }
    fn lp_tol() -> Self {
        1e-4
    }
    fn quadrature_tol() -> Self {
        1e-3
    }
    fn grid_tol() -> Self {
        1e-3
    }
}
