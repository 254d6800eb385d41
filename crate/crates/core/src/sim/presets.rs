//! The unstable third-order benchmark: `ẋ = Ax + Bu`, `y = x_1` tracking
//! `2 + sin(10πt)`.

use nalgebra::DVector;

use super::scenario::Scenario;
use crate::error::Result;
use crate::funnel::{ControllerConfig, FunnelFunction};
use crate::internal_model::{default_beta, InternalModelRealization, DEFAULT_BETA_SHIFT};
use crate::lti::StateSpaceSystem;
use crate::poly::Polynomial;
use crate::reference::{ReferenceSignal, Term};
use crate::scalar::{lit, Scalar};

/// Reference frequency `ω₀ = 10π`.
pub fn demo_omega<T: Scalar>() -> T {
    T::pi() * lit(10.0)
}

/// Eigenvalues `{−1, 1, 3}`, relative degree two, unit high-frequency gain
/// and a single invariant zero at `−1`.
pub fn demo_plant<T: Scalar>() -> StateSpaceSystem<T> {
    let v = |x: f64| lit::<T>(x);
    StateSpaceSystem::from_rows(
        3,
        1,
        &[v(0.0), v(1.0), v(0.0), v(-3.0), v(4.0), v(0.0), v(-5.0), v(0.0), v(-1.0)],
        &[v(0.0), v(1.0), v(0.0)],
        &[v(1.0), v(0.0), v(0.0)],
    )
    .expect("benchmark dimensions are consistent")
}

/// `α(s) = s³ + ω₀²s`
pub fn demo_alpha<T: Scalar>() -> Polynomial<T> {
    let w: T = demo_omega();
    Polynomial::new(vec![T::zero(), w * w, T::zero(), T::one()])
}

pub fn demo_reference<T: Scalar>() -> ReferenceSignal<T> {
    ReferenceSignal::new(
        vec![vec![Term::constant(lit(2.0)), Term::sin(T::one(), demo_omega(), T::zero())]],
        demo_alpha(),
    )
    .expect("benchmark reference is well formed")
}

/// `k_1 = 74.13`, `k_2 = 100` with two exponential funnels of time constant
/// 0.1 s.
pub fn demo_controller<T: Scalar>() -> ControllerConfig<T> {
    let v = |x: f64| lit::<T>(x);
    ControllerConfig::new(
        vec![v(74.13)],
        v(100.0),
        vec![
            FunnelFunction::exponential(v(10.0), v(0.2), v(0.1)).expect("valid funnel"),
            FunnelFunction::exponential(v(369.76), v(10.4), v(0.1)).expect("valid funnel"),
        ],
    )
    .expect("benchmark controller is well formed")
}

/// Internal model for `α` with `β = (s + 3)³`.
pub fn demo_internal_model<T: Scalar>() -> Result<InternalModelRealization<T>> {
    let alpha = demo_alpha();
    let beta = default_beta(&alpha, lit(DEFAULT_BETA_SHIFT))?;
    InternalModelRealization::realize(&alpha, &beta, 1)
}

/// `x(0) = (0, 0, 5)`, `z(0) = 0`, 5 s horizon at `h = 1e−4`.
pub fn demo_scenario<T: Scalar>(with_internal_model: bool) -> Result<Scenario<T>> {
    let im = if with_internal_model { Some(demo_internal_model()?) } else { None };
    Scenario::new(
        demo_plant(),
        im,
        demo_reference(),
        demo_controller(),
        DVector::from_vec(vec![T::zero(), T::zero(), lit(5.0)]),
    )
}
