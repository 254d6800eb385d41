//! Funnel control with an internal model for linear MIMO plants.
//!
//! The crate covers the whole design loop: structural analysis of a plant
//! (relative degree, high-frequency gain, invariant zeros), synthesis of an
//! internal model for a reference class `α(d/dt) y_ref = 0`, the cascaded
//! funnel controller with its design conditions, and fixed-step closed-loop
//! simulation with tracking metrics.
//!
//! All numerics are generic over [`Scalar`] (`f32` or `f64`); the `*64` and
//! `*32` aliases below fix the precision.

pub mod error;
pub mod funnel;
pub mod internal_model;
pub mod lti;
pub mod poly;
pub mod reference;
pub mod scalar;
pub mod sim;

pub use error::{Error, FunnelViolation, Result};
pub use funnel::{ControllerConfig, FunnelFunction};
pub use internal_model::{Interconnection, InternalModelRealization};
pub use lti::{ClassificationReport, StateSpaceSystem};
pub use poly::Polynomial;
pub use reference::{ReferenceSignal, Term, TermKind};
pub use scalar::Scalar;
pub use sim::{Scenario, SimulationTrace, TrackingMetrics};

pub type Polynomial64 = Polynomial<f64>;
pub type StateSpaceSystem64 = StateSpaceSystem<f64>;
pub type InternalModel64 = InternalModelRealization<f64>;
pub type ReferenceSignal64 = ReferenceSignal<f64>;
pub type FunnelFunction64 = FunnelFunction<f64>;
pub type ControllerConfig64 = ControllerConfig<f64>;
pub type Scenario64 = Scenario<f64>;
pub type SimulationTrace64 = SimulationTrace<f64>;

pub type Polynomial32 = Polynomial<f32>;
pub type StateSpaceSystem32 = StateSpaceSystem<f32>;
pub type Scenario32 = Scenario<f32>;
