//! Closed-loop assembly, fixed-step integration and tracking metrics.

mod integrate;
mod metrics;
pub mod montecarlo;
pub mod presets;
mod scenario;

pub use integrate::{
    closed_loop_rhs, integrate, record_count, simulate, ClosedLoop, Evaluation, Sample,
    SimulationTrace, Termination,
};
pub use metrics::{kr_sweep, tracking_metrics, SweepPoint, TrackingMetrics, TAIL_FRACTION};
pub use scenario::{Scenario, ValidationReport, DEFAULT_STEP, DEFAULT_T_END};
