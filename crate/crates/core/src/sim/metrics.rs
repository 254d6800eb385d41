use rayon::prelude::*;

use super::integrate::{integrate, SimulationTrace};
use super::scenario::Scenario;
use crate::error::Result;
use crate::scalar::{lit, Scalar};

/// Fraction of the horizon used for the tail error.
pub const TAIL_FRACTION: f64 = 0.1;

#[derive(Clone, Debug, PartialEq)]
pub struct TrackingMetrics<T: Scalar> {
    /// `max_t φ_i(t)‖e_i(t)‖` per level.
    pub max_occupancy: Vec<T>,
    /// `sup ‖e(t)‖` over the last 10% of the horizon.
    pub tail_error: T,
    pub gain_max: T,
    pub gain_mean: T,
    pub max_input_norm: T,
    /// Set for truncated traces; the values then cover the recorded part only.
    pub partial: bool,
    pub samples: usize,
}

impl<T: Scalar> TrackingMetrics<T> {
    pub fn converged(&self, threshold: T) -> bool {
        !self.partial && self.tail_error < threshold
    }
}

pub fn tracking_metrics<T: Scalar>(trace: &SimulationTrace<T>) -> TrackingMetrics<T> {
    let partial = !trace.completed();
    let samples = &trace.samples;
    let mut max_occupancy = vec![T::zero(); trace.r];
    let (mut gain_max, mut gain_sum, mut max_input_norm) = (T::zero(), T::zero(), T::zero());
    for s in samples {
        for (level, occ) in max_occupancy.iter_mut().enumerate() {
            *occ = occ.max(s.occupancy(level + 1));
        }
        gain_max = gain_max.max(s.k);
        gain_sum += s.k;
        max_input_norm = max_input_norm.max(s.u.norm());
    }
    let gain_mean = if samples.is_empty() {
        T::zero()
    } else {
        gain_sum / lit(samples.len() as f64)
    };
    let last = samples.last().map_or(T::zero(), |s| s.t);
    let horizon = if partial { last } else { trace.t_end };
    // half a step of slack keeps the window boundary on the grid
    let start = horizon * lit::<T>(1.0 - TAIL_FRACTION) - trace.h / lit(2.0);
    let tail_error = samples
        .iter()
        .filter(|s| s.t >= start)
        .fold(T::zero(), |acc, s| acc.max(s.errors.column(0).norm()));
    TrackingMetrics {
        max_occupancy,
        tail_error,
        gain_max,
        gain_mean,
        max_input_norm,
        partial,
        samples: samples.len(),
    }
}

#[derive(Clone, Debug)]
pub struct SweepPoint<T: Scalar> {
    pub k_r: T,
    pub metrics: Result<TrackingMetrics<T>>,
}

/// Runs the scenario once per `k_r`; failures stay local to their entry.
pub fn kr_sweep<T: Scalar>(scn: &Scenario<T>, kr_values: &[T]) -> Vec<SweepPoint<T>> {
    kr_values
        .par_iter()
        .map(|&k_r| SweepPoint {
            k_r,
            metrics: scn
                .with_k_r(k_r)
                .and_then(|s| integrate(&s))
                .map(|trace| tracking_metrics(&trace)),
        })
        .collect()
}
