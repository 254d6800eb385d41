//! Random scenarios with automatically designed funnels and gains.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rayon::prelude::*;

use super::integrate::integrate;
use super::metrics::{tracking_metrics, TrackingMetrics};
use super::scenario::Scenario;
use crate::error::{Error, Result};
use crate::funnel::{ControllerConfig, FunnelFunction};
use crate::internal_model::{check_alpha_condition, default_beta, interconnect, InternalModelRealization};
use crate::lti::{random_sigma_mr_with, GeneratorOptions};
use crate::poly::Polynomial;
use crate::reference::{ReferenceSignal, Term};
use crate::scalar::{lit, Scalar};

#[derive(Clone, Copy, Debug)]
pub struct MonteCarloOptions {
    pub k_r: f64,
    pub t_end: f64,
    pub h: f64,
    /// Funnel time constant shared by all levels.
    pub funnel_time: f64,
    /// Asymptotic width of the first funnel.
    pub lambda_1: f64,
}

impl Default for MonteCarloOptions {
    fn default() -> Self {
        Self { k_r: 200.0, t_end: 12.0, h: 5e-4, funnel_time: 0.5, lambda_1: 0.5 }
    }
}

/// `(m, r)` covering `{1, 2} × {1, 2, 3}` as the seed runs through six
/// consecutive values.
pub fn shape_for_seed(seed: u64) -> (usize, usize) {
    (1 + (seed % 2) as usize, 1 + ((seed / 2) % 3) as usize)
}

/// Random plant from the admissible class, internal model for
/// `α = s(s² + ω²)`, a sinusoid-plus-offset reference and funnels/gains
/// chosen so that K1 and K2 hold.
pub fn random_scenario<T: Scalar>(seed: u64, opts: &MonteCarloOptions) -> Result<Scenario<T>> {
    let (m, r) = shape_for_seed(seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x2545_f491_4f6c_dd1d));
    let q = rng.random_range(1..=2usize);
    let plant = random_sigma_mr_with::<T>(m, r, q, seed, GeneratorOptions { orthogonal_transform: true });

    let omega = rng.random_range(0.5..2.0);
    let alpha = Polynomial::new(vec![T::zero(), lit(omega * omega), T::zero(), T::one()]);
    if !check_alpha_condition(&plant, &alpha) {
        return Err(Error::Scenario(format!("seed {seed}: alpha collides with a plant zero")));
    }
    let beta = default_beta(&alpha, lit(3.0))?;
    let im = InternalModelRealization::realize(&alpha, &beta, m)?;

    let channels = (0..m)
        .map(|_| {
            vec![
                Term::constant(lit(rng.random_range(-1.0..1.0))),
                Term::sin(
                    lit(rng.random_range(0.5..1.5)),
                    lit(omega),
                    lit(rng.random_range(0.0..std::f64::consts::TAU)),
                ),
            ]
        })
        .collect();
    let reference = ReferenceSignal::new(channels, alpha)?;
    let x0 = DVector::from_fn(plant.n(), |_, _| lit(rng.random_range(-0.5..0.5)));

    let ic = interconnect(&plant, &im)?;
    let mut state0 = DVector::zeros(ic.system().n());
    state0.rows_mut(0, plant.n()).copy_from(&x0);
    let refs = reference.evaluate(T::zero(), r - 1);
    let mut e_derivs = DMatrix::zeros(m, r);
    for (j, map) in ic.system().output_derivative_maps(r).iter().enumerate() {
        e_derivs.set_column(j, &(map * &state0 - refs.column(j)));
    }

    let controller = design_controller(&e_derivs, lit(opts.k_r), lit(opts.funnel_time), lit(opts.lambda_1))?;
    Scenario::new(plant, Some(im), reference, controller, x0)?.with_horizon(lit(opts.t_end), lit(opts.h))
}

/// Greedy level-by-level design: funnel `i + 1` is funnel `i` scaled by `ρ_i`,
/// so `‖φ_i/φ_{i+1}‖∞ = ρ_i` and `k_i = ‖φ̇_i/φ_i‖∞ + ρ_i + 1` satisfies K1
/// with unit margin. The first funnel starts at four times `‖e_1(0)‖`, and
/// `ρ_i` grows until `φ_{i+1}(0)‖e_{i+1}(0)‖` lies below the midpoint between
/// `φ_i(0)‖e_i(0)‖` and one.
pub fn design_controller<T: Scalar>(
    e_derivs: &DMatrix<T>,
    k_r: T,
    funnel_time: T,
    lambda_1: T,
) -> Result<ControllerConfig<T>> {
    let r = e_derivs.ncols();
    let half = lit::<T>(0.5);
    let big_1 = (e_derivs.column(0).norm() * lit(4.0)).max(lambda_1 * lit(4.0));
    let mut occupancy = e_derivs.column(0).norm() / big_1;
    let mut funnels = vec![FunnelFunction::exponential(big_1, lambda_1, funnel_time)?];
    let mut gains = Vec::with_capacity(r.saturating_sub(1));
    let mut cascade = Polynomial::one();
    for _ in 1..r {
        let current = funnels.last().expect("non-empty").clone();
        let (big, small) = match current {
            FunnelFunction::Exponential { big_lambda, lambda, .. } => (big_lambda, lambda),
            _ => unreachable!("design produces exponential funnels only"),
        };
        let mut rho = lit::<T>(2.0);
        let mut accepted = None;
        for _ in 0..200 {
            let k = current.rate_sup() + rho + T::one();
            let next_poly = &cascade * &Polynomial::linear(k);
            let e_next = (0..r).fold(DVector::zeros(e_derivs.nrows()), |acc, j| {
                acc + e_derivs.column(j) * next_poly.coeff(j)
            });
            let next_occupancy = e_next.norm() / (rho * big);
            if next_occupancy < half * (occupancy + T::one()) {
                occupancy = next_occupancy;
                accepted = Some((k, next_poly));
                break;
            }
            rho *= lit(1.5);
        }
        let (k, next_poly) = accepted
            .ok_or_else(|| Error::DesignCondition("funnel scaling did not converge".into()))?;
        gains.push(k);
        cascade = next_poly;
        funnels.push(FunnelFunction::exponential(rho * big, rho * small, funnel_time)?);
    }
    ControllerConfig::new(gains, k_r, funnels)
}

/// One Monte Carlo run.
#[derive(Clone, Debug)]
pub struct MonteCarloOutcome<T: Scalar> {
    pub seed: u64,
    pub m: usize,
    pub r: usize,
    /// Bounds `ε_1..ε_{r−1}` of the validated design.
    pub epsilon: Vec<T>,
    pub metrics: TrackingMetrics<T>,
}

/// Slack allowed on top of `ε_i` when checking the cascade bounds.
pub const EPSILON_SLACK: f64 = 1e-6;

impl<T: Scalar> MonteCarloOutcome<T> {
    /// `max_t φ_i‖e_i‖ ≤ ε_i + slack` for every `i < r` over a completed run.
    pub fn cascade_bounds_hold(&self) -> bool {
        !self.metrics.partial
            && self
                .epsilon
                .iter()
                .zip(&self.metrics.max_occupancy)
                .all(|(&eps, &occ)| occ <= eps + lit(EPSILON_SLACK))
    }
}

/// Builds, validates and integrates one scenario per seed.
pub fn run_suite<T: Scalar>(
    seeds: impl IntoParallelIterator<Item = u64>,
    opts: &MonteCarloOptions,
) -> Vec<(u64, Result<MonteCarloOutcome<T>>)> {
    let mut out: Vec<_> = seeds
        .into_par_iter()
        .map(|seed| (seed, run_one(seed, opts)))
        .collect();
    out.sort_by_key(|(seed, _)| *seed);
    out
}

fn run_one<T: Scalar>(seed: u64, opts: &MonteCarloOptions) -> Result<MonteCarloOutcome<T>> {
    let scn = random_scenario::<T>(seed, opts)?;
    let report = scn.validate();
    let epsilon = report.epsilon.clone().ok_or_else(|| Error::DesignCondition(report.issues.join("; ")))?;
    let trace = integrate(&scn)?;
    Ok(MonteCarloOutcome {
        seed,
        m: trace.m,
        r: trace.r,
        epsilon,
        metrics: tracking_metrics(&trace),
    })
}
