//! Funnel boundaries, the cascaded error/gain law and its design conditions.
//!
//! A funnel is handled through its boundary `ψ = 1/φ`; `ψ(0) = ∞` encodes
//! `φ(0) = 0`, i.e. no restriction on the initial error.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, FunnelViolation, Result};
use crate::lti::{strict_relative_degree, StateSpaceSystem};
use crate::poly::Polynomial;
use crate::reference::ReferenceSignal;
use crate::scalar::{lit, Scalar};

/// Lower bound on `1 − φ_r²‖e_r‖²` before the gain is declared singular.
pub const DELTA_GUARD: f64 = 1e-9;
const CUSTOM_GRID_POINTS: usize = 100_000;
const SEARCH_GRID_POINTS: usize = 4_000;
const GOLDEN_TOL: f64 = 1e-10;

type ScalarFn<T> = Arc<dyn Fn(T) -> T + Send + Sync>;

/// User-supplied `φ` with its derivative. `time_scale` bounds the window in
/// which the transient happens; `limit_phi` is `lim_{t→∞} φ(t)`.
#[derive(Clone)]
pub struct CustomFunnel<T: Scalar> {
    pub phi: ScalarFn<T>,
    pub phi_dot: ScalarFn<T>,
    pub time_scale: T,
    pub limit_phi: T,
}

impl<T: Scalar> fmt::Debug for CustomFunnel<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomFunnel")
            .field("time_scale", &self.time_scale)
            .field("limit_phi", &self.limit_phi)
            .finish_non_exhaustive()
    }
}

#[derive(Clone, Debug)]
pub enum FunnelFunction<T: Scalar> {
    /// `ψ(t) = (Λ − λ)e^{−t/T} + λ`
    Exponential { big_lambda: T, lambda: T, t_const: T },
    /// `φ(t) = (1 − e^{−t/T})/λ`: boundary starts at infinity and decays to `λ`.
    UnboundedInitial { lambda: T, t_const: T },
    Custom(CustomFunnel<T>),
}

impl<T: Scalar> FunnelFunction<T> {
    pub fn exponential(big_lambda: T, lambda: T, t_const: T) -> Result<Self> {
        if !(lambda > T::zero() && big_lambda >= lambda && t_const > T::zero()) {
            return Err(Error::Domain(format!(
                "exponential funnel needs Lambda >= lambda > 0 and T > 0, got Lambda = {big_lambda}, lambda = {lambda}, T = {t_const}"
            )));
        }
        Ok(Self::Exponential { big_lambda, lambda, t_const })
    }

    pub fn unbounded_initial(lambda: T, t_const: T) -> Result<Self> {
        if !(lambda > T::zero() && t_const > T::zero()) {
            return Err(Error::Domain(format!(
                "funnel needs lambda > 0 and T > 0, got lambda = {lambda}, T = {t_const}"
            )));
        }
        Ok(Self::UnboundedInitial { lambda, t_const })
    }

    /// Constant boundary `ψ ≡ λ`.
    pub fn constant(lambda: T) -> Result<Self> {
        Self::exponential(lambda, lambda, T::one())
    }

    pub fn custom(f: CustomFunnel<T>) -> Result<Self> {
        if !(f.time_scale > T::zero() && f.limit_phi > T::zero()) {
            return Err(Error::Domain(
                "custom funnel needs a positive time scale and limit".into(),
            ));
        }
        Ok(Self::Custom(f))
    }

    pub fn phi(&self, t: T) -> T {
        match self {
            Self::Exponential { .. } => T::one() / self.psi(t),
            Self::UnboundedInitial { lambda, t_const } => (T::one() - (-t / *t_const).exp()) / *lambda,
            Self::Custom(c) => (c.phi)(t),
        }
    }

    pub fn phi_dot(&self, t: T) -> T {
        match self {
            Self::Exponential { big_lambda, lambda, t_const } => {
                let decay = (-t / *t_const).exp();
                let psi = (*big_lambda - *lambda) * decay + *lambda;
                (*big_lambda - *lambda) / *t_const * decay / (psi * psi)
            }
            Self::UnboundedInitial { lambda, t_const } => (-t / *t_const).exp() / (*t_const * *lambda),
            Self::Custom(c) => (c.phi_dot)(t),
        }
    }

    /// Boundary `1/φ`; infinite where `φ = 0`.
    pub fn psi(&self, t: T) -> T {
        match self {
            Self::Exponential { big_lambda, lambda, t_const } => {
                (*big_lambda - *lambda) * (-t / *t_const).exp() + *lambda
            }
            _ => {
                let phi = self.phi(t);
                if phi > T::zero() {
                    T::one() / phi
                } else {
                    infinity()
                }
            }
        }
    }

    pub fn has_unbounded_initial(&self) -> bool {
        !(self.phi(T::zero()) > T::zero())
    }

    /// Characteristic transient duration.
    pub fn time_scale(&self) -> T {
        match self {
            Self::Exponential { t_const, .. } | Self::UnboundedInitial { t_const, .. } => *t_const,
            Self::Custom(c) => c.time_scale,
        }
    }

    /// `lim_{t→∞} ψ(t)`.
    pub fn asymptotic_psi(&self) -> T {
        match self {
            Self::Exponential { lambda, .. } | Self::UnboundedInitial { lambda, .. } => *lambda,
            Self::Custom(c) => T::one() / c.limit_phi,
        }
    }

    /// `‖φ̇/φ‖∞`; infinite when `φ(0) = 0`.
    pub fn rate_sup(&self) -> T {
        match self {
            Self::Exponential { big_lambda, lambda, t_const } => {
                (*big_lambda - *lambda) / (*t_const * *big_lambda)
            }
            Self::UnboundedInitial { .. } => infinity(),
            Self::Custom(c) => {
                let horizon = c.time_scale * lit(20.0);
                let step = horizon / lit((CUSTOM_GRID_POINTS - 1) as f64);
                let mut best = T::zero();
                for k in 0..CUSTOM_GRID_POINTS {
                    let t = step * lit(k as f64);
                    let phi = (c.phi)(t);
                    if !(phi > T::zero()) {
                        return infinity();
                    }
                    best = best.max(((c.phi_dot)(t) / phi).abs());
                }
                best
            }
        }
    }
}

fn infinity<T: Scalar>() -> T {
    lit(f64::INFINITY)
}

/// `sup_{t≥0} φ_i/φ_{i+1} = sup ψ_{i+1}/ψ_i`.
pub fn boundary_ratio_sup<T: Scalar>(inner: &FunnelFunction<T>, outer: &FunnelFunction<T>) -> T {
    use FunnelFunction::Exponential as E;
    if outer.has_unbounded_initial() {
        return infinity();
    }
    let limit = outer.asymptotic_psi() / inner.asymptotic_psi();
    if let (
        E { big_lambda: l1, lambda: s1, t_const: t1 },
        E { big_lambda: l2, lambda: s2, t_const: t2 },
    ) = (inner, outer)
    {
        if t1 == t2 {
            // a Möbius map of e^{−t/T}: monotone, extremes at the ends
            return (*l2 / *l1).max(*s2 / *s1);
        }
    }
    let ratio = |t: T| outer.psi(t) / inner.psi(t);
    let horizon = inner.time_scale().max(outer.time_scale()) * lit(20.0);
    let points = match (inner, outer) {
        (FunnelFunction::Custom(_), _) | (_, FunnelFunction::Custom(_)) => CUSTOM_GRID_POINTS,
        _ => SEARCH_GRID_POINTS,
    };
    let step = horizon / lit((points - 1) as f64);
    let (mut best_k, mut best) = (0, ratio(T::zero()));
    for k in 1..points {
        let v = ratio(step * lit(k as f64));
        if v > best {
            best = v;
            best_k = k;
        }
    }
    let lo = step * lit(best_k.saturating_sub(1) as f64);
    let hi = step * lit((best_k + 1).min(points - 1) as f64);
    best.max(golden_max(ratio, lo, hi)).max(limit)
}

/// Golden-section search for the maximum of a unimodal function on `[a, b]`.
fn golden_max<T: Scalar>(f: impl Fn(T) -> T, mut a: T, mut b: T) -> T {
    let inv_phi = lit::<T>(0.618_033_988_749_894_8);
    let tol = lit::<T>(GOLDEN_TOL);
    let mut c = b - (b - a) * inv_phi;
    let mut d = a + (b - a) * inv_phi;
    let (mut fc, mut fd) = (f(c), f(d));
    // the iteration cap keeps single precision from stalling above `tol`
    for _ in 0..200 {
        if (b - a).abs() <= tol {
            break;
        }
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - (b - a) * inv_phi;
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + (b - a) * inv_phi;
            fd = f(d);
        }
    }
    f((a + b) / lit(2.0)).max(fc).max(fd)
}

/// Gains `k_1..k_{r−1}`, `k_r` and funnels `φ_1..φ_r`.
#[derive(Clone, Debug)]
pub struct ControllerConfig<T: Scalar> {
    k: Vec<T>,
    k_r: T,
    funnels: Vec<FunnelFunction<T>>,
    /// `p_i(s) = (s + k_1)⋯(s + k_{i−1})`, `i = 1..=r`
    cascade: Vec<Polynomial<T>>,
    /// Row `i` holds the coefficients of `p_{i+1}`.
    cascade_matrix: DMatrix<T>,
}

impl<T: Scalar> ControllerConfig<T> {
    pub fn new(k: Vec<T>, k_r: T, funnels: Vec<FunnelFunction<T>>) -> Result<Self> {
        let r = funnels.len();
        if r == 0 {
            return Err(Error::Domain("at least one funnel is required".into()));
        }
        if k.len() + 1 != r {
            return Err(Error::Dimension(format!(
                "{r} funnels need {} cascade gains, got {}",
                r - 1,
                k.len()
            )));
        }
        if let Some(bad) = k.iter().chain(std::iter::once(&k_r)).find(|&&v| !(v > T::zero())) {
            return Err(Error::Domain(format!("all gains must be positive, got {bad}")));
        }
        let mut cascade = vec![Polynomial::one()];
        for &ki in &k {
            let next = cascade.last().expect("non-empty") * &Polynomial::linear(ki);
            cascade.push(next);
        }
        let cascade_matrix = DMatrix::from_fn(r, r, |i, j| cascade[i].coeff(j));
        Ok(Self { k, k_r, funnels, cascade, cascade_matrix })
    }

    /// Relative degree the controller is built for.
    pub fn r(&self) -> usize {
        self.funnels.len()
    }

    pub fn k(&self) -> &[T] {
        &self.k
    }

    pub fn k_r(&self) -> T {
        self.k_r
    }

    pub fn funnels(&self) -> &[FunnelFunction<T>] {
        &self.funnels
    }

    /// `p_i` for `i = 1..=r`.
    pub fn cascade_polynomial(&self, i: usize) -> &Polynomial<T> {
        &self.cascade[i - 1]
    }

    pub fn with_k_r(&self, k_r: T) -> Result<Self> {
        Self::new(self.k.clone(), k_r, self.funnels.clone())
    }

    /// `e_i = p_i(d/dt)e` for `e_derivs = (e, ė, …, e^{(r−1)})` (`m × r`).
    pub fn cascade_errors(&self, e_derivs: &DMatrix<T>) -> DMatrix<T> {
        e_derivs * self.cascade_matrix.transpose()
    }

    /// Inverse of [`ControllerConfig::cascade_errors`] by forward
    /// substitution (each `p_i` is monic of degree `i − 1`).
    pub fn derivatives_from_cascade(&self, cascade: &DMatrix<T>) -> DMatrix<T> {
        let r = self.r();
        let mut d = DMatrix::zeros(cascade.nrows(), r);
        for i in 0..r {
            let mut col = cascade.column(i).into_owned();
            for j in 0..i {
                col -= d.column(j) * self.cascade_matrix[(i, j)];
            }
            d.set_column(i, &col);
        }
        d
    }
}

/// Pairs `(‖φ̇_i/φ_i‖∞, ‖φ_i/φ_{i+1}‖∞)` for `i = 1..r−1`.
pub fn sup_ratios<T: Scalar>(cfg: &ControllerConfig<T>) -> Vec<(T, T)> {
    cfg.funnels
        .windows(2)
        .map(|w| (w[0].rate_sup(), boundary_ratio_sup(&w[0], &w[1])))
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct K1Report<T: Scalar> {
    pub satisfied: bool,
    /// `k_i − ‖φ̇_i/φ_i‖∞ − ‖φ_i/φ_{i+1}‖∞`
    pub margins: Vec<T>,
}

pub fn check_k1<T: Scalar>(cfg: &ControllerConfig<T>) -> K1Report<T> {
    let margins: Vec<T> = sup_ratios(cfg)
        .iter()
        .zip(&cfg.k)
        .map(|(&(rate, ratio), &ki)| ki - (rate + ratio))
        .collect();
    let satisfied = margins.iter().all(|&m| m > T::zero());
    K1Report { satisfied, margins }
}

/// `e_i(0)` as columns of an `m × r` matrix, from the full initial state of
/// `sys` (plant, or plant followed by internal model).
pub fn initial_errors<T: Scalar>(
    sys: &StateSpaceSystem<T>,
    state0: &DVector<T>,
    reference: &ReferenceSignal<T>,
    cfg: &ControllerConfig<T>,
) -> Result<DMatrix<T>> {
    let r = cfg.r();
    if state0.len() != sys.n() || reference.m() != sys.m() {
        return Err(Error::Dimension(format!(
            "state of length {} / reference with {} channels for a system with n = {}, m = {}",
            state0.len(),
            reference.m(),
            sys.n(),
            sys.m()
        )));
    }
    match strict_relative_degree(sys, sys.n())? {
        Some(actual) if actual == r => {}
        other => {
            return Err(Error::Domain(format!(
                "controller built for r = {r}, system has relative degree {other:?}"
            )))
        }
    }
    let e_derivs = output_error_derivatives(sys, state0, reference, T::zero(), r);
    Ok(cfg.cascade_errors(&e_derivs))
}

/// `(e, ė, …, e^{(r−1)})` with `y^{(j)} = CA^j x`.
pub(crate) fn output_error_derivatives<T: Scalar>(
    sys: &StateSpaceSystem<T>,
    state: &DVector<T>,
    reference: &ReferenceSignal<T>,
    t: T,
    r: usize,
) -> DMatrix<T> {
    let refs = reference.evaluate(t, r - 1);
    let mut d = DMatrix::zeros(sys.m(), r);
    for (j, map) in sys.output_derivative_maps(r).iter().enumerate() {
        d.set_column(j, &(map * state - refs.column(j)));
    }
    d
}

#[derive(Clone, Debug, PartialEq)]
pub struct K2Report<T: Scalar> {
    pub satisfied: bool,
    /// `φ_i(0)‖e_i(0)‖`
    pub occupancies: Vec<T>,
}

pub fn check_k2<T: Scalar>(cfg: &ControllerConfig<T>, e0: &DMatrix<T>) -> K2Report<T> {
    let occupancies: Vec<T> = cfg
        .funnels
        .iter()
        .enumerate()
        .map(|(i, f)| f.phi(T::zero()) * e0.column(i).norm())
        .collect();
    let satisfied = occupancies.iter().all(|&o| o < T::one());
    K2Report { satisfied, occupancies }
}

/// `ε_i = max{φ_i(0)‖e_i(0)‖, (‖φ̇_i/φ_i‖∞ + ‖φ_i/φ_{i+1}‖∞)/k_i}` for
/// `i = 1..r−1`.
pub fn epsilon_bounds<T: Scalar>(cfg: &ControllerConfig<T>, e0: &DMatrix<T>) -> Result<Vec<T>> {
    let k1 = check_k1(cfg);
    let k2 = check_k2(cfg, e0);
    if !k1.satisfied || !k2.satisfied {
        return Err(Error::DesignCondition(format!(
            "epsilon bounds need K1 and K2 (K1 margins {:?}, K2 occupancies {:?})",
            k1.margins, k2.occupancies
        )));
    }
    let eps: Vec<T> = sup_ratios(cfg)
        .iter()
        .zip(&cfg.k)
        .zip(&k2.occupancies)
        .map(|((&(rate, ratio), &ki), &occ)| occ.max((rate + ratio) / ki))
        .collect();
    debug_assert!(eps.iter().all(|&e| e < T::one()));
    Ok(eps)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ControlOutput<T: Scalar> {
    /// Columns `e_1..e_r`.
    pub cascade: DMatrix<T>,
    pub k: T,
    pub w: DVector<T>,
}

/// `k = k_r/(1 − φ_r²‖e_r‖²)`, `w = −k e_r`.
pub fn control_law<T: Scalar>(
    cfg: &ControllerConfig<T>,
    e_derivs: &DMatrix<T>,
    t: T,
) -> Result<ControlOutput<T>> {
    let r = cfg.r();
    let cascade = cfg.cascade_errors(e_derivs);
    let e_r = cascade.column(r - 1).into_owned();
    let norm = e_r.norm();
    let occupancy = cfg.funnels[r - 1].phi(t) * norm;
    let denom = T::one() - occupancy * occupancy;
    if !(denom > lit::<T>(DELTA_GUARD)) {
        return Err(Error::FunnelViolation(FunnelViolation {
            t: crate::scalar::to_f64(t),
            level: r,
            error_norm: crate::scalar::to_f64(norm),
            psi: crate::scalar::to_f64(cfg.funnels[r - 1].psi(t)),
        }));
    }
    let k = cfg.k_r / denom;
    let w = -e_r * k;
    Ok(ControlOutput { cascade, k, w })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn example_config() -> ControllerConfig<f64> {
        ControllerConfig::new(
            vec![74.13],
            100.0,
            vec![
                FunnelFunction::exponential(10.0, 0.2, 0.1).unwrap(),
                FunnelFunction::exponential(369.76, 10.4, 0.1).unwrap(),
            ],
        )
        .unwrap()
    }

    #[test]
    fn rejects_invalid_funnels_and_gains() {
        assert!(FunnelFunction::exponential(0.1, 0.2, 1.0).is_err());
        assert!(FunnelFunction::exponential(1.0, 0.0, 1.0).is_err());
        assert!(FunnelFunction::exponential(1.0, 0.5, 0.0).is_err());
        let f = FunnelFunction::exponential(1.0, 0.5, 1.0).unwrap();
        assert!(ControllerConfig::new(vec![], 1.0, vec![f.clone(), f.clone()]).is_err());
        assert!(ControllerConfig::new(vec![-1.0], 1.0, vec![f.clone(), f.clone()]).is_err());
        assert!(ControllerConfig::new(vec![], 0.0, vec![f]).is_err());
    }

    #[test]
    fn example_sup_ratios() {
        let s = sup_ratios(&example_config());
        assert_eq!(s.len(), 1);
        assert!((s[0].0 - 9.8).abs() < 1e-12);
        assert!((s[0].1 - 52.0).abs() < 1e-12);
    }

    #[test]
    fn numeric_ratio_matches_analytic_case() {
        let f1 = FunnelFunction::exponential(10.0f64, 0.2, 0.1).unwrap();
        let f2 = FunnelFunction::exponential(369.76, 10.4, 0.1 + 1e-12).unwrap();
        assert!((boundary_ratio_sup(&f1, &f2) - 52.0).abs() < 1e-6);
        // interior maximum when the outer funnel decays slower
        let f3 = FunnelFunction::exponential(10.0, 1.0, 1.0).unwrap();
        let f4 = FunnelFunction::exponential(10.0, 1.0, 2.0).unwrap();
        let sup = boundary_ratio_sup(&f3, &f4);
        let dense = (0..200_000)
            .map(|k| k as f64 * 1e-4)
            .map(|t| f4.psi(t) / f3.psi(t))
            .fold(0.0f64, f64::max);
        assert!(sup >= dense - 1e-9 && sup > 1.0 + 1e-3);
    }

    #[test]
    fn constant_boundaries() {
        let cfg = ControllerConfig::new(
            vec![5.0],
            1.0,
            vec![FunnelFunction::constant(2.0).unwrap(), FunnelFunction::constant(3.0).unwrap()],
        )
        .unwrap();
        assert_eq!(sup_ratios(&cfg), vec![(0.0, 1.5)]);
    }

    #[test]
    fn k1_examples() {
        let rep = check_k1(&example_config());
        assert!(rep.satisfied);
        assert!((rep.margins[0] - 12.33).abs() < 1e-9);
        let f = example_config().funnels().to_vec();
        let tight = ControllerConfig::new(vec![61.8], 100.0, f).unwrap();
        assert!(!check_k1(&tight).satisfied);
        let single = ControllerConfig::new(vec![], 3.0, vec![FunnelFunction::constant(1.0).unwrap()]).unwrap();
        let rep = check_k1(&single);
        assert!(rep.satisfied && rep.margins.is_empty());
    }

    #[test]
    fn k2_and_epsilon_for_example_errors() {
        let cfg = example_config();
        let e0 = cfg.cascade_errors(&DMatrix::from_row_slice(1, 2, &[-2.0, -10.0 * PI]));
        assert!((e0[(0, 1)] + 179.676).abs() < 1e-3);
        let k2 = check_k2(&cfg, &e0);
        assert!(k2.satisfied);
        assert!((k2.occupancies[0] - 0.2).abs() < 1e-12);
        assert!((k2.occupancies[1] - 0.486).abs() < 1e-3);
        let eps = epsilon_bounds(&cfg, &e0).unwrap();
        assert!((eps[0] - 61.8 / 74.13).abs() < 1e-12);
    }

    #[test]
    fn epsilon_selects_the_initial_term() {
        let cfg = ControllerConfig::new(
            vec![4.0],
            1.0,
            vec![FunnelFunction::constant(1.0).unwrap(), FunnelFunction::constant(2.0).unwrap()],
        )
        .unwrap();
        let e0 = DMatrix::from_row_slice(1, 2, &[0.99, 0.0]);
        assert_eq!(epsilon_bounds(&cfg, &e0).unwrap(), vec![0.99]);
        let e0 = DMatrix::from_row_slice(1, 2, &[1.2, 0.0]);
        assert!(!check_k2(&cfg, &e0).satisfied);
        assert!(epsilon_bounds(&cfg, &e0).is_err());
    }

    #[test]
    fn unbounded_initial_funnel_accepts_any_start() {
        let f = FunnelFunction::unbounded_initial(0.5f64, 1.0).unwrap();
        assert!(f.has_unbounded_initial());
        let cfg = ControllerConfig::new(vec![], 2.0, vec![f.clone()]).unwrap();
        let e0 = DMatrix::from_row_slice(1, 1, &[1e6]);
        assert!(check_k2(&cfg, &e0).satisfied);
        assert!((f.psi(50.0) - 0.5).abs() < 1e-12);
        // such a funnel at an inner level makes the rate term infinite
        assert!(f.rate_sup().is_infinite());
    }

    #[test]
    fn custom_funnel_uses_grid() {
        let f = FunnelFunction::custom(CustomFunnel {
            phi: Arc::new(|t: f64| 1.0 / (4.0 * (-t).exp() + 1.0)),
            phi_dot: Arc::new(|t: f64| {
                let psi = 4.0 * (-t).exp() + 1.0;
                4.0 * (-t).exp() / (psi * psi)
            }),
            time_scale: 1.0,
            limit_phi: 1.0,
        })
        .unwrap();
        let analytic = FunnelFunction::exponential(5.0, 1.0, 1.0).unwrap();
        assert!((f.rate_sup() - analytic.rate_sup()).abs() < 1e-9);
        let outer = FunnelFunction::exponential(10.0, 2.0, 1.0).unwrap();
        assert!((boundary_ratio_sup(&f, &outer) - 2.0).abs() < 1e-9);
    }

    #[test]
    fn control_law_examples() {
        let cfg = example_config();
        let zero = control_law(&cfg, &DMatrix::zeros(1, 2), 0.3).unwrap();
        assert_eq!(zero.k, 100.0);
        assert_eq!(zero.w[0], 0.0);

        let single = ControllerConfig::new(vec![], 8.0f64, vec![FunnelFunction::constant(2.0).unwrap()]).unwrap();
        let out = control_law(&single, &DMatrix::from_row_slice(1, 1, &[1.0]), 0.0).unwrap();
        assert!((out.k - 8.0 * 4.0 / 3.0).abs() < 1e-12);
        assert!((out.w[0] + out.k).abs() < 1e-12);

        let out = control_law(&cfg, &DMatrix::from_row_slice(1, 2, &[-2.0, -10.0 * PI]), 0.0).unwrap();
        assert!((out.cascade[(0, 1)] + 179.676).abs() < 1e-3);
        assert!(out.k >= cfg.k_r());

        let err = control_law(&single, &DMatrix::from_row_slice(1, 1, &[2.0]), 0.0).unwrap_err();
        assert!(matches!(err, Error::FunnelViolation(v) if v.level == 1));
    }

    #[test]
    fn derivative_reconstruction_roundtrip() {
        let f = FunnelFunction::constant(1.0).unwrap();
        let cfg = ControllerConfig::new(vec![2.0, 3.5, 0.7], 1.0, vec![f.clone(), f.clone(), f.clone(), f]).unwrap();
        let d = DMatrix::from_row_slice(2, 4, &[1.0, -2.0, 0.5, 3.0, 0.0, 4.0, -1.0, 2.5]);
        let back = cfg.derivatives_from_cascade(&cfg.cascade_errors(&d));
        assert!((back - d).amax() < 1e-12);
        assert_eq!(cfg.cascade_polynomial(3).coeffs(), &[7.0, 5.5, 1.0]);
    }

    #[test]
    fn initial_errors_for_example() {
        let plant = StateSpaceSystem::from_rows(
            3,
            1,
            &[0.0, 1.0, 0.0, -3.0, 4.0, 0.0, -5.0, 0.0, -1.0],
            &[0.0, 1.0, 0.0],
            &[1.0, 0.0, 0.0],
        )
        .unwrap();
        let w0 = 10.0 * PI;
        let reference = ReferenceSignal::new(
            vec![vec![
                crate::reference::Term::constant(2.0),
                crate::reference::Term::sin(1.0, w0, 0.0),
            ]],
            Polynomial::new(vec![0.0, w0 * w0, 0.0, 1.0]),
        )
        .unwrap();
        let cfg = example_config();
        let e0 = initial_errors(&plant, &DVector::from_vec(vec![0.0, 0.0, 5.0]), &reference, &cfg).unwrap();
        assert_eq!(e0[(0, 0)], -2.0);
        assert!((e0[(0, 1)] - (-10.0 * PI - 74.13 * 2.0)).abs() < 1e-9);

        // exact tracking start
        let e0 = initial_errors(&plant, &DVector::from_vec(vec![2.0, w0, 0.0]), &reference, &cfg).unwrap();
        assert!(e0.amax() < 1e-12);

        let wrong = ControllerConfig::new(vec![], 1.0, vec![FunnelFunction::constant(1.0).unwrap()]).unwrap();
        assert!(initial_errors(&plant, &DVector::zeros(3), &reference, &wrong).is_err());
    }
}
