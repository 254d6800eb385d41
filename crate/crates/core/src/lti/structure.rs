use nalgebra::{Complex, DMatrix};

use super::system::{max_norm, StateSpaceSystem};
use super::zeros::invariant_zeros;
use crate::error::{Error, Result};
use crate::scalar::{lit, tol, Scalar};

const MARKOV_TOL: f64 = 1e-10;
const GAMMA_PD_TOL: f64 = 1e-10;
/// Zeros must have real part below `-MIN_PHASE_MARGIN`.
pub const MIN_PHASE_MARGIN: f64 = 1e-9;

/// Least `r <= r_max` with `CA^kB = 0` for `k < r − 1` and `CA^{r−1}B`
/// invertible. Thresholds are relative to `‖C‖·‖A^k‖·‖B‖` (max norms).
pub fn strict_relative_degree<T: Scalar>(
    sys: &StateSpaceSystem<T>,
    r_max: usize,
) -> Result<Option<usize>> {
    if r_max == 0 || r_max > sys.n() {
        return Err(Error::Domain(format!(
            "r_max must lie in 1..={}, got {r_max}",
            sys.n()
        )));
    }
    let tol = tol::<T>(MARKOV_TOL);
    let outer = max_norm(sys.c()) * max_norm(sys.b());
    let mut power = DMatrix::identity(sys.n(), sys.n());
    for k in 0..r_max {
        let markov = sys.c() * &power * sys.b();
        let scale = outer * max_norm(&power);
        let smallest = super::zeros::singular_values(&markov).min();
        if scale > T::zero() && smallest > tol * scale {
            return Ok(Some(k + 1));
        }
        if max_norm(&markov) > tol * scale {
            // nonzero but singular: no strict relative degree exists
            return Ok(None);
        }
        power = &power * sys.a();
    }
    Ok(None)
}

/// `Γ = CA^{r−1}B` and whether `Γ + Γᵀ` is positive definite.
pub fn high_frequency_gain<T: Scalar>(
    sys: &StateSpaceSystem<T>,
    r: usize,
) -> Result<(DMatrix<T>, bool)> {
    match strict_relative_degree(sys, sys.n())? {
        Some(actual) if actual == r => {}
        other => {
            return Err(Error::Domain(format!(
                "r = {r} is not the strict relative degree of the system (found {other:?})"
            )))
        }
    }
    let gamma = sys.markov(r - 1);
    let pd = is_positive_definite(&gamma);
    Ok((gamma, pd))
}

/// Positive definiteness of the symmetric part, relative to `‖Γ‖`.
pub fn is_positive_definite<T: Scalar>(gamma: &DMatrix<T>) -> bool {
    let sym = gamma + gamma.transpose();
    let scale = max_norm(gamma);
    if scale == T::zero() {
        return false;
    }
    sym.symmetric_eigenvalues()
        .iter()
        .all(|&ev| ev > tol::<T>(GAMMA_PD_TOL) * scale)
}

/// Structural verdict for membership in the class of minimum-phase systems
/// with strict relative degree and positive definite high-frequency gain.
#[derive(Clone, Debug)]
pub struct ClassificationReport<T: Scalar> {
    pub relative_degree: Option<usize>,
    pub gamma: Option<DMatrix<T>>,
    pub gamma_positive_definite: bool,
    pub invariant_zeros: Vec<Complex<T>>,
    /// Set when zeros could not be computed (non-regular pencil, m > n).
    pub zeros_diagnostic: Option<String>,
    pub minimum_phase: bool,
    pub in_sigma_mr: bool,
}

impl<T: Scalar> ClassificationReport<T> {
    pub fn m(&self) -> Option<usize> {
        self.gamma.as_ref().map(|g| g.nrows())
    }
}

pub fn classify<T: Scalar>(sys: &StateSpaceSystem<T>) -> ClassificationReport<T> {
    let relative_degree = strict_relative_degree(sys, sys.n()).ok().flatten();
    let gamma = relative_degree.map(|r| sys.markov(r - 1));
    let gamma_positive_definite = gamma.as_ref().is_some_and(is_positive_definite);

    let (invariant_zeros, zeros_diagnostic) = match invariant_zeros(sys) {
        Ok(z) => (z, None),
        Err(e) => (Vec::new(), Some(e.to_string())),
    };
    let margin = lit::<T>(MIN_PHASE_MARGIN);
    let minimum_phase =
        zeros_diagnostic.is_none() && invariant_zeros.iter().all(|z| z.re < -margin);
    let in_sigma_mr = relative_degree.is_some() && minimum_phase && gamma_positive_definite;
    ClassificationReport {
        relative_degree,
        gamma,
        gamma_positive_definite,
        invariant_zeros,
        zeros_diagnostic,
        minimum_phase,
        in_sigma_mr,
    }
}
