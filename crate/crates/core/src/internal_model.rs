//! Internal models `(Ã, B̃, C̃, I_m)` realizing `(β/α)·I_m` and their serial
//! interconnection with a plant.

use nalgebra::{Complex, ComplexField, DMatrix, DVector, RowDVector};

use crate::error::{Error, Result};
use crate::lti::{classify, ClassificationReport, StateSpaceSystem};
use crate::poly::{scaled_resultant, Polynomial, DEFAULT_COPRIME_TOL};
use crate::scalar::{lit, to_f64, Scalar};

/// Default root location `−shift` of `β(s) = (s + shift)^p`.
pub const DEFAULT_BETA_SHIFT: f64 = 3.0;
/// Maximum relative error of the sampled transfer identity.
pub const TRANSFER_IDENTITY_TOL: f64 = 1e-8;
/// A root of `α` closer than this to an invariant zero violates the
/// nonresonance condition.
pub const ROOT_ZERO_COLLISION_TOL: f64 = 1e-7;
const RANK_TOL: f64 = 1e-10;
const GAMMA_MATCH_TOL: f64 = 1e-9;

const SAMPLE_POINTS: [(f64, f64); 12] = [
    (1.0, 2.0),
    (1.0, -2.0),
    (3.0, 0.0),
    (0.0, 0.5),
    (-0.7, 1.3),
    (2.5, -0.4),
    (0.0, 10.0),
    (-4.0, 7.0),
    (0.3, 0.0),
    (5.0, 5.0),
    (-1.7, -2.9),
    (0.0, -37.0),
];

/// `β(s) = (s + shift)^p` with `p = deg α`; fails when `−shift` is a root of
/// `α`.
pub fn default_beta<T: Scalar>(alpha: &Polynomial<T>, shift: T) -> Result<Polynomial<T>> {
    if alpha.degree() == 0 || !alpha.is_monic() {
        return Err(Error::Domain("alpha must be monic with degree >= 1".into()));
    }
    if shift <= T::zero() {
        return Err(Error::Domain(format!("shift must be positive, got {shift}")));
    }
    let beta = Polynomial::linear(shift).pow(alpha.degree() as u32);
    if relative_value(alpha, Complex::new(-shift, T::zero())) <= lit(DEFAULT_COPRIME_TOL) {
        return Err(Error::NotCoprime {
            scaled_resultant: to_f64(scaled_resultant(alpha, &beta)?),
            hint: format!("-{shift} is (numerically) a root of alpha; choose another shift"),
        });
    }
    Ok(beta)
}

/// `|p(z)| / Σ|p_j||z|^j`: zero exactly at roots of `p`, scale-free.
fn relative_value<T: Scalar>(p: &Polynomial<T>, z: Complex<T>) -> T {
    let modulus = z.modulus();
    let scale = (0..=p.degree()).fold(T::zero(), |acc, j| {
        acc + p.coeff(j).abs() * modulus.powi(j as i32)
    });
    p.eval_complex(z).modulus() / scale
}

/// Smallest relative value of `β` over the roots of `α`.
///
/// Unlike the scaled Sylvester resultant, which shrinks with the degrees even
/// for well-separated roots, this stays of order one unless a root is shared.
pub fn common_root_measure<T: Scalar>(alpha: &Polynomial<T>, beta: &Polynomial<T>) -> Result<T> {
    Ok(alpha
        .roots()?
        .into_iter()
        .map(|z| relative_value(beta, z))
        .fold(lit(f64::INFINITY), |acc: T, v| acc.min(v)))
}

/// Minimal realization of `β(s)/α(s)` lifted block-diagonally to `m`
/// channels.
#[derive(Clone, Debug)]
pub struct InternalModelRealization<T: Scalar> {
    pub a_hat: DMatrix<T>,
    pub b_hat: DVector<T>,
    pub c_hat: RowDVector<T>,
    pub alpha: Polynomial<T>,
    pub beta: Polynomial<T>,
    pub m: usize,
    pub a_tilde: DMatrix<T>,
    pub b_tilde: DMatrix<T>,
    pub c_tilde: DMatrix<T>,
}

impl<T: Scalar> InternalModelRealization<T> {
    /// Controller-canonical construction: `Â` is the companion matrix of `α`,
    /// `b̂ = e_p` and `ĉ` holds the coefficients of `β − α`, so that
    /// `ĉ(sI − Â)⁻¹b̂ + 1 = 1 + (β − α)/α`.
    pub fn realize(alpha: &Polynomial<T>, beta: &Polynomial<T>, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::Synthesis("channel count must be positive".into()));
        }
        let p = alpha.degree();
        if p == 0 || !alpha.is_monic() || !beta.is_monic() {
            return Err(Error::Synthesis(
                "alpha and beta must be monic of degree >= 1".into(),
            ));
        }
        if beta.degree() != p {
            return Err(Error::Synthesis(format!(
                "deg beta = {} differs from deg alpha = {p}",
                beta.degree()
            )));
        }
        if !beta.is_hurwitz()? {
            return Err(Error::Synthesis(format!("beta = {beta} is not Hurwitz")));
        }
        let separation = common_root_measure(alpha, beta)?;
        if separation <= lit(DEFAULT_COPRIME_TOL) {
            return Err(Error::Synthesis(format!(
                "alpha and beta are not coprime (beta nearly vanishes at a root of alpha, relative value {:e})",
                to_f64(separation)
            )));
        }

        let a_hat = alpha.companion()?;
        let mut b_hat = DVector::zeros(p);
        b_hat[p - 1] = T::one();
        let diff = beta - alpha;
        let c_hat = RowDVector::from_fn(p, |_, j| diff.coeff(j));

        let mut a_tilde = DMatrix::zeros(m * p, m * p);
        let mut b_tilde = DMatrix::zeros(m * p, m);
        let mut c_tilde = DMatrix::zeros(m, m * p);
        for ch in 0..m {
            a_tilde.view_mut((ch * p, ch * p), (p, p)).copy_from(&a_hat);
            b_tilde.view_mut((ch * p, ch), (p, 1)).copy_from(&b_hat);
            c_tilde.view_mut((ch, ch * p), (1, p)).copy_from(&c_hat);
        }

        let im = Self {
            a_hat,
            b_hat,
            c_hat,
            alpha: alpha.clone(),
            beta: beta.clone(),
            m,
            a_tilde,
            b_tilde,
            c_tilde,
        };
        let err = im.transfer_identity_error()?;
        if err > crate::scalar::tol::<T>(TRANSFER_IDENTITY_TOL) {
            return Err(Error::Synthesis(format!(
                "transfer identity violated, relative error {err}"
            )));
        }
        if !im.is_minimal() {
            return Err(Error::Synthesis("realization is not minimal".into()));
        }
        Ok(im)
    }

    /// Order `p` of a single channel.
    pub fn order(&self) -> usize {
        self.alpha.degree()
    }

    /// Total state dimension `m·p`.
    pub fn state_dim(&self) -> usize {
        self.m * self.order()
    }

    /// `C̃(sI − Ã)⁻¹B̃ + I_m`.
    pub fn transfer_matrix(&self, s: Complex<T>) -> Result<DMatrix<Complex<T>>> {
        let size = self.state_dim();
        let shifted = DMatrix::from_fn(size, size, |i, j| {
            let diag = if i == j { s } else { Complex::new(T::zero(), T::zero()) };
            diag - Complex::new(self.a_tilde[(i, j)], T::zero())
        });
        let rhs = self.b_tilde.map(|v| Complex::new(v, T::zero()));
        let x = shifted
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::Domain(format!("s = {s} is a pole of the internal model")))?;
        let c = self.c_tilde.map(|v| Complex::new(v, T::zero()));
        let mut g = c * x;
        for i in 0..self.m {
            g[(i, i)] += Complex::new(T::one(), T::zero());
        }
        Ok(g)
    }

    /// Sample points used for the transfer identity, avoiding a `1e−6`
    /// neighbourhood of the roots of `α`.
    pub fn sample_points(&self) -> Result<Vec<Complex<T>>> {
        let roots = self.alpha.roots()?;
        let guard = lit::<T>(1e-6);
        Ok(SAMPLE_POINTS
            .iter()
            .map(|&(re, im)| Complex::new(lit::<T>(re), lit::<T>(im)))
            .filter(|s| roots.iter().all(|r| (s - r).modulus() > guard))
            .take(8)
            .collect())
    }

    /// Largest relative deviation of `C̃(sI − Ã)⁻¹B̃ + I_m` from
    /// `(β(s)/α(s))·I_m` over the sample points.
    pub fn transfer_identity_error(&self) -> Result<T> {
        let mut worst = T::zero();
        for s in self.sample_points()? {
            let target = self.beta.eval_complex(s) / self.alpha.eval_complex(s);
            let g = self.transfer_matrix(s)?;
            let mut dev = T::zero();
            for i in 0..self.m {
                for j in 0..self.m {
                    let expected = if i == j { target } else { Complex::new(T::zero(), T::zero()) };
                    dev = dev.max((g[(i, j)] - expected).modulus());
                }
            }
            worst = worst.max(dev / target.modulus());
        }
        Ok(worst)
    }

    pub fn controllability_rank(&self) -> usize {
        let p = self.order();
        let mut k = DMatrix::zeros(p, p);
        let mut col = self.b_hat.clone();
        for j in 0..p {
            k.set_column(j, &col);
            col = &self.a_hat * col;
        }
        numerical_rank(&k)
    }

    pub fn observability_rank(&self) -> usize {
        let p = self.order();
        let mut o = DMatrix::zeros(p, p);
        let mut row = self.c_hat.clone();
        for i in 0..p {
            o.set_row(i, &row);
            row = &row * &self.a_hat;
        }
        numerical_rank(&o.transpose())
    }

    pub fn is_minimal(&self) -> bool {
        let p = self.order();
        self.controllability_rank() == p && self.observability_rank() == p
    }
}

/// Rank after scaling every column to unit length; Krylov columns grow like
/// powers of the spectral radius, which scaling removes without changing the
/// rank.
fn numerical_rank<T: Scalar>(m: &DMatrix<T>) -> usize {
    let mut scaled = m.clone();
    for mut col in scaled.column_iter_mut() {
        let n = col.norm();
        if n > T::zero() {
            col /= n;
        }
    }
    let sv = crate::lti::singular_values(&scaled);
    let cutoff = crate::scalar::tol::<T>(RANK_TOL) * sv.max();
    sv.iter().filter(|&&s| s > cutoff).count()
}

/// `true` iff no root of `α` lies within `1e−7` of an invariant zero of the
/// plant, i.e. the Rosenbrock matrix keeps full rank at every root of `α`.
pub fn check_alpha_condition<T: Scalar>(sys: &StateSpaceSystem<T>, alpha: &Polynomial<T>) -> bool {
    if alpha.degree() == 0 {
        return true;
    }
    let Ok(roots) = alpha.roots() else {
        return false;
    };
    // a singular pencil loses rank everywhere
    let Ok(zeros) = crate::lti::invariant_zeros(sys) else {
        return false;
    };
    let tol = lit::<T>(ROOT_ZERO_COLLISION_TOL);
    roots
        .iter()
        .all(|r| zeros.iter().all(|z| (r - z).modulus() > tol))
}

/// Serial interconnection plant ← internal model driven by `w`:
/// `A_ic = [A, B C̃; 0, Ã]`, `B_ic = [B; B̃]`, `C_ic = [C, 0]`.
#[derive(Clone, Debug)]
pub struct Interconnection<T: Scalar> {
    system: StateSpaceSystem<T>,
    plant_states: usize,
    pub report: ClassificationReport<T>,
}

impl<T: Scalar> Interconnection<T> {
    pub fn system(&self) -> &StateSpaceSystem<T> {
        &self.system
    }

    pub fn plant_states(&self) -> usize {
        self.plant_states
    }

    pub fn model_states(&self) -> usize {
        self.system.n() - self.plant_states
    }

    /// `Ĉ = C_ic p(A_ic)`: output map of the relative-degree-one system seen
    /// by the last cascade error when `p = p_r`.
    pub fn cascade_output(&self, p: &Polynomial<T>) -> DMatrix<T> {
        self.system.c() * p.eval_matrix(self.system.a())
    }
}

pub fn interconnect<T: Scalar>(
    sys: &StateSpaceSystem<T>,
    im: &InternalModelRealization<T>,
) -> Result<Interconnection<T>> {
    if im.m != sys.m() {
        return Err(Error::Dimension(format!(
            "internal model has {} channels, plant has {}",
            im.m,
            sys.m()
        )));
    }
    let plant_report = classify(sys);
    let r = plant_report.relative_degree.ok_or_else(|| {
        Error::Domain("plant has no strict relative degree".into())
    })?;

    let (n, m, mp) = (sys.n(), sys.m(), im.state_dim());
    let size = n + mp;
    let mut a = DMatrix::zeros(size, size);
    a.view_mut((0, 0), (n, n)).copy_from(sys.a());
    a.view_mut((0, n), (n, mp)).copy_from(&(sys.b() * &im.c_tilde));
    a.view_mut((n, n), (mp, mp)).copy_from(&im.a_tilde);
    let mut b = DMatrix::zeros(size, m);
    b.view_mut((0, 0), (n, m)).copy_from(sys.b());
    b.view_mut((n, 0), (mp, m)).copy_from(&im.b_tilde);
    let mut c = DMatrix::zeros(m, size);
    c.view_mut((0, 0), (m, n)).copy_from(sys.c());
    let system = StateSpaceSystem::new(a, b, c)?;

    let gamma_plant = sys.markov(r - 1);
    let gamma_ic = system.markov(r - 1);
    let scale = gamma_plant.iter().fold(T::one(), |acc, v| acc.max(v.abs()));
    let dev = (&gamma_ic - &gamma_plant)
        .iter()
        .fold(T::zero(), |acc, v| acc.max(v.abs()));
    if dev > crate::scalar::tol::<T>(GAMMA_MATCH_TOL) * scale {
        return Err(Error::Synthesis(format!(
            "C_ic A_ic^(r-1) B_ic deviates from the plant gain by {dev}"
        )));
    }

    let report = classify(&system);
    if plant_report.in_sigma_mr && (!report.in_sigma_mr || report.relative_degree != Some(r)) {
        return Err(Error::Synthesis(format!(
            "interconnection left the class: relative degree {:?}, minimum phase {}, zeros {:?}",
            report.relative_degree, report.minimum_phase, report.invariant_zeros
        )));
    }
    Ok(Interconnection {
        system,
        plant_states: n,
        report,
    })
}
