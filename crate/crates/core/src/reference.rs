//! Reference signals annihilated by `α(d/dt)`, evaluated in closed form.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::poly::Polynomial;
use crate::scalar::{lit, Scalar};

/// Shape of a single additive term; the amplitude lives in [`Term`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TermKind<T: Scalar> {
    Constant,
    /// `t^power`
    Poly { power: u32 },
    /// `sin(ωt + phase)`
    Sin { omega: T, phase: T },
    /// `cos(ωt + phase)`
    Cos { omega: T, phase: T },
    /// `e^{rate·t}`
    Exp { rate: T },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Term<T: Scalar> {
    pub amplitude: T,
    pub kind: TermKind<T>,
}

impl<T: Scalar> Term<T> {
    pub fn constant(c: T) -> Self {
        Self { amplitude: c, kind: TermKind::Constant }
    }

    pub fn poly(amplitude: T, power: u32) -> Self {
        Self { amplitude, kind: TermKind::Poly { power } }
    }

    pub fn sin(amplitude: T, omega: T, phase: T) -> Self {
        Self { amplitude, kind: TermKind::Sin { omega, phase } }
    }

    pub fn cos(amplitude: T, omega: T, phase: T) -> Self {
        Self { amplitude, kind: TermKind::Cos { omega, phase } }
    }

    pub fn exp(amplitude: T, rate: T) -> Self {
        Self { amplitude, kind: TermKind::Exp { rate } }
    }

    /// `j`-th time derivative at `t`.
    pub fn derivative(&self, t: T, j: usize) -> T {
        let a = self.amplitude;
        match self.kind {
            TermKind::Constant => {
                if j == 0 {
                    a
                } else {
                    T::zero()
                }
            }
            TermKind::Poly { power } => {
                let p = power as usize;
                if j > p {
                    return T::zero();
                }
                let falling = ((p - j + 1)..=p).fold(T::one(), |acc, f| acc * lit::<T>(f as f64));
                a * falling * t.powi((p - j) as i32)
            }
            TermKind::Sin { omega, phase } => {
                a * omega.powi(j as i32) * (omega * t + phase + T::frac_pi_2() * lit(j as f64)).sin()
            }
            TermKind::Cos { omega, phase } => {
                a * omega.powi(j as i32) * (omega * t + phase + T::frac_pi_2() * lit(j as f64)).cos()
            }
            TermKind::Exp { rate } => a * rate.powi(j as i32) * (rate * t).exp(),
        }
    }
}

/// `m`-channel reference: channel `i` is the sum of its terms.
#[derive(Clone, Debug, PartialEq)]
pub struct ReferenceSignal<T: Scalar> {
    channels: Vec<Vec<Term<T>>>,
    alpha: Polynomial<T>,
}

impl<T: Scalar> ReferenceSignal<T> {
    /// Membership in the class of `α` is not enforced here; see
    /// [`ReferenceSignal::verify_membership`].
    pub fn new(channels: Vec<Vec<Term<T>>>, alpha: Polynomial<T>) -> Result<Self> {
        if channels.is_empty() {
            return Err(Error::Dimension("reference needs at least one channel".into()));
        }
        if !alpha.is_monic() {
            return Err(Error::Domain(format!("alpha = {alpha} must be monic")));
        }
        Ok(Self { channels, alpha })
    }

    /// All-zero reference with `m` channels.
    pub fn zero(m: usize, alpha: Polynomial<T>) -> Result<Self> {
        Self::new(vec![Vec::new(); m], alpha)
    }

    pub fn m(&self) -> usize {
        self.channels.len()
    }

    pub fn alpha(&self) -> &Polynomial<T> {
        &self.alpha
    }

    pub fn channels(&self) -> &[Vec<Term<T>>] {
        &self.channels
    }

    /// Column `j` holds the `j`-th derivative at `t`, `j = 0..=order`.
    pub fn evaluate(&self, t: T, order: usize) -> DMatrix<T> {
        DMatrix::from_fn(self.m(), order + 1, |i, j| {
            self.channels[i]
                .iter()
                .fold(T::zero(), |acc, term| acc + term.derivative(t, j))
        })
    }

    /// `α(d/dt) y_ref(t)` per channel.
    pub fn annihilator_residual(&self, t: T) -> Vec<T> {
        let p = self.alpha.degree();
        let d = self.evaluate(t, p);
        (0..self.m())
            .map(|i| (0..=p).fold(T::zero(), |acc, j| acc + self.alpha.coeff(j) * d[(i, j)]))
            .collect()
    }

    /// Grid check of `α(d/dt) y_ref = 0` on `[0, 2]` with 201 points.
    pub fn verify_membership(&self) -> bool {
        self.verify_membership_on(T::zero(), lit(2.0), 201)
    }

    /// The tolerance is `1e−8·(1 + max|y_ref|)`, raised to the rounding level
    /// of the residual sum `Σ|α_j||y_ref^{(j)}|` for high-degree `α` with fast
    /// terms.
    pub fn verify_membership_on(&self, t0: T, t1: T, points: usize) -> bool {
        let points = points.max(2);
        let p = self.alpha.degree();
        let step = (t1 - t0) / lit((points - 1) as f64);
        let (mut max_residual, mut max_value, mut rounding) = (T::zero(), T::zero(), T::zero());
        for k in 0..points {
            let t = t0 + step * lit(k as f64);
            let d = self.evaluate(t, p);
            max_value = max_value.max(d.column(0).norm());
            let mut sq = T::zero();
            for i in 0..self.m() {
                let (mut res, mut mag) = (T::zero(), T::zero());
                for j in 0..=p {
                    res += self.alpha.coeff(j) * d[(i, j)];
                    mag += (self.alpha.coeff(j) * d[(i, j)]).abs();
                }
                sq += res * res;
                rounding = rounding.max(mag);
            }
            let norm = sq.sqrt();
            if !norm.is_finite() {
                return false;
            }
            max_residual = max_residual.max(norm);
        }
        let floor = T::default_epsilon() * lit(64.0 * self.m().max(1) as f64) * rounding;
        max_residual <= (lit::<T>(1e-8) * (T::one() + max_value)).max(floor)
    }
}
