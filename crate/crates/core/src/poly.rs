//! Dense real polynomials in ascending-power storage.
//!
//! Coefficient `j` multiplies `s^j`, so applying `p(d/dt)` to a signal is a
//! dot product between `coeffs()` and the derivative stack of the signal.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{Complex, ComplexField, DMatrix};

use crate::error::{Error, Result};
use crate::scalar::{lit, Scalar};

/// Default tolerance on the scaled Sylvester resultant used by [`are_coprime`].
pub const DEFAULT_COPRIME_TOL: f64 = 1e-9;

/// Real polynomial with trailing zero coefficients stripped.
///
/// The zero polynomial is stored with no coefficients and reports degree 0.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial<T: Scalar> {
    coeffs: Vec<T>,
}

impl<T: Scalar> Polynomial<T> {
    /// Builds a polynomial from ascending coefficients.
    pub fn new(coeffs: impl Into<Vec<T>>) -> Self {
        let mut coeffs = coeffs.into();
        while coeffs.last().is_some_and(|c| *c == T::zero()) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(T::one())
    }

    pub fn constant(c: T) -> Self {
        Self::new(vec![c])
    }

    /// `s + a`.
    pub fn linear(a: T) -> Self {
        Self::new(vec![a, T::one()])
    }

    /// Monic polynomial with the given real roots.
    pub fn from_real_roots(roots: &[T]) -> Self {
        roots
            .iter()
            .fold(Self::one(), |acc, &r| &acc * &Self::linear(-r))
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    /// Coefficient of `s^j`, zero beyond the degree.
    pub fn coeff(&self, j: usize) -> T {
        self.coeffs.get(j).copied().unwrap_or_else(T::zero)
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn leading(&self) -> T {
        self.coeffs.last().copied().unwrap_or_else(T::zero)
    }

    pub fn is_monic(&self) -> bool {
        self.leading() == T::one()
    }

    /// Divides through by the leading coefficient.
    pub fn to_monic(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::Domain("the zero polynomial has no monic form".into()));
        }
        let lead = self.leading();
        Ok(Self::new(
            self.coeffs.iter().map(|&c| c / lead).collect::<Vec<_>>(),
        ))
    }

    pub fn scale(&self, factor: T) -> Self {
        Self::new(self.coeffs.iter().map(|&c| c * factor).collect::<Vec<_>>())
    }

    pub fn pow(&self, k: u32) -> Self {
        (0..k).fold(Self::one(), |acc, _| &acc * self)
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(j, &c)| c * lit::<T>(j as f64))
                .collect::<Vec<_>>(),
        )
    }

    pub fn eval(&self, x: T) -> T {
        self.coeffs
            .iter()
            .rev()
            .fold(T::zero(), |acc, &c| acc * x + c)
    }

    pub fn eval_complex(&self, z: Complex<T>) -> Complex<T> {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex::new(T::zero(), T::zero()), |acc, &c| {
                acc * z + Complex::new(c, T::zero())
            })
    }

    /// `p(A)` by Horner's scheme.
    pub fn eval_matrix(&self, a: &DMatrix<T>) -> DMatrix<T> {
        let n = a.nrows();
        self.coeffs
            .iter()
            .rev()
            .fold(DMatrix::zeros(n, n), |acc, &c| {
                acc * a + DMatrix::identity(n, n) * c
            })
    }

    /// Largest coefficient magnitude.
    pub fn max_abs_coeff(&self) -> T {
        self.coeffs
            .iter()
            .fold(T::zero(), |m, &c| m.max(c.abs()))
    }

    fn norm2(&self) -> T {
        self.coeffs
            .iter()
            .fold(T::zero(), |acc, &c| acc + c * c)
            .sqrt()
    }

    /// Frobenius companion matrix of the monic normalization: ones on the
    /// superdiagonal and the negated low-order coefficients in the last row.
    pub fn companion(&self) -> Result<DMatrix<T>> {
        if self.degree() == 0 {
            return Err(Error::Domain(
                "companion matrix needs degree >= 1".into(),
            ));
        }
        let monic = self.to_monic()?;
        let n = monic.degree();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n - 1 {
            m[(i, i + 1)] = T::one();
        }
        for j in 0..n {
            m[(n - 1, j)] = -monic.coeffs[j];
        }
        Ok(m)
    }

    /// Routh–Hurwitz test: `true` iff every root lies in the open left
    /// half-plane. A zero (or sign change) in the first column, including a
    /// vanishing row, is reported as not Hurwitz.
    pub fn is_hurwitz(&self) -> Result<bool> {
        if self.is_zero() || self.degree() == 0 {
            return Err(Error::Domain(
                "Hurwitz test needs a polynomial of degree >= 1".into(),
            ));
        }
        let sign = if self.leading() < T::zero() { -T::one() } else { T::one() };
        // descending order, leading coefficient positive
        let desc: Vec<T> = self.coeffs.iter().rev().map(|&c| c * sign).collect();
        if desc.iter().any(|&c| c <= T::zero()) {
            return Ok(false);
        }

        let n = self.degree();
        let width = n / 2 + 1;
        let mut upper: Vec<T> = (0..width)
            .map(|j| desc.get(2 * j).copied().unwrap_or_else(T::zero))
            .collect();
        let mut lower: Vec<T> = (0..width)
            .map(|j| desc.get(2 * j + 1).copied().unwrap_or_else(T::zero))
            .collect();
        let eps = T::default_epsilon() * lit(64.0);

        for _ in 1..n {
            let scale = upper
                .iter()
                .chain(lower.iter())
                .fold(T::zero(), |m, &c| m.max(c.abs()));
            if lower[0] <= eps * scale {
                return Ok(false);
            }
            let next: Vec<T> = (0..width)
                .map(|j| {
                    let a = upper.get(j + 1).copied().unwrap_or_else(T::zero);
                    let b = lower.get(j + 1).copied().unwrap_or_else(T::zero);
                    (lower[0] * a - upper[0] * b) / lower[0]
                })
                .collect();
            upper = lower;
            lower = next;
        }
        let scale = upper
            .iter()
            .chain(lower.iter())
            .fold(T::zero(), |m, &c| m.max(c.abs()));
        Ok(lower[0] > eps * scale)
    }

    /// All complex roots with multiplicity, from the eigenvalues of the
    /// companion matrix followed by a guarded Newton polish.
    pub fn roots(&self) -> Result<Vec<Complex<T>>> {
        if self.is_zero() || self.degree() == 0 {
            return Err(Error::Domain("roots need a polynomial of degree >= 1".into()));
        }
        let eig = self.companion()?.complex_eigenvalues();
        let dp = self.derivative();
        Ok(eig.iter().map(|&z| newton_polish(self, &dp, z)).collect())
    }
}

fn newton_polish<T: Scalar>(p: &Polynomial<T>, dp: &Polynomial<T>, mut z: Complex<T>) -> Complex<T> {
    let mut residual = p.eval_complex(z).modulus();
    for _ in 0..3 {
        let d = dp.eval_complex(z);
        if d.modulus() <= T::default_epsilon() * (T::one() + residual) {
            break;
        }
        let candidate = z - p.eval_complex(z) / d;
        let r = p.eval_complex(candidate).modulus();
        if r < residual {
            z = candidate;
            residual = r;
        } else {
            break;
        }
    }
    z
}

/// Product of two polynomials (coefficient convolution).
pub fn multiply<T: Scalar>(a: &Polynomial<T>, b: &Polynomial<T>) -> Polynomial<T> {
    if a.is_zero() || b.is_zero() {
        return Polynomial::zero();
    }
    let mut out = vec![T::zero(); a.coeffs.len() + b.coeffs.len() - 1];
    for (i, &x) in a.coeffs.iter().enumerate() {
        for (j, &y) in b.coeffs.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    Polynomial::new(out)
}

/// Determinant of the Sylvester matrix of `a` and `b`.
pub fn resultant<T: Scalar>(a: &Polynomial<T>, b: &Polynomial<T>) -> Result<T> {
    if a.is_zero() || b.is_zero() {
        return Err(Error::Domain("resultant of the zero polynomial".into()));
    }
    let (m, n) = (a.degree(), b.degree());
    if m + n == 0 {
        return Ok(T::one());
    }
    let size = m + n;
    let mut syl = DMatrix::zeros(size, size);
    for row in 0..n {
        for (k, &c) in a.coeffs.iter().rev().enumerate() {
            syl[(row, row + k)] = c;
        }
    }
    for row in 0..m {
        for (k, &c) in b.coeffs.iter().rev().enumerate() {
            syl[(n + row, row + k)] = c;
        }
    }
    Ok(syl.determinant())
}

/// `|Res(a, b)| / (‖a‖₂^deg b · ‖b‖₂^deg a)`, which lies in `[0, 1]` by
/// Hadamard's inequality.
pub fn scaled_resultant<T: Scalar>(a: &Polynomial<T>, b: &Polynomial<T>) -> Result<T> {
    let res = resultant(a, b)?;
    let scale = ComplexField::powi(a.norm2(), b.degree() as i32)
        * ComplexField::powi(b.norm2(), a.degree() as i32);
    Ok(res.abs() / scale)
}

/// Coprimality test on the scaled resultant.
pub fn are_coprime<T: Scalar>(a: &Polynomial<T>, b: &Polynomial<T>, tol: T) -> Result<bool> {
    Ok(scaled_resultant(a, b)? > tol)
}

impl<T: Scalar> Mul for &Polynomial<T> {
    type Output = Polynomial<T>;
    fn mul(self, rhs: Self) -> Polynomial<T> {
        multiply(self, rhs)
    }
}

impl<T: Scalar> Mul for Polynomial<T> {
    type Output = Polynomial<T>;
    fn mul(self, rhs: Self) -> Polynomial<T> {
        multiply(&self, &rhs)
    }
}

impl<T: Scalar> Add for &Polynomial<T> {
    type Output = Polynomial<T>;
    fn add(self, rhs: Self) -> Polynomial<T> {
        let len = self.coeffs.len().max(rhs.coeffs.len());
        Polynomial::new((0..len).map(|j| self.coeff(j) + rhs.coeff(j)).collect::<Vec<_>>())
    }
}

impl<T: Scalar> Sub for &Polynomial<T> {
    type Output = Polynomial<T>;
    fn sub(self, rhs: Self) -> Polynomial<T> {
        let len = self.coeffs.len().max(rhs.coeffs.len());
        Polynomial::new((0..len).map(|j| self.coeff(j) - rhs.coeff(j)).collect::<Vec<_>>())
    }
}

impl<T: Scalar> Neg for &Polynomial<T> {
    type Output = Polynomial<T>;
    fn neg(self) -> Polynomial<T> {
        self.scale(-T::one())
    }
}

impl<T: Scalar> std::fmt::Display for Polynomial<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (j, &c) in self.coeffs.iter().enumerate().rev() {
            if c == T::zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match j {
                0 => write!(f, "{c}")?,
                1 => write!(f, "{c}*s")?,
                _ => write!(f, "{c}*s^{j}")?,
            }
        }
        Ok(())
    }
}
