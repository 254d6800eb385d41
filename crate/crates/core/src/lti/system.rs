use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Continuous-time square plant `ẋ = Ax + Bu`, `y = Cx` with `m` inputs and
/// `m` outputs.
#[derive(Clone, Debug, PartialEq)]
pub struct StateSpaceSystem<T: Scalar> {
    a: DMatrix<T>,
    b: DMatrix<T>,
    c: DMatrix<T>,
}

impl<T: Scalar> StateSpaceSystem<T> {
    pub fn new(a: DMatrix<T>, b: DMatrix<T>, c: DMatrix<T>) -> Result<Self> {
        let n = a.nrows();
        if n == 0 || a.ncols() != n {
            return Err(Error::Dimension(format!(
                "A must be square and non-empty, got {}x{}",
                a.nrows(),
                a.ncols()
            )));
        }
        let m = b.ncols();
        if m == 0 || b.nrows() != n {
            return Err(Error::Dimension(format!(
                "B must be {n}xm with m >= 1, got {}x{}",
                b.nrows(),
                b.ncols()
            )));
        }
        if c.nrows() != m || c.ncols() != n {
            return Err(Error::Dimension(format!(
                "C must be {m}x{n}, got {}x{}",
                c.nrows(),
                c.ncols()
            )));
        }
        Ok(Self { a, b, c })
    }

    /// Row-major convenience constructor.
    pub fn from_rows(n: usize, m: usize, a: &[T], b: &[T], c: &[T]) -> Result<Self> {
        if a.len() != n * n || b.len() != n * m || c.len() != m * n {
            return Err(Error::Dimension(format!(
                "expected {} / {} / {} entries for A / B / C",
                n * n,
                n * m,
                m * n
            )));
        }
        Self::new(
            DMatrix::from_row_slice(n, n, a),
            DMatrix::from_row_slice(n, m, b),
            DMatrix::from_row_slice(m, n, c),
        )
    }

    pub fn a(&self) -> &DMatrix<T> {
        &self.a
    }

    pub fn b(&self) -> &DMatrix<T> {
        &self.b
    }

    pub fn c(&self) -> &DMatrix<T> {
        &self.c
    }

    /// State dimension.
    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    /// Number of inputs (= outputs).
    pub fn m(&self) -> usize {
        self.b.ncols()
    }

    /// Markov parameter `C A^k B`.
    pub fn markov(&self, k: usize) -> DMatrix<T> {
        &self.c * self.a_power(k) * &self.b
    }

    pub fn a_power(&self, k: usize) -> DMatrix<T> {
        let mut p = DMatrix::identity(self.n(), self.n());
        for _ in 0..k {
            p = &p * &self.a;
        }
        p
    }

    /// `[C, CA, …, CA^{count-1}]`: maps the state to `y, ẏ, …` as long as the
    /// count does not exceed the relative degree.
    pub fn output_derivative_maps(&self, count: usize) -> Vec<DMatrix<T>> {
        let mut maps = Vec::with_capacity(count);
        let mut row = self.c.clone();
        for _ in 0..count {
            let next = &row * &self.a;
            maps.push(row);
            row = next;
        }
        maps
    }

    pub fn poles(&self) -> Vec<Complex<T>> {
        self.a.complex_eigenvalues().iter().copied().collect()
    }

    /// Applies the state change `x̄ = U x` for orthogonal `U`.
    pub fn orthogonal_transform(&self, u: &DMatrix<T>) -> Result<Self> {
        if u.nrows() != self.n() || u.ncols() != self.n() {
            return Err(Error::Dimension("transformation must be n x n".into()));
        }
        let ut = u.transpose();
        Self::new(u * &self.a * &ut, u * &self.b, &self.c * ut)
    }

    pub fn output(&self, x: &DVector<T>) -> DVector<T> {
        &self.c * x
    }
}

/// Largest absolute entry.
pub(crate) fn max_norm<T: Scalar>(m: &DMatrix<T>) -> T {
    m.iter().fold(T::zero(), |acc, &v| acc.max(v.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_inconsistent_dimensions() {
        let a = DMatrix::<f64>::zeros(2, 2);
        assert!(StateSpaceSystem::<f64>::new(a.clone(), DMatrix::zeros(3, 1), DMatrix::zeros(1, 2)).is_err());
        assert!(StateSpaceSystem::new(a.clone(), DMatrix::zeros(2, 1), DMatrix::zeros(2, 2)).is_err());
        assert!(StateSpaceSystem::new(a.clone(), DMatrix::zeros(2, 0), DMatrix::zeros(0, 2)).is_err());
        assert!(StateSpaceSystem::<f64>::new(DMatrix::zeros(2, 3), DMatrix::zeros(2, 1), DMatrix::zeros(1, 3)).is_err());
        assert!(StateSpaceSystem::new(a, DMatrix::zeros(2, 1), DMatrix::zeros(1, 2)).is_ok());
    }

    #[test]
    fn markov_parameters_of_double_integrator() {
        let sys = StateSpaceSystem::from_rows(2, 1, &[0.0, 1.0, 0.0, 0.0], &[0.0, 1.0], &[1.0, 0.0]).unwrap();
        assert_eq!(sys.markov(0)[(0, 0)], 0.0);
        assert_eq!(sys.markov(1)[(0, 0)], 1.0);
        let maps = sys.output_derivative_maps(2);
        assert_eq!(maps[1].as_slice(), &[0.0, 1.0]);
    }
}
