//! Random plants planted in Byrnes–Isidori coordinates
//! `(y, ẏ, …, y^{(r−1)}, η)`:
//!
//! ```text
//! y^{(r)} = Σ R_i y^{(i−1)} + S η + Γ u
//! η̇      = Q η + P y
//! ```
//!
//! With `Q` Hurwitz and `Γ + Γᵀ > 0` the realization is in the target class by
//! construction, which makes it a cross-check for the classifier.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::system::StateSpaceSystem;
use crate::scalar::{lit, Scalar};

#[derive(Clone, Debug)]
pub struct NormalForm<T: Scalar> {
    /// `R_1 … R_r`, each `m × m`.
    pub r_blocks: Vec<DMatrix<T>>,
    pub s: DMatrix<T>,
    pub q: DMatrix<T>,
    pub p: DMatrix<T>,
    pub gamma: DMatrix<T>,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct GeneratorOptions {
    /// Hide the normal-form coordinates behind a random orthogonal state change.
    pub orthogonal_transform: bool,
}

fn uniform<T: Scalar>(rng: &mut ChaCha8Rng, rows: usize, cols: usize, half_width: f64) -> DMatrix<T> {
    DMatrix::from_fn(rows, cols, |_, _| lit(rng.random_range(-half_width..=half_width)))
}

impl<T: Scalar> NormalForm<T> {
    /// Draws `R_i, S, P` in `[−2, 2]`, a Hurwitz `Q` whose spectral abscissa
    /// lies in `[−1.5, −0.5]`, and `Γ` whose symmetric part is `≥ 0.1 I`.
    pub fn random(m: usize, r: usize, q: usize, seed: u64) -> Self {
        assert!(m >= 1 && r >= 1, "m and r must be positive");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r_blocks = (0..r).map(|_| uniform(&mut rng, m, m, 2.0)).collect();
        let s = uniform(&mut rng, m, q, 2.0);
        let p = uniform(&mut rng, q, m, 2.0);

        let mut q_mat: DMatrix<T> = uniform(&mut rng, q, q, 2.0);
        if q > 0 {
            let abscissa = q_mat
                .complex_eigenvalues()
                .iter()
                .map(|z| z.re)
                .fold(T::min_value().unwrap(), |a, b| a.max(b));
            let target: T = -lit::<T>(0.5 + rng.random_range(0.0..=1.0));
            for i in 0..q {
                q_mat[(i, i)] += target - abscissa;
            }
        }

        let x: DMatrix<T> = uniform(&mut rng, m, m, 1.0);
        let skew: DMatrix<T> = uniform(&mut rng, m, m, 0.5);
        let gamma = &x * x.transpose()
            + DMatrix::identity(m, m) * lit::<T>(0.1)
            + (&skew - skew.transpose());

        Self { r_blocks, s, q: q_mat, p, gamma }
    }

    pub fn m(&self) -> usize {
        self.gamma.nrows()
    }

    pub fn relative_degree(&self) -> usize {
        self.r_blocks.len()
    }

    pub fn internal_dimension(&self) -> usize {
        self.q.nrows()
    }

    /// State-space realization in normal-form coordinates.
    pub fn realize(&self) -> StateSpaceSystem<T> {
        let (m, r, q) = (self.m(), self.relative_degree(), self.internal_dimension());
        let n = r * m + q;
        let mut a = DMatrix::zeros(n, n);
        for i in 0..r - 1 {
            a.view_mut((i * m, (i + 1) * m), (m, m))
                .copy_from(&DMatrix::identity(m, m));
        }
        let last = (r - 1) * m;
        for (i, block) in self.r_blocks.iter().enumerate() {
            a.view_mut((last, i * m), (m, m)).copy_from(block);
        }
        if q > 0 {
            a.view_mut((last, r * m), (m, q)).copy_from(&self.s);
            a.view_mut((r * m, 0), (q, m)).copy_from(&self.p);
            a.view_mut((r * m, r * m), (q, q)).copy_from(&self.q);
        }
        let mut b = DMatrix::zeros(n, m);
        b.view_mut((last, 0), (m, m)).copy_from(&self.gamma);
        let mut c = DMatrix::zeros(m, n);
        c.view_mut((0, 0), (m, m)).copy_from(&DMatrix::identity(m, m));
        StateSpaceSystem::new(a, b, c).expect("normal form dimensions are consistent")
    }
}

/// Random orthogonal matrix from the QR factor of a uniform draw.
pub fn random_orthogonal<T: Scalar>(n: usize, seed: u64) -> DMatrix<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g: DMatrix<T> = uniform(&mut rng, n, n, 1.0);
    g.qr().q()
}

/// Random plant in the class with exactly `m` channels, strict relative
/// degree `r` and `q` internal states. Deterministic in `seed`.
pub fn random_sigma_mr<T: Scalar>(m: usize, r: usize, q: usize, seed: u64) -> StateSpaceSystem<T> {
    random_sigma_mr_with(m, r, q, seed, GeneratorOptions::default())
}

pub fn random_sigma_mr_with<T: Scalar>(
    m: usize,
    r: usize,
    q: usize,
    seed: u64,
    options: GeneratorOptions,
) -> StateSpaceSystem<T> {
    let sys = NormalForm::<T>::random(m, r, q, seed).realize();
    if options.orthogonal_transform {
        let u = random_orthogonal(sys.n(), seed ^ 0x9e37_79b9_7f4a_7c15);
        sys.orthogonal_transform(&u).expect("square transformation")
    } else {
        sys
    }
}
