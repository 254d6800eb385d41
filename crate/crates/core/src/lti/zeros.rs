//! Invariant zeros as finite eigenvalues of the Rosenbrock pencil
//! `[A − λI, B; C, 0]`.
//!
//! The infinite part of the pencil is deflated geometrically: the maximal
//! output-nulling subspace `V*` is the limit of
//! `V₀ = ℝⁿ`, `V_{k+1} = ker C ∩ A⁻¹(V_k + im B)`, and for a regular square
//! pencil the finite eigenvalues are the spectrum of the map induced on `V*`
//! by `A + BF` for any friend `F`. Every step is an SVD rank decision on
//! orthonormal bases, so Jordan chains at infinity never reach an eigenvalue
//! solver.

use nalgebra::{Complex, DMatrix, Dyn, SVD};

use super::system::{max_norm, StateSpaceSystem};
use crate::error::{Error, Result};
use crate::scalar::{lit, Scalar};

const RANK_TOL: f64 = 1e-10;

/// Finite invariant zeros, sorted by real then imaginary part.
pub fn invariant_zeros<T: Scalar>(sys: &StateSpaceSystem<T>) -> Result<Vec<Complex<T>>> {
    let (n, m) = (sys.n(), sys.m());
    if m > n {
        return Err(Error::Domain(format!(
            "invariant zeros need m <= n, got m = {m}, n = {n}"
        )));
    }
    let tol = crate::scalar::tol::<T>(RANK_TOL);
    let a = normalized(sys.a());
    let b = normalized(sys.b());
    let c = normalized(sys.c());
    if rank_basis(&b, tol)?.ncols() < m {
        return Err(Error::NonRegularPencil);
    }

    let mut v = DMatrix::<T>::identity(n, n);
    loop {
        let span = rank_basis(&hstack(&v, &b), tol)?;
        let complement = DMatrix::identity(n, n) - &span * span.transpose();
        let constraints = vstack(&c, &(complement * &a));
        let next = null_space(&constraints, tol)?;
        let done = next.ncols() == v.ncols();
        v = next;
        if done || v.ncols() == 0 {
            break;
        }
    }
    let d = v.ncols();
    if d == 0 {
        return Ok(Vec::new());
    }

    // V* ∩ im B ≠ 0 means a nontrivial controllability subspace inside ker C,
    // i.e. the Rosenbrock matrix is singular for every λ
    let vb = hstack(&v, sys.b());
    let svd = checked_svd(&vb)?;
    let sv = &svd.singular_values;
    if sv.min() <= tol * sv.max() {
        return Err(Error::NonRegularPencil);
    }
    let av = sys.a() * &v;
    let coords = svd
        .solve(&av, T::zero())
        .map_err(|e| Error::Domain(format!("least-squares solve failed: {e}")))?;
    let restricted = coords.rows(0, d).into_owned();

    let mut zeros: Vec<Complex<T>> = restricted.complex_eigenvalues().iter().copied().collect();
    zeros.sort_by(|a, b| {
        a.re.partial_cmp(&b.re)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.im.partial_cmp(&b.im).unwrap_or(std::cmp::Ordering::Equal))
    });
    Ok(zeros)
}

fn normalized<T: Scalar>(m: &DMatrix<T>) -> DMatrix<T> {
    let s = max_norm(m);
    if s > T::zero() {
        m / s
    } else {
        m.clone()
    }
}

fn hstack<T: Scalar>(left: &DMatrix<T>, right: &DMatrix<T>) -> DMatrix<T> {
    let mut out = DMatrix::zeros(left.nrows(), left.ncols() + right.ncols());
    out.view_mut((0, 0), left.shape()).copy_from(left);
    out.view_mut((0, left.ncols()), right.shape()).copy_from(right);
    out
}

fn vstack<T: Scalar>(top: &DMatrix<T>, bottom: &DMatrix<T>) -> DMatrix<T> {
    let mut out = DMatrix::zeros(top.nrows() + bottom.nrows(), top.ncols());
    out.view_mut((0, 0), top.shape()).copy_from(top);
    out.view_mut((top.nrows(), 0), bottom.shape()).copy_from(bottom);
    out
}

/// Orthonormal basis of the column space.
fn rank_basis<T: Scalar>(m: &DMatrix<T>, tol: T) -> Result<DMatrix<T>> {
    if m.ncols() == 0 {
        return Ok(DMatrix::zeros(m.nrows(), 0));
    }
    let svd = checked_svd(m)?;
    let u = svd.u.expect("left singular vectors requested");
    let cutoff = tol * svd.singular_values.max();
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] > cutoff)
        .collect();
    Ok(DMatrix::from_fn(m.nrows(), keep.len(), |i, j| u[(i, keep[j])]))
}

/// Orthonormal basis of the kernel.
fn null_space<T: Scalar>(m: &DMatrix<T>, tol: T) -> Result<DMatrix<T>> {
    let cols = m.ncols();
    // pad to at least square so the thin SVD yields a full right basis
    let rows = m.nrows().max(cols);
    let mut padded = DMatrix::zeros(rows, cols);
    padded.view_mut((0, 0), m.shape()).copy_from(m);
    let svd = checked_svd(&padded)?;
    let v_t = svd.v_t.expect("right singular vectors requested");
    let cutoff = tol * svd.singular_values.max().max(T::one());
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] <= cutoff)
        .collect();
    Ok(DMatrix::from_fn(cols, keep.len(), |i, j| v_t[(keep[j], i)]))
}

/// SVD whose factors are verified to reproduce the input.
///
/// The bidiagonal QR iteration occasionally returns inconsistent factors on
/// rank-deficient input; one-sided Jacobi is the fallback.
pub(crate) fn checked_svd<T: Scalar>(m: &DMatrix<T>) -> Result<SVD<T, Dyn, Dyn>> {
    let scale = max_norm(m).max(T::one());
    let limit = T::default_epsilon() * lit(1e4) * scale * lit((m.nrows() + m.ncols()) as f64);
    let valid = |svd: &SVD<T, Dyn, Dyn>| {
        svd.clone().recompose().is_ok_and(|back| (back - m).amax() <= limit)
    };
    let direct = m.clone().svd(true, true);
    if valid(&direct) {
        return Ok(direct);
    }
    let jacobi = if m.nrows() >= m.ncols() {
        jacobi_svd(m)
    } else {
        let t = jacobi_svd(&m.transpose());
        SVD {
            u: t.v_t.map(|v| v.transpose()),
            v_t: t.u.map(|u| u.transpose()),
            singular_values: t.singular_values,
        }
    };
    if valid(&jacobi) {
        return Ok(jacobi);
    }
    Err(Error::Domain("singular value decomposition failed to reproduce its input".into()))
}

/// Singular values through [`checked_svd`]; the unchecked values are the
/// last resort.
pub(crate) fn singular_values<T: Scalar>(m: &DMatrix<T>) -> nalgebra::DVector<T> {
    match checked_svd(m) {
        Ok(svd) => svd.singular_values,
        Err(_) => m.singular_values(),
    }
}

/// One-sided (Hestenes) Jacobi SVD of a matrix with `rows >= cols`,
/// singular values sorted in decreasing order.
fn jacobi_svd<T: Scalar>(a: &DMatrix<T>) -> SVD<T, Dyn, Dyn> {
    let (rows, cols) = a.shape();
    let mut u = a.clone();
    let mut v = DMatrix::<T>::identity(cols, cols);
    let eps = T::default_epsilon();
    for _sweep in 0..80 {
        let mut rotated = false;
        for p in 0..cols {
            for q in p + 1..cols {
                let alpha = u.column(p).norm_squared();
                let beta = u.column(q).norm_squared();
                let gamma = u.column(p).dot(&u.column(q));
                if gamma == T::zero() || gamma.abs() <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (lit::<T>(2.0) * gamma);
                let t = zeta.signum() / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                for (mat, n) in [(&mut u, rows), (&mut v, cols)] {
                    for i in 0..n {
                        let (x, y) = (mat[(i, p)], mat[(i, q)]);
                        mat[(i, p)] = c * x - s * y;
                        mat[(i, q)] = s * x + c * y;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut order: Vec<usize> = (0..cols).collect();
    let norms: Vec<T> = (0..cols).map(|j| u.column(j).norm()).collect();
    order.sort_by(|&i, &j| norms[j].partial_cmp(&norms[i]).unwrap_or(std::cmp::Ordering::Equal));
    let singular_values = nalgebra::DVector::from_fn(cols, |k, _| norms[order[k]]);
    let left = DMatrix::from_fn(rows, cols, |i, k| {
        let sigma = norms[order[k]];
        if sigma > T::zero() {
            u[(i, order[k])] / sigma
        } else {
            T::zero()
        }
    });
    let v_t = DMatrix::from_fn(cols, cols, |k, j| v[(j, order[k])]);
    SVD { u: Some(left), v_t: Some(v_t), singular_values }
}

/// Smallest singular value of the Rosenbrock matrix at `λ`, relative to its
/// largest. Used as an independent rank check of computed zeros.
pub fn rosenbrock_rank_ratio<T: Scalar>(sys: &StateSpaceSystem<T>, lambda: Complex<T>) -> T {
    let (n, m) = (sys.n(), sys.m());
    let size = n + m;
    let czero = Complex::new(T::zero(), T::zero());
    let mut r = DMatrix::from_element(size, size, czero);
    for i in 0..n {
        for j in 0..n {
            r[(i, j)] = Complex::new(sys.a()[(i, j)], T::zero());
        }
        r[(i, i)] -= lambda;
        for j in 0..m {
            r[(i, n + j)] = Complex::new(sys.b()[(i, j)], T::zero());
        }
    }
    for i in 0..m {
        for j in 0..n {
            r[(n + i, j)] = Complex::new(sys.c()[(i, j)], T::zero());
        }
    }
    let sv = r.singular_values();
    sv.min() / sv.max()
}
