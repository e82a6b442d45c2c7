//! Small dense helpers for complex Hermitian matrices.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::scalar::{cabs, Cplx, Real};

pub type CMatrix<T> = DMatrix<Cplx<T>>;
pub type CVector<T> = DVector<Cplx<T>>;

/// `w w^H`.
pub fn outer<T: Real>(w: &CVector<T>) -> CMatrix<T> {
    w * w.adjoint()
}

pub fn frobenius<T: Real>(m: &CMatrix<T>) -> T {
    m.iter()
        .fold(T::zero(), |acc, z| acc + z.norm_sqr())
        .sqrt()
}

pub fn trace_real<T: Real>(m: &CMatrix<T>) -> T {
    (0..m.nrows()).fold(T::zero(), |acc, i| acc + m[(i, i)].re)
}

/// `Re Tr(A B)` without forming the product.
pub fn trace_product_re<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> T {
    let n = a.nrows();
    let mut acc = T::zero();
    for i in 0..n {
        for k in 0..n {
            let p = a[(i, k)] * b[(k, i)];
            acc += p.re;
        }
    }
    acc
}

/// Averages `X` with its conjugate transpose.
pub fn hermitian_part<T: Real>(x: &CMatrix<T>) -> CMatrix<T> {
    let half = T::lit(0.5);
    (x + x.adjoint()).map(|z| z * half)
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues sorted descending.
pub fn hermitian_eigen<T: Real>(x: &CMatrix<T>) -> (Vec<T>, CMatrix<T>) {
    let n = x.nrows();
    let eig = hermitian_part(x).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Rotates `v` so that its largest-magnitude entry is real and positive.
pub fn phase_normalize<T: Real>(v: &CVector<T>) -> CVector<T> {
    let mut best = 0;
    let mut best_mag = T::zero();
    for (i, z) in v.iter().enumerate() {
        let m = z.norm_sqr();
        // first index wins on exact ties
        if m > best_mag {
            best = i;
            best_mag = m;
        }
    }
    if best_mag == T::zero() {
        return v.clone();
    }
    let anchor = v[best];
    let rot = anchor.conj() / Cplx::new(cabs(anchor), T::zero());
    v.map(|z| z * rot)
}

/// Unit-norm dominant eigenvector of a Hermitian matrix with deterministic
/// tie-breaking: candidates whose eigenvalue lies within `1e-10` (relative)
/// of the top are phase-normalized and the one with the lexicographically
/// largest real part of its first non-negligible entry is returned.
pub fn dominant_eigvec<T: Real>(x: &CMatrix<T>) -> (T, CVector<T>) {
    let (vals, vecs) = hermitian_eigen(x);
    let top = vals[0];
    let tie = T::lit(1e-10) * top.abs().max(T::one());
    let small = T::lit(1e-12);
    let mut best: Option<CVector<T>> = None;
    for (i, &v) in vals.iter().enumerate() {
        if top - v > tie {
            break;
        }
        let cand = phase_normalize(&vecs.column(i).into_owned());
        best = match best {
            None => Some(cand),
            Some(cur) => {
                if lexi_greater(&cand, &cur, small) {
                    Some(cand)
                } else {
                    Some(cur)
                }
            }
        };
    }
    (top, best.expect("non-empty matrix"))
}

fn lexi_greater<T: Real>(a: &CVector<T>, b: &CVector<T>, small: T) -> bool {
    for (x, y) in a.iter().zip(b.iter()) {
        if cabs(*x) <= small && cabs(*y) <= small {
            continue;
        }
        if (x.re - y.re).abs() > small {
            return x.re > y.re;
        }
    }
    false
}

/// Checks the Hermitian / PSD tolerances used throughout the crate:
/// `‖X − X^H‖_F ≤ tol·‖X‖_F` and `λ_min ≥ −tol·Tr X`.
pub fn check_hermitian_psd<T: Real>(x: &CMatrix<T>, tol: T) -> Result<()> {
    if x.nrows() != x.ncols() {
        return Err(Error::NotPsd(format!(
            "non-square {}x{}",
            x.nrows(),
            x.ncols()
        )));
    }
    let scale = frobenius(x);
    let asym = frobenius(&(x - x.adjoint()));
    if asym > tol * scale {
        return Err(Error::NotPsd(format!(
            "asymmetry {} exceeds {}",
            asym,
            tol * scale
        )));
    }
    if x.nrows() == 0 {
        return Ok(());
    }
    let (vals, _) = hermitian_eigen(x);
    let tr = trace_real(x);
    let floor = -(tol * tr.abs());
    let min = vals[vals.len() - 1];
    if min < floor {
        return Err(Error::NotPsd(format!(
            "smallest eigenvalue {} below {}",
            min, floor
        )));
    }
    Ok(())
}

/// Real symmetric embedding `[[Re X, −Im X], [Im X, Re X]]`.
pub fn embed_real<T: Real>(x: &CMatrix<T>) -> DMatrix<T> {
    let n = x.nrows();
    DMatrix::from_fn(2 * n, 2 * n, |r, c| {
        let z = x[(r % n, c % n)];
        match (r < n, c < n) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    })
}

/// Inverse of [`embed_real`], reading the top-left and bottom-left blocks.
pub fn unembed_real<T: Real>(m: &DMatrix<T>) -> CMatrix<T> {
    let n = m.nrows() / 2;
    CMatrix::from_fn(n, n, |r, c| Cplx::new(m[(r, c)], m[(r + n, c)]))
}

/// Number of real parameters of an `n×n` Hermitian matrix.
pub fn herm_dim(n: usize) -> usize {
    n * n
}

/// Parameter layout of a Hermitian matrix: the `n` real diagonal entries
/// first, then for each `a < b` (row-major) the pair `(Re X_ab, Im X_ab)`.
pub fn herm_param_index(n: usize, a: usize, b: usize) -> usize {
    debug_assert!(a < b && b < n);
    // pairs before row a: sum_{r<a} (n-1-r)
    let before = a * (2 * n - a - 1) / 2;
    n + 2 * (before + (b - a - 1))
}

pub fn herm_from_params<T: Real>(n: usize, p: &[T]) -> CMatrix<T> {
    let mut x = CMatrix::zeros(n, n);
    for a in 0..n {
        x[(a, a)] = Cplx::new(p[a], T::zero());
        for b in (a + 1)..n {
            let k = herm_param_index(n, a, b);
            let z = Cplx::new(p[k], p[k + 1]);
            x[(a, b)] = z;
            x[(b, a)] = z.conj();
        }
    }
    x
}

pub fn herm_to_params<T: Real>(x: &CMatrix<T>) -> Vec<T> {
    let n = x.nrows();
    let mut p = vec![T::zero(); herm_dim(n)];
    for a in 0..n {
        p[a] = x[(a, a)].re;
        for b in (a + 1)..n {
            let k = herm_param_index(n, a, b);
            let z = (x[(a, b)] + x[(b, a)].conj()) * T::lit(0.5);
            p[k] = z.re;
            p[k + 1] = z.im;
        }
    }
    p
}

/// Coefficients `c` with `Re Tr(B X) = c · params(X)` for Hermitian `X`.
pub fn herm_functional<T: Real>(b: &CMatrix<T>) -> Vec<T> {
    let n = b.nrows();
    let mut c = vec![T::zero(); herm_dim(n)];
    for a in 0..n {
        c[a] = b[(a, a)].re;
        for bb in (a + 1)..n {
            let k = herm_param_index(n, a, bb);
            // B_ba X_ab + B_ab X_ba, with X_ba = conj(X_ab)
            let s = b[(bb, a)] + b[(a, bb)].conj();
            c[k] = s.re;
            c[k + 1] = -s.im;
        }
    }
    c
}
