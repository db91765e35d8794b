//! Dense complex helpers shared by every module: rank-revealing subspaces,
//! PSD square roots, guarded solves and seeded random matrices.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type C64 = Complex64;
pub type Mat = DMatrix<C64>;
pub type Vector = DVector<C64>;

/// Default relative rank tolerance.
pub const RTOL: f64 = 1e-10;
/// Default condition-number ceiling for resolvent-set membership.
pub const COND_MAX: f64 = 1e12;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

pub fn eye(n: usize) -> Mat {
    Mat::identity(n, n)
}

pub fn zeros(r: usize, c: usize) -> Mat {
    Mat::zeros(r, c)
}

pub fn to_complex(m: &DMatrix<f64>) -> Mat {
    m.map(re)
}

/// Orthonormal basis of ran `m`, dropping singular directions below
/// `rtol * sigma_max`.
pub fn column_space(m: &Mat, rtol: f64) -> Mat {
    column_space_scaled(m, rtol, 0.0)
}

/// As [`column_space`] with threshold `rtol * max(sigma_max, scale)`, for
/// matrices whose natural size is known (blocks of orthonormal bases).
pub fn column_space_scaled(m: &Mat, rtol: f64, scale: f64) -> Mat {
    let (r, c) = m.shape();
    if r == 0 || c == 0 {
        return zeros(r, 0);
    }
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("svd u");
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    if smax == 0.0 {
        return zeros(r, 0);
    }
    let cut = rtol * smax.max(scale);
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] > cut)
        .collect();
    Mat::from_fn(r, keep.len(), |i, j| u[(i, keep[j])])
}

/// Orthonormal basis of ker `m` at relative tolerance `rtol`.
///
/// Wide matrices are padded with zero rows so that the SVD delivers a full
/// right singular basis. The zero matrix yields the whole space.
pub fn nullspace(m: &Mat, rtol: f64) -> Mat {
    nullspace_scaled(m, rtol, 0.0)
}

/// As [`nullspace`] with threshold `rtol * max(sigma_max, scale)`.
pub fn nullspace_scaled(m: &Mat, rtol: f64, scale: f64) -> Mat {
    let (r, c) = m.shape();
    if c == 0 {
        return zeros(0, 0);
    }
    if r == 0 || m.iter().all(|z| *z == C64::new(0.0, 0.0)) {
        return eye(c);
    }
    let padded = if r < c {
        let mut p = zeros(c, c);
        p.view_mut((0, 0), (r, c)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = padded.svd(false, true);
    let vt = svd.v_t.expect("svd v_t");
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let cut = rtol * smax.max(scale);
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] <= cut)
        .collect();
    Mat::from_fn(c, keep.len(), |i, j| vt[(keep[j], i)].conj())
}

pub fn singular_values(m: &Mat) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return vec![];
    }
    let mut s: Vec<f64> = m.clone().singular_values().iter().cloned().collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap());
    s
}

pub fn rank(m: &Mat, rtol: f64) -> usize {
    let s = singular_values(m);
    match s.first() {
        Some(&smax) if smax > 0.0 => s.iter().filter(|&&x| x > rtol * smax).count(),
        _ => 0,
    }
}

pub fn sigma_min(m: &Mat) -> f64 {
    singular_values(m).last().cloned().unwrap_or(0.0)
}

/// Spectral norm.
pub fn norm2(m: &Mat) -> f64 {
    singular_values(m).first().cloned().unwrap_or(0.0)
}

pub fn hstack(blocks: &[&Mat]) -> Mat {
    let r = blocks.first().map(|b| b.nrows()).unwrap_or(0);
    let c: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = zeros(r, c);
    let mut off = 0;
    for b in blocks {
        assert_eq!(b.nrows(), r, "hstack row mismatch");
        out.view_mut((0, off), b.shape()).copy_from(*b);
        off += b.ncols();
    }
    out
}

pub fn vstack(blocks: &[&Mat]) -> Mat {
    let c = blocks.first().map(|b| b.ncols()).unwrap_or(0);
    let r: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = zeros(r, c);
    let mut off = 0;
    for b in blocks {
        assert_eq!(b.ncols(), c, "vstack column mismatch");
        out.view_mut((off, 0), b.shape()).copy_from(*b);
        off += b.nrows();
    }
    out
}

pub fn block_diag(blocks: &[&Mat]) -> Mat {
    let r: usize = blocks.iter().map(|b| b.nrows()).sum();
    let c: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = zeros(r, c);
    let (mut ro, mut co) = (0, 0);
    for b in blocks {
        out.view_mut((ro, co), b.shape()).copy_from(*b);
        ro += b.nrows();
        co += b.ncols();
    }
    out
}

pub fn hermitian_part(m: &Mat) -> Mat {
    (m + m.adjoint()) * re(0.5)
}

/// Relative deviation from hermiticity, `||M - M*|| / ||M||`.
pub fn hermitian_residual(m: &Mat) -> f64 {
    let n = m.norm();
    if n == 0.0 {
        0.0
    } else {
        (m - m.adjoint()).norm() / n
    }
}

/// Eigenvalues (ascending) and eigenvectors of the Hermitian part of `m`.
pub fn hermitian_eigen(m: &Mat) -> (Vec<f64>, Mat) {
    let n = m.nrows();
    if n == 0 {
        return (vec![], zeros(0, 0));
    }
    let e = hermitian_part(m).symmetric_eigen();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| e.eigenvalues[a].partial_cmp(&e.eigenvalues[b]).unwrap());
    let vals = idx.iter().map(|&i| e.eigenvalues[i]).collect();
    let vecs = Mat::from_fn(n, n, |i, j| e.eigenvectors[(i, idx[j])]);
    (vals, vecs)
}

pub fn hermitian_eigenvalues(m: &Mat) -> Vec<f64> {
    if m.nrows() == 0 {
        return vec![];
    }
    let mut v: Vec<f64> = hermitian_part(m).symmetric_eigenvalues().iter().cloned().collect();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v
}

/// Number of (negative, positive) eigenvalues of a Hermitian matrix, with
/// eigenvalues below `rtol * max|eig|` in modulus counted as zero.
pub fn inertia(m: &Mat, rtol: f64) -> (usize, usize) {
    let ev = hermitian_eigenvalues(m);
    let scale = ev.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let neg = ev.iter().filter(|&&x| x < -rtol * scale).count();
    let pos = ev.iter().filter(|&&x| x > rtol * scale).count();
    (neg, pos)
}

/// Function of a Hermitian matrix through its eigendecomposition.
pub fn hermitian_fn(m: &Mat, f: impl Fn(f64) -> f64) -> Mat {
    let (vals, vecs) = hermitian_eigen(m);
    let d = Mat::from_diagonal(&Vector::from_iterator(vals.len(), vals.iter().map(|&x| re(f(x)))));
    &vecs * d * vecs.adjoint()
}

/// PSD square root. Eigenvalues below `n * eps * max|eigenvalue|` are
/// rounding noise and are set to zero, so a rank-deficient `m` keeps its kernel.
pub fn psd_sqrt(m: &Mat) -> Mat {
    let top = hermitian_eigenvalues(m).iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let cut = m.nrows().max(1) as f64 * f64::EPSILON * top;
    hermitian_fn(m, |x| if x <= cut { 0.0 } else { x.sqrt() })
}

/// Inverse square root of a positive definite matrix.
pub fn pd_inv_sqrt(m: &Mat) -> Mat {
    hermitian_fn(m, |x| 1.0 / x.sqrt())
}

pub fn min_eigenvalue(m: &Mat) -> f64 {
    hermitian_eigenvalues(m).first().cloned().unwrap_or(0.0)
}

/// Inverse by LU; `Err(cond)` if `a` is singular or its 1-norm condition
/// number exceeds `cond_max`.
pub fn inverse_checked(a: &Mat, cond_max: f64) -> Result<Mat, f64> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(f64::INFINITY);
    }
    if n == 0 {
        return Ok(zeros(0, 0));
    }
    let inv = match a.clone().lu().try_inverse() {
        Some(inv) => inv,
        None => return Err(f64::INFINITY),
    };
    let cond = norm1(a) * norm1(&inv);
    if !cond.is_finite() || cond > cond_max {
        return Err(cond);
    }
    Ok(inv)
}

/// `a^{-1} b` under the same condition check as [`inverse_checked`].
pub fn solve_checked(a: &Mat, b: &Mat, cond_max: f64) -> Result<Mat, f64> {
    inverse_checked(a, cond_max).map(|inv| inv * b)
}

/// Maximum absolute column sum.
pub fn norm1(m: &Mat) -> f64 {
    (0..m.ncols())
        .map(|j| m.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `||diff|| / scale`, with a zero scale mapping to the absolute value.
pub fn rel(diff: f64, scale: f64) -> f64 {
    if scale > 0.0 {
        diff / scale
    } else {
        diff
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix<R: Rng>(rng: &mut R, r: usize, c: usize) -> Mat {
    Mat::from_fn(r, c, |_, _| {
        C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    })
}

pub fn random_vector<R: Rng>(rng: &mut R, n: usize) -> Vector {
    Vector::from_fn(n, |_, _| {
        C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    })
}

pub fn random_hermitian<R: Rng>(rng: &mut R, n: usize) -> Mat {
    hermitian_part(&random_matrix(rng, n, n))
}

/// Random positive semidefinite matrix of the given rank.
pub fn random_psd<R: Rng>(rng: &mut R, n: usize, rank: usize) -> Mat {
    let x = random_matrix(rng, n, rank);
    &x * x.adjoint()
}

/// Smallest principal angle residual between two orthonormal bases:
/// `max(||(I - P_V) U||, ||(I - P_U) V||)`.
pub fn subspace_distance(u: &Mat, v: &Mat) -> f64 {
    if u.ncols() != v.ncols() {
        return 1.0;
    }
    let a = (u - v * (v.adjoint() * u)).norm();
    let b = (v - u * (u.adjoint() * v)).norm();
    a.max(b)
}
