//! Dense complex matrix helpers on top of nalgebra.

use nalgebra::{Complex, DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use super::layout::permutation_map;
use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Eigenvalues below this are treated as numerical noise around zero.
pub const EIG_CLAMP: f64 = -1e-12;

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

#[inline]
pub fn cr(re: f64) -> C64 {
    Complex::new(re, 0.0)
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn kron_vec(a: &CVector, b: &CVector) -> CVector {
    let mut out = CVector::zeros(a.len() * b.len());
    for i in 0..a.len() {
        for j in 0..b.len() {
            out[i * b.len() + j] = a[i] * b[j];
        }
    }
    out
}

pub fn outer(u: &CVector, v: &CVector) -> CMatrix {
    u * v.adjoint()
}

pub fn projector(v: &CVector) -> CMatrix {
    outer(v, v)
}

pub fn basis(d: usize, i: usize) -> CVector {
    let mut v = CVector::zeros(d);
    v[i] = cr(1.0);
    v
}

pub fn identity(d: usize) -> CMatrix {
    CMatrix::identity(d, d)
}

pub fn check_finite(m: &CMatrix) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * cr(0.5)
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    if a.shape() != b.shape() {
        return f64::INFINITY;
    }
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn is_hermitian(m: &CMatrix, tol: f64) -> bool {
    m.is_square() && max_abs_diff(m, &m.adjoint()) <= tol
}

/// Eigen-decomposition of the Hermitian part of `m`, eigenvalues in
/// descending order with matching eigenvector columns.
pub fn eigh(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let h = hermitian_part(m);
    let eig = h.symmetric_eigen();
    let d = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vecs = CMatrix::zeros(d, d);
    for (k, &i) in order.iter().enumerate() {
        vecs.set_column(k, &eig.eigenvectors.column(i));
    }
    (vals, vecs)
}

/// Eigenvalues of the Hermitian part of `m`, descending.
pub fn eigenvalues_h(m: &CMatrix) -> Vec<f64> {
    let mut v: Vec<f64> = hermitian_part(m).symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

fn from_spectrum(vals: &[f64], vecs: &CMatrix, f: impl Fn(f64) -> f64) -> CMatrix {
    let d = vals.len();
    let mut scaled = vecs.clone();
    for k in 0..d {
        let s = cr(f(vals[k]));
        scaled.column_mut(k).iter_mut().for_each(|z| *z *= s);
    }
    scaled * vecs.adjoint()
}

/// Square root of a positive semidefinite matrix; negative eigenvalues are
/// clamped to zero.
pub fn psd_sqrt(m: &CMatrix) -> CMatrix {
    let (vals, vecs) = eigh(m);
    from_spectrum(&vals, &vecs, |l| l.max(0.0).sqrt())
}

/// Moore-Penrose inverse square root of a PSD matrix. Eigenvalues at or
/// below `tol` are treated as kernel. Returns the inverse root and the
/// projector onto the kernel.
pub fn psd_pinv_sqrt(m: &CMatrix, tol: f64) -> (CMatrix, CMatrix) {
    let (vals, vecs) = eigh(m);
    let inv = from_spectrum(&vals, &vecs, |l| if l > tol { 1.0 / l.sqrt() } else { 0.0 });
    let ker = from_spectrum(&vals, &vecs, |l| if l > tol { 0.0 } else { 1.0 });
    (inv, ker)
}

/// Sum of singular values.
pub fn trace_norm(m: &CMatrix) -> Result<f64> {
    check_finite(m)?;
    if m.is_square() && is_hermitian(m, 1e-13 * (1.0 + m.norm())) {
        return Ok(eigenvalues_h(m).iter().map(|l| l.abs()).sum());
    }
    Ok(m.clone().singular_values().iter().sum())
}

pub fn frobenius_norm(m: &CMatrix) -> f64 {
    m.norm()
}

pub fn trace(m: &CMatrix) -> C64 {
    m.trace()
}

/// Uhlmann fidelity (tr sqrt(sqrt(a) b sqrt(a)))^2 of two PSD matrices.
///
/// Computed as ||sqrt(a) sqrt(b)||_1^2. Eigenvalues below 1e-14 of the
/// largest are dropped before the square roots, since their square roots
/// would otherwise inject ~1e-7 noise.
pub fn fidelity_psd(a: &CMatrix, b: &CMatrix) -> f64 {
    let sa = psd_sqrt_truncated(a);
    let sb = psd_sqrt_truncated(b);
    let s: f64 = (sa * sb).singular_values().iter().sum();
    s * s
}

/// Square root of a PSD matrix with eigenvalues below 1e-14 of the largest
/// dropped, so roundoff in the kernel does not grow to its square root.
pub fn psd_sqrt_truncated(m: &CMatrix) -> CMatrix {
    let (vals, vecs) = eigh(m);
    let cut = 1e-14 * vals.first().copied().unwrap_or(0.0).max(0.0);
    from_spectrum(&vals, &vecs, |l| if l > cut { l.sqrt() } else { 0.0 })
}

/// Fidelity of `C^dag C` and `D^dag D` computed as the squared trace norm of
/// `C D^dag`. Useful when the states come as purification factors with few
/// rows.
pub fn fidelity_from_factors(cf: &CMatrix, df: &CMatrix) -> f64 {
    let m = cf * df.adjoint();
    let s: f64 = m.singular_values().iter().sum();
    s * s
}

/// Reorder tensor factors of a square matrix; new factor `k` is old factor `perm[k]`.
pub fn permute_matrix(m: &CMatrix, dims: &[usize], perm: &[usize]) -> CMatrix {
    let map = permutation_map(dims, perm);
    let d = map.len();
    CMatrix::from_fn(d, d, |i, j| m[(map[i], map[j])])
}

pub fn permute_vector(v: &CVector, dims: &[usize], perm: &[usize]) -> CVector {
    let map = permutation_map(dims, perm);
    CVector::from_fn(map.len(), |i, _| v[map[i]])
}

/// Partial trace keeping the factors at `keep` (output in the order given).
pub fn partial_trace(m: &CMatrix, dims: &[usize], keep: &[usize]) -> CMatrix {
    let rest: Vec<usize> = (0..dims.len()).filter(|i| !keep.contains(i)).collect();
    let mut perm = keep.to_vec();
    perm.extend(&rest);
    let map = permutation_map(dims, &perm);
    let dk: usize = keep.iter().map(|&i| dims[i]).product();
    let dt: usize = rest.iter().map(|&i| dims[i]).product();
    CMatrix::from_fn(dk, dk, |a, b| {
        let mut s = cr(0.0);
        for t in 0..dt {
            s += m[(map[a * dt + t], map[b * dt + t])];
        }
        s
    })
}

/// Reduced state of a pure vector on the factors at `keep`, as `C C^dag`
/// where `C` is the vector reshaped to (kept, traced).
pub fn reshape_pure(v: &CVector, dims: &[usize], keep: &[usize]) -> CMatrix {
    let rest: Vec<usize> = (0..dims.len()).filter(|i| !keep.contains(i)).collect();
    let mut perm = keep.to_vec();
    perm.extend(&rest);
    let w = permute_vector(v, dims, &perm);
    let dk: usize = keep.iter().map(|&i| dims[i]).product();
    let dt: usize = rest.iter().map(|&i| dims[i]).product();
    CMatrix::from_fn(dk, dt, |a, t| w[a * dt + t])
}

pub fn random_gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c(re, im)
    })
}

/// Haar-random unitary via QR with phase correction.
pub fn random_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    let g = random_gaussian_matrix(d, d, rng);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for k in 0..d {
        let rk = r[(k, k)];
        let ph = if rk.norm() > 0.0 { rk / rk.norm() } else { cr(1.0) };
        q.column_mut(k).iter_mut().for_each(|z| *z *= ph);
    }
    q
}

/// Isometry with `cols` orthonormal columns in dimension `rows`.
pub fn random_isometry<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    let u = random_unitary(rows, rng);
    u.columns(0, cols).into_owned()
}

pub fn random_vector<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CVector {
    let g = random_gaussian_matrix(d, 1, rng);
    let n = g.norm();
    CVector::from_iterator(d, g.iter().map(|z| z / cr(n)))
}

/// Random density matrix of the given rank (induced measure).
pub fn random_density<R: Rng + ?Sized>(d: usize, rank: usize, rng: &mut R) -> CMatrix {
    let g = random_gaussian_matrix(d, rank.max(1), rng);
    let m = &g * g.adjoint();
    let t = m.trace().re;
    m / cr(t)
}
