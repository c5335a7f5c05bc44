//! Dense linear algebra kernels.
//!
//! Large real-symmetric eigenproblems go to LAPACK `dsyevd` (the only
//! external routine this crate binds). Small matrices that appear inside the
//! Trotter inner loop are handled by a local cyclic Jacobi solver so that the
//! hot path stays allocation-light and thread-independent.

use ndarray::{Array1, Array2, ArrayView2};
use num_complex::Complex64;
use std::os::raw::c_char;

use crate::error::{Error, Result};

pub type C64 = Complex64;

extern "C" {
    fn dsyevd_(
        jobz: *const c_char,
        uplo: *const c_char,
        n: *const i32,
        a: *mut f64,
        lda: *const i32,
        w: *mut f64,
        work: *mut f64,
        lwork: *const i32,
        iwork: *mut i32,
        liwork: *const i32,
        info: *mut i32,
    );
}

/// Eigendecomposition of a real symmetric matrix via LAPACK `dsyevd`.
///
/// Returns ascending eigenvalues and a matrix whose column `k` is the k-th
/// eigenvector.
pub fn eigh_real(a: &ArrayView2<f64>) -> Result<(Array1<f64>, Array2<f64>)> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::Dimension(format!("eigh on {}x{}", n, a.nrows())));
    }
    if n == 0 {
        return Ok((Array1::zeros(0), Array2::zeros((0, 0))));
    }
    // Row-major symmetric input equals its column-major transpose, so the
    // buffer can be handed to LAPACK as-is.
    let mut buf: Vec<f64> = a.iter().copied().collect();
    let mut w = vec![0.0f64; n];
    let n_i = n as i32;
    let (jobz, uplo) = (b'V' as c_char, b'L' as c_char);
    let mut info = 0i32;

    // Workspace query.
    let (mut wkopt, mut iwkopt) = (0.0f64, 0i32);
    let minus_one = -1i32;
    unsafe {
        dsyevd_(
            &jobz,
            &uplo,
            &n_i,
            buf.as_mut_ptr(),
            &n_i,
            w.as_mut_ptr(),
            &mut wkopt,
            &minus_one,
            &mut iwkopt,
            &minus_one,
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Convergence(format!("dsyevd workspace query info={info}")));
    }
    let lwork = wkopt as i32;
    let liwork = iwkopt;
    let mut work = vec![0.0f64; lwork as usize];
    let mut iwork = vec![0i32; liwork as usize];
    unsafe {
        dsyevd_(
            &jobz,
            &uplo,
            &n_i,
            buf.as_mut_ptr(),
            &n_i,
            w.as_mut_ptr(),
            work.as_mut_ptr(),
            &lwork,
            iwork.as_mut_ptr(),
            &liwork,
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Convergence(format!("dsyevd info={info}")));
    }
    // LAPACK wrote eigenvectors column-major: buffer chunk k holds vector k.
    // Interpreting the buffer row-major yields vector k in row k; transpose
    // to the column convention.
    let rows = Array2::from_shape_vec((n, n), buf)
        .map_err(|e| Error::Dimension(e.to_string()))?;
    let vecs = rows.t().as_standard_layout().to_owned();
    Ok((Array1::from_vec(w), vecs))
}

/// Cyclic Jacobi eigensolver for small real symmetric matrices (n <= 32).
///
/// Deterministic and allocation-light; used inside the Trotter step loop
/// where calling into LAPACK per step is not worth the overhead.
pub fn eigh_small(a: &ArrayView2<f64>) -> (Vec<f64>, Array2<f64>) {
    let n = a.nrows();
    debug_assert!(n <= 32, "eigh_small is for tiny matrices");
    let mut m = a.to_owned();
    let mut v = Array2::<f64>::eye(n);
    for _sweep in 0..50 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += m[[p, q]] * m[[p, q]];
            }
        }
        if off < 1e-26 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[[p, q]];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let (app, aqq) = (m[[p, p]], m[[q, q]]);
                let tau = (aqq - app) / (2.0 * apq);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[[k, p]], m[[k, q]]);
                    m[[k, p]] = c * mkp - s * mkq;
                    m[[k, q]] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[[p, k]], m[[q, k]]);
                    m[[p, k]] = c * mpk - s * mqk;
                    m[[q, k]] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let (vkp, vkq) = (v[[k, p]], v[[k, q]]);
                    v[[k, p]] = c * vkp - s * vkq;
                    v[[k, q]] = s * vkp + c * vkq;
                }
            }
        }
    }
    // Sort ascending by eigenvalue for a stable convention.
    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| m[[i, i]]).collect();
    order.sort_by(|&i, &j| diag[i].partial_cmp(&diag[j]).unwrap());
    let vals: Vec<f64> = order.iter().map(|&i| diag[i]).collect();
    let mut vecs = Array2::<f64>::zeros((n, n));
    for (new, &old) in order.iter().enumerate() {
        for r in 0..n {
            vecs[[r, new]] = v[[r, old]];
        }
    }
    (vals, vecs)
}

/// exp(-i * theta * H) for a small real symmetric H, via its eigensystem.
pub fn expm_i_sym(h: &ArrayView2<f64>, theta: f64) -> Array2<C64> {
    let (vals, vecs) = eigh_small(h);
    expm_i_from_eig(&vals, &vecs.view(), theta)
}

/// exp(-i * theta * H) from a precomputed eigensystem of H.
pub fn expm_i_from_eig(vals: &[f64], vecs: &ArrayView2<f64>, theta: f64) -> Array2<C64> {
    let n = vals.len();
    let phases: Vec<C64> = vals
        .iter()
        .map(|&l| C64::from_polar(1.0, -theta * l))
        .collect();
    let mut out = Array2::<C64>::zeros((n, n));
    for r in 0..n {
        for c in 0..n {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..n {
                acc += phases[k] * vecs[[r, k]] * vecs[[c, k]];
            }
            out[[r, c]] = acc;
        }
    }
    out
}

/// Kronecker product of complex matrices.
pub fn kron_c(a: &ArrayView2<C64>, b: &ArrayView2<C64>) -> Array2<C64> {
    let (ar, ac) = (a.nrows(), a.ncols());
    let (br, bc) = (b.nrows(), b.ncols());
    let mut out = Array2::<C64>::zeros((ar * br, ac * bc));
    for i in 0..ar {
        for j in 0..ac {
            let aij = a[[i, j]];
            for k in 0..br {
                for l in 0..bc {
                    out[[i * br + k, j * bc + l]] = aij * b[[k, l]];
                }
            }
        }
    }
    out
}

/// Kronecker product of real matrices.
pub fn kron_r(a: &ArrayView2<f64>, b: &ArrayView2<f64>) -> Array2<f64> {
    let (ar, ac) = (a.nrows(), a.ncols());
    let (br, bc) = (b.nrows(), b.ncols());
    let mut out = Array2::<f64>::zeros((ar * br, ac * bc));
    for i in 0..ar {
        for j in 0..ac {
            let aij = a[[i, j]];
            for k in 0..br {
                for l in 0..bc {
                    out[[i * br + k, j * bc + l]] = aij * b[[k, l]];
                }
            }
        }
    }
    out
}

/// Dense complex matrix product (row-major, naive blocked by ndarray).
pub fn matmul_c(a: &ArrayView2<C64>, b: &ArrayView2<C64>) -> Array2<C64> {
    let (n, k) = (a.nrows(), a.ncols());
    let m = b.ncols();
    debug_assert_eq!(k, b.nrows());
    let mut out = Array2::<C64>::zeros((n, m));
    for i in 0..n {
        for p in 0..k {
            let aip = a[[i, p]];
            if aip.norm_sqr() == 0.0 {
                continue;
            }
            for j in 0..m {
                out[[i, j]] += aip * b[[p, j]];
            }
        }
    }
    out
}

/// Conjugate transpose.
pub fn dagger(a: &ArrayView2<C64>) -> Array2<C64> {
    let mut out = Array2::<C64>::zeros((a.ncols(), a.nrows()));
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            out[[j, i]] = a[[i, j]].conj();
        }
    }
    out
}

pub fn trace_c(a: &ArrayView2<C64>) -> C64 {
    (0..a.nrows().min(a.ncols())).map(|i| a[[i, i]]).sum()
}

/// Largest |a - b| entry between two complex matrices.
pub fn max_abs_diff(a: &ArrayView2<C64>, b: &ArrayView2<C64>) -> f64 {
    let mut m = 0.0f64;
    for (x, y) in a.iter().zip(b.iter()) {
        m = m.max((x - y).norm());
    }
    m
}

/// Spectral-norm distance of A from unitarity, estimated as the largest
/// deviation of the singular values of A from 1 via ||A^dag A - I||_F.
pub fn unitarity_defect(a: &ArrayView2<C64>) -> f64 {
    let ad = dagger(a);
    let g = matmul_c(&ad.view(), a);
    let mut acc = 0.0;
    for i in 0..g.nrows() {
        for j in 0..g.ncols() {
            let target = if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
            acc += (g[[i, j]] - target).norm_sqr();
        }
    }
    acc.sqrt()
}

/// Haar-ish random unitary by QR (modified Gram-Schmidt) of a complex
/// Ginibre matrix. Good enough for test inputs.
pub fn random_unitary(n: usize, rng: &mut impl rand::Rng) -> Array2<C64> {
    use rand::distributions::Distribution;
    let normal = StandardNormal;
    let mut a = Array2::<C64>::zeros((n, n));
    for x in a.iter_mut() {
        *x = C64::new(normal.sample(rng), normal.sample(rng));
    }
    // Column-wise modified Gram-Schmidt.
    for j in 0..n {
        for k in 0..j {
            let mut dot = C64::new(0.0, 0.0);
            for r in 0..n {
                dot += a[[r, k]].conj() * a[[r, j]];
            }
            for r in 0..n {
                let v = a[[r, k]];
                a[[r, j]] -= dot * v;
            }
        }
        let norm: f64 = (0..n).map(|r| a[[r, j]].norm_sqr()).sum::<f64>().sqrt();
        for r in 0..n {
            a[[r, j]] /= norm;
        }
    }
    a
}

/// Standard normal sampler (Box-Muller), avoiding a dependency on
/// `rand_distr` for this one distribution.
pub struct StandardNormal;

impl rand::distributions::Distribution<f64> for StandardNormal {
    fn sample<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        loop {
            let u: f64 = rng.gen::<f64>();
            let v: f64 = rng.gen::<f64>();
            if u > f64::MIN_POSITIVE {
                return (-2.0 * u.ln()).sqrt() * (2.0 * std::f64::consts::PI * v).cos();
            }
        }
    }
}
