//! Dense kernels for the small symmetric matrices of the diffusion
//! coefficient. Matrices are row-major `d * d` slices.

use crate::error::{Error, Result};

/// In-place lower Cholesky factorization; the strict upper triangle is zeroed.
pub fn cholesky_in_place(a: &mut [f64], d: usize) -> std::result::Result<(), ()> {
    debug_assert_eq!(a.len(), d * d);
    for j in 0..d {
        let mut diag = a[j * d + j];
        for k in 0..j {
            diag -= a[j * d + k] * a[j * d + k];
        }
        if !(diag > 0.0) || !diag.is_finite() {
            return Err(());
        }
        let ljj = diag.sqrt();
        a[j * d + j] = ljj;
        for i in (j + 1)..d {
            let mut s = a[i * d + j];
            for k in 0..j {
                s -= a[i * d + k] * a[j * d + k];
            }
            a[i * d + j] = s / ljj;
        }
        for k in (j + 1)..d {
            a[j * d + k] = 0.0;
        }
    }
    Ok(())
}

/// Lower Cholesky factor of `a`, with the point included in the error.
pub fn cholesky(a: &[f64], d: usize, at: &[f64]) -> Result<Vec<f64>> {
    let mut l = a.to_vec();
    cholesky_in_place(&mut l, d).map_err(|_| Error::SingularMatrix { point: at.to_vec() })?;
    Ok(l)
}

/// `log det A` from its Cholesky factor.
pub fn log_det(l: &[f64], d: usize) -> f64 {
    (0..d).map(|i| l[i * d + i].ln()).sum::<f64>() * 2.0
}

/// Quadratic form `v . A^{-1} v` from the Cholesky factor of `A`.
pub fn inv_quad_form(l: &[f64], d: usize, v: &[f64], scratch: &mut [f64]) -> f64 {
    // forward solve L w = v, then |w|^2
    let mut acc = 0.0;
    for i in 0..d {
        let mut s = v[i];
        for k in 0..i {
            s -= l[i * d + k] * scratch[k];
        }
        let w = s / l[i * d + i];
        scratch[i] = w;
        acc += w * w;
    }
    acc
}

/// `out = L z` for lower-triangular `L`.
pub fn lower_mul(l: &[f64], d: usize, z: &[f64], out: &mut [f64]) {
    for i in 0..d {
        let mut s = 0.0;
        for k in 0..=i {
            s += l[i * d + k] * z[k];
        }
        out[i] = s;
    }
}

/// Relative asymmetry `max |a_ij - a_ji| / max |a_ij|`.
pub fn asymmetry(a: &[f64], d: usize) -> f64 {
    let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    let mut worst = 0.0f64;
    for i in 0..d {
        for j in (i + 1)..d {
            worst = worst.max((a[i * d + j] - a[j * d + i]).abs());
        }
    }
    worst / scale
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
pub fn sym_eigenvalues(a: &[f64], d: usize) -> Vec<f64> {
    let mut m = a.to_vec();
    for _sweep in 0..100 {
        let off: f64 = (0..d)
            .flat_map(|i| (0..d).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i * d + j] * m[i * d + j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..d {
            for q in (p + 1)..d {
                let apq = m[p * d + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (m[q * d + q] - m[p * d + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..d {
                    let mkp = m[k * d + p];
                    let mkq = m[k * d + q];
                    m[k * d + p] = c * mkp - s * mkq;
                    m[k * d + q] = s * mkp + c * mkq;
                }
                for k in 0..d {
                    let mpk = m[p * d + k];
                    let mqk = m[q * d + k];
                    m[p * d + k] = c * mpk - s * mqk;
                    m[q * d + k] = s * mpk + c * mqk;
                }
            }
        }
    }
    (0..d).map(|i| m[i * d + i]).collect()
}
