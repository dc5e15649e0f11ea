//! Central finite-difference gradients and Hessians.
//!
//! These are the independent oracles the analytic dual derivatives are judged
//! against: they only ever see the scalar objective, never its derivation.
//! Steps scale per coordinate as `step * max(1, |point_i|)`.

use crate::linalg::SymMatrix;
use crate::{Error, Result};

/// Step and acceptance tolerance for a finite-difference comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdConfig {
    pub step: f64,
    pub rel_tol: f64,
}

impl FdConfig {
    /// First-order central differences: step 1e-5, judged at 1e-5 relative.
    pub fn gradient_default() -> Self {
        FdConfig {
            step: 1e-5,
            rel_tol: 1e-5,
        }
    }

    /// Second-order central differences: a larger step (5e-4) keeps the
    /// O(eps/h²) cancellation error of second differences well below the
    /// 1e-4 relative acceptance threshold for objective values up to ~1e2.
    pub fn hessian_default() -> Self {
        FdConfig {
            step: 5e-4,
            rel_tol: 1e-4,
        }
    }
}

fn steps(point: &[f64], step: f64) -> Vec<f64> {
    point.iter().map(|x| step * x.abs().max(1.0)).collect()
}

fn finite(v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFiniteSample)
    }
}

/// Central-difference gradient: `(f(x + h_i e_i) − f(x − h_i e_i)) / (2 h_i)`.
pub fn fd_gradient<F: Fn(&[f64]) -> f64>(f: F, point: &[f64], cfg: &FdConfig) -> Result<Vec<f64>> {
    let h = steps(point, cfg.step);
    let mut x = point.to_vec();
    let mut grad = Vec::with_capacity(point.len());
    for i in 0..point.len() {
        let xi = point[i];
        x[i] = xi + h[i];
        let fp = finite(f(&x))?;
        x[i] = xi - h[i];
        let fm = finite(f(&x))?;
        x[i] = xi;
        grad.push((fp - fm) / (2.0 * h[i]));
    }
    Ok(grad)
}

/// Central-difference Hessian from the standard 4-point (off-diagonal) and
/// 3-point (diagonal) second-difference stencils.
pub fn fd_hessian<F: Fn(&[f64]) -> f64>(f: F, point: &[f64], cfg: &FdConfig) -> Result<SymMatrix> {
    let n = point.len();
    let h = steps(point, cfg.step);
    let mut x = point.to_vec();
    let f0 = finite(f(&x))?;
    let mut hess = SymMatrix::zeros(n);
    for i in 0..n {
        let xi = point[i];
        x[i] = xi + h[i];
        let fp = finite(f(&x))?;
        x[i] = xi - h[i];
        let fm = finite(f(&x))?;
        x[i] = xi;
        hess.set(i, i, (fp - 2.0 * f0 + fm) / (h[i] * h[i]));
        for j in (i + 1)..n {
            let xj = point[j];
            x[i] = xi + h[i];
            x[j] = xj + h[j];
            let fpp = finite(f(&x))?;
            x[j] = xj - h[j];
            let fpm = finite(f(&x))?;
            x[i] = xi - h[i];
            x[j] = xj + h[j];
            let fmp = finite(f(&x))?;
            x[j] = xj - h[j];
            let fmm = finite(f(&x))?;
            x[i] = xi;
            x[j] = xj;
            hess.set(i, j, (fpp - fpm - fmp + fmm) / (4.0 * h[i] * h[j]));
        }
    }
    Ok(hess)
}

/// `‖got − want‖∞ / max(1, ‖want‖∞)` — the relative-error measure used by all
/// finite-difference comparisons in this crate.
pub fn rel_err_vec(got: &[f64], want: &[f64]) -> f64 {
    let denom = want.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1.0);
    got.iter()
        .zip(want)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max)
        / denom
}

/// Entrywise analogue of [`rel_err_vec`] for matrices.
pub fn rel_err_mat(got: &SymMatrix, want: &SymMatrix) -> f64 {
    assert_eq!(got.dim(), want.dim());
    let denom = want.max_abs().max(1.0);
    let mut worst = 0.0f64;
    for i in 0..got.dim() {
        for j in 0..got.dim() {
            worst = worst.max((got.get(i, j) - want.get(i, j)).abs());
        }
    }
    worst / denom
}
