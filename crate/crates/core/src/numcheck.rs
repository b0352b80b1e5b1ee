//! Central finite-difference oracles.
//!
//! These are deliberately independent of the jet arithmetic: they re-evaluate
//! fields at shifted points and difference the values. They are the
//! truncation-limited reference that the exact-derivative path is tested
//! against, and are not used anywhere in the computation pipeline itself.

use nalgebra::DMatrix;

use crate::calculus::MetricField;
use crate::error::{GeomError, Result};
use crate::tensor::ThreeTensor;

/// Central first derivative of a scalar function.
pub fn fd_partial(f: &dyn Fn(&[f64]) -> f64, x: &[f64], i: usize, h: f64) -> f64 {
    let mut xp = x.to_vec();
    let mut xm = x.to_vec();
    xp[i] += h;
    xm[i] -= h;
    (f(&xp) - f(&xm)) / (2.0 * h)
}

/// Central second derivative of a scalar function.
pub fn fd_second(f: &dyn Fn(&[f64]) -> f64, x: &[f64], i: usize, j: usize, h: f64) -> f64 {
    if i == j {
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[i] += h;
        xm[i] -= h;
        (f(&xp) - 2.0 * f(x) + f(&xm)) / (h * h)
    } else {
        let mut xpp = x.to_vec();
        let mut xpm = x.to_vec();
        let mut xmp = x.to_vec();
        let mut xmm = x.to_vec();
        xpp[i] += h;
        xpp[j] += h;
        xpm[i] += h;
        xpm[j] -= h;
        xmp[i] -= h;
        xmp[j] += h;
        xmm[i] -= h;
        xmm[j] -= h;
        (f(&xpp) - f(&xpm) - f(&xmp) + f(&xmm)) / (4.0 * h * h)
    }
}

/// Finite-difference first derivatives of metric coefficients:
/// `out.get(k, i, j) ≈ ∂_k g_ij`.
pub fn fd_metric_first(g: &MetricField, x: &[f64], h: f64) -> ThreeTensor {
    let n = g.dim();
    let mut out = ThreeTensor::zeros(n);
    for k in 0..n {
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[k] += h;
        xm[k] -= h;
        let gp = g.eval(&xp);
        let gm = g.eval(&xm);
        for i in 0..n {
            for j in 0..n {
                out.set(k, i, j, (gp[(i, j)] - gm[(i, j)]) / (2.0 * h));
            }
        }
    }
    out
}

/// Christoffel symbols from the Koszul formula evaluated with central
/// finite differences only.
pub fn fd_christoffel(g: &MetricField, x: &[f64], h: f64) -> Result<ThreeTensor> {
    let n = g.dim();
    let gm: DMatrix<f64> = g.eval(x);
    let ginv = gm
        .try_inverse()
        .ok_or_else(|| GeomError::Degeneracy("metric is singular".into()))?;
    let dg = fd_metric_first(g, x, h);
    let mut gamma = ThreeTensor::zeros(n);
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let mut acc = 0.0;
                for l in 0..n {
                    acc += 0.5
                        * ginv[(k, l)]
                        * (dg.get(i, j, l) + dg.get(j, i, l) - dg.get(l, i, j));
                }
                gamma.set(k, i, j, acc);
            }
        }
    }
    Ok(gamma)
}

/// Max-abs deviation between jet-derived and finite-difference Christoffels.
pub fn christoffel_fd_residual(g: &MetricField, x: &[f64], h: f64) -> Result<f64> {
    let exact = crate::calculus::christoffel(g, x)?;
    let fd = fd_christoffel(g, x, h)?;
    let n = g.dim();
    let mut worst = 0.0f64;
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                worst = worst.max((exact.get(k, i, j) - fd.get(k, i, j)).abs());
            }
        }
    }
    Ok(worst)
}
