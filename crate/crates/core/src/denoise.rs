//! Tikhonov smoothing of adjoint histograms along velocity.
//!
//! Each position row is replaced by the solution of
//! `(I - c_s D2) q~ = q`, where `D2` is the second difference over velocity
//! with mirrored ghost cells (homogeneous Neumann). The columns of `D2` sum
//! to zero, so every row keeps its total mass.

use rayon::prelude::*;

use crate::domain::GridField;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DenoiseParams {
    pub c_s: f64,
}

impl DenoiseParams {
    pub fn new(c_s: f64) -> Result<Self> {
        if !(c_s >= 0.0 && c_s.is_finite()) {
            return Err(Error::invalid("c_s", format!("must be non-negative, got {c_s}")));
        }
        Ok(Self { c_s })
    }
}

/// Thomas algorithm for a tridiagonal system; `rhs` is overwritten with the
/// solution. `lower[0]` and `upper[n-1]` are ignored.
pub fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &mut [f64]) {
    let n = rhs.len();
    assert!(lower.len() == n && diag.len() == n && upper.len() == n);
    if n == 0 {
        return;
    }
    let mut c = vec![0.0; n];
    let mut denom = diag[0];
    c[0] = upper[0] / denom;
    rhs[0] /= denom;
    for k in 1..n {
        denom = diag[k] - lower[k] * c[k - 1];
        c[k] = upper[k] / denom;
        rhs[k] = (rhs[k] - lower[k] * rhs[k - 1]) / denom;
    }
    for k in (0..n - 1).rev() {
        rhs[k] -= c[k] * rhs[k + 1];
    }
}

fn smooth_row(row: &mut [f64], r: f64) {
    let n = row.len();
    let lower = vec![-r; n];
    let upper = vec![-r; n];
    let mut diag = vec![1.0 + 2.0 * r; n];
    // mirrored ghost cells remove one neighbour coupling at each end
    diag[0] = 1.0 + r;
    diag[n - 1] = 1.0 + r;
    solve_tridiagonal(&lower, &diag, &upper, row);
}

/// Smooths every position row of `q` along velocity.
///
/// # Panics
/// If `dv <= 0` or `q` holds non-finite values.
pub fn denoise_field(q: &GridField, params: &DenoiseParams, dv: f64) -> GridField {
    assert!(dv > 0.0, "cell width must be positive");
    assert!(q.values().iter().all(|v| v.is_finite()), "non-finite histogram value");
    let mut out = q.clone();
    if params.c_s == 0.0 {
        return out;
    }
    let r = params.c_s / (dv * dv);
    let n_v = out.n_v();
    out.values_mut()
        .par_chunks_exact_mut(n_v)
        .for_each(|row| smooth_row(row, r));
    out
}
