//! Savitzky-Golay smoothing with symmetric window shrinking at the ends.

use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SgParams {
    pub window: usize,
    pub order: usize,
}

impl Default for SgParams {
    fn default() -> Self {
        Self { window: 9, order: 3 }
    }
}

impl SgParams {
    pub fn validate(&self) -> Result<()> {
        if self.window < 3 || self.window % 2 == 0 || self.order >= self.window {
            return Err(Error::BadFilterParams { window: self.window, order: self.order });
        }
        Ok(())
    }
}

/// Weights producing the smoothed value at the window center for a window
/// of `2 * half + 1` points and a polynomial of degree `order`.
pub fn center_weights(half: usize, order: usize) -> Vec<f64> {
    let rows = 2 * half + 1;
    let cols = order + 1;
    let scale = half.max(1) as f64;
    let a = DMatrix::from_fn(rows, cols, |r, c| {
        let u = (r as f64 - half as f64) / scale;
        libm::pow(u, c as f64)
    });
    let ata = a.transpose() * &a;
    let mut e0 = DVector::zeros(cols);
    e0[0] = 1.0;
    let z = ata.cholesky().expect("Vandermonde normal matrix is positive definite").solve(&e0);
    (a * z).iter().copied().collect()
}

/// Smooths one coordinate series. Near the ends the window shrinks
/// symmetrically; where the shrunken window cannot hold more than `order + 1`
/// points the sample is passed through, which keeps polynomials of degree
/// `<= order` exact everywhere.
pub fn smooth_series(xs: &[f64], sg: &SgParams) -> Result<Vec<f64>> {
    sg.validate()?;
    let n = xs.len();
    let half = sg.window / 2;
    let mut cache: Vec<Option<Vec<f64>>> = alloc::vec![None; half + 1];
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let h = half.min(i).min(n - 1 - i);
        if 2 * h < sg.order + 1 {
            out.push(xs[i]);
            continue;
        }
        let w = cache[h].get_or_insert_with(|| center_weights(h, sg.order));
        let mut acc = 0.0;
        for (k, wk) in w.iter().enumerate() {
            acc += wk * xs[i + k - h];
        }
        out.push(acc);
    }
    Ok(out)
}
