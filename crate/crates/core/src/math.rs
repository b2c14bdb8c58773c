//! Small numerical helpers shared across modules.

use alloc::vec::Vec;
use core::f64::consts::PI;
use nalgebra::{DMatrix, DVector};

/// Wraps an angle to `(-pi, pi]`.
pub fn wrap_angle(a: f64) -> f64 {
    let mut w = libm::fmod(a + PI, 2.0 * PI);
    if w < 0.0 {
        w += 2.0 * PI;
    }
    let w = w - PI;
    if w <= -PI {
        w + 2.0 * PI
    } else {
        w
    }
}

/// Distance on the task space: Euclidean on positions, with the yaw
/// coordinate (index 2, when present) scaled by `yaw_weight` meters per radian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathMetric {
    pub yaw_weight: f64,
}

impl Default for PathMetric {
    fn default() -> Self {
        Self { yaw_weight: 0.05 }
    }
}

impl PathMetric {
    pub fn weight(&self, axis: usize) -> f64 {
        if axis == 2 {
            self.yaw_weight
        } else {
            1.0
        }
    }

    pub fn dist_sq(&self, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
        let mut s = 0.0;
        for i in 0..a.len() {
            let d = (a[i] - b[i]) * self.weight(i);
            s += d * d;
        }
        s
    }

    pub fn dist(&self, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
        libm::sqrt(self.dist_sq(a, b))
    }

    pub fn path_length(&self, pts: &[DVector<f64>]) -> f64 {
        pts.windows(2).map(|w| self.dist(&w[0], &w[1])).sum()
    }

    /// Squared distance from `p` to the segment `[a, b]`.
    pub fn segment_dist_sq(&self, p: &DVector<f64>, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
        let mut ab2 = 0.0;
        let mut ap_ab = 0.0;
        for i in 0..p.len() {
            let w = self.weight(i) * self.weight(i);
            ab2 += w * (b[i] - a[i]) * (b[i] - a[i]);
            ap_ab += w * (p[i] - a[i]) * (b[i] - a[i]);
        }
        let t = if ab2 > 0.0 { (ap_ab / ab2).clamp(0.0, 1.0) } else { 0.0 };
        let mut s = 0.0;
        for i in 0..p.len() {
            let d = (p[i] - (a[i] + t * (b[i] - a[i]))) * self.weight(i);
            s += d * d;
        }
        s
    }
}

pub fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in 0..i {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}

/// A square-root factor `L` with `L Lᵀ = cov`: Cholesky when the matrix is
/// positive definite, otherwise `V·sqrt(max(λ, 0))` from the eigen
/// decomposition.
pub fn sqrt_factor(cov: &DMatrix<f64>) -> DMatrix<f64> {
    if let Some(c) = cov.clone().cholesky() {
        return c.unpack();
    }
    let eig = cov.clone().symmetric_eigen();
    let mut f = eig.eigenvectors.clone();
    for (j, &l) in eig.eigenvalues.iter().enumerate() {
        let s = libm::sqrt(l.max(0.0));
        for i in 0..f.nrows() {
            f[(i, j)] *= s;
        }
    }
    f
}

/// Regularized lower incomplete gamma function `P(a, x)`.
pub fn gamma_p(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x < a + 1.0 {
        // series
        let mut sum = 1.0 / a;
        let mut term = sum;
        let mut n = a;
        for _ in 0..500 {
            n += 1.0;
            term *= x / n;
            sum += term;
            if term.abs() < sum.abs() * 1e-16 {
                break;
            }
        }
        sum * libm::exp(-x + a * libm::log(x) - libm::lgamma(a))
    } else {
        // continued fraction for Q, Lentz
        let tiny = 1e-300;
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..500 {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < tiny {
                d = tiny;
            }
            c = b + an / c;
            if c.abs() < tiny {
                c = tiny;
            }
            d = 1.0 / d;
            let del = d * c;
            h *= del;
            if (del - 1.0).abs() < 1e-16 {
                break;
            }
        }
        1.0 - libm::exp(-x + a * libm::log(x) - libm::lgamma(a)) * h
    }
}

/// Chi-square CDF with `dof` degrees of freedom.
pub fn chi2_cdf(x: f64, dof: usize) -> f64 {
    gamma_p(dof as f64 / 2.0, x / 2.0)
}

/// Chi-square quantile by bisection.
pub fn chi2_quantile(p: f64, dof: usize) -> f64 {
    let (mut lo, mut hi) = (0.0, 1.0);
    while chi2_cdf(hi, dof) < p {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if chi2_cdf(mid, dof) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = alloc::vec![0.0; n];
    let mut weights = alloc::vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = libm::cos(PI * (i as f64 + 0.75) / (n as f64 + 0.5));
        let mut dp = 0.0;
        for _ in 0..100 {
            let mut p1 = 1.0;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                p1 = ((2 * j + 1) as f64 * z * p2 - j as f64 * p3) / (j + 1) as f64;
            }
            dp = n as f64 * (z * p1 - p2) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Radical-inverse (van der Corput) of `index` in `base`.
pub fn radical_inverse(mut index: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while index > 0 {
        r += (index % base) as f64 * f;
        index /= base;
        f *= inv;
    }
    r
}

pub const HALTON_BASES: [u64; 6] = [2, 3, 5, 7, 11, 13];
