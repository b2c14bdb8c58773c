//! Ergodic coverage: cosine-basis coefficients of the exploration
//! distribution and of a trajectory's time average, the weighted
//! coefficient mismatch, and a projected-gradient trajectory optimizer.

use alloc::vec::Vec;
use core::f64::consts::PI;
use nalgebra::DVector;

use crate::gaussian::Gaussian;
use crate::math::{gauss_legendre, PathMetric};
use crate::rng::{seeded, uniform_range};
use crate::trajectory::Trajectory;
use crate::{Error, Result};

/// Half-width of the spectral box in standard deviations.
pub const BOX_SIGMAS: f64 = 3.5;
pub const DEFAULT_K_PER_AXIS: usize = 10;
/// Gauss-Legendre nodes per axis for the distribution coefficients.
pub const QUADRATURE_NODES: usize = 50;

/// Tensor cosine basis on an axis-aligned box:
/// `F_k(x) = (1/h_k) Π_i cos(k_i π (x_i − lo_i) / L_i)`, `h_k` normalizing
/// each function to unit L2 norm on the box.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralBasis {
    dim: usize,
    lo: Vec<f64>,
    hi: Vec<f64>,
    k_per_axis: usize,
    /// Flattened multi-indices, `dim` entries per basis function.
    indices: Vec<usize>,
    norms: Vec<f64>,
}

impl SpectralBasis {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>, k_per_axis: usize) -> Result<Self> {
        let dim = lo.len();
        if dim == 0 || hi.len() != dim {
            return Err(Error::param("spectral bounds must be non-empty and of equal length"));
        }
        if lo.iter().zip(&hi).any(|(l, h)| !(h > l) || !l.is_finite() || !h.is_finite()) {
            return Err(Error::param("spectral bounds must be strictly ordered per axis"));
        }
        if k_per_axis == 0 {
            return Err(Error::param("k_per_axis must be positive"));
        }
        let count = k_per_axis.pow(dim as u32);
        let mut indices = Vec::with_capacity(count * dim);
        let mut norms = Vec::with_capacity(count);
        for flat in 0..count {
            let mut rem = flat;
            let mut k = alloc::vec![0; dim];
            for axis in (0..dim).rev() {
                k[axis] = rem % k_per_axis;
                rem /= k_per_axis;
            }
            let mut h2 = 1.0;
            for axis in 0..dim {
                let len = hi[axis] - lo[axis];
                h2 *= if k[axis] == 0 { len } else { 0.5 * len };
            }
            norms.push(libm::sqrt(h2));
            indices.extend_from_slice(&k);
        }
        Ok(Self { dim, lo, hi, k_per_axis, indices, norms })
    }

    /// Box `mean ± 3.5 σ` per axis, grown if needed so the search-frame
    /// origin lies inside with a margin of half a standard deviation.
    pub fn for_distribution(explore: &Gaussian, k_per_axis: usize) -> Result<Self> {
        let sd = explore.std_devs();
        let mut lo = Vec::with_capacity(explore.dim());
        let mut hi = Vec::with_capacity(explore.dim());
        for i in 0..explore.dim() {
            let s = sd[i].max(1e-9);
            let m = explore.mean()[i];
            lo.push((m - BOX_SIGMAS * s).min(-0.5 * s));
            hi.push((m + BOX_SIGMAS * s).max(0.5 * s));
        }
        Self::new(lo, hi, k_per_axis)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.norms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.norms.is_empty()
    }

    pub fn k_per_axis(&self) -> usize {
        self.k_per_axis
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn index(&self, k: usize) -> &[usize] {
        &self.indices[k * self.dim..(k + 1) * self.dim]
    }

    pub fn norm(&self, k: usize) -> f64 {
        self.norms[k]
    }

    pub fn clamp(&self, x: &DVector<f64>) -> DVector<f64> {
        DVector::from_fn(self.dim, |i, _| x[i].clamp(self.lo[i], self.hi[i]))
    }

    pub fn contains(&self, x: &DVector<f64>) -> bool {
        (0..self.dim).all(|i| x[i] >= self.lo[i] && x[i] <= self.hi[i])
    }

    fn axis_tables(&self, x: &[f64], cos: &mut [f64], sin: &mut [f64]) {
        let k = self.k_per_axis;
        for axis in 0..self.dim {
            let len = self.hi[axis] - self.lo[axis];
            let u = PI * (x[axis] - self.lo[axis]) / len;
            for j in 0..k {
                let (s, c) = libm::sincos(j as f64 * u);
                cos[axis * k + j] = c;
                sin[axis * k + j] = s;
            }
        }
    }

    /// All basis values at `x` into `out`.
    pub fn eval(&self, x: &[f64], out: &mut [f64]) {
        let k = self.k_per_axis;
        let mut cos = alloc::vec![0.0; self.dim * k];
        let mut sin = alloc::vec![0.0; self.dim * k];
        self.axis_tables(x, &mut cos, &mut sin);
        for (n, o) in out.iter_mut().enumerate() {
            let idx = self.index(n);
            let mut p = 1.0 / self.norms[n];
            for axis in 0..self.dim {
                p *= cos[axis * k + idx[axis]];
            }
            *o = p;
        }
    }

    /// Basis values and their gradients (`grad[n * dim + axis]`).
    pub fn eval_with_grad(&self, x: &[f64], out: &mut [f64], grad: &mut [f64]) {
        let k = self.k_per_axis;
        let d = self.dim;
        let mut cos = alloc::vec![0.0; d * k];
        let mut sin = alloc::vec![0.0; d * k];
        self.axis_tables(x, &mut cos, &mut sin);
        for n in 0..self.len() {
            let idx = self.index(n);
            let inv = 1.0 / self.norms[n];
            let mut p = inv;
            for axis in 0..d {
                p *= cos[axis * k + idx[axis]];
            }
            out[n] = p;
            for axis in 0..d {
                let kk = idx[axis];
                if kk == 0 {
                    grad[n * d + axis] = 0.0;
                    continue;
                }
                let len = self.hi[axis] - self.lo[axis];
                let mut g = -inv * sin[axis * k + kk] * kk as f64 * PI / len;
                for other in 0..d {
                    if other != axis {
                        g *= cos[other * k + idx[other]];
                    }
                }
                grad[n * d + axis] = g;
            }
        }
    }
}

/// `Λ_k = (1 + |k|²)^(−(D+1)/2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ErgodicWeights {
    lambda: Vec<f64>,
}

impl ErgodicWeights {
    pub fn new(basis: &SpectralBasis) -> Self {
        let s = -0.5 * (basis.dim() as f64 + 1.0);
        let lambda = (0..basis.len())
            .map(|n| {
                let k2: usize = basis.index(n).iter().map(|k| k * k).sum();
                libm::pow(1.0 + k2 as f64, s)
            })
            .collect();
        Self { lambda }
    }

    pub fn values(&self) -> &[f64] {
        &self.lambda
    }
}

/// `φ_k = ∫ F_k(x) p(x) dx` over the box by tensor Gauss-Legendre
/// quadrature with [`QUADRATURE_NODES`] nodes per axis.
pub fn distribution_coefficients(basis: &SpectralBasis, explore: &Gaussian) -> Result<Vec<f64>> {
    distribution_coefficients_with(basis, explore, QUADRATURE_NODES)
}

pub fn distribution_coefficients_with(basis: &SpectralBasis, explore: &Gaussian, nodes: usize) -> Result<Vec<f64>> {
    if explore.dim() != basis.dim() {
        return Err(Error::DimensionMismatch { expected: basis.dim(), found: explore.dim() });
    }
    let d = basis.dim();
    let (gx, gw) = gauss_legendre(nodes);
    let total = nodes.pow(d as u32);
    let mut phi = alloc::vec![0.0; basis.len()];
    let mut vals = alloc::vec![0.0; basis.len()];
    let mut x = DVector::zeros(d);
    let mut mass = 0.0;
    for flat in 0..total {
        let mut rem = flat;
        let mut w = 1.0;
        for axis in (0..d).rev() {
            let j = rem % nodes;
            rem /= nodes;
            let half = 0.5 * (basis.hi[axis] - basis.lo[axis]);
            x[axis] = basis.lo[axis] + half * (gx[j] + 1.0);
            w *= gw[j] * half;
        }
        let p = explore.density(&x) * w;
        if p == 0.0 {
            continue;
        }
        mass += p;
        basis.eval(x.as_slice(), &mut vals);
        for (acc, v) in phi.iter_mut().zip(&vals) {
            *acc += p * v;
        }
    }
    if mass < 0.99 {
        return Err(Error::MassOutsideBounds { mass });
    }
    Ok(phi)
}

/// Time average of the basis over uniformly timed points, clamped into
/// the box.
pub fn point_coefficients(basis: &SpectralBasis, points: &[DVector<f64>]) -> Vec<f64> {
    let mut c = alloc::vec![0.0; basis.len()];
    let mut vals = alloc::vec![0.0; basis.len()];
    for p in points {
        let q = basis.clamp(p);
        basis.eval(q.as_slice(), &mut vals);
        for (acc, v) in c.iter_mut().zip(&vals) {
            *acc += v;
        }
    }
    let n = points.len().max(1) as f64;
    c.iter_mut().for_each(|v| *v /= n);
    c
}

/// `c_k = (1/T) Σ_t F_k(x_t) Δt` over the waypoints of `traj`.
pub fn trajectory_coefficients(basis: &SpectralBasis, traj: &Trajectory) -> Vec<f64> {
    point_coefficients(basis, traj.waypoints())
}

pub fn cost_from_coefficients(weights: &ErgodicWeights, c: &[f64], phi: &[f64]) -> f64 {
    weights.values().iter().zip(c).zip(phi).map(|((l, c), p)| l * (c - p) * (c - p)).sum()
}

/// `Σ_k Λ_k (c_k − φ_k)²`.
pub fn ergodic_cost(basis: &SpectralBasis, weights: &ErgodicWeights, traj: &Trajectory, explore: &Gaussian) -> Result<f64> {
    let phi = distribution_coefficients(basis, explore)?;
    Ok(cost_from_coefficients(weights, &trajectory_coefficients(basis, traj), &phi))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimParams {
    pub max_iters: usize,
    /// Speed bound, m/s; the per-waypoint step is bounded by `v_max * dt`.
    pub v_max: f64,
    pub dt: f64,
    /// Armijo sufficient-decrease constant.
    pub armijo: f64,
    pub k_per_axis: usize,
    pub seed: u64,
    pub metric: PathMetric,
}

impl Default for OptimParams {
    fn default() -> Self {
        Self {
            max_iters: 300,
            v_max: 0.02,
            dt: 0.1,
            armijo: 1e-4,
            k_per_axis: DEFAULT_K_PER_AXIS,
            seed: 0,
            metric: PathMetric::default(),
        }
    }
}

impl OptimParams {
    pub fn max_step(&self) -> f64 {
        self.v_max * self.dt
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DescentStatus {
    Improved,
    /// No step reduced the cost; the seed trajectory is returned.
    NoDescent,
}

#[derive(Debug, Clone)]
pub struct ErgodicPlan {
    pub trajectory: Trajectory,
    pub initial_cost: f64,
    pub final_cost: f64,
    /// Cost after every accepted iterate, starting with the seed.
    pub accepted_costs: Vec<f64>,
    pub status: DescentStatus,
}

struct Problem<'a> {
    basis: &'a SpectralBasis,
    lambda: &'a [f64],
    phi: &'a [f64],
}

impl Problem<'_> {
    fn cost(&self, pts: &[DVector<f64>]) -> f64 {
        let c = point_coefficients(self.basis, pts);
        self.lambda.iter().zip(&c).zip(self.phi).map(|((l, c), p)| l * (c - p) * (c - p)).sum()
    }

    /// Cost and gradient with respect to every waypoint except the first.
    fn cost_and_grad(&self, pts: &[DVector<f64>]) -> (f64, Vec<DVector<f64>>) {
        let b = self.basis;
        let d = b.dim();
        let n = pts.len() as f64;
        let c = point_coefficients(b, pts);
        let cost = self.lambda.iter().zip(&c).zip(self.phi).map(|((l, c), p)| l * (c - p) * (c - p)).sum();
        let coef: Vec<f64> =
            self.lambda.iter().zip(&c).zip(self.phi).map(|((l, c), p)| 2.0 * l * (c - p) / n).collect();
        let mut vals = alloc::vec![0.0; b.len()];
        let mut grads = alloc::vec![0.0; b.len() * d];
        let mut out = Vec::with_capacity(pts.len());
        for (t, p) in pts.iter().enumerate() {
            let mut g = DVector::zeros(d);
            if t > 0 && b.contains(p) {
                b.eval_with_grad(p.as_slice(), &mut vals, &mut grads);
                for (kidx, ck) in coef.iter().enumerate() {
                    for axis in 0..d {
                        g[axis] += ck * grads[kidx * d + axis];
                    }
                }
            }
            out.push(g);
        }
        (cost, out)
    }
}

/// Enforces the step bound by walking forward from the fixed origin and
/// keeps every waypoint inside the box.
fn project(pts: &mut [DVector<f64>], max_step: f64, basis: &SpectralBasis, metric: &PathMetric) {
    pts[0].fill(0.0);
    for t in 1..pts.len() {
        let d = metric.dist(&pts[t - 1], &pts[t]);
        if d > max_step {
            let prev = pts[t - 1].clone();
            let step = (&pts[t] - &prev) * (max_step / d);
            pts[t] = prev + step;
        }
        pts[t] = basis.clamp(&pts[t]);
    }
}

/// Small spiral unwinding from the origin with steps of half the bound.
fn spiral_seed(dim: usize, steps: usize, radius: f64, max_step: f64, seed: u64) -> Vec<DVector<f64>> {
    let mut rng = seeded(seed);
    let phase = uniform_range(&mut rng, 0.0, 2.0 * PI);
    let pitch = radius / 3.0 / (2.0 * PI);
    let mut theta: f64 = 0.0;
    let mut pts = Vec::with_capacity(steps + 1);
    pts.push(DVector::zeros(dim));
    for _ in 0..steps {
        let r = (pitch * theta).min(radius);
        let ds = 0.5 * max_step;
        theta += ds / r.max(ds);
        let r = (pitch * theta).min(radius);
        let mut p = DVector::zeros(dim);
        p[0] = r * libm::cos(theta + phase);
        p[1] = r * libm::sin(theta + phase);
        pts.push(p);
    }
    pts
}

/// First-order ergodic trajectory optimization: projected gradient descent
/// on the waypoints with backtracking Armijo line search, starting from a
/// small spiral at the origin. `duration` is the number of steps.
pub fn generate_ergodic(explore: &Gaussian, duration: usize, opt: &OptimParams) -> Result<ErgodicPlan> {
    if duration < 10 {
        return Err(Error::param("ergodic duration must be at least 10 steps"));
    }
    if !(opt.v_max > 0.0 && opt.dt > 0.0) {
        return Err(Error::param("v_max and dt must be positive"));
    }
    let basis = SpectralBasis::for_distribution(explore, opt.k_per_axis)?;
    let weights = ErgodicWeights::new(&basis);
    let phi = distribution_coefficients(&basis, explore)?;
    let prob = Problem { basis: &basis, lambda: weights.values(), phi: &phi };
    let max_step = opt.max_step();

    let sd_min = explore.std_devs().iter().take(2).copied().fold(f64::INFINITY, f64::min);
    let mut pts = spiral_seed(explore.dim(), duration, 0.25 * sd_min, max_step, opt.seed);
    project(&mut pts, max_step, &basis, &opt.metric);

    let (mut cost, mut grad) = prob.cost_and_grad(&pts);
    let initial_cost = cost;
    let mut accepted = alloc::vec![cost];
    let mut alpha = f64::NAN;
    let mut stalls = 0;
    for _ in 0..opt.max_iters {
        let gmax = grad.iter().map(|g| g.norm()).fold(0.0, f64::max);
        if gmax == 0.0 {
            break;
        }
        if !alpha.is_finite() {
            alpha = max_step / gmax;
        }
        let floor = 1e-6 * max_step / gmax;
        let mut moved = false;
        while alpha >= floor {
            let mut cand: Vec<DVector<f64>> = pts.iter().zip(&grad).map(|(p, g)| p - g * alpha).collect();
            project(&mut cand, max_step, &basis, &opt.metric);
            let decrease: f64 = grad.iter().zip(cand.iter().zip(&pts)).map(|(g, (c, p))| g.dot(&(c - p))).sum();
            let c_new = prob.cost(&cand);
            if c_new < cost && c_new <= cost + opt.armijo * decrease {
                let rel = (cost - c_new) / cost.max(f64::MIN_POSITIVE);
                pts = cand;
                let (c2, g2) = prob.cost_and_grad(&pts);
                cost = c2;
                grad = g2;
                accepted.push(cost);
                alpha *= 1.5;
                moved = true;
                stalls = if rel < 1e-6 { stalls + 1 } else { 0 };
                break;
            }
            alpha *= 0.5;
        }
        if !moved || stalls >= 5 {
            break;
        }
    }
    let status = if accepted.len() > 1 { DescentStatus::Improved } else { DescentStatus::NoDescent };
    Ok(ErgodicPlan { trajectory: Trajectory::new(pts)?, initial_cost, final_cost: cost, accepted_costs: accepted, status })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use nalgebra::DMatrix;

    fn v(xs: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(xs)
    }

    fn unit_box(dim: usize, k: usize) -> SpectralBasis {
        SpectralBasis::new(vec![0.0; dim], vec![1.0; dim], k).unwrap()
    }

    #[test]
    fn basis_functions_have_unit_norm() {
        let b = SpectralBasis::new(vec![-0.02, 0.01], vec![0.05, 0.04], 4).unwrap();
        let (gx, gw) = gauss_legendre(40);
        let mut vals = vec![0.0; b.len()];
        let mut acc = vec![0.0; b.len()];
        for i in 0..40 {
            for j in 0..40 {
                let hx = 0.5 * (b.hi[0] - b.lo[0]);
                let hy = 0.5 * (b.hi[1] - b.lo[1]);
                let x = [b.lo[0] + hx * (gx[i] + 1.0), b.lo[1] + hy * (gx[j] + 1.0)];
                b.eval(&x, &mut vals);
                for n in 0..b.len() {
                    acc[n] += gw[i] * gw[j] * hx * hy * vals[n] * vals[n];
                }
            }
        }
        for a in acc {
            assert!((a - 1.0).abs() < 1e-9, "{a}");
        }
    }

    #[test]
    fn weights_decay() {
        let b = unit_box(2, 5);
        let w = ErgodicWeights::new(&b);
        assert_eq!(w.values()[0], 1.0);
        for n in 0..b.len() {
            for m in 0..b.len() {
                let k2 = |i: usize| b.index(i).iter().map(|k| k * k).sum::<usize>();
                if k2(n) < k2(m) {
                    assert!(w.values()[n] > w.values()[m]);
                }
            }
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let b = SpectralBasis::new(vec![-0.1, -0.2, -1.0], vec![0.3, 0.1, 1.0], 4).unwrap();
        let x = [0.05, -0.03, 0.2];
        let mut f = vec![0.0; b.len()];
        let mut g = vec![0.0; b.len() * 3];
        b.eval_with_grad(&x, &mut f, &mut g);
        let h = 1e-7;
        for axis in 0..3 {
            let mut xp = x;
            let mut xm = x;
            xp[axis] += h;
            xm[axis] -= h;
            let mut fp = vec![0.0; b.len()];
            let mut fm = vec![0.0; b.len()];
            b.eval(&xp, &mut fp);
            b.eval(&xm, &mut fm);
            for n in 0..b.len() {
                let fd = (fp[n] - fm[n]) / (2.0 * h);
                assert!((fd - g[n * 3 + axis]).abs() < 1e-5 * (1.0 + fd.abs()), "{n} {axis}: {fd} vs {}", g[n * 3 + axis]);
            }
        }
    }

    #[test]
    fn zero_index_coefficient_is_mass_over_norm() {
        let g = Gaussian::new(v(&[0.4, 0.6]), DMatrix::from_diagonal(&v(&[0.04, 0.02]))).unwrap();
        let b = unit_box(2, 3);
        // the unit box holds less than all of the mass here, so integrate directly
        let err = distribution_coefficients(&b, &g);
        let wide = SpectralBasis::new(vec![-0.8, -0.4], vec![1.6, 1.6], 3).unwrap();
        let phi = distribution_coefficients(&wide, &g).unwrap();
        let phi_fine = distribution_coefficients_with(&wide, &g, 100).unwrap();
        assert!((phi[0] - phi_fine[0]).abs() < 1e-10);
        assert!((phi[0] * wide.norm(0) - 1.0).abs() < 1e-6);
        assert!(matches!(err, Err(Error::MassOutsideBounds { .. })));
    }

    #[test]
    fn centered_gaussian_has_odd_zeros() {
        let g = Gaussian::new(v(&[0.5, 0.5]), DMatrix::from_diagonal(&v(&[0.01, 0.005]))).unwrap();
        let b = unit_box(2, 10);
        let phi = distribution_coefficients(&b, &g).unwrap();
        for n in 0..b.len() {
            if b.index(n).iter().any(|k| k % 2 == 1) {
                assert!(phi[n].abs() < 1e-8, "{:?}: {}", b.index(n), phi[n]);
            }
        }
    }

    #[test]
    fn diagonal_gaussian_matches_characteristic_function() {
        // for mass well inside the box, ∫cos(a(x−lo)) N(x; m, σ²) dx = cos(a(m−lo)) exp(−a²σ²/2)
        let m = [0.45, 0.6];
        let sd = [0.06, 0.05];
        let g = Gaussian::new(v(&m), DMatrix::from_diagonal(&v(&[sd[0] * sd[0], sd[1] * sd[1]]))).unwrap();
        let b = unit_box(2, 10);
        let phi = distribution_coefficients(&b, &g).unwrap();
        for n in 0..b.len() {
            let k = b.index(n);
            let mut want = 1.0 / b.norm(n);
            for i in 0..2 {
                let a = k[i] as f64 * PI;
                want *= libm::cos(a * m[i]) * libm::exp(-0.5 * a * a * sd[i] * sd[i]);
            }
            assert!((phi[n] - want).abs() < 1e-9, "{k:?}: {} vs {want}", phi[n]);
        }
    }

    #[test]
    fn narrow_gaussian_approaches_point_evaluation() {
        let x0 = [0.3, 0.7];
        let g = Gaussian::new(v(&x0), DMatrix::identity(2, 2) * 4e-6).unwrap();
        let b = unit_box(2, 5);
        let phi = distribution_coefficients_with(&b, &g, 1500).unwrap();
        let mut f = vec![0.0; b.len()];
        b.eval(&x0, &mut f);
        for n in 0..b.len() {
            assert!((phi[n] - f[n]).abs() < 1e-3, "{n}: {} vs {}", phi[n], f[n]);
        }
    }

    #[test]
    fn stationary_and_two_point_averages() {
        let b = unit_box(2, 4);
        let pts = vec![v(&[0.2, 0.3]); 10];
        let c = point_coefficients(&b, &pts);
        let mut f = vec![0.0; b.len()];
        b.eval(&[0.2, 0.3], &mut f);
        for n in 0..b.len() {
            assert!((c[n] - f[n]).abs() < 1e-14);
        }
        let mut pts2 = vec![v(&[0.2, 0.3]); 5];
        pts2.extend(vec![v(&[0.8, 0.1]); 5]);
        let c2 = point_coefficients(&b, &pts2);
        let mut f1 = vec![0.0; b.len()];
        b.eval(&[0.8, 0.1], &mut f1);
        for n in 0..b.len() {
            assert!((c2[n] - 0.5 * (f[n] + f1[n])).abs() < 1e-14);
        }
    }

    fn raster(lanes: usize, per_lane: usize) -> Vec<DVector<f64>> {
        let mut pts = Vec::new();
        for l in 0..lanes {
            let y = (l as f64 + 0.5) / lanes as f64;
            for i in 0..per_lane {
                let mut x = (i as f64 + 0.5) / per_lane as f64;
                if l % 2 == 1 {
                    x = 1.0 - x;
                }
                pts.push(v(&[x, y]));
            }
        }
        pts
    }

    #[test]
    fn uniform_raster_matches_uniform_coefficients() {
        let b = unit_box(2, 6);
        let c = point_coefficients(&b, &raster(200, 200));
        // uniform density 1 on the unit box: φ_0 = 1/h_0 = 1, others 0
        for n in 0..b.len() {
            let phi = if n == 0 { 1.0 / b.norm(0) } else { 0.0 };
            assert!((c[n] - phi).abs() < 1e-2, "{:?}", b.index(n));
        }
    }

    #[test]
    fn cost_properties() {
        let g = Gaussian::new(v(&[0.5, 0.5]), DMatrix::from_diagonal(&v(&[0.02, 0.02]))).unwrap();
        let b = unit_box(2, 10);
        let w = ErgodicWeights::new(&b);
        let mut pts = vec![v(&[0.0, 0.0])];
        pts.extend(raster(60, 60));
        let sweep = Trajectory::new(pts.clone()).unwrap();
        let mut rev = pts[1..].to_vec();
        rev.reverse();
        rev.insert(0, v(&[0.0, 0.0]));
        let swept_back = Trajectory::new(rev).unwrap();
        let still = Trajectory::new(vec![v(&[0.0, 0.0]); 50]).unwrap();
        let cs = ergodic_cost(&b, &w, &sweep, &g).unwrap();
        let cr = ergodic_cost(&b, &w, &swept_back, &g).unwrap();
        let cp = ergodic_cost(&b, &w, &still, &g).unwrap();
        assert!((cs - cr).abs() < 1e-12);
        assert!(cs < cp);
        assert!(cs >= 0.0);
        let phi = distribution_coefficients(&b, &g).unwrap();
        assert_eq!(cost_from_coefficients(&w, &phi, &phi), 0.0);
    }

    #[test]
    fn optimizer_descends_and_respects_speed() {
        let g = Gaussian::new(v(&[0.02, 0.005]), DMatrix::from_row_slice(2, 2, &[2.0e-4, 3.0e-5, 3.0e-5, 1.0e-4])).unwrap();
        let opt = OptimParams { max_iters: 80, ..Default::default() };
        let plan = generate_ergodic(&g, 300, &opt).unwrap();
        assert_eq!(plan.status, DescentStatus::Improved);
        assert!(plan.final_cost <= 0.5 * plan.initial_cost, "{} {}", plan.final_cost, plan.initial_cost);
        for w in plan.accepted_costs.windows(2) {
            assert!(w[1] <= w[0]);
        }
        for w in plan.trajectory.waypoints().windows(2) {
            assert!((&w[1] - &w[0]).norm() <= opt.max_step() * (1.0 + 1e-9));
        }
        assert_eq!(plan.trajectory.waypoints()[0], v(&[0.0, 0.0]));
        let again = generate_ergodic(&g, 300, &opt).unwrap();
        assert_eq!(again.trajectory, plan.trajectory);
    }

    #[test]
    fn short_duration_rejected() {
        assert!(generate_ergodic(&Gaussian::standard(2), 5, &OptimParams::default()).is_err());
    }
}
