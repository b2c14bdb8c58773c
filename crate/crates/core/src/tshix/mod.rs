//! Trajectory sampling from human-inspired exploration: draw points from
//! the exploration distribution, order them by an approximately shortest
//! open tour from the origin, and smooth the tour into a trajectory.
//!
//! Also hosts the coverage diagnostic and the random-walk baseline.

mod savgol;
mod tsp;

pub use savgol::{center_weights, smooth_series, SgParams};
pub use tsp::{default_generations, solve_open_tsp, solve_open_tsp_traced, GaParams, Itinerary, TspSolution};

use alloc::vec::Vec;
use nalgebra::DVector;

use crate::gaussian::Gaussian;
use crate::math::{chi2_quantile, radical_inverse, sqrt_factor, PathMetric, HALTON_BASES};
use crate::rng::seeded;
use crate::trajectory::Trajectory;
use crate::ziggurat::standard_normal;
use crate::{Error, Result};

/// Number of probe points used by [`coverage_metric`].
pub const COVERAGE_PROBES: usize = 1000;

/// Per-coordinate Savitzky-Golay smoothing of an itinerary; the first
/// waypoint is pinned back to the origin afterwards.
pub fn smooth(it: &Itinerary, sg: &SgParams) -> Result<Trajectory> {
    sg.validate()?;
    let pts = it.points();
    let dim = pts[0].len();
    let mut out: Vec<DVector<f64>> = alloc::vec![DVector::zeros(dim); pts.len()];
    for axis in 0..dim {
        let series: Vec<f64> = pts.iter().map(|p| p[axis]).collect();
        for (o, v) in out.iter_mut().zip(smooth_series(&series, sg)?) {
            o[axis] = v;
        }
    }
    out[0].fill(0.0);
    if out.len() == 1 {
        out.push(DVector::zeros(dim));
    }
    Trajectory::new(out)
}

/// Sample, order and smooth. The GA seed in `ga` and the sampling `seed`
/// fully determine the output.
pub fn generate_tshix(explore: &Gaussian, n_samples: usize, ga: &GaParams, sg: &SgParams, seed: u64) -> Result<Trajectory> {
    if n_samples < 2 {
        return Err(Error::param("TSHIX needs at least 2 samples"));
    }
    let samples = explore.sample(n_samples, seed);
    let start = DVector::zeros(explore.dim());
    let it = solve_open_tsp(&samples, &start, ga)?;
    smooth(&it, sg)
}

/// Fraction of quasi-random probe points inside the `mass`-probability
/// ellipsoid of `explore` lying within `r_cover` of the trajectory polyline.
pub fn coverage_metric(traj: &Trajectory, explore: &Gaussian, mass: f64, r_cover: f64, metric: &PathMetric) -> f64 {
    let probes = ellipsoid_probes(explore, mass, COVERAGE_PROBES);
    let r2 = r_cover * r_cover;
    let wps = traj.waypoints();
    let covered = probes
        .iter()
        .filter(|p| wps.windows(2).any(|w| metric.segment_dist_sq(p, &w[0], &w[1]) <= r2))
        .count();
    covered as f64 / probes.len() as f64
}

/// Halton points in the unit ball, mapped into the `mass` ellipsoid.
pub fn ellipsoid_probes(explore: &Gaussian, mass: f64, count: usize) -> Vec<DVector<f64>> {
    let d = explore.dim();
    let radius = libm::sqrt(chi2_quantile(mass.clamp(1e-9, 1.0 - 1e-12), d));
    let factor = sqrt_factor(explore.cov());
    let mut out = Vec::with_capacity(count);
    let mut index = 1u64;
    while out.len() < count {
        let u = DVector::from_fn(d, |i, _| 2.0 * radical_inverse(index, HALTON_BASES[i % HALTON_BASES.len()]) - 1.0);
        index += 1;
        if u.norm_squared() <= 1.0 {
            out.push(explore.mean() + &factor * (u * radius));
        }
    }
    out
}

/// Cumulative sum of i.i.d. zero-mean Gaussian steps whose per-axis
/// standard deviation is `step_scale` times that of `explore`.
pub fn random_walk_trajectory(explore: &Gaussian, n_steps: usize, step_scale: f64, seed: u64) -> Result<Trajectory> {
    if n_steps == 0 {
        return Err(Error::param("random walk needs at least one step"));
    }
    let sd = explore.std_devs() * step_scale;
    let mut rng = seeded(seed);
    let mut pts = Vec::with_capacity(n_steps + 1);
    let mut at: DVector<f64> = DVector::zeros(explore.dim());
    pts.push(at.clone());
    for _ in 0..n_steps {
        for i in 0..at.len() {
            at[i] += sd[i] * standard_normal(&mut rng);
        }
        pts.push(at.clone());
    }
    Trajectory::new(pts)
}
