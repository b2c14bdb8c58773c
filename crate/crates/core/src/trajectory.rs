//! Search trajectories in the search frame.

use alloc::vec::Vec;
use nalgebra::DVector;

use crate::math::{wrap_angle, PathMetric};
use crate::{Error, Result};

/// Ordered waypoints starting at the search-frame origin, with an optional
/// feed-forward wrench per waypoint.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    dim: usize,
    waypoints: Vec<DVector<f64>>,
    ff_wrench: Option<Vec<DVector<f64>>>,
}

impl Trajectory {
    pub fn new(waypoints: Vec<DVector<f64>>) -> Result<Self> {
        if waypoints.len() < 2 {
            return Err(Error::param("a trajectory needs at least 2 waypoints"));
        }
        let dim = waypoints[0].len();
        if dim == 0 {
            return Err(Error::EmptyInput("zero-dimensional waypoint"));
        }
        if let Some(w) = waypoints.iter().find(|w| w.len() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: w.len() });
        }
        if waypoints[0].iter().any(|&v| v != 0.0) {
            return Err(Error::param("trajectory must start at the search-frame origin"));
        }
        if waypoints.iter().flat_map(|w| w.iter()).any(|v| !v.is_finite()) {
            return Err(Error::param("non-finite waypoint"));
        }
        Ok(Self { dim, waypoints, ff_wrench: None })
    }

    pub fn with_ff(mut self, ff: Vec<DVector<f64>>) -> Result<Self> {
        if ff.len() != self.waypoints.len() {
            return Err(Error::DimensionMismatch { expected: self.waypoints.len(), found: ff.len() });
        }
        if let Some(w) = ff.iter().find(|w| w.len() != self.dim) {
            return Err(Error::DimensionMismatch { expected: self.dim, found: w.len() });
        }
        self.ff_wrench = Some(ff);
        Ok(self)
    }

    pub fn without_ff(mut self) -> Self {
        self.ff_wrench = None;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.waypoints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.waypoints.is_empty()
    }

    pub fn waypoints(&self) -> &[DVector<f64>] {
        &self.waypoints
    }

    pub fn ff_wrench(&self) -> Option<&[DVector<f64>]> {
        self.ff_wrench.as_deref()
    }

    pub fn length(&self, metric: &PathMetric) -> f64 {
        metric.path_length(&self.waypoints)
    }

    /// Re-samples the polyline at constant spacing `step` (in the path
    /// metric), keeping both endpoints. Feed-forward wrenches are linearly
    /// interpolated.
    pub fn resample_arc_length(&self, step: f64, metric: &PathMetric) -> Result<Trajectory> {
        if !(step > 0.0) || !step.is_finite() {
            return Err(Error::param("resampling step must be positive"));
        }
        let pts = &self.waypoints;
        let mut cum = Vec::with_capacity(pts.len());
        cum.push(0.0);
        for w in pts.windows(2) {
            let last = *cum.last().unwrap();
            cum.push(last + metric.dist(&w[0], &w[1]));
        }
        let total = *cum.last().unwrap();
        let n_steps = libm::ceil(total / step - 1e-9).max(1.0) as usize;
        let mut out = Vec::with_capacity(n_steps + 1);
        let mut out_ff = self.ff_wrench.as_ref().map(|_| Vec::with_capacity(n_steps + 1));
        let mut seg = 0;
        for k in 0..=n_steps {
            let s = if k == n_steps { total } else { k as f64 * step };
            while seg + 1 < pts.len() - 1 && cum[seg + 1] < s {
                seg += 1;
            }
            let span = cum[seg + 1] - cum[seg];
            let t = if span > 0.0 { ((s - cum[seg]) / span).clamp(0.0, 1.0) } else { 0.0 };
            out.push(lerp(&pts[seg], &pts[seg + 1], t));
            if let (Some(dst), Some(ff)) = (out_ff.as_mut(), self.ff_wrench.as_ref()) {
                dst.push(lerp(&ff[seg], &ff[seg + 1], t));
            }
        }
        out[0].fill(0.0);
        let traj = Trajectory { dim: self.dim, waypoints: out, ff_wrench: None };
        match out_ff {
            Some(ff) => traj.with_ff(ff),
            None => Ok(traj),
        }
    }

    /// Waypoint `t+1` minus waypoint `t`, with yaw differences wrapped.
    pub fn deltas(&self) -> Vec<DVector<f64>> {
        self.waypoints.windows(2).map(|w| pose_delta(&w[0], &w[1])).collect()
    }
}

fn lerp(a: &DVector<f64>, b: &DVector<f64>, t: f64) -> DVector<f64> {
    a + (b - a) * t
}

/// `to - from`; the yaw coordinate of 3-dimensional poses is wrapped.
pub fn pose_delta(from: &DVector<f64>, to: &DVector<f64>) -> DVector<f64> {
    let mut d = to - from;
    if d.len() == 3 {
        d[2] = wrap_angle(d[2]);
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn v(xs: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(xs)
    }

    #[test]
    fn validation() {
        assert!(Trajectory::new(vec![v(&[0.0, 0.0])]).is_err());
        assert!(Trajectory::new(vec![v(&[0.1, 0.0]), v(&[0.0, 0.0])]).is_err());
        assert!(Trajectory::new(vec![v(&[0.0, 0.0]), v(&[0.0, 0.0, 1.0])]).is_err());
        let t = Trajectory::new(vec![v(&[0.0, 0.0]), v(&[1.0, 0.0])]).unwrap();
        assert!(t.clone().with_ff(vec![v(&[0.0, 0.0])]).is_err());
        assert!(t.with_ff(vec![v(&[0.0, 0.0]), v(&[1.0, 1.0])]).is_ok());
    }

    #[test]
    fn resample_constant_spacing() {
        let t = Trajectory::new(vec![v(&[0.0, 0.0]), v(&[1.0, 0.0]), v(&[1.0, 1.0])])
            .unwrap()
            .with_ff(vec![v(&[0.0, 0.0]), v(&[2.0, 0.0]), v(&[2.0, 2.0])])
            .unwrap();
        let r = t.resample_arc_length(0.1, &PathMetric::default()).unwrap();
        assert_eq!(r.len(), 21);
        for w in r.waypoints().windows(2) {
            assert!(((&w[1] - &w[0]).norm() - 0.1).abs() < 1e-9 || (&w[1] - &w[0]).norm() < 0.1 + 1e-9);
        }
        assert!((&r.waypoints()[5] - v(&[0.5, 0.0])).norm() < 1e-12);
        assert!((&r.ff_wrench().unwrap()[15] - v(&[2.0, 1.0])).norm() < 1e-12);
        assert!((&r.waypoints()[20] - v(&[1.0, 1.0])).norm() < 1e-12);
    }

    #[test]
    fn yaw_delta_wraps() {
        let d = pose_delta(&v(&[0.0, 0.0, 3.0]), &v(&[0.0, 0.0, -3.0]));
        assert!((d[2] - (2.0 * core::f64::consts::PI - 6.0)).abs() < 1e-12);
    }
}
