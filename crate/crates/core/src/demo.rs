//! Demonstrations: data model, search-frame alignment, acceptance filtering
//! and construction of training matrices.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use nalgebra::{DMatrix, DVector};

use crate::math::{wrap_angle, PathMetric};
use crate::trajectory::pose_delta;
use crate::{Error, Result};

/// Sampling period demonstrations are resampled to before differencing.
pub const DEMO_DT: f64 = 0.01;

#[derive(Debug, Clone, PartialEq)]
pub struct DemoSample {
    pub t: f64,
    /// x, y in meters, plus yaw in radians for 3-dimensional tasks.
    pub pose: DVector<f64>,
    /// Measured interaction wrench: fx, fy in newtons, plus tz in N·m.
    pub wrench: DVector<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Frame {
    Raw,
    SearchFrame,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Demonstration {
    id: String,
    dim: usize,
    samples: Vec<DemoSample>,
    frame: Frame,
    /// Raw start pose removed by alignment.
    origin: Option<DVector<f64>>,
}

impl Demonstration {
    /// A raw-frame demonstration. Poses and wrenches must share a dimension
    /// of 2 or 3, all values must be finite and time non-decreasing.
    pub fn new(id: impl Into<String>, samples: Vec<DemoSample>) -> Result<Self> {
        let id = id.into();
        if samples.len() < 2 {
            return Err(Error::InvalidDemonstration(alloc::format!("{id}: fewer than 2 samples")));
        }
        let dim = samples[0].pose.len();
        if !(2..=3).contains(&dim) {
            return Err(Error::InvalidDemonstration(alloc::format!("{id}: dimension {dim} not in {{2, 3}}")));
        }
        for (i, s) in samples.iter().enumerate() {
            if s.pose.len() != dim || s.wrench.len() != dim {
                return Err(Error::MixedDimensions);
            }
            if !s.t.is_finite() || s.pose.iter().chain(s.wrench.iter()).any(|v| !v.is_finite()) {
                return Err(Error::InvalidDemonstration(alloc::format!("{id}: non-finite value in sample {i}")));
            }
            if i > 0 && s.t < samples[i - 1].t {
                return Err(Error::InvalidDemonstration(alloc::format!("{id}: time decreases at sample {i}")));
            }
        }
        Ok(Self { id, dim, samples, frame: Frame::Raw, origin: None })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn samples(&self) -> &[DemoSample] {
        &self.samples
    }

    pub fn frame(&self) -> Frame {
        self.frame
    }

    pub fn origin(&self) -> Option<&DVector<f64>> {
        self.origin.as_ref()
    }

    pub fn duration(&self) -> f64 {
        self.samples.last().unwrap().t - self.samples[0].t
    }

    /// Translates every pose by minus the first pose; yaw is wrapped to
    /// `(-pi, pi]`.
    pub fn align_to_search_frame(&self) -> Result<Demonstration> {
        if self.frame == Frame::SearchFrame {
            return Err(Error::AlreadyAligned);
        }
        let start = self.samples[0].pose.clone();
        let samples = self
            .samples
            .iter()
            .map(|s| {
                let mut pose = &s.pose - &start;
                if self.dim == 3 {
                    pose[2] = wrap_angle(pose[2]);
                }
                DemoSample { t: s.t, pose, wrench: s.wrench.clone() }
            })
            .collect();
        Ok(Demonstration {
            id: self.id.clone(),
            dim: self.dim,
            samples,
            frame: Frame::SearchFrame,
            origin: Some(start),
        })
    }

    pub fn path_length(&self, metric: &PathMetric) -> f64 {
        self.samples.windows(2).map(|w| metric.dist(&w[0].pose, &w[1].pose)).sum()
    }

    /// Final pose expressed in the raw (world) frame.
    pub fn final_raw_pose(&self) -> DVector<f64> {
        let last = &self.samples.last().unwrap().pose;
        match &self.origin {
            Some(o) => last + o,
            None => last.clone(),
        }
    }

    /// Linear interpolation onto a uniform time grid `t0, t0 + dt, ...`.
    pub fn resample(&self, dt: f64) -> Result<Demonstration> {
        if !(dt > 0.0) {
            return Err(Error::param("resampling period must be positive"));
        }
        let t0 = self.samples[0].t;
        let n = libm::floor(self.duration() / dt + 1e-9) as usize + 1;
        let mut out = Vec::with_capacity(n.max(2));
        let mut j = 0;
        for k in 0..n {
            let t = t0 + k as f64 * dt;
            while j + 2 < self.samples.len() && self.samples[j + 1].t < t {
                j += 1;
            }
            let (a, b) = (&self.samples[j], &self.samples[j + 1]);
            let span = b.t - a.t;
            let u = if span > 0.0 { ((t - a.t) / span).clamp(0.0, 1.0) } else { 1.0 };
            let mut pose = &a.pose + pose_delta(&a.pose, &b.pose) * u;
            if self.dim == 3 && self.frame == Frame::SearchFrame {
                pose[2] = wrap_angle(pose[2]);
            }
            let wrench = &a.wrench + (&b.wrench - &a.wrench) * u;
            out.push(DemoSample { t, pose, wrench });
        }
        if out.len() < 2 {
            return Err(Error::InvalidDemonstration(alloc::format!("{}: shorter than one period", self.id)));
        }
        Ok(Demonstration { id: self.id.clone(), dim: self.dim, samples: out, frame: self.frame, origin: self.origin.clone() })
    }
}

/// Ball around the known goal position (x, y) in the raw frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GoalRegion {
    pub center: [f64; 2],
    pub radius: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RejectReason {
    TooShort,
    DidNotReachGoal,
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RejectReason::TooShort => "too short",
            RejectReason::DidNotReachGoal => "did not reach goal",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Acceptance {
    Accept,
    Reject(RejectReason),
}

/// Discards demonstrations that ended almost immediately (path shorter than
/// `min_path_length`) or that finished outside the goal region.
pub fn accept_demo(d: &Demonstration, goal: &GoalRegion, min_path_length: f64, metric: &PathMetric) -> Acceptance {
    if d.path_length(metric) < min_path_length {
        return Acceptance::Reject(RejectReason::TooShort);
    }
    let end = d.final_raw_pose();
    if libm::hypot(end[0] - goal.center[0], end[1] - goal.center[1]) > goal.radius {
        return Acceptance::Reject(RejectReason::DidNotReachGoal);
    }
    Acceptance::Accept
}

/// Pooled training matrices from aligned demonstrations.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSet {
    pub dim: usize,
    /// Aligned poses, one row per sample.
    pub states: DMatrix<f64>,
    /// `s[t+1] - s[t]` within each demonstration.
    pub deltas: DMatrix<f64>,
    /// Negated measured wrench at `t`.
    pub actions: DMatrix<f64>,
}

impl TrainingSet {
    pub fn state_rows(&self) -> Vec<DVector<f64>> {
        self.states.row_iter().map(|r| r.transpose().into_owned()).collect()
    }
}

/// Stacks poses of all demonstrations and differences each one separately;
/// no delta spans a boundary between demonstrations. Demonstrations are
/// used at their own sampling; resample them first for uniform steps.
pub fn build_training_set(demos: &[Demonstration]) -> Result<TrainingSet> {
    let first = demos.first().ok_or(Error::EmptyInput("no demonstrations"))?;
    let dim = first.dim;
    if demos.iter().any(|d| d.dim != dim) {
        return Err(Error::MixedDimensions);
    }
    if demos.iter().any(|d| d.frame != Frame::SearchFrame) {
        return Err(Error::NotAligned);
    }
    let n_states: usize = demos.iter().map(|d| d.samples.len()).sum();
    let n_deltas = n_states - demos.len();
    let mut states = DMatrix::zeros(n_states, dim);
    let mut deltas = DMatrix::zeros(n_deltas, dim);
    let mut actions = DMatrix::zeros(n_deltas, dim);
    let (mut r, mut q) = (0, 0);
    for d in demos {
        for (i, s) in d.samples.iter().enumerate() {
            states.set_row(r, &s.pose.transpose());
            r += 1;
            if let Some(next) = d.samples.get(i + 1) {
                deltas.set_row(q, &pose_delta(&s.pose, &next.pose).transpose());
                actions.set_row(q, &(-&s.wrench).transpose());
                q += 1;
            }
        }
    }
    Ok(TrainingSet { dim, states, deltas, actions })
}
