//! Location-invariant task dynamics: a joint Gaussian over action wrench
//! and per-step state change, queried for the expected wrench of a
//! desired motion.

use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};

use crate::demo::TrainingSet;
use crate::gaussian::{BlockPartition, Conditioner, Gaussian};
use crate::trajectory::Trajectory;
use crate::{Error, Result};

/// Magnitude limit applied to predicted wrenches.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WrenchCap {
    /// Limit on the planar force norm, N.
    pub force: f64,
    /// Limit on the yaw torque magnitude, N·m.
    pub torque: f64,
}

impl Default for WrenchCap {
    fn default() -> Self {
        Self { force: 50.0, torque: 5.0 }
    }
}

impl WrenchCap {
    pub fn apply(&self, w: &mut DVector<f64>) {
        let f = libm::hypot(w[0], w[1]);
        if f > self.force {
            let s = self.force / f;
            w[0] *= s;
            w[1] *= s;
        }
        if w.len() == 3 {
            w[2] = w[2].clamp(-self.torque, self.torque);
        }
    }
}

/// Joint Gaussian over `[a ; Δs]` with the action block first.
#[derive(Debug, Clone, PartialEq)]
pub struct DynamicsModel {
    dim: usize,
    joint: Gaussian,
    partition: BlockPartition,
    conditioner: Conditioner,
    cap: Option<WrenchCap>,
}

impl DynamicsModel {
    pub fn from_joint(joint: Gaussian) -> Result<Self> {
        if joint.dim() % 2 != 0 || joint.dim() == 0 {
            return Err(Error::param("joint dimension must be even"));
        }
        let dim = joint.dim() / 2;
        let partition = BlockPartition::leading(dim, 2 * dim)?;
        let conditioner = joint.conditioner(&partition)?;
        Ok(Self { dim, joint, partition, conditioner, cap: None })
    }

    pub fn with_cap(mut self, cap: Option<WrenchCap>) -> Self {
        self.cap = cap;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn joint(&self) -> &Gaussian {
        &self.joint
    }

    pub fn partition(&self) -> &BlockPartition {
        &self.partition
    }

    pub fn cap(&self) -> Option<WrenchCap> {
        self.cap
    }

    /// Covariance of the action given any state change.
    pub fn conditional_cov(&self) -> &DMatrix<f64> {
        self.conditioner.cov()
    }

    /// `Σ_as Σ_ss⁻¹`.
    pub fn gain(&self) -> &DMatrix<f64> {
        self.conditioner.gain()
    }
}

/// Maximum-likelihood fit over the rows `[action_t, delta_t]`.
///
/// Wrenches (N) and per-step displacements (fractions of a millimetre)
/// differ by many orders of magnitude, so the fit runs on columns scaled
/// to unit spread and is mapped back; the ridge then acts relative to
/// each variable instead of being dominated by the wrench block.
pub fn fit_dynamics(ts: &TrainingSet) -> Result<DynamicsModel> {
    let d = ts.dim;
    let rows = ts.deltas.nrows();
    if rows < 2 * d + 1 {
        return Err(Error::TooFewRows { rows, needed: 2 * d + 1 });
    }
    let mut joint = DMatrix::zeros(rows, 2 * d);
    joint.columns_mut(0, d).copy_from(&ts.actions);
    joint.columns_mut(d, d).copy_from(&ts.deltas);
    let scale = DVector::from_fn(2 * d, |c, _| {
        let col = joint.column(c);
        let m = col.mean();
        let s = libm::sqrt(col.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / rows as f64);
        if s > 0.0 && s.is_finite() {
            s
        } else {
            1.0
        }
    });
    for c in 0..2 * d {
        joint.column_mut(c).scale_mut(1.0 / scale[c]);
    }
    let unit = Gaussian::fit_rows(&joint)?;
    let mean = unit.mean().component_mul(&scale);
    let cov = DMatrix::from_fn(2 * d, 2 * d, |i, j| unit.cov()[(i, j)] * scale[i] * scale[j]);
    DynamicsModel::from_joint(Gaussian::new(mean, cov)?)
}

/// Conditional mean of the action for the state change `delta_s`.
pub fn predict_wrench(m: &DynamicsModel, delta_s: &DVector<f64>) -> Result<DVector<f64>> {
    let mut w = m.conditioner.mean_at(delta_s)?;
    if let Some(cap) = m.cap {
        cap.apply(&mut w);
    }
    Ok(w)
}

/// Attaches the predicted wrench of each outgoing segment; the last
/// waypoint repeats its predecessor's wrench.
pub fn annotate_trajectory(m: &DynamicsModel, traj: &Trajectory) -> Result<Trajectory> {
    if traj.dim() != m.dim {
        return Err(Error::DimensionMismatch { expected: m.dim, found: traj.dim() });
    }
    let mut ff = traj.deltas().iter().map(|d| predict_wrench(m, d)).collect::<Result<Vec<_>>>()?;
    let last = ff[ff.len() - 1].clone();
    ff.push(last);
    traj.clone().with_ff(ff)
}
