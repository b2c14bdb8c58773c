//! Impedance control with a superposed feed-forward wrench, and the rollout
//! loop that executes a search trajectory in a simulated world.

use alloc::vec::Vec;
use nalgebra::{DVector, Matrix2, Vector2};

use crate::math::{wrap_angle, PathMetric};
use crate::trajectory::{pose_delta, Trajectory};
use crate::world::SimWorld;
use crate::{Error, Result};

/// Effective mass used to derive critical damping from stiffness, kg.
pub const EFFECTIVE_MASS: f64 = 1.0;
/// Effective rotational inertia for the yaw channel, kg·m².
pub const EFFECTIVE_INERTIA: f64 = EFFECTIVE_MASS * 0.02 * 0.02;

/// Translational stiffness and damping split into the instantaneous motion
/// direction and its perpendicular, plus the yaw channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImpedanceGains {
    pub kp_along: f64,
    pub kp_across: f64,
    pub bp_along: f64,
    pub bp_across: f64,
    pub k_theta: f64,
    pub b_theta: f64,
}

impl Default for ImpedanceGains {
    fn default() -> Self {
        Self::anisotropic(500.0, 150.0, 5.0)
    }
}

impl ImpedanceGains {
    /// Stiffnesses with critical damping `2 sqrt(k m)`.
    pub fn anisotropic(kp_along: f64, kp_across: f64, k_theta: f64) -> Self {
        Self {
            kp_along,
            kp_across,
            bp_along: 2.0 * libm::sqrt(kp_along * EFFECTIVE_MASS),
            bp_across: 2.0 * libm::sqrt(kp_across * EFFECTIVE_MASS),
            k_theta,
            b_theta: 2.0 * libm::sqrt(k_theta * EFFECTIVE_INERTIA),
        }
    }

    pub fn isotropic(kp: f64, bp: f64, k_theta: f64, b_theta: f64) -> Self {
        Self { kp_along: kp, kp_across: kp, bp_along: bp, bp_across: bp, k_theta, b_theta }
    }

    pub fn zero() -> Self {
        Self::isotropic(0.0, 0.0, 0.0, 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.kp_along, self.kp_across, self.bp_along, self.bp_across, self.k_theta, self.b_theta];
        if all.iter().any(|g| !(*g >= 0.0) || !g.is_finite()) {
            return Err(Error::param("gains must be finite and non-negative"));
        }
        Ok(())
    }

    /// Stiffness and damping matrices for motion along `dir`. Without a
    /// direction both axes take the perpendicular (soft) values.
    pub fn matrices(&self, dir: Option<Vector2<f64>>) -> (Matrix2<f64>, Matrix2<f64>) {
        match dir.and_then(|d| d.try_normalize(1e-15)) {
            Some(u) => {
                let w = Vector2::new(-u[1], u[0]);
                let uu = u * u.transpose();
                let ww = w * w.transpose();
                (uu * self.kp_along + ww * self.kp_across, uu * self.bp_along + ww * self.bp_across)
            }
            None => (Matrix2::identity() * self.kp_across, Matrix2::identity() * self.bp_across),
        }
    }
}

/// `f = K e + B ė + f_ff`.
pub fn control_force(
    kp: &Matrix2<f64>,
    bp: &Matrix2<f64>,
    e_p: &Vector2<f64>,
    e_p_dot: &Vector2<f64>,
    ff: &Vector2<f64>,
) -> Vector2<f64> {
    kp * e_p + bp * e_p_dot + ff
}

/// `τ = Kθ wrap(e) + Bθ ė + τ_ff`.
pub fn control_torque(gains: &ImpedanceGains, e_theta: f64, e_theta_dot: f64, tf: f64) -> f64 {
    gains.k_theta * wrap_angle(e_theta) + gains.b_theta * e_theta_dot + tf
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RolloutConfig {
    pub dt: f64,
    pub use_feedforward: bool,
    /// Magnitude removed from the commanded force before it reaches the
    /// world; 0 disables.
    pub stiction_band: f64,
    /// Hard limit on simulated time; `None` runs to the end of the
    /// trajectory plus `settle`.
    pub timeout: Option<f64>,
    /// Time the final set-point is held after the trajectory ends, s.
    pub settle: f64,
    /// Set-point speed along the trajectory, m/s.
    pub speed: f64,
    pub depth_threshold: f64,
    pub metric: PathMetric,
}

impl Default for RolloutConfig {
    fn default() -> Self {
        Self {
            dt: 0.01,
            use_feedforward: true,
            stiction_band: 0.0,
            timeout: None,
            settle: 1.0,
            speed: 0.02,
            depth_threshold: 0.005,
            metric: PathMetric::default(),
        }
    }
}

impl RolloutConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.speed > 0.0 && self.settle >= 0.0 && self.stiction_band >= 0.0) {
            return Err(Error::param("rollout dt and speed must be positive, settle and stiction non-negative"));
        }
        Ok(())
    }

    /// Set-point spacing along the trajectory.
    pub fn step_length(&self) -> f64 {
        self.speed * self.dt
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub success: bool,
    pub time_to_success: Option<f64>,
    /// Executed poses relative to the start pose.
    pub path_executed: Trajectory,
    /// Largest planar contact force seen, N.
    pub max_contact_force: f64,
    /// Mean planar distance between tool and set-point over the steps
    /// before capture, m.
    pub mean_lateral_error: f64,
    pub captured: bool,
}

/// Executes `traj` from `start_pose` (world frame). The trajectory is
/// re-timed at constant speed; each step applies the impedance law (plus
/// feed-forward when enabled), lets the world respond and checks capture.
/// The rollout is deterministic; `_seed` is accepted for interface
/// symmetry with stochastic variants and currently unused.
pub fn rollout(
    world: &SimWorld,
    traj: &Trajectory,
    gains: &ImpedanceGains,
    cfg: &RolloutConfig,
    start_pose: &DVector<f64>,
    _seed: u64,
) -> Result<TrialResult> {
    world.validate()?;
    gains.validate()?;
    cfg.validate()?;
    let dim = world.dim();
    if traj.dim() != dim || start_pose.len() != dim {
        return Err(Error::DimensionMismatch { expected: dim, found: if traj.dim() != dim { traj.dim() } else { start_pose.len() } });
    }
    if cfg.use_feedforward && traj.ff_wrench().is_none() {
        return Err(Error::UnannotatedTrajectory);
    }
    let timed = traj.resample_arc_length(cfg.step_length(), &cfg.metric)?;
    let setpoints: Vec<DVector<f64>> = timed.waypoints().iter().map(|w| start_pose + w).collect();
    let ff = if cfg.use_feedforward { timed.ff_wrench() } else { None };
    let n = setpoints.len();
    let settle_steps = libm::ceil(cfg.settle / cfg.dt) as usize;
    let mut max_steps = n - 1 + settle_steps;
    if let Some(t) = cfg.timeout {
        max_steps = max_steps.min(libm::floor(t / cfg.dt) as usize);
    }

    let mut state = world.initial_state(start_pose.clone());
    let mut path = Vec::with_capacity(max_steps + 1);
    path.push(DVector::zeros(dim));
    let mut v_prev = DVector::zeros(dim);
    let mut max_force: f64 = 0.0;
    let mut err_sum = 0.0;
    let mut err_count = 0usize;
    let mut time_to_success = None;

    for k in 0..=max_steps {
        if world.success(&state, cfg.depth_threshold) {
            time_to_success = Some(state.t);
            break;
        }
        if k == max_steps {
            break;
        }
        let i = k.min(n - 1);
        let target = &setpoints[i];
        let v_d = match setpoints.get(i + 1) {
            Some(next) if k < n - 1 => pose_delta(target, next) / cfg.dt,
            _ => DVector::zeros(dim),
        };
        let e = pose_delta(&state.pose, target);
        let e_dot = &v_d - &v_prev;
        if !state.captured {
            err_sum += libm::hypot(e[0], e[1]);
            err_count += 1;
        }

        let dir = Vector2::new(v_d[0], v_d[1]);
        let (kp, bp) = gains.matrices(if dir.norm() > 0.0 { Some(dir) } else { None });
        let ff_i = ff.map(|f| f[i].clone()).unwrap_or_else(|| DVector::zeros(dim));
        let f = control_force(
            &kp,
            &bp,
            &Vector2::new(e[0], e[1]),
            &Vector2::new(e_dot[0], e_dot[1]),
            &Vector2::new(ff_i[0], ff_i[1]),
        );
        let mut command = DVector::zeros(dim);
        command[0] = f[0];
        command[1] = f[1];
        if dim == 3 {
            command[2] = control_torque(gains, e[2], e_dot[2], ff_i[2]);
        }
        if cfg.stiction_band > 0.0 {
            let mag = libm::hypot(command[0], command[1]);
            let keep = if mag > cfg.stiction_band { (mag - cfg.stiction_band) / mag } else { 0.0 };
            command[0] *= keep;
            command[1] *= keep;
        }

        let out = world.step(&state, &command, cfg.dt);
        max_force = max_force.max(libm::hypot(out.contact[0], out.contact[1]));
        v_prev = out.velocity;
        state = out.state;
        path.push(pose_delta(start_pose, &state.pose));
    }

    Ok(TrialResult {
        success: time_to_success.is_some(),
        time_to_success,
        path_executed: Trajectory::new(path)?,
        max_contact_force: max_force,
        mean_lateral_error: if err_count > 0 { err_sum / err_count as f64 } else { 0.0 },
        captured: state.captured,
    })
}
