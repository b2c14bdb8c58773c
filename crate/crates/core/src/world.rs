//! Quasi-static planar contact worlds: a round peg over a chamfered hole,
//! and a two-pin plug over a socket face with yaw.
//!
//! The tool is a point contact pressed onto the surface with a constant
//! normal force. Motion follows a viscous mobility law `v = F_net / b` where
//! `F_net` is the applied wrench minus Coulomb friction. Friction for the
//! plug couples translation and yaw through an ellipsoidal limit surface
//! with friction radius `friction_radius`.

use alloc::string::String;
use core::f64::consts::PI;
use nalgebra::DVector;

use crate::math::wrap_angle;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WorldKind {
    Peg2d,
    Plug3d,
}

impl WorldKind {
    pub fn dim(self) -> usize {
        match self {
            WorldKind::Peg2d => 2,
            WorldKind::Plug3d => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            WorldKind::Peg2d => "peg2d",
            WorldKind::Plug3d => "plug3d",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "peg2d" => Some(WorldKind::Peg2d),
            "plug3d" => Some(WorldKind::Plug3d),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimWorld {
    pub id: String,
    pub kind: WorldKind,
    /// Hole (peg2d) or socket (plug3d) center, world frame, meters.
    pub hole_center: [f64; 2],
    /// Socket orientation, radians (plug3d).
    pub hole_yaw: f64,
    pub peg_radius: f64,
    pub hole_radius: f64,
    /// Distance between the two plug pins.
    pub pin_spacing: f64,
    pub pin_radius: f64,
    pub pin_hole_radius: f64,
    pub mu_friction: f64,
    /// Constant pressing force, newtons.
    pub normal_force: f64,
    /// Insertion speed once captured, m/s.
    pub capture_depth_rate: f64,
    /// Radial extent of the chamfer ring outside the clearance, meters.
    pub chamfer_width: f64,
    /// Slope of the chamfer; the inward pull is `normal_force * chamfer_slope`.
    pub chamfer_slope: f64,
    /// Viscous mobility coefficient `b`, N·s/m.
    pub viscous_damping: f64,
    /// Lever arm converting yaw into the friction limit surface, meters.
    pub friction_radius: f64,
}

impl SimWorld {
    pub fn peg2d() -> Self {
        Self {
            id: "peg2d".into(),
            kind: WorldKind::Peg2d,
            hole_center: [0.0, 0.0],
            hole_yaw: 0.0,
            peg_radius: 0.0095,
            hole_radius: 0.010,
            pin_spacing: 0.019,
            pin_radius: 0.0024,
            pin_hole_radius: 0.0029,
            mu_friction: 0.3,
            normal_force: 10.0,
            capture_depth_rate: 0.05,
            chamfer_width: 0.0025,
            chamfer_slope: 0.5,
            viscous_damping: 100.0,
            friction_radius: 0.0095,
        }
    }

    pub fn plug3d() -> Self {
        Self {
            id: "plug3d".into(),
            kind: WorldKind::Plug3d,
            peg_radius: 0.018,
            hole_radius: 0.0195,
            chamfer_width: 0.002,
            friction_radius: 0.05,
            ..Self::peg2d()
        }
    }

    pub fn dim(&self) -> usize {
        self.kind.dim()
    }

    pub fn validate(&self) -> Result<()> {
        let all = [
            self.peg_radius,
            self.hole_radius,
            self.pin_spacing,
            self.pin_radius,
            self.pin_hole_radius,
            self.mu_friction,
            self.normal_force,
            self.capture_depth_rate,
            self.chamfer_width,
            self.chamfer_slope,
            self.viscous_damping,
            self.friction_radius,
            self.hole_center[0],
            self.hole_center[1],
            self.hole_yaw,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::param("non-finite world parameter"));
        }
        if !(self.hole_radius > self.peg_radius) || self.peg_radius <= 0.0 {
            return Err(Error::param("hole_radius must exceed peg_radius"));
        }
        if !(self.pin_hole_radius > self.pin_radius) || self.pin_radius <= 0.0 {
            return Err(Error::param("pin_hole_radius must exceed pin_radius"));
        }
        if !(0.0..=2.0).contains(&self.mu_friction) {
            return Err(Error::param("mu_friction must lie in [0, 2]"));
        }
        if self.chamfer_width < 0.0 || self.chamfer_slope < 0.0 || self.normal_force < 0.0 {
            return Err(Error::param("chamfer and normal force must be non-negative"));
        }
        if self.viscous_damping <= 0.0 || self.friction_radius <= 0.0 || self.capture_depth_rate <= 0.0 {
            return Err(Error::param("damping, friction radius and depth rate must be positive"));
        }
        if self.kind == WorldKind::Plug3d && self.pin_spacing <= 2.0 * self.pin_hole_radius {
            return Err(Error::param("pin holes overlap"));
        }
        Ok(())
    }

    /// Capture tolerance on position: hole minus peg radius (peg2d) or pin
    /// hole minus pin radius (plug3d).
    pub fn clearance(&self) -> f64 {
        match self.kind {
            WorldKind::Peg2d => self.hole_radius - self.peg_radius,
            WorldKind::Plug3d => self.pin_hole_radius - self.pin_radius,
        }
    }

    /// Largest yaw error that still lets both pins capture when the plug
    /// center is exactly on the socket center.
    pub fn yaw_tolerance(&self) -> f64 {
        2.0 * libm::asin((self.clearance() / self.pin_spacing).min(1.0))
    }

    /// Goal pose in the world frame.
    pub fn goal_pose(&self) -> DVector<f64> {
        match self.kind {
            WorldKind::Peg2d => DVector::from_column_slice(&self.hole_center),
            WorldKind::Plug3d => {
                DVector::from_column_slice(&[self.hole_center[0], self.hole_center[1], self.hole_yaw])
            }
        }
    }

    pub fn initial_state(&self, pose: DVector<f64>) -> SimState {
        let mut s = SimState { pose, depth: 0.0, captured: false, t: 0.0 };
        s.captured = self.is_capture_pose(&s.pose);
        s
    }

    fn pins(&self, pose: &DVector<f64>) -> [[f64; 2]; 2] {
        let h = 0.5 * self.pin_spacing;
        let (s, c) = libm::sincos(pose[2]);
        [[pose[0] + h * c, pose[1] + h * s], [pose[0] - h * c, pose[1] - h * s]]
    }

    fn pin_holes(&self) -> [[f64; 2]; 2] {
        let h = 0.5 * self.pin_spacing;
        let (s, c) = libm::sincos(self.hole_yaw);
        let [x, y] = self.hole_center;
        [[x + h * c, y + h * s], [x - h * c, y - h * s]]
    }

    /// True when the pose lies within clearance of the hole; for the plug,
    /// both pins must sit in their holes under either of the two pin
    /// assignments (the plug is symmetric under a half turn).
    pub fn is_capture_pose(&self, pose: &DVector<f64>) -> bool {
        let c0 = self.clearance();
        match self.kind {
            WorldKind::Peg2d => {
                let dx = pose[0] - self.hole_center[0];
                let dy = pose[1] - self.hole_center[1];
                libm::hypot(dx, dy) <= c0
            }
            WorldKind::Plug3d => {
                let p = self.pins(pose);
                let h = self.pin_holes();
                let d = |a: [f64; 2], b: [f64; 2]| libm::hypot(a[0] - b[0], a[1] - b[1]);
                (d(p[0], h[0]) <= c0 && d(p[1], h[1]) <= c0) || (d(p[0], h[1]) <= c0 && d(p[1], h[0]) <= c0)
            }
        }
    }

    /// Marks the state captured once the pose reaches the hole and grows the
    /// insertion depth over `dt` while captured. Capture is never undone.
    pub fn capture_check(&self, state: &SimState, dt: f64) -> SimState {
        let mut next = state.clone();
        if !next.captured && self.is_capture_pose(&next.pose) {
            next.captured = true;
        }
        if next.captured {
            next.depth += self.capture_depth_rate * dt.max(0.0);
        }
        next
    }

    pub fn success(&self, state: &SimState, depth_threshold: f64) -> bool {
        state.captured && state.depth >= depth_threshold
    }

    /// Inward pull of the chamfer ring(s) at the current pose: a force
    /// toward the hole center and, for the plug, the torque it produces
    /// about the plug center.
    pub fn chamfer_wrench(&self, state: &SimState) -> DVector<f64> {
        let mut w = DVector::zeros(self.dim());
        if state.captured || self.chamfer_width <= 0.0 {
            return w;
        }
        let c0 = self.clearance();
        let pull = self.normal_force * self.chamfer_slope;
        let ring = |from: [f64; 2], to: [f64; 2]| -> Option<[f64; 2]> {
            let dx = to[0] - from[0];
            let dy = to[1] - from[1];
            let d = libm::hypot(dx, dy);
            if d >= c0 + self.chamfer_width || d == 0.0 {
                return None;
            }
            let mag = if d > c0 { pull } else { pull * d / c0 };
            Some([mag * dx / d, mag * dy / d])
        };
        match self.kind {
            WorldKind::Peg2d => {
                if let Some(f) = ring([state.pose[0], state.pose[1]], self.hole_center) {
                    w[0] = f[0];
                    w[1] = f[1];
                }
            }
            WorldKind::Plug3d => {
                let holes = self.pin_holes();
                for pin in self.pins(&state.pose) {
                    let d0 = libm::hypot(pin[0] - holes[0][0], pin[1] - holes[0][1]);
                    let d1 = libm::hypot(pin[0] - holes[1][0], pin[1] - holes[1][1]);
                    let hole = if d0 <= d1 { holes[0] } else { holes[1] };
                    if let Some(f) = ring(pin, hole) {
                        let rx = pin[0] - state.pose[0];
                        let ry = pin[1] - state.pose[1];
                        w[0] += f[0];
                        w[1] += f[1];
                        w[2] += rx * f[1] - ry * f[0];
                    }
                }
            }
        }
        w
    }

    /// Coulomb friction opposing `velocity`: `-mu N v̂` on translation and,
    /// for the plug, the matching yaw torque from the limit surface. Zero at
    /// rest; the static regime is resolved by [`SimWorld::respond`].
    pub fn friction_wrench(&self, velocity: &DVector<f64>) -> DVector<f64> {
        let rho = self.friction_radius;
        let mut xi = velocity.clone();
        if xi.len() == 3 {
            xi[2] *= rho;
        }
        let n = xi.norm();
        if n == 0.0 {
            return DVector::zeros(velocity.len());
        }
        let mut f = xi * (-self.mu_friction * self.normal_force / n);
        if f.len() == 3 {
            f[2] *= rho;
        }
        f
    }

    /// Interaction wrench acting on the tool at `state` when it moves with
    /// `velocity`: friction plus chamfer reaction.
    pub fn contact_wrench(&self, state: &SimState, velocity: &DVector<f64>) -> DVector<f64> {
        if state.captured {
            return DVector::zeros(self.dim());
        }
        self.friction_wrench(velocity) + self.chamfer_wrench(state)
    }

    /// Velocity produced by an applied wrench (already including any
    /// position-dependent contact forces): zero inside the friction cone,
    /// otherwise the viscous response to what friction leaves over.
    pub fn respond(&self, applied: &DVector<f64>) -> DVector<f64> {
        let rho = self.friction_radius;
        let mut g = applied.clone();
        if g.len() == 3 {
            g[2] /= rho;
        }
        let mag = g.norm();
        let limit = self.mu_friction * self.normal_force;
        if mag <= limit {
            return DVector::zeros(applied.len());
        }
        let mut v = g * ((1.0 - limit / mag) / self.viscous_damping);
        if v.len() == 3 {
            v[2] /= rho;
        }
        v
    }

    /// One quasi-static step under the commanded wrench. Returns the new
    /// state, the velocity and the interaction wrench felt by the tool.
    pub fn step(&self, state: &SimState, command: &DVector<f64>, dt: f64) -> StepOutcome {
        if state.captured {
            let mut next = self.capture_check(state, dt);
            next.t += dt;
            return StepOutcome { state: next, velocity: DVector::zeros(self.dim()), contact: DVector::zeros(self.dim()) };
        }
        let chamfer = self.chamfer_wrench(state);
        let velocity = self.respond(&(command + &chamfer));
        let contact = self.friction_wrench(&velocity) + chamfer;
        let mut next = state.clone();
        next.pose += &velocity * dt;
        next.t += dt;
        let next = self.capture_check(&next, 0.0);
        StepOutcome { state: next, velocity, contact }
    }

    /// Yaw error between the plug and the socket modulo the half-turn
    /// symmetry, in `[0, pi/2]`.
    pub fn symmetric_yaw_error(&self, yaw: f64) -> f64 {
        let e = wrap_angle(yaw - self.hole_yaw).abs();
        if e > PI / 2.0 {
            PI - e
        } else {
            e
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub pose: DVector<f64>,
    pub depth: f64,
    pub captured: bool,
    pub t: f64,
}

#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub state: SimState,
    pub velocity: DVector<f64>,
    pub contact: DVector<f64>,
}
