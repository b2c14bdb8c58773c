//! Scripted demonstrations. A script traces a search pattern from a start
//! pose to the goal in the world frame at constant speed; the recorded
//! wrench at every sample is the world's contact response to the motion.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;
use nalgebra::DVector;

use crate::demo::{DemoSample, Demonstration, DEMO_DT};
use crate::math::{wrap_angle, PathMetric};
use crate::rng::{seeded, uniform_range};
use crate::trajectory::Trajectory;
use crate::world::{SimWorld, WorldKind};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScriptKind {
    /// Boustrophedon lanes across the start-to-goal line, advancing toward
    /// the goal; the last lane ends on it.
    Sweep,
    /// Archimedean spiral around the start whose final turn ends on the goal.
    Spiral,
    /// Straight approach to a point beside the goal, then a decaying
    /// lateral and yaw wiggle that settles on it.
    TwoPhase,
}

impl ScriptKind {
    pub fn name(self) -> &'static str {
        match self {
            ScriptKind::Sweep => "sweep",
            ScriptKind::Spiral => "spiral",
            ScriptKind::TwoPhase => "two_phase",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "sweep" => Some(ScriptKind::Sweep),
            "spiral" => Some(ScriptKind::Spiral),
            "two_phase" | "two-phase" => Some(ScriptKind::TwoPhase),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DemoScript {
    pub kind: ScriptKind,
    /// World-frame start pose.
    pub start: DVector<f64>,
    /// Path speed under `metric`, m/s.
    pub speed: f64,
    /// Sweep: lateral half-width of each lane. Two-phase: wiggle amplitude.
    pub half_width: f64,
    /// Sweep: lane spacing. Spiral: radial pitch per turn.
    pub spacing: f64,
    /// Two-phase: yaw wiggle amplitude, radians.
    pub yaw_amplitude: f64,
    /// Relative jitter on lane geometry drawn from the noise seed.
    pub jitter: f64,
    /// Recording stops after this many seconds.
    pub max_duration: f64,
    pub metric: PathMetric,
}

impl DemoScript {
    /// Defaults for `kind` in `world`: 6 cm from the goal for the planar
    /// scripts, upper-left of the socket with a yaw offset for the plug.
    pub fn default_for(world: &SimWorld, kind: ScriptKind) -> Self {
        let [hx, hy] = world.hole_center;
        let start = match world.kind {
            WorldKind::Peg2d => DVector::from_column_slice(&[hx - 0.06, hy]),
            WorldKind::Plug3d => DVector::from_column_slice(&[hx - 0.02, hy + 0.015, world.hole_yaw - 0.25]),
        };
        let (half_width, spacing) = match kind {
            ScriptKind::Sweep => (0.005, 0.004),
            ScriptKind::Spiral => (0.0, 0.004),
            ScriptKind::TwoPhase => (0.004, 0.0),
        };
        Self {
            kind,
            start,
            speed: 0.02,
            half_width,
            spacing,
            yaw_amplitude: 0.1,
            jitter: 0.1,
            max_duration: 600.0,
            metric: PathMetric::default(),
        }
    }

    pub fn with_start(mut self, start: DVector<f64>) -> Self {
        self.start = start;
        self
    }
}

/// Synthesizes a demonstration with the default script of `kind`.
pub fn synthesize_demo(world: &SimWorld, kind: ScriptKind, noise_seed: u64) -> Result<Demonstration> {
    synthesize_with(world, &DemoScript::default_for(world, kind), noise_seed)
}

pub fn synthesize_with(world: &SimWorld, script: &DemoScript, noise_seed: u64) -> Result<Demonstration> {
    world.validate()?;
    let dim = world.dim();
    if script.start.len() != dim {
        return Err(Error::DimensionMismatch { expected: dim, found: script.start.len() });
    }
    if !(script.speed > 0.0) {
        return Err(Error::param("script speed must be positive"));
    }
    let mut rng = seeded(noise_seed);
    let mut jit = |scale: f64| 1.0 + script.jitter * uniform_range(&mut rng, -1.0, 1.0) * scale;

    let start = script.start.clone();
    let mut goal = world.goal_pose();
    if dim == 3 {
        // aim for whichever of the two valid socket yaws is closer
        let e = wrap_angle(goal[2] - start[2]);
        let e = if e > PI / 2.0 {
            e - PI
        } else if e < -PI / 2.0 {
            e + PI
        } else {
            e
        };
        goal[2] = start[2] + e;
    }
    let planar = |p: &DVector<f64>| [p[0], p[1]];
    let [sx, sy] = planar(&start);
    let [gx, gy] = planar(&goal);
    let dist = libm::hypot(gx - sx, gy - sy);
    let (ux, uy) = if dist > 0.0 { ((gx - sx) / dist, (gy - sy) / dist) } else { (1.0, 0.0) };
    let (wx, wy) = (-uy, ux);

    // corner points of the path relative to the start
    let mut corners: Vec<DVector<f64>> = Vec::new();
    let at = |a: f64, c: f64, yaw: f64| {
        let mut p = DVector::zeros(dim);
        p[0] = a * ux + c * wx;
        p[1] = a * uy + c * wy;
        if dim == 3 {
            p[2] = yaw;
        }
        p
    };
    let dyaw = if dim == 3 { goal[2] - start[2] } else { 0.0 };
    match script.kind {
        ScriptKind::Sweep => {
            let lanes = libm::ceil(dist / script.spacing.max(1e-6)).max(1.0) as usize;
            let sp = dist / lanes as f64;
            corners.push(at(0.0, 0.0, 0.0));
            let mut side = 1.0;
            for i in 0..=lanes {
                let a = i as f64 * sp;
                let yaw = dyaw * i as f64 / lanes as f64;
                let hw = script.half_width * jit(1.0);
                if i == lanes {
                    corners.push(at(a, side * hw, yaw));
                    corners.push(at(a, 0.0, yaw));
                } else {
                    corners.push(at(a, side * hw, yaw));
                    corners.push(at(a, -side * script.half_width * jit(1.0), yaw));
                    side = -side;
                }
            }
        }
        ScriptKind::Spiral => {
            let phi = libm::atan2(uy, ux).rem_euclid(2.0 * PI);
            let turns = libm::ceil(dist / script.spacing.max(1e-6)).max(1.0);
            let theta_end = 2.0 * PI * turns + phi;
            let pitch = dist / theta_end;
            let wobble = jit(1.0) - 1.0;
            let steps = (theta_end / 0.05) as usize + 1;
            for i in 0..=steps {
                let th = theta_end * i as f64 / steps as f64;
                let r = pitch * th * (1.0 + 0.5 * wobble * libm::sin(th * 0.5 * turns / (turns + 1.0)));
                let mut p = DVector::zeros(dim);
                p[0] = r * libm::cos(th);
                p[1] = r * libm::sin(th);
                if dim == 3 {
                    p[2] = dyaw * th / theta_end;
                }
                corners.push(p);
            }
        }
        ScriptKind::TwoPhase => {
            let aside = script.half_width * jit(1.0);
            let approach = (dist - 2.0 * aside).max(0.0);
            corners.push(at(0.0, 0.0, 0.0));
            corners.push(at(approach, aside, 0.0));
            let waves = 3.0 * jit(0.5);
            let steps = 200;
            for i in 1..=steps {
                let s = i as f64 / steps as f64;
                let a = approach + (dist - approach) * s;
                let c = aside * (1.0 - s) + aside * (1.0 - s) * libm::sin(2.0 * PI * waves * s);
                let yaw = dyaw * s + script.yaw_amplitude * (1.0 - s) * libm::sin(2.0 * PI * 2.0 * s);
                corners.push(at(a, c, yaw));
            }
        }
    }
    let last = corners.len() - 1;
    corners[last] = &goal - &start;
    corners[0].fill(0.0);

    let path = Trajectory::new(corners)?.resample_arc_length(script.speed * DEMO_DT, &script.metric)?;
    let poses: Vec<DVector<f64>> = path.waypoints().iter().map(|p| p + &start).collect();

    let mut samples = Vec::with_capacity(poses.len());
    let mut entered = false;
    let max_samples = libm::floor(script.max_duration / DEMO_DT) as usize + 1;
    for (i, p) in poses.iter().enumerate().take(max_samples) {
        let vel = match poses.get(i + 1) {
            Some(next) => crate::trajectory::pose_delta(p, next) / DEMO_DT,
            None if i > 0 => crate::trajectory::pose_delta(&poses[i - 1], p) / DEMO_DT,
            None => DVector::zeros(dim),
        };
        let state = crate::world::SimState { pose: p.clone(), depth: 0.0, captured: false, t: 0.0 };
        let wrench = world.contact_wrench(&state, &vel);
        samples.push(DemoSample { t: i as f64 * DEMO_DT, pose: p.clone(), wrench });
        if world.is_capture_pose(p) {
            entered = true;
            break;
        }
    }
    if !entered {
        return Err(Error::ScriptFailed);
    }
    Demonstration::new(format!("{}-{}-{}", world.id, script.kind.name(), noise_seed), samples)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_covers_hole() {
        let w = SimWorld::peg2d();
        let d = synthesize_demo(&w, ScriptKind::Sweep, 3).unwrap();
        let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        for s in d.samples() {
            for i in 0..2 {
                lo[i] = lo[i].min(s.pose[i]);
                hi[i] = hi[i].max(s.pose[i]);
            }
        }
        for i in 0..2 {
            assert!(lo[i] <= w.hole_center[i] && w.hole_center[i] <= hi[i]);
        }
        assert!(w.is_capture_pose(&d.samples().last().unwrap().pose));
        assert!(d.path_length(&PathMetric::default()) > 0.15);
    }

    #[test]
    fn same_seed_same_demo() {
        let w = SimWorld::peg2d();
        for kind in [ScriptKind::Sweep, ScriptKind::Spiral] {
            let a = synthesize_demo(&w, kind, 11).unwrap();
            let b = synthesize_demo(&w, kind, 11).unwrap();
            assert_eq!(a, b);
            let c = synthesize_demo(&w, kind, 12).unwrap();
            assert_ne!(a.samples(), c.samples());
        }
    }

    #[test]
    fn sliding_wrench_is_coulomb() {
        let w = SimWorld::peg2d();
        let d = synthesize_demo(&w, ScriptKind::Sweep, 1).unwrap();
        let limit = w.mu_friction * w.normal_force;
        let reach = w.clearance() + w.chamfer_width;
        let mut checked = 0;
        for (i, s) in d.samples().iter().enumerate().take(d.samples().len() - 1) {
            let far = libm::hypot(s.pose[0] - w.hole_center[0], s.pose[1] - w.hole_center[1]) > reach;
            let moving = (&d.samples()[i + 1].pose - &s.pose).norm() > 0.0;
            if far && moving {
                assert!((s.wrench.norm() - limit).abs() < 1e-9);
                let v = &d.samples()[i + 1].pose - &s.pose;
                assert!(s.wrench.dot(&v) < 0.0);
                checked += 1;
            }
        }
        assert!(checked > 1000);
    }

    #[test]
    fn constant_speed() {
        let w = SimWorld::peg2d();
        let d = synthesize_demo(&w, ScriptKind::Spiral, 2).unwrap();
        let s = d.samples();
        let step = 0.02 * DEMO_DT;
        for pair in s.windows(2).take(s.len() - 2) {
            let dd = (&pair[1].pose - &pair[0].pose).norm();
            assert!(dd <= step * (1.0 + 1e-9) && dd > 0.5 * step, "{dd}");
        }
    }

    #[test]
    fn two_phase_plug_ends_in_socket() {
        let w = SimWorld::plug3d();
        let d = synthesize_demo(&w, ScriptKind::TwoPhase, 5).unwrap();
        assert_eq!(d.dim(), 3);
        let end = &d.samples().last().unwrap().pose;
        assert!(w.is_capture_pose(end));
        let yaws: Vec<f64> = d.samples().iter().map(|s| s.pose[2]).collect();
        assert!(yaws.iter().any(|y| (y - yaws[0]).abs() > 0.05));
        // the flipped start reaches the other valid yaw
        let mut s = DemoScript::default_for(&w, ScriptKind::TwoPhase);
        s.start[2] += PI;
        let d2 = synthesize_with(&w, &s, 5).unwrap();
        assert!(w.is_capture_pose(&d2.samples().last().unwrap().pose));
    }

    #[test]
    fn script_that_never_arrives_fails() {
        let w = SimWorld::peg2d();
        let s = DemoScript { max_duration: 5.0, ..DemoScript::default_for(&w, ScriptKind::Sweep) };
        assert_eq!(synthesize_with(&w, &s, 0).unwrap_err(), Error::ScriptFailed);
        let s = DemoScript { speed: 0.0, ..DemoScript::default_for(&w, ScriptKind::Sweep) };
        assert!(synthesize_with(&w, &s, 0).is_err());
    }
}
