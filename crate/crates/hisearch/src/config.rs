//! Experiment configuration: INI-style `[section]` files layered over
//! per-experiment defaults.
//!
//! ```text
//! [experiment]
//! kind = e2_sample_size        # e1_tshix_vs_ergodic | e2_sample_size | e3_feedforward | e4_plug3d
//! world = peg2d                # built-in id or path to a world file
//! n_trials = 20
//! n_samples = 100, 200, 300, 400, 500
//! seed = 7
//! output_dir = out/e2
//! demos = synth                # or comma-separated demo-set directories
//!
//! [world]                      # overrides of world fields
//! mu_friction = 0.3
//!
//! [start]
//! diameter = 0.03              # e1 start disc
//! center = -0.03, 0.0          # e1 disc center (default: halfway from demo start to hole)
//! fixed = -0.03, 0.0           # e2/e3 start (default: centroid of successful e1 starts)
//! inner_radius = 0.01          # e4 half-annulus
//! outer_radius = 0.02
//! yaw_range = 0.25
//!
//! [controller]
//! kp_along = 500
//! kp_across = 150
//! k_theta = 5
//! speed = 0.02
//! settle = 1.0
//! stiction_band = 0
//! depth_threshold = 0.005
//!
//! [demo]                       # synthetic demo script overrides
//! half_width = 0.005           # sweep lane half-width / two-phase wiggle
//! spacing = 0.004              # sweep lane spacing
//! yaw_amplitude = 0.1          # two-phase yaw wiggle, rad
//!
//! [planner]
//! sg_window = 9
//! sg_order = 3
//! ga_population = 64
//! ergodic_iters = 300
//! ergodic_k = 10
//! ergodic_points = 600
//! walk_step_scale = 0.05
//! ```

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use hisearch_core::world::{SimWorld, WorldKind};
use ini::Ini;
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};
use crate::io::{apply_world_keys, load_world, read_file};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    E1,
    E2,
    E3,
    E4,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::E1 => "e1_tshix_vs_ergodic",
            ExperimentKind::E2 => "e2_sample_size",
            ExperimentKind::E3 => "e3_feedforward",
            ExperimentKind::E4 => "e4_plug3d",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "e1" | "e1_tshix_vs_ergodic" => Some(ExperimentKind::E1),
            "e2" | "e2_sample_size" => Some(ExperimentKind::E2),
            "e3" | "e3_feedforward" => Some(ExperimentKind::E3),
            "e4" | "e4_plug3d" => Some(ExperimentKind::E4),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StartConfig {
    pub diameter: f64,
    pub center: Option<[f64; 2]>,
    pub fixed: Option<[f64; 2]>,
    pub inner_radius: f64,
    pub outer_radius: f64,
    pub yaw_range: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ControllerConfig {
    pub kp_along: f64,
    pub kp_across: f64,
    pub k_theta: f64,
    pub speed: f64,
    pub settle: f64,
    pub stiction_band: f64,
    pub depth_threshold: f64,
}

/// Overrides of the synthetic demonstration scripts; unset fields keep the
/// script defaults.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DemoConfig {
    pub half_width: Option<f64>,
    pub spacing: Option<f64>,
    pub yaw_amplitude: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlannerConfig {
    pub sg_window: usize,
    pub sg_order: usize,
    pub ga_population: usize,
    pub ergodic_iters: usize,
    pub ergodic_k: usize,
    pub ergodic_points: usize,
    pub walk_step_scale: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub world_ref: String,
    pub world: SimWorld,
    pub n_trials: usize,
    pub n_samples: Vec<usize>,
    pub demos: Vec<String>,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub start: StartConfig,
    pub controller: ControllerConfig,
    pub demo: DemoConfig,
    pub planner: PlannerConfig,
}

/// Drops trailing `# ...` / `; ...` comments (preceded by whitespace).
fn strip_inline_comments(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for line in text.lines() {
        let cut = line
            .char_indices()
            .find(|&(i, c)| (c == '#' || c == ';') && i > 0 && line[..i].ends_with(char::is_whitespace))
            .map_or(line.len(), |(i, _)| i);
        out.push_str(line[..cut].trim_end());
        out.push('\n');
    }
    out
}

impl ExperimentConfig {
    pub fn defaults(experiment: ExperimentKind) -> Self {
        let (world_ref, world, n_trials, n_samples) = match experiment {
            ExperimentKind::E1 => ("peg2d", SimWorld::peg2d(), 30, vec![300]),
            ExperimentKind::E2 => ("peg2d", SimWorld::peg2d(), 20, vec![100, 200, 300, 400, 500]),
            ExperimentKind::E3 => ("peg2d", SimWorld::peg2d(), 20, vec![100, 200, 400]),
            ExperimentKind::E4 => ("plug3d", SimWorld::plug3d(), 15, vec![600]),
        };
        Self {
            experiment,
            world_ref: world_ref.into(),
            world,
            n_trials,
            n_samples,
            demos: vec!["synth".into()],
            seed: 7,
            output_dir: PathBuf::from("out").join(experiment.name()),
            start: StartConfig {
                diameter: 0.03,
                center: None,
                fixed: None,
                inner_radius: 0.01,
                outer_radius: 0.02,
                yaw_range: 0.25,
            },
            controller: ControllerConfig {
                kp_along: 500.0,
                kp_across: 150.0,
                k_theta: 5.0,
                speed: 0.02,
                settle: 1.0,
                stiction_band: 0.0,
                depth_threshold: 0.005,
            },
            demo: DemoConfig::default(),
            planner: PlannerConfig {
                sg_window: 9,
                sg_order: 3,
                ga_population: 64,
                ergodic_iters: 300,
                ergodic_k: 10,
                ergodic_points: 600,
                walk_step_scale: 0.05,
            },
        }
    }

    /// Parses a config file. `fallback` supplies the experiment when the
    /// file has no `kind`.
    pub fn parse(text: &str, fallback: Option<ExperimentKind>) -> Result<Self> {
        let ini = Ini::load_from_str(&strip_inline_comments(text)).map_err(|e| CliError::usage(format!("config: {e}")))?;
        let get = |sec: &str, key: &str| ini.section(Some(sec)).and_then(|s| s.get(key));
        let kind = match get("experiment", "kind") {
            Some(k) => ExperimentKind::parse(k).ok_or_else(|| CliError::usage(format!("config: unknown experiment {k}")))?,
            None => fallback.ok_or_else(|| CliError::usage("config: missing [experiment] kind"))?,
        };
        if let (Some(f), Some(k)) = (fallback, get("experiment", "kind")) {
            if ExperimentKind::parse(k) != Some(f) {
                return Err(CliError::usage(format!("config is for {k}, not {}", f.name())));
            }
        }
        let mut c = Self::defaults(kind);
        for (sec, props) in ini.iter() {
            let Some(sec) = sec else {
                if props.iter().next().is_some() {
                    return Err(CliError::usage("config: keys outside a [section]"));
                }
                continue;
            };
            match sec {
                "experiment" => {
                    for (k, v) in props.iter() {
                        c.set_experiment(k, v)?;
                    }
                }
                "world" => {}
                "start" | "controller" | "demo" | "planner" => {
                    for (k, v) in props.iter() {
                        c.set(sec, k, v)?;
                    }
                }
                other => return Err(CliError::usage(format!("config: unknown section [{other}]"))),
            }
        }
        if let Some(props) = ini.section(Some("world")) {
            apply_world_keys(&mut c.world, props.iter()).map_err(|e| CliError::usage(format!("config: {e}")))?;
        }
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path, fallback: Option<ExperimentKind>) -> Result<Self> {
        Self::parse(&read_file(path)?, fallback)
    }

    fn set_experiment(&mut self, k: &str, v: &str) -> Result<()> {
        match k {
            "kind" => {}
            "world" => {
                self.world = load_world(v)?;
                self.world_ref = v.to_owned();
            }
            "n_trials" => self.n_trials = uint(k, v)?,
            "n_samples" => self.n_samples = v.split(',').map(|x| uint(k, x)).collect::<Result<_>>()?,
            "demos" => self.demos = v.split(',').map(|s| s.trim().to_owned()).filter(|s| !s.is_empty()).collect(),
            "seed" => self.seed = v.trim().parse().map_err(|_| bad(k, v))?,
            "output_dir" => self.output_dir = PathBuf::from(v.trim()),
            _ => return Err(CliError::usage(format!("config: unknown key experiment.{k}"))),
        }
        Ok(())
    }

    fn set(&mut self, sec: &str, k: &str, v: &str) -> Result<()> {
        let s = &mut self.start;
        let c = &mut self.controller;
        let p = &mut self.planner;
        let d = &mut self.demo;
        match (sec, k) {
            ("start", "diameter") => s.diameter = num(k, v)?,
            ("start", "center") => s.center = Some(pair(k, v)?),
            ("start", "fixed") => s.fixed = Some(pair(k, v)?),
            ("start", "inner_radius") => s.inner_radius = num(k, v)?,
            ("start", "outer_radius") => s.outer_radius = num(k, v)?,
            ("start", "yaw_range") => s.yaw_range = num(k, v)?,
            ("controller", "kp_along") => c.kp_along = num(k, v)?,
            ("controller", "kp_across") => c.kp_across = num(k, v)?,
            ("controller", "k_theta") => c.k_theta = num(k, v)?,
            ("controller", "speed") => c.speed = num(k, v)?,
            ("controller", "settle") => c.settle = num(k, v)?,
            ("controller", "stiction_band") => c.stiction_band = num(k, v)?,
            ("controller", "depth_threshold") => c.depth_threshold = num(k, v)?,
            ("demo", "half_width") => d.half_width = Some(num(k, v)?),
            ("demo", "spacing") => d.spacing = Some(num(k, v)?),
            ("demo", "yaw_amplitude") => d.yaw_amplitude = Some(num(k, v)?),
            ("planner", "sg_window") => p.sg_window = uint(k, v)?,
            ("planner", "sg_order") => p.sg_order = uint(k, v)?,
            ("planner", "ga_population") => p.ga_population = uint(k, v)?,
            ("planner", "ergodic_iters") => p.ergodic_iters = uint(k, v)?,
            ("planner", "ergodic_k") => p.ergodic_k = uint(k, v)?,
            ("planner", "ergodic_points") => p.ergodic_points = uint(k, v)?,
            ("planner", "walk_step_scale") => p.walk_step_scale = num(k, v)?,
            _ => return Err(CliError::usage(format!("config: unknown key {sec}.{k}"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_trials == 0 {
            return Err(CliError::usage("config: n_trials must be at least 1"));
        }
        if self.n_samples.is_empty() || self.n_samples.iter().any(|&n| n < 2) {
            return Err(CliError::usage("config: n_samples must be a non-empty list of sizes >= 2"));
        }
        if self.demos.is_empty() {
            return Err(CliError::usage("config: demos must name at least one demo set or `synth`"));
        }
        let needs = if self.experiment == ExperimentKind::E4 { WorldKind::Plug3d } else { WorldKind::Peg2d };
        if self.world.kind != needs {
            return Err(CliError::usage(format!(
                "config: {} needs a {} world, got {}",
                self.experiment.name(),
                needs.name(),
                self.world.kind.name()
            )));
        }
        self.world.validate().map_err(|e| CliError::usage(format!("config: {e}")))?;
        Ok(())
    }

    /// Every setting that influences results, one `key = value` per line in
    /// a fixed order. The output directory is excluded.
    pub fn canonical(&self) -> String {
        let mut s = String::new();
        let w = &self.world;
        let _ = writeln!(s, "experiment = {}", self.experiment.name());
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "n_trials = {}", self.n_trials);
        let _ = writeln!(s, "n_samples = {:?}", self.n_samples);
        let _ = writeln!(s, "demos = {:?}", self.demos);
        let _ = write!(s, "{}", crate::io::format_world(w));
        let _ = writeln!(s, "{:?}", self.start);
        let _ = writeln!(s, "{:?}", self.controller);
        let _ = writeln!(s, "{:?}", self.demo);
        let _ = writeln!(s, "{:?}", self.planner);
        s
    }

    pub fn hash(&self) -> String {
        Sha256::digest(self.canonical().as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }
}

fn bad(k: &str, v: &str) -> CliError {
    CliError::usage(format!("config: bad value for {k}: {v:?}"))
}

fn num(k: &str, v: &str) -> Result<f64> {
    v.trim().parse::<f64>().ok().filter(|x| x.is_finite()).ok_or_else(|| bad(k, v))
}

fn uint(k: &str, v: &str) -> Result<usize> {
    v.trim().parse().map_err(|_| bad(k, v))
}

fn pair(k: &str, v: &str) -> Result<[f64; 2]> {
    let xs: Vec<f64> = v.split(',').map(|x| num(k, x)).collect::<Result<_>>()?;
    match xs.as_slice() {
        [a, b] => Ok([*a, *b]),
        _ => Err(bad(k, v)),
    }
}
