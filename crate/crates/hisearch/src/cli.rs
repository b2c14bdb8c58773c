//! Command-line front end.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use hisearch_core::controller::{rollout, ImpedanceGains, RolloutConfig};
use hisearch_core::demo::{accept_demo, Acceptance, GoalRegion};
use hisearch_core::dynamics::{annotate_trajectory, DynamicsModel};
use hisearch_core::ergodic::{generate_ergodic, OptimParams};
use hisearch_core::math::PathMetric;
use hisearch_core::rng::derive_seed;
use hisearch_core::synth::{synthesize_with, DemoScript, ScriptKind};
use hisearch_core::trajectory::Trajectory;
use hisearch_core::tshix::{generate_tshix, random_walk_trajectory, GaParams, SgParams};
use hisearch_core::DVector;
use sha2::{Digest, Sha256};

use crate::bench::{self, prepare, RunOptions};
use crate::config::{ExperimentConfig, ExperimentKind};
use crate::error::{CliError, Result};
use crate::io::{
    format_dynamics, format_gaussian, format_table, format_trajectory, load_world, parse_dynamics, parse_gaussian,
    parse_trajectory, read_demo_set, read_file, write_demo_set, write_file,
};
use crate::report;

#[derive(Debug, Parser)]
#[command(name = "hisearch", version, about = "Demonstration-driven contact search: fit, plan, simulate, benchmark")]
pub struct Cli {
    /// Master seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Experiment config file (bench only).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for trial fan-out.
    #[arg(long, global = true, default_value_t = 1)]
    pub jobs: usize,
    /// Record CPU and wall times (makes outputs non-reproducible).
    #[arg(long, global = true)]
    pub timing: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Synthesize or check demonstrations.
    #[command(subcommand)]
    Demo(DemoCmd),
    /// Fit the exploration distribution or the dynamics model.
    #[command(subcommand)]
    Fit(FitCmd),
    /// Generate a search trajectory.
    #[command(subcommand)]
    Plan(PlanCmd),
    /// Execute a trajectory in the simulator.
    Rollout(RolloutArgs),
    /// Run a benchmark experiment.
    Bench {
        #[arg(value_enum)]
        experiment: BenchKind,
        /// Override the number of trials.
        #[arg(long)]
        trials: Option<usize>,
        /// Override the sample sizes (comma-separated).
        #[arg(long, value_delimiter = ',')]
        samples: Option<Vec<usize>>,
    },
    /// Aggregate a sample-size sweep directory into `plot.csv`.
    Report {
        dir: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum BenchKind {
    E1,
    E2,
    E3,
    E4,
}

impl BenchKind {
    fn kind(self) -> ExperimentKind {
        match self {
            BenchKind::E1 => ExperimentKind::E1,
            BenchKind::E2 => ExperimentKind::E2,
            BenchKind::E3 => ExperimentKind::E3,
            BenchKind::E4 => ExperimentKind::E4,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum DemoCmd {
    /// Scripted demonstrations written as a demo set.
    Synth {
        #[arg(long, default_value = "peg2d")]
        world: String,
        /// sweep, spiral or two_phase.
        #[arg(long, default_value = "sweep")]
        kind: String,
        #[arg(long, default_value_t = 1)]
        count: usize,
        /// Raw start pose `x,y[,yaw]`.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        start: Option<Vec<f64>>,
    },
    /// Report acceptance of every demonstration in a set.
    Validate {
        dir: PathBuf,
        #[arg(long)]
        world: Option<String>,
    },
}

#[derive(Debug, Subcommand)]
pub enum FitCmd {
    Explore {
        #[arg(long, value_delimiter = ',', required = true)]
        demos: Vec<PathBuf>,
    },
    Dynamics {
        #[arg(long, value_delimiter = ',', required = true)]
        demos: Vec<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct PlanCommon {
    /// Exploration distribution file.
    #[arg(long)]
    model: PathBuf,
    /// Dynamics model; when given the trajectory carries feed-forward.
    #[arg(long)]
    dynamics: Option<PathBuf>,
    /// Re-time at this arc-length spacing before annotation.
    #[arg(long, default_value_t = 0.0002)]
    step: f64,
}

#[derive(Debug, Subcommand)]
pub enum PlanCmd {
    /// Sampled, tour-ordered, smoothed trajectory.
    Tshix {
        #[command(flatten)]
        common: PlanCommon,
        #[arg(long, default_value_t = 300)]
        samples: usize,
    },
    /// Ergodic coverage trajectory.
    Ergodic {
        #[command(flatten)]
        common: PlanCommon,
        #[arg(long, default_value_t = 600)]
        points: usize,
        /// Path length budget in meters.
        #[arg(long, default_value_t = 1.0)]
        length: f64,
        #[arg(long, default_value_t = 300)]
        iters: usize,
    },
    /// Gaussian random-walk baseline.
    Randomwalk {
        #[command(flatten)]
        common: PlanCommon,
        #[arg(long, default_value_t = 5000)]
        steps: usize,
        #[arg(long, default_value_t = 0.05)]
        scale: f64,
    },
}

#[derive(Debug, Args)]
pub struct RolloutArgs {
    #[arg(long, default_value = "peg2d")]
    world: String,
    #[arg(long)]
    trajectory: PathBuf,
    /// Raw start pose `x,y[,yaw]`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    start: Vec<f64>,
    #[arg(long)]
    no_ff: bool,
    #[arg(long, default_value_t = 500.0)]
    kp_along: f64,
    #[arg(long, default_value_t = 150.0)]
    kp_across: f64,
    #[arg(long, default_value_t = 5.0)]
    k_theta: f64,
}

const DEFAULT_SEED: u64 = 7;

/// Parses `args`, runs the command and maps errors to exit codes.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: &Cli) -> Result<()> {
    if cli.jobs == 0 {
        return Err(CliError::usage("--jobs must be at least 1"));
    }
    if cli.config.is_some() && !matches!(cli.command, Command::Bench { .. }) {
        return Err(CliError::usage("--config applies to bench only"));
    }
    let seed = cli.seed.unwrap_or(DEFAULT_SEED);
    let out = cli.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    match &cli.command {
        Command::Demo(DemoCmd::Synth { world, kind, count, start }) => {
            let w = load_world(world)?;
            let kind = ScriptKind::parse(kind).ok_or_else(|| CliError::usage(format!("unknown script {kind}")))?;
            let mut script = DemoScript::default_for(&w, kind);
            if let Some(s) = start {
                if s.len() != w.dim() {
                    return Err(CliError::usage(format!("--start needs {} values", w.dim())));
                }
                script = script.with_start(DVector::from_column_slice(s));
            }
            let demos = (0..*count)
                .map(|i| synthesize_with(&w, &script, derive_seed(seed, 1, i as u64)))
                .collect::<std::result::Result<Vec<_>, _>>()?;
            write_demo_set(&out, world, &demos)?;
            write_manifest(&out, "demo synth", seed, &format!("{world} {} {count} {start:?}", kind.name()))
        }
        Command::Demo(DemoCmd::Validate { dir, world }) => {
            let set = read_demo_set(dir)?;
            let w = load_world(world.as_deref().unwrap_or(&set.world))?;
            let goal = GoalRegion { center: w.hole_center, radius: w.clearance() + w.chamfer_width };
            let mut rejected = 0;
            for d in &set.demos {
                match accept_demo(d, &goal, 0.01, &PathMetric::default()) {
                    Acceptance::Accept => println!("{}: accepted", d.id()),
                    Acceptance::Reject(why) => {
                        rejected += 1;
                        println!("{}: rejected ({why})", d.id());
                    }
                }
            }
            if rejected > 0 {
                return Err(CliError::data(format!("{rejected} of {} demonstrations rejected", set.demos.len())));
            }
            Ok(())
        }
        Command::Fit(cmd) => {
            let (name, dirs) = match cmd {
                FitCmd::Explore { demos } => ("explore", demos),
                FitCmd::Dynamics { demos } => ("dynamics", demos),
            };
            let mut demos = Vec::new();
            let mut world = None;
            for d in dirs {
                let set = read_demo_set(d)?;
                if world.as_ref().is_some_and(|w| *w != set.world) {
                    return Err(CliError::data("demo sets come from different worlds"));
                }
                world = Some(set.world.clone());
                demos.extend(set.demos);
            }
            let w = load_world(world.as_deref().unwrap_or("peg2d"))?;
            let prep = prepare(&w, &demos)?;
            let (file, text) = match cmd {
                FitCmd::Explore { .. } => ("explore.txt", format_gaussian(&prep.explore)),
                FitCmd::Dynamics { .. } => ("dynamics.txt", format_dynamics(&prep.dynamics)),
            };
            write_file(&out.join(file), &text)?;
            write_manifest(&out, &format!("fit {name}"), seed, &format!("{dirs:?}"))
        }
        Command::Plan(cmd) => plan(cmd, seed, &out),
        Command::Rollout(a) => run_rollout(a, seed, &out),
        Command::Bench { experiment, trials, samples } => {
            let kind = experiment.kind();
            let mut cfg = match &cli.config {
                Some(p) => ExperimentConfig::load(p, Some(kind))?,
                None => ExperimentConfig::defaults(kind),
            };
            if let Some(s) = cli.seed {
                cfg.seed = s;
            }
            if let Some(t) = trials {
                cfg.n_trials = *t;
            }
            if let Some(s) = samples {
                cfg.n_samples = s.clone();
            }
            if let Some(o) = &cli.out {
                cfg.output_dir = o.clone();
            }
            cfg.validate()?;
            let opts = RunOptions { jobs: cli.jobs, timing: cli.timing };
            let res = bench::run_to_dir(&cfg, &opts, &cfg.output_dir)?;
            print!("{}", res.results_csv()?);
            Ok(())
        }
        Command::Report { dir } => {
            print!("{}", report::write_report(dir)?);
            Ok(())
        }
    }
}

fn plan(cmd: &PlanCmd, seed: u64, out: &Path) -> Result<()> {
    let common = match cmd {
        PlanCmd::Tshix { common, .. } | PlanCmd::Ergodic { common, .. } | PlanCmd::Randomwalk { common, .. } => common,
    };
    let explore = parse_gaussian(&read_file(&common.model)?)?;
    let dynamics = common.dynamics.as_ref().map(|p| read_file(p).and_then(|t| parse_dynamics(&t))).transpose()?;
    if let Some(m) = &dynamics {
        if m.dim() != explore.dim() {
            return Err(CliError::data("dynamics and exploration models differ in dimension"));
        }
    }
    let (name, raw, detail) = match cmd {
        PlanCmd::Tshix { samples, .. } => {
            let ga = GaParams::for_points(*samples, derive_seed(seed, 4, 0));
            ("tshix", generate_tshix(&explore, *samples, &ga, &SgParams::default(), seed)?, format!("samples={samples}"))
        }
        PlanCmd::Ergodic { points, length, iters, .. } => {
            if explore.dim() == 3 {
                eprintln!("warning: 3-D ergodic trajectories are not part of the benchmark comparison");
            }
            let v_max = 0.02;
            let opt = OptimParams {
                max_iters: *iters,
                v_max,
                dt: length / (*points as f64 * v_max),
                seed,
                ..OptimParams::default()
            };
            let plan = generate_ergodic(&explore, *points, &opt)?;
            eprintln!("ergodic cost {} -> {} ({:?})", plan.initial_cost, plan.final_cost, plan.status);
            ("ergodic", plan.trajectory, format!("points={points} length={length} iters={iters}"))
        }
        PlanCmd::Randomwalk { steps, scale, .. } => {
            ("randomwalk", random_walk_trajectory(&explore, *steps, *scale, seed)?, format!("steps={steps} scale={scale}"))
        }
    };
    let traj = finish(&raw, dynamics.as_ref(), common.step)?;
    write_file(&out.join("trajectory.csv"), &format_trajectory(&traj)?)?;
    write_manifest(out, &format!("plan {name}"), seed, &format!("{} {detail} step={}", common.model.display(), common.step))
}

fn finish(raw: &Trajectory, dynamics: Option<&DynamicsModel>, step: f64) -> Result<Trajectory> {
    let timed = raw.resample_arc_length(step, &PathMetric::default())?;
    Ok(match dynamics {
        Some(m) => annotate_trajectory(m, &timed)?,
        None => timed,
    })
}

fn run_rollout(a: &RolloutArgs, seed: u64, out: &Path) -> Result<()> {
    let w = load_world(&a.world)?;
    let traj = parse_trajectory(&read_file(&a.trajectory)?)?;
    if traj.dim() != w.dim() || a.start.len() != w.dim() {
        return Err(CliError::data(format!("world {} needs {}-dimensional trajectory and start", a.world, w.dim())));
    }
    let gains = ImpedanceGains::anisotropic(a.kp_along, a.kp_across, a.k_theta);
    let cfg = RolloutConfig { use_feedforward: !a.no_ff, ..RolloutConfig::default() };
    let r = rollout(&w, &traj, &gains, &cfg, &DVector::from_column_slice(&a.start), seed)?;
    let text = format_table(
        &["success", "time_to_success", "max_contact_force", "mean_lateral_error"],
        [vec![
            (r.success as u8).to_string(),
            r.time_to_success.map(|t| t.to_string()).unwrap_or_default(),
            r.max_contact_force.to_string(),
            r.mean_lateral_error.to_string(),
        ]],
    )?;
    write_file(&out.join("rollout.csv"), &text)?;
    print!("{text}");
    write_manifest(out, "rollout", seed, &format!("{a:?}"))
}

fn write_manifest(dir: &Path, command: &str, seed: u64, settings: &str) -> Result<()> {
    let hash: String = Sha256::digest(settings.as_bytes()).iter().map(|b| format!("{b:02x}")).collect();
    let text = format!(
        "command = {command}\nseed = {seed}\nconfig_hash = {hash}\nversion = {}\n",
        env!("CARGO_PKG_VERSION")
    );
    write_file(&dir.join("manifest.txt"), &text)
}
