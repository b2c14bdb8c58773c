//! Experiment harness: the four benchmark experiments, each a pure function
//! of its configuration and seed.

use std::path::Path;
use std::time::Instant;

use hisearch_core::controller::{rollout, ImpedanceGains, RolloutConfig, TrialResult};
use hisearch_core::demo::{accept_demo, build_training_set, Acceptance, Demonstration, GoalRegion, DEMO_DT};
use hisearch_core::dynamics::{annotate_trajectory, fit_dynamics, DynamicsModel};
use hisearch_core::ergodic::{generate_ergodic, ErgodicPlan, OptimParams};
use hisearch_core::gaussian::Gaussian;
use hisearch_core::math::PathMetric;
use hisearch_core::rng::{derive_seed, seeded, uniform01, uniform_range};
use hisearch_core::synth::{synthesize_with, DemoScript, ScriptKind};
use hisearch_core::trajectory::Trajectory;
use hisearch_core::tshix::{coverage_metric, generate_tshix, random_walk_trajectory, GaParams, SgParams};
use hisearch_core::world::SimWorld;
use hisearch_core::DVector;
use rayon::prelude::*;

use crate::config::{ExperimentConfig, ExperimentKind};
use crate::error::{CliError, Result};
use crate::io::{format_table, format_trials, read_demo_set, write_file, TrialRecord};

const STREAM_DEMO: u64 = 1;
const STREAM_START: u64 = 2;
const STREAM_PLAN: u64 = 3;
const STREAM_GA: u64 = 4;
const STREAM_ERGODIC: u64 = 5;
const STREAM_WALK: u64 = 6;

/// Coverage probability mass used for the diagnostic coverage column.
const COVERAGE_MASS: f64 = 0.9;
/// Minimum path length for a demonstration to be accepted, m.
const MIN_DEMO_LENGTH: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    pub jobs: usize,
    /// Record generation CPU time; off by default since timings are not
    /// reproducible.
    pub timing: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { jobs: 1, timing: false }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResultRow {
    pub label: String,
    pub successes: usize,
    pub trials: usize,
}

impl ResultRow {
    pub fn new(label: impl Into<String>, successes: usize, trials: usize) -> Self {
        Self { label: label.into(), successes, trials }
    }

    /// `100 * successes / trials` rounded to the nearest integer.
    pub fn percent(&self) -> u32 {
        (100.0 * self.successes as f64 / self.trials.max(1) as f64).round() as u32
    }

    pub fn rate(&self) -> f64 {
        self.successes as f64 / self.trials.max(1) as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub rows: Vec<ResultRow>,
    pub trials: Vec<TrialRecord>,
    /// Additional output files as (name, contents).
    pub files: Vec<(String, String)>,
    /// Additional manifest entries.
    pub manifest: Vec<(String, String)>,
}

impl ExperimentOutput {
    pub fn row(&self, label: &str) -> Option<&ResultRow> {
        self.rows.iter().find(|r| r.label == label)
    }

    pub fn results_csv(&self) -> Result<String> {
        format_table(
            &["condition", "successes", "trials", "percent"],
            self.rows.iter().map(|r| {
                vec![r.label.clone(), r.successes.to_string(), r.trials.to_string(), r.percent().to_string()]
            }),
        )
    }

    pub fn file(&self, name: &str) -> Option<&str> {
        self.files.iter().find(|(n, _)| n == name).map(|(_, c)| c.as_str())
    }
}

/// Exploration distribution and dynamics fitted from one demo set.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub explore: Gaussian,
    pub dynamics: DynamicsModel,
    /// Raw start poses of the accepted demonstrations.
    pub demo_starts: Vec<DVector<f64>>,
}

/// Acceptance filtering, resampling, alignment and both fits.
pub fn prepare(world: &SimWorld, demos: &[Demonstration]) -> Result<Prepared> {
    let goal = GoalRegion { center: world.hole_center, radius: world.clearance() + world.chamfer_width };
    let metric = PathMetric::default();
    let mut aligned = Vec::new();
    let mut starts = Vec::new();
    for d in demos {
        if let Acceptance::Reject(why) = accept_demo(d, &goal, MIN_DEMO_LENGTH, &metric) {
            eprintln!("demo {} rejected: {why}", d.id());
            continue;
        }
        starts.push(d.samples()[0].pose.clone());
        aligned.push(d.resample(DEMO_DT)?.align_to_search_frame()?);
    }
    if aligned.is_empty() {
        return Err(CliError::data("no demonstration passed acceptance"));
    }
    let ts = build_training_set(&aligned)?;
    let explore = Gaussian::fit_mle(&ts.state_rows())?;
    let dynamics = fit_dynamics(&ts)?;
    Ok(Prepared { explore, dynamics, demo_starts: starts })
}

fn load_demo_sets(cfg: &ExperimentConfig, synth: impl FnOnce() -> Result<Vec<Vec<Demonstration>>>) -> Result<Vec<Vec<Demonstration>>> {
    if cfg.demos.len() == 1 && cfg.demos[0] == "synth" {
        return synth();
    }
    cfg.demos
        .iter()
        .map(|dir| {
            let set = read_demo_set(Path::new(dir))?;
            if set.dim != cfg.world.dim() {
                return Err(CliError::data(format!("demo set {dir} has dim {}, world needs {}", set.dim, cfg.world.dim())));
            }
            Ok(set.demos)
        })
        .collect()
}

/// Default script of `kind` with the config's overrides applied.
pub fn demo_script(cfg: &ExperimentConfig, kind: ScriptKind) -> DemoScript {
    let mut s = DemoScript::default_for(&cfg.world, kind);
    let d = &cfg.demo;
    s.half_width = d.half_width.unwrap_or(s.half_width);
    s.spacing = d.spacing.unwrap_or(s.spacing);
    s.yaw_amplitude = d.yaw_amplitude.unwrap_or(s.yaw_amplitude);
    s
}

fn planar_sweep_demos(cfg: &ExperimentConfig) -> Result<Vec<Vec<Demonstration>>> {
    let script = demo_script(cfg, ScriptKind::Sweep);
    Ok(vec![vec![synthesize_with(&cfg.world, &script, derive_seed(cfg.seed, STREAM_DEMO, 0))?]])
}

/// Mirrored two-phase plug demonstrations from the upper-left and
/// upper-right of the socket.
pub fn mirrored_plug_demos(cfg: &ExperimentConfig) -> Result<[Demonstration; 2]> {
    let world = &cfg.world;
    let seed = cfg.seed;
    let [hx, hy] = world.hole_center;
    let base = demo_script(cfg, ScriptKind::TwoPhase);
    let left = base.clone().with_start(DVector::from_column_slice(&[hx - 0.02, hy + 0.015, world.hole_yaw - 0.25]));
    let right = base.with_start(DVector::from_column_slice(&[hx + 0.02, hy + 0.015, world.hole_yaw + 0.25]));
    Ok([
        synthesize_with(world, &left, derive_seed(seed, STREAM_DEMO, 0))?,
        synthesize_with(world, &right, derive_seed(seed, STREAM_DEMO, 1))?,
    ])
}

fn rollout_config(cfg: &ExperimentConfig, use_feedforward: bool) -> RolloutConfig {
    let c = &cfg.controller;
    RolloutConfig {
        use_feedforward,
        stiction_band: c.stiction_band,
        settle: c.settle,
        speed: c.speed,
        depth_threshold: c.depth_threshold,
        ..RolloutConfig::default()
    }
}

fn gains(cfg: &ExperimentConfig) -> ImpedanceGains {
    let c = &cfg.controller;
    ImpedanceGains::anisotropic(c.kp_along, c.kp_across, c.k_theta)
}

fn sg(cfg: &ExperimentConfig) -> SgParams {
    SgParams { window: cfg.planner.sg_window, order: cfg.planner.sg_order }
}

fn ga(cfg: &ExperimentConfig, n: usize, seed: u64) -> GaParams {
    GaParams { population: cfg.planner.ga_population, ..GaParams::for_points(n, seed) }
}

/// Re-times `traj` at the controller step and attaches feed-forward.
fn finish_plan(cfg: &ExperimentConfig, model: &DynamicsModel, traj: &Trajectory) -> Result<Trajectory> {
    let rc = rollout_config(cfg, true);
    let timed = traj.clone().without_ff().resample_arc_length(rc.step_length(), &rc.metric)?;
    Ok(annotate_trajectory(model, &timed)?)
}

fn tshix_plan(cfg: &ExperimentConfig, prep: &Prepared, n: usize, seed: u64) -> Result<Trajectory> {
    let raw = generate_tshix(&prep.explore, n, &ga(cfg, n, derive_seed(seed, STREAM_GA, 0)), &sg(cfg), seed)?;
    finish_plan(cfg, &prep.dynamics, &raw)
}

fn execute(cfg: &ExperimentConfig, traj: &Trajectory, start: &DVector<f64>, ff: bool, seed: u64) -> Result<TrialResult> {
    Ok(rollout(&cfg.world, traj, &gains(cfg), &rollout_config(cfg, ff), start, seed)?)
}

fn record(id: String, r: &TrialResult, seed: u64) -> TrialRecord {
    TrialRecord {
        trial_id: id,
        success: r.success,
        time_to_success: r.time_to_success,
        max_contact_force: r.max_contact_force,
        seed,
    }
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| CliError::usage(format!("cannot start {jobs} workers: {e}")))
}

/// Runs `f` for every index on the worker pool and returns results in
/// index order.
fn fan_out<T: Send>(opts: &RunOptions, n: usize, f: impl Fn(usize) -> Result<T> + Sync) -> Result<Vec<T>> {
    pool(opts.jobs)?.install(|| (0..n).into_par_iter().map(&f).collect())
}

fn disc_point(center: [f64; 2], diameter: f64, seed: u64) -> DVector<f64> {
    let mut rng = seeded(seed);
    let r = 0.5 * diameter * uniform01(&mut rng).sqrt();
    let th = uniform_range(&mut rng, 0.0, 2.0 * std::f64::consts::PI);
    DVector::from_column_slice(&[center[0] + r * th.cos(), center[1] + r * th.sin()])
}

fn fmt_pose(p: &DVector<f64>) -> Vec<String> {
    p.iter().map(|x| x.to_string()).collect()
}

fn starts_csv(starts: &[DVector<f64>]) -> Result<String> {
    let header: &[&str] = if starts.first().is_some_and(|s| s.len() == 3) { &["trial", "x", "y", "yaw"] } else { &["trial", "x", "y"] };
    format_table(
        header,
        starts.iter().enumerate().map(|(i, s)| std::iter::once(i.to_string()).chain(fmt_pose(s)).collect()),
    )
}

/// Center of the e1 start disc: configured, or halfway between the first
/// demonstration's start and the hole.
fn e1_disc_center(cfg: &ExperimentConfig, prep: &Prepared) -> [f64; 2] {
    cfg.start.center.unwrap_or_else(|| {
        let s = &prep.demo_starts[0];
        [0.5 * (s[0] + cfg.world.hole_center[0]), 0.5 * (s[1] + cfg.world.hole_center[1])]
    })
}

fn e1_starts(cfg: &ExperimentConfig, prep: &Prepared, n: usize) -> Vec<DVector<f64>> {
    let c = e1_disc_center(cfg, prep);
    (0..n).map(|i| disc_point(c, cfg.start.diameter, derive_seed(cfg.seed, STREAM_START, i as u64))).collect()
}

fn plan_seed(cfg: &ExperimentConfig, i: usize) -> u64 {
    derive_seed(cfg.seed, STREAM_PLAN, i as u64)
}

/// Fresh TSHIX per trial against one deterministic ergodic trajectory of
/// matched length, both from the same random start.
pub fn run_e1(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<ExperimentOutput> {
    let sets = load_demo_sets(cfg, || planar_sweep_demos(cfg))?;
    let prep = prepare(&cfg.world, &sets.concat())?;
    let n = cfg.n_samples[0];
    let starts = e1_starts(cfg, &prep, cfg.n_trials);
    let metric = PathMetric::default();

    let plans = fan_out(opts, cfg.n_trials, |i| tshix_plan(cfg, &prep, n, plan_seed(cfg, i)))?;
    let mean_len = plans.iter().map(|t| t.length(&metric)).sum::<f64>() / plans.len() as f64;
    let erg = ergodic_plan(cfg, &prep, mean_len)?;
    let erg_traj = finish_plan(cfg, &prep.dynamics, &erg.trajectory)?;

    let outcomes = fan_out(opts, cfg.n_trials, |i| {
        let t = execute(cfg, &plans[i], &starts[i], true, plan_seed(cfg, i))?;
        let e = execute(cfg, &erg_traj, &starts[i], true, cfg.seed)?;
        Ok((t, e))
    })?;

    let mut trials = Vec::new();
    for (i, (t, _)) in outcomes.iter().enumerate() {
        trials.push(record(format!("tshix-{i:03}"), t, plan_seed(cfg, i)));
    }
    for (i, (_, e)) in outcomes.iter().enumerate() {
        trials.push(record(format!("ergodic-{i:03}"), e, cfg.seed));
    }
    let ts = outcomes.iter().filter(|(t, _)| t.success).count();
    let es = outcomes.iter().filter(|(_, e)| e.success).count();
    let paired = format_table(
        &["trial", "x", "y", "tshix", "ergodic"],
        outcomes.iter().enumerate().map(|(i, (t, e))| {
            let mut r = vec![i.to_string()];
            r.extend(fmt_pose(&starts[i]));
            r.push((t.success as u8).to_string());
            r.push((e.success as u8).to_string());
            r
        }),
    )?;
    let c = e1_disc_center(cfg, &prep);
    Ok(ExperimentOutput {
        rows: vec![ResultRow::new("Ergodic", es, cfg.n_trials), ResultRow::new("TSHIX", ts, cfg.n_trials)],
        trials,
        files: vec![("starts.csv".into(), starts_csv(&starts)?), ("paired.csv".into(), paired)],
        manifest: vec![
            ("start_disc_center".into(), format!("{}, {}", c[0], c[1])),
            ("tshix_mean_length".into(), mean_len.to_string()),
            ("ergodic_length".into(), erg_traj.length(&metric).to_string()),
            ("ergodic_initial_cost".into(), erg.initial_cost.to_string()),
            ("ergodic_final_cost".into(), erg.final_cost.to_string()),
        ],
    })
}

/// Ergodic trajectory whose length budget equals `length`.
pub fn ergodic_plan(cfg: &ExperimentConfig, prep: &Prepared, length: f64) -> Result<ErgodicPlan> {
    let points = cfg.planner.ergodic_points.max(10);
    let v_max = cfg.controller.speed;
    let opt = OptimParams {
        max_iters: cfg.planner.ergodic_iters,
        v_max,
        dt: length / (points as f64 * v_max),
        k_per_axis: cfg.planner.ergodic_k,
        seed: derive_seed(cfg.seed, STREAM_ERGODIC, 0),
        ..OptimParams::default()
    };
    Ok(generate_ergodic(&prep.explore, points, &opt)?)
}

/// Start used by the fixed-start experiments: configured, or the centroid
/// of the e1 starts at which TSHIX succeeded.
pub fn fixed_start(cfg: &ExperimentConfig, prep: &Prepared, opts: &RunOptions) -> Result<DVector<f64>> {
    if let Some(p) = cfg.start.fixed {
        return Ok(DVector::from_column_slice(&p));
    }
    let e1 = ExperimentConfig::defaults(ExperimentKind::E1);
    let n = e1.n_samples[0];
    let starts = e1_starts(cfg, prep, e1.n_trials);
    let ok = fan_out(opts, e1.n_trials, |i| {
        let plan = tshix_plan(cfg, prep, n, plan_seed(cfg, i))?;
        Ok(execute(cfg, &plan, &starts[i], true, plan_seed(cfg, i))?.success)
    })?;
    let hits: Vec<&DVector<f64>> = starts.iter().zip(&ok).filter(|(_, s)| **s).map(|(p, _)| p).collect();
    if hits.is_empty() {
        let c = e1_disc_center(cfg, prep);
        return Ok(DVector::from_column_slice(&c));
    }
    Ok(hits.iter().fold(DVector::zeros(2), |acc, p| acc + *p) / hits.len() as f64)
}

/// Success rate over seeded TSHIX trajectories per sample size from one
/// fixed start. The same plan seeds are reused at every size.
pub fn run_e2(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<ExperimentOutput> {
    let sets = load_demo_sets(cfg, || planar_sweep_demos(cfg))?;
    let prep = prepare(&cfg.world, &sets.concat())?;
    let start = fixed_start(cfg, &prep, opts)?;
    let r_cover = cfg.world.clearance();
    let metric = PathMetric::default();

    let mut rows = Vec::new();
    let mut trials = Vec::new();
    let mut size_rows = Vec::new();
    for &n in &cfg.n_samples {
        let runs = fan_out(opts, cfg.n_trials, |j| {
            let seed = plan_seed(cfg, j);
            let t0 = Instant::now();
            let raw = generate_tshix(&prep.explore, n, &ga(cfg, n, derive_seed(seed, STREAM_GA, 0)), &sg(cfg), seed)?;
            let cpu = t0.elapsed().as_secs_f64() * 1e3;
            let cov = coverage_metric(&raw, &prep.explore, COVERAGE_MASS, r_cover, &metric);
            let plan = finish_plan(cfg, &prep.dynamics, &raw)?;
            let r = execute(cfg, &plan, &start, true, seed)?;
            Ok((r, cov, cpu))
        })?;
        let succ = runs.iter().filter(|(r, _, _)| r.success).count();
        for (j, (r, _, _)) in runs.iter().enumerate() {
            trials.push(record(format!("n{n}-{j:03}"), r, plan_seed(cfg, j)));
        }
        let row = ResultRow::new(format!("n{n}"), succ, cfg.n_trials);
        let mean_cov = runs.iter().map(|(_, c, _)| c).sum::<f64>() / runs.len() as f64;
        let cpu = if opts.timing {
            (runs.iter().map(|(_, _, t)| t).sum::<f64>() / runs.len() as f64).to_string()
        } else {
            String::new()
        };
        size_rows.push(vec![
            n.to_string(),
            succ.to_string(),
            cfg.n_trials.to_string(),
            row.percent().to_string(),
            mean_cov.to_string(),
            cpu,
        ]);
        rows.push(row);
    }
    Ok(ExperimentOutput {
        rows,
        trials,
        files: vec![
            (
                "sizes.csv".into(),
                format_table(&["size", "successes", "trials", "percent", "mean_coverage", "cpu_ms"], size_rows)?,
            ),
            ("starts.csv".into(), starts_csv(std::slice::from_ref(&start))?),
        ],
        manifest: vec![("fixed_start".into(), format!("{}, {}", start[0], start[1]))],
    })
}

/// Paired feed-forward on/off rollouts of the same trajectories.
pub fn run_e3(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<ExperimentOutput> {
    let sets = load_demo_sets(cfg, || planar_sweep_demos(cfg))?;
    let prep = prepare(&cfg.world, &sets.concat())?;
    let start = fixed_start(cfg, &prep, opts)?;

    let mut rows = Vec::new();
    let mut trials = Vec::new();
    let mut tracking = Vec::new();
    for &n in &cfg.n_samples {
        let runs = fan_out(opts, cfg.n_trials, |j| {
            let seed = plan_seed(cfg, j);
            let plan = tshix_plan(cfg, &prep, n, seed)?;
            Ok((execute(cfg, &plan, &start, true, seed)?, execute(cfg, &plan, &start, false, seed)?))
        })?;
        for (flag, pick) in [("ff-on", 0usize), ("ff-off", 1)] {
            let get = |p: &(TrialResult, TrialResult)| if pick == 0 { p.0.clone() } else { p.1.clone() };
            let res: Vec<TrialResult> = runs.iter().map(get).collect();
            let succ = res.iter().filter(|r| r.success).count();
            for (j, r) in res.iter().enumerate() {
                trials.push(record(format!("n{n}-{flag}-{j:03}"), r, plan_seed(cfg, j)));
            }
            let err = res.iter().map(|r| r.mean_lateral_error).sum::<f64>() / res.len() as f64;
            let row = ResultRow::new(format!("n{n} {flag}"), succ, cfg.n_trials);
            tracking.push(vec![
                n.to_string(),
                flag.to_string(),
                succ.to_string(),
                cfg.n_trials.to_string(),
                row.percent().to_string(),
                err.to_string(),
            ]);
            rows.push(row);
        }
    }
    Ok(ExperimentOutput {
        rows,
        trials,
        files: vec![
            (
                "tracking.csv".into(),
                format_table(&["size", "feedforward", "successes", "trials", "percent", "mean_lateral_error"], tracking)?,
            ),
            ("starts.csv".into(), starts_csv(std::slice::from_ref(&start))?),
        ],
        manifest: vec![("fixed_start".into(), format!("{}, {}", start[0], start[1]))],
    })
}

fn half_annulus_start(cfg: &ExperimentConfig, seed: u64) -> DVector<f64> {
    let s = &cfg.start;
    let w = &cfg.world;
    let mut rng = seeded(seed);
    let r2 = uniform_range(&mut rng, s.inner_radius * s.inner_radius, s.outer_radius * s.outer_radius);
    let th = uniform_range(&mut rng, 0.0, std::f64::consts::PI);
    let yaw = w.hole_yaw + uniform_range(&mut rng, -s.yaw_range, s.yaw_range);
    let r = r2.sqrt();
    DVector::from_column_slice(&[w.hole_center[0] + r * th.cos(), w.hole_center[1] + r * th.sin(), yaw])
}

/// Cuts `traj` after arc length `length`.
fn truncate(traj: &Trajectory, length: f64, step: f64, metric: &PathMetric) -> Result<Trajectory> {
    let r = traj.resample_arc_length(step, metric)?;
    let keep = ((length / step).floor() as usize + 1).clamp(2, r.len());
    Ok(Trajectory::new(r.waypoints()[..keep].to_vec())?)
}

/// Random walk, one-demo TSHIX and two-demo TSHIX on the plug world from
/// shared starts in the upper half of the socket face.
pub fn run_e4(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<ExperimentOutput> {
    let sets = load_demo_sets(cfg, || {
        let [a, b] = mirrored_plug_demos(cfg)?;
        Ok(vec![vec![a], vec![b]])
    })?;
    if sets.len() < 2 {
        return Err(CliError::usage("e4 needs two demo sets"));
    }
    let one = prepare(&cfg.world, &sets[0])?;
    let two = prepare(&cfg.world, &sets.concat())?;
    let n = cfg.n_samples[0];
    let metric = PathMetric::default();
    let step = rollout_config(cfg, true).step_length();
    let starts: Vec<DVector<f64>> =
        (0..cfg.n_trials).map(|i| half_annulus_start(cfg, derive_seed(cfg.seed, STREAM_START, i as u64))).collect();

    let runs = fan_out(opts, cfg.n_trials, |i| {
        let seed = plan_seed(cfg, i);
        let p2 = tshix_plan(cfg, &two, n, seed)?;
        let p1 = tshix_plan(cfg, &one, n, seed)?;
        let len = p2.length(&metric);
        let sd = two.explore.std_devs();
        let scale = cfg.planner.walk_step_scale;
        let typical = scale * (sd[0] * sd[0] + sd[1] * sd[1] + (metric.yaw_weight * sd[2]).powi(2)).sqrt();
        let steps = if typical > 0.0 { ((2.0 * len / typical).ceil() as usize).clamp(1, 200_000) } else { 1 };
        let walk = random_walk_trajectory(&two.explore, steps, scale, derive_seed(seed, STREAM_WALK, 0))?;
        let walk = if typical > 0.0 { truncate(&walk, len, step, &metric)? } else { walk };
        let pw = finish_plan(cfg, &two.dynamics, &walk)?;
        Ok([
            execute(cfg, &pw, &starts[i], true, seed)?,
            execute(cfg, &p1, &starts[i], true, seed)?,
            execute(cfg, &p2, &starts[i], true, seed)?,
        ])
    })?;

    let labels = [("RandomWalk", "walk"), ("TSHIX-1demo", "demo1"), ("TSHIX-2demo", "demo2")];
    let mut rows = Vec::new();
    let mut trials = Vec::new();
    for (k, (label, tag)) in labels.iter().enumerate() {
        let succ = runs.iter().filter(|r| r[k].success).count();
        for (i, r) in runs.iter().enumerate() {
            trials.push(record(format!("{tag}-{i:03}"), &r[k], plan_seed(cfg, i)));
        }
        rows.push(ResultRow::new(*label, succ, cfg.n_trials));
    }
    let det = |g: &Gaussian| g.cov().determinant();
    Ok(ExperimentOutput {
        rows,
        trials,
        files: vec![("starts.csv".into(), starts_csv(&starts)?)],
        manifest: vec![
            ("explore_det_1demo".into(), det(&one.explore).to_string()),
            ("explore_det_2demo".into(), det(&two.explore).to_string()),
        ],
    })
}

pub fn run(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<ExperimentOutput> {
    match cfg.experiment {
        ExperimentKind::E1 => run_e1(cfg, opts),
        ExperimentKind::E2 => run_e2(cfg, opts),
        ExperimentKind::E3 => run_e3(cfg, opts),
        ExperimentKind::E4 => run_e4(cfg, opts),
    }
}

/// Manifest text: config hash, seed and versions plus experiment extras.
pub fn manifest(cfg: &ExperimentConfig, out: &ExperimentOutput, wall_ms: Option<f64>) -> String {
    let mut s = format!(
        "experiment = {}\nseed = {}\nconfig_hash = {}\nversion = {}\nworld = {}\nn_trials = {}\n",
        cfg.experiment.name(),
        cfg.seed,
        cfg.hash(),
        env!("CARGO_PKG_VERSION"),
        cfg.world_ref,
        cfg.n_trials,
    );
    for (k, v) in &out.manifest {
        s.push_str(&format!("{k} = {v}\n"));
    }
    if let Some(ms) = wall_ms {
        s.push_str(&format!("wall_ms = {ms}\n"));
    }
    s
}

/// Runs the experiment and writes `results.csv`, `trials.csv`, any extra
/// files and `manifest` into `dir`.
pub fn run_to_dir(cfg: &ExperimentConfig, opts: &RunOptions, dir: &Path) -> Result<ExperimentOutput> {
    let t0 = Instant::now();
    let out = run(cfg, opts)?;
    let wall = opts.timing.then(|| t0.elapsed().as_secs_f64() * 1e3);
    write_file(&dir.join("results.csv"), &out.results_csv()?)?;
    write_file(&dir.join("trials.csv"), &format_trials(&out.trials)?)?;
    for (name, contents) in &out.files {
        write_file(&dir.join(name), contents)?;
    }
    write_file(&dir.join("manifest.txt"), &manifest(cfg, &out, wall))?;
    Ok(out)
}
