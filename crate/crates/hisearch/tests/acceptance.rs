//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use hisearch::bench::{ergodic_plan, prepare};
use hisearch::config::{ExperimentConfig, ExperimentKind};
use hisearch::io::parse_table;
use hisearch_core::ergodic::{
    cost_from_coefficients, distribution_coefficients, ergodic_cost, generate_ergodic, trajectory_coefficients, ErgodicWeights,
    OptimParams, SpectralBasis,
};
use hisearch_core::gaussian::{BlockPartition, Gaussian};
use hisearch_core::rng::{seeded, uniform_range, SearchRng};
use hisearch_core::synth::{synthesize_with, ScriptKind};
use hisearch_core::tshix::{smooth_series, solve_open_tsp_traced, GaParams, SgParams};
use hisearch_core::ziggurat::standard_normal;
use hisearch_core::{DMatrix, DVector};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn normal_vec(rng: &mut SearchRng, n: usize, scale: f64) -> DVector<f64> {
    DVector::from_fn(n, |_, _| scale * standard_normal(rng))
}

/// Moments of the density proportional to the joint Gaussian with `s`
/// pinned, by summing over a uniform grid on the free coordinates.
fn grid_conditional(mu: &DVector<f64>, prec: &DMatrix<f64>, a: &[usize], s: &[usize], s_star: &DVector<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let d = mu.len();
    let da = a.len();
    let half = 14.0;
    let h = 0.04;
    let n = (2.0 * half / h) as usize + 1;
    let mut x = DVector::zeros(d);
    for (j, &i) in s.iter().enumerate() {
        x[i] = s_star[j];
    }
    let mut w_sum = 0.0;
    let mut m1 = DVector::zeros(da);
    let mut m2 = DMatrix::zeros(da, da);
    let mut idx = vec![0usize; da];
    loop {
        let mut pt = DVector::zeros(da);
        for (j, &i) in a.iter().enumerate() {
            pt[j] = mu[i] - half + h * idx[j] as f64;
            x[i] = pt[j];
        }
        let r = &x - mu;
        let w = (-0.5 * (r.transpose() * prec * &r)[(0, 0)]).exp();
        w_sum += w;
        m1 += &pt * w;
        m2 += &pt * pt.transpose() * w;
        let mut k = 0;
        loop {
            if k == da {
                let mean = m1 / w_sum;
                let cov = m2 / w_sum - &mean * mean.transpose();
                return (mean, cov);
            }
            idx[k] += 1;
            if idx[k] < n {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

fn criterion_1() -> Outcome {
    let t0 = Instant::now();
    let mut rng = seeded(101);
    let (mut worst_mean, mut worst_cov) = (0.0f64, 0.0f64);
    for case in 0..50 {
        let d = 2 + case % 5;
        let da = if d >= 3 && case % 2 == 1 { 2 } else { 1 };
        let mut perm: Vec<usize> = (0..d).collect();
        for i in (1..d).rev() {
            let j = (uniform_range(&mut rng, 0.0, (i + 1) as f64) as usize).min(i);
            perm.swap(i, j);
        }
        let a: Vec<usize> = perm[..da].to_vec();
        let s: Vec<usize> = perm[da..].to_vec();
        let f = DMatrix::from_fn(d, d, |_, _| standard_normal(&mut rng) / (d as f64).sqrt());
        let cov = &f * f.transpose() + DMatrix::identity(d, d) * 0.5;
        let mu = normal_vec(&mut rng, d, 1.0);
        let s_star = DVector::from_fn(s.len(), |j, _| mu[s[j]] + 0.7 * standard_normal(&mut rng));
        let g = Gaussian::new(mu.clone(), cov.clone()).unwrap();
        let got = g.condition(&BlockPartition::new(a.clone(), s.clone(), d).unwrap(), &s_star).unwrap();
        let prec = cov.try_inverse().unwrap();
        let (m, c) = grid_conditional(&mu, &prec, &a, &s, &s_star);
        worst_mean = worst_mean.max((got.mean() - m).amax());
        worst_cov = worst_cov.max((got.cov() - c).amax());
    }
    let secs = t0.elapsed().as_secs_f64();
    outcome(
        worst_mean <= 1e-3 && worst_cov <= 1e-2 && secs < 30.0,
        format!("50 joints, max mean err {worst_mean:.1e}, max cov err {worst_cov:.1e}, {secs:.1} s"),
    )
}

fn criterion_2() -> Outcome {
    let mut rng = seeded(202);
    let mut ok = 0;
    let mut worst = 0.0f64;
    for case in 0..20 {
        let dx = 1 + case % 3;
        let dy = 1 + case % 2;
        let n = 200;
        let b = DMatrix::from_fn(dy, dx, |_, _| standard_normal(&mut rng));
        let c = normal_vec(&mut rng, dy, 1.0);
        let noise = 0.1 + uniform_range(&mut rng, 0.0, 0.5);
        let xs: Vec<DVector<f64>> = (0..n).map(|_| normal_vec(&mut rng, dx, 1.0)).collect();
        let ys: Vec<DVector<f64>> = xs.iter().map(|x| &b * x + &c + normal_vec(&mut rng, dy, noise)).collect();

        let rows: Vec<DVector<f64>> = xs.iter().zip(&ys).map(|(x, y)| DVector::from_iterator(dy + dx, y.iter().chain(x.iter()).copied())).collect();
        let joint = Gaussian::fit_mle(&rows).unwrap();
        let part = BlockPartition::new((0..dy).collect(), (dy..dy + dx).collect(), dy + dx).unwrap();
        let x_star = normal_vec(&mut rng, dx, 1.0);
        let got = joint.condition(&part, &x_star).unwrap();

        // ordinary least squares with an intercept column
        let design = DMatrix::from_fn(n, dx + 1, |r, k| if k == 0 { 1.0 } else { xs[r][k - 1] });
        let xtx_inv = (design.transpose() * &design).try_inverse().unwrap();
        let xt = DVector::from_iterator(dx + 1, std::iter::once(1.0).chain(x_star.iter().copied()));
        let leverage = (xt.transpose() * &xtx_inv * &xt)[(0, 0)];
        let mut all = true;
        for j in 0..dy {
            let target = DVector::from_fn(n, |r, _| ys[r][j]);
            let beta = &xtx_inv * design.transpose() * &target;
            let resid = &target - &design * &beta;
            let sigma2 = resid.norm_squared() / (n - dx - 1) as f64;
            let se = (sigma2 * leverage).sqrt();
            let pred = xt.dot(&beta);
            let z = (got.mean()[j] - pred).abs() / se;
            worst = worst.max(z);
            all &= z <= 3.0;
        }
        ok += all as usize;
    }
    outcome(ok == 20, format!("{ok}/20 instances within 3 SE, largest deviation {worst:.1e} SE"))
}

fn exhaustive(points: &[DVector<f64>], start: &DVector<f64>) -> f64 {
    fn go(points: &[DVector<f64>], at: &DVector<f64>, used: &mut [bool], acc: f64, best: &mut f64) {
        if acc >= *best {
            return;
        }
        if used.iter().all(|&u| u) {
            *best = acc;
            return;
        }
        for i in 0..points.len() {
            if !used[i] {
                used[i] = true;
                go(points, &points[i], used, acc + (&points[i] - at).norm(), best);
                used[i] = false;
            }
        }
    }
    let mut best = f64::INFINITY;
    go(points, start, &mut vec![false; points.len()], 0.0, &mut best);
    best
}

fn criterion_3() -> Outcome {
    let mut rng = seeded(303);
    let (mut optimal, mut worst_ratio, mut monotone) = (0, 1.0f64, 0);
    let start = DVector::zeros(2);
    for case in 0..100u64 {
        let pts: Vec<DVector<f64>> =
            (0..7).map(|_| DVector::from_fn(2, |_, _| uniform_range(&mut rng, -1.0, 1.0))).collect();
        let sol = solve_open_tsp_traced(&pts, &start, &GaParams::for_points(7, case)).unwrap();
        let opt = exhaustive(&pts, &start);
        let ratio = sol.itinerary.total_length() / opt;
        worst_ratio = worst_ratio.max(ratio);
        optimal += (ratio <= 1.0 + 1e-9) as usize;
        let trace_ok = sol.best_per_generation.first().is_none_or(|&f| f <= sol.initial_best)
            && sol.best_per_generation.windows(2).all(|w| w[1] <= w[0]);
        monotone += trace_ok as usize;
    }
    outcome(
        optimal >= 90 && worst_ratio <= 1.2 && monotone == 100,
        format!("{optimal}/100 optimal, worst ratio {worst_ratio:.4}, monotone best-of-generation in {monotone}/100"),
    )
}

fn criterion_4() -> Outcome {
    let mut rng = seeded(404);
    let mut worst = 0.0f64;
    for (window, order) in [(5, 2), (9, 3), (11, 4)] {
        for degree in 0..=order {
            for _ in 0..5 {
                let coef: Vec<f64> = (0..=degree).map(|_| uniform_range(&mut rng, -1.0, 1.0)).collect();
                let xs: Vec<f64> = (0..60)
                    .map(|i| {
                        let t = -1.0 + 2.0 * i as f64 / 59.0;
                        coef.iter().rev().fold(0.0, |acc, c| acc * t + c)
                    })
                    .collect();
                let out = smooth_series(&xs, &SgParams { window, order }).unwrap();
                worst = worst.max(xs.iter().zip(&out).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
            }
        }
    }
    outcome(worst <= 1e-9, format!("largest deviation {worst:.1e} over (5,2), (9,3), (11,4)"))
}

fn benchmark_distribution() -> (ExperimentConfig, hisearch::bench::Prepared) {
    let cfg = ExperimentConfig::defaults(ExperimentKind::E1);
    let script = hisearch::bench::demo_script(&cfg, ScriptKind::Sweep);
    let demo = synthesize_with(&cfg.world, &script, hisearch_core::rng::derive_seed(cfg.seed, 1, 0)).unwrap();
    let prep = prepare(&cfg.world, &[demo]).unwrap();
    (cfg, prep)
}

fn criterion_5() -> Outcome {
    // odd-index zeros of a centered Gaussian
    let mut zero_err = 0.0f64;
    for d in [2usize, 3] {
        let lo = vec![-1.0; d];
        let hi = vec![1.0; d];
        let basis = SpectralBasis::new(lo, hi, if d == 2 { 10 } else { 6 }).unwrap();
        let diag = Gaussian::new(DVector::zeros(d), DMatrix::from_fn(d, d, |i, j| if i == j { 0.04 * (1.0 + i as f64) } else { 0.0 })).unwrap();
        let corr = Gaussian::new(DVector::zeros(d), DMatrix::from_fn(d, d, |i, j| if i == j { 0.05 } else { 0.02 })).unwrap();
        let phi_diag = distribution_coefficients(&basis, &diag).unwrap();
        let phi_corr = distribution_coefficients(&basis, &corr).unwrap();
        for n in 0..basis.len() {
            let k = basis.index(n);
            if k.iter().any(|&ki| ki % 2 == 1) {
                zero_err = zero_err.max(phi_diag[n].abs());
            }
            if k.iter().sum::<usize>() % 2 == 1 {
                zero_err = zero_err.max(phi_corr[n].abs());
            }
        }
    }

    let (cfg, prep) = benchmark_distribution();
    let g = &prep.explore;
    let basis = SpectralBasis::for_distribution(g, cfg.planner.ergodic_k).unwrap();
    let weights = ErgodicWeights::new(&basis);
    let phi = distribution_coefficients(&basis, g).unwrap();

    let mut cost_err = 0.0f64;
    let mut monotone = 0;
    let mut halved = 0;
    for run in 0..20u64 {
        let length = 0.4 + 0.03 * run as f64;
        let points = 600;
        let opt = OptimParams {
            max_iters: cfg.planner.ergodic_iters,
            v_max: cfg.controller.speed,
            dt: length / (points as f64 * cfg.controller.speed),
            k_per_axis: cfg.planner.ergodic_k,
            seed: run,
            ..OptimParams::default()
        };
        let plan = generate_ergodic(g, points, &opt).unwrap();
        let direct = ergodic_cost(&basis, &weights, &plan.trajectory, g).unwrap();
        let again = cost_from_coefficients(&weights, &trajectory_coefficients(&basis, &plan.trajectory), &phi);
        cost_err = cost_err.max((direct - again).abs()).max((direct - plan.final_cost).abs());
        monotone += plan.accepted_costs.windows(2).all(|w| w[1] <= w[0]) as usize;
        halved += (plan.final_cost <= 0.5 * plan.initial_cost) as usize;
    }
    let matched = ergodic_plan(&cfg, &prep, 0.7).unwrap();
    let pass = zero_err <= 1e-8 && cost_err <= 1e-12 && monotone == 20 && halved == 20;
    outcome(
        pass,
        format!(
            "odd-index max |phi| {zero_err:.1e}, cost recomputation err {cost_err:.1e}, monotone {monotone}/20, final <= half of seed {halved}/20 (e.g. {:.3} -> {:.4})",
            matched.initial_cost, matched.final_cost
        ),
    )
}

fn cli(args: &[&str]) -> (bool, f64) {
    let t0 = Instant::now();
    let st = Command::new(env!("CARGO_BIN_EXE_hisearch")).args(args).output().expect("run hisearch");
    if !st.status.success() {
        eprintln!("hisearch {args:?} failed: {}", String::from_utf8_lossy(&st.stderr));
    }
    (st.status.success(), t0.elapsed().as_secs_f64())
}

fn table(dir: &Path, name: &str) -> Vec<Vec<String>> {
    parse_table(&fs::read_to_string(dir.join(name)).unwrap()).unwrap().1
}

fn count(rows: &[Vec<String>], label: &str) -> usize {
    rows.iter().find(|r| r[0] == label).map(|r| r[1].parse().unwrap()).unwrap()
}

fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    v.sort();
    v
}

struct Runs {
    serial: PathBuf,
    parallel: PathBuf,
    ok: bool,
    seconds: f64,
}

fn run_experiment(root: &Path, e: &str) -> Runs {
    let serial = root.join(format!("{e}-serial"));
    let parallel = root.join(format!("{e}-parallel"));
    let (a, seconds) = cli(&["bench", e, "--seed", "7", "--out", serial.to_str().unwrap()]);
    let (b, _) = cli(&["bench", e, "--seed", "7", "--jobs", "4", "--out", parallel.to_str().unwrap()]);
    Runs { serial, parallel, ok: a && b, seconds }
}

fn criterion_6(r: &Runs) -> Outcome {
    let rows = table(&r.serial, "results.csv");
    let pct = |n: usize| rows.iter().find(|x| x[0] == format!("n{n}")).map(|x| x[3].parse::<i64>().unwrap()).unwrap();
    let sr: Vec<i64> = [100, 200, 300, 400, 500].iter().map(|&n| pct(n)).collect();
    let pass = r.ok && sr[0] <= sr[1] && sr[1] <= sr[2] && (sr[4] - sr[2]).abs() <= 10 && r.seconds < 300.0;
    outcome(pass, format!("success % by size 100..500: {sr:?}, e2 run {:.1} s", r.seconds))
}

fn criterion_7(r: &Runs) -> Outcome {
    let rows = table(&r.serial, "tracking.csv");
    let mut pass = r.ok;
    let mut parts = Vec::new();
    for size in ["100", "200", "400"] {
        let get = |flag: &str| rows.iter().find(|x| x[0] == size && x[1] == flag).unwrap().clone();
        let (on, off) = (get("ff-on"), get("ff-off"));
        let (son, soff): (usize, usize) = (on[2].parse().unwrap(), off[2].parse().unwrap());
        let (eon, eoff): (f64, f64) = (on[5].parse().unwrap(), off[5].parse().unwrap());
        pass &= son >= soff && eon < eoff;
        parts.push(format!("n{size} on {son}/off {soff}, error {:.1}/{:.1} mm", eon * 1e3, eoff * 1e3));
    }
    outcome(pass, parts.join("; "))
}

fn criterion_8(r: &Runs) -> Outcome {
    let rows = table(&r.serial, "results.csv");
    let (erg, tsh) = (count(&rows, "Ergodic"), count(&rows, "TSHIX"));
    let paired = table(&r.serial, "paired.csv");
    let lost: Vec<&Vec<String>> = paired.iter().filter(|x| x[3] == "0").collect();
    let shared = lost.iter().filter(|x| x[4] == "0").count();
    let frac = if lost.is_empty() { 1.0 } else { shared as f64 / lost.len() as f64 };
    outcome(
        r.ok && tsh >= erg && frac >= 0.8,
        format!("TSHIX {tsh}/30, Ergodic {erg}/30, ergodic also lost {shared}/{} of TSHIX losses", lost.len()),
    )
}

fn criterion_9(r: &Runs) -> Outcome {
    let rows = table(&r.serial, "results.csv");
    let (rw, one, two) = (count(&rows, "RandomWalk"), count(&rows, "TSHIX-1demo"), count(&rows, "TSHIX-2demo"));
    outcome(
        r.ok && two > one && one > rw && rw as f64 <= 0.1 * 15.0,
        format!("random walk {rw}/15, 1-demo {one}/15, 2-demo {two}/15"),
    )
}

fn criterion_10(runs: &[(&str, &Runs)]) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (e, r) in runs {
        let (a, b) = (files(&r.serial), files(&r.parallel));
        let same = r.ok && !a.is_empty() && a == b;
        pass &= same;
        parts.push(format!("{e} {} files {}", a.len(), if same { "identical" } else { "DIFFER" }));
    }
    let e2 = runs.iter().find(|(e, _)| *e == "e2").unwrap().1;
    let (r1, _) = cli(&["report", e2.serial.to_str().unwrap()]);
    let (r2, _) = cli(&["report", e2.parallel.to_str().unwrap()]);
    let plots_same = r1 && r2 && fs::read(e2.serial.join("plot.csv")).ok() == fs::read(e2.parallel.join("plot.csv")).ok();
    pass &= plots_same;
    parts.push(format!("report {}", if plots_same { "identical" } else { "DIFFER" }));
    outcome(pass, format!("serial vs --jobs 4: {}", parts.join(", ")))
}

fn main() {
    let tmp = tempfile::tempdir().unwrap();
    let mut results: Vec<(usize, &str, Outcome)> = vec![
        (1, "gaussian conditioning oracle", criterion_1()),
        (2, "regression equivalence", criterion_2()),
        (3, "tsp optimality at small n", criterion_3()),
        (4, "savitzky-golay exactness", criterion_4()),
        (5, "ergodic machinery", criterion_5()),
    ];
    let e1 = run_experiment(tmp.path(), "e1");
    let e2 = run_experiment(tmp.path(), "e2");
    let e3 = run_experiment(tmp.path(), "e3");
    let e4 = run_experiment(tmp.path(), "e4");
    results.push((6, "trend: sample-size sweep", criterion_6(&e2)));
    results.push((7, "trend: feed-forward ablation", criterion_7(&e3)));
    results.push((8, "trend: planner comparison", criterion_8(&e1)));
    results.push((9, "trend: 3d ordering", criterion_9(&e4)));
    results.push((10, "determinism", criterion_10(&[("e1", &e1), ("e2", &e2), ("e3", &e3), ("e4", &e4)])));

    let mut failed = 0;
    for (n, name, o) in &results {
        println!("criterion {n:>2} {name}: {} ({})", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += (!o.pass) as usize;
    }
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
