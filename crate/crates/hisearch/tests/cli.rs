use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn hisearch(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hisearch")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = hisearch(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn pipeline_from_demo_to_rollout() {
    let dir = tempfile::tempdir().unwrap();
    let demos = dir.path().join("demos");
    let models = dir.path().join("models");
    let plan = dir.path().join("plan");
    ok(&["demo", "synth", "--world", "peg2d", "--kind", "sweep", "--out", s(&demos)]);
    assert!(ok(&["demo", "validate", s(&demos)]).contains("accepted"));
    ok(&["fit", "explore", "--demos", s(&demos), "--out", s(&models)]);
    ok(&["fit", "dynamics", "--demos", s(&demos), "--out", s(&models)]);
    ok(&[
        "plan",
        "tshix",
        "--samples",
        "300",
        "--model",
        s(&models.join("explore.txt")),
        "--dynamics",
        s(&models.join("dynamics.txt")),
        "--out",
        s(&plan),
    ]);
    let traj = fs::read_to_string(plan.join("trajectory.csv")).unwrap();
    assert!(traj.starts_with("x,y,ffx,ffy\n"));
    for d in [&demos, &models, &plan] {
        let m = fs::read_to_string(d.join("manifest.txt")).unwrap();
        assert!(m.contains("config_hash = ") && m.contains("seed = 7") && m.contains("version = "), "{m}");
    }
    let text = ok(&["rollout", "--trajectory", s(&plan.join("trajectory.csv")), "--start", "-0.03,0.0", "--out", s(&plan)]);
    assert!(text.starts_with("success,time_to_success,max_contact_force,mean_lateral_error\n"));
}

#[test]
fn plan_commands_are_seed_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let demos = dir.path().join("demos");
    ok(&["demo", "synth", "--world", "plug3d", "--kind", "two_phase", "--count", "2", "--out", s(&demos)]);
    ok(&["fit", "explore", "--demos", s(&demos), "--out", s(&demos)]);
    let model = demos.join("explore.txt");
    for kind in ["tshix", "randomwalk", "ergodic"] {
        let a = dir.path().join(format!("{kind}-a"));
        let b = dir.path().join(format!("{kind}-b"));
        let extra: &[&str] = if kind == "ergodic" { &["--iters", "20", "--points", "100", "--length", "0.2"] } else { &[] };
        for out in [&a, &b] {
            let mut args = vec!["plan", kind, "--model", s(&model), "--seed", "3", "--out", s(out)];
            args.extend_from_slice(extra);
            ok(&args);
        }
        let ta = fs::read(a.join("trajectory.csv")).unwrap();
        assert_eq!(ta, fs::read(b.join("trajectory.csv")).unwrap(), "{kind}");
        assert!(ta.starts_with(b"x,y,yaw\n"));
    }
}

#[test]
fn bench_reruns_are_byte_identical_and_report_aggregates() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("e2.ini");
    fs::write(&cfg, "[experiment]\nkind = e2\nn_trials = 3\n[start]\nfixed = -0.03, 0.0\n").unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    ok(&["bench", "e2", "--config", s(&cfg), "--seed", "7", "--out", s(&a)]);
    ok(&["bench", "e2", "--config", s(&cfg), "--seed", "7", "--jobs", "2", "--out", s(&b)]);
    for f in ["results.csv", "trials.csv", "sizes.csv", "starts.csv", "manifest.txt"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    let plot = ok(&["report", s(&a)]);
    let lines: Vec<&str> = plot.lines().collect();
    assert_eq!(lines[0], "size,success_pct,cpu_ms");
    assert_eq!(lines.len(), 6);
    // the plot percentages are recomputed from raw trials and must agree
    // with the result table
    let results = fs::read_to_string(a.join("results.csv")).unwrap();
    for (row, res) in lines[1..].iter().zip(results.lines().skip(1)) {
        let pct_plot = row.split(',').nth(1).unwrap();
        let pct_res = res.split(',').nth(3).unwrap();
        assert_eq!(pct_plot, pct_res);
    }
    let manifest = fs::read_to_string(a.join("manifest.txt")).unwrap();
    assert!(manifest.contains("fixed_start = -0.03, 0"));
    assert!(!manifest.contains("wall_ms"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(hisearch(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(hisearch(&["bench", "e2", "--jobs", "0"]).status.code(), Some(2));
    let bad = dir.path().join("bad.ini");
    fs::write(&bad, "[experiment]\nn_samples = 0\n").unwrap();
    assert_eq!(hisearch(&["bench", "e2", "--config", s(&bad)]).status.code(), Some(2));
    let missing = dir.path().join("nope.txt");
    assert_eq!(hisearch(&["plan", "tshix", "--model", s(&missing)]).status.code(), Some(3));
    let indefinite = dir.path().join("g.txt");
    fs::write(&indefinite, "kind = gaussian\ndim = 2\nmean = 0, 0\ncov = 1, 2, 2, 1\n").unwrap();
    assert_eq!(hisearch(&["plan", "tshix", "--model", s(&indefinite), "--out", s(dir.path())]).status.code(), Some(4));
    assert_eq!(hisearch(&["report", s(dir.path())]).status.code(), Some(3));
}
