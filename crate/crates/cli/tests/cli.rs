use std::path::Path;
use std::process::{Command, Output};

use bogo_harness::{emit_plotdata, run, ExperimentConfig, HarnessError, RunManifest, RunOptions, RunResults, Subcommand, PLOT_KINDS};
use tempfile::TempDir;

fn bogo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bogo")).args(args).env_remove("BOGO_JOBS").output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records().map(|rec| rec.unwrap().iter().map(str::to_owned).collect()).collect()
}

fn csv_header(path: &Path) -> Vec<String> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.headers().unwrap().iter().map(str::to_owned).collect()
}

const FIXEDPOINT: &str = r#"{
  "fixedpoint": {
    "lattice": {"sites": 6, "sigma": 0.1},
    "potential": {"kind": "radial", "V": {"form": "poly", "amplitude": 1.5, "power": 3}, "beta": 1.0, "cutoff": 2.5},
    "mayer_norm": MAYER
  }
}"#;

#[test]
fn malformed_config_exits_2_naming_the_field() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        dir.path(),
        "bad.json",
        r#"{"fixedpoint": {"lattice": {"sites": "eight", "sigma": 0.1}, "potential": {"kind": "radial", "V": {"form": "poly", "amplitude": 1.0, "power": 3}, "beta": 1.0, "cutoff": 2.5}}}"#,
    );
    let out = bogo(&["fixedpoint", "--config", &cfg, "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.contains("fixedpoint.lattice.sites"), "{err}");
    assert!(err.contains("line 1"), "{err}");
}

#[test]
fn syntax_error_exits_2_with_position() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "bad.json", "{\n  \"exact\": {\n    \"lattice\": {\"sites\": 4,, }\n}");
    let out = bogo(&["exact", "--config", &cfg, "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 3"), "{}", stderr(&out));
}

#[test]
fn unknown_field_and_two_blocks_are_config_errors() {
    let e = ExperimentConfig::parse(r#"{"verify": {"suite": "all", "extra": 1}}"#).unwrap_err();
    assert!(matches!(e, HarnessError::Config(_)));
    assert!(e.to_string().contains("extra"), "{e}");

    let e = ExperimentConfig::parse(r#"{"verify": {}, "exact": {"lattice": {"sites": 3, "sigma": 0.2}}}"#).unwrap_err();
    assert_eq!(e.exit_code(), 2);

    let e = ExperimentConfig::parse(r#"{"seed": 3}"#).unwrap_err();
    assert_eq!(e.exit_code(), 2);

    let e = ExperimentConfig::parse(r#"{"verify": {"suite": "nonsense"}}"#).unwrap_err();
    assert!(e.to_string().contains("verify.suite"), "{e}");
}

#[test]
fn config_block_must_match_subcommand() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "v.json", r#"{"verify": {"suite": "exact"}}"#);
    let out = bogo(&["exact", "--config", &cfg, "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("verify"));
}

#[test]
fn defaults_round_trip_through_json() {
    for sub in [Subcommand::Exact, Subcommand::Fixedpoint, Subcommand::Gcmc, Subcommand::Sde, Subcommand::Hierarchy, Subcommand::Verify] {
        let cfg = ExperimentConfig::default_for(sub);
        let text = serde_json::to_string(&cfg).unwrap();
        let back = ExperimentConfig::parse(&text).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.subcommand().unwrap(), sub);
    }
}

#[test]
fn fixedpoint_outside_regime_exits_1() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "fp.json", &FIXEDPOINT.replace("MAYER", "0.4"));
    let outdir = dir.path().join("o");
    let out = bogo(&["fixedpoint", "--config", &cfg, "--out", outdir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("outside uniqueness regime"), "{}", stderr(&out));
    // The refusal is still recorded.
    let m = RunManifest::read(&outdir).unwrap();
    assert_eq!(m.exit_code, 1);
    assert!(m.error.unwrap().contains("outside uniqueness regime"));
}

#[test]
fn fixedpoint_plot_data_decays_geometrically() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "fp.json", &FIXEDPOINT.replace("MAYER", "0.25"));
    let outdir = dir.path().join("o");
    let out = bogo(&["fixedpoint", "--config", &cfg, "--out", outdir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let path = outdir.join("plot_convergence.csv");
    assert_eq!(csv_header(&path), ["series", "iteration", "delta", "bound"]);
    let rows = csv_rows(&path);
    assert!(rows.len() > 3);
    for r in &rows {
        let delta: f64 = r[2].parse().unwrap();
        let bound: f64 = r[3].parse().unwrap();
        assert!(delta <= bound * (1.0 + 1e-12), "{r:?}");
    }
    let m = RunManifest::read(&outdir).unwrap();
    assert!(m.assertions.iter().all(|a| a.passed));
    assert!(m.outputs.iter().any(|o| o.file == "plot_convergence.csv"));
    assert_eq!(m.input_hashes.len(), 1);
}

#[test]
fn gcmc_plot_data_has_errors() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        dir.path(),
        "g.json",
        r#"{"gcmc": {"sim_box": {"dim": 1, "side": 10.0}, "z": 0.3, "beta": 1.0,
            "potential": {"cutoff": 1.0, "form": {"form": "poly", "amplitude": 1.0, "power": 3}},
            "n_sweeps": 5000, "burn_in": 200, "thinning": 5, "n_chains": 2,
            "bins": {"r_max": 2.0, "n_bins": 8}}}"#,
    );
    let outdir = dir.path().join("o");
    let out = bogo(&["gcmc", "--config", &cfg, "--out", outdir.to_str().unwrap(), "--seed", "7"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let path = outdir.join("plot_g_r.csv");
    let header = csv_header(&path);
    assert!(header.contains(&"g".to_string()) && header.contains(&"se".to_string()), "{header:?}");
    let rows = csv_rows(&path);
    assert_eq!(rows.len(), 8);
    let se_col = header.iter().position(|h| h == "se").unwrap();
    assert!(rows.iter().all(|r| r[se_col].parse::<f64>().unwrap() >= 0.0));
    assert_eq!(RunManifest::read(&outdir).unwrap().seed, 7);
}

#[test]
fn verify_exact_lists_every_identity() {
    let dir = TempDir::new().unwrap();
    let outdir = dir.path().join("o");
    let out = bogo(&["verify", "--suite", "exact", "--out", outdir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let m = RunManifest::read(&outdir).unwrap();
    let names: Vec<&str> = m.assertions.iter().map(|a| a.name.as_str()).collect();
    for needle in ["roundtrip", "duality", "star", "derivative", "shift", "occupation"] {
        assert!(names.iter().any(|n| n.to_lowercase().contains(needle)), "{needle} missing from {names:?}");
    }
    assert!(m.assertions.iter().all(|a| a.passed));
    assert!(outdir.join("c1_identities.csv").exists());
    assert!(String::from_utf8_lossy(&out.stdout).contains("PASS"));
}

#[test]
fn same_seed_gives_identical_files_whatever_the_jobs() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        dir.path(),
        "s.json",
        r#"{"sde": {"sim_box": {"dim": 1, "side": 10.0}, "init": {"rule": "poisson", "z": 0.3}, "beta": 1.0,
            "potential": {"cutoff": 1.0, "form": {"form": "poly", "amplitude": 2.0, "power": 4}},
            "dt": 0.002, "t_end": 0.2, "n_replicas": 100, "force_cap": 100.0, "noise": true,
            "record_times": [0.0, 0.2], "bins": {"r_max": 2.0, "n_bins": 5}, "density_bins": 5}}"#,
    );
    let mut manifests = Vec::new();
    for jobs in [1usize, 3] {
        let outdir = dir.path().join(format!("j{jobs}"));
        let opts = RunOptions {
            config: Some(cfg.clone().into()),
            jobs: Some(jobs),
            out: Some(outdir.clone()),
            ..RunOptions::new(Subcommand::Sde)
        };
        let outcome = run(&opts);
        assert_eq!(outcome.exit_code, 0, "{:?}", outcome.error);
        manifests.push(outcome.manifest.unwrap());
    }
    assert!(!manifests[0].outputs.is_empty());
    assert_eq!(manifests[0].outputs, manifests[1].outputs);
    for o in &manifests[0].outputs {
        let a = std::fs::read(dir.path().join("j1").join(&o.file)).unwrap();
        let b = std::fs::read(dir.path().join("j3").join(&o.file)).unwrap();
        assert_eq!(a, b, "{}", o.file);
    }
}

#[test]
fn jobs_fall_back_to_environment() {
    let dir = TempDir::new().unwrap();
    let outdir = dir.path().join("o");
    let out =
        Command::new(env!("CARGO_BIN_EXE_bogo")).args(["exact", "--out", outdir.to_str().unwrap()]).env("BOGO_JOBS", "2").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(RunManifest::read(&outdir).unwrap().jobs, 2);
}

#[test]
fn zero_jobs_is_rejected() {
    let dir = TempDir::new().unwrap();
    let out = bogo(&["exact", "--jobs", "0", "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn exact_run_writes_measure_and_checks() {
    let dir = TempDir::new().unwrap();
    let outdir = dir.path().join("o");
    let outcome = run(&RunOptions { out: Some(outdir.clone()), ..RunOptions::new(Subcommand::Exact) });
    assert_eq!(outcome.exit_code, 0);
    for f in ["measure.json", "correlation.json", "checks.csv", "summary.json", "manifest.json"] {
        assert!(outdir.join(f).exists(), "{f}");
    }
    let m = outcome.manifest.unwrap();
    assert_eq!(m.rng_algorithm, bogo_core::rng::ALGORITHM);
    assert!(!m.stages.is_empty());
    // No temporary files are left behind by the atomic writes.
    assert!(std::fs::read_dir(&outdir).unwrap().all(|e| !e.unwrap().file_name().to_string_lossy().ends_with(".tmp")));
}

#[test]
fn hierarchy_rejects_record_time_off_the_step_grid() {
    let dir = TempDir::new().unwrap();
    let mut cfg = ExperimentConfig::default_for(Subcommand::Hierarchy);
    cfg.hierarchy.as_mut().unwrap().record_times = vec![0.1234567];
    let path = write(dir.path(), "h.json", &serde_json::to_string(&cfg).unwrap());
    let outcome = run(&RunOptions { config: Some(path.into()), out: Some(dir.path().join("o")), ..RunOptions::new(Subcommand::Hierarchy) });
    assert_eq!(outcome.exit_code, 2);
    assert!(outcome.error.unwrap().contains("record_times"));
}

#[test]
fn emit_plotdata_rejects_unknown_kind_and_empty_results() {
    let dir = TempDir::new().unwrap();
    let empty = RunResults::default();
    let e = emit_plotdata(&empty, "g_r", dir.path()).unwrap_err();
    assert!(e.to_string().contains("empty"), "{e}");

    let mut results = RunResults::default();
    results.residual_vs_h.push(bogo_harness::plot::ResidualRow { study: "s".into(), h: 0.1, value: 1e-3 });
    let e = emit_plotdata(&results, "histogram", dir.path()).unwrap_err();
    for kind in PLOT_KINDS {
        assert!(e.to_string().contains(kind), "{e}");
    }
    let e = emit_plotdata(&results, "convergence", dir.path()).unwrap_err();
    assert!(matches!(e, HarnessError::Plot(_)));

    let path = emit_plotdata(&results, "residual_vs_h", dir.path()).unwrap();
    assert_eq!(csv_rows(&path).len(), 1);
}
