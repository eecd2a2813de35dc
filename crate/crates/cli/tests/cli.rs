use std::path::Path;
use std::process::{Command, Output};

use ghartree_core::read_timeseries;

const THREE_D: &str = "\
params.dim = 3
params.p = 1.9
params.gamma = 0.5
params.m = 3
params.M = 13
params.M0 = 7
";

const ONE_D: &str = "\
params.dim = 1
params.p = 1.8
params.gamma = 0.05
params.m = 0.55
params.M = 6
params.M0 = 4
";

fn ghartree(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ghartree"))
        .args(args)
        .output()
        .unwrap()
}

fn run_with(dir: &Path, sub: &str, config: &str, extra: &[&str]) -> Output {
    let cfg = dir.join("run.cfg");
    std::fs::write(&cfg, config).unwrap();
    let out = dir.join("out");
    let mut args = vec![sub, "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    ghartree(&args)
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn conservation_config(mu: f64) -> String {
    format!(
        "preset = conservation\n{ONE_D}params.mu = {mu}\ngrid.length = 40\ngrid.points = 256\n\
         integrator.dt = 0.001\nintegrator.t_end = 0.1\nintegrator.record_every = 10\ninitial.amplitude = 0.3\n"
    )
}

#[test]
fn params_report_classifies_one_dimensional_example() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_with(
        dir.path(),
        "check-params",
        &format!("preset = params-report\n{ONE_D}"),
        &[],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("regime: wellposed"), "{text}");
    assert!(text.contains("M = 6, M0 = 4"), "{text}");
    assert!(text.contains("suggested M0 = 2, M = 6"), "{text}");
    assert!(dir.path().join("out/params_report.txt").exists());
}

#[test]
fn linear_run_conserves_energy() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_with(dir.path(), "simulate", &conservation_config(0.0), &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let records = read_timeseries(&dir.path().join("out/timeseries.csv")).unwrap();
    assert_eq!(records.len(), 11);
    let e0 = records[0].energy;
    let drift = records.iter().map(|r| (r.energy - e0).abs()).fold(0.0, f64::max);
    assert!(drift <= 1e-10, "energy drift {drift:e}");
}

#[test]
fn identical_configs_give_identical_bytes() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let o = run_with(d.path(), "simulate", &conservation_config(1.0), &["--seed", "11"]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    let x = std::fs::read(a.path().join("out/timeseries.csv")).unwrap();
    let y = std::fs::read(b.path().join("out/timeseries.csv")).unwrap();
    assert_eq!(x, y);
}

#[test]
fn manifest_records_run_provenance() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = conservation_config(1.0) + "params.chirp_convention = half\noutput.snapshots = 0, 0.05\n";
    let o = run_with(dir.path(), "simulate", &cfg, &["--seed", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let m = std::fs::read_to_string(dir.path().join("out/MANIFEST")).unwrap();
    for line in [
        format!("version = {}", env!("CARGO_PKG_VERSION")),
        "command = simulate".into(),
        "preset = conservation".into(),
        "seed = 3".into(),
        "zero_mode = matched".into(),
        "chirp_convention = half".into(),
        "status = complete".into(),
        "halt = completed".into(),
        "config.params.p = 1.8".into(),
        "override.seed = 3".into(),
    ] {
        assert!(
            m.lines().any(|l| l == line || l == format!("config.{line}")),
            "missing '{line}' in\n{m}"
        );
    }
    assert!(m.contains("snapshots/snapshot_001.bin"), "{m}");
    assert!(dir.path().join("out/snapshots/snapshot_001.bin").exists());
}

#[test]
fn duplicate_keys_cite_both_lines() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_with(
        dir.path(),
        "check-params",
        &format!("preset = params-report\n{ONE_D}params.p = 1.7\n"),
        &[],
    );
    assert_eq!(o.status.code(), Some(64));
    let e = stderr(&o);
    assert!(e.contains("params.p") && e.contains("lines 3 and 8"), "{e}");
}

#[test]
fn unknown_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_with(
        dir.path(),
        "check-params",
        &format!("preset = params-report\n{ONE_D}params.q = 1\n"),
        &[],
    );
    assert_eq!(o.status.code(), Some(64));
    assert!(stderr(&o).contains("line 8: unknown key 'params.q'"), "{}", stderr(&o));
}

#[test]
fn supercritical_exponent_names_the_condition() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = format!(
        "preset = params-report\n{}",
        ONE_D.replace("params.p = 1.8", "params.p = 2.5")
    );
    let o = run_with(dir.path(), "check-params", &cfg, &[]);
    assert_eq!(o.status.code(), Some(64));
    assert!(stderr(&o).contains("p < 2"), "{}", stderr(&o));
}

#[test]
fn missing_config_is_a_usage_error() {
    let o = ghartree(&["simulate"]);
    assert_eq!(o.status.code(), Some(64));
}

#[test]
fn unwritable_output_marks_manifest_incomplete() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::create_dir_all(dir.path().join("out/timeseries.csv")).unwrap();
    let o = run_with(dir.path(), "simulate", &conservation_config(1.0), &[]);
    assert_eq!(o.status.code(), Some(74), "{}", stderr(&o));
    let m = std::fs::read_to_string(dir.path().join("out/MANIFEST")).unwrap();
    assert!(m.contains("status = incomplete"), "{m}");
    assert!(m.contains("note = cannot write"), "{m}");
}

#[test]
fn scatter_demo_reports_decreasing_residual() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "preset = scatter-demo\nparams.dim = 2\nparams.p = 1.9\nparams.gamma = 0.1\nparams.m = 1.5\n\
         params.M = 11\nparams.M0 = 4\nparams.b = 4\ngrid.length = 16\ngrid.points = 64\n\
         integrator.dt = 0.001\nintegrator.record_every = 50\ninitial.amplitude = 0.2\n";
    let o = run_with(dir.path(), "scatter-demo", cfg, &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("out/scatter.csv")).unwrap();
    let residuals: Vec<f64> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(2).unwrap().parse().unwrap())
        .collect();
    assert_eq!(residuals.len(), 7);
    assert!(residuals.windows(2).all(|w| w[1] < w[0]), "{residuals:?}");
}

#[test]
fn blowup_scan_fans_out_into_subdirectories() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = format!(
        "preset = blowup-demo\n{THREE_D}grid.length = 20\ngrid.points = 32\nintegrator.dt = 0.001\n\
         integrator.t_end = 0.004\nintegrator.record_every = 2\ninitial.amplitude = 0.5\ninitial.sigma = 0.2222\n\
         scan.b = -1.5, 0, 1.5\nscan.simulate = true\n"
    );
    let o = run_with(dir.path(), "blowup-scan", &cfg, &["--jobs", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let scan = std::fs::read_to_string(dir.path().join("out/scan.csv")).unwrap();
    assert_eq!(scan.lines().count(), 4, "{scan}");
    assert!(scan.lines().nth(1).unwrap().contains(",satisfied,"), "{scan}");
    for i in 0..3 {
        let halt = std::fs::read_to_string(dir.path().join(format!("out/run_{i:03}/halt.txt"))).unwrap();
        assert!(halt.contains("halt = completed"), "{halt}");
    }
}

#[test]
fn blowup_demo_requires_blowup_regime() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = format!("preset = blowup-demo\n{ONE_D}grid.length = 40\ngrid.points = 256\n");
    let o = run_with(dir.path(), "simulate", &cfg, &[]);
    assert_eq!(o.status.code(), Some(64));
    assert!(
        stderr(&o).contains("γ < N(p-1)-2") || stderr(&o).contains("violated"),
        "{}",
        stderr(&o)
    );
}

#[test]
fn inequality_suite_runs_without_a_config() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("suite");
    let o = ghartree(&["verify-inequalities", "--out", out.to_str().unwrap(), "--seed", "7"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert_eq!(text.lines().filter(|l| l.starts_with("ok ")).count(), 6, "{text}");
    assert!(out.join("inequalities/riesz-weighted-inside.csv").exists());
}

#[test]
fn virial_report_matches_difference_quotient() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = conservation_config(1.0)
        .replace("preset = conservation", "preset = virial")
        .replace("record_every = 10", "record_every = 1");
    let o = run_with(dir.path(), "simulate", &cfg, &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report = std::fs::read_to_string(dir.path().join("out/report.txt")).unwrap();
    let mismatch: f64 = report
        .lines()
        .find_map(|l| l.strip_prefix("virial_fd_mismatch_rel = "))
        .unwrap()
        .parse()
        .unwrap();
    assert!(mismatch < 1e-3, "{report}");
}
