use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use ghartree_core::criteria::{blowup_criterion, chirp_b_ranges, chirped_observables, pseudo_conformal_map};
use ghartree_core::criteria::{scattering_residual, scattering_state};
use ghartree_core::io::{encode_snapshot, timeseries_csv};
use ghartree_core::observables::Observer;
use ghartree_core::weighted::{fixture_suite, riesz_window_contrast};
use ghartree_core::{
    derived_constants, evolve, sample, suggest_orders, validate_blowup_regime, Field, Grid, HaltReason, InitialData,
    ObservableRecord, TrajectoryResult,
};
use rayon::prelude::*;
use thiserror::Error;

use crate::config::{ChirpChoice, ConfigError, InitialSpec, Preset, RunConfig};
use crate::manifest::{Manifest, Status};

pub const EXIT_OK: i32 = 0;
pub const EXIT_BLOWUP: i32 = 2;
pub const EXIT_RESOLUTION: i32 = 3;
pub const EXIT_NON_FINITE: i32 = 4;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 64;
pub const EXIT_IO: i32 = 74;

pub fn exit_code_for(halt: HaltReason) -> i32 {
    match halt {
        HaltReason::Completed => EXIT_OK,
        HaltReason::BlowupIndicated => EXIT_BLOWUP,
        HaltReason::ResolutionLost => EXIT_RESOLUTION,
        HaltReason::NonFinite => EXIT_NON_FINITE,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    CheckParams,
    Simulate,
    BlowupScan,
    ScatterDemo,
    VerifyInequalities,
}

impl Command {
    pub fn as_str(&self) -> &'static str {
        match self {
            Command::CheckParams => "check-params",
            Command::Simulate => "simulate",
            Command::BlowupScan => "blowup-scan",
            Command::ScatterDemo => "scatter-demo",
            Command::VerifyInequalities => "verify-inequalities",
        }
    }
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Core(#[from] ghartree_core::Error),
    #[error("cannot write {}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => EXIT_CONFIG,
            RunError::Core(ghartree_core::Error::NonFinite(_)) => EXIT_NON_FINITE,
            RunError::Core(ghartree_core::Error::Io(_)) | RunError::Io { .. } => EXIT_IO,
            RunError::Core(_) => EXIT_CONFIG,
        }
    }
}

fn invalid(msg: impl Into<String>) -> RunError {
    RunError::Config(ConfigError::Validation(msg.into()))
}

#[derive(Debug, Clone, Default)]
pub struct RunSummary {
    /// Halt reason of the main trajectory, for commands that integrate one.
    pub halt: Option<HaltReason>,
    /// Set when a check-style command found a violated bound.
    pub check_failed: bool,
    /// Human-readable summary for stdout.
    pub text: String,
    pub artifacts: Vec<String>,
}

impl RunSummary {
    pub fn exit_code(&self) -> i32 {
        match self.halt {
            Some(h) if h != HaltReason::Completed => exit_code_for(h),
            _ if self.check_failed => EXIT_CHECK_FAILED,
            _ => EXIT_OK,
        }
    }
}

/// Writes artifacts under the output directory and remembers their names.
struct Output {
    dir: PathBuf,
    artifacts: Vec<String>,
}

impl Output {
    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), RunError> {
        let path = self.dir.join(name);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(|source| RunError::Io {
                path: parent.to_path_buf(),
                source,
            })?;
        }
        std::fs::write(&path, bytes).map_err(|source| RunError::Io { path, source })?;
        self.artifacts.push(name.to_string());
        Ok(())
    }
}

/// Runs one command. The manifest is written first as incomplete and
/// rewritten at the end; a failure part-way leaves it marked incomplete.
pub fn run_experiment(command: Command, config: &RunConfig, jobs: usize) -> Result<RunSummary, RunError> {
    let dir = config.output.dir.clone();
    std::fs::create_dir_all(&dir).map_err(|source| RunError::Io {
        path: dir.clone(),
        source,
    })?;
    let mut manifest = Manifest::new(command.as_str(), config);
    manifest.write(&dir).map_err(|source| RunError::Io {
        path: dir.join("MANIFEST"),
        source,
    })?;
    let mut out = Output {
        dir: dir.clone(),
        artifacts: Vec::new(),
    };
    let result = match command {
        Command::CheckParams => params_report(config, &mut out),
        Command::Simulate => match config.preset {
            Preset::Conservation | Preset::Virial | Preset::BlowupDemo => simulate(config, &mut out),
            Preset::ScatterDemo => scatter_demo(config, &mut out),
            Preset::InequalitySuite => inequality_suite(config, &mut out),
            Preset::ParamsReport => params_report(config, &mut out),
        },
        Command::BlowupScan => blowup_scan(config, &mut out, jobs),
        Command::ScatterDemo => scatter_demo(config, &mut out),
        Command::VerifyInequalities => inequality_suite(config, &mut out),
    };
    manifest.artifacts = out.artifacts.clone();
    match result {
        Ok(mut summary) => {
            manifest.status = Status::Complete;
            manifest.halt = summary.halt.map(|h| h.to_string());
            manifest.write(&dir).map_err(|source| RunError::Io {
                path: dir.join("MANIFEST"),
                source,
            })?;
            summary.artifacts = out.artifacts;
            Ok(summary)
        }
        Err(e) => {
            manifest.note = Some(e.to_string().replace('\n', " "));
            // Best effort: the original error is the one worth reporting.
            let _ = manifest.write(&dir);
            Err(e)
        }
    }
}

fn require_grid(config: &RunConfig) -> Result<&Grid, RunError> {
    config
        .grid
        .as_ref()
        .ok_or_else(|| RunError::Config(ConfigError::Missing("grid.length".into())))
}

/// Unchirped initial data.
fn base_field(config: &RunConfig, grid: &Grid) -> Result<Field, RunError> {
    let spec = match config.initial {
        InitialSpec::Gaussian { amplitude, sigma, .. } => InitialData::Gaussian { amplitude, sigma },
        InitialSpec::PowerWeight { amplitude, m } => InitialData::PowerWeight { amplitude, m },
    };
    Ok(sample(grid, &spec)?)
}

/// Initial data with its chirp applied, and the chirp used.
fn initial_field(config: &RunConfig, grid: &Grid) -> Result<(Field, Option<f64>), RunError> {
    let base = base_field(config, grid)?;
    let chirp = match config.initial {
        InitialSpec::Gaussian { chirp, .. } => chirp,
        InitialSpec::PowerWeight { .. } => ChirpChoice::None,
    };
    let b = match chirp {
        ChirpChoice::None => return Ok((base, None)),
        ChirpChoice::Fixed(b) => b,
        ChirpChoice::BelowThreshold(factor) => {
            let ranges = chirp_b_ranges(&base, &config.params)?;
            let threshold = ranges
                .negative_threshold
                .ok_or_else(|| invalid("initial data has no negative chirp threshold"))?;
            factor * threshold
        }
    };
    Ok((base.chirp(b), Some(b)))
}

fn write_trajectory(
    config: &RunConfig,
    run: &TrajectoryResult,
    out: &mut Output,
    prefix: &str,
) -> Result<(), RunError> {
    if config.output.timeseries && !run.records.is_empty() {
        out.write(
            &format!("{prefix}timeseries.csv"),
            timeseries_csv(&run.records)?.as_bytes(),
        )?;
    }
    for (i, snap) in run.snapshots.iter().enumerate() {
        out.write(
            &format!("{prefix}snapshots/snapshot_{i:03}.bin"),
            &encode_snapshot(snap),
        )?;
    }
    Ok(())
}

fn max_drift(records: &[ObservableRecord], f: impl Fn(&ObservableRecord) -> f64) -> f64 {
    let first = f(&records[0]);
    records.iter().map(|r| (f(r) - first).abs()).fold(0.0, f64::max)
}

fn simulate(config: &RunConfig, out: &mut Output) -> Result<RunSummary, RunError> {
    let grid = require_grid(config)?;
    let params = &config.params;
    let mut text = String::new();
    if config.preset == Preset::BlowupDemo {
        let report = validate_blowup_regime(params);
        if !report.all_satisfied() {
            return Err(invalid(report.violations().join("; ")));
        }
    }
    let (u0, chirp) = initial_field(config, grid)?;
    if config.preset == Preset::BlowupDemo {
        let obs = Observer::new(grid, params)?;
        let c = obs.conserved(&u0)?;
        let v = obs.virial(&u0)?;
        let verdict = blowup_criterion(c.mass, c.energy, v.v, v.v_t, params)?;
        let ranges = chirp_b_ranges(&base_field(config, grid)?, params);
        let mut body = verdict.to_key_values();
        if let Some(b) = chirp {
            body.push_str(&format!("chirp = {b:e}\n"));
        }
        if config.output.reports {
            out.write("verdict.txt", body.as_bytes())?;
            if let Ok(r) = &ranges {
                out.write("chirp_ranges.txt", r.to_key_values().as_bytes())?;
            }
        }
        let _ = writeln!(
            text,
            "criterion {}: lhs = {:.6e}, rhs = {:.6e}",
            if verdict.satisfied {
                "satisfied"
            } else {
                "not satisfied"
            },
            verdict.lhs,
            verdict.rhs
        );
    }

    let run = evolve(&u0, params, &config.integrator);
    write_trajectory(config, &run, out, "")?;
    let _ = writeln!(
        text,
        "halt: {} after {} steps at t = {}",
        run.halt,
        run.steps,
        run.final_field.t()
    );

    if let Some(first) = run.records.first() {
        let last = run.records.last().unwrap_or(first);
        let mut report = format!(
            "preset = {}\nhalt = {}\nsteps = {}\nt_final = {:e}\n",
            config.preset,
            run.halt,
            run.steps,
            run.final_field.t()
        );
        match config.preset {
            Preset::Conservation => {
                let mass = max_drift(&run.records, |r| r.mass) / first.mass;
                let energy = max_drift(&run.records, |r| r.energy);
                let momentum = (0..first.momentum.len())
                    .map(|k| max_drift(&run.records, |r| r.momentum[k]))
                    .fold(0.0, f64::max);
                let _ = write!(
                    report,
                    "mass_drift_rel = {mass:e}\nenergy_drift_abs = {energy:e}\nmomentum_drift_abs = {momentum:e}\n"
                );
                let _ = writeln!(
                    text,
                    "mass drift {mass:.3e} (rel), energy drift {energy:.3e}, momentum drift {momentum:.3e}"
                );
            }
            Preset::Virial => {
                // Centered difference of V_t against the closed-form V_tt.
                let mismatch = run
                    .records
                    .windows(3)
                    .map(|w| {
                        let fd = (w[2].variance_t - w[0].variance_t) / (w[2].t - w[0].t);
                        (fd - w[1].variance_tt).abs() / w[1].variance_tt.abs().max(1e-300)
                    })
                    .fold(0.0, f64::max);
                let _ = writeln!(report, "virial_fd_mismatch_rel = {mismatch:e}");
                let _ = writeln!(text, "V_tt vs difference of V_t: {mismatch:.3e} (rel)");
            }
            _ => {
                let _ = write!(
                    report,
                    "variance_start = {:e}\nvariance_end = {:e}\n",
                    first.variance, last.variance
                );
                let _ = writeln!(text, "variance {:.4e} -> {:.4e}", first.variance, last.variance);
            }
        }
        if config.output.reports {
            out.write("report.txt", report.as_bytes())?;
        }
    }
    Ok(RunSummary {
        halt: Some(run.halt),
        text,
        ..Default::default()
    })
}

fn params_report(config: &RunConfig, out: &mut Output) -> Result<RunSummary, RunError> {
    let params = &config.params;
    let mut text = params.report().to_table();
    let _ = writeln!(
        text,
        "N = {}, p = {}, γ = {}, μ = {}, m = {}",
        params.dim(),
        params.p(),
        params.gamma(),
        params.mu(),
        params.m()
    );
    let _ = writeln!(text, "M = {}, M0 = {}", params.big_m(), params.m0());
    let c = derived_constants(params);
    let _ = writeln!(text, "s_c = {:.12}, k_c = {:.12}", c.s_c, c.k_c);
    match c.omega_c_sq {
        Some(w) => {
            let _ = writeln!(text, "omega_c^2 = {w:.12}");
        }
        None => text.push_str("omega_c^2 undefined\n"),
    }
    match suggest_orders(params.dim(), params.p(), params.gamma(), params.m()) {
        Ok((m0, big_m)) => {
            let _ = writeln!(text, "suggested M0 = {m0}, M = {big_m}");
        }
        Err(e) => {
            let _ = writeln!(text, "no suggested orders: {e}");
        }
    }
    if config.output.reports {
        out.write("params_report.txt", text.as_bytes())?;
        out.write("params_report.kv", params.report().to_key_values().as_bytes())?;
    }
    Ok(RunSummary {
        text,
        ..Default::default()
    })
}

fn scatter_demo(config: &RunConfig, out: &mut Output) -> Result<RunSummary, RunError> {
    let grid = require_grid(config)?;
    let params = &config.params;
    let b = params.b();
    if !(b > 0.0) {
        return Err(invalid(format!("scatter-demo needs params.b > 0, got {b}")));
    }
    let taus = if config.scatter.taus.is_empty() {
        (0..=6).map(|i| 0.07 * i as f64 / b).collect()
    } else {
        config.scatter.taus.clone()
    };
    if let Some(t) = taus.iter().find(|t| !(**t >= 0.0 && **t * b < 1.0)) {
        return Err(invalid(format!("scatter.tau = {t} must lie in [0, 1/b)")));
    }
    let mut integrator = config.integrator.clone();
    integrator.t_end = 1.0 / b;
    integrator.nonautonomous = Some(b);
    integrator.snapshot_times = taus.clone();
    integrator.validate(params)?;

    let (v0, _) = initial_field(config, grid)?;
    let run = evolve(&v0, params, &integrator);
    write_trajectory(config, &run, out, "")?;
    let mut text = format!(
        "halt: {} after {} steps at τ = {}\n",
        run.halt,
        run.steps,
        run.final_field.t()
    );
    if run.halt != HaltReason::Completed {
        return Ok(RunSummary {
            halt: Some(run.halt),
            text,
            ..Default::default()
        });
    }
    let u_plus = scattering_state(&run.final_field, b)?;
    let mut csv = String::from("tau,t,residual,decay\n");
    let mut residuals = Vec::new();
    for (v, tau) in run.snapshots.iter().zip(&taus) {
        let u = pseudo_conformal_map(v, *tau, b)?;
        let (r, d) = scattering_residual(&u, u.t(), &u_plus, config.scatter.sobolev)?;
        let _ = writeln!(csv, "{tau:e},{:e},{r:e},{d:e}", u.t());
        residuals.push(r);
    }
    out.write("scatter.csv", csv.as_bytes())?;
    let monotone = residuals.windows(2).all(|w| w[1] < w[0]);
    let _ = writeln!(
        text,
        "H^{} residual {:.3e} -> {:.3e}, decreasing: {monotone}",
        config.scatter.sobolev,
        residuals.first().copied().unwrap_or(f64::NAN),
        residuals.last().copied().unwrap_or(f64::NAN),
    );
    Ok(RunSummary {
        halt: Some(run.halt),
        text,
        ..Default::default()
    })
}

fn inequality_suite(config: &RunConfig, out: &mut Output) -> Result<RunSummary, RunError> {
    let reports = fixture_suite(config.suite_level, config.seed)?;
    let mut text = String::new();
    let mut failed = false;
    for r in &reports {
        out.write(&format!("inequalities/{}.csv", r.id), r.to_csv().as_bytes())?;
        failed |= !r.ratio_bounded;
        let _ = writeln!(
            text,
            "{} {}: max ratio {:.4} (ceiling {}), {} samples, {} skipped",
            if r.ratio_bounded { "ok  " } else { "FAIL" },
            r.id,
            r.max_ratio,
            r.ceiling,
            r.samples.len(),
            r.skipped.len()
        );
    }
    let (inside, outside, _) = riesz_window_contrast(config.suite_level, config.seed)?;
    let _ = writeln!(text, "riesz window contrast: inside {inside:.3}, outside {outside:.3}");
    out.write("inequalities/summary.txt", text.as_bytes())?;
    Ok(RunSummary {
        check_failed: failed,
        text,
        ..Default::default()
    })
}

struct ScanRow {
    b: f64,
    /// `(satisfied, lhs, rhs)`, or why the criterion does not apply.
    verdict: Result<(bool, f64, f64), String>,
    energy: f64,
    vt0: f64,
    halt: Option<HaltReason>,
}

fn blowup_scan(config: &RunConfig, out: &mut Output, jobs: usize) -> Result<RunSummary, RunError> {
    let grid = require_grid(config)?;
    let params = &config.params;
    if config.scan.b_values.is_empty() {
        return Err(RunError::Config(ConfigError::Missing("scan.b".into())));
    }
    let report = validate_blowup_regime(params);
    if !report.all_satisfied() {
        return Err(invalid(report.violations().join("; ")));
    }
    let base = base_field(config, grid)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| invalid(format!("cannot start {jobs} workers: {e}")))?;
    let dir = out.dir.clone();
    let rows: Vec<Result<(ScanRow, Vec<String>), RunError>> = pool.install(|| {
        config
            .scan
            .b_values
            .par_iter()
            .enumerate()
            .map(|(i, &b)| scan_one(config, &base, b, &dir, i))
            .collect()
    });
    let mut csv = String::from("b,verdict,lhs,rhs,energy,variance_t,halt\n");
    let mut text = String::new();
    for row in rows {
        let (row, files) = row?;
        out.artifacts.extend(files);
        let halt = row.halt.map_or("not-run", |h| h.as_str());
        let (verdict, lhs, rhs) = match &row.verdict {
            Ok((true, l, r)) => ("satisfied", *l, *r),
            Ok((false, l, r)) => ("not-satisfied", *l, *r),
            Err(_) => ("not-applicable", f64::NAN, f64::NAN),
        };
        let _ = writeln!(
            csv,
            "{:e},{verdict},{lhs:e},{rhs:e},{:e},{:e},{halt}",
            row.b, row.energy, row.vt0
        );
        let _ = match &row.verdict {
            Err(why) => writeln!(text, "b = {:+.4}: criterion not applicable ({why}), run {halt}", row.b),
            Ok(_) => writeln!(text, "b = {:+.4}: criterion {verdict}, run {halt}", row.b),
        };
    }
    if let Ok(r) = chirp_b_ranges(&base, params) {
        if let Some(t) = r.negative_threshold {
            let _ = writeln!(text, "negative threshold b1 = {t:.6}");
        }
        if config.output.reports {
            out.write("chirp_ranges.txt", r.to_key_values().as_bytes())?;
        }
    }
    out.write("scan.csv", csv.as_bytes())?;
    Ok(RunSummary {
        text,
        ..Default::default()
    })
}

fn scan_one(
    config: &RunConfig,
    base: &Field,
    b: f64,
    dir: &Path,
    index: usize,
) -> Result<(ScanRow, Vec<String>), RunError> {
    let params = &config.params;
    let c = chirped_observables(base, b, params)?;
    let mass = base.mass();
    let verdict = blowup_criterion(mass, c.energy, c.v0, c.vt0, params)
        .map(|v| (v.satisfied, v.lhs, v.rhs))
        .map_err(|e| e.to_string());
    let mut row = ScanRow {
        b,
        verdict,
        energy: c.energy,
        vt0: c.vt0,
        halt: None,
    };
    let mut files = Vec::new();
    if config.scan.simulate {
        let run = evolve(&base.chirp(b), params, &config.integrator);
        let mut sub = Output {
            dir: dir.to_path_buf(),
            artifacts: Vec::new(),
        };
        let prefix = format!("run_{index:03}/");
        write_trajectory(config, &run, &mut sub, &prefix)?;
        sub.write(
            &format!("{prefix}halt.txt"),
            format!("b = {b:e}\nhalt = {}\nsteps = {}\n", run.halt, run.steps).as_bytes(),
        )?;
        files = sub.artifacts;
        row.halt = Some(run.halt);
    }
    Ok((row, files))
}
