//! Acceptance run: one pass/fail line per criterion, nonzero exit on any failure.

use std::f64::consts::SQRT_2;
use std::time::Instant;

use ghartree_core::criteria::{blowup_criterion, blowup_f, chirp_b_ranges, chirped_observables};
use ghartree_core::criteria::{pseudo_conformal_map, scattering_residual, scattering_state, SignCase};
use ghartree_core::evolution::{evolve, HaltReason, IntegratorConfig};
use ghartree_core::grid::{sample, Field, Grid, InitialData};
use ghartree_core::io::timeseries_csv;
use ghartree_core::observables::{virial_quantities, Observer};
use ghartree_core::params::{derived_constants, suggest_orders, ModelParameters, ParamSpec, Regime};
use ghartree_core::weighted::{fixture_suite, riesz_window_contrast};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<(bool, String), String>;

fn one_d() -> ModelParameters {
    ModelParameters::new(ParamSpec {
        dim: 1,
        p: 1.8,
        gamma: 0.05,
        mu: 1.0,
        m: 0.55,
        big_m: 6,
        m0: 4,
        b: 0.0,
    })
    .expect("1D parameters")
}

fn three_d(b: f64) -> ModelParameters {
    ModelParameters::new(ParamSpec {
        dim: 3,
        p: 1.9,
        gamma: 0.5,
        mu: 1.0,
        m: 3.0,
        big_m: 13,
        m0: 7,
        b,
    })
    .expect("3D parameters")
}

fn gaussian_1d(amplitude: f64, n: usize) -> Field {
    let grid = Grid::cube(1, 40.0, n).unwrap();
    sample(&grid, &InitialData::Gaussian { amplitude, sigma: 1.0 }).unwrap()
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn parameter_fidelity() -> Outcome {
    let params = one_d();
    let regime = params.report().regime;
    let orders = suggest_orders(1, 1.8, 0.05, 0.55).map_err(err)?;
    Ok((
        regime == Regime::Wellposed && orders == (2, 6),
        format!("regime={} suggest_orders={orders:?}", regime.as_str()),
    ))
}

fn conservation_run() -> Result<(Vec<ghartree_core::ObservableRecord>, Vec<Field>), String> {
    let params = one_d();
    let mut config = IntegratorConfig::new(1e-3, 1.0);
    config.snapshot_times = vec![0.0, 0.25, 0.5, 0.75, 1.0];
    let run = evolve(&gaussian_1d(0.3, 1024), &params, &config);
    if run.halt != HaltReason::Completed {
        return Err(format!("run halted: {}", run.halt));
    }
    Ok((run.records, run.snapshots))
}

fn conservation(records: &[ghartree_core::ObservableRecord]) -> Outcome {
    let first = &records[0];
    let mut dm: f64 = 0.0;
    let mut de: f64 = 0.0;
    let mut dp: f64 = 0.0;
    for r in records {
        dm = dm.max((r.mass - first.mass).abs() / first.mass);
        de = de.max((r.energy - first.energy).abs() / first.energy.abs());
        dp = dp.max((r.momentum[0] - first.momentum[0]).abs());
    }
    Ok((
        dm <= 1e-6 && de <= 1e-5 && dp <= 1e-8,
        format!("mass drift {dm:.2e} (≤1e-6), energy drift {de:.2e} (≤1e-5), momentum drift {dp:.2e} (≤1e-8)"),
    ))
}

fn virial_identity(records: &[ghartree_core::ObservableRecord], snapshots: &[Field]) -> Outcome {
    let max_vtt = records.iter().map(|r| r.variance_tt.abs()).fold(0.0, f64::max);
    let mut worst: f64 = 0.0;
    for w in records.windows(3) {
        let h = w[1].t - w[0].t;
        if ((w[2].t - w[1].t) - h).abs() > 1e-9 {
            continue;
        }
        let numeric = (w[2].variance - 2.0 * w[1].variance + w[0].variance) / (h * h);
        worst = worst.max((w[1].variance_tt - numeric).abs() / max_vtt);
    }
    let params = one_d();
    let mut forms: f64 = 0.0;
    for s in snapshots {
        let v = virial_quantities(s, &params).map_err(err)?;
        forms = forms.max((v.v_tt - v.v_tt_potential_form).abs() / v.v_tt.abs().max(v.v_tt_potential_form.abs()));
    }
    Ok((
        worst <= 1e-3 && forms <= 1e-9 && snapshots.len() == 5,
        format!("formula vs second difference {worst:.2e} (≤1e-3), gradient vs potential form {forms:.2e} (≤1e-9)"),
    ))
}

fn determinism(records: &[ghartree_core::ObservableRecord]) -> Outcome {
    let (again, _) = conservation_run()?;
    let a = timeseries_csv(records).map_err(err)?;
    let b = timeseries_csv(&again).map_err(err)?;
    Ok((a.as_bytes() == b.as_bytes(), format!("{} bytes compared", a.len())))
}

fn splitting_order() -> Outcome {
    let params = one_d();
    let u0 = gaussian_1d(0.5, 1024);
    let run = |dt: f64| {
        let mut config = IntegratorConfig::new(dt, 1.0);
        config.record_every = usize::MAX;
        let r = evolve(&u0, &params, &config);
        (r.halt, r.final_field)
    };
    let dt0 = 0.01;
    let (halt, reference) = run(dt0 / 64.0);
    if halt != HaltReason::Completed {
        return Err(format!("reference run halted: {halt}"));
    }
    let errors: Vec<f64> = (0..3)
        .map(|k| run(dt0 / f64::from(1 << k)).1.sub(&reference).map(|d| d.l2_norm()))
        .collect::<Result<_, _>>()
        .map_err(err)?;
    let r1 = errors[0] / errors[1];
    let r2 = errors[1] / errors[2];
    let ok = (3.5..=4.5).contains(&r1) && (3.5..=4.5).contains(&r2);
    let shown: Vec<String> = errors.iter().map(|e| format!("{e:.2e}")).collect();
    Ok((
        ok,
        format!(
            "errors [{}], contraction {r1:.3} and {r2:.3} (in [3.5, 4.5])",
            shown.join(", ")
        ),
    ))
}

fn chirped_identities() -> Outcome {
    let params = one_d();
    let v0 = gaussian_1d(0.5, 1024);
    let mut worst: f64 = 0.0;
    for b in [-5.0, 0.0, 5.0] {
        worst = worst.max(chirped_observables(&v0, b, &params).map_err(err)?.max_rel_discrepancy);
    }
    Ok((
        worst <= 1e-8,
        format!("max relative discrepancy {worst:.2e} (≤1e-8) over b ∈ {{−5, 0, 5}}"),
    ))
}

fn criterion_consistency() -> Outcome {
    let k_ref = derived_constants(&three_d(0.0)).k_c;
    let f1 = blowup_f(1.0, k_ref).map_err(err)?;
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut agree = 0;
    let (mut rising, mut falling) = (0, 0);
    let total = 100;
    while rising + falling < total {
        let p: f64 = rng.random_range(1.7..1.99);
        let gamma_hi = (3.0 * (p - 1.0) - 2.0)
            .min((5.0 * (p - 1.0) - 2.0) / 2.0)
            .min(3.0 * (3.0 * p - 4.0) / (2.0 * p));
        let gamma = rng.random_range(0.05..0.95) * gamma_hi;
        let m_lo = 2.5f64.max((2.0 * gamma + 3.0) / (4.0 * (p - 1.0)));
        let m_hi = (3.0 - 2.0 * gamma) / (2.0 * (2.0 - p));
        let m = m_lo + rng.random_range(0.05..0.95) * (m_hi - m_lo);
        let (m0, big_m) = suggest_orders(3, p, gamma, m).map_err(err)?;
        let params = ModelParameters::new(ParamSpec {
            dim: 3,
            p,
            gamma,
            mu: 1.0,
            m,
            big_m,
            m0,
            b: 0.0,
        })
        .map_err(err)?;
        if params.report().regime != Regime::Both {
            return Err(format!("sampled tuple outside both regimes: p={p} γ={gamma} m={m}"));
        }
        let dc = derived_constants(&params);
        let omega = dc.omega_c().ok_or("ω_c undefined")?;
        let mass = rng.random_range(0.5..5.0);
        let v0 = rng.random_range(0.5..50.0);
        let x = 10f64.powf(rng.random_range(-1.5..1.0));
        let energy = x * (omega * mass).powi(2) / v0;
        let threshold = 4.0 * SQRT_2 * blowup_f(x, dc.k_c).map_err(err)? * omega * mass;
        let vt0 = threshold * rng.random_range(0.2..1.8);
        let v = blowup_criterion(mass, energy, v0, vt0, &params).map_err(err)?;
        match v.sign_case {
            SignCase::RisingBelowOne => rising += 1,
            SignCase::FallingAtLeastOne => falling += 1,
            SignCase::NoEquivalentForm => continue,
        }
        if v.forms_agree() {
            agree += 1;
        }
    }
    Ok((
        f1 == 0.0 && agree == total,
        format!("F(1, k_c) = {f1}, {agree}/{total} verdicts agree ({rising} rising below one, {falling} falling at least one)"),
    ))
}

fn blowup_demonstration() -> Outcome {
    let grid = Grid::cube(3, 20.0, 64).map_err(err)?;
    let v0 = sample(
        &grid,
        &InitialData::Gaussian {
            amplitude: 0.5,
            sigma: 1.0 / (2.0 * 1.5 * 1.5),
        },
    )
    .map_err(err)?;
    let params = three_d(0.0);
    let ranges = chirp_b_ranges(&v0, &params).map_err(err)?;
    let b1 = ranges.negative_threshold.ok_or("no negative chirp threshold")?;
    let b = 1.025 * b1;
    let u0 = v0.chirp(b);
    let obs = Observer::new(&grid, &params).map_err(err)?;
    let c = obs.conserved(&u0).map_err(err)?;
    let vir = obs.virial(&u0).map_err(err)?;
    let verdict = blowup_criterion(c.mass, c.energy, vir.v, vir.v_t, &params).map_err(err)?;

    let mut config = IntegratorConfig::new(1e-3, 2.0);
    config.record_every = 20;
    config.grad_factor = 5.0;
    let run = evolve(&u0, &params, &config);
    let decreasing = run.records.windows(2).all(|w| w[1].variance < w[0].variance);
    let concave = run.records.iter().all(|r| r.variance_tt < 0.0);
    let last = run.records.last().ok_or("no records")?;
    Ok((
        verdict.satisfied && decreasing && concave && run.halt == HaltReason::BlowupIndicated,
        format!(
            "b = {b:.4} (threshold {b1:.4}), criterion {}, halt {} at t = {:.3}, V {:.3} → {:.3}, V decreasing {decreasing}, V_tt < 0 {concave}",
            if verdict.satisfied { "satisfied" } else { "not satisfied" },
            run.halt,
            last.t,
            run.records[0].variance,
            last.variance,
        ),
    ))
}

/// L² gap between the mapped nonautonomous solution and the direct one at `t`.
fn two_route_gap(n: usize, dt: f64) -> Result<f64, String> {
    let (b, t) = (4.0, 0.5);
    let tau = t / (1.0 + b * t);
    let params = one_d();
    let v0 = gaussian_1d(0.5, n);

    let direct = evolve(&v0.chirp(b), &params, &{
        let mut c = IntegratorConfig::new(dt, t);
        c.record_every = usize::MAX;
        c
    });
    let mut config = IntegratorConfig::new(dt, tau);
    config.record_every = usize::MAX;
    config.nonautonomous = Some(b);
    let mapped = evolve(&v0, &params.with_b(b).map_err(err)?, &config);
    for (name, r) in [("direct", &direct), ("mapped", &mapped)] {
        if r.halt != HaltReason::Completed {
            return Err(format!("{name} route halted: {}", r.halt));
        }
    }
    let u = pseudo_conformal_map(&mapped.final_field, tau, b).map_err(err)?;
    Ok(u.sub(&direct.final_field).map_err(err)?.l2_norm())
}

fn scattering() -> Result<(bool, String), String> {
    let b = 4.0;
    let params = three_d(b);
    let grid = Grid::cube(3, 16.0, 64).map_err(err)?;
    let v0 = sample(
        &grid,
        &InitialData::Gaussian {
            amplitude: 0.5,
            sigma: 1.0,
        },
    )
    .map_err(err)?;
    let taus: Vec<f64> = (0..=6).map(|i| 0.018 * i as f64).collect();
    let mut config = IntegratorConfig::new(1e-3, 1.0 / b);
    config.record_every = usize::MAX;
    config.nonautonomous = Some(b);
    config.snapshot_times = taus.clone();
    let run = evolve(&v0, &params, &config);
    if run.halt != HaltReason::Completed || run.snapshots.len() != taus.len() {
        return Err(format!("nonautonomous run halted: {}", run.halt));
    }
    let u_plus = scattering_state(&run.final_field, b).map_err(err)?;
    let mut residuals = Vec::new();
    let mut decay = Vec::new();
    for (v, &tau) in run.snapshots.iter().zip(&taus) {
        let u = pseudo_conformal_map(v, tau, b).map_err(err)?;
        let (r, d) = scattering_residual(&u, u.t(), &u_plus, 1.0).map_err(err)?;
        residuals.push(r);
        decay.push(d);
    }
    let monotone = residuals.windows(2).all(|w| w[1] < w[0]);
    let bounded = decay.iter().all(|d| *d <= 2.0 * decay[0]);
    Ok((
        monotone && bounded,
        format!(
            "H¹ residual {:.2e} → {:.2e} (monotone {monotone}), max (1+t)^{{3/2}}‖u‖∞ / initial {:.3} (≤2)",
            residuals[0],
            residuals[residuals.len() - 1],
            decay.iter().fold(0.0f64, |a, d| a.max(*d)) / decay[0],
        ),
    ))
}

fn pseudo_conformal() -> Outcome {
    let coarse = two_route_gap(1024, 1.25e-4)?;
    let fine = two_route_gap(2048, 6.25e-5)?;
    let (scatter_ok, scatter_msg) = scattering()?;
    Ok((
        coarse <= 1e-4 && fine < coarse && scatter_ok,
        format!("two-route L² gap {coarse:.2e} (≤1e-4) → {fine:.2e} refined; {scatter_msg}"),
    ))
}

fn weighted_suite() -> Outcome {
    let base = fixture_suite(0, 7).map_err(err)?;
    let fine = fixture_suite(1, 7).map_err(err)?;
    let mut worst_drift: f64 = 0.0;
    let mut unbounded = Vec::new();
    for (a, b) in base.iter().zip(&fine) {
        if !(a.ratio_bounded && b.ratio_bounded) {
            unbounded.push(a.id.clone());
        }
        worst_drift = worst_drift.max((b.max_ratio - a.max_ratio).abs() / a.max_ratio);
    }
    let (inside, outside, _) = riesz_window_contrast(0, 7).map_err(err)?;
    let contrast = outside / inside;
    Ok((
        unbounded.is_empty() && worst_drift <= 0.2 && contrast >= 3.0,
        format!(
            "{} reports, unbounded {unbounded:?}, refinement drift {worst_drift:.2e} (≤0.2), window contrast {contrast:.2} (≥3)",
            base.len()
        ),
    ))
}

fn main() {
    let mut failures = 0;
    let mut report = |id: u32, name: &str, start: Instant, outcome: Outcome| {
        let secs = start.elapsed().as_secs_f64();
        let (ok, detail) = match outcome {
            Ok(v) => v,
            Err(e) => (false, format!("error: {e}")),
        };
        if !ok {
            failures += 1;
        }
        println!(
            "[{}] criterion {id} {name}: {detail} ({secs:.1} s)",
            if ok { "PASS" } else { "FAIL" }
        );
    };

    let t = Instant::now();
    report(1, "parameter fidelity", t, parameter_fidelity());

    let t = Instant::now();
    match conservation_run() {
        Ok((records, snapshots)) => {
            report(2, "conservation", t, conservation(&records));
            let t = Instant::now();
            report(3, "virial identity", t, virial_identity(&records, &snapshots));
            let t = Instant::now();
            report(10, "determinism", t, determinism(&records));
        }
        Err(e) => {
            for (id, name) in [(2, "conservation"), (3, "virial identity"), (10, "determinism")] {
                report(id, name, t, Err(e.clone()));
            }
        }
    }

    let t = Instant::now();
    report(4, "splitting order", t, splitting_order());
    let t = Instant::now();
    report(5, "chirped identities", t, chirped_identities());
    let t = Instant::now();
    report(6, "criterion consistency", t, criterion_consistency());
    let t = Instant::now();
    report(7, "blow-up demonstration", t, blowup_demonstration());
    let t = Instant::now();
    report(8, "pseudo-conformal consistency", t, pseudo_conformal());
    let t = Instant::now();
    report(9, "weighted-inequality suite", t, weighted_suite());

    if failures > 0 {
        println!("{failures} criteria failed");
        std::process::exit(1);
    }
}
