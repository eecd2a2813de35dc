//! Strang-split time integration with an exact nonlinear phase substep.

use std::fmt;

use num_complex::Complex64;

use crate::error::{domain, Error, Result};
use crate::fft;
use crate::grid::Field;
use crate::observables::{ObservableRecord, Observer};
use crate::params::ModelParameters;
use crate::spectral::RieszKernel;

/// Integration settings.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegratorConfig {
    pub dt: f64,
    pub t_end: f64,
    /// Steps between observable records (the last step is always recorded).
    pub record_every: usize,
    /// `Some(b)` integrates `i v_t + Δv + μ(1−bt)^{N(p−1)−2−γ} N(v) = 0`.
    pub nonautonomous: Option<f64>,
    /// Halt as blow-up once `‖∇u‖²` exceeds its initial value by this factor.
    pub grad_factor: f64,
    /// Halt as unresolved once the spectral tail fraction exceeds this.
    pub tail_threshold: f64,
    /// `ε` in `(|u|²+ε²)^{(p−2)/2}`; zero evaluates `|u|^{p−2}u` exactly with `0 ↦ 0`.
    pub modulus_floor: f64,
    /// Times at which the state is kept (first step reaching each time).
    pub snapshot_times: Vec<f64>,
}

impl IntegratorConfig {
    pub fn new(dt: f64, t_end: f64) -> Self {
        Self {
            dt,
            t_end,
            record_every: 1,
            nonautonomous: None,
            grad_factor: 1e3,
            tail_threshold: 0.1,
            modulus_floor: 0.0,
            snapshot_times: Vec::new(),
        }
    }

    pub fn validate(&self, params: &ModelParameters) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(domain(format!("dt = {} must be positive", self.dt)));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(domain(format!("t_end = {} must be nonnegative", self.t_end)));
        }
        if self.record_every == 0 {
            return Err(domain("record_every must be at least 1"));
        }
        if !(self.grad_factor > 1.0) || !(self.tail_threshold > 0.0 && self.tail_threshold <= 1.0) {
            return Err(domain(
                "halt thresholds need grad_factor > 1 and 0 < tail_threshold ≤ 1",
            ));
        }
        if !(self.modulus_floor >= 0.0) {
            return Err(domain("modulus floor must be nonnegative"));
        }
        if let Some(b) = self.nonautonomous {
            if !b.is_finite() {
                return Err(domain("nonautonomous b must be finite"));
            }
            if b > 0.0 {
                let horizon = 1.0 / b;
                if self.t_end > horizon * (1.0 + 1e-12) {
                    return Err(domain(format!(
                        "nonautonomous run needs t_end ≤ 1/b = {horizon}, got {}",
                        self.t_end
                    )));
                }
                let e = params.nonautonomous_exponent();
                if e <= -1.0 && self.t_end >= horizon * (1.0 - 1e-12) {
                    return Err(domain(format!(
                        "coefficient (1−bt)^{e} is not integrable up to t = 1/b"
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HaltReason {
    Completed,
    BlowupIndicated,
    ResolutionLost,
    NonFinite,
}

impl HaltReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            HaltReason::Completed => "completed",
            HaltReason::BlowupIndicated => "blowup-indicated",
            HaltReason::ResolutionLost => "resolution-lost",
            HaltReason::NonFinite => "non-finite",
        }
    }
}

impl fmt::Display for HaltReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HaltDecision {
    Continue,
    Halt(HaltReason),
}

#[derive(Debug, Clone)]
pub struct TrajectoryResult {
    pub params: ModelParameters,
    pub config: IntegratorConfig,
    pub records: Vec<ObservableRecord>,
    pub final_field: Field,
    pub halt: HaltReason,
    pub snapshots: Vec<Field>,
    pub steps: usize,
}

/// `∫_{t0}^{t0+h} (1−bτ)^e dτ`, written to stay accurate for small `bh`.
pub fn coefficient_integral(b: f64, e: f64, t0: f64, h: f64) -> f64 {
    if b == 0.0 || h == 0.0 {
        return h;
    }
    let base = 1.0 - b * t0;
    // Rounding can push a step ending at 1/b just past it.
    let step = (-b * h / base).max(-1.0).ln_1p();
    if e == -1.0 {
        return -step / b;
    }
    -base.powf(e + 1.0) * ((e + 1.0) * step).exp_m1() / (b * (e + 1.0))
}

fn density_and_weight(u: &[Complex64], p: f64, eps: f64) -> (Vec<f64>, Vec<f64>) {
    let mut density = Vec::with_capacity(u.len());
    let mut factor = Vec::with_capacity(u.len());
    for z in u {
        let a = z.norm();
        density.push(a.powf(p));
        factor.push(if eps > 0.0 {
            (a * a + eps * eps).powf((p - 2.0) / 2.0)
        } else if a > 0.0 {
            a.powf(p - 2.0)
        } else {
            0.0
        });
    }
    (density, factor)
}

/// `(|x|^{−(N−γ)} ∗ |u|^p)|u|^{p−2}u` with `|u|^{p−2}u := 0` where `u = 0`.
pub fn hartree_nonlinearity(field: &Field, params: &ModelParameters) -> Result<Field> {
    hartree_nonlinearity_regularized(field, params, 0.0)
}

/// As [`hartree_nonlinearity`] with `(|u|²+ε²)^{(p−2)/2}u` when `ε > 0`.
pub fn hartree_nonlinearity_regularized(field: &Field, params: &ModelParameters, eps: f64) -> Result<Field> {
    let kernel = RieszKernel::new(field.grid(), params.gamma(), params.zero_mode())?;
    let (density, factor) = density_and_weight(field.values(), params.p(), eps);
    let w = kernel.apply_real(&density);
    let values = field
        .values()
        .iter()
        .zip(w.iter().zip(&factor))
        .map(|(z, (w, f))| z * (w * f))
        .collect();
    field.with_values(values)
}

/// Reusable stepping state for one grid and parameter set.
pub struct Stepper {
    kernel: RieszKernel,
    k_sq: Vec<f64>,
    p: f64,
    mu: f64,
    exponent: f64,
    b: Option<f64>,
    eps: f64,
    cache: Vec<(u64, Vec<Complex64>)>,
}

impl Stepper {
    pub fn new(field: &Field, params: &ModelParameters, config: &IntegratorConfig) -> Result<Self> {
        if field.grid().dim() != params.dim() {
            return Err(domain("grid dimension differs from N"));
        }
        Ok(Self {
            kernel: RieszKernel::new(field.grid(), params.gamma(), params.zero_mode())?,
            k_sq: field.grid().wavenumber_sq(),
            p: params.p(),
            mu: params.mu(),
            exponent: params.nonautonomous_exponent(),
            b: config.nonautonomous,
            eps: config.modulus_floor,
            cache: Vec::new(),
        })
    }

    fn coefficient(&self, t0: f64, h: f64) -> f64 {
        match self.b {
            Some(b) => coefficient_integral(b, self.exponent, t0, h),
            None => h,
        }
    }

    /// Exact flow of `u_t = iμ c(t) W(|u|) u` over `[t0, t0+h]`.
    fn phase(&self, u: &mut [Complex64], t0: f64, h: f64) {
        let c = self.mu * self.coefficient(t0, h);
        if c == 0.0 {
            return;
        }
        let (density, factor) = density_and_weight(u, self.p, self.eps);
        let w = self.kernel.apply_real(&density);
        for (z, (w, f)) in u.iter_mut().zip(w.iter().zip(&factor)) {
            *z *= Complex64::from_polar(1.0, c * w * f);
        }
    }

    fn linear(&mut self, grid: &crate::grid::Grid, u: &mut [Complex64], h: f64) {
        let key = h.to_bits();
        let pos = match self.cache.iter().position(|(k, _)| *k == key) {
            Some(i) => i,
            None => {
                if self.cache.len() >= 4 {
                    self.cache.remove(0);
                }
                let symbol = self
                    .k_sq
                    .iter()
                    .map(|&k2| Complex64::from_polar(1.0, -h * k2))
                    .collect();
                self.cache.push((key, symbol));
                self.cache.len() - 1
            }
        };
        fft::forward(grid, u);
        for (z, s) in u.iter_mut().zip(&self.cache[pos].1) {
            *z *= s;
        }
        fft::inverse(grid, u);
    }

    /// One Strang step from time `t` to `t + h` (any nonzero finite `h`).
    pub fn step(&mut self, field: &Field, t: f64, h: f64) -> Result<Field> {
        if field.grid() != self.kernel.grid() {
            return Err(Error::GridMismatch);
        }
        let mut u = field.values().to_vec();
        self.phase(&mut u, t, h / 2.0);
        self.linear(field.grid(), &mut u, h);
        self.phase(&mut u, t + h / 2.0, h / 2.0);
        if u.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::NonFinite(format!("state after step at t = {t}")));
        }
        Ok(Field::from_parts(field.grid().clone(), u, t + h))
    }
}

/// Half nonlinear phase, free flow over `dt`, half nonlinear phase.
pub fn strang_step(
    field: &Field,
    t: f64,
    dt: f64,
    params: &ModelParameters,
    config: &IntegratorConfig,
) -> Result<Field> {
    if !(dt.is_finite() && dt != 0.0) {
        return Err(domain("step size must be finite and nonzero"));
    }
    Stepper::new(field, params, config)?.step(field, t, dt)
}

/// Compares a record against the initial one.
pub fn blowup_monitor(now: &ObservableRecord, initial: &ObservableRecord, config: &IntegratorConfig) -> HaltDecision {
    if !now.is_finite() {
        return HaltDecision::Halt(HaltReason::NonFinite);
    }
    if now.grad_l2_sq > config.grad_factor * initial.grad_l2_sq {
        return HaltDecision::Halt(HaltReason::BlowupIndicated);
    }
    if now.spectral_tail_fraction > config.tail_threshold {
        return HaltDecision::Halt(HaltReason::ResolutionLost);
    }
    HaltDecision::Continue
}

/// Integrates from `field.t()` to `field.t() + t_end`, recording observables.
///
/// Failures never escape: a config error or non-finite state ends the
/// run with halt reason `non-finite` and the last finite state.
pub fn evolve(field: &Field, params: &ModelParameters, config: &IntegratorConfig) -> TrajectoryResult {
    let mut result = TrajectoryResult {
        params: params.clone(),
        config: config.clone(),
        records: Vec::new(),
        final_field: field.clone(),
        halt: HaltReason::Completed,
        snapshots: Vec::new(),
        steps: 0,
    };
    let setup = config
        .validate(params)
        .and_then(|_| Observer::new(field.grid(), params))
        .and_then(|obs| Stepper::new(field, params, config).map(|s| (obs, s)));
    let (observer, mut stepper) = match setup {
        Ok(v) => v,
        Err(_) => {
            result.halt = HaltReason::NonFinite;
            return result;
        }
    };
    let initial = match observer.record(field) {
        Ok(r) => r,
        Err(_) => {
            result.halt = HaltReason::NonFinite;
            return result;
        }
    };
    result.records.push(initial.clone());
    let t0 = field.t();
    let mut pending: Vec<f64> = config.snapshot_times.clone();
    pending.sort_by(f64::total_cmp);
    pending.retain(|&ts| {
        if ts <= t0 + 1e-12 {
            result.snapshots.push(field.clone());
            false
        } else {
            true
        }
    });

    let n_steps = if config.t_end == 0.0 {
        0
    } else {
        (config.t_end / config.dt - 1e-9).ceil().max(1.0) as usize
    };
    let mut u = field.clone();
    let mut t = t0;
    for step in 1..=n_steps {
        let t_next = if step == n_steps {
            t0 + config.t_end
        } else {
            t0 + step as f64 * config.dt
        };
        let next = match stepper.step(&u, t, t_next - t) {
            Ok(v) => v.with_time(t_next),
            Err(_) => {
                result.halt = HaltReason::NonFinite;
                break;
            }
        };
        u = next;
        t = t_next;
        result.steps = step;
        while let Some(&ts) = pending.first() {
            if t >= ts - 1e-12 {
                result.snapshots.push(u.clone());
                pending.remove(0);
            } else {
                break;
            }
        }
        if step % config.record_every == 0 || step == n_steps {
            let rec = match observer.record(&u) {
                Ok(r) => r,
                Err(_) => {
                    result.halt = HaltReason::NonFinite;
                    break;
                }
            };
            let decision = blowup_monitor(&rec, &initial, config);
            result.records.push(rec);
            if let HaltDecision::Halt(reason) = decision {
                result.halt = reason;
                break;
            }
        }
    }
    result.final_field = u;
    result
}
