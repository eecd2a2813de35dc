//! Virial blow-up criterion, chirped-data identities, chirp ranges and the
//! pseudo-conformal scattering construction.

use std::f64::consts::SQRT_2;

use crate::error::{domain, Result};
use crate::grid::Field;
use crate::observables::Observer;
use crate::params::{derived_constants, validate_blowup_regime, ModelParameters, Regime};
use crate::spectral::{dilate, free_propagate, sobolev_norm};

/// `g(x) = 1/(k x^k) + x − (1+k)/k`, rearranged as `(x^{−k}−1)/k + (x−1)`
/// so that `g(1) = 0` exactly.
pub fn f_radicand(x: f64, k: f64) -> f64 {
    (-k * x.ln()).exp_m1() / k + (x - 1.0)
}

/// Threshold function: `+√g(x)` for `0 < x < 1`, `−√g(x)` for `x ≥ 1`.
pub fn blowup_f(x: f64, k: f64) -> Result<f64> {
    if !(x > 0.0 && x.is_finite()) || !(k > 0.0 && k.is_finite()) {
        return Err(domain(format!("F needs x > 0 and k_c > 0, got x = {x}, k_c = {k}")));
    }
    let mut g = f_radicand(x, k);
    if g < 0.0 {
        if g < -1e-14 {
            return Err(domain(format!("F radicand negative: g({x}) = {g}")));
        }
        g = 0.0;
    }
    Ok(if x < 1.0 || g == 0.0 { g.sqrt() } else { -g.sqrt() })
}

/// Which polynomial restatement of the criterion applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignCase {
    /// `V_t(0) > 0`, `x < 1`: `P < R`.
    RisingBelowOne,
    /// `V_t(0) < 0`, `x ≥ 1`: `P > R`.
    FallingAtLeastOne,
    /// Any other sign combination; the verdict comes from the F-form alone.
    NoEquivalentForm,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlowupVerdict {
    pub mass: f64,
    pub energy: f64,
    pub v0: f64,
    pub vt0: f64,
    pub k_c: f64,
    pub omega_c: f64,
    /// `E V(0) / (ω_c M)²`.
    pub x: f64,
    /// `V_t(0) / (ω_c M)`.
    pub lhs: f64,
    /// `4√2 F(x)`.
    pub rhs: f64,
    pub satisfied: bool,
    pub sign_case: SignCase,
    /// Verdict of the applicable polynomial form, if any.
    pub polynomial_verdict: Option<bool>,
}

impl BlowupVerdict {
    pub fn forms_agree(&self) -> bool {
        self.polynomial_verdict.is_none_or(|v| v == self.satisfied)
    }

    pub fn to_key_values(&self) -> String {
        let case = match self.sign_case {
            SignCase::RisingBelowOne => "rising-below-one",
            SignCase::FallingAtLeastOne => "falling-at-least-one",
            SignCase::NoEquivalentForm => "no-equivalent-form",
        };
        let poly = match self.polynomial_verdict {
            Some(v) => v.to_string(),
            None => "none".into(),
        };
        format!(
            "verdict = {}\nmass = {:e}\nenergy = {:e}\nvariance = {:e}\nvariance_t = {:e}\nk_c = {:e}\nomega_c = {:e}\nx = {:e}\nlhs = {:e}\nrhs = {:e}\nsign_case = {case}\npolynomial_verdict = {poly}\n",
            if self.satisfied { "satisfied" } else { "not-satisfied" },
            self.mass,
            self.energy,
            self.v0,
            self.vt0,
            self.k_c,
            self.omega_c,
            self.x,
            self.lhs,
            self.rhs,
        )
    }
}

/// Polynomial left and right sides `(P, R)`:
/// `P = (k V_t² − 32kEV + 32(1+k)(ωM)²)/(k(ωM)²)`, `R = 32(ωM)^{2k}/(k(EV)^k)`.
pub fn polynomial_sides(mass: f64, energy: f64, v0: f64, vt0: f64, k: f64, omega: f64) -> (f64, f64) {
    let w = (omega * mass).powi(2);
    let ev = energy * v0;
    let p = (k * vt0 * vt0 - 32.0 * k * ev + 32.0 * (1.0 + k) * w) / (k * w);
    let r = 32.0 * w.powf(k) / (k * ev.powf(k));
    (p, r)
}

fn regime_error(params: &ModelParameters) -> Option<String> {
    let report = validate_blowup_regime(params);
    if report.regime == Regime::Blowup {
        None
    } else {
        let failed: Vec<&str> = report.checks.iter().filter(|c| !c.satisfied).map(|c| c.id).collect();
        Some(format!("parameters outside the blow-up regime: {}", failed.join("; ")))
    }
}

/// Evaluates `V_t(0)/(ω_c M) < 4√2 F(E V(0)/(ω_c M)²)`.
pub fn blowup_criterion(mass: f64, energy: f64, v0: f64, vt0: f64, params: &ModelParameters) -> Result<BlowupVerdict> {
    if let Some(msg) = regime_error(params) {
        return Err(domain(msg));
    }
    let mut problems = Vec::new();
    if !(energy > 0.0) {
        problems.push(format!("energy > 0 required, got {energy}"));
    }
    if !(mass > 0.0) {
        problems.push(format!("mass > 0 required, got {mass}"));
    }
    if !(v0 > 0.0) {
        problems.push(format!("V(0) > 0 required, got {v0}"));
    }
    if !vt0.is_finite() {
        problems.push("V_t(0) must be finite".into());
    }
    if !problems.is_empty() {
        return Err(domain(problems.join("; ")));
    }
    let dc = derived_constants(params);
    let omega = dc
        .omega_c()
        .ok_or_else(|| domain("ω_c² is undefined or nonpositive for these parameters"))?;
    let k = dc.k_c;
    let wm = omega * mass;
    let x = energy * v0 / (wm * wm);
    let lhs = vt0 / wm;
    let rhs = 4.0 * SQRT_2 * blowup_f(x, k)?;
    let satisfied = lhs < rhs;
    let (sign_case, polynomial_verdict) = if vt0 > 0.0 && x < 1.0 {
        let (p, r) = polynomial_sides(mass, energy, v0, vt0, k, omega);
        (SignCase::RisingBelowOne, Some(p < r))
    } else if vt0 < 0.0 && x >= 1.0 {
        let (p, r) = polynomial_sides(mass, energy, v0, vt0, k, omega);
        (SignCase::FallingAtLeastOne, Some(p > r))
    } else {
        (SignCase::NoEquivalentForm, None)
    };
    Ok(BlowupVerdict {
        mass,
        energy,
        v0,
        vt0,
        k_c: k,
        omega_c: omega,
        x,
        lhs,
        rhs,
        satisfied,
        sign_case,
        polynomial_verdict,
    })
}

/// Initial observables of `u₀ = e^{ib|x|²/4}v₀` by the closed forms, and
/// the same quantities evaluated directly on the chirped field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChirpedObservables {
    pub v0: f64,
    pub vt0: f64,
    pub energy: f64,
    pub direct_v0: f64,
    pub direct_vt0: f64,
    pub direct_energy: f64,
    /// Largest relative gap between formula and direct values. Gaps in
    /// `V_t(0)` are measured against `max(|V_t|, 10⁻¹²·V(0))` so that an
    /// exactly vanishing rate does not divide by round-off.
    pub max_rel_discrepancy: f64,
}

/// `Im ∫ v̄ (x·∇v)`.
pub fn angular_term(field: &Field, params: &ModelParameters) -> Result<f64> {
    Ok(Observer::new(field.grid(), params)?.virial(field)?.v_t / 4.0)
}

pub fn chirped_observables(v0: &Field, b: f64, params: &ModelParameters) -> Result<ChirpedObservables> {
    let obs = Observer::new(v0.grid(), params)?;
    let base = obs.virial(v0)?;
    let e_v = obs.conserved(v0)?.energy;
    let a = base.v_t / 4.0;
    let x2 = base.v;
    let formula_vt = 4.0 * a + 2.0 * b * x2;
    let formula_e = e_v + b / 2.0 * a + b * b / 8.0 * x2;

    let u0 = v0.chirp(b);
    let direct = obs.virial(&u0)?;
    let direct_e = obs.conserved(&u0)?.energy;
    let rel = |f: f64, d: f64, floor: f64| (f - d).abs() / f.abs().max(d.abs()).max(floor);
    let max_rel_discrepancy = rel(x2, direct.v, f64::MIN_POSITIVE)
        .max(rel(formula_vt, direct.v_t, 1e-12 * x2))
        .max(rel(formula_e, direct_e, f64::MIN_POSITIVE));
    Ok(ChirpedObservables {
        v0: x2,
        vt0: formula_vt,
        energy: formula_e,
        direct_v0: direct.v,
        direct_vt0: direct.v_t,
        direct_energy: direct_e,
        max_rel_discrepancy,
    })
}

/// Chirp parameters for which real data `v₀` is predicted to blow up.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChirpRanges {
    /// `(b₀, b₁)` with `b > 0`, or `None` if the hypotheses fail.
    pub positive: Option<(f64, f64)>,
    /// `b₁ ≤ 0` such that every `b ≤ b₁` satisfies the criterion.
    pub negative_threshold: Option<f64>,
    pub mass: f64,
    pub energy_v: f64,
    /// `‖x v₀‖²`.
    pub x_sq_norm: f64,
    pub k_c: f64,
    pub omega_c: f64,
}

impl ChirpRanges {
    pub fn to_key_values(&self) -> String {
        let pos = match self.positive {
            Some((a, b)) => format!("positive.b0 = {a:e}\npositive.b1 = {b:e}\n"),
            None => "positive = empty\n".into(),
        };
        let neg = match self.negative_threshold {
            Some(b) => format!("negative.b1 = {b:e}\n"),
            None => "negative = none\n".into(),
        };
        format!(
            "mass = {:e}\nenergy_v0 = {:e}\nx_sq_norm = {:e}\nk_c = {:e}\nomega_c = {:e}\n{pos}{neg}",
            self.mass, self.energy_v, self.x_sq_norm, self.k_c, self.omega_c
        )
    }
}

/// Verdict for `e^{ib|x|²/4}v₀` from the scalar identities of real data.
fn chirped_verdict(mass: f64, e_v: f64, x2: f64, b: f64, params: &ModelParameters) -> bool {
    let energy = e_v + b * b / 8.0 * x2;
    if !(energy > 0.0) {
        return false;
    }
    blowup_criterion(mass, energy, x2, 2.0 * b * x2, params)
        .map(|v| v.satisfied)
        .unwrap_or(false)
}

/// Positive-chirp interval from the two explicit upper bounds and the
/// energy-positivity lower bound, and the negative-chirp threshold by
/// bisection against [`blowup_criterion`].
pub fn chirp_b_ranges(v0: &Field, params: &ModelParameters) -> Result<ChirpRanges> {
    if let Some(msg) = regime_error(params) {
        return Err(domain(msg));
    }
    let obs = Observer::new(v0.grid(), params)?;
    let vir = obs.virial(v0)?;
    let cons = obs.conserved(v0)?;
    let grad_sq = 2.0 * (cons.energy + params.mu() / (2.0 * params.p()) * obs.potential_term(v0)?);
    let a = vir.v_t / 4.0;
    let scale = (vir.v * grad_sq).sqrt();
    if a.abs() > 1e-9 * scale.max(f64::MIN_POSITIVE) {
        return Err(domain(format!(
            "v0 violates the vanishing angular-term hypothesis Im ∫ v̄₀ x·∇v₀ = 0 (got {a:e})"
        )));
    }
    let dc = derived_constants(params);
    let omega = dc
        .omega_c()
        .ok_or_else(|| domain("ω_c² is undefined or nonpositive for these parameters"))?;
    let k = dc.k_c;
    let (mass, e_v, x2) = (cons.mass, cons.energy, vir.v);
    let w = (omega * mass).powi(2);

    let denom = (1.0 + k) * w - k * e_v * x2;
    let positive = if e_v * x2 < w && denom > 0.0 {
        let q = (w.powf(k + 1.0) / denom).powf(1.0 / k);
        if e_v * x2 < q {
            let b1a = 2.0 * SQRT_2 / x2 * (w - e_v * x2).sqrt();
            let b1b = (8.0 * q / (x2 * x2) - 8.0 * e_v / x2).sqrt();
            let b1 = b1a.min(b1b);
            let b0 = if e_v > 0.0 { 0.0 } else { (-8.0 * e_v / x2).sqrt() };
            (b1 > b0).then_some((b0, b1))
        } else {
            None
        }
    } else {
        None
    };

    let negative_threshold = if e_v * x2 / w < (1.0 + k) / k {
        let sat = |b: f64| chirped_verdict(mass, e_v, x2, b, params);
        let mut lo = -(8.0 * e_v.abs() / x2).sqrt().max(1e-3);
        let mut found = sat(lo);
        while !found && lo > -1e12 {
            lo *= 2.0;
            found = sat(lo);
        }
        if found {
            let mut hi = 0.0;
            for _ in 0..400 {
                let mid = 0.5 * (lo + hi);
                if mid == lo || mid == hi || (hi - lo) <= 1e-13 * lo.abs() {
                    break;
                }
                if sat(mid) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            Some(lo)
        } else {
            None
        }
    } else {
        None
    };

    Ok(ChirpRanges {
        positive,
        negative_threshold,
        mass,
        energy_v: e_v,
        x_sq_norm: x2,
        k_c: k,
        omega_c: omega,
    })
}

/// `u(x,t) = (1+bt)^{−N/2} e^{ib|x|²/(4(1+bt))} v(x/(1+bt), τ)` with
/// `t = τ/(1−bτ)`, so that `τ = t/(1+bt)`.
pub fn pseudo_conformal_map(v: &Field, tau: f64, b: f64) -> Result<Field> {
    let inv = 1.0 - b * tau;
    if !(inv > 0.0) || !tau.is_finite() || !b.is_finite() {
        return Err(domain(format!(
            "pseudo-conformal map needs 1+bt > 0 (τ = {tau}, b = {b})"
        )));
    }
    let t = tau / inv;
    let a = 1.0 / inv;
    let dim = v.grid().dim() as f64;
    let dilated = dilate(v, a)?;
    let amplitude = a.powf(-dim / 2.0);
    let r2 = v.grid().radius_sq();
    let values = dilated
        .values()
        .iter()
        .zip(&r2)
        .map(|(z, r)| z * num_complex::Complex64::from_polar(amplitude, b * r / (4.0 * a)))
        .collect();
    Ok(v.with_values(values)?.with_time(t))
}

/// `u₊ = e^{ib|x|²/4} e^{−(i/b)Δ} v(1/b)`.
pub fn scattering_state(v_final: &Field, b: f64) -> Result<Field> {
    if !(b > 0.0 && b.is_finite()) {
        return Err(domain(format!("scattering state needs b > 0, got {b}")));
    }
    Ok(free_propagate(v_final, -1.0 / b)?.chirp(b))
}

/// `(‖J^s(e^{−itΔ}u(t) − u₊)‖_{L²}, (1+t)^{N/2} sup|u(t)|)`.
pub fn scattering_residual(u_t: &Field, t: f64, u_plus: &Field, s: f64) -> Result<(f64, f64)> {
    if !(s >= 0.0) {
        return Err(domain(format!("Sobolev order s = {s} must be nonnegative")));
    }
    u_t.same_grid(u_plus)?;
    let back = free_propagate(u_t, -t)?;
    let diff = back.sub(u_plus)?;
    let dim = u_t.grid().dim() as f64;
    Ok((sobolev_norm(&diff, s), (1.0 + t).powf(dim / 2.0) * u_t.sup_norm()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f_values() {
        assert_eq!(blowup_f(1.0, 0.1).unwrap(), 0.0);
        assert!((blowup_f(0.01, 0.1).unwrap() - 2.204).abs() < 1e-3);
        assert!((blowup_f(2.0, 0.1).unwrap() + 0.574).abs() < 1e-3);
        assert!(blowup_f(0.0, 0.1).is_err());
    }
}
