//! Model parameters, admissibility conditions and the contraction estimates.

use std::fmt;
use std::str::FromStr;

use crate::error::{domain, Error, Result};
use crate::spectral::ZeroMode;

/// Which quadratic chirp the parameter `b` refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ChirpConvention {
    /// `e^{ib|x|²/4}`, used by every identity in this crate.
    #[default]
    Quarter,
    /// `e^{ib|x|²/2}`; mapped to the quarter convention as `b ↦ 2b`.
    Half,
}

impl ChirpConvention {
    /// The quarter-convention parameter equivalent to `b` in this convention.
    pub fn to_quarter(self, b: f64) -> f64 {
        match self {
            ChirpConvention::Quarter => b,
            ChirpConvention::Half => 2.0 * b,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            ChirpConvention::Quarter => "quarter",
            ChirpConvention::Half => "half",
        }
    }
}

impl fmt::Display for ChirpConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ChirpConvention::Quarter => "quarter (exp(i b |x|^2 / 4))",
            ChirpConvention::Half => "half (exp(i b |x|^2 / 2), run as b -> 2b)",
        })
    }
}

impl FromStr for ChirpConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quarter" => Ok(Self::Quarter),
            "half" => Ok(Self::Half),
            other => Err(domain(format!(
                "unknown chirp convention '{other}' (expected quarter or half)"
            ))),
        }
    }
}

/// Outcome of one inequality check.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionCheck {
    /// Stable identifier such as `"p < 2"` or `"m < (N-2γ)/(2(2-p))"`.
    pub id: &'static str,
    pub satisfied: bool,
    pub lhs: f64,
    pub rhs: f64,
}

impl ConditionCheck {
    fn less(id: &'static str, lhs: f64, rhs: f64) -> Self {
        Self {
            id,
            satisfied: lhs < rhs,
            lhs,
            rhs,
        }
    }

    pub fn message(&self) -> String {
        format!(
            "violated: {} (lhs = {}, rhs = {})",
            self.id,
            fmt_num(self.lhs),
            fmt_num(self.rhs)
        )
    }
}

fn fmt_num(v: f64) -> String {
    format!("{}", (v * 1e12).round() / 1e12)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Wellposed,
    Blowup,
    Both,
    Neither,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::Wellposed => "wellposed",
            Regime::Blowup => "blowup",
            Regime::Both => "both",
            Regime::Neither => "neither",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Every admissibility inequality with its numeric endpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmissibilityReport {
    pub regime: Regime,
    pub checks: Vec<ConditionCheck>,
}

impl AdmissibilityReport {
    pub fn violations(&self) -> Vec<String> {
        self.checks
            .iter()
            .filter(|c| !c.satisfied)
            .map(ConditionCheck::message)
            .collect()
    }

    pub fn all_satisfied(&self) -> bool {
        self.checks.iter().all(|c| c.satisfied)
    }

    pub fn check(&self, id: &str) -> Option<&ConditionCheck> {
        self.checks.iter().find(|c| c.id == id)
    }

    /// Line-oriented table, one row per condition.
    pub fn to_table(&self) -> String {
        let width = self.checks.iter().map(|c| c.id.chars().count()).max().unwrap_or(0);
        let mut out = format!("regime: {}\n", self.regime);
        for c in &self.checks {
            let pad = width - c.id.chars().count();
            out.push_str(&format!(
                "{}{}  {}  lhs={:<22} rhs={}\n",
                c.id,
                " ".repeat(pad),
                if c.satisfied { "ok  " } else { "FAIL" },
                fmt_num(c.lhs),
                fmt_num(c.rhs)
            ));
        }
        out
    }

    /// `key = value` lines; keys are `check.<index>.<field>`.
    pub fn to_key_values(&self) -> String {
        let mut out = format!("regime = {}\n", self.regime);
        for (i, c) in self.checks.iter().enumerate() {
            out.push_str(&format!("check.{i}.id = {}\n", c.id));
            out.push_str(&format!("check.{i}.satisfied = {}\n", c.satisfied));
            out.push_str(&format!("check.{i}.lhs = {:e}\n", c.lhs));
            out.push_str(&format!("check.{i}.rhs = {:e}\n", c.rhs));
        }
        out
    }
}

/// Parameters of `i u_t + Δu + μ(|x|^{−(N−γ)} ∗ |u|^p)|u|^{p−2}u = 0`
/// together with the weight and derivative orders of the solution space.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParameters {
    dim: usize,
    p: f64,
    gamma: f64,
    mu: f64,
    m: f64,
    big_m: u32,
    m0: u32,
    b: f64,
    zero_mode: ZeroMode,
    report: AdmissibilityReport,
}

/// Plain inputs for [`ModelParameters::new`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamSpec {
    pub dim: usize,
    pub p: f64,
    pub gamma: f64,
    pub mu: f64,
    pub m: f64,
    pub big_m: u32,
    pub m0: u32,
    pub b: f64,
}

impl ModelParameters {
    /// Validates the structural invariants and attaches the regime report.
    pub fn new(spec: ParamSpec) -> Result<Self> {
        Self::with_zero_mode(spec, ZeroMode::default())
    }

    pub fn with_zero_mode(spec: ParamSpec, zero_mode: ZeroMode) -> Result<Self> {
        let ParamSpec {
            dim,
            p,
            gamma,
            mu,
            m,
            big_m,
            m0,
            b,
        } = spec;
        for (name, v) in [("p", p), ("γ", gamma), ("μ", mu), ("m", m), ("b", b)] {
            if !v.is_finite() {
                return Err(Error::InvalidParameters(format!("{name} is not finite")));
            }
        }
        let mut problems = Vec::new();
        if !(1..=3).contains(&dim) {
            problems.push(format!("N = {dim} not in {{1, 2, 3}}"));
        }
        if !(p > 1.0) {
            problems.push(format!("p > 1 required, got {p}"));
        }
        if !(gamma > 0.0 && gamma < dim as f64) {
            problems.push(format!("0 < γ < N required, got γ = {gamma}"));
        }
        if !(m > 0.0) {
            problems.push(format!("m > 0 required, got {m}"));
        }
        if big_m < 1 || m0 < 1 {
            problems.push(format!("M, M₀ ≥ 1 required, got M = {big_m}, M₀ = {m0}"));
        }
        if !problems.is_empty() {
            return Err(Error::InvalidParameters(problems.join("; ")));
        }
        let mut params = Self {
            dim,
            p,
            gamma,
            mu,
            m,
            big_m,
            m0,
            b,
            zero_mode,
            report: AdmissibilityReport {
                regime: Regime::Neither,
                checks: Vec::new(),
            },
        };
        params.report = classify(&params);
        Ok(params)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn p(&self) -> f64 {
        self.p
    }
    pub fn gamma(&self) -> f64 {
        self.gamma
    }
    pub fn mu(&self) -> f64 {
        self.mu
    }
    pub fn m(&self) -> f64 {
        self.m
    }
    pub fn big_m(&self) -> u32 {
        self.big_m
    }
    pub fn m0(&self) -> u32 {
        self.m0
    }
    pub fn b(&self) -> f64 {
        self.b
    }
    pub fn zero_mode(&self) -> ZeroMode {
        self.zero_mode
    }

    /// Regime report computed at construction.
    pub fn report(&self) -> &AdmissibilityReport {
        &self.report
    }

    pub fn spec(&self) -> ParamSpec {
        ParamSpec {
            dim: self.dim,
            p: self.p,
            gamma: self.gamma,
            mu: self.mu,
            m: self.m,
            big_m: self.big_m,
            m0: self.m0,
            b: self.b,
        }
    }

    /// Same parameters with another coupling.
    pub fn with_mu(&self, mu: f64) -> Result<Self> {
        Self::with_zero_mode(ParamSpec { mu, ..self.spec() }, self.zero_mode)
    }

    /// Same parameters with another chirp.
    pub fn with_b(&self, b: f64) -> Result<Self> {
        Self::with_zero_mode(ParamSpec { b, ..self.spec() }, self.zero_mode)
    }

    /// Highest derivative order `M + M₀ − N` entering the solution-space norm.
    pub fn top_order(&self) -> i64 {
        self.big_m as i64 + self.m0 as i64 - self.dim as i64
    }

    /// Exponent `N(p−1) − 2 − γ` of the nonautonomous coefficient.
    pub fn nonautonomous_exponent(&self) -> f64 {
        self.dim as f64 * (self.p - 1.0) - 2.0 - self.gamma
    }
}

fn half_floor(dim: usize) -> f64 {
    (dim / 2) as f64
}

fn m_lower_wellposed(n: f64, p: f64, g: f64) -> f64 {
    ((2.0 * g + n) / (4.0 * (p - 1.0))).max(n / 2.0)
}

fn m_upper(n: f64, p: f64, g: f64) -> f64 {
    (n - 2.0 * g) / (2.0 * (2.0 - p))
}

fn m0_lower(n: f64, p: f64, g: f64, m: f64) -> f64 {
    let denom = 4.0 * m * (p - 1.0) - n;
    let first = if denom > 0.0 {
        (n - g) * (2.0 * m * p - n) / denom
    } else {
        f64::INFINITY
    };
    first.max(n + m)
}

fn big_m_lower(dim: usize, m: f64, m0: f64) -> f64 {
    let n = dim as f64;
    let h = half_floor(dim);
    (m0 - n + 2.0 * h + 2.0).max(4.0 * h + 5.0 + m)
}

fn wellposed_checks(params: &ModelParameters) -> Vec<ConditionCheck> {
    let n = params.dim as f64;
    let (p, g, m) = (params.p, params.gamma, params.m);
    vec![
        ConditionCheck::less("p > 4/3", 4.0 / 3.0, p),
        ConditionCheck::less("p < 2", p, 2.0),
        ConditionCheck::less("γ > 0", 0.0, g),
        ConditionCheck::less("γ < N(3p-4)/(2p)", g, n * (3.0 * p - 4.0) / (2.0 * p)),
        ConditionCheck::less("m > max{(2γ+N)/(4(p-1)), N/2}", m_lower_wellposed(n, p, g), m),
        ConditionCheck::less("m < (N-2γ)/(2(2-p))", m, m_upper(n, p, g)),
        ConditionCheck::less(
            "M0 > max{(N-γ)(2mp-N)/(4m(p-1)-N), N+m}",
            m0_lower(n, p, g, m),
            params.m0 as f64,
        ),
        ConditionCheck::less(
            "M > max{M0-N+2⌊N/2⌋+2, 4⌊N/2⌋+5+m}",
            big_m_lower(params.dim, m, params.m0 as f64),
            params.big_m as f64,
        ),
    ]
}

fn blowup_checks(params: &ModelParameters) -> Vec<ConditionCheck> {
    let n = params.dim as f64;
    let (p, g, m) = (params.p, params.gamma, params.m);
    let s_c = critical_index(params.dim, p, g);
    vec![
        ConditionCheck::less("p > max{(N+2)/N, 4/3}", ((n + 2.0) / n).max(4.0 / 3.0), p),
        ConditionCheck::less(
            "γ < min{N(p-1)-2, ((N+2)(p-1)-2)/2, N(3p-4)/(2p)}",
            g,
            (n * (p - 1.0) - 2.0)
                .min(((n + 2.0) * (p - 1.0) - 2.0) / 2.0)
                .min(n * (3.0 * p - 4.0) / (2.0 * p)),
        ),
        ConditionCheck::less(
            "m > max{(N+2)/2, (2γ+N)/(4(p-1))}",
            ((n + 2.0) / 2.0).max((2.0 * g + n) / (4.0 * (p - 1.0))),
            m,
        ),
        ConditionCheck::less("μ > 0", 0.0, params.mu),
        ConditionCheck::less("s_c > 0", 0.0, s_c),
    ]
}

fn regime_of(checks: &[ConditionCheck], ids: &[&str]) -> bool {
    ids.iter().all(|id| checks.iter().any(|c| c.id == *id && c.satisfied))
}

const WELLPOSED_IDS: [&str; 8] = [
    "p > 4/3",
    "p < 2",
    "γ > 0",
    "γ < N(3p-4)/(2p)",
    "m > max{(2γ+N)/(4(p-1)), N/2}",
    "m < (N-2γ)/(2(2-p))",
    "M0 > max{(N-γ)(2mp-N)/(4m(p-1)-N), N+m}",
    "M > max{M0-N+2⌊N/2⌋+2, 4⌊N/2⌋+5+m}",
];

const BLOWUP_IDS: [&str; 10] = [
    "p > max{(N+2)/N, 4/3}",
    "p < 2",
    "γ > 0",
    "γ < min{N(p-1)-2, ((N+2)(p-1)-2)/2, N(3p-4)/(2p)}",
    "m > max{(N+2)/2, (2γ+N)/(4(p-1))}",
    "m < (N-2γ)/(2(2-p))",
    "M0 > max{(N-γ)(2mp-N)/(4m(p-1)-N), N+m}",
    "M > max{M0-N+2⌊N/2⌋+2, 4⌊N/2⌋+5+m}",
    "μ > 0",
    "s_c > 0",
];

/// Conditions for local well-posedness in the weighted space.
pub fn validate_wellposedness(params: &ModelParameters) -> AdmissibilityReport {
    let checks = wellposed_checks(params);
    let regime = if regime_of(&checks, &WELLPOSED_IDS) {
        Regime::Wellposed
    } else {
        Regime::Neither
    };
    AdmissibilityReport { regime, checks }
}

/// Conditions under which the virial blow-up criterion applies. The
/// shared conditions (the upper end of the m-window, `p < 2` and the
/// order bounds) are included so each report is self-contained.
pub fn validate_blowup_regime(params: &ModelParameters) -> AdmissibilityReport {
    let shared = wellposed_checks(params);
    let mut checks = blowup_checks(params);
    for id in ["p < 2", "γ > 0", "m < (N-2γ)/(2(2-p))"] {
        checks.push(shared.iter().find(|c| c.id == id).cloned().expect("shared check"));
    }
    for id in [
        "M0 > max{(N-γ)(2mp-N)/(4m(p-1)-N), N+m}",
        "M > max{M0-N+2⌊N/2⌋+2, 4⌊N/2⌋+5+m}",
    ] {
        checks.push(shared.iter().find(|c| c.id == id).cloned().expect("shared check"));
    }
    let regime = if regime_of(&checks, &BLOWUP_IDS) {
        Regime::Blowup
    } else {
        Regime::Neither
    };
    AdmissibilityReport { regime, checks }
}

/// Union of both condition sets, each condition listed once.
pub fn classify(params: &ModelParameters) -> AdmissibilityReport {
    let mut checks = wellposed_checks(params);
    checks.extend(blowup_checks(params));
    let well = regime_of(&checks, &WELLPOSED_IDS);
    let blow = regime_of(&checks, &BLOWUP_IDS);
    let regime = match (well, blow) {
        (true, true) => Regime::Both,
        (true, false) => Regime::Wellposed,
        (false, true) => Regime::Blowup,
        (false, false) => Regime::Neither,
    };
    AdmissibilityReport { regime, checks }
}

fn critical_index(dim: usize, p: f64, gamma: f64) -> f64 {
    dim as f64 / 2.0 - (gamma + 2.0) / (2.0 * (p - 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedConstants {
    pub s_c: f64,
    pub k_c: f64,
    /// `None` when `N(p−2)+N−γ = 0`.
    pub omega_c_sq: Option<f64>,
}

impl DerivedConstants {
    pub fn omega_c(&self) -> Option<f64> {
        self.omega_c_sq.filter(|w| *w > 0.0).map(f64::sqrt)
    }
}

/// Critical index `s_c`, `k_c = s_c(p−1)` and `ω_c²`.
pub fn derived_constants(params: &ModelParameters) -> DerivedConstants {
    constants_for(params.dim, params.p, params.gamma)
}

pub fn constants_for(dim: usize, p: f64, gamma: f64) -> DerivedConstants {
    let n = dim as f64;
    let s_c = critical_index(dim, p, gamma);
    let denom = n * (p - 2.0) + n - gamma;
    let omega_c_sq = if denom == 0.0 {
        None
    } else {
        Some(n * n * (n * (p - 2.0) + n - gamma - 2.0) / (8.0 * denom))
    };
    DerivedConstants {
        s_c,
        k_c: s_c * (p - 1.0),
        omega_c_sq,
    }
}

/// Smallest `(M₀, M)` satisfying the order conditions for a weight `m`
/// inside its admissible window.
pub fn suggest_orders(dim: usize, p: f64, gamma: f64, m: f64) -> Result<(u32, u32)> {
    let n = dim as f64;
    if !(1..=3).contains(&dim) || !(p > 1.0 && p < 2.0) || !(gamma > 0.0 && gamma < n) {
        return Err(domain("suggest_orders needs N in 1..=3, 1 < p < 2 and 0 < γ < N"));
    }
    let lo = m_lower_wellposed(n, p, gamma);
    let hi = m_upper(n, p, gamma);
    if !(lo < m && m < hi) {
        return Err(domain(format!("weight out of range: m = {m} must lie in ({lo}, {hi})")));
    }
    let m0 = smallest_integer_above(m0_lower(n, p, gamma, m));
    let big_m = smallest_integer_above(big_m_lower(dim, m, m0 as f64));
    Ok((m0, big_m))
}

fn smallest_integer_above(x: f64) -> u32 {
    let f = x.floor();
    (f as i64 + 1).max(1) as u32
}

/// Values of the contraction polynomials; `saturated` marks an overflow
/// clamped to `f64::MAX`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContractionPolynomials {
    pub g1: f64,
    pub g2: f64,
    pub j1: f64,
    pub j2: f64,
    pub saturated: bool,
}

/// `G₁, G₂` (contraction of the solution map) and `J₁, J₂` (its
/// Lipschitz constant), summed termwise up to `K = M+M₀−N`.
pub fn contraction_polynomials(lambda: f64, r: f64, params: &ModelParameters) -> Result<ContractionPolynomials> {
    if !(lambda > 0.0) || !(r >= 0.0) || !lambda.is_finite() || !r.is_finite() {
        return Err(domain("contraction polynomials need λ > 0 and R ≥ 0"));
    }
    let k_top = params.top_order();
    if k_top < 1 {
        return Err(domain(format!("M + M₀ − N = {k_top} must be at least 1")));
    }
    Ok(polynomials(lambda, r, params.p, k_top as u32))
}

fn polynomials(lambda: f64, r: f64, p: f64, k_top: u32) -> ContractionPolynomials {
    let pw = |base: f64, e: f64| if base == 0.0 { 0.0 } else { base.powf(e) };
    let mut g1 = pw(r, p);
    let mut g2 = 0.0;
    let mut j1 = pw(r, p - 1.0) + lambda.powf(-(6.0 - 2.0 * p)) * pw(r, 5.0 - p);
    let mut j2 = lambda.powf(-(6.0 - 2.0 * p)) * pw(r, 4.0 - p);
    for k in 0..=k_top {
        let kf = k as f64;
        g2 += lambda.powf(-(2.0 * (kf + 1.0) - p)) * pw(r, 2.0 * kf + 1.0);
        if k == 0 {
            continue;
        }
        g1 += lambda.powf(-(2.0 * kf - p)) * pw(r, 2.0 * kf);
        j1 += lambda.powf(-2.0 * (2.0 * kf - p)) * pw(r, 4.0 * kf - p - 1.0)
            + lambda.powf(-(2.0 * kf - p)) * pw(r, 2.0 * kf - 1.0);
        j2 += lambda.powf(-2.0 * (2.0 * (kf + 1.0) - p)) * pw(r, 4.0 * kf - p + 2.0)
            + lambda.powf(-(2.0 * (kf + 1.0) - p)) * pw(r, 2.0 * kf);
    }
    let mut saturated = false;
    let mut clamp = |v: f64| {
        if v.is_finite() {
            v
        } else {
            saturated = true;
            f64::MAX
        }
    };
    let (g1, g2, j1, j2) = (clamp(g1), clamp(g2), clamp(j1), clamp(j2));
    ContractionPolynomials {
        g1,
        g2,
        j1,
        j2,
        saturated,
    }
}

/// The implicit constants of the three smallness conditions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExistenceConstants {
    pub c: f64,
    pub c1: f64,
    pub c3: f64,
}

impl Default for ExistenceConstants {
    fn default() -> Self {
        Self {
            c: 1.0,
            c1: 1.0,
            c3: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExistenceTime {
    pub t: f64,
    /// Set when no positive time satisfies the conditions.
    pub none_found: bool,
}

/// Largest `T ∈ (0, 1]` with, for `R = 2cη` and `q = ⌊N/2⌋+1+m`,
///
/// - `½⟨T⟩^q + cT⟨T⟩^q R^{−1} G₁G₂ ≤ 1`,
/// - `c₁T⟨T⟩^q (η + G₁G₂) ≤ λ/2`,
/// - `c₃T⟨T⟩^q (J₁G₂ + G₁J₂) < 1`.
///
/// Every left side increases with `T`, so bisection applies.
pub fn existence_time_estimate(
    eta: f64,
    lambda: f64,
    params: &ModelParameters,
    constants: ExistenceConstants,
) -> Result<ExistenceTime> {
    if !(eta > 0.0 && eta.is_finite()) || !(lambda > 0.0 && lambda.is_finite()) {
        return Err(domain("existence time needs η > 0 and λ > 0"));
    }
    let ExistenceConstants { c, c1, c3 } = constants;
    if !(c > 0.0 && c1 > 0.0 && c3 > 0.0) {
        return Err(domain("existence-time constants must be positive"));
    }
    let r = 2.0 * c * eta;
    let poly = contraction_polynomials(lambda, r, params)?;
    let q = half_floor(params.dim) + 1.0 + params.m;
    let g12 = poly.g1 * poly.g2;
    let jg = poly.j1 * poly.g2 + poly.g1 * poly.j2;
    let holds = |t: f64| {
        let growth = (1.0 + t * t).powf(q / 2.0);
        let first = 0.5 * growth + c * t * growth * g12 / r <= 1.0;
        let second = c1 * t * growth * (eta + g12) <= lambda / 2.0;
        let third = c3 * t * growth * jg < 1.0;
        first && second && third
    };
    if holds(1.0) {
        return Ok(ExistenceTime {
            t: 1.0,
            none_found: false,
        });
    }
    if !holds(f64::MIN_POSITIVE) {
        return Ok(ExistenceTime {
            t: 0.0,
            none_found: true,
        });
    }
    let (mut lo, mut hi) = (f64::MIN_POSITIVE, 1.0);
    while hi - lo > 1e-10 * lo {
        let mid = if hi / lo > 4.0 {
            (lo * hi).sqrt()
        } else {
            0.5 * (lo + hi)
        };
        if holds(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(ExistenceTime {
        t: lo,
        none_found: false,
    })
}
