//! Empirical ratio checks for the weighted inequalities: power-weight
//! classes, weighted Riesz-potential bounds, Stein-derivative equivalence,
//! interpolation, homogeneous-derivative weights and weighted dispersion.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{domain, Result};
use crate::grid::{japanese, Field, Grid};
use crate::spectral::{
    bessel, free_propagate, from_spectrum, riesz_derivative, riesz_potential, sobolev_norm, stein_derivative,
    MeanPolicy, ZeroMode,
};

/// One evaluated inequality instance.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioSample {
    pub id: String,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

/// `(lhs, rhs)` of one instance, or why it could not be evaluated.
type RawSample = std::result::Result<(f64, f64), String>;

#[derive(Debug, Clone, PartialEq)]
pub struct RatioReport {
    pub id: String,
    pub family: String,
    pub samples: Vec<RatioSample>,
    /// Samples dropped, with the reason.
    pub skipped: Vec<String>,
    pub max_ratio: f64,
    pub ceiling: f64,
    pub ratio_bounded: bool,
}

impl RatioReport {
    fn assemble(id: &str, family: &str, raw: Vec<(String, RawSample)>) -> Self {
        let mut samples = Vec::new();
        let mut skipped = Vec::new();
        for (sid, r) in raw {
            match r {
                Ok((lhs, rhs)) if rhs > 0.0 && lhs.is_finite() && rhs.is_finite() => samples.push(RatioSample {
                    id: sid,
                    lhs,
                    rhs,
                    ratio: lhs / rhs,
                }),
                Ok(_) => skipped.push(format!("{sid}: zero or non-finite norm")),
                Err(e) => skipped.push(format!("{sid}: {e}")),
            }
        }
        let max_ratio = samples.iter().map(|s| s.ratio).fold(0.0, f64::max);
        Self {
            id: id.to_string(),
            family: family.to_string(),
            samples,
            skipped,
            max_ratio,
            ceiling: f64::INFINITY,
            ratio_bounded: max_ratio.is_finite(),
        }
    }

    /// Sets the ceiling and recomputes `ratio_bounded`.
    pub fn with_ceiling(mut self, ceiling: f64) -> Self {
        self.ceiling = ceiling;
        self.ratio_bounded = self.max_ratio <= ceiling && !self.samples.is_empty();
        self
    }

    /// One row per sample, then a `# summary` block.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("report,sample,lhs,rhs,ratio\n");
        for s in &self.samples {
            out.push_str(&format!(
                "{},{},{:.16e},{:.16e},{:.16e}\n",
                self.id, s.id, s.lhs, s.rhs, s.ratio
            ));
        }
        out.push_str(&format!("# summary id={}\n", self.id));
        out.push_str(&format!("# family={}\n", self.family));
        out.push_str(&format!("# max_ratio={:.16e}\n", self.max_ratio));
        out.push_str(&format!("# ceiling={:e}\n", self.ceiling));
        out.push_str(&format!("# ratio_bounded={}\n", self.ratio_bounded));
        for s in &self.skipped {
            out.push_str(&format!("# skipped {s}\n"));
        }
        out
    }
}

/// Membership of `|x|^l` in `A_{p,q}` and in `A_p`, for `1/q = 1/p − γ/N`.
pub fn power_weight_class(l: f64, p: f64, q: f64, dim: usize, gamma: f64) -> Result<(bool, bool)> {
    let n = dim as f64;
    if !(gamma > 0.0 && gamma < n) || !(p > 1.0 && p < n / gamma) {
        return Err(domain(format!(
            "need 0 < γ < N and 1 < p < N/γ, got p = {p}, γ = {gamma}"
        )));
    }
    if (1.0 / q - (1.0 / p - gamma / n)).abs() > 1e-12 {
        return Err(domain(format!("q = {q} inconsistent with 1/q = 1/p − γ/N")));
    }
    let in_apq = -(n - p * gamma) / p < l && l < n * (p - 1.0) / p;
    let in_ap = -n < l && l < n * (p - 1.0);
    Ok((in_apq, in_ap))
}

/// Exponent `q` with `1/q = 1/p − γ/N`.
pub fn sobolev_exponent(p: f64, dim: usize, gamma: f64) -> f64 {
    1.0 / (1.0 / p - gamma / dim as f64)
}

fn weight(grid: &Grid, l: f64) -> Vec<f64> {
    grid.radius_sq().iter().map(|&r| japanese(r).powf(l)).collect()
}

/// `‖(K_γ∗f)⟨x⟩^l‖_{L^q} / ‖f⟨x⟩^l‖_{L^p}` for every member of the family.
pub fn riesz_weighted_ratio(family: &[(String, Field)], gamma: f64, l: f64, p: f64, dim: usize) -> Result<RatioReport> {
    let q = sobolev_exponent(p, dim, gamma);
    if !(p > 1.0 && q.is_finite() && q > 0.0) {
        return Err(domain(format!("need 1 < p < N/γ, got p = {p}")));
    }
    let raw: Vec<_> = family
        .par_iter()
        .map(|(id, f)| {
            let r = if f.grid().dim() != dim {
                Err("dimension mismatch".to_string())
            } else {
                let w = weight(f.grid(), l);
                riesz_potential(f, gamma, ZeroMode::Matched)
                    .map(|k| (k.weighted(&w).lr_norm(q), f.weighted(&w).lr_norm(p)))
                    .map_err(|e| e.to_string())
            };
            (id.clone(), r)
        })
        .collect();
    Ok(RatioReport::assemble(
        "riesz-weighted",
        &format!("N={dim} γ={gamma} l={l} p={p} q={q}"),
        raw,
    ))
}

/// Dilated Gaussians `e^{−|x/λ|²}`, `λ ∈ {2^{−3},…,2^{3}}`, followed by
/// `randoms` seeded band-limited fields with modes `1 ≤ |j|_∞ ≤ band`.
pub fn riesz_family(grid: &Grid, randoms: usize, band: usize, seed: u64) -> Result<Vec<(String, Field)>> {
    let mut out = Vec::new();
    for e in -3..=3 {
        let lambda = 2f64.powi(e);
        let f = Field::from_fn(grid, |x| {
            let r2: f64 = x.iter().map(|v| v * v).sum();
            Complex64::new((-r2 / (lambda * lambda)).exp(), 0.0)
        })?;
        out.push((format!("gauss-2^{e}"), f));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let indices: Vec<Vec<i64>> = grid
        .map_modes(|k| k.to_vec())
        .into_iter()
        .map(|k| {
            k.iter()
                .enumerate()
                .map(|(a, v)| (v / (2.0 * std::f64::consts::PI / grid.lengths()[a])).round() as i64)
                .collect()
        })
        .collect();
    for i in 0..randoms {
        let spec: Vec<Complex64> = indices
            .iter()
            .map(|j| {
                let inf = j.iter().map(|v| v.unsigned_abs()).max().unwrap_or(0) as usize;
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                if inf >= 1 && inf <= band {
                    Complex64::new(re, im)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect();
        out.push((format!("random-{i:02}"), from_spectrum(grid, spec, 0.0)));
    }
    Ok(out)
}

/// `r = (‖f‖ + ‖𝒟^b f‖)/‖J^b f‖`, reported as the two samples `r` and `1/r`.
pub fn stein_equivalence_ratio(f: &Field, b: f64) -> Result<RatioReport> {
    if !(b > 0.0 && b < 1.0) {
        return Err(domain(format!("b = {b} outside (0, 1)")));
    }
    let jb = sobolev_norm(f, b);
    let raw = if jb == 0.0 {
        vec![("r".to_string(), Err("‖J^b f‖ = 0".to_string()))]
    } else {
        let left = f.l2_norm() + stein_derivative(f, b)?.l2_norm();
        vec![("r".to_string(), Ok((left, jb))), ("1/r".to_string(), Ok((jb, left)))]
    };
    Ok(RatioReport::assemble("stein-equivalence", &format!("b={b}"), raw))
}

/// The two interpolation ratios
/// `‖⟨x⟩^{θa} J^{(1−θ)bb} f‖ / (‖J^{bb} f‖^{1−θ} ‖⟨x⟩^a f‖^θ)` and
/// `‖J^{θa}(⟨x⟩^{(1−θ)bb} f)‖ / (‖⟨x⟩^{bb} f‖^{1−θ} ‖J^a f‖^θ)`.
pub fn interpolation_check(f: &Field, a: f64, bb: f64, theta: f64) -> Result<RatioReport> {
    if !(a > 0.0 && bb > 0.0) || !(theta > 0.0 && theta < 1.0) {
        return Err(domain("interpolation needs a, bb > 0 and θ ∈ (0, 1)"));
    }
    let grid = f.grid();
    let first_lhs = bessel(f, (1.0 - theta) * bb)?
        .weighted(&weight(grid, theta * a))
        .l2_norm();
    let first_rhs = sobolev_norm(f, bb).powf(1.0 - theta) * f.weighted(&weight(grid, a)).l2_norm().powf(theta);
    let second_lhs = sobolev_norm(&f.weighted(&weight(grid, (1.0 - theta) * bb)), theta * a);
    let second_rhs = f.weighted(&weight(grid, bb)).l2_norm().powf(1.0 - theta) * sobolev_norm(f, a).powf(theta);
    let raw = vec![
        ("weight-outside".to_string(), Ok((first_lhs, first_rhs))),
        ("weight-inside".to_string(), Ok((second_lhs, second_rhs))),
    ];
    Ok(RatioReport::assemble(
        "interpolation",
        &format!("a={a} bb={bb} theta={theta}"),
        raw,
    ))
}

/// `‖⟨x⟩^b D^s f‖ / (‖⟨x⟩^b f‖ + ‖J^{s−b} f‖ + ‖⟨x⟩^b J^s f‖)`.
pub fn homogeneous_weight_bound_check(f: &Field, b: f64, s: f64) -> Result<RatioReport> {
    if !(b > 0.0 && b < s) {
        return Err(domain(format!("need 0 < b < s, got b = {b}, s = {s}")));
    }
    let w = weight(f.grid(), b);
    let lhs = riesz_derivative(f, s, MeanPolicy::Zero)?.weighted(&w).l2_norm();
    let rhs = f.weighted(&w).l2_norm() + sobolev_norm(f, s - b) + bessel(f, s)?.weighted(&w).l2_norm();
    Ok(RatioReport::assemble(
        "homogeneous-weight",
        &format!("b={b} s={s}"),
        vec![("single".to_string(), Ok((lhs, rhs)))],
    ))
}

/// Share of the mass in the outer tenth of the box along any axis.
pub fn boundary_mass_fraction(f: &Field) -> f64 {
    let grid = f.grid();
    let limits: Vec<f64> = grid.lengths().iter().map(|l| 0.4 * l).collect();
    let outer = grid.map_points(|x| x.iter().zip(&limits).any(|(v, lim)| v.abs() >= *lim));
    let total: f64 = f.values().iter().map(|z| z.norm_sqr()).sum();
    let band: f64 = f
        .values()
        .iter()
        .zip(outer)
        .filter(|(_, o)| *o)
        .map(|(z, _)| z.norm_sqr())
        .sum();
    if total > 0.0 {
        band / total
    } else {
        0.0
    }
}

/// `‖⟨x⟩^b e^{itΔ} f‖ / (⟨t⟩^b (‖J^b f‖ + ‖⟨x⟩^b f‖))` per time; samples
/// whose evolved mass reaches the boundary band (above 10⁻⁶) are dropped.
pub fn propagator_weight_growth(f: &Field, b: f64, times: &[f64]) -> Result<RatioReport> {
    if !(b > 0.0) {
        return Err(domain(format!("b = {b} must be positive")));
    }
    let w = weight(f.grid(), b);
    let base = sobolev_norm(f, b) + f.weighted(&w).l2_norm();
    let raw: Vec<_> = times
        .par_iter()
        .map(|&t| {
            let id = format!("t={t}");
            let r = free_propagate(f, t).map_err(|e| e.to_string()).and_then(|g| {
                let escaped = boundary_mass_fraction(&g);
                if escaped > 1e-6 {
                    Err(format!("boundary mass fraction {escaped:e} exceeds 1e-6"))
                } else {
                    Ok((g.weighted(&w).l2_norm(), japanese(t * t).powf(b) * base))
                }
            });
            (id, r)
        })
        .collect();
    Ok(RatioReport::assemble(
        "propagator-weight",
        &format!("b={b} times={}", times.len()),
        raw,
    ))
}

/// Gaussian `e^{−|x|²}` on a cube.
fn gaussian(dim: usize, length: f64, n: usize) -> Result<Field> {
    let grid = Grid::cube(dim, length, n)?;
    Field::from_fn(&grid, |x| {
        Complex64::new((-x.iter().map(|v| v * v).sum::<f64>()).exp(), 0.0)
    })
}

/// Frozen ceiling per fixture report, indexed by report id.
pub const FIXTURE_CEILINGS: [(&str, f64); 6] = [
    ("riesz-weighted-inside", 10.0),
    ("stein-equivalence", 10.0),
    ("interpolation", 10.0),
    ("homogeneous-weight", 1.0),
    ("propagator-weight", 1.0),
    ("propagator-weight-2d", 1.0),
];

fn ceiling(id: &str) -> f64 {
    FIXTURE_CEILINGS
        .iter()
        .find(|(k, _)| *k == id)
        .map(|(_, c)| *c)
        .unwrap_or(f64::INFINITY)
}

/// Parameters of the weighted Riesz window fixture.
pub const RIESZ_FIXTURE: (usize, f64, f64, f64, f64) = (1, 0.25, 2.0, 0.3, 1.5);

/// The frozen fixture set on the base grids (`level = 0`) or with every
/// point count doubled (`level = 1`).
pub fn fixture_suite(level: u32, seed: u64) -> Result<Vec<RatioReport>> {
    let scale = 1usize << level;
    let mut out = Vec::new();

    let (dim, gamma, p, l_in, _) = RIESZ_FIXTURE;
    let grid = Grid::cube(dim, 64.0, 2048 * scale)?;
    let family = riesz_family(&grid, 20, 16, seed)?;
    let mut r = riesz_weighted_ratio(&family, gamma, l_in, p, dim)?;
    r.id = "riesz-weighted-inside".into();
    out.push(r);

    let g = gaussian(1, 40.0, 512 * scale)?;
    out.push(stein_equivalence_ratio(&g, 0.5)?);
    out.push(interpolation_check(&g, 1.0, 1.0, 0.5)?);
    out.push(homogeneous_weight_bound_check(&g, 0.5, 1.5)?);

    let times: Vec<f64> = (0..=8).map(|i| 0.25 * i as f64).collect();
    let g = gaussian(1, 80.0, 1024 * scale)?;
    out.push(propagator_weight_growth(&g, 1.0, &times)?);
    let g = gaussian(2, 40.0, 128 * scale)?;
    let mut r = propagator_weight_growth(&g, 1.0, &times)?;
    r.id = "propagator-weight-2d".into();
    out.push(r);

    Ok(out
        .into_iter()
        .map(|r| {
            let c = ceiling(&r.id);
            r.with_ceiling(c)
        })
        .collect())
}

/// Max ratios for the Riesz fixture inside and outside the `A_{p,q}`
/// window, plus the outside ratios of the Gaussian dilations in order.
pub fn riesz_window_contrast(level: u32, seed: u64) -> Result<(f64, f64, Vec<f64>)> {
    let (dim, gamma, p, l_in, l_out) = RIESZ_FIXTURE;
    let grid = Grid::cube(dim, 64.0, 2048 << level)?;
    let family = riesz_family(&grid, 20, 16, seed)?;
    let inside = riesz_weighted_ratio(&family, gamma, l_in, p, dim)?;
    let outside = riesz_weighted_ratio(&family, gamma, l_out, p, dim)?;
    let dilation: Vec<f64> = outside
        .samples
        .iter()
        .filter(|s| s.id.starts_with("gauss"))
        .map(|s| s.ratio)
        .collect();
    Ok((inside.max_ratio, outside.max_ratio, dilation))
}
