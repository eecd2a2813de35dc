//! Scalar functionals of a field: conserved quantities, variance and its
//! time derivatives, the weighted solution-space norm and diagnostics.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{domain, Error, Result};
use crate::grid::{japanese, Field, Grid};
use crate::params::{derived_constants, ModelParameters};
use crate::spectral::{derivative_symbol, from_spectrum, gradient_from_spectrum, spectral_l2, spectrum, RieszKernel};

/// One row of the observable time series.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservableRecord {
    pub t: f64,
    pub mass: f64,
    pub energy: f64,
    pub momentum: Vec<f64>,
    pub variance: f64,
    pub variance_t: f64,
    pub variance_tt: f64,
    pub sup_norm: f64,
    pub grad_l2_sq: f64,
    pub x_norm: f64,
    pub min_weighted_modulus: f64,
    pub spectral_tail_fraction: f64,
}

impl ObservableRecord {
    /// CSV header for an `N`-dimensional run.
    pub fn csv_header(dim: usize) -> String {
        let mut cols = vec!["t".to_string(), "mass".into(), "energy".into()];
        cols.extend((1..=dim).map(|j| format!("momentum_{j}")));
        cols.extend(
            [
                "variance",
                "variance_t",
                "variance_tt",
                "sup_norm",
                "grad_l2_sq",
                "x_norm",
                "min_weighted_modulus",
                "spectral_tail_fraction",
            ]
            .map(String::from),
        );
        cols.join(",")
    }

    pub fn values(&self) -> Vec<f64> {
        let mut v = vec![self.t, self.mass, self.energy];
        v.extend(&self.momentum);
        v.extend([
            self.variance,
            self.variance_t,
            self.variance_tt,
            self.sup_norm,
            self.grad_l2_sq,
            self.x_norm,
            self.min_weighted_modulus,
            self.spectral_tail_fraction,
        ]);
        v
    }

    pub fn is_finite(&self) -> bool {
        self.values().iter().all(|v| v.is_finite())
    }
}

/// Variance `V = ∫|x|²|u|²` and its first two time derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VirialQuantities {
    pub v: f64,
    /// `4 Im ∫ ū x·∇u`.
    pub v_t: f64,
    /// `16(k_c+1)E − 8k_c‖∇u‖²`.
    pub v_tt: f64,
    /// `16E − 8(k_c/p) μ ∫(K∗|u|^p)|u|^p`, algebraically equal to `v_tt`.
    pub v_tt_potential_form: f64,
}

/// Mass, energy and momentum.
#[derive(Debug, Clone, PartialEq)]
pub struct ConservedQuantities {
    pub mass: f64,
    pub energy: f64,
    pub momentum: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum XNormKind {
    WeightedSup,
    WeightedL2,
    L2,
}

#[derive(Debug, Clone, PartialEq)]
pub struct XNormComponent {
    pub alpha: Vec<usize>,
    pub kind: XNormKind,
    pub value: f64,
}

/// Per-grid precomputation shared by all observables of one run.
#[derive(Debug, Clone)]
pub struct Observer {
    params: ModelParameters,
    kernel: RieszKernel,
    r_sq: Vec<f64>,
    coords: Vec<Vec<f64>>,
    weight_m: Vec<f64>,
}

struct Pieces {
    mass: f64,
    grad_sq: f64,
    potential: f64,
    momentum: Vec<f64>,
    variance: f64,
    variance_t: f64,
}

impl Observer {
    pub fn new(grid: &Grid, params: &ModelParameters) -> Result<Self> {
        if grid.dim() != params.dim() {
            return Err(domain(format!(
                "grid dimension {} differs from N = {}",
                grid.dim(),
                params.dim()
            )));
        }
        let kernel = RieszKernel::new(grid, params.gamma(), params.zero_mode())?;
        let r_sq = grid.radius_sq();
        let m = params.m();
        let weight_m = r_sq.iter().map(|&r| japanese(r).powf(m)).collect();
        let coords = grid.map_points(|x| x.to_vec());
        let coords = (0..grid.dim()).map(|a| coords.iter().map(|x| x[a]).collect()).collect();
        Ok(Self {
            params: params.clone(),
            kernel,
            r_sq,
            coords,
            weight_m,
        })
    }

    pub fn params(&self) -> &ModelParameters {
        &self.params
    }

    pub fn kernel(&self) -> &RieszKernel {
        &self.kernel
    }

    fn check(&self, field: &Field) -> Result<()> {
        if field.grid() != self.kernel.grid() {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }

    fn pieces(&self, field: &Field, spec: &[Complex64]) -> Pieces {
        let grid = field.grid();
        let dv = grid.cell_volume();
        let u = field.values();
        let grads = gradient_from_spectrum(grid, spec, field.t());
        let p = self.params.p();
        let density: Vec<f64> = u.iter().map(|z| z.norm().powf(p)).collect();
        let w = self.kernel.apply_real(&density);

        let mass = u.iter().map(|z| z.norm_sqr()).sum::<f64>() * dv;
        let grad_sq = grads
            .iter()
            .map(|g| g.values().iter().map(|z| z.norm_sqr()).sum::<f64>())
            .sum::<f64>()
            * dv;
        let potential = w.iter().zip(&density).map(|(a, b)| a * b).sum::<f64>() * dv;
        let momentum = grads
            .iter()
            .map(|g| u.iter().zip(g.values()).map(|(a, b)| (a.conj() * b).im).sum::<f64>() * dv)
            .collect();
        let variance = u.iter().zip(&self.r_sq).map(|(z, r)| z.norm_sqr() * r).sum::<f64>() * dv;
        let mut radial = 0.0;
        for (a, g) in grads.iter().enumerate() {
            radial += u
                .iter()
                .zip(g.values())
                .zip(&self.coords[a])
                .map(|((z, d), x)| (z.conj() * d).im * x)
                .sum::<f64>();
        }
        Pieces {
            mass,
            grad_sq,
            potential,
            momentum,
            variance,
            variance_t: 4.0 * radial * dv,
        }
    }

    fn energy_of(&self, pc: &Pieces) -> f64 {
        let p = self.params.p();
        0.5 * pc.grad_sq - self.params.mu() / (2.0 * p) * pc.potential
    }

    fn virial_of(&self, pc: &Pieces) -> VirialQuantities {
        let k = derived_constants(&self.params).k_c;
        let e = self.energy_of(pc);
        let p = self.params.p();
        VirialQuantities {
            v: pc.variance,
            v_t: pc.variance_t,
            v_tt: 16.0 * (k + 1.0) * e - 8.0 * k * pc.grad_sq,
            v_tt_potential_form: 16.0 * e - 8.0 * k / p * self.params.mu() * pc.potential,
        }
    }

    pub fn conserved(&self, field: &Field) -> Result<ConservedQuantities> {
        self.check(field)?;
        let pc = self.pieces(field, &spectrum(field));
        Ok(ConservedQuantities {
            mass: pc.mass,
            energy: self.energy_of(&pc),
            momentum: pc.momentum,
        })
    }

    pub fn virial(&self, field: &Field) -> Result<VirialQuantities> {
        self.check(field)?;
        let pc = self.pieces(field, &spectrum(field));
        Ok(self.virial_of(&pc))
    }

    /// `∫(K∗|u|^p)|u|^p`.
    pub fn potential_term(&self, field: &Field) -> Result<f64> {
        self.check(field)?;
        let p = self.params.p();
        let density: Vec<f64> = field.values().iter().map(|z| z.norm().powf(p)).collect();
        let w = self.kernel.apply_real(&density);
        Ok(w.iter().zip(&density).map(|(a, b)| a * b).sum::<f64>() * field.grid().cell_volume())
    }

    /// Full record, including the weighted norm.
    pub fn record(&self, field: &Field) -> Result<ObservableRecord> {
        self.check(field)?;
        let spec = spectrum(field);
        let pc = self.pieces(field, &spec);
        let vir = self.virial_of(&pc);
        let (x_total, _) = x_norm_from_spectrum(field, &spec, &self.params, &self.weight_m, false)?;
        let record = ObservableRecord {
            t: field.t(),
            mass: pc.mass,
            energy: self.energy_of(&pc),
            momentum: pc.momentum.clone(),
            variance: vir.v,
            variance_t: vir.v_t,
            variance_tt: vir.v_tt,
            sup_norm: field.sup_norm(),
            grad_l2_sq: pc.grad_sq,
            x_norm: x_total,
            min_weighted_modulus: weighted_min(field, &self.weight_m),
            spectral_tail_fraction: tail_fraction(field.grid(), &spec),
        };
        if !record.is_finite() {
            return Err(Error::NonFinite(format!("observables at t = {}", field.t())));
        }
        Ok(record)
    }
}

/// Mass `∫|u|²`, energy `½‖∇u‖² − (μ/2p)∫(K∗|u|^p)|u|^p` and momentum
/// `Im ∫ ū∇u`.
pub fn conserved_quantities(field: &Field, params: &ModelParameters) -> Result<ConservedQuantities> {
    Observer::new(field.grid(), params)?.conserved(field)
}

pub fn virial_quantities(field: &Field, params: &ModelParameters) -> Result<VirialQuantities> {
    Observer::new(field.grid(), params)?.virial(field)
}

/// Multi-indices of length `dim` with `|α| = order`, lexicographic.
pub fn multi_indices(dim: usize, order: usize) -> Vec<Vec<usize>> {
    if dim == 1 {
        return vec![vec![order]];
    }
    let mut out = Vec::new();
    for first in (0..=order).rev() {
        for mut rest in multi_indices(dim - 1, order - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// The weighted norm
/// `Σ_{|α|≤⌊N/2⌋} sup|⟨x⟩^m ∂^α f| + Σ_{⌊N/2⌋<|α|≤M} ‖⟨x⟩^m ∂^α f‖ + Σ_{M<|α|≤M+M₀−N} ‖∂^α f‖`
/// with spectral derivatives and lattice maxima.
pub fn x_norm(field: &Field, params: &ModelParameters) -> Result<(f64, Vec<XNormComponent>)> {
    let weight: Vec<f64> = field
        .grid()
        .radius_sq()
        .iter()
        .map(|&r| japanese(r).powf(params.m()))
        .collect();
    x_norm_from_spectrum(field, &spectrum(field), params, &weight, true)
}

fn x_norm_from_spectrum(
    field: &Field,
    spec: &[Complex64],
    params: &ModelParameters,
    weight: &[f64],
    itemize: bool,
) -> Result<(f64, Vec<XNormComponent>)> {
    let grid = field.grid();
    let dim = grid.dim();
    let top = params.top_order();
    if top < 0 {
        return Err(domain(format!("M + M₀ − N = {top} is negative")));
    }
    let half = dim / 2;
    let big_m = params.big_m() as usize;
    let top = (top as usize).max(big_m);
    let dv = grid.cell_volume();
    let alphas: Vec<(usize, Vec<usize>)> = (0..=top)
        .flat_map(|order| multi_indices(dim, order).into_iter().map(move |a| (order, a)))
        .collect();
    let values: Vec<(XNormKind, f64)> = alphas
        .par_iter()
        .map(|(order, alpha)| {
            let symbol = derivative_symbol(grid, alpha);
            if *order > big_m {
                return (XNormKind::L2, spectral_l2(grid, spec, |i| symbol[i].norm()));
            }
            let data = spec.iter().zip(&symbol).map(|(z, s)| z * s).collect();
            let d = from_spectrum(grid, data, field.t());
            if *order <= half {
                let v = d
                    .values()
                    .iter()
                    .zip(weight)
                    .map(|(z, w)| z.norm() * w)
                    .fold(0.0, f64::max);
                (XNormKind::WeightedSup, v)
            } else {
                let s: f64 = d.values().iter().zip(weight).map(|(z, w)| z.norm_sqr() * w * w).sum();
                (XNormKind::WeightedL2, (s * dv).sqrt())
            }
        })
        .collect();
    // Summed in a fixed order so the total is reproducible.
    let total = values.iter().map(|(_, v)| v).sum();
    let parts = if itemize {
        alphas
            .into_iter()
            .zip(values)
            .map(|((_, alpha), (kind, value))| XNormComponent { alpha, kind, value })
            .collect()
    } else {
        Vec::new()
    };
    Ok((total, parts))
}

/// `min_x ⟨x⟩^m |u(x)|` over the lattice.
pub fn min_weighted_modulus(field: &Field, m: f64) -> f64 {
    let weight: Vec<f64> = field.grid().radius_sq().iter().map(|&r| japanese(r).powf(m)).collect();
    weighted_min(field, &weight)
}

fn weighted_min(field: &Field, weight: &[f64]) -> f64 {
    field
        .values()
        .iter()
        .zip(weight)
        .map(|(z, w)| z.norm() * w)
        .fold(f64::INFINITY, f64::min)
}

/// Share of `Σ|f̂|²` carried by modes with some `|ξ_j|` above two thirds
/// of that axis's Nyquist wavenumber. Zero for the zero field.
pub fn spectral_tail_fraction(field: &Field) -> f64 {
    tail_fraction(field.grid(), &spectrum(field))
}

fn tail_fraction(grid: &Grid, spec: &[Complex64]) -> f64 {
    let cut: Vec<f64> = (0..grid.dim()).map(|a| 2.0 / 3.0 * grid.nyquist(a)).collect();
    let outside = grid.map_modes(|k| k.iter().zip(&cut).any(|(k, c)| k.abs() > *c));
    let mut all = 0.0;
    let mut tail = 0.0;
    for (z, out) in spec.iter().zip(outside) {
        let e = z.norm_sqr();
        all += e;
        if out {
            tail += e;
        }
    }
    if all > 0.0 {
        tail / all
    } else {
        0.0
    }
}
