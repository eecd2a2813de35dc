//! Periodic boxes and the complex fields sampled on them.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{domain, Error, Result};

/// A periodic box `[-L/2, L/2)^N` sampled on a uniform lattice.
///
/// Sample `j` along an axis sits at `x_j = -L/2 + j dx`, so the box center
/// is the lattice point `j = n/2`. Values are stored row-major with the last
/// axis fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    lengths: Vec<f64>,
    points: Vec<usize>,
}

impl Grid {
    /// Builds a box with per-axis side lengths and point counts.
    pub fn new(lengths: &[f64], points: &[usize]) -> Result<Self> {
        let dim = lengths.len();
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidGrid(format!("dimension {dim} not in 1..=3")));
        }
        if points.len() != dim {
            return Err(Error::InvalidGrid(format!(
                "{} lengths but {} point counts",
                dim,
                points.len()
            )));
        }
        for (&l, &n) in lengths.iter().zip(points) {
            if !(l.is_finite() && l > 0.0) {
                return Err(Error::InvalidGrid(format!("side length {l} must be positive")));
            }
            if n < 8 || n % 2 != 0 {
                return Err(Error::InvalidGrid(format!(
                    "point count {n} must be even and at least 8"
                )));
            }
        }
        Ok(Self {
            lengths: lengths.to_vec(),
            points: points.to_vec(),
        })
    }

    /// A cube with the same side length and point count on every axis.
    pub fn cube(dim: usize, length: f64, n: usize) -> Result<Self> {
        Self::new(&vec![length; dim], &vec![n; dim])
    }

    pub fn dim(&self) -> usize {
        self.lengths.len()
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    pub fn points(&self) -> &[usize] {
        &self.points
    }

    /// Total number of lattice points.
    pub fn len(&self) -> usize {
        self.points.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.lengths[axis] / self.points[axis] as f64
    }

    /// Volume of one lattice cell, the weight of every lattice sum.
    pub fn cell_volume(&self) -> f64 {
        (0..self.dim()).map(|a| self.spacing(a)).product()
    }

    pub fn volume(&self) -> f64 {
        self.lengths.iter().product()
    }

    /// Sample coordinates along one axis.
    pub fn coords(&self, axis: usize) -> Vec<f64> {
        let n = self.points[axis];
        let dx = self.spacing(axis);
        let half = self.lengths[axis] / 2.0;
        (0..n).map(|j| -half + j as f64 * dx).collect()
    }

    /// Angular wavenumbers along one axis in FFT storage order
    /// `(2π/L)·[0, 1, …, n/2−1, −n/2, …, −1]`.
    pub fn wavenumbers(&self, axis: usize) -> Vec<f64> {
        let n = self.points[axis] as i64;
        let k0 = 2.0 * PI / self.lengths[axis];
        (0..n)
            .map(|j| if j < n / 2 { j } else { j - n })
            .map(|j| k0 * j as f64)
            .collect()
    }

    /// Angular wavenumbers along one axis in ascending order.
    pub fn frequencies(&self, axis: usize) -> Vec<f64> {
        let n = self.points[axis] as i64;
        let k0 = 2.0 * PI / self.lengths[axis];
        (-n / 2..n / 2).map(|j| k0 * j as f64).collect()
    }

    /// Largest representable |ξ_j| along an axis (the Nyquist wavenumber).
    pub fn nyquist(&self, axis: usize) -> f64 {
        PI * self.points[axis] as f64 / self.lengths[axis]
    }

    /// Evaluates `f` at every lattice point, row-major.
    pub fn map_points<T>(&self, f: impl FnMut(&[f64]) -> T) -> Vec<T> {
        let axes: Vec<Vec<f64>> = (0..self.dim()).map(|a| self.coords(a)).collect();
        map_lattice(&axes, f)
    }

    /// Evaluates `f` at every frequency, in FFT storage order.
    pub fn map_modes<T>(&self, f: impl FnMut(&[f64]) -> T) -> Vec<T> {
        let axes: Vec<Vec<f64>> = (0..self.dim()).map(|a| self.wavenumbers(a)).collect();
        map_lattice(&axes, f)
    }

    /// |x|² at every lattice point.
    pub fn radius_sq(&self) -> Vec<f64> {
        self.map_points(|x| x.iter().map(|v| v * v).sum())
    }

    /// |ξ|² at every mode, in FFT storage order.
    pub fn wavenumber_sq(&self) -> Vec<f64> {
        self.map_modes(|k| k.iter().map(|v| v * v).sum())
    }
}

fn map_lattice<T>(axes: &[Vec<f64>], mut f: impl FnMut(&[f64]) -> T) -> Vec<T> {
    let dims: Vec<usize> = axes.iter().map(Vec::len).collect();
    let total: usize = dims.iter().product();
    let mut out = Vec::with_capacity(total);
    let mut idx = vec![0usize; dims.len()];
    let mut point = vec![0.0; dims.len()];
    for _ in 0..total {
        for (a, &i) in idx.iter().enumerate() {
            point[a] = axes[a][i];
        }
        out.push(f(&point));
        for a in (0..dims.len()).rev() {
            idx[a] += 1;
            if idx[a] < dims[a] {
                break;
            }
            idx[a] = 0;
        }
    }
    out
}

/// Complex samples of a function on a [`Grid`], tagged with a time.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Grid,
    values: Vec<Complex64>,
    t: f64,
}

impl Field {
    /// Wraps lattice values; rejects a length mismatch or non-finite entries.
    pub fn new(grid: Grid, values: Vec<Complex64>, t: f64) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "{} values for a lattice of {} points",
                values.len(),
                grid.len()
            )));
        }
        if !t.is_finite() || values.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::NonFinite("field values".into()));
        }
        Ok(Self { grid, values, t })
    }

    /// Internal constructor for values already known to be valid.
    pub(crate) fn from_parts(grid: Grid, values: Vec<Complex64>, t: f64) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values, t }
    }

    pub fn zeros(grid: &Grid) -> Self {
        Self::from_parts(grid.clone(), vec![Complex64::new(0.0, 0.0); grid.len()], 0.0)
    }

    /// Samples a closed-form function `f(x)`.
    pub fn from_fn(grid: &Grid, f: impl FnMut(&[f64]) -> Complex64) -> Result<Self> {
        let values = grid.map_points(f);
        Self::new(grid.clone(), values, 0.0)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn with_time(mut self, t: f64) -> Self {
        self.t = t;
        self
    }

    /// Replaces the values on the same grid, keeping the time tag.
    pub fn with_values(&self, values: Vec<Complex64>) -> Result<Self> {
        Self::new(self.grid.clone(), values, self.t)
    }

    pub(crate) fn same_grid(&self, other: &Field) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// ∫|f|² as a lattice sum.
    pub fn mass(&self) -> f64 {
        self.values.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.grid.cell_volume()
    }

    pub fn l2_norm(&self) -> f64 {
        self.mass().sqrt()
    }

    /// (Σ|f|^r dV)^{1/r}.
    pub fn lr_norm(&self, r: f64) -> f64 {
        let s: f64 = self.values.iter().map(|z| z.norm().powf(r)).sum();
        (s * self.grid.cell_volume()).powf(1.0 / r)
    }

    /// Lattice maximum of |f|.
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// ∫ f̄ g as a lattice sum.
    pub fn inner(&self, other: &Field) -> Result<Complex64> {
        self.same_grid(other)?;
        let s: Complex64 = self.values.iter().zip(&other.values).map(|(a, b)| a.conj() * b).sum();
        Ok(s * self.grid.cell_volume())
    }

    pub fn scale(&self, c: Complex64) -> Field {
        let values = self.values.iter().map(|z| z * c).collect();
        Self::from_parts(self.grid.clone(), values, self.t)
    }

    pub fn sub(&self, other: &Field) -> Result<Field> {
        self.same_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect();
        Ok(Self::from_parts(self.grid.clone(), values, self.t))
    }

    /// Pointwise product with a real weight given per lattice point.
    pub fn weighted(&self, weight: &[f64]) -> Field {
        let values = self.values.iter().zip(weight).map(|(z, w)| z * w).collect();
        Self::from_parts(self.grid.clone(), values, self.t)
    }

    /// Multiplies by the chirp `e^{ib|x|²/4}`.
    pub fn chirp(&self, b: f64) -> Field {
        let r2 = self.grid.radius_sq();
        let values = self
            .values
            .iter()
            .zip(&r2)
            .map(|(z, &r)| z * Complex64::from_polar(1.0, b * r / 4.0))
            .collect();
        Self::from_parts(self.grid.clone(), values, self.t)
    }
}

/// ⟨x⟩ = (1+|x|²)^{1/2}.
pub fn japanese(r_sq: f64) -> f64 {
    (1.0 + r_sq).sqrt()
}

/// Initial-data recipes.
pub enum InitialData<'a> {
    /// `a ⟨x⟩^{−m}`.
    PowerWeight { amplitude: f64, m: f64 },
    /// `a e^{−σ|x|²}`.
    Gaussian { amplitude: f64, sigma: f64 },
    /// An existing field multiplied by `e^{ib|x|²/4}`.
    Chirp { base: &'a Field, b: f64 },
    /// Any closed form `x ↦ f(x)`.
    Callback(&'a dyn Fn(&[f64]) -> Complex64),
}

/// Samples initial data on the lattice, with `x` measured from the box center.
pub fn sample(grid: &Grid, spec: &InitialData<'_>) -> Result<Field> {
    match *spec {
        InitialData::PowerWeight { amplitude, m } => {
            if !(m > 0.0) {
                return Err(domain(format!("power weight needs m > 0, got {m}")));
            }
            Field::from_fn(grid, |x| {
                let r2: f64 = x.iter().map(|v| v * v).sum();
                Complex64::new(amplitude * japanese(r2).powf(-m), 0.0)
            })
        }
        InitialData::Gaussian { amplitude, sigma } => {
            if !(sigma > 0.0) {
                return Err(domain(format!("Gaussian needs σ > 0, got {sigma}")));
            }
            Field::from_fn(grid, |x| {
                let r2: f64 = x.iter().map(|v| v * v).sum();
                Complex64::new(amplitude * (-sigma * r2).exp(), 0.0)
            })
        }
        InitialData::Chirp { base, b } => {
            if &base.grid != grid {
                return Err(Error::GridMismatch);
            }
            Ok(base.chirp(b))
        }
        InitialData::Callback(f) => Field::from_fn(grid, f),
    }
}
