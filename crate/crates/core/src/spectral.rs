//! Fourier multipliers on periodic grids.
//!
//! Convention: `f̂(ξ) = ∫ f(x) e^{−ix·ξ} dx`, so `J^s` has symbol `⟨ξ⟩^s`,
//! `D^s` has symbol `|ξ|^s` and `e^{itΔ}` has symbol `e^{−it|ξ|²}`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{domain, ensure_finite, Error, Result};
use crate::fft;
use crate::grid::{Field, Grid};
use crate::special::{box_kernel_integral, epstein_zeta, riesz_constant};

/// How the Riesz-potential symbol is fixed at `ξ = 0`, where `|ξ|^{−γ}`
/// has no periodic meaning.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ZeroMode {
    /// `σ(0) = 0`: the box mean of the input does not contribute.
    Zero,
    /// `σ(0) = ∫_box |x|^{−(N−γ)} dx`.
    CellAverage,
    /// `σ(0) = −L^γ Z_N(N−γ)`, which removes the constant offset between
    /// the periodic kernel and `|x|^{−(N−γ)}` near the origin. Cubic boxes only.
    #[default]
    Matched,
}

impl ZeroMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            ZeroMode::Zero => "zero",
            ZeroMode::CellAverage => "cellavg",
            ZeroMode::Matched => "matched",
        }
    }
}

impl fmt::Display for ZeroMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ZeroMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zero" => Ok(ZeroMode::Zero),
            "cellavg" => Ok(ZeroMode::CellAverage),
            "matched" => Ok(ZeroMode::Matched),
            other => Err(domain(format!(
                "unknown zero-mode policy '{other}' (expected zero, cellavg or matched)"
            ))),
        }
    }
}

/// Treatment of the mean for negative-order Riesz derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MeanPolicy {
    /// Reject fields with a nonzero mean.
    #[default]
    Strict,
    /// Drop the mean.
    Zero,
}

/// Unnormalized forward transform of the field values.
pub fn spectrum(field: &Field) -> Vec<Complex64> {
    let mut data = field.values().to_vec();
    fft::forward(field.grid(), &mut data);
    data
}

pub(crate) fn from_spectrum(grid: &Grid, mut data: Vec<Complex64>, t: f64) -> Field {
    fft::inverse(grid, &mut data);
    Field::from_parts(grid.clone(), data, t)
}

fn apply_symbol(field: &Field, symbol: &[Complex64]) -> Field {
    let mut data = spectrum(field);
    for (z, s) in data.iter_mut().zip(symbol) {
        *z *= s;
    }
    from_spectrum(field.grid(), data, field.t())
}

/// `F^{−1}[σ(ξ) f̂(ξ)]` for a symbol evaluated on the frequency lattice.
pub fn fourier_multiplier(field: &Field, symbol: impl Fn(&[f64]) -> Complex64) -> Result<Field> {
    let values = field.grid().map_modes(symbol);
    if values.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::NonFinite("multiplier symbol".into()));
    }
    Ok(apply_symbol(field, &values))
}

/// Free Schrödinger flow `e^{itΔ}`.
pub fn free_propagate(field: &Field, t: f64) -> Result<Field> {
    ensure_finite(t, "propagation time")?;
    let symbol: Vec<Complex64> = field
        .grid()
        .wavenumber_sq()
        .into_iter()
        .map(|k2| Complex64::from_polar(1.0, -t * k2))
        .collect();
    Ok(apply_symbol(field, &symbol))
}

/// Bessel potential `J^s` with symbol `(1+|ξ|²)^{s/2}`.
pub fn bessel(field: &Field, s: f64) -> Result<Field> {
    ensure_finite(s, "Bessel order")?;
    let symbol: Vec<Complex64> = field
        .grid()
        .wavenumber_sq()
        .into_iter()
        .map(|k2| Complex64::new((1.0 + k2).powf(s / 2.0), 0.0))
        .collect();
    Ok(apply_symbol(field, &symbol))
}

/// `‖J^s f‖_{L²}` computed directly from the spectrum.
pub fn sobolev_norm(field: &Field, s: f64) -> f64 {
    let spec = spectrum(field);
    let k2 = field.grid().wavenumber_sq();
    spectral_l2(field.grid(), &spec, |i| (1.0 + k2[i]).powf(s / 2.0))
}

/// `(Σ |w_i f̂_i|²)^{1/2}` normalized so that `w ≡ 1` gives `‖f‖_{L²}`.
pub(crate) fn spectral_l2(grid: &Grid, spec: &[Complex64], weight: impl Fn(usize) -> f64) -> f64 {
    let s: f64 = spec
        .iter()
        .enumerate()
        .map(|(i, z)| z.norm_sqr() * weight(i).powi(2))
        .sum();
    (s * grid.cell_volume() / grid.len() as f64).sqrt()
}

/// Riesz derivative `D^s` with symbol `|ξ|^s`.
pub fn riesz_derivative(field: &Field, s: f64, policy: MeanPolicy) -> Result<Field> {
    ensure_finite(s, "Riesz order")?;
    let mut data = spectrum(field);
    if s < 0.0 && policy == MeanPolicy::Strict {
        let scale = data.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if data[0].norm() > 1e-12 * scale.max(f64::MIN_POSITIVE) {
            return Err(domain(
                "negative-order Riesz derivative of a field with nonzero mean under the strict policy",
            ));
        }
    }
    let k2 = field.grid().wavenumber_sq();
    for (z, &k2) in data.iter_mut().zip(&k2) {
        *z *= if k2 == 0.0 {
            if s == 0.0 {
                1.0
            } else {
                0.0
            }
        } else {
            k2.powf(s / 2.0)
        };
    }
    Ok(from_spectrum(field.grid(), data, field.t()))
}

/// Convolution with `|x|^{−(N−γ)}` as a cached Fourier multiplier.
#[derive(Debug, Clone)]
pub struct RieszKernel {
    grid: Grid,
    gamma: f64,
    zero_mode: ZeroMode,
    symbol: Vec<f64>,
}

impl RieszKernel {
    pub fn new(grid: &Grid, gamma: f64, zero_mode: ZeroMode) -> Result<Self> {
        let dim = grid.dim() as f64;
        if !(gamma > 0.0 && gamma < dim) {
            return Err(domain(format!("Riesz order γ = {gamma} outside (0, {dim})")));
        }
        let c = riesz_constant(grid.dim(), gamma);
        let mut symbol: Vec<f64> = grid
            .wavenumber_sq()
            .into_iter()
            .map(|k2| if k2 == 0.0 { 0.0 } else { c * k2.powf(-gamma / 2.0) })
            .collect();
        symbol[0] = zero_mode_value(grid, gamma, zero_mode)?;
        Ok(Self {
            grid: grid.clone(),
            gamma,
            zero_mode,
            symbol,
        })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn zero_mode(&self) -> ZeroMode {
        self.zero_mode
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Symbol value at `ξ = 0`.
    pub fn zero_symbol(&self) -> f64 {
        self.symbol[0]
    }

    /// Symbol in FFT storage order.
    pub fn symbol(&self) -> &[f64] {
        &self.symbol
    }

    /// Potential of a real density (such as `|u|^p`); the result is real.
    pub fn apply_real(&self, density: &[f64]) -> Vec<f64> {
        let mut data: Vec<Complex64> = density.iter().map(|&d| Complex64::new(d, 0.0)).collect();
        fft::forward(&self.grid, &mut data);
        for (z, s) in data.iter_mut().zip(&self.symbol) {
            *z *= s;
        }
        fft::inverse(&self.grid, &mut data);
        data.into_iter().map(|z| z.re).collect()
    }

    pub fn apply(&self, field: &Field) -> Result<Field> {
        if field.grid() != &self.grid {
            return Err(Error::GridMismatch);
        }
        let mut data = spectrum(field);
        for (z, s) in data.iter_mut().zip(&self.symbol) {
            *z *= s;
        }
        Ok(from_spectrum(&self.grid, data, field.t()))
    }
}

fn zero_mode_value(grid: &Grid, gamma: f64, zero_mode: ZeroMode) -> Result<f64> {
    match zero_mode {
        ZeroMode::Zero => Ok(0.0),
        ZeroMode::CellAverage => {
            let half: Vec<f64> = grid.lengths().iter().map(|l| l / 2.0).collect();
            Ok(box_kernel_integral(&half, gamma))
        }
        ZeroMode::Matched => {
            let l = grid.lengths()[0];
            if grid.lengths().iter().any(|&x| x != l) {
                return Err(domain("matched zero mode requires equal side lengths"));
            }
            let dim = grid.dim();
            Ok(-l.powf(gamma) * epstein_zeta(dim, dim as f64 - gamma))
        }
    }
}

/// `|x|^{−(N−γ)} ∗ f` on the periodic box.
pub fn riesz_potential(field: &Field, gamma: f64, zero_mode: ZeroMode) -> Result<Field> {
    RieszKernel::new(field.grid(), gamma, zero_mode)?.apply(field)
}

/// Symbol of `∂^α` on the lattice. The Nyquist mode of an axis is
/// dropped when that axis carries an odd order, keeping real fields real.
pub(crate) fn derivative_symbol(grid: &Grid, alpha: &[usize]) -> Vec<Complex64> {
    // Separable: one table per axis, multiplied out row-major.
    let tables: Vec<Vec<Complex64>> = (0..grid.dim())
        .map(|a| {
            let nyq = grid.nyquist(a);
            let order = alpha[a];
            grid.wavenumbers(a)
                .into_iter()
                .map(|k| {
                    if order % 2 == 1 && (k.abs() - nyq).abs() < 1e-9 * nyq {
                        Complex64::new(0.0, 0.0)
                    } else {
                        Complex64::new(0.0, k).powu(order as u32)
                    }
                })
                .collect()
        })
        .collect();
    let mut out = vec![Complex64::new(1.0, 0.0)];
    for table in &tables {
        out = out.iter().flat_map(|z| table.iter().map(move |t| z * t)).collect();
    }
    out
}

/// `∂^α f` computed spectrally.
pub fn partial_derivative(field: &Field, alpha: &[usize]) -> Result<Field> {
    if alpha.len() != field.grid().dim() {
        return Err(domain("multi-index length differs from the dimension"));
    }
    Ok(apply_symbol(field, &derivative_symbol(field.grid(), alpha)))
}

/// The N components `∂_j f`, each the multiplier `iξ_j`.
pub fn gradient(field: &Field) -> Vec<Field> {
    let spec = spectrum(field);
    gradient_from_spectrum(field.grid(), &spec, field.t())
}

pub(crate) fn gradient_from_spectrum(grid: &Grid, spec: &[Complex64], t: f64) -> Vec<Field> {
    let dim = grid.dim();
    (0..dim)
        .map(|axis| {
            let mut alpha = vec![0; dim];
            alpha[axis] = 1;
            let symbol = derivative_symbol(grid, &alpha);
            let data = spec.iter().zip(&symbol).map(|(z, s)| z * s).collect();
            from_spectrum(grid, data, t)
        })
        .collect()
}

/// Stein square-function derivative
/// `𝒟^b f(x) = (Σ_{y≠x} |f(x)−f(y)|² |x−y|^{−(N+2b)} dx^N)^{1/2}`
/// over the periodic lattice with minimum-image distances.
///
/// The sum is expanded as `|f|²ΣK − 2Re(f̄ K∗f) + K∗|f|²` and the
/// convolutions are done by FFT. Excluding `y = x` biases the result by
/// `O(dx^{1−b})` relative for smooth `f`.
pub fn stein_derivative(field: &Field, b: f64) -> Result<Field> {
    if !(b > 0.0 && b < 1.0) {
        return Err(domain(format!("Stein derivative order b = {b} outside (0, 1)")));
    }
    let grid = field.grid();
    let dim = grid.dim();
    let expo = -(dim as f64 + 2.0 * b) / 2.0;
    let offsets: Vec<Vec<f64>> = (0..dim)
        .map(|a| {
            let n = grid.points()[a] as i64;
            let dx = grid.spacing(a);
            (0..n)
                .map(|j| if j < n / 2 { j } else { j - n })
                .map(|j| j as f64 * dx)
                .collect()
        })
        .collect();
    let mut kernel = vec![Complex64::new(0.0, 0.0); grid.len()];
    let mut idx = vec![0usize; dim];
    for k in kernel.iter_mut() {
        let r2: f64 = (0..dim).map(|a| offsets[a][idx[a]].powi(2)).sum();
        if r2 > 0.0 {
            *k = Complex64::new(r2.powf(expo), 0.0);
        }
        for a in (0..dim).rev() {
            idx[a] += 1;
            if idx[a] < grid.points()[a] {
                break;
            }
            idx[a] = 0;
        }
    }
    let total: f64 = kernel.iter().map(|z| z.re).sum();
    let mut khat = kernel;
    fft::forward(grid, &mut khat);

    let convolve = |values: Vec<Complex64>| -> Vec<Complex64> {
        let mut data = values;
        fft::forward(grid, &mut data);
        for (z, k) in data.iter_mut().zip(&khat) {
            *z *= k;
        }
        fft::inverse(grid, &mut data);
        data
    };
    let kf = convolve(field.values().to_vec());
    let kmod = convolve(
        field
            .values()
            .iter()
            .map(|z| Complex64::new(z.norm_sqr(), 0.0))
            .collect(),
    );
    let dv = grid.cell_volume();
    let values = field
        .values()
        .iter()
        .zip(kf.iter().zip(&kmod))
        .map(|(f, (kf, km))| {
            let s = f.norm_sqr() * total - 2.0 * (f.conj() * kf).re + km.re;
            Complex64::new((s.max(0.0) * dv).sqrt(), 0.0)
        })
        .collect();
    Ok(Field::from_parts(grid.clone(), values, field.t()))
}

/// Periodic Dirichlet kernel of the trigonometric interpolant on `n`
/// points, with the Nyquist mode split symmetrically.
fn dirichlet(n: usize, phase: f64) -> f64 {
    let nf = n as f64;
    let half = phase / 2.0;
    let s = half.sin();
    if s.abs() < 1e-13 {
        // phase ≡ 0 mod 2π and n is even: every mode contributes 1.
        return 1.0;
    }
    (((nf - 1.0) * half).sin() / s + (nf * half).cos()) / nf
}

/// Applies a dense `n×n` matrix along one axis of a row-major array.
fn apply_along_axis(points: &[usize], axis: usize, matrix: &[f64], data: &[Complex64]) -> Vec<Complex64> {
    let n = points[axis];
    let inner: usize = points[axis + 1..].iter().product();
    let block = n * inner;
    let mut out = vec![Complex64::new(0.0, 0.0); data.len()];
    for (src, dst) in data.chunks(block).zip(out.chunks_mut(block)) {
        for i in 0..n {
            let row = &matrix[i * n..(i + 1) * n];
            for r in 0..inner {
                let mut acc = Complex64::new(0.0, 0.0);
                for (j, &w) in row.iter().enumerate() {
                    acc += src[j * inner + r] * w;
                }
                dst[i * inner + r] = acc;
            }
        }
    }
    out
}

/// Evaluates the trigonometric interpolant of `f` at `x/a` for every
/// lattice point `x`, i.e. returns `g(x) = f(x/a)`.
pub fn dilate(field: &Field, a: f64) -> Result<Field> {
    if !(a.is_finite() && a > 0.0) {
        return Err(domain(format!("dilation factor {a} must be positive")));
    }
    let grid = field.grid();
    let mut data = field.values().to_vec();
    for axis in 0..grid.dim() {
        let n = grid.points()[axis];
        let l = grid.lengths()[axis];
        let x = grid.coords(axis);
        let mut matrix = vec![0.0; n * n];
        for i in 0..n {
            let y = x[i] / a;
            for j in 0..n {
                matrix[i * n + j] = dirichlet(n, 2.0 * PI * (y - x[j]) / l);
            }
        }
        data = apply_along_axis(grid.points(), axis, &matrix, &data);
    }
    Field::new(grid.clone(), data, field.t())
}
