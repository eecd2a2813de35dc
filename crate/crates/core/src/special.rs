//! Special functions and quadrature used by the kernel constructions.

use std::f64::consts::PI;

use statrs::function::gamma::{gamma, gamma_ui};

/// Fourier symbol constant of convolution with `|x|^{−(N−γ)}`:
/// `2^γ π^{N/2} Γ(γ/2) / Γ((N−γ)/2)`, under `f̂(ξ) = ∫ f e^{−ix·ξ}`.
pub fn riesz_constant(dim: usize, gamma_order: f64) -> f64 {
    let n = dim as f64;
    2f64.powf(gamma_order) * PI.powf(n / 2.0) * gamma(gamma_order / 2.0) / gamma((n - gamma_order) / 2.0)
}

/// Epstein zeta `Z_N(s) = Σ'_{n∈Z^N} |n|^{−s}` continued analytically to
/// `0 < s < N`, via the Riemann/Ewald splitting at the self-dual point.
pub fn epstein_zeta(dim: usize, s: f64) -> f64 {
    let n = dim as f64;
    let a = s / 2.0;
    let b = (n - s) / 2.0;
    let reach: i64 = 6;
    let width = (2 * reach + 1) as usize;
    let mut sum = 0.0;
    for flat in 0..width.pow(dim as u32) {
        let mut rest = flat;
        let mut r2 = 0i64;
        for _ in 0..dim {
            let c = (rest % width) as i64 - reach;
            rest /= width;
            r2 += c * c;
        }
        if r2 == 0 {
            continue;
        }
        let x = PI * r2 as f64;
        sum += gamma_ui(a, x) * x.powf(-a) + gamma_ui(b, x) * x.powf(-b);
    }
    let completed = sum + 2.0 / (s - n) - 2.0 / s;
    completed * PI.powf(a) / gamma(a)
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; order];
    let mut weights = vec![0.0; order];
    let m = order as f64;
    for i in 0..order.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (m + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(order, x);
            dp = d;
            let step = p / d;
            x -= step;
            if step.abs() < 1e-15 {
                break;
            }
        }
        let (_, d) = legendre(order, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[order - 1 - i] = x;
        weights[i] = w;
        weights[order - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre(order: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=order {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let m = order as f64;
    let d = m * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// `∫ |x|^{−(N−γ)} dx` over the box `∏ [−h_a, h_a]`.
///
/// Splits the box into cones over its faces: the radial integral is
/// `h/γ` and the face integral is smooth, so Gauss–Legendre converges fast.
pub fn box_kernel_integral(half_sides: &[f64], gamma_order: f64) -> f64 {
    let dim = half_sides.len();
    let expo = gamma_order - dim as f64;
    let (nodes, weights) = gauss_legendre(48);
    let mut total = 0.0;
    for a in 0..dim {
        let h = half_sides[a];
        let others: Vec<f64> = (0..dim).filter(|&b| b != a).map(|b| half_sides[b]).collect();
        let face = match others.len() {
            0 => h.powf(expo),
            1 => {
                let w = others[0];
                nodes
                    .iter()
                    .zip(&weights)
                    .map(|(s, ws)| ws * w * (h * h + (w * s).powi(2)).powf(expo / 2.0))
                    .sum()
            }
            _ => {
                let (w1, w2) = (others[0], others[1]);
                let mut acc = 0.0;
                for (s, ws) in nodes.iter().zip(&weights) {
                    for (r, wr) in nodes.iter().zip(&weights) {
                        let y2 = h * h + (w1 * s).powi(2) + (w2 * r).powi(2);
                        acc += ws * wr * w1 * w2 * y2.powf(expo / 2.0);
                    }
                }
                acc
            }
        };
        total += 2.0 * h / gamma_order * face;
    }
    total
}
