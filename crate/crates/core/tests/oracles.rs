//! Checks against closed forms and independent quadratures.

use approx::assert_relative_eq;
use ghartree_core::criteria::{blowup_criterion, chirp_b_ranges, pseudo_conformal_map};
use ghartree_core::observables::{x_norm, XNormKind};
use ghartree_core::params::{
    contraction_polynomials, derived_constants, existence_time_estimate, ExistenceConstants, ModelParameters, ParamSpec,
};
use ghartree_core::spectral::{free_propagate, riesz_potential, stein_derivative, ZeroMode};
use ghartree_core::{conserved_quantities, evolve, virial_quantities, Complex64, Field, Grid, IntegratorConfig};

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
    .unwrap()
}

fn three_d() -> ModelParameters {
    ModelParameters::new(ParamSpec {
        dim: 3,
        p: 1.9,
        gamma: 0.5,
        mu: 1.0,
        m: 3.0,
        big_m: 13,
        m0: 7,
        b: 0.0,
    })
    .unwrap()
}

fn gaussian(grid: &Grid) -> Field {
    Field::from_fn(grid, |x| {
        Complex64::new((-x.iter().map(|v| v * v).sum::<f64>()).exp(), 0.0)
    })
    .unwrap()
}

/// Composite Simpson rule on `[a, b]` with `n` (even) panels.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

#[test]
fn gaussian_mass_matches_closed_form() {
    let g1 = gaussian(&Grid::cube(1, 40.0, 512).unwrap());
    assert_relative_eq!(g1.mass(), (std::f64::consts::PI / 2.0).sqrt(), max_relative = 1e-13);
    let g3 = gaussian(&Grid::cube(3, 16.0, 48).unwrap());
    assert_relative_eq!(g3.mass(), (std::f64::consts::PI / 2.0).powf(1.5), max_relative = 1e-10);
}

#[test]
fn free_gaussian_evolution_is_exact() {
    let grid = Grid::cube(1, 40.0, 512).unwrap();
    let t = 0.5;
    let u = free_propagate(&gaussian(&grid), t).unwrap();
    let z = Complex64::new(1.0, 4.0 * t);
    let exact = Field::from_fn(&grid, |x| (-(x[0] * x[0]) / z).exp() / z.sqrt()).unwrap();
    assert!(u.sub(&exact).unwrap().sup_norm() < 1e-12);
}

#[test]
fn free_variance_grows_quadratically() {
    // |u|² = (1+16t²)^{−1/2} e^{−2x²/(1+16t²)}, so V(t) = √(π/2)(1+16t²)/4.
    let grid = Grid::cube(1, 60.0, 1024).unwrap();
    let params = one_d().with_mu(0.0).unwrap();
    let run = evolve(&gaussian(&grid), &params, &IntegratorConfig::new(0.05, 1.0));
    let c = (std::f64::consts::PI / 2.0).sqrt() / 4.0;
    for r in &run.records {
        assert_relative_eq!(r.variance, c * (1.0 + 16.0 * r.t * r.t), max_relative = 1e-10);
        assert_relative_eq!(r.variance_t, 32.0 * c * r.t, epsilon = 1e-10);
        assert_relative_eq!(r.variance_tt, 32.0 * c, max_relative = 1e-10);
    }
}

/// `∫ |x−y|^{−(1−γ)} e^{−y²} dy` by splitting at `y = x` and substituting
/// `|x−y| = w^{1/γ}`, which removes the singularity.
fn riesz_quadrature(x: f64, gamma: f64, panels: usize) -> f64 {
    let reach = 12f64.powf(gamma);
    let side = |sign: f64| {
        simpson(
            |w| {
                let s = w.powf(1.0 / gamma);
                (-(x + sign * s).powi(2)).exp() / gamma
            },
            0.0,
            reach,
            panels,
        )
    };
    side(1.0) + side(-1.0)
}

#[test]
fn riesz_potential_matches_whole_line_quadrature() {
    let grid = Grid::cube(1, 64.0, 1024).unwrap();
    for gamma in [0.05, 0.5] {
        let w = riesz_potential(&gaussian(&grid), gamma, ZeroMode::Matched).unwrap();
        let xs = grid.coords(0);
        for (j, x) in xs.iter().enumerate() {
            if x.abs() > 3.0 {
                continue;
            }
            let exact = riesz_quadrature(*x, gamma, 16 * 1024);
            assert_relative_eq!(w.values()[j].re, exact, max_relative = 1e-2);
            assert!(w.values()[j].im.abs() < 1e-12);
        }
    }
}

#[test]
fn derived_constants_for_three_dimensional_example() {
    let dc = derived_constants(&three_d());
    assert_relative_eq!(dc.s_c, 1.5 - 2.5 / 1.8, max_relative = 1e-14);
    assert_relative_eq!(dc.k_c, 0.1, max_relative = 1e-12);
    // N²(N(p−2)+N−γ−2)/(8(N(p−2)+N−γ)) = 9·0.2/(8·2.2).
    assert_relative_eq!(dc.omega_c_sq.unwrap(), 1.8 / 17.6, max_relative = 1e-12);
}

/// `H_k` by the physicists' recurrence.
fn hermite(k: usize, x: f64) -> f64 {
    let (mut a, mut b) = (1.0, 2.0 * x);
    if k == 0 {
        return a;
    }
    for n in 1..k {
        let next = 2.0 * x * b - 2.0 * n as f64 * a;
        a = b;
        b = next;
    }
    b
}

#[test]
fn weighted_norm_matches_hermite_derivatives() {
    let params = one_d();
    let grid = Grid::cube(1, 40.0, 1024).unwrap();
    let (total, parts) = x_norm(&gaussian(&grid), &params).unwrap();
    assert_eq!(parts.len(), 10);
    let m = params.m();
    let weight = |x: f64| (1.0 + x * x).powf(m / 2.0);
    let deriv = |k: usize, x: f64| hermite(k, x) * (-x * x).exp();
    let mut expected_total = 0.0;
    for part in &parts {
        let k = part.alpha[0];
        let expected = match part.kind {
            XNormKind::WeightedSup => {
                assert_eq!(k, 0);
                1.0
            }
            XNormKind::WeightedL2 => {
                assert!((1..=6).contains(&k));
                simpson(|x| (weight(x) * deriv(k, x)).powi(2), -20.0, 20.0, 200_000).sqrt()
            }
            XNormKind::L2 => {
                assert!((7..=9).contains(&k));
                simpson(|x| deriv(k, x).powi(2), -20.0, 20.0, 200_000).sqrt()
            }
        };
        // Round-off in the transform is amplified by |ξ|^k at high orders.
        let tol = if k >= 8 { 1e-6 } else { 1e-10 };
        assert_relative_eq!(part.value, expected, max_relative = tol);
        expected_total += expected;
    }
    assert_relative_eq!(total, expected_total, max_relative = 1e-6);
}

#[test]
fn stein_derivative_matches_direct_double_sum() {
    let grid = Grid::cube(1, 20.0, 128).unwrap();
    let f = Field::from_fn(&grid, |x| {
        Complex64::new((-x[0] * x[0]).exp(), 0.3 * x[0] * (-x[0] * x[0] / 2.0).exp())
    })
    .unwrap();
    let b = 0.4;
    let d = stein_derivative(&f, b).unwrap();
    let n = 128usize;
    let dx = grid.spacing(0);
    for i in 0..n {
        let mut s = 0.0;
        for j in 0..n {
            if i == j {
                continue;
            }
            let k = (i as i64 - j as i64).rem_euclid(n as i64);
            let k = k.min(n as i64 - k) as f64 * dx;
            s += (f.values()[i] - f.values()[j]).norm_sqr() * k.powf(-(1.0 + 2.0 * b));
        }
        assert_relative_eq!(d.values()[i].re, (s * dx).sqrt(), max_relative = 1e-9, epsilon = 1e-12);
    }
}

#[test]
fn contraction_polynomials_match_termwise_sums() {
    let params = one_d();
    let (lambda, r, p) = (1.3_f64, 0.7_f64, 1.8_f64);
    let c = contraction_polynomials(lambda, r, &params).unwrap();
    let top = 9;
    let g1 = r.powf(p)
        + (1..=top)
            .map(|k| lambda.powf(-(2.0 * k as f64 - p)) * r.powi(2 * k))
            .sum::<f64>();
    let g2: f64 = (0..=top)
        .map(|k| lambda.powf(-(2.0 * (k as f64 + 1.0) - p)) * r.powi(2 * k + 1))
        .sum();
    assert_relative_eq!(c.g1, g1, max_relative = 1e-14);
    assert_relative_eq!(c.g2, g2, max_relative = 1e-14);
}

#[test]
fn existence_time_is_the_largest_admissible_time() {
    let params = one_d();
    let constants = ExistenceConstants::default();
    let (eta, lambda) = (0.2, 1.0);
    let est = existence_time_estimate(eta, lambda, &params, constants).unwrap();
    assert!(!est.none_found && est.t > 0.0 && est.t < 1.0, "{est:?}");

    let r = 2.0 * eta;
    let c = contraction_polynomials(lambda, r, &params).unwrap();
    let q = 1.55;
    let holds = |t: f64| {
        let g = (1.0 + t * t).powf(q / 2.0);
        0.5 * g + t * g * c.g1 * c.g2 / r <= 1.0
            && t * g * (eta + c.g1 * c.g2) <= lambda / 2.0
            && t * g * (c.j1 * c.g2 + c.g1 * c.j2) < 1.0
    };
    assert!(holds(est.t));
    assert!(!holds(est.t * (1.0 + 1e-9)));

    // A scan on a uniform grid brackets the same time.
    let scan = (1..=100_000)
        .map(|i| i as f64 * 1e-5)
        .take_while(|&t| holds(t))
        .last()
        .unwrap();
    assert!(scan <= est.t && est.t < scan + 1e-5);
}

#[test]
fn existence_time_reports_none_for_huge_data() {
    let est = existence_time_estimate(1e6, 1e-3, &one_d(), ExistenceConstants::default()).unwrap();
    assert!(est.none_found);
}

#[test]
fn free_pseudo_conformal_map_reproduces_free_flow() {
    // With μ = 0 both routes are the free flow, so the map is checked alone.
    let grid = Grid::cube(1, 40.0, 1024).unwrap();
    let v0 = Field::from_fn(&grid, |x| Complex64::new(0.5 * (-x[0] * x[0]).exp(), 0.0)).unwrap();
    let (b, t) = (2.0, 0.4);
    let tau = t / (1.0 + b * t);
    let v = free_propagate(&v0, tau).unwrap();
    let u = pseudo_conformal_map(&v, tau, b).unwrap();
    assert_relative_eq!(u.t(), t, max_relative = 1e-14);
    let direct = free_propagate(&v0.chirp(b), t).unwrap();
    assert!(u.sub(&direct).unwrap().l2_norm() < 1e-10);
}

#[test]
fn chirp_shifts_energy_and_variance_rate() {
    // For real v: E[e^{ib|x|²/4}v] = E[v] + b²‖xv‖²/8 and V_t = 2b‖xv‖².
    let grid = Grid::cube(1, 40.0, 1024).unwrap();
    let params = one_d();
    let v = gaussian(&grid);
    let b = 1.5;
    let e0 = conserved_quantities(&v, &params).unwrap().energy;
    let x2 = virial_quantities(&v, &params).unwrap().v;
    let u = v.chirp(b);
    assert_relative_eq!(
        conserved_quantities(&u, &params).unwrap().energy,
        e0 + b * b * x2 / 8.0,
        max_relative = 1e-12
    );
    assert_relative_eq!(
        virial_quantities(&u, &params).unwrap().v_t,
        2.0 * b * x2,
        max_relative = 1e-12
    );
}

#[test]
fn blowup_criterion_names_failed_regime_conditions() {
    let e = blowup_criterion(1.0, 1.0, 1.0, 0.0, &one_d()).unwrap_err().to_string();
    assert!(e.contains("p > max{(N+2)/N, 4/3}"), "{e}");
    let e = blowup_criterion(1.0, -1.0, 1.0, 0.0, &three_d())
        .unwrap_err()
        .to_string();
    assert!(e.contains("energy > 0"), "{e}");
}

#[test]
fn chirp_ranges_reject_data_with_angular_momentum() {
    let grid = Grid::cube(3, 16.0, 32).unwrap();
    let v = gaussian(&grid).chirp(1.0);
    let e = chirp_b_ranges(&v, &three_d()).unwrap_err().to_string();
    assert!(e.contains("angular"), "{e}");
}
