//! Shared fixtures for the benchmarks.

use ghartree_core::{sample, Field, Grid, InitialData, ModelParameters, ParamSpec};

/// The one-dimensional parameter set used throughout the examples.
pub fn params_1d() -> ModelParameters {
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
    .expect("valid 1D parameters")
}

/// A three-dimensional set inside the blow-up regime.
pub fn params_3d() -> ModelParameters {
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
    .expect("valid 3D parameters")
}

/// `0.5 e^{−|x|²}` on a cube of side `length` with `n` points per axis.
pub fn gaussian(dim: usize, length: f64, n: usize) -> Field {
    let grid = Grid::cube(dim, length, n).expect("valid grid");
    sample(
        &grid,
        &InitialData::Gaussian {
            amplitude: 0.5,
            sigma: 1.0,
        },
    )
    .expect("Gaussian sample")
}
