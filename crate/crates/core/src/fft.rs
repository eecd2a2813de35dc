//! Multi-dimensional FFTs over row-major lattices.
//!
//! Plans come from one process-wide planner behind a mutex. Lines are
//! transformed in parallel; each line is independent, so results do not
//! depend on scheduling.

use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftDirection, FftPlanner};

use crate::grid::Grid;

const PARALLEL_MIN: usize = 1 << 14;

fn planner() -> &'static Mutex<FftPlanner<f64>> {
    static PLANNER: OnceLock<Mutex<FftPlanner<f64>>> = OnceLock::new();
    PLANNER.get_or_init(|| Mutex::new(FftPlanner::new()))
}

fn plan(n: usize, direction: FftDirection) -> Arc<dyn Fft<f64>> {
    let mut guard = planner().lock().unwrap_or_else(|e| e.into_inner());
    guard.plan_fft(n, direction)
}

/// Unnormalized forward transform `Σ f_j e^{−iξx_j}` in place.
pub fn forward(grid: &Grid, data: &mut [Complex64]) {
    transform(grid.points(), data, FftDirection::Forward);
}

/// Inverse transform including the `1/n^N` normalization, in place.
pub fn inverse(grid: &Grid, data: &mut [Complex64]) {
    transform(grid.points(), data, FftDirection::Inverse);
    let scale = 1.0 / data.len() as f64;
    for z in data.iter_mut() {
        *z *= scale;
    }
}

fn transform(points: &[usize], data: &mut [Complex64], direction: FftDirection) {
    debug_assert_eq!(points.iter().product::<usize>(), data.len());
    for axis in 0..points.len() {
        let fft = plan(points[axis], direction);
        let inner: usize = points[axis + 1..].iter().product();
        if inner == 1 {
            contiguous(&*fft, data);
        } else {
            strided(&*fft, data, points[axis], inner);
        }
    }
}

fn contiguous(fft: &dyn Fft<f64>, data: &mut [Complex64]) {
    let n = fft.len();
    let scratch_len = fft.get_inplace_scratch_len();
    if data.len() < PARALLEL_MIN {
        let mut scratch = vec![Complex64::default(); scratch_len];
        fft.process_with_scratch(data, &mut scratch);
        return;
    }
    let lines_per_task = (PARALLEL_MIN / n).max(1);
    data.par_chunks_mut(n * lines_per_task).for_each_init(
        || vec![Complex64::default(); scratch_len],
        |scratch, chunk| fft.process_with_scratch(chunk, scratch),
    );
}

/// Transforms along a non-contiguous axis by transposing each outer block
/// into contiguous lines and back.
fn strided(fft: &dyn Fft<f64>, data: &mut [Complex64], n: usize, inner: usize) {
    let block = n * inner;
    let mut lines = vec![Complex64::default(); block];
    for chunk in data.chunks_mut(block) {
        for j in 0..n {
            for i in 0..inner {
                lines[i * n + j] = chunk[j * inner + i];
            }
        }
        contiguous(fft, &mut lines);
        for j in 0..n {
            for i in 0..inner {
                chunk[j * inner + i] = lines[i * n + j];
            }
        }
    }
}
