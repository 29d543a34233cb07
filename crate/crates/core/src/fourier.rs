//! Thin multi-dimensional wrappers around `rustfft`.
//!
//! Continuous convention: `f̂(ξ) = ∫ e^{-ix·ξ} f(x) dx`. On a lattice of
//! spacing `Δ` the transform is approximated by `Δ^d · DFT`, with angular
//! frequencies `ξ_k = 2πk/(NΔ)`.

use num_complex::Complex64;
use rustfft::FftPlanner;

/// Transforms `data` (row-major, last axis fastest) along every axis.
pub fn fft_nd(data: &mut [Complex64], dims: &[usize], inverse: bool) {
    let mut planner = FftPlanner::new();
    for axis in 0..dims.len() {
        fft_axis(&mut planner, data, dims, axis, inverse);
    }
    if inverse {
        let scale = 1.0 / data.len() as f64;
        data.iter_mut().for_each(|z| *z *= scale);
    }
}

fn fft_axis(planner: &mut FftPlanner<f64>, data: &mut [Complex64], dims: &[usize], axis: usize, inverse: bool) {
    let n = dims[axis];
    let plan = if inverse { planner.plan_fft_inverse(n) } else { planner.plan_fft_forward(n) };
    let stride: usize = dims[axis + 1..].iter().product();
    let outer: usize = dims[..axis].iter().product();
    if stride == 1 {
        plan.process(data);
        return;
    }
    let mut line = vec![Complex64::new(0.0, 0.0); n];
    let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
    for o in 0..outer {
        let base = o * n * stride;
        for s in 0..stride {
            for k in 0..n {
                line[k] = data[base + k * stride + s];
            }
            plan.process_with_scratch(&mut line, &mut scratch);
            for k in 0..n {
                data[base + k * stride + s] = line[k];
            }
        }
    }
}

/// Angular frequency of DFT bin `k` for `n` samples of spacing `h`.
#[inline]
pub fn angular_frequency(k: usize, n: usize, h: f64) -> f64 {
    let signed = if k <= n / 2 { k as f64 } else { k as f64 - n as f64 };
    2.0 * std::f64::consts::PI * signed / (n as f64 * h)
}

pub fn angular_frequencies(n: usize, h: f64) -> Vec<f64> {
    (0..n).map(|k| angular_frequency(k, n, h)).collect()
}

/// Smallest power of two `>= n`.
pub fn padded_size(n: usize) -> usize {
    n.next_power_of_two()
}
