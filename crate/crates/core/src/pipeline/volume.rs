//! Volume potential: `∇q₁ = ∇(E * div v̄)` for a `C¹` extension `v̄` of `v`.
//!
//! Any `q₁` with `-Δq₁ = div v` in `Ω` will do, so the extension below `Γ` is
//! free. A `C¹` one keeps `div v̄` bounded (no surface charge on `Γ`) and the
//! Fourier coefficients of `v̄` decaying fast enough for the spectral
//! projection to be accurate up to the boundary.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fourier::{angular_frequencies, fft_nd};
use crate::geometry::{extend_field_c1, BoxField, PerturbedHalfSpace};
use crate::norms::DECAY_TOLERANCE;

/// Gradient part `ξ(ξ·v̂)/|ξ|²` of a vector field on the box, computed on a
/// grid zero-padded to twice the size along every axis so the periodic
/// images of the (decaying) convolution kernel stay away from the data.
pub fn leray_gradient(v: &BoxField) -> Result<BoxField> {
    if v.components() != 3 {
        return Err(Error::invalid("the volume potential acts on vector fields"));
    }
    let grid = v.grid();
    let m = grid.resolution;
    let dims = [2 * m[0], 2 * m[1], 2 * m[2]];
    let h = grid.spacing();
    let total = dims[0] * dims[1] * dims[2];
    let padded_index = |i: usize, j: usize, k: usize| (i * dims[1] + j) * dims[2] + k;
    let mut spectra: Vec<Vec<Complex64>> = (0..3)
        .map(|c| {
            let mut buf = vec![Complex64::new(0.0, 0.0); total];
            let data = v.component(c);
            for (idx, val) in data.iter().enumerate() {
                let [i, j, k] = grid.multi_index(idx);
                buf[padded_index(i, j, k)] = Complex64::new(*val, 0.0);
            }
            fft_nd(&mut buf, &dims, false);
            buf
        })
        .collect();
    let xi: Vec<Vec<f64>> = (0..3).map(|a| angular_frequencies(dims[a], h[a])).collect();
    let (first, rest) = spectra.split_at_mut(1);
    let (second, third) = rest.split_at_mut(1);
    let (s0, s1, s2) = (&mut first[0], &mut second[0], &mut third[0]);
    s0.par_iter_mut().zip(s1.par_iter_mut()).zip(s2.par_iter_mut()).enumerate().for_each(|(idx, ((a, b), c))| {
        let k = idx % dims[2];
        let r = idx / dims[2];
        let (i, j) = (r / dims[1], r % dims[1]);
        let w = [xi[0][i], xi[1][j], xi[2][k]];
        let w2 = w[0] * w[0] + w[1] * w[1] + w[2] * w[2];
        if w2 == 0.0 {
            *a = Complex64::new(0.0, 0.0);
            *b = Complex64::new(0.0, 0.0);
            *c = Complex64::new(0.0, 0.0);
            return;
        }
        let p = (*a * w[0] + *b * w[1] + *c * w[2]) / w2;
        *a = p * w[0];
        *b = p * w[1];
        *c = p * w[2];
    });
    let mut out = vec![vec![0.0; grid.len()]; 3];
    for (c, spec) in spectra.iter_mut().enumerate() {
        fft_nd(spec, &dims, true);
        for (idx, o) in out[c].iter_mut().enumerate() {
            let [i, j, k] = grid.multi_index(idx);
            *o = spec[padded_index(i, j, k)].re;
        }
    }
    v.with_data(out)
}

/// `∇(E * div v)` for a field given on the whole box (no reflection): the
/// free-space gradient part of `v`.
pub fn newton_potential_grad(v: &BoxField) -> Result<BoxField> {
    v.check_decay(DECAY_TOLERANCE)?;
    leray_gradient(v)
}

/// `∇q₁` on the nodes of `Ω` (mask of `v`). `rho` is the cut-off depth of
/// the extension below `Γ`.
pub fn volume_potential_grad(hs: &PerturbedHalfSpace, v: &BoxField, rho: f64) -> Result<BoxField> {
    volume_potential_grad_with(hs, v, rho, DECAY_TOLERANCE)
}

/// [`volume_potential_grad`] with a custom bound on `ring max / max |v|`.
pub fn volume_potential_grad_with(hs: &PerturbedHalfSpace, v: &BoxField, rho: f64, decay: f64) -> Result<BoxField> {
    v.check_decay(decay)?;
    let grid = v.grid();
    let h = hs.boundary();
    let depth_needed = h.sup_abs() + rho;
    if grid.lower[2] > -depth_needed {
        return Err(Error::invalid(format!(
            "box bottom {} must lie below -{depth_needed:.4} to hold the extension",
            grid.lower[2]
        )));
    }
    let extended = extend_field_c1(hs, v, rho)?;
    let grad = leray_gradient(&extended)?;
    BoxField::new(grid.clone(), grad.data().to_vec(), v.mask().to_vec())
}
