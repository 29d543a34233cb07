//! Fixtures shared by the benchmarks.

use helmholtz_core::geometry::{BoundaryFunction, BoxField, BoxGrid, PerturbedHalfSpace};
use helmholtz_core::norms::{BoundaryDensity, Lattice};
use helmholtz_core::{vec3, QuadratureOptions, SurfaceQuadrature};

pub fn bump() -> PerturbedHalfSpace {
    PerturbedHalfSpace::new(BoundaryFunction::smooth_bump(0.01, 0.3).expect("valid bump"))
}

/// Surface quadrature on `[-4, 4]²` with `cells²` nodes.
pub fn quadrature(hs: &PerturbedHalfSpace, cells: usize) -> SurfaceQuadrature {
    SurfaceQuadrature::new(hs, QuadratureOptions { cells, ..Default::default() }).expect("valid quadrature")
}

pub fn gaussian_density(lattice: Lattice) -> BoundaryDensity {
    BoundaryDensity::from_fn(lattice, |y| (-(y[0] * y[0] + y[1] * y[1])).exp())
}

/// Gradient of a Gaussian blob above the boundary on an `m³` box.
pub fn gradient_field(hs: &PerturbedHalfSpace, m: usize) -> BoxField {
    let grid = BoxGrid::centred(2.0, -1.0, 3.0, m).expect("valid grid");
    BoxField::from_fn(hs, grid, 3, |x| {
        let d = vec3::sub(x, [0.1, 0.0, 0.6]);
        let s2 = 0.45 * 0.45;
        vec3::scale(-2.0 * (-vec3::dot(d, d) / s2).exp() / s2, d).to_vec()
    })
}
