use rayon::prelude::*;

use super::boundary::GraphFunction;
use super::grid::BoxField;
use super::halfspace::{cutoff_profile, PerturbedHalfSpace};
use super::Point;
use crate::error::{Error, Result};
use crate::vec3;

/// `(I - 2N⊗N)v`: flips the component along the unit vector `N`.
pub fn reflect_normal_odd(normal: Point, v: Point) -> Point {
    vec3::axpy(-2.0 * vec3::dot(v, normal), normal, v)
}

/// Extends a vector field from `Ω` to the whole box: the normal part is odd
/// and the tangential part even across `Γ`, damped by `θ(d/ρ)` and zero
/// beyond the tube. Inside `Ω` the field is returned unchanged.
pub fn extend_field(hs: &PerturbedHalfSpace, v: &BoxField, rho: f64) -> Result<BoxField> {
    if !(rho > 0.0 && rho <= 0.5 * hs.rho0() * (1.0 + 1e-12)) {
        return Err(Error::invalid(format!("cut-off radius {rho} must lie in (0, rho0/2 = {}]", 0.5 * hs.rho0())));
    }
    reflect(hs, v, rho)
}

/// `(c, λ)` of the `C¹` reflection `v̄(x', h - t) = Σ c v(x', h + λt)`.
const C1_RULE: [(f64, f64); 2] = [(4.0, 0.5), (-3.0, 1.0)];

/// `1 - (10t³ - 15t⁴ + 6t⁵)` on `[0, 1]`: flat to second order at `t = 0`, so
/// the damping does not spoil the matching at `Γ`, and spread over the whole
/// depth rather than a thin shell.
fn taper(t: f64) -> f64 {
    if t <= 0.0 {
        1.0
    } else if t >= 1.0 {
        0.0
    } else {
        1.0 - t * t * t * (10.0 - 15.0 * t + 6.0 * t * t)
    }
}

/// Extends every component along vertical lines so that `v̄` and its first
/// derivatives are continuous across `Γ`, damped by `τ(s/ρ)` with `s` the
/// depth below `Γ` and `τ` a quintic taper. No projection is involved, so `ρ`
/// is not tied to the reach.
///
/// Samples come from cubic interpolation along the node's own column, which
/// extrapolates from the first four nodes of `Ω` for heights below them; a
/// trilinear stencil there would mix in nodes outside `Ω`.
///
/// This is the extension the volume potential uses. Unlike [`extend_field`]
/// it puts no surface charge on `Γ`, so the spectral projection sees a field
/// without jumps.
pub fn extend_field_c1(hs: &PerturbedHalfSpace, v: &BoxField, rho: f64) -> Result<BoxField> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::invalid(format!("cut-off radius {rho} must be positive")));
    }
    if v.components() != 3 {
        return Err(Error::invalid("extension acts on vector fields"));
    }
    let grid = v.grid().clone();
    let [nx, ny, nz] = grid.resolution;
    let h = hs.boundary();
    let mut data = v.data().to_vec();
    for i in 0..nx {
        for j in 0..ny {
            let col = |k: usize| grid.index(i, j, k);
            let Some(first) = (0..nz).find(|&k| v.mask()[col(k)]) else {
                continue;
            };
            let x = grid.point(col(0));
            let top = h.eval([x[0], x[1]]);
            for k in 0..first {
                let depth = top - grid.coord(2, k);
                let theta = taper(depth / rho);
                let mut acc = [0.0; 3];
                if theta > 0.0 {
                    for (w, stretch) in C1_RULE {
                        if let Some(s) = v.column_value(i, j, top + stretch * depth, 4) {
                            acc = vec3::axpy(w * theta, [s[0], s[1], s[2]], acc);
                        }
                    }
                }
                for c in 0..3 {
                    data[c][col(k)] = acc[c];
                }
            }
        }
    }
    let n = grid.len();
    BoxField::new(grid, data, vec![true; n])
}

fn reflect(hs: &PerturbedHalfSpace, v: &BoxField, rho: f64) -> Result<BoxField> {
    if v.components() != 3 {
        return Err(Error::invalid("extension acts on vector fields"));
    }
    let grid = v.grid().clone();
    let h = hs.boundary();
    let lipschitz = (1.0 + h.sup_grad() * h.sup_grad()).sqrt();
    let values: Vec<Result<Point>> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            if v.mask()[i] {
                return Ok(v.vector(i));
            }
            let x = grid.point(i);
            let vertical = h.eval([x[0], x[1]]) - x[2];
            if vertical / lipschitz >= 0.75 * rho {
                return Ok([0.0; 3]);
            }
            let p = hs.project(x)?;
            let theta = cutoff_profile(p.distance.abs() / rho);
            if theta == 0.0 {
                return Ok([0.0; 3]);
            }
            let normal = vec3::scale(-1.0, hs.outward_normal(p.foot));
            let mirror = vec3::axpy(p.distance.abs(), normal, p.point);
            Ok(v.interpolate(mirror)
                .map_or([0.0; 3], |s| vec3::scale(theta, reflect_normal_odd(normal, [s[0], s[1], s[2]]))))
        })
        .collect();
    let mut data = vec![vec![0.0; grid.len()]; 3];
    for (i, r) in values.into_iter().enumerate() {
        let val = r?;
        for c in 0..3 {
            data[c][i] = val[c];
        }
    }
    let n = grid.len();
    BoxField::new(grid, data, vec![true; n])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{BoundaryFunction, BoxGrid};

    fn flat_setup(rho: f64) -> (PerturbedHalfSpace, BoxGrid) {
        let hs = PerturbedHalfSpace::new(BoundaryFunction::zero());
        assert!(rho <= hs.rho0() / 2.0);
        (hs, BoxGrid::new([-0.5, -0.5, -0.1], [0.5, 0.5, 0.1], [11, 11, 21]).unwrap())
    }

    #[test]
    fn flat_normal_field_is_reflected_oddly() {
        let rho = 0.07;
        let (hs, g) = flat_setup(rho);
        let v = BoxField::from_fn(&hs, g.clone(), 3, |_| vec![0.0, 0.0, 1.0]);
        let e = extend_field(&hs, &v, rho).unwrap();
        let below = g.index(5, 5, 8); // x_3 = -0.02, well inside the plateau
        assert_eq!(e.vector(below), [0.0, 0.0, -1.0]);
        let above = g.index(5, 5, 12);
        assert_eq!(e.vector(above), [0.0, 0.0, 1.0]);
        let far = g.index(5, 5, 0); // x_3 = -0.1 > 3ρ/4
        assert_eq!(e.vector(far), [0.0; 3]);
    }

    #[test]
    fn flat_tangential_field_is_reflected_evenly() {
        let rho = 0.07;
        let (hs, g) = flat_setup(rho);
        let v = BoxField::from_fn(&hs, g.clone(), 3, |_| vec![1.0, 0.0, 0.0]);
        let e = extend_field(&hs, &v, rho).unwrap();
        assert_eq!(e.vector(g.index(5, 5, 8)), [1.0, 0.0, 0.0]);
    }

    #[test]
    fn c1_extension_continues_linear_fields() {
        let rho = 0.07;
        let (hs, g) = flat_setup(rho);
        let field = |x: Point| vec![1.0 + x[2], 2.0 - 0.5 * x[2], x[0] + x[2]];
        let v = BoxField::from_fn(&hs, g.clone(), 3, field);
        let e = extend_field_c1(&hs, &v, rho).unwrap();
        for k in [7, 8, 9] {
            let idx = g.index(3, 6, k);
            let x = g.point(idx);
            let exact = field(x);
            let damp = taper(-x[2] / rho);
            let got = e.vector(idx);
            for c in 0..3 {
                assert!((got[c] - damp * exact[c]).abs() < 1e-12, "{k} {c}: {} {}", got[c], exact[c]);
            }
        }
        assert_eq!(e.vector(g.index(3, 6, 0)), [0.0; 3]);
        assert_eq!((taper(0.0), taper(1.0)), (1.0, 0.0));
        assert!(extend_field_c1(&hs, &v, -1.0).is_err());
        assert!(extend_field_c1(&hs, &v, f64::NAN).is_err());
    }

    #[test]
    fn bump_normal_component_flips_sign() {
        use rand::{Rng, SeedableRng};
        let hs = PerturbedHalfSpace::new(BoundaryFunction::smooth_bump(0.01, 0.3).unwrap());
        let rho = hs.rho0() / 2.0;
        let g = BoxGrid::new([-0.5, -0.5, -0.1], [0.5, 0.5, 0.1], [41, 41, 41]).unwrap();
        let field = |x: Point| vec![0.3 * x[1], 1.0 + x[0], 0.5 - x[2]];
        let v = BoxField::from_fn(&hs, g.clone(), 3, field);
        let e = extend_field(&hs, &v, rho).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let mut checked = 0;
        while checked < 100 {
            let idx = rng.gen_range(0..g.len());
            let x = g.point(idx);
            if v.mask()[idx] {
                continue;
            }
            let p = hs.project(x).unwrap();
            if p.distance.abs() >= 0.5 * rho {
                continue;
            }
            let n = vec3::scale(-1.0, hs.outward_normal(p.foot));
            let mirror = vec3::axpy(-p.distance, n, p.point);
            let vm = v.interpolate(mirror).unwrap();
            let lhs = vec3::dot(e.vector(idx), n);
            let rhs = -vec3::dot([vm[0], vm[1], vm[2]], n);
            assert!((lhs - rhs).abs() < 1e-12);
            // Masked interpolation is first order next to the boundary.
            let exact = field(mirror);
            assert!((rhs + vec3::dot([exact[0], exact[1], exact[2]], n)).abs() < 5e-2);
            checked += 1;
        }
    }

    #[test]
    fn extension_is_linear() {
        let hs = PerturbedHalfSpace::new(BoundaryFunction::smooth_bump(0.01, 0.3).unwrap());
        let rho = hs.rho0() / 2.0;
        let g = BoxGrid::new([-0.5, -0.5, -0.1], [0.5, 0.5, 0.1], [17, 17, 17]).unwrap();
        let a = BoxField::from_fn(&hs, g.clone(), 3, |x| vec![x[0], x[1] * x[2], 1.0]);
        let b = BoxField::from_fn(&hs, g.clone(), 3, |x| vec![x[2].sin(), 2.0, x[0] * x[1]]);
        let combo = a.scaled(2.0).axpy(-3.0, &b).unwrap();
        let lhs = extend_field(&hs, &combo, rho).unwrap();
        let rhs =
            extend_field(&hs, &a, rho).unwrap().scaled(2.0).axpy(-3.0, &extend_field(&hs, &b, rho).unwrap()).unwrap();
        for c in 0..3 {
            for (x, y) in lhs.component(c).iter().zip(rhs.component(c)) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rejects_oversized_radius() {
        let hs = PerturbedHalfSpace::new(BoundaryFunction::zero());
        let g = BoxGrid::centred(1.0, -0.1, 0.1, 4).unwrap();
        let v = BoxField::zeros(&hs, g, 3);
        assert!(extend_field(&hs, &v, hs.rho0()).is_err());
    }
}
