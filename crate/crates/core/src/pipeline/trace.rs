//! Normal trace `w·n` on `Γ` from samples inside `Ω`.
//!
//! The boundary lattice sits under the box columns, and `w` is continuous up
//! to `Γ`, so `w(x0)` is read off the column through the foot: a cubic through
//! the four lowest nodes of `Ω`, extrapolated over less than one cell. The
//! quadratic through the lowest three is a second opinion; their gap flags
//! data that is too rough to extrapolate.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{BoxField, GraphFunction, PerturbedHalfSpace};
use crate::norms::{hs_norm_fourier_unchecked, BoundaryDensity};
use crate::vec3;

/// Nodes used by the extrapolating cubic.
pub const STENCIL: usize = 4;

/// `(w·n)(x0)` under column `(i, j)` and the gap to the lower-order estimate.
pub fn column_trace_at(hs: &PerturbedHalfSpace, w: &BoxField, i: usize, j: usize) -> Result<(f64, f64)> {
    let x = w.grid().point(w.grid().index(i, j, 0));
    let foot = [x[0], x[1]];
    let z = hs.boundary().eval(foot);
    let n = hs.outward_normal(foot);
    let at = |points| {
        w.column_value(i, j, z, points)
            .map(|s| vec3::dot([s[0], s[1], s[2]], n))
            .ok_or_else(|| Error::invalid(format!("column ({i}, {j}) holds fewer than {STENCIL} nodes of the domain")))
    };
    let (fine, coarse) = (at(STENCIL)?, at(STENCIL - 1)?);
    Ok((fine, (fine - coarse).abs()))
}

/// Extrapolated trace and the largest gap between the two estimates.
#[derive(Clone, Debug, PartialEq)]
pub struct ColumnTrace {
    pub density: BoundaryDensity,
    pub gap: f64,
}

/// `w·n` at every foot of the column lattice (see [`super::column_lattice`]).
pub fn column_trace(hs: &PerturbedHalfSpace, w: &BoxField) -> Result<ColumnTrace> {
    if w.components() != 3 {
        return Err(Error::invalid("normal trace needs a vector field"));
    }
    let lattice = super::column_lattice(w.grid())?;
    let n = lattice.cells;
    let pairs = (0..lattice.len())
        .into_par_iter()
        .map(|idx| column_trace_at(hs, w, idx / n, idx % n))
        .collect::<Result<Vec<_>>>()?;
    let gap = pairs.iter().map(|p| p.1).fold(0.0, f64::max);
    let density = BoundaryDensity::new(lattice, pairs.into_iter().map(|p| p.0).collect(), true)?;
    Ok(ColumnTrace { density, gap })
}

/// Output of [`normal_trace`].
#[derive(Clone, Debug, PartialEq)]
pub struct NormalTrace {
    pub g: BoundaryDensity,
    pub linf: f64,
    /// Pullback `Ḣ^{-1/2}` norm.
    pub hminus: f64,
    pub gap: f64,
}

/// Normal trace on the lattice under the box columns. Fails with
/// [`Error::ExtrapolationUnstable`] when the cubic and quadratic estimates
/// disagree by more than `10·tolerance·(1 + ‖w‖_∞)`.
pub fn normal_trace(hs: &PerturbedHalfSpace, w: &BoxField, tolerance: f64) -> Result<NormalTrace> {
    let t = column_trace(hs, w)?;
    let limit = 10.0 * tolerance * (1.0 + w.linf());
    if !(t.gap <= limit) {
        return Err(Error::ExtrapolationUnstable { gap: t.gap, limit });
    }
    Ok(NormalTrace {
        linf: t.density.max_abs(),
        hminus: hs_norm_fourier_unchecked(&t.density.th_pull(), -0.5),
        g: t.density,
        gap: t.gap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{BoundaryFunction, BoxGrid};

    #[test]
    fn gradient_of_distance_has_trace_minus_one() {
        let hs = PerturbedHalfSpace::new(BoundaryFunction::smooth_bump(0.01, 0.3).unwrap());
        let grid = BoxGrid::centred(1.0, -0.5, 1.0, 41).unwrap();
        let w =
            BoxField::from_fn(&hs, grid, 3, |x| hs.grad_distance(x).map(|g| g.to_vec()).unwrap_or(vec![0.0, 0.0, 1.0]));
        let t = column_trace(&hs, &w).unwrap();
        for v in t.density.values() {
            assert!((v + 1.0).abs() < 2e-3, "{v}");
        }
    }

    #[test]
    fn tangential_field_has_zero_trace() {
        let hs = PerturbedHalfSpace::new(BoundaryFunction::zero());
        let grid = BoxGrid::centred(2.0, -1.0, 3.0, 33).unwrap();
        let w = BoxField::from_fn(&hs, grid, 3, |x| {
            let r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
            vec![0.0, 0.0, x[2] * (-r2).exp()]
        });
        let t = normal_trace(&hs, &w, 0.05).unwrap();
        // t e^{-t²} = t - t³ + t⁵/2 - ...; the cubic through h..4h reproduces
        // the first two and misses t⁵ at 0 by 240 h⁵.
        let h = w.grid().spacing()[2];
        assert!(t.linf < 130.0 * h.powi(5), "{} {}", t.linf, 120.0 * h.powi(5));
    }

    #[test]
    fn lattice_nodes_sit_under_their_columns() {
        let hs = PerturbedHalfSpace::new(BoundaryFunction::zero());
        let grid = BoxGrid::centred(2.0, -1.0, 3.0, 17).unwrap();
        let w = BoxField::from_fn(&hs, grid.clone(), 3, |x| vec![0.0, 0.0, -(x[0] + 3.0 * x[1])]);
        let t = column_trace(&hs, &w).unwrap();
        let lat = t.density.lattice();
        for idx in 0..lat.len() {
            let y = lat.node(idx);
            assert!((t.density.values()[idx] - (y[0] + 3.0 * y[1])).abs() < 1e-12);
        }
    }

    #[test]
    fn rough_data_is_reported() {
        let hs = PerturbedHalfSpace::new(BoundaryFunction::zero());
        let grid = BoxGrid::centred(2.0, -1.0, 3.0, 33).unwrap();
        // Oscillates on the grid scale along the columns.
        let w = BoxField::from_fn(&hs, grid, 3, |x| {
            vec![0.0, 0.0, 50.0 * (40.0 * x[2]).sin() * (-x[0] * x[0] - x[1] * x[1]).exp()]
        });
        assert!(matches!(normal_trace(&hs, &w, 1e-3), Err(Error::ExtrapolationUnstable { .. })));
    }
}
