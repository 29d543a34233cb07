//! Assembled decomposition `v = v0 + ∇q₁ + ∇q₂`.
//!
//! 1. `∇q₁` from an extension of `v` below `Γ` (see [`volume`]), so `w = v - ∇q₁` is
//!    divergence free in `Ω`.
//! 2. `g = w·n` on `Γ` (see [`trace`]).
//! 3. `q₂ = u` solves the Neumann problem `Δu = 0`, `∂u/∂n = g`, through the
//!    Neumann series for the single layer density.
//! 4. `v0 = v - ∇q₁ - ∇q₂`.

pub mod trace;
pub mod volume;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{BoxField, BoxGrid, GraphFunction, PerturbedHalfSpace, Point};
use crate::layer::{IdentityCheck, QuadratureOptions, SurfaceQuadrature, TraceReport};
use crate::neumann::{neumann_grad_many, smallness_report, solve_density, NeumannOptions, SmallnessReport};
use crate::norms::{vbmol2_norm, BoundaryDensity, Lattice, NormLedger, OscillationOptions};
use crate::vec3;

pub use trace::{column_trace, column_trace_at, normal_trace, ColumnTrace, NormalTrace, STENCIL};
pub use volume::{leray_gradient, newton_potential_grad, volume_potential_grad, volume_potential_grad_with};

/// Boundary lattice whose nodes sit under the box columns.
pub fn column_lattice(grid: &BoxGrid) -> Result<Lattice> {
    let h = grid.spacing();
    if grid.resolution[0] != grid.resolution[1] || (h[0] - h[1]).abs() > 1e-12 * h[0] {
        return Err(Error::invalid("the box must have square columns (same x and y grid)"));
    }
    if (grid.lower[0] - grid.lower[1]).abs() > 1e-12 || (grid.lower[0] + grid.upper[0]).abs() > 1e-12 * h[0] {
        return Err(Error::invalid("the box columns must be centred on the origin"));
    }
    Lattice::from_nodes(grid.lower[0], h[0], grid.resolution[0])
}

/// Cut-off depth of the extension when none is configured.
pub const DEFAULT_RHO: f64 = 0.5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DecompositionConfig {
    /// Cut-off depth of the extension below `Γ`; default 1/2.
    pub rho: Option<f64>,
    /// Lattice extent and size are replaced by the box columns.
    pub quadrature: QuadratureOptions,
    pub neumann: NeumannOptions,
    pub oscillation: OscillationOptions,
    /// `C*(n)` for the advisory symbolic smallness check.
    pub cstar_n: Option<f64>,
    /// Admissible `ring max / max |v|` on the box faces. Fields that are
    /// themselves outputs of a decomposition carry the truncation tail of
    /// `∇q` and need more room than the default.
    pub decay_tolerance: f64,
    /// Relative tolerance of the trace extrapolation.
    pub trace_tolerance: f64,
    /// Thresholds used by [`verify`].
    pub div_tolerance: f64,
    pub normal_tolerance: f64,
    /// Compute the sampled norm ledgers.
    pub ledgers: bool,
}

impl Default for DecompositionConfig {
    fn default() -> Self {
        Self {
            rho: None,
            quadrature: QuadratureOptions::default(),
            neumann: NeumannOptions::default(),
            oscillation: OscillationOptions::default(),
            cstar_n: None,
            decay_tolerance: crate::norms::DECAY_TOLERANCE,
            trace_tolerance: 0.05,
            div_tolerance: 0.05,
            normal_tolerance: 0.05,
            ledgers: true,
        }
    }
}

impl DecompositionConfig {
    pub fn rho(&self) -> f64 {
        self.rho.unwrap_or(DEFAULT_RHO)
    }
}

/// Every field and diagnostic of one decomposition.
#[derive(Clone, Debug)]
pub struct DecompositionResult {
    pub v: BoxField,
    pub v0: BoxField,
    pub grad_q1: BoxField,
    pub grad_q2: BoxField,
    /// `g = (v - ∇q₁)·n` on the box columns.
    pub trace_g: BoundaryDensity,
    pub trace_linf: f64,
    pub trace_hminus: f64,
    pub ledger_v: NormLedger,
    pub ledger_v0: NormLedger,
    pub ledger_gradq: NormLedger,
    /// `‖div v0‖ / ‖∇v‖` in `L²` over interior nodes.
    pub residual_div: f64,
    /// `max |v0·n| / (1 + ‖v‖_∞)` over boundary probes.
    pub residual_normal: f64,
    pub smallness: SmallnessReport,
    pub series_terms: usize,
    pub series_residual: f64,
}

/// Scalar summary of a [`DecompositionResult`], as written by the CLI.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecompositionSummary {
    pub residual_div: f64,
    pub residual_normal: f64,
    pub reconstruction_error: f64,
    pub trace_linf: f64,
    pub trace_hminus: f64,
    pub series_terms: usize,
    pub series_residual: f64,
    pub ledger_v: NormLedger,
    pub ledger_v0: NormLedger,
    pub ledger_gradq: NormLedger,
    /// `(‖v0‖ + ‖∇q‖)/‖v‖` in the `vBMOL²` ledger (bmo + bnu + l2).
    pub boundedness_ratio: f64,
    pub smallness: SmallnessReport,
}

impl DecompositionResult {
    pub fn grad_q(&self) -> BoxField {
        self.grad_q1.axpy(1.0, &self.grad_q2).expect("same grid")
    }

    /// `max |v - v0 - ∇q₁ - ∇q₂|` over `Ω` nodes.
    pub fn reconstruction_error(&self) -> f64 {
        let (v, v0, a, b) = (&self.v, &self.v0, &self.grad_q1, &self.grad_q2);
        (0..v.grid().len())
            .filter(|&i| v.mask()[i])
            .map(|i| {
                let r = vec3::sub(vec3::sub(vec3::sub(v.vector(i), v0.vector(i)), a.vector(i)), b.vector(i));
                vec3::norm(r)
            })
            .fold(0.0, f64::max)
    }

    pub fn summary(&self) -> DecompositionSummary {
        let total = |l: &NormLedger| l.bmo + l.bnu + l.l2;
        let denom = total(&self.ledger_v);
        DecompositionSummary {
            residual_div: self.residual_div,
            residual_normal: self.residual_normal,
            reconstruction_error: self.reconstruction_error(),
            trace_linf: self.trace_linf,
            trace_hminus: self.trace_hminus,
            series_terms: self.series_terms,
            series_residual: self.series_residual,
            ledger_v: self.ledger_v.clone(),
            ledger_v0: self.ledger_v0.clone(),
            ledger_gradq: self.ledger_gradq.clone(),
            boundedness_ratio: if denom > 0.0 {
                (total(&self.ledger_v0) + total(&self.ledger_gradq)) / denom
            } else {
                0.0
            },
            smallness: self.smallness.clone(),
        }
    }
}

/// Runs the full pipeline. `v` is read on the `Ω` nodes of its grid.
pub fn decompose(hs: &PerturbedHalfSpace, v: &BoxField, config: &DecompositionConfig) -> Result<DecompositionResult> {
    if v.components() != 3 {
        return Err(Error::invalid("decompose needs a vector field"));
    }
    let grid = v.grid().clone();
    let lattice = column_lattice(&grid)?;
    let mask = BoxField::membership(hs, &grid);
    let v = BoxField::new(grid.clone(), masked(v.data(), &mask), mask.clone())?;

    let quad = SurfaceQuadrature::on_lattice(hs, lattice, config.quadrature)?;
    let mut smallness = smallness_report(&quad)?;
    if let Some(c) = config.cstar_n {
        smallness = smallness.with_cstar(c)?;
    }
    if !smallness.is_contractive() {
        return Err(Error::NotContractive { report: Box::new(smallness) });
    }

    let grad_q1 = volume_potential_grad_with(hs, &v, config.rho(), config.decay_tolerance)?;
    let w = v.axpy(-1.0, &grad_q1)?;
    let tr = normal_trace(hs, &w, config.trace_tolerance)?;

    let sol = solve_density(&quad, &smallness, &tr.g, config.neumann)?;
    let grad_q2 = grad_on_omega(hs, &quad, &sol, &grid, &mask)?;
    let v0 = w.axpy(-1.0, &grad_q2)?;

    let (residual_div, _) = divergence_residual(hs, &v0, &v);
    let residual_normal = normal_residual(hs, &v0, v.linf());
    let (ledger_v, ledger_v0, ledger_gradq) = if config.ledgers {
        let gq = grad_q1.axpy(1.0, &grad_q2)?;
        (
            vbmol2_norm(hs, &v, &config.oscillation)?,
            vbmol2_norm(hs, &v0, &config.oscillation)?,
            vbmol2_norm(hs, &gq, &config.oscillation)?,
        )
    } else {
        Default::default()
    };
    Ok(DecompositionResult {
        v,
        v0,
        grad_q1,
        grad_q2,
        trace_linf: tr.linf,
        trace_hminus: tr.hminus,
        trace_g: tr.g,
        ledger_v,
        ledger_v0,
        ledger_gradq,
        residual_div,
        residual_normal,
        smallness,
        series_terms: sol.series_terms_used,
        series_residual: sol.residual,
    })
}

fn masked(data: &[Vec<f64>], mask: &[bool]) -> Vec<Vec<f64>> {
    data.iter().map(|c| c.iter().zip(mask).map(|(v, m)| if *m { *v } else { 0.0 }).collect()).collect()
}

/// `∇u` at the `Ω` nodes. Nodes closer to `Γ` than the quadrature allows are
/// evaluated at the nearest admissible height above them.
fn grad_on_omega(
    hs: &PerturbedHalfSpace,
    quad: &SurfaceQuadrature,
    sol: &crate::neumann::NeumannSolution,
    grid: &BoxGrid,
    mask: &[bool],
) -> Result<BoxField> {
    let h = hs.boundary();
    let lift = 2.0 * quad.delta_min() * (1.0 + h.sup_grad() * h.sup_grad()).sqrt();
    let ids: Vec<usize> = (0..grid.len()).filter(|&i| mask[i]).collect();
    let targets: Vec<Point> = ids
        .iter()
        .map(|&i| {
            let mut x = grid.point(i);
            let floor = h.eval([x[0], x[1]]) + lift;
            if x[2] < floor {
                x[2] = floor;
            }
            x
        })
        .collect();
    let grads = neumann_grad_many(quad, sol, &targets)?;
    let mut data = vec![vec![0.0; grid.len()]; 3];
    for (&i, g) in ids.iter().zip(&grads) {
        for a in 0..3 {
            data[a][i] = g[a];
        }
    }
    BoxField::new(grid.clone(), data, mask.to_vec())
}

/// Interior nodes for the divergence residual: full fourth-order stencils
/// inside `Ω`, at least two grid spacings above `Γ`.
fn interior_nodes(hs: &PerturbedHalfSpace, f: &BoxField) -> Vec<usize> {
    let g = f.grid();
    let sp = g.spacing();
    let gap = 2.0 * sp[0].max(sp[1]).max(sp[2]);
    let h = hs.boundary();
    (0..g.len())
        .filter(|&i| {
            if g.depth(i) < 2 {
                return false;
            }
            let x = g.point(i);
            if x[2] - h.eval([x[0], x[1]]) < gap {
                return false;
            }
            let m = g.multi_index(i);
            (0..3).all(|a| {
                [-2i64, -1, 1, 2].iter().all(|d| {
                    let mut mm = m;
                    mm[a] = (m[a] as i64 + d) as usize;
                    f.mask()[g.index(mm[0], mm[1], mm[2])]
                })
            })
        })
        .collect()
}

fn d4(f: &BoxField, comp: usize, idx: usize, axis: usize) -> f64 {
    let g = f.grid();
    let m = g.multi_index(idx);
    let at = |d: i64| {
        let mut mm = m;
        mm[axis] = (m[axis] as i64 + d) as usize;
        f.component(comp)[g.index(mm[0], mm[1], mm[2])]
    };
    let h = g.spacing()[axis];
    (8.0 * (at(1) - at(-1)) - (at(2) - at(-2))) / (12.0 * h)
}

/// `(‖div w‖, ‖∇v‖)` in `L²` over interior nodes (fourth-order stencils);
/// the first entry is returned relative to the second when it is nonzero.
pub fn divergence_residual(hs: &PerturbedHalfSpace, w: &BoxField, reference: &BoxField) -> (f64, f64) {
    let nodes = interior_nodes(hs, w);
    let dv = w.grid().cell_volume();
    // Collected before summing so the result does not depend on the thread count.
    let terms: Vec<(f64, f64)> = nodes
        .par_iter()
        .map(|&i| {
            let div: f64 = (0..3).map(|a| d4(w, a, i, a)).sum();
            let mut jac = 0.0;
            for c in 0..3 {
                for a in 0..3 {
                    let d = d4(reference, c, i, a);
                    jac += d * d;
                }
            }
            (div * div * dv, jac * dv)
        })
        .collect();
    let (div2, grad2) = terms.iter().fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    let (div, grad) = (div2.sqrt(), grad2.sqrt());
    if grad > 0.0 {
        (div / grad, grad)
    } else {
        (div, grad)
    }
}

/// Columns of the `10 × 10` boundary probes, spread over the inner half of
/// the box columns.
pub fn boundary_probes(grid: &BoxGrid) -> Vec<(usize, usize)> {
    let n = grid.resolution[0] as f64;
    let pick = |a: usize| ((0.25 + 0.5 * (a as f64 + 0.5) / 10.0) * (n - 1.0)).round() as usize;
    (0..100).map(|k| (pick(k / 10), pick(k % 10))).collect()
}

/// `max |v0·n| / (1 + scale)` over [`boundary_probes`], with the trace taken
/// as in [`normal_trace`].
pub fn normal_residual(hs: &PerturbedHalfSpace, v0: &BoxField, scale: f64) -> f64 {
    boundary_probes(v0.grid())
        .into_iter()
        .map(|(i, j)| column_trace_at(hs, v0, i, j).map_or(f64::INFINITY, |t| t.0.abs()))
        .fold(0.0, f64::max)
        / (1.0 + scale)
}

/// Recomputes the residuals of a decomposition and checks them against the
/// configured thresholds.
pub fn verify(hs: &PerturbedHalfSpace, result: &DecompositionResult, config: &DecompositionConfig) -> TraceReport {
    let mut report = TraceReport::default();
    let scale = 1.0 + result.v.linf();
    report.push(IdentityCheck::new(
        "reconstruction v = v0 + grad q1 + grad q2",
        result.reconstruction_error(),
        0.0,
        result.reconstruction_error() / scale,
        1e-10,
    ));
    let (div, _) = divergence_residual(hs, &result.v0, &result.v);
    report.push(IdentityCheck::new("div v0 = 0 (relative L2)", div, 0.0, div, config.div_tolerance));
    let normal = normal_residual(hs, &result.v0, result.v.linf());
    report.push(IdentityCheck::new("v0 . n = 0 on boundary probes", normal, 0.0, normal, config.normal_tolerance));
    report
}

#[cfg(test)]
mod tests;
