//! Smallness constants of the perturbation and the Neumann series
//! `g* = 2(I - 2S)^{-1} g = Σ (2S)^i (2g)`.
//!
//! The symbolic condition involves a dimensional constant `C*(n)` that is not
//! known numerically, so the solver is gated by a power-iteration estimate of
//! `‖2S‖` on the boundary lattice instead.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{BoundaryFunction, Point};
use crate::layer::SurfaceQuadrature;
use crate::norms::{hs_norm_fourier_unchecked, BoundaryDensity};

/// Power-iteration steps for the empirical norm of `2S`.
pub const POWER_STEPS: usize = 30;

/// Constants of the small-perturbation condition for `n = 3`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmallnessReport {
    pub dim: usize,
    /// `R_h`; zero for a flat boundary.
    pub support_radius: f64,
    pub c_s: f64,
    pub c_1: f64,
    pub c_star_1: f64,
    pub c_star_2: f64,
    pub c_star_3: f64,
    /// `C_s^{3n/2+8} C_1 (C_{*,1} + C_{*,2} + R_h^{n/2})`.
    pub c_star: f64,
    /// `R_h^{(2n-1)/(2n)} < 1/2`.
    pub first_condition: bool,
    /// `C*(n)` used for the second condition, if one was supplied.
    pub cstar_n: Option<f64>,
    /// `C_* < 1/(2 C*(n))`.
    pub second_condition: Option<bool>,
    /// `max(sup ratio, Ḣ^{-1/2} ratio)` after [`POWER_STEPS`] steps.
    pub empirical_2s_norm: Option<f64>,
    pub empirical_sup_ratio: Option<f64>,
    pub empirical_hminus_ratio: Option<f64>,
}

impl SmallnessReport {
    /// Symbolic part only.
    pub fn constants(h: &BoundaryFunction) -> Self {
        let n = h.dim() as f64;
        let r = if h.is_flat() { 0.0 } else { h.support_radius() };
        let d2 = h.sup_hess();
        let c1n = h.c1_norm();
        let c_s = 1.0 + c1n;
        let c_1 = 1.0 + r * d2;
        let c_star_1 = c_1.powi(3) * (1.0 + r.powf(0.25)) * (r.sqrt() * d2 + r.powf(2.5) * d2.powi(3));
        let c_star_2 = (r + r.powf(1.0 / (2.0 * n))) * d2 + (r.powf(n - 1.0) + 1.0) * c1n;
        let c_star_3 = r.powf(n - 1.0) * (c_star_1 + c_star_2) + r.powf(n) * d2;
        let c_star = c_s.powf(1.5 * n + 8.0) * c_1 * (c_star_1 + c_star_2 + r.powf(n / 2.0));
        Self {
            dim: h.dim(),
            support_radius: r,
            c_s,
            c_1,
            c_star_1,
            c_star_2,
            c_star_3,
            c_star,
            first_condition: first_condition(r, h.dim()),
            cstar_n: None,
            second_condition: None,
            empirical_2s_norm: None,
            empirical_sup_ratio: None,
            empirical_hminus_ratio: None,
        }
    }

    /// Evaluates the second condition for a given `C*(n) > 0`.
    pub fn with_cstar(mut self, cstar_n: f64) -> Result<Self> {
        if !(cstar_n > 0.0 && cstar_n.is_finite()) {
            return Err(Error::invalid("C*(n) must be positive"));
        }
        self.cstar_n = Some(cstar_n);
        self.second_condition = Some(self.c_star < 1.0 / (2.0 * cstar_n));
        Ok(self)
    }

    /// Symbolic verdict: both conditions (the second only if `C*(n)` is set).
    pub fn symbolic_pass(&self) -> bool {
        self.first_condition && self.second_condition.unwrap_or(true)
    }

    /// Whether the Neumann series may run.
    pub fn is_contractive(&self) -> bool {
        self.empirical_2s_norm.is_some_and(|v| v < 1.0)
    }
}

/// `R_h^{(2n-1)/(2n)} < 1/2`.
pub fn first_condition(r_h: f64, n: usize) -> bool {
    let n = n as f64;
    r_h.powf((2.0 * n - 1.0) / (2.0 * n)) < 0.5
}

/// Constants of `h` plus the empirical norm of `2S` on the quadrature lattice.
pub fn smallness_report(q: &SurfaceQuadrature) -> Result<SmallnessReport> {
    let mut report = SmallnessReport::constants(q.half_space().boundary());
    let (sup, hm) = empirical_2s_norm(q, POWER_STEPS)?;
    report.empirical_sup_ratio = Some(sup);
    report.empirical_hminus_ratio = Some(hm);
    report.empirical_2s_norm = Some(sup.max(hm));
    Ok(report)
}

/// Power iteration for `2S`, started from a bump concentrated on the curved
/// part of `Γ`. Returns the final sup and `Ḣ^{-1/2}` growth ratios.
pub fn empirical_2s_norm(q: &SurfaceQuadrature, steps: usize) -> Result<(f64, f64)> {
    let h = q.half_space().boundary();
    if h.is_flat() {
        return Ok((0.0, 0.0));
    }
    let r = h.support_radius();
    let mut g = BoundaryDensity::from_fn(*q.lattice(), |y| {
        let t = (y[0] * y[0] + y[1] * y[1]) / (4.0 * r * r);
        (-t).exp()
    });
    let (mut sup, mut hm) = (0.0, 0.0);
    for _ in 0..steps.max(1) {
        let next = q.apply_s(&g)?.scaled(2.0);
        let (a, b) = (g.max_abs(), next.max_abs());
        if b == 0.0 {
            return Ok((0.0, 0.0));
        }
        sup = b / a;
        let (ha, hb) = (hminus(&g), hminus(&next));
        hm = if ha > 0.0 { hb / ha } else { 0.0 };
        g = next.scaled(1.0 / b);
    }
    Ok((sup, hm))
}

fn hminus(g: &BoundaryDensity) -> f64 {
    hs_norm_fourier_unchecked(&g.th_pull(), -0.5)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NeumannOptions {
    /// Stop once `‖(2S)^k (2g)‖_∞ < tol ‖g‖_∞`.
    pub tol: f64,
    pub kmax: usize,
}

impl Default for NeumannOptions {
    fn default() -> Self {
        Self { tol: 1e-8, kmax: 64 }
    }
}

/// `g* = 2(I - 2S)^{-1} g`; `u = SLP(g*)` solves the Neumann problem with data `g`.
#[derive(Clone, Debug, PartialEq)]
pub struct NeumannSolution {
    pub density: BoundaryDensity,
    pub series_terms_used: usize,
    /// `‖(2S)^i (2g)‖_∞` for every term summed.
    pub increments: Vec<f64>,
    /// `‖g* - 2g - 2S g*‖_∞ / ‖g‖_∞`.
    pub residual: f64,
}

impl NeumannSolution {
    /// Successive increment ratios.
    pub fn decay_ratios(&self) -> Vec<f64> {
        self.increments.windows(2).map(|w| if w[0] > 0.0 { w[1] / w[0] } else { 0.0 }).collect()
    }
}

/// Sums the Neumann series. Refuses unless `report` certifies `‖2S‖ < 1`.
pub fn solve_density(
    q: &SurfaceQuadrature,
    report: &SmallnessReport,
    g: &BoundaryDensity,
    opts: NeumannOptions,
) -> Result<NeumannSolution> {
    if !report.is_contractive() {
        return Err(Error::NotContractive { report: Box::new(report.clone()) });
    }
    let scale = g.max_abs();
    let mut term = g.scaled(2.0);
    let mut sum = term.clone();
    let mut increments = vec![term.max_abs()];
    if scale == 0.0 {
        return Ok(NeumannSolution { density: sum, series_terms_used: 1, increments, residual: 0.0 });
    }
    let flat = q.half_space().boundary().is_flat();
    let mut converged = flat;
    let mut used = 1;
    while !converged && used < opts.kmax {
        term = q.apply_s(&term)?.scaled(2.0);
        let inc = term.max_abs();
        sum = sum.axpy(1.0, &term)?;
        increments.push(inc);
        used += 1;
        converged = inc < opts.tol * scale;
    }
    let residual = if flat {
        0.0
    } else {
        let fixed = sum.axpy(-2.0, g)?.axpy(-2.0, &q.apply_s(&sum)?)?;
        fixed.max_abs() / scale
    };
    if !converged {
        return Err(Error::MaxIterations { residual });
    }
    Ok(NeumannSolution { density: sum, series_terms_used: used, increments, residual })
}

/// `∇u(x)` for the Neumann solution `u = SLP(g*)`.
pub fn neumann_grad(q: &SurfaceQuadrature, sol: &NeumannSolution, x: Point) -> Result<Point> {
    q.grad_single_layer(&sol.density, x)
}

/// [`neumann_grad`] at many targets.
pub fn neumann_grad_many(q: &SurfaceQuadrature, sol: &NeumannSolution, xs: &[Point]) -> Result<Vec<Point>> {
    q.grad_single_layer_many(&sol.density, xs)
}
