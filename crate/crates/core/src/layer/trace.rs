//! Identity harness: flux, half-limit, jump relation and the single layer
//! `L²` identity, packaged as a [`TraceReport`].

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::quadrature::SurfaceQuadrature;
use crate::error::Result;
use crate::geometry::Point;
use crate::norms::{gauss_legendre, BoundaryDensity};
use crate::vec3;

/// One identity residual against its tolerance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub name: String,
    pub value: f64,
    pub expected: f64,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl IdentityCheck {
    pub fn new(name: impl Into<String>, value: f64, expected: f64, residual: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            value,
            expected,
            residual,
            tolerance,
            passed: residual.is_finite() && residual < tolerance,
        }
    }

    /// `|value - expected| < tolerance`.
    pub fn absolute(name: impl Into<String>, value: f64, expected: f64, tolerance: f64) -> Self {
        Self::new(name, value, expected, (value - expected).abs(), tolerance)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TraceReport {
    pub checks: Vec<IdentityCheck>,
}

impl TraceReport {
    pub fn push(&mut self, c: IdentityCheck) {
        self.checks.push(c);
    }

    pub fn extend(&mut self, other: TraceReport) {
        self.checks.extend(other.checks);
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &IdentityCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

/// Approach of `Qg(x0 - δn(x0))` to `½g(x0) - Sg(x0)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JumpStudy {
    pub foot: [f64; 2],
    /// Decreasing distances.
    pub deltas: Vec<f64>,
    pub values: Vec<f64>,
    pub limit: f64,
    pub gaps: Vec<f64>,
    /// Least-squares slope of `ln gap` against `ln δ`.
    pub order: f64,
    /// Richardson value from the two smallest distances (order one).
    pub extrapolated: f64,
    pub final_gap: f64,
}

impl SurfaceQuadrature {
    /// Runs the jump study at `x0 = (foot, h(foot))` over `δ ∈ {8,4,2,1}·δ₀`.
    pub fn jump_study(&self, g: &BoundaryDensity, foot: [f64; 2], delta0: f64) -> Result<JumpStudy> {
        let hs = self.half_space();
        let x0 = hs.surface_point(foot);
        let n = hs.outward_normal(foot);
        let limit = 0.5 * g.interpolate(foot) - self.trace_s(g, foot)?;
        let deltas: Vec<f64> = [8.0, 4.0, 2.0, 1.0].iter().map(|k| k * delta0).collect();
        let mut values = Vec::with_capacity(4);
        for &d in &deltas {
            let x = vec3::axpy(-d, n, x0);
            let grad = self.grad_single_layer(g, x)?;
            values.push(vec3::dot(n, grad));
        }
        let gaps: Vec<f64> = values.iter().map(|v| (v - limit).abs()).collect();
        let order = fit_order(&deltas, &gaps);
        let extrapolated = 2.0 * values[3] - values[2];
        Ok(JumpStudy {
            foot,
            deltas,
            values,
            limit,
            gaps,
            order,
            extrapolated,
            final_gap: (extrapolated - limit).abs(),
        })
    }

    /// `-∂_{x_n}` of the single layer at `(x', t)`, Richardson-extrapolated to
    /// `t → 0⁺` from `t` and `2t`. Only meaningful where `Γ` is flat near `x'`.
    pub fn half_limit(&self, g: &BoundaryDensity, xp: [f64; 2], t: f64) -> Result<f64> {
        let a = self.grad_single_layer(g, [xp[0], xp[1], t])?[2];
        let b = self.grad_single_layer(g, [xp[0], xp[1], 2.0 * t])?[2];
        Ok(-(2.0 * a - b))
    }

    /// `‖∇SLP(g)‖²_{L²}` over `{x_n > 0}` for a flat boundary: Gauss rules in
    /// spherical coordinates on the half ball of radius `radius`, plus the
    /// monopole tail `M²/(8πR)` with `M = ∫g`.
    pub fn slp_energy_half_space(&self, g: &BoundaryDensity, radius: f64, nodes: usize) -> Result<f64> {
        let h = self.half_space().boundary();
        if !h.is_flat() {
            return Err(crate::Error::invalid("half-space energy needs a flat boundary"));
        }
        let (gx, gw) = gauss_legendre(nodes);
        let mut points: Vec<(Point, f64)> = Vec::new();
        let naz = 2 * nodes;
        for (xr, wr) in gx.iter().zip(&gw) {
            let r = 0.5 * radius * (xr + 1.0);
            let wr = 0.5 * radius * wr;
            for (xc, wc) in gx.iter().zip(&gw) {
                // cos θ ∈ (0, 1).
                let ct = 0.5 * (xc + 1.0);
                let st = (1.0 - ct * ct).sqrt();
                let w = wr * 0.5 * wc * r * r * 2.0 * PI / naz as f64;
                for k in 0..naz {
                    let phi = 2.0 * PI * (k as f64 + 0.5) / naz as f64;
                    points.push(([r * st * phi.cos(), r * st * phi.sin(), r * ct], w));
                }
            }
        }
        use rayon::prelude::*;
        let inner: Result<Vec<f64>> = points
            .par_iter()
            .map(|(x, w)| {
                let gr = self.grad_single_layer(g, *x)?;
                Ok(w * vec3::dot(gr, gr))
            })
            .collect();
        let mass = g.integral(h);
        Ok(inner?.iter().sum::<f64>() + mass * mass / (8.0 * PI * radius))
    }
}

/// Slope of the least-squares line through `(ln x, ln y)`.
pub fn fit_order(x: &[f64], y: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = x.iter().zip(y).filter(|(_, v)| **v > 0.0).map(|(a, b)| (a.ln(), b.ln())).collect();
    let n = pts.len() as f64;
    if n < 2.0 {
        return f64::NAN;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}
