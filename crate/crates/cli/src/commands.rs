//! The four subcommands. Each returns a JSON report and an exit code.

use std::fs;
use std::path::{Path, PathBuf};

use helmholtz_core::geometry::{BoxField, PerturbedHalfSpace};
use helmholtz_core::layer::IdentityCheck;
use helmholtz_core::neumann::{smallness_report, solve_density};
use helmholtz_core::norms::{vbmol2_norm, BoundaryDensity};
use helmholtz_core::pipeline::{decompose as run_decomposition, verify};
use helmholtz_core::{io, vec3, SurfaceQuadrature, TraceReport};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::exit::{CliError, GATE_FAIL, OK, TOLERANCE_FAIL};

pub struct Outcome {
    pub report: Value,
    pub code: u8,
}

fn to_value<T: Serialize>(x: &T) -> Result<Value, CliError> {
    serde_json::to_value(x).map_err(|e| CliError::input(e.to_string()))
}

fn quadrature(cfg: &RunConfig, hs: &PerturbedHalfSpace) -> Result<SurfaceQuadrature, CliError> {
    Ok(SurfaceQuadrature::new(hs, cfg.quadrature_options())?)
}

pub fn check_smallness(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let hs = cfg.half_space()?;
    let mut report = smallness_report(&quadrature(cfg, &hs)?)?;
    if let Some(c) = cfg.cstar_n {
        report = report.with_cstar(c)?;
    }
    let (symbolic, empirical) = (report.symbolic_pass(), report.is_contractive());
    Ok(Outcome {
        report: json!({ "smallness": report, "symbolic_pass": symbolic, "contractive": empirical }),
        code: if symbolic && empirical { OK } else { GATE_FAIL },
    })
}

const FLUX_TOL_FLAT: f64 = 1e-6;
const FLUX_TOL: f64 = 2e-3;
const JUMP_TOL_FLAT: f64 = 1e-3;
const JUMP_TOL: f64 = 5e-3;
const JUMP_ORDER_MIN: f64 = 0.8;
const HALF_LIMIT_TOL: f64 = 1e-2;
const NEUMANN_BC_TOL: f64 = 5e-2;

fn gaussian(y: [f64; 2]) -> f64 {
    (-(y[0] * y[0] + y[1] * y[1])).exp()
}

/// The origin plus a 7 × 7 grid of cell centres in `[-a, a]²`: 50 probes.
fn probe_feet(a: f64) -> Vec<[f64; 2]> {
    let s = |k: usize| -a + 2.0 * a * (k as f64 + 0.5) / 7.0;
    std::iter::once([0.0, 0.0]).chain((0..49).map(|k| [s(k / 7), s(k % 7)])).collect()
}

/// Boundary identities on the configured geometry and quadrature. Data are
/// compared with the exact Gaussian, not its lattice interpolant, so a
/// lattice too coarse to carry the density shows up as a failure.
pub fn verify_identities(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let hs = cfg.half_space()?;
    let q = quadrature(cfg, &hs)?;
    let flat = hs.boundary().is_flat();
    let g = BoundaryDensity::from_fn(*q.lattice(), gaussian);
    let mut report = TraceReport::default();

    let reach = if flat { 1.0 } else { hs.boundary().support_radius() };
    let flux_tol = if flat { FLUX_TOL_FLAT } else { FLUX_TOL };
    for k in 0..10 {
        let s = k as f64 / 9.0;
        let angle = 2.0 * k as f64;
        let x = [5.0 * reach * s * angle.cos(), 5.0 * reach * s * angle.sin(), 0.1 * 20f64.powf(s)];
        report.push(IdentityCheck::absolute(format!("gauss flux at {x:.3?}"), q.gauss_flux(x)?, -0.5, flux_tol));
    }

    let jump_tol = if flat { JUMP_TOL_FLAT } else { JUMP_TOL * g.max_abs() };
    for foot in [[0.1, 0.05], [0.0, 0.0], [-0.15, 0.1]] {
        let study = q.jump_study(&g, foot, 0.01)?;
        report.push(IdentityCheck::new(
            format!("jump relation at {foot:?}"),
            study.extrapolated,
            study.limit,
            study.final_gap,
            jump_tol,
        ));
        if !flat {
            // Passes when the fitted order clears the minimum.
            report.push(IdentityCheck::new(
                format!("jump convergence order at {foot:?}"),
                study.order,
                JUMP_ORDER_MIN,
                JUMP_ORDER_MIN - study.order,
                0.0,
            ));
        }
    }

    if flat {
        let t = 0.02;
        let mut worst = 0.0f64;
        for y in probe_feet(1.5) {
            worst = worst.max((q.half_limit(&g, y, t)? - 0.5 * gaussian(y)).abs() / 0.5);
        }
        report.push(IdentityCheck::new("Poisson half-limit (sup, 50 probes)", worst, 0.0, worst, HALF_LIMIT_TOL));
    }

    let smallness = smallness_report(&q)?;
    if !smallness.is_contractive() {
        return Ok(Outcome { report: json!({ "checks": report, "smallness": smallness }), code: GATE_FAIL });
    }
    let sol = solve_density(&q, &smallness, &g, cfg.neumann())?;
    let delta = 0.01;
    let mut worst = 0.0f64;
    for foot in probe_feet(0.6) {
        let x0 = hs.surface_point(foot);
        let n = hs.outward_normal(foot);
        let at = |d: f64| -> helmholtz_core::Result<f64> {
            Ok(vec3::dot(n, q.grad_single_layer(&sol.density, vec3::axpy(-d, n, x0))?))
        };
        worst = worst.max((2.0 * at(delta)? - at(2.0 * delta)? - gaussian(foot)).abs());
    }
    report.push(IdentityCheck::new("Neumann boundary condition (sup, 50 probes)", worst, 0.0, worst, NEUMANN_BC_TOL));

    let code = if report.all_passed() { OK } else { TOLERANCE_FAIL };
    Ok(Outcome {
        report: json!({
            "passed": report.all_passed(),
            "checks": report,
            "smallness": smallness,
            "series_terms": sol.series_terms_used,
        }),
        code,
    })
}

fn input_field(cfg: &RunConfig, hs: &PerturbedHalfSpace, file: Option<&Path>) -> Result<BoxField, CliError> {
    match file {
        Some(path) => Ok(io::read_field(hs, path)?),
        None => Ok(cfg.field.build(hs, cfg.box_grid()?)),
    }
}

pub fn norms(cfg: &RunConfig, file: Option<&Path>) -> Result<Outcome, CliError> {
    let hs = cfg.half_space()?;
    let v = input_field(cfg, &hs, file)?;
    let ledger = vbmol2_norm(&hs, &v, &cfg.oscillation())?;
    Ok(Outcome { report: to_value(&ledger)?, code: OK })
}

/// Runs the pipeline and, given `out`, writes `v0`, `grad_q`, `grad_q1` and
/// `grad_q2` as field files next to the report.
pub fn decompose(cfg: &RunConfig, file: Option<&Path>, out: Option<&Path>) -> Result<Outcome, CliError> {
    let hs = cfg.half_space()?;
    let v = input_field(cfg, &hs, file)?;
    let dc = cfg.decomposition();
    let result = run_decomposition(&hs, &v, &dc)?;
    let checks = verify(&hs, &result, &dc);
    let mut written: Vec<String> = Vec::new();
    if let Some(dir) = out {
        fs::create_dir_all(dir)?;
        let grad_q = result.grad_q();
        for (name, field) in
            [("v0", &result.v0), ("grad_q", &grad_q), ("grad_q1", &result.grad_q1), ("grad_q2", &result.grad_q2)]
        {
            let header = format!("{name}.json");
            io::write_field(&dir.join(&header), field)?;
            written.push(header);
        }
    }
    let passed = checks.all_passed();
    Ok(Outcome {
        report: json!({
            "passed": passed,
            "summary": result.summary(),
            "checks": checks,
            "smallness": result.smallness,
            "fields": written,
        }),
        code: if passed { OK } else { TOLERANCE_FAIL },
    })
}

/// Shared by the binary: where a report for `command` goes under `out`.
pub fn report_path(out: &Path, command: &str) -> PathBuf {
    out.join(format!("{command}.json"))
}
