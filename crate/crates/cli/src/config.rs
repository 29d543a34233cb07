//! Run configuration. Stored as JSON; every field has a default, so a config
//! file only needs the entries it changes.

use std::fs;
use std::path::{Path, PathBuf};

use helmholtz_core::geometry::{BoundaryFunction, BoxField, BoxGrid, PerturbedHalfSpace, Point};
use helmholtz_core::norms::OscillationOptions;
use helmholtz_core::{vec3, DecompositionConfig, NeumannOptions, QuadratureOptions};
use serde::{Deserialize, Serialize};

use crate::exit::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BoundaryPreset {
    Flat,
    SmoothBump { amplitude: f64, radius: f64 },
    GaussianBump { amplitude: f64, width: f64 },
}

impl BoundaryPreset {
    pub fn build(&self) -> helmholtz_core::Result<BoundaryFunction> {
        match *self {
            Self::Flat => Ok(BoundaryFunction::zero()),
            Self::SmoothBump { amplitude, radius } => BoundaryFunction::smooth_bump(amplitude, radius),
            Self::GaussianBump { amplitude, width } => BoundaryFunction::gaussian_bump(amplitude, width),
        }
    }
}

/// Built-in input fields, used when no field file is given.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldPreset {
    Zero,
    /// `(1, 0, 0)`; does not decay, so only `norms` accepts it.
    Constant,
    /// Gradient of a Gaussian centred above the boundary.
    Gradient,
    /// `curl(φ e₃)` for a Gaussian `φ`: divergence free, tangential on a flat boundary.
    Swirl,
    /// `gradient + swirl`.
    Mixed,
    /// Cut-off `∇d` in the tube around `Γ`; does not decay along the boundary.
    DistanceGradient,
}

const BLOB_CENTRE: Point = [0.1, 0.0, 0.6];
const BLOB_WIDTH: f64 = 0.45;

fn gauss_grad(x: Point, c: Point) -> Point {
    let d = vec3::sub(x, c);
    let s2 = BLOB_WIDTH * BLOB_WIDTH;
    vec3::scale(-2.0 * (-vec3::dot(d, d) / s2).exp() / s2, d)
}

impl FieldPreset {
    pub fn build(&self, hs: &PerturbedHalfSpace, grid: BoxGrid) -> BoxField {
        let preset = *self;
        let rho = hs.rho0();
        BoxField::from_fn(hs, grid, 3, move |x| {
            let swirl = || {
                let p = gauss_grad(x, [0.0; 3]);
                [p[1], -p[0], 0.0]
            };
            let v = match preset {
                Self::Zero => [0.0; 3],
                Self::Constant => [1.0, 0.0, 0.0],
                Self::Gradient => gauss_grad(x, BLOB_CENTRE),
                Self::Swirl => swirl(),
                Self::Mixed => vec3::add(gauss_grad(x, BLOB_CENTRE), swirl()),
                Self::DistanceGradient => match hs.grad_distance(x) {
                    Ok(g) => vec3::scale(hs.cutoff_theta(rho, x), g),
                    Err(_) => [0.0; 3],
                },
            };
            v.to_vec()
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    /// The box is `[-L, L]² × [z_lower, z_upper]`.
    pub half_extent: f64,
    pub z_lower: f64,
    pub z_upper: f64,
    /// Nodes per axis.
    pub resolution: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { half_extent: 2.0, z_lower: -1.0, z_upper: 3.0, resolution: 32 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureSpec {
    pub half_extent: f64,
    pub cells: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        let q = QuadratureOptions::default();
        Self { half_extent: q.half_extent, cells: q.cells }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub n: usize,
    pub boundary: BoundaryPreset,
    pub grid: GridSpec,
    pub quadrature: QuadratureSpec,
    /// `BMO` ball radius cap.
    pub mu: f64,
    /// `b^ν` ball radius cap.
    pub nu: f64,
    /// Cut-off depth of the extension below `Γ`.
    pub rho: f64,
    /// Neumann series stopping tolerance.
    pub tol: f64,
    pub kmax: usize,
    pub cstar_n: Option<f64>,
    pub seed: u64,
    /// Balls drawn by each oscillation estimator.
    pub samples: usize,
    pub field: FieldPreset,
    pub output: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let osc = OscillationOptions::default();
        let neumann = NeumannOptions::default();
        Self {
            n: 3,
            boundary: BoundaryPreset::Flat,
            grid: GridSpec::default(),
            quadrature: QuadratureSpec::default(),
            mu: osc.mu,
            nu: osc.nu,
            rho: helmholtz_core::pipeline::DEFAULT_RHO,
            tol: neumann.tol,
            kmax: neumann.kmax,
            cstar_n: None,
            seed: osc.seed,
            samples: osc.samples,
            field: FieldPreset::Gradient,
            output: None,
        }
    }
}

fn positive(name: &str, x: f64) -> Result<(), String> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(format!("{name} must be positive and finite, got {x}"))
    }
}

fn power_of_two(name: &str, k: usize) -> Result<(), String> {
    if k >= 4 && k.is_power_of_two() {
        Ok(())
    } else {
        Err(format!("{name} must be a power of two >= 4, got {k}"))
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.check().map_err(CliError::input)
    }

    fn check(&self) -> Result<(), String> {
        if self.n != 3 {
            return Err(format!("only n = 3 is supported, got n = {}", self.n));
        }
        match self.boundary {
            BoundaryPreset::Flat => {}
            BoundaryPreset::SmoothBump { amplitude, radius } => {
                positive("boundary.radius", radius)?;
                if !amplitude.is_finite() {
                    return Err("boundary.amplitude must be finite".into());
                }
            }
            BoundaryPreset::GaussianBump { amplitude, width } => {
                positive("boundary.width", width)?;
                if !amplitude.is_finite() {
                    return Err("boundary.amplitude must be finite".into());
                }
            }
        }
        let g = &self.grid;
        positive("grid.half_extent", g.half_extent)?;
        positive("grid height", g.z_upper - g.z_lower)?;
        power_of_two("grid.resolution", g.resolution)?;
        positive("quadrature.half_extent", self.quadrature.half_extent)?;
        power_of_two("quadrature.cells", self.quadrature.cells)?;
        for (name, x) in [("mu", self.mu), ("nu", self.nu), ("rho", self.rho), ("tol", self.tol)] {
            positive(name, x)?;
        }
        if let Some(c) = self.cstar_n {
            positive("cstar_n", c)?;
        }
        if self.kmax == 0 || self.samples == 0 {
            return Err("kmax and samples must be at least 1".into());
        }
        Ok(())
    }

    pub fn half_space(&self) -> helmholtz_core::Result<PerturbedHalfSpace> {
        Ok(PerturbedHalfSpace::new(self.boundary.build()?))
    }

    pub fn box_grid(&self) -> helmholtz_core::Result<BoxGrid> {
        let g = &self.grid;
        BoxGrid::new(
            [-g.half_extent, -g.half_extent, g.z_lower],
            [g.half_extent, g.half_extent, g.z_upper],
            [g.resolution; 3],
        )
    }

    pub fn quadrature_options(&self) -> QuadratureOptions {
        QuadratureOptions {
            half_extent: self.quadrature.half_extent,
            cells: self.quadrature.cells,
            ..Default::default()
        }
    }

    pub fn neumann(&self) -> NeumannOptions {
        NeumannOptions { tol: self.tol, kmax: self.kmax }
    }

    pub fn oscillation(&self) -> OscillationOptions {
        OscillationOptions { mu: self.mu, nu: self.nu, samples: self.samples, seed: self.seed }
    }

    pub fn decomposition(&self) -> DecompositionConfig {
        DecompositionConfig {
            rho: Some(self.rho),
            quadrature: self.quadrature_options(),
            neumann: self.neumann(),
            oscillation: self.oscillation(),
            cstar_n: self.cstar_n,
            ..Default::default()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_files_fill_in_defaults() {
        let cfg: RunConfig = serde_json::from_str(
            r#"{"boundary": {"kind": "smooth_bump", "amplitude": 0.01, "radius": 0.3}, "seed": 3}"#,
        )
        .unwrap();
        assert_eq!(cfg.seed, 3);
        assert_eq!(cfg.grid, GridSpec::default());
        assert!(cfg.validate().is_ok());
        assert!(cfg.half_space().unwrap().boundary().support_radius() > 0.0);
    }

    #[test]
    fn invalid_values_are_input_errors() {
        let bad = [
            RunConfig { n: 4, ..Default::default() },
            RunConfig { mu: 0.0, ..Default::default() },
            RunConfig { grid: GridSpec { resolution: 24, ..Default::default() }, ..Default::default() },
            RunConfig { quadrature: QuadratureSpec { cells: 100, ..Default::default() }, ..Default::default() },
            RunConfig { boundary: BoundaryPreset::SmoothBump { amplitude: 0.1, radius: -1.0 }, ..Default::default() },
            RunConfig { cstar_n: Some(f64::NAN), ..Default::default() },
        ];
        for cfg in bad {
            assert_eq!(cfg.validate().unwrap_err().code, crate::exit::INPUT_ERROR, "{cfg:?}");
        }
        assert!(serde_json::from_str::<RunConfig>(r#"{"grid": {"resolutoin": 8}}"#).is_err());
    }

    #[test]
    fn presets_respect_the_mask() {
        let cfg = RunConfig::default();
        let hs = cfg.half_space().unwrap();
        for preset in [FieldPreset::Constant, FieldPreset::Mixed, FieldPreset::DistanceGradient] {
            let f = preset.build(&hs, cfg.box_grid().unwrap());
            for idx in 0..f.grid().len() {
                if !f.mask()[idx] {
                    assert_eq!(f.vector(idx), [0.0; 3]);
                }
            }
            assert!(f.linf() > 0.0);
        }
    }
}
