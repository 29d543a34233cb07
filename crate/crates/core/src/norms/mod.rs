//! Fractional Sobolev norms on the boundary, the harmonic lifting, and
//! sampled `BMO` / `b^ν` seminorms on the box.

mod density;
mod oscillation;
mod sobolev;

use serde::{Deserialize, Serialize};

pub use density::{BoundaryDensity, Lattice};
pub use oscillation::{bmo_seminorm, bnu_seminorm, mean_oscillation, normal_component};
pub use sobolev::{
    gagliardo_half, gauss_legendre, hs_norm_fourier, hs_norm_fourier_unchecked, lift_harmonic, pairing, HarmonicLift,
    Spectrum, DECAY_TOLERANCE, LATTICE_ZETA_HALF, PAD_FACTOR, UNIT_SQUARE_SELF_ENERGY,
};

use crate::error::Result;
use crate::geometry::{BoundaryFunction, BoxField, PerturbedHalfSpace};

/// Every norm the decomposition estimate refers to, for one field.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct NormLedger {
    pub linf: f64,
    /// `Ḣ^{-1/2}` of a boundary trace (pullback to the plane).
    pub hminus_half: Option<f64>,
    pub hhalf: Option<f64>,
    pub bmo: f64,
    pub bnu: f64,
    pub l2: f64,
    /// `∫ g` of a boundary trace: the mass the `Ḣ^{-1/2}` zero bin sees.
    pub zero_mode: Option<f64>,
    /// Balls drawn by each oscillation estimator.
    pub samples: usize,
}

/// Parameters of the sampled seminorms.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OscillationOptions {
    pub mu: f64,
    pub nu: f64,
    pub samples: usize,
    pub seed: u64,
}

impl Default for OscillationOptions {
    fn default() -> Self {
        Self { mu: 0.45, nu: 0.35, samples: 200, seed: 7 }
    }
}

/// `[v]_{BMO^μ} + [∇d·v]_{b^ν}` and `‖v‖_{L²}` on the truncated box.
pub fn vbmol2_norm(hs: &PerturbedHalfSpace, v: &BoxField, opts: &OscillationOptions) -> Result<NormLedger> {
    let normal = normal_component(hs, v, opts.nu)?;
    Ok(NormLedger {
        linf: v.linf(),
        hminus_half: None,
        hhalf: None,
        bmo: bmo_seminorm(hs, v, opts.mu, opts.samples, opts.seed)?,
        bnu: bnu_seminorm(hs, &normal, opts.nu, opts.samples, opts.seed.wrapping_add(1))?,
        l2: v.l2(),
        zero_mode: None,
        samples: opts.samples,
    })
}

/// `L^∞`, `L²(Γ)`, `Ḣ^{±1/2}` and mass of a boundary density.
pub fn density_ledger(g: &BoundaryDensity, h: &BoundaryFunction) -> NormLedger {
    let plane = g.th_pull();
    NormLedger {
        linf: g.max_abs(),
        hminus_half: Some(hs_norm_fourier_unchecked(&plane, -0.5)),
        hhalf: Some(hs_norm_fourier_unchecked(&plane, 0.5)),
        bmo: 0.0,
        bnu: 0.0,
        l2: g.lp(h, 2.0),
        zero_mode: Some(g.integral(h)),
        samples: 0,
    }
}
