//! The compactly supported graph function `h` whose epigraph is the domain.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ratio between the Hessian bound `K` and the sampled supremum of `|∇'²h|`;
/// must exceed one so that the type `(K)` inequality is strict.
const CURVATURE_SLACK: f64 = 1.1;

/// Number of radial samples used to estimate the sup-norms of `h`.
const RADIAL_SAMPLES: usize = 20_001;

/// Support radius of the Gaussian profile in units of its width.
pub const GAUSSIAN_SUPPORT_WIDTHS: f64 = 3.0;

/// Anything that can be sampled like a graph `x' ↦ h(x')` over `R²`.
pub trait GraphFunction {
    fn eval(&self, x: [f64; 2]) -> f64;
    fn grad(&self, x: [f64; 2]) -> [f64; 2];
    fn hess(&self, x: [f64; 2]) -> [[f64; 2]; 2];

    /// Area element `ω = (1 + |∇'h|²)^{1/2}`.
    fn area_element(&self, x: [f64; 2]) -> f64 {
        let g = self.grad(x);
        (1.0 + g[0] * g[0] + g[1] * g[1]).sqrt()
    }
}

/// Radial boundary profiles, selectable by name from configuration files.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Profile {
    /// `h ≡ 0`.
    Zero,
    /// `a·exp(1 - 1/(1 - |x'/R|²))` on `|x'| < R`.
    SmoothBump { amplitude: f64, radius: f64 },
    /// `a·exp(-|x'|²/s²)` multiplied by the smooth bump of radius `3s`, which
    /// makes the Gaussian compactly supported while keeping it `C^∞`.
    GaussianBump { amplitude: f64, width: f64 },
}

impl Profile {
    pub fn support_radius(&self) -> f64 {
        match *self {
            Profile::Zero => 0.0,
            Profile::SmoothBump { radius, .. } => radius,
            Profile::GaussianBump { width, .. } => GAUSSIAN_SUPPORT_WIDTHS * width,
        }
    }

    fn amplitude(&self) -> f64 {
        match *self {
            Profile::Zero => 0.0,
            Profile::SmoothBump { amplitude, .. } | Profile::GaussianBump { amplitude, .. } => amplitude,
        }
    }

    /// `h = a·exp(G(t))` with `t = |x'|²`; returns `(G, G', G'')` inside the support.
    fn log_profile(&self, t: f64) -> Option<(f64, f64, f64)> {
        let bump = |t: f64, r: f64| -> Option<(f64, f64, f64)> {
            let r2 = r * r;
            let u = t / r2;
            if u >= 1.0 {
                return None;
            }
            let w = 1.0 / (1.0 - u);
            let g = 1.0 - w;
            let g1 = -w * w / r2;
            let g2 = -2.0 * w * w * w / (r2 * r2);
            Some((g, g1, g2))
        };
        match *self {
            Profile::Zero => None,
            Profile::SmoothBump { radius, .. } => bump(t, radius),
            Profile::GaussianBump { width, .. } => {
                let (g, g1, g2) = bump(t, GAUSSIAN_SUPPORT_WIDTHS * width)?;
                let s2 = width * width;
                Some((g - t / s2, g1 - 1.0 / s2, g2))
            }
        }
    }

    /// Radial derivatives `(φ, φ', φ'')` of `φ(t) = h(x')`, `t = |x'|²`.
    fn radial(&self, t: f64) -> (f64, f64, f64) {
        match self.log_profile(t) {
            None => (0.0, 0.0, 0.0),
            Some((g, g1, g2)) => {
                let phi = self.amplitude() * g.exp();
                (phi, phi * g1, phi * (g1 * g1 + g2))
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            Profile::Zero => true,
            Profile::SmoothBump { amplitude, radius } => amplitude.is_finite() && radius > 0.0,
            Profile::GaussianBump { amplitude, width } => amplitude.is_finite() && width > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::invalid(format!("bad boundary profile {self:?}")))
        }
    }
}

/// The boundary graph `h ∈ C²_c(R²)` together with the norms the theory
/// needs: `sup|h|`, `sup|∇'h|`, `sup|∇'²h|` (spectral norm), the support
/// radius `R_h` and a strict Hessian bound `K`.
#[derive(Clone, Debug)]
pub struct BoundaryFunction {
    profile: Profile,
    support_radius: f64,
    sup_h: f64,
    sup_grad: f64,
    sup_hess: f64,
    curvature_bound: f64,
}

impl BoundaryFunction {
    pub fn new(profile: Profile) -> Result<Self> {
        profile.validate()?;
        let support_radius = profile.support_radius();
        let (mut sup_h, mut sup_grad, mut sup_hess) = (0.0f64, 0.0f64, 0.0f64);
        if support_radius > 0.0 {
            for k in 0..RADIAL_SAMPLES {
                let r = support_radius * k as f64 / (RADIAL_SAMPLES - 1) as f64;
                let t = r * r;
                let (phi, d1, d2) = profile.radial(t);
                sup_h = sup_h.max(phi.abs());
                sup_grad = sup_grad.max((2.0 * d1 * r).abs());
                let tangential = (2.0 * d1).abs();
                let radial = (2.0 * d1 + 4.0 * d2 * t).abs();
                sup_hess = sup_hess.max(tangential.max(radial));
            }
        }
        Ok(Self { profile, support_radius, sup_h, sup_grad, sup_hess, curvature_bound: CURVATURE_SLACK * sup_hess })
    }

    pub fn zero() -> Self {
        Self::new(Profile::Zero).expect("flat profile is valid")
    }

    pub fn smooth_bump(amplitude: f64, radius: f64) -> Result<Self> {
        Self::new(Profile::SmoothBump { amplitude, radius })
    }

    pub fn gaussian_bump(amplitude: f64, width: f64) -> Result<Self> {
        Self::new(Profile::GaussianBump { amplitude, width })
    }

    pub fn profile(&self) -> Profile {
        self.profile
    }

    /// Ambient dimension `n`.
    pub fn dim(&self) -> usize {
        crate::DIM
    }

    pub fn is_flat(&self) -> bool {
        self.sup_h == 0.0 && self.sup_grad == 0.0
    }

    /// `R_h`, with the convention `R_h = 0` for the flat boundary.
    pub fn support_radius(&self) -> f64 {
        self.support_radius
    }

    pub fn sup_abs(&self) -> f64 {
        self.sup_h
    }

    pub fn sup_grad(&self) -> f64 {
        self.sup_grad
    }

    /// `‖∇'²h‖_{L^∞}` measured with the spectral norm.
    pub fn sup_hess(&self) -> f64 {
        self.sup_hess
    }

    /// `‖h‖_{C¹} = sup|h| + sup|∇'h|`.
    pub fn c1_norm(&self) -> f64 {
        self.sup_h + self.sup_grad
    }

    /// Strict bound `K > sup|∇'²h|` (zero only for the flat boundary).
    pub fn curvature_bound(&self) -> f64 {
        self.curvature_bound
    }

    /// `true` when the closed cell `[a0,b0]×[a1,b1]` misses the support of `h`.
    pub fn cell_is_flat(&self, lo: [f64; 2], hi: [f64; 2]) -> bool {
        if self.support_radius == 0.0 {
            return true;
        }
        let cx = 0.0f64.clamp(lo[0], hi[0]);
        let cy = 0.0f64.clamp(lo[1], hi[1]);
        cx * cx + cy * cy >= self.support_radius * self.support_radius
    }
}

impl GraphFunction for BoundaryFunction {
    fn eval(&self, x: [f64; 2]) -> f64 {
        self.profile.radial(x[0] * x[0] + x[1] * x[1]).0
    }

    fn grad(&self, x: [f64; 2]) -> [f64; 2] {
        let (_, d1, _) = self.profile.radial(x[0] * x[0] + x[1] * x[1]);
        [2.0 * d1 * x[0], 2.0 * d1 * x[1]]
    }

    fn hess(&self, x: [f64; 2]) -> [[f64; 2]; 2] {
        let (_, d1, d2) = self.profile.radial(x[0] * x[0] + x[1] * x[1]);
        [
            [2.0 * d1 + 4.0 * d2 * x[0] * x[0], 4.0 * d2 * x[0] * x[1]],
            [4.0 * d2 * x[0] * x[1], 2.0 * d1 + 4.0 * d2 * x[1] * x[1]],
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_grad(h: &BoundaryFunction, x: [f64; 2], step: f64) -> [f64; 2] {
        let e = |d: [f64; 2]| h.eval([x[0] + d[0], x[1] + d[1]]);
        [(e([step, 0.0]) - e([-step, 0.0])) / (2.0 * step), (e([0.0, step]) - e([0.0, -step])) / (2.0 * step)]
    }

    #[test]
    fn bump_apex_and_support() {
        let h = BoundaryFunction::smooth_bump(0.3, 0.4).unwrap();
        assert!((h.eval([0.0, 0.0]) - 0.3).abs() < 1e-15);
        assert_eq!(h.eval([0.4, 0.0]), 0.0);
        assert_eq!(h.grad([0.5, 0.1]), [0.0, 0.0]);
        assert_eq!(h.support_radius(), 0.4);
        assert!((h.sup_abs() - 0.3).abs() < 1e-12);
    }

    #[test]
    fn analytic_derivatives_match_finite_differences() {
        for profile in
            [Profile::SmoothBump { amplitude: 0.3, radius: 0.4 }, Profile::GaussianBump { amplitude: 0.05, width: 0.2 }]
        {
            let h = BoundaryFunction::new(profile).unwrap();
            for x in [[0.2, 0.0], [0.1, -0.15], [-0.05, 0.3], [0.0, 0.0]] {
                let g = h.grad(x);
                let fd = fd_grad(&h, x, 1e-6);
                assert!((g[0] - fd[0]).abs() < 1e-6 && (g[1] - fd[1]).abs() < 1e-6);
                let hs = h.hess(x);
                let step = 1e-5;
                let gp = h.grad([x[0] + step, x[1]]);
                let gm = h.grad([x[0] - step, x[1]]);
                assert!(((gp[0] - gm[0]) / (2.0 * step) - hs[0][0]).abs() < 1e-5);
                assert!(((gp[1] - gm[1]) / (2.0 * step) - hs[1][0]).abs() < 1e-5);
            }
        }
    }

    #[test]
    fn type_k_bound_is_strict() {
        let h = BoundaryFunction::smooth_bump(0.01, 0.3).unwrap();
        assert!(h.sup_hess() > 0.0);
        assert!(h.sup_hess() < h.curvature_bound());
        // dense 2D probe never exceeds K
        for i in 0..200 {
            for j in 0..200 {
                let x = [-0.3 + 0.6 * i as f64 / 199.0, -0.3 + 0.6 * j as f64 / 199.0];
                let m = h.hess(x);
                let tr = m[0][0] + m[1][1];
                let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
                let disc = (tr * tr / 4.0 - det).max(0.0).sqrt();
                let spec = (tr / 2.0 + disc).abs().max((tr / 2.0 - disc).abs());
                assert!(spec < h.curvature_bound());
            }
        }
    }

    #[test]
    fn flat_profile() {
        let h = BoundaryFunction::zero();
        assert!(h.is_flat());
        assert_eq!(h.support_radius(), 0.0);
        assert_eq!(h.c1_norm(), 0.0);
        assert_eq!(h.curvature_bound(), 0.0);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(BoundaryFunction::smooth_bump(0.1, 0.0).is_err());
        assert!(BoundaryFunction::gaussian_bump(f64::NAN, 1.0).is_err());
    }
}
