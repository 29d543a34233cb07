//! Fundamental solution of `-Δ` and the kernels built from it.
//!
//! `E(x) = |x|^{2-n} / (n(n-2) b₁(n))` and `∇E(x) = -x / (n b₁(n) |x|^n)`.
//! Boundary kernels use the normal `n = (∇'h, -1)/ω`, so for `y ∈ Γ`
//!
//! `∂E/∂n_y(x - y) = -C σ(y') / (ω(y') |x - y|^n)`, `C = 1/(n b₁(n))`,
//! `σ(y') = -∇'h(y')·(x' - y') + x_n - h(y')`,
//!
//! which integrates to `-1/2` over `Γ` for every `x ∈ Ω`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{GraphFunction, Point};

/// `1/(4π)`.
pub const INV_4PI: f64 = 0.25 / PI;

/// Volume of the unit ball of `R^n`.
pub fn unit_ball_volume(n: usize) -> f64 {
    match n {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * PI / n as f64 * unit_ball_volume(n - 2),
    }
}

/// `E` in three dimensions; no singularity check.
#[inline]
pub fn e3(x: Point) -> f64 {
    INV_4PI / (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt()
}

/// `∇E` in three dimensions; no singularity check.
#[inline]
pub fn grad_e3(x: Point) -> Point {
    let r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
    let c = -INV_4PI / (r2 * r2.sqrt());
    [c * x[0], c * x[1], c * x[2]]
}

/// Dimension-dependent normalisations of the Laplace kernels.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelContext {
    dim: usize,
    unit_ball_volume: f64,
    normalization: f64,
}

impl KernelContext {
    pub fn new(dim: usize) -> Result<Self> {
        if dim < 3 {
            return Err(Error::invalid("the Laplace kernels need n >= 3"));
        }
        let b1 = unit_ball_volume(dim);
        let n = dim as f64;
        Ok(Self { dim, unit_ball_volume: b1, normalization: 1.0 / (n * (n - 2.0) * b1) })
    }

    pub fn three() -> Self {
        Self::new(3).expect("n = 3 is valid")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn unit_ball_volume(&self) -> f64 {
        self.unit_ball_volume
    }

    /// `1/(n(n-2)b₁(n))`.
    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    /// `C(n) = 1/(n b₁(n))`, the constant in front of `∇E` and `∂E/∂n`.
    pub fn gradient_constant(&self) -> f64 {
        1.0 / (self.dim as f64 * self.unit_ball_volume)
    }

    fn radius(&self, x: &[f64]) -> Result<f64> {
        debug_assert_eq!(x.len(), self.dim);
        let r = x.iter().map(|c| c * c).sum::<f64>().sqrt();
        if r == 0.0 {
            Err(Error::SingularPoint)
        } else {
            Ok(r)
        }
    }

    pub fn e_eval(&self, x: &[f64]) -> Result<f64> {
        let r = self.radius(x)?;
        Ok(self.normalization * r.powi(2 - self.dim as i32))
    }

    pub fn grad_e(&self, x: &[f64]) -> Result<Vec<f64>> {
        let r = self.radius(x)?;
        let c = -self.gradient_constant() * r.powi(-(self.dim as i32));
        Ok(x.iter().map(|xi| c * xi).collect())
    }

    /// `∂E/∂n_y(x - y)` for `y = (y', h(y')) ∈ Γ` (three dimensions).
    pub fn de_dny<G: GraphFunction>(&self, h: &G, x: Point, y: [f64; 2]) -> Result<f64> {
        self.require_three()?;
        let hy = h.eval(y);
        let g = h.grad(y);
        let d = [x[0] - y[0], x[1] - y[1], x[2] - hy];
        let r = self.radius(&d)?;
        let sigma = -g[0] * d[0] - g[1] * d[1] + d[2];
        let omega = (1.0 + g[0] * g[0] + g[1] * g[1]).sqrt();
        Ok(-self.gradient_constant() * sigma / (omega * r.powi(3)))
    }

    /// Splits `σ/|x-y|^n = K₀ + R` with `K₀ = (x_n - h(x'))/|x-y|^n` and
    /// `R = r(x',y')/|x-y|^n`, `r` the Taylor remainder of `h` around `y'`.
    pub fn kernel_k0_and_r<G: GraphFunction>(&self, h: &G, x: Point, y: [f64; 2]) -> Result<(f64, f64)> {
        self.require_three()?;
        let dx = [x[0] - y[0], x[1] - y[1]];
        if dx[0].hypot(dx[1]) >= 1.0 {
            return Err(Error::invalid("kernel split is local: need |x' - y'| < 1"));
        }
        let hy = h.eval(y);
        let r = self.radius(&[dx[0], dx[1], x[2] - hy])?;
        let rn = r.powi(3);
        let k0 = (x[2] - h.eval([x[0], x[1]])) / rn;
        Ok((k0, taylor_remainder(h, [x[0], x[1]], y) / rn))
    }

    /// `P_t(z') = 2t / (n b₁(n) (|z'|² + t²)^{n/2})`.
    pub fn poisson_kernel(&self, t: f64, z: &[f64]) -> f64 {
        let s = z.iter().map(|c| c * c).sum::<f64>() + t * t;
        2.0 * self.gradient_constant() * t / s.powf(self.dim as f64 / 2.0)
    }

    /// Neumann-Green function of the half space `{x_n > 0}`:
    /// `N(x, y) = E(x - y) + E(x' - y', x_n + y_n)`.
    pub fn neumann_green(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        let n = self.dim;
        let diff: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
        let mut refl = diff.clone();
        refl[n - 1] = x[n - 1] + y[n - 1];
        Ok(self.e_eval(&diff)? + self.e_eval(&refl)?)
    }

    fn require_three(&self) -> Result<()> {
        if self.dim == 3 {
            Ok(())
        } else {
            Err(Error::invalid("boundary kernels are implemented for n = 3"))
        }
    }
}

/// `r(x', y') = h(x') - h(y') - ∇'h(y')·(x' - y')`.
pub fn taylor_remainder<G: GraphFunction>(h: &G, x: [f64; 2], y: [f64; 2]) -> f64 {
    let g = h.grad(y);
    h.eval(x) - h.eval(y) - g[0] * (x[0] - y[0]) - g[1] * (x[1] - y[1])
}
