use rayon::prelude::*;

use super::quadrature::{Density, FlatForm, Prepared, SurfaceQuadrature};
use crate::error::{Error, Result};
use crate::geometry::{GraphFunction, Point};
use crate::kernels::{e3, grad_e3, INV_4PI};
use crate::norms::{hs_norm_fourier_unchecked, BoundaryDensity};
use crate::vec3;

fn no_self(_: [f64; 2], _: [f64; 2]) -> [f64; 3] {
    [0.0; 3]
}

fn keep_all(_: [f64; 2], _: [f64; 2]) -> bool {
    false
}

/// Sup, `L^{4/3}(Γ)` and pullback `Ḣ^{-1/2}` norms of `Sg`.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TraceNorms {
    pub linf: f64,
    pub lp: f64,
    pub hminus: f64,
}

impl SurfaceQuadrature {
    fn check_density(&self, g: &BoundaryDensity) -> Result<()> {
        if g.lattice() != self.lattice() {
            return Err(Error::invalid("density and quadrature use different lattices"));
        }
        Ok(())
    }

    /// `E * (δ_Γ ⊗ g)(x)`.
    pub fn single_layer(&self, g: &BoundaryDensity, x: Point) -> Result<f64> {
        self.check_density(g)?;
        self.check_target(x)?;
        let k = |y: [f64; 2]| [0.0, 0.0, e3(vec3::sub(x, self.half_space().surface_point(y)))];
        Ok(self.integrate(
            x,
            Density::Samples(&Prepared::new(self, g)),
            &k,
            FlatForm::None,
            None,
            &no_self,
            &keep_all,
            false,
        )[2])
    }

    /// `∇E * (δ_Γ ⊗ g)(x)`.
    pub fn grad_single_layer(&self, g: &BoundaryDensity, x: Point) -> Result<Point> {
        self.check_density(g)?;
        self.check_target(x)?;
        Ok(self.grad_single_layer_unchecked(Density::Samples(&Prepared::new(self, g)), x))
    }

    /// [`SurfaceQuadrature::grad_single_layer`] at many targets, in parallel.
    pub fn grad_single_layer_many(&self, g: &BoundaryDensity, xs: &[Point]) -> Result<Vec<Point>> {
        self.check_density(g)?;
        for x in xs {
            self.check_target(*x)?;
        }
        let prepared = Prepared::new(self, g);
        Ok(xs.par_iter().map(|x| self.grad_single_layer_unchecked(Density::Samples(&prepared), *x)).collect())
    }

    /// Gradient of the single layer of the constant density `c` on all of `Γ`,
    /// using the exact plane integrals on flat cells and beyond the lattice.
    pub fn grad_single_layer_uniform(&self, c: f64, x: Point) -> Result<Point> {
        self.check_target(x)?;
        Ok(self.grad_single_layer_unchecked(Density::Uniform(c), x))
    }

    pub(crate) fn grad_single_layer_unchecked(&self, density: Density, x: Point) -> Point {
        let k = |y: [f64; 2]| grad_e3(vec3::sub(x, self.half_space().surface_point(y)));
        self.integrate(x, density, &k, FlatForm::Gradient, None, &no_self, &keep_all, false)
    }

    /// `Qg(x) = ∫_Γ n(πx)·∇E(x - y) g(y) dH²(y)` for `0 < d(x) < ρ₀`.
    pub fn double_layer_q(&self, g: &BoundaryDensity, x: Point) -> Result<f64> {
        let p = self.half_space().project(x)?;
        if !(p.distance > 0.0 && p.distance < self.half_space().rho0()) {
            return Err(Error::invalid(format!(
                "double layer target must satisfy 0 < d < rho0, got d = {}",
                p.distance
            )));
        }
        let grad = self.grad_single_layer(g, x)?;
        Ok(vec3::dot(self.half_space().outward_normal(p.foot), grad))
    }

    fn normal_y_kernel(&self, x: Point) -> impl Fn([f64; 2]) -> f64 + '_ {
        move |y: [f64; 2]| {
            let h = self.half_space().boundary();
            let hy = h.eval(y);
            let g = h.grad(y);
            let d = [x[0] - y[0], x[1] - y[1], x[2] - hy];
            let r2 = vec3::dot(d, d);
            let sigma = -g[0] * d[0] - g[1] * d[1] + d[2];
            let omega = (1.0 + g[0] * g[0] + g[1] * g[1]).sqrt();
            -INV_4PI * sigma / (omega * r2 * r2.sqrt())
        }
    }

    /// `∫_Γ ∂E/∂n_y(x - y) dH²(y)`; equals `-1/2` in `Ω`.
    pub fn gauss_flux(&self, x: Point) -> Result<f64> {
        self.check_target(x)?;
        let f = self.normal_y_kernel(x);
        let k = |y: [f64; 2]| [0.0, 0.0, f(y)];
        Ok(self.integrate(x, Density::Uniform(1.0), &k, FlatForm::NormalY, None, &no_self, &keep_all, false)[2])
    }

    /// `∫_Γ |∂E/∂n_y(x - y)| dH²(y)`.
    pub fn abs_flux(&self, x: Point) -> Result<f64> {
        self.check_target(x)?;
        let f = self.normal_y_kernel(x);
        let k = |y: [f64; 2]| [0.0, 0.0, f(y).abs()];
        Ok(self.integrate(x, Density::Uniform(1.0), &k, FlatForm::AbsNormalY, None, &no_self, &keep_all, false)[2])
    }

    /// `Sg(x0) = -∫_Γ n(x0)·∇E(x0 - y) g(y) dH²(y)` at `x0 = (foot, h(foot))`:
    ///
    /// `Sg(x0) = (C/ω(x0')) ∫ r(y') g(y') ω(y') / |x0 - y|³ dy'`, with
    /// `r(y') = h(y') - h(x0') - ∇'h(x0')·(y' - x0')`. The kernel is
    /// `O(|x0' - y'|^{-1})`; the cell holding `x0'` is integrated in polar
    /// coordinates with the quadratic model of `h`.
    pub fn trace_s(&self, g: &BoundaryDensity, foot: [f64; 2]) -> Result<f64> {
        self.check_density(g)?;
        Ok(self.trace_s_density(Density::Samples(&Prepared::new(self, g)), foot, false))
    }

    /// Contribution of `|y'| ≥ 2R_h` to `Sg(x0)`: the part the two-branch
    /// definition drops for `|x0'| ≥ 2R_h`.
    pub fn trace_s_branch_difference(&self, g: &BoundaryDensity, foot: [f64; 2]) -> Result<f64> {
        self.check_density(g)?;
        Ok(self.trace_s_density(Density::Samples(&Prepared::new(self, g)), foot, true))
    }

    fn trace_s_density(&self, density: Density, foot: [f64; 2], outer_only: bool) -> f64 {
        let hs = self.half_space();
        let h = hs.boundary();
        let x0 = hs.surface_point(foot);
        let g0 = h.grad(foot);
        let h0 = x0[2];
        let omega0 = (1.0 + g0[0] * g0[0] + g0[1] * g0[1]).sqrt();
        let c = INV_4PI / omega0;
        let kernel = |y: [f64; 2]| {
            let hy = h.eval(y);
            let r = hy - h0 - g0[0] * (y[0] - foot[0]) - g0[1] * (y[1] - foot[1]);
            let d = [x0[0] - y[0], x0[1] - y[1], h0 - hy];
            let d2 = vec3::dot(d, d);
            if d2 == 0.0 {
                return [0.0; 3];
            }
            [0.0, 0.0, c * r / (d2 * d2.sqrt())]
        };
        let hess = h.hess(foot);
        let self_leaf = |lo: [f64; 2], hi: [f64; 2]| {
            if outer_only {
                return [0.0; 3];
            }
            let gy = density.at(foot);
            let v = c * omega0 * gy * polar_self_integral(foot, lo, hi, hess, g0);
            [0.0, 0.0, v]
        };
        let target_flat = h.cell_is_flat(foot, foot);
        let two_rh = 2.0 * h.support_radius();
        let skip = |lo: [f64; 2], hi: [f64; 2]| {
            if outer_only {
                // Keep only cells entirely outside B(2R_h).
                let cx = 0.0f64.clamp(lo[0], hi[0]);
                let cy = 0.0f64.clamp(lo[1], hi[1]);
                if cx.hypot(cy) < two_rh {
                    return true;
                }
            }
            target_flat && h.cell_is_flat(lo, hi)
        };
        let foot_opt = if outer_only { None } else { Some(foot) };
        self.integrate(x0, density, &kernel, FlatForm::None, foot_opt, &self_leaf, &skip, target_flat)[2]
    }

    /// `Sg` at every lattice node, as a density on `Γ`.
    pub fn apply_s(&self, g: &BoundaryDensity) -> Result<BoundaryDensity> {
        self.check_density(g)?;
        let lat = *self.lattice();
        let prepared = Prepared::new(self, g);
        let values: Vec<f64> = (0..lat.len())
            .into_par_iter()
            .map(|i| self.trace_s_density(Density::Samples(&prepared), lat.node(i), false))
            .collect();
        BoundaryDensity::new(lat, values, true)
    }

    /// Norms of `Sg` on the boundary lattice.
    pub fn trace_s_norms(&self, g: &BoundaryDensity) -> Result<TraceNorms> {
        let s = self.apply_s(g)?;
        let h = self.half_space().boundary();
        Ok(TraceNorms {
            linf: s.max_abs(),
            lp: s.lp(h, 4.0 / 3.0),
            hminus: hs_norm_fourier_unchecked(&s.th_pull(), -0.5),
        })
    }
}

/// `∫_{[lo,hi]} ½uᵀHu / (uᵀ(I + ggᵀ)u)^{3/2} du` in polar coordinates about
/// `p` (the radial integral of a degree `-1` integrand is the radius).
fn polar_self_integral(p: [f64; 2], lo: [f64; 2], hi: [f64; 2], hess: [[f64; 2]; 2], g: [f64; 2]) -> f64 {
    use std::f64::consts::PI;
    let mut cuts: Vec<f64> = [[lo[0], lo[1]], [hi[0], lo[1]], [hi[0], hi[1]], [lo[0], hi[1]]]
        .iter()
        .map(|c| (c[1] - p[1]).atan2(c[0] - p[0]).rem_euclid(2.0 * PI))
        .collect();
    cuts.push(0.0);
    cuts.push(2.0 * PI);
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let (gx, gw) = crate::norms::gauss_legendre(16);
    let mut total = 0.0;
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b - a < 1e-15 {
            continue;
        }
        for (x, wt) in gx.iter().zip(&gw) {
            let phi = 0.5 * (a + b) + 0.5 * (b - a) * x;
            let e = [phi.cos(), phi.sin()];
            let mut rho = f64::INFINITY;
            for k in 0..2 {
                if e[k] > 1e-300 {
                    rho = rho.min((hi[k] - p[k]) / e[k]);
                } else if e[k] < -1e-300 {
                    rho = rho.min((lo[k] - p[k]) / e[k]);
                }
            }
            let quad = 0.5 * (hess[0][0] * e[0] * e[0] + 2.0 * hess[0][1] * e[0] * e[1] + hess[1][1] * e[1] * e[1]);
            let ge = g[0] * e[0] + g[1] * e[1];
            let metric = (1.0 + ge * ge).powf(1.5);
            total += 0.5 * (b - a) * wt * quad / metric * rho;
        }
    }
    total
}
