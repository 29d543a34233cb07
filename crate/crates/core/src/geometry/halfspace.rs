use super::boundary::{BoundaryFunction, GraphFunction};
use super::Point;
use crate::error::{Error, Result};
use crate::vec3;

const NEWTON_MAX_ITERS: usize = 60;
const NEWTON_TOL: f64 = 1e-14;
/// Resolution of the fallback grid search over the support disk.
const SEARCH_POINTS: usize = 96;

/// Quintic smoothstep cut-off: `1` on `[0, 1/2]`, `0` on `[3/4, ∞)`, `C²`.
pub fn cutoff_profile(t: f64) -> f64 {
    let t = t.abs();
    if t <= 0.5 {
        return 1.0;
    }
    if t >= 0.75 {
        return 0.0;
    }
    let s = (t - 0.5) * 4.0;
    1.0 - s * s * s * (10.0 - 15.0 * s + 6.0 * s * s)
}

/// Closest boundary point of some `x`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Projection {
    /// Horizontal coordinate `y'` of `πx`.
    pub foot: [f64; 2],
    /// `πx = (y', h(y'))`.
    pub point: Point,
    /// Signed distance `d(x)`.
    pub distance: f64,
}

/// `Ω = {x_3 > h(x')}` with its tube radius `ρ₀` and reach estimate `R_*`.
#[derive(Clone, Debug)]
pub struct PerturbedHalfSpace {
    boundary: BoundaryFunction,
    rho0: f64,
    reach: f64,
}

impl PerturbedHalfSpace {
    /// Uses `R_* = 1/((n-1)K)` and `ρ₀ = 0.9·min(R_*/2, 1/(2n(K+1)))`.
    pub fn new(boundary: BoundaryFunction) -> Self {
        let k = boundary.curvature_bound();
        let n = boundary.dim() as f64;
        let reach = if k > 0.0 { 1.0 / ((n - 1.0) * k) } else { f64::INFINITY };
        let rho0 = 0.9 * (reach / 2.0).min(1.0 / (2.0 * n * (k + 1.0)));
        Self { boundary, rho0, reach }
    }

    /// Caps the reach estimate (the tube radius shrinks accordingly).
    pub fn with_reach(boundary: BoundaryFunction, reach: f64) -> Result<Self> {
        if !(reach > 0.0) {
            return Err(Error::invalid("reach must be positive"));
        }
        let mut hs = Self::new(boundary);
        hs.reach = hs.reach.min(reach);
        hs.rho0 = hs.rho0.min(0.9 * hs.reach / 2.0);
        Ok(hs)
    }

    pub fn boundary(&self) -> &BoundaryFunction {
        &self.boundary
    }

    pub fn rho0(&self) -> f64 {
        self.rho0
    }

    pub fn reach(&self) -> f64 {
        self.reach
    }

    pub fn contains(&self, x: Point) -> bool {
        x[2] > self.boundary.eval([x[0], x[1]])
    }

    pub fn surface_point(&self, y: [f64; 2]) -> Point {
        [y[0], y[1], self.boundary.eval(y)]
    }

    /// `n(p) = (∇'h, -1)/ω`, evaluated at the foot `p'`.
    pub fn outward_normal(&self, foot: [f64; 2]) -> Point {
        let g = self.boundary.grad(foot);
        let w = (1.0 + g[0] * g[0] + g[1] * g[1]).sqrt();
        [g[0] / w, g[1] / w, -1.0 / w]
    }

    /// `∇d(x) = -n(πx)`; requires a unique projection.
    pub fn grad_distance(&self, x: Point) -> Result<Point> {
        let p = self.project(x)?;
        Ok(vec3::scale(-1.0, self.outward_normal(p.foot)))
    }

    pub fn signed_distance(&self, x: Point) -> f64 {
        self.closest(x).2
    }

    /// Nearest point `πx`; fails outside the reach.
    pub fn project_to_boundary(&self, x: Point) -> Result<Point> {
        Ok(self.project(x)?.point)
    }

    pub fn project(&self, x: Point) -> Result<Projection> {
        let p = self.nearest_point(x)?;
        if p.distance.abs() >= self.reach {
            return Err(Error::NoUniqueProjection { point: x, reason: "outside the reach" });
        }
        Ok(p)
    }

    /// A global minimiser of `|x - (y', h(y'))|` without the reach check.
    pub fn nearest_point(&self, x: Point) -> Result<Projection> {
        if !x.iter().all(|c| c.is_finite()) {
            return Err(Error::NoUniqueProjection { point: x, reason: "non-finite point" });
        }
        let (foot, converged, distance) = self.closest(x);
        if !converged {
            return Err(Error::NoUniqueProjection { point: x, reason: "Newton iteration failed" });
        }
        Ok(Projection { foot, point: self.surface_point(foot), distance })
    }

    /// `θ(d(x)/ρ)`.
    pub fn cutoff_theta(&self, rho: f64, x: Point) -> f64 {
        cutoff_profile(self.signed_distance(x) / rho)
    }

    /// Normal coordinates `F_{z0}(η) = p + η_3 ∇d(p)` with `p = (z0'+η', h(z0'+η'))`.
    pub fn normal_coordinates(&self, z0: Point, eta: Point, rho: f64) -> Result<Point> {
        if eta[0].hypot(eta[1]) >= rho || eta[2].abs() >= rho {
            return Err(Error::OutOfChart);
        }
        let foot = [z0[0] + eta[0], z0[1] + eta[1]];
        let nrm = self.outward_normal(foot);
        Ok(vec3::axpy(-eta[2], nrm, self.surface_point(foot)))
    }

    /// Inverse chart `x ↦ ((πx)' - z0', d(x))`.
    pub fn inverse_normal_coordinates(&self, z0: Point, x: Point, rho: f64) -> Result<Point> {
        let p = self.project(x)?;
        let eta = [p.foot[0] - z0[0], p.foot[1] - z0[1], p.distance];
        if eta[0].hypot(eta[1]) >= rho || eta[2].abs() >= rho {
            return Err(Error::OutOfChart);
        }
        Ok(eta)
    }

    /// Largest entry of `∇F_{z0} - I` seen by central differences on a
    /// `samples³` lattice filling `V_ρ`.
    pub fn chart_distortion(&self, z0: Point, rho: f64, samples: usize) -> Result<f64> {
        let step = 1e-6 * rho.max(1e-3);
        let reach = 0.95 * rho;
        let mut worst = 0.0f64;
        let m = samples.max(2);
        for a in 0..m {
            for b in 0..m {
                for c in 0..m {
                    let coord = |k: usize| -reach / 2f64.sqrt() + 2.0 * reach / 2f64.sqrt() * k as f64 / (m - 1) as f64;
                    let eta = [coord(a), coord(b), -reach + 2.0 * reach * c as f64 / (m - 1) as f64];
                    if eta[0].hypot(eta[1]) + step >= rho || eta[2].abs() + step >= rho {
                        continue;
                    }
                    for j in 0..3 {
                        let mut ep = eta;
                        let mut em = eta;
                        ep[j] += step;
                        em[j] -= step;
                        let col = vec3::scale(
                            0.5 / step,
                            vec3::sub(self.normal_coordinates(z0, ep, rho)?, self.normal_coordinates(z0, em, rho)?),
                        );
                        for (i, ci) in col.iter().enumerate() {
                            let delta = if i == j { 1.0 } else { 0.0 };
                            worst = worst.max((ci - delta).abs());
                        }
                    }
                }
            }
        }
        Ok(worst)
    }

    /// Global minimiser of `|x - (y', h(y'))|`: returns `(y', converged, d)`.
    fn closest(&self, x: Point) -> ([f64; 2], bool, f64) {
        let h = &self.boundary;
        let sign = if x[2] >= h.eval([x[0], x[1]]) { 1.0 } else { -1.0 };
        let r_h = h.support_radius();
        if r_h == 0.0 {
            return ([x[0], x[1]], true, x[2]);
        }
        let dist = |y: [f64; 2]| vec3::dist(x, self.surface_point(y));

        // Candidate on the flat part |y'| >= R_h.
        let rx = x[0].hypot(x[1]);
        let flat = if rx >= r_h {
            [x[0], x[1]]
        } else if rx > 0.0 {
            [x[0] * r_h / rx, x[1] * r_h / rx]
        } else {
            [r_h, 0.0]
        };
        let mut best = (flat, dist(flat));
        let mut converged = true;

        if let Some(y) = self.newton([x[0], x[1]], x) {
            let dy = dist(y);
            if dy < best.1 {
                best = (y, dy);
            }
            if dy <= best.1 && dy < self.reach {
                return (best.0, true, sign * best.1);
            }
        } else {
            converged = false;
        }

        // Lower bound by the distance to the cylinder enclosing the bump.
        let (lo, hi) = (-h.sup_abs(), h.sup_abs());
        let dz = if x[2] > hi {
            x[2] - hi
        } else if x[2] < lo {
            lo - x[2]
        } else {
            0.0
        };
        let dr = (rx - r_h).max(0.0);
        if dr.hypot(dz) >= best.1 {
            return (best.0, true, sign * best.1);
        }

        // Coarse search over the support disk, refined by Newton.
        let mut seed = best.0;
        let mut seed_d = best.1;
        for i in 0..SEARCH_POINTS {
            for j in 0..SEARCH_POINTS {
                let y = [
                    -r_h + 2.0 * r_h * (i as f64 + 0.5) / SEARCH_POINTS as f64,
                    -r_h + 2.0 * r_h * (j as f64 + 0.5) / SEARCH_POINTS as f64,
                ];
                let dy = dist(y);
                if dy < seed_d {
                    seed = y;
                    seed_d = dy;
                }
            }
        }
        if let Some(y) = self.newton(seed, x) {
            let dy = dist(y);
            if dy <= best.1 {
                best = (y, dy);
                converged = true;
            }
        } else if seed_d < best.1 {
            best = (seed, seed_d);
        }
        (best.0, converged || best.0 == flat, sign * best.1)
    }

    /// Damped Newton on `F(y') = ½|x'-y'|² + ½(x_3 - h(y'))²`.
    fn newton(&self, seed: [f64; 2], x: Point) -> Option<[f64; 2]> {
        let h = &self.boundary;
        let objective = |y: [f64; 2]| {
            let e = x[2] - h.eval(y);
            0.5 * ((x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2) + e * e)
        };
        let mut y = seed;
        let mut f = objective(y);
        for _ in 0..NEWTON_MAX_ITERS {
            let e = x[2] - h.eval(y);
            let g = h.grad(y);
            let hs = h.hess(y);
            let grad = [y[0] - x[0] - e * g[0], y[1] - x[1] - e * g[1]];
            let scale = 1.0 + x[0].abs().max(x[1].abs()).max(x[2].abs());
            if grad[0].hypot(grad[1]) < NEWTON_TOL * scale {
                return Some(y);
            }
            let a = 1.0 + g[0] * g[0] - e * hs[0][0];
            let b = g[0] * g[1] - e * hs[0][1];
            let c = 1.0 + g[1] * g[1] - e * hs[1][1];
            let det = a * c - b * b;
            let mut step = if a > 0.0 && det > 0.0 {
                [-(c * grad[0] - b * grad[1]) / det, -(a * grad[1] - b * grad[0]) / det]
            } else {
                [-grad[0], -grad[1]]
            };
            let mut accepted = false;
            for _ in 0..40 {
                let trial = [y[0] + step[0], y[1] + step[1]];
                let ft = objective(trial);
                if ft <= f {
                    let moved = step[0].hypot(step[1]);
                    y = trial;
                    f = ft;
                    accepted = true;
                    if moved < 1e-16 * scale {
                        return Some(y);
                    }
                    break;
                }
                step = [0.5 * step[0], 0.5 * step[1]];
            }
            if !accepted {
                // No decrease possible at machine precision: stationary.
                return Some(y);
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bump() -> PerturbedHalfSpace {
        PerturbedHalfSpace::new(BoundaryFunction::smooth_bump(0.3, 0.4).unwrap())
    }

    /// Dense grid minimisation of `|x - (y', h(y'))|`, refined by zooming.
    fn grid_oracle(hs: &PerturbedHalfSpace, x: Point) -> ([f64; 2], f64) {
        let mut centre = [x[0], x[1]];
        let mut half = 1.0;
        let mut best = (centre, f64::INFINITY);
        for _ in 0..12 {
            let m = 201;
            for i in 0..m {
                for j in 0..m {
                    let y = [
                        centre[0] - half + 2.0 * half * i as f64 / (m - 1) as f64,
                        centre[1] - half + 2.0 * half * j as f64 / (m - 1) as f64,
                    ];
                    let dy = vec3::dist(x, hs.surface_point(y));
                    if dy < best.1 {
                        best = (y, dy);
                    }
                }
            }
            centre = best.0;
            half *= 0.05;
        }
        best
    }

    #[test]
    fn flat_distance_is_height() {
        let hs = PerturbedHalfSpace::new(BoundaryFunction::zero());
        assert_eq!(hs.signed_distance([0.0, 0.0, 1.0]), 1.0);
        assert_eq!(hs.signed_distance([3.0, -2.0, -0.5]), -0.5);
        assert_eq!(hs.project_to_boundary([0.3, 0.7, 2.0]).unwrap(), [0.3, 0.7, 0.0]);
        assert_eq!(hs.outward_normal([0.1, 0.2]), [0.0, 0.0, -1.0]);
    }

    #[test]
    fn bump_distance_matches_grid_oracle() {
        let hs = bump();
        for x in [[0.0, 0.0, 0.5], [0.1, 0.0, 0.6], [0.25, -0.1, 0.2], [0.35, 0.2, -0.1]] {
            let (_, d) = grid_oracle(&hs, x);
            let sign = if hs.contains(x) { 1.0 } else { -1.0 };
            let got = hs.signed_distance(x);
            assert!((got - sign * d).abs() < 1e-9, "{x:?}: {got} vs {}", sign * d);
            assert!(got.abs() <= (x[2] - hs.boundary().eval([x[0], x[1]])).abs() + 1e-15);
        }
        let x = [0.1, 0.0, 0.6];
        let (foot, _) = grid_oracle(&hs, x);
        let p = hs.nearest_point(x).unwrap().point;
        assert!((p[0] - foot[0]).abs() < 1e-8 && (p[1] - foot[1]).abs() < 1e-8);
    }

    #[test]
    fn boundary_points_project_to_themselves() {
        let hs = bump();
        for y in [[0.0, 0.0], [0.2, 0.1], [0.5, 0.5]] {
            let p = hs.surface_point(y);
            let q = hs.project_to_boundary(p).unwrap();
            assert!(vec3::dist(p, q) < 1e-12);
            assert!(hs.signed_distance(p).abs() < 1e-12);
        }
    }

    #[test]
    fn normal_matches_finite_difference_gradient() {
        let hs = bump();
        let h = hs.boundary();
        let s = 1e-6;
        let fd = [
            (h.eval([0.2 + s, 0.0]) - h.eval([0.2 - s, 0.0])) / (2.0 * s),
            (h.eval([0.2, s]) - h.eval([0.2, -s])) / (2.0 * s),
        ];
        let w = (1.0 + fd[0] * fd[0] + fd[1] * fd[1]).sqrt();
        let n = hs.outward_normal([0.2, 0.0]);
        for (a, b) in n.iter().zip([fd[0] / w, fd[1] / w, -1.0 / w]) {
            assert!((a - b).abs() < 1e-6);
        }
        assert!((vec3::norm(n) - 1.0).abs() < 1e-15);
        assert_eq!(hs.outward_normal([0.0, 0.0]), [0.0, 0.0, -1.0]);
    }

    #[test]
    fn projection_round_trip_in_tube() {
        use rand::{Rng, SeedableRng};
        let hs = PerturbedHalfSpace::new(BoundaryFunction::smooth_bump(0.05, 0.4).unwrap());
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let y = [rng.gen_range(-0.6..0.6), rng.gen_range(-0.6..0.6)];
            let t = rng.gen_range(-0.99..0.99) * hs.rho0();
            let x = vec3::axpy(-t, hs.outward_normal(y), hs.surface_point(y));
            let p = hs.project(x).unwrap();
            let back = vec3::axpy(-p.distance, hs.outward_normal(p.foot), p.point);
            assert!(vec3::dist(x, back) < 1e-8 * (1.0 + vec3::norm(x)));
            assert!((p.distance - t).abs() < 1e-9);
        }
    }

    #[test]
    fn normal_coordinates_flat_and_axis() {
        let flat = PerturbedHalfSpace::new(BoundaryFunction::zero());
        let z0 = [0.3, -0.2, 0.0];
        let x = flat.normal_coordinates(z0, [0.01, 0.02, 0.03], 0.1).unwrap();
        assert!(vec3::dist(x, [0.31, -0.18, 0.03]) < 1e-15);

        let hs = bump();
        let z0 = hs.surface_point([0.1, 0.05]);
        let n = hs.outward_normal([0.1, 0.05]);
        let x = hs.normal_coordinates(z0, [0.0, 0.0, 0.02], 0.05).unwrap();
        assert!(vec3::dist(x, vec3::axpy(-0.02, n, z0)) < 1e-15);
    }

    #[test]
    fn normal_coordinates_round_trip() {
        let hs = bump();
        let rho = hs.rho0();
        let z0 = hs.surface_point([0.0, 0.0]);
        let eta = [0.05f64.min(0.5 * rho), 0.0, 0.02f64.min(0.4 * rho)];
        let x = hs.normal_coordinates(z0, eta, rho).unwrap();
        let back = hs.inverse_normal_coordinates(z0, x, rho).unwrap();
        assert!(vec3::dist(eta, back) < 1e-8);
        assert!(matches!(hs.normal_coordinates(z0, [rho, 0.0, 0.0], rho), Err(Error::OutOfChart)));
    }

    #[test]
    fn chart_is_close_to_identity_for_small_rho() {
        let hs = PerturbedHalfSpace::new(BoundaryFunction::smooth_bump(0.01, 0.3).unwrap());
        let z0 = hs.surface_point([0.1, 0.0]);
        let big = hs.chart_distortion(z0, hs.rho0(), 5).unwrap();
        let small = hs.chart_distortion(z0, hs.rho0() / 8.0, 5).unwrap();
        assert!(big.is_finite() && small <= big + 1e-9);
        let flat = PerturbedHalfSpace::new(BoundaryFunction::zero());
        assert!(flat.chart_distortion([0.0; 3], 0.1, 4).unwrap() < 1e-8);
    }

    #[test]
    fn cutoff_plateau_support_and_monotonicity() {
        assert_eq!(cutoff_profile(0.0), 1.0);
        assert_eq!(cutoff_profile(0.5), 1.0);
        assert_eq!(cutoff_profile(1.0), 0.0);
        assert!((cutoff_profile(0.625) - 0.5).abs() < 1e-15);
        let mut prev = 1.0;
        for k in 0..=100 {
            let v = cutoff_profile(0.5 + 0.25 * k as f64 / 100.0);
            assert!(v <= prev && (0.0..=1.0).contains(&v));
            prev = v;
        }
        let hs = bump();
        assert_eq!(hs.cutoff_theta(0.05, hs.surface_point([0.1, 0.1])), 1.0);
        assert_eq!(hs.cutoff_theta(0.05, [0.0, 0.0, 0.3 + 0.05]), 0.0);
    }

    #[test]
    fn grad_distance_is_lipschitz() {
        let flat = PerturbedHalfSpace::new(BoundaryFunction::zero());
        assert_eq!(flat.grad_distance([0.2, 0.3, 0.05]).unwrap(), [0.0, 0.0, 1.0]);
        let hs = PerturbedHalfSpace::new(BoundaryFunction::smooth_bump(0.01, 0.3).unwrap());
        let mut worst = 0.0f64;
        for i in 0..20 {
            let y = [-0.3 + 0.03 * i as f64, 0.05];
            let p = hs.surface_point(y);
            for t in [1e-1, 1e-2, 1e-3, 1e-4] {
                let x = vec3::axpy(-t * hs.rho0(), hs.outward_normal([0.1, 0.0]), hs.surface_point([0.1, 0.0]));
                let gx = hs.grad_distance(x).unwrap();
                let gy = vec3::scale(-1.0, hs.outward_normal(y));
                worst = worst.max(vec3::dist(gx, gy) / vec3::dist(x, p).max(1e-300));
            }
        }
        assert!(worst.is_finite() && worst < 10.0 * hs.boundary().curvature_bound() + 1.0);
    }
}
