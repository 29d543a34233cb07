use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{GraphFunction, PerturbedHalfSpace, Point};
use crate::kernels::INV_4PI;
use crate::norms::{gauss_legendre, BoundaryDensity, Lattice};

/// Tuning of the surface quadrature. Distances are measured from the target
/// to the centre of a (sub)cell in units of the cell width.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadratureOptions {
    /// Lattice covers `[-L, L]²`.
    pub half_extent: f64,
    pub cells: usize,
    /// Below this ratio a cell is split 3×3.
    pub near_ratio: f64,
    /// Below this ratio the `gauss_points²` rule is used, beyond it 2×2.
    pub mid_ratio: f64,
    pub gauss_points: usize,
    pub max_depth: usize,
    /// Close the lattice with the exact flat-plane integral for uniform densities.
    pub flat_tail: bool,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self {
            half_extent: 4.0,
            cells: 128,
            near_ratio: 2.0,
            mid_ratio: 8.0,
            gauss_points: 4,
            max_depth: 6,
            flat_tail: true,
        }
    }
}

/// A lattice density with its interpolant cached at the 2×2 Gauss points of
/// every cell, shared by all targets of a batch.
pub(crate) struct Prepared<'a> {
    g: &'a BoundaryDensity,
    gauss2: Vec<[f64; 4]>,
}

impl<'a> Prepared<'a> {
    pub(crate) fn new(q: &SurfaceQuadrature, g: &'a BoundaryDensity) -> Self {
        let gauss2 = q.gauss2_points.iter().map(|pts| [0, 1, 2, 3].map(|k| g.interpolate(pts[k].0))).collect();
        Self { g, gauss2 }
    }
}

/// Density seen by the integrator.
#[derive(Clone, Copy)]
pub(crate) enum Density<'a> {
    /// `g ≡ c` everywhere, including beyond the lattice.
    Uniform(f64),
    /// Samples on the lattice, zero beyond it.
    Samples(&'a Prepared<'a>),
}

impl Density<'_> {
    pub(crate) fn at(&self, y: [f64; 2]) -> f64 {
        match self {
            Density::Uniform(c) => *c,
            Density::Samples(p) => p.g.interpolate(y),
        }
    }

    fn at_gauss2(&self, idx: usize, k: usize) -> f64 {
        match self {
            Density::Uniform(c) => *c,
            Density::Samples(p) => p.gauss2[idx][k],
        }
    }
}

/// Which closed form to use on flat cells when the density is uniform.
#[derive(Clone, Copy, PartialEq)]
pub(crate) enum FlatForm {
    None,
    /// `∫ ∇E(x - (y', 0)) dy'`.
    Gradient,
    /// Third component of the above (the `y`-normal derivative on the plane).
    NormalY,
    /// Absolute value of [`FlatForm::NormalY`].
    AbsNormalY,
}

/// Tensor-product quadrature on the boundary lattice mapped through `h`.
#[derive(Clone, Debug)]
pub struct SurfaceQuadrature {
    hs: PerturbedHalfSpace,
    lattice: Lattice,
    opts: QuadratureOptions,
    nodes: Vec<Point>,
    area_elements: Vec<f64>,
    flat_cells: Vec<bool>,
    gauss: (Vec<f64>, Vec<f64>),
    gauss2: (Vec<f64>, Vec<f64>),
    /// Cells under the curved part of `Γ`.
    curved_cells: Vec<usize>,
    /// Per cell: 2×2 Gauss points and weights including `ω`.
    gauss2_points: Vec<[([f64; 2], f64); 4]>,
}

impl SurfaceQuadrature {
    pub fn new(hs: &PerturbedHalfSpace, opts: QuadratureOptions) -> Result<Self> {
        let lattice = Lattice::new(opts.half_extent, opts.cells)?;
        let r_h = hs.boundary().support_radius();
        if opts.half_extent < 4.0 * r_h {
            return Err(Error::invalid(format!(
                "quadrature extent {} must be at least 4 R_h = {}",
                opts.half_extent,
                4.0 * r_h
            )));
        }
        if !(opts.near_ratio > 0.0 && opts.mid_ratio >= opts.near_ratio) || opts.gauss_points == 0 {
            return Err(Error::invalid("quadrature ratios must satisfy 0 < near <= mid"));
        }
        let h = hs.boundary();
        let nodes = (0..lattice.len()).map(|i| hs.surface_point(lattice.node(i))).collect();
        let area_elements = (0..lattice.len()).map(|i| h.area_element(lattice.node(i))).collect();
        let dx = lattice.spacing();
        let flat_cells: Vec<bool> = (0..lattice.len())
            .map(|i| {
                let c = lattice.node(i);
                h.cell_is_flat([c[0] - 0.5 * dx, c[1] - 0.5 * dx], [c[0] + 0.5 * dx, c[1] + 0.5 * dx])
            })
            .collect();
        let (gx, gw) = gauss_legendre(2);
        let gauss2_points = (0..lattice.len())
            .map(|i| {
                let c = lattice.node(i);
                [(0, 0), (0, 1), (1, 0), (1, 1)].map(|(a, b)| {
                    let y = [c[0] + 0.5 * dx * gx[a], c[1] + 0.5 * dx * gx[b]];
                    (y, gw[a] * gw[b] * 0.25 * dx * dx * h.area_element(y))
                })
            })
            .collect();
        let curved_cells = (0..lattice.len()).filter(|&i| !flat_cells[i]).collect();
        Ok(Self {
            hs: hs.clone(),
            lattice,
            opts,
            nodes,
            area_elements,
            flat_cells,
            gauss: gauss_legendre(opts.gauss_points),
            gauss2: gauss_legendre(2),
            gauss2_points,
            curved_cells,
        })
    }

    /// Boundary lattice with the cell centres on given box columns.
    pub fn on_lattice(hs: &PerturbedHalfSpace, lattice: Lattice, opts: QuadratureOptions) -> Result<Self> {
        Self::new(hs, QuadratureOptions { half_extent: lattice.half_extent, cells: lattice.cells, ..opts })
    }

    pub fn half_space(&self) -> &PerturbedHalfSpace {
        &self.hs
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn options(&self) -> &QuadratureOptions {
        &self.opts
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    /// Surface weights `ω(y')Δ²`.
    pub fn weights(&self) -> Vec<f64> {
        let a = self.lattice.cell_area();
        self.area_elements.iter().map(|w| w * a).collect()
    }

    /// Width of the smallest subcell.
    pub fn finest_cell(&self) -> f64 {
        self.lattice.spacing() / 3f64.powi(self.opts.max_depth as i32)
    }

    /// Closest admissible distance between an off-surface target and `Γ`.
    pub fn delta_min(&self) -> f64 {
        1.5 * self.finest_cell()
    }

    /// Lower bound of `|d(x)|`, refined by a projection only when needed.
    pub fn check_target(&self, x: Point) -> Result<()> {
        let h = self.hs.boundary();
        let limit = self.delta_min();
        let lip = (1.0 + h.sup_grad() * h.sup_grad()).sqrt();
        let vertical = (x[2] - h.eval([x[0], x[1]])).abs();
        if vertical / lip >= limit {
            return Ok(());
        }
        let d = self.hs.nearest_point(x)?.distance.abs();
        if d < limit {
            return Err(Error::TooCloseToSurface { distance: d, limit });
        }
        Ok(())
    }

    /// `Λ_δ = H²({(y', h(y')) : |y'| < δ})`, with boundary cells resolved by
    /// 32×32 subsampling.
    pub fn surface_area(&self, delta: f64) -> f64 {
        let dx = self.lattice.spacing();
        let h = self.hs.boundary();
        let half_diag = dx / 2f64.sqrt();
        let mut total = 0.0;
        for i in 0..self.lattice.len() {
            let c = self.lattice.node(i);
            let r = c[0].hypot(c[1]);
            if r + half_diag <= delta {
                total += self.area_elements[i] * dx * dx;
            } else if r - half_diag < delta {
                let m = 32;
                let s = dx / m as f64;
                for a in 0..m {
                    for b in 0..m {
                        let y = [c[0] - 0.5 * dx + (a as f64 + 0.5) * s, c[1] - 0.5 * dx + (b as f64 + 0.5) * s];
                        if y[0].hypot(y[1]) < delta {
                            total += h.area_element(y) * s * s;
                        }
                    }
                }
            }
        }
        total
    }

    /// `∫_Γ k(y) g(y) dH²(y)` for a target `x`, where `kernel(y', ω)` already
    /// includes everything but the density and the area element.
    ///
    /// `foot`: for targets on `Γ`, the footpoint whose cell receives the
    /// weakly singular self-integral `self_leaf`. `skip(lo, hi)` drops cells
    /// on which the kernel vanishes identically; `curved_only` restricts the
    /// sweep to cells under the curved part of `Γ`.
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn integrate<K, S, Q>(
        &self,
        x: Point,
        density: Density,
        kernel: &K,
        flat: FlatForm,
        foot: Option<[f64; 2]>,
        self_leaf: &S,
        skip: &Q,
        curved_only: bool,
    ) -> [f64; 3]
    where
        K: Fn([f64; 2]) -> [f64; 3],
        S: Fn([f64; 2], [f64; 2]) -> [f64; 3],
        Q: Fn([f64; 2], [f64; 2]) -> bool,
    {
        let dx = self.lattice.spacing();
        let uniform = matches!(density, Density::Uniform(_));
        let analytic = uniform && flat != FlatForm::None && x[2] != 0.0;
        let mut acc = [0.0; 3];
        let all: Box<dyn Iterator<Item = usize>> =
            if curved_only { Box::new(self.curved_cells.iter().copied()) } else { Box::new(0..self.lattice.len()) };
        for idx in all {
            let c = self.lattice.node(idx);
            let lo = [c[0] - 0.5 * dx, c[1] - 0.5 * dx];
            let hi = [c[0] + 0.5 * dx, c[1] + 0.5 * dx];
            if skip(lo, hi) {
                continue;
            }
            if analytic && self.flat_cells[idx] {
                let v = flat_rectangle(x, lo, hi, flat);
                add(&mut acc, v, density.at(c));
                continue;
            }
            let yc = self.nodes[idx];
            let ratio = crate::vec3::dist(x, yc) / (dx * self.area_elements[idx]);
            if ratio >= self.opts.mid_ratio && foot.is_none_or(|f| !contains(lo, hi, f)) {
                for (k, (y, w)) in self.gauss2_points[idx].iter().enumerate() {
                    let g = density.at_gauss2(idx, k);
                    if g != 0.0 {
                        add(&mut acc, kernel(*y), w * g);
                    }
                }
                continue;
            }
            self.refine(x, density, kernel, foot, self_leaf, skip, lo, dx, 0, &mut acc);
        }
        if self.opts.flat_tail && uniform && flat != FlatForm::None && x[2] != 0.0 {
            let l = self.lattice.half_extent;
            let square = flat_rectangle(x, [-l, -l], [l, l], flat);
            let whole = whole_plane(x, flat);
            let tail = [whole[0] - square[0], whole[1] - square[1], whole[2] - square[2]];
            add(&mut acc, tail, density.at([0.0, 0.0]));
        }
        acc
    }

    #[allow(clippy::too_many_arguments)]
    fn refine<K, S, Q>(
        &self,
        x: Point,
        density: Density,
        kernel: &K,
        foot: Option<[f64; 2]>,
        self_leaf: &S,
        skip: &Q,
        lo: [f64; 2],
        size: f64,
        depth: usize,
        acc: &mut [f64; 3],
    ) where
        K: Fn([f64; 2]) -> [f64; 3],
        S: Fn([f64; 2], [f64; 2]) -> [f64; 3],
        Q: Fn([f64; 2], [f64; 2]) -> bool,
    {
        let hi = [lo[0] + size, lo[1] + size];
        if depth > 0 && skip(lo, hi) {
            return;
        }
        let h = self.hs.boundary();
        let c = [lo[0] + 0.5 * size, lo[1] + 0.5 * size];
        let holds_foot = foot.is_some_and(|f| contains(lo, hi, f));
        if holds_foot && depth == self.opts.max_depth {
            let v = self_leaf(lo, hi);
            add(acc, v, 1.0);
            return;
        }
        let yc = self.hs.surface_point(c);
        let ratio = crate::vec3::dist(x, yc) / (size * h.area_element(c));
        if holds_foot || (ratio < self.opts.near_ratio && depth < self.opts.max_depth) {
            let s = size / 3.0;
            for a in 0..3 {
                for b in 0..3 {
                    let sub = [lo[0] + a as f64 * s, lo[1] + b as f64 * s];
                    self.refine(x, density, kernel, foot, self_leaf, skip, sub, s, depth + 1, acc);
                }
            }
            return;
        }
        let (gx, gw) = if ratio < self.opts.mid_ratio { &self.gauss } else { &self.gauss2 };
        let half = 0.5 * size;
        for (xa, wa) in gx.iter().zip(gw) {
            for (xb, wb) in gx.iter().zip(gw) {
                let y = [c[0] + half * xa, c[1] + half * xb];
                let w = wa * wb * half * half * h.area_element(y) * density.at(y);
                if w != 0.0 {
                    add(acc, kernel(y), w);
                }
            }
        }
    }
}

#[inline]
fn add(acc: &mut [f64; 3], v: [f64; 3], w: f64) {
    acc[0] += w * v[0];
    acc[1] += w * v[1];
    acc[2] += w * v[2];
}

#[inline]
fn contains(lo: [f64; 2], hi: [f64; 2], p: [f64; 2]) -> bool {
    p[0] >= lo[0] && p[0] < hi[0] && p[1] >= lo[1] && p[1] < hi[1]
}

/// `ln(v + R)` without cancellation for `v < 0`.
#[inline]
fn log_v_plus_r(v: f64, r: f64, rest2: f64) -> f64 {
    if v >= 0.0 {
        (v + r).ln()
    } else {
        (rest2 / (r - v)).ln()
    }
}

/// Exact `∫_{[lo,hi]} ∇E(x - (y', 0)) dy'`, or its normal part.
pub(crate) fn flat_rectangle(x: Point, lo: [f64; 2], hi: [f64; 2], form: FlatForm) -> [f64; 3] {
    let c = x[2];
    let mut out = [0.0; 3];
    for (ui, sx) in [(hi[0] - x[0], 1.0), (lo[0] - x[0], -1.0)] {
        for (vi, sy) in [(hi[1] - x[1], 1.0), (lo[1] - x[1], -1.0)] {
            let s = sx * sy;
            let r = (ui * ui + vi * vi + c * c).sqrt();
            out[2] -= s * (ui * vi / (c * r)).atan();
            if form == FlatForm::Gradient {
                out[0] -= s * log_v_plus_r(vi, r, ui * ui + c * c);
                out[1] -= s * log_v_plus_r(ui, r, vi * vi + c * c);
            }
        }
    }
    let mut v = [out[0] * INV_4PI, out[1] * INV_4PI, out[2] * INV_4PI];
    if form == FlatForm::AbsNormalY {
        v[2] = v[2].abs();
    }
    if form != FlatForm::Gradient {
        v[0] = 0.0;
        v[1] = 0.0;
    }
    v
}

/// `∫_{R²} ∇E(x - (y', 0)) dy' = (0, 0, -sgn(x_3)/2)`.
fn whole_plane(x: Point, form: FlatForm) -> [f64; 3] {
    let z = -0.5 * x[2].signum();
    [0.0, 0.0, if form == FlatForm::AbsNormalY { z.abs() } else { z }]
}
