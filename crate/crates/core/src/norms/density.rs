use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{BoundaryFunction, GraphFunction, PerturbedHalfSpace};

/// Square lattice of `cells × cells` cells on `[-L, L]²`; samples sit at
/// cell centres `-L + (i + 1/2)Δ`, `Δ = 2L/cells`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lattice {
    pub half_extent: f64,
    pub cells: usize,
}

impl Lattice {
    pub fn new(half_extent: f64, cells: usize) -> Result<Self> {
        if !(half_extent > 0.0 && half_extent.is_finite()) || cells < 2 {
            return Err(Error::invalid("lattice needs L > 0 and at least 2 cells"));
        }
        Ok(Self { half_extent, cells })
    }

    /// The lattice whose cell centres are `first + iΔ`, symmetric about 0.
    pub fn from_nodes(first: f64, spacing: f64, cells: usize) -> Result<Self> {
        let l = -(first - 0.5 * spacing);
        let lat = Self::new(l, cells)?;
        if (lat.spacing() - spacing).abs() > 1e-12 * spacing {
            return Err(Error::invalid("nodes are not symmetric about the origin"));
        }
        Ok(lat)
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_extent / self.cells as f64
    }

    pub fn len(&self) -> usize {
        self.cells * self.cells
    }

    pub fn is_empty(&self) -> bool {
        self.cells == 0
    }

    pub fn coord(&self, i: usize) -> f64 {
        -self.half_extent + (i as f64 + 0.5) * self.spacing()
    }

    /// Node `(i, j)` at flat index `i·cells + j`.
    pub fn node(&self, idx: usize) -> [f64; 2] {
        [self.coord(idx / self.cells), self.coord(idx % self.cells)]
    }

    pub fn cell_area(&self) -> f64 {
        self.spacing() * self.spacing()
    }

    /// Cell containing `x'`, or `None` outside the lattice square.
    pub fn locate(&self, x: [f64; 2]) -> Option<(usize, usize)> {
        let h = self.spacing();
        let i = ((x[0] + self.half_extent) / h).floor();
        let j = ((x[1] + self.half_extent) / h).floor();
        let m = self.cells as f64;
        if i >= 0.0 && j >= 0.0 && i < m && j < m {
            Some((i as usize, j as usize))
        } else {
            None
        }
    }
}

/// Samples of a scalar function on a [`Lattice`], read either on the plane
/// `R²` or on `Γ` through `T_h: f ↦ f^h`, `f^h(y', h(y')) = f(y')`.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryDensity {
    lattice: Lattice,
    values: Vec<f64>,
    on_graph: bool,
}

impl BoundaryDensity {
    pub fn new(lattice: Lattice, values: Vec<f64>, on_graph: bool) -> Result<Self> {
        if values.len() != lattice.len() {
            return Err(Error::invalid(format!("density needs {} samples", lattice.len())));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("density samples must be finite"));
        }
        Ok(Self { lattice, values, on_graph })
    }

    pub fn zeros(lattice: Lattice) -> Self {
        Self { lattice, values: vec![0.0; lattice.len()], on_graph: false }
    }

    pub fn from_fn<F: Fn([f64; 2]) -> f64>(lattice: Lattice, f: F) -> Self {
        let values = (0..lattice.len()).map(|i| f(lattice.node(i))).collect();
        Self { lattice, values, on_graph: false }
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn is_on_graph(&self) -> bool {
        self.on_graph
    }

    /// `T_h`: the same samples, now read as a function on `Γ`.
    pub fn th_push(&self) -> Self {
        Self { on_graph: true, ..self.clone() }
    }

    /// `T_h^{-1}`.
    pub fn th_pull(&self) -> Self {
        Self { on_graph: false, ..self.clone() }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest magnitude on the outermost ring of nodes.
    pub fn ring_max(&self) -> f64 {
        let m = self.lattice.cells;
        (0..self.lattice.len())
            .filter(|&idx| {
                let (i, j) = (idx / m, idx % m);
                i == 0 || j == 0 || i == m - 1 || j == m - 1
            })
            .map(|idx| self.values[idx].abs())
            .fold(0.0, f64::max)
    }

    pub fn check_decay(&self, relative: f64) -> Result<()> {
        let peak = self.max_abs();
        let ring = self.ring_max();
        if ring > relative * peak {
            return Err(Error::NonDecayingInput { ring, peak });
        }
        Ok(())
    }

    /// `∫ f dy'` on the plane, or `∫_Γ f^h dH²` when read on the graph.
    pub fn integral(&self, h: &BoundaryFunction) -> f64 {
        let a = self.lattice.cell_area();
        self.values
            .iter()
            .enumerate()
            .map(|(i, v)| v * a * if self.on_graph { h.area_element(self.lattice.node(i)) } else { 1.0 })
            .sum()
    }

    /// `‖f‖_{L^p}` on the plane or on `Γ`.
    pub fn lp(&self, h: &BoundaryFunction, p: f64) -> f64 {
        let a = self.lattice.cell_area();
        let s: f64 = self
            .values
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let w = if self.on_graph { h.area_element(self.lattice.node(i)) } else { 1.0 };
                v.abs().powf(p) * a * w
            })
            .sum();
        s.powf(1.0 / p)
    }

    /// Pointwise linear combination `self + a·other`.
    pub fn axpy(&self, a: f64, other: &Self) -> Result<Self> {
        if self.lattice != other.lattice {
            return Err(Error::invalid("densities live on different lattices"));
        }
        let values = self.values.iter().zip(&other.values).map(|(x, y)| x + a * y).collect();
        Ok(Self { values, ..self.clone() })
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self { values: self.values.iter().map(|v| a * v).collect(), ..self.clone() }
    }

    /// Tensor quintic Lagrange interpolation on the 6×6 surrounding nodes, with
    /// zero samples beyond the lattice.
    pub fn interpolate(&self, x: [f64; 2]) -> f64 {
        let h = self.lattice.spacing();
        let m = self.lattice.cells as isize;
        let tx = (x[0] + self.lattice.half_extent) / h - 0.5;
        let ty = (x[1] + self.lattice.half_extent) / h - 0.5;
        if !(tx > -1.0 && ty > -1.0 && tx < m as f64 && ty < m as f64) {
            return 0.0;
        }
        let (ix, iy) = (tx.floor() as isize, ty.floor() as isize);
        let (fx, fy) = (tx - ix as f64, ty - iy as f64);
        let wx = lagrange6(fx);
        let wy = lagrange6(fy);
        let mut acc = 0.0;
        for (a, wa) in wx.iter().enumerate() {
            let i = ix - 2 + a as isize;
            if i < 0 || i >= m {
                continue;
            }
            for (b, wb) in wy.iter().enumerate() {
                let j = iy - 2 + b as isize;
                if j < 0 || j >= m {
                    continue;
                }
                acc += wa * wb * self.values[(i * m + j) as usize];
            }
        }
        acc
    }

    /// Samples lying under the flat part of `Γ` only.
    pub fn supported_in_flat_region(&self, hs: &PerturbedHalfSpace) -> bool {
        let r = hs.boundary().support_radius();
        self.values.iter().enumerate().all(|(i, v)| {
            let y = self.lattice.node(i);
            *v == 0.0 || y[0].hypot(y[1]) >= r
        })
    }
}

/// Lagrange weights for nodes at `-2..=3` evaluated at `t ∈ [0, 1)`.
fn lagrange6(t: f64) -> [f64; 6] {
    const DENOM: [f64; 6] = [-120.0, 24.0, -12.0, 12.0, -24.0, 120.0];
    let mut w = [0.0; 6];
    for (k, wk) in w.iter_mut().enumerate() {
        let mut p = 1.0;
        for j in 0..6 {
            if j != k {
                p *= t - (j as f64 - 2.0);
            }
        }
        *wk = p / DENOM[k];
    }
    w
}
