use serde::{Deserialize, Serialize};

use super::halfspace::PerturbedHalfSpace;
use super::Point;
use crate::error::{Error, Result};

/// Uniform node grid on `[lower, upper]` (both ends included), row-major with
/// the last axis fastest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxGrid {
    pub lower: Point,
    pub upper: Point,
    pub resolution: [usize; 3],
}

impl BoxGrid {
    pub fn new(lower: Point, upper: Point, resolution: [usize; 3]) -> Result<Self> {
        for a in 0..3 {
            if resolution[a] < 2 {
                return Err(Error::invalid("grid resolution must be at least 2 per axis"));
            }
            if !(upper[a] > lower[a]) || !lower[a].is_finite() || !upper[a].is_finite() {
                return Err(Error::invalid("grid upper corner must exceed the lower corner"));
            }
        }
        Ok(Self { lower, upper, resolution })
    }

    /// Cube-like grid `[-half,half]² × [z_lo, z_hi]` with `m` nodes per axis.
    pub fn centred(half: f64, z_lo: f64, z_hi: f64, m: usize) -> Result<Self> {
        Self::new([-half, -half, z_lo], [half, half, z_hi], [m, m, m])
    }

    pub fn spacing(&self) -> [f64; 3] {
        let mut h = [0.0; 3];
        for a in 0..3 {
            h[a] = (self.upper[a] - self.lower[a]) / (self.resolution[a] - 1) as f64;
        }
        h
    }

    pub fn cell_volume(&self) -> f64 {
        let h = self.spacing();
        h[0] * h[1] * h[2]
    }

    pub fn len(&self) -> usize {
        self.resolution.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.resolution[1] + j) * self.resolution[2] + k
    }

    pub fn multi_index(&self, idx: usize) -> [usize; 3] {
        let k = idx % self.resolution[2];
        let r = idx / self.resolution[2];
        [r / self.resolution[1], r % self.resolution[1], k]
    }

    pub fn coord(&self, axis: usize, i: usize) -> f64 {
        self.lower[axis] + self.spacing()[axis] * i as f64
    }

    pub fn point(&self, idx: usize) -> Point {
        let [i, j, k] = self.multi_index(idx);
        let h = self.spacing();
        [self.lower[0] + h[0] * i as f64, self.lower[1] + h[1] * j as f64, self.lower[2] + h[2] * k as f64]
    }

    /// Number of nodes between `idx` and the nearest face of the box.
    pub fn depth(&self, idx: usize) -> usize {
        let m = self.multi_index(idx);
        (0..3).map(|a| m[a].min(self.resolution[a] - 1 - m[a])).min().unwrap()
    }

    /// Trapezoid weight of a node (halved once per face it sits on).
    pub fn trapezoid_weight(&self, idx: usize) -> f64 {
        let m = self.multi_index(idx);
        let mut w = self.cell_volume();
        for a in 0..3 {
            if m[a] == 0 || m[a] == self.resolution[a] - 1 {
                w *= 0.5;
            }
        }
        w
    }
}

/// Samples of a scalar (`1`) or vector (`3`) field on a [`BoxGrid`], with the
/// membership mask `x_3 > h(x')`.
#[derive(Clone, Debug, PartialEq)]
pub struct BoxField {
    grid: BoxGrid,
    data: Vec<Vec<f64>>,
    mask: Vec<bool>,
}

impl BoxField {
    pub fn new(grid: BoxGrid, data: Vec<Vec<f64>>, mask: Vec<bool>) -> Result<Self> {
        if data.len() != 1 && data.len() != 3 {
            return Err(Error::invalid("a field has one or three components"));
        }
        let n = grid.len();
        if mask.len() != n || data.iter().any(|c| c.len() != n) {
            return Err(Error::invalid(format!("field arrays must hold {n} samples")));
        }
        Ok(Self { grid, data, mask })
    }

    pub fn membership(hs: &PerturbedHalfSpace, grid: &BoxGrid) -> Vec<bool> {
        (0..grid.len()).map(|i| hs.contains(grid.point(i))).collect()
    }

    pub fn zeros(hs: &PerturbedHalfSpace, grid: BoxGrid, components: usize) -> Self {
        let mask = Self::membership(hs, &grid);
        let n = grid.len();
        Self { grid, data: vec![vec![0.0; n]; components], mask }
    }

    /// Samples `f` at every node inside `Ω`; nodes outside hold zero.
    pub fn from_fn<F>(hs: &PerturbedHalfSpace, grid: BoxGrid, components: usize, f: F) -> Self
    where
        F: Fn(Point) -> Vec<f64> + Sync,
    {
        use rayon::prelude::*;
        let mask = Self::membership(hs, &grid);
        let values: Vec<Vec<f64>> = (0..grid.len())
            .into_par_iter()
            .map(|i| if mask[i] { f(grid.point(i)) } else { vec![0.0; components] })
            .collect();
        let mut data = vec![vec![0.0; grid.len()]; components];
        for (i, v) in values.into_iter().enumerate() {
            for c in 0..components {
                data[c][i] = v[c];
            }
        }
        Self { grid, data, mask }
    }

    /// Same grid and mask, new component arrays.
    pub fn with_data(&self, data: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(self.grid.clone(), data, self.mask.clone())
    }

    pub fn grid(&self) -> &BoxGrid {
        &self.grid
    }

    pub fn components(&self) -> usize {
        self.data.len()
    }

    pub fn component(&self, c: usize) -> &[f64] {
        &self.data[c]
    }

    pub fn component_mut(&mut self, c: usize) -> &mut [f64] {
        &mut self.data[c]
    }

    pub fn data(&self) -> &[Vec<f64>] {
        &self.data
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn vector(&self, idx: usize) -> Point {
        [self.data[0][idx], self.data[1][idx], self.data[2][idx]]
    }

    pub fn set_vector(&mut self, idx: usize, v: Point) {
        for c in 0..3 {
            self.data[c][idx] = v[c];
        }
    }

    /// `self + a·other`, sample by sample.
    pub fn axpy(&self, a: f64, other: &BoxField) -> Result<Self> {
        if other.grid != self.grid || other.components() != self.components() {
            return Err(Error::invalid("fields live on different grids"));
        }
        let data =
            self.data.iter().zip(&other.data).map(|(x, y)| x.iter().zip(y).map(|(p, q)| p + a * q).collect()).collect();
        self.with_data(data)
    }

    pub fn scaled(&self, a: f64) -> Self {
        let data = self.data.iter().map(|c| c.iter().map(|v| a * v).collect()).collect();
        Self { grid: self.grid.clone(), data, mask: self.mask.clone() }
    }

    /// Pointwise Euclidean magnitude.
    pub fn magnitude(&self, idx: usize) -> f64 {
        self.data.iter().map(|c| c[idx] * c[idx]).sum::<f64>().sqrt()
    }

    /// `sup |f|` over nodes inside `Ω`.
    pub fn linf(&self) -> f64 {
        (0..self.grid.len()).filter(|&i| self.mask[i]).map(|i| self.magnitude(i)).fold(0.0, f64::max)
    }

    /// `‖f‖_{L²(Ω ∩ box)}` by the trapezoid rule on masked nodes.
    pub fn l2(&self) -> f64 {
        self.l2_where(|_| true)
    }

    /// `L²` norm restricted to masked nodes that satisfy `keep`.
    pub fn l2_where<F: Fn(usize) -> bool>(&self, keep: F) -> f64 {
        let mut sum = 0.0;
        for i in 0..self.grid.len() {
            if self.mask[i] && keep(i) {
                let m = self.magnitude(i);
                sum += self.grid.trapezoid_weight(i) * m * m;
            }
        }
        sum.sqrt()
    }

    /// Largest magnitude on the outer face layer of the box (inside `Ω`).
    pub fn ring_max(&self) -> f64 {
        (0..self.grid.len())
            .filter(|&i| self.mask[i] && self.grid.depth(i) == 0 && !self.is_bottom_face(i))
            .map(|i| self.magnitude(i))
            .fold(0.0, f64::max)
    }

    fn is_bottom_face(&self, idx: usize) -> bool {
        // The bottom face lies outside Ω whenever the box straddles Γ.
        self.grid.multi_index(idx)[2] == 0 && self.grid.lower[2] < 0.0
    }

    /// Fails with [`Error::NonDecayingInput`] unless the field is negligible
    /// on the faces of the box.
    pub fn check_decay(&self, relative: f64) -> Result<()> {
        let peak = self.linf();
        let ring = self.ring_max();
        if ring > relative * peak {
            return Err(Error::NonDecayingInput { ring, peak });
        }
        Ok(())
    }

    /// Lagrange interpolation in `x₃` along column `(i, j)` through `points`
    /// consecutive nodes of `Ω`, centred on `z` where possible. Below the
    /// lowest node of `Ω` this extrapolates from the lowest `points` nodes.
    /// `None` when the column holds fewer than `points` nodes of `Ω`.
    pub fn column_value(&self, i: usize, j: usize, z: f64, points: usize) -> Option<Vec<f64>> {
        let nz = self.grid.resolution[2];
        let col = |k: usize| self.grid.index(i, j, k);
        let first = (0..nz).find(|&k| self.mask[col(k)])?;
        if points == 0 || nz - first < points {
            return None;
        }
        let t = (z - self.grid.lower[2]) / self.grid.spacing()[2];
        let centred = t.floor() as isize - (points as isize - 1) / 2;
        let start = centred.clamp(first as isize, (nz - points) as isize) as usize;
        let x = t - start as f64;
        let mut out = vec![0.0; self.components()];
        for m in 0..points {
            let mut w = 1.0;
            for l in 0..points {
                if l != m {
                    w *= (x - l as f64) / (m as f64 - l as f64);
                }
            }
            for (c, o) in out.iter_mut().enumerate() {
                *o += w * self.data[c][col(start + m)];
            }
        }
        Some(out)
    }

    /// Trilinear interpolation using only nodes inside `Ω`, renormalised by
    /// the weight they carry. `None` outside the box or when no corner of the
    /// enclosing cell is inside `Ω`.
    pub fn interpolate(&self, x: Point) -> Option<Vec<f64>> {
        let h = self.grid.spacing();
        let mut base = [0usize; 3];
        let mut frac = [0.0; 3];
        for a in 0..3 {
            let t = (x[a] - self.grid.lower[a]) / h[a];
            let last = (self.grid.resolution[a] - 1) as f64;
            if !(t >= 0.0 && t <= last) {
                return None;
            }
            let i = (t.floor() as usize).min(self.grid.resolution[a] - 2);
            base[a] = i;
            frac[a] = t - i as f64;
        }
        let mut out = vec![0.0; self.components()];
        let mut wsum = 0.0;
        let mut fallback = vec![0.0; self.components()];
        let mut count = 0usize;
        for corner in 0..8 {
            let off = [corner >> 2 & 1, corner >> 1 & 1, corner & 1];
            let idx = self.grid.index(base[0] + off[0], base[1] + off[1], base[2] + off[2]);
            if !self.mask[idx] {
                continue;
            }
            let mut w = 1.0;
            for a in 0..3 {
                w *= if off[a] == 1 { frac[a] } else { 1.0 - frac[a] };
            }
            count += 1;
            for (c, f) in fallback.iter_mut().enumerate() {
                *f += self.data[c][idx];
            }
            wsum += w;
            for (c, o) in out.iter_mut().enumerate() {
                *o += w * self.data[c][idx];
            }
        }
        if count == 0 {
            return None;
        }
        if wsum < 1e-12 {
            // Only corners of vanishing weight are inside: the point sits on
            // the boundary of the masked region.
            fallback.iter_mut().for_each(|f| *f /= count as f64);
            return Some(fallback);
        }
        out.iter_mut().for_each(|o| *o /= wsum);
        Some(out)
    }
}
