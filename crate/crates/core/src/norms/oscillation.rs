use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{BoxField, BoxGrid, GraphFunction, PerturbedHalfSpace, Point};
use crate::vec3;

/// Rejection attempts allowed per requested sample before giving up.
const ATTEMPTS_PER_SAMPLE: usize = 50;

/// Nodes of `grid` near the ball `B_r(x)` with anti-aliased membership
/// weights in `(0, 1]` (linear ramp one cell wide across the sphere).
pub(crate) fn ball_nodes(grid: &BoxGrid, x: Point, r: f64) -> Vec<(usize, f64)> {
    let h = grid.spacing();
    let ramp = grid.cell_volume().cbrt();
    let reach = r + 0.5 * ramp;
    let mut lo = [0usize; 3];
    let mut hi = [0usize; 3];
    for a in 0..3 {
        let top = grid.resolution[a] as f64 - 1.0;
        lo[a] = ((x[a] - reach - grid.lower[a]) / h[a]).ceil().clamp(0.0, top) as usize;
        hi[a] = ((x[a] + reach - grid.lower[a]) / h[a]).floor().clamp(0.0, top) as usize;
    }
    let mut out = Vec::new();
    for i in lo[0]..=hi[0] {
        for j in lo[1]..=hi[1] {
            for k in lo[2]..=hi[2] {
                let idx = grid.index(i, j, k);
                let w = ((r - vec3::dist(grid.point(idx), x)) / ramp + 0.5).min(1.0);
                if w > 0.0 {
                    out.push((idx, w));
                }
            }
        }
    }
    out
}

/// Mean oscillation `|B|^{-1} ∫_B |f - f_B|` over weighted ball nodes
/// (nodes outside `Ω` are ignored).
pub fn mean_oscillation(v: &BoxField, nodes: &[(usize, f64)]) -> f64 {
    let nodes: Vec<(usize, f64)> = nodes.iter().copied().filter(|&(i, _)| v.mask()[i]).collect();
    let total: f64 = nodes.iter().map(|(_, w)| w).sum();
    if total == 0.0 {
        return 0.0;
    }
    let nc = v.components();
    let mut mean = vec![0.0; nc];
    for &(i, w) in &nodes {
        for (c, m) in mean.iter_mut().enumerate() {
            *m += w * v.component(c)[i];
        }
    }
    mean.iter_mut().for_each(|m| *m /= total);
    nodes
        .iter()
        .map(|&(i, w)| w * (0..nc).map(|c| (v.component(c)[i] - mean[c]).powi(2)).sum::<f64>().sqrt())
        .sum::<f64>()
        / total
}

fn smallest_radius(grid: &BoxGrid) -> f64 {
    2.0 * grid.spacing().iter().cloned().fold(0.0, f64::max)
}

/// Sampled lower bound for `[v]_{BMO^μ(Ω)}`: balls `B_r(x) ⊂ Ω ∩ box` with
/// `2Δ ≤ r < μ`. The draw sequence depends only on `seed`, so the estimate is
/// nondecreasing in `samples`.
pub fn bmo_seminorm(hs: &PerturbedHalfSpace, v: &BoxField, mu: f64, samples: usize, seed: u64) -> Result<f64> {
    let grid = v.grid();
    let r_min = smallest_radius(grid);
    if !(mu > r_min) {
        return Err(Error::NoAdmissibleBall);
    }
    let top = hs.boundary().sup_abs();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = 0.0f64;
    let mut found = 0;
    for _ in 0..samples * ATTEMPTS_PER_SAMPLE {
        if found == samples {
            break;
        }
        let r = rng.gen_range(r_min..mu);
        let mut x = [0.0; 3];
        let mut fits = true;
        for a in 0..3 {
            let (lo, hi) = (grid.lower[a] + r, grid.upper[a] - r);
            if lo >= hi {
                fits = false;
                x[a] = lo;
            } else {
                x[a] = rng.gen_range(lo..hi);
            }
        }
        if !fits {
            continue;
        }
        let inside = x[2] - r > top || hs.signed_distance(x) >= r;
        if !inside {
            continue;
        }
        found += 1;
        best = best.max(mean_oscillation(v, &ball_nodes(grid, x, r)));
    }
    if found == 0 {
        return Err(Error::NoAdmissibleBall);
    }
    Ok(best)
}

/// Sampled lower bound for `[f]_{b^ν(Γ)} = sup r^{-3} ∫_{Ω ∩ B_r(x)} |f|`
/// over `x ∈ Γ`, `2Δ ≤ r < ν`, balls inside the box.
pub fn bnu_seminorm(hs: &PerturbedHalfSpace, f: &BoxField, nu: f64, samples: usize, seed: u64) -> Result<f64> {
    let grid = f.grid();
    let r_min = smallest_radius(grid);
    if !(nu > r_min) {
        return Err(Error::NoAdmissibleBall);
    }
    let dv = grid.cell_volume();
    let ramp = dv.cbrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = 0.0f64;
    let mut found = 0;
    for _ in 0..samples * ATTEMPTS_PER_SAMPLE {
        if found == samples {
            break;
        }
        let r = rng.gen_range(r_min..nu);
        let (lo0, hi0) = (grid.lower[0] + r, grid.upper[0] - r);
        let (lo1, hi1) = (grid.lower[1] + r, grid.upper[1] - r);
        if lo0 >= hi0 || lo1 >= hi1 {
            continue;
        }
        let y = [rng.gen_range(lo0..hi0), rng.gen_range(lo1..hi1)];
        let x = [y[0], y[1], hs.boundary().eval(y)];
        // Ω ∩ B_r(x) must lie in the box; the part below Γ is irrelevant.
        let floor = (x[2] - r).max(-hs.boundary().sup_abs());
        if x[2] + r > grid.upper[2] || floor < grid.lower[2] {
            continue;
        }
        found += 1;
        let mass: f64 = ball_nodes(grid, x, r)
            .into_iter()
            .filter(|&(i, _)| f.mask()[i])
            .map(|(i, w)| w * f.magnitude(i) * dv)
            .sum();
        // The ramped indicator integrates to the volume of a ball of radius
        // `(r³ + r·ramp²/4)^{1/3}`; normalise by that radius.
        best = best.max(mass / (r.powi(3) + 0.25 * r * ramp * ramp));
    }
    if found == 0 {
        return Err(Error::NoAdmissibleBall);
    }
    Ok(best)
}

/// `∇d·v` on nodes within `width` of `Γ` (zero further away). `∇d = -n(πx)`
/// uses the nearest boundary point, which stays unique off the medial axis
/// even where `width` exceeds the reach.
pub fn normal_component(hs: &PerturbedHalfSpace, v: &BoxField, width: f64) -> Result<BoxField> {
    let grid = v.grid();
    let mut out = vec![0.0; grid.len()];
    let top = hs.boundary().sup_abs();
    for (i, o) in out.iter_mut().enumerate() {
        if !v.mask()[i] {
            continue;
        }
        let x = grid.point(i);
        if x[2] - top >= width {
            continue;
        }
        let p = hs.nearest_point(x)?;
        if p.distance < width {
            let n = hs.outward_normal(p.foot);
            *o = -vec3::dot(n, v.vector(i));
        }
    }
    v.with_data(vec![out])
}
