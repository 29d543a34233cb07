use num_complex::Complex64;
use rayon::prelude::*;

use super::density::{BoundaryDensity, Lattice};
use crate::error::{Error, Result};
use crate::fourier;
use crate::geometry::{BoundaryFunction, BoxField, BoxGrid, GraphFunction};

/// Zero padding applied before every boundary FFT.
pub const PAD_FACTOR: usize = 4;

/// Relative size of the boundary ring below which a density counts as decayed.
pub const DECAY_TOLERANCE: f64 = 1e-6;

/// `Σ'_{k ∈ Z²} |k|^{-1}` continued analytically, `= 4 ζ(1/2) β(1/2)`.
pub const LATTICE_ZETA_HALF: f64 = 4.0 * -1.460_354_508_809_586_8 * 0.667_691_457_189_609_1;

/// `∫_{[0,1]²} ∫_{[0,1]²} |x - y|^{-1} dx dy`.
pub const UNIT_SQUARE_SELF_ENERGY: f64 = 2.973_209_548_486_169;

/// Discrete transform of a density on a zero-padded square.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub size: usize,
    /// Frequency spacing `η = 2π/(PΔ)`.
    pub eta: f64,
    pub spacing: f64,
    /// `Δ² · DFT(f)`; equals `f̂(ξ_k)` up to a unit-modulus phase.
    pub values: Vec<Complex64>,
}

impl Spectrum {
    pub fn of(f: &BoundaryDensity) -> Self {
        let lat = f.lattice();
        let m = lat.cells;
        let p = fourier::padded_size(PAD_FACTOR * m);
        let mut buf = vec![Complex64::new(0.0, 0.0); p * p];
        for (idx, v) in f.values().iter().enumerate() {
            buf[(idx / m) * p + idx % m] = Complex64::new(*v, 0.0);
        }
        fourier::fft_nd(&mut buf, &[p, p], false);
        let a = lat.cell_area();
        buf.iter_mut().for_each(|z| *z *= a);
        Self {
            size: p,
            eta: 2.0 * std::f64::consts::PI / (p as f64 * lat.spacing()),
            spacing: lat.spacing(),
            values: buf,
        }
    }

    /// `(ξ_1, ξ_2)` of bin `idx`.
    pub fn frequency(&self, idx: usize) -> [f64; 2] {
        [
            fourier::angular_frequency(idx / self.size, self.size, self.spacing),
            fourier::angular_frequency(idx % self.size, self.size, self.spacing),
        ]
    }

    /// `∫ |ξ|^{2s} |f̂|² dξ` by the lattice sum; `s = -1/2` drops the zero
    /// bin and adds the leading Euler-Maclaurin correction `-η·Z·|f̂(0)|²`.
    pub fn weighted_energy(&self, s: f64) -> f64 {
        let cell = self.eta * self.eta;
        let sum: f64 = self
            .values
            .iter()
            .enumerate()
            .map(|(idx, z)| {
                let xi = self.frequency(idx);
                let r = xi[0].hypot(xi[1]);
                if r == 0.0 {
                    if s == 0.0 {
                        z.norm_sqr()
                    } else {
                        0.0
                    }
                } else {
                    r.powf(2.0 * s) * z.norm_sqr()
                }
            })
            .sum();
        let mut total = cell * sum;
        if s == -0.5 {
            total -= self.eta * LATTICE_ZETA_HALF * self.values[0].norm_sqr();
        }
        total
    }
}

fn check_order(s: f64) -> Result<()> {
    if s == -0.5 || s >= 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("Sobolev order {s} not supported (use -1/2 or s >= 0)")))
    }
}

/// `‖f‖_{Ḣ^s(R²)} = (∫ |ξ'|^{2s} |f̂(ξ')|² dξ')^{1/2}` for densities that
/// vanish at the edge of their lattice.
pub fn hs_norm_fourier(f: &BoundaryDensity, s: f64) -> Result<f64> {
    check_order(s)?;
    if f.max_abs() == 0.0 {
        return Ok(0.0);
    }
    f.check_decay(DECAY_TOLERANCE)?;
    Ok(hs_norm_fourier_unchecked(f, s))
}

/// [`hs_norm_fourier`] without the decay precondition, for operator-norm
/// probes whose outputs decay only algebraically.
pub fn hs_norm_fourier_unchecked(f: &BoundaryDensity, s: f64) -> f64 {
    Spectrum::of(f).weighted_energy(s).max(0.0).sqrt()
}

/// `∫ f g` on the plane.
pub fn pairing(f: &BoundaryDensity, g: &BoundaryDensity) -> f64 {
    let a = f.lattice().cell_area();
    f.values().iter().zip(g.values()).map(|(x, y)| x * y * a).sum()
}

/// `∫_{[a,∞)×[b,∞)} |z|^{-3} dz`.
fn quadrant(a: f64, b: f64) -> f64 {
    1.0 / a + 1.0 / b - a.hypot(b) / (a * b)
}

/// `∫_{R² \ [-L,L]²} |x - z|^{-3} dz` for `x` inside the square.
fn exterior_weight(lat: &Lattice, x: [f64; 2]) -> f64 {
    let l = lat.half_extent;
    let (a1, a2, b1, b2) = (l - x[0], l + x[0], l - x[1], l + x[1]);
    2.0 * (1.0 / a1 + 1.0 / a2 + 1.0 / b1 + 1.0 / b2)
        - quadrant(a1, b1)
        - quadrant(a1, b2)
        - quadrant(a2, b1)
        - quadrant(a2, b2)
}

/// Gagliardo seminorm `[f] = (∫∫ |f(x) - f(y)|² / |x - y|³)^{1/2}`, on the
/// plane or, for densities pushed to `Γ`, with surface measure and ambient
/// distances. The self-cell uses `|∇f|²|x - y|^{-1}/2` integrated exactly.
pub fn gagliardo_half(f: &BoundaryDensity, h: &BoundaryFunction) -> f64 {
    let lat = *f.lattice();
    let m = lat.cells;
    let n = lat.len();
    let dx = lat.spacing();
    let area = lat.cell_area();
    let on_graph = f.is_on_graph();
    let vals = f.values();
    let pts: Vec<[f64; 3]> = (0..n)
        .map(|i| {
            let y = lat.node(i);
            [y[0], y[1], if on_graph { h.eval(y) } else { 0.0 }]
        })
        .collect();
    let weights: Vec<f64> = (0..n).map(|i| area * if on_graph { h.area_element(lat.node(i)) } else { 1.0 }).collect();

    let pairs: f64 = (0..n)
        .into_par_iter()
        .map(|i| {
            let (p, fi) = (pts[i], vals[i]);
            let mut acc = 0.0;
            for j in i + 1..n {
                let df = fi - vals[j];
                if df == 0.0 {
                    continue;
                }
                let q = pts[j];
                let r2 = (p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2) + (p[2] - q[2]).powi(2);
                acc += weights[j] * df * df / (r2 * r2.sqrt());
            }
            2.0 * weights[i] * acc
        })
        .sum();

    let value = |i: isize, j: isize| -> f64 {
        if i < 0 || j < 0 || i >= m as isize || j >= m as isize {
            0.0
        } else {
            vals[i as usize * m + j as usize]
        }
    };
    let local: f64 = (0..n)
        .map(|idx| {
            let (i, j) = ((idx / m) as isize, (idx % m) as isize);
            let gx = (value(i + 1, j) - value(i - 1, j)) / (2.0 * dx);
            let gy = (value(i, j + 1) - value(i, j - 1)) / (2.0 * dx);
            let w = weights[idx] / area;
            let diag = 0.5 * (gx * gx + gy * gy) * UNIT_SQUARE_SELF_ENERGY * dx.powi(3) * w * w;
            let outside = 2.0 * weights[idx] * vals[idx] * vals[idx] * exterior_weight(&lat, lat.node(idx));
            diag + outside
        })
        .sum();
    (pairs + local).sqrt()
}

/// Harmonic extension `u_f(x', x_3) = F^{-1}[e^{-|x_3||ξ'|} f̂]` to both
/// half spaces, evaluated plane by plane with the padded boundary FFT.
#[derive(Clone, Debug)]
pub struct HarmonicLift {
    lattice: Lattice,
    spectrum: Spectrum,
}

impl HarmonicLift {
    pub fn new(f: &BoundaryDensity) -> Result<Self> {
        if f.max_abs() > 0.0 {
            f.check_decay(DECAY_TOLERANCE)?;
        }
        Ok(Self { lattice: *f.lattice(), spectrum: Spectrum::of(&f.th_pull()) })
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    fn plane(&self, multiplier: impl Fn([f64; 2], f64) -> Complex64) -> Vec<f64> {
        let sp = &self.spectrum;
        let p = sp.size;
        let mut buf: Vec<Complex64> = sp
            .values
            .iter()
            .enumerate()
            .map(|(idx, z)| {
                let xi = sp.frequency(idx);
                z * multiplier(xi, xi[0].hypot(xi[1]))
            })
            .collect();
        fourier::fft_nd(&mut buf, &[p, p], true);
        let inv_area = 1.0 / self.lattice.cell_area();
        let m = self.lattice.cells;
        (0..self.lattice.len()).map(|idx| buf[(idx / m) * p + idx % m].re * inv_area).collect()
    }

    /// `u_f(·, t)` on the lattice.
    pub fn value(&self, t: f64) -> BoundaryDensity {
        let vals = self.plane(|_, r| Complex64::new((-t.abs() * r).exp(), 0.0));
        BoundaryDensity::new(self.lattice, vals, false).expect("finite lift")
    }

    /// `∇u_f(·, t)` on the lattice (for `t ≠ 0`).
    pub fn gradient(&self, t: f64) -> [Vec<f64>; 3] {
        let damp = |r: f64| (-t.abs() * r).exp();
        [
            self.plane(|xi, r| Complex64::new(0.0, xi[0] * damp(r))),
            self.plane(|xi, r| Complex64::new(0.0, xi[1] * damp(r))),
            self.plane(|_, r| Complex64::new(-t.signum() * r * damp(r), 0.0)),
        ]
    }

    /// `‖∇u_f‖²_{L²(R³)}` by quadrature over horizontal planes: Gauss-Legendre
    /// in `τ ∈ (0, 1)` with `t = c τ/(1-τ)` on each half space.
    pub fn dirichlet_energy(&self, nodes: usize) -> f64 {
        let (x, w) = gauss_legendre(nodes);
        let c = 1.0 / self.spectrum.eta.sqrt();
        let area = self.lattice.cell_area();
        let mut total = 0.0;
        for (xi, wi) in x.iter().zip(&w) {
            let tau = 0.5 * (xi + 1.0);
            let t = c * tau / (1.0 - tau);
            let jac = 0.5 * c / (1.0 - tau).powi(2);
            let g = self.gradient_periodic_energy(t);
            total += 2.0 * wi * jac * g * area;
        }
        total
    }

    /// `Σ |∇u(·, t)|²` over the padded periodic plane (the lattice window
    /// alone would truncate the spreading field at large heights).
    fn gradient_periodic_energy(&self, t: f64) -> f64 {
        let sp = &self.spectrum;
        let p = sp.size;
        let mut comps = [vec![], vec![], vec![]];
        for (c, comp) in comps.iter_mut().enumerate() {
            let mut buf: Vec<Complex64> = sp
                .values
                .iter()
                .enumerate()
                .map(|(idx, z)| {
                    let xi = sp.frequency(idx);
                    let r = xi[0].hypot(xi[1]);
                    let d = (-t * r).exp();
                    z * match c {
                        0 => Complex64::new(0.0, xi[0] * d),
                        1 => Complex64::new(0.0, xi[1] * d),
                        _ => Complex64::new(-r * d, 0.0),
                    }
                })
                .collect();
            fourier::fft_nd(&mut buf, &[p, p], true);
            *comp = buf.iter().map(|z| z.re / sp.spacing.powi(2)).collect();
        }
        (0..p * p).map(|i| comps.iter().map(|c| c[i] * c[i]).sum::<f64>()).sum()
    }

    /// Samples `u_f` onto a box grid whose horizontal nodes coincide with the
    /// lattice nodes.
    pub fn to_box(&self, grid: &BoxGrid) -> Result<BoxField> {
        let lat = self.lattice;
        let h = grid.spacing();
        let aligned = grid.resolution[0] == lat.cells
            && grid.resolution[1] == lat.cells
            && (grid.lower[0] - lat.coord(0)).abs() < 1e-9 * h[0]
            && (grid.lower[1] - lat.coord(0)).abs() < 1e-9 * h[1]
            && (h[0] - lat.spacing()).abs() < 1e-9 * h[0]
            && (h[1] - lat.spacing()).abs() < 1e-9 * h[1];
        if !aligned {
            return Err(Error::invalid("box columns must coincide with the lattice nodes"));
        }
        let nz = grid.resolution[2];
        let mut data = vec![0.0; grid.len()];
        for k in 0..nz {
            let plane = self.value(grid.coord(2, k));
            for (idx, v) in plane.values().iter().enumerate() {
                data[grid.index(idx / lat.cells, idx % lat.cells, k)] = *v;
            }
        }
        BoxField::new(grid.clone(), vec![data], vec![true; grid.len()])
    }
}

/// Harmonic lifting of a boundary density.
pub fn lift_harmonic(f: &BoundaryDensity) -> Result<HarmonicLift> {
    HarmonicLift::new(f)
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let (pn, pn1) = if n == 1 { (z, 1.0) } else { (p1, p0) };
            let dp = n as f64 * (z * pn - pn1) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                let (mut q0, mut q1) = (1.0, z);
                for k in 2..=n {
                    let q2 = ((2 * k - 1) as f64 * z * q1 - (k - 1) as f64 * q0) / k as f64;
                    q0 = q1;
                    q1 = q2;
                }
                let (qn, qn1) = if n == 1 { (z, 1.0) } else { (q1, q0) };
                let d = n as f64 * (z * qn - qn1) / (z * z - 1.0);
                w[i] = 2.0 / ((1.0 - z * z) * d * d);
                break;
            }
        }
        x[i] = z;
    }
    (x, w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn gaussian(l: f64, m: usize) -> BoundaryDensity {
        BoundaryDensity::from_fn(Lattice::new(l, m).unwrap(), |x| (-(x[0] * x[0] + x[1] * x[1])).exp())
    }

    #[test]
    fn plancherel_audit() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..5 {
            let lat = Lattice::new(4.0, 32).unwrap();
            let vals: Vec<f64> = (0..lat.len())
                .map(|i| {
                    let y = lat.node(i);
                    let r = (y[0].abs().max(y[1].abs()) - 3.5).max(0.0);
                    if r > 0.0 {
                        0.0
                    } else {
                        rng.gen_range(-1.0..1.0)
                    }
                })
                .collect();
            let f = BoundaryDensity::new(lat, vals, false).unwrap();
            let l2 = f.lp(&BoundaryFunction::zero(), 2.0).powi(2);
            let spec = Spectrum::of(&f).weighted_energy(0.0) / (2.0 * PI).powi(2);
            assert!((l2 - spec).abs() < 1e-6 * l2);
        }
    }

    #[test]
    fn gaussian_minus_half_matches_radial_oracle() {
        // ∫ |ξ|^{-1} |π e^{-|ξ|²/4}|² dξ by radial midpoint quadrature.
        let m = 200_000;
        let rmax = 20.0;
        let oracle: f64 = (0..m)
            .map(|i| {
                let r = (i as f64 + 0.5) * rmax / m as f64;
                2.0 * PI * PI * PI * (-r * r / 2.0).exp() * rmax / m as f64
            })
            .sum();
        assert!((oracle - 2.0 * PI.powi(3) * (PI / 2.0).sqrt()).abs() < 1e-8);
        let f = gaussian(6.0, 64);
        let v = hs_norm_fourier(&f, -0.5).unwrap();
        assert!((v * v - oracle).abs() < 1e-3 * oracle, "{} vs {}", v * v, oracle);
    }

    #[test]
    fn zero_and_dilation() {
        let lat = Lattice::new(6.0, 64).unwrap();
        assert_eq!(hs_norm_fourier(&BoundaryDensity::zeros(lat), 0.5).unwrap(), 0.0);
        let f = gaussian(6.0, 96);
        let f2 = BoundaryDensity::from_fn(*f.lattice(), |x| (-4.0 * (x[0] * x[0] + x[1] * x[1])).exp());
        let a = hs_norm_fourier(&f, 0.5).unwrap();
        let b = hs_norm_fourier(&f2, 0.5).unwrap();
        assert!((b / a - 0.5f64.sqrt()).abs() < 0.01 * 0.5f64.sqrt());
        assert!(hs_norm_fourier(&f, -0.25).is_err());
    }

    #[test]
    fn exterior_weight_of_far_point_matches_half_plane_limit() {
        // From the centre, exterior of [-L,L]² ≈ ∫_{|z|>L} |z|^{-3} = 2π/L,
        // bracketed between the disk of radius L and of radius L√2.
        let lat = Lattice::new(2.0, 8).unwrap();
        let w = exterior_weight(&lat, [0.0, 0.0]);
        assert!(w < 2.0 * PI / 2.0 && w > 2.0 * PI / (2.0 * 2f64.sqrt()));
        // Quadrature cross-check.
        let mut q = 0.0;
        let n = 4000;
        let rmax = 400.0;
        for a in 0..n {
            for b in 0..n {
                let x = -rmax + 2.0 * rmax * (a as f64 + 0.5) / n as f64;
                let y = -rmax + 2.0 * rmax * (b as f64 + 0.5) / n as f64;
                if x.abs() > 2.0 || y.abs() > 2.0 {
                    q += (x * x + y * y).powf(-1.5) * (2.0 * rmax / n as f64).powi(2);
                }
            }
        }
        q += 2.0 * PI / rmax; // far tail
        assert!((q - w).abs() < 0.02 * w, "{q} {w}");
    }

    #[test]
    fn gagliardo_to_fourier_ratio_is_root_pi() {
        let f = gaussian(5.0, 64);
        let flat = BoundaryFunction::zero();
        let g = gagliardo_half(&f, &flat);
        let s = hs_norm_fourier(&f, 0.5).unwrap();
        assert!((s / g - PI.sqrt()).abs() < 0.02 * PI.sqrt(), "{}", s / g);
        assert_eq!(gagliardo_half(&f.th_push(), &flat), g);
    }

    #[test]
    fn lift_recovers_trace_and_energy() {
        let f = gaussian(6.0, 64);
        let lift = lift_harmonic(&f).unwrap();
        let u0 = lift.value(0.0);
        for (a, b) in u0.values().iter().zip(f.values()) {
            assert!((a - b).abs() < 1e-6);
        }
        let e = lift.dirichlet_energy(64);
        let s = hs_norm_fourier(&f, 0.5).unwrap();
        let expected = 2.0 * s * s / (2.0 * PI).powi(2);
        assert!((e - expected).abs() < 1e-3 * expected, "{e} {expected}");
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(8);
        let s: f64 = x.iter().zip(&w).map(|(a, b)| b * a.powi(14)).sum();
        assert!((s - 2.0 / 15.0).abs() < 1e-14);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }
}
