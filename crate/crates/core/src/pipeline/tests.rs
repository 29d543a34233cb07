use super::*;
use crate::geometry::BoundaryFunction;

fn grid(m: usize) -> BoxGrid {
    BoxGrid::centred(2.0, -1.0, 3.0, m).unwrap()
}

fn quiet() -> DecompositionConfig {
    DecompositionConfig { ledgers: false, ..Default::default() }
}

/// `∇ exp(-|x - c|²/s²)`.
fn gauss_grad(x: Point, c: Point, s: f64) -> [f64; 3] {
    let d = vec3::sub(x, c);
    let e = (-vec3::dot(d, d) / (s * s)).exp();
    vec3::scale(-2.0 * e / (s * s), d)
}

fn gradient_field(hs: &PerturbedHalfSpace, g: BoxGrid) -> BoxField {
    BoxField::from_fn(hs, g, 3, |x| gauss_grad(x, [0.1, 0.0, 0.6], 0.45).to_vec())
}

/// `curl(φ e₃)` with `φ` even in `x₃`: divergence free and tangential on `x₃ = 0`.
fn swirl(hs: &PerturbedHalfSpace, g: BoxGrid) -> BoxField {
    BoxField::from_fn(hs, g, 3, |x| {
        let p = gauss_grad(x, [0.0; 3], 0.45);
        vec![p[1], -p[0], 0.0]
    })
}

#[test]
fn column_lattice_requires_centred_square_columns() {
    let lat = column_lattice(&grid(32)).unwrap();
    assert_eq!(lat.cells, 32);
    assert!((lat.node(0)[0] + 2.0).abs() < 1e-12);
    let skew = BoxGrid::new([-2.0, -1.0, -1.0], [2.0, 1.0, 1.0], [16, 16, 16]).unwrap();
    assert!(column_lattice(&skew).is_err());
    let shifted = BoxGrid::new([-1.0, -1.0, -1.0], [2.0, 2.0, 1.0], [16, 16, 16]).unwrap();
    assert!(column_lattice(&shifted).is_err());
}

#[test]
fn zero_input_gives_zero_output() {
    let hs = PerturbedHalfSpace::new(BoundaryFunction::zero());
    let v = BoxField::zeros(&hs, grid(32), 3);
    let cfg = DecompositionConfig::default();
    let r = decompose(&hs, &v, &cfg).unwrap();
    assert_eq!((r.v0.linf(), r.grad_q1.linf(), r.grad_q2.linf()), (0.0, 0.0, 0.0));
    assert_eq!((r.residual_div, r.residual_normal), (0.0, 0.0));
    assert_eq!(r.ledger_v0, r.ledger_v);
    assert!(verify(&hs, &r, &cfg).all_passed());
}

#[test]
fn pure_gradient_has_no_solenoidal_part() {
    let hs = PerturbedHalfSpace::new(BoundaryFunction::zero());
    let v = gradient_field(&hs, grid(32));
    let cfg = quiet();
    let r = decompose(&hs, &v, &cfg).unwrap();
    let ratio = r.v0.l2() / v.l2();
    assert!(ratio < 5e-2, "{ratio}");
    assert!(r.reconstruction_error() < 1e-10 * (1.0 + v.linf()));
    let report = verify(&hs, &r, &cfg);
    assert!(report.all_passed(), "{:?}", report.failures().collect::<Vec<_>>());
    for c in &report.checks {
        assert!(c.value.is_finite() && c.value >= 0.0);
    }
}

#[test]
fn tangential_solenoidal_field_is_left_alone() {
    let hs = PerturbedHalfSpace::new(BoundaryFunction::zero());
    let v = swirl(&hs, grid(32));
    let r = decompose(&hs, &v, &quiet()).unwrap();
    let ratio = r.grad_q().l2() / v.l2();
    assert!(ratio < 5e-2, "{ratio}");
    assert!(r.trace_linf < 1e-6, "{}", r.trace_linf);
}

#[test]
fn bump_boundary_decomposes_a_gradient() {
    let hs = PerturbedHalfSpace::new(BoundaryFunction::smooth_bump(0.01, 0.3).unwrap());
    let v = gradient_field(&hs, grid(32));
    let r = decompose(&hs, &v, &quiet()).unwrap();
    assert!(r.series_terms > 1);
    assert!(r.v0.l2() < 5e-2 * v.l2(), "{}", r.v0.l2() / v.l2());
    assert!(r.residual_div < 1e-2 && r.residual_normal < 1e-2, "{} {}", r.residual_div, r.residual_normal);
}

#[test]
fn decomposition_is_linear() {
    let hs = PerturbedHalfSpace::new(BoundaryFunction::zero());
    let g = grid(24);
    let a = gradient_field(&hs, g.clone());
    let b = swirl(&hs, g).axpy(1.0, &a.scaled(-0.5)).unwrap();
    let cfg = quiet();
    let (s, t) = (1.7, -0.6);
    let mix = decompose(&hs, &a.scaled(s).axpy(t, &b).unwrap(), &cfg).unwrap();
    let ra = decompose(&hs, &a, &cfg).unwrap();
    let rb = decompose(&hs, &b, &cfg).unwrap();
    let expect = ra.v0.scaled(s).axpy(t, &rb.v0).unwrap();
    let diff = mix.v0.axpy(-1.0, &expect).unwrap();
    assert!(diff.linf() < 1e-8 * mix.v.linf(), "{}", diff.linf());
}

#[test]
fn projection_is_nearly_idempotent() {
    let hs = PerturbedHalfSpace::new(BoundaryFunction::smooth_bump(0.01, 0.3).unwrap());
    let g = grid(32);
    let v = swirl(&hs, g.clone()).axpy(1.0, &gradient_field(&hs, g)).unwrap();
    let cfg = quiet();
    let first = decompose(&hs, &v, &cfg).unwrap();
    let again = DecompositionConfig { decay_tolerance: 1e-2, ..cfg };
    let second = decompose(&hs, &first.v0, &again).unwrap();
    let drift = second.v0.axpy(-1.0, &first.v0).unwrap().l2() / first.v0.l2();
    let bound = 2.0 * (first.residual_div + first.residual_normal);
    assert!(drift < bound, "{drift} {bound}");
}

#[test]
fn summary_round_trips_through_json() {
    let hs = PerturbedHalfSpace::new(BoundaryFunction::zero());
    let v = swirl(&hs, grid(32));
    let cfg = DecompositionConfig {
        oscillation: OscillationOptions { samples: 20, ..Default::default() },
        ..Default::default()
    };
    let s = decompose(&hs, &v, &cfg).unwrap().summary();
    assert!(s.ledger_v.l2 > 0.0 && s.boundedness_ratio.is_finite());
    let back: DecompositionSummary = serde_json::from_str(&serde_json::to_string(&s).unwrap()).unwrap();
    assert_eq!(back, s);
}

#[test]
fn rejects_shallow_boxes_and_scalar_fields() {
    let hs = PerturbedHalfSpace::new(BoundaryFunction::zero());
    let shallow = BoxGrid::centred(2.0, -0.2, 3.0, 16).unwrap();
    let v = swirl(&hs, shallow);
    assert!(matches!(decompose(&hs, &v, &quiet()), Err(Error::InvalidInput(_))));
    let s = BoxField::zeros(&hs, grid(16), 1);
    assert!(decompose(&hs, &s, &quiet()).is_err());
}

#[test]
fn flat_boundary_matches_the_reflection_oracle() {
    // For h ≡ 0 the half-space projection is the whole-space one applied to
    // the reflection (tangential even, normal odd). For this field that
    // reflection is smooth, so one spectral projection is an accurate oracle.
    // At 33³ the error near Γ is about 3%; it converges at fourth order.
    let hs = PerturbedHalfSpace::new(BoundaryFunction::zero());
    let field = |x: Point| {
        let r2 = vec3::dot(x, x);
        vec![0.0, 0.0, x[2] * (-r2 / 0.2025).exp()]
    };
    let g = BoxGrid::new([-2.0, -2.0, -1.0], [2.0, 2.0, 3.0], [49, 49, 49]).unwrap();
    let v = BoxField::from_fn(&hs, g.clone(), 3, field);
    let r = decompose(&hs, &v, &quiet()).unwrap();

    let whole = BoxGrid::new([-2.0, -2.0, -3.0], [2.0, 2.0, 3.0], [49, 49, 73]).unwrap();
    let mut data = vec![vec![0.0; whole.len()]; 3];
    for idx in 0..whole.len() {
        data[2][idx] = field(whole.point(idx))[2];
    }
    let oracle = leray_gradient(&BoxField::new(whole.clone(), data, vec![true; whole.len()]).unwrap()).unwrap();

    let gq = r.grad_q();
    let (mut err, mut norm) = (0.0, 0.0);
    for idx in 0..g.len() {
        let x = g.point(idx);
        if !gq.mask()[idx] || x[0].abs() > 1.0 || x[1].abs() > 1.0 || x[2] > 2.0 {
            continue;
        }
        let [i, j, k] = g.multi_index(idx);
        let o = oracle.vector(whole.index(i, j, k + 24));
        err += vec3::dot(vec3::sub(gq.vector(idx), o), vec3::sub(gq.vector(idx), o));
        norm += vec3::dot(o, o);
    }
    let rel = (err / norm).sqrt();
    assert!(rel < 2e-2, "{rel}");
}
