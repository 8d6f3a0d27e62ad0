mod common;

use std::f64::consts::PI;

use approx::assert_relative_eq;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

use om_diffusion::geometry::{
    self, christoffel, curvature, divergence, gdot_sharp, generic_sde_coefficients, metric_at, scalar_curvature,
    trace_gdot, ChartBox, ConformalFamily, ConstantField, CustomFamily, EuclideanFamily, FlatTorus, LinearField,
    MetricFamily, RicciFlowSphere,
};
use om_diffusion::Error;

use common::{fd_christoffel, fd_divergence, stereographic_metric};

fn zoo() -> Vec<(Box<dyn MetricFamily>, Vec<f64>, f64)> {
    // family, sample-box centre, sample-box half-width
    vec![
        (Box::new(EuclideanFamily::new(3, 1.0).unwrap()), vec![0.0; 3], 2.0),
        (Box::new(ConformalFamily::linear(2, 0.8, 1.0).unwrap()), vec![0.0; 2], 2.0),
        (Box::new(FlatTorus::new(vec![1.0, 2.5], vec![0.4, -1.0], vec![2.0 * PI, 3.0], 1.0).unwrap()), vec![PI, 1.5], 1.0),
        (Box::new(RicciFlowSphere::new(2, -2.0, 1.0, 0.4).unwrap()), vec![0.0; 2], 1.5),
        (Box::new(RicciFlowSphere::new(3, -1.0, 1.0, 0.4).unwrap()), vec![0.0; 3], 1.5),
    ]
}

/// 10×10 spatial grid (first two coordinates; the rest at the centre) × 5 times.
fn grid(centre: &[f64], half: f64, horizon: f64) -> Vec<(f64, Vec<f64>)> {
    let mut pts = Vec::new();
    for it in 0..5 {
        let t = horizon * it as f64 / 4.0;
        for i in 0..10 {
            for j in 0..10 {
                let mut x = centre.to_vec();
                x[0] += half * (-1.0 + 2.0 * i as f64 / 9.0);
                x[1] += half * (-1.0 + 2.0 * j as f64 / 9.0);
                if x.len() > 2 {
                    x[2] += 0.3 * half;
                }
                pts.push((t, x));
            }
        }
    }
    pts
}

fn rel_err(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).amax() / b.amax().max(1e-3)
}

#[test]
fn metric_examples() {
    let e = EuclideanFamily::new(3, 1.0).unwrap();
    assert_eq!(metric_at(&e, 0.7, &[1.0, -2.0, 0.5]).unwrap(), DMatrix::identity(3, 3));

    let c = ConformalFamily::linear(2, 0.5, 1.0).unwrap();
    let g = metric_at(&c, 1.0, &[0.3, 0.2]).unwrap();
    assert_relative_eq!(g, DMatrix::identity(2, 2) * 1f64.exp(), epsilon = 1e-14);

    let s = RicciFlowSphere::new(2, -2.0, 1.0, 0.4).unwrap();
    let g = metric_at(&s, 0.25, &[0.0, 0.0]).unwrap();
    assert_relative_eq!(g, stereographic_metric(0.5, &[0.0, 0.0]), epsilon = 1e-14);
    assert_relative_eq!(g[(0, 0)], 2.0, epsilon = 1e-14);
}

#[test]
fn out_of_domain_and_indefinite_metrics_are_errors() {
    let e = EuclideanFamily::new(2, 1.0).unwrap();
    assert!(matches!(metric_at(&e, 1.5, &[0.0, 0.0]), Err(Error::OutOfDomain { .. })));
    let torus = FlatTorus::constant(vec![1.0, 1.0], 1.0).unwrap();
    assert!(matches!(metric_at(&torus, 0.0, &[-0.1, 1.0]), Err(Error::OutOfDomain { .. })));

    let bad = CustomFamily::new(ChartBox::cube(2, 1.0), 1.0, |_, _| DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]))
        .unwrap();
    assert!(matches!(metric_at(&bad, 0.0, &[0.0, 0.0]), Err(Error::NotPositiveDefinite { .. })));
}

#[test]
fn christoffel_examples() {
    let e = EuclideanFamily::new(2, 1.0).unwrap();
    let c = ConformalFamily::new(ChartBox::cube(2, 5.0), 1.0, |t| t.sin(), |t| t.cos()).unwrap();
    for family in [&e as &dyn MetricFamily, &c] {
        let gamma = christoffel(family, 0.5, &[0.4, -1.2]).unwrap();
        assert!(gamma.iter().all(|m| m.amax() == 0.0));
    }

    let s = RicciFlowSphere::unit(2, 1.0).unwrap();
    for x in [[0.3, 0.0], [-0.7, 1.1], [2.0, 0.5]] {
        let gamma = christoffel(&s, 0.0, &x).unwrap();
        let oracle = fd_christoffel(|y| stereographic_metric(1.0, y), &x, 1e-5);
        for i in 0..2 {
            assert!((&gamma[i] - &oracle[i]).amax() < 1e-6, "Γ^{i} at {x:?}");
            assert_relative_eq!(gamma[i].clone(), gamma[i].transpose());
        }
    }
}

#[test]
fn curvature_examples() {
    let torus = FlatTorus::new(vec![1.0, 3.0], vec![0.2, 0.7], vec![2.0 * PI; 2], 1.0).unwrap();
    let k = curvature(&torus, 0.3, &[1.0, 2.0]).unwrap();
    assert_eq!(k.riemann.max_abs(), 0.0);
    assert_eq!(k.ricci.amax(), 0.0);
    assert_eq!(k.scalar, 0.0);

    let unit = RicciFlowSphere::unit(2, 1.0).unwrap();
    for x in [[0.0, 0.0], [0.5, -0.4], [3.0, 1.0]] {
        let k = curvature(&unit, 0.0, &x).unwrap();
        assert_relative_eq!(k.scalar, 2.0, epsilon = 1e-10);
        // Ric = (n−1)/c · g on a round sphere
        let g = stereographic_metric(1.0, &x);
        assert!((&k.ricci - &g).amax() < 1e-10);
    }

    let shrinking = RicciFlowSphere::new(2, -2.0, 1.0, 0.4).unwrap();
    let k = curvature(&shrinking, 0.2, &[0.3, 0.1]).unwrap();
    assert_relative_eq!(k.scalar, 2.0 / 0.6, epsilon = 1e-10);

    let s3 = RicciFlowSphere::unit(3, 1.0).unwrap();
    let k = curvature(&s3, 0.0, &[0.2, -0.3, 0.4]).unwrap();
    assert_relative_eq!(k.scalar, 6.0, epsilon = 1e-10);
}

#[test]
fn riemann_symmetries_on_analytic_families() {
    for (family, centre, half) in zoo() {
        for (t, x) in grid(&centre, half, family.horizon()).into_iter().step_by(37) {
            let k = curvature(&*family, t, &x).unwrap();
            assert!(k.antisymmetry_defect() < 1e-8, "{}", family.name());
            assert!(k.bianchi_defect() < 1e-8, "{}", family.name());
        }
    }
}

#[test]
fn sectional_curvature_of_round_sphere() {
    // R_abcd = K (g_ad g_bc − g_ac g_bd) with K = 1/c
    let s = RicciFlowSphere::new(3, -1.0, 2.0, 0.5).unwrap();
    let (t, x) = (0.3, [0.4, 0.1, -0.6]);
    let c = s.scale(t);
    let k = curvature(&s, t, &x).unwrap();
    let g = s.metric(t, &x);
    for a in 0..3 {
        for b in 0..3 {
            for cc in 0..3 {
                for d in 0..3 {
                    let expected = (g[(a, d)] * g[(b, cc)] - g[(a, cc)] * g[(b, d)]) / c;
                    assert!((k.riemann.get(a, b, cc, d) - expected).abs() < 1e-10);
                }
            }
        }
    }
}

#[test]
fn analytic_derivatives_match_differences_on_grid() {
    for (family, centre, half) in zoo() {
        let n = family.dim();
        let h = 1e-5;
        for (t, x) in grid(&centre, half, family.horizon()) {
            let g = metric_at(&*family, t, &x).unwrap();
            assert_eq!(g, g.transpose());
            assert!(g.clone().symmetric_eigenvalues().min() > 0.0);

            // second-order stencils, one-sided at the ends of the horizon
            let gt = |s: f64| family.metric(s, &x);
            let fd_t = if t - h < 0.0 {
                (gt(t) * -3.0 + gt(t + h) * 4.0 - gt(t + 2.0 * h)) / (2.0 * h)
            } else if t + h > family.horizon() {
                (gt(t) * 3.0 - gt(t - h) * 4.0 + gt(t - 2.0 * h)) / (2.0 * h)
            } else {
                (gt(t + h) - gt(t - h)) / (2.0 * h)
            };
            assert!(rel_err(&family.metric_dt(t, &x), &fd_t) < 1e-6, "{} ġ at t={t} x={x:?}", family.name());

            for k in 0..n {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[k] += h;
                xm[k] -= h;
                let fd = (family.metric(t, &xp) - family.metric(t, &xm)) / (2.0 * h);
                assert!(rel_err(&family.metric_dx(t, &x, k), &fd) < 1e-6, "{} ∂g/∂x{k}", family.name());
                for l in 0..n {
                    let fd2 = (family.metric_dx(t, &xp, l) - family.metric_dx(t, &xm, l)) / (2.0 * h);
                    assert!(rel_err(&family.metric_dxdx(t, &x, l, k), &fd2) < 1e-6, "{} ∂²g", family.name());
                }
            }
        }
    }
}

#[test]
fn ricci_flow_family_obeys_its_flow() {
    for (n, alpha) in [(2, -2.0), (2, 0.7), (3, -1.0), (3, 1.0 / 3.0)] {
        let s = RicciFlowSphere::new(n, alpha, 1.0, 0.2).unwrap();
        let centre = vec![0.0; n];
        for (t, x) in grid(&centre, 1.5, 0.2) {
            let k = curvature(&s, t, &x).unwrap();
            let defect = (s.metric_dt(t, &x) - k.ricci * alpha).amax();
            assert!(defect < 1e-8, "n={n} α={alpha} t={t}: {defect:e}");
        }
    }
}

#[test]
fn scalar_curvature_scaling_law() {
    for c in [0.25, 3.0, 17.0] {
        let base = RicciFlowSphere::new(2, 0.0, 1.0, 1.0).unwrap();
        let scaled = RicciFlowSphere::new(2, 0.0, c, 1.0).unwrap();
        for x in [[0.1, 0.2], [1.5, -0.5]] {
            let r = curvature(&base, 0.0, &x).unwrap().scalar;
            let rc = curvature(&scaled, 0.0, &x).unwrap().scalar;
            assert!((rc - r / c).abs() < 1e-8);
        }
    }
}

#[test]
fn closed_forms_agree_with_pipeline() {
    for (family, centre, half) in zoo() {
        for (t, x) in grid(&centre, half, family.horizon()).into_iter().step_by(23) {
            if let Some(r) = family.closed_form_scalar_curvature(t, &x) {
                let k = curvature(&*family, t, &x).unwrap();
                assert!((r - k.scalar).abs() < 1e-9, "{}", family.name());
            }
            if let Some(tr) = family.closed_form_trace_gdot(t, &x) {
                let g = family.metric(t, &x);
                let direct = (g.try_inverse().unwrap() * family.metric_dt(t, &x)).trace();
                assert!((tr - direct).abs() < 1e-10, "{}", family.name());
            }
        }
    }
}

#[test]
fn gdot_sharp_examples() {
    let v = DVector::from_vec(vec![0.3, -1.1]);
    let static_torus = FlatTorus::constant(vec![2.0, 5.0], 1.0).unwrap();
    assert_eq!(gdot_sharp(&static_torus, 0.5, &[1.0, 1.0], &v).unwrap().amax(), 0.0);

    let c = ConformalFamily::new(ChartBox::cube(2, 5.0), 1.0, |t| t * t, |t| 2.0 * t).unwrap();
    let w = gdot_sharp(&c, 0.6, &[0.0, 0.0], &v).unwrap();
    assert_relative_eq!(w, &v * (2.0 * 1.2), epsilon = 1e-12);

    let s = RicciFlowSphere::new(2, -2.0, 1.0, 0.4).unwrap();
    let w = gdot_sharp(&s, 0.0, &[0.4, -0.9], &v).unwrap();
    assert_relative_eq!(w, &v * -2.0, epsilon = 1e-12);

    // ⟨ġ♯v, u⟩_g = ġ(v, u)
    let torus = FlatTorus::new(vec![1.0, 3.0], vec![0.5, -2.0], vec![2.0 * PI; 2], 1.0).unwrap();
    let (t, x) = (0.4, [2.0, 3.0]);
    let u = DVector::from_vec(vec![1.7, 0.4]);
    let lhs = (torus.metric(t, &x) * gdot_sharp(&torus, t, &x, &v).unwrap()).dot(&u);
    let rhs = (torus.metric_dt(t, &x) * &v).dot(&u);
    assert_relative_eq!(lhs, rhs, epsilon = 1e-12);
}

#[test]
fn trace_gdot_examples() {
    let e = EuclideanFamily::new(4, 1.0).unwrap();
    assert_eq!(trace_gdot(&e, 0.5, &[0.0; 4]).unwrap(), 0.0);

    let c = ConformalFamily::new(ChartBox::cube(3, 5.0), 1.0, |t| t.sin(), |t| t.cos()).unwrap();
    let tr = trace_gdot(&c, 0.3, &[0.1, 0.2, 0.3]).unwrap();
    assert_relative_eq!(tr, 6.0 * 0.3f64.cos(), epsilon = 1e-12);

    let s = RicciFlowSphere::new(2, -2.0, 1.0, 0.4).unwrap();
    assert_relative_eq!(trace_gdot(&s, 0.0, &[0.5, 0.5]).unwrap(), -4.0, epsilon = 1e-12);
    // through the generic path: a family without closed forms
    let custom = CustomFamily::new(ChartBox::cube(2, 10.0), 0.4, |t, x| stereographic_metric(1.0 - 2.0 * t, x)).unwrap();
    assert!((trace_gdot(&custom, 0.0, &[0.5, 0.5]).unwrap() + 4.0).abs() < 1e-6);
}

#[test]
fn divergence_examples() {
    let e = EuclideanFamily::new(3, 1.0).unwrap();
    assert_relative_eq!(divergence(&e, &LinearField::radial(3), 0.0, &[1.0, 2.0, 3.0]).unwrap(), 3.0);
    let k = ConstantField(DVector::from_vec(vec![1.0, -4.0, 2.0]));
    assert_eq!(divergence(&e, &k, 0.0, &[1.0, 2.0, 3.0]).unwrap(), 0.0);

    let s = RicciFlowSphere::unit(2, 1.0).unwrap();
    for x in [[0.1, 0.1], [0.8, -1.3]] {
        let div = divergence(&s, &LinearField::radial(2), 0.0, &x).unwrap();
        let oracle = fd_divergence(|y| stereographic_metric(1.0, y), |y| DVector::from_column_slice(y), &x, 1e-5);
        assert!((div - oracle).abs() < 1e-6, "{div} vs {oracle}");
    }
}

#[test]
fn sde_coefficient_overrides_match_generic_assembly() {
    for (family, centre, half) in zoo() {
        let n = family.dim();
        for (t, x) in grid(&centre, half, family.horizon()).into_iter().step_by(17) {
            let (mut d1, mut s1) = (vec![0.0; n], vec![0.0; n * n]);
            let (mut d2, mut s2) = (vec![0.0; n], vec![0.0; n * n]);
            family.sde_coefficients(t, &x, &mut d1, &mut s1);
            generic_sde_coefficients(&*family, t, &x, &mut d2, &mut s2);
            for (a, b) in d1.iter().zip(&d2).chain(s1.iter().zip(&s2)) {
                assert!((a - b).abs() < 1e-10 * (1.0 + b.abs()), "{}: {a} vs {b}", family.name());
            }
            if family.homogeneous_sde() {
                let (mut d3, mut s3) = (vec![0.0; n], vec![0.0; n * n]);
                let y: Vec<f64> = centre.clone();
                family.sde_coefficients(t, &y, &mut d3, &mut s3);
                assert_eq!((d1.clone(), s1.clone()), (d3, s3));
            }
        }
    }
}

#[test]
fn distance_closed_forms() {
    let s = RicciFlowSphere::new(2, -2.0, 1.0, 0.4).unwrap();
    // chart origin and the unit circle are a quarter turn apart
    let d = geometry::distance(&s, 0.2, &[0.0, 0.0], &[1.0, 0.0]);
    assert_relative_eq!(d, 0.6f64.sqrt() * PI / 2.0, epsilon = 1e-12);

    let torus = FlatTorus::constant(vec![4.0, 1.0], 1.0).unwrap();
    // wraps around the short way
    let d = geometry::distance(&torus, 0.0, &[0.1, 1.0], &[2.0 * PI - 0.1, 1.0]);
    assert_relative_eq!(d, 2.0 * 0.2, epsilon = 1e-12);

    // fallback for families without a closed form is the local quadratic form
    let custom = CustomFamily::new(ChartBox::cube(2, 10.0), 1.0, |_, x| stereographic_metric(1.0, x)).unwrap();
    let (x, y) = ([0.3, 0.2], [0.3 + 1e-3, 0.2 - 2e-3]);
    let exact = geometry::distance(&RicciFlowSphere::unit(2, 1.0).unwrap(), 0.0, &x, &y);
    let approx = geometry::distance(&custom, 0.0, &x, &y);
    assert!((approx - exact).abs() / exact < 1e-2);
}

#[test]
fn finite_difference_fallbacks_track_analytic_family() {
    let analytic = RicciFlowSphere::new(2, -1.0, 1.0, 0.4).unwrap();
    let custom = CustomFamily::new(ChartBox::cube(2, 10.0), 0.4, |t, x| stereographic_metric(1.0 - t, x))
        .unwrap()
        .with_fd_step(1e-4);
    let (t, x) = (0.1, [0.4, -0.2]);
    let a = curvature(&analytic, t, &x).unwrap();
    let b = curvature(&custom, t, &x).unwrap();
    assert!((a.scalar - b.scalar).abs() < 1e-4);
    assert!((scalar_curvature(&custom, t, &x).unwrap() - 2.0 / 0.9).abs() < 1e-4);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sphere_metric_is_positive_definite(x in -9.0..9.0f64, y in -9.0..9.0f64, t in 0.0..0.4f64) {
        let s = RicciFlowSphere::new(2, -2.0, 1.0, 0.4).unwrap();
        let g = metric_at(&s, t, &[x, y]).unwrap();
        prop_assert!(g.symmetric_eigenvalues().min() > 0.0);
    }

    #[test]
    fn christoffel_is_symmetric_in_lower_indices(x in -2.0..2.0f64, y in -2.0..2.0f64, z in -2.0..2.0f64) {
        let s = RicciFlowSphere::unit(3, 1.0).unwrap();
        for m in christoffel(&s, 0.0, &[x, y, z]).unwrap() {
            prop_assert!((&m - m.transpose()).amax() < 1e-15);
        }
    }

    #[test]
    fn sphere_distance_is_a_metric(
        a in prop::array::uniform2(-3.0..3.0f64),
        b in prop::array::uniform2(-3.0..3.0f64),
        c in prop::array::uniform2(-3.0..3.0f64),
    ) {
        let s = RicciFlowSphere::unit(2, 1.0).unwrap();
        let d = |p: &[f64], q: &[f64]| geometry::distance(&s, 0.0, p, q);
        prop_assert!(d(&a, &a).abs() < 1e-7);
        prop_assert!((d(&a, &b) - d(&b, &a)).abs() < 1e-12);
        prop_assert!(d(&a, &c) <= d(&a, &b) + d(&b, &c) + 1e-12);
        prop_assert!(d(&a, &b) <= PI + 1e-12);
    }

    #[test]
    fn torus_distance_is_periodic(x in 0.5..5.5f64, y in 0.5..5.5f64, dx in -0.4..0.4f64) {
        let torus = FlatTorus::constant(vec![1.0, 2.0], 1.0).unwrap();
        let p = [x, y];
        let q = [(x + dx).rem_euclid(2.0 * PI), y];
        prop_assert!((geometry::distance(&torus, 0.0, &p, &q) - dx.abs()).abs() < 1e-12);
    }
}
