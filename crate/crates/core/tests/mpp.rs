mod common;

use approx::assert_relative_eq;
use nalgebra::{DMatrix, DVector};

use om_diffusion::geometry::{ConstantField, EuclideanFamily, LinearField, MetricFamily, RicciFlowSphere, ZeroField};
use om_diffusion::lagrangian::action;
use om_diffusion::mpp::{
    discrete_action, discrete_action_gradient, el_residual, l2_distance, minimize_action_direct, ricci_flow_residual,
    solve_mpp_bvp,
};
use om_diffusion::transport::{AnalyticCurve, Curve};
use om_diffusion::Error;

use common::ricci_flow_great_circle;

fn knots_of(curve: &dyn Curve, k: usize) -> Vec<DVector<f64>> {
    (0..=k).map(|i| curve.position(curve.horizon() * i as f64 / k as f64)).collect()
}

#[test]
fn euclidean_solutions_are_straight_lines() {
    let e = EuclideanFamily::new(2, 1.0).unwrap();
    let (x0, x1) = ([0.5, -1.0], [2.0, 3.0]);
    let bvp = solve_mpp_bvp(&e, &ZeroField(2), &x0, &x1, 1.0, None).unwrap();
    let line = AnalyticCurve::line(DVector::from_column_slice(&x0), DVector::from_column_slice(&x1), 1.0);
    assert!(l2_distance(&bvp.curve, &line, 500).unwrap() < 1e-10);
    assert!(bvp.terminal_error < 1e-8);

    let direct = minimize_action_direct(&e, &ZeroField(2), &x0, &x1, 1.0, 40).unwrap();
    for (k, knot) in direct.knots.iter().enumerate() {
        assert!((knot - line.position(k as f64 / 40.0)).amax() < 1e-5);
    }
}

#[test]
fn constant_drift_keeps_straight_lines() {
    let e = EuclideanFamily::new(2, 2.0).unwrap();
    let mu = DVector::from_vec(vec![1.5, -0.5]);
    let z = ConstantField(mu.clone());
    let (x0, x1) = ([0.0, 0.0], [1.0, 1.0]);
    let bvp = solve_mpp_bvp(&e, &z, &x0, &x1, 2.0, None).unwrap();
    let line = AnalyticCurve::line(DVector::from_column_slice(&x0), DVector::from_column_slice(&x1), 2.0);
    assert!(l2_distance(&bvp.curve, &line, 500).unwrap() < 1e-9);
    let v = DVector::from_vec(vec![0.5, 0.5]);
    let expected = 0.5 * (&mu - v).norm_squared() * 2.0;
    assert_relative_eq!(bvp.action, expected, epsilon = 1e-9);
}

#[test]
fn shooting_solution_satisfies_first_order_optimality() {
    let s = RicciFlowSphere::new(2, -1.0, 1.0, 0.4).unwrap();
    let field = LinearField::new(DMatrix::from_row_slice(2, 2, &[0.0, -0.5, 0.5, 0.0]), DVector::zeros(2));
    let bvp = solve_mpp_bvp(&s, &field, &[-0.5, 0.2], &[0.6, 0.4], 0.4, None).unwrap();
    assert!(el_residual(&s, &field, &bvp.curve, 200).unwrap().max_norm < 1e-4);
    let knots = knots_of(&bvp.curve, 200);
    let grad = discrete_action_gradient(&s, &field, &knots, 0.4, 1e-6).unwrap();
    let norm = grad.iter().map(|g| g.norm_squared()).sum::<f64>().sqrt();
    assert!(norm < 1e-5, "gradient norm {norm:e}");
}

#[test]
fn direct_minimizer_never_loses_to_the_straight_line() {
    let cases: Vec<(RicciFlowSphere, [f64; 2], [f64; 2])> = vec![
        (RicciFlowSphere::new(2, -2.0, 1.0, 0.2).unwrap(), [-1.2, 0.3], [1.4, 0.6]),
        (RicciFlowSphere::new(2, 1.0, 1.0, 0.5).unwrap(), [0.0, 0.0], [2.0, -1.0]),
        (RicciFlowSphere::unit(2, 1.0).unwrap(), [0.3, 0.3], [-0.3, -0.3]),
    ];
    for (s, x0, x1) in cases {
        let t = s.horizon();
        let direct = minimize_action_direct(&s, &ZeroField(2), &x0, &x1, t, 50).unwrap();
        let line = knots_of(
            &AnalyticCurve::line(DVector::from_column_slice(&x0), DVector::from_column_slice(&x1), t),
            50,
        );
        assert!(direct.discrete_action <= discrete_action(&s, &ZeroField(2), &line, t).unwrap());
    }
}

#[test]
fn direct_el_residual_shrinks_with_refinement() {
    let s = RicciFlowSphere::new(2, -1.0, 1.0, 0.3).unwrap();
    let (x0, x1) = ([-0.6, 0.1], [0.7, 0.5]);
    let residuals: Vec<f64> = [25, 50, 100]
        .iter()
        .map(|&k| {
            let d = minimize_action_direct(&s, &ZeroField(2), &x0, &x1, 0.3, k).unwrap();
            el_residual(&s, &ZeroField(2), &d.curve, 400).unwrap().max_norm
        })
        .collect();
    for w in residuals.windows(2) {
        assert!(w[0] / w[1] >= 2.0, "{residuals:?}");
    }
}

#[test]
fn near_antipodal_endpoints_on_the_shrinking_sphere() {
    let s = RicciFlowSphere::new(2, -2.0, 1.0, 0.2).unwrap();
    // antipode of (0.5, 0) is (−2, 0)
    let (x0, x1) = ([0.5, 0.0], [-1.9, 0.15]);
    let bvp = solve_mpp_bvp(&s, &ZeroField(2), &x0, &x1, 0.2, None).unwrap();
    let direct = minimize_action_direct(&s, &ZeroField(2), &x0, &x1, 0.2, 200).unwrap();
    assert!(l2_distance(&bvp.curve, &direct.curve, 1000).unwrap() < 1e-3);
    assert!(((bvp.action - direct.action) / bvp.action).abs() < 1e-5);
    // reported critical curves are sorted and the returned one is the cheapest
    let actions: Vec<f64> = bvp.critical_curves.iter().map(|c| c.action).collect();
    assert!(actions.windows(2).all(|w| w[0] <= w[1]));
    assert_relative_eq!(actions[0], bvp.action, epsilon = 1e-12);
}

#[test]
fn great_circles_solve_the_ricci_flow_equation() {
    for (n, alpha, horizon) in [(2, -2.0, 0.2), (2, 1.0, 0.5), (3, -1.0, 0.2), (3, 1.0 / 3.0, 0.5)] {
        let s = RicciFlowSphere::new(n, alpha, 1.0, horizon).unwrap();
        let circle = ricci_flow_great_circle(n, alpha, 1.5, horizon);
        assert!(ricci_flow_residual(&s, alpha, &circle, 400).unwrap().max_norm < 1e-6, "n={n} α={alpha}");
        assert!(el_residual(&s, &ZeroField(n), &circle, 400).unwrap().max_norm < 1e-6, "n={n} α={alpha}");
    }
}

#[test]
fn bvp_reproduces_the_analytic_great_circle() {
    let (alpha, horizon) = (-2.0, 0.2);
    let s = RicciFlowSphere::new(2, alpha, 1.0, horizon).unwrap();
    let circle = ricci_flow_great_circle(2, alpha, 2.0, horizon);
    let x1 = circle.position(horizon);
    let bvp = solve_mpp_bvp(&s, &ZeroField(2), &[0.0, 0.0], x1.as_slice(), horizon, None).unwrap();
    assert!(l2_distance(&bvp.curve, &circle, 1000).unwrap() < 1e-6);
    let a = action(&s, &ZeroField(2), &circle, 1000).unwrap();
    assert_relative_eq!(bvp.action, a, max_relative = 1e-8);
}

#[test]
fn endpoints_outside_the_chart_are_rejected() {
    let s = RicciFlowSphere::with_half_width(2, 0.0, 1.0, 1.0, 2.0).unwrap();
    let r = solve_mpp_bvp(&s, &ZeroField(2), &[0.0, 0.0], &[2.5, 0.0], 1.0, None);
    assert!(matches!(r, Err(Error::OutOfDomain { .. })));
    let r = minimize_action_direct(&s, &ZeroField(2), &[0.0, 0.0], &[2.5, 0.0], 1.0, 20);
    assert!(matches!(r, Err(Error::OutOfDomain { .. })));
}
