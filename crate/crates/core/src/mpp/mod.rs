//! Most probable paths: critical curves of `∫ H dt` with fixed endpoints.
//!
//! Writing `w = Z − v` and `V = ½ div Z − R/12 + ¼ tr ġ`, the Euler–Lagrange equation of
//! `H = ½ g(w, w) + V` solved for the acceleration reads
//!
//! `a^m = Ż^m + g^{mi} [½ ∂_i g_jl w^j w^l + g_jl w^j ∂_i Z^l + ∂_i V − ġ_ij (v − Z)^j − ∂_k g_ij v^k (v − Z)^j]`
//!
//! with `Ż = ∂_t Z + (∂_x Z) v`. For `Z = 0` this is
//! `∇_t φ̇ + ġ♯φ̇ + ∇R/12 − ¼ ∇ tr ġ = 0`, and under `∂_t g = α Ric` the gradient terms
//! collapse to `((1 − 3α)/12) ∇R`.

mod direct;
mod shooting;

pub use direct::{
    discrete_action, discrete_action_gradient, minimize_action_direct, minimize_action_direct_with, DirectOptions,
    DirectSolution,
};
pub use shooting::{solve_mpp_bvp, solve_mpp_bvp_with, BVPOptions, BVPSolution, CriticalCurve};

use nalgebra::DVector;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{self, MetricFamily, VectorField};
use crate::lagrangian::simpson;
use crate::transport::Curve;

/// The coefficient `(1 − 3α)/12` of `∇R` in the Ricci-flow Euler–Lagrange equation.
pub fn ricci_flow_gradient_coefficient(alpha: f64) -> f64 {
    (1.0 - 3.0 * alpha) / 12.0
}

/// `V = ½ div Z − R/12 + ¼ tr ġ`, the velocity-independent part of `H`.
fn potential<F, Z>(family: &F, field: &Z, t: f64, x: &[f64]) -> Result<f64>
where
    F: MetricFamily + ?Sized,
    Z: VectorField + ?Sized,
{
    Ok(0.5 * geometry::divergence(family, field, t, x)? - geometry::scalar_curvature(family, t, x)? / 12.0
        + 0.25 * geometry::trace_gdot(family, t, x)?)
}

/// Chart gradient `∂_i V` by central differences.
fn potential_gradient<F, Z>(family: &F, field: &Z, t: f64, x: &[f64]) -> Result<DVector<f64>>
where
    F: MetricFamily + ?Sized,
    Z: VectorField + ?Sized,
{
    let n = x.len();
    let mut grad = DVector::zeros(n);
    let mut xp = x.to_vec();
    for i in 0..n {
        let h = 1e-5 * x[i].abs().max(1.0);
        xp[i] = x[i] + h;
        let vp = potential(family, field, t, &xp)?;
        xp[i] = x[i] - h;
        let vm = potential(family, field, t, &xp)?;
        xp[i] = x[i];
        grad[i] = (vp - vm) / (2.0 * h);
    }
    Ok(grad)
}

/// Acceleration `φ̈` prescribed by the Euler–Lagrange equation at `(t, x, v)`.
pub fn el_acceleration<F, Z>(family: &F, field: &Z, t: f64, x: &[f64], v: &DVector<f64>) -> Result<DVector<f64>>
where
    F: MetricFamily + ?Sized,
    Z: VectorField + ?Sized,
{
    let n = family.dim();
    geometry::check_point(family, t, x)?;
    let g = family.metric(t, x);
    let chol = g.clone().cholesky().ok_or(Error::SingularMetric { t })?;
    let gdot = family.metric_dt(t, x);
    let dg: Vec<_> = (0..n).map(|k| family.metric_dx(t, x, k)).collect();
    let zero_field = field.is_zero();
    let z = if zero_field { DVector::zeros(n) } else { field.value(t, x) };
    let w = &z - v;
    let u = v - &z;

    let mut rhs = potential_gradient(family, field, t, x)?;
    rhs -= &gdot * &u;
    for i in 0..n {
        rhs[i] += 0.5 * w.dot(&(&dg[i] * &w));
    }
    for k in 0..n {
        if v[k] != 0.0 {
            rhs -= &dg[k] * &u * v[k];
        }
    }
    let mut zdot = DVector::zeros(n);
    if !zero_field {
        let jac = field.jacobian(t, x);
        // g_jl w^j ∂_i Z^l = (Jᵀ g w)_i
        rhs += jac.transpose() * (&g * &w);
        zdot = field.time_derivative(t, x) + &jac * v;
    }
    Ok(chol.solve(&rhs) + zdot)
}

/// Euler–Lagrange residual sampled along a curve.
#[derive(Debug, Clone, Serialize)]
pub struct ELResidualReport {
    pub t_grid: Vec<f64>,
    /// `φ̈ − a_EL(t, φ, φ̇)` in chart components.
    pub residual: Vec<Vec<f64>>,
    /// `max_t ‖residual‖_{g(t)}`.
    pub max_norm: f64,
}

pub fn el_residual<F, Z, C>(family: &F, field: &Z, curve: &C, grid_steps: usize) -> Result<ELResidualReport>
where
    F: MetricFamily + ?Sized,
    Z: VectorField + ?Sized,
    C: Curve + ?Sized,
{
    let steps = grid_steps.max(1);
    let mut t_grid = Vec::with_capacity(steps + 1);
    let mut residual = Vec::with_capacity(steps + 1);
    let mut max_norm = 0.0f64;
    for k in 0..=steps {
        let t = curve.horizon() * k as f64 / steps as f64;
        let x = curve.position(t);
        let v = curve.velocity(t);
        let r = curve.acceleration(t) - el_acceleration(family, field, t, x.as_slice(), &v)?;
        max_norm = max_norm.max(geometry::norm(family, t, x.as_slice(), &r));
        t_grid.push(t);
        residual.push(r.iter().copied().collect());
    }
    Ok(ELResidualReport { t_grid, residual, max_norm })
}

/// `∇_t φ̇ + α Ric♯φ̇ + ((1 − 3α)/12) ∇R` along a curve, assembled from the curvature
/// tensors; for a family flowing by `∂_t g = α Ric` this is the Euler–Lagrange operator
/// with `Z = 0`.
pub fn ricci_flow_residual<F, C>(family: &F, alpha: f64, curve: &C, grid_steps: usize) -> Result<ELResidualReport>
where
    F: MetricFamily + ?Sized,
    C: Curve + ?Sized,
{
    let steps = grid_steps.max(1);
    let coef = ricci_flow_gradient_coefficient(alpha);
    let mut t_grid = Vec::with_capacity(steps + 1);
    let mut residual = Vec::with_capacity(steps + 1);
    let mut max_norm = 0.0f64;
    for k in 0..=steps {
        let t = curve.horizon() * k as f64 / steps as f64;
        let x = curve.position(t);
        let xs = x.as_slice();
        let v = curve.velocity(t);
        let curv = geometry::curvature(family, t, xs)?;
        let ginv = crate::linalg::spd_inverse(&family.metric(t, xs), t)?;
        let mut r = curve.acceleration(t);
        for i in 0..family.dim() {
            r[i] += v.dot(&(&curv.christoffel[i] * &v));
        }
        r += &ginv * (&curv.ricci * &v) * alpha;
        if coef != 0.0 {
            let n = xs.len();
            let mut grad = DVector::zeros(n);
            let mut xp = xs.to_vec();
            for i in 0..n {
                let h = 1e-5 * xs[i].abs().max(1.0);
                xp[i] = xs[i] + h;
                let rp = geometry::scalar_curvature(family, t, &xp)?;
                xp[i] = xs[i] - h;
                let rm = geometry::scalar_curvature(family, t, &xp)?;
                xp[i] = xs[i];
                grad[i] = (rp - rm) / (2.0 * h);
            }
            r += &ginv * grad * coef;
        }
        max_norm = max_norm.max(geometry::norm(family, t, xs, &r));
        t_grid.push(t);
        residual.push(r.iter().copied().collect());
    }
    Ok(ELResidualReport { t_grid, residual, max_norm })
}

/// `(∫₀ᵀ |φ₁ − φ₂|² dt)^{1/2}` in chart coordinates.
pub fn l2_distance<A: Curve + ?Sized, B: Curve + ?Sized>(a: &A, b: &B, steps: usize) -> Result<f64> {
    let steps = steps + steps % 2;
    let horizon = a.horizon().min(b.horizon());
    simpson(|t| Ok((a.position(t) - b.position(t)).norm_squared()), 0.0, horizon, steps.max(2)).map(f64::sqrt)
}
