//! The Onsager–Machlup Lagrangian
//! `H(t, x, v) = ½‖Z − v‖²_g + ½ div_g Z − R_g/12 + ¼ tr_g ġ`,
//! its action along curves, and the weighted variant for tubes of radius `ε f(t)`.

mod time_change;
mod weight;

pub use time_change::{TimeChangedCurve, TimeChangedFamily, TimeChangedField};
pub use weight::{TimeChange, WeightFunction};

use nalgebra::DVector;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{self, MetricFamily, VectorField};
use crate::transport::Curve;

/// Default number of Simpson intervals.
pub const DEFAULT_QUADRATURE_STEPS: usize = 1000;

/// `H` at one point with its four summands.
///
/// `weight_term` is only non-zero for [`WeightedVariant::Printed`], which carries an
/// explicit `−½ n f′ f⁻³` summand; `kinetic_coefficient` is the factor multiplying
/// `‖Z − v‖²` (½ for the canonical Lagrangian).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LagrangianSample {
    pub t: f64,
    pub kinetic: f64,
    pub div_term: f64,
    pub scalar_term: f64,
    pub trace_term: f64,
    pub weight_term: f64,
    pub kinetic_coefficient: f64,
    pub total: f64,
}

impl LagrangianSample {
    fn assemble(t: f64, kinetic: f64, div_term: f64, scalar_term: f64, trace_term: f64) -> Self {
        Self {
            t,
            kinetic,
            div_term,
            scalar_term,
            trace_term,
            weight_term: 0.0,
            kinetic_coefficient: 0.5,
            total: kinetic + div_term + scalar_term + trace_term,
        }
    }
}

/// Which weighted Lagrangian to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightedVariant {
    /// `‖Z − v‖² + ½ div Z − R/12 + ¼ f⁻² tr ġ − ½ n f′ f⁻³`, taken literally.
    Printed,
    /// The unweighted Lagrangian of the diffusion on the clock `u = ∫ f⁻²` (metric
    /// `f⁻² g`, drift `f² Z`), converted back to physical time.
    TimeChanged,
}

pub fn om_lagrangian<F, Z>(family: &F, field: &Z, t: f64, x: &[f64], v: &DVector<f64>) -> Result<LagrangianSample>
where
    F: MetricFamily + ?Sized,
    Z: VectorField + ?Sized,
{
    let g = geometry::metric_at(family, t, x)?;
    if v.len() != family.dim() || field.dim() != family.dim() {
        return Err(Error::InvalidArgument("velocity or drift dimension does not match the family".into()));
    }
    let w = field.value(t, x) - v;
    let kinetic = 0.5 * w.dot(&(&g * &w));
    let div_term = 0.5 * geometry::divergence(family, field, t, x)?;
    let scalar_term = -geometry::scalar_curvature(family, t, x)? / 12.0;
    let trace_term = 0.25 * geometry::trace_gdot(family, t, x)?;
    Ok(LagrangianSample::assemble(t, kinetic, div_term, scalar_term, trace_term))
}

/// Composite Simpson rule with an even number of intervals.
pub fn simpson(mut f: impl FnMut(f64) -> Result<f64>, a: f64, b: f64, steps: usize) -> Result<f64> {
    if steps < 2 || steps % 2 != 0 {
        return Err(Error::InvalidArgument(format!(
            "Simpson quadrature needs an even number of intervals ≥ 2, got {steps}"
        )));
    }
    let h = (b - a) / steps as f64;
    let mut sum = f(a)? + f(b)?;
    for k in 1..steps {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(a + k as f64 * h)?;
    }
    Ok(sum * h / 3.0)
}

/// `∫₀ᵀ H(t, φ, φ̇) dt` by composite Simpson.
pub fn action<F, Z, C>(family: &F, field: &Z, curve: &C, steps: usize) -> Result<f64>
where
    F: MetricFamily + ?Sized,
    Z: VectorField + ?Sized,
    C: Curve + ?Sized,
{
    simpson(
        |t| {
            let x = curve.position(t);
            Ok(om_lagrangian(family, field, t, x.as_slice(), &curve.velocity(t))?.total)
        },
        0.0,
        curve.horizon(),
        steps,
    )
}

/// `H` sampled at `steps + 1` uniform times along a curve.
pub fn lagrangian_series<F, Z, C>(family: &F, field: &Z, curve: &C, steps: usize) -> Result<Vec<LagrangianSample>>
where
    F: MetricFamily + ?Sized,
    Z: VectorField + ?Sized,
    C: Curve + ?Sized,
{
    let steps = steps.max(1);
    (0..=steps)
        .map(|k| {
            let t = curve.horizon() * k as f64 / steps as f64;
            let x = curve.position(t);
            om_lagrangian(family, field, t, x.as_slice(), &curve.velocity(t))
        })
        .collect()
}

/// Weighted Lagrangian `H̃` in either variant.
pub fn weighted_lagrangian<F, Z>(
    family: &F,
    field: &Z,
    weight: &WeightFunction,
    t: f64,
    x: &[f64],
    v: &DVector<f64>,
    variant: WeightedVariant,
) -> Result<LagrangianSample>
where
    F: MetricFamily + ?Sized,
    Z: VectorField + ?Sized,
{
    let f = weight.value(t);
    if !(f > 0.0 && f >= weight.f_min()) {
        return Err(Error::NonPositiveWeight { t, value: f });
    }
    match variant {
        WeightedVariant::TimeChanged => {
            // H̃ dt = H_u du with du = f⁻² dt and velocity dx/du = f² v
            let view = TimeChangedFamily::at_physical_time(family, weight.clone());
            let drift = TimeChangedField::at_physical_time(field, weight.clone());
            let s = om_lagrangian(&view, &drift, t, x, &(v * (f * f)))?;
            let back = 1.0 / (f * f);
            Ok(LagrangianSample::assemble(
                t,
                s.kinetic * back,
                s.div_term * back,
                s.scalar_term * back,
                s.trace_term * back,
            ))
        }
        WeightedVariant::Printed => {
            let g = geometry::metric_at(family, t, x)?;
            let w = field.value(t, x) - v;
            let kinetic = w.dot(&(&g * &w));
            let div_term = 0.5 * geometry::divergence(family, field, t, x)?;
            let scalar_term = -geometry::scalar_curvature(family, t, x)? / 12.0;
            let trace_term = 0.25 / (f * f) * geometry::trace_gdot(family, t, x)?;
            let n = family.dim() as f64;
            let weight_term = -0.5 * n * weight.derivative(t) / (f * f * f);
            Ok(LagrangianSample {
                t,
                kinetic,
                div_term,
                scalar_term,
                trace_term,
                weight_term,
                kinetic_coefficient: 1.0,
                total: kinetic + div_term + scalar_term + trace_term + weight_term,
            })
        }
    }
}

/// `∫₀ᵀ H̃(t, φ, φ̇) dt` by composite Simpson.
pub fn weighted_action<F, Z, C>(
    family: &F,
    field: &Z,
    weight: &WeightFunction,
    curve: &C,
    steps: usize,
    variant: WeightedVariant,
) -> Result<f64>
where
    F: MetricFamily + ?Sized,
    Z: VectorField + ?Sized,
    C: Curve + ?Sized,
{
    weight.validate(curve.horizon())?;
    simpson(
        |t| {
            let x = curve.position(t);
            Ok(weighted_lagrangian(family, field, weight, t, x.as_slice(), &curve.velocity(t), variant)?.total)
        },
        0.0,
        curve.horizon(),
        steps,
    )
}
