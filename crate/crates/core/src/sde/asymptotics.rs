use serde::Serialize;

use super::{lambda1_dirichlet, TubeEstimate};
use crate::error::{Error, Result};
use crate::geometry::{MetricFamily, VectorField};
use crate::lagrangian::{simpson, weighted_action, WeightFunction, WeightedVariant, DEFAULT_QUADRATURE_STEPS};
use crate::transport::Curve;

/// Leading-order small-ball prediction
/// `P ≈ C · exp(−λ₁ ∫₀ᵀ f⁻² / ε²) · exp(−∫₀ᵀ H̃)`.
#[derive(Debug, Clone, Serialize)]
pub struct AsymptoticPrediction {
    pub epsilon: f64,
    pub lambda1: f64,
    /// `∫₀ᵀ f⁻²`.
    pub weight_integral: f64,
    /// `λ₁ ∫₀ᵀ f⁻² / ε²`.
    pub decay_exponent: f64,
    /// `∫₀ᵀ H̃` (time-changed variant).
    pub action: f64,
    /// `exp(−∫₀ᵀ H̃)`.
    pub action_factor: f64,
    pub constant_c: Option<f64>,
}

impl AsymptoticPrediction {
    /// `ln P` predicted with the given constant (or the calibrated one), if any.
    pub fn log_probability(&self) -> Option<f64> {
        self.constant_c.map(|c| c.ln() - self.decay_exponent - self.action)
    }

    pub fn with_constant(mut self, c: f64) -> Self {
        self.constant_c = Some(c);
        self
    }
}

pub fn asymptotic_prediction<F, Z, C>(
    family: &F,
    field: &Z,
    curve: &C,
    weight: &WeightFunction,
    epsilon: f64,
) -> Result<AsymptoticPrediction>
where
    F: MetricFamily + ?Sized,
    Z: VectorField + ?Sized,
    C: Curve + ?Sized,
{
    if !(epsilon > 0.0) {
        return Err(Error::InvalidArgument(format!("ε must be positive, got {epsilon}")));
    }
    let horizon = curve.horizon();
    let lambda1 = lambda1_dirichlet(family.dim())?;
    weight.validate(horizon)?;
    let weight_integral = simpson(
        |t| {
            let f = weight.value(t);
            Ok(1.0 / (f * f))
        },
        0.0,
        horizon,
        DEFAULT_QUADRATURE_STEPS,
    )?;
    let action = weighted_action(family, field, weight, curve, DEFAULT_QUADRATURE_STEPS, WeightedVariant::TimeChanged)?;
    Ok(AsymptoticPrediction {
        epsilon,
        lambda1,
        weight_integral,
        decay_exponent: lambda1 * weight_integral / (epsilon * epsilon),
        action,
        action_factor: (-action).exp(),
        constant_c: None,
    })
}

/// The constant for `n = 1`, read off the leading term of the eigenfunction series of
/// Brownian motion in an interval: `4/π`. No other dimension has a reference value.
pub fn reference_constant(n: usize) -> Option<f64> {
    (n == 1).then_some(4.0 / std::f64::consts::PI)
}

/// Least-squares fit of `ln p̂ + λ₁∫f⁻²/ε² + ∫H̃ = ln C + b ε²`.
#[derive(Debug, Clone, Serialize)]
pub struct Calibration {
    pub constant_c: f64,
    pub slope: f64,
    pub epsilons: Vec<f64>,
    /// Left-hand side of the fit at each ε.
    pub adjusted_log_p: Vec<f64>,
}

pub fn calibrate_constant<F, Z, C>(
    family: &F,
    field: &Z,
    curve: &C,
    weight: &WeightFunction,
    estimates: &[TubeEstimate],
) -> Result<Calibration>
where
    F: MetricFamily + ?Sized,
    Z: VectorField + ?Sized,
    C: Curve + ?Sized,
{
    let usable: Vec<&TubeEstimate> = estimates.iter().filter(|e| e.n_hits > 0).collect();
    if usable.len() < 2 {
        return Err(Error::DegenerateRatio);
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for e in &usable {
        let pred = asymptotic_prediction(family, field, curve, weight, e.epsilon)?;
        xs.push(e.epsilon * e.epsilon);
        ys.push(e.p_hat.ln() + pred.decay_exponent + pred.action);
    }
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("calibration needs at least two distinct ε".into()));
    }
    let slope = sxy / sxx;
    Ok(Calibration {
        constant_c: (my - slope * mx).exp(),
        slope,
        epsilons: usable.iter().map(|e| e.epsilon).collect(),
        adjusted_log_p: ys,
    })
}
