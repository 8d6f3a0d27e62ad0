//! The diffusion seen on the changed clock `u = ∫₀ᵗ f⁻²`: metric `f⁻² g`, drift `f² Z`,
//! curve `φ ∘ δ`. On that clock a tube of radius `ε f(t)` becomes a tube of radius `ε`.

use nalgebra::{DMatrix, DVector};

use super::{TimeChange, WeightFunction};
use crate::error::Result;
use crate::geometry::{ChartBox, MetricFamily, VectorField};
use crate::transport::Curve;

#[derive(Clone, Debug)]
enum Clock {
    /// Evaluate at physical time; only the spatial rescaling is applied.
    Physical(WeightFunction),
    Changed(TimeChange),
}

impl Clock {
    #[inline]
    fn weight(&self) -> &WeightFunction {
        match self {
            Clock::Physical(w) => w,
            Clock::Changed(tc) => tc.weight(),
        }
    }

    #[inline]
    fn physical(&self, u: f64) -> f64 {
        match self {
            Clock::Physical(_) => u,
            Clock::Changed(tc) => tc.delta_fast(u),
        }
    }
}

/// `g̃(u) = f(δ(u))⁻² g(δ(u))`; its time derivative is taken along the changed clock,
/// `∂_u g̃ = ġ − 2 (f′/f) g`.
#[derive(Clone, Debug)]
pub struct TimeChangedFamily<F> {
    base: F,
    clock: Clock,
}

impl<F: MetricFamily> TimeChangedFamily<F> {
    pub fn new(base: F, weight: WeightFunction) -> Result<Self> {
        let tc = TimeChange::new(weight, base.horizon())?;
        Ok(Self { base, clock: Clock::Changed(tc) })
    }

    /// Rescaled metric evaluated at physical time (no reparametrisation of `t`).
    pub(crate) fn at_physical_time(base: F, weight: WeightFunction) -> Self {
        Self { base, clock: Clock::Physical(weight) }
    }

    pub fn time_change(&self) -> Option<&TimeChange> {
        match &self.clock {
            Clock::Changed(tc) => Some(tc),
            Clock::Physical(_) => None,
        }
    }

    pub fn base(&self) -> &F {
        &self.base
    }

    #[inline]
    fn at(&self, u: f64) -> (f64, f64, f64) {
        let t = self.clock.physical(u);
        let w = self.clock.weight();
        (t, w.value(t), w.derivative(t))
    }
}

impl<F: MetricFamily> MetricFamily for TimeChangedFamily<F> {
    fn dim(&self) -> usize {
        self.base.dim()
    }
    fn horizon(&self) -> f64 {
        match &self.clock {
            Clock::Physical(_) => self.base.horizon(),
            Clock::Changed(tc) => tc.total(),
        }
    }
    fn domain(&self) -> &ChartBox {
        self.base.domain()
    }
    fn metric(&self, u: f64, x: &[f64]) -> DMatrix<f64> {
        let (t, f, _) = self.at(u);
        self.base.metric(t, x) * (1.0 / (f * f))
    }
    fn metric_dt(&self, u: f64, x: &[f64]) -> DMatrix<f64> {
        let (t, f, fp) = self.at(u);
        self.base.metric_dt(t, x) - self.base.metric(t, x) * (2.0 * fp / f)
    }
    fn metric_dx(&self, u: f64, x: &[f64], k: usize) -> DMatrix<f64> {
        let (t, f, _) = self.at(u);
        self.base.metric_dx(t, x, k) * (1.0 / (f * f))
    }
    fn metric_dxdx(&self, u: f64, x: &[f64], k: usize, l: usize) -> DMatrix<f64> {
        let (t, f, _) = self.at(u);
        self.base.metric_dxdx(t, x, k, l) * (1.0 / (f * f))
    }
    fn fd_step(&self) -> f64 {
        self.base.fd_step()
    }
    fn closed_form_distance(&self, u: f64, x: &[f64], y: &[f64]) -> Option<f64> {
        let (t, f, _) = self.at(u);
        self.base.closed_form_distance(t, x, y).map(|d| d / f)
    }
    fn closed_form_scalar_curvature(&self, u: f64, x: &[f64]) -> Option<f64> {
        let (t, f, _) = self.at(u);
        self.base.closed_form_scalar_curvature(t, x).map(|r| r * (f * f))
    }
    fn closed_form_trace_gdot(&self, u: f64, x: &[f64]) -> Option<f64> {
        let (t, f, fp) = self.at(u);
        let n = self.base.dim() as f64;
        self.base
            .closed_form_trace_gdot(t, x)
            .map(|tr| (f * f) * (tr - 2.0 * n * fp / f))
    }
    fn injectivity_radius(&self, u: f64) -> f64 {
        let (t, f, _) = self.at(u);
        self.base.injectivity_radius(t) / f
    }
    fn sde_coefficients(&self, u: f64, x: &[f64], drift: &mut [f64], sigma: &mut [f64]) {
        let (t, f, _) = self.at(u);
        self.base.sde_coefficients(t, x, drift, sigma);
        let f2 = f * f;
        drift.iter_mut().for_each(|d| *d *= f2);
        sigma.iter_mut().for_each(|s| *s *= f);
    }
    fn homogeneous_sde(&self) -> bool {
        self.base.homogeneous_sde()
    }
    fn name(&self) -> String {
        format!("{} (time-changed)", self.base.name())
    }
}

/// `Z̃(u, x) = f(δ(u))² Z(δ(u), x)`.
#[derive(Clone, Debug)]
pub struct TimeChangedField<Z> {
    base: Z,
    clock: Clock,
}

impl<Z: VectorField> TimeChangedField<Z> {
    pub fn new(base: Z, time_change: TimeChange) -> Self {
        Self { base, clock: Clock::Changed(time_change) }
    }

    pub(crate) fn at_physical_time(base: Z, weight: WeightFunction) -> Self {
        Self { base, clock: Clock::Physical(weight) }
    }
}

impl<Z: VectorField> VectorField for TimeChangedField<Z> {
    fn dim(&self) -> usize {
        self.base.dim()
    }
    fn eval(&self, u: f64, x: &[f64], out: &mut [f64]) {
        let t = self.clock.physical(u);
        let f = self.clock.weight().value(t);
        self.base.eval(t, x, out);
        let f2 = f * f;
        out.iter_mut().for_each(|z| *z *= f2);
    }
    fn jacobian(&self, u: f64, x: &[f64]) -> DMatrix<f64> {
        let t = self.clock.physical(u);
        let f = self.clock.weight().value(t);
        self.base.jacobian(t, x) * (f * f)
    }
    fn time_derivative(&self, u: f64, x: &[f64]) -> DVector<f64> {
        let t = self.clock.physical(u);
        let w = self.clock.weight();
        let (f, fp) = (w.value(t), w.derivative(t));
        (self.base.time_derivative(t, x) * (f * f) + self.base.value(t, x) * (2.0 * f * fp)) * (f * f)
    }
    fn is_zero(&self) -> bool {
        self.base.is_zero()
    }
}

/// `φ̃(u) = φ(δ(u))`, with `dφ̃/du = f² φ̇`.
#[derive(Clone, Debug)]
pub struct TimeChangedCurve<C> {
    base: C,
    time_change: TimeChange,
}

impl<C: Curve> TimeChangedCurve<C> {
    pub fn new(base: C, time_change: TimeChange) -> Self {
        Self { base, time_change }
    }
}

impl<C: Curve> Curve for TimeChangedCurve<C> {
    fn dim(&self) -> usize {
        self.base.dim()
    }
    fn horizon(&self) -> f64 {
        self.time_change.total()
    }
    fn position(&self, u: f64) -> DVector<f64> {
        self.base.position(self.time_change.delta_fast(u))
    }
    fn velocity(&self, u: f64) -> DVector<f64> {
        let t = self.time_change.delta_fast(u);
        let f = self.time_change.weight().value(t);
        self.base.velocity(t) * (f * f)
    }
    fn acceleration(&self, u: f64) -> DVector<f64> {
        let t = self.time_change.delta_fast(u);
        let w = self.time_change.weight();
        let (f, fp) = (w.value(t), w.derivative(t));
        (self.base.acceleration(t) * (f * f) + self.base.velocity(t) * (2.0 * f * fp)) * (f * f)
    }
}
