//! Built-in metric families. Each admits closed forms for every geometric quantity
//! the rest of the crate needs.

use std::sync::Arc;

use nalgebra::DMatrix;

use super::MetricFamily;
use crate::error::{Error, Result};

/// Axis-aligned chart domain `[lo_1, hi_1] × … × [lo_n, hi_n]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChartBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl ChartBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() || lo.iter().zip(&hi).any(|(a, b)| !(a < b)) {
            return Err(Error::InvalidArgument(format!("bad chart box {lo:?} .. {hi:?}")));
        }
        Ok(Self { lo, hi })
    }

    /// The cube `[-half_width, half_width]^n`.
    pub fn cube(n: usize, half_width: f64) -> Self {
        Self { lo: vec![-half_width; n], hi: vec![half_width; n] }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    #[inline]
    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.lo.len()
            && x.iter().zip(self.lo.iter().zip(&self.hi)).all(|(v, (a, b))| *v >= *a && *v <= *b)
    }

    pub fn diameter(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(a, b)| (b - a) * (b - a)).sum::<f64>().sqrt()
    }
}

fn check_horizon(horizon: f64) -> Result<()> {
    if horizon > 0.0 && horizon.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("horizon must be positive, got {horizon}")))
    }
}

/// Static Euclidean metric `δ_ij` on ℝⁿ.
#[derive(Debug, Clone)]
pub struct EuclideanFamily {
    horizon: f64,
    domain: ChartBox,
}

impl EuclideanFamily {
    pub fn new(dim: usize, horizon: f64) -> Result<Self> {
        Self::with_domain(ChartBox::cube(dim, 1e3), horizon)
    }

    pub fn with_domain(domain: ChartBox, horizon: f64) -> Result<Self> {
        check_horizon(horizon)?;
        Ok(Self { horizon, domain })
    }
}

impl MetricFamily for EuclideanFamily {
    #[inline]
    fn dim(&self) -> usize {
        self.domain.dim()
    }
    #[inline]
    fn horizon(&self) -> f64 {
        self.horizon
    }
    #[inline]
    fn domain(&self) -> &ChartBox {
        &self.domain
    }
    fn metric(&self, _t: f64, _x: &[f64]) -> DMatrix<f64> {
        DMatrix::identity(self.dim(), self.dim())
    }
    fn metric_dt(&self, _t: f64, _x: &[f64]) -> DMatrix<f64> {
        DMatrix::zeros(self.dim(), self.dim())
    }
    fn metric_dx(&self, _t: f64, _x: &[f64], _k: usize) -> DMatrix<f64> {
        DMatrix::zeros(self.dim(), self.dim())
    }
    fn metric_dxdx(&self, _t: f64, _x: &[f64], _k: usize, _l: usize) -> DMatrix<f64> {
        DMatrix::zeros(self.dim(), self.dim())
    }
    #[inline]
    fn closed_form_distance(&self, _t: f64, x: &[f64], y: &[f64]) -> Option<f64> {
        Some(x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt())
    }
    fn closed_form_scalar_curvature(&self, _t: f64, _x: &[f64]) -> Option<f64> {
        Some(0.0)
    }
    fn closed_form_trace_gdot(&self, _t: f64, _x: &[f64]) -> Option<f64> {
        Some(0.0)
    }
    #[inline]
    fn sde_coefficients(&self, _t: f64, _x: &[f64], drift: &mut [f64], sigma: &mut [f64]) {
        let n = self.dim();
        drift.iter_mut().for_each(|d| *d = 0.0);
        sigma.iter_mut().for_each(|s| *s = 0.0);
        for i in 0..n {
            sigma[i * n + i] = 1.0;
        }
    }
    fn homogeneous_sde(&self) -> bool {
        true
    }
    fn name(&self) -> String {
        "euclidean".into()
    }
}

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Conformally flat family `g(t) = e^{2λ(t)} δ` with a space-independent `λ`.
#[derive(Clone)]
pub struct ConformalFamily {
    lambda: ScalarFn,
    lambda_dot: ScalarFn,
    horizon: f64,
    domain: ChartBox,
}

impl std::fmt::Debug for ConformalFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ConformalFamily")
            .field("horizon", &self.horizon)
            .field("domain", &self.domain)
            .finish_non_exhaustive()
    }
}

impl ConformalFamily {
    pub fn new(
        domain: ChartBox,
        horizon: f64,
        lambda: impl Fn(f64) -> f64 + Send + Sync + 'static,
        lambda_dot: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        check_horizon(horizon)?;
        Ok(Self { lambda: Arc::new(lambda), lambda_dot: Arc::new(lambda_dot), horizon, domain })
    }

    /// `λ(t) = rate · t`.
    pub fn linear(dim: usize, rate: f64, horizon: f64) -> Result<Self> {
        Self::new(ChartBox::cube(dim, 1e3), horizon, move |t| rate * t, move |_| rate)
    }

    #[inline]
    pub fn lambda(&self, t: f64) -> f64 {
        (self.lambda)(t)
    }

    pub fn lambda_dot(&self, t: f64) -> f64 {
        (self.lambda_dot)(t)
    }
}

impl MetricFamily for ConformalFamily {
    #[inline]
    fn dim(&self) -> usize {
        self.domain.dim()
    }
    #[inline]
    fn horizon(&self) -> f64 {
        self.horizon
    }
    #[inline]
    fn domain(&self) -> &ChartBox {
        &self.domain
    }
    fn metric(&self, t: f64, _x: &[f64]) -> DMatrix<f64> {
        DMatrix::identity(self.dim(), self.dim()) * (2.0 * self.lambda(t)).exp()
    }
    fn metric_dt(&self, t: f64, _x: &[f64]) -> DMatrix<f64> {
        let s = 2.0 * self.lambda_dot(t) * (2.0 * self.lambda(t)).exp();
        DMatrix::identity(self.dim(), self.dim()) * s
    }
    fn metric_dx(&self, _t: f64, _x: &[f64], _k: usize) -> DMatrix<f64> {
        DMatrix::zeros(self.dim(), self.dim())
    }
    fn metric_dxdx(&self, _t: f64, _x: &[f64], _k: usize, _l: usize) -> DMatrix<f64> {
        DMatrix::zeros(self.dim(), self.dim())
    }
    #[inline]
    fn closed_form_distance(&self, t: f64, x: &[f64], y: &[f64]) -> Option<f64> {
        let e = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        Some(self.lambda(t).exp() * e)
    }
    fn closed_form_scalar_curvature(&self, _t: f64, _x: &[f64]) -> Option<f64> {
        Some(0.0)
    }
    fn closed_form_trace_gdot(&self, t: f64, _x: &[f64]) -> Option<f64> {
        Some(2.0 * self.dim() as f64 * self.lambda_dot(t))
    }
    #[inline]
    fn sde_coefficients(&self, t: f64, _x: &[f64], drift: &mut [f64], sigma: &mut [f64]) {
        let n = self.dim();
        let s = (-self.lambda(t)).exp();
        drift.iter_mut().for_each(|d| *d = 0.0);
        sigma.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..n {
            sigma[i * n + i] = s;
        }
    }
    fn homogeneous_sde(&self) -> bool {
        true
    }
    fn name(&self) -> String {
        "conformal".into()
    }
}

/// Flat torus `ℝⁿ / Π L_i ℤ` with diagonal metric `g_ii(t) = a_i e^{b_i t}`, charted on
/// the fundamental box `[0, L_1] × … × [0, L_n]`.
#[derive(Debug, Clone)]
pub struct FlatTorus {
    coeffs: Vec<f64>,
    rates: Vec<f64>,
    periods: Vec<f64>,
    horizon: f64,
    domain: ChartBox,
}

impl FlatTorus {
    pub fn new(coeffs: Vec<f64>, rates: Vec<f64>, periods: Vec<f64>, horizon: f64) -> Result<Self> {
        check_horizon(horizon)?;
        let n = coeffs.len();
        if n == 0 || rates.len() != n || periods.len() != n {
            return Err(Error::InvalidArgument("torus parameter lengths differ".into()));
        }
        if coeffs.iter().any(|a| !(*a > 0.0)) || periods.iter().any(|l| !(*l > 0.0)) {
            return Err(Error::InvalidArgument("torus coefficients and periods must be positive".into()));
        }
        let domain = ChartBox::new(vec![0.0; n], periods.clone())?;
        Ok(Self { coeffs, rates, periods, horizon, domain })
    }

    /// Static torus with constant diagonal metric.
    pub fn constant(coeffs: Vec<f64>, horizon: f64) -> Result<Self> {
        let n = coeffs.len();
        Self::new(coeffs, vec![0.0; n], vec![2.0 * std::f64::consts::PI; n], horizon)
    }

    #[inline]
    fn diag(&self, t: f64) -> impl Iterator<Item = f64> + '_ {
        self.coeffs.iter().zip(&self.rates).map(move |(a, b)| a * (b * t).exp())
    }
}

impl MetricFamily for FlatTorus {
    #[inline]
    fn dim(&self) -> usize {
        self.coeffs.len()
    }
    #[inline]
    fn horizon(&self) -> f64 {
        self.horizon
    }
    #[inline]
    fn domain(&self) -> &ChartBox {
        &self.domain
    }
    fn metric(&self, t: f64, _x: &[f64]) -> DMatrix<f64> {
        DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(self.dim(), self.diag(t)))
    }
    fn metric_dt(&self, t: f64, _x: &[f64]) -> DMatrix<f64> {
        let d = self.diag(t).zip(&self.rates).map(|(g, b)| g * b);
        DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(self.dim(), d))
    }
    fn metric_dx(&self, _t: f64, _x: &[f64], _k: usize) -> DMatrix<f64> {
        DMatrix::zeros(self.dim(), self.dim())
    }
    fn metric_dxdx(&self, _t: f64, _x: &[f64], _k: usize, _l: usize) -> DMatrix<f64> {
        DMatrix::zeros(self.dim(), self.dim())
    }
    #[inline]
    fn closed_form_distance(&self, t: f64, x: &[f64], y: &[f64]) -> Option<f64> {
        let s: f64 = self
            .diag(t)
            .zip(x.iter().zip(y))
            .zip(&self.periods)
            .map(|((g, (a, b)), l)| {
                let d = (a - b).abs() % l;
                let d = d.min(l - d);
                g * d * d
            })
            .sum();
        Some(s.sqrt())
    }
    fn closed_form_scalar_curvature(&self, _t: f64, _x: &[f64]) -> Option<f64> {
        Some(0.0)
    }
    fn closed_form_trace_gdot(&self, _t: f64, _x: &[f64]) -> Option<f64> {
        Some(self.rates.iter().sum())
    }
    fn injectivity_radius(&self, t: f64) -> f64 {
        self.diag(t).zip(&self.periods).map(|(g, l)| 0.5 * l * g.sqrt()).fold(f64::INFINITY, f64::min)
    }
    #[inline]
    fn sde_coefficients(&self, t: f64, _x: &[f64], drift: &mut [f64], sigma: &mut [f64]) {
        let n = self.dim();
        drift.iter_mut().for_each(|d| *d = 0.0);
        sigma.iter_mut().for_each(|v| *v = 0.0);
        for (i, g) in self.diag(t).enumerate() {
            sigma[i * n + i] = 1.0 / g.sqrt();
        }
    }
    fn homogeneous_sde(&self) -> bool {
        true
    }
    fn name(&self) -> String {
        "torus".into()
    }
}

/// Round sphere `Sⁿ` evolving under `∂_t g = α Ric`, in the stereographic chart from the
/// north pole (the chart origin is the south pole):
/// `g(t, x) = c(t) · 4 / (1 + |x|²)² · δ` with `c(t) = c₀ + α (n − 1) t`.
#[derive(Debug, Clone)]
pub struct RicciFlowSphere {
    n: usize,
    alpha: f64,
    c0: f64,
    horizon: f64,
    domain: ChartBox,
}

impl RicciFlowSphere {
    pub fn new(n: usize, alpha: f64, c0: f64, horizon: f64) -> Result<Self> {
        Self::with_half_width(n, alpha, c0, horizon, 10.0)
    }

    pub fn with_half_width(n: usize, alpha: f64, c0: f64, horizon: f64, half_width: f64) -> Result<Self> {
        check_horizon(horizon)?;
        if !(2..=3).contains(&n) {
            return Err(Error::InvalidArgument(format!("sphere dimension must be 2 or 3, got {n}")));
        }
        let s = Self { n, alpha, c0, horizon, domain: ChartBox::cube(n, half_width) };
        if !(s.scale(0.0) > 0.0 && s.scale(horizon) > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "scale factor c(t) = {c0} + {alpha}·{}·t vanishes on [0, {horizon}]",
                n - 1
            )));
        }
        Ok(s)
    }

    /// The static unit sphere.
    pub fn unit(n: usize, horizon: f64) -> Result<Self> {
        Self::new(n, 0.0, 1.0, horizon)
    }

    /// `c(t)`.
    #[inline]
    pub fn scale(&self, t: f64) -> f64 {
        self.c0 + self.alpha * (self.n as f64 - 1.0) * t
    }

    pub fn scale_rate(&self) -> f64 {
        self.alpha * (self.n as f64 - 1.0)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Point of the unit sphere in ℝⁿ⁺¹ for chart coordinates `x`.
    pub fn embed(x: &[f64]) -> Vec<f64> {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        let mut p: Vec<f64> = x.iter().map(|v| 2.0 * v / (1.0 + r2)).collect();
        p.push((r2 - 1.0) / (r2 + 1.0));
        p
    }

    #[inline]
    fn conformal(x: &[f64]) -> (f64, f64) {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        let s = 1.0 + r2;
        (r2, s)
    }
}

impl MetricFamily for RicciFlowSphere {
    #[inline]
    fn dim(&self) -> usize {
        self.n
    }
    #[inline]
    fn horizon(&self) -> f64 {
        self.horizon
    }
    #[inline]
    fn domain(&self) -> &ChartBox {
        &self.domain
    }
    fn metric(&self, t: f64, x: &[f64]) -> DMatrix<f64> {
        let (_, s) = Self::conformal(x);
        DMatrix::identity(self.n, self.n) * (4.0 * self.scale(t) / (s * s))
    }
    fn metric_dt(&self, _t: f64, x: &[f64]) -> DMatrix<f64> {
        let (_, s) = Self::conformal(x);
        DMatrix::identity(self.n, self.n) * (4.0 * self.scale_rate() / (s * s))
    }
    fn metric_dx(&self, t: f64, x: &[f64], k: usize) -> DMatrix<f64> {
        let (_, s) = Self::conformal(x);
        let v = -16.0 * self.scale(t) * x[k] / (s * s * s);
        DMatrix::identity(self.n, self.n) * v
    }
    fn metric_dxdx(&self, t: f64, x: &[f64], k: usize, l: usize) -> DMatrix<f64> {
        let (_, s) = Self::conformal(x);
        let c = self.scale(t);
        let delta = if k == l { 1.0 } else { 0.0 };
        let v = -16.0 * c * delta / (s * s * s) + 96.0 * c * x[k] * x[l] / (s * s * s * s);
        DMatrix::identity(self.n, self.n) * v
    }
    #[inline]
    fn closed_form_distance(&self, t: f64, x: &[f64], y: &[f64]) -> Option<f64> {
        let p = Self::embed(x);
        let q = Self::embed(y);
        let chord = p.iter().zip(&q).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        let angle = 2.0 * (0.5 * chord).min(1.0).asin();
        Some(self.scale(t).sqrt() * angle)
    }
    fn closed_form_scalar_curvature(&self, t: f64, _x: &[f64]) -> Option<f64> {
        let n = self.n as f64;
        Some(n * (n - 1.0) / self.scale(t))
    }
    fn closed_form_trace_gdot(&self, t: f64, _x: &[f64]) -> Option<f64> {
        Some(self.n as f64 * self.scale_rate() / self.scale(t))
    }
    fn injectivity_radius(&self, t: f64) -> f64 {
        0.9 * std::f64::consts::PI * self.scale(t).sqrt()
    }
    #[inline]
    fn sde_coefficients(&self, t: f64, x: &[f64], drift: &mut [f64], sigma: &mut [f64]) {
        // g = e^{2u} δ with e^u = 2√c / (1 + r²)
        let n = self.n;
        let (_, s) = Self::conformal(x);
        let c = self.scale(t);
        let k = -(n as f64 - 2.0) * s / (4.0 * c);
        for i in 0..n {
            drift[i] = k * x[i];
        }
        sigma.iter_mut().for_each(|v| *v = 0.0);
        let sig = s / (2.0 * c.sqrt());
        for i in 0..n {
            sigma[i * n + i] = sig;
        }
    }
    fn name(&self) -> String {
        "sphere".into()
    }
}

type MetricFn = Arc<dyn Fn(f64, &[f64]) -> DMatrix<f64> + Send + Sync>;

/// A family given only by its metric components; every derivative is a finite difference.
#[derive(Clone)]
pub struct CustomFamily {
    metric: MetricFn,
    horizon: f64,
    domain: ChartBox,
    fd_step: Option<f64>,
}

impl std::fmt::Debug for CustomFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CustomFamily")
            .field("horizon", &self.horizon)
            .field("domain", &self.domain)
            .finish_non_exhaustive()
    }
}

impl CustomFamily {
    pub fn new(
        domain: ChartBox,
        horizon: f64,
        metric: impl Fn(f64, &[f64]) -> DMatrix<f64> + Send + Sync + 'static,
    ) -> Result<Self> {
        check_horizon(horizon)?;
        Ok(Self { metric: Arc::new(metric), horizon, domain, fd_step: None })
    }

    pub fn with_fd_step(mut self, h: f64) -> Self {
        self.fd_step = Some(h);
        self
    }
}

impl MetricFamily for CustomFamily {
    #[inline]
    fn dim(&self) -> usize {
        self.domain.dim()
    }
    #[inline]
    fn horizon(&self) -> f64 {
        self.horizon
    }
    #[inline]
    fn domain(&self) -> &ChartBox {
        &self.domain
    }
    fn metric(&self, t: f64, x: &[f64]) -> DMatrix<f64> {
        (self.metric)(t, x)
    }
    fn fd_step(&self) -> f64 {
        self.fd_step.unwrap_or_else(|| 1e-5 * self.domain.diameter())
    }
}
