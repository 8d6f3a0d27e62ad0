use std::sync::Arc;

use crate::error::{Error, Result};

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A positive `C¹` weight `f` on `[0, T]`, scaling the tube radius to `ε f(t)`.
#[derive(Clone)]
pub struct WeightFunction {
    f: ScalarFn,
    f_prime: ScalarFn,
    f_min: f64,
    unit: bool,
    label: String,
}

impl std::fmt::Debug for WeightFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("WeightFunction").field("label", &self.label).field("f_min", &self.f_min).finish()
    }
}

impl WeightFunction {
    pub fn new(
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        f_prime: impl Fn(f64) -> f64 + Send + Sync + 'static,
        f_min: f64,
    ) -> Self {
        Self { f: Arc::new(f), f_prime: Arc::new(f_prime), f_min, unit: false, label: "custom".into() }
    }

    /// `f ≡ c`.
    pub fn constant(c: f64) -> Self {
        Self {
            f: Arc::new(move |_| c),
            f_prime: Arc::new(|_| 0.0),
            f_min: c,
            unit: c == 1.0,
            label: format!("constant({c})"),
        }
    }

    pub fn unit() -> Self {
        Self::constant(1.0)
    }

    /// `f(t) = e^{rate·t}`.
    pub fn exponential(rate: f64) -> Self {
        Self {
            f: Arc::new(move |t| (rate * t).exp()),
            f_prime: Arc::new(move |t| rate * (rate * t).exp()),
            f_min: 0.0,
            unit: rate == 0.0,
            label: format!("exponential({rate})"),
        }
    }

    pub fn with_floor(mut self, f_min: f64) -> Self {
        self.f_min = f_min;
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    #[inline]
    pub fn value(&self, t: f64) -> f64 {
        (self.f)(t)
    }

    #[inline]
    pub fn derivative(&self, t: f64) -> f64 {
        (self.f_prime)(t)
    }

    pub fn f_min(&self) -> f64 {
        self.f_min
    }

    /// True for `f ≡ 1`, where every weighted quantity reduces to the unweighted one.
    pub fn is_unit(&self) -> bool {
        self.unit
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Checks `f(t) ≥ f_min` and `f(t) > 0` on a grid of `[0, T]`.
    pub fn validate(&self, horizon: f64) -> Result<()> {
        const SAMPLES: usize = 1000;
        for k in 0..=SAMPLES {
            let t = horizon * k as f64 / SAMPLES as f64;
            let value = self.value(t);
            if !(value > 0.0 && value >= self.f_min && value.is_finite()) {
                return Err(Error::NonPositiveWeight { t, value });
            }
        }
        Ok(())
    }
}

// 5-point Gauss–Legendre on [−1, 1]
const GL_NODES: [f64; 5] = [
    0.0,
    -0.538_469_310_105_683_1,
    0.538_469_310_105_683_1,
    -0.906_179_845_938_664,
    0.906_179_845_938_664,
];
const GL_WEIGHTS: [f64; 5] = [
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
    0.236_926_885_056_189_1,
];
const GL_PANELS: usize = 64;
const TABLE_NODES: usize = 4096;

/// The clock change `u = δ⁻¹(t) = ∫₀ᵗ f⁻²` and its inverse `δ`.
#[derive(Clone, Debug)]
pub struct TimeChange {
    weight: WeightFunction,
    horizon: f64,
    total: f64,
    /// `(u_k, δ(u_k))` on a uniform grid in `u`, for Hermite interpolation.
    table: Arc<Vec<(f64, f64)>>,
}

impl TimeChange {
    pub fn new(weight: WeightFunction, horizon: f64) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::InvalidArgument(format!("horizon must be positive, got {horizon}")));
        }
        weight.validate(horizon)?;
        let mut tc = Self { weight, horizon, total: 0.0, table: Arc::new(Vec::new()) };
        tc.total = tc.delta_inv(horizon);
        let mut table = Vec::with_capacity(TABLE_NODES + 1);
        let mut guess = 0.0;
        for k in 0..=TABLE_NODES {
            let u = tc.total * k as f64 / TABLE_NODES as f64;
            let t = tc.solve(u, guess)?;
            table.push((u, t));
            guess = t;
        }
        tc.table = Arc::new(table);
        Ok(tc)
    }

    pub fn weight(&self) -> &WeightFunction {
        &self.weight
    }

    /// Physical horizon `T`.
    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Changed-clock horizon `∫₀ᵀ f⁻²`.
    pub fn total(&self) -> f64 {
        self.total
    }

    /// `∫₀ᵗ f(s)⁻² ds` by composite Gauss–Legendre quadrature.
    pub fn delta_inv(&self, t: f64) -> f64 {
        if t == 0.0 {
            return 0.0;
        }
        let h = t / GL_PANELS as f64;
        let mut sum = 0.0;
        for p in 0..GL_PANELS {
            let mid = (p as f64 + 0.5) * h;
            for (x, w) in GL_NODES.iter().zip(GL_WEIGHTS) {
                let f = self.weight.value(mid + 0.5 * h * x);
                sum += w / (f * f);
            }
        }
        0.5 * h * sum
    }

    /// `δ(u)`, the physical time at which `∫₀ᵗ f⁻² = u`, by safeguarded Newton iteration.
    pub fn delta(&self, u: f64) -> Result<f64> {
        let guess = self.delta_fast(u);
        self.solve(u, guess)
    }

    fn solve(&self, u: f64, guess: f64) -> Result<f64> {
        let slack = 1e-12 * self.total.max(1.0);
        if !(u >= -slack && u <= self.total + slack) || self.total == 0.0 && u != 0.0 {
            return Err(Error::InvalidArgument(format!("clock value {u} outside [0, {}]", self.total)));
        }
        if u <= 0.0 {
            return Ok(0.0);
        }
        let (mut lo, mut hi) = (0.0, self.horizon);
        let mut t = guess.clamp(lo, hi);
        for _ in 0..100 {
            let r = self.delta_inv(t) - u;
            if r == 0.0 {
                return Ok(t);
            }
            if r > 0.0 {
                hi = t;
            } else {
                lo = t;
            }
            let f = self.weight.value(t);
            let mut next = t - r * f * f;
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - t).abs() <= 1e-15 * t.max(1.0) || hi - lo <= 1e-15 * hi.max(1.0) {
                return Ok(next);
            }
            t = next;
        }
        Ok(t)
    }

    /// `δ(u)` by cubic Hermite interpolation of a precomputed table (`δ' = f(δ)²`).
    pub fn delta_fast(&self, u: f64) -> f64 {
        let table = &self.table;
        if table.is_empty() {
            return u.clamp(0.0, self.horizon);
        }
        let n = table.len() - 1;
        let h = self.total / n as f64;
        let pos = (u / h).clamp(0.0, n as f64);
        let i = (pos.floor() as usize).min(n - 1);
        let s = pos - i as f64;
        let (_, t0) = table[i];
        let (_, t1) = table[i + 1];
        let d0 = self.weight.value(t0).powi(2) * h;
        let d1 = self.weight.value(t1).powi(2) * h;
        let s2 = s * s;
        let s3 = s2 * s;
        (2.0 * s3 - 3.0 * s2 + 1.0) * t0 + (s3 - 2.0 * s2 + s) * d0 + (-2.0 * s3 + 3.0 * s2) * t1 + (s3 - s2) * d1
    }
}
