//! Simulation of `dX = (½Δ_{g(t)} + Z) dt`-diffusions in the chart, Monte Carlo
//! estimates of tube probabilities `P[d(t, X_t, φ(t)) ≤ ε f(t) ∀t ≤ T]`, and the
//! small-ball asymptotics they are compared with.
//!
//! Every path `i` draws its Gaussian increments from a ChaCha8 stream keyed by
//! `(seed, 2i)` and its bridge-test uniforms from `(seed, 2i + 1)`, so estimates do not
//! depend on how paths are distributed over threads.

mod asymptotics;
mod lambda;

pub use asymptotics::{
    asymptotic_prediction, calibrate_constant, reference_constant, AsymptoticPrediction, Calibration,
};
pub use lambda::{first_bessel_zero, lambda1_dirichlet};

use std::sync::Arc;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{self, MetricFamily, VectorField};
use crate::lagrangian::{action, WeightFunction, DEFAULT_QUADRATURE_STEPS};
use crate::transport::Curve;

/// Default number of Euler–Maruyama steps over the horizon.
pub const DEFAULT_STEPS: usize = 4000;

/// `ln(10¹⁵)`: bridge-crossing probabilities below `e^{−34.5}` are treated as zero.
const BRIDGE_CUTOFF: f64 = 34.5;

/// The diffusion `L_t = ½Δ_{g(t)} + Z(t)` started at `x0` on `[0, T]`.
#[derive(Debug, Clone)]
pub struct DiffusionSpec<F, Z> {
    pub family: F,
    pub field: Z,
    pub x0: DVector<f64>,
    pub horizon: f64,
    pub dt: f64,
}

impl<F: MetricFamily, Z: VectorField> DiffusionSpec<F, Z> {
    /// Spec with the default step `T/4000`.
    pub fn new(family: F, field: Z, x0: DVector<f64>, horizon: f64) -> Result<Self> {
        let spec = Self { family, field, x0, horizon, dt: horizon / DEFAULT_STEPS as f64 };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_dt(mut self, dt: f64) -> Result<Self> {
        self.dt = dt;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidArgument(format!("time step must be positive, got {}", self.dt)));
        }
        if !(self.horizon > 0.0) || self.horizon > self.family.horizon() * (1.0 + 1e-12) {
            return Err(Error::InvalidArgument(format!(
                "horizon {} must lie in (0, {}]",
                self.horizon,
                self.family.horizon()
            )));
        }
        if self.field.dim() != self.family.dim() {
            return Err(Error::InvalidArgument("drift dimension does not match the family".into()));
        }
        geometry::check_point(&self.family, 0.0, self.x0.as_slice())
    }

    /// Number of steps and the step actually used (`T / steps`).
    pub fn grid(&self) -> (usize, f64) {
        let steps = ((self.horizon / self.dt).round() as usize).max(1);
        (steps, self.horizon / steps as f64)
    }
}

/// Gaussian and uniform streams of one path.
fn path_rngs(seed: u64, path: u64) -> (ChaCha8Rng, ChaCha8Rng) {
    let mut normals = ChaCha8Rng::seed_from_u64(seed);
    normals.set_stream(2 * path);
    let mut uniforms = ChaCha8Rng::seed_from_u64(seed);
    uniforms.set_stream(2 * path + 1);
    (normals, uniforms)
}

/// Euler–Maruyama stepper on the grid `t_k = k Δt`. Spatially homogeneous coefficients
/// are tabulated once (already multiplied by `Δt` and `√Δt`).
struct Stepper<'a, F, Z> {
    spec: &'a DiffusionSpec<F, Z>,
    n: usize,
    dt: f64,
    sqrt_dt: f64,
    table: Option<Arc<(Vec<f64>, Vec<f64>)>>,
    drift: Vec<f64>,
    sigma: Vec<f64>,
    z: Vec<f64>,
    xi: Vec<f64>,
}

impl<F, Z> Clone for Stepper<'_, F, Z> {
    fn clone(&self) -> Self {
        Self {
            spec: self.spec,
            n: self.n,
            dt: self.dt,
            sqrt_dt: self.sqrt_dt,
            table: self.table.clone(),
            drift: self.drift.clone(),
            sigma: self.sigma.clone(),
            z: self.z.clone(),
            xi: self.xi.clone(),
        }
    }
}

impl<'a, F: MetricFamily, Z: VectorField> Stepper<'a, F, Z> {
    fn new(spec: &'a DiffusionSpec<F, Z>, steps: usize, dt: f64) -> Self {
        let n = spec.family.dim();
        let sqrt_dt = dt.sqrt();
        let table = spec.family.homogeneous_sde().then(|| {
            let mut drift = vec![0.0; steps * n];
            let mut sigma = vec![0.0; steps * n * n];
            for k in 0..steps {
                let (d, s) = (&mut drift[k * n..(k + 1) * n], &mut sigma[k * n * n..(k + 1) * n * n]);
                spec.family.sde_coefficients(k as f64 * dt, spec.x0.as_slice(), d, s);
                d.iter_mut().for_each(|v| *v *= dt);
                s.iter_mut().for_each(|v| *v *= sqrt_dt);
            }
            Arc::new((drift, sigma))
        });
        Self {
            spec,
            n,
            dt,
            sqrt_dt,
            table,
            drift: vec![0.0; n],
            sigma: vec![0.0; n * n],
            z: vec![0.0; n],
            xi: vec![0.0; n],
        }
    }

    /// Step `k → k + 1`; returns false when the new point leaves the chart
    /// (a non-finite point is never contained in the chart box).
    #[inline]
    fn step(&mut self, k: usize, x: &mut [f64], rng: &mut ChaCha8Rng) -> bool {
        let n = self.n;
        let t = k as f64 * self.dt;
        let (drift, sigma): (&[f64], &[f64]) = match self.table.as_deref() {
            Some((d, s)) => (&d[k * n..(k + 1) * n], &s[k * n * n..(k + 1) * n * n]),
            None => {
                self.spec.family.sde_coefficients(t, x, &mut self.drift, &mut self.sigma);
                self.drift.iter_mut().for_each(|v| *v *= self.dt);
                self.sigma.iter_mut().for_each(|v| *v *= self.sqrt_dt);
                (&self.drift, &self.sigma)
            }
        };
        let field = !self.spec.field.is_zero();
        if field {
            self.spec.field.eval(t, x, &mut self.z);
        }
        for v in self.xi.iter_mut() {
            *v = rng.sample::<f64, _>(StandardNormal);
        }
        for (i, row) in sigma.chunks_exact(n).enumerate() {
            let noise: f64 = row.iter().zip(&self.xi).map(|(s, e)| s * e).sum();
            let z = if field { self.z[i] * self.dt } else { 0.0 };
            x[i] += drift[i] + z + noise;
        }
        self.spec.family.domain().contains(x)
    }
}

/// A simulated path on the Euler–Maruyama grid.
#[derive(Debug, Clone)]
pub struct SimulatedPath {
    pub times: Vec<f64>,
    pub points: Vec<DVector<f64>>,
    /// Set when the path left the chart; `points` stops at the last in-chart point.
    pub exited: bool,
}

/// Simulates path number `path` of the ensemble keyed by `seed`.
pub fn simulate_path<F, Z>(spec: &DiffusionSpec<F, Z>, seed: u64, path: u64) -> Result<SimulatedPath>
where
    F: MetricFamily,
    Z: VectorField,
{
    spec.validate()?;
    let (steps, dt) = spec.grid();
    let (mut rng, _) = path_rngs(seed, path);
    let mut stepper = Stepper::new(spec, steps, dt);
    let mut x: Vec<f64> = spec.x0.iter().copied().collect();
    let mut times = vec![0.0];
    let mut points = vec![spec.x0.clone()];
    for k in 0..steps {
        let inside = stepper.step(k, &mut x, &mut rng);
        if !inside {
            return Ok(SimulatedPath { times, points, exited: true });
        }
        times.push((k + 1) as f64 * dt);
        points.push(DVector::from_column_slice(&x));
    }
    Ok(SimulatedPath { times, points, exited: false })
}

/// Monte Carlo execution options.
#[derive(Debug, Clone)]
pub struct McOptions {
    /// Worker threads; `None` uses rayon's default (available cores).
    pub threads: Option<usize>,
    /// Kill paths that cross the tube wall between grid points, with the Brownian-bridge
    /// crossing probability `exp(−2 m_k m_{k+1} / Δt)` (`m` = distance to the wall).
    pub bridge_correction: bool,
}

impl Default for McOptions {
    fn default() -> Self {
        Self { threads: None, bridge_correction: true }
    }
}

fn run_parallel<T: Send>(threads: Option<usize>, job: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        Some(0) => Err(Error::InvalidArgument("thread count must be positive".into())),
        Some(k) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(k)
                .build()
                .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
            Ok(pool.install(job))
        }
        None => Ok(job()),
    }
}

/// Tube centre and radius sampled on the simulation grid.
struct Tube {
    dim: usize,
    centers: Vec<f64>,
    radii: Vec<f64>,
}

impl Tube {
    fn new<C: Curve + ?Sized>(curve: &C, weight: &WeightFunction, epsilon: f64, steps: usize, dt: f64) -> Self {
        let dim = curve.dim();
        let mut centers = Vec::with_capacity((steps + 1) * dim);
        let mut radii = Vec::with_capacity(steps + 1);
        for k in 0..=steps {
            let t = k as f64 * dt;
            centers.extend(curve.position(t).iter());
            radii.push(epsilon * weight.value(t));
        }
        Self { dim, centers, radii }
    }

    #[inline]
    fn center(&self, k: usize) -> &[f64] {
        &self.centers[k * self.dim..(k + 1) * self.dim]
    }
}

/// Outcome of one path against up to two tubes.
#[derive(Clone, Copy, Default)]
struct PathOutcome {
    hit: [bool; 2],
    exited: bool,
}

fn run_path<F: MetricFamily, Z: VectorField>(
    stepper: &mut Stepper<'_, F, Z>,
    tubes: &[&Tube],
    steps: usize,
    seed: u64,
    path: u64,
    bridge: bool,
    x: &mut Vec<f64>,
) -> PathOutcome {
    let spec = stepper.spec;
    let dt = stepper.dt;
    let (mut normals, mut uniforms) = path_rngs(seed, path);
    x.clear();
    x.extend(spec.x0.iter());
    let mut alive = [false; 2];
    let mut margin = [0.0; 2];
    for (j, tube) in tubes.iter().enumerate() {
        let d = geometry::distance(&spec.family, 0.0, x, tube.center(0));
        margin[j] = tube.radii[0] - d;
        alive[j] = margin[j] >= 0.0;
    }
    let mut out = PathOutcome::default();
    for k in 0..steps {
        if !alive.iter().take(tubes.len()).any(|&a| a) {
            return out;
        }
        if !stepper.step(k, x, &mut normals) {
            out.exited = true;
            return out;
        }
        let t1 = (k + 1) as f64 * dt;
        let mut need_uniform = false;
        let mut crossing = [0.0; 2];
        for (j, tube) in tubes.iter().enumerate() {
            if !alive[j] {
                continue;
            }
            let d = geometry::distance(&spec.family, t1, x, tube.center(k + 1));
            let m = tube.radii[k + 1] - d;
            if m < 0.0 {
                alive[j] = false;
                continue;
            }
            if bridge {
                let exponent = 2.0 * margin[j] * m / dt;
                if exponent < BRIDGE_CUTOFF {
                    crossing[j] = (-exponent).exp();
                    need_uniform = true;
                }
            }
            margin[j] = m;
        }
        if need_uniform {
            // one uniform per step shared by all tubes, so identical tubes decide identically
            let u: f64 = uniforms.random();
            for j in 0..tubes.len() {
                if alive[j] && u < crossing[j] {
                    alive[j] = false;
                }
            }
        }
    }
    for j in 0..tubes.len() {
        out.hit[j] = alive[j];
    }
    out
}

/// Monte Carlo estimate of a tube probability.
#[derive(Debug, Clone, Serialize)]
pub struct TubeEstimate {
    pub epsilon: f64,
    pub n_paths: u64,
    pub n_hits: u64,
    pub p_hat: f64,
    /// 95% interval: normal approximation, or the one-sided exact bound when `p̂ ∈ {0, 1}`.
    pub ci95: (f64, f64),
    pub seed: u64,
    pub dt: f64,
    /// Paths that left the chart (counted as misses).
    pub n_exited: u64,
}

/// 95% binomial interval as documented on [`TubeEstimate::ci95`].
pub fn binomial_ci95(hits: u64, n: u64) -> (f64, f64) {
    let nf = n as f64;
    if hits == 0 {
        return (0.0, 1.0 - 0.05f64.powf(1.0 / nf));
    }
    if hits == n {
        return (0.05f64.powf(1.0 / nf), 1.0);
    }
    let p = hits as f64 / nf;
    let half = 1.96 * (p * (1.0 - p) / nf).sqrt();
    ((p - half).max(0.0), (p + half).min(1.0))
}

fn check_tube_args<F: MetricFamily, Z: VectorField, C: Curve + ?Sized>(
    spec: &DiffusionSpec<F, Z>,
    curve: &C,
    epsilon: f64,
    n_paths: u64,
) -> Result<()> {
    spec.validate()?;
    if curve.dim() != spec.family.dim() {
        return Err(Error::InvalidArgument("curve dimension does not match the family".into()));
    }
    if curve.horizon() < spec.horizon * (1.0 - 1e-12) {
        return Err(Error::InvalidArgument("curve is shorter than the simulation horizon".into()));
    }
    if !(epsilon > 0.0 && epsilon.is_finite()) || n_paths == 0 {
        return Err(Error::InvalidArgument("need ε > 0 and at least one path".into()));
    }
    Ok(())
}

/// `P[∀t ≤ T: d(t, X_t, φ(t)) ≤ ε f(t)]` with default options.
pub fn tube_probability<F, Z, C>(
    spec: &DiffusionSpec<F, Z>,
    curve: &C,
    epsilon: f64,
    weight: &WeightFunction,
    n_paths: u64,
    seed: u64,
) -> Result<TubeEstimate>
where
    F: MetricFamily,
    Z: VectorField,
    C: Curve + ?Sized,
{
    tube_probability_with(spec, curve, epsilon, weight, n_paths, seed, &McOptions::default())
}

pub fn tube_probability_with<F, Z, C>(
    spec: &DiffusionSpec<F, Z>,
    curve: &C,
    epsilon: f64,
    weight: &WeightFunction,
    n_paths: u64,
    seed: u64,
    opts: &McOptions,
) -> Result<TubeEstimate>
where
    F: MetricFamily,
    Z: VectorField,
    C: Curve + ?Sized,
{
    check_tube_args(spec, curve, epsilon, n_paths)?;
    weight.validate(spec.horizon)?;
    let (steps, dt) = spec.grid();
    let tube = Tube::new(curve, weight, epsilon, steps, dt);
    let n = spec.family.dim();
    let stepper = Stepper::new(spec, steps, dt);
    let counts: Vec<(u64, u64)> = run_parallel(opts.threads, || {
        (0..n_paths)
            .into_par_iter()
            .map_init(
                || (stepper.clone(), Vec::with_capacity(n)),
                |(stepper, x), i| {
                    let o = run_path(stepper, &[&tube], steps, seed, i, opts.bridge_correction, x);
                    (o.hit[0] as u64, o.exited as u64)
                },
            )
            .collect()
    })?;
    let n_hits = counts.iter().map(|c| c.0).sum();
    let n_exited = counts.iter().map(|c| c.1).sum();
    Ok(TubeEstimate {
        epsilon,
        n_paths,
        n_hits,
        p_hat: n_hits as f64 / n_paths as f64,
        ci95: binomial_ci95(n_hits, n_paths),
        seed,
        dt,
        n_exited,
    })
}

/// Two tubes estimated on the same simulated paths.
#[derive(Debug, Clone, Serialize)]
pub struct RatioReport {
    pub epsilon: f64,
    pub n_paths: u64,
    pub seed: u64,
    pub hits_a: u64,
    pub hits_b: u64,
    /// Paths inside both tubes.
    pub joint_hits: u64,
    pub p_a: f64,
    pub p_b: f64,
    /// `p̂_a / p̂_b`.
    pub ratio: f64,
    /// Delta-method 95% interval for the ratio (accounts for the shared paths).
    pub ci95: (f64, f64),
    /// `exp(E(φ_b) − E(φ_a))`.
    pub theory_ratio: f64,
    pub action_a: f64,
    pub action_b: f64,
}

/// Delta-method standard error of `p̂_a / p̂_b` from counts on shared paths.
pub fn ratio_standard_error(hits_a: u64, hits_b: u64, joint: u64, n: u64) -> f64 {
    let nf = n as f64;
    let (pa, pb, pab) = (hits_a as f64 / nf, hits_b as f64 / nf, joint as f64 / nf);
    let r = pa / pb;
    let var = (pa * (1.0 - pa) / (pa * pa) + pb * (1.0 - pb) / (pb * pb) - 2.0 * (pab - pa * pb) / (pa * pb)) / nf;
    r * var.max(0.0).sqrt()
}

/// Estimates `P_a / P_b` for tubes of radius `ε` around two curves leaving the same point.
pub fn ratio_experiment<F, Z, A, B>(
    spec: &DiffusionSpec<F, Z>,
    curve_a: &A,
    curve_b: &B,
    epsilon: f64,
    n_paths: u64,
    seed: u64,
) -> Result<RatioReport>
where
    F: MetricFamily,
    Z: VectorField,
    A: Curve + ?Sized,
    B: Curve + ?Sized,
{
    ratio_experiment_with(spec, curve_a, curve_b, epsilon, n_paths, seed, &McOptions::default())
}

#[allow(clippy::too_many_arguments)]
pub fn ratio_experiment_with<F, Z, A, B>(
    spec: &DiffusionSpec<F, Z>,
    curve_a: &A,
    curve_b: &B,
    epsilon: f64,
    n_paths: u64,
    seed: u64,
    opts: &McOptions,
) -> Result<RatioReport>
where
    F: MetricFamily,
    Z: VectorField,
    A: Curve + ?Sized,
    B: Curve + ?Sized,
{
    check_tube_args(spec, curve_a, epsilon, n_paths)?;
    check_tube_args(spec, curve_b, epsilon, n_paths)?;
    let horizon = spec.horizon;
    // Both tubes must start from the same point; the far ends may differ (the limit
    // still compares the two actions, it just is no longer a fixed-endpoint problem).
    let gap0 = (curve_a.position(0.0) - curve_b.position(0.0)).amax();
    if gap0 > 1e-9 {
        return Err(Error::InvalidArgument("ratio curves must start at the same point".into()));
    }
    let (steps, dt) = spec.grid();
    let unit = WeightFunction::unit();
    let ta = Tube::new(curve_a, &unit, epsilon, steps, dt);
    let tb = Tube::new(curve_b, &unit, epsilon, steps, dt);
    let n = spec.family.dim();
    let stepper = Stepper::new(spec, steps, dt);
    let outcomes: Vec<[bool; 2]> = run_parallel(opts.threads, || {
        (0..n_paths)
            .into_par_iter()
            .map_init(
                || (stepper.clone(), Vec::with_capacity(n)),
                |(stepper, x), i| run_path(stepper, &[&ta, &tb], steps, seed, i, opts.bridge_correction, x).hit,
            )
            .collect()
    })?;
    let hits_a = outcomes.iter().filter(|h| h[0]).count() as u64;
    let hits_b = outcomes.iter().filter(|h| h[1]).count() as u64;
    let joint_hits = outcomes.iter().filter(|h| h[0] && h[1]).count() as u64;
    if hits_b == 0 {
        return Err(Error::DegenerateRatio);
    }
    let nf = n_paths as f64;
    let (p_a, p_b) = (hits_a as f64 / nf, hits_b as f64 / nf);
    let ratio = p_a / p_b;
    let se = if hits_a == 0 { 0.0 } else { ratio_standard_error(hits_a, hits_b, joint_hits, n_paths) };
    let action_a = action(&spec.family, &spec.field, &ClippedCurve(curve_a, horizon), DEFAULT_QUADRATURE_STEPS)?;
    let action_b = action(&spec.family, &spec.field, &ClippedCurve(curve_b, horizon), DEFAULT_QUADRATURE_STEPS)?;
    Ok(RatioReport {
        epsilon,
        n_paths,
        seed,
        hits_a,
        hits_b,
        joint_hits,
        p_a,
        p_b,
        ratio,
        ci95: ((ratio - 1.96 * se).max(0.0), ratio + 1.96 * se),
        theory_ratio: (action_b - action_a).exp(),
        action_a,
        action_b,
    })
}

/// A curve restricted to `[0, horizon]`.
pub(crate) struct ClippedCurve<'a, C: ?Sized>(pub &'a C, pub f64);

impl<C: Curve + ?Sized> Curve for ClippedCurve<'_, C> {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn horizon(&self) -> f64 {
        self.1
    }
    fn position(&self, t: f64) -> DVector<f64> {
        self.0.position(t)
    }
    fn velocity(&self, t: f64) -> DVector<f64> {
        self.0.velocity(t)
    }
    fn acceleration(&self, t: f64) -> DVector<f64> {
        self.0.acceleration(t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{EuclideanFamily, ZeroField};
    use crate::transport::AnalyticCurve;

    fn bm(n: usize, horizon: f64) -> DiffusionSpec<EuclideanFamily, ZeroField> {
        DiffusionSpec::new(EuclideanFamily::new(n, horizon).unwrap(), ZeroField(n), DVector::zeros(n), horizon).unwrap()
    }

    #[test]
    fn ci_edge_cases() {
        let (lo, hi) = binomial_ci95(0, 1000);
        assert_eq!(lo, 0.0);
        assert!((hi - 2.9911e-3).abs() < 1e-6);
        let (lo, hi) = binomial_ci95(500, 1000);
        assert!(lo < 0.5 && hi > 0.5);
    }

    #[test]
    fn huge_tube_always_hit() {
        let spec = bm(1, 1.0).with_dt(1e-2).unwrap();
        let c = AnalyticCurve::constant(DVector::zeros(1), 1.0);
        let est = tube_probability(&spec, &c, 100.0, &WeightFunction::unit(), 200, 1).unwrap();
        assert_eq!(est.n_hits, 200);
    }

    #[test]
    fn reproducible_across_thread_counts() {
        let spec = bm(1, 1.0).with_dt(1e-3).unwrap();
        let c = AnalyticCurve::constant(DVector::zeros(1), 1.0);
        let w = WeightFunction::unit();
        let run = |threads| {
            let o = McOptions { threads: Some(threads), bridge_correction: true };
            tube_probability_with(&spec, &c, 0.7, &w, 4000, 99, &o).unwrap().n_hits
        };
        assert_eq!(run(1), run(3));
    }

    #[test]
    fn simulate_path_is_deterministic() {
        let spec = bm(2, 1.0).with_dt(0.01).unwrap();
        let a = simulate_path(&spec, 5, 3).unwrap();
        let b = simulate_path(&spec, 5, 3).unwrap();
        assert_eq!(a.points.len(), 101);
        assert_eq!(a.points, b.points);
        assert_ne!(a.points, simulate_path(&spec, 5, 4).unwrap().points);
    }

    #[test]
    fn identical_curves_give_unit_ratio() {
        let spec = bm(1, 0.5).with_dt(1e-3).unwrap();
        let c = AnalyticCurve::constant(DVector::zeros(1), 0.5);
        let r = ratio_experiment(&spec, &c, &c, 0.5, 2000, 3).unwrap();
        assert_eq!(r.ratio, 1.0);
        assert_eq!(r.theory_ratio, 1.0);
    }

    #[test]
    fn empty_tube_b_is_degenerate() {
        let spec = bm(1, 0.5).with_dt(1e-2).unwrap();
        let a = AnalyticCurve::constant(DVector::zeros(1), 0.5);
        let b = AnalyticCurve::new(
            1,
            0.5,
            |t| DVector::from_element(1, 40.0 * t * (0.5 - t)),
            |t| DVector::from_element(1, 40.0 * (0.5 - 2.0 * t)),
        );
        assert!(matches!(ratio_experiment(&spec, &a, &b, 0.05, 200, 3), Err(Error::DegenerateRatio)));
    }
}
