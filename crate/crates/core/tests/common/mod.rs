//! Independent reference values shared by the integration tests. Nothing here calls
//! into the crate's numerics beyond the plain data types it needs.
#![allow(dead_code)]

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use om_diffusion::transport::AnalyticCurve;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// `P[sup_{t≤T} |B_t| ≤ ε]` for standard 1-D Brownian motion, from the eigenfunction
/// expansion of the heat kernel on `(−ε, ε)`.
pub fn reflection_series(eps: f64, horizon: f64) -> f64 {
    (0..200)
        .map(|k| {
            let m = (2 * k + 1) as f64;
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            4.0 / PI * sign / m * (-(m * m) * PI * PI * horizon / (8.0 * eps * eps)).exp()
        })
        .sum()
}

/// Round metric of scale `c` in stereographic coordinates: `c · 4/(1+|x|²)² · δ`.
pub fn stereographic_metric(c: f64, x: &[f64]) -> DMatrix<f64> {
    let s = 1.0 + x.iter().map(|v| v * v).sum::<f64>();
    DMatrix::identity(x.len(), x.len()) * (4.0 * c / (s * s))
}

/// Stereographic projection of a unit-sphere point (the chart origin is the pole `p_n = −1`).
pub fn project(p: &[f64]) -> DVector<f64> {
    let n = p.len() - 1;
    DVector::from_iterator(n, p[..n].iter().map(|v| v / (1.0 - p[n])))
}

/// Chart velocity of the projection of `p(t)` with `ṗ(t) = dp`.
pub fn project_velocity(p: &[f64], dp: &[f64]) -> DVector<f64> {
    let n = p.len() - 1;
    let d = 1.0 - p[n];
    DVector::from_iterator(n, (0..n).map(|i| dp[i] / d + p[i] * dp[n] / (d * d)))
}

/// Great-circle arc `p(s) = cos(s) a + sin(s) b` (a ⟂ b unit vectors of ℝ³), traversed
/// at unit angular speed for `s ∈ [0, length]` and written in the stereographic chart.
pub fn sphere_arc(a: [f64; 3], b: [f64; 3], length: f64) -> AnalyticCurve {
    let point = move |s: f64| -> Vec<f64> { (0..3).map(|i| s.cos() * a[i] + s.sin() * b[i]).collect() };
    let deriv = move |s: f64| -> Vec<f64> { (0..3).map(|i| -s.sin() * a[i] + s.cos() * b[i]).collect() };
    AnalyticCurve::new(2, length, move |s| project(&point(s)), move |s| project_velocity(&point(s), &deriv(s)))
}

/// The great circle through the chart origin along the first axis on the sphere with
/// scale `c(t) = 1 + α(n−1)t`, with angular speed `ω₀/c(t)` so that `∇φ̇ = −(ċ/c) φ̇`.
pub fn ricci_flow_great_circle(n: usize, alpha: f64, omega0: f64, horizon: f64) -> AnalyticCurve {
    let rate = alpha * (n as f64 - 1.0);
    let c = move |t: f64| 1.0 + rate * t;
    let theta = move |t: f64| if rate == 0.0 { omega0 * t } else { omega0 * c(t).ln() / rate };
    let theta_dot = move |t: f64| omega0 / c(t);
    let theta_ddot = move |t: f64| -omega0 * rate / (c(t) * c(t));
    let unit = move |v: f64| {
        let mut e = DVector::zeros(n);
        e[0] = v;
        e
    };
    AnalyticCurve::new(
        n,
        horizon,
        move |t| unit((theta(t) / 2.0).tan()),
        move |t| {
            let sec2 = 1.0 / (theta(t) / 2.0).cos().powi(2);
            unit(0.5 * sec2 * theta_dot(t))
        },
    )
    .with_acceleration(move |t| {
        let h = theta(t) / 2.0;
        let sec2 = 1.0 / h.cos().powi(2);
        unit(0.5 * sec2 * h.tan() * theta_dot(t).powi(2) + 0.5 * sec2 * theta_ddot(t))
    })
}

/// Christoffel symbols of a metric closure by central differences of `g`.
pub fn fd_christoffel(metric: impl Fn(&[f64]) -> DMatrix<f64>, x: &[f64], h: f64) -> Vec<DMatrix<f64>> {
    let n = x.len();
    let dg: Vec<DMatrix<f64>> = (0..n)
        .map(|k| {
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[k] += h;
            xm[k] -= h;
            (metric(&xp) - metric(&xm)) / (2.0 * h)
        })
        .collect();
    let ginv = metric(x).try_inverse().unwrap();
    (0..n)
        .map(|i| {
            DMatrix::from_fn(n, n, |k, l| {
                (0..n).map(|m| 0.5 * ginv[(i, m)] * (dg[k][(m, l)] + dg[l][(m, k)] - dg[m][(k, l)])).sum()
            })
        })
        .collect()
}

/// `(1/√det g) ∂_i(√det g Z^i)` by central differences.
pub fn fd_divergence(
    metric: impl Fn(&[f64]) -> DMatrix<f64>,
    field: impl Fn(&[f64]) -> DVector<f64>,
    x: &[f64],
    h: f64,
) -> f64 {
    let vol = |y: &[f64]| metric(y).determinant().sqrt();
    let mut s = 0.0;
    for i in 0..x.len() {
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[i] += h;
        xm[i] -= h;
        s += (vol(&xp) * field(&xp)[i] - vol(&xm) * field(&xm)[i]) / (2.0 * h);
    }
    s / vol(x)
}

/// Ratio of two weighted means with its delta-method standard error; `ya`, `yb` are the
/// per-sample values.
pub struct WeightedRatio {
    pub ratio: f64,
    pub std_error: f64,
    pub mean_a: f64,
    pub mean_b: f64,
}

impl WeightedRatio {
    pub fn ci95(&self) -> (f64, f64) {
        (self.ratio - 1.96 * self.std_error, self.ratio + 1.96 * self.std_error)
    }
}

/// Girsanov reweighting for `dX = μ dt + dB` in one dimension: simulates driftless paths
/// on the grid `T/steps`, and estimates `P[|X − φ_a| ≤ ε on [0,T]] / P[|X − φ_b| ≤ ε on [0,T]]`
/// as the ratio of `E[1_a e^{μB_T − μ²T/2}]` and `E[1_b e^{μB_T − μ²T/2}]`.
///
/// Tube exits between grid points are accounted for with the crossing probability of a
/// Brownian bridge past a straight wall, `exp(−2 m₀ m₁ / Δt)`.
pub fn girsanov_ratio(
    mu: f64,
    horizon: f64,
    steps: usize,
    eps: f64,
    phi_a: impl Fn(f64) -> f64,
    phi_b: impl Fn(f64) -> f64,
    n_paths: usize,
    seed: u64,
) -> WeightedRatio {
    let dt = horizon / steps as f64;
    let sq = dt.sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let centers_a: Vec<f64> = (0..=steps).map(|k| phi_a(k as f64 * dt)).collect();
    let centers_b: Vec<f64> = (0..=steps).map(|k| phi_b(k as f64 * dt)).collect();
    let (mut sa, mut sb, mut saa, mut sbb, mut sab) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for _ in 0..n_paths {
        let mut b = 0.0f64;
        let mut alive = [true, true];
        let mut margin = [eps - centers_a[0].abs(), eps - centers_b[0].abs()];
        for k in 0..steps {
            b += sq * rng.sample::<f64, _>(StandardNormal);
            let u: f64 = rng.random();
            for (j, centers) in [&centers_a, &centers_b].into_iter().enumerate() {
                if !alive[j] {
                    continue;
                }
                // distance to the nearer wall of the moving interval
                let m = eps - (b - centers[k + 1]).abs();
                if m < 0.0 || u < (-2.0 * margin[j] * m / dt).exp() {
                    alive[j] = false;
                }
                margin[j] = m;
            }
            if !alive[0] && !alive[1] {
                break;
            }
        }
        let w = if alive[0] || alive[1] { (mu * b - 0.5 * mu * mu * horizon).exp() } else { 0.0 };
        let ya = if alive[0] { w } else { 0.0 };
        let yb = if alive[1] { w } else { 0.0 };
        sa += ya;
        sb += yb;
        saa += ya * ya;
        sbb += yb * yb;
        sab += ya * yb;
    }
    let n = n_paths as f64;
    let (ma, mb) = (sa / n, sb / n);
    let va = saa / n - ma * ma;
    let vb = sbb / n - mb * mb;
    let cab = sab / n - ma * mb;
    let r = ma / mb;
    let var = r * r * (va / (ma * ma) + vb / (mb * mb) - 2.0 * cab / (ma * mb)) / n;
    WeightedRatio { ratio: r, std_error: var.max(0.0).sqrt(), mean_a: ma, mean_b: mb }
}

/// Deterministic pseudo-random numbers for test inputs.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Smooth test curve `x0 + a t + b sin(ω t)` (componentwise).
pub fn wiggly_curve(x0: Vec<f64>, a: Vec<f64>, b: Vec<f64>, omega: f64, horizon: f64) -> AnalyticCurve {
    let n = x0.len();
    let (x0c, ac, bc, bv) = (x0.clone(), a.clone(), b.clone(), b.clone());
    AnalyticCurve::new(
        n,
        horizon,
        move |t| DVector::from_iterator(n, (0..n).map(|i| x0c[i] + ac[i] * t + bc[i] * (omega * t).sin())),
        move |t| DVector::from_iterator(n, (0..n).map(|i| a[i] + bv[i] * omega * (omega * t).cos())),
    )
    .with_acceleration(move |t| DVector::from_iterator(n, (0..n).map(|i| -b[i] * omega * omega * (omega * t).sin())))
}
