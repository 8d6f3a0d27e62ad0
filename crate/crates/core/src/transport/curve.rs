//! Smooth curves `φ : [0, T] → chart`.

use std::io::{Read, Write};
use std::path::Path;
use std::sync::Arc;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::linalg::solve_tridiagonal;

pub trait Curve: Send + Sync {
    fn dim(&self) -> usize;

    fn horizon(&self) -> f64;

    fn position(&self, t: f64) -> DVector<f64>;

    fn velocity(&self, t: f64) -> DVector<f64>;

    fn acceleration(&self, t: f64) -> DVector<f64> {
        let h = 1e-5 * self.horizon();
        (self.velocity(t + h) - self.velocity(t - h)) / (2.0 * h)
    }
}

impl<C: Curve + ?Sized> Curve for &C {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn horizon(&self) -> f64 {
        (**self).horizon()
    }
    fn position(&self, t: f64) -> DVector<f64> {
        (**self).position(t)
    }
    fn velocity(&self, t: f64) -> DVector<f64> {
        (**self).velocity(t)
    }
    fn acceleration(&self, t: f64) -> DVector<f64> {
        (**self).acceleration(t)
    }
}

type PathFn = Arc<dyn Fn(f64) -> DVector<f64> + Send + Sync>;

/// A curve given by closures for position, velocity and (optionally) acceleration.
#[derive(Clone)]
pub struct AnalyticCurve {
    dim: usize,
    horizon: f64,
    position: PathFn,
    velocity: PathFn,
    acceleration: Option<PathFn>,
}

impl std::fmt::Debug for AnalyticCurve {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("AnalyticCurve").field("dim", &self.dim).field("horizon", &self.horizon).finish()
    }
}

impl AnalyticCurve {
    pub fn new(
        dim: usize,
        horizon: f64,
        position: impl Fn(f64) -> DVector<f64> + Send + Sync + 'static,
        velocity: impl Fn(f64) -> DVector<f64> + Send + Sync + 'static,
    ) -> Self {
        Self { dim, horizon, position: Arc::new(position), velocity: Arc::new(velocity), acceleration: None }
    }

    pub fn with_acceleration(mut self, acc: impl Fn(f64) -> DVector<f64> + Send + Sync + 'static) -> Self {
        self.acceleration = Some(Arc::new(acc));
        self
    }

    /// `φ(t) = p`.
    pub fn constant(point: DVector<f64>, horizon: f64) -> Self {
        let n = point.len();
        Self::new(n, horizon, move |_| point.clone(), move |_| DVector::zeros(n))
            .with_acceleration(move |_| DVector::zeros(n))
    }

    /// `φ(t) = start + t · velocity`.
    pub fn affine(start: DVector<f64>, velocity: DVector<f64>, horizon: f64) -> Self {
        let n = start.len();
        let v = velocity.clone();
        Self::new(n, horizon, move |t| &start + &v * t, move |_| velocity.clone())
            .with_acceleration(move |_| DVector::zeros(n))
    }

    /// Straight chart line from `start` at `t = 0` to `end` at `t = T`.
    pub fn line(start: DVector<f64>, end: DVector<f64>, horizon: f64) -> Self {
        let v = (&end - &start) / horizon;
        Self::affine(start, v, horizon)
    }
}

impl Curve for AnalyticCurve {
    fn dim(&self) -> usize {
        self.dim
    }
    fn horizon(&self) -> f64 {
        self.horizon
    }
    fn position(&self, t: f64) -> DVector<f64> {
        (self.position)(t)
    }
    fn velocity(&self, t: f64) -> DVector<f64> {
        (self.velocity)(t)
    }
    fn acceleration(&self, t: f64) -> DVector<f64> {
        match &self.acceleration {
            Some(a) => a(t),
            None => {
                let h = 1e-5 * self.horizon;
                (self.velocity(t + h) - self.velocity(t - h)) / (2.0 * h)
            }
        }
    }
}

/// Not-a-knot cubic spline through knots `(t_k, x_k)`, `t_0 = 0 < … < t_K = T`.
#[derive(Debug, Clone)]
pub struct SplineCurve {
    times: Vec<f64>,
    points: Vec<DVector<f64>>,
    /// Second derivatives at the knots.
    second: Vec<DVector<f64>>,
}

impl SplineCurve {
    pub fn new(times: Vec<f64>, points: Vec<DVector<f64>>) -> Result<Self> {
        let m = times.len();
        if m < 4 || points.len() != m {
            return Err(Error::InvalidArgument(format!(
                "a spline needs at least 4 knots with matching points, got {m} times and {} points",
                points.len()
            )));
        }
        if times[0].abs() > 1e-12 || times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument("knot times must start at 0 and increase".into()));
        }
        let n = points[0].len();
        if points.iter().any(|p| p.len() != n) {
            return Err(Error::InvalidArgument("knot points have inconsistent dimension".into()));
        }
        let k = m - 1;
        let h: Vec<f64> = times.windows(2).map(|w| w[1] - w[0]).collect();
        let mut second = vec![DVector::zeros(n); m];
        for d in 0..n {
            let y: Vec<f64> = points.iter().map(|p| p[d]).collect();
            let mut lower = vec![0.0; k - 2];
            let mut diag = vec![0.0; k - 1];
            let mut upper = vec![0.0; k - 2];
            let mut rhs = vec![0.0; k - 1];
            for row in 1..k {
                let i = row - 1;
                diag[i] = 2.0 * (h[row - 1] + h[row]);
                if i > 0 {
                    lower[i - 1] = h[row - 1];
                }
                if i + 1 < k - 1 {
                    upper[i] = h[row];
                }
                rhs[i] = 6.0 * ((y[row + 1] - y[row]) / h[row] - (y[row] - y[row - 1]) / h[row - 1]);
            }
            // not-a-knot: continuous third derivative at t_1 and t_{K-1}
            let (h0, h1) = (h[0], h[1]);
            diag[0] += h0 * (h0 + h1) / h1;
            if k - 1 > 1 {
                upper[0] -= h0 * h0 / h1;
            }
            let (ha, hb) = (h[k - 2], h[k - 1]);
            diag[k - 2] += hb * (ha + hb) / ha;
            if k - 1 > 1 {
                lower[k - 3] -= hb * hb / ha;
            }
            let inner = solve_tridiagonal(&lower, &diag, &upper, &rhs);
            for row in 1..k {
                second[row][d] = inner[row - 1];
            }
            let m1 = second[1][d];
            let m2 = second[2][d];
            second[0][d] = ((h0 + h1) * m1 - h0 * m2) / h1;
            let ma = second[k - 1][d];
            let mb = second[k - 2][d];
            second[k][d] = ((ha + hb) * ma - hb * mb) / ha;
        }
        Ok(Self { times, points, second })
    }

    /// Knots `x_0 … x_K` at uniform times `k T / K`.
    pub fn uniform(horizon: f64, points: Vec<DVector<f64>>) -> Result<Self> {
        let k = points.len().saturating_sub(1).max(1);
        let times = (0..points.len()).map(|i| horizon * i as f64 / k as f64).collect();
        Self::new(times, points)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn points(&self) -> &[DVector<f64>] {
        &self.points
    }

    fn locate(&self, t: f64) -> (usize, f64, f64) {
        let k = self.times.len() - 1;
        let i = match self.times.partition_point(|&s| s <= t) {
            0 => 0,
            p if p > k => k - 1,
            p => (p - 1).min(k - 1),
        };
        let h = self.times[i + 1] - self.times[i];
        let b = (t - self.times[i]) / h;
        (i, 1.0 - b, b)
    }

    /// Reads a curve from CSV with header `t, x_1, …, x_n`.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let mut times = Vec::new();
        let mut points = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let vals: Vec<f64> = rec
                .iter()
                .map(|s| s.parse::<f64>().map_err(|e| Error::InvalidArgument(format!("bad number {s:?}: {e}"))))
                .collect::<Result<_>>()?;
            if vals.len() < 2 {
                return Err(Error::InvalidArgument("curve CSV rows need t and at least one coordinate".into()));
            }
            times.push(vals[0]);
            points.push(DVector::from_row_slice(&vals[1..]));
        }
        Self::new(times, points)
    }

    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_csv(std::fs::File::open(path)?)
    }
}

impl Curve for SplineCurve {
    fn dim(&self) -> usize {
        self.points[0].len()
    }
    fn horizon(&self) -> f64 {
        *self.times.last().unwrap()
    }
    fn position(&self, t: f64) -> DVector<f64> {
        let (i, a, b) = self.locate(t);
        let h = self.times[i + 1] - self.times[i];
        &self.points[i] * a
            + &self.points[i + 1] * b
            + (&self.second[i] * (a * a * a - a) + &self.second[i + 1] * (b * b * b - b)) * (h * h / 6.0)
    }
    fn velocity(&self, t: f64) -> DVector<f64> {
        let (i, a, b) = self.locate(t);
        let h = self.times[i + 1] - self.times[i];
        (&self.points[i + 1] - &self.points[i]) / h - &self.second[i] * ((3.0 * a * a - 1.0) * h / 6.0)
            + &self.second[i + 1] * ((3.0 * b * b - 1.0) * h / 6.0)
    }
    fn acceleration(&self, t: f64) -> DVector<f64> {
        let (i, a, b) = self.locate(t);
        &self.second[i] * a + &self.second[i + 1] * b
    }
}

/// Piecewise quintic Hermite interpolant of positions, velocities and accelerations at
/// knots `t_0 = 0 < … < t_K = T`; C² and exact for quintics.
#[derive(Debug, Clone)]
pub struct HermiteCurve {
    times: Vec<f64>,
    points: Vec<DVector<f64>>,
    velocities: Vec<DVector<f64>>,
    accelerations: Vec<DVector<f64>>,
}

impl HermiteCurve {
    pub fn new(
        times: Vec<f64>,
        points: Vec<DVector<f64>>,
        velocities: Vec<DVector<f64>>,
        accelerations: Vec<DVector<f64>>,
    ) -> Result<Self> {
        let m = times.len();
        if m < 2 || points.len() != m || velocities.len() != m || accelerations.len() != m {
            return Err(Error::InvalidArgument("Hermite data need at least 2 knots and matching lengths".into()));
        }
        if times[0].abs() > 1e-12 || times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument("knot times must start at 0 and increase".into()));
        }
        let n = points[0].len();
        if points.iter().chain(&velocities).chain(&accelerations).any(|p| p.len() != n) {
            return Err(Error::InvalidArgument("Hermite data have inconsistent dimension".into()));
        }
        Ok(Self { times, points, velocities, accelerations })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn points(&self) -> &[DVector<f64>] {
        &self.points
    }

    /// `der`-th derivative (0, 1 or 2) at `t`.
    fn eval(&self, t: f64, der: usize) -> DVector<f64> {
        let k = self.times.len() - 1;
        let i = self.times.partition_point(|&s| s <= t).saturating_sub(1).min(k - 1);
        let h = self.times[i + 1] - self.times[i];
        let s = (t - self.times[i]) / h;
        // quintic Hermite basis on [0, 1] and its derivatives in s
        let (s2, s3, s4, s5) = (s * s, s * s * s, s.powi(4), s.powi(5));
        let basis: [f64; 6] = match der {
            0 => [
                1.0 - 10.0 * s3 + 15.0 * s4 - 6.0 * s5,
                s - 6.0 * s3 + 8.0 * s4 - 3.0 * s5,
                0.5 * s2 - 1.5 * s3 + 1.5 * s4 - 0.5 * s5,
                10.0 * s3 - 15.0 * s4 + 6.0 * s5,
                -4.0 * s3 + 7.0 * s4 - 3.0 * s5,
                0.5 * s3 - s4 + 0.5 * s5,
            ],
            1 => [
                -30.0 * s2 + 60.0 * s3 - 30.0 * s4,
                1.0 - 18.0 * s2 + 32.0 * s3 - 15.0 * s4,
                s - 4.5 * s2 + 6.0 * s3 - 2.5 * s4,
                30.0 * s2 - 60.0 * s3 + 30.0 * s4,
                -12.0 * s2 + 28.0 * s3 - 15.0 * s4,
                1.5 * s2 - 4.0 * s3 + 2.5 * s4,
            ],
            _ => [
                -60.0 * s + 180.0 * s2 - 120.0 * s3,
                -36.0 * s + 96.0 * s2 - 60.0 * s3,
                1.0 - 9.0 * s + 18.0 * s2 - 10.0 * s3,
                60.0 * s - 180.0 * s2 + 120.0 * s3,
                -24.0 * s + 84.0 * s2 - 60.0 * s3,
                3.0 * s - 12.0 * s2 + 10.0 * s3,
            ],
        };
        let scale = h.powi(-(der as i32));
        (&self.points[i] * basis[0]
            + &self.velocities[i] * (h * basis[1])
            + &self.accelerations[i] * (h * h * basis[2])
            + &self.points[i + 1] * basis[3]
            + &self.velocities[i + 1] * (h * basis[4])
            + &self.accelerations[i + 1] * (h * h * basis[5]))
            * scale
    }
}

impl Curve for HermiteCurve {
    fn dim(&self) -> usize {
        self.points[0].len()
    }
    fn horizon(&self) -> f64 {
        *self.times.last().unwrap()
    }
    fn position(&self, t: f64) -> DVector<f64> {
        self.eval(t, 0)
    }
    fn velocity(&self, t: f64) -> DVector<f64> {
        self.eval(t, 1)
    }
    fn acceleration(&self, t: f64) -> DVector<f64> {
        self.eval(t, 2)
    }
}

/// Writes `steps + 1` uniformly spaced samples of a curve as CSV (`t, x_1, …, x_n`).
pub fn write_curve_csv<C: Curve + ?Sized, W: Write>(curve: &C, steps: usize, out: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    let mut header = vec!["t".to_string()];
    header.extend((1..=curve.dim()).map(|i| format!("x_{i}")));
    wtr.write_record(&header)?;
    for k in 0..=steps {
        let t = curve.horizon() * k as f64 / steps as f64;
        let p = curve.position(t);
        let mut row = vec![crate::fmt_num(t)];
        row.extend(p.iter().map(|v| crate::fmt_num(*v)));
        wtr.write_record(&row)?;
    }
    wtr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(f: impl Fn(f64) -> f64, k: usize) -> SplineCurve {
        let pts = (0..=k).map(|i| DVector::from_element(1, f(i as f64 / k as f64))).collect();
        SplineCurve::uniform(1.0, pts).unwrap()
    }

    #[test]
    fn reproduces_cubics_exactly() {
        let f = |t: f64| 1.0 - 2.0 * t + 0.5 * t * t + 3.0 * t * t * t;
        let s = sample(f, 7);
        for &t in &[0.0, 0.13, 0.5, 0.77, 1.0] {
            assert!((s.position(t)[0] - f(t)).abs() < 1e-12);
            assert!((s.velocity(t)[0] - (-2.0 + t + 9.0 * t * t)).abs() < 1e-11);
            assert!((s.acceleration(t)[0] - (1.0 + 18.0 * t)).abs() < 1e-9);
        }
    }

    #[test]
    fn hermite_reproduces_quintics() {
        let f = |t: f64| 0.3 - t + 2.0 * t.powi(3) - 4.0 * t.powi(5);
        let df = |t: f64| -1.0 + 6.0 * t * t - 20.0 * t.powi(4);
        let d2f = |t: f64| 12.0 * t - 80.0 * t.powi(3);
        let times = vec![0.0, 0.2, 0.45, 1.0];
        let v = |g: &dyn Fn(f64) -> f64| times.iter().map(|&t| DVector::from_element(1, g(t))).collect::<Vec<_>>();
        let h = HermiteCurve::new(times.clone(), v(&f), v(&df), v(&d2f)).unwrap();
        for &t in &[0.0, 0.1, 0.2, 0.33, 0.7, 1.0] {
            assert!((h.position(t)[0] - f(t)).abs() < 1e-13);
            assert!((h.velocity(t)[0] - df(t)).abs() < 1e-12);
            assert!((h.acceleration(t)[0] - d2f(t)).abs() < 1e-11);
        }
    }

    #[test]
    fn velocity_converges_second_order() {
        let err = |k: usize| {
            let s = sample(|t| (3.0 * t).sin(), k);
            (0..=100)
                .map(|i| i as f64 / 100.0)
                .map(|t| (s.velocity(t)[0] - 3.0 * (3.0 * t).cos()).abs())
                .fold(0.0, f64::max)
        };
        assert!(err(20) / err(40) > 4.0);
    }

    #[test]
    fn nonuniform_knots() {
        let times = vec![0.0, 0.1, 0.35, 0.5, 0.8, 1.0];
        let f = |t: f64| t * t * t - t;
        let pts = times.iter().map(|&t| DVector::from_element(1, f(t))).collect();
        let s = SplineCurve::new(times, pts).unwrap();
        assert!((s.position(0.6)[0] - f(0.6)).abs() < 1e-12);
    }

    #[test]
    fn csv_roundtrip() {
        let c = AnalyticCurve::line(DVector::from_row_slice(&[0.0, 1.0]), DVector::from_row_slice(&[2.0, -1.0]), 1.0);
        let mut buf = Vec::new();
        write_curve_csv(&c, 10, &mut buf).unwrap();
        let s = SplineCurve::read_csv(buf.as_slice()).unwrap();
        assert!((s.position(0.55) - c.position(0.55)).amax() < 1e-10);
    }

    #[test]
    fn too_few_knots() {
        let pts = vec![DVector::zeros(1); 3];
        assert!(SplineCurve::uniform(1.0, pts).is_err());
    }
}
