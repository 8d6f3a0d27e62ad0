//! Time-coupled parallel transport along curves, exponential maps and normal
//! coordinates for a time-dependent metric family.
//!
//! The transport equation used here is
//! `dτ/dt = −Γ(φ̇, τ) − ½ ġ♯τ`,
//! whose extra `ġ♯` term is exactly what keeps a frame `g(t)`-orthonormal while the
//! metric itself moves.

mod curve;
mod normal;

pub use curve::{write_curve_csv, AnalyticCurve, Curve, HermiteCurve, SplineCurve};
pub use normal::{
    cartan_expansion_check, exp_map, exp_map_with_steps, geodesic_speed_profile, hara_drift, normal_frame,
    CartanReport, NormalCoordinateFrame,
};

use std::io::Write;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::geometry::{self, MetricFamily};
use crate::ode::{rk4_step, Rk4Work};

/// Default number of RK4 steps over `[0, T]`.
pub const DEFAULT_TRANSPORT_STEPS: usize = 2000;

/// Tolerance on the initial frame's orthonormality.
pub const FRAME_TOLERANCE: f64 = 1e-10;

/// The frame `τ_t e_1 … τ_t e_n` on the integration grid (columns are frame vectors).
#[derive(Debug, Clone)]
pub struct FramePath {
    pub times: Vec<f64>,
    pub frames: Vec<DMatrix<f64>>,
}

impl FramePath {
    /// Frame at an arbitrary time, linearly interpolated between grid points.
    pub fn frame(&self, t: f64) -> DMatrix<f64> {
        let k = self.times.len() - 1;
        let i = self.times.partition_point(|&s| s <= t).clamp(1, k) - 1;
        let (a, b) = (self.times[i], self.times[i + 1]);
        let w = ((t - a) / (b - a)).clamp(0.0, 1.0);
        &self.frames[i] * (1.0 - w) + &self.frames[i + 1] * w
    }

    /// `max_t max_ij |⟨τe_i, τe_j⟩_{g(t)} − δ_ij|` over the grid.
    pub fn orthonormality_defect<F, C>(&self, family: &F, curve: &C) -> f64
    where
        F: MetricFamily + ?Sized,
        C: Curve + ?Sized,
    {
        self.times
            .iter()
            .zip(&self.frames)
            .map(|(&t, tau)| {
                let x = curve.position(t);
                frame_defect(&family.metric(t, x.as_slice()), tau)
            })
            .fold(0.0, f64::max)
    }

    /// CSV with columns `t, tau_1_1, tau_2_1, …` (component `i` of frame vector `j`).
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let n = self.frames[0].nrows();
        let mut wtr = csv::Writer::from_writer(out);
        let mut header = vec!["t".to_string()];
        for j in 1..=n {
            for i in 1..=n {
                header.push(format!("tau_{i}_{j}"));
            }
        }
        wtr.write_record(&header)?;
        for (t, f) in self.times.iter().zip(&self.frames) {
            let mut row = vec![crate::fmt_num(*t)];
            row.extend(f.iter().map(|v| crate::fmt_num(*v)));
            wtr.write_record(&row)?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// `max_ij |τᵀ g τ − I|`.
pub fn frame_defect(g: &DMatrix<f64>, tau: &DMatrix<f64>) -> f64 {
    let n = tau.ncols();
    (tau.transpose() * g * tau - DMatrix::<f64>::identity(n, n)).amax()
}

/// Parallel transport of `frame0` along `curve` with the default grid `T/2000`.
pub fn parallel_transport<F, C>(family: &F, curve: &C, frame0: &DMatrix<f64>) -> Result<FramePath>
where
    F: MetricFamily + ?Sized,
    C: Curve + ?Sized,
{
    parallel_transport_with_steps(family, curve, frame0, DEFAULT_TRANSPORT_STEPS)
}

pub fn parallel_transport_with_steps<F, C>(
    family: &F,
    curve: &C,
    frame0: &DMatrix<f64>,
    steps: usize,
) -> Result<FramePath>
where
    F: MetricFamily + ?Sized,
    C: Curve + ?Sized,
{
    let n = family.dim();
    if frame0.nrows() != n || frame0.ncols() != n || curve.dim() != n {
        return Err(Error::InvalidArgument(format!(
            "frame is {}x{} and curve has dimension {}, family has dimension {n}",
            frame0.nrows(),
            frame0.ncols(),
            curve.dim()
        )));
    }
    if steps == 0 {
        return Err(Error::InvalidArgument("need at least one transport step".into()));
    }
    let x0 = curve.position(0.0);
    let g0 = geometry::metric_at(family, 0.0, x0.as_slice())?;
    let defect = frame_defect(&g0, frame0);
    if defect > FRAME_TOLERANCE {
        return Err(Error::NotOrthonormal { defect });
    }

    let horizon = curve.horizon();
    let h = horizon / steps as f64;
    let mut rhs = |t: f64, y: &[f64], dy: &mut [f64]| -> Result<()> {
        let x = curve.position(t);
        let v = curve.velocity(t);
        geometry::check_point(family, t, x.as_slice())?;
        let gamma = geometry::christoffel(family, t, x.as_slice())?;
        let g = family.metric(t, x.as_slice());
        let gdot = family.metric_dt(t, x.as_slice());
        let shape = g.cholesky().ok_or(Error::SingularMetric { t })?.solve(&gdot);
        for col in 0..n {
            let tau = &y[col * n..(col + 1) * n];
            for i in 0..n {
                let mut s = 0.0;
                for j in 0..n {
                    for k in 0..n {
                        s += gamma[i][(j, k)] * v[j] * tau[k];
                    }
                }
                let mut sharp = 0.0;
                for k in 0..n {
                    sharp += shape[(i, k)] * tau[k];
                }
                dy[col * n + i] = -s - 0.5 * sharp;
            }
        }
        Ok(())
    };

    let mut y: Vec<f64> = frame0.iter().copied().collect();
    let mut work = Rk4Work::new(n * n);
    let mut times = Vec::with_capacity(steps + 1);
    let mut frames = Vec::with_capacity(steps + 1);
    times.push(0.0);
    frames.push(frame0.clone());
    for k in 0..steps {
        let t = k as f64 * h;
        rk4_step(&mut rhs, t, h, &mut y, &mut work)?;
        let t1 = if k + 1 == steps { horizon } else { (k + 1) as f64 * h };
        times.push(t1);
        frames.push(DMatrix::from_column_slice(n, n, &y));
    }
    Ok(FramePath { times, frames })
}
