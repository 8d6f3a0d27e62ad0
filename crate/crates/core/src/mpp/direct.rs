//! Discretise-then-optimise: piecewise-linear paths with Simpson's rule on every
//! interval, minimised by gradient descent preconditioned with the kinetic Hessian.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::geometry::{self, MetricFamily, VectorField};
use crate::lagrangian::{action, om_lagrangian, DEFAULT_QUADRATURE_STEPS};
use crate::linalg::solve_block_tridiagonal;
use crate::transport::{Curve, SplineCurve};

#[derive(Debug, Clone)]
pub struct DirectOptions {
    pub max_iterations: usize,
    pub gradient_tolerance: f64,
    /// Relative step of the central differences used for the gradient.
    pub fd_step: f64,
}

impl Default for DirectOptions {
    fn default() -> Self {
        Self { max_iterations: 100_000, gradient_tolerance: 1e-7, fd_step: 1e-6 }
    }
}

#[derive(Debug, Clone)]
pub struct DirectSolution {
    /// Not-a-knot spline through the optimised knots.
    pub curve: SplineCurve,
    pub knots: Vec<DVector<f64>>,
    /// `∫ H` along [`curve`](Self::curve) with 1000 Simpson intervals.
    pub action: f64,
    /// The minimised discrete objective.
    pub discrete_action: f64,
    pub iterations: usize,
    pub gradient_norm: f64,
}

fn interval_action<F, Z>(family: &F, field: &Z, t0: f64, h: f64, a: &DVector<f64>, b: &DVector<f64>) -> Result<f64>
where
    F: MetricFamily + ?Sized,
    Z: VectorField + ?Sized,
{
    let v = (b - a) / h;
    let m = (a + b) * 0.5;
    let ha = om_lagrangian(family, field, t0, a.as_slice(), &v)?.total;
    let hm = om_lagrangian(family, field, t0 + 0.5 * h, m.as_slice(), &v)?.total;
    let hb = om_lagrangian(family, field, t0 + h, b.as_slice(), &v)?.total;
    Ok(h / 6.0 * (ha + 4.0 * hm + hb))
}

fn interval_actions<F, Z>(family: &F, field: &Z, knots: &[DVector<f64>], h: f64) -> Result<Vec<f64>>
where
    F: MetricFamily + ?Sized,
    Z: VectorField + ?Sized,
{
    (0..knots.len() - 1)
        .map(|k| interval_action(family, field, k as f64 * h, h, &knots[k], &knots[k + 1]))
        .collect()
}

/// Discrete action of the piecewise-linear path through `knots` at uniform times on `[0, T]`.
pub fn discrete_action<F, Z>(family: &F, field: &Z, knots: &[DVector<f64>], horizon: f64) -> Result<f64>
where
    F: MetricFamily + ?Sized,
    Z: VectorField + ?Sized,
{
    if knots.len() < 2 {
        return Err(Error::InvalidArgument("need at least two knots".into()));
    }
    let h = horizon / (knots.len() - 1) as f64;
    Ok(interval_actions(family, field, knots, h)?.iter().sum())
}

/// Gradient of [`discrete_action`] with respect to the interior knots.
pub fn discrete_action_gradient<F, Z>(
    family: &F,
    field: &Z,
    knots: &[DVector<f64>],
    horizon: f64,
    fd_step: f64,
) -> Result<Vec<DVector<f64>>>
where
    F: MetricFamily + ?Sized,
    Z: VectorField + ?Sized,
{
    let kk = knots.len() - 1;
    let h = horizon / kk as f64;
    let n = knots[0].len();
    let mut grad = Vec::with_capacity(kk.saturating_sub(1));
    for k in 1..kk {
        let mut gk = DVector::zeros(n);
        let mut x = knots[k].clone();
        for d in 0..n {
            let delta = fd_step * knots[k][d].abs().max(1.0);
            let local = |x: &DVector<f64>| -> Result<f64> {
                Ok(interval_action(family, field, (k - 1) as f64 * h, h, &knots[k - 1], x)?
                    + interval_action(family, field, k as f64 * h, h, x, &knots[k + 1])?)
            };
            x[d] = knots[k][d] + delta;
            let sp = local(&x)?;
            x[d] = knots[k][d] - delta;
            let sm = local(&x)?;
            x[d] = knots[k][d];
            gk[d] = (sp - sm) / (2.0 * delta);
        }
        grad.push(gk);
    }
    Ok(grad)
}

fn flat_norm(v: &[DVector<f64>]) -> f64 {
    v.iter().map(|x| x.norm_squared()).sum::<f64>().sqrt()
}

/// Minimises the discrete action over `K − 1` free interior knots (straight-line start).
pub fn minimize_action_direct<F, Z>(
    family: &F,
    field: &Z,
    x0: &[f64],
    x_t: &[f64],
    horizon: f64,
    knots: usize,
) -> Result<DirectSolution>
where
    F: MetricFamily + ?Sized,
    Z: VectorField + ?Sized,
{
    minimize_action_direct_with(family, field, x0, x_t, horizon, knots, None, &DirectOptions::default())
}

#[allow(clippy::too_many_arguments)]
pub fn minimize_action_direct_with<F, Z>(
    family: &F,
    field: &Z,
    x0: &[f64],
    x_t: &[f64],
    horizon: f64,
    knots: usize,
    init: Option<&dyn Curve>,
    opts: &DirectOptions,
) -> Result<DirectSolution>
where
    F: MetricFamily + ?Sized,
    Z: VectorField + ?Sized,
{
    let n = family.dim();
    if knots < 10 {
        return Err(Error::InvalidArgument(format!("need K ≥ 10 knots, got {knots}")));
    }
    if x0.len() != n || x_t.len() != n || field.dim() != n {
        return Err(Error::InvalidArgument("endpoint or drift dimension does not match the family".into()));
    }
    geometry::check_point(family, 0.0, x0)?;
    geometry::check_point(family, horizon, x_t)?;
    let a = DVector::from_column_slice(x0);
    let b = DVector::from_column_slice(x_t);
    let h = horizon / knots as f64;
    let mut x: Vec<DVector<f64>> = (0..=knots)
        .map(|k| {
            let s = k as f64 / knots as f64;
            match (init, k) {
                (_, 0) => a.clone(),
                (_, k) if k == knots => b.clone(),
                (Some(c), _) => c.position(s * horizon),
                (None, _) => &a * (1.0 - s) + &b * s,
            }
        })
        .collect();

    let mut value: f64 = interval_actions(family, field, &x, h)?.iter().sum();
    let mut grad = discrete_action_gradient(family, field, &x, horizon, opts.fd_step)?;
    let mut gnorm = flat_norm(&grad);
    let mut iterations = 0;
    while gnorm >= opts.gradient_tolerance {
        if iterations >= opts.max_iterations {
            return Err(Error::NoConvergence { iterations, residual: gnorm });
        }
        iterations += 1;
        // kinetic Hessian Σ Δxᵀ G Δx / 2h with G frozen at interval midpoints
        let mids: Vec<DMatrix<f64>> = (0..knots)
            .map(|k| {
                let m = (&x[k] + &x[k + 1]) * 0.5;
                geometry::metric_at(family, (k as f64 + 0.5) * h, m.as_slice())
            })
            .collect::<Result<_>>()?;
        let diag: Vec<DMatrix<f64>> = (1..knots).map(|i| (&mids[i - 1] + &mids[i]) / h).collect();
        let off: Vec<DMatrix<f64>> = (1..knots - 1).map(|i| -&mids[i] / h).collect();
        let dir: Vec<DVector<f64>> = solve_block_tridiagonal(&diag, &off, &grad)
            .ok_or(Error::NoConvergence { iterations, residual: gnorm })?
            .into_iter()
            .map(|d| -d)
            .collect();
        let slope: f64 = dir.iter().zip(&grad).map(|(d, g)| d.dot(g)).sum();
        let mut step = 1.0;
        let mut accepted = false;
        while step > 1e-12 {
            let mut trial = x.clone();
            for (k, d) in dir.iter().enumerate() {
                trial[k + 1] += d * step;
            }
            if let Ok(tp) = interval_actions(family, field, &trial, h) {
                let tv: f64 = tp.iter().sum();
                if tv <= value + 1e-4 * step * slope {
                    x = trial;
                    value = tv;
                    accepted = true;
                    break;
                }
            }
            step *= 0.5;
        }
        if !accepted {
            // no further decrease is representable; accept only if already near-stationary
            if gnorm < 1e2 * opts.gradient_tolerance {
                break;
            }
            return Err(Error::NoConvergence { iterations, residual: gnorm });
        }
        grad = discrete_action_gradient(family, field, &x, horizon, opts.fd_step)?;
        gnorm = flat_norm(&grad);
    }
    let curve = SplineCurve::uniform(horizon, x.clone())?;
    let act = action(family, field, &curve, DEFAULT_QUADRATURE_STEPS)?;
    Ok(DirectSolution { curve, knots: x, action: act, discrete_action: value, iterations, gradient_norm: gnorm })
}
