use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::el_acceleration;
use crate::error::{Error, Result};
use crate::geometry::{self, MetricFamily, VectorField};
use crate::lagrangian::{om_lagrangian, simpson};
use crate::ode::{rk4_step, Rk4Work};
use crate::transport::{Curve, HermiteCurve};

#[derive(Debug, Clone)]
pub struct BVPOptions {
    /// RK4 steps over `[0, T]`.
    pub steps: usize,
    /// Required chart distance between `φ(T)` and the target.
    pub tolerance: f64,
    pub max_newton: usize,
    /// Size (chart units per unit time) of the ± perturbation used for the extra guesses.
    pub perturbation: f64,
    /// Knots of the coarse direct minimiser whose start velocity seeds one more Newton
    /// run when no initial curve is given; below 3 disables it.
    pub coarse_knots: usize,
}

impl Default for BVPOptions {
    fn default() -> Self {
        Self { steps: 2000, tolerance: 1e-8, max_newton: 50, perturbation: 0.5, coarse_knots: 32 }
    }
}

/// One converged critical curve, identified by its initial velocity.
#[derive(Debug, Clone, Serialize)]
pub struct CriticalCurve {
    pub initial_velocity: Vec<f64>,
    pub action: f64,
    pub terminal_error: f64,
    pub shots: usize,
}

#[derive(Debug, Clone)]
pub struct BVPSolution {
    /// Quintic Hermite interpolant of the RK4 trajectory (positions, velocities and the
    /// accelerations the Euler–Lagrange equation prescribes).
    pub curve: HermiteCurve,
    /// Newton iterations used for the returned solution.
    pub shots: usize,
    pub terminal_error: f64,
    pub action: f64,
    pub initial_velocity: DVector<f64>,
    /// Every distinct critical curve found from the default guesses, smallest action first.
    pub critical_curves: Vec<CriticalCurve>,
}

struct Trajectory {
    positions: Vec<DVector<f64>>,
    velocities: Vec<DVector<f64>>,
}

fn integrate<F, Z>(
    family: &F,
    field: &Z,
    x0: &DVector<f64>,
    v0: &DVector<f64>,
    horizon: f64,
    steps: usize,
    record: bool,
) -> Result<Trajectory>
where
    F: MetricFamily + ?Sized,
    Z: VectorField + ?Sized,
{
    let n = x0.len();
    let mut y: Vec<f64> = x0.iter().chain(v0.iter()).copied().collect();
    let mut rhs = |t: f64, y: &[f64], dy: &mut [f64]| -> Result<()> {
        let v = DVector::from_column_slice(&y[n..]);
        let a = el_acceleration(family, field, t.min(horizon), &y[..n], &v)?;
        dy[..n].copy_from_slice(&y[n..]);
        dy[n..].copy_from_slice(a.as_slice());
        Ok(())
    };
    let h = horizon / steps as f64;
    let mut work = Rk4Work::new(2 * n);
    let mut positions = Vec::with_capacity(if record { steps + 1 } else { 1 });
    let mut velocities = Vec::with_capacity(if record { steps + 1 } else { 1 });
    if record {
        positions.push(x0.clone());
        velocities.push(v0.clone());
    }
    for k in 0..steps {
        rk4_step(&mut rhs, k as f64 * h, h, &mut y, &mut work)?;
        if !y.iter().all(|v| v.is_finite()) {
            return Err(Error::StepFailure("Euler–Lagrange flow produced a non-finite state".into()));
        }
        if record || k + 1 == steps {
            positions.push(DVector::from_column_slice(&y[..n]));
            velocities.push(DVector::from_column_slice(&y[n..]));
        }
    }
    geometry::check_point(family, horizon, positions.last().unwrap().as_slice())?;
    Ok(Trajectory { positions, velocities })
}

struct Shot {
    v0: DVector<f64>,
    terminal_error: f64,
    iterations: usize,
}

fn newton<F, Z>(
    family: &F,
    field: &Z,
    x0: &DVector<f64>,
    target: &DVector<f64>,
    horizon: f64,
    guess: DVector<f64>,
    opts: &BVPOptions,
) -> Result<Shot>
where
    F: MetricFamily + ?Sized,
    Z: VectorField + ?Sized,
{
    let n = x0.len();
    let miss = |v: &DVector<f64>| -> Result<DVector<f64>> {
        let tr = integrate(family, field, x0, v, horizon, opts.steps, false)?;
        Ok(tr.positions.last().unwrap() - target)
    };
    let mut v = guess;
    let mut r = miss(&v)?;
    let mut err = r.norm();
    for iter in 0..opts.max_newton {
        if err < opts.tolerance {
            return Ok(Shot { v0: v, terminal_error: err, iterations: iter });
        }
        let mut jac = DMatrix::zeros(n, n);
        for k in 0..n {
            let h = 1e-6 * v[k].abs().max(1.0);
            let mut vp = v.clone();
            vp[k] += h;
            jac.set_column(k, &((miss(&vp)? - &r) / h));
        }
        let dv = jac.lu().solve(&r).ok_or(Error::NoConvergence { iterations: iter, residual: err })?;
        // trust region: never move v₀ by more than a fraction of its size in one step
        let cap = 0.25 * v.norm().max(1.0);
        let mut damping = (cap / dv.norm()).min(1.0);
        loop {
            let trial = &v - &dv * damping;
            if let Ok(rt) = miss(&trial) {
                let et = rt.norm();
                if et < err {
                    v = trial;
                    r = rt;
                    err = et;
                    break;
                }
            }
            damping *= 0.5;
            if damping < 1e-6 {
                return Err(Error::NoConvergence { iterations: iter, residual: err });
            }
        }
    }
    if err < opts.tolerance {
        Ok(Shot { v0: v, terminal_error: err, iterations: opts.max_newton })
    } else {
        Err(Error::NoConvergence { iterations: opts.max_newton, residual: err })
    }
}

/// Single-shooting solution of the Euler–Lagrange boundary value problem with the default
/// options; `init` (default: the chart straight line) supplies the first guess `φ̇(0)`.
pub fn solve_mpp_bvp<F, Z>(
    family: &F,
    field: &Z,
    x0: &[f64],
    x_t: &[f64],
    horizon: f64,
    init: Option<&dyn Curve>,
) -> Result<BVPSolution>
where
    F: MetricFamily + ?Sized,
    Z: VectorField + ?Sized,
{
    solve_mpp_bvp_with(family, field, x0, x_t, horizon, init, &BVPOptions::default())
}

/// Like [`solve_mpp_bvp`]. Newton is started from the initial guess, from two
/// perturbations of it and (without an initial curve) from the start velocity of a coarse
/// direct minimiser; the critical curve with the smallest action is returned and the
/// distinct ones are listed in [`BVPSolution::critical_curves`].
pub fn solve_mpp_bvp_with<F, Z>(
    family: &F,
    field: &Z,
    x0: &[f64],
    x_t: &[f64],
    horizon: f64,
    init: Option<&dyn Curve>,
    opts: &BVPOptions,
) -> Result<BVPSolution>
where
    F: MetricFamily + ?Sized,
    Z: VectorField + ?Sized,
{
    let n = family.dim();
    if x0.len() != n || x_t.len() != n || field.dim() != n {
        return Err(Error::InvalidArgument("endpoint or drift dimension does not match the family".into()));
    }
    if !(horizon > 0.0) || opts.steps < 2 || opts.steps % 2 != 0 {
        return Err(Error::InvalidArgument("need T > 0 and an even number of RK4 steps".into()));
    }
    geometry::check_point(family, 0.0, x0)?;
    geometry::check_point(family, horizon, x_t)?;
    let start = DVector::from_column_slice(x0);
    let target = DVector::from_column_slice(x_t);
    let chord = (&target - &start) / horizon;
    let base = match init {
        Some(c) => c.velocity(0.0),
        None => chord.clone(),
    };
    let mut perturb = DVector::zeros(n);
    if n >= 2 && chord.norm() > 0.0 {
        perturb[0] = -chord[1];
        perturb[1] = chord[0];
        perturb *= opts.perturbation / perturb.norm().max(1e-300) * chord.norm().max(1.0);
    } else {
        perturb[0] = opts.perturbation * chord.norm().max(1.0);
    }
    let mut guesses = vec![base.clone(), &base + &perturb, &base - &perturb];
    if init.is_none() && opts.coarse_knots >= 3 {
        // When the endpoints are far apart (or nearly conjugate) the chord can lie in the
        // basin of a long critical curve; a coarse direct minimiser points at the short one.
        if let Ok(coarse) = super::minimize_action_direct(family, field, x0, x_t, horizon, opts.coarse_knots) {
            guesses.push(coarse.curve.velocity(0.0));
        }
    }

    let mut found: Vec<(Shot, f64)> = Vec::new();
    let mut first_error = None;
    for guess in guesses {
        match newton(family, field, &start, &target, horizon, guess, opts) {
            Ok(shot) => {
                let tol = 1e-6 * shot.v0.norm().max(1.0);
                if found.iter().any(|(s, _)| (&s.v0 - &shot.v0).norm() < tol) {
                    continue;
                }
                let tr = integrate(family, field, &start, &shot.v0, horizon, opts.steps, true)?;
                let h = horizon / opts.steps as f64;
                let action = simpson(
                    |t| {
                        let k = ((t / h).round() as usize).min(opts.steps);
                        Ok(om_lagrangian(family, field, t, tr.positions[k].as_slice(), &tr.velocities[k])?.total)
                    },
                    0.0,
                    horizon,
                    opts.steps,
                )?;
                found.push((shot, action));
            }
            Err(e) => {
                first_error.get_or_insert(e);
            }
        }
    }
    if found.is_empty() {
        return Err(first_error.unwrap_or(Error::NoConvergence { iterations: 0, residual: f64::INFINITY }));
    }
    found.sort_by(|a, b| a.1.total_cmp(&b.1));
    let critical_curves = found
        .iter()
        .map(|(s, a)| CriticalCurve {
            initial_velocity: s.v0.iter().copied().collect(),
            action: *a,
            terminal_error: s.terminal_error,
            shots: s.iterations,
        })
        .collect();
    let (best, action) = found.swap_remove(0);
    let tr = integrate(family, field, &start, &best.v0, horizon, opts.steps, true)?;
    let times: Vec<f64> = (0..=opts.steps).map(|k| horizon * k as f64 / opts.steps as f64).collect();
    let accelerations = times
        .iter()
        .zip(tr.positions.iter().zip(&tr.velocities))
        .map(|(&t, (x, v))| el_acceleration(family, field, t, x.as_slice(), v))
        .collect::<Result<Vec<_>>>()?;
    let curve = HermiteCurve::new(times, tr.positions, tr.velocities, accelerations)?;
    Ok(BVPSolution {
        curve,
        shots: best.iterations,
        terminal_error: best.terminal_error,
        action,
        initial_velocity: best.v0,
        critical_curves,
    })
}
