//! Geodesics of a frozen metric `g(t)`, the exponential map and `g(t)`-normal coordinates.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{self, MetricFamily};
use crate::ode::{rk4_step, Rk4Work};
use crate::transport::{frame_defect, FRAME_TOLERANCE};

/// Relative speed drift along a geodesic beyond which the integration is rejected.
const SPEED_TOLERANCE: f64 = 1e-6;
const NEWTON_MAX_ITER: usize = 50;

fn default_steps(speed: f64) -> usize {
    ((256.0 * speed).ceil() as usize).max(16)
}

struct GeodesicEnd {
    x: DVector<f64>,
    v: DVector<f64>,
    /// `∂x(1)/∂v(0)` applied to the columns of the seed matrix.
    jacobian: Option<DMatrix<f64>>,
}

/// Integrates `ẍ = −Γ(ẋ, ẋ)` for unit time from `(x, v)`, optionally together with the
/// Jacobi fields `J̈ = −∂Γ(ẋ, ẋ)J − 2Γ(ẋ, J̇)`, `J(0) = 0`, `J̇(0) = seed`.
fn geodesic<F: MetricFamily + ?Sized>(
    family: &F,
    t: f64,
    x: &[f64],
    v: &[f64],
    steps: usize,
    seed: Option<&DMatrix<f64>>,
    mut observe: impl FnMut(&[f64], &[f64]),
) -> Result<GeodesicEnd> {
    let n = family.dim();
    let m = seed.map_or(0, |s| s.ncols());
    let len = 2 * n + 2 * n * m;
    let mut y = vec![0.0; len];
    y[..n].copy_from_slice(x);
    y[n..2 * n].copy_from_slice(v);
    if let Some(s) = seed {
        y[2 * n + n * m..].copy_from_slice(s.as_slice());
    }

    let mut rhs = |_s: f64, y: &[f64], dy: &mut [f64]| -> Result<()> {
        let (pos, rest) = y.split_at(n);
        let (vel, jac) = rest.split_at(n);
        geometry::check_point(family, t, pos)?;
        let (gamma, dgamma) = if m > 0 {
            let (g, d) = geometry::christoffel_with_derivatives(family, t, pos)?;
            (g, Some(d))
        } else {
            (geometry::christoffel(family, t, pos)?, None)
        };
        dy[..n].copy_from_slice(vel);
        for i in 0..n {
            let q = &gamma[i];
            let mut s = 0.0;
            for j in 0..n {
                for k in 0..n {
                    s += q[(j, k)] * vel[j] * vel[k];
                }
            }
            dy[n + i] = -s;
        }
        if let Some(dgamma) = dgamma {
            let (jv, kv) = jac.split_at(n * m);
            // ∂_e Γ^i(ẋ, ẋ)
            let mut dq = DMatrix::zeros(n, n);
            for e in 0..n {
                for i in 0..n {
                    let mut s = 0.0;
                    for j in 0..n {
                        for k in 0..n {
                            s += dgamma[e][i][(j, k)] * vel[j] * vel[k];
                        }
                    }
                    dq[(i, e)] = s;
                }
            }
            for col in 0..m {
                let jc = &jv[col * n..(col + 1) * n];
                let kc = &kv[col * n..(col + 1) * n];
                for i in 0..n {
                    dy[2 * n + col * n + i] = kc[i];
                    let mut s = 0.0;
                    for e in 0..n {
                        s += dq[(i, e)] * jc[e];
                    }
                    for j in 0..n {
                        for k in 0..n {
                            s += 2.0 * gamma[i][(j, k)] * vel[j] * kc[k];
                        }
                    }
                    dy[2 * n + n * m + col * n + i] = -s;
                }
            }
        }
        Ok(())
    };

    let h = 1.0 / steps as f64;
    let mut work = Rk4Work::new(len);
    observe(&y[..n], &y[n..2 * n]);
    for k in 0..steps {
        rk4_step(&mut rhs, k as f64 * h, h, &mut y, &mut work)?;
        observe(&y[..n], &y[n..2 * n]);
    }
    let end = DVector::from_column_slice(&y[..n]);
    geometry::check_point(family, t, end.as_slice())?;
    Ok(GeodesicEnd {
        x: end,
        v: DVector::from_column_slice(&y[n..2 * n]),
        jacobian: seed.map(|_| DMatrix::from_column_slice(n, m, &y[2 * n..2 * n + n * m])),
    })
}

fn check_speed<F: MetricFamily + ?Sized>(family: &F, t: f64, x: &[f64], v: &DVector<f64>, end: &GeodesicEnd) -> Result<()> {
    let s0 = geometry::norm(family, t, x, v);
    if s0 == 0.0 {
        return Ok(());
    }
    let s1 = geometry::norm(family, t, end.x.as_slice(), &end.v);
    let drift = (s1 - s0).abs() / s0;
    if !(drift <= SPEED_TOLERANCE) {
        return Err(Error::StepFailure(format!("geodesic speed drifted by {drift:.3e} (relative)")));
    }
    Ok(())
}

/// `exp^{g(t)}_x(v)`, with a step count scaled to the length of `v`.
pub fn exp_map<F: MetricFamily + ?Sized>(family: &F, t: f64, x: &[f64], v: &DVector<f64>) -> Result<DVector<f64>> {
    geometry::metric_at(family, t, x)?;
    let steps = default_steps(geometry::norm(family, t, x, v));
    exp_map_with_steps(family, t, x, v, steps)
}

pub fn exp_map_with_steps<F: MetricFamily + ?Sized>(
    family: &F,
    t: f64,
    x: &[f64],
    v: &DVector<f64>,
    steps: usize,
) -> Result<DVector<f64>> {
    if v.len() != family.dim() || steps == 0 {
        return Err(Error::InvalidArgument("tangent vector dimension or step count mismatch".into()));
    }
    geometry::check_point(family, t, x)?;
    let end = geodesic(family, t, x, v.as_slice(), steps, None, |_, _| {})?;
    check_speed(family, t, x, v, &end)?;
    Ok(end.x)
}

/// `‖ẋ(s)‖_{g(t)}` at every step of the geodesic from `(x, v)`.
pub fn geodesic_speed_profile<F: MetricFamily + ?Sized>(
    family: &F,
    t: f64,
    x: &[f64],
    v: &DVector<f64>,
    steps: usize,
) -> Result<Vec<f64>> {
    geometry::check_point(family, t, x)?;
    let mut speeds = Vec::with_capacity(steps + 1);
    geodesic(family, t, x, v.as_slice(), steps, None, |p, u| {
        let g = family.metric(t, p);
        let u = DVector::from_column_slice(u);
        speeds.push(u.dot(&(g * &u)).sqrt());
    })?;
    Ok(speeds)
}

/// `g(t)`-normal coordinates around `center` in the orthonormal basis `frame`.
pub struct NormalCoordinateFrame<'a, F: MetricFamily + ?Sized> {
    family: &'a F,
    t: f64,
    center: DVector<f64>,
    frame: DMatrix<f64>,
    frame_inv: DMatrix<f64>,
}

impl<F: MetricFamily + ?Sized> std::fmt::Debug for NormalCoordinateFrame<'_, F> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("NormalCoordinateFrame")
            .field("t", &self.t)
            .field("center", &self.center)
            .field("frame", &self.frame)
            .finish()
    }
}

/// Builds normal coordinates; `frame` must be `g(t, center)`-orthonormal.
pub fn normal_frame<'a, F: MetricFamily + ?Sized>(
    family: &'a F,
    t: f64,
    center: &[f64],
    frame: &DMatrix<f64>,
) -> Result<NormalCoordinateFrame<'a, F>> {
    let g = geometry::metric_at(family, t, center)?;
    let n = family.dim();
    if frame.nrows() != n || frame.ncols() != n {
        return Err(Error::InvalidArgument(format!("frame must be {n}x{n}")));
    }
    let defect = frame_defect(&g, frame);
    if defect > FRAME_TOLERANCE {
        return Err(Error::NotOrthonormal { defect });
    }
    let frame_inv = frame.clone().try_inverse().ok_or(Error::NotOrthonormal { defect: f64::INFINITY })?;
    Ok(NormalCoordinateFrame { family, t, center: DVector::from_column_slice(center), frame: frame.clone(), frame_inv })
}

impl<F: MetricFamily + ?Sized> NormalCoordinateFrame<'_, F> {
    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn center(&self) -> &DVector<f64> {
        &self.center
    }

    pub fn frame(&self) -> &DMatrix<f64> {
        &self.frame
    }

    /// Chart point with normal coordinates `y`: `exp(t, center, Σ y_i e_i)`.
    pub fn from_normal(&self, y: &DVector<f64>) -> Result<DVector<f64>> {
        let v = &self.frame * y;
        exp_map_with_steps(self.family, self.t, self.center.as_slice(), &v, default_steps(y.norm()))
    }

    /// Chart point and the Jacobian `∂x/∂y`, obtained from Jacobi fields along the geodesic.
    pub fn from_normal_with_jacobian(&self, y: &DVector<f64>) -> Result<(DVector<f64>, DMatrix<f64>)> {
        let v = &self.frame * y;
        let c = self.center.as_slice();
        let end = geodesic(self.family, self.t, c, v.as_slice(), default_steps(y.norm()), Some(&self.frame), |_, _| {})?;
        check_speed(self.family, self.t, c, &v, &end)?;
        let jac = end.jacobian.expect("jacobian requested");
        Ok((end.x, jac))
    }

    /// Inverse of [`from_normal`](Self::from_normal) by damped Newton shooting.
    pub fn to_normal(&self, x: &[f64]) -> Result<DVector<f64>> {
        geometry::check_point(self.family, self.t, x)?;
        let target = DVector::from_column_slice(x);
        let guess = &self.frame_inv * (&target - &self.center);
        if let Ok(y) = self.newton_inverse(&target, guess.clone()) {
            return Ok(y);
        }
        // Far from the centre the linear guess can overshoot the injectivity radius;
        // walk the chart segment centre → x instead, warm-starting each stage.
        let mut last_err = None;
        for stages in [4usize, 16, 64] {
            let mut y = DVector::zeros(target.len());
            let mut ok = true;
            for k in 1..=stages {
                let s = k as f64 / stages as f64;
                let partial = &self.center + (&target - &self.center) * s;
                match self.newton_inverse(&partial, y.clone()) {
                    Ok(next) => y = next,
                    Err(e) => {
                        last_err = Some(e);
                        ok = false;
                        break;
                    }
                }
            }
            if ok {
                return Ok(y);
            }
        }
        Err(last_err.expect("continuation ran at least once"))
    }

    /// Damped Newton iteration for `exp(y) = target` from `y`.
    fn newton_inverse(&self, target: &DVector<f64>, mut y: DVector<f64>) -> Result<DVector<f64>> {
        let tol = 1e-13 * target.amax().max(1.0);
        let (mut xy, mut jac) = self.from_normal_with_jacobian(&y)?;
        let mut res = (&xy - target).amax();
        for iter in 0..NEWTON_MAX_ITER {
            if res <= tol {
                return Ok(y);
            }
            let step = jac
                .clone()
                .lu()
                .solve(&(&xy - target))
                .ok_or(Error::NoConvergence { iterations: iter, residual: res })?;
            let mut damping = 1.0;
            loop {
                let trial = &y - &step * damping;
                let attempt = self.from_normal_with_jacobian(&trial);
                if let Ok((xt, jt)) = attempt {
                    let rt = (&xt - target).amax();
                    if rt < res || damping < 1e-3 {
                        y = trial;
                        xy = xt;
                        jac = jt;
                        res = rt;
                        break;
                    }
                } else if damping < 1e-3 {
                    return Err(attempt.unwrap_err());
                }
                damping *= 0.5;
            }
        }
        if res <= tol {
            Ok(y)
        } else {
            Err(Error::NoConvergence { iterations: NEWTON_MAX_ITER, residual: res })
        }
    }

    /// Metric components in normal coordinates, `G(y) = (∂x/∂y)ᵀ g (∂x/∂y)`.
    pub fn pulled_back_metric(&self, y: &DVector<f64>) -> Result<DMatrix<f64>> {
        let (x, jac) = self.from_normal_with_jacobian(y)?;
        let g = self.family.metric(self.t, x.as_slice());
        Ok(crate::linalg::symmetrize(&(jac.transpose() * g * jac)))
    }

    pub fn pulled_back_inverse(&self, y: &DVector<f64>) -> Result<DMatrix<f64>> {
        crate::linalg::spd_inverse(&self.pulled_back_metric(y)?, self.t)
    }
}

/// Hara drift `γ^i = ½ Σ_j ∂G^{ij}/∂y_j` in normal coordinates (central differences).
pub fn hara_drift<F: MetricFamily + ?Sized>(ncf: &NormalCoordinateFrame<'_, F>, y: &DVector<f64>) -> Result<DVector<f64>> {
    let n = y.len();
    let h = 1e-5;
    let mut gamma = DVector::zeros(n);
    for j in 0..n {
        let mut yp = y.clone();
        let mut ym = y.clone();
        yp[j] += h;
        ym[j] -= h;
        let d = (ncf.pulled_back_inverse(&yp)? - ncf.pulled_back_inverse(&ym)?) / (2.0 * h);
        for i in 0..n {
            gamma[i] += 0.5 * d[(i, j)];
        }
    }
    Ok(gamma)
}

/// Outcome of comparing the normal-coordinate metric with its curvature expansion.
#[derive(Debug, Clone, Serialize)]
pub struct CartanReport {
    pub t: f64,
    pub center: Vec<f64>,
    pub radii: Vec<f64>,
    /// Largest `|fitted − (−⅓ R)|` over all quadratic coefficients at the first radius.
    pub coefficient_deviation: f64,
    /// Largest fitted quadratic coefficient (zero for a flat metric).
    pub max_fitted_coefficient: f64,
    /// `max |G_ij − δ_ij + ⅓ Σ R_iklj y_k y_l|` at each radius.
    pub remainders: Vec<f64>,
    /// `remainder(ρ) / remainder(ρ/2)`.
    pub reduction_factor: Option<f64>,
    /// `log₂` of the reduction factor; absent when the remainder is at round-off level.
    pub observed_order: Option<f64>,
}

fn sample_directions(n: usize) -> Vec<DVector<f64>> {
    let mut dirs = Vec::new();
    for i in 0..n {
        for s in [1.0, -1.0] {
            let mut d = DVector::zeros(n);
            d[i] = s;
            dirs.push(d);
        }
    }
    let r = std::f64::consts::FRAC_1_SQRT_2;
    for i in 0..n {
        for j in i + 1..n {
            for (a, b) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
                let mut d = DVector::zeros(n);
                d[i] = a * r;
                d[j] = b * r;
                dirs.push(d);
            }
        }
    }
    dirs
}

/// Pulls the metric back to `g(t)`-normal coordinates at radii `10⁻²` and `5·10⁻³`,
/// fits the quadratic term and compares it with `−⅓ R_iklj` from [`geometry::curvature`].
pub fn cartan_expansion_check<F: MetricFamily + ?Sized>(family: &F, t: f64, center: &[f64]) -> Result<CartanReport> {
    let n = family.dim();
    let frame = geometry::orthonormal_frame(family, t, center)?;
    let ncf = normal_frame(family, t, center, &frame)?;
    let riemann = geometry::curvature(family, t, center)?.riemann.in_frame(&frame);
    let radii = vec![1e-2, 5e-3];
    let dirs = sample_directions(n);
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|k| (k..n).map(move |l| (k, l))).collect();

    let expected = |i: usize, j: usize, k: usize, l: usize| -> f64 {
        if k == l {
            -riemann.get(i, k, k, j) / 3.0
        } else {
            -(riemann.get(i, k, l, j) + riemann.get(i, l, k, j)) / 3.0
        }
    };

    let mut remainders = Vec::new();
    let mut coefficient_deviation = 0.0f64;
    let mut max_fitted = 0.0f64;
    for (r_idx, &rho) in radii.iter().enumerate() {
        let mut design = DMatrix::zeros(dirs.len(), pairs.len());
        let mut deltas = Vec::with_capacity(dirs.len());
        let mut remainder = 0.0f64;
        for (row, d) in dirs.iter().enumerate() {
            let y = d * rho;
            for (col, &(k, l)) in pairs.iter().enumerate() {
                design[(row, col)] = y[k] * y[l];
            }
            let big_g = ncf.pulled_back_metric(&y)?;
            let delta = big_g - DMatrix::<f64>::identity(n, n);
            for i in 0..n {
                for j in 0..n {
                    let quad: f64 = pairs.iter().map(|&(k, l)| expected(i, j, k, l) * y[k] * y[l]).sum();
                    remainder = remainder.max((delta[(i, j)] - quad).abs());
                }
            }
            deltas.push(delta);
        }
        remainders.push(remainder);
        if r_idx == 0 {
            let svd = design.clone().svd(true, true);
            for i in 0..n {
                for j in 0..n {
                    let b = DVector::from_iterator(deltas.len(), deltas.iter().map(|d| d[(i, j)]));
                    let coef = svd
                        .solve(&b, 1e-14)
                        .map_err(|e| Error::InvalidArgument(format!("quadratic fit failed: {e}")))?;
                    for (c, &(k, l)) in pairs.iter().enumerate() {
                        max_fitted = max_fitted.max(coef[c].abs());
                        coefficient_deviation = coefficient_deviation.max((coef[c] - expected(i, j, k, l)).abs());
                    }
                }
            }
        }
    }
    let (r0, r1) = (remainders[0], remainders[1]);
    let meaningful = r0 > 1e-13 && r1 > 0.0;
    let reduction_factor = meaningful.then(|| r0 / r1);
    let observed_order = reduction_factor.map(|f| f.log2());
    Ok(CartanReport {
        t,
        center: center.to_vec(),
        radii,
        coefficient_deviation,
        max_fitted_coefficient: max_fitted,
        remainders,
        reduction_factor,
        observed_order,
    })
}
