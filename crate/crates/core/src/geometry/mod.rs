//! Tensor calculus for a time-dependent family of Riemannian metrics presented in a
//! single coordinate chart.
//!
//! A [`MetricFamily`] supplies `g_ij(t, x)` and, optionally, analytic derivatives and
//! closed forms. Everything else (Christoffel symbols, curvature, divergence, the
//! `ġ♯` operator, trace of `ġ`) is assembled here from those primitives.
//!
//! Curvature sign convention: `R_abcd = g_ae (∂_d Γ^e_cb − ∂_c Γ^e_db + Γ^e_df Γ^f_cb − Γ^e_cf Γ^f_db)`,
//! so that a space of constant sectional curvature `K` has
//! `R_abcd = K (g_ad g_bc − g_ac g_bd)`, `Ric_bc = g^ad R_abcd` and the unit 2-sphere has
//! scalar curvature 2. With this convention the normal-coordinate expansion reads
//! `g_ij(x) = δ_ij − ⅓ Σ R_iklj x_k x_l + O(|x|³)`.

mod families;
mod fields;

pub use families::{ChartBox, ConformalFamily, CustomFamily, EuclideanFamily, FlatTorus, RicciFlowSphere};
pub use fields::{ClosureField, ConstantField, LinearField, VectorField, ZeroField};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;

/// Slack allowed on the time interval when validating evaluation points.
const TIME_SLACK: f64 = 1e-12;

/// A family of metrics `g(t)` on a chart, `t ∈ [0, T]`.
///
/// Only [`dim`](Self::dim), [`horizon`](Self::horizon), [`domain`](Self::domain) and
/// [`metric`](Self::metric) are required; the derivative methods fall back to central
/// finite differences.
pub trait MetricFamily: Send + Sync {
    fn dim(&self) -> usize;

    /// Right end `T` of the time span `[0, T]`.
    fn horizon(&self) -> f64;

    fn domain(&self) -> &ChartBox;

    /// Metric components `g_ij(t, x)`. Callers are responsible for domain checks.
    fn metric(&self, t: f64, x: &[f64]) -> DMatrix<f64>;

    /// `ġ(t)` at `x`.
    fn metric_dt(&self, t: f64, x: &[f64]) -> DMatrix<f64> {
        let h = 1e-5 * self.horizon().max(1.0);
        (self.metric(t + h, x) - self.metric(t - h, x)) / (2.0 * h)
    }

    /// `∂g_ij / ∂x_k`.
    fn metric_dx(&self, t: f64, x: &[f64], k: usize) -> DMatrix<f64> {
        let h = self.fd_step();
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[k] += h;
        xm[k] -= h;
        (self.metric(t, &xp) - self.metric(t, &xm)) / (2.0 * h)
    }

    /// `∂²g_ij / ∂x_k ∂x_l`.
    fn metric_dxdx(&self, t: f64, x: &[f64], k: usize, l: usize) -> DMatrix<f64> {
        let h = self.fd_step();
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[l] += h;
        xm[l] -= h;
        (self.metric_dx(t, &xp, k) - self.metric_dx(t, &xm, k)) / (2.0 * h)
    }

    /// Step used by every finite-difference fallback in space.
    fn fd_step(&self) -> f64 {
        1e-5 * self.domain().diameter()
    }

    /// Riemannian distance `d(t, x, y)` when a closed form is known.
    fn closed_form_distance(&self, _t: f64, _x: &[f64], _y: &[f64]) -> Option<f64> {
        None
    }

    fn closed_form_scalar_curvature(&self, _t: f64, _x: &[f64]) -> Option<f64> {
        None
    }

    fn closed_form_trace_gdot(&self, _t: f64, _x: &[f64]) -> Option<f64> {
        None
    }

    /// Radius (in metric units) inside which the exponential map is used as a chart.
    fn injectivity_radius(&self, _t: f64) -> f64 {
        f64::INFINITY
    }

    /// Chart drift of `½Δ_{g(t)}` and the SPD square root of `g^{-1}` (row-major),
    /// written into `drift` and `sigma`.
    fn sde_coefficients(&self, t: f64, x: &[f64], drift: &mut [f64], sigma: &mut [f64]) {
        generic_sde_coefficients(self, t, x, drift, sigma)
    }

    /// True when [`sde_coefficients`](Self::sde_coefficients) does not depend on `x`,
    /// which lets simulations tabulate them once per time step.
    fn homogeneous_sde(&self) -> bool {
        false
    }

    fn name(&self) -> String {
        "custom".to_string()
    }
}

impl<F: MetricFamily + ?Sized> MetricFamily for &F {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn horizon(&self) -> f64 {
        (**self).horizon()
    }
    fn domain(&self) -> &ChartBox {
        (**self).domain()
    }
    fn metric(&self, t: f64, x: &[f64]) -> DMatrix<f64> {
        (**self).metric(t, x)
    }
    fn metric_dt(&self, t: f64, x: &[f64]) -> DMatrix<f64> {
        (**self).metric_dt(t, x)
    }
    fn metric_dx(&self, t: f64, x: &[f64], k: usize) -> DMatrix<f64> {
        (**self).metric_dx(t, x, k)
    }
    fn metric_dxdx(&self, t: f64, x: &[f64], k: usize, l: usize) -> DMatrix<f64> {
        (**self).metric_dxdx(t, x, k, l)
    }
    fn fd_step(&self) -> f64 {
        (**self).fd_step()
    }
    fn closed_form_distance(&self, t: f64, x: &[f64], y: &[f64]) -> Option<f64> {
        (**self).closed_form_distance(t, x, y)
    }
    fn closed_form_scalar_curvature(&self, t: f64, x: &[f64]) -> Option<f64> {
        (**self).closed_form_scalar_curvature(t, x)
    }
    fn closed_form_trace_gdot(&self, t: f64, x: &[f64]) -> Option<f64> {
        (**self).closed_form_trace_gdot(t, x)
    }
    fn injectivity_radius(&self, t: f64) -> f64 {
        (**self).injectivity_radius(t)
    }
    fn sde_coefficients(&self, t: f64, x: &[f64], drift: &mut [f64], sigma: &mut [f64]) {
        (**self).sde_coefficients(t, x, drift, sigma)
    }
    fn homogeneous_sde(&self) -> bool {
        (**self).homogeneous_sde()
    }
    fn name(&self) -> String {
        (**self).name()
    }
}

/// Christoffel symbols of the second kind; `gamma[i][(k, l)] = Γ^i_kl`.
pub type Christoffel = Vec<DMatrix<f64>>;

/// A dense 4-index array with `n⁴` entries.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor4 {
    n: usize,
    data: Vec<f64>,
}

impl Tensor4 {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n * n * n] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    fn idx(&self, a: usize, b: usize, c: usize, d: usize) -> usize {
        ((a * self.n + b) * self.n + c) * self.n + d
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize, c: usize, d: usize) -> f64 {
        self.data[self.idx(a, b, c, d)]
    }

    #[inline]
    pub fn set(&mut self, a: usize, b: usize, c: usize, d: usize, v: f64) {
        let i = self.idx(a, b, c, d);
        self.data[i] = v;
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Components in a new basis whose vectors are the columns of `frame`.
    pub fn in_frame(&self, frame: &DMatrix<f64>) -> Tensor4 {
        let n = self.n;
        let mut out = self.clone();
        // contract one index at a time
        for slot in 0..4 {
            let src = out.clone();
            for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        for d in 0..n {
                            let mut s = 0.0;
                            for m in 0..n {
                                let idx = match slot {
                                    0 => (m, b, c, d),
                                    1 => (a, m, c, d),
                                    2 => (a, b, m, d),
                                    _ => (a, b, c, m),
                                };
                                let f = match slot {
                                    0 => frame[(m, a)],
                                    1 => frame[(m, b)],
                                    2 => frame[(m, c)],
                                    _ => frame[(m, d)],
                                };
                                s += f * src.get(idx.0, idx.1, idx.2, idx.3);
                            }
                            out.set(a, b, c, d, s);
                        }
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct CurvatureTensors {
    /// `R_abcd` in the convention documented at module level.
    pub riemann: Tensor4,
    pub ricci: DMatrix<f64>,
    pub scalar: f64,
    pub christoffel: Christoffel,
}

impl CurvatureTensors {
    /// Largest violation of `R_abcd = −R_bacd = −R_abdc`.
    pub fn antisymmetry_defect(&self) -> f64 {
        let n = self.riemann.dim();
        let r = &self.riemann;
        let mut m: f64 = 0.0;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        let v = r.get(a, b, c, d);
                        m = m.max((v + r.get(b, a, c, d)).abs());
                        m = m.max((v + r.get(a, b, d, c)).abs());
                    }
                }
            }
        }
        m
    }

    /// Largest first-Bianchi residual `R_abcd + R_acdb + R_adbc`.
    pub fn bianchi_defect(&self) -> f64 {
        let n = self.riemann.dim();
        let r = &self.riemann;
        let mut m: f64 = 0.0;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        let s = r.get(a, b, c, d) + r.get(a, c, d, b) + r.get(a, d, b, c);
                        m = m.max(s.abs());
                    }
                }
            }
        }
        m
    }
}

pub(crate) fn check_point<F: MetricFamily + ?Sized>(family: &F, t: f64, x: &[f64]) -> Result<()> {
    let horizon = family.horizon();
    let in_time = t >= -TIME_SLACK && t <= horizon + TIME_SLACK * horizon.max(1.0);
    if x.len() != family.dim() || !in_time || !family.domain().contains(x) {
        return Err(Error::out_of_domain(t, x));
    }
    Ok(())
}

/// `g_ij(t, x)`, validated: inside the domain and positive definite.
pub fn metric_at<F: MetricFamily + ?Sized>(family: &F, t: f64, x: &[f64]) -> Result<DMatrix<f64>> {
    check_point(family, t, x)?;
    let g = linalg::symmetrize(&family.metric(t, x));
    if !g.iter().all(|v| v.is_finite()) || g.clone().cholesky().is_none() {
        let min_eigenvalue = linalg::min_eigenvalue(&g);
        return Err(Error::NotPositiveDefinite { t, min_eigenvalue });
    }
    Ok(g)
}

pub(crate) fn inverse_metric<F: MetricFamily + ?Sized>(
    family: &F,
    t: f64,
    x: &[f64],
) -> Result<DMatrix<f64>> {
    linalg::spd_inverse(&family.metric(t, x), t)
}

/// Christoffel symbols from a known inverse metric and first derivatives.
pub(crate) fn christoffel_from(ginv: &DMatrix<f64>, dg: &[DMatrix<f64>]) -> Christoffel {
    let n = ginv.nrows();
    let mut gamma = vec![DMatrix::zeros(n, n); n];
    for k in 0..n {
        for l in k..n {
            // first kind Γ_{m,kl}
            let first: Vec<f64> = (0..n)
                .map(|m| 0.5 * (dg[k][(m, l)] + dg[l][(m, k)] - dg[m][(k, l)]))
                .collect();
            for i in 0..n {
                let v: f64 = (0..n).map(|m| ginv[(i, m)] * first[m]).sum();
                gamma[i][(k, l)] = v;
                gamma[i][(l, k)] = v;
            }
        }
    }
    gamma
}

/// `Γ^i_kl = ½ g^{im}(∂_k g_ml + ∂_l g_mk − ∂_m g_kl)`.
pub fn christoffel<F: MetricFamily + ?Sized>(family: &F, t: f64, x: &[f64]) -> Result<Christoffel> {
    check_point(family, t, x)?;
    let ginv = inverse_metric(family, t, x)?;
    let dg: Vec<_> = (0..family.dim()).map(|k| family.metric_dx(t, x, k)).collect();
    Ok(christoffel_from(&ginv, &dg))
}

/// Christoffel symbols and their spatial derivatives, `dgamma[e][i][(k, l)] = ∂_e Γ^i_kl`.
pub(crate) fn christoffel_with_derivatives<F: MetricFamily + ?Sized>(
    family: &F,
    t: f64,
    x: &[f64],
) -> Result<(Christoffel, Vec<Christoffel>)> {
    let n = family.dim();
    let ginv = inverse_metric(family, t, x)?;
    let dg: Vec<_> = (0..n).map(|k| family.metric_dx(t, x, k)).collect();
    let gamma = christoffel_from(&ginv, &dg);
    let mut dgamma = vec![vec![DMatrix::zeros(n, n); n]; n];
    for e in 0..n {
        let d2: Vec<_> = (0..n).map(|k| family.metric_dxdx(t, x, k, e)).collect();
        let dginv = -(&ginv * &dg[e] * &ginv);
        for b in 0..n {
            for c in b..n {
                let first: Vec<f64> = (0..n)
                    .map(|d| 0.5 * (dg[b][(d, c)] + dg[c][(d, b)] - dg[d][(b, c)]))
                    .collect();
                let dfirst: Vec<f64> = (0..n)
                    .map(|d| 0.5 * (d2[b][(d, c)] + d2[c][(d, b)] - d2[d][(b, c)]))
                    .collect();
                for a in 0..n {
                    let v: f64 = (0..n)
                        .map(|d| dginv[(a, d)] * first[d] + ginv[(a, d)] * dfirst[d])
                        .sum();
                    dgamma[e][a][(b, c)] = v;
                    dgamma[e][a][(c, b)] = v;
                }
            }
        }
    }
    Ok((gamma, dgamma))
}

/// Riemann, Ricci and scalar curvature at `(t, x)`.
pub fn curvature<F: MetricFamily + ?Sized>(family: &F, t: f64, x: &[f64]) -> Result<CurvatureTensors> {
    check_point(family, t, x)?;
    let n = family.dim();
    let g = family.metric(t, x);
    let ginv = linalg::spd_inverse(&g, t)?;
    let (gamma, dgamma) = christoffel_with_derivatives(family, t, x)?;

    // R^e_{b c d} (mixed) such that R_abcd = g_ae R^e_bcd
    let mut mixed = Tensor4::zeros(n);
    for e in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    let mut v = dgamma[d][e][(c, b)] - dgamma[c][e][(d, b)];
                    for f in 0..n {
                        v += gamma[e][(d, f)] * gamma[f][(c, b)] - gamma[e][(c, f)] * gamma[f][(d, b)];
                    }
                    mixed.set(e, b, c, d, v);
                }
            }
        }
    }
    let mut riemann = Tensor4::zeros(n);
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    let v: f64 = (0..n).map(|e| g[(a, e)] * mixed.get(e, b, c, d)).sum();
                    riemann.set(a, b, c, d, v);
                }
            }
        }
    }
    let mut ricci = DMatrix::zeros(n, n);
    for b in 0..n {
        for c in 0..n {
            let mut s = 0.0;
            for a in 0..n {
                for d in 0..n {
                    s += ginv[(a, d)] * riemann.get(a, b, c, d);
                }
            }
            ricci[(b, c)] = s;
        }
    }
    let ricci = linalg::symmetrize(&ricci);
    let scalar = (0..n)
        .flat_map(|b| (0..n).map(move |c| (b, c)))
        .map(|(b, c)| ginv[(b, c)] * ricci[(b, c)])
        .sum();
    Ok(CurvatureTensors { riemann, ricci, scalar, christoffel: gamma })
}

/// Scalar curvature, using the family's closed form when it has one.
pub fn scalar_curvature<F: MetricFamily + ?Sized>(family: &F, t: f64, x: &[f64]) -> Result<f64> {
    match family.closed_form_scalar_curvature(t, x) {
        Some(r) => Ok(r),
        None => curvature(family, t, x).map(|c| c.scalar),
    }
}

/// `ġ(t)^{♯g(t)} v = g^{-1} ġ v`.
pub fn gdot_sharp<F: MetricFamily + ?Sized>(
    family: &F,
    t: f64,
    x: &[f64],
    v: &DVector<f64>,
) -> Result<DVector<f64>> {
    check_point(family, t, x)?;
    let g = family.metric(t, x);
    let gdot = family.metric_dt(t, x);
    g.cholesky()
        .map(|c| c.solve(&(gdot * v)))
        .ok_or(Error::SingularMetric { t })
}

/// `tr_{g(t)} ġ(t) = tr(g^{-1} ġ)`.
pub fn trace_gdot<F: MetricFamily + ?Sized>(family: &F, t: f64, x: &[f64]) -> Result<f64> {
    check_point(family, t, x)?;
    if let Some(v) = family.closed_form_trace_gdot(t, x) {
        return Ok(v);
    }
    let ginv = inverse_metric(family, t, x)?;
    Ok((ginv * family.metric_dt(t, x)).trace())
}

/// `div_{g(t)} Z = ∂_i Z^i + ½ Z^i tr(g^{-1} ∂_i g)`, i.e. `(1/√det g) ∂_i(√det g Z^i)`.
pub fn divergence<F: MetricFamily + ?Sized, Z: VectorField + ?Sized>(
    family: &F,
    field: &Z,
    t: f64,
    x: &[f64],
) -> Result<f64> {
    check_point(family, t, x)?;
    if field.is_zero() {
        return Ok(0.0);
    }
    let ginv = inverse_metric(family, t, x)?;
    let z = field.value(t, x);
    let jac = field.jacobian(t, x);
    let mut div = jac.trace();
    for i in 0..family.dim() {
        if z[i] != 0.0 {
            div += 0.5 * z[i] * (&ginv * family.metric_dx(t, x, i)).trace();
        }
    }
    Ok(div)
}

/// `d(t, x, y)`: the closed form when available, otherwise the local approximation
/// `√((y−x)ᵀ g(t,x) (y−x))`, which is only accurate for small separations.
#[inline]
pub fn distance<F: MetricFamily + ?Sized>(family: &F, t: f64, x: &[f64], y: &[f64]) -> f64 {
    if let Some(d) = family.closed_form_distance(t, x, y) {
        return d;
    }
    let g = family.metric(t, x);
    let n = x.len();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            s += (y[i] - x[i]) * g[(i, j)] * (y[j] - x[j]);
        }
    }
    s.max(0.0).sqrt()
}

/// `g(t)`-norm of a tangent vector at `x`.
pub fn norm<F: MetricFamily + ?Sized>(family: &F, t: f64, x: &[f64], v: &DVector<f64>) -> f64 {
    let g = family.metric(t, x);
    v.dot(&(g * v)).max(0.0).sqrt()
}

/// The `g(t,x)`-orthonormal frame `g^{-1/2}` (columns are the frame vectors).
pub fn orthonormal_frame<F: MetricFamily + ?Sized>(family: &F, t: f64, x: &[f64]) -> Result<DMatrix<f64>> {
    let g = metric_at(family, t, x)?;
    Ok(linalg::spd_inv_sqrt(&g))
}

/// Drift and diffusion coefficients assembled from Christoffel symbols and an
/// eigendecomposition; the reference implementation for [`MetricFamily::sde_coefficients`].
pub fn generic_sde_coefficients<F: MetricFamily + ?Sized>(
    family: &F,
    t: f64,
    x: &[f64],
    drift: &mut [f64],
    sigma: &mut [f64],
) {
    let n = family.dim();
    let g = family.metric(t, x);
    let Ok(ginv) = linalg::spd_inverse(&g, t) else {
        drift.iter_mut().for_each(|d| *d = f64::NAN);
        sigma.iter_mut().for_each(|s| *s = f64::NAN);
        return;
    };
    let dg: Vec<_> = (0..n).map(|k| family.metric_dx(t, x, k)).collect();
    let gamma = christoffel_from(&ginv, &dg);
    for i in 0..n {
        drift[i] = -0.5 * gamma[i].component_mul(&ginv).sum();
    }
    let s = linalg::spd_sqrt(&ginv);
    for i in 0..n {
        for j in 0..n {
            sigma[i * n + j] = s[(i, j)];
        }
    }
}
