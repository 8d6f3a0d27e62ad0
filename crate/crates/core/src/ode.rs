//! Classical fixed-step fourth-order Runge–Kutta.

use crate::error::Result;

/// Scratch space for [`rk4_step`].
pub(crate) struct Rk4Work {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
}

impl Rk4Work {
    pub fn new(n: usize) -> Self {
        Self { k1: vec![0.0; n], k2: vec![0.0; n], k3: vec![0.0; n], k4: vec![0.0; n], tmp: vec![0.0; n] }
    }
}

/// One RK4 step of `y' = f(t, y)` from `t` to `t + h`, in place.
pub(crate) fn rk4_step<F>(f: &mut F, t: f64, h: f64, y: &mut [f64], w: &mut Rk4Work) -> Result<()>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
{
    let n = y.len();
    f(t, y, &mut w.k1)?;
    for i in 0..n {
        w.tmp[i] = y[i] + 0.5 * h * w.k1[i];
    }
    f(t + 0.5 * h, &w.tmp, &mut w.k2)?;
    for i in 0..n {
        w.tmp[i] = y[i] + 0.5 * h * w.k2[i];
    }
    f(t + 0.5 * h, &w.tmp, &mut w.k3)?;
    for i in 0..n {
        w.tmp[i] = y[i] + h * w.k3[i];
    }
    f(t + h, &w.tmp, &mut w.k4)?;
    for i in 0..n {
        y[i] += h / 6.0 * (w.k1[i] + 2.0 * w.k2[i] + 2.0 * w.k3[i] + w.k4[i]);
    }
    Ok(())
}
