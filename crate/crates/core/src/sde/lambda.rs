use crate::error::{Error, Result};

/// `J_ν(x) · Γ(ν+1) / (x/2)^ν` from its power series; same positive zeros as `J_ν`.
fn scaled_bessel(nu: f64, x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for m in 0..500 {
        let m = m as f64;
        term *= -q / ((m + 1.0) * (m + nu + 1.0));
        sum += term;
        if term.abs() < 1e-17 * sum.abs().max(1e-300) && m > q.sqrt() {
            break;
        }
    }
    sum
}

/// First positive zero `j_{ν,1}` of `J_ν`, `ν > −1`.
pub fn first_bessel_zero(nu: f64) -> f64 {
    let step = 1e-2;
    let mut lo = step;
    let mut f_lo = scaled_bessel(nu, lo);
    let mut hi = lo + step;
    while scaled_bessel(nu, hi).signum() == f_lo.signum() {
        lo = hi;
        f_lo = scaled_bessel(nu, lo);
        hi += step;
    }
    while hi - lo > 1e-15 * hi {
        let mid = 0.5 * (lo + hi);
        let f = scaled_bessel(nu, mid);
        if f == 0.0 {
            return mid;
        }
        if f.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// First Dirichlet eigenvalue of `−½Δ` on the unit ball of `ℝⁿ`: `½ j²_{n/2−1, 1}`.
pub fn lambda1_dirichlet(n: usize) -> Result<f64> {
    if !(1..=10).contains(&n) {
        return Err(Error::UnsupportedDimension(n));
    }
    let j = first_bessel_zero(n as f64 / 2.0 - 1.0);
    Ok(0.5 * j * j)
}
