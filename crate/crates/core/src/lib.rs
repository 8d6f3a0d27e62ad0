//! Numerics for the Onsager–Machlup functional of inhomogeneous diffusions on manifolds
//! carrying a time-dependent family of metrics.
//!
//! * [`geometry`] — metric families in a chart, Christoffel symbols, curvature.
//! * [`transport`] — time-coupled parallel transport, exponential map, normal coordinates.
//! * [`lagrangian`] — the Lagrangian, its action and the weighted/time-changed variant.
//! * [`mpp`] — most probable paths: Euler–Lagrange residuals, shooting, direct minimisation.
//! * [`sde`] — path simulation, Monte Carlo tube probabilities, `λ₁`, asymptotics.
//! * [`cli`] — configuration files and the subcommands behind the `om-diffusion` binary.

pub mod cli;
pub mod error;
pub mod geometry;
pub mod lagrangian;
pub mod linalg;
pub mod mpp;
mod ode;
pub mod sde;
pub mod transport;

pub use error::{Error, Result};

/// Fixed-precision rendering used for every file the crate writes: 12 significant digits.
pub fn fmt_num(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    let s = format!("{:.11e}", v);
    // round-trip through parse so trailing zeros and exponent notation collapse uniformly
    let r: f64 = s.parse().unwrap_or(v);
    format!("{r}")
}

/// [`fmt_num`] as a JSON number (12 significant digits).
pub fn round12(v: f64) -> f64 {
    if v == 0.0 || !v.is_finite() {
        return v;
    }
    format!("{:.11e}", v).parse().unwrap_or(v)
}
