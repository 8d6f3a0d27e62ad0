//! A tube whose radius grows like εeᵗ, estimated directly and through the equivalent
//! fixed-radius problem on the clock u = ∫ e^{−2t} dt.

use nalgebra::DVector;
use om_diffusion::geometry::{EuclideanFamily, ZeroField};
use om_diffusion::lagrangian::{TimeChange, TimeChangedFamily, WeightFunction};
use om_diffusion::sde::{asymptotic_prediction, tube_probability, DiffusionSpec};
use om_diffusion::transport::AnalyticCurve;

fn main() -> om_diffusion::Result<()> {
    let n_paths: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(200_000);
    let (eps, horizon) = (0.4, 1.0);
    let weight = WeightFunction::exponential(1.0);
    let base = EuclideanFamily::new(1, horizon)?;

    let spec = DiffusionSpec::new(base.clone(), ZeroField(1), DVector::zeros(1), horizon)?.with_dt(2.5e-4)?;
    let rest = AnalyticCurve::constant(DVector::zeros(1), horizon);
    let direct = tube_probability(&spec, &rest, eps, &weight, n_paths, 1)?;

    let total = TimeChange::new(weight.clone(), horizon)?.total();
    let changed = TimeChangedFamily::new(base.clone(), weight.clone())?;
    let spec_u = DiffusionSpec::new(changed, ZeroField(1), DVector::zeros(1), total)?;
    let rest_u = AnalyticCurve::constant(DVector::zeros(1), total);
    let clocked = tube_probability(&spec_u, &rest_u, eps, &WeightFunction::unit(), n_paths, 2)?;

    let pred = asymptotic_prediction(&base, &ZeroField(1), &rest, &weight, eps)?;
    println!("radius εeᵗ:        p̂ = {:.4e} [{:.4e}, {:.4e}]", direct.p_hat, direct.ci95.0, direct.ci95.1);
    println!("fixed radius on u: p̂ = {:.4e} [{:.4e}, {:.4e}]", clocked.p_hat, clocked.ci95.0, clocked.ci95.1);
    println!(
        "clock length {total:.6}, decay exponent {:.4}, action {:.4}",
        pred.decay_exponent, pred.action
    );
    Ok(())
}
