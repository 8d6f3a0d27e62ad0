//! Drifted Brownian motion: ratio of tube probabilities around the mean path and around
//! the origin, next to its small-ε limit exp(E(ψ) − E(φ)).

use nalgebra::DVector;
use om_diffusion::geometry::{ConstantField, EuclideanFamily};
use om_diffusion::sde::{ratio_experiment, DiffusionSpec};
use om_diffusion::transport::AnalyticCurve;

fn main() -> om_diffusion::Result<()> {
    let n_paths: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(200_000);
    let (mu, horizon) = (1.0, 0.25);
    let spec = DiffusionSpec::new(
        EuclideanFamily::new(1, horizon)?,
        ConstantField(DVector::from_element(1, mu)),
        DVector::zeros(1),
        horizon,
    )?
    .with_dt(2.5e-4)?;
    let mean_path = AnalyticCurve::affine(DVector::zeros(1), DVector::from_element(1, mu), horizon);
    let origin = AnalyticCurve::constant(DVector::zeros(1), horizon);
    for eps in [0.4, 0.3, 0.2] {
        let r = ratio_experiment(&spec, &mean_path, &origin, eps, n_paths, 1)?;
        println!(
            "ε = {eps}: ratio {:.4} [{:.4}, {:.4}] from {}/{} hits; limit {:.4}",
            r.ratio, r.ci95.0, r.ci95.1, r.hits_a, r.hits_b, r.theory_ratio
        );
    }
    Ok(())
}
