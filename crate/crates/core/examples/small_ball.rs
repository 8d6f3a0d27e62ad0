//! Brownian motion in a tube of half-width ε around the zero path on [0, 1], compared
//! with the small-ball prediction `C exp(−λ₁T/ε²)` for C = 4/π.

use nalgebra::DVector;
use om_diffusion::geometry::{EuclideanFamily, ZeroField};
use om_diffusion::lagrangian::WeightFunction;
use om_diffusion::sde::{asymptotic_prediction, reference_constant, tube_probability, DiffusionSpec};
use om_diffusion::transport::AnalyticCurve;

fn main() -> om_diffusion::Result<()> {
    let n_paths: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(200_000);
    let family = EuclideanFamily::new(1, 1.0)?;
    let spec = DiffusionSpec::new(family.clone(), ZeroField(1), DVector::zeros(1), 1.0)?.with_dt(2.5e-4)?;
    let curve = AnalyticCurve::constant(DVector::zeros(1), 1.0);
    let unit = WeightFunction::unit();
    println!("{:>5} {:>12} {:>25} {:>12} {:>12}", "eps", "p_hat", "ci95", "predicted", "eps2*ln(p)");
    for eps in [0.6, 0.5, 0.4] {
        let start = std::time::Instant::now();
        let est = tube_probability(&spec, &curve, eps, &unit, n_paths, 2024)?;
        let pred = asymptotic_prediction(&family, &ZeroField(1), &curve, &unit, eps)?
            .with_constant(reference_constant(1).unwrap());
        println!(
            "{:>5} {:>12.5e} [{:.4e}, {:.4e}] {:>12.5e} {:>12.5}   ({:.1?})",
            eps,
            est.p_hat,
            est.ci95.0,
            est.ci95.1,
            pred.log_probability().unwrap().exp(),
            eps * eps * est.p_hat.ln(),
            start.elapsed()
        );
    }
    Ok(())
}
