//! The Onsager–Machlup Lagrangian term by term, its action, and the weighted variants.

use nalgebra::DVector;
use om_diffusion::geometry::{EuclideanFamily, RicciFlowSphere, ZeroField};
use om_diffusion::lagrangian::{action, om_lagrangian, weighted_lagrangian, WeightFunction, WeightedVariant};
use om_diffusion::transport::AnalyticCurve;

fn main() -> om_diffusion::Result<()> {
    let sphere = RicciFlowSphere::new(2, -2.0, 1.0, 0.2)?;
    let rest = DVector::zeros(2);
    for t in [0.0, 0.1, 0.2] {
        let h = om_lagrangian(&sphere, &ZeroField(2), t, &[0.0, 0.0], &rest)?;
        println!(
            "t = {t}: kinetic {:.4}, div {:.4}, -R/12 {:.6}, tr ġ/4 {:.6}, total {:.6}",
            h.kinetic, h.div_term, h.scalar_term, h.trace_term, h.total
        );
    }
    let curve = AnalyticCurve::constant(DVector::from_vec(vec![0.3, -0.4]), 0.2);
    let a = action(&sphere, &ZeroField(2), &curve, 1000)?;
    println!("action {a:.12}  vs (7/12) ln 0.6 = {:.12}", 7.0 / 12.0 * 0.6f64.ln());

    // weighted radius εeᵗ: the two readings of the weighted Lagrangian
    let line = EuclideanFamily::new(1, 1.0)?;
    let w = WeightFunction::exponential(1.0);
    let v = DVector::from_element(1, 0.5);
    for variant in [WeightedVariant::TimeChanged, WeightedVariant::Printed] {
        let h = weighted_lagrangian(&line, &ZeroField(1), &w, 0.5, &[0.0], &v, variant)?;
        println!(
            "{variant:?}: kinetic {:.6} (coefficient {}), weight term {:.6}, total {:.6}",
            h.kinetic, h.kinetic_coefficient, h.weight_term, h.total
        );
    }
    Ok(())
}
