//! Normal coordinates on the unit sphere: the metric expansion `δ − ⅓ R x x`, the
//! drift γ, and the two identities tying them to the coordinates.

use nalgebra::DVector;
use om_diffusion::geometry::{self, RicciFlowSphere};
use om_diffusion::transport::{cartan_expansion_check, hara_drift, normal_frame};

fn main() -> om_diffusion::Result<()> {
    let sphere = RicciFlowSphere::unit(2, 1.0)?;
    let center = [0.3, -0.2];
    let report = cartan_expansion_check(&sphere, 0.0, &center)?;
    println!(
        "quadratic term deviation {:.2e}, remainder order {:.2}",
        report.coefficient_deviation,
        report.observed_order.unwrap_or(f64::NAN)
    );

    let frame = geometry::orthonormal_frame(&sphere, 0.0, &center)?;
    let ncf = normal_frame(&sphere, 0.0, &center, &frame)?;
    for r in [1e-1, 1e-2] {
        let y = DVector::from_vec(vec![0.6 * r, 0.8 * r]);
        let ginv = ncf.pulled_back_inverse(&y)?;
        let gamma = hara_drift(&ncf, &y)?;
        let trace: f64 = (0..2).map(|i| 1.0 - ginv[(i, i)]).sum::<f64>() - 2.0 * gamma.dot(&y);
        println!(
            "|y| = {r:.0e}: γ = {:?} (≈ −y/6 = {:?}), trace identity {trace:.1e}, Gauss lemma {:.1e}",
            gamma.as_slice(),
            (&y / -6.0).as_slice(),
            (&ginv * &y - &y).amax()
        );
    }
    let x = ncf.from_normal(&DVector::from_vec(vec![0.5, -0.4]))?;
    println!("round trip: {:?} -> {:?}", x.as_slice(), ncf.to_normal(x.as_slice())?.as_slice());
    Ok(())
}
