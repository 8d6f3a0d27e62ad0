//! Transports an orthonormal frame along a wiggly curve on a shrinking sphere and shows
//! that it stays orthonormal for the evolving metric, at fourth order in the step.

use nalgebra::DVector;
use om_diffusion::geometry::{self, RicciFlowSphere};
use om_diffusion::transport::{parallel_transport_with_steps, AnalyticCurve};

fn main() -> om_diffusion::Result<()> {
    let horizon = 0.4;
    let sphere = RicciFlowSphere::new(2, -1.0, 1.0, horizon)?;
    let curve = AnalyticCurve::new(
        2,
        horizon,
        |t| DVector::from_vec(vec![0.2 + t, 0.3 * (8.0 * t).sin()]),
        |t| DVector::from_vec(vec![1.0, 2.4 * (8.0 * t).cos()]),
    );
    let frame0 = geometry::orthonormal_frame(&sphere, 0.0, &[0.2, 0.0])?;
    let mut last = None;
    for steps in [25, 50, 100, 200, 2000] {
        let path = parallel_transport_with_steps(&sphere, &curve, &frame0, steps)?;
        let defect = path.orthonormality_defect(&sphere, &curve);
        let ratio = last.map(|d: f64| format!("{:.1}", d / defect)).unwrap_or_default();
        println!("steps {steps:>5}: defect {defect:.3e} {ratio}");
        last = Some(defect);
    }
    let path = parallel_transport_with_steps(&sphere, &curve, &frame0, 2000)?;
    println!("frame at T:\n{}", path.frames.last().unwrap());
    Ok(())
}
