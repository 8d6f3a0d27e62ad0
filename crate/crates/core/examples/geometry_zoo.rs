//! Curvature and metric evolution for every built-in family at one point.

use std::f64::consts::PI;

use om_diffusion::geometry::{
    self, ConformalFamily, EuclideanFamily, FlatTorus, LinearField, MetricFamily, RicciFlowSphere,
};

fn main() -> om_diffusion::Result<()> {
    let zoo: Vec<(Box<dyn MetricFamily>, Vec<f64>)> = vec![
        (Box::new(EuclideanFamily::new(2, 1.0)?), vec![0.3, -0.2]),
        (Box::new(ConformalFamily::linear(2, 0.5, 1.0)?), vec![0.3, -0.2]),
        (Box::new(FlatTorus::new(vec![1.0, 2.0], vec![0.5, -0.3], vec![2.0 * PI; 2], 1.0)?), vec![1.0, 2.0]),
        (Box::new(RicciFlowSphere::new(2, -2.0, 1.0, 0.4)?), vec![0.3, -0.2]),
        (Box::new(RicciFlowSphere::new(3, -1.0, 1.0, 0.4)?), vec![0.3, -0.2, 0.1]),
    ];
    let t = 0.2;
    println!("{:<10} {:>3} {:>12} {:>12} {:>12} {:>10}", "family", "n", "R", "tr ġ", "div x", "Bianchi");
    for (family, x) in &zoo {
        let k = geometry::curvature(&**family, t, x)?;
        let radial = LinearField::radial(family.dim());
        println!(
            "{:<10} {:>3} {:>12.6} {:>12.6} {:>12.6} {:>10.1e}",
            family.name(),
            family.dim(),
            k.scalar,
            geometry::trace_gdot(&**family, t, x)?,
            geometry::divergence(&**family, &radial, t, x)?,
            k.bianchi_defect()
        );
    }
    Ok(())
}
