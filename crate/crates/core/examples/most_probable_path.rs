//! Most probable path between two points of a shrinking sphere, solved twice: by shooting
//! on the Euler–Lagrange equation and by direct minimisation of the discretised action.

use std::time::Instant;

use om_diffusion::geometry::{MetricFamily, RicciFlowSphere, ZeroField};
use om_diffusion::mpp::{l2_distance, minimize_action_direct, solve_mpp_bvp};

fn main() -> om_diffusion::Result<()> {
    let horizon = 0.2;
    let family = RicciFlowSphere::new(2, -2.0, 1.0, horizon)?;
    let x0 = [-1.2, 0.3];
    let x1 = [1.4, 0.6];
    let sep = family.closed_form_distance(0.0, &x0, &x1).unwrap();
    println!("angular separation at t=0: {:.4} π", sep / std::f64::consts::PI);

    let clock = Instant::now();
    let bvp = solve_mpp_bvp(&family, &ZeroField(2), &x0, &x1, horizon, None)?;
    println!(
        "shooting: action {:.10}, {} Newton steps, terminal error {:.2e} ({:.2?})",
        bvp.action,
        bvp.shots,
        bvp.terminal_error,
        clock.elapsed()
    );
    for c in &bvp.critical_curves {
        println!("  critical curve: v0 = {:?}, action {:.8}", c.initial_velocity, c.action);
    }

    let clock = Instant::now();
    let direct = minimize_action_direct(&family, &ZeroField(2), &x0, &x1, horizon, 200)?;
    println!(
        "direct:   action {:.10}, {} iterations, |grad| {:.2e} ({:.2?})",
        direct.action,
        direct.iterations,
        direct.gradient_norm,
        clock.elapsed()
    );
    println!("L2 gap {:.3e}", l2_distance(&bvp.curve, &direct.curve, 1000)?);
    println!("relative action gap {:.3e}", ((bvp.action - direct.action) / bvp.action).abs());
    Ok(())
}
