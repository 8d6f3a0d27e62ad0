//! First Dirichlet eigenvalue of −½Δ on the unit ball, for every supported dimension.

use om_diffusion::sde::{first_bessel_zero, lambda1_dirichlet};

fn main() -> om_diffusion::Result<()> {
    for n in 1..=10 {
        let nu = n as f64 / 2.0 - 1.0;
        println!("n = {n:>2}: j = {:.12}, λ₁ = {:.12}", first_bessel_zero(nu), lambda1_dirichlet(n)?);
    }
    Ok(())
}
