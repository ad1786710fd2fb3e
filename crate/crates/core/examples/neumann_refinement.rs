//! Neumann iterates of an approximately dual pair: the defects shrink
//! geometrically with the depth.

use framelab::duality::{neumann_iterate, DualityOptions};
use framelab::gallery::{random_approx_dual_pair, scaled_pair};
use framelab::sequence::Exponent;

fn main() -> framelab::Result<()> {
    let opts = DualityOptions::default();
    let (f, g) = scaled_pair(2, Exponent::new(2.0)?, 0.5)?;
    println!("G = (zeta_n, e_n / 2):");
    for depth in 0..=5 {
        let it = neumann_iterate(&f, &g, depth, &opts)?;
        println!("  N = {depth}: ‖I - theta_rho theta_f‖ = {}", it.cert_fg.upper);
    }

    let (f, g) = random_approx_dual_pair(4, 7, Exponent::new(3.0)?, 0.8, 1)?;
    println!("\nrandom pair at p = 3:");
    for depth in [0, 2, 4, 8] {
        let it = neumann_iterate(&f, &g, depth, &opts)?;
        println!(
            "  N = {depth}: defects <= {:.3e}, {:.3e} (geometric bounds {:.3e}, {:.3e})",
            it.cert_fg.upper, it.cert_gf.upper, it.bound_fg, it.bound_gf
        );
    }
    Ok(())
}
