//! Canonical duals of a random p-ASF and their reconstruction residuals.

use framelab::duality::{canonical_duals, is_exact_dual, DualityOptions};
use framelab::gallery::random_p_asf;
use framelab::sequence::Exponent;

fn main() -> framelab::Result<()> {
    let f = random_p_asf(3, 6, Exponent::new(3.0)?, 0.5, 5)?;
    let duals = canonical_duals(&f)?;
    let opts = DualityOptions::default();
    for (label, g) in [("left", &duals.left), ("right", &duals.right), ("full", &duals.full)] {
        let r = is_exact_dual(&f, g, &opts)?;
        println!(
            "{label:>5}: sum g_n(x) tau_n residual {:.2e}, sum f_n(x) omega_n residual {:.2e}, verdict {}",
            r.residual_g_tau, r.residual_f_omega, r.verdict
        );
    }
    println!("\nfull canonical dual:\n{}", serde_json::to_string_pretty(&duals.full.to_json()).unwrap());
    Ok(())
}
