//! Bessel and frame bounds of a random finite p-ASF.

use framelab::frames::{validate_p_abs, validate_p_asf};
use framelab::gallery::random_p_asf;
use framelab::operator::NormOptions;
use framelab::sequence::Exponent;

fn main() -> framelab::Result<()> {
    let opts = NormOptions::default();
    for p in [1.0, 1.5, 2.0, 3.0] {
        let f = random_p_asf(4, 7, Exponent::new(p)?, 0.4, 11)?;
        let bessel = validate_p_abs(&f, &opts)?;
        let bounds = validate_p_asf(&f, &opts)?;
        println!(
            "p = {p}: ‖theta_f‖ <= {:.4}, ‖theta_tau‖ <= {:.4}, a = {:.4}, b = {:.4}",
            bessel.c, bessel.d, bounds.a, bounds.b
        );
    }
    Ok(())
}
