//! Rebuilds systems from their operator factorizations, and factors an
//! approximately dual pair through its cross frame operators.

use framelab::duality::{factorize_approx_dual, is_exact_dual, DualityOptions};
use framelab::frames::{build_from_factorization, factorize_abs};
use framelab::gallery::{example_second, random_approx_dual_pair};
use framelab::sequence::Exponent;

fn main() -> framelab::Result<()> {
    let e = example_second(Exponent::new(2.0)?);
    let (u, v) = factorize_abs(&e.f);
    let rebuilt = build_from_factorization(e.f.space(), &u, &v)?;
    println!("rebuilt {} F: {rebuilt}", e.name);

    let (f, g) = random_approx_dual_pair(3, 5, Exponent::new(1.5)?, 0.6, 8)?;
    let opts = DualityOptions::default();
    let fact = factorize_approx_dual(&f, &g, &opts)?;
    println!("‖I - U‖ {}\n‖I - V‖ {}", fact.cert_u, fact.cert_v);
    let r = is_exact_dual(&f, &fact.h, &opts)?;
    println!("H = (g_n U^-1, V^-1 omega_n) against F: {}", r.verdict);
    Ok(())
}
