//! Exact duals from arbitrary parameters, and approximate duals from
//! parameters close to the identity.

use framelab::duality::{is_exact_dual, parametrize_approx_dual_asf, parametrize_dual, DualityOptions};
use framelab::gallery::random_p_asf;
use framelab::operator::OperatorDesc;
use framelab::sequence::Exponent;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> framelab::Result<()> {
    let (d, m) = (3, 5);
    let f = random_p_asf(d, m, Exponent::new(1.5)?, 0.3, 2)?;
    let (space, coeff) = (f.space(), f.coefficient_space());
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut random = |r: usize, c: usize| DMatrix::from_fn(r, c, |_, _| rng.gen_range(-1.0..=1.0));
    let opts = DualityOptions::default();

    for draw in 0..3 {
        let u = OperatorDesc::dense(space, coeff, random(m, d))?;
        let v = OperatorDesc::dense(coeff, space, random(d, m))?;
        match parametrize_dual(&f, &u, &v) {
            Ok(g) => {
                let r = is_exact_dual(&f, &g, &opts)?;
                println!("draw {draw}: {} with residual {:.2e}", r.verdict, r.exact_residual);
            }
            Err(e) => println!("draw {draw}: rejected, {e}"),
        }
    }

    let near = |scale: f64| DMatrix::<f64>::identity(d, d) * (1.0 - scale);
    let u = OperatorDesc::dense(space, space, near(0.2))?;
    let v = OperatorDesc::dense(space, space, near(0.1))?;
    let a = OperatorDesc::dense(space, coeff, random(m, d) * 0.1)?;
    let b = OperatorDesc::dense(coeff, space, random(d, m) * 0.1)?;
    let out = parametrize_approx_dual_asf(&f, &u, &v, &a, &b, &opts)?;
    println!("\napproximate dual from U = 0.8 I, V = 0.9 I:\n{}", out.report);
    Ok(())
}
