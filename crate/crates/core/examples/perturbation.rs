//! Approximate duality survives a small perturbation of one side of an
//! exactly dual pair.

use framelab::duality::{canonical_duals, perturbation_approx_dual, DualityOptions};
use framelab::frames::FrameSystem;
use framelab::gallery::random_p_asf;
use framelab::sequence::Exponent;
use nalgebra::DMatrix;

fn main() -> framelab::Result<()> {
    let h = random_p_asf(3, 5, Exponent::new(2.0)?, 0.3, 4)?;
    let g = canonical_duals(&h)?.full;
    let (a, t) = (h.analysis_matrix()?, h.synthesis_matrix()?);
    let bump_a = DMatrix::from_fn(5, 3, |i, j| ((i + 2 * j) % 3) as f64 - 1.0);
    let bump_t = DMatrix::from_fn(3, 5, |i, j| ((2 * i + j) % 3) as f64 - 1.0);
    let opts = DualityOptions::default();
    for eps in [0.01, 0.05, 0.2, 0.6] {
        let f = FrameSystem::from_matrices(h.space(), &a + &bump_a * eps, &t + &bump_t * eps)?;
        let out = perturbation_approx_dual(&h, &g, &f, &opts)?;
        let b = out.bounds;
        println!(
            "eps = {eps:<4}: dR = {:.4}, cQ = {:.4}, verdict {:?}, defects <= {:.4}, {:.4}",
            b.d * b.r,
            b.c * b.q,
            out.verdict,
            out.report.cert_fg.upper,
            out.report.cert_gf.upper
        );
    }
    Ok(())
}
