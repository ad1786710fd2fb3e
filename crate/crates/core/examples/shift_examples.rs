//! Certifies the sequence-space shift examples and prints the witnesses of
//! the non-invertible operators.

use framelab::duality::{certify_approx_dual, DualityOptions};
use framelab::frames::{frame_operator, WITNESS_HORIZON};
use framelab::gallery::gallery;
use framelab::operator::find_noninvertibility_witness;
use framelab::sequence::Exponent;

fn main() -> framelab::Result<()> {
    let opts = DualityOptions::default();
    for p in [1.0, 2.0, 3.0] {
        for entry in gallery(Exponent::new(p)?) {
            let report = certify_approx_dual(&entry.f, &entry.g, &opts)?;
            println!("[p = {p}] {}: {}", entry.name, entry.summary);
            println!("{report}");
            if !entry.f.space().is_finite() {
                for (label, sys) in [("S_f,tau", &entry.f), ("S_g,omega", &entry.g)] {
                    let w = find_noninvertibility_witness(&frame_operator(sys), WITNESS_HORIZON)?;
                    println!("  witness for {label}: {}", w.to_json());
                }
            }
            println!();
        }
    }
    Ok(())
}
