//! Compares the p-excess of random approximately dual pairs.

use framelab::excess::{excess_invariance_trial, p_excess, ExcessMethod, TrialConfig};
use framelab::gallery::random_p_asf;
use framelab::sequence::Exponent;

fn main() -> framelab::Result<()> {
    let f = random_p_asf(2, 5, Exponent::new(2.0)?, 0.2, 3)?;
    let brute = p_excess(&f, ExcessMethod::BruteForce)?;
    let greedy = p_excess(&f, ExcessMethod::Greedy)?;
    println!("excess {} (removes {:?}), greedy {}", brute.value, brute.witness, greedy.value);

    let report = excess_invariance_trial(&TrialConfig::default(), 50, 0)?;
    println!("\n{} of {} pairs share their p-excess", report.equal_count, report.trials);
    report.write_csv(std::io::stdout().lock())
}
