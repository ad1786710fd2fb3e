//! Certified brackets for induced p-norms of dense and banded operators.

use framelab::operator::{operator_pnorm, NormOptions, OperatorDesc};
use framelab::sequence::{Exponent, ModelSpace};
use nalgebra::dmatrix;

fn main() -> framelab::Result<()> {
    let opts = NormOptions::default();
    let m = dmatrix![1.0, 2.0; -0.5, 1.0];
    for p in [1.0, 1.5, 2.0, 3.0, 6.0] {
        let p = Exponent::new(p)?;
        let cert = operator_pnorm(&OperatorDesc::from_matrix(m.clone(), p)?, p, &opts);
        println!("p = {:<3} {cert}", p.get());
    }

    let seq = ModelSpace::sequence(Exponent::new(3.0)?);
    let rl = framelab::operator::compose(&OperatorDesc::right_shift(seq)?, &OperatorDesc::left_shift(seq)?)?;
    let cert = operator_pnorm(&rl.identity_minus()?, seq.exponent(), &opts);
    println!("\n‖I - RL‖ on l^3: {cert}\n  via {}", cert.method_trace);
    Ok(())
}
