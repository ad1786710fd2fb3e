use nalgebra::DMatrix;
use serde::Serialize;

use super::dense_parts;
use crate::error::{FrameError, Result};
use crate::frames::{frame_operator, FrameSystem, WITNESS_HORIZON};
use crate::operator::{find_noninvertibility_witness, invert_matrix, materialize, OperatorDesc, Witness};

/// The one-sided canonical systems and the two-sided canonical dual.
#[derive(Clone, Debug, PartialEq)]
pub struct CanonicalDuals {
    /// `({f_n S^{-1}}, {tau_n})`: reconstructs through `sum g_n(x) tau_n`.
    pub left: FrameSystem,
    /// `({f_n}, {S^{-1} tau_n})`: reconstructs through `sum f_n(x) omega_n`.
    pub right: FrameSystem,
    /// `({f_n S^{-1}}, {S^{-1} tau_n})`, dual on both sides.
    pub full: FrameSystem,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
struct Rejection {
    reason: String,
    witness: serde_json::Value,
}

pub(crate) fn inverse_or_witness(s: &DMatrix<f64>, space: crate::sequence::ModelSpace) -> Result<DMatrix<f64>> {
    match invert_matrix(s) {
        Ok(inv) => Ok(inv),
        Err(FrameError::SingularOperator(_)) => {
            let op = OperatorDesc::dense(space, space, s.clone())?;
            let witness = match find_noninvertibility_witness(&op, WITNESS_HORIZON)? {
                Witness::NoneFound => None,
                w => Some(w),
            };
            Err(FrameError::NotInvertible { witness })
        }
        Err(e) => Err(e),
    }
}

/// Inverse of the frame operator of a finite p-ASF.
pub(crate) fn frame_operator_inverse(frame: &FrameSystem) -> Result<DMatrix<f64>> {
    let d = frame
        .space()
        .dim()
        .ok_or_else(|| FrameError::NotFinite("canonical duals need a finite space".into()))?;
    inverse_or_witness(&materialize(&frame_operator(frame), d), frame.space())
}

pub fn canonical_duals(frame: &FrameSystem) -> Result<CanonicalDuals> {
    let (a, t) = dense_parts(frame)?;
    let s_inv = frame_operator_inverse(frame)?;
    let space = frame.space();
    let g = &a * &s_inv;
    let w = &s_inv * &t;
    Ok(CanonicalDuals {
        left: FrameSystem::from_matrices(space, g.clone(), t.clone())?,
        right: FrameSystem::from_matrices(space, a, w.clone())?,
        full: FrameSystem::from_matrices(space, g, w)?,
    })
}

fn check_parameter(
    op: &OperatorDesc,
    domain: crate::sequence::ModelSpace,
    codomain: crate::sequence::ModelSpace,
    name: &str,
) -> Result<DMatrix<f64>> {
    if op.domain() != domain || op.codomain() != codomain {
        return Err(FrameError::ShapeMismatch(format!(
            "{name} maps {} -> {}, expected {domain} -> {codomain}",
            op.domain(),
            op.codomain()
        )));
    }
    let n = domain
        .dim()
        .ok_or_else(|| FrameError::NotFinite(format!("{name} needs a finite domain")))?;
    Ok(materialize(op, n))
}

/// Singular-condition rejection carrying the witness as JSON.
pub(crate) fn condition_rejection(c: &DMatrix<f64>, space: crate::sequence::ModelSpace) -> FrameError {
    let witness = OperatorDesc::dense(space, space, c.clone())
        .and_then(|op| find_noninvertibility_witness(&op, WITNESS_HORIZON))
        .map(|w| w.to_json())
        .unwrap_or(serde_json::Value::Null);
    let rejection = Rejection {
        reason: "condition operator is not invertible".into(),
        witness,
    };
    FrameError::ConditionOperatorSingular(
        serde_json::to_string(&rejection).expect("plain data serializes"),
    )
}

/// Dual of `frame` with parameters `U: X -> l^p` and `V: l^p -> X`:
/// `theta_g = theta_f S^{-1} + U - theta_f S^{-1} theta_tau U` and
/// `theta_omega = S^{-1} theta_tau + V - V theta_f S^{-1} theta_tau`.
///
/// The output is a p-ASF exactly when its frame operator
/// `S^{-1} + VU - V theta_f S^{-1} theta_tau U` is invertible.
pub fn parametrize_dual(frame: &FrameSystem, u: &OperatorDesc, v: &OperatorDesc) -> Result<FrameSystem> {
    let (a, t) = dense_parts(frame)?;
    let space = frame.space();
    let coeff = frame.coefficient_space();
    let um = check_parameter(u, space, coeff, "U")?;
    let vm = check_parameter(v, coeff, space, "V")?;
    let s_inv = frame_operator_inverse(frame)?;

    let a_s = &a * &s_inv;
    let s_t = &s_inv * &t;
    let theta_g = &a_s + &um - &a_s * (&t * &um);
    let theta_w = &s_t + &vm - &vm * (&a * &s_t);
    let condition = &s_inv + &vm * &um - &vm * (&a_s * (&t * &um));
    if invert_matrix(&condition).is_err() {
        return Err(condition_rejection(&condition, space));
    }
    FrameSystem::from_matrices(space, theta_g, theta_w)
}
