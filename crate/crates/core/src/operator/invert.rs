use nalgebra::DMatrix;

use super::{materialize, max_col_sum, OperatorDesc};
use crate::error::{FrameError, Result};

const CONDITION_GATE: f64 = 1e12;
const RESIDUAL_GATE: f64 = 1e-10;

fn max_entry_distance_to_identity(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    (m - DMatrix::<f64>::identity(n, n)).amax()
}

/// Dense inverse of a square finite operator via partially pivoted LU,
/// gated on the 1-norm condition number and on both residuals.
pub fn invert_finite(a: &OperatorDesc) -> Result<OperatorDesc> {
    let (Some(n), Some(rows)) = (a.domain().dim(), a.codomain().dim()) else {
        return Err(FrameError::NotFinite(format!(
            "cannot invert {} -> {}",
            a.domain(),
            a.codomain()
        )));
    };
    if n != rows {
        return Err(FrameError::ShapeMismatch(format!(
            "cannot invert a {rows}x{n} operator"
        )));
    }
    let m = materialize(a, n);
    let inv = invert_matrix(&m)?;
    OperatorDesc::dense(a.codomain(), a.domain(), inv)
}

pub(crate) fn invert_matrix(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if !m.is_square() {
        return Err(FrameError::ShapeMismatch(format!(
            "cannot invert a {}x{} matrix",
            m.nrows(),
            m.ncols()
        )));
    }
    let inv = m
        .clone()
        .lu()
        .try_inverse()
        .ok_or_else(|| FrameError::SingularOperator("LU factorization hit a zero pivot".into()))?;
    let condition = max_col_sum(m) * max_col_sum(&inv);
    if !condition.is_finite() || condition > CONDITION_GATE {
        return Err(FrameError::SingularOperator(format!(
            "condition estimate {condition:.3e} exceeds {CONDITION_GATE:e}"
        )));
    }
    let residual = max_entry_distance_to_identity(&(m * &inv))
        .max(max_entry_distance_to_identity(&(&inv * m)));
    if residual > RESIDUAL_GATE {
        return Err(FrameError::SingularOperator(format!(
            "inverse residual {residual:.3e} exceeds {RESIDUAL_GATE:e}"
        )));
    }
    Ok(inv)
}
