use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde_json::{json, Value};

use super::{materialize, BandedForm, OperatorDesc};
use crate::error::{FrameError, Result};
use crate::sequence::{slice_q_norm, Vector};

const KERNEL_TOL: f64 = 1e-10;
const LEFT_KERNEL_TOL: f64 = 1e-12;

/// Evidence that a square operator is not invertible.
#[derive(Clone, Debug, PartialEq)]
pub enum Witness {
    /// `‖Ax‖_p <= 1e-10 ‖x‖_p`.
    KernelVec(Vector),
    /// A functional `phi` with `phi ∘ A = 0` separates `target` from the
    /// range: `‖Ax - target‖_p >= residual` for every `x`.
    RangeGap { target: Vector, residual: f64 },
    NoneFound,
}

impl Witness {
    pub fn to_json(&self) -> Value {
        match self {
            Witness::KernelVec(x) => json!({"kind": "kernel_vec", "vec": x.to_json()}),
            Witness::RangeGap { target, residual } => json!({
                "kind": "range_gap",
                "target": target.to_json(),
                "residual": residual,
            }),
            Witness::NoneFound => json!({"kind": "none_found"}),
        }
    }
}

fn clean_direction(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let v: Vec<f64> = values.collect();
    let scale = v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    if scale == 0.0 {
        return v;
    }
    // sign convention: the largest entry is positive
    let pivot = v.iter().copied().find(|x| x.abs() == scale).unwrap_or(scale);
    v.iter()
        .map(|x| {
            let y = x / pivot;
            if y.abs() < 1e-13 {
                0.0
            } else {
                y
            }
        })
        .collect()
}

/// Pads with zero rows so the SVD exposes a full right basis.
fn square_up(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows().max(m.ncols());
    let mut out = DMatrix::zeros(n, n);
    out.view_mut((0, 0), (m.nrows(), m.ncols())).copy_from(m);
    out
}

fn kernel_witness(a: &OperatorDesc, horizon: usize) -> Result<Option<Vector>> {
    let cols = a.domain().dim().unwrap_or(horizon);
    for k in 1..=cols {
        let e = Vector::basis(a.domain(), k)?;
        if a.apply(&e)?.p_norm() <= KERNEL_TOL {
            return Ok(Some(e));
        }
    }
    let m = materialize(a, cols);
    let svd = square_up(&m).svd(false, true);
    let Some(v_t) = svd.v_t else { return Ok(None) };
    let (k, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .fold((0, f64::MAX), |acc, (i, &s)| if s < acc.1 { (i, s) } else { acc });
    let dir = clean_direction(v_t.row(k).iter().copied().take(m.ncols()));
    let x = Vector::from_dense(a.domain(), &dir)?;
    if !x.is_zero() && a.apply(&x)?.p_norm() <= KERNEL_TOL * x.p_norm() {
        return Ok(Some(x));
    }
    Ok(None)
}

/// `phi ∘ A` as a column-indexed map for `phi = sum_i u_i zeta_i`.
fn pullback(form: &BandedForm, u: &[(usize, f64)]) -> BTreeMap<usize, f64> {
    let mut out: BTreeMap<usize, f64> = BTreeMap::new();
    for &(i, ui) in u {
        for (j, v) in form.row(i) {
            *out.entry(j).or_insert(0.0) += ui * v;
        }
    }
    out
}

fn gap_from_functional(a: &OperatorDesc, u: &[(usize, f64)]) -> Result<Option<Witness>> {
    let p = a.codomain().exponent();
    let q = p.conjugate();
    let coeffs: Vec<f64> = u.iter().map(|&(_, v)| v).collect();
    let phi_norm = slice_q_norm(coeffs.iter(), q);
    if phi_norm == 0.0 {
        return Ok(None);
    }
    // target y with phi(y) = ‖phi‖_q and ‖y‖_p = 1
    let target = if q.is_infinite() {
        let &(i, v) = u
            .iter()
            .max_by(|x, y| x.1.abs().total_cmp(&y.1.abs()))
            .expect("nonempty functional");
        Vector::from_entries(a.codomain(), [(i, v.signum())])?
    } else {
        let entries = u
            .iter()
            .map(|&(i, v)| (i, v.signum() * (v.abs() / phi_norm).powf(q - 1.0)));
        let y = Vector::from_entries(a.codomain(), entries)?;
        let n = y.p_norm();
        y.scale(1.0 / n)
    };
    let phi_y: f64 = u.iter().map(|&(i, v)| v * target.get(i)).sum();
    let residual = phi_y.abs() / phi_norm / target.p_norm();
    Ok((residual > 0.5).then_some(Witness::RangeGap { target, residual }))
}

fn range_witness(a: &OperatorDesc, horizon: usize) -> Result<Option<Witness>> {
    let Some(form) = BandedForm::from_desc(a) else {
        return Ok(None);
    };
    let rows = a.codomain().dim().unwrap_or(horizon);
    for i in 1..=rows {
        if form.row(i).is_empty() {
            return gap_from_functional(a, &[(i, 1.0)]);
        }
    }
    // left null vector of the first `rows` rows
    let row_maps: Vec<BTreeMap<usize, f64>> = (1..=rows).map(|i| form.row(i)).collect();
    let cols = row_maps
        .iter()
        .filter_map(|r| r.keys().next_back().copied())
        .max()
        .unwrap_or(0);
    if cols == 0 {
        return Ok(None);
    }
    let mut block = DMatrix::zeros(rows, cols);
    for (i, r) in row_maps.iter().enumerate() {
        for (&j, &v) in r {
            block[(i, j - 1)] = v;
        }
    }
    let svd = square_up(&block.transpose()).svd(false, true);
    let Some(v_t) = svd.v_t else { return Ok(None) };
    let (k, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .fold((0, f64::MAX), |acc, (i, &s)| if s < acc.1 { (i, s) } else { acc });
    let dir = clean_direction(v_t.row(k).iter().copied().take(rows));
    let u: Vec<(usize, f64)> = dir
        .iter()
        .enumerate()
        .filter(|(_, v)| **v != 0.0)
        .map(|(i, &v)| (i + 1, v))
        .collect();
    if u.is_empty() {
        return Ok(None);
    }
    let pulled = pullback(&form, &u);
    let scale: f64 = u.iter().map(|&(_, v)| v.abs()).sum::<f64>() * form.sup_row_sum().max(1.0);
    if pulled.values().all(|v| v.abs() <= LEFT_KERNEL_TOL * scale) {
        return gap_from_functional(a, &u);
    }
    Ok(None)
}

/// Looks for a kernel vector first, then for a functional annihilating the
/// range, within the first `horizon` coordinates.
pub fn find_noninvertibility_witness(a: &OperatorDesc, horizon: usize) -> Result<Witness> {
    if !a.is_square() {
        return Err(FrameError::ShapeMismatch(format!(
            "witness search needs a square operator, got {} -> {}",
            a.domain(),
            a.codomain()
        )));
    }
    let horizon = horizon.max(1);
    if let Some(x) = kernel_witness(a, horizon)? {
        return Ok(Witness::KernelVec(x));
    }
    if let Some(w) = range_witness(a, horizon)? {
        return Ok(w);
    }
    Ok(Witness::NoneFound)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequence::{Exponent, ModelSpace};
    use nalgebra::dmatrix;

    #[test]
    fn shifts_and_identity() {
        for &pv in &[1.0, 1.5, 2.0, 3.0] {
            let seq = ModelSpace::sequence(Exponent::new(pv).unwrap());
            let e1 = Vector::basis(seq, 1).unwrap();
            let l = OperatorDesc::left_shift(seq).unwrap();
            assert_eq!(
                find_noninvertibility_witness(&l, 16).unwrap(),
                Witness::KernelVec(e1.clone())
            );
            let r = OperatorDesc::right_shift(seq).unwrap();
            assert_eq!(
                find_noninvertibility_witness(&r, 16).unwrap(),
                Witness::RangeGap {
                    target: e1,
                    residual: 1.0
                }
            );
            let id = OperatorDesc::identity(seq);
            assert_eq!(find_noninvertibility_witness(&id, 16).unwrap(), Witness::NoneFound);
        }
    }

    #[test]
    fn finite_rank_deficient_matrix() {
        let p = Exponent::new(2.0).unwrap();
        let a = OperatorDesc::from_matrix(dmatrix![1.0, 2.0; 2.0, 4.0], p).unwrap();
        match find_noninvertibility_witness(&a, 8).unwrap() {
            Witness::KernelVec(x) => {
                assert!(a.apply(&x).unwrap().p_norm() <= 1e-10 * x.p_norm());
                assert!((x.get(1) / x.get(2) + 2.0).abs() < 1e-12);
            }
            other => panic!("expected a kernel vector, got {other:?}"),
        }
        let inv = OperatorDesc::from_matrix(dmatrix![2.0, 1.0; 1.0, 3.0], p).unwrap();
        assert_eq!(find_noninvertibility_witness(&inv, 8).unwrap(), Witness::NoneFound);
    }

    #[test]
    fn range_gap_through_combined_rows() {
        // rows 1, 2 and 3 all equal zeta_1
        let seq = ModelSpace::sequence(Exponent::new(2.0).unwrap());
        let fr = OperatorDesc::finite_rank(
            seq,
            seq,
            vec![(
                Vector::from_entries(seq, [(1, 1.0), (2, 1.0)]).unwrap(),
                crate::sequence::Functional::coordinate(seq, 1).unwrap(),
            )],
        )
        .unwrap();
        let shifted = OperatorDesc::shift(seq, 2).unwrap();
        let a = OperatorDesc::sum(vec![fr, shifted]).unwrap();
        // no kernel: column 1 = e1 + e2 + e3, column j >= 2 = e_{j+2}
        match find_noninvertibility_witness(&a, 8).unwrap() {
            Witness::RangeGap { target, residual } => {
                assert!(residual > 0.5);
                assert!((target.get(1) + target.get(2) + target.get(3)).abs() < 1e-12);
                assert!(target.max_index() <= 3);
            }
            other => panic!("expected a range gap, got {other:?}"),
        }
    }
}
