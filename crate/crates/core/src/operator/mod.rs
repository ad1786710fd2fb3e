//! Bounded operators between model spaces.
//!
//! An [`OperatorDesc`] is a small expression tree over dense matrices, shift
//! powers, finite-rank sums, scalings, sums and compositions. Every body maps
//! finitely supported vectors to finitely supported vectors, so `apply` is
//! exact and column compressions are finite matrices.

mod banded;
mod invert;
mod json;
mod norm;
mod witness;

use nalgebra::DMatrix;

use crate::error::{FrameError, Result};
use crate::sequence::{Functional, ModelSpace, SpaceKind, Vector};

pub use banded::BandedForm;
pub use invert::invert_finite;
pub(crate) use invert::invert_matrix;
pub use norm::{
    max_col_sum, max_row_sum, operator_pnorm, pnorm_exact, pnorm_lower, pnorm_upper, LtOne,
    NormCertificate, NormOptions, EPS_MACHINE,
};
pub use witness::{find_noninvertibility_witness, Witness};

#[derive(Clone, Debug, PartialEq)]
pub enum Body {
    Dense(DMatrix<f64>),
    /// Positive powers shift right (`R^k`), negative powers shift left (`L^|k|`).
    Shift(i64),
    Identity,
    FiniteRank(Vec<(Vector, Functional)>),
    Scaled(f64, Box<OperatorDesc>),
    Sum(Vec<OperatorDesc>),
    /// `terms[0] ∘ terms[1] ∘ ...`; the last term acts first.
    Compose(Vec<OperatorDesc>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct OperatorDesc {
    domain: ModelSpace,
    codomain: ModelSpace,
    body: Body,
}

fn same_exponent(a: &ModelSpace, b: &ModelSpace) -> Result<()> {
    if a.exponent() != b.exponent() {
        return Err(FrameError::SpaceMismatch(format!(
            "exponents differ between {a} and {b}"
        )));
    }
    Ok(())
}

impl OperatorDesc {
    pub fn identity(space: ModelSpace) -> Self {
        OperatorDesc {
            domain: space,
            codomain: space,
            body: Body::Identity,
        }
    }

    /// The zero operator, stored as an empty finite-rank sum.
    pub fn zero(domain: ModelSpace, codomain: ModelSpace) -> Self {
        OperatorDesc {
            domain,
            codomain,
            body: Body::FiniteRank(Vec::new()),
        }
    }

    pub fn shift(space: ModelSpace, power: i64) -> Result<Self> {
        if space.is_finite() {
            return Err(FrameError::ShapeMismatch(
                "shifts act only on sequence spaces".into(),
            ));
        }
        if power == 0 {
            return Ok(Self::identity(space));
        }
        Ok(OperatorDesc {
            domain: space,
            codomain: space,
            body: Body::Shift(power),
        })
    }

    pub fn right_shift(space: ModelSpace) -> Result<Self> {
        Self::shift(space, 1)
    }

    pub fn left_shift(space: ModelSpace) -> Result<Self> {
        Self::shift(space, -1)
    }

    pub fn dense(domain: ModelSpace, codomain: ModelSpace, matrix: DMatrix<f64>) -> Result<Self> {
        same_exponent(&domain, &codomain)?;
        match (domain.kind(), codomain.kind()) {
            (SpaceKind::Finite(cols), SpaceKind::Finite(rows)) => {
                if matrix.nrows() != rows || matrix.ncols() != cols {
                    return Err(FrameError::ShapeMismatch(format!(
                        "matrix is {}x{}, spaces need {rows}x{cols}",
                        matrix.nrows(),
                        matrix.ncols()
                    )));
                }
                Ok(OperatorDesc {
                    domain,
                    codomain,
                    body: Body::Dense(matrix),
                })
            }
            _ => Err(FrameError::ShapeMismatch(
                "dense bodies need finite domain and codomain".into(),
            )),
        }
    }

    /// Dense operator `l^p_cols -> l^p_rows` read off the matrix shape.
    pub fn from_matrix(matrix: DMatrix<f64>, p: crate::sequence::Exponent) -> Result<Self> {
        let domain = ModelSpace::finite(matrix.ncols(), p)?;
        let codomain = ModelSpace::finite(matrix.nrows(), p)?;
        Self::dense(domain, codomain, matrix)
    }

    /// `sum_k v_k ⊗ f_k`, i.e. `x ↦ sum_k f_k(x) v_k`.
    pub fn finite_rank(
        domain: ModelSpace,
        codomain: ModelSpace,
        pairs: Vec<(Vector, Functional)>,
    ) -> Result<Self> {
        same_exponent(&domain, &codomain)?;
        for (k, (v, f)) in pairs.iter().enumerate() {
            if v.space() != codomain || f.space() != domain {
                return Err(FrameError::SpaceMismatch(format!(
                    "finite-rank pair {k} does not map {domain} into {codomain}"
                )));
            }
        }
        Ok(OperatorDesc {
            domain,
            codomain,
            body: Body::FiniteRank(pairs),
        })
    }

    pub fn scaled(c: f64, inner: OperatorDesc) -> Self {
        OperatorDesc {
            domain: inner.domain,
            codomain: inner.codomain,
            body: Body::Scaled(c, Box::new(inner)),
        }
    }

    pub fn sum(terms: Vec<OperatorDesc>) -> Result<Self> {
        let first = terms
            .first()
            .ok_or_else(|| FrameError::ShapeMismatch("empty sum".into()))?;
        let (domain, codomain) = (first.domain, first.codomain);
        for t in &terms {
            if t.domain != domain || t.codomain != codomain {
                return Err(FrameError::ShapeMismatch(format!(
                    "sum term {} -> {} does not match {domain} -> {codomain}",
                    t.domain, t.codomain
                )));
            }
        }
        Ok(OperatorDesc {
            domain,
            codomain,
            body: Body::Sum(terms),
        })
    }

    /// `self - other`.
    pub fn minus(&self, other: &OperatorDesc) -> Result<Self> {
        Self::sum(vec![self.clone(), Self::scaled(-1.0, other.clone())])
    }

    /// `I - self` for an operator from a space to itself.
    pub fn identity_minus(&self) -> Result<Self> {
        if self.domain != self.codomain {
            return Err(FrameError::ShapeMismatch(format!(
                "I - A needs A to map a space to itself, got {} -> {}",
                self.domain, self.codomain
            )));
        }
        Self::identity(self.domain).minus(self)
    }

    pub fn domain(&self) -> ModelSpace {
        self.domain
    }

    pub fn codomain(&self) -> ModelSpace {
        self.codomain
    }

    pub fn body(&self) -> &Body {
        &self.body
    }

    pub fn is_square(&self) -> bool {
        self.domain == self.codomain
    }

    pub fn apply(&self, x: &Vector) -> Result<Vector> {
        if x.space() != self.domain {
            return Err(FrameError::SpaceMismatch(format!(
                "operator on {} applied to a vector of {}",
                self.domain,
                x.space()
            )));
        }
        match &self.body {
            Body::Identity => Ok(x.clone()),
            Body::Dense(m) => {
                let xs = x.to_dense(m.ncols());
                let y: Vec<f64> = (0..m.nrows())
                    .map(|i| (0..m.ncols()).map(|j| m[(i, j)] * xs[j]).sum())
                    .collect();
                Vector::from_dense(self.codomain, &y)
            }
            Body::Shift(k) => {
                let k = *k;
                let entries = x.iter().filter_map(|(n, v)| {
                    let target = n as i64 + k;
                    (target >= 1).then_some((target as usize, v))
                });
                Vector::from_entries(self.codomain, entries)
            }
            Body::FiniteRank(pairs) => {
                let mut y = Vector::zero(self.codomain);
                for (v, f) in pairs {
                    let c = f.apply(x)?;
                    if c != 0.0 {
                        y = y.add_scaled(c, v)?;
                    }
                }
                Ok(y)
            }
            Body::Scaled(c, inner) => Ok(inner.apply(x)?.scale(*c)),
            Body::Sum(terms) => {
                let mut y = Vector::zero(self.codomain);
                for t in terms {
                    y = y.add_scaled(1.0, &t.apply(x)?)?;
                }
                Ok(y)
            }
            Body::Compose(terms) => {
                let mut y = x.clone();
                for t in terms.iter().rev() {
                    y = t.apply(&y)?;
                }
                Ok(y)
            }
        }
    }

    /// Structural bound on the largest output index reached from inputs
    /// supported on `1..=n`.
    pub(crate) fn reach(&self, n: usize) -> usize {
        if let Some(d) = self.codomain.dim() {
            return d;
        }
        let n = self.domain.dim().map_or(n, |d| n.min(d));
        match &self.body {
            Body::Identity => n,
            Body::Shift(k) => (n as i64 + k).max(0) as usize,
            Body::Dense(m) => m.nrows(),
            Body::FiniteRank(pairs) => pairs.iter().map(|(v, _)| v.max_index()).max().unwrap_or(0),
            Body::Scaled(_, inner) => inner.reach(n),
            Body::Sum(terms) => terms.iter().map(|t| t.reach(n)).max().unwrap_or(0),
            Body::Compose(terms) => terms.iter().rev().fold(n, |acc, t| t.reach(acc)),
        }
    }
}

/// `a ∘ b`.
pub fn compose(a: &OperatorDesc, b: &OperatorDesc) -> Result<OperatorDesc> {
    compose_all(vec![a.clone(), b.clone()])
}

/// `terms[0] ∘ terms[1] ∘ ...`, flattening nested compositions.
pub fn compose_all(terms: Vec<OperatorDesc>) -> Result<OperatorDesc> {
    let mut flat = Vec::with_capacity(terms.len());
    for t in terms {
        match t.body {
            Body::Compose(inner) => flat.extend(inner),
            _ => flat.push(t),
        }
    }
    if flat.is_empty() {
        return Err(FrameError::ShapeMismatch("empty composition".into()));
    }
    for pair in flat.windows(2) {
        if pair[0].domain != pair[1].codomain {
            return Err(FrameError::ShapeMismatch(format!(
                "cannot compose {} -> {} after {} -> {}",
                pair[0].domain, pair[0].codomain, pair[1].domain, pair[1].codomain
            )));
        }
    }
    if flat.len() == 1 {
        return Ok(flat.pop().unwrap());
    }
    Ok(OperatorDesc {
        domain: flat.last().unwrap().domain,
        codomain: flat[0].codomain,
        body: Body::Compose(flat),
    })
}

/// Column compression `A P_n` as a dense `rows x n` matrix, where `rows` is
/// the codomain dimension or the largest reachable output index.
///
/// Finite domains clamp `n` to their dimension.
pub fn materialize(a: &OperatorDesc, n: usize) -> DMatrix<f64> {
    let cols = a.domain.dim().map_or(n, |d| n.min(d)).max(1);
    let columns: Vec<Vector> = (1..=cols)
        .map(|k| {
            let e = Vector::basis(a.domain, k).expect("index within domain");
            a.apply(&e).expect("basis vector lies in the domain")
        })
        .collect();
    let rows = match a.codomain.dim() {
        Some(d) => d,
        None => {
            let seen = columns.iter().map(Vector::max_index).max().unwrap_or(0);
            a.reach(cols).max(seen).max(1)
        }
    };
    let mut m = DMatrix::zeros(rows, cols);
    for (j, col) in columns.iter().enumerate() {
        for (i, v) in col.iter() {
            m[(i - 1, j)] = v;
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequence::Exponent;
    use nalgebra::dmatrix;

    fn seq() -> ModelSpace {
        ModelSpace::sequence(Exponent::new(2.0).unwrap())
    }

    fn basis(n: usize) -> Vector {
        Vector::basis(seq(), n).unwrap()
    }

    #[test]
    fn shifts_on_basis_vectors() {
        let r = OperatorDesc::right_shift(seq()).unwrap();
        let l = OperatorDesc::left_shift(seq()).unwrap();
        assert_eq!(r.apply(&basis(1)).unwrap(), basis(2));
        assert!(l.apply(&basis(1)).unwrap().is_zero());
        assert_eq!(l.apply(&basis(3)).unwrap(), basis(2));
        let id = OperatorDesc::identity(seq());
        let x = Vector::from_entries(seq(), [(1, 2.0), (4, -1.0)]).unwrap();
        assert_eq!(id.apply(&x).unwrap(), x);
        assert!(OperatorDesc::shift(ModelSpace::finite(3, Exponent::new(2.0).unwrap()).unwrap(), 1).is_err());
    }

    #[test]
    fn shift_compositions() {
        let r = OperatorDesc::right_shift(seq()).unwrap();
        let l = OperatorDesc::left_shift(seq()).unwrap();
        let lr = compose(&l, &r).unwrap();
        let rl = compose(&r, &l).unwrap();
        for n in 1..=12 {
            assert_eq!(lr.apply(&basis(n)).unwrap(), basis(n));
            let expected = if n == 1 { Vector::zero(seq()) } else { basis(n) };
            assert_eq!(rl.apply(&basis(n)).unwrap(), expected);
        }
        let x = Vector::from_entries(seq(), [(1, 3.0), (2, -1.0), (7, 0.5)]).unwrap();
        assert_eq!(lr.apply(&x).unwrap(), x);
        let id_a = compose(&OperatorDesc::identity(seq()), &r).unwrap();
        assert_eq!(id_a.apply(&x).unwrap(), r.apply(&x).unwrap());
    }

    #[test]
    fn compose_rejects_mismatched_shapes() {
        let p = Exponent::new(2.0).unwrap();
        let a = OperatorDesc::from_matrix(DMatrix::identity(2, 3), p).unwrap();
        let b = OperatorDesc::from_matrix(DMatrix::identity(2, 2), p).unwrap();
        assert!(matches!(compose(&a, &b), Err(FrameError::ShapeMismatch(_))));
        assert!(compose(&b, &a).is_ok());
    }

    #[test]
    fn materialize_examples() {
        let p = Exponent::new(2.0).unwrap();
        let f3 = ModelSpace::finite(3, p).unwrap();
        assert_eq!(materialize(&OperatorDesc::identity(f3), 3), DMatrix::identity(3, 3));

        let r = OperatorDesc::right_shift(seq()).unwrap();
        assert_eq!(materialize(&r, 2), dmatrix![0.0, 0.0; 1.0, 0.0; 0.0, 1.0]);

        let l = OperatorDesc::left_shift(seq()).unwrap();
        let defect = compose(&r, &l).unwrap().identity_minus().unwrap();
        let mut expected = DMatrix::zeros(4, 4);
        expected[(0, 0)] = 1.0;
        assert_eq!(materialize(&defect, 4), expected);
    }

    #[test]
    fn materialize_matches_apply_on_basis() {
        let r = OperatorDesc::right_shift(seq()).unwrap();
        let l = OperatorDesc::left_shift(seq()).unwrap();
        let fr = OperatorDesc::finite_rank(
            seq(),
            seq(),
            vec![(
                Vector::from_entries(seq(), [(3, 2.0)]).unwrap(),
                Functional::from_entries(seq(), [(1, 1.0), (5, -1.0)]).unwrap(),
            )],
        )
        .unwrap();
        let a = OperatorDesc::sum(vec![
            compose_all(vec![r.clone(), r.clone(), l.clone()]).unwrap(),
            OperatorDesc::scaled(0.5, fr),
            OperatorDesc::scaled(-2.0, l),
        ])
        .unwrap();
        let m = materialize(&a, 7);
        for k in 1..=7 {
            let col = a.apply(&basis(k)).unwrap();
            for i in 1..=m.nrows() {
                assert_eq!(m[(i - 1, k - 1)], col.get(i));
            }
            assert!(col.max_index() <= m.nrows());
        }
    }
}
