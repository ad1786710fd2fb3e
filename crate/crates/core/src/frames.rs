//! Frame systems `({f_n}, {tau_n})` and their analysis, synthesis and frame
//! operators.

use std::fmt;

use nalgebra::DMatrix;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{FrameError, Result};
use crate::operator::{
    compose, find_noninvertibility_witness, invert_finite, materialize, operator_pnorm,
    BandedForm, NormOptions, OperatorDesc, Witness,
};
use crate::sequence::{Exponent, Functional, ModelSpace, Vector};

/// Horizon used when looking for non-invertibility witnesses.
pub const WITNESS_HORIZON: usize = 32;

#[derive(Clone, Debug, PartialEq)]
pub enum Family {
    /// Finite family on a finite space: analysis is `m x d` (row `n` holds
    /// the coefficients of `f_n`), synthesis is `d x m` (column `n` is `tau_n`).
    Dense {
        analysis: DMatrix<f64>,
        synthesis: DMatrix<f64>,
    },
    /// Finite family on the sequence space.
    Listed {
        functionals: Vec<Functional>,
        vectors: Vec<Vector>,
    },
    /// `f_n = zeta_n ∘ U`, `tau_n = V e_n`, evaluated lazily.
    Generated {
        analysis: OperatorDesc,
        synthesis: OperatorDesc,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct FrameSystem {
    space: ModelSpace,
    family: Family,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BesselBounds {
    /// analysis bound
    pub c: f64,
    /// synthesis bound
    pub d: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FrameBounds {
    pub a: f64,
    pub b: f64,
}

impl FrameSystem {
    /// Builds a finite family; finite spaces store it densely.
    pub fn listed(
        space: ModelSpace,
        functionals: Vec<Functional>,
        vectors: Vec<Vector>,
    ) -> Result<Self> {
        if functionals.len() != vectors.len() {
            return Err(FrameError::ShapeMismatch(format!(
                "{} functionals paired with {} vectors",
                functionals.len(),
                vectors.len()
            )));
        }
        if functionals.is_empty() {
            return Err(FrameError::ShapeMismatch("empty frame system".into()));
        }
        for (n, (f, v)) in functionals.iter().zip(&vectors).enumerate() {
            if f.space() != space || v.space() != space {
                return Err(FrameError::SpaceMismatch(format!(
                    "element {} does not live in {space}",
                    n + 1
                )));
            }
        }
        match space.dim() {
            Some(d) => {
                let m = functionals.len();
                let analysis = DMatrix::from_fn(m, d, |i, j| functionals[i].coefficient(j + 1));
                let synthesis = DMatrix::from_fn(d, m, |i, j| vectors[j].get(i + 1));
                Ok(FrameSystem {
                    space,
                    family: Family::Dense {
                        analysis,
                        synthesis,
                    },
                })
            }
            None => Ok(FrameSystem {
                space,
                family: Family::Listed {
                    functionals,
                    vectors,
                },
            }),
        }
    }

    /// `analysis` is `m x d`, `synthesis` is `d x m`.
    pub fn from_matrices(
        space: ModelSpace,
        analysis: DMatrix<f64>,
        synthesis: DMatrix<f64>,
    ) -> Result<Self> {
        let d = space
            .dim()
            .ok_or_else(|| FrameError::NotFinite("matrix families need a finite space".into()))?;
        let m = analysis.nrows();
        if m == 0 || analysis.ncols() != d || synthesis.shape() != (d, m) {
            return Err(FrameError::ShapeMismatch(format!(
                "analysis {:?} and synthesis {:?} do not fit dimension {d}",
                analysis.shape(),
                synthesis.shape()
            )));
        }
        Ok(FrameSystem {
            space,
            family: Family::Dense {
                analysis,
                synthesis,
            },
        })
    }

    /// `f_n = zeta_n ∘ U`, `tau_n = V e_n`.
    pub fn generated(space: ModelSpace, u: OperatorDesc, v: OperatorDesc) -> Result<Self> {
        if u.domain() != space || v.codomain() != space {
            return Err(FrameError::SpaceMismatch(format!(
                "U must start and V must end in {space}"
            )));
        }
        if u.codomain() != v.domain() {
            return Err(FrameError::ShapeMismatch(format!(
                "U maps into {} but V starts from {}",
                u.codomain(),
                v.domain()
            )));
        }
        Ok(FrameSystem {
            space,
            family: Family::Generated {
                analysis: u,
                synthesis: v,
            },
        })
    }

    /// The coordinate system `(zeta_n, e_n)`.
    pub fn standard(space: ModelSpace) -> Self {
        match space.dim() {
            Some(d) => FrameSystem {
                space,
                family: Family::Dense {
                    analysis: DMatrix::identity(d, d),
                    synthesis: DMatrix::identity(d, d),
                },
            },
            None => FrameSystem {
                space,
                family: Family::Generated {
                    analysis: OperatorDesc::identity(space),
                    synthesis: OperatorDesc::identity(space),
                },
            },
        }
    }

    pub fn space(&self) -> ModelSpace {
        self.space
    }

    pub fn exponent(&self) -> Exponent {
        self.space.exponent()
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    /// Number of elements, or `None` for an infinite generated family.
    pub fn len(&self) -> Option<usize> {
        match &self.family {
            Family::Dense { analysis, .. } => Some(analysis.nrows()),
            Family::Listed { functionals, .. } => Some(functionals.len()),
            Family::Generated { analysis, .. } => analysis.codomain().dim(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == Some(0)
    }

    /// The `l^p` model the analysis operator maps into.
    pub fn coefficient_space(&self) -> ModelSpace {
        match &self.family {
            Family::Generated { analysis, .. } => analysis.codomain(),
            _ => ModelSpace::finite(self.len().unwrap_or(1), self.exponent())
                .expect("families are nonempty"),
        }
    }

    fn check_element(&self, n: usize) -> Result<()> {
        match self.len() {
            Some(m) if n == 0 || n > m => Err(FrameError::IndexOutOfRange { index: n, dim: m }),
            None if n == 0 => Err(FrameError::IndexOutOfRange { index: 0, dim: 0 }),
            _ => Ok(()),
        }
    }

    /// The functional `f_n` (1-based).
    pub fn functional(&self, n: usize) -> Result<Functional> {
        self.check_element(n)?;
        match &self.family {
            Family::Dense { analysis, .. } => {
                let row: Vec<f64> = analysis.row(n - 1).iter().copied().collect();
                Functional::from_dense(self.space, &row)
            }
            Family::Listed { functionals, .. } => Ok(functionals[n - 1].clone()),
            Family::Generated { analysis, .. } => {
                let form = BandedForm::from_desc(analysis).ok_or_else(|| {
                    FrameError::UnboundedCertificate("analysis operator too complex".into())
                })?;
                Functional::from_entries(self.space, form.row(n))
            }
        }
    }

    /// The vector `tau_n` (1-based).
    pub fn vector(&self, n: usize) -> Result<Vector> {
        self.check_element(n)?;
        match &self.family {
            Family::Dense { synthesis, .. } => {
                let col: Vec<f64> = synthesis.column(n - 1).iter().copied().collect();
                Vector::from_dense(self.space, &col)
            }
            Family::Listed { vectors, .. } => Ok(vectors[n - 1].clone()),
            Family::Generated { synthesis, .. } => {
                synthesis.apply(&Vector::basis(synthesis.domain(), n)?)
            }
        }
    }

    /// Analysis matrix (`m x d`) of a finite family on a finite space.
    pub fn analysis_matrix(&self) -> Result<DMatrix<f64>> {
        match &self.family {
            Family::Dense { analysis, .. } => Ok(analysis.clone()),
            _ => self.finite_matrix(&analysis_operator(self)),
        }
    }

    /// Synthesis matrix (`d x m`) of a finite family on a finite space.
    pub fn synthesis_matrix(&self) -> Result<DMatrix<f64>> {
        match &self.family {
            Family::Dense { synthesis, .. } => Ok(synthesis.clone()),
            _ => self.finite_matrix(&synthesis_operator(self)),
        }
    }

    fn finite_matrix(&self, op: &OperatorDesc) -> Result<DMatrix<f64>> {
        match (op.domain().dim(), op.codomain().dim()) {
            (Some(n), Some(_)) => Ok(materialize(op, n)),
            _ => Err(FrameError::NotFinite(format!(
                "{} -> {} has no finite matrix",
                op.domain(),
                op.codomain()
            ))),
        }
    }

    /// `({f_n} of self, {tau_n} of other)`, e.g. the system `({f_n}, {omega_n})`.
    pub fn mixed(&self, other: &FrameSystem) -> Result<FrameSystem> {
        if self.space != other.space {
            return Err(FrameError::SpaceMismatch(format!(
                "cannot mix systems on {} and {}",
                self.space, other.space
            )));
        }
        if let (Family::Dense { analysis, .. }, Family::Dense { synthesis, .. }) =
            (&self.family, &other.family)
        {
            return FrameSystem::from_matrices(self.space, analysis.clone(), synthesis.clone());
        }
        FrameSystem::generated(
            self.space,
            analysis_operator(self),
            synthesis_operator(other),
        )
    }

    /// Same families read in a different `l^p`.
    pub fn with_exponent(&self, p: Exponent) -> Result<FrameSystem> {
        let space = self.space.with_exponent(p);
        if self.exponent() == p {
            return Ok(self.clone());
        }
        match &self.family {
            Family::Dense {
                analysis,
                synthesis,
            } => FrameSystem::from_matrices(space, analysis.clone(), synthesis.clone()),
            _ => FrameSystem::from_json(&self.to_json_with_p(p.get()), "frame"),
        }
    }

    pub fn to_json(&self) -> Value {
        self.to_json_with_p(self.exponent().get())
    }

    fn to_json_with_p(&self, p: f64) -> Value {
        match &self.family {
            Family::Generated {
                analysis,
                synthesis,
            } => json!({
                "p": p,
                "space": self.space.to_json(),
                "generated": {"U": analysis.to_json(), "V": synthesis.to_json()},
            }),
            _ => {
                let m = self.len().unwrap_or(0);
                let fs: Vec<Value> = (1..=m)
                    .map(|n| self.functional(n).map(|f| f.to_json()))
                    .collect::<Result<_>>()
                    .expect("finite family elements");
                let vs: Vec<Value> = (1..=m)
                    .map(|n| self.vector(n).map(|v| v.to_json()))
                    .collect::<Result<_>>()
                    .expect("finite family elements");
                json!({"p": p, "space": self.space.to_json(), "functionals": fs, "vectors": vs})
            }
        }
    }

    pub fn from_json(value: &Value, path: &str) -> Result<FrameSystem> {
        let p = value
            .get("p")
            .and_then(Value::as_f64)
            .ok_or_else(|| FrameError::parse(format!("{path}.p"), "expected a number"))?;
        let p = Exponent::new(p).map_err(|e| FrameError::parse(format!("{path}.p"), e.to_string()))?;
        let space_value = value
            .get("space")
            .ok_or_else(|| FrameError::parse(format!("{path}.space"), "missing"))?;
        let space = ModelSpace::from_json(space_value, p, &format!("{path}.space"))?;
        if let Some(generated) = value.get("generated") {
            let gp = format!("{path}.generated");
            let u_value = generated
                .get("U")
                .ok_or_else(|| FrameError::parse(format!("{gp}.U"), "missing"))?;
            let u = OperatorDesc::from_json(u_value, space, &format!("{gp}.U"))?;
            let v_value = generated
                .get("V")
                .ok_or_else(|| FrameError::parse(format!("{gp}.V"), "missing"))?;
            let v = OperatorDesc::from_json(v_value, u.codomain(), &format!("{gp}.V"))?;
            return FrameSystem::generated(space, u, v)
                .map_err(|e| FrameError::parse(gp, e.to_string()));
        }
        let array = |key: &str| {
            value
                .get(key)
                .and_then(Value::as_array)
                .ok_or_else(|| FrameError::parse(format!("{path}.{key}"), "expected an array"))
        };
        let functionals = array("functionals")?
            .iter()
            .enumerate()
            .map(|(k, f)| Functional::from_json(space, f, &format!("{path}.functionals[{k}]")))
            .collect::<Result<Vec<_>>>()?;
        let vectors = array("vectors")?
            .iter()
            .enumerate()
            .map(|(k, v)| Vector::from_json(space, v, &format!("{path}.vectors[{k}]")))
            .collect::<Result<Vec<_>>>()?;
        FrameSystem::listed(space, functionals, vectors)
            .map_err(|e| FrameError::parse(path, e.to_string()))
    }
}

impl fmt::Display for FrameSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.len() {
            Some(m) => write!(f, "{m}-element system on {}", self.space),
            None => write!(f, "generated system on {}", self.space),
        }
    }
}

/// `theta_f : x ↦ {f_n(x)}_n`.
pub fn analysis_operator(frame: &FrameSystem) -> OperatorDesc {
    let space = frame.space;
    match &frame.family {
        Family::Dense { analysis, .. } => {
            let coeff = frame.coefficient_space();
            OperatorDesc::dense(space, coeff, analysis.clone()).expect("dense family shapes")
        }
        Family::Listed { functionals, .. } => {
            let coeff = frame.coefficient_space();
            let pairs = functionals
                .iter()
                .enumerate()
                .map(|(k, f)| (Vector::basis(coeff, k + 1).expect("index in range"), f.clone()))
                .collect();
            OperatorDesc::finite_rank(space, coeff, pairs).expect("listed family spaces")
        }
        Family::Generated { analysis, .. } => analysis.clone(),
    }
}

/// `theta_tau : {a_n} ↦ sum_n a_n tau_n`.
pub fn synthesis_operator(frame: &FrameSystem) -> OperatorDesc {
    let space = frame.space;
    match &frame.family {
        Family::Dense { synthesis, .. } => {
            let coeff = frame.coefficient_space();
            OperatorDesc::dense(coeff, space, synthesis.clone()).expect("dense family shapes")
        }
        Family::Listed { vectors, .. } => {
            let coeff = frame.coefficient_space();
            let pairs = vectors
                .iter()
                .enumerate()
                .map(|(k, v)| {
                    (
                        v.clone(),
                        Functional::coordinate(coeff, k + 1).expect("index in range"),
                    )
                })
                .collect();
            OperatorDesc::finite_rank(coeff, space, pairs).expect("listed family spaces")
        }
        Family::Generated { synthesis, .. } => synthesis.clone(),
    }
}

/// `S_{f,tau} = theta_tau ∘ theta_f`.
pub fn frame_operator(frame: &FrameSystem) -> OperatorDesc {
    compose(&synthesis_operator(frame), &analysis_operator(frame))
        .expect("analysis and synthesis share the coefficient space")
}

/// Upper bounds on `‖theta_f‖` and `‖theta_tau‖`.
pub fn validate_p_abs(frame: &FrameSystem, opts: &NormOptions) -> Result<BesselBounds> {
    let p = frame.exponent();
    let c = operator_pnorm(&analysis_operator(frame), p, opts).upper;
    let d = operator_pnorm(&synthesis_operator(frame), p, opts).upper;
    if !c.is_finite() || !d.is_finite() {
        return Err(FrameError::UnboundedCertificate(format!(
            "analysis bound {c}, synthesis bound {d}"
        )));
    }
    Ok(BesselBounds { c, d })
}

/// Checks the Bessel bounds and invertibility of the frame operator, and
/// returns `b = upper(‖S‖)` and `a = 1 / upper(‖S^{-1}‖)`.
///
/// On the sequence space invertibility is never certified from finite
/// evidence: the result is `NotInvertible` with a witness, or `Undecided`.
pub fn validate_p_asf(frame: &FrameSystem, opts: &NormOptions) -> Result<FrameBounds> {
    validate_p_abs(frame, opts)?;
    let p = frame.exponent();
    let s = frame_operator(frame);
    if !frame.space.is_finite() {
        return match find_noninvertibility_witness(&s, WITNESS_HORIZON)? {
            Witness::NoneFound => Err(FrameError::Undecided(
                "invertibility on the sequence space is not decided from compressions".into(),
            )),
            w => Err(FrameError::NotInvertible { witness: Some(w) }),
        };
    }
    let inverse = match invert_finite(&s) {
        Ok(inv) => inv,
        Err(FrameError::SingularOperator(_)) => {
            let witness = match find_noninvertibility_witness(&s, WITNESS_HORIZON)? {
                Witness::NoneFound => None,
                w => Some(w),
            };
            return Err(FrameError::NotInvertible { witness });
        }
        Err(e) => return Err(e),
    };
    let b = operator_pnorm(&s, p, opts).upper;
    let inv_upper = operator_pnorm(&inverse, p, opts).upper;
    Ok(FrameBounds { a: 1.0 / inv_upper, b })
}

/// `U = theta_f`, `V = theta_tau`, so `f_n = zeta_n U` and `tau_n = V e_n`.
pub fn factorize_abs(frame: &FrameSystem) -> (OperatorDesc, OperatorDesc) {
    (analysis_operator(frame), synthesis_operator(frame))
}

/// The system `(zeta_n ∘ U, V e_n)`; finite operators give a dense family.
pub fn build_from_factorization(
    space: ModelSpace,
    u: &OperatorDesc,
    v: &OperatorDesc,
) -> Result<FrameSystem> {
    if let (Some(d), Some(m)) = (space.dim(), u.codomain().dim()) {
        if u.domain() != space || v.codomain() != space || v.domain() != u.codomain() {
            return Err(FrameError::ShapeMismatch(format!(
                "U: {} -> {}, V: {} -> {} do not factor through {space}",
                u.domain(),
                u.codomain(),
                v.domain(),
                v.codomain()
            )));
        }
        return FrameSystem::from_matrices(space, materialize(u, d), materialize(v, m));
    }
    FrameSystem::generated(space, u.clone(), v.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::Body;
    use nalgebra::dmatrix;

    fn p(v: f64) -> Exponent {
        Exponent::new(v).unwrap()
    }

    fn finite(d: usize, pv: f64) -> ModelSpace {
        ModelSpace::finite(d, p(pv)).unwrap()
    }

    fn diag_system(pv: f64) -> FrameSystem {
        FrameSystem::from_matrices(
            finite(2, pv),
            dmatrix![2.0, 0.0; 0.0, 1.0],
            DMatrix::identity(2, 2),
        )
        .unwrap()
    }

    fn shift_system(pv: f64, power: i64) -> FrameSystem {
        let seq = ModelSpace::sequence(p(pv));
        FrameSystem::generated(
            seq,
            OperatorDesc::identity(seq),
            OperatorDesc::shift(seq, power).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn operators_of_the_standard_system() {
        let f = FrameSystem::standard(finite(3, 2.0));
        assert_eq!(materialize(&analysis_operator(&f), 3), DMatrix::identity(3, 3));
        assert_eq!(materialize(&synthesis_operator(&f), 3), DMatrix::identity(3, 3));
        assert_eq!(materialize(&frame_operator(&f), 3), DMatrix::identity(3, 3));
    }

    #[test]
    fn assembled_operators() {
        let f = diag_system(2.0);
        assert_eq!(materialize(&analysis_operator(&f), 2), dmatrix![2.0, 0.0; 0.0, 1.0]);
        assert_eq!(materialize(&frame_operator(&f), 2), dmatrix![2.0, 0.0; 0.0, 1.0]);

        let s = finite(2, 2.0);
        let e = |n| Vector::basis(s, n).unwrap();
        let z = |n| Functional::coordinate(s, n).unwrap();
        let rep = FrameSystem::listed(s, vec![z(1), z(1), z(2)], vec![e(1), e(1), e(2)]).unwrap();
        assert_eq!(
            materialize(&synthesis_operator(&rep), 3),
            dmatrix![1.0, 1.0, 0.0; 0.0, 0.0, 1.0]
        );
    }

    #[test]
    fn shift_systems() {
        let f = shift_system(2.0, 1);
        assert_eq!(*analysis_operator(&f).body(), Body::Identity);
        assert_eq!(*synthesis_operator(&f).body(), Body::Shift(1));
        let seq = f.space();
        assert_eq!(f.vector(3).unwrap(), Vector::basis(seq, 4).unwrap());
        assert_eq!(f.functional(3).unwrap(), Functional::coordinate(seq, 3).unwrap());

        let second = shift_system(2.0, -1);
        let s = frame_operator(&second);
        for n in 1..=8 {
            let e = Vector::basis(seq, n).unwrap();
            let expected = if n == 1 { Vector::zero(seq) } else { Vector::basis(seq, n - 1).unwrap() };
            assert_eq!(s.apply(&e).unwrap(), expected);
        }
    }

    #[test]
    fn bessel_bounds() {
        let opts = NormOptions::default();
        let b = validate_p_abs(&FrameSystem::standard(finite(4, 2.0)), &opts).unwrap();
        assert!((b.c - 1.0).abs() < 1e-12 && (b.d - 1.0).abs() < 1e-12);
        let b = validate_p_abs(&diag_system(2.0), &opts).unwrap();
        assert!((b.c - 2.0).abs() < 1e-12 && (b.d - 1.0).abs() < 1e-12);
        for &pv in &[1.0, 2.0, 3.0] {
            let b = validate_p_abs(&shift_system(pv, 1), &opts).unwrap();
            assert_eq!((b.c, b.d), (1.0, 1.0));
        }
    }

    #[test]
    fn frame_bounds() {
        let opts = NormOptions::default();
        let fb = validate_p_asf(&FrameSystem::standard(finite(3, 2.0)), &opts).unwrap();
        assert!((fb.a - 1.0).abs() < 1e-12 && (fb.b - 1.0).abs() < 1e-12);
        let fb = validate_p_asf(&diag_system(1.0), &opts).unwrap();
        assert!((fb.a - 1.0).abs() < 1e-12 && (fb.b - 2.0).abs() < 1e-12);
    }

    #[test]
    fn noninvertible_frame_operators() {
        let opts = NormOptions::default();
        let seq = ModelSpace::sequence(p(2.0));
        match validate_p_asf(&shift_system(2.0, -1), &opts) {
            Err(FrameError::NotInvertible { witness: Some(Witness::KernelVec(x)) }) => {
                assert_eq!(x, Vector::basis(seq, 1).unwrap());
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            validate_p_asf(&FrameSystem::standard(seq), &opts),
            Err(FrameError::Undecided(_))
        ));
        let s = finite(2, 2.0);
        let rank_one = FrameSystem::from_matrices(s, dmatrix![1.0, 1.0; 1.0, 1.0], DMatrix::identity(2, 2)).unwrap();
        assert!(matches!(
            validate_p_asf(&rank_one, &opts),
            Err(FrameError::NotInvertible { witness: Some(Witness::KernelVec(_)) })
        ));
    }

    #[test]
    fn factorization_round_trip() {
        let f = diag_system(2.0);
        let (u, v) = factorize_abs(&f);
        assert_eq!(materialize(&u, 2), dmatrix![2.0, 0.0; 0.0, 1.0]);
        assert_eq!(materialize(&v, 2), DMatrix::identity(2, 2));
        assert_eq!(build_from_factorization(f.space(), &u, &v).unwrap(), f);

        let s = finite(2, 2.0);
        let u = OperatorDesc::from_matrix(DMatrix::identity(2, 2), p(2.0)).unwrap();
        let v = OperatorDesc::from_matrix(dmatrix![1.0, 1.0; 0.0, 0.0], p(2.0)).unwrap();
        let rep = build_from_factorization(s, &u, &v).unwrap();
        assert_eq!(rep.vector(1).unwrap(), Vector::basis(s, 1).unwrap());
        assert_eq!(rep.vector(2).unwrap(), Vector::basis(s, 1).unwrap());

        let seq = ModelSpace::sequence(p(2.0));
        let shifted = build_from_factorization(
            seq,
            &OperatorDesc::identity(seq),
            &OperatorDesc::right_shift(seq).unwrap(),
        )
        .unwrap();
        assert_eq!(shifted, shift_system(2.0, 1));
    }

    #[test]
    fn json_round_trip_and_exponent_override() {
        let f = diag_system(2.0);
        let g = FrameSystem::from_json(&f.to_json(), "F").unwrap();
        assert_eq!(f, g);
        let h = shift_system(1.5, 1);
        assert_eq!(FrameSystem::from_json(&h.to_json(), "F").unwrap(), h);
        let h3 = h.with_exponent(p(3.0)).unwrap();
        assert_eq!(h3.exponent(), p(3.0));
        let bad = serde_json::json!({"p": 2.0, "space": {"kind": "finite", "dim": 2},
            "functionals": [[1.0, 0.0]], "vectors": [[1.0, 0.0], [0.0, 1.0]]});
        assert!(FrameSystem::from_json(&bad, "F").is_err());
    }
}
