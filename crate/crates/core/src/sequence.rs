//! Concrete model spaces: finite-dimensional `l^p_d` and the space of
//! finitely supported sequences inside `l^p(N)`.
//!
//! Indices are 1-based throughout, so `e_1` is the first basis vector and
//! `zeta_1` its coordinate functional.

use std::collections::BTreeMap;
use std::fmt;

use serde_json::{Map, Value};

use crate::error::{FrameError, Result};

/// An exponent `p` in `[1, inf)`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct Exponent(f64);

impl Exponent {
    pub fn new(p: f64) -> Result<Self> {
        if p.is_finite() && p >= 1.0 {
            Ok(Exponent(p))
        } else {
            Err(FrameError::InvalidExponent(p))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }

    /// Hölder conjugate `q` with `1/p + 1/q = 1`; infinite for `p = 1`.
    pub fn conjugate(self) -> f64 {
        if self.0 == 1.0 {
            f64::INFINITY
        } else {
            self.0 / (self.0 - 1.0)
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpaceKind {
    Finite(usize),
    Sequence,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelSpace {
    kind: SpaceKind,
    exponent: Exponent,
}

impl ModelSpace {
    pub fn finite(dim: usize, exponent: Exponent) -> Result<Self> {
        if dim == 0 {
            return Err(FrameError::InvalidDimension(dim));
        }
        Ok(ModelSpace {
            kind: SpaceKind::Finite(dim),
            exponent,
        })
    }

    pub fn sequence(exponent: Exponent) -> Self {
        ModelSpace {
            kind: SpaceKind::Sequence,
            exponent,
        }
    }

    pub fn kind(&self) -> SpaceKind {
        self.kind
    }

    pub fn exponent(&self) -> Exponent {
        self.exponent
    }

    pub fn dim(&self) -> Option<usize> {
        match self.kind {
            SpaceKind::Finite(d) => Some(d),
            SpaceKind::Sequence => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self.kind, SpaceKind::Finite(_))
    }

    /// Same space with a different exponent.
    pub fn with_exponent(&self, exponent: Exponent) -> Self {
        ModelSpace {
            kind: self.kind,
            exponent,
        }
    }

    pub(crate) fn check_index(&self, index: usize) -> Result<()> {
        if index == 0 {
            return Err(FrameError::IndexOutOfRange {
                index,
                dim: self.dim().unwrap_or(usize::MAX),
            });
        }
        match self.kind {
            SpaceKind::Finite(dim) if index > dim => {
                Err(FrameError::IndexOutOfRange { index, dim })
            }
            _ => Ok(()),
        }
    }

    pub fn to_json(&self) -> Value {
        match self.kind {
            SpaceKind::Finite(d) => serde_json::json!({"kind": "finite", "dim": d}),
            SpaceKind::Sequence => serde_json::json!({"kind": "sequence"}),
        }
    }

    pub fn from_json(value: &Value, exponent: Exponent, path: &str) -> Result<Self> {
        let kind = value
            .get("kind")
            .and_then(Value::as_str)
            .ok_or_else(|| FrameError::parse(format!("{path}.kind"), "expected a string"))?;
        match kind {
            "finite" => {
                let dim = value.get("dim").and_then(Value::as_u64).ok_or_else(|| {
                    FrameError::parse(format!("{path}.dim"), "expected a positive integer")
                })?;
                ModelSpace::finite(dim as usize, exponent)
            }
            "sequence" => Ok(ModelSpace::sequence(exponent)),
            other => Err(FrameError::parse(
                format!("{path}.kind"),
                format!("unknown space kind '{other}'"),
            )),
        }
    }
}

impl fmt::Display for ModelSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            SpaceKind::Finite(d) => write!(f, "l^{}_{}", self.exponent, d),
            SpaceKind::Sequence => write!(f, "l^{}(N)", self.exponent),
        }
    }
}

/// p-norm of a coefficient slice, scaled by the largest magnitude to avoid
/// overflow for large `p`.
pub(crate) fn slice_p_norm<'a>(values: impl IntoIterator<Item = &'a f64> + Clone, p: f64) -> f64 {
    let scale = values.clone().into_iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return scale;
    }
    if p == 1.0 {
        return values.into_iter().map(|v| v.abs()).sum();
    }
    let sum: f64 = values.into_iter().map(|v| (v.abs() / scale).powf(p)).sum();
    scale * sum.powf(1.0 / p)
}

/// Dual-exponent norm; `q = inf` gives the max norm.
pub(crate) fn slice_q_norm<'a>(values: impl IntoIterator<Item = &'a f64> + Clone, q: f64) -> f64 {
    if q.is_infinite() {
        values.into_iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    } else {
        slice_p_norm(values, q)
    }
}

fn insert_nonzero(map: &mut BTreeMap<usize, f64>, index: usize, value: f64) {
    if value != 0.0 {
        map.insert(index, value);
    } else {
        map.remove(&index);
    }
}

/// A finitely supported vector of a model space.
#[derive(Clone, Debug, PartialEq)]
pub struct Vector {
    space: ModelSpace,
    entries: BTreeMap<usize, f64>,
}

impl Vector {
    pub fn zero(space: ModelSpace) -> Self {
        Vector {
            space,
            entries: BTreeMap::new(),
        }
    }

    /// Entry `k` of `values` becomes coordinate `k + 1`.
    pub fn from_dense(space: ModelSpace, values: &[f64]) -> Result<Self> {
        Self::from_entries(
            space,
            values.iter().enumerate().map(|(k, &v)| (k + 1, v)),
        )
    }

    pub fn from_entries(
        space: ModelSpace,
        entries: impl IntoIterator<Item = (usize, f64)>,
    ) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (index, value) in entries {
            space.check_index(index)?;
            if value != 0.0 {
                *map.entry(index).or_insert(0.0) += value;
            }
        }
        map.retain(|_, v| *v != 0.0);
        Ok(Vector {
            space,
            entries: map,
        })
    }

    pub fn basis(space: ModelSpace, n: usize) -> Result<Self> {
        space.check_index(n)?;
        Ok(Vector {
            space,
            entries: BTreeMap::from([(n, 1.0)]),
        })
    }

    pub fn space(&self) -> ModelSpace {
        self.space
    }

    pub fn get(&self, index: usize) -> f64 {
        self.entries.get(&index).copied().unwrap_or(0.0)
    }

    /// Nonzero entries in increasing index order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.entries.iter().map(|(&k, &v)| (k, v))
    }

    pub fn support_len(&self) -> usize {
        self.entries.len()
    }

    /// Largest index with a nonzero entry, or 0 for the zero vector.
    pub fn max_index(&self) -> usize {
        self.entries.keys().next_back().copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn p_norm(&self) -> f64 {
        slice_p_norm(self.entries.values(), self.space.exponent.get())
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.values().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn scale(&self, c: f64) -> Vector {
        let mut out = Vector::zero(self.space);
        if c != 0.0 {
            for (k, v) in self.iter() {
                insert_nonzero(&mut out.entries, k, c * v);
            }
        }
        out
    }

    /// `self + c * other`.
    pub fn add_scaled(&self, c: f64, other: &Vector) -> Result<Vector> {
        if self.space != other.space {
            return Err(FrameError::SpaceMismatch(format!(
                "cannot add a vector of {} to one of {}",
                other.space, self.space
            )));
        }
        let mut out = self.clone();
        for (k, v) in other.iter() {
            let sum = out.get(k) + c * v;
            insert_nonzero(&mut out.entries, k, sum);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Vector) -> Result<Vector> {
        self.add_scaled(-1.0, other)
    }

    /// Dense coefficients `1..=len`.
    pub fn to_dense(&self, len: usize) -> Vec<f64> {
        (1..=len).map(|k| self.get(k)).collect()
    }

    pub fn to_json(&self) -> Value {
        coeffs_to_json(&self.space, &self.entries)
    }

    pub fn from_json(space: ModelSpace, value: &Value, path: &str) -> Result<Self> {
        let entries = coeffs_from_json(&space, value, path)?;
        Ok(Vector { space, entries })
    }
}

/// A finitely supported linear functional `f(x) = sum_n c_n x_n`.
#[derive(Clone, Debug, PartialEq)]
pub struct Functional {
    space: ModelSpace,
    coefficients: BTreeMap<usize, f64>,
}

impl Functional {
    pub fn zero(space: ModelSpace) -> Self {
        Functional {
            space,
            coefficients: BTreeMap::new(),
        }
    }

    pub fn from_dense(space: ModelSpace, values: &[f64]) -> Result<Self> {
        let v = Vector::from_dense(space, values)?;
        Ok(Functional {
            space,
            coefficients: v.entries,
        })
    }

    pub fn from_entries(
        space: ModelSpace,
        entries: impl IntoIterator<Item = (usize, f64)>,
    ) -> Result<Self> {
        let v = Vector::from_entries(space, entries)?;
        Ok(Functional {
            space,
            coefficients: v.entries,
        })
    }

    /// Coordinate functional `zeta_n`.
    pub fn coordinate(space: ModelSpace, n: usize) -> Result<Self> {
        let v = Vector::basis(space, n)?;
        Ok(Functional {
            space,
            coefficients: v.entries,
        })
    }

    pub fn space(&self) -> ModelSpace {
        self.space
    }

    pub fn coefficient(&self, index: usize) -> f64 {
        self.coefficients.get(&index).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.coefficients.iter().map(|(&k, &v)| (k, v))
    }

    pub fn max_index(&self) -> usize {
        self.coefficients.keys().next_back().copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.coefficients.is_empty()
    }

    pub fn apply(&self, x: &Vector) -> Result<f64> {
        if self.space != x.space {
            return Err(FrameError::SpaceMismatch(format!(
                "functional on {} applied to a vector of {}",
                self.space, x.space
            )));
        }
        let (small, large) = if self.coefficients.len() <= x.entries.len() {
            (&self.coefficients, &x.entries)
        } else {
            (&x.entries, &self.coefficients)
        };
        Ok(small
            .iter()
            .filter_map(|(k, a)| large.get(k).map(|b| a * b))
            .sum())
    }

    /// Norm of the functional on `l^p`, i.e. the `q`-norm of its coefficients.
    pub fn dual_norm(&self) -> f64 {
        slice_q_norm(self.coefficients.values(), self.space.exponent.conjugate())
    }

    pub fn scale(&self, c: f64) -> Functional {
        let v = self.as_vector().scale(c);
        Functional {
            space: self.space,
            coefficients: v.entries,
        }
    }

    pub fn add_scaled(&self, c: f64, other: &Functional) -> Result<Functional> {
        let v = self.as_vector().add_scaled(c, &other.as_vector())?;
        Ok(Functional {
            space: self.space,
            coefficients: v.entries,
        })
    }

    /// Coefficients viewed as a vector of the same space.
    pub fn as_vector(&self) -> Vector {
        Vector {
            space: self.space,
            entries: self.coefficients.clone(),
        }
    }

    pub fn to_dense(&self, len: usize) -> Vec<f64> {
        (1..=len).map(|k| self.coefficient(k)).collect()
    }

    pub fn to_json(&self) -> Value {
        coeffs_to_json(&self.space, &self.coefficients)
    }

    pub fn from_json(space: ModelSpace, value: &Value, path: &str) -> Result<Self> {
        let coefficients = coeffs_from_json(&space, value, path)?;
        Ok(Functional {
            space,
            coefficients,
        })
    }
}

/// `(sum |v_n|^p)^(1/p)` computed with the given exponent.
pub fn vector_p_norm(v: &Vector, p: Exponent) -> f64 {
    slice_p_norm(v.entries.values(), p.get())
}

pub fn apply_functional(f: &Functional, x: &Vector) -> Result<f64> {
    f.apply(x)
}

/// The pair `(e_n, zeta_n)`.
pub fn standard_basis(space: ModelSpace, n: usize) -> Result<(Vector, Functional)> {
    Ok((Vector::basis(space, n)?, Functional::coordinate(space, n)?))
}

fn coeffs_to_json(space: &ModelSpace, entries: &BTreeMap<usize, f64>) -> Value {
    match space.dim() {
        Some(d) => Value::Array(
            (1..=d)
                .map(|k| Value::from(entries.get(&k).copied().unwrap_or(0.0)))
                .collect(),
        ),
        None => Value::Object(
            entries
                .iter()
                .map(|(k, v)| (k.to_string(), Value::from(*v)))
                .collect::<Map<_, _>>(),
        ),
    }
}

fn coeffs_from_json(space: &ModelSpace, value: &Value, path: &str) -> Result<BTreeMap<usize, f64>> {
    let mut out = BTreeMap::new();
    match value {
        Value::Array(items) => {
            if let Some(d) = space.dim() {
                if items.len() != d {
                    return Err(FrameError::parse(
                        path,
                        format!("expected {d} entries, found {}", items.len()),
                    ));
                }
            }
            for (k, item) in items.iter().enumerate() {
                let v = item.as_f64().ok_or_else(|| {
                    FrameError::parse(format!("{path}[{k}]"), "expected a number")
                })?;
                insert_nonzero(&mut out, k + 1, v);
            }
        }
        Value::Object(map) => {
            for (key, item) in map {
                let index: usize = key.parse().map_err(|_| {
                    FrameError::parse(format!("{path}.{key}"), "keys must be positive integers")
                })?;
                space
                    .check_index(index)
                    .map_err(|e| FrameError::parse(format!("{path}.{key}"), e.to_string()))?;
                let v = item.as_f64().ok_or_else(|| {
                    FrameError::parse(format!("{path}.{key}"), "expected a number")
                })?;
                insert_nonzero(&mut out, index, v);
            }
        }
        _ => {
            return Err(FrameError::parse(
                path,
                "expected an array of numbers or an {\"index\": value} map",
            ))
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(v: f64) -> Exponent {
        Exponent::new(v).unwrap()
    }

    #[test]
    fn exponent_rejects_infinity_and_small_values() {
        assert!(Exponent::new(f64::INFINITY).is_err());
        assert!(Exponent::new(0.5).is_err());
        assert!(Exponent::new(f64::NAN).is_err());
        assert_eq!(Exponent::new(1.0).unwrap().conjugate(), f64::INFINITY);
        assert_eq!(Exponent::new(2.0).unwrap().conjugate(), 2.0);
    }

    #[test]
    fn norms_of_simple_vectors() {
        for &pv in &[1.0, 1.5, 2.0, 7.0] {
            let s = ModelSpace::sequence(p(pv));
            assert_eq!(Vector::basis(s, 5).unwrap().p_norm(), 1.0);
        }
        let s2 = ModelSpace::finite(2, p(2.0)).unwrap();
        let v = Vector::from_dense(s2, &[3.0, 4.0]).unwrap();
        assert!((v.p_norm() - 5.0).abs() < 1e-15);

        let s3 = ModelSpace::finite(3, p(3.0)).unwrap();
        let v = Vector::from_dense(s3, &[1.0, 1.0, 1.0]).unwrap();
        assert!((v.p_norm() - 3f64.powf(1.0 / 3.0)).abs() < 1e-14);
        assert!((v.p_norm() - 1.44225).abs() < 1e-5);
    }

    #[test]
    fn functional_evaluation() {
        let s3 = ModelSpace::finite(3, p(2.0)).unwrap();
        let x = Vector::from_dense(s3, &[5.0, 7.0, 9.0]).unwrap();
        let zeta2 = Functional::coordinate(s3, 2).unwrap();
        assert_eq!(apply_functional(&zeta2, &x).unwrap(), 7.0);
        assert_eq!(Functional::zero(s3).apply(&x).unwrap(), 0.0);

        let s2 = ModelSpace::finite(2, p(2.0)).unwrap();
        let f = Functional::from_dense(s2, &[1.0, -1.0]).unwrap();
        let x = Vector::from_dense(s2, &[2.0, 3.0]).unwrap();
        assert_eq!(f.apply(&x).unwrap(), -1.0);
        assert!(matches!(
            f.apply(&Vector::zero(s3)),
            Err(FrameError::SpaceMismatch(_))
        ));
    }

    #[test]
    fn standard_basis_is_biorthogonal() {
        let s3 = ModelSpace::finite(3, p(2.0)).unwrap();
        let (e2, _) = standard_basis(s3, 2).unwrap();
        assert_eq!(e2.to_dense(3), vec![0.0, 1.0, 0.0]);
        assert!(matches!(
            standard_basis(s3, 4),
            Err(FrameError::IndexOutOfRange { index: 4, dim: 3 })
        ));
        assert!(standard_basis(s3, 0).is_err());

        let seq = ModelSpace::sequence(p(1.5));
        for m in 1..=25 {
            for n in 1..=25 {
                let (e_n, _) = standard_basis(seq, n).unwrap();
                let (_, zeta_m) = standard_basis(seq, m).unwrap();
                let expected = if m == n { 1.0 } else { 0.0 };
                assert_eq!(zeta_m.apply(&e_n).unwrap(), expected);
            }
        }
    }

    #[test]
    fn json_layouts() {
        let s3 = ModelSpace::finite(3, p(2.0)).unwrap();
        let v = Vector::from_dense(s3, &[1.0, 0.0, -2.5]).unwrap();
        assert_eq!(v.to_json(), serde_json::json!([1.0, 0.0, -2.5]));
        assert_eq!(Vector::from_json(s3, &v.to_json(), "v").unwrap(), v);

        let seq = ModelSpace::sequence(p(2.0));
        let w = Vector::from_entries(seq, [(2, 1.0), (10, -3.0)]).unwrap();
        assert_eq!(w.to_json(), serde_json::json!({"2": 1.0, "10": -3.0}));
        assert_eq!(Vector::from_json(seq, &w.to_json(), "w").unwrap(), w);

        let err = Vector::from_json(s3, &serde_json::json!([1.0, "x", 0.0]), "F.vectors[0]")
            .unwrap_err();
        assert!(err.to_string().contains("F.vectors[0][1]"));
        assert!(Vector::from_json(seq, &serde_json::json!({"0": 1.0}), "w").is_err());
    }

    fn naive_norm(values: &[f64], p: f64) -> f64 {
        values.iter().map(|v| v.abs().powf(p)).sum::<f64>().powf(1.0 / p)
    }

    proptest! {
        #[test]
        fn p_norm_is_homogeneous_and_subadditive(
            a in proptest::collection::vec(-10.0f64..10.0, 1..12),
            b in proptest::collection::vec(-10.0f64..10.0, 1..12),
            alpha in -5.0f64..5.0,
            pv in 1.0f64..6.0,
        ) {
            let s = ModelSpace::sequence(p(pv));
            let v = Vector::from_dense(s, &a).unwrap();
            let w = Vector::from_dense(s, &b).unwrap();
            let scaled = v.scale(alpha).p_norm();
            prop_assert!((scaled - alpha.abs() * v.p_norm()).abs() <= 1e-12 * (1.0 + scaled));
            let sum = v.add_scaled(1.0, &w).unwrap().p_norm();
            prop_assert!(sum <= v.p_norm() + w.p_norm() + 1e-12);
        }

        #[test]
        fn p_norm_matches_naive_summation(
            a in proptest::collection::vec(-10.0f64..10.0, 1..20),
            pv in 1.0f64..8.0,
        ) {
            let s = ModelSpace::sequence(p(pv));
            let v = Vector::from_dense(s, &a).unwrap();
            let naive = naive_norm(&a, pv);
            prop_assert!((v.p_norm() - naive).abs() <= 1e-12 * naive.max(1e-300));
        }
    }
}
