use nalgebra::DMatrix;
use serde_json::{json, Value};

use super::{compose_all, Body, OperatorDesc};
use crate::error::{FrameError, Result};
use crate::sequence::{Functional, ModelSpace, Vector};

fn infer_space_of(value: &Value, template: ModelSpace, path: &str) -> Result<ModelSpace> {
    match value {
        Value::Array(items) => ModelSpace::finite(items.len(), template.exponent())
            .map_err(|e| FrameError::parse(path, e.to_string())),
        Value::Object(_) => Ok(ModelSpace::sequence(template.exponent())),
        _ => Err(FrameError::parse(path, "expected an array or an index map")),
    }
}

fn terms<'a>(value: &'a Value, path: &str) -> Result<&'a Vec<Value>> {
    value
        .get("terms")
        .and_then(Value::as_array)
        .filter(|t| !t.is_empty())
        .ok_or_else(|| FrameError::parse(format!("{path}.terms"), "expected a nonempty array"))
}

impl OperatorDesc {
    /// JSON layout without spaces; spaces are implied by the context.
    pub fn to_json(&self) -> Value {
        match &self.body {
            Body::Dense(m) => {
                let rows: Vec<Vec<f64>> = (0..m.nrows())
                    .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
                    .collect();
                json!({"kind": "dense", "matrix": rows})
            }
            Body::Shift(k) => json!({"kind": "shift", "power": k}),
            Body::Identity => json!({"kind": "identity"}),
            Body::FiniteRank(pairs) => {
                let pairs: Vec<Value> = pairs
                    .iter()
                    .map(|(v, f)| json!({"vec": v.to_json(), "functional": f.to_json()}))
                    .collect();
                json!({"kind": "finite_rank", "pairs": pairs})
            }
            Body::Scaled(c, inner) => json!({"kind": "scaled", "c": c, "inner": inner.to_json()}),
            Body::Sum(terms) => {
                json!({"kind": "sum", "terms": terms.iter().map(OperatorDesc::to_json).collect::<Vec<_>>()})
            }
            Body::Compose(terms) => {
                json!({"kind": "compose", "terms": terms.iter().map(OperatorDesc::to_json).collect::<Vec<_>>()})
            }
        }
    }

    /// Parses an operator acting on `domain`; the codomain is inferred
    /// (dense row count, vector layout in finite-rank pairs, ...).
    pub fn from_json(value: &Value, domain: ModelSpace, path: &str) -> Result<Self> {
        let kind = value
            .get("kind")
            .and_then(Value::as_str)
            .ok_or_else(|| FrameError::parse(format!("{path}.kind"), "expected a string"))?;
        let wrap = |e: FrameError| match e {
            FrameError::Parse { .. } => e,
            other => FrameError::parse(path, other.to_string()),
        };
        match kind {
            "identity" => Ok(OperatorDesc::identity(domain)),
            "shift" => {
                let power = value.get("power").and_then(Value::as_i64).ok_or_else(|| {
                    FrameError::parse(format!("{path}.power"), "expected an integer")
                })?;
                OperatorDesc::shift(domain, power).map_err(wrap)
            }
            "dense" => {
                let rows = value.get("matrix").and_then(Value::as_array).ok_or_else(|| {
                    FrameError::parse(format!("{path}.matrix"), "expected an array of rows")
                })?;
                let ncols = domain.dim().ok_or_else(|| {
                    FrameError::parse(path, "dense operators need a finite domain")
                })?;
                let mut m = DMatrix::zeros(rows.len(), ncols);
                for (i, row) in rows.iter().enumerate() {
                    let row = row.as_array().filter(|r| r.len() == ncols).ok_or_else(|| {
                        FrameError::parse(
                            format!("{path}.matrix[{i}]"),
                            format!("expected {ncols} numbers"),
                        )
                    })?;
                    for (j, v) in row.iter().enumerate() {
                        m[(i, j)] = v.as_f64().ok_or_else(|| {
                            FrameError::parse(format!("{path}.matrix[{i}][{j}]"), "expected a number")
                        })?;
                    }
                }
                let codomain = ModelSpace::finite(rows.len(), domain.exponent())
                    .map_err(|e| FrameError::parse(format!("{path}.matrix"), e.to_string()))?;
                OperatorDesc::dense(domain, codomain, m).map_err(wrap)
            }
            "finite_rank" => {
                let pairs = value.get("pairs").and_then(Value::as_array).ok_or_else(|| {
                    FrameError::parse(format!("{path}.pairs"), "expected an array")
                })?;
                let Some(first) = pairs.first() else {
                    return Err(FrameError::parse(
                        format!("{path}.pairs"),
                        "an empty finite-rank operator has no inferable codomain",
                    ));
                };
                let codomain = infer_space_of(
                    first.get("vec").unwrap_or(&Value::Null),
                    domain,
                    &format!("{path}.pairs[0].vec"),
                )?;
                let mut parsed = Vec::with_capacity(pairs.len());
                for (k, pair) in pairs.iter().enumerate() {
                    let vp = format!("{path}.pairs[{k}].vec");
                    let fp = format!("{path}.pairs[{k}].functional");
                    let v = Vector::from_json(codomain, pair.get("vec").unwrap_or(&Value::Null), &vp)?;
                    let f = Functional::from_json(
                        domain,
                        pair.get("functional").unwrap_or(&Value::Null),
                        &fp,
                    )?;
                    parsed.push((v, f));
                }
                OperatorDesc::finite_rank(domain, codomain, parsed).map_err(wrap)
            }
            "scaled" => {
                let c = value.get("c").and_then(Value::as_f64).ok_or_else(|| {
                    FrameError::parse(format!("{path}.c"), "expected a number")
                })?;
                let inner = value
                    .get("inner")
                    .ok_or_else(|| FrameError::parse(format!("{path}.inner"), "missing"))?;
                Ok(OperatorDesc::scaled(
                    c,
                    OperatorDesc::from_json(inner, domain, &format!("{path}.inner"))?,
                ))
            }
            "sum" => {
                let parsed = terms(value, path)?
                    .iter()
                    .enumerate()
                    .map(|(k, t)| OperatorDesc::from_json(t, domain, &format!("{path}.terms[{k}]")))
                    .collect::<Result<Vec<_>>>()?;
                OperatorDesc::sum(parsed).map_err(wrap)
            }
            "compose" => {
                let raw = terms(value, path)?;
                let mut parsed = Vec::with_capacity(raw.len());
                let mut space = domain;
                for (k, t) in raw.iter().enumerate().rev() {
                    let op = OperatorDesc::from_json(t, space, &format!("{path}.terms[{k}]"))?;
                    space = op.codomain();
                    parsed.push(op);
                }
                parsed.reverse();
                compose_all(parsed).map_err(wrap)
            }
            other => Err(FrameError::parse(
                format!("{path}.kind"),
                format!("unknown operator kind '{other}'"),
            )),
        }
    }
}
