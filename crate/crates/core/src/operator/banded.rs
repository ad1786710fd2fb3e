use std::collections::BTreeMap;

use nalgebra::DMatrix;

use super::{Body, OperatorDesc};
use crate::sequence::Vector;

/// Correction entries beyond this count are treated as too complex to bound.
const CORRECTION_BUDGET: usize = 1 << 22;

/// Normal form `sum_k c_k S_k + C` of a column-finite operator.
///
/// `S_k` is the truncated shift `(S_k x)_i = x_{i-k}` (zero when `i - k < 1`),
/// so `S_1 = R`, `S_{-1} = L` and `S_0 = I`. The band is only used between
/// sequence spaces; finite operators live entirely in the sparse correction
/// `C`, indexed by 1-based `(row, col)`.
///
/// The class is closed under sums, scalings and products:
/// `S_a S_b = S_{a+b} - sum_{i = max(1, a+b+1)}^{a} e_i ⊗ zeta_{i-a-b}`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct BandedForm {
    band: BTreeMap<i64, f64>,
    correction: BTreeMap<(usize, usize), f64>,
}

fn accumulate<K: Ord>(map: &mut BTreeMap<K, f64>, key: K, value: f64) {
    if value == 0.0 {
        return;
    }
    let entry = map.entry(key).or_insert(0.0);
    *entry += value;
}

fn prune<K: Ord>(map: &mut BTreeMap<K, f64>) {
    map.retain(|_, v| *v != 0.0);
}

impl BandedForm {
    /// `None` when the descriptor exceeds the correction budget.
    pub fn from_desc(a: &OperatorDesc) -> Option<BandedForm> {
        let form = match a.body() {
            Body::Identity => match a.domain().dim() {
                Some(d) => BandedForm {
                    band: BTreeMap::new(),
                    correction: (1..=d).map(|i| ((i, i), 1.0)).collect(),
                },
                None => BandedForm {
                    band: BTreeMap::from([(0, 1.0)]),
                    correction: BTreeMap::new(),
                },
            },
            Body::Shift(k) => BandedForm {
                band: BTreeMap::from([(*k, 1.0)]),
                correction: BTreeMap::new(),
            },
            Body::Dense(m) => {
                let mut correction = BTreeMap::new();
                for j in 0..m.ncols() {
                    for i in 0..m.nrows() {
                        accumulate(&mut correction, (i + 1, j + 1), m[(i, j)]);
                    }
                }
                BandedForm {
                    band: BTreeMap::new(),
                    correction,
                }
            }
            Body::FiniteRank(pairs) => {
                let mut correction = BTreeMap::new();
                for (v, f) in pairs {
                    for (i, vi) in v.iter() {
                        for (j, fj) in f.iter() {
                            accumulate(&mut correction, (i, j), vi * fj);
                        }
                    }
                }
                prune(&mut correction);
                BandedForm {
                    band: BTreeMap::new(),
                    correction,
                }
            }
            Body::Scaled(c, inner) => BandedForm::from_desc(inner)?.scaled(*c),
            Body::Sum(terms) => {
                let mut acc = BandedForm::default();
                for t in terms {
                    acc = acc.plus(&BandedForm::from_desc(t)?);
                }
                acc
            }
            Body::Compose(terms) => {
                let mut iter = terms.iter().rev();
                let mut acc = BandedForm::from_desc(iter.next()?)?;
                for t in iter {
                    acc = BandedForm::from_desc(t)?.compose(&acc)?;
                }
                acc
            }
        };
        (form.correction.len() <= CORRECTION_BUDGET).then_some(form)
    }

    pub fn band(&self) -> &BTreeMap<i64, f64> {
        &self.band
    }

    pub fn correction(&self) -> &BTreeMap<(usize, usize), f64> {
        &self.correction
    }

    pub fn is_zero(&self) -> bool {
        self.band.is_empty() && self.correction.is_empty()
    }

    /// True when the operator is a finite matrix (no band part).
    pub fn is_finite_rank(&self) -> bool {
        self.band.is_empty()
    }

    pub fn scaled(&self, c: f64) -> BandedForm {
        let mut out = BandedForm {
            band: self.band.iter().map(|(&k, &v)| (k, c * v)).collect(),
            correction: self.correction.iter().map(|(&k, &v)| (k, c * v)).collect(),
        };
        prune(&mut out.band);
        prune(&mut out.correction);
        out
    }

    pub fn plus(&self, other: &BandedForm) -> BandedForm {
        let mut out = self.clone();
        for (&k, &v) in &other.band {
            accumulate(&mut out.band, k, v);
        }
        for (&k, &v) in &other.correction {
            accumulate(&mut out.correction, k, v);
        }
        prune(&mut out.band);
        prune(&mut out.correction);
        out
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &BandedForm) -> Option<BandedForm> {
        let mut out = BandedForm::default();
        for (&a, &ca) in &self.band {
            for (&b, &cb) in &other.band {
                let c = ca * cb;
                accumulate(&mut out.band, a + b, c);
                if a > 0 {
                    let lo = (a + b + 1).max(1);
                    for i in lo..=a {
                        accumulate(&mut out.correction, (i as usize, (i - a - b) as usize), -c);
                    }
                }
            }
        }
        // band ∘ correction: row l moves to l + k
        for (&(l, j), &v) in &other.correction {
            for (&k, &ck) in &self.band {
                let i = l as i64 + k;
                if i >= 1 {
                    accumulate(&mut out.correction, (i as usize, j), ck * v);
                }
            }
        }
        // correction ∘ band: column l moves to l - k
        for (&(r, l), &v) in &self.correction {
            for (&k, &ck) in &other.band {
                let j = l as i64 - k;
                if j >= 1 {
                    accumulate(&mut out.correction, (r, j as usize), v * ck);
                }
            }
        }
        if !self.correction.is_empty() && !other.correction.is_empty() {
            let mut by_row: BTreeMap<usize, Vec<(usize, f64)>> = BTreeMap::new();
            for (&(l, j), &v) in &other.correction {
                by_row.entry(l).or_default().push((j, v));
            }
            for (&(r, l), &v) in &self.correction {
                if let Some(row) = by_row.get(&l) {
                    for &(j, w) in row {
                        accumulate(&mut out.correction, (r, j), v * w);
                    }
                }
                if out.correction.len() > CORRECTION_BUDGET {
                    return None;
                }
            }
        }
        prune(&mut out.band);
        prune(&mut out.correction);
        (out.correction.len() <= CORRECTION_BUDGET).then_some(out)
    }

    /// Nonzero entries of row `i` keyed by column.
    pub fn row(&self, i: usize) -> BTreeMap<usize, f64> {
        let mut out = BTreeMap::new();
        for (&k, &c) in &self.band {
            let j = i as i64 - k;
            if j >= 1 {
                accumulate(&mut out, j as usize, c);
            }
        }
        for (&(r, j), &v) in self.correction.range((i, 1)..=(i, usize::MAX)) {
            debug_assert_eq!(r, i);
            accumulate(&mut out, j, v);
        }
        prune(&mut out);
        out
    }

    /// Nonzero entries of column `j` keyed by row.
    pub fn column(&self, j: usize) -> BTreeMap<usize, f64> {
        let mut out = BTreeMap::new();
        for (&k, &c) in &self.band {
            let i = j as i64 + k;
            if i >= 1 {
                accumulate(&mut out, i as usize, c);
            }
        }
        for (&(i, col), &v) in &self.correction {
            if col == j {
                accumulate(&mut out, i, v);
            }
        }
        prune(&mut out);
        out
    }

    fn band_abs_sum(&self) -> f64 {
        self.band.values().map(|c| c.abs()).sum()
    }

    /// Exact supremum of absolute column sums (the induced 1-norm).
    pub fn sup_column_sum(&self) -> f64 {
        let mut cols: BTreeMap<usize, BTreeMap<usize, f64>> = BTreeMap::new();
        for (&(i, j), &v) in &self.correction {
            cols.entry(j).or_default().insert(i, v);
        }
        let left_reach = self.band.keys().filter(|&&k| k < 0).map(|k| k.unsigned_abs() as usize).max().unwrap_or(0);
        let last = cols.keys().next_back().copied().unwrap_or(0).max(left_reach);
        // columns past `last` carry the full band and no correction
        let mut best = self.band_abs_sum();
        for j in 1..=last {
            let mut col = BTreeMap::new();
            for (&k, &c) in &self.band {
                let i = j as i64 + k;
                if i >= 1 {
                    accumulate(&mut col, i as usize, c);
                }
            }
            if let Some(extra) = cols.get(&j) {
                for (&i, &v) in extra {
                    accumulate(&mut col, i, v);
                }
            }
            best = best.max(col.values().map(|v| v.abs()).sum());
        }
        best
    }

    /// Exact supremum of absolute row sums (the induced max-norm).
    pub fn sup_row_sum(&self) -> f64 {
        let right_reach = self.band.keys().filter(|&&k| k > 0).map(|&k| k as usize).max().unwrap_or(0);
        let last_row = self.correction.keys().map(|&(i, _)| i).max().unwrap_or(0).max(right_reach);
        let mut best = self.band_abs_sum();
        for i in 1..=last_row {
            best = best.max(self.row(i).values().map(|v| v.abs()).sum());
        }
        best
    }

    /// The correction part as a dense matrix covering its support.
    pub fn correction_matrix(&self) -> DMatrix<f64> {
        let rows = self.correction.keys().map(|&(i, _)| i).max().unwrap_or(0);
        let cols = self.correction.keys().map(|&(_, j)| j).max().unwrap_or(0);
        let mut m = DMatrix::zeros(rows.max(1), cols.max(1));
        for (&(i, j), &v) in &self.correction {
            m[(i - 1, j - 1)] = v;
        }
        m
    }

    /// Action on a finitely supported vector, returned as `index -> value`.
    pub fn apply(&self, x: &Vector) -> BTreeMap<usize, f64> {
        let mut out = BTreeMap::new();
        for (n, v) in x.iter() {
            for (&k, &c) in &self.band {
                let i = n as i64 + k;
                if i >= 1 {
                    accumulate(&mut out, i as usize, c * v);
                }
            }
        }
        for (&(i, j), &c) in &self.correction {
            let xj = x.get(j);
            if xj != 0.0 {
                accumulate(&mut out, i, c * xj);
            }
        }
        prune(&mut out);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::compose_all;
    use crate::sequence::{Exponent, Functional, ModelSpace};
    use proptest::prelude::*;

    fn seq() -> ModelSpace {
        ModelSpace::sequence(Exponent::new(2.0).unwrap())
    }

    fn shift(k: i64) -> OperatorDesc {
        OperatorDesc::shift(seq(), k).unwrap()
    }

    #[test]
    fn left_then_right_collapses_to_identity() {
        let lr = compose_all(vec![shift(-1), shift(1)]).unwrap();
        let form = BandedForm::from_desc(&lr.identity_minus().unwrap()).unwrap();
        assert!(form.is_zero());
    }

    #[test]
    fn right_then_left_leaves_rank_one_defect() {
        let rl = compose_all(vec![shift(1), shift(-1)]).unwrap();
        let form = BandedForm::from_desc(&rl.identity_minus().unwrap()).unwrap();
        assert!(form.band().is_empty());
        assert_eq!(form.correction(), &BTreeMap::from([((1, 1), 1.0)]));
        assert_eq!(form.sup_column_sum(), 1.0);
        assert_eq!(form.sup_row_sum(), 1.0);
    }

    #[test]
    fn sums_of_shifts_have_band_norms() {
        let a = OperatorDesc::sum(vec![
            shift(2),
            OperatorDesc::scaled(-0.5, shift(-1)),
            OperatorDesc::scaled(0.25, OperatorDesc::identity(seq())),
        ])
        .unwrap();
        let form = BandedForm::from_desc(&a).unwrap();
        assert_eq!(form.sup_column_sum(), 1.75);
        assert_eq!(form.sup_row_sum(), 1.75);
    }

    #[test]
    fn rows_and_columns() {
        let form = BandedForm::from_desc(&compose_all(vec![shift(2), shift(-1)]).unwrap()).unwrap();
        // R^2 L = R - e_2 ⊗ zeta_1
        assert_eq!(form.row(1), BTreeMap::new());
        assert_eq!(form.row(2), BTreeMap::new());
        assert_eq!(form.row(3), BTreeMap::from([(2, 1.0)]));
        assert_eq!(form.column(1), BTreeMap::new());
        assert_eq!(form.column(4), BTreeMap::from([(5, 1.0)]));
    }

    fn arb_desc() -> impl Strategy<Value = OperatorDesc> {
        let leaf = prop_oneof![
            (-3i64..=3).prop_map(|k| OperatorDesc::shift(seq(), k).unwrap()),
            (1usize..6, 1usize..6, -2.0f64..2.0).prop_map(|(i, j, c)| {
                OperatorDesc::finite_rank(
                    seq(),
                    seq(),
                    vec![(
                        Vector::basis(seq(), i).unwrap().scale(c),
                        Functional::coordinate(seq(), j).unwrap(),
                    )],
                )
                .unwrap()
            }),
        ];
        leaf.prop_recursive(3, 16, 3, |inner| {
            prop_oneof![
                (-2.0f64..2.0, inner.clone()).prop_map(|(c, a)| OperatorDesc::scaled(c, a)),
                proptest::collection::vec(inner.clone(), 1..3)
                    .prop_map(|t| OperatorDesc::sum(t).unwrap()),
                proptest::collection::vec(inner, 1..4).prop_map(|t| compose_all(t).unwrap()),
            ]
        })
    }

    proptest! {
        #[test]
        fn normal_form_acts_like_descriptor(a in arb_desc(), entries in proptest::collection::vec((1usize..10, -3.0f64..3.0), 1..5)) {
            let x = Vector::from_entries(seq(), entries).unwrap();
            let form = BandedForm::from_desc(&a).unwrap();
            let direct = a.apply(&x).unwrap();
            let via_form = form.apply(&x);
            let max_index = direct.max_index().max(via_form.keys().next_back().copied().unwrap_or(0));
            for i in 1..=max_index {
                let lhs = direct.get(i);
                let rhs = via_form.get(&i).copied().unwrap_or(0.0);
                prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()), "index {}: {} vs {}", i, lhs, rhs);
            }
        }

        #[test]
        fn column_sums_dominate_compressions(a in arb_desc()) {
            let form = BandedForm::from_desc(&a).unwrap();
            let m = crate::operator::materialize(&a, 12);
            let col = crate::operator::max_col_sum(&m);
            let row_bound = form.sup_row_sum();
            prop_assert!(col <= form.sup_column_sum() + 1e-12);
            for i in 0..m.nrows() {
                let s: f64 = m.row(i).iter().map(|v| v.abs()).sum();
                prop_assert!(s <= row_bound + 1e-12);
            }
        }
    }
}
