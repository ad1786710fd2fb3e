//! p-excess of finite frame systems and the excess-invariance experiment.

use std::io::Write;

use itertools::Itertools;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::duality::{
    canonical_duals, certify_approx_dual, parametrize_approx_dual_asf, DualVerdict, DualityOptions,
    DualityReport,
};
use crate::error::{FrameError, Result};
use crate::frames::{validate_p_asf, FrameSystem};
use crate::operator::{max_col_sum, max_row_sum, NormOptions, OperatorDesc};
use crate::sequence::{Exponent, ModelSpace};

/// Largest family handled by subset enumeration.
pub const BRUTE_FORCE_CAP: usize = 20;

/// Singular values below this fraction of the largest count as zero.
pub const RANK_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ExcessMethod {
    BruteForce,
    Greedy,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExcessResult {
    pub value: usize,
    /// Removed indices, 1-based and increasing.
    pub witness: Vec<usize>,
    pub method: ExcessMethod,
    /// `false` for greedy results, which are only lower bounds.
    pub exact: bool,
}

pub fn numerical_rank(m: &DMatrix<f64>) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let sv = m.singular_values();
    let top = sv.max();
    if top == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > RANK_TOL * top).count()
}

struct SpanCheck {
    analysis: DMatrix<f64>,
    synthesis: DMatrix<f64>,
    dim: usize,
}

impl SpanCheck {
    fn new(frame: &FrameSystem) -> Result<Self> {
        let dim = frame
            .space()
            .dim()
            .ok_or_else(|| FrameError::NotFinite("excess needs a finite space".into()))?;
        if frame.len().is_none() {
            return Err(FrameError::NotFinite("excess needs a finite family".into()));
        }
        Ok(SpanCheck {
            analysis: frame.analysis_matrix()?,
            synthesis: frame.synthesis_matrix()?,
            dim,
        })
    }

    fn len(&self) -> usize {
        self.analysis.nrows()
    }

    /// Both families restricted to `kept` (0-based) span.
    fn spans(&self, kept: &[usize]) -> bool {
        if kept.len() < self.dim {
            return false;
        }
        let vectors = self.synthesis.select_columns(kept);
        let functionals = self.analysis.select_rows(kept);
        numerical_rank(&vectors) == self.dim && numerical_rank(&functionals) == self.dim
    }
}

/// Exact excess by enumerating removal sets from largest to smallest.
fn brute_force(check: &SpanCheck) -> ExcessResult {
    let m = check.len();
    for k in (0..=m).rev() {
        for removed in (0..m).combinations(k) {
            let kept: Vec<usize> = (0..m).filter(|i| !removed.contains(i)).collect();
            if check.spans(&kept) {
                return ExcessResult {
                    value: k,
                    witness: removed.iter().map(|i| i + 1).collect(),
                    method: ExcessMethod::BruteForce,
                    exact: true,
                };
            }
        }
    }
    ExcessResult {
        value: 0,
        witness: Vec::new(),
        method: ExcessMethod::BruteForce,
        exact: true,
    }
}

/// One pass in index order; a failed removal stays failed as the set shrinks.
fn greedy(check: &SpanCheck) -> ExcessResult {
    let mut kept: Vec<usize> = (0..check.len()).collect();
    let mut removed = Vec::new();
    for i in 0..check.len() {
        let trial: Vec<usize> = kept.iter().copied().filter(|&j| j != i).collect();
        if check.spans(&trial) {
            kept = trial;
            removed.push(i + 1);
        }
    }
    ExcessResult {
        value: removed.len(),
        witness: removed,
        method: ExcessMethod::Greedy,
        exact: false,
    }
}

/// Largest `|M|` such that both `{tau_n}` and `{f_n}` outside `M` span.
/// Families that do not span at all have excess 0 with an empty witness.
pub fn p_excess(frame: &FrameSystem, method: ExcessMethod) -> Result<ExcessResult> {
    let check = SpanCheck::new(frame)?;
    match method {
        ExcessMethod::BruteForce if check.len() > BRUTE_FORCE_CAP => Err(FrameError::TooLarge {
            size: check.len(),
            cap: BRUTE_FORCE_CAP,
        }),
        ExcessMethod::BruteForce => Ok(brute_force(&check)),
        ExcessMethod::Greedy => Ok(greedy(&check)),
    }
}

/// Independent path: maximum over all `2^m` kept-subsets as bitmasks.
pub fn excess_by_enumeration(frame: &FrameSystem) -> Result<usize> {
    let check = SpanCheck::new(frame)?;
    let m = check.len();
    if m > BRUTE_FORCE_CAP {
        return Err(FrameError::TooLarge {
            size: m,
            cap: BRUTE_FORCE_CAP,
        });
    }
    let mut best = 0;
    for mask in 0u32..(1u32 << m) {
        let kept: Vec<usize> = (0..m).filter(|i| mask & (1 << i) != 0).collect();
        if m - kept.len() > best && check.spans(&kept) {
            best = m - kept.len();
        }
    }
    Ok(best)
}

/// Whether removing the witness indices leaves both families spanning.
pub fn witness_is_valid(frame: &FrameSystem, result: &ExcessResult) -> Result<bool> {
    let check = SpanCheck::new(frame)?;
    let kept: Vec<usize> = (0..check.len())
        .filter(|i| !result.witness.contains(&(i + 1)))
        .collect();
    Ok(result.witness.len() == result.value && (result.value == 0 || check.spans(&kept)))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialConfig {
    pub max_dim: usize,
    pub max_m: usize,
    /// Fixed exponent, or `None` to draw from `{1, 1.5, 2, 3}` per trial.
    pub p: Option<f64>,
    /// Bound on the 1- and inf-norms of `U - I` and `V - I`.
    pub closeness: f64,
    /// Probability that an entry of `A` or `B` is nonzero.
    pub density: f64,
    /// Pair each base system with itself, after normalizing its frame
    /// operator to the identity.
    pub mirror: bool,
}

impl Default for TrialConfig {
    fn default() -> Self {
        TrialConfig {
            max_dim: 3,
            max_m: 6,
            p: None,
            closeness: 0.6,
            density: 0.25,
            mirror: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub dim: usize,
    pub m: usize,
    pub p: f64,
    pub excess_f: usize,
    pub excess_g: usize,
    pub equal: bool,
    /// Both brute-force values agree with bitmask enumeration.
    pub enumeration_agrees: bool,
    pub defect_fg_upper: f64,
    pub defect_gf_upper: f64,
    pub attempts: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InvarianceTrialReport {
    pub seed: u64,
    pub trials: usize,
    pub config: TrialConfig,
    pub equal_count: usize,
    pub equality_rate: f64,
    pub records: Vec<TrialRecord>,
}

impl InvarianceTrialReport {
    /// One row per trial.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for r in &self.records {
            w.serialize(r)
                .map_err(|e| FrameError::Numerical(format!("csv output failed: {e}")))?;
        }
        w.flush()
            .map_err(|e| FrameError::Numerical(format!("csv output failed: {e}")))?;
        Ok(())
    }
}

const EXPONENTS: [f64; 4] = [1.0, 1.5, 2.0, 3.0];

/// Base system with zero and repeated elements mixed into a perturbed basis.
fn degenerate_frame(rng: &mut ChaCha8Rng, space: ModelSpace, m: usize) -> Result<FrameSystem> {
    let d = space.dim().expect("trial spaces are finite");
    let mut analysis = DMatrix::zeros(m, d);
    let mut synthesis = DMatrix::zeros(d, m);
    for i in 0..d {
        for j in 0..d {
            let base = if i == j { 1.0 } else { 0.0 };
            analysis[(i, j)] = base + rng.gen_range(-0.2..=0.2);
            synthesis[(j, i)] = base + rng.gen_range(-0.2..=0.2);
        }
    }
    for n in d..m {
        match rng.gen_range(0..3) {
            0 => {}
            1 => {
                let src = rng.gen_range(0..n);
                let row = analysis.row(src).clone_owned();
                analysis.set_row(n, &row);
            }
            _ => {
                for j in 0..d {
                    analysis[(n, j)] = rng.gen_range(-1.0..=1.0);
                }
            }
        }
        match rng.gen_range(0..3) {
            0 => {}
            1 => {
                let src = rng.gen_range(0..n);
                let col = synthesis.column(src).clone_owned();
                synthesis.set_column(n, &col);
            }
            _ => {
                for i in 0..d {
                    synthesis[(i, n)] = rng.gen_range(-1.0..=1.0);
                }
            }
        }
    }
    FrameSystem::from_matrices(space, analysis, synthesis)
}

/// `I + E` with `‖E‖_1, ‖E‖_inf <= closeness`, so every p-norm of `E` is too.
fn near_identity(rng: &mut ChaCha8Rng, d: usize, closeness: f64) -> DMatrix<f64> {
    let e = DMatrix::from_fn(d, d, |_, _| rng.gen_range(-1.0..=1.0));
    let scale = max_col_sum(&e).max(max_row_sum(&e));
    let e = if scale > 0.0 { e * (closeness / scale) } else { e };
    DMatrix::identity(d, d) + e
}

fn sparse(rng: &mut ChaCha8Rng, rows: usize, cols: usize, density: f64) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| {
        if rng.gen_bool(density) {
            rng.gen_range(-1.0..=1.0)
        } else {
            0.0
        }
    })
}

/// Draws one certified approximately dual pair of p-ASFs.
pub fn draw_trial_pair(
    rng: &mut ChaCha8Rng,
    config: &TrialConfig,
    budget: usize,
) -> Result<(FrameSystem, FrameSystem, DualityReport, usize)> {
    let norm = NormOptions {
        restarts: 4,
        ..NormOptions::default()
    };
    let opts = DualityOptions {
        probes: 4,
        seed: 0,
        norm: norm.clone(),
    };
    for attempt in 1..=budget {
        let d = rng.gen_range(1..=config.max_dim.max(1));
        let m = rng.gen_range(d..=config.max_m.max(d));
        let p = config
            .p
            .unwrap_or_else(|| EXPONENTS[rng.gen_range(0..EXPONENTS.len())]);
        let space = ModelSpace::finite(d, Exponent::new(p)?)?;
        let coeff = ModelSpace::finite(m, space.exponent())?;
        let f = degenerate_frame(rng, space, m)?;
        if validate_p_asf(&f, &norm).is_err() {
            continue;
        }
        if config.mirror {
            let f = canonical_duals(&f)?.left;
            let report = certify_approx_dual(&f, &f, &opts)?;
            if report.verdict == DualVerdict::ApproxDual {
                return Ok((f.clone(), f, report, attempt));
            }
            continue;
        }
        let u = OperatorDesc::dense(space, space, near_identity(rng, d, config.closeness))?;
        let v = OperatorDesc::dense(space, space, near_identity(rng, d, config.closeness))?;
        let a = OperatorDesc::dense(space, coeff, sparse(rng, m, d, config.density))?;
        let b = OperatorDesc::dense(coeff, space, sparse(rng, d, m, config.density))?;
        let Ok(out) = parametrize_approx_dual_asf(&f, &u, &v, &a, &b, &opts) else {
            continue;
        };
        if out.report.verdict != DualVerdict::ApproxDual || validate_p_asf(&out.system, &norm).is_err() {
            continue;
        }
        return Ok((f, out.system, out.report, attempt));
    }
    Err(FrameError::GeneratorExhausted { budget })
}

/// Runs `trials` independent draws; trial `k` uses stream `k` of the seed,
/// so records do not depend on scheduling.
pub fn excess_invariance_trial(
    config: &TrialConfig,
    trials: usize,
    seed: u64,
) -> Result<InvarianceTrialReport> {
    if config.max_dim > 4 || config.max_m > 8 {
        return Err(FrameError::Precondition(format!(
            "brute-force regime needs dim <= 4 and m <= 8, got {} and {}",
            config.max_dim, config.max_m
        )));
    }
    let per_trial = 100;
    let records = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(trial as u64);
            let (f, g, report, attempts) = draw_trial_pair(&mut rng, config, per_trial)
                .map_err(|e| match e {
                    FrameError::GeneratorExhausted { .. } => FrameError::GeneratorExhausted {
                        budget: per_trial * trials,
                    },
                    other => other,
                })?;
            let ef = p_excess(&f, ExcessMethod::BruteForce)?;
            let eg = p_excess(&g, ExcessMethod::BruteForce)?;
            let enumeration_agrees =
                excess_by_enumeration(&f)? == ef.value && excess_by_enumeration(&g)? == eg.value;
            if !enumeration_agrees {
                return Err(FrameError::Numerical(format!(
                    "trial {trial}: subset search disagrees with bitmask enumeration"
                )));
            }
            Ok(TrialRecord {
                trial,
                dim: f.space().dim().unwrap_or(0),
                m: f.len().unwrap_or(0),
                p: f.exponent().get(),
                excess_f: ef.value,
                excess_g: eg.value,
                equal: ef.value == eg.value,
                enumeration_agrees,
                defect_fg_upper: report.cert_fg.upper,
                defect_gf_upper: report.cert_gf.upper,
                attempts,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let equal_count = records.iter().filter(|r| r.equal).count();
    let equality_rate = if trials == 0 {
        1.0
    } else {
        equal_count as f64 / trials as f64
    };
    Ok(InvarianceTrialReport {
        seed,
        trials,
        config: config.clone(),
        equal_count,
        equality_rate,
        records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    fn space(d: usize) -> ModelSpace {
        ModelSpace::finite(d, Exponent::new(2.0).unwrap()).unwrap()
    }

    fn symmetric(m: DMatrix<f64>) -> FrameSystem {
        let d = m.ncols();
        FrameSystem::from_matrices(space(d), m.clone(), m.transpose()).unwrap()
    }

    #[test]
    fn basis_has_no_excess() {
        let r = p_excess(&FrameSystem::standard(space(2)), ExcessMethod::BruteForce).unwrap();
        assert_eq!(r.value, 0);
        assert!(r.witness.is_empty());
    }

    #[test]
    fn one_redundant_element() {
        let f = symmetric(dmatrix![1.0, 0.0; 0.0, 1.0; 1.0, 1.0]);
        let r = p_excess(&f, ExcessMethod::BruteForce).unwrap();
        assert_eq!(r.value, 1);
        assert!(witness_is_valid(&f, &r).unwrap());
        assert_eq!(excess_by_enumeration(&f).unwrap(), 1);
    }

    #[test]
    fn repeated_basis() {
        let f = symmetric(dmatrix![1.0, 0.0; 1.0, 0.0; 0.0, 1.0; 0.0, 1.0]);
        let r = p_excess(&f, ExcessMethod::BruteForce).unwrap();
        assert_eq!(r.value, 2);
        assert!(witness_is_valid(&f, &r).unwrap());
        let witness = ExcessResult { value: 2, witness: vec![1, 3], method: ExcessMethod::BruteForce, exact: true };
        assert!(witness_is_valid(&f, &witness).unwrap());
        let bad = ExcessResult { value: 2, witness: vec![1, 2], method: ExcessMethod::BruteForce, exact: true };
        assert!(!witness_is_valid(&f, &bad).unwrap());
        assert_eq!(p_excess(&f, ExcessMethod::Greedy).unwrap().value, 2);
    }

    #[test]
    fn both_families_must_span() {
        // vectors are redundant, functionals are not
        let s = space(2);
        let f = FrameSystem::from_matrices(
            s,
            dmatrix![1.0, 0.0; 0.0, 1.0; 0.0, 0.0],
            dmatrix![1.0, 0.0, 1.0; 0.0, 1.0, 1.0],
        )
        .unwrap();
        let r = p_excess(&f, ExcessMethod::BruteForce).unwrap();
        assert_eq!(r, ExcessResult { value: 1, witness: vec![3], method: ExcessMethod::BruteForce, exact: true });
    }

    #[test]
    fn padded_pair() {
        let s = space(2);
        let pad = |c: f64| {
            FrameSystem::from_matrices(
                s,
                dmatrix![1.0, 0.0; 0.0, 1.0; 0.0, 0.0],
                dmatrix![c, 0.0, 0.0; 0.0, c, 0.0],
            )
            .unwrap()
        };
        let ef = p_excess(&pad(1.0), ExcessMethod::BruteForce).unwrap();
        let eg = p_excess(&pad(0.8), ExcessMethod::BruteForce).unwrap();
        assert_eq!((ef.value, eg.value), (1, 1));
    }

    #[test]
    fn cap_is_enforced() {
        let f = symmetric(DMatrix::from_fn(21, 1, |_, _| 1.0));
        assert!(matches!(
            p_excess(&f, ExcessMethod::BruteForce),
            Err(FrameError::TooLarge { size: 21, cap: 20 })
        ));
        assert_eq!(p_excess(&f, ExcessMethod::Greedy).unwrap().value, 20);
    }

    #[test]
    fn sequence_systems_are_rejected() {
        let seq = ModelSpace::sequence(Exponent::new(2.0).unwrap());
        assert!(p_excess(&FrameSystem::standard(seq), ExcessMethod::Greedy).is_err());
    }

    #[test]
    fn trials_are_deterministic_and_well_formed() {
        let config = TrialConfig::default();
        let a = excess_invariance_trial(&config, 12, 3).unwrap();
        let b = excess_invariance_trial(&config, 12, 3).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.records.len(), 12);
        assert!((0.0..=1.0).contains(&a.equality_rate));
        for (k, r) in a.records.iter().enumerate() {
            assert_eq!(r.trial, k);
            assert!(r.enumeration_agrees);
            assert!(r.defect_fg_upper < 1.0 && r.defect_gf_upper < 1.0);
        }
        let mut buf = Vec::new();
        a.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 13);
    }

    #[test]
    fn mirrored_trial_is_equal() {
        let config = TrialConfig { mirror: true, ..TrialConfig::default() };
        let r = excess_invariance_trial(&config, 1, 0).unwrap();
        assert_eq!(r.equality_rate, 1.0);
    }

    #[test]
    fn oversized_configs_are_rejected() {
        let config = TrialConfig { max_m: 9, ..TrialConfig::default() };
        assert!(excess_invariance_trial(&config, 1, 0).is_err());
    }
}
