//! Exact and approximate duality between frame systems.
//!
//! For `F = ({f_n}, {tau_n})` and `G = ({g_n}, {omega_n})` the two cross
//! frame operators are `S_{f,omega} = theta_omega theta_f` and
//! `S_{g,tau} = theta_tau theta_g`. `G` is dual to `F` when both equal the
//! identity and approximately dual when both defects `I - S` have norm
//! below one.

mod approx;
mod exact;

use std::fmt;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{FrameError, Result};
use crate::frames::{analysis_operator, synthesis_operator, FrameSystem};
use crate::operator::{
    compose, materialize, operator_pnorm, LtOne, NormCertificate, NormOptions, OperatorDesc,
};
use crate::sequence::{ModelSpace, Vector};

pub use approx::{
    dual_from_approx, factorize_approx_dual, neumann_iterate, parametrize_approx_dual_asf,
    perturbation_approx_dual, ApproxDualFactorization, ApproxParametrization, NeumannIterate,
    PerturbationBounds, PerturbationOutcome, PerturbationVerdict,
};
pub use exact::{canonical_duals, parametrize_dual, CanonicalDuals};

/// Relative reconstruction residual accepted as exact duality.
pub const EXACT_TOL: f64 = 1e-9;

/// Support length of random probes on the sequence space.
pub const SEQUENCE_PROBE_SUPPORT: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum DualVerdict {
    ExactDual,
    ApproxDual,
    NotApproxDual,
    Undecided,
}

impl fmt::Display for DualVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            DualVerdict::ExactDual => "ExactDual",
            DualVerdict::ApproxDual => "ApproxDual",
            DualVerdict::NotApproxDual => "NotApproxDual",
            DualVerdict::Undecided => "Undecided",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DualityOptions {
    /// Random probes on top of the basis vectors.
    pub probes: usize,
    pub seed: u64,
    pub norm: NormOptions,
}

impl Default for DualityOptions {
    fn default() -> Self {
        DualityOptions {
            probes: 16,
            seed: 0,
            norm: NormOptions::default(),
        }
    }
}

impl DualityOptions {
    pub fn with_seed(seed: u64) -> Self {
        DualityOptions {
            seed,
            norm: NormOptions {
                seed,
                ..NormOptions::default()
            },
            ..DualityOptions::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DualityReport {
    /// max over probes of `‖x - sum_n f_n(x) omega_n‖ / ‖x‖`
    pub residual_f_omega: f64,
    /// max over probes of `‖x - sum_n g_n(x) tau_n‖ / ‖x‖`
    pub residual_g_tau: f64,
    pub exact_residual: f64,
    /// Max-entry distance of both cross operators to the identity; finite
    /// spaces only.
    pub matrix_residual: Option<f64>,
    /// `‖I - theta_omega theta_f‖`
    pub cert_fg: NormCertificate,
    /// `‖I - theta_tau theta_g‖`
    pub cert_gf: NormCertificate,
    pub verdict: DualVerdict,
    pub notes: Vec<String>,
}

impl DualityReport {
    /// Verdict of the two defect certificates alone.
    pub fn certificate_verdict(&self) -> DualVerdict {
        combine(&self.cert_fg, &self.cert_gf)
    }

    /// Whether both reconstruction identities hold to [`EXACT_TOL`].
    pub fn passes_exact(&self) -> bool {
        self.exact_residual <= EXACT_TOL && self.matrix_residual.map_or(true, |r| r <= EXACT_TOL)
    }
}

impl fmt::Display for DualityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "verdict            {}", self.verdict)?;
        writeln!(f, "I - theta_w theta_f  {}", self.cert_fg)?;
        writeln!(f, "I - theta_t theta_g  {}", self.cert_gf)?;
        writeln!(f, "residual f/omega   {:.3e}", self.residual_f_omega)?;
        write!(f, "residual g/tau     {:.3e}", self.residual_g_tau)?;
        if let Some(r) = self.matrix_residual {
            write!(f, "\nmatrix residual    {r:.3e}")?;
        }
        for note in &self.notes {
            write!(f, "\nnote: {note}")?;
        }
        Ok(())
    }
}

fn combine(fg: &NormCertificate, gf: &NormCertificate) -> DualVerdict {
    match (fg.verdict_lt_one, gf.verdict_lt_one) {
        (LtOne::CertifiedYes, LtOne::CertifiedYes) => DualVerdict::ApproxDual,
        (LtOne::CertifiedNo, _) | (_, LtOne::CertifiedNo) => DualVerdict::NotApproxDual,
        _ => DualVerdict::Undecided,
    }
}

fn check_pair(f: &FrameSystem, g: &FrameSystem) -> Result<()> {
    if f.space() != g.space() {
        return Err(FrameError::SpaceMismatch(format!(
            "systems live on {} and {}",
            f.space(),
            g.space()
        )));
    }
    if f.coefficient_space() != g.coefficient_space() {
        return Err(FrameError::ShapeMismatch(format!(
            "coefficient spaces {} and {} differ",
            f.coefficient_space(),
            g.coefficient_space()
        )));
    }
    Ok(())
}

/// `theta_{synthesis of s} ∘ theta_{analysis of a}`; `cross(F, G)` is
/// `S_{f,omega}` and `cross(G, F)` is `S_{g,tau}`.
pub fn cross_frame_operator(a: &FrameSystem, s: &FrameSystem) -> Result<OperatorDesc> {
    check_pair(a, s)?;
    compose(&synthesis_operator(s), &analysis_operator(a))
}

/// Basis vectors plus `count` random unit vectors with entries drawn
/// uniformly from `[-1, 1]` before normalization.
pub fn probe_vectors(space: ModelSpace, count: usize, seed: u64) -> Result<Vec<Vector>> {
    let len = space.dim().unwrap_or(SEQUENCE_PROBE_SUPPORT);
    let mut out = (1..=len)
        .map(|n| Vector::basis(space, n))
        .collect::<Result<Vec<_>>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    while out.len() < len + count {
        let raw: Vec<f64> = (0..len).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let v = Vector::from_dense(space, &raw)?;
        let norm = v.p_norm();
        if norm > 0.0 {
            out.push(v.scale(1.0 / norm));
        }
    }
    Ok(out)
}

fn max_relative_residual(op: &OperatorDesc, probes: &[Vector]) -> Result<f64> {
    let mut worst = 0.0_f64;
    for x in probes {
        let r = x.sub(&op.apply(x)?)?.p_norm() / x.p_norm();
        worst = worst.max(r);
    }
    Ok(worst)
}

fn identity_distance(op: &OperatorDesc, d: usize) -> f64 {
    (materialize(op, d) - DMatrix::<f64>::identity(d, d)).amax()
}

pub(crate) fn defect_certificate(cross: &OperatorDesc, opts: &NormOptions) -> Result<NormCertificate> {
    let defect = cross.identity_minus()?;
    Ok(operator_pnorm(&defect, cross.domain().exponent(), opts))
}

fn build_report(f: &FrameSystem, g: &FrameSystem, opts: &DualityOptions) -> Result<DualityReport> {
    check_pair(f, g)?;
    let s_fw = cross_frame_operator(f, g)?;
    let s_gt = cross_frame_operator(g, f)?;
    let probes = probe_vectors(f.space(), opts.probes, opts.seed)?;
    let residual_f_omega = max_relative_residual(&s_fw, &probes)?;
    let residual_g_tau = max_relative_residual(&s_gt, &probes)?;
    let matrix_residual = f
        .space()
        .dim()
        .map(|d| identity_distance(&s_fw, d).max(identity_distance(&s_gt, d)));
    let cert_fg = defect_certificate(&s_fw, &opts.norm)?;
    let cert_gf = defect_certificate(&s_gt, &opts.norm)?;
    let verdict = combine(&cert_fg, &cert_gf);
    Ok(DualityReport {
        residual_f_omega,
        residual_g_tau,
        exact_residual: residual_f_omega.max(residual_g_tau),
        matrix_residual,
        cert_fg,
        cert_gf,
        verdict,
        notes: Vec::new(),
    })
}

/// `ExactDual` when both reconstruction identities hold on the probes (and
/// entrywise on finite spaces); otherwise the certificate verdict.
pub fn is_exact_dual(f: &FrameSystem, g: &FrameSystem, opts: &DualityOptions) -> Result<DualityReport> {
    let mut report = build_report(f, g, opts)?;
    if report.passes_exact() {
        report.verdict = DualVerdict::ExactDual;
    }
    Ok(report)
}

/// Certifies `‖I - theta_omega theta_f‖ < 1` and `‖I - theta_tau theta_g‖ < 1`.
/// The verdict never claims exactness.
pub fn certify_approx_dual(
    f: &FrameSystem,
    g: &FrameSystem,
    opts: &DualityOptions,
) -> Result<DualityReport> {
    build_report(f, g, opts)
}

/// `(‖x - theta_omega theta_f x‖_p, ‖x - theta_tau theta_g x‖_p)`.
pub fn reconstruction_error(f: &FrameSystem, g: &FrameSystem, x: &Vector) -> Result<(f64, f64)> {
    if x.is_zero() {
        return Err(FrameError::ZeroVector);
    }
    let s_fw = cross_frame_operator(f, g)?;
    let s_gt = cross_frame_operator(g, f)?;
    Ok((
        x.sub(&s_fw.apply(x)?)?.p_norm(),
        x.sub(&s_gt.apply(x)?)?.p_norm(),
    ))
}

/// Analysis (`m x d`) and synthesis (`d x m`) matrices of a finite system.
pub(crate) fn dense_parts(frame: &FrameSystem) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    if !frame.space().is_finite() {
        return Err(FrameError::NotFinite(format!(
            "{frame} needs a finite space for inversion"
        )));
    }
    Ok((frame.analysis_matrix()?, frame.synthesis_matrix()?))
}
