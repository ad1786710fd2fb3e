use nalgebra::DMatrix;
use serde::Serialize;

use super::exact::{condition_rejection, frame_operator_inverse, inverse_or_witness};
use super::{
    certify_approx_dual, check_pair, dense_parts, is_exact_dual, DualVerdict, DualityOptions,
    DualityReport,
};
use crate::error::{FrameError, Result};
use crate::frames::{analysis_operator, synthesis_operator, validate_p_abs, FrameSystem};
use crate::operator::{
    invert_matrix, materialize, operator_pnorm, LtOne, NormCertificate, NormOptions, OperatorDesc,
};
use crate::sequence::ModelSpace;

/// Entrywise tolerance for the iterate identities.
const IDENTITY_TOL: f64 = 1e-10;

const CONDITION_NOTE: &str = "printed condition S^-1 + BA - V theta_f S^-1 theta_tau A composes V \
with an l^p-valued map and is not evaluated; S^-1 + BA - B theta_f S^-1 theta_tau A is checked instead";

const ITERATE_NOTE: &str = "iterates satisfy theta_rho theta_f = I - (I - S_f,omega)^(N+1); \
they are approximate duals with geometric defect bounds, exact only in the limit";

fn require_approx(f: &FrameSystem, g: &FrameSystem, opts: &DualityOptions) -> Result<DualityReport> {
    let report = certify_approx_dual(f, g, opts)?;
    if report.verdict != DualVerdict::ApproxDual {
        return Err(FrameError::Precondition(format!(
            "pair is not certified approximately dual (verdict {})",
            report.verdict
        )));
    }
    Ok(report)
}

fn matrix_cert(m: &DMatrix<f64>, space: ModelSpace, opts: &NormOptions) -> Result<NormCertificate> {
    let op = OperatorDesc::dense(space, space, m.clone())?;
    Ok(operator_pnorm(&op, space.exponent(), opts))
}

fn identity(d: usize) -> DMatrix<f64> {
    DMatrix::identity(d, d)
}

/// Cross matrices `(S_{f,omega}, S_{g,tau})` and the four family matrices.
struct CrossParts {
    a_f: DMatrix<f64>,
    t: DMatrix<f64>,
    a_g: DMatrix<f64>,
    w: DMatrix<f64>,
    s_fw: DMatrix<f64>,
    s_gt: DMatrix<f64>,
}

fn cross_parts(f: &FrameSystem, g: &FrameSystem) -> Result<CrossParts> {
    check_pair(f, g)?;
    let (a_f, t) = dense_parts(f)?;
    let (a_g, w) = dense_parts(g)?;
    let s_fw = &w * &a_f;
    let s_gt = &t * &a_g;
    Ok(CrossParts {
        a_f,
        t,
        a_g,
        w,
        s_fw,
        s_gt,
    })
}

/// `({g_n S_{g,tau}^{-1}}, {S_{f,omega}^{-1} omega_n})`, dual to `F`, and
/// `({f_n S_{f,omega}^{-1}}, {S_{g,tau}^{-1} tau_n})`, dual to `G`.
pub fn dual_from_approx(
    f: &FrameSystem,
    g: &FrameSystem,
    opts: &DualityOptions,
) -> Result<(FrameSystem, FrameSystem)> {
    require_approx(f, g, opts)?;
    let c = cross_parts(f, g)?;
    let space = f.space();
    let s_fw_inv = inverse_or_witness(&c.s_fw, space)?;
    let s_gt_inv = inverse_or_witness(&c.s_gt, space)?;
    let for_f = FrameSystem::from_matrices(space, &c.a_g * &s_gt_inv, &s_fw_inv * &c.w)?;
    let for_g = FrameSystem::from_matrices(space, &c.a_f * &s_fw_inv, &s_gt_inv * &c.t)?;
    Ok((for_f, for_g))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ApproxDualFactorization {
    /// `theta_tau theta_g`
    pub u: OperatorDesc,
    /// `theta_omega theta_f`
    pub v: OperatorDesc,
    /// `‖I - U‖`
    pub cert_u: NormCertificate,
    /// `‖I - V‖`
    pub cert_v: NormCertificate,
    /// `({g_n U^{-1}}, {V^{-1} omega_n})`, dual to `F`.
    pub h: FrameSystem,
}

pub fn factorize_approx_dual(
    f: &FrameSystem,
    g: &FrameSystem,
    opts: &DualityOptions,
) -> Result<ApproxDualFactorization> {
    let report = require_approx(f, g, opts)?;
    let c = cross_parts(f, g)?;
    let space = f.space();
    let u_inv = inverse_or_witness(&c.s_gt, space)?;
    let v_inv = inverse_or_witness(&c.s_fw, space)?;
    Ok(ApproxDualFactorization {
        u: OperatorDesc::dense(space, space, c.s_gt.clone())?,
        v: OperatorDesc::dense(space, space, c.s_fw.clone())?,
        cert_u: report.cert_gf,
        cert_v: report.cert_fg,
        h: FrameSystem::from_matrices(space, &c.a_g * &u_inv, &v_inv * &c.w)?,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ApproxParametrization {
    pub system: FrameSystem,
    pub cert_u: NormCertificate,
    pub cert_v: NormCertificate,
    pub report: DualityReport,
}

fn operator_matrix(
    op: &OperatorDesc,
    domain: ModelSpace,
    codomain: ModelSpace,
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

/// Approximate dual of `frame` with `U, V: X -> X` close to the identity,
/// `A: X -> l^p` and `B: l^p -> X`:
/// `theta_g = (theta_f S^{-1} + A - theta_f S^{-1} theta_tau A) U` and
/// `theta_omega = V (S^{-1} theta_tau + B - B theta_f S^{-1} theta_tau)`.
///
/// Then `theta_tau theta_g = U` and `theta_omega theta_f = V`.
pub fn parametrize_approx_dual_asf(
    frame: &FrameSystem,
    u: &OperatorDesc,
    v: &OperatorDesc,
    a: &OperatorDesc,
    b: &OperatorDesc,
    opts: &DualityOptions,
) -> Result<ApproxParametrization> {
    let (af, t) = dense_parts(frame)?;
    let space = frame.space();
    let coeff = frame.coefficient_space();
    let um = operator_matrix(u, space, space, "U")?;
    let vm = operator_matrix(v, space, space, "V")?;
    let am = operator_matrix(a, space, coeff, "A")?;
    let bm = operator_matrix(b, coeff, space, "B")?;
    let d = um.nrows();

    let cert_u = matrix_cert(&(identity(d) - &um), space, &opts.norm)?;
    let cert_v = matrix_cert(&(identity(d) - &vm), space, &opts.norm)?;
    for (name, cert) in [("U", &cert_u), ("V", &cert_v)] {
        if cert.verdict_lt_one != LtOne::CertifiedYes {
            return Err(FrameError::NormConditionViolated(format!(
                "‖I - {name}‖ is not certified below 1 (upper {})",
                cert.upper
            )));
        }
    }

    let s_inv = frame_operator_inverse(frame)?;
    let a_s = &af * &s_inv;
    let s_t = &s_inv * &t;
    let theta_g = (&a_s + &am - &a_s * (&t * &am)) * &um;
    let theta_w = &vm * (&s_t + &bm - &bm * (&af * &s_t));
    let condition = &s_inv + &bm * &am - &bm * (&a_s * (&t * &am));
    if invert_matrix(&condition).is_err() {
        return Err(condition_rejection(&condition, space));
    }
    let system = FrameSystem::from_matrices(space, theta_g, theta_w)?;
    let mut report = certify_approx_dual(frame, &system, opts)?;
    report.notes.push(CONDITION_NOTE.to_string());
    Ok(ApproxParametrization {
        system,
        cert_u,
        cert_v,
        report,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NeumannIterate {
    pub depth: usize,
    #[serde(skip)]
    pub system: FrameSystem,
    /// `upper(‖I - S_{f,omega}‖)^(N+1)`
    pub bound_fg: f64,
    /// `upper(‖I - S_{g,tau}‖)^(N+1)`
    pub bound_gf: f64,
    /// `‖I - theta_rho theta_f‖`
    pub cert_fg: NormCertificate,
    /// `‖I - theta_tau theta_h‖`
    pub cert_gf: NormCertificate,
    /// Max-entry error of both iterate identities.
    pub identity_residual: f64,
    pub notes: Vec<String>,
}

fn power(m: &DMatrix<f64>, k: usize) -> DMatrix<f64> {
    let mut out = identity(m.nrows());
    for _ in 0..k {
        out = &out * m;
    }
    out
}

/// `sum_{m=0}^{N} D^m` by Horner steps.
fn partial_neumann(d: &DMatrix<f64>, depth: usize) -> DMatrix<f64> {
    let id = identity(d.nrows());
    let mut acc = id.clone();
    for _ in 0..depth {
        acc = &id + d * &acc;
    }
    acc
}

/// `h_n = g_n sum_{m<=N} (I - S_{g,tau})^m`,
/// `rho_n = sum_{m<=N} (I - S_{f,omega})^m omega_n`.
pub fn neumann_iterate(
    f: &FrameSystem,
    g: &FrameSystem,
    depth: usize,
    opts: &DualityOptions,
) -> Result<NeumannIterate> {
    let base = require_approx(f, g, opts)?;
    let c = cross_parts(f, g)?;
    let space = f.space();
    let d = c.s_fw.nrows();
    let d_fw = identity(d) - &c.s_fw;
    let d_gt = identity(d) - &c.s_gt;

    let theta_h = &c.a_g * partial_neumann(&d_gt, depth);
    let theta_rho = partial_neumann(&d_fw, depth) * &c.w;

    let rho_f = &theta_rho * &c.a_f;
    let tau_h = &c.t * &theta_h;
    let expected_fg = identity(d) - power(&d_fw, depth + 1);
    let expected_gt = identity(d) - power(&d_gt, depth + 1);
    let identity_residual = (&rho_f - expected_fg).amax().max((&tau_h - expected_gt).amax());
    if identity_residual > IDENTITY_TOL {
        return Err(FrameError::Numerical(format!(
            "iterate identity violated by {identity_residual:.3e}"
        )));
    }

    let exponent = i32::try_from(depth + 1).unwrap_or(i32::MAX);
    let bound_fg = base.cert_fg.upper.powi(exponent);
    let bound_gf = base.cert_gf.upper.powi(exponent);
    let cert_fg = matrix_cert(&(identity(d) - rho_f), space, &opts.norm)?;
    let cert_gf = matrix_cert(&(identity(d) - tau_h), space, &opts.norm)?;
    for (cert, bound) in [(&cert_fg, bound_fg), (&cert_gf, bound_gf)] {
        if cert.lower > bound + 1e-9 {
            return Err(FrameError::Numerical(format!(
                "attained defect {} exceeds the geometric bound {bound}",
                cert.lower
            )));
        }
    }
    Ok(NeumannIterate {
        depth,
        system: FrameSystem::from_matrices(space, theta_h, theta_rho)?,
        bound_fg,
        bound_gf,
        cert_fg,
        cert_gf,
        identity_residual,
        notes: vec![ITERATE_NOTE.to_string()],
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PerturbationBounds {
    /// upper bound of `‖theta_f - theta_h‖`
    pub r: f64,
    /// upper bound of `‖theta_tau - theta_rho‖`
    pub q: f64,
    /// analysis bound of the reference dual
    pub c: f64,
    /// synthesis bound of the reference dual
    pub d: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum PerturbationVerdict {
    ApproxDual,
    /// `dR` or `cQ` is not certified below one.
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PerturbationOutcome {
    pub bounds: PerturbationBounds,
    pub verdict: PerturbationVerdict,
    /// Certification of `(F, G)`; when the hypotheses hold the defect
    /// uppers are tightened to `dR` and `cQ`.
    pub report: DualityReport,
}

/// `G` is dual to the reference system `H`; `F` is a perturbation of `H`.
/// When `dR < 1` and `cQ < 1`, `G` is approximately dual to `F` with
/// `‖I - theta_omega theta_f‖ <= dR` and `‖I - theta_tau theta_g‖ <= cQ`.
pub fn perturbation_approx_dual(
    h: &FrameSystem,
    g: &FrameSystem,
    f: &FrameSystem,
    opts: &DualityOptions,
) -> Result<PerturbationOutcome> {
    let reference = is_exact_dual(h, g, opts)?;
    if reference.verdict != DualVerdict::ExactDual {
        return Err(FrameError::Precondition(format!(
            "reference pair is not exactly dual (residual {:.3e})",
            reference.exact_residual
        )));
    }
    check_pair(h, f)?;
    let p = f.exponent();
    let analysis_gap = analysis_operator(f).minus(&analysis_operator(h))?;
    let synthesis_gap = synthesis_operator(f).minus(&synthesis_operator(h))?;
    let r = operator_pnorm(&analysis_gap, p, &opts.norm).upper;
    let q = operator_pnorm(&synthesis_gap, p, &opts.norm).upper;
    let bessel = validate_p_abs(g, &opts.norm)?;
    let bounds = PerturbationBounds {
        r,
        q,
        c: bessel.c,
        d: bessel.d,
    };

    let mut report = certify_approx_dual(f, g, opts)?;
    let eps = opts.norm.eps_cert;
    let dr = bounds.d * bounds.r;
    let cq = bounds.c * bounds.q;
    if !(dr < 1.0 - eps && cq < 1.0 - eps) {
        return Ok(PerturbationOutcome {
            bounds,
            verdict: PerturbationVerdict::Inconclusive,
            report,
        });
    }
    for (cert, bound) in [(&report.cert_fg, dr), (&report.cert_gf, cq)] {
        if cert.lower > bound + 1e-9 {
            return Err(FrameError::Numerical(format!(
                "attained defect {} exceeds the perturbation bound {bound}",
                cert.lower
            )));
        }
    }
    report.cert_fg = report.cert_fg.tightened(dr, eps, "bounded by dR");
    report.cert_gf = report.cert_gf.tightened(cq, eps, "bounded by cQ");
    report.verdict = report.certificate_verdict();
    if report.verdict != DualVerdict::ApproxDual {
        return Err(FrameError::Numerical(
            "perturbation hypotheses hold but the certificate does not".into(),
        ));
    }
    Ok(PerturbationOutcome {
        bounds,
        verdict: PerturbationVerdict::ApproxDual,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::duality::canonical_duals;
    use crate::sequence::Exponent;
    use nalgebra::dmatrix;

    fn space(d: usize) -> ModelSpace {
        ModelSpace::finite(d, Exponent::new(2.0).unwrap()).unwrap()
    }

    fn scaled(d: usize, c: f64) -> FrameSystem {
        FrameSystem::from_matrices(space(d), identity(d), identity(d) * c).unwrap()
    }

    #[test]
    fn duals_from_the_scaled_pair() {
        let f = FrameSystem::standard(space(2));
        let g = scaled(2, 0.9);
        let opts = DualityOptions::default();
        let (for_f, for_g) = dual_from_approx(&f, &g, &opts).unwrap();
        assert_eq!(is_exact_dual(&f, &for_f, &opts).unwrap().verdict, DualVerdict::ExactDual);
        assert_eq!(is_exact_dual(&g, &for_g, &opts).unwrap().verdict, DualVerdict::ExactDual);
        let same = dual_from_approx(&f, &f, &opts).unwrap();
        assert_eq!(same, (f.clone(), f));
    }

    #[test]
    fn dual_from_approx_on_a_skewed_pair() {
        let s = space(2);
        let f = FrameSystem::from_matrices(s, dmatrix![2.0, 0.0; 0.0, 1.0], identity(2)).unwrap();
        let g = FrameSystem::from_matrices(s, identity(2), dmatrix![0.6, 0.0; 0.0, 1.0]).unwrap();
        let opts = DualityOptions::default();
        let (for_f, for_g) = dual_from_approx(&f, &g, &opts).unwrap();
        assert!(is_exact_dual(&f, &for_f, &opts).unwrap().exact_residual <= 1e-12);
        assert!(is_exact_dual(&g, &for_g, &opts).unwrap().exact_residual <= 1e-12);
    }

    #[test]
    fn factorization_of_the_scaled_pair() {
        let f = FrameSystem::standard(space(2));
        let g = scaled(2, 0.9);
        let fac = factorize_approx_dual(&f, &g, &DualityOptions::default()).unwrap();
        assert_eq!(materialize(&fac.u, 2), identity(2));
        assert!((materialize(&fac.v, 2) - identity(2) * 0.9).amax() < 1e-15);
        assert!((fac.h.synthesis_matrix().unwrap() - identity(2)).amax() < 1e-15);
        assert_eq!(fac.h.analysis_matrix().unwrap(), identity(2));
    }

    #[test]
    fn approximate_parametrization() {
        let f = FrameSystem::standard(space(2));
        let s = f.space();
        let p = Exponent::new(2.0).unwrap();
        let near = OperatorDesc::from_matrix(identity(2) * 0.95, p).unwrap();
        let zero = OperatorDesc::zero(s, s);
        let out = parametrize_approx_dual_asf(&f, &near, &near, &zero, &zero, &DualityOptions::default()).unwrap();
        assert!((out.system.analysis_matrix().unwrap() - identity(2) * 0.95).amax() < 1e-15);
        assert!((out.system.synthesis_matrix().unwrap() - identity(2) * 0.95).amax() < 1e-15);
        assert_eq!(out.report.verdict, DualVerdict::ApproxDual);
        assert!((out.report.cert_fg.upper - 0.05).abs() < 1e-12);
        assert!((out.report.cert_gf.upper - 0.05).abs() < 1e-12);
        assert_eq!(out.report.notes.len(), 1);

        let id = OperatorDesc::identity(s);
        let canonical = parametrize_approx_dual_asf(&f, &id, &id, &zero, &zero, &DualityOptions::default()).unwrap();
        assert_eq!(canonical.system, canonical_duals(&f).unwrap().full);

        let far = OperatorDesc::from_matrix(identity(2) * 2.5, p).unwrap();
        assert!(matches!(
            parametrize_approx_dual_asf(&f, &far, &id, &zero, &zero, &DualityOptions::default()),
            Err(FrameError::NormConditionViolated(_))
        ));
    }

    #[test]
    fn neumann_on_the_half_scaled_pair() {
        let f = FrameSystem::standard(space(2));
        let g = scaled(2, 0.5);
        let opts = DualityOptions::default();
        let it = neumann_iterate(&f, &g, 3, &opts).unwrap();
        assert!((it.cert_fg.upper - 0.0625).abs() < 1e-12);
        assert!((it.cert_fg.lower - 0.0625).abs() < 1e-12);
        assert!((it.bound_fg - 0.0625).abs() < 1e-15);
        assert_eq!(it.cert_gf.upper, 0.0);

        let zero = neumann_iterate(&f, &g, 0, &opts).unwrap();
        assert_eq!(zero.system, g);
        assert!((zero.bound_fg - 0.5).abs() < 1e-15);

        let exact = neumann_iterate(&f, &f, 5, &opts).unwrap();
        assert_eq!(exact.system, f);
        assert_eq!(exact.cert_fg.upper, 0.0);

        let not_approx = scaled(2, 3.0);
        assert!(matches!(
            neumann_iterate(&f, &not_approx, 2, &opts),
            Err(FrameError::Precondition(_))
        ));
    }

    #[test]
    fn perturbation_bounds() {
        let h = FrameSystem::standard(space(3));
        let opts = DualityOptions::default();
        let same = perturbation_approx_dual(&h, &h, &h, &opts).unwrap();
        assert_eq!((same.bounds.r, same.bounds.q), (0.0, 0.0));
        assert_eq!(same.verdict, PerturbationVerdict::ApproxDual);

        let f = scaled(3, 1.05);
        let out = perturbation_approx_dual(&h, &h, &f, &opts).unwrap();
        assert_eq!(out.bounds.r, 0.0);
        assert!((out.bounds.q - 0.05).abs() < 1e-12);
        assert_eq!((out.bounds.c, out.bounds.d), (1.0, 1.0));
        assert_eq!(out.verdict, PerturbationVerdict::ApproxDual);
        assert_eq!(out.report.verdict, DualVerdict::ApproxDual);

        let far = scaled(3, 3.0);
        let out = perturbation_approx_dual(&h, &h, &far, &opts).unwrap();
        assert!((out.bounds.q - 2.0).abs() < 1e-12);
        assert_eq!(out.verdict, PerturbationVerdict::Inconclusive);

        assert!(matches!(
            perturbation_approx_dual(&h, &scaled(3, 0.5), &f, &opts),
            Err(FrameError::Precondition(_))
        ));
    }
}
