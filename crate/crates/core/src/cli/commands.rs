use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use super::output::Outcome;
use super::{Cli, Command, Experiment, EXIT_NEGATIVE, EXIT_OK, EXIT_UNDECIDED};
use crate::duality::{
    canonical_duals, certify_approx_dual, factorize_approx_dual, is_exact_dual, neumann_iterate,
    parametrize_approx_dual_asf, parametrize_dual, perturbation_approx_dual, DualVerdict,
    DualityOptions, PerturbationVerdict,
};
use crate::error::{FrameError, Result};
use crate::excess::{excess_invariance_trial, p_excess, ExcessMethod, TrialConfig};
use crate::frames::{
    analysis_operator, factorize_abs, frame_operator, synthesis_operator, validate_p_abs,
    validate_p_asf, FrameSystem,
};
use crate::gallery::{gallery, GalleryEntry};
use crate::operator::{operator_pnorm, NormCertificate, NormOptions, OperatorDesc};
use crate::sequence::{Exponent, ModelSpace};

struct Context {
    p: Option<Exponent>,
    opts: DualityOptions,
}

impl Context {
    fn new(cli: &Cli) -> Result<Self> {
        let c = &cli.common;
        let p = c.p.map(Exponent::new).transpose()?;
        let mut norm = NormOptions {
            seed: c.seed,
            ..NormOptions::default()
        };
        if let Some(h) = &c.horizons {
            if h.is_empty() || h.contains(&0) {
                return Err(FrameError::Precondition("horizons must be positive".into()));
            }
            norm.horizons = h.clone();
        }
        Ok(Context {
            p,
            opts: DualityOptions {
                probes: c.probes,
                seed: c.seed,
                norm,
            },
        })
    }

    fn norm(&self) -> &NormOptions {
        &self.opts.norm
    }
}

fn read_json(path: &Path) -> Result<Value> {
    let text = fs::read_to_string(path).map_err(|e| FrameError::Parse {
        path: path.display().to_string(),
        message: format!("cannot read file: {e}"),
    })?;
    serde_json::from_str(&text).map_err(|e| FrameError::Parse {
        path: format!("{}:{}:{}", path.display(), e.line(), e.column()),
        message: e.to_string(),
    })
}

fn in_file(path: &Path, e: FrameError) -> FrameError {
    match e {
        FrameError::Parse { path: field, message } => FrameError::Parse {
            path: format!("{} ({field})", path.display()),
            message,
        },
        other => other,
    }
}

fn load_frame(path: &Path, label: &str, ctx: &Context) -> Result<FrameSystem> {
    let value = read_json(path)?;
    let frame = FrameSystem::from_json(&value, label).map_err(|e| in_file(path, e))?;
    match ctx.p {
        Some(p) => frame.with_exponent(p),
        None => Ok(frame),
    }
}

fn load_operator(path: &Path, label: &str, domain: ModelSpace) -> Result<OperatorDesc> {
    let value = read_json(path)?;
    OperatorDesc::from_json(&value, domain, label).map_err(|e| in_file(path, e))
}

fn write_json_file(dir: &Path, name: &str, value: &Value) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| FrameError::Parse {
        path: dir.display().to_string(),
        message: format!("cannot create directory: {e}"),
    })?;
    let path = dir.join(name);
    let mut text = serde_json::to_string_pretty(value).expect("JSON values serialize");
    text.push('\n');
    fs::write(&path, text).map_err(|e| FrameError::Parse {
        path: path.display().to_string(),
        message: format!("cannot write file: {e}"),
    })?;
    Ok(path)
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

fn verdict_code(v: DualVerdict) -> i32 {
    match v {
        DualVerdict::ExactDual | DualVerdict::ApproxDual => EXIT_OK,
        DualVerdict::NotApproxDual => EXIT_NEGATIVE,
        DualVerdict::Undecided => EXIT_UNDECIDED,
    }
}

fn cert_code(c: &NormCertificate) -> i32 {
    if c.upper.is_finite() {
        EXIT_OK
    } else {
        EXIT_UNDECIDED
    }
}

fn outcome(command: &'static str, code: i32, body: Value, human: String) -> Outcome {
    Outcome {
        command,
        code,
        body,
        human,
        csv: None,
    }
}

pub fn execute(cli: &Cli) -> Result<Outcome> {
    let ctx = Context::new(cli)?;
    match &cli.command {
        Command::Validate { f } => validate(&load_frame(f, "f", &ctx)?, &ctx),
        Command::Bounds { f } => bounds(&load_frame(f, "f", &ctx)?, &ctx),
        Command::DualCheck { f, g } => {
            let f = load_frame(f, "f", &ctx)?;
            let g = load_frame(g, "g", &ctx)?;
            let report = is_exact_dual(&f, &g, &ctx.opts)?;
            let code = if report.verdict == DualVerdict::ExactDual {
                EXIT_OK
            } else {
                EXIT_NEGATIVE
            };
            Ok(outcome("dual-check", code, to_value(&report), report.to_string()))
        }
        Command::CanonicalDual { f, out_dir } => {
            canonical(&load_frame(f, "f", &ctx)?, out_dir.as_deref(), &ctx)
        }
        Command::ParametrizeDual { f, u, v, a, b } => {
            let f = load_frame(f, "f", &ctx)?;
            match (a, b) {
                (Some(a), Some(b)) => approx_parametrize(&f, u, v, a, b, &ctx),
                _ => exact_parametrize(&f, u, v, &ctx),
            }
        }
        Command::ApproxCert { f, g } => {
            let f = load_frame(f, "f", &ctx)?;
            let g = load_frame(g, "g", &ctx)?;
            let report = certify_approx_dual(&f, &g, &ctx.opts)?;
            Ok(outcome(
                "approx-cert",
                verdict_code(report.verdict),
                to_value(&report),
                report.to_string(),
            ))
        }
        Command::Factorize { f, g } => {
            let f = load_frame(f, "f", &ctx)?;
            match g {
                Some(g) => factorize_pair(&f, &load_frame(g, "g", &ctx)?, &ctx),
                None => {
                    let (u, v) = factorize_abs(&f);
                    let human = format!("U = theta_f: {:?}\nV = theta_tau: {:?}", u.body(), v.body());
                    Ok(outcome("factorize", EXIT_OK, json!({"U": u.to_json(), "V": v.to_json()}), human))
                }
            }
        }
        Command::Neumann { f, g, depth } => {
            let f = load_frame(f, "f", &ctx)?;
            let g = load_frame(g, "g", &ctx)?;
            neumann(&f, &g, *depth, &ctx)
        }
        Command::Perturb { h, g, f } => {
            let h = load_frame(h, "h", &ctx)?;
            let g = load_frame(g, "g", &ctx)?;
            let f = load_frame(f, "f", &ctx)?;
            perturb(&h, &g, &f, &ctx)
        }
        Command::Excess { f, greedy } => {
            let f = load_frame(f, "f", &ctx)?;
            let method = if *greedy {
                ExcessMethod::Greedy
            } else {
                ExcessMethod::BruteForce
            };
            let r = p_excess(&f, method)?;
            let human = format!(
                "p-excess {}{} (removed {:?}, {:?})",
                if r.exact { "" } else { ">= " },
                r.value,
                r.witness,
                r.method
            );
            Ok(outcome("excess", EXIT_OK, json!({"excess": to_value(&r)}), human))
        }
        Command::Experiment {
            which:
                Experiment::ExcessInvariance {
                    trials,
                    max_dim,
                    max_m,
                    mirror,
                    out_dir,
                },
        } => {
            let config = TrialConfig {
                max_dim: *max_dim,
                max_m: *max_m,
                p: ctx.p.map(Exponent::get),
                mirror: *mirror,
                ..TrialConfig::default()
            };
            experiment(&config, *trials, cli.common.seed, out_dir.as_deref())
        }
        Command::Gallery { name, out_dir } => {
            let p = ctx.p.unwrap_or(Exponent::new(2.0)?);
            gallery_command(p, name.as_deref(), out_dir.as_deref())
        }
    }
}

fn validate(f: &FrameSystem, ctx: &Context) -> Result<Outcome> {
    let bessel = match validate_p_abs(f, ctx.norm()) {
        Ok(b) => b,
        Err(e @ FrameError::UnboundedCertificate(_)) => {
            let body = json!({"p_abs": false, "status": "unbounded", "reason": e.to_string()});
            return Ok(outcome("validate", EXIT_UNDECIDED, body, format!("p-ABS: {e}")));
        }
        Err(e) => return Err(e),
    };
    let mut human = format!("p-ABS with analysis bound c = {} and synthesis bound d = {}\n", bessel.c, bessel.d);
    let (code, status) = match validate_p_asf(f, ctx.norm()) {
        Ok(fb) => {
            let _ = write!(human, "p-ASF with bounds a = {}, b = {}", fb.a, fb.b);
            (EXIT_OK, json!({"status": "p-ASF", "frame_bounds": to_value(&fb)}))
        }
        Err(FrameError::NotInvertible { witness }) => {
            let w = witness.as_ref().map_or(Value::Null, |w| w.to_json());
            let _ = write!(human, "frame operator is not invertible; witness {w}");
            (EXIT_NEGATIVE, json!({"status": "not-invertible", "witness": w}))
        }
        Err(FrameError::Undecided(reason)) => {
            let _ = write!(human, "invertibility undecided: {reason}");
            (EXIT_UNDECIDED, json!({"status": "undecided", "reason": reason}))
        }
        Err(e) => return Err(e),
    };
    let body = json!({"p_abs": true, "bessel_bounds": to_value(&bessel), "p_asf": status});
    Ok(outcome("validate", code, body, human))
}

fn bounds(f: &FrameSystem, ctx: &Context) -> Result<Outcome> {
    let p = f.exponent();
    let certs = [
        ("analysis", operator_pnorm(&analysis_operator(f), p, ctx.norm())),
        ("synthesis", operator_pnorm(&synthesis_operator(f), p, ctx.norm())),
        ("frame_operator", operator_pnorm(&frame_operator(f), p, ctx.norm())),
    ];
    let code = certs.iter().map(|(_, c)| cert_code(c)).max().unwrap_or(EXIT_OK);
    let mut human = String::new();
    let mut body = serde_json::Map::new();
    for (name, cert) in &certs {
        let _ = writeln!(human, "{name:<15} {cert}");
        body.insert((*name).to_string(), to_value(cert));
    }
    Ok(outcome("bounds", code, Value::Object(body), human))
}

fn canonical(f: &FrameSystem, out_dir: Option<&Path>, ctx: &Context) -> Result<Outcome> {
    let c = match canonical_duals(f) {
        Ok(c) => c,
        Err(FrameError::NotInvertible { witness }) => {
            let w = witness.as_ref().map_or(Value::Null, |w| w.to_json());
            let human = format!("frame operator is not invertible; witness {w}");
            return Ok(outcome("canonical-dual", EXIT_NEGATIVE, json!({"status": "not-invertible", "witness": w}), human));
        }
        Err(e) => return Err(e),
    };
    let report = is_exact_dual(f, &c.full, &ctx.opts)?;
    let mut files = Vec::new();
    if let Some(dir) = out_dir {
        for (name, sys) in [("left", &c.left), ("right", &c.right), ("full", &c.full)] {
            files.push(write_json_file(dir, &format!("canonical_{name}.json"), &sys.to_json())?.display().to_string());
        }
    }
    let body = json!({
        "left": c.left.to_json(),
        "right": c.right.to_json(),
        "full": c.full.to_json(),
        "report": to_value(&report),
        "files": files,
    });
    let human = format!("two-sided canonical dual\n{report}");
    Ok(outcome("canonical-dual", verdict_code(report.verdict), body, human))
}

fn exact_parametrize(f: &FrameSystem, u: &Path, v: &Path, ctx: &Context) -> Result<Outcome> {
    let u = load_operator(u, "u", f.space())?;
    let v = load_operator(v, "v", f.coefficient_space())?;
    match parametrize_dual(f, &u, &v) {
        Ok(g) => {
            let report = is_exact_dual(f, &g, &ctx.opts)?;
            let code = if report.verdict == DualVerdict::ExactDual { EXIT_OK } else { EXIT_NEGATIVE };
            let human = format!("parametrized dual\n{report}");
            Ok(outcome("parametrize-dual", code, json!({"dual": g.to_json(), "report": to_value(&report)}), human))
        }
        Err(FrameError::ConditionOperatorSingular(detail)) => rejection(detail),
        Err(e) => Err(e),
    }
}

fn rejection(detail: String) -> Result<Outcome> {
    let parsed: Value = serde_json::from_str(&detail).unwrap_or(Value::String(detail.clone()));
    Ok(outcome(
        "parametrize-dual",
        EXIT_NEGATIVE,
        json!({"status": "rejected", "rejection": parsed}),
        format!("rejected: {detail}"),
    ))
}

fn approx_parametrize(f: &FrameSystem, u: &Path, v: &Path, a: &Path, b: &Path, ctx: &Context) -> Result<Outcome> {
    let space = f.space();
    let u = load_operator(u, "u", space)?;
    let v = load_operator(v, "v", space)?;
    let a = load_operator(a, "a", space)?;
    let b = load_operator(b, "b", f.coefficient_space())?;
    match parametrize_approx_dual_asf(f, &u, &v, &a, &b, &ctx.opts) {
        Ok(out) => {
            let body = json!({
                "approximate_dual": out.system.to_json(),
                "cert_u": to_value(&out.cert_u),
                "cert_v": to_value(&out.cert_v),
                "report": to_value(&out.report),
            });
            let human = format!("approximate dual\n{}", out.report);
            Ok(outcome("parametrize-dual", verdict_code(out.report.verdict), body, human))
        }
        Err(FrameError::ConditionOperatorSingular(detail)) => rejection(detail),
        Err(e @ FrameError::NormConditionViolated(_)) => Ok(outcome(
            "parametrize-dual",
            EXIT_NEGATIVE,
            json!({"status": "rejected", "rejection": e.to_string()}),
            format!("rejected: {e}"),
        )),
        Err(e) => Err(e),
    }
}

fn factorize_pair(f: &FrameSystem, g: &FrameSystem, ctx: &Context) -> Result<Outcome> {
    let fac = factorize_approx_dual(f, g, &ctx.opts)?;
    let report = is_exact_dual(f, &fac.h, &ctx.opts)?;
    let body = json!({
        "U": fac.u.to_json(),
        "V": fac.v.to_json(),
        "cert_u": to_value(&fac.cert_u),
        "cert_v": to_value(&fac.cert_v),
        "H": fac.h.to_json(),
        "H_report": to_value(&report),
    });
    let human = format!(
        "I - U  {}\nI - V  {}\nH against F: {}",
        fac.cert_u, fac.cert_v, report.verdict
    );
    Ok(outcome("factorize", verdict_code(report.verdict), body, human))
}

fn neumann(f: &FrameSystem, g: &FrameSystem, depth: usize, ctx: &Context) -> Result<Outcome> {
    let it = neumann_iterate(f, g, depth, &ctx.opts)?;
    let mut body = to_value(&it);
    if let Value::Object(map) = &mut body {
        map.insert("iterate".into(), it.system.to_json());
    }
    let human = format!(
        "depth {depth}\nI - theta_rho theta_f  {}  (bound {})\nI - theta_tau theta_h  {}  (bound {})\nidentity residual {:.3e}",
        it.cert_fg, it.bound_fg, it.cert_gf, it.bound_gf, it.identity_residual
    );
    Ok(outcome("neumann", EXIT_OK, body, human))
}

fn perturb(h: &FrameSystem, g: &FrameSystem, f: &FrameSystem, ctx: &Context) -> Result<Outcome> {
    let out = perturbation_approx_dual(h, g, f, &ctx.opts)?;
    let code = match out.verdict {
        PerturbationVerdict::ApproxDual => EXIT_OK,
        PerturbationVerdict::Inconclusive => EXIT_UNDECIDED,
    };
    let b = out.bounds;
    let human = format!(
        "R = {}, Q = {}, c = {}, d = {}\ndR = {}, cQ = {}: {:?}\n{}",
        b.r,
        b.q,
        b.c,
        b.d,
        b.d * b.r,
        b.c * b.q,
        out.verdict,
        out.report
    );
    Ok(outcome("perturb", code, to_value(&out), human))
}

fn experiment(config: &TrialConfig, trials: usize, seed: u64, out_dir: Option<&Path>) -> Result<Outcome> {
    let report = excess_invariance_trial(config, trials, seed)?;
    let mut csv_bytes = Vec::new();
    report.write_csv(&mut csv_bytes)?;
    let csv_text = String::from_utf8(csv_bytes).expect("csv of utf-8 fields is utf-8");
    let report_json = to_value(&report);
    let mut files = Vec::new();
    if let Some(dir) = out_dir {
        let json_path = write_json_file(dir, "excess_invariance.json", &report_json)?;
        let csv_path = dir.join("excess_invariance.csv");
        fs::write(&csv_path, &csv_text).map_err(|e| FrameError::Parse {
            path: csv_path.display().to_string(),
            message: format!("cannot write file: {e}"),
        })?;
        files.push(csv_path.display().to_string());
        files.push(json_path.display().to_string());
    }
    let human = format!(
        "{} trials, {} with equal p-excess (rate {:.4}); subset search matched bitmask enumeration on every trial",
        report.trials, report.equal_count, report.equality_rate
    );
    let body = json!({"report": report_json, "files": files});
    Ok(Outcome {
        command: "experiment excess-invariance",
        code: EXIT_OK,
        body,
        human,
        csv: Some(csv_text),
    })
}

fn gallery_command(p: Exponent, name: Option<&str>, out_dir: Option<&Path>) -> Result<Outcome> {
    let entries: Vec<GalleryEntry> = gallery(p)
        .into_iter()
        .filter(|e| name.map_or(true, |n| n == e.name))
        .collect();
    if entries.is_empty() {
        let known: Vec<&str> = gallery(p).iter().map(|e| e.name).collect();
        return Err(FrameError::Precondition(format!(
            "unknown gallery entry {:?}; known entries: {}",
            name.unwrap_or(""),
            known.join(", ")
        )));
    }
    let mut files = Vec::new();
    let mut human = String::new();
    for e in &entries {
        let _ = writeln!(
            human,
            "{:<24} {}  (expected {}, defects {} and {})",
            e.name, e.summary, e.expected.verdict, e.expected.defect_fg, e.expected.defect_gf
        );
        if let Some(dir) = out_dir {
            for (side, sys) in [("F", &e.f), ("G", &e.g)] {
                let path = write_json_file(dir, &format!("{}_{side}.json", e.name), &sys.to_json())?;
                files.push(path.display().to_string());
            }
        }
    }
    let body = json!({
        "entries": entries.iter().map(GalleryEntry::to_json).collect::<Vec<_>>(),
        "files": files,
    });
    Ok(outcome("gallery", EXIT_OK, body, human))
}
