//! Worked shift examples and seeded instance generators.

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::duality::{canonical_duals, certify_approx_dual, DualVerdict, DualityOptions};
use crate::error::{FrameError, Result};
use crate::frames::FrameSystem;
use crate::operator::{max_col_sum, max_row_sum, OperatorDesc, Witness};
use crate::sequence::{Exponent, ModelSpace, Vector};

/// Retry budget of [`random_approx_dual_pair`].
pub const PAIR_BUDGET: usize = 100;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Expected {
    /// `‖I - theta_omega theta_f‖`
    pub defect_fg: f64,
    /// `‖I - theta_tau theta_g‖`
    pub defect_gf: f64,
    pub verdict: DualVerdict,
    /// Non-invertible operators of the pair with their witnesses.
    #[serde(skip)]
    pub witnesses: Vec<(String, Witness)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GalleryEntry {
    pub name: &'static str,
    pub summary: &'static str,
    pub f: FrameSystem,
    pub g: FrameSystem,
    pub expected: Expected,
}

impl GalleryEntry {
    pub fn to_json(&self) -> Value {
        let witnesses: Vec<Value> = self
            .expected
            .witnesses
            .iter()
            .map(|(op, w)| json!({"operator": op, "witness": w.to_json()}))
            .collect();
        json!({
            "name": self.name,
            "summary": self.summary,
            "F": self.f.to_json(),
            "G": self.g.to_json(),
            "expected": {
                "defect_fg": self.expected.defect_fg,
                "defect_gf": self.expected.defect_gf,
                "verdict": self.expected.verdict,
                "witnesses": witnesses,
            },
        })
    }
}

fn generated(space: ModelSpace, u: OperatorDesc, v: OperatorDesc) -> FrameSystem {
    FrameSystem::generated(space, u, v).expect("shift descriptors share the sequence space")
}

/// `f_n = zeta_n`, `tau_n = R e_n`, `g_n = zeta_n L`, `omega_n = e_n`: the
/// first defect vanishes while `‖I - RL‖ = 1`.
pub fn example_independent(p: Exponent) -> GalleryEntry {
    let seq = ModelSpace::sequence(p);
    let id = || OperatorDesc::identity(seq);
    let r = OperatorDesc::right_shift(seq).expect("sequence space");
    let l = OperatorDesc::left_shift(seq).expect("sequence space");
    GalleryEntry {
        name: "independent-conditions",
        summary: "one defect is 0, the other is ‖I - RL‖ = 1",
        f: generated(seq, id(), r),
        g: generated(seq, l, id()),
        expected: Expected {
            defect_fg: 0.0,
            defect_gf: 1.0,
            verdict: DualVerdict::NotApproxDual,
            witnesses: Vec::new(),
        },
    }
}

/// `f_n = zeta_n`, `tau_n = L e_n`, `g_n = zeta_n R`, `omega_n = e_n`:
/// approximately dual although neither frame operator is invertible.
pub fn example_second(p: Exponent) -> GalleryEntry {
    let seq = ModelSpace::sequence(p);
    let id = || OperatorDesc::identity(seq);
    let r = OperatorDesc::right_shift(seq).expect("sequence space");
    let l = OperatorDesc::left_shift(seq).expect("sequence space");
    let e1 = Vector::basis(seq, 1).expect("index 1 exists");
    GalleryEntry {
        name: "non-frame-duals",
        summary: "both defects are 0 while S_f,tau = L and theta_omega theta_g = R are not invertible",
        f: generated(seq, id(), l),
        g: generated(seq, r, id()),
        expected: Expected {
            defect_fg: 0.0,
            defect_gf: 0.0,
            verdict: DualVerdict::ApproxDual,
            witnesses: vec![
                ("S_f,tau".into(), Witness::KernelVec(e1.clone())),
                (
                    "theta_omega theta_g".into(),
                    Witness::RangeGap {
                        target: e1,
                        residual: 1.0,
                    },
                ),
            ],
        },
    }
}

/// `F = (zeta_n, e_n)`, `G = (zeta_n, c e_n)` on a finite space; for
/// `0 < c < 2` only the `f/omega` defect is nonzero and equals `|1 - c|`.
pub fn scaled_pair(dim: usize, p: Exponent, c: f64) -> Result<(FrameSystem, FrameSystem)> {
    let space = ModelSpace::finite(dim, p)?;
    let f = FrameSystem::standard(space);
    let g = FrameSystem::from_matrices(
        space,
        DMatrix::identity(dim, dim),
        DMatrix::identity(dim, dim) * c,
    )?;
    Ok((f, g))
}

pub fn example_scaled_half(p: Exponent) -> GalleryEntry {
    let (f, g) = scaled_pair(2, p, 0.5).expect("dimension 2 is valid");
    GalleryEntry {
        name: "scaled-half",
        summary: "G = (zeta_n, e_n / 2) in dimension 2; Neumann depth N leaves defect 2^-(N+1)",
        f,
        g,
        expected: Expected {
            defect_fg: 0.5,
            defect_gf: 0.0,
            verdict: DualVerdict::ApproxDual,
            witnesses: Vec::new(),
        },
    }
}

pub fn gallery(p: Exponent) -> Vec<GalleryEntry> {
    vec![
        example_independent(p),
        example_second(p),
        example_scaled_half(p),
    ]
}

pub fn gallery_entry(name: &str, p: Exponent) -> Option<GalleryEntry> {
    gallery(p).into_iter().find(|e| e.name == name)
}

fn norm_1_inf(m: &DMatrix<f64>) -> f64 {
    max_col_sum(m).max(max_row_sum(m))
}

/// A p-ASF whose frame operator is `I + E` with `‖E‖_1, ‖E‖_inf <= spread`,
/// hence `upper(‖E‖_p) <= spread` and `1 - spread <= a`, `b <= 1 + spread`.
///
/// Starts from a partition of the identity: every coordinate owns a
/// nonempty group of indices whose functionals are positive multiples of
/// `zeta_i` summing to `zeta_i` and whose vectors are `e_i`. Both families
/// are then perturbed and the indices shuffled.
pub fn random_p_asf(dim: usize, m: usize, p: Exponent, spread: f64, seed: u64) -> Result<FrameSystem> {
    if m < dim {
        return Err(FrameError::Precondition(format!("need m >= dim, got m = {m}, dim = {dim}")));
    }
    if !(0.0..1.0).contains(&spread) {
        return Err(FrameError::Precondition(format!("spread {spread} is outside [0, 1)")));
    }
    let space = ModelSpace::finite(dim, p)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut owner: Vec<usize> = (0..dim).collect();
    owner.extend((dim..m).map(|_| rng.gen_range(0..dim)));
    owner.shuffle(&mut rng);
    let raw: Vec<f64> = (0..m).map(|_| rng.gen_range(0.5..=1.5)).collect();
    let mut totals = vec![0.0; dim];
    for (n, &i) in owner.iter().enumerate() {
        totals[i] += raw[n];
    }
    let mut analysis = DMatrix::zeros(m, dim);
    let mut synthesis = DMatrix::zeros(dim, m);
    for (n, &i) in owner.iter().enumerate() {
        analysis[(n, i)] = raw[n] / totals[i];
        synthesis[(i, n)] = 1.0;
    }

    if spread > 0.0 {
        let h = DMatrix::from_fn(m, dim, |_, _| rng.gen_range(-1.0..=1.0));
        let delta = DMatrix::from_fn(dim, m, |_, _| rng.gen_range(-1.0..=1.0));
        let id = DMatrix::<f64>::identity(dim, dim);
        let mut t = spread;
        loop {
            let a = &analysis + &h * t;
            let s = &synthesis + &delta * t;
            if norm_1_inf(&(&s * &a - &id)) <= spread {
                analysis = a;
                synthesis = s;
                break;
            }
            t *= 0.8;
        }
    }
    FrameSystem::from_matrices(space, analysis, synthesis)
}

/// `(F, G)` with `G = ({g_n U}, {V omega_n})` built from the two-sided
/// canonical dual `({g_n}, {omega_n})` of `F`; then
/// `theta_tau theta_g = U` and `theta_omega theta_f = V`, with
/// `‖I - U‖_1, ‖I - U‖_inf < defect` and likewise for `V`.
pub fn random_approx_dual_pair(
    dim: usize,
    m: usize,
    p: Exponent,
    defect: f64,
    seed: u64,
) -> Result<(FrameSystem, FrameSystem)> {
    if !(0.0..1.0).contains(&defect) {
        return Err(FrameError::Precondition(format!("defect {defect} is outside [0, 1)")));
    }
    let opts = DualityOptions::with_seed(seed);
    for attempt in 0..PAIR_BUDGET {
        let stream_seed = seed.wrapping_mul(PAIR_BUDGET as u64).wrapping_add(attempt as u64);
        let f = random_p_asf(dim, m, p, 0.3, stream_seed)?;
        let canonical = canonical_duals(&f)?.full;
        let mut rng = ChaCha8Rng::seed_from_u64(stream_seed);
        rng.set_stream(1);
        let mut near_identity = || {
            let e = DMatrix::from_fn(dim, dim, |_, _| rng.gen_range(-1.0..=1.0));
            let n = norm_1_inf(&e);
            let target = defect * rng.gen_range(0.5..0.999);
            let e = if n > 0.0 { e * (target / n) } else { e };
            DMatrix::<f64>::identity(dim, dim) + e
        };
        let u = near_identity();
        let v = near_identity();
        let g = FrameSystem::from_matrices(
            f.space(),
            canonical.analysis_matrix()? * u,
            v * canonical.synthesis_matrix()?,
        )?;
        let report = certify_approx_dual(&f, &g, &opts)?;
        let within = |x: f64| x <= defect.max(0.0) + 1e-12;
        if report.verdict == DualVerdict::ApproxDual
            && within(report.cert_fg.upper)
            && within(report.cert_gf.upper)
        {
            return Ok((f, g));
        }
    }
    Err(FrameError::GeneratorExhausted {
        budget: PAIR_BUDGET,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::duality::is_exact_dual;
    use crate::frames::{frame_operator, validate_p_asf};
    use crate::operator::{find_noninvertibility_witness, NormOptions};

    fn p(v: f64) -> Exponent {
        Exponent::new(v).unwrap()
    }

    #[test]
    fn independent_conditions() {
        for &pv in &[1.0, 2.0] {
            let e = example_independent(p(pv));
            let r = certify_approx_dual(&e.f, &e.g, &DualityOptions::default()).unwrap();
            assert_eq!(r.verdict, DualVerdict::NotApproxDual);
            assert_eq!((r.cert_fg.lower, r.cert_fg.upper), (0.0, 0.0));
            assert_eq!((r.cert_gf.lower, r.cert_gf.upper), (1.0, 1.0));
        }
    }

    #[test]
    fn second_example_and_witnesses() {
        let e = example_second(p(2.0));
        let r = certify_approx_dual(&e.f, &e.g, &DualityOptions::default()).unwrap();
        assert_eq!(r.verdict, DualVerdict::ApproxDual);
        let s = frame_operator(&e.f);
        assert_eq!(find_noninvertibility_witness(&s, 16).unwrap(), e.expected.witnesses[0].1);
        let t = frame_operator(&e.g.mixed(&e.g).unwrap());
        assert_eq!(find_noninvertibility_witness(&t, 16).unwrap(), e.expected.witnesses[1].1);
    }

    #[test]
    fn entries_serialize_and_reload() {
        for entry in gallery(p(1.5)) {
            let v = entry.to_json();
            let f = FrameSystem::from_json(&v["F"], "F").unwrap();
            assert_eq!(f, entry.f);
            assert!(gallery_entry(entry.name, p(1.5)).is_some());
        }
    }

    #[test]
    fn zero_spread_is_a_permuted_basis() {
        let f = random_p_asf(3, 3, p(2.0), 0.0, 11).unwrap();
        let a = f.analysis_matrix().unwrap();
        let t = f.synthesis_matrix().unwrap();
        assert_eq!(&t * &a, DMatrix::identity(3, 3));
        assert!(a.iter().all(|&x| x == 0.0 || x == 1.0));
        assert_eq!(t, a.transpose());
    }

    #[test]
    fn random_frames_are_valid_and_seeded() {
        let opts = NormOptions::default();
        for seed in 0..30 {
            let f = random_p_asf(2, 4, p(3.0), 0.3, seed).unwrap();
            let b = validate_p_asf(&f, &opts).unwrap();
            assert!(b.a >= 0.7 - 1e-12 && b.b <= 1.3 + 1e-12, "{b:?}");
            assert_eq!(f, random_p_asf(2, 4, p(3.0), 0.3, seed).unwrap());
        }
        assert!(random_p_asf(3, 2, p(2.0), 0.1, 0).is_err());
        assert!(random_p_asf(2, 2, p(2.0), 1.0, 0).is_err());
    }

    #[test]
    fn random_pairs() {
        let (f, g) = random_approx_dual_pair(3, 5, p(2.0), 0.2, 1).unwrap();
        let r = certify_approx_dual(&f, &g, &DualityOptions::default()).unwrap();
        assert_eq!(r.verdict, DualVerdict::ApproxDual);
        assert!(r.cert_fg.upper <= 0.2 && r.cert_gf.upper <= 0.2);
        assert_eq!((f.clone(), g.clone()), random_approx_dual_pair(3, 5, p(2.0), 0.2, 1).unwrap());

        let (f, g) = random_approx_dual_pair(2, 3, p(1.5), 0.0, 4).unwrap();
        let r = is_exact_dual(&f, &g, &DualityOptions::default()).unwrap();
        assert_eq!(r.verdict, DualVerdict::ExactDual);
    }
}
