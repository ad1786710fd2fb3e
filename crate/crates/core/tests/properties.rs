use framelab::duality::{
    canonical_duals, certify_approx_dual, is_exact_dual, parametrize_dual, DualVerdict, DualityOptions,
};
use framelab::excess::{excess_by_enumeration, p_excess, witness_is_valid, ExcessMethod};
use framelab::frames::{frame_operator, validate_p_asf, FrameSystem};
use framelab::gallery::{random_approx_dual_pair, random_p_asf};
use framelab::operator::{materialize, NormOptions, OperatorDesc};
use framelab::sequence::{Exponent, Vector};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn exponent() -> impl Strategy<Value = f64> {
    prop::sample::select(vec![1.0, 1.5, 2.0, 3.0, 4.0])
}

/// `(dim, m, p, seed)` with `dim <= m`.
fn shape(max_dim: usize, max_m: usize) -> impl Strategy<Value = (usize, usize, f64, u64)> {
    (1..=max_dim)
        .prop_flat_map(move |d| (Just(d), d..=max_m, exponent(), any::<u64>()))
}

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = DMatrix<f64>> {
    prop::collection::vec(-1.0..=1.0f64, rows * cols)
        .prop_map(move |v| DMatrix::from_vec(rows, cols, v))
}

fn pnorm(v: &Vector, p: f64) -> f64 {
    v.iter().map(|(_, x)| x.abs().powf(p)).sum::<f64>().powf(1.0 / p)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn frame_operator_is_synthesis_after_analysis((d, m, p, seed) in shape(6, 10)) {
        let f = random_p_asf(d, m, Exponent::new(p).unwrap(), 0.5, seed).unwrap();
        let s = materialize(&frame_operator(&f), d);
        let oracle = f.synthesis_matrix().unwrap() * f.analysis_matrix().unwrap();
        prop_assert!((s - oracle).amax() <= 1e-14);
    }

    #[test]
    fn frame_bounds_bracket_the_frame_operator(
        (d, m, p, seed) in shape(5, 9),
        raw in prop::collection::vec(-1.0..=1.0f64, 5),
    ) {
        let f = random_p_asf(d, m, Exponent::new(p).unwrap(), 0.5, seed).unwrap();
        let bounds = validate_p_asf(&f, &NormOptions::default()).unwrap();
        prop_assert!(bounds.a >= 0.5 - 1e-12 && bounds.b <= 1.5 + 1e-12);
        let x = Vector::from_dense(f.space(), &raw[..d]).unwrap();
        prop_assume!(!x.is_zero());
        let nx = pnorm(&x, p);
        let sx = pnorm(&frame_operator(&f).apply(&x).unwrap(), p);
        prop_assert!(bounds.a * nx <= sx * (1.0 + 1e-12));
        prop_assert!(sx <= bounds.b * nx * (1.0 + 1e-12));
    }

    #[test]
    fn swapping_the_pair_swaps_the_defects((d, m, p, seed) in shape(4, 8)) {
        let (f, g) = random_approx_dual_pair(d, m, Exponent::new(p).unwrap(), 0.8, seed % 1000).unwrap();
        let opts = DualityOptions::default();
        let fg = certify_approx_dual(&f, &g, &opts).unwrap();
        let gf = certify_approx_dual(&g, &f, &opts).unwrap();
        prop_assert_eq!(fg.verdict, DualVerdict::ApproxDual);
        prop_assert_eq!(gf.verdict, fg.verdict);
        prop_assert_eq!(&fg.cert_fg, &gf.cert_gf);
        prop_assert_eq!(&fg.cert_gf, &gf.cert_fg);
    }

    #[test]
    fn every_dual_is_its_own_parameter(
        (d, m, p, seed) in shape(4, 8),
        u in matrix(8, 4),
        v in matrix(4, 8),
    ) {
        let f = random_p_asf(d, m, Exponent::new(p).unwrap(), 0.4, seed).unwrap();
        let (space, coeff) = (f.space(), f.coefficient_space());
        let u = OperatorDesc::dense(space, coeff, u.view((0, 0), (m, d)).into_owned()).unwrap();
        let v = OperatorDesc::dense(coeff, space, v.view((0, 0), (d, m)).into_owned()).unwrap();
        let Ok(g) = parametrize_dual(&f, &u, &v) else {
            return Ok(());
        };
        prop_assert_eq!(is_exact_dual(&f, &g, &DualityOptions::default()).unwrap().verdict, DualVerdict::ExactDual);
        let (ga, gw) = (g.analysis_matrix().unwrap(), g.synthesis_matrix().unwrap());
        let again = parametrize_dual(
            &f,
            &OperatorDesc::dense(space, coeff, ga.clone()).unwrap(),
            &OperatorDesc::dense(coeff, space, gw.clone()).unwrap(),
        )
        .unwrap();
        prop_assert!((again.analysis_matrix().unwrap() - ga).amax() <= 1e-9);
        prop_assert!((again.synthesis_matrix().unwrap() - gw).amax() <= 1e-9);
    }

    #[test]
    fn canonical_dual_is_the_zero_parameter((d, m, p, seed) in shape(5, 9)) {
        let f = random_p_asf(d, m, Exponent::new(p).unwrap(), 0.5, seed).unwrap();
        let zero_u = OperatorDesc::zero(f.space(), f.coefficient_space());
        let zero_v = OperatorDesc::zero(f.coefficient_space(), f.space());
        let g = parametrize_dual(&f, &zero_u, &zero_v).unwrap();
        let full = canonical_duals(&f).unwrap().full;
        prop_assert!((g.analysis_matrix().unwrap() - full.analysis_matrix().unwrap()).amax() <= 1e-12);
        prop_assert!((g.synthesis_matrix().unwrap() - full.synthesis_matrix().unwrap()).amax() <= 1e-12);
    }

    #[test]
    fn greedy_never_beats_exhaustive_search(
        (d, m) in (1usize..=3).prop_flat_map(|d| (Just(d), d..=7)),
        a in matrix(7, 3),
        t in matrix(3, 7),
        dup in 0usize..7,
    ) {
        let space = framelab::sequence::ModelSpace::finite(d, Exponent::new(2.0).unwrap()).unwrap();
        let mut a = a.view((0, 0), (m, d)).into_owned();
        let t = t.view((0, 0), (d, m)).into_owned();
        if m > d {
            let row = a.row(dup % m).into_owned();
            a.set_row(m - 1, &row);
        }
        let f = FrameSystem::from_matrices(space, a, t).unwrap();
        let brute = p_excess(&f, ExcessMethod::BruteForce).unwrap();
        let greedy = p_excess(&f, ExcessMethod::Greedy).unwrap();
        prop_assert!(greedy.value <= brute.value);
        prop_assert!(witness_is_valid(&f, &brute).unwrap());
        prop_assert!(witness_is_valid(&f, &greedy).unwrap());
        prop_assert_eq!(excess_by_enumeration(&f).unwrap(), brute.value);
    }

    #[test]
    fn appending_a_member_raises_the_excess(
        (d, m, p, seed) in shape(3, 6),
        extra_f in prop::collection::vec(-1.0..=1.0f64, 3),
        extra_v in prop::collection::vec(-1.0..=1.0f64, 3),
    ) {
        let f = random_p_asf(d, m, Exponent::new(p).unwrap(), 0.3, seed).unwrap();
        let (a, t) = (f.analysis_matrix().unwrap(), f.synthesis_matrix().unwrap());
        let mut a2 = a.insert_row(m, 0.0);
        let mut t2 = t.insert_column(m, 0.0);
        for j in 0..d {
            a2[(m, j)] = extra_f[j];
            t2[(j, m)] = extra_v[j];
        }
        let bigger = FrameSystem::from_matrices(f.space(), a2, t2).unwrap();
        let small = p_excess(&f, ExcessMethod::BruteForce).unwrap().value;
        let large = p_excess(&bigger, ExcessMethod::BruteForce).unwrap().value;
        prop_assert!(large >= small + 1);
    }

    #[test]
    fn generators_deliver_what_they_advertise((d, m, p, seed) in shape(6, 10), spread in 0.0..0.9f64) {
        let exp = Exponent::new(p).unwrap();
        let f = random_p_asf(d, m, exp, spread, seed).unwrap();
        prop_assert_eq!(&f, &random_p_asf(d, m, exp, spread, seed).unwrap());
        let bounds = validate_p_asf(&f, &NormOptions::default()).unwrap();
        prop_assert!(bounds.a >= 1.0 - spread - 1e-12);
        let (f, g) = random_approx_dual_pair(d, m, exp, 0.7, seed % 1000).unwrap();
        let r = certify_approx_dual(&f, &g, &DualityOptions::default()).unwrap();
        prop_assert_eq!(r.verdict, DualVerdict::ApproxDual);
        prop_assert!(r.cert_fg.upper < 0.7 + 1e-12 && r.cert_gf.upper < 0.7 + 1e-12);
    }
}
