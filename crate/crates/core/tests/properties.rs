mod common;

use pkcap::gen;
use pkcap::protocol::library;
use pkcap::stats::DEFAULT_CI_TOL;
use pkcap::{
    check_eps_pk, double_markov_residual, evaluate_protocol, inner_region, is_deterministically_correlated,
    max_aux_info_outer, max_aux_info_thm3, maximal_common_function, minimal_sufficient_statistic, outer_region,
    rate_point, sample_feasible_aux, EnumOptions, JointPmf, Thm3Options,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{cmi, common_partitions, points, refines};

fn small_pmf() -> impl Strategy<Value = JointPmf> {
    any::<u64>().prop_map(|s| gen::random_small_pmf(&mut ChaCha8Rng::seed_from_u64(s), 4))
}

fn det_pmf() -> impl Strategy<Value = JointPmf> {
    any::<u64>().prop_map(|s| gen::random_det_correlated(&mut ChaCha8Rng::seed_from_u64(s)))
}

fn labels_on_support(p: &JointPmf, name: &str, label: impl Fn(usize) -> Option<usize>) -> Vec<usize> {
    p.support(name).unwrap().into_iter().map(|y| label(y).unwrap()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn entropy_matches_enumeration(p in small_pmf()) {
        let pts = points(&p);
        let lib = p.mutual_info(&"X".into(), &["Y", "Z"].into()).unwrap();
        prop_assert!((lib - cmi(&pts, &[0], &[1, 2], &[])).abs() <= 1e-12);
        let h = p.entropy(&["X", "Y", "Z"].into()).unwrap();
        let hc = p.cond_entropy(&"X".into(), &["Y", "Z"].into()).unwrap();
        prop_assert!((h - p.entropy(&["Y", "Z"].into()).unwrap() - hc).abs() <= 1e-12);
    }

    #[test]
    fn cmi_is_symmetric_and_nonnegative(p in small_pmf()) {
        for (a, b, c) in [("X", "Y", "Z"), ("Y", "Z", "X"), ("X", "Z", "Y")] {
            let ab = p.cond_mutual_info(&a.into(), &b.into(), &c.into()).unwrap();
            let ba = p.cond_mutual_info(&b.into(), &a.into(), &c.into()).unwrap();
            prop_assert_eq!(ab, ba);
            prop_assert!(ab >= 0.0);
        }
    }

    #[test]
    fn attaching_a_statistic_keeps_the_marginal(p in small_pmf()) {
        let s = minimal_sufficient_statistic(&p, "Y", &"Z".into()).unwrap();
        let q = p.attach_statistic(&s, "Y", "U").unwrap();
        let back = q.marginal(&["X", "Y", "Z"].into()).unwrap();
        prop_assert_eq!(back.probs(), p.probs());
        // U is a function of Y
        prop_assert!(q.cond_entropy(&"U".into(), &"Y".into()).unwrap() <= 1e-12);
    }

    #[test]
    fn mss_is_sufficient_and_refines_the_common_function(p in small_pmf()) {
        let mss = minimal_sufficient_statistic(&p, "Y", &"Z".into()).unwrap();
        let q = p.attach_statistic(&mss, "Y", "U").unwrap();
        prop_assert!(q.cond_mutual_info(&"Y".into(), &"Z".into(), &"U".into()).unwrap() <= 1e-9);
        let cf = maximal_common_function(&p, "Y", "Z").unwrap();
        prop_assert!(mss.refines(&cf.on_a));
    }

    #[test]
    fn common_function_is_the_finest(p in small_pmf()) {
        let cf = maximal_common_function(&p, "Y", "Z").unwrap();
        let lib = labels_on_support(&p, "Y", |y| cf.on_a.label(y));
        for f in common_partitions(&p) {
            prop_assert!(refines(&lib, &f));
        }
    }

    #[test]
    fn inner_is_inside_outer_and_both_are_down_sets(p in small_pmf(), t in 0.0f64..1.0) {
        let outer = outer_region(&p).unwrap();
        let inner = inner_region(&p).unwrap();
        for v in &inner.vertices {
            prop_assert!(outer.contains(*v, 1e-9));
            prop_assert!(inner.contains([v[0] * t, v[1]], 1e-9));
            prop_assert!(inner.contains([v[0], v[1] * t], 1e-9));
        }
        prop_assert!(outer.area() + 1e-9 >= inner.area());
    }

    #[test]
    fn sampled_channels_obey_both_markov_chains(p in small_pmf(), seed in any::<u64>(), card in 1usize..4) {
        let cf = maximal_common_function(&p, "Y", "Z").unwrap();
        let ch = sample_feasible_aux(&cf, card, seed);
        let q = ch.augment(&p, "Y", &cf.on_a, "U").unwrap();
        prop_assert!(double_markov_residual(&q, "U", "X", "Y", "Z").unwrap() <= 1e-9);
        let (bound, _) = max_aux_info_outer(&p).unwrap();
        prop_assert!(q.mutual_info(&"U".into(), &"X".into()).unwrap() <= bound + 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn det_correlated_regions_coincide(p in det_pmf()) {
        let det = is_deterministically_correlated(&p, "Y", "Z", DEFAULT_CI_TOL).unwrap();
        prop_assert!(det.holds);
        let mss = minimal_sufficient_statistic(&p, "Y", &"Z".into()).unwrap();
        prop_assert!(mss.same_partition(&det.common.on_a));
        let outer = outer_region(&p).unwrap();
        let inner = inner_region(&p).unwrap();
        prop_assert!(inner.same_vertices(&outer, 1e-9), "{:?} vs {:?}", inner.vertices, outer.vertices);
    }

    #[test]
    fn converged_search_stays_below_the_outer_maximum(p in small_pmf(), seed in any::<u64>()) {
        let opts = Thm3Options { restarts: 4, seed, ..Thm3Options::default() };
        let r = max_aux_info_thm3(&p, &opts).unwrap();
        let (bound, _) = max_aux_info_outer(&p).unwrap();
        if r.converged {
            prop_assert!(r.value <= bound + 1e-9);
        }
        prop_assert!(r.residual_trace.windows(2).all(|w| w[1] <= w[0]));
    }
}

#[test]
fn secret_key_points_lie_in_the_outer_region() {
    let cases = [
        (gen::direct_extraction_source(), library::direct_extraction(1)),
        (gen::direct_extraction_source(), library::direct_extraction(2)),
        (gen::worked_source(), library::worked_source_helper()),
        (gen::worked_source(), library::constant_keys([4, 4, 4], 1, 1, 1)),
    ];
    for (p, spec) in cases {
        let rep = evaluate_protocol(&p, &spec, &EnumOptions::default()).unwrap();
        let outer = outer_region(&p).unwrap();
        let (xy, xz) = check_eps_pk(&rep, 0.0);
        assert!(xy && xz, "{rep:?}");
        assert!(outer.contains(rate_point(&rep), 1e-9), "{:?}", rate_point(&rep));
    }
}

#[test]
fn broadcasting_the_key_leaks_it() {
    let p = gen::direct_extraction_source();
    let rep = evaluate_protocol(&p, &library::public_broadcast(), &EnumOptions::default()).unwrap();
    assert_eq!(rep.leak_xy, 1.0);
    assert_eq!(rep.error_xy, 0.0);
    assert_eq!(check_eps_pk(&rep, 0.01), (false, true));
}

#[test]
fn worked_helper_protocol_reaches_a_corner() {
    let p = gen::worked_source();
    let rep = evaluate_protocol(&p, &library::worked_source_helper(), &EnumOptions::default()).unwrap();
    assert_eq!(rate_point(&rep), [1.0, 0.0]);
    assert_eq!(rep.leak_xy, 0.0);
}
