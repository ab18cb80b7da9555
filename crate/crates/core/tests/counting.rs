use fqharm::exact;
use fqharm::field::make_field;
use fqharm::lattice::{build_set, build_set_str, default_corpus, PointSet, Space};
use fqharm::magnitude::{delta_report, lemma_audit, nu_profile, sum_counts, NuMethod, FLOAT_COUNT_LIMIT};
use fqharm::tolerance::Tolerance;
use proptest::prelude::*;

fn space(p: u32, n: u32, d: usize) -> Space {
    Space::new(make_field(p, n).unwrap(), d).unwrap()
}

/// Counts by walking every k-tuple of `E`.
fn enumerate_nu(s: &Space, e: &PointSet, k: u32) -> Vec<u64> {
    let pts: Vec<usize> = e.iter().collect();
    let mut nu = vec![0u64; s.q()];
    let mut stack = vec![(0usize, 0u32)];
    while let Some((acc, depth)) = stack.pop() {
        if depth == k {
            nu[s.norm(acc).index()] += 1;
            continue;
        }
        for &x in &pts {
            stack.push((s.add(acc, x), depth + 1));
        }
    }
    nu
}

fn corpus(s: &Space) -> Vec<PointSet> {
    default_corpus(s, &[1, 2, 3, 4])
        .iter()
        .map(|spec| build_set(s, spec).unwrap())
        .filter(|e| !e.is_empty())
        .collect()
}

#[test]
fn matches_tuple_enumeration() {
    for (p, n, d, spec, k) in [
        (3, 1, 2, "random:size=4,seed=1", 4),
        (5, 1, 2, "random:size=7,seed=2", 3),
        (3, 2, 2, "random:size=6,seed=5", 3),
        (3, 1, 3, "cap:t=2,j=5", 4),
        (7, 1, 2, "affine:basis=1 2,shift=0 3", 3),
    ] {
        let s = space(p, n, d);
        let e = build_set_str(&s, spec).unwrap();
        let oracle = enumerate_nu(&s, &e, k);
        for method in [NuMethod::Direct, NuMethod::Spectral] {
            assert_eq!(
                nu_profile(&s, &e, k, method).unwrap().counts,
                oracle,
                "{spec} {method:?}"
            );
        }
    }
}

#[test]
fn methods_agree_and_counts_sum_on_corpus() {
    for (p, n, d) in [
        (3, 1, 2),
        (3, 1, 4),
        (5, 1, 2),
        (5, 1, 3),
        (3, 2, 2),
        (7, 1, 2),
        (3, 1, 6),
    ] {
        let s = space(p, n, d);
        let sets = corpus(&s);
        assert!(sets.len() >= 20);
        for e in &sets {
            for k in 2..=4 {
                let prof = nu_profile(&s, e, k, NuMethod::Both).unwrap();
                assert_eq!(prof.total(), (e.len() as u128).pow(k), "{} k={k}", e.label());
                let report = delta_report(&s, e, k).unwrap();
                assert!(report.cauchy_schwarz_holds, "{} k={k}", e.label());
                assert!(report.cardinality as f64 >= report.cauchy_schwarz_bound * (1.0 - 1e-12));
            }
        }
    }
}

#[test]
fn exact_and_float_paths_agree_below_limit() {
    // |E|^4 just under 2^36 keeps these on the double-precision path.
    for (p, n, d) in [(3, 1, 8), (3, 2, 4)] {
        let s = space(p, n, d);
        let e = build_set_str(&s, "random:size=430,seed=3").unwrap();
        assert!((e.len() as u64).pow(4) <= FLOAT_COUNT_LIMIT);
        let float = sum_counts(&s, &e, 4).unwrap();
        let modular = exact::signed_sum_counts(&s, &e, &[true; 4]).unwrap();
        assert_eq!(float, modular);
        let spectral = nu_profile(&s, &e, 4, NuMethod::Spectral).unwrap();
        assert_eq!(spectral.counts, exact::nu_spectral(&s, &e, 4).unwrap());
    }
}

#[test]
fn large_budgets_use_exact_counts() {
    let s = space(3, 1, 8);
    for (spec, k) in [
        ("full", 4),
        ("density:delta=0.5,seed=1", 5),
        ("random:size=300,seed=1", 6),
    ] {
        let e = build_set_str(&s, spec).unwrap();
        let prof = nu_profile(&s, &e, k, NuMethod::Both).unwrap();
        assert_eq!(prof.total(), (e.len() as u128).pow(k));
    }
}

#[test]
fn lemma_audits_pass_on_corpus() {
    let tol = Tolerance::default();
    for (p, n, d) in [(3, 1, 2), (3, 1, 4), (5, 1, 2), (5, 1, 4), (3, 2, 2), (7, 1, 2)] {
        let s = space(p, n, d);
        for e in corpus(&s) {
            for k in 2..=4 {
                let audit = lemma_audit(&s, &e, k, tol).unwrap();
                for r in &audit.records {
                    assert!(!r.failed(), "{} k={k}: {r:?}", e.label());
                }
            }
        }
    }
}

#[test]
fn subfield_sets_are_sharp() {
    for p in [3u32, 5] {
        for d in [2, 3] {
            let s = space(p, 2, d);
            let e = build_set_str(&s, &format!("subfield:p={p},s=2,d={d}")).unwrap();
            assert_eq!(e.len(), (p as usize).pow(d as u32));
            for k in [2, 3] {
                let report = delta_report(&s, &e, k).unwrap();
                assert_eq!(report.cardinality, p as usize, "p={p} d={d} k={k}");
            }
        }
    }
}

fn set_strategy(len: usize) -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(0..len, 1..12)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn profile_sums_to_tuple_count(idx in set_strategy(125), k in 2u32..6) {
        let s = space(5, 1, 3);
        let e = build_set_str(&s, &format!("explicit:{}", idx.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(","))).unwrap();
        let prof = nu_profile(&s, &e, k, NuMethod::Both).unwrap();
        prop_assert_eq!(prof.total(), (e.len() as u128).pow(k));
    }

    #[test]
    fn spectral_matches_enumeration(idx in set_strategy(81), k in 2u32..4) {
        let s = space(3, 2, 2);
        let e = build_set_str(&s, &format!("explicit:{}", idx.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(","))).unwrap();
        let prof = nu_profile(&s, &e, k, NuMethod::Spectral).unwrap();
        prop_assert_eq!(prof.counts, enumerate_nu(&s, &e, k));
    }
}

/// `Delta_{k1}(E) <= Delta_{k2}(E)` once `0 in E`, since padding a sum with
/// zeros keeps it.
#[test]
fn monotone_in_k_when_origin_in_set() {
    for (p, n, d) in [
        (3, 1, 2),
        (3, 1, 3),
        (3, 1, 4),
        (5, 1, 2),
        (5, 1, 3),
        (3, 2, 2),
        (7, 1, 2),
    ] {
        let s = space(p, n, d);
        for e in corpus(&s).into_iter().filter(|e| e.contains(0)) {
            let sizes: Vec<usize> = (2..=5).map(|k| delta_report(&s, &e, k).unwrap().cardinality).collect();
            assert!(
                sizes.windows(2).all(|w| w[0] <= w[1]),
                "q={} d={d} {} {sizes:?}",
                s.q(),
                e.label()
            );
        }
    }
}

#[test]
fn monotonicity_can_fail_without_origin() {
    // On a line through (1,0,0) with direction (1,1,1) in F_3^3, every
    // three-fold sum has norm 0 while pairs reach all three radii.
    let s = space(3, 1, 3);
    let e = build_set_str(&s, "affine:basis=1 1 1,shift=1 0 0").unwrap();
    assert!(!e.contains(0));
    let two = delta_report(&s, &e, 2).unwrap();
    let three = delta_report(&s, &e, 3).unwrap();
    assert_eq!(two.cardinality, 3);
    assert_eq!(three.members, vec![fqharm::Fq::ZERO]);
}
