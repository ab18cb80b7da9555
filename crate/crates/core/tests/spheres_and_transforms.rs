use fqharm::field::make_field;
use fqharm::lattice::{bilinear, build_set, default_corpus, Space};
use fqharm::spectral::{
    dual_sum_identity, fourier, fourier_naive, set_hat, sphere_hat, sphere_hat_closed, TransformMode,
};
use fqharm::Fq;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-8;

fn space(p: u32, n: u32, d: usize) -> Space {
    Space::new(make_field(p, n).unwrap(), d).unwrap()
}

fn sphere_grid() -> Vec<(u32, u32, usize)> {
    let mut g = Vec::new();
    for (p, n) in [(3, 1), (5, 1), (7, 1), (3, 2)] {
        for d in 2..=4 {
            g.push((p, n, d));
        }
    }
    g.push((3, 1, 6));
    g.push((3, 1, 8));
    g
}

#[test]
fn indexer_round_trip() {
    for (p, n, d) in [(3, 1, 3), (3, 2, 2), (5, 1, 4)] {
        let s = space(p, n, d);
        for i in 0..s.size() {
            assert_eq!(s.index(&s.coords(i)), i);
        }
    }
}

#[test]
fn norms_match_coordinate_formula() {
    let s = space(3, 2, 3);
    for x in (0..s.size()).step_by(7) {
        let c = s.coords(x);
        let (_, norm) = bilinear(s.field(), &c, &c).unwrap();
        assert_eq!(s.norm(x), norm);
    }
}

#[test]
fn sphere_partition_symmetry_and_sizes() {
    for (p, n, d) in sphere_grid() {
        let s = space(p, n, d);
        let (q, qd) = (s.q() as i64, s.size() as i64);
        let sp = s.spheres();
        assert_eq!(sp.sizes().iter().sum::<usize>(), s.size());
        for t in s.field().elements() {
            let members = sp.members(t);
            assert!(members.windows(2).all(|w| w[0] < w[1]));
            assert!(!members.is_empty(), "empty S_{t:?} at q={q}, d={d}");
            for &x in members {
                assert_eq!(s.norm(x), t);
                assert_eq!(s.norm(s.neg(x)), t);
            }
            let dev = (members.len() as i64 - qd / q).abs();
            if d % 2 == 0 {
                assert!(dev < q.pow(d as u32 / 2), "q={q} d={d} t={t:?}");
            } else if !t.is_zero() {
                assert!(dev <= q.pow((d as u32 - 1) / 2), "q={q} d={d} t={t:?}");
            }
        }
    }
}

#[test]
fn closed_form_matches_direct_exhaustively() {
    for (p, n) in [(3, 1), (5, 1), (3, 2)] {
        for d in [2, 4] {
            let s = space(p, n, d);
            let budget = TOL * s.q() as f64;
            for t in s.field().elements() {
                let direct = sphere_hat(&s, t);
                for (m, &value) in direct.iter().enumerate() {
                    let closed = sphere_hat_closed(&s, t, m).unwrap();
                    assert!((closed - value).norm() < budget, "q={} d={d} t={t:?} m={m}", s.q());
                }
            }
        }
    }
}

#[test]
fn closed_form_matches_direct_sampled() {
    for d in [6, 8] {
        let s = space(3, 1, d);
        let mut rng = ChaCha8Rng::seed_from_u64(d as u64);
        for _ in 0..1000 {
            let t = Fq(rng.random_range(0..3));
            let m = rng.random_range(0..s.size());
            let closed = sphere_hat_closed(&s, t, m).unwrap();
            assert!((closed - sphere_hat(&s, t)[m]).norm() < TOL * 3.0);
        }
    }
}

#[test]
fn dual_sum_identity_pairs() {
    for (p, n, d) in [
        (3, 1, 2),
        (3, 1, 3),
        (3, 1, 4),
        (5, 1, 2),
        (3, 2, 2),
        (5, 1, 3),
        (7, 1, 2),
        (3, 1, 6),
    ] {
        let s = space(p, n, d);
        let budget = TOL * s.q() as f64;
        let check = |m: usize, v: usize| {
            let (lhs, rhs) = dual_sum_identity(&s, m, v);
            assert!((lhs - rhs).norm() < budget, "q={} d={d} m={m} v={v}", s.q());
        };
        if s.size() <= 81 {
            for m in 0..s.size() {
                for v in 0..s.size() {
                    check(m, v);
                }
            }
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(s.size() as u64);
            for _ in 0..1000 {
                check(rng.random_range(0..s.size()), rng.random_range(0..s.size()));
            }
        }
    }
}

#[test]
fn fast_transform_matches_naive() {
    for (p, n, d) in [
        (3, 1, 2),
        (3, 1, 4),
        (5, 1, 2),
        (3, 2, 2),
        (7, 1, 2),
        (5, 1, 3),
        (3, 2, 3),
    ] {
        let s = space(p, n, d);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let f: Vec<Complex64> = (0..s.size())
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        for mode in [TransformMode::Hat, TransformMode::Tilde, TransformMode::Inverse] {
            let fast = fourier(&s, &f, mode).unwrap();
            let slow = fourier_naive(&s, &f, mode).unwrap();
            let err = fast
                .values
                .iter()
                .zip(&slow.values)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            assert!(err < TOL * s.size() as f64, "{mode:?} at q={} d={d}", s.q());
        }
    }
}

#[test]
fn fourier_moments_bounded_on_corpus() {
    for (p, n, d) in [(3, 1, 2), (5, 1, 2), (3, 2, 2), (3, 1, 4), (5, 1, 3)] {
        let s = space(p, n, d);
        let qd = s.size() as f64;
        for spec in default_corpus(&s, &[1, 2]) {
            let e = build_set(&s, &spec).unwrap();
            if e.is_empty() {
                continue;
            }
            let hat = set_hat(&s, &e).unwrap();
            let size = e.len() as f64;
            for k in 2..=5 {
                let lhs = hat.power_sum(k as f64);
                let rhs = size.powi(k - 1) / qd.powi(k - 1);
                assert!(lhs <= rhs * (1.0 + TOL), "{spec} k={k}: {lhs} > {rhs}");
            }
        }
    }
}

fn table_strategy(len: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), len)
        .prop_map(|v| v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect())
}

fn plancherel_and_inversion(s: &Space, f: &[Complex64]) -> Result<(), TestCaseError> {
    let qd = s.size() as f64;
    let hat = fourier(s, f, TransformMode::Hat).unwrap();
    let back = fourier(s, &hat.values, TransformMode::Inverse).unwrap();
    for (a, b) in f.iter().zip(&back.values) {
        prop_assert!((a - b).norm() < TOL * qd);
    }
    let energy: f64 = f.iter().map(|v| v.norm_sqr()).sum();
    let spectral: f64 = hat.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * qd;
    prop_assert!((energy - spectral).abs() < TOL * qd);
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn plancherel_f3_4(f in table_strategy(81)) {
        plancherel_and_inversion(&space(3, 1, 4), &f)?;
    }

    #[test]
    fn plancherel_f9_2(f in table_strategy(81)) {
        plancherel_and_inversion(&space(3, 2, 2), &f)?;
    }

    #[test]
    fn plancherel_f5_3(f in table_strategy(125)) {
        plancherel_and_inversion(&space(5, 1, 3), &f)?;
    }

    #[test]
    fn plancherel_f7_2(f in table_strategy(49)) {
        plancherel_and_inversion(&space(7, 1, 2), &f)?;
    }
}
