use fqharm::field::{is_irreducible, least_irreducible, make_field, Field};
use fqharm::lattice::build_set_str;
use fqharm::magnitude::{nu_profile, NuMethod};
use fqharm::{Fq, Space};
use num_complex::Complex64;

const TOL: f64 = 1e-8;

fn grid() -> Vec<(u32, u32)> {
    vec![(3, 1), (5, 1), (7, 1), (3, 2), (11, 1), (13, 1), (5, 2), (3, 3), (7, 2)]
}

fn elements(f: &Field) -> Vec<Fq> {
    f.elements().collect()
}

#[test]
fn field_axioms_exhaustive() {
    for (p, n) in grid() {
        let f = make_field(p, n).unwrap();
        let all = elements(&f);
        assert_eq!(all.len() as u32, f.q());
        for &a in &all {
            assert_eq!(f.add(a, Fq::ZERO), a);
            assert_eq!(f.mul(a, Fq::ONE), a);
            assert_eq!(f.add(a, f.neg(a)), Fq::ZERO);
            if !a.is_zero() {
                assert_eq!(f.mul(a, f.inv(a).unwrap()), Fq::ONE);
            } else {
                assert!(f.inv(a).is_none());
            }
            for &b in &all {
                assert_eq!(f.add(a, b), f.add(b, a));
                assert_eq!(f.mul(a, b), f.mul(b, a));
                for &c in &all {
                    assert_eq!(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
                    assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
                    assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
                }
            }
        }
    }
}

#[test]
fn trace_and_frobenius() {
    for (p, n) in grid() {
        let f = make_field(p, n).unwrap();
        let t = f.tables();
        let mut hit = vec![false; p as usize];
        for a in f.elements() {
            // Tr(a) = sum of conjugates, landing in the prime field.
            let mut conj = a;
            let mut sum = Fq::ZERO;
            for _ in 0..n {
                sum = f.add(sum, conj);
                conj = f.pow(conj, p as u64);
            }
            assert_eq!(sum, f.prime_element(t.trace(a)));
            hit[t.trace(a) as usize] = true;
            assert_eq!(t.frobenius(a), f.pow(a, p as u64));
            let fixed = t.frobenius(a) == a;
            let in_prime = f.coeffs(a)[1..].iter().all(|&c| c == 0);
            assert_eq!(fixed, in_prime);
            for b in f.elements() {
                assert_eq!(t.trace(f.add(a, b)), (t.trace(a) + t.trace(b)) % p);
                assert_eq!(t.frobenius(f.mul(a, b)), f.mul(t.frobenius(a), t.frobenius(b)));
            }
        }
        assert!(hit.iter().all(|&h| h));
    }
}

#[test]
fn least_modulus_is_irreducible_and_minimal() {
    for (p, n) in grid().into_iter().chain([(3, 4), (3, 5)]) {
        let m = least_irreducible(p, n);
        assert!(is_irreducible(&m, p));
        // Every smaller monic of the same degree factors (constant coefficient
        // most significant).
        let q = (p as u64).pow(n);
        let rank = |poly: &[u32]| -> u64 { poly[..n as usize].iter().fold(0, |acc, &c| acc * p as u64 + c as u64) };
        for code in 0..rank(&m) {
            let mut poly: Vec<u32> = (0..n)
                .rev()
                .map(|i| ((code / (p as u64).pow(i)) % p as u64) as u32)
                .collect();
            poly.push(1);
            assert!(code < q);
            assert!(!is_irreducible(&poly, p), "{poly:?} over F_{p}");
        }
    }
}

#[test]
fn degree_four_reducible_without_roots() {
    // (x^2 + 1)^2 = x^4 + 2x^2 + 1 has no root in F_3.
    assert!(!is_irreducible(&[1, 0, 2, 0, 1], 3));
}

#[test]
fn character_orthogonality_all_twists() {
    for (p, n) in grid() {
        let f = make_field(p, n).unwrap();
        for twist in f.elements() {
            let s: Complex64 = f.elements().map(|a| f.chi(f.mul(twist, a))).sum();
            if twist.is_zero() {
                assert_eq!(s, Complex64::new(f.q() as f64, 0.0));
            } else {
                assert!(s.norm() < TOL * f.q() as f64, "twist {twist:?} in F_{}", f.q());
            }
        }
        for a in f.elements() {
            for b in f.elements() {
                assert!((f.chi(f.add(a, b)) - f.chi(a) * f.chi(b)).norm() < TOL);
            }
        }
    }
}

#[test]
fn quadratic_character_and_gauss_sums() {
    for (p, n) in grid() {
        let f = make_field(p, n).unwrap();
        let q = f.q() as f64;
        assert_eq!(f.eta(Fq::ZERO), 0);
        let plus = f.nonzero().filter(|&a| f.eta(a) == 1).count();
        assert_eq!(plus as u32, (f.q() - 1) / 2);
        for a in f.nonzero() {
            assert_eq!(f.eta(f.square(a)), 1);
            for b in f.nonzero() {
                assert_eq!(f.eta(f.mul(a, b)), f.eta(a) * f.eta(b));
            }
        }
        let g = f.gauss();
        assert!(((g * g.conj()).re - q).abs() < TOL * q);
        let eta_m1 = f.eta(f.neg(Fq::ONE)) as f64;
        assert!((g * g - Complex64::new(eta_m1 * q, 0.0)).norm() < TOL * q);
    }
}

#[test]
fn kloosterman_weil_bound() {
    for (p, n) in [(3, 1), (5, 1), (7, 1), (3, 2), (11, 1), (13, 1)] {
        let f = make_field(p, n).unwrap();
        let bound = 2.0 * (f.q() as f64).sqrt();
        for a in f.nonzero() {
            for b in f.nonzero() {
                let k = f.kloosterman(a, b);
                assert!(k.im.abs() < TOL);
                assert!(k.norm() <= bound + TOL);
            }
        }
    }
}

#[test]
fn twist_does_not_change_counts() {
    for (p, n, d, spec) in [
        (3, 1, 2, "random:size=5,seed=3"),
        (5, 1, 2, "density:delta=0.3,seed=1"),
        (3, 2, 2, "random:size=20,seed=9"),
        (3, 1, 4, "subfield:p=3,s=1,d=4"),
        (7, 1, 3, "random:size=40,seed=2"),
    ] {
        let base = make_field(p, n).unwrap();
        let reference = {
            let s = Space::new(base.clone(), d).unwrap();
            let e = build_set_str(&s, spec).unwrap();
            (2..=4)
                .map(|k| nu_profile(&s, &e, k, NuMethod::Spectral).unwrap())
                .collect::<Vec<_>>()
        };
        for twist in base.nonzero() {
            let s = Space::new(base.with_twist(twist).unwrap(), d).unwrap();
            let e = build_set_str(&s, spec).unwrap();
            for (i, k) in (2..=4).enumerate() {
                let prof = nu_profile(&s, &e, k, NuMethod::Spectral).unwrap();
                assert_eq!(prof, reference[i], "twist {twist:?}, {spec}, k={k}");
                assert_eq!(prof.support().len(), reference[i].support().len());
            }
        }
        assert!(base.with_twist(Fq::ZERO).is_err());
    }
}
