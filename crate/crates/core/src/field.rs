//! Arithmetic in `F_q = F_{p^n}` for odd `p`, with additive and quadratic
//! characters and the classical character sums built on them.
//!
//! Elements are canonical indices in `[0, q)`: the element
//! `c_0 + c_1 x + ... + c_{n-1} x^{n-1}` of `Z_p[x]/(modulus)` has index
//! `sum c_i p^i`. All arithmetic goes through `q x q` lookup tables built
//! once at construction.

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest field size accepted by [`make_field`].
pub const DEFAULT_FIELD_CAP: u64 = 121;

/// A field element, stored as its canonical index.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Fq(pub u32);

impl Fq {
    pub const ZERO: Fq = Fq(0);
    pub const ONE: Fq = Fq(1);

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl From<u32> for Fq {
    fn from(v: u32) -> Self {
        Fq(v)
    }
}

/// Characteristic, degree and defining polynomial of the field.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldSpec {
    pub p: u32,
    pub n: u32,
    pub q: u32,
    /// Monic modulus, constant coefficient first, length `n + 1`.
    pub modulus: Vec<u32>,
}

impl FieldSpec {
    /// Human-readable modulus, e.g. `x^2 + 1`.
    pub fn modulus_string(&self) -> String {
        let mut terms = Vec::new();
        for (i, &c) in self.modulus.iter().enumerate().rev() {
            if c == 0 {
                continue;
            }
            let mono = match i {
                0 => String::new(),
                1 => "x".to_string(),
                _ => format!("x^{i}"),
            };
            terms.push(match (c, i) {
                (_, 0) => c.to_string(),
                (1, _) => mono,
                _ => format!("{c}{mono}"),
            });
        }
        terms.join(" + ")
    }
}

/// Full operation tables on canonical indices.
#[derive(Clone, Debug)]
pub struct ArithTables {
    q: usize,
    add: Vec<u32>,
    mul: Vec<u32>,
    neg: Vec<u32>,
    /// `inv[0]` holds 0 and must not be read as an inverse.
    inv: Vec<u32>,
    trace: Vec<u32>,
    frobenius: Vec<u32>,
}

impl ArithTables {
    #[inline]
    pub fn add(&self, a: Fq, b: Fq) -> Fq {
        Fq(self.add[a.index() * self.q + b.index()])
    }

    #[inline]
    pub fn mul(&self, a: Fq, b: Fq) -> Fq {
        Fq(self.mul[a.index() * self.q + b.index()])
    }

    #[inline]
    pub fn neg(&self, a: Fq) -> Fq {
        Fq(self.neg[a.index()])
    }

    #[inline]
    pub fn inv(&self, a: Fq) -> Option<Fq> {
        (!a.is_zero()).then(|| Fq(self.inv[a.index()]))
    }

    /// Absolute trace to the prime field, as a residue in `[0, p)`.
    #[inline]
    pub fn trace(&self, a: Fq) -> u32 {
        self.trace[a.index()]
    }

    #[inline]
    pub fn frobenius(&self, a: Fq) -> Fq {
        Fq(self.frobenius[a.index()])
    }
}

/// The additive character `chi(a) = exp(2 pi i Tr(twist a) / p)`, the
/// quadratic character and the Gauss sum for that choice of `chi`.
#[derive(Clone, Debug)]
pub struct CharacterTable {
    twist: Fq,
    roots: Vec<Complex64>,
    phase: Vec<u32>,
    chi: Vec<Complex64>,
    eta: Vec<i8>,
    gauss: Complex64,
}

impl CharacterTable {
    fn build(p: u32, tables: &ArithTables, twist: Fq) -> Self {
        let q = tables.q;
        let roots: Vec<Complex64> = (0..p)
            .map(|j| {
                let (s, c) = (TAU * j as f64 / p as f64).sin_cos();
                Complex64::new(c, s)
            })
            .collect();
        let phase: Vec<u32> = (0..q as u32).map(|a| tables.trace(tables.mul(twist, Fq(a)))).collect();
        let chi: Vec<Complex64> = phase.iter().map(|&j| roots[j as usize]).collect();

        let mut eta = vec![-1i8; q];
        eta[0] = 0;
        for b in 1..q as u32 {
            eta[tables.mul(Fq(b), Fq(b)).index()] = 1;
        }
        let gauss = (1..q).map(|s| chi[s] * eta[s] as f64).sum();

        CharacterTable {
            twist,
            roots,
            phase,
            chi,
            eta,
            gauss,
        }
    }

    pub fn twist(&self) -> Fq {
        self.twist
    }

    #[inline]
    pub fn chi(&self, a: Fq) -> Complex64 {
        self.chi[a.index()]
    }

    /// Exponent `j` with `chi(a) = omega^j`, `omega = exp(2 pi i / p)`.
    #[inline]
    pub fn phase(&self, a: Fq) -> u32 {
        self.phase[a.index()]
    }

    /// `exp(2 pi i j / p)` for `j` in `[0, p)`.
    #[inline]
    pub fn root(&self, j: u32) -> Complex64 {
        self.roots[j as usize]
    }

    #[inline]
    pub fn eta(&self, a: Fq) -> i8 {
        self.eta[a.index()]
    }

    pub fn gauss(&self) -> Complex64 {
        self.gauss
    }
}

/// A constructed finite field: spec, arithmetic tables and characters.
#[derive(Clone, Debug)]
pub struct Field {
    spec: FieldSpec,
    tables: ArithTables,
    chars: CharacterTable,
}

impl Field {
    pub fn spec(&self) -> &FieldSpec {
        &self.spec
    }

    pub fn tables(&self) -> &ArithTables {
        &self.tables
    }

    pub fn chars(&self) -> &CharacterTable {
        &self.chars
    }

    pub fn p(&self) -> u32 {
        self.spec.p
    }

    pub fn n(&self) -> u32 {
        self.spec.n
    }

    pub fn q(&self) -> u32 {
        self.spec.q
    }

    pub fn elements(&self) -> impl Iterator<Item = Fq> {
        (0..self.spec.q).map(Fq)
    }

    pub fn nonzero(&self) -> impl Iterator<Item = Fq> {
        (1..self.spec.q).map(Fq)
    }

    /// Same field with the additive character `a -> chi(twist a)`.
    pub fn with_twist(&self, twist: Fq) -> Result<Field> {
        if twist.is_zero() {
            return Err(Error::TrivialTwist);
        }
        Ok(Field {
            spec: self.spec.clone(),
            tables: self.tables.clone(),
            chars: CharacterTable::build(self.spec.p, &self.tables, twist),
        })
    }

    pub fn element(&self, index: u32) -> Option<Fq> {
        (index < self.spec.q).then_some(Fq(index))
    }

    pub fn from_coeffs(&self, coeffs: &[u32]) -> Option<Fq> {
        if coeffs.len() != self.spec.n as usize || coeffs.iter().any(|&c| c >= self.spec.p) {
            return None;
        }
        Some(Fq(coeffs.iter().rev().fold(0, |acc, &c| acc * self.spec.p + c)))
    }

    pub fn coeffs(&self, a: Fq) -> Vec<u32> {
        let p = self.spec.p;
        let mut v = a.0;
        (0..self.spec.n)
            .map(|_| {
                let c = v % p;
                v /= p;
                c
            })
            .collect()
    }

    /// The prime field element `c` (constant polynomial), `c < p`.
    pub fn prime_element(&self, c: u32) -> Fq {
        Fq(c % self.spec.p)
    }

    #[inline]
    pub fn add(&self, a: Fq, b: Fq) -> Fq {
        self.tables.add(a, b)
    }

    #[inline]
    pub fn sub(&self, a: Fq, b: Fq) -> Fq {
        self.tables.add(a, self.tables.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: Fq, b: Fq) -> Fq {
        self.tables.mul(a, b)
    }

    #[inline]
    pub fn neg(&self, a: Fq) -> Fq {
        self.tables.neg(a)
    }

    #[inline]
    pub fn inv(&self, a: Fq) -> Option<Fq> {
        self.tables.inv(a)
    }

    #[inline]
    pub fn square(&self, a: Fq) -> Fq {
        self.tables.mul(a, a)
    }

    pub fn pow(&self, a: Fq, mut e: u64) -> Fq {
        let mut base = a;
        let mut acc = Fq::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    #[inline]
    pub fn chi(&self, a: Fq) -> Complex64 {
        self.chars.chi(a)
    }

    #[inline]
    pub fn eta(&self, a: Fq) -> i8 {
        self.chars.eta(a)
    }

    pub fn gauss(&self) -> Complex64 {
        self.chars.gauss()
    }

    /// `sum_{l != 0} chi(a l + b / l)` as a complex number.
    pub fn kloosterman(&self, a: Fq, b: Fq) -> Complex64 {
        self.nonzero()
            .map(|l| {
                let linv = self.inv(l).expect("nonzero");
                self.chi(self.add(self.mul(a, l), self.mul(b, linv)))
            })
            .sum()
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Builds `F_{p^n}` under the default size cap.
pub fn make_field(p: u32, n: u32) -> Result<Field> {
    make_field_capped(p, n, DEFAULT_FIELD_CAP)
}

pub fn make_field_capped(p: u32, n: u32, cap: u64) -> Result<Field> {
    if p == 2 {
        return Err(Error::CharTwo(2));
    }
    if !is_prime(p as u64) {
        return Err(Error::NotPrime(p as u64));
    }
    if n == 0 {
        return Err(Error::BadDimension("extension degree must be at least 1".into()));
    }
    let q = (p as u128).checked_pow(n).unwrap_or(u128::MAX);
    if q > cap as u128 {
        return Err(Error::TooLarge {
            size: q,
            cap: cap as u128,
        });
    }
    let modulus = least_irreducible(p, n);
    let spec = FieldSpec {
        p,
        n,
        q: q as u32,
        modulus,
    };
    let tables = build_tables(&spec);
    let chars = CharacterTable::build(p, &tables, Fq::ONE);
    Ok(Field { spec, tables, chars })
}

/// Lexicographically least monic irreducible polynomial of degree `n` over
/// `Z_p`, comparing coefficient sequences constant-first.
pub fn least_irreducible(p: u32, n: u32) -> Vec<u32> {
    if n == 1 {
        return vec![0, 1];
    }
    let n = n as usize;
    let mut lower = vec![0u32; n];
    loop {
        let mut cand = lower.clone();
        cand.push(1);
        if is_irreducible(&cand, p) {
            return cand;
        }
        // Increment with the constant coefficient most significant.
        let mut i = n;
        loop {
            i -= 1;
            lower[i] += 1;
            if lower[i] < p {
                break;
            }
            lower[i] = 0;
            assert!(i > 0, "no irreducible polynomial of degree {n} over Z_{p}");
        }
    }
}

/// Trial division by every monic polynomial of degree `1..=deg/2`.
pub fn is_irreducible(poly: &[u32], p: u32) -> bool {
    let deg = poly.len() - 1;
    if deg <= 1 {
        return deg == 1;
    }
    for fdeg in 1..=deg / 2 {
        let count = (p as u64).pow(fdeg as u32);
        for code in 0..count {
            let mut factor = Vec::with_capacity(fdeg + 1);
            let mut c = code;
            for _ in 0..fdeg {
                factor.push((c % p as u64) as u32);
                c /= p as u64;
            }
            factor.push(1);
            if poly_rem(poly, &factor, p).iter().all(|&x| x == 0) {
                return false;
            }
        }
    }
    true
}

/// Remainder of `a` modulo the monic polynomial `m` over `Z_p`.
fn poly_rem(a: &[u32], m: &[u32], p: u32) -> Vec<u32> {
    let mut r: Vec<u64> = a.iter().map(|&x| x as u64).collect();
    let dm = m.len() - 1;
    let p = p as u64;
    while r.len() > dm {
        let lead = r.pop().unwrap() % p;
        let shift = r.len() - dm;
        if lead != 0 {
            for (i, &mi) in m[..dm].iter().enumerate() {
                r[shift + i] = (r[shift + i] + p * p - lead * mi as u64 % p) % p;
            }
        }
    }
    r.into_iter().map(|x| (x % p) as u32).collect()
}

fn build_tables(spec: &FieldSpec) -> ArithTables {
    let (p, n, q) = (spec.p, spec.n as usize, spec.q as usize);
    let to_coeffs = |mut v: usize| -> Vec<u32> {
        (0..n)
            .map(|_| {
                let c = (v % p as usize) as u32;
                v /= p as usize;
                c
            })
            .collect()
    };
    let to_index = |c: &[u32]| -> u32 { c.iter().rev().fold(0, |acc, &x| acc * p + x) };
    let coeffs: Vec<Vec<u32>> = (0..q).map(to_coeffs).collect();

    let mut add = vec![0u32; q * q];
    let mut mul = vec![0u32; q * q];
    for a in 0..q {
        for b in 0..q {
            let s: Vec<u32> = coeffs[a].iter().zip(&coeffs[b]).map(|(x, y)| (x + y) % p).collect();
            add[a * q + b] = to_index(&s);

            let mut prod = vec![0u32; 2 * n - 1];
            for (i, &x) in coeffs[a].iter().enumerate() {
                for (j, &y) in coeffs[b].iter().enumerate() {
                    prod[i + j] = (prod[i + j] + x * y) % p;
                }
            }
            let r = if n == 1 {
                prod
            } else {
                let mut r = poly_rem(&prod, &spec.modulus, p);
                r.resize(n, 0);
                r
            };
            mul[a * q + b] = to_index(&r);
        }
    }

    let neg: Vec<u32> = (0..q)
        .map(|a| {
            let c: Vec<u32> = coeffs[a].iter().map(|&x| (p - x) % p).collect();
            to_index(&c)
        })
        .collect();
    let mut inv = vec![0u32; q];
    for a in 1..q {
        inv[a] = (1..q as u32)
            .find(|&b| mul[a * q + b as usize] == 1)
            .expect("nonzero elements are invertible");
    }

    let pow = |a: u32, e: u32| -> u32 { (0..e).fold(1u32, |acc, _| mul[acc as usize * q + a as usize]) };
    let frobenius: Vec<u32> = (0..q as u32).map(|a| pow(a, p)).collect();
    let trace: Vec<u32> = (0..q as u32)
        .map(|a| {
            let mut x = a;
            let mut s = 0u32;
            for _ in 0..n {
                s = add[s as usize * q + x as usize];
                x = frobenius[x as usize];
            }
            debug_assert!(s < p, "trace must land in the prime field");
            s
        })
        .collect();

    ArithTables {
        q,
        add,
        mul,
        neg,
        inv,
        trace,
        frobenius,
    }
}

/// `eta(a)`: `+1` on nonzero squares, `-1` on non-squares, `0` at zero.
pub fn quadratic_character(field: &Field, a: Fq) -> i8 {
    field.eta(a)
}

/// `chi(twist a)` for the canonical trace character `chi`.
pub fn additive_character(field: &Field, a: Fq, twist: Fq) -> Result<Complex64> {
    if twist.is_zero() {
        return Err(Error::TrivialTwist);
    }
    let t = field.tables();
    Ok(field.chars().root(t.trace(t.mul(twist, a))))
}

/// `G = sum_{s != 0} eta(s) chi(s)` for the field's character.
pub fn gauss_sum(field: &Field) -> Complex64 {
    field.gauss()
}

/// Real Kloosterman sum `K(a, b)`; terms for `l` and `-l` are conjugate,
/// so the imaginary part vanishes up to rounding.
pub fn kloosterman_sum(field: &Field, a: Fq, b: Fq) -> f64 {
    field.kloosterman(a, b).re
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: f64 = 1e-10;

    #[test]
    fn f3_inverse_of_two() {
        let f = make_field(3, 1).unwrap();
        assert_eq!(f.inv(Fq(2)), Some(Fq(2)));
        assert_eq!(f.inv(Fq::ZERO), None);
    }

    #[test]
    fn f9_modulus_is_x2_plus_1() {
        // Root scan over Z_3: x^2, x^2+x, x^2+2x have root 0; x^2+1 has none.
        for poly in [[0, 0, 1], [0, 1, 1], [0, 2, 1]] {
            let root = (0..3u32).any(|x| (poly[0] + poly[1] * x + x * x) % 3 == 0);
            assert!(root);
        }
        assert!((0..3u32).all(|x| (1 + x * x) % 3 != 0));
        let f = make_field(3, 2).unwrap();
        assert_eq!(f.spec().modulus, vec![1, 0, 1]);
        assert_eq!(f.spec().modulus_string(), "x^2 + 1");
    }

    #[test]
    fn rejects_bad_characteristic() {
        assert_eq!(make_field(2, 3).unwrap_err(), Error::CharTwo(2));
        assert_eq!(make_field(9, 1).unwrap_err(), Error::NotPrime(9));
        assert!(matches!(make_field(5, 3), Err(Error::TooLarge { .. })));
        assert!(make_field_capped(5, 3, 125).is_ok());
    }

    #[test]
    fn quadratic_character_examples() {
        let f3 = make_field(3, 1).unwrap();
        assert_eq!(quadratic_character(&f3, Fq(1)), 1);
        assert_eq!(quadratic_character(&f3, Fq(2)), -1);
        assert_eq!(quadratic_character(&f3, Fq(0)), 0);
    }

    #[test]
    fn eta_agrees_with_euler_criterion() {
        for (p, n) in [(3, 1), (5, 1), (7, 1), (3, 2), (5, 2), (3, 3), (11, 1)] {
            let f = make_field(p, n).unwrap();
            let half = (f.q() as u64 - 1) / 2;
            let mut squares = 0;
            for a in f.nonzero() {
                let e = f.pow(a, half);
                let expect = if e == Fq::ONE { 1 } else { -1 };
                assert_eq!(f.eta(a), expect, "q={} a={:?}", f.q(), a);
                squares += (expect == 1) as u32;
            }
            assert_eq!(squares, (f.q() - 1) / 2);
        }
    }

    #[test]
    fn additive_character_examples() {
        let f3 = make_field(3, 1).unwrap();
        let omega = Complex64::from_polar(1.0, TAU / 3.0);
        assert!((additive_character(&f3, Fq(0), Fq::ONE).unwrap() - 1.0).norm() < TOL);
        assert!((additive_character(&f3, Fq(1), Fq::ONE).unwrap() - omega).norm() < TOL);
        assert_eq!(
            additive_character(&f3, Fq(1), Fq::ZERO).unwrap_err(),
            Error::TrivialTwist
        );

        // In F_9 = Z_3[x]/(x^2+1), i = x has index 3 and Tr(i) = i + i^3 = 0.
        let f9 = make_field(3, 2).unwrap();
        let i = f9.from_coeffs(&[0, 1]).unwrap();
        assert_eq!(f9.add(i, f9.pow(i, 3)), Fq::ZERO);
        assert_eq!(f9.tables().trace(i), 0);
        assert!((additive_character(&f9, i, Fq::ONE).unwrap() - 1.0).norm() < TOL);
    }

    #[test]
    fn gauss_sum_small_fields() {
        // F_3: G = chi(1) - chi(2) = omega - omega^2 = i sqrt 3.
        let f3 = make_field(3, 1).unwrap();
        let omega = Complex64::from_polar(1.0, TAU / 3.0);
        let direct = omega - omega * omega;
        assert!((direct - Complex64::new(0.0, 3f64.sqrt())).norm() < TOL);
        assert!((gauss_sum(&f3) - direct).norm() < TOL);

        let f5 = make_field(5, 1).unwrap();
        assert!((gauss_sum(&f5) - Complex64::new(5f64.sqrt(), 0.0)).norm() < TOL);
    }

    #[test]
    fn kloosterman_examples() {
        let f3 = make_field(3, 1).unwrap();
        assert!((kloosterman_sum(&f3, Fq(1), Fq(1)) + 1.0).abs() < TOL);
        for (p, n) in [(3, 1), (5, 1), (3, 2)] {
            let f = make_field(p, n).unwrap();
            let q = f.q() as f64;
            assert!((kloosterman_sum(&f, Fq(0), Fq(0)) - (q - 1.0)).abs() < TOL);
            assert!((kloosterman_sum(&f, Fq(1), Fq(0)) + 1.0).abs() < TOL);
        }
    }

    #[test]
    fn frobenius_fixes_exactly_prime_field() {
        for (p, n) in [(3, 2), (5, 2), (3, 3), (3, 4)] {
            let f = make_field(p, n).unwrap();
            for a in f.elements() {
                let fixed = f.tables().frobenius(a) == a;
                assert_eq!(fixed, a.0 < p, "q={} a={:?}", f.q(), a);
            }
            for a in f.elements() {
                for b in f.elements() {
                    let fr = |x| f.tables().frobenius(x);
                    assert_eq!(fr(f.add(a, b)), f.add(fr(a), fr(b)));
                    assert_eq!(fr(f.mul(a, b)), f.mul(fr(a), fr(b)));
                }
            }
        }
    }

    #[test]
    fn coeff_index_roundtrip() {
        let f = make_field(5, 2).unwrap();
        for a in f.elements() {
            assert_eq!(f.from_coeffs(&f.coeffs(a)), Some(a));
        }
        assert_eq!(f.from_coeffs(&[5, 0]), None);
    }

    #[test]
    fn irreducibility_catches_quadratic_factors() {
        // (x^2+1)^2 = x^4 + 2x^2 + 1 over Z_3 has no root in Z_3 but is reducible.
        assert!(!is_irreducible(&[1, 0, 2, 0, 1], 3));
        assert!(is_irreducible(&[1, 0, 1], 3));
        let m = least_irreducible(3, 4);
        assert!(is_irreducible(&m, 3));
    }
}
