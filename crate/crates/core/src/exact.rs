//! Exact transforms over `Z/l` for a prime `l = 1 (mod p)` above `2^63`.
//!
//! A primitive p-th root of unity mod `l` plays the role of the additive
//! character, so every character-sum identity used for counting holds
//! verbatim. Counts below `2^63` are recovered exactly as residues.

use std::sync::OnceLock;

use num_prime::nt_funcs::is_prime64;

use crate::error::{Error, Result};
use crate::lattice::{PointSet, Space};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Modulus(u64);

impl Modulus {
    /// Largest prime `l < 2^64` with `l = 1 (mod p)`.
    pub fn for_order(p: u64) -> Self {
        let mut l = (u64::MAX - 1) / p * p + 1;
        while !is_prime64(l) {
            l -= p;
        }
        Modulus(l)
    }

    pub fn value(self) -> u64 {
        self.0
    }

    pub fn add(self, a: u64, b: u64) -> u64 {
        let (s, carry) = a.overflowing_add(b);
        if carry || s >= self.0 {
            s.wrapping_sub(self.0)
        } else {
            s
        }
    }

    pub fn mul(self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.0 as u128) as u64
    }

    pub fn pow(self, mut a: u64, mut e: u64) -> u64 {
        let mut r = 1;
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(r, a);
            }
            a = self.mul(a, a);
            e >>= 1;
        }
        r
    }

    pub fn inv(self, a: u64) -> u64 {
        self.pow(a, self.0 - 2)
    }

    /// A primitive p-th root of unity.
    pub fn root_of_unity(self, p: u64) -> u64 {
        (2..)
            .map(|g| self.pow(g, (self.0 - 1) / p))
            .find(|&w| w != 1)
            .expect("multiplicative group is cyclic")
    }
}

#[derive(Debug)]
pub(crate) struct ExactPlan {
    modulus: Modulus,
    p: usize,
    digits: usize,
    /// `roots[j] = omega^j`.
    roots: Vec<u64>,
    size_inv: u64,
    sphere_tildes: OnceLock<Vec<Vec<u64>>>,
}

impl ExactPlan {
    pub(crate) fn new(p: usize, digits: usize, size: usize) -> Self {
        let modulus = Modulus::for_order(p as u64);
        let w = modulus.root_of_unity(p as u64);
        ExactPlan {
            modulus,
            p,
            digits,
            roots: (0..p as u64).map(|j| modulus.pow(w, j)).collect(),
            size_inv: modulus.inv(size as u64 % modulus.value()),
            sphere_tildes: OnceLock::new(),
        }
    }

    fn digit_dft(&self, data: &mut [u64], sign: i32) {
        let (p, md) = (self.p, self.modulus);
        let twiddle: Vec<u64> = (0..p * p)
            .map(|jk| {
                let e = (jk / p) * (jk % p) % p;
                self.roots[if sign < 0 { (p - e) % p } else { e }]
            })
            .collect();
        let mut buf = vec![0u64; p];
        let mut stride = 1;
        for _ in 0..self.digits {
            let block = stride * p;
            for start in (0..data.len()).step_by(block) {
                for base in start..start + stride {
                    for (k, slot) in buf.iter_mut().enumerate() {
                        *slot = (0..p).fold(0, |acc, j| {
                            md.add(acc, md.mul(data[base + j * stride], twiddle[j * p + k]))
                        });
                    }
                    for (k, &v) in buf.iter().enumerate() {
                        data[base + k * stride] = v;
                    }
                }
            }
            stride = block;
        }
    }

    fn tilde(&self, perm: &[u32], f: &[u64]) -> Vec<u64> {
        let mut work = f.to_vec();
        self.digit_dft(&mut work, -1);
        perm.iter().map(|&u| work[u as usize]).collect()
    }

    fn inverse(&self, perm: &[u32], g: &[u64]) -> Vec<u64> {
        let mut work = vec![0u64; g.len()];
        for (m, &u) in perm.iter().enumerate() {
            work[u as usize] = g[m];
        }
        self.digit_dft(&mut work, 1);
        work
    }

    fn to_count(&self, index: usize, v: u64) -> Result<u64> {
        if v >= 1 << 63 {
            return Err(Error::RoundingOverflow {
                index,
                residual: v as f64,
            });
        }
        Ok(v)
    }
}

fn plan(space: &Space) -> &ExactPlan {
    space.cache.exact_plan()
}

fn set_tilde_mod(space: &Space, set: &PointSet) -> Vec<u64> {
    let f: Vec<u64> = (0..space.size()).map(|i| set.contains(i) as u64).collect();
    plan(space).tilde(space.cache.perm(), &f)
}

fn sphere_tildes_mod(space: &Space) -> &Vec<Vec<u64>> {
    let plan = plan(space);
    plan.sphere_tildes.get_or_init(|| {
        space
            .field()
            .elements()
            .map(|t| {
                let mut f = vec![0u64; space.size()];
                for &x in space.spheres().members(t) {
                    f[x] = 1;
                }
                plan.tilde(space.cache.perm(), &f)
            })
            .collect()
    })
}

/// Exact counts of `s_1 x_1 + ... + s_k x_k = y` over `E^k` for every `y`.
/// The caller is responsible for the `|E|^k < 2^63` budget.
pub fn signed_sum_counts(space: &Space, set: &PointSet, signs: &[bool]) -> Result<Vec<u64>> {
    let plan = plan(space);
    let md = plan.modulus;
    let plus = signs.iter().filter(|&&s| s).count() as u64;
    let minus = signs.len() as u64 - plus;
    let tilde = set_tilde_mod(space, set);
    let product: Vec<u64> = (0..tilde.len())
        .map(|m| md.mul(md.pow(tilde[m], plus), md.pow(tilde[space.neg(m)], minus)))
        .collect();
    plan.inverse(space.cache.perm(), &product)
        .into_iter()
        .enumerate()
        .map(|(y, v)| plan.to_count(y, md.mul(v, plan.size_inv)))
        .collect()
}

/// Exact `nu_k(t) = q^{-d} sum_m S~_t(m) E~(-m)^k`.
pub fn nu_spectral(space: &Space, set: &PointSet, k: u32) -> Result<Vec<u64>> {
    let plan = plan(space);
    let md = plan.modulus;
    let tilde = set_tilde_mod(space, set);
    let weights: Vec<u64> = (0..tilde.len())
        .map(|m| md.pow(tilde[space.neg(m)], k as u64))
        .collect();
    sphere_tildes_mod(space)
        .iter()
        .enumerate()
        .map(|(t, s)| {
            let v = s
                .iter()
                .zip(&weights)
                .fold(0, |acc, (&a, &b)| md.add(acc, md.mul(a, b)));
            plan.to_count(t, md.mul(v, plan.size_inv))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modulus_has_roots() {
        for p in [3u64, 5, 7, 11, 13, 113] {
            let m = Modulus::for_order(p);
            assert!(m.value() > 1 << 63);
            assert_eq!(m.value() % p, 1);
            let w = m.root_of_unity(p);
            assert_eq!(m.pow(w, p), 1);
            assert_ne!(w, 1);
            assert_eq!(m.mul(m.inv(12345), 12345), 1);
        }
    }
}
