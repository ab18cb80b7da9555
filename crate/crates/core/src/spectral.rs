//! Fourier analysis on `F_q^d`.
//!
//! Conventions, for `f: F_q^d -> C` and the field's additive character `chi`:
//!
//! * tilde: `f~(m) = sum_x f(x) chi(-x.m)`
//! * hat: `f^(m) = q^{-d} f~(m)`
//! * inverse: `g_v(x) = sum_m g(m) chi(m.x)`, so `inverse(hat(f)) = f`.
//!
//! The fast path writes `chi(x.m) = omega^{<x, L(m)>}` where `x` is read as
//! its `n d` base-`p` digits, `omega = exp(2 pi i / p)` and `L` is the
//! `Z_p`-linear map `m_c -> (Tr(tau alpha^j m_c))_j` applied coordinatewise
//! (`tau` the character twist, `alpha` the class of `x` in the modulus
//! quotient). The transform is then a plain DFT over `(Z_p)^{nd}`, done one
//! digit axis at a time, followed by the permutation `m -> L(m)`.

use std::collections::hash_map::DefaultHasher;
use std::collections::HashMap;
use std::hash::{Hash, Hasher};
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exact::ExactPlan;
use crate::field::{Field, Fq};
use crate::lattice::{PointSet, Space, VectorIndexer};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TransformMode {
    Hat,
    Tilde,
    Inverse,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SpectralKind {
    /// Normalized transform `q^{-d} sum`.
    Hat,
    /// Unnormalized transform.
    Tilde,
    /// Anything else: inverse transforms, extension maps.
    Raw,
}

/// A complex table over `F_q^d`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralTable {
    pub values: Vec<Complex64>,
    pub kind: SpectralKind,
}

impl SpectralTable {
    #[inline]
    pub fn get(&self, m: usize) -> Complex64 {
        self.values[m]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max_modulus(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// `sum_m |values(m)|^s`.
    pub fn power_sum(&self, s: f64) -> f64 {
        self.values.iter().map(|v| v.norm().powf(s)).sum()
    }
}

/// Digit-axis DFT plan for one space.
#[derive(Debug)]
pub(crate) struct DftPlan {
    p: usize,
    digits: usize,
    roots: Vec<Complex64>,
    /// `perm[m]` = digit index of `L(m)`.
    perm: Vec<u32>,
}

impl DftPlan {
    fn new(field: &Field, indexer: &VectorIndexer) -> Self {
        let (p, n, q) = (field.p() as usize, field.n() as usize, field.q() as usize);
        let chars = field.chars();
        let coord_perm: Vec<usize> = (0..q as u32)
            .map(|m| {
                let mut alpha_j = 1usize;
                let mut out = 0usize;
                for _ in 0..n {
                    let digit = chars.phase(field.mul(Fq(alpha_j as u32), Fq(m))) as usize;
                    out += digit * alpha_j;
                    alpha_j *= p;
                }
                out
            })
            .collect();
        let mut perm = vec![0u32; indexer.len()];
        for i in 1..indexer.len() {
            perm[i] = (coord_perm[i % q] + q * perm[i / q] as usize) as u32;
        }
        DftPlan {
            p,
            digits: n * indexer.d(),
            roots: (0..p as u32).map(|j| chars.root(j)).collect(),
            perm,
        }
    }

    /// In place: `data(u) <- sum_x data(x) omega^{sign <x, u>}`.
    fn digit_dft(&self, data: &mut [Complex64], sign: i32) {
        let p = self.p;
        // twiddle[j * p + k] = omega^{sign j k}
        let twiddle: Vec<Complex64> = (0..p * p)
            .map(|jk| {
                let e = (jk / p) * (jk % p) % p;
                self.roots[if sign < 0 { (p - e) % p } else { e }]
            })
            .collect();
        let mut buf = vec![Complex64::default(); p];
        let mut stride = 1;
        for _ in 0..self.digits {
            let block = stride * p;
            for start in (0..data.len()).step_by(block) {
                for base in start..start + stride {
                    for (k, slot) in buf.iter_mut().enumerate() {
                        let mut acc = Complex64::default();
                        for j in 0..p {
                            acc += data[base + j * stride] * twiddle[j * p + k];
                        }
                        *slot = acc;
                    }
                    for (k, &v) in buf.iter().enumerate() {
                        data[base + k * stride] = v;
                    }
                }
            }
            stride = block;
        }
    }

    fn tilde(&self, f: &[Complex64]) -> Vec<Complex64> {
        let mut work = f.to_vec();
        self.digit_dft(&mut work, -1);
        self.perm.iter().map(|&u| work[u as usize]).collect()
    }

    fn inverse(&self, g: &[Complex64]) -> Vec<Complex64> {
        let mut work = vec![Complex64::default(); g.len()];
        for (m, &u) in self.perm.iter().enumerate() {
            work[u as usize] = g[m];
        }
        self.digit_dft(&mut work, 1);
        work
    }
}

/// Per-space memo of transforms: the DFT plan, all sphere transforms, and
/// hat transforms of point sets keyed by label and contents.
#[derive(Debug)]
pub struct SpectralCache {
    plan: DftPlan,
    exact: OnceLock<ExactPlan>,
    sphere_hats: OnceLock<Vec<Vec<Complex64>>>,
    set_hats: Mutex<HashMap<(String, u64), Arc<SpectralTable>>>,
}

impl SpectralCache {
    pub(crate) fn new(field: &Field, indexer: &VectorIndexer) -> Self {
        SpectralCache {
            plan: DftPlan::new(field, indexer),
            exact: OnceLock::new(),
            sphere_hats: OnceLock::new(),
            set_hats: Mutex::new(HashMap::new()),
        }
    }

    pub(crate) fn perm(&self) -> &[u32] {
        &self.plan.perm
    }

    pub(crate) fn exact_plan(&self) -> &ExactPlan {
        self.exact
            .get_or_init(|| ExactPlan::new(self.plan.p, self.plan.digits, self.plan.perm.len()))
    }
}

/// Fast transform of `f` (length `q^d`).
pub fn fourier(space: &Space, f: &[Complex64], mode: TransformMode) -> Result<SpectralTable> {
    check_len(space, f.len())?;
    let plan = &space.cache.plan;
    Ok(match mode {
        TransformMode::Tilde => SpectralTable {
            values: plan.tilde(f),
            kind: SpectralKind::Tilde,
        },
        TransformMode::Hat => {
            let scale = 1.0 / space.size() as f64;
            SpectralTable {
                values: plan.tilde(f).into_iter().map(|v| v * scale).collect(),
                kind: SpectralKind::Hat,
            }
        }
        TransformMode::Inverse => SpectralTable {
            values: plan.inverse(f),
            kind: SpectralKind::Raw,
        },
    })
}

pub fn fourier_real(space: &Space, f: &[f64], mode: TransformMode) -> Result<SpectralTable> {
    let c: Vec<Complex64> = f.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    fourier(space, &c, mode)
}

/// Direct `O(q^{2d})` evaluation of the same transforms.
pub fn fourier_naive(space: &Space, f: &[Complex64], mode: TransformMode) -> Result<SpectralTable> {
    check_len(space, f.len())?;
    let field = space.field();
    let n = space.size();
    let sign_neg = !matches!(mode, TransformMode::Inverse);
    let values = (0..n)
        .map(|m| {
            let mut acc = Complex64::default();
            for (x, &fx) in f.iter().enumerate() {
                if fx == Complex64::default() {
                    continue;
                }
                let dot = space.dot(x, m);
                acc += fx * field.chi(if sign_neg { field.neg(dot) } else { dot });
            }
            if mode == TransformMode::Hat {
                acc / n as f64
            } else {
                acc
            }
        })
        .collect();
    Ok(SpectralTable {
        values,
        kind: match mode {
            TransformMode::Hat => SpectralKind::Hat,
            TransformMode::Tilde => SpectralKind::Tilde,
            TransformMode::Inverse => SpectralKind::Raw,
        },
    })
}

fn check_len(space: &Space, len: usize) -> Result<()> {
    if len != space.size() {
        return Err(Error::SizeMismatch {
            expected: space.size(),
            got: len,
        });
    }
    Ok(())
}

fn indicator(set: &PointSet) -> Vec<Complex64> {
    (0..set.universe())
        .map(|i| Complex64::new(if set.contains(i) { 1.0 } else { 0.0 }, 0.0))
        .collect()
}

/// `E^` for a point set, computed once per (label, contents).
pub fn set_hat(space: &Space, set: &PointSet) -> Result<Arc<SpectralTable>> {
    check_len(space, set.universe())?;
    let mut h = DefaultHasher::new();
    set.iter().for_each(|i| i.hash(&mut h));
    let key = (set.label().to_string(), h.finish());
    if let Some(t) = space.cache.set_hats.lock().unwrap().get(&key) {
        return Ok(Arc::clone(t));
    }
    let table = Arc::new(fourier(space, &indicator(set), TransformMode::Hat)?);
    space.cache.set_hats.lock().unwrap().insert(key, Arc::clone(&table));
    Ok(table)
}

/// `E~ = q^d E^`.
pub fn set_tilde(space: &Space, set: &PointSet) -> Result<SpectralTable> {
    let scale = space.size() as f64;
    Ok(SpectralTable {
        values: set_hat(space, set)?.values.iter().map(|v| v * scale).collect(),
        kind: SpectralKind::Tilde,
    })
}

fn sphere_hats(space: &Space) -> &Vec<Vec<Complex64>> {
    space.cache.sphere_hats.get_or_init(|| {
        let n = space.size();
        space
            .field()
            .elements()
            .map(|t| {
                let mut f = vec![Complex64::default(); n];
                for &x in space.spheres().members(t) {
                    f[x] = Complex64::new(1.0, 0.0);
                }
                space.cache.plan.tilde(&f).into_iter().map(|v| v / n as f64).collect()
            })
            .collect()
    })
}

/// `S_t^` by direct transform of the sphere indicator (any `d`).
pub fn sphere_hat(space: &Space, t: Fq) -> &[Complex64] {
    &sphere_hats(space)[t.index()]
}

/// Closed form of `S_t^(m)` for even `d`:
/// `q^{-1} delta_0(m) + q^{-d-1} G^d sum_{l != 0} chi(t l + ||m|| / (4 l))`.
pub fn sphere_hat_closed(space: &Space, t: Fq, m: usize) -> Result<Complex64> {
    let field = space.field();
    if field.p() == 2 {
        return Err(Error::CharTwo(2));
    }
    let d = space.d();
    if d % 2 == 1 {
        return Err(Error::OddDimension(d));
    }
    let q = space.q() as f64;
    let norm_m = space.norm(m);
    let four_inv = field.inv(field.prime_element(4)).expect("4 is a unit");
    let sum: Complex64 = field
        .nonzero()
        .map(|l| {
            let over = field.mul(norm_m, field.mul(four_inv, field.inv(l).unwrap()));
            field.chi(field.add(field.mul(t, l), over))
        })
        .sum();
    let delta = if m == 0 { 1.0 / q } else { 0.0 };
    Ok(delta + field.gauss().powi(d as i32) * sum * q.powi(-(d as i32) - 1))
}

/// The `t = 0` form `q^{-1} delta_0(m) + q^{-d-1} G^d sum_{l != 0} chi(||m|| l)`.
pub fn sphere_hat_zero_closed(space: &Space, m: usize) -> Result<Complex64> {
    let field = space.field();
    let d = space.d();
    if d % 2 == 1 {
        return Err(Error::OddDimension(d));
    }
    let q = space.q() as f64;
    let norm_m = space.norm(m);
    let sum: Complex64 = field.nonzero().map(|l| field.chi(field.mul(norm_m, l))).sum();
    let delta = if m == 0 { 1.0 / q } else { 0.0 };
    Ok(delta + field.gauss().powi(d as i32) * sum * q.powi(-(d as i32) - 1))
}

/// Both sides of
/// `sum_t S_t^(m) conj(S_t^(v)) = q^{-1} d0(m) d0(v) + q^{-d-1} sum_{s != 0} chi(s(||m|| - ||v||))`,
/// the left from direct sphere transforms, the right from characters.
pub fn dual_sum_identity(space: &Space, m: usize, v: usize) -> (Complex64, Complex64) {
    let field = space.field();
    let lhs = field
        .elements()
        .map(|t| {
            let s = sphere_hat(space, t);
            s[m] * s[v].conj()
        })
        .sum();
    let q = space.q() as f64;
    let diff = field.sub(space.norm(m), space.norm(v));
    let chars: Complex64 = field.nonzero().map(|s| field.chi(field.mul(s, diff))).sum();
    let delta = if m == 0 && v == 0 { 1.0 / q } else { 0.0 };
    let rhs = delta + chars * q.powi(-(space.d() as i32) - 1);
    (lhs, rhs)
}

/// Which measure a norm integrates against.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Measure {
    /// Counting measure `dm` on the frequency side.
    Counting,
    /// Normalized counting measure `dx`, weight `q^{-d}`.
    Normalized,
    /// Normalized surface measure `dsigma` on a sphere, weight `1/|S_t|`.
    Surface,
}

/// An `L^s` norm; `exponent = f64::INFINITY` selects the sup norm.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormSpec {
    pub exponent: f64,
    pub measure: Measure,
    /// Permit `dsigma` on `S_0`.
    pub allow_zero_radius: bool,
}

impl NormSpec {
    pub fn new(exponent: f64, measure: Measure) -> Self {
        NormSpec {
            exponent,
            measure,
            allow_zero_radius: false,
        }
    }

    pub fn conjugate(&self) -> f64 {
        conjugate_exponent(self.exponent)
    }
}

/// Hölder conjugate `s'` with `1/s + 1/s' = 1`.
pub fn conjugate_exponent(s: f64) -> f64 {
    if s == 1.0 {
        f64::INFINITY
    } else if s.is_infinite() {
        1.0
    } else {
        s / (s - 1.0)
    }
}

/// `(weight * sum |v|^s)^{1/s}`, or the max for `s = inf`.
pub fn weighted_lp(values: impl Iterator<Item = f64>, weight: f64, s: f64) -> f64 {
    if s.is_infinite() {
        values.fold(0.0, f64::max)
    } else {
        (weight * values.map(|v| v.powf(s)).sum::<f64>()).powf(1.0 / s)
    }
}

/// Evaluates `||f||` under `spec`; `t` selects the sphere for `dsigma`.
pub fn norm_eval(space: &Space, f: &[Complex64], spec: &NormSpec, t: Option<Fq>) -> Result<f64> {
    check_len(space, f.len())?;
    let s = spec.exponent;
    Ok(match spec.measure {
        Measure::Counting => weighted_lp(f.iter().map(|v| v.norm()), 1.0, s),
        Measure::Normalized => weighted_lp(f.iter().map(|v| v.norm()), 1.0 / space.size() as f64, s),
        Measure::Surface => {
            let t = t.ok_or(Error::MissingSphere)?;
            if t.is_zero() && !spec.allow_zero_radius {
                return Err(Error::ZeroRadius);
            }
            let members = space.spheres().members(t);
            if members.is_empty() {
                return Err(Error::EmptySphere(t.0));
            }
            weighted_lp(members.iter().map(|&x| f[x].norm()), 1.0 / members.len() as f64, s)
        }
    })
}

/// `(f dsigma)^v(m) = |S_t|^{-1} sum_{x in S_t} f(x) chi(m.x)`; entries of
/// `f` off the sphere are ignored.
pub fn extension_fn(space: &Space, f: &[Complex64], t: Fq) -> Result<SpectralTable> {
    check_len(space, f.len())?;
    let members = space.spheres().members(t);
    if members.is_empty() {
        return Err(Error::EmptySphere(t.0));
    }
    let mut masked = vec![Complex64::default(); space.size()];
    for &x in members {
        masked[x] = f[x];
    }
    let scale = 1.0 / members.len() as f64;
    Ok(SpectralTable {
        values: space
            .cache
            .plan
            .inverse(&masked)
            .into_iter()
            .map(|v| v * scale)
            .collect(),
        kind: SpectralKind::Raw,
    })
}
