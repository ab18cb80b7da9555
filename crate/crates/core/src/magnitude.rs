//! The counting function `nu_k(t) = #{(x_1..x_k) in E^k : ||x_1 + ... + x_k|| = t}`,
//! the k-resultant magnitude set `Delta_k(E)` (its support), and audits of
//! the inequalities relating them to Fourier data of `E`.

use num_bigint::BigUint;
use num_complex::Complex64;
use num_rational::Rational64;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::exact;
use crate::field::Fq;
use crate::lattice::{PointSet, Space};
use crate::restriction::sphere_moment;
use crate::spectral::{fourier, set_hat, sphere_hat, TransformMode};
use crate::tolerance::Tolerance;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NuMethod {
    /// k-fold convolution of the indicator, summed over each sphere.
    Direct,
    /// `nu_k(t) = q^{dk} sum_m S_t^(m) conj(E^(m))^k`.
    Spectral,
    /// Both, required to agree exactly.
    Both,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NuProfile {
    pub k: u32,
    /// `counts[t] = nu_k(t)`, indexed by field element.
    pub counts: Vec<u64>,
    pub set_size: usize,
}

impl NuProfile {
    pub fn nu(&self, t: Fq) -> u64 {
        self.counts[t.index()]
    }

    pub fn total(&self) -> u128 {
        self.counts.iter().map(|&c| c as u128).sum()
    }

    /// `Delta_k(E)`: the radii with a nonzero count.
    pub fn support(&self) -> Vec<Fq> {
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(t, _)| Fq(t as u32))
            .collect()
    }
}

/// Above this many tuples, double-precision transforms can no longer
/// resolve individual counts and the exact modular path is used instead.
pub const FLOAT_COUNT_LIMIT: u64 = 1 << 36;

/// Refuses `|E|^k >= 2^63`.
pub fn check_count_budget(size: usize, k: u32) -> Result<u64> {
    (size as u64)
        .checked_pow(k)
        .filter(|&v| v < 1 << 63)
        .ok_or(Error::CountOverflow(size, k))
}

fn round_count(index: usize, v: Complex64) -> Result<u64> {
    let r = v.re.round();
    let residual = (v.re - r).abs().max(v.im.abs());
    if residual >= 0.5 || r < 0.0 {
        return Err(Error::RoundingOverflow {
            index,
            residual: residual.max(-r),
        });
    }
    Ok(r as u64)
}

/// Number of tuples `(x_1..x_k)` in `E^k` with `s_1 x_1 + ... + s_k x_k = y`
/// for every `y`, where `signs[i]` is `true` for `+`.
pub fn signed_sum_counts(space: &Space, set: &PointSet, signs: &[bool]) -> Result<Vec<u64>> {
    let k = signs.len() as u32;
    if k < 2 {
        return Err(Error::BadOrder(k));
    }
    if check_count_budget(set.len(), k)? > FLOAT_COUNT_LIMIT {
        return exact::signed_sum_counts(space, set, signs);
    }
    let plus = signs.iter().filter(|&&s| s).count() as i32;
    let minus = k as i32 - plus;
    let n = space.size() as f64;
    // The transform of -E is the conjugate of that of E.
    let hat = set_hat(space, set)?;
    let product: Vec<Complex64> = hat
        .values
        .iter()
        .map(|&h| {
            let t = h * n;
            t.powi(plus) * t.conj().powi(minus)
        })
        .collect();
    let conv = fourier(space, &product, TransformMode::Inverse)?;
    conv.values
        .iter()
        .enumerate()
        .map(|(y, &v)| round_count(y, v / n))
        .collect()
}

/// k-fold sum counts with all signs `+`.
pub fn sum_counts(space: &Space, set: &PointSet, k: u32) -> Result<Vec<u64>> {
    signed_sum_counts(space, set, &vec![true; k as usize])
}

fn profile_from_counts(space: &Space, counts: &[u64]) -> Vec<u64> {
    let mut nu = vec![0u64; space.q()];
    for (y, &c) in counts.iter().enumerate() {
        nu[space.norm(y).index()] += c;
    }
    nu
}

fn nu_direct(space: &Space, set: &PointSet, k: u32) -> Result<Vec<u64>> {
    Ok(profile_from_counts(space, &sum_counts(space, set, k)?))
}

fn nu_spectral(space: &Space, set: &PointSet, k: u32) -> Result<Vec<u64>> {
    if check_count_budget(set.len(), k)? > FLOAT_COUNT_LIMIT {
        return exact::nu_spectral(space, set, k);
    }
    let n = space.size() as f64;
    let hat = set_hat(space, set)?;
    // q^{dk} conj(E^)^k = conj(E~)^k
    let weights: Vec<Complex64> = hat.values.iter().map(|h| (h * n).conj().powi(k as i32)).collect();
    space
        .field()
        .elements()
        .map(|t| {
            let s = sphere_hat(space, t);
            let v: Complex64 = s.iter().zip(&weights).map(|(a, b)| a * b).sum();
            round_count(t.index(), v)
        })
        .collect()
}

pub fn nu_profile(space: &Space, set: &PointSet, k: u32, method: NuMethod) -> Result<NuProfile> {
    if k < 2 {
        return Err(Error::BadOrder(k));
    }
    let counts = match method {
        NuMethod::Direct => nu_direct(space, set, k)?,
        NuMethod::Spectral => nu_spectral(space, set, k)?,
        NuMethod::Both => {
            let direct = nu_direct(space, set, k)?;
            let spectral = nu_spectral(space, set, k)?;
            if let Some(t) = (0..direct.len()).find(|&t| direct[t] != spectral[t]) {
                return Err(Error::MethodMismatch {
                    t: t as u32,
                    direct: direct[t],
                    spectral: spectral[t],
                });
            }
            direct
        }
    };
    Ok(NuProfile {
        k,
        counts,
        set_size: set.len(),
    })
}

/// `Delta_k(E)` with its two lower bounds.
#[derive(Clone, Debug, PartialEq)]
pub struct DeltaReport {
    pub k: u32,
    pub set_size: usize,
    pub members: Vec<Fq>,
    pub cardinality: usize,
    pub nu0: u64,
    /// `(|E|^k - nu_k(0))^2 / sum_{t != 0} nu_k(t)^2` (0 when both vanish).
    pub cauchy_schwarz_bound: f64,
    /// The Cauchy–Schwarz bound checked in exact integer arithmetic.
    pub cauchy_schwarz_holds: bool,
    /// `min(q, |E|^{k+1} / (q^{dk} max_{r != 0} sum_{v in S_r} |E^(v)|^k))`,
    /// valid only up to an unspecified constant.
    pub restriction_bound: f64,
    /// `cardinality / restriction_bound`.
    pub bound_ratio: f64,
}

fn big(v: u64) -> BigUint {
    BigUint::from(v)
}

pub fn delta_report(space: &Space, set: &PointSet, k: u32) -> Result<DeltaReport> {
    delta_report_with(space, set, k, NuMethod::Both)
}

pub fn delta_report_with(space: &Space, set: &PointSet, k: u32, method: NuMethod) -> Result<DeltaReport> {
    if set.is_empty() {
        return Err(Error::DegenerateSet);
    }
    let profile = nu_profile(space, set, k, method)?;
    delta_from_profile(space, set, &profile)
}

pub fn delta_from_profile(space: &Space, set: &PointSet, profile: &NuProfile) -> Result<DeltaReport> {
    if set.is_empty() {
        return Err(Error::DegenerateSet);
    }
    let k = profile.k;
    let total = check_count_budget(set.len(), k)?;
    let members = profile.support();
    let cardinality = members.len();
    let nu0 = profile.counts[0];

    let gap = big(total - nu0);
    let numerator = &gap * &gap;
    let denominator: BigUint = profile.counts[1..].iter().map(|&c| big(c) * big(c)).sum();
    let cauchy_schwarz_holds = BigUint::from(cardinality) * &denominator >= numerator;
    let cauchy_schwarz_bound = if denominator.is_zero() {
        0.0
    } else {
        numerator.to_f64().unwrap() / denominator.to_f64().unwrap()
    };

    let q = space.q() as f64;
    let moments = sphere_moment(space, set, k)?;
    let restriction_bound = if moments.max_nonzero > 0.0 {
        let dk = (space.d() as u32 * k) as i32;
        let rhs = (set.len() as f64).powi(k as i32 + 1) / (q.powi(dk) * moments.max_nonzero);
        rhs.min(q)
    } else {
        q
    };

    Ok(DeltaReport {
        k,
        set_size: set.len(),
        members,
        cardinality,
        nu0,
        cauchy_schwarz_bound,
        cauchy_schwarz_holds,
        restriction_bound,
        bound_ratio: cardinality as f64 / restriction_bound,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RecordKind {
    /// Pass iff `lhs <= rhs`.
    Inequality,
    /// Pass iff `lhs = rhs` within tolerance.
    Identity,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AuditRecord {
    pub name: String,
    pub kind: RecordKind,
    pub hypothesis_met: bool,
    pub lhs: f64,
    pub rhs: f64,
    /// `None` when the hypothesis fails and the check is skipped.
    pub pass: Option<bool>,
    pub slack_ratio: f64,
}

impl AuditRecord {
    fn new(name: &str, kind: RecordKind, hypothesis_met: bool, lhs: f64, rhs: f64, pass: bool) -> Self {
        AuditRecord {
            name: name.to_string(),
            kind,
            hypothesis_met,
            lhs,
            rhs,
            pass: hypothesis_met.then_some(pass),
            slack_ratio: if rhs != 0.0 { lhs / rhs } else { f64::NAN },
        }
    }

    pub fn failed(&self) -> bool {
        self.pass == Some(false)
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct AuditReport {
    pub records: Vec<AuditRecord>,
}

impl AuditReport {
    pub fn all_passed(&self) -> bool {
        self.records.iter().all(|r| !r.failed())
    }

    pub fn get(&self, name: &str) -> Option<&AuditRecord> {
        self.records.iter().find(|r| r.name == name)
    }
}

/// `q^{d/2} <= |E| * scale` in exact arithmetic, for even `d`.
fn at_least_half_power(space: &Space, size: usize, scale: u128) -> bool {
    let half = (space.q() as u128).pow(space.d() as u32 / 2);
    scale * half <= size as u128
}

/// Audits one `(E, k)`:
///
/// * `fourier_moment_j`, j = 2..5: `sum_m |E^(m)|^j <= |E|^{j-1} / q^{dj-d}`
/// * `nu_zero_identity` (even d): `nu_k(0) = q^{-1}|E|^k + q^{dk-d-1} G^d sum_m conj(E^(m))^k sum_{l != 0} chi(||m|| l)`
/// * `nu_l2_bound`: `sum_t nu_k(t)^2 <= q^{-1}|E|^{2k} + q^{2dk-d} sum_r |sum_{v in S_r} E^(v)^k|^2`
/// * `nu_zero_gap` (even d, `|E| >= 3 q^{d/2}`): `|E|^{2k} / 9 <= (|E|^k - nu_k(0))^2`
/// * `zero_sphere_energy` (even d, `|E| >= q^{d/2}`):
///   `q^{2dk-d} |sum_{m in S_0} E^(m)^k|^2 - nu_k(0)^2 <= 4 q^{-1} |E|^{2k}`
pub fn lemma_audit(space: &Space, set: &PointSet, k: u32, tol: Tolerance) -> Result<AuditReport> {
    if set.is_empty() {
        return Err(Error::DegenerateSet);
    }
    let profile = nu_profile(space, set, k, NuMethod::Direct)?;
    lemma_audit_with_profile(space, set, &profile, tol)
}

pub fn lemma_audit_with_profile(
    space: &Space,
    set: &PointSet,
    profile: &NuProfile,
    tol: Tolerance,
) -> Result<AuditReport> {
    let k = profile.k;
    let field = space.field();
    let (q, d) = (space.q() as f64, space.d() as i32);
    let size = set.len() as f64;
    let even = space.d().is_multiple_of(2);
    let hat = set_hat(space, set)?;
    let ki = k as i32;
    let mut records = Vec::new();

    for j in 2..=5 {
        let lhs: f64 = hat.values.iter().map(|v| v.norm().powi(j)).sum();
        let rhs = size.powi(j - 1) / q.powi(d * j - d);
        records.push(AuditRecord::new(
            &format!("fourier_moment_{j}"),
            RecordKind::Inequality,
            true,
            lhs,
            rhs,
            tol.leq(lhs, rhs),
        ));
    }

    let total = size.powi(ki);
    let nu0 = profile.counts[0] as f64;
    {
        // sum_{l != 0} chi(a l) depends only on a = ||m||.
        let inner: Vec<Complex64> = field
            .elements()
            .map(|a| field.nonzero().map(|l| field.chi(field.mul(a, l))).sum())
            .collect();
        let rhs = if even {
            let sum: Complex64 = hat
                .values
                .iter()
                .enumerate()
                .map(|(m, h)| h.conj().powi(ki) * inner[space.norm(m).index()])
                .sum();
            let g = field.gauss().powi(d);
            (total / q + g * sum * q.powi(d * ki - d - 1)).re
        } else {
            f64::NAN
        };
        records.push(AuditRecord::new(
            "nu_zero_identity",
            RecordKind::Identity,
            even,
            nu0,
            rhs,
            tol.identity(nu0, rhs, 1, total),
        ));
    }

    {
        let lhs: f64 = profile.counts.iter().map(|&c| (c as f64).powi(2)).sum();
        let shell: f64 = field
            .elements()
            .map(|r| {
                space
                    .spheres()
                    .members(r)
                    .iter()
                    .map(|&v| hat.values[v].powi(ki))
                    .sum::<Complex64>()
                    .norm_sqr()
            })
            .sum();
        let rhs = size.powi(2 * ki) / q + q.powi(2 * d * ki - d) * shell;
        records.push(AuditRecord::new(
            "nu_l2_bound",
            RecordKind::Inequality,
            true,
            lhs,
            rhs,
            tol.leq(lhs, rhs),
        ));
    }

    {
        let met = even && at_least_half_power(space, set.len(), 3);
        let total_int = check_count_budget(set.len(), k)?;
        let gap = big(total_int - profile.counts[0]);
        let exact = big(total_int) * big(total_int) <= BigUint::from(9u32) * &gap * &gap;
        let lhs = size.powi(2 * ki) / 9.0;
        let rhs = gap.to_f64().unwrap().powi(2);
        records.push(AuditRecord::new(
            "nu_zero_gap",
            RecordKind::Inequality,
            met,
            lhs,
            rhs,
            exact,
        ));
    }

    {
        let met = even && at_least_half_power(space, set.len(), 1);
        let s0: Complex64 = space
            .spheres()
            .members(Fq::ZERO)
            .iter()
            .map(|&m| hat.values[m].powi(ki))
            .sum();
        let lhs = q.powi(2 * d * ki - d) * s0.norm_sqr() - nu0 * nu0;
        let rhs = 4.0 * size.powi(2 * ki) / q;
        records.push(AuditRecord::new(
            "zero_sphere_energy",
            RecordKind::Inequality,
            met,
            lhs,
            rhs,
            tol.leq(lhs, rhs),
        ));
    }

    Ok(AuditReport { records })
}

/// Which size threshold for `|Delta_k(E)| >~ q` to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Threshold {
    /// `(d+1)/2 - 1/(6d+2)` for even `d >= 4` (k = 3 for d = 4, 6; k = 4 beyond),
    /// from the `L^p -> L^4` extension estimate.
    Extension,
    /// `(d+1)/2 - 1/(9d-18)` (plus epsilon) for even `d >= 8`, k = 3, from
    /// interpolating the `L^2` sphere-energy bound with the extension estimate.
    Interpolated,
}

/// Both written forms of a threshold exponent.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ThresholdForms {
    /// `(d+1)/2 - 1/(6d+2)` or `(d+1)/2 - 1/(9d-18)`.
    pub shifted: Rational64,
    /// `(3d^2+4d)/(6d+2)` or `(9d^2-9d-20)/(18d-36)`.
    pub closed: Rational64,
}

pub fn threshold_forms(d: i64, which: Threshold) -> Result<ThresholdForms> {
    let r = Rational64::new;
    let half = r(d + 1, 2);
    match which {
        Threshold::Extension => {
            if d < 4 || d % 2 != 0 {
                return Err(Error::BadDimension(format!("need even d >= 4, got {d}")));
            }
            Ok(ThresholdForms {
                shifted: half - r(1, 6 * d + 2),
                closed: r(3 * d * d + 4 * d, 6 * d + 2),
            })
        }
        Threshold::Interpolated => {
            if d < 8 || d % 2 != 0 {
                return Err(Error::BadDimension(format!("need even d >= 8, got {d}")));
            }
            Ok(ThresholdForms {
                shifted: half - r(1, 9 * d - 18),
                closed: r(9 * d * d - 9 * d - 20, 18 * d - 36),
            })
        }
    }
}

/// The threshold exponent as an exact rational; errors if the two written
/// forms disagree.
pub fn theorem_exponents(d: i64, which: Threshold) -> Result<Rational64> {
    let forms = threshold_forms(d, which)?;
    if forms.shifted != forms.closed {
        return Err(Error::BadDimension(format!(
            "threshold forms disagree at d = {d}: {} vs {}",
            forms.shifted, forms.closed
        )));
    }
    Ok(forms.closed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::make_field;
    use crate::lattice::build_set_str;

    fn space(p: u32, n: u32, d: usize) -> Space {
        Space::new(make_field(p, n).unwrap(), d).unwrap()
    }

    /// Enumerates every k-tuple.
    fn brute_nu(space: &Space, set: &PointSet, k: u32) -> Vec<u64> {
        let pts: Vec<usize> = set.iter().collect();
        let mut nu = vec![0u64; space.q()];
        let mut idx = vec![0usize; k as usize];
        loop {
            let s = idx.iter().fold(0, |acc, &i| space.add(acc, pts[i]));
            nu[space.norm(s).index()] += 1;
            let mut c = 0;
            loop {
                if c == idx.len() {
                    return nu;
                }
                idx[c] += 1;
                if idx[c] < pts.len() {
                    break;
                }
                idx[c] = 0;
                c += 1;
            }
        }
    }

    #[test]
    fn full_plane_profile() {
        let s = space(3, 1, 2);
        let e = build_set_str(&s, "full").unwrap();
        let nu = nu_profile(&s, &e, 2, NuMethod::Both).unwrap();
        assert_eq!(nu.counts, vec![9, 36, 36]);
        for k in 2..=4u32 {
            let nu = nu_profile(&s, &e, k, NuMethod::Both).unwrap();
            let scale = 9u64.pow(k - 1);
            let expect: Vec<u64> = s.spheres().sizes().iter().map(|&c| c as u64 * scale).collect();
            assert_eq!(nu.counts, expect);
        }
    }

    #[test]
    fn origin_profile() {
        let s = space(5, 1, 2);
        let e = build_set_str(&s, "explicit:0").unwrap();
        let nu = nu_profile(&s, &e, 3, NuMethod::Both).unwrap();
        assert_eq!(nu.counts, vec![1, 0, 0, 0, 0]);
    }

    #[test]
    fn matches_enumeration() {
        let s = space(3, 2, 2);
        for spec in ["random:size=6,seed=1", "random:size=11,seed=9", "subfield:p=3,s=2,d=2"] {
            let e = build_set_str(&s, spec).unwrap();
            for k in 2..=3 {
                let nu = nu_profile(&s, &e, k, NuMethod::Both).unwrap();
                assert_eq!(nu.counts, brute_nu(&s, &e, k), "{spec} k={k}");
            }
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let s = space(3, 1, 2);
        let e = build_set_str(&s, "full").unwrap();
        assert_eq!(nu_profile(&s, &e, 1, NuMethod::Direct).unwrap_err(), Error::BadOrder(1));
        let empty = build_set_str(&s, "explicit:").unwrap();
        assert_eq!(delta_report(&s, &empty, 2).unwrap_err(), Error::DegenerateSet);
        assert_eq!(
            check_count_budget(1 << 16, 4).unwrap_err(),
            Error::CountOverflow(1 << 16, 4)
        );
    }

    #[test]
    fn subfield_sharpness_example() {
        let s = space(3, 2, 2);
        let e = build_set_str(&s, "subfield:p=3,s=2,d=2").unwrap();
        for k in [2, 3] {
            let r = delta_report(&s, &e, k).unwrap();
            assert_eq!(r.cardinality, 3);
            assert!(r.cauchy_schwarz_holds);
        }
    }

    #[test]
    fn singleton_delta() {
        let s = space(5, 1, 3);
        let x0 = s.index(&[Fq(1), Fq(2), Fq(0)]);
        let e = PointSet::from_indices(s.size(), [x0], "one");
        for k in 2..=4u32 {
            let r = delta_report(&s, &e, k).unwrap();
            let kx = s.scale(s.field().prime_element(k), x0);
            assert_eq!(r.members, vec![s.norm(kx)]);
        }
    }

    #[test]
    fn random_lower_bound_holds() {
        let s = space(5, 1, 2);
        let e = build_set_str(&s, "random:size=8,seed=5").unwrap();
        let r = delta_report(&s, &e, 3).unwrap();
        assert!(r.cauchy_schwarz_holds);
        assert!(r.cardinality as f64 >= r.cauchy_schwarz_bound);
    }

    #[test]
    fn audit_full_plane() {
        let s = space(3, 1, 2);
        let e = build_set_str(&s, "full").unwrap();
        let a = lemma_audit(&s, &e, 2, Tolerance::default()).unwrap();
        let l2 = a.get("nu_l2_bound").unwrap();
        // lhs = 81 * (1 + 16 + 16), rhs = 3^7 + 3^6
        assert_eq!(l2.lhs, 2673.0);
        assert!((l2.rhs - 2916.0).abs() < 1e-6);
        assert_eq!(l2.pass, Some(true));
        let gap = a.get("nu_zero_gap").unwrap();
        assert!(gap.hypothesis_met);
        assert_eq!((gap.lhs, gap.rhs), (729.0, 5184.0));
        assert!(a.all_passed());
    }

    #[test]
    fn audit_skips_small_sets() {
        let s = space(5, 1, 2);
        let e = build_set_str(&s, "random:size=4,seed=2").unwrap();
        let a = lemma_audit(&s, &e, 2, Tolerance::default()).unwrap();
        let r = a.get("zero_sphere_energy").unwrap();
        assert!(!r.hypothesis_met);
        assert_eq!(r.pass, None);
    }

    #[test]
    fn threshold_examples() {
        let r = Rational64::new;
        assert_eq!(theorem_exponents(4, Threshold::Extension).unwrap(), r(32, 13));
        assert_eq!(theorem_exponents(6, Threshold::Extension).unwrap(), r(66, 19));
        assert_eq!(theorem_exponents(8, Threshold::Interpolated).unwrap(), r(121, 27));
        assert_eq!(r(121, 27), r(9, 2) - r(1, 54));
        assert!(theorem_exponents(6, Threshold::Interpolated).is_err());
        assert!(theorem_exponents(5, Threshold::Extension).is_err());
    }
}
