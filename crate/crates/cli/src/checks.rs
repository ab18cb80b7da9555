//! Individual checks, each producing report rows.

use std::time::Instant;

use fqharm::field::{make_field, Field};
use fqharm::lattice::{build_set_str, PointSet, Space};
use fqharm::magnitude::{
    delta_from_profile, lemma_audit_with_profile, nu_profile, signed_sum_counts, theorem_exponents, NuMethod,
    NuProfile, Threshold,
};
use fqharm::restriction::{
    extension_constant, holder_chain, holder_theta, l2_sphere_energy, restriction_exponents, restriction_ratio,
    sphere_moment, RestrictionBound,
};
use fqharm::spectral::{dual_sum_identity, fourier, fourier_naive, sphere_hat, sphere_hat_closed, TransformMode};
use fqharm::tolerance::Tolerance;
use fqharm::{Error, Fq};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{GridPoint, SharpnessCase};
use crate::report::{ReportRow, Status, SCHEMA_VERSION};

/// Samples drawn when an exhaustive sweep is too large.
pub const SAMPLES: usize = 1000;
/// Largest `q^d` for which the naive transform is compared.
pub const NAIVE_LIMIT: usize = 10_000;

/// A measured value before it becomes a row.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub check: String,
    pub k: Option<u32>,
    pub hypothesis_met: bool,
    pub lhs: f64,
    pub rhs: f64,
    pub status: Status,
    pub ratio: f64,
    pub note: String,
}

impl Outcome {
    pub fn new(check: &str, lhs: f64, rhs: f64, status: Status) -> Self {
        Outcome {
            check: check.to_string(),
            k: None,
            hypothesis_met: true,
            lhs,
            rhs,
            status,
            ratio: ratio(lhs, rhs),
            note: String::new(),
        }
    }

    /// `lhs <= rhs` style check that passed or failed.
    pub fn judged(check: &str, lhs: f64, rhs: f64, pass: bool) -> Self {
        Self::new(check, lhs, rhs, Status::from_pass(pass))
    }

    pub fn tracked(check: &str, lhs: f64, rhs: f64) -> Self {
        Self::new(check, lhs, rhs, Status::Tracked)
    }

    pub fn skipped(check: &str, reason: impl Into<String>) -> Self {
        Outcome {
            hypothesis_met: false,
            ratio: f64::NAN,
            note: reason.into(),
            ..Self::new(check, f64::NAN, f64::NAN, Status::Skipped)
        }
    }

    pub fn error(check: &str, err: &Error) -> Self {
        let status = match err {
            Error::HypothesisFail(_) | Error::BadDimension(_) => Status::Skipped,
            _ => Status::Error,
        };
        Outcome {
            hypothesis_met: status != Status::Skipped,
            ratio: f64::NAN,
            note: format!("{}: {err}", err.kind()),
            ..Self::new(check, f64::NAN, f64::NAN, status)
        }
    }

    pub fn with_k(mut self, k: u32) -> Self {
        self.k = Some(k);
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }

    pub fn with_hypothesis(mut self, met: bool) -> Self {
        self.hypothesis_met = met;
        if !met && self.status == Status::Tracked {
            self.status = Status::Skipped;
            self.ratio = f64::NAN;
        }
        self
    }
}

fn ratio(lhs: f64, rhs: f64) -> f64 {
    if rhs != 0.0 {
        lhs / rhs
    } else if lhs == 0.0 {
        1.0
    } else {
        f64::INFINITY
    }
}

/// One grid point with its space and tolerance.
pub struct Point {
    pub grid: GridPoint,
    pub space: Space,
    pub tol: Tolerance,
    pub timing: bool,
}

impl Point {
    pub fn new(grid: GridPoint, tol: Tolerance, timing: bool) -> fqharm::Result<Self> {
        let space = Space::new(make_field(grid.p, grid.n)?, grid.d)?;
        Ok(Point {
            grid,
            space,
            tol,
            timing,
        })
    }

    pub fn row(&self, set: &str, o: Outcome, seconds: f64) -> ReportRow {
        ReportRow {
            schema: SCHEMA_VERSION,
            p: self.grid.p,
            n: self.grid.n,
            q: self.space.q() as u32,
            d: self.grid.d,
            k: o.k,
            set: set.to_string(),
            check: o.check,
            hypothesis_met: o.hypothesis_met,
            lhs: o.lhs,
            rhs: o.rhs,
            status: o.status,
            ratio: o.ratio,
            seconds,
            note: o.note,
        }
    }

    /// Runs `f` and turns its outcomes into rows; the elapsed time is split
    /// evenly across them when timing is on.
    pub fn rows(&self, set: &str, f: impl FnOnce() -> Vec<Outcome>) -> Vec<ReportRow> {
        let start = Instant::now();
        let outcomes = f();
        let seconds = if self.timing && !outcomes.is_empty() {
            start.elapsed().as_secs_f64() / outcomes.len() as f64
        } else {
            0.0
        };
        outcomes.into_iter().map(|o| self.row(set, o, seconds)).collect()
    }

    fn nonzero_radii(&self) -> Vec<Fq> {
        self.space.field().nonzero().collect()
    }
}

/// Field axioms (q <= 49), character orthogonality, Gauss sums and the
/// Kloosterman bound.
pub fn field_identities(field: &Field, tol: Tolerance) -> Vec<Outcome> {
    let q = field.q() as f64;
    let all: Vec<Fq> = field.elements().collect();
    let mut out = Vec::new();

    if field.q() <= 49 {
        let mut violations = 0u64;
        for &a in &all {
            let inv_ok = match field.inv(a) {
                Some(i) => !a.is_zero() && field.mul(a, i) == Fq::ONE,
                None => a.is_zero(),
            };
            violations += (!inv_ok) as u64;
            violations += (field.add(a, field.neg(a)) != Fq::ZERO) as u64;
            violations += (field.add(a, Fq::ZERO) != a || field.mul(a, Fq::ONE) != a) as u64;
            for &b in &all {
                violations += (field.add(a, b) != field.add(b, a) || field.mul(a, b) != field.mul(b, a)) as u64;
                for &c in &all {
                    violations += (field.add(field.add(a, b), c) != field.add(a, field.add(b, c))) as u64;
                    violations += (field.mul(field.mul(a, b), c) != field.mul(a, field.mul(b, c))) as u64;
                    violations += (field.mul(a, field.add(b, c)) != field.add(field.mul(a, b), field.mul(a, c))) as u64;
                }
            }
        }
        out.push(Outcome::judged("field_axioms", violations as f64, 0.0, violations == 0));
    } else {
        out.push(Outcome::skipped(
            "field_axioms",
            "exhaustive axioms run only for q <= 49",
        ));
    }

    let mut worst = 0.0f64;
    for twist in field.nonzero() {
        let s: Complex64 = all.iter().map(|&a| field.chi(field.mul(twist, a))).sum();
        worst = worst.max(s.norm());
    }
    let trivial: Complex64 = all.iter().map(|_| field.chi(Fq::ZERO)).sum();
    let budget = tol.budget(all.len());
    out.push(Outcome::judged(
        "character_orthogonality",
        worst,
        budget,
        worst <= budget && (trivial.re - q).abs() <= budget,
    ));

    let g = field.gauss();
    let modulus = (g * g.conj()).re;
    out.push(Outcome::judged(
        "gauss_modulus",
        modulus,
        q,
        tol.identity(modulus, q, all.len(), 1.0),
    ));
    let eta_m1 = field.eta(field.neg(Fq::ONE)) as f64;
    let sq = g * g;
    out.push(
        Outcome::judged(
            "gauss_square",
            sq.re,
            eta_m1 * q,
            (sq - Complex64::new(eta_m1 * q, 0.0)).norm() <= tol.budget(all.len()),
        )
        .with_note(format!("imaginary part {}", sq.im)),
    );

    let mut kmax = 0.0f64;
    for a in field.nonzero() {
        for b in field.nonzero() {
            kmax = kmax.max(field.kloosterman(a, b).norm());
        }
    }
    let bound = 2.0 * q.sqrt();
    out.push(Outcome::judged("kloosterman_bound", kmax, bound, tol.leq(kmax, bound)));
    out
}

/// Sphere partition, symmetry, surjectivity and size deviation.
pub fn sphere_table(space: &Space) -> Vec<Outcome> {
    let (q, d) = (space.q() as i128, space.d() as u32);
    let sp = space.spheres();
    let mut asym = 0u64;
    for t in space.field().elements() {
        for &x in sp.members(t) {
            asym += (space.norm(space.neg(x)) != t) as u64;
        }
    }
    let total: usize = sp.sizes().iter().sum();
    let empty = space.field().elements().filter(|&t| sp.size(t) == 0).count();
    let mut out = vec![
        Outcome::judged(
            "sphere_partition",
            total as f64,
            space.size() as f64,
            total == space.size(),
        ),
        Outcome::judged("sphere_symmetry", asym as f64, 0.0, asym == 0),
    ];
    if d >= 2 {
        out.push(Outcome::judged("sphere_surjectivity", empty as f64, 0.0, empty == 0));
    }
    let mean = q.pow(d - 1);
    let (dev, bound, pass) = if d % 2 == 0 {
        let dev = space
            .field()
            .elements()
            .map(|t| (sp.size(t) as i128 - mean).abs())
            .max()
            .unwrap();
        let bound = q.pow(d / 2);
        (dev, bound, dev < bound)
    } else {
        let dev = space
            .field()
            .nonzero()
            .map(|t| (sp.size(t) as i128 - mean).abs())
            .max()
            .unwrap_or(0);
        let bound = q.pow((d - 1) / 2);
        (dev, bound, dev <= bound)
    };
    out.push(Outcome::judged("sphere_size_deviation", dev as f64, bound as f64, pass));
    out
}

/// Closed-form sphere transform against the direct transform; every `(t, m)`
/// for `d <= 4`, sampled above.
pub fn sphere_closed_form(space: &Space, tol: Tolerance, seed: u64) -> Outcome {
    if space.d() % 2 == 1 {
        return Outcome::skipped("sphere_closed_form", "closed form is stated for even d");
    }
    let pairs: Vec<(Fq, usize)> = if space.d() <= 4 {
        space
            .field()
            .elements()
            .flat_map(|t| (0..space.size()).map(move |m| (t, m)))
            .collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..SAMPLES)
            .map(|_| {
                (
                    Fq(rng.random_range(0..space.q() as u32)),
                    rng.random_range(0..space.size()),
                )
            })
            .collect()
    };
    let mut worst = 0.0f64;
    for &(t, m) in &pairs {
        let closed = sphere_hat_closed(space, t, m).expect("even dimension");
        worst = worst.max((closed - sphere_hat(space, t)[m]).norm());
    }
    let budget = tol.value() * space.q() as f64;
    Outcome::judged("sphere_closed_form", worst, budget, worst < budget).with_note(format!("{} points", pairs.len()))
}

/// Dual-sum identity at every pair when `q^d <= 81`, sampled above.
pub fn dual_sum(space: &Space, tol: Tolerance, seed: u64) -> Outcome {
    let n = space.size();
    let pairs: Vec<(usize, usize)> = if n <= 81 {
        (0..n).flat_map(|m| (0..n).map(move |v| (m, v))).collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..SAMPLES)
            .map(|_| (rng.random_range(0..n), rng.random_range(0..n)))
            .collect()
    };
    let mut worst = 0.0f64;
    for &(m, v) in &pairs {
        let (lhs, rhs) = dual_sum_identity(space, m, v);
        worst = worst.max((lhs - rhs).norm());
    }
    let budget = tol.value() * space.q() as f64;
    Outcome::judged("dual_sum", worst, budget, worst < budget).with_note(format!("{} pairs", pairs.len()))
}

/// Fast transform against the naive double sum, plus Plancherel and
/// inversion, on a seeded random table.
pub fn transform_identities(space: &Space, tol: Tolerance, seed: u64) -> Vec<Outcome> {
    let n = space.size();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let f: Vec<Complex64> = (0..n)
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    let hat = fourier(space, &f, TransformMode::Hat).expect("length matches");
    let back = fourier(space, &hat.values, TransformMode::Inverse).expect("length matches");
    let inv_err = f
        .iter()
        .zip(&back.values)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    let energy: f64 = f.iter().map(|v| v.norm_sqr()).sum();
    let spectral = hat.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * n as f64;
    let budget = tol.budget(n);
    let mut out = vec![
        Outcome::judged("fourier_inversion", inv_err, budget, inv_err <= budget),
        Outcome::judged("plancherel", spectral, energy, tol.identity(spectral, energy, n, 1.0)),
    ];
    if n <= NAIVE_LIMIT {
        let slow = fourier_naive(space, &f, TransformMode::Hat).expect("length matches");
        let err = hat
            .values
            .iter()
            .zip(&slow.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        out.push(Outcome::judged("fast_transform", err, budget, err <= budget));
    } else {
        out.push(Outcome::skipped(
            "fast_transform",
            "naive comparison limited to q^d <= 10^4",
        ));
    }
    out
}

/// Exact agreement of the two written threshold forms and, for `d >= 8`,
/// the interpolation exponent identity.
pub fn exponent_identities(d: usize) -> Vec<Outcome> {
    let d = d as i64;
    let mut out = Vec::new();
    for (name, which) in [
        ("threshold_extension", Threshold::Extension),
        ("threshold_interpolated", Threshold::Interpolated),
    ] {
        out.push(match theorem_exponents(d, which) {
            Ok(v) => {
                let x = *v.numer() as f64 / *v.denom() as f64;
                Outcome::judged(name, x, x, true).with_note(v.to_string())
            }
            Err(e) => Outcome::error(name, &e),
        });
    }
    out.push(match holder_theta(d) {
        Ok((theta, holds)) => {
            let x = *theta.numer() as f64 / *theta.denom() as f64;
            Outcome::judged("holder_exponents", x, x, holds).with_note(format!("theta = {theta}"))
        }
        Err(e) => Outcome::error("holder_exponents", &e),
    });
    out
}

/// Counts, lower bounds and lemma audits for one `(E, k)` from one profile.
pub struct SetContext<'a> {
    pub point: &'a Point,
    pub set: &'a PointSet,
}

impl SetContext<'_> {
    pub fn profile(&self, k: u32) -> Result<NuProfile, Error> {
        nu_profile(&self.point.space, self.set, k, NuMethod::Both)
    }

    pub fn lower_bound(&self, k: u32, profile: &Result<NuProfile, Error>) -> Vec<Outcome> {
        let space = &self.point.space;
        let profile = match profile {
            Ok(p) => p,
            Err(e) => {
                let check = if matches!(e, Error::MethodMismatch { .. }) {
                    Outcome::judged("nu_methods", f64::NAN, f64::NAN, false).with_note(format!("{}: {e}", e.kind()))
                } else {
                    Outcome::error("nu_methods", e)
                };
                return vec![check.with_k(k)];
            }
        };
        let expected = (self.set.len() as u128).pow(k);
        let mut out = vec![Outcome::judged(
            "nu_methods",
            profile.total() as f64,
            expected as f64,
            profile.total() == expected,
        )
        .with_k(k)];
        match delta_from_profile(space, self.set, profile) {
            Ok(r) => {
                out.push(
                    Outcome::judged(
                        "lower_bound",
                        r.cardinality as f64,
                        r.cauchy_schwarz_bound,
                        r.cauchy_schwarz_holds,
                    )
                    .with_k(k),
                );
                out.push(
                    Outcome::tracked("restriction_lower_bound", r.cardinality as f64, r.restriction_bound).with_k(k),
                );
            }
            Err(e) => out.push(Outcome::error("lower_bound", &e).with_k(k)),
        }
        out
    }

    pub fn lemma_audit(&self, k: u32, profile: &Result<NuProfile, Error>) -> Vec<Outcome> {
        let profile = match profile {
            Ok(p) => p,
            Err(e) => return vec![Outcome::error("lemma_audit", e).with_k(k)],
        };
        match lemma_audit_with_profile(&self.point.space, self.set, profile, self.point.tol) {
            Ok(report) => report
                .records
                .into_iter()
                .map(|r| {
                    let o = match r.pass {
                        Some(pass) => Outcome::judged(&r.name, r.lhs, r.rhs, pass),
                        None => Outcome {
                            lhs: r.lhs,
                            rhs: r.rhs,
                            ..Outcome::skipped(&r.name, "hypothesis not met")
                        },
                    };
                    o.with_k(k)
                })
                .collect(),
            Err(e) => vec![Outcome::error("lemma_audit", &e).with_k(k)],
        }
    }

    pub fn moments(&self, k: u32) -> Vec<Outcome> {
        match sphere_moment(&self.point.space, self.set, k) {
            Ok(m) => {
                let (a, b) = (m.shell_sum(), m.total);
                let pass = (a - b).abs() <= self.point.tol.value() * a.abs().max(b.abs()).max(1.0);
                vec![Outcome::judged("moment_columns", a, b, pass)
                    .with_k(k)
                    .with_note(format!("max over t != 0 at t = {}: {}", m.argmax.0, m.max_nonzero))]
            }
            Err(e) => vec![Outcome::error("moment_columns", &e).with_k(k)],
        }
    }

    pub fn restriction(&self, k: u32, which: RestrictionBound) -> Outcome {
        let space = &self.point.space;
        if let Err(e) = restriction_exponents(space.d() as i64, k as i64, which) {
            return Outcome::skipped(which.name(), format!("{}: {e}", e.kind())).with_k(k);
        }
        match restriction_ratio(space, self.set, k, which) {
            Ok(r) => {
                let o = Outcome::tracked(which.name(), r.measured_lhs, r.bound_rhs).with_k(k);
                match r.log_slack {
                    Some(s) => o.with_note(format!("log_slack {s}")),
                    None => o,
                }
            }
            Err(e) => Outcome::error(which.name(), &e).with_k(k),
        }
    }

    pub fn sphere_energy(&self) -> Vec<Outcome> {
        let mut out = Vec::new();
        for t in self.point.nonzero_radii() {
            let note = format!("t={}", t.0);
            match l2_sphere_energy(&self.point.space, self.set, t, self.point.tol) {
                Ok(r) => {
                    let met = r.report.hypothesis_met;
                    out.push(
                        Outcome::tracked("sphere_energy", r.report.measured_lhs, r.report.bound_rhs)
                            .with_hypothesis(met)
                            .with_note(note.clone()),
                    );
                    out.push(
                        Outcome::tracked("sphere_energy_sigma", r.sigma_norm, r.sigma_bound)
                            .with_hypothesis(met)
                            .with_note(note.clone()),
                    );
                    out.push(
                        Outcome::judged(
                            "sphere_energy_expansion",
                            r.report.measured_lhs,
                            r.expansion,
                            r.expansion_holds,
                        )
                        .with_note(note),
                    );
                }
                Err(e) => out.push(Outcome::error("sphere_energy", &e).with_note(note)),
            }
        }
        out
    }

    pub fn holder(&self) -> Vec<Outcome> {
        self.point
            .nonzero_radii()
            .into_iter()
            .map(|t| {
                let note = format!("t={}", t.0);
                match holder_chain(&self.point.space, self.set, t, self.point.tol) {
                    Ok(r) => Outcome::judged("holder", r.norm3, r.interpolated, r.pass).with_note(note),
                    Err(e) => Outcome::error("holder", &e).with_note(note),
                }
            })
            .collect()
    }

    /// `|Delta_k|` for every sign pattern with a leading `+` (flipping all
    /// signs preserves norms).
    pub fn sign_sweep(&self, k: u32) -> Outcome {
        let space = &self.point.space;
        let mut sizes = Vec::new();
        for mask in 0..1u32 << (k - 1) {
            let signs: Vec<bool> = (0..k).map(|i| i == 0 || mask & (1 << (i - 1)) == 0).collect();
            match signed_sum_counts(space, self.set, &signs) {
                Ok(counts) => {
                    let mut hit = vec![false; space.q()];
                    for (y, &c) in counts.iter().enumerate() {
                        if c > 0 {
                            hit[space.norm(y).index()] = true;
                        }
                    }
                    sizes.push(hit.iter().filter(|&&h| h).count());
                }
                Err(e) => return Outcome::error("sign_sweep", &e).with_k(k),
            }
        }
        let (lo, hi) = (*sizes.iter().min().unwrap(), *sizes.iter().max().unwrap());
        Outcome::tracked("sign_sweep", lo as f64, hi as f64)
            .with_k(k)
            .with_note(format!("{} patterns", sizes.len()))
    }
}

/// Empirical extension constants for every nonzero radius.
pub fn extension_rows(point: &Point, trials: usize, seed: u64) -> Vec<Outcome> {
    let d = point.space.d();
    if d < 4 || d % 2 == 1 {
        return vec![Outcome::skipped("extension_constant", "needs even d >= 4")];
    }
    point
        .nonzero_radii()
        .into_iter()
        .map(|t| {
            let note = format!("t={}", t.0);
            match extension_constant(&point.space, t, trials, seed) {
                Ok(r) => Outcome::tracked("extension_constant", r.report.measured_lhs, r.report.bound_rhs).with_note(
                    format!(
                        "{note}, {trials} trials, log_slack {}",
                        r.report.log_slack.unwrap_or(f64::NAN)
                    ),
                ),
                Err(e) => Outcome::error("extension_constant", &e).with_note(note),
            }
        })
        .collect()
}

/// `E = F_p^d` inside `F_{p^2}^d` has `|E| = q^{d/2}` and `|Delta_k(E)| = p`.
pub fn sharpness(case: SharpnessCase) -> ReportRow {
    let SharpnessCase { p, d, k } = case;
    let label = format!("subfield:p={p},s=2,d={d}");
    let mut row = ReportRow {
        schema: SCHEMA_VERSION,
        p,
        n: 2,
        q: p * p,
        d,
        k: Some(k),
        set: label.clone(),
        check: "sharpness".into(),
        hypothesis_met: true,
        lhs: f64::NAN,
        rhs: p as f64,
        status: Status::Error,
        ratio: f64::NAN,
        seconds: 0.0,
        note: String::new(),
    };
    let result = (|| -> fqharm::Result<(usize, usize)> {
        let space = Space::new(make_field(p, 2)?, d)?;
        let set = build_set_str(&space, &label)?;
        let profile = nu_profile(&space, &set, k, NuMethod::Both)?;
        let report = delta_from_profile(&space, &set, &profile)?;
        Ok((set.len(), report.cardinality))
    })();
    match result {
        Ok((size, card)) => {
            let expected_size = (p as usize).pow(d as u32);
            row.lhs = card as f64;
            row.ratio = ratio(card as f64, p as f64);
            row.status = Status::from_pass(card == p as usize && size == expected_size);
            row.note = format!("|E| = {size}, expected {expected_size}");
        }
        Err(e) => row.note = format!("{}: {e}", e.kind()),
    }
    row
}
