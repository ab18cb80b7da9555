//! Fans grid points out to a worker pool and assembles the report in
//! configuration order.

use std::str::FromStr;

use fqharm::lattice::{build_set, default_corpus, PointSet, SetSpec};
use fqharm::restriction::RestrictionBound;
use fqharm::tolerance::Tolerance;
use rayon::prelude::*;

use crate::checks::{self, Outcome, Point, SetContext};
use crate::config::{Check, ConfigInvalid, ExperimentConfig, GridPoint};
use crate::report::{Provenance, Report, ReportRow, SCHEMA_VERSION};

pub fn run(config: &ExperimentConfig) -> Result<Report, ConfigInvalid> {
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads)
        .build()
        .map_err(|e| ConfigInvalid {
            problems: vec![format!("threads: {e}")],
        })?;
    let (grid_rows, sharp_rows) = pool.install(|| {
        let grid: Vec<Vec<ReportRow>> = config.grid.par_iter().map(|&g| run_point(config, g)).collect();
        let sharp: Vec<ReportRow> = if config.has(Check::Sharpness) {
            config.sharpness.par_iter().map(|&c| checks::sharpness(c)).collect()
        } else {
            Vec::new()
        };
        (grid, sharp)
    });
    let rows = grid_rows.into_iter().flatten().chain(sharp_rows).collect();
    Ok(Report {
        provenance: Provenance {
            schema: SCHEMA_VERSION,
            library: "fqharm".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            tolerance: config.tolerance,
            seeds: config.seeds.clone(),
            config: config.clone(),
        },
        rows,
    })
}

fn master_seed(config: &ExperimentConfig) -> u64 {
    config.seeds.first().copied().unwrap_or(0)
}

/// Corpus sets followed by the configured extra specs, empty sets dropped.
pub fn point_sets(point: &Point, config: &ExperimentConfig) -> Vec<PointSet> {
    let mut specs = if config.corpus {
        default_corpus(&point.space, &config.seeds)
    } else {
        Vec::new()
    };
    specs.extend(
        config
            .set_specs
            .iter()
            .map(|s| SetSpec::from_str(s).expect("validated")),
    );
    specs
        .iter()
        .filter_map(|spec| build_set(&point.space, spec).ok())
        .filter(|set| !set.is_empty())
        .collect()
}

pub fn run_point(config: &ExperimentConfig, grid: GridPoint) -> Vec<ReportRow> {
    let tol = Tolerance(config.tolerance);
    let point = match Point::new(grid, tol, config.timing) {
        Ok(p) => p,
        Err(e) => {
            return vec![ReportRow {
                schema: SCHEMA_VERSION,
                p: grid.p,
                n: grid.n,
                q: 0,
                d: grid.d,
                k: None,
                set: "-".into(),
                check: "grid_point".into(),
                hypothesis_met: true,
                lhs: f64::NAN,
                rhs: f64::NAN,
                status: crate::report::Status::Error,
                ratio: f64::NAN,
                seconds: 0.0,
                note: format!("{}: {e}", e.kind()),
            }]
        }
    };
    let seed = master_seed(config);
    let space = &point.space;
    let mut rows = Vec::new();

    if config.has(Check::Identities) {
        rows.extend(point.rows("-", || {
            let mut out = checks::field_identities(space.field(), tol);
            out.extend(checks::sphere_table(space));
            out.push(checks::sphere_closed_form(space, tol, seed));
            out.push(checks::dual_sum(space, tol, seed));
            out.extend(checks::transform_identities(space, tol, seed));
            out.extend(checks::exponent_identities(space.d()));
            out
        }));
    }
    if config.has(Check::ExtensionConstant) {
        rows.extend(point.rows("-", || checks::extension_rows(&point, config.extension_trials, seed)));
    }
    if config.has(Check::Holder) && (space.d() < 8 || space.d() % 2 == 1) {
        rows.extend(point.rows("-", || vec![Outcome::skipped("holder", "needs even d >= 8")]));
    }

    for set in point_sets(&point, config) {
        let ctx = SetContext {
            point: &point,
            set: &set,
        };
        let label = set.label();
        for &k in &config.k_values {
            if config.has(Check::LowerBound) || config.has(Check::LemmaAudit) {
                let start = std::time::Instant::now();
                let profile = ctx.profile(k);
                let profile_secs = start.elapsed().as_secs_f64();
                if config.has(Check::LowerBound) {
                    let mut r = point.rows(label, || ctx.lower_bound(k, &profile));
                    if config.timing {
                        r[0].seconds += profile_secs;
                    }
                    rows.extend(r);
                }
                if config.has(Check::LemmaAudit) {
                    rows.extend(point.rows(label, || ctx.lemma_audit(k, &profile)));
                }
            }
            if config.has(Check::Moments) {
                rows.extend(point.rows(label, || ctx.moments(k)));
            }
            if config.has(Check::RestrictionExtension) {
                rows.extend(point.rows(label, || vec![ctx.restriction(k, RestrictionBound::Extension)]));
            }
            if config.has(Check::SignSweep) {
                rows.extend(point.rows(label, || vec![ctx.sign_sweep(k)]));
            }
        }
        if config.has(Check::RestrictionInterpolated) {
            rows.extend(point.rows(label, || vec![ctx.restriction(3, RestrictionBound::Interpolated)]));
        }
        if config.has(Check::SphereEnergy) {
            rows.extend(point.rows(label, || ctx.sphere_energy()));
        }
        if config.has(Check::Holder) && space.d() >= 8 && space.d() % 2 == 0 {
            rows.extend(point.rows(label, || ctx.holder()));
        }
    }
    rows
}
