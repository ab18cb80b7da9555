use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fqharm::lattice::{build_set_str, Space};
use fqharm::magnitude::{delta_report_with, nu_profile, NuMethod};
use fqharm::make_field;
use fqharm_cli::{run, Check, ExperimentConfig, GridPoint, Report, SharpnessCase};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "fqharm", version, about = "Harmonic analysis experiments on F_q^d")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Method {
    Direct,
    Spectral,
    Both,
}

impl From<Method> for NuMethod {
    fn from(m: Method) -> Self {
        match m {
            Method::Direct => NuMethod::Direct,
            Method::Spectral => NuMethod::Spectral,
            Method::Both => NuMethod::Both,
        }
    }
}

#[derive(Args, Clone)]
struct Common {
    #[arg(long)]
    p: u32,
    #[arg(long, default_value_t = 1)]
    n: u32,
    #[arg(long)]
    d: usize,
    #[arg(long, default_value_t = 2)]
    k: u32,
    /// Point-set generator, e.g. `random:size=10,seed=42`.
    #[arg(long = "set", default_value = "full")]
    set_spec: String,
    #[arg(long, default_value_t = fqharm::tolerance::DEFAULT_TOLERANCE)]
    tolerance: f64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment grid and write CSV and JSON reports.
    Run {
        /// Built-in configuration (`acceptance`).
        #[arg(long)]
        preset: Option<String>,
        /// TOML configuration file.
        #[arg(long, conflicts_with = "preset")]
        config: Option<PathBuf>,
        /// Directory for `report.csv` and `report.json`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Report printed to stdout when no output path is set.
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        /// Replace the configured seeds.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        tolerance: Option<f64>,
        #[arg(long)]
        threads: Option<usize>,
        /// Record wall time per row (reports are then not reproducible).
        #[arg(long)]
        timing: bool,
        /// Print the resolved configuration as TOML and exit.
        #[arg(long)]
        dump_config: bool,
    },
    /// Subfield sharpness example for `F_p^d` inside `F_{p^2}^d`.
    Sharpness {
        #[arg(long)]
        p: u32,
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 2)]
        k: u32,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// The counting profile nu_k(t) of a set.
    Nu {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = Method::Both)]
        method: Method,
    },
    /// Delta_k(E) with its lower bounds.
    Delta {
        #[command(flatten)]
        common: Common,
    },
    /// Implied-constant scan over the corpus (or one set) at one grid point.
    Scan {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Use the generated corpus instead of `--set`.
        #[arg(long)]
        corpus: bool,
    },
}

fn fail(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(2)
}

fn emit(out: Option<&Path>, text: &str) -> io::Result<()> {
    match out {
        Some(path) => fs::write(path, text),
        None => io::stdout().write_all(text.as_bytes()),
    }
}

fn render<T: Serialize>(rows: &[T], format: Format) -> Result<String, String> {
    match format {
        Format::Json => serde_json::to_string_pretty(rows)
            .map(|s| s + "\n")
            .map_err(|e| e.to_string()),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for r in rows {
                w.serialize(r).map_err(|e| e.to_string())?;
            }
            String::from_utf8(w.into_inner().map_err(|e| e.to_string())?).map_err(|e| e.to_string())
        }
    }
}

fn write_report(report: &Report, out: Option<&Path>, format: Format) -> io::Result<()> {
    let csv = report.to_csv();
    let json = report.to_json() + "\n";
    let config = &report.provenance.config;
    match out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            fs::write(dir.join("report.csv"), csv)?;
            fs::write(dir.join("report.json"), json)
        }
        None if config.output.csv.is_some() || config.output.json.is_some() => {
            if let Some(p) = &config.output.csv {
                fs::write(p, &csv)?;
            }
            if let Some(p) = &config.output.json {
                fs::write(p, &json)?;
            }
            Ok(())
        }
        None => emit(
            None,
            match format {
                Format::Csv => &csv,
                Format::Json => &json,
            },
        ),
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_run(
    preset: Option<String>,
    config: Option<PathBuf>,
    out: Option<PathBuf>,
    format: Format,
    seed: Option<u64>,
    tolerance: Option<f64>,
    threads: Option<usize>,
    timing: bool,
    dump_config: bool,
) -> ExitCode {
    let mut cfg = match (preset, config) {
        (Some(name), _) => match ExperimentConfig::preset(&name) {
            Some(c) => c,
            None => return fail(format!("unknown preset `{name}` (known: acceptance)")),
        },
        (None, Some(path)) => match fs::read_to_string(&path) {
            Ok(text) => match ExperimentConfig::from_toml(&text) {
                Ok(c) => c,
                Err(e) => return fail(e),
            },
            Err(e) => return fail(format!("{}: {e}", path.display())),
        },
        (None, None) => return fail("run needs --preset or --config"),
    };
    if let Some(s) = seed {
        cfg.seeds = vec![s];
    }
    if let Some(t) = tolerance {
        cfg.tolerance = t;
    }
    if let Some(t) = threads {
        cfg.threads = t;
    }
    cfg.timing |= timing;
    if dump_config {
        print!("{}", cfg.to_toml());
        return ExitCode::SUCCESS;
    }
    let report = match run(&cfg) {
        Ok(r) => r,
        Err(e) => return fail(e),
    };
    if let Err(e) = write_report(&report, out.as_deref(), format) {
        return fail(e);
    }
    eprintln!("{}", report.summary());
    for row in report.failures().take(20) {
        eprintln!(
            "FAILED q={} d={} k={:?} {} {}: lhs={} rhs={} {}",
            row.q, row.d, row.k, row.set, row.check, row.lhs, row.rhs, row.note
        );
    }
    ExitCode::from(report.exit_code() as u8)
}

fn space_and_set(c: &Common) -> Result<(Space, fqharm::PointSet), fqharm::Error> {
    let space = Space::new(make_field(c.p, c.n)?, c.d)?;
    let set = build_set_str(&space, &c.set_spec)?;
    Ok((space, set))
}

#[derive(Serialize)]
struct NuRow {
    t: u32,
    nu: u64,
}

#[derive(Serialize)]
struct DeltaRow {
    set: String,
    k: u32,
    set_size: usize,
    cardinality: usize,
    members: String,
    nu0: u64,
    cauchy_schwarz_bound: f64,
    cauchy_schwarz_holds: bool,
    restriction_bound: f64,
    bound_ratio: f64,
}

fn cmd_nu(c: Common, method: Method) -> ExitCode {
    let (space, set) = match space_and_set(&c) {
        Ok(v) => v,
        Err(e) => return fail(format!("{}: {e}", e.kind())),
    };
    let profile = match nu_profile(&space, &set, c.k, method.into()) {
        Ok(p) => p,
        Err(e) => return fail(format!("{}: {e}", e.kind())),
    };
    let rows: Vec<NuRow> = profile
        .counts
        .iter()
        .enumerate()
        .map(|(t, &nu)| NuRow { t: t as u32, nu })
        .collect();
    match render(&rows, c.format) {
        Ok(text) => match emit(c.out.as_deref(), &text) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => fail(e),
        },
        Err(e) => fail(e),
    }
}

fn cmd_delta(c: Common) -> ExitCode {
    let (space, set) = match space_and_set(&c) {
        Ok(v) => v,
        Err(e) => return fail(format!("{}: {e}", e.kind())),
    };
    let r = match delta_report_with(&space, &set, c.k, NuMethod::Both) {
        Ok(r) => r,
        Err(e) => return fail(format!("{}: {e}", e.kind())),
    };
    let row = DeltaRow {
        set: set.label().to_string(),
        k: r.k,
        set_size: r.set_size,
        cardinality: r.cardinality,
        members: r.members.iter().map(|t| t.0.to_string()).collect::<Vec<_>>().join(" "),
        nu0: r.nu0,
        cauchy_schwarz_bound: r.cauchy_schwarz_bound,
        cauchy_schwarz_holds: r.cauchy_schwarz_holds,
        restriction_bound: r.restriction_bound,
        bound_ratio: r.bound_ratio,
    };
    match render(&[row], c.format) {
        Ok(text) => match emit(c.out.as_deref(), &text) {
            Ok(()) => {
                if r.cauchy_schwarz_holds {
                    ExitCode::SUCCESS
                } else {
                    ExitCode::from(1)
                }
            }
            Err(e) => fail(e),
        },
        Err(e) => fail(e),
    }
}

fn cmd_scan(c: Common, seed: u64, corpus: bool) -> ExitCode {
    let mut cfg = ExperimentConfig::acceptance();
    cfg.grid = vec![GridPoint { p: c.p, n: c.n, d: c.d }];
    cfg.sharpness.clear();
    cfg.k_values = vec![c.k];
    cfg.seeds = vec![seed];
    cfg.tolerance = c.tolerance;
    cfg.corpus = corpus;
    cfg.set_specs = if corpus { Vec::new() } else { vec![c.set_spec.clone()] };
    cfg.checks = vec![
        Check::LowerBound,
        Check::RestrictionExtension,
        Check::RestrictionInterpolated,
        Check::SphereEnergy,
        Check::ExtensionConstant,
    ];
    let report = match run(&cfg) {
        Ok(r) => r,
        Err(e) => return fail(e),
    };
    let text = match c.format {
        Format::Csv => report.to_csv(),
        Format::Json => report.to_json() + "\n",
    };
    match emit(c.out.as_deref(), &text) {
        Ok(()) => ExitCode::from(report.exit_code() as u8),
        Err(e) => fail(e),
    }
}

fn cmd_sharpness(p: u32, d: usize, k: u32, out: Option<PathBuf>, format: Format) -> ExitCode {
    let mut cfg = ExperimentConfig::acceptance();
    cfg.grid.clear();
    cfg.checks = vec![Check::Sharpness];
    cfg.sharpness = vec![SharpnessCase { p, d, k }];
    if let Err(e) = cfg.validate() {
        return fail(e);
    }
    let row = fqharm_cli::checks::sharpness(SharpnessCase { p, d, k });
    let failed = row.is_failure();
    match render(&[row], format) {
        Ok(text) => match emit(out.as_deref(), &text) {
            Ok(()) => ExitCode::from(failed as u8),
            Err(e) => fail(e),
        },
        Err(e) => fail(e),
    }
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run {
            preset,
            config,
            out,
            format,
            seed,
            tolerance,
            threads,
            timing,
            dump_config,
        } => cmd_run(
            preset,
            config,
            out,
            format,
            seed,
            tolerance,
            threads,
            timing,
            dump_config,
        ),
        Command::Sharpness { p, d, k, out, format } => cmd_sharpness(p, d, k, out, format),
        Command::Nu { common, method } => cmd_nu(common, method),
        Command::Delta { common } => cmd_delta(common),
        Command::Scan { common, seed, corpus } => cmd_scan(common, seed, corpus),
    }
}
