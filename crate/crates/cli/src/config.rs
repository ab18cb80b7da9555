//! Experiment configuration, stored as TOML.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use fqharm::field::{is_prime, make_field, DEFAULT_FIELD_CAP};
use fqharm::lattice::{point_cap, SetSpec};
use fqharm::tolerance::DEFAULT_TOLERANCE;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    /// Field characters, closed-form sphere transforms, dual-sum identity.
    Identities,
    /// Fourier moments, the nu_k(0) identity and the nu_k inequalities.
    LemmaAudit,
    /// Method cross-check of nu_k and the Cauchy-Schwarz lower bound on |Delta_k|.
    LowerBound,
    /// Restriction moments per sphere.
    Moments,
    RestrictionExtension,
    RestrictionInterpolated,
    SphereEnergy,
    Holder,
    ExtensionConstant,
    Sharpness,
    SignSweep,
}

impl Check {
    pub const ALL: [Check; 11] = [
        Check::Identities,
        Check::LemmaAudit,
        Check::LowerBound,
        Check::Moments,
        Check::RestrictionExtension,
        Check::RestrictionInterpolated,
        Check::SphereEnergy,
        Check::Holder,
        Check::ExtensionConstant,
        Check::Sharpness,
        Check::SignSweep,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Check::Identities => "identities",
            Check::LemmaAudit => "lemma_audit",
            Check::LowerBound => "lower_bound",
            Check::Moments => "moments",
            Check::RestrictionExtension => "restriction_extension",
            Check::RestrictionInterpolated => "restriction_interpolated",
            Check::SphereEnergy => "sphere_energy",
            Check::Holder => "holder",
            Check::ExtensionConstant => "extension_constant",
            Check::Sharpness => "sharpness",
            Check::SignSweep => "sign_sweep",
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Check {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Check::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| format!("unknown check `{s}`"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridPoint {
    pub p: u32,
    #[serde(default = "one")]
    pub n: u32,
    pub d: usize,
}

fn one() -> u32 {
    1
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SharpnessCase {
    pub p: u32,
    pub d: usize,
    pub k: u32,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputPaths {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub json: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub checks: Vec<Check>,
    #[serde(default = "default_k_values")]
    pub k_values: Vec<u32>,
    /// Seeds for the generated corpus and all sampling.
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    /// Include the generated corpus for every grid point.
    #[serde(default = "yes")]
    pub corpus: bool,
    /// Extra generator strings, applied at every grid point.
    #[serde(default)]
    pub set_specs: Vec<String>,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    /// Worker threads; 0 uses all cores.
    #[serde(default)]
    pub threads: usize,
    #[serde(default = "default_trials")]
    pub extension_trials: usize,
    /// Record wall time per row. Off by default so reports are reproducible.
    #[serde(default)]
    pub timing: bool,
    #[serde(default)]
    pub output: OutputPaths,
    pub grid: Vec<GridPoint>,
    #[serde(default)]
    pub sharpness: Vec<SharpnessCase>,
}

fn default_k_values() -> Vec<u32> {
    vec![2, 3, 4]
}

fn default_seeds() -> Vec<u64> {
    vec![1, 2, 3, 4]
}

fn yes() -> bool {
    true
}

fn default_tolerance() -> f64 {
    DEFAULT_TOLERANCE
}

fn default_trials() -> usize {
    20
}

/// Field-level configuration problems.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigInvalid {
    pub problems: Vec<String>,
}

impl fmt::Display for ConfigInvalid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ConfigInvalid:")?;
        for p in &self.problems {
            writeln!(f, "  {p}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigInvalid {}

impl ExperimentConfig {
    /// The configuration the acceptance suite runs.
    pub fn acceptance() -> Self {
        let grid = [(3, 1), (5, 1), (7, 1), (3, 2)]
            .into_iter()
            .flat_map(|(p, n)| [2, 4].map(|d| GridPoint { p, n, d }))
            .chain([GridPoint { p: 3, n: 1, d: 6 }, GridPoint { p: 3, n: 1, d: 8 }])
            .collect();
        let sharpness = [3, 5]
            .into_iter()
            .flat_map(|p| {
                [2, 3]
                    .into_iter()
                    .flat_map(move |d| [2, 3].map(|k| SharpnessCase { p, d, k }))
            })
            .collect();
        ExperimentConfig {
            checks: Check::ALL.to_vec(),
            k_values: default_k_values(),
            seeds: default_seeds(),
            corpus: true,
            set_specs: Vec::new(),
            tolerance: DEFAULT_TOLERANCE,
            threads: 0,
            extension_trials: default_trials(),
            timing: false,
            output: OutputPaths::default(),
            grid,
            sharpness,
        }
    }

    pub fn preset(name: &str) -> Option<Self> {
        (name == "acceptance").then(Self::acceptance)
    }

    pub fn from_toml(text: &str) -> Result<Self, ConfigInvalid> {
        toml::from_str(text).map_err(|e| ConfigInvalid {
            problems: vec![e.to_string().trim().to_string()],
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always serializable")
    }

    pub fn has(&self, check: Check) -> bool {
        self.checks.contains(&check)
    }

    pub fn validate(&self) -> Result<(), ConfigInvalid> {
        let mut problems = Vec::new();
        if self.checks.is_empty() {
            problems.push("checks: at least one check is required".to_string());
        }
        if self.grid.is_empty() && self.sharpness.is_empty() {
            problems.push("grid: no grid points and no sharpness cases".to_string());
        }
        for (i, g) in self.grid.iter().enumerate() {
            match make_field(g.p, g.n) {
                Err(e) => problems.push(format!("grid[{i}].p/n = ({}, {}): {}: {e}", g.p, g.n, e.kind())),
                Ok(f) => {
                    if g.d == 0 {
                        problems.push(format!("grid[{i}].d: dimension must be at least 1"));
                    } else {
                        let size = (f.q() as u128).checked_pow(g.d as u32).unwrap_or(u128::MAX);
                        if size > point_cap() as u128 {
                            problems.push(format!(
                                "grid[{i}]: TooLarge: q^d = {size} exceeds the point cap {}",
                                point_cap()
                            ));
                        }
                    }
                }
            }
        }
        for (i, &k) in self.k_values.iter().enumerate() {
            if k < 2 {
                problems.push(format!("k_values[{i}]: k must be at least 2, got {k}"));
            }
        }
        if self.k_values.is_empty() {
            problems.push("k_values: at least one k is required".to_string());
        }
        if !self.corpus && self.set_specs.is_empty() && !self.grid.is_empty() {
            problems.push("set_specs: empty while corpus = false, so there is nothing to run".to_string());
        }
        for (i, spec) in self.set_specs.iter().enumerate() {
            if let Err(e) = SetSpec::from_str(spec) {
                problems.push(format!("set_specs[{i}]: {}: {e}", e.kind()));
            }
        }
        if !(self.tolerance.is_finite() && self.tolerance > 0.0) {
            problems.push(format!(
                "tolerance: must be positive and finite, got {}",
                self.tolerance
            ));
        }
        if self.extension_trials == 0 && self.has(Check::ExtensionConstant) {
            problems.push("extension_trials: must be at least 1".to_string());
        }
        for (i, s) in self.sharpness.iter().enumerate() {
            if s.p == 2 {
                problems.push(format!(
                    "sharpness[{i}].p: CharTwo: characteristic two is not supported (p = 2)"
                ));
            } else if !is_prime(s.p as u64) {
                problems.push(format!("sharpness[{i}].p: NotPrime: {} is not prime", s.p));
            } else if (s.p as u64).pow(2) > DEFAULT_FIELD_CAP {
                problems.push(format!(
                    "sharpness[{i}].p: TooLarge: p^2 exceeds the field cap {DEFAULT_FIELD_CAP}"
                ));
            }
            if s.d == 0 {
                problems.push(format!("sharpness[{i}].d: dimension must be at least 1"));
            }
            if s.k < 2 {
                problems.push(format!("sharpness[{i}].k: k must be at least 2, got {}", s.k));
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(ConfigInvalid { problems })
        }
    }
}
