//! Campaign configuration (TOML). `config/template.toml` is the commented
//! reference.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use skeletal_core::ignition::{CaseSpec, Composition, IgnitionCriterion};
use skeletal_core::tdbcur::SigmaBasis;
use skeletal_core::ONE_ATMOSPHERE;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Syntax { path: PathBuf, message: String },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
struct RawIgnition {
    criterion: Option<String>,
    floor: Option<f64>,
    rise: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
struct RawCase {
    id: String,
    t0: f64,
    #[serde(default)]
    p0: Option<f64>,
    #[serde(default)]
    p0_atm: Option<f64>,
    phi: f64,
    dt: Option<f64>,
    t_end: f64,
    fuel: Option<BTreeMap<String, f64>>,
    oxidizer: Option<BTreeMap<String, f64>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
struct RawConfig {
    mechanism: Option<PathBuf>,
    output: Option<PathBuf>,
    rank: Option<usize>,
    oversampling: Option<usize>,
    save_every: Option<usize>,
    matrix_every: Option<usize>,
    sigma_basis: Option<String>,
    dt: Option<f64>,
    n_keep: Vec<usize>,
    tolerance: Option<f64>,
    #[serde(default)]
    protected: Vec<String>,
    fuel: Option<BTreeMap<String, f64>>,
    oxidizer: Option<BTreeMap<String, f64>>,
    ignition: Option<RawIgnition>,
    #[serde(rename = "case")]
    cases: Vec<RawCase>,
}

/// Validated campaign configuration. Relative paths are resolved against
/// the directory of the configuration file.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub path: PathBuf,
    pub mechanism: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub rank: usize,
    pub oversampling: usize,
    /// Keep every this many steps in snapshot files.
    pub save_every: usize,
    /// Keep every this many dense sensitivity matrices from full-order runs;
    /// 0 writes none.
    pub matrix_every: usize,
    /// Row-closure basis of the low-rank integrator.
    pub sigma_basis: SigmaBasis,
    pub n_keep: Vec<usize>,
    /// Maximum acceptable ignition-delay relative error.
    pub tolerance: f64,
    /// Species always retained, in addition to the initial-mixture species.
    pub protected: Vec<String>,
    pub criterion: IgnitionCriterion,
    pub cases: Vec<CaseSpec>,
}

pub const DEFAULT_RANK: usize = 10;
pub const DEFAULT_TOLERANCE: f64 = 0.10;

fn air() -> Composition {
    [("O2".to_string(), 0.21), ("N2".to_string(), 0.79)].into_iter().collect()
}

impl Config {
    pub fn load(path: &Path) -> Result<Config, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text, path)
    }

    pub fn parse(text: &str, path: &Path) -> Result<Config, ConfigError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| ConfigError::Syntax {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let base = path.parent().unwrap_or(Path::new(""));
        let resolve = |p: PathBuf| if p.is_absolute() { p } else { base.join(p) };

        let criterion = match raw.ignition {
            None => IgnitionCriterion::default(),
            Some(ig) => match ig.criterion.as_deref().unwrap_or("max-rate") {
                "max-rate" => {
                    if ig.rise.is_some() {
                        return Err(ConfigError::Invalid("`rise` applies to criterion = \"temperature-rise\"".into()));
                    }
                    IgnitionCriterion::MaxRate {
                        floor: ig.floor.unwrap_or(1e4),
                    }
                }
                "temperature-rise" => {
                    if ig.floor.is_some() {
                        return Err(ConfigError::Invalid("`floor` applies to criterion = \"max-rate\"".into()));
                    }
                    IgnitionCriterion::TemperatureRise {
                        rise: ig.rise.unwrap_or(400.0),
                    }
                }
                other => {
                    return Err(ConfigError::Invalid(format!(
                        "unknown ignition criterion `{other}` (max-rate or temperature-rise)"
                    )))
                }
            },
        };

        let default_fuel = raw.fuel.clone();
        let default_ox = raw.oxidizer.clone().unwrap_or_else(air);
        if raw.cases.is_empty() {
            return Err(ConfigError::Invalid("no [[case]] entries".into()));
        }
        let mut cases = Vec::with_capacity(raw.cases.len());
        for c in raw.cases {
            if c.id.is_empty() || !c.id.chars().all(|ch| ch.is_ascii_alphanumeric() || "-_.".contains(ch)) {
                return Err(ConfigError::Invalid(format!(
                    "case id `{}` must be non-empty and use only letters, digits, '-', '_' or '.'",
                    c.id
                )));
            }
            if cases.iter().any(|k: &CaseSpec| k.id == c.id) {
                return Err(ConfigError::Invalid(format!("case id `{}` repeated", c.id)));
            }
            let p0 = match (c.p0, c.p0_atm) {
                (Some(p), None) => p,
                (None, Some(a)) => a * ONE_ATMOSPHERE,
                _ => {
                    return Err(ConfigError::Invalid(format!(
                        "case {}: give exactly one of p0 (Pa) or p0-atm",
                        c.id
                    )))
                }
            };
            let dt = c
                .dt
                .or(raw.dt)
                .ok_or_else(|| ConfigError::Invalid(format!("case {}: no dt and no top-level dt", c.id)))?;
            let fuel = c
                .fuel
                .or_else(|| default_fuel.clone())
                .ok_or_else(|| ConfigError::Invalid(format!("case {}: no fuel and no top-level fuel", c.id)))?;
            let spec = CaseSpec {
                id: c.id,
                t0: c.t0,
                p0,
                phi: c.phi,
                fuel,
                oxidizer: c.oxidizer.unwrap_or_else(|| default_ox.clone()),
                dt,
                t_end: c.t_end,
            };
            spec.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
            cases.push(spec);
        }

        let rank = raw.rank.unwrap_or(DEFAULT_RANK);
        if rank == 0 {
            return Err(ConfigError::Invalid("rank must be positive".into()));
        }
        let save_every = raw.save_every.unwrap_or(1);
        if save_every == 0 {
            return Err(ConfigError::Invalid("save-every must be positive".into()));
        }
        let tolerance = raw.tolerance.unwrap_or(DEFAULT_TOLERANCE);
        if !(tolerance > 0.0) {
            return Err(ConfigError::Invalid("tolerance must be positive".into()));
        }
        let sigma_basis = match raw.sigma_basis.as_deref().unwrap_or("unit") {
            "unit" => SigmaBasis::Unit,
            "increment" => SigmaBasis::Increment,
            other => {
                return Err(ConfigError::Invalid(format!(
                    "unknown sigma-basis `{other}` (unit or increment)"
                )))
            }
        };
        let mut n_keep = raw.n_keep;
        if n_keep.is_empty() || n_keep.contains(&0) {
            return Err(ConfigError::Invalid("n-keep must list positive species counts".into()));
        }
        n_keep.sort_unstable();
        n_keep.dedup();
        Ok(Config {
            path: path.to_path_buf(),
            mechanism: raw.mechanism.map(resolve),
            output: raw.output.map(resolve),
            rank,
            oversampling: raw.oversampling.unwrap_or(2),
            save_every,
            matrix_every: raw.matrix_every.unwrap_or(save_every),
            sigma_basis,
            n_keep,
            tolerance,
            protected: raw.protected,
            criterion,
            cases,
        })
    }
}

/// The commented reference configuration shipped with the tool.
pub const TEMPLATE: &str = include_str!("../../../config/template.toml");

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn template_parses() {
        let c = Config::parse(TEMPLATE, Path::new("config/template.toml")).unwrap();
        assert!(c.cases.len() >= 6);
        assert_eq!(c.mechanism.as_deref(), Some(Path::new("config/../mechanisms/gri30.mech")));
    }

    #[test]
    fn rejects_bad_cases() {
        let base = "n-keep = [3]\nfuel = { H2 = 1.0 }\n";
        let ok = format!("{base}[[case]]\nid = \"a\"\nt0 = 1000\np0-atm = 1\nphi = 1\ndt = 1e-7\nt-end = 1e-4\n");
        assert!(Config::parse(&ok, Path::new("c.toml")).is_ok());
        for bad in [
            ok.replace("p0-atm = 1", "p0-atm = 1\np0 = 101325"),
            ok.replace("phi = 1", "phi = -1"),
            ok.replace("id = \"a\"", "id = \"a b\""),
            ok.replace("dt = 1e-7\n", ""),
            format!("{ok}[[case]]\nid = \"a\"\nt0 = 1000\np0-atm = 1\nphi = 1\ndt = 1e-7\nt-end = 1e-4\n"),
            ok.replace("n-keep = [3]", "n-keep = []"),
            ok.replace("t0 = 1000", "t0 = 1000\nbogus = 1"),
        ] {
            assert!(Config::parse(&bad, Path::new("c.toml")).is_err(), "{bad}");
        }
    }
}
