//! Run manifests: the merged view of config file, flags and environment that
//! drives one command invocation.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use janus_cpi_core::{
    ContactParams, Error, PreprocessParams, Result, RiskThresholds, SimConfig,
    DEFAULT_MAX_RANGE_M,
};

/// Worker cap for concurrent sweep points / camps. Absent means
/// single-threaded.
pub const THREADS_ENV: &str = "JANUS_CPI_THREADS";

/// Optional config file with one section per stage. Missing sections fall
/// back to the documented defaults; `[sim]` stays optional because only the
/// simulate command needs it.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToolConfig {
    pub sim: Option<SimConfig>,
    #[serde(default)]
    pub preprocess: PreprocessParams,
    #[serde(default)]
    pub contacts: ContactParams,
    #[serde(default)]
    pub risk: RiskThresholds,
    /// On-load measurement cutoff, meters.
    #[serde(default = "default_max_range")]
    pub max_range_m: f64,
}

fn default_max_range() -> f64 {
    DEFAULT_MAX_RANGE_M
}

impl ToolConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        let cfg: ToolConfig = toml::from_str(&text)
            .map_err(|e| Error::Config(format!("config {}: {e}", path.display())))?;
        cfg.preprocess.validate()?;
        cfg.contacts.validate()?;
        cfg.risk.validate()?;
        if let Some(sim) = &cfg.sim {
            sim.validate()?;
        }
        Ok(cfg)
    }
}

/// Output rendering selected with `--format`. JSON and CSV reports are
/// always written; `table` additionally writes the text tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
    Table,
}

/// Which contact parameter a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    TauTime,
    TauSpace,
    TauLen,
}

impl SweepParam {
    pub fn key(&self) -> &'static str {
        match self {
            SweepParam::TauTime => "tau_time",
            SweepParam::TauSpace => "tau_space",
            SweepParam::TauLen => "tau_len",
        }
    }
}

/// A parsed `--sweep param=v1,v2,...` request.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub param: SweepParam,
    pub values: Vec<f64>,
}

impl SweepSpec {
    pub fn parse(text: &str) -> Result<Self> {
        let (name, list) = text.split_once('=').ok_or_else(|| {
            Error::Config(format!("--sweep expects param=v1,v2,..., got {text:?}"))
        })?;
        let param = match name.trim() {
            "tau_time" | "tau-time" => SweepParam::TauTime,
            "tau_space" | "tau-space" => SweepParam::TauSpace,
            "tau_len" | "tau-len" => SweepParam::TauLen,
            other => {
                return Err(Error::Config(format!(
                    "unknown sweep parameter {other:?} (expected tau_time|tau_space|tau_len)"
                )));
            }
        };
        let values = list
            .split(',')
            .map(|v| {
                v.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Config(format!("sweep value {v:?}: {e}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        if values.is_empty() {
            return Err(Error::Config("sweep value list is empty".into()));
        }
        Ok(SweepSpec { param, values })
    }

    /// The contact parameters for one sweep point.
    pub fn apply(&self, base: &ContactParams, value: f64) -> Result<ContactParams> {
        let mut params = *base;
        match self.param {
            SweepParam::TauTime => params.tau_time_s = value as i64,
            SweepParam::TauSpace => params.tau_space_m = value,
            SweepParam::TauLen => params.tau_len = value as usize,
        }
        params.validate()?;
        Ok(params)
    }

    /// Directory label for one point, e.g. `tau_time=90`.
    pub fn label(&self, value: f64) -> String {
        match self.param {
            SweepParam::TauTime | SweepParam::TauLen => {
                format!("{}={}", self.key_name(), value as i64)
            }
            SweepParam::TauSpace => format!("{}={}", self.key_name(), value),
        }
    }

    fn key_name(&self) -> &'static str {
        self.param.key()
    }
}

/// Reads the worker cap from the environment. Absent or unset means one.
pub fn worker_count() -> Result<usize> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => {
            let n: usize = v.parse().map_err(|_| {
                Error::Config(format!("{THREADS_ENV} must be a positive integer, got {v:?}"))
            })?;
            if n == 0 {
                return Err(Error::Config(format!("{THREADS_ENV} must be positive")));
            }
            Ok(n)
        }
        Err(_) => Ok(1),
    }
}

/// Fails with a config error (exit 2) when `path` does not exist; the
/// message names the path.
pub fn require_file(path: &Path, what: &str) -> Result<()> {
    if !path.is_file() {
        return Err(Error::Config(format!(
            "{what} file not found: {}",
            path.display()
        )));
    }
    Ok(())
}

pub fn ensure_out_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| {
        Error::Config(format!(
            "cannot create output directory {}: {e}",
            dir.display()
        ))
    })
}

/// Writes a serializable report as pretty JSON.
pub fn write_json<T: serde::Serialize>(path: &PathBuf, value: &T) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::Config(format!(
        "cannot write {}: {e}",
        path.display()
    )))?;
    let mut w = std::io::BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value)
        .map_err(|e| Error::Invalid(format!("serializing {}: {e}", path.display())))?;
    use std::io::Write;
    writeln!(w).map_err(|e| Error::Io {
        path: path.clone(),
        source: e,
    })?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_parsing() {
        let spec = SweepSpec::parse("tau_time=60,90,120").unwrap();
        assert_eq!(spec.param, SweepParam::TauTime);
        assert_eq!(spec.values, vec![60.0, 90.0, 120.0]);
        assert_eq!(spec.label(90.0), "tau_time=90");

        assert!(SweepSpec::parse("tau_time=").is_err());
        assert!(SweepSpec::parse("bogus=1,2").is_err());
        assert!(SweepSpec::parse("tau_time").is_err());
        assert!(SweepSpec::parse("tau_space=1.5,2.5").is_ok());
    }

    #[test]
    fn sweep_apply_validates() {
        let spec = SweepSpec::parse("tau_len=1").unwrap();
        let err = spec.apply(&ContactParams::default(), 1.0).unwrap_err();
        assert!(err.to_string().contains("tau_len"));
    }

    #[test]
    fn config_defaults_when_sections_missing() {
        let cfg: ToolConfig = toml::from_str("").unwrap();
        assert_eq!(cfg.contacts.tau_time_s, 90);
        assert_eq!(cfg.preprocess.min_run, 5);
        assert!(cfg.sim.is_none());
        assert_eq!(cfg.max_range_m, DEFAULT_MAX_RANGE_M);
    }
}
