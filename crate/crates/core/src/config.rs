//! Run configuration: a plain `key=value` file, overridable field by field.

use std::path::Path;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quadrature::QuadConfig;

/// Environment variable naming the default config file.
pub const CONFIG_ENV: &str = "KUZNETSOV_LAB_CONFIG";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum OutputFormat {
    Json,
    Csv,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Self::Json),
            "csv" => Ok(Self::Csv),
            _ => Err(Error::Domain(format!("unknown format {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    /// Relative tolerance handed to the quadrature layer.
    pub quad_tol: f64,
    /// Tolerance for numerical identity checks.
    pub identity_tol: f64,
    /// Allowed |slope - predicted| in scaling fits.
    pub slope_tol: f64,
    /// Gauss-Legendre nodes per panel.
    pub nodes: usize,
    /// Truncation height for Mellin-Barnes lines (0 = automatic).
    pub truncation: f64,
    /// Worker threads (0 = rayon default).
    pub threads: usize,
    pub format: OutputFormat,
    pub seed: u64,
    /// Include wall-clock runtimes in reports (breaks byte-for-byte
    /// reproducibility).
    pub timings: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            quad_tol: 1e-10,
            identity_tol: 1e-9,
            slope_tol: 0.15,
            nodes: 16,
            truncation: 0.0,
            threads: 0,
            format: OutputFormat::Json,
            seed: 7,
            timings: false,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str, line: usize) -> Result<T> {
    value.parse().map_err(|_| Error::Parse {
        line,
        msg: format!("bad value {value:?} for {key}"),
    })
}

impl RunConfig {
    pub fn set(&mut self, key: &str, value: &str, line: usize) -> Result<()> {
        match key {
            "quad_tol" | "tol" => self.quad_tol = parse(key, value, line)?,
            "identity_tol" => self.identity_tol = parse(key, value, line)?,
            "slope_tol" => self.slope_tol = parse(key, value, line)?,
            "nodes" => self.nodes = parse(key, value, line)?,
            "truncation" => self.truncation = parse(key, value, line)?,
            "threads" => self.threads = parse(key, value, line)?,
            "format" => self.format = value.parse()?,
            "seed" => self.seed = parse(key, value, line)?,
            "timings" => self.timings = parse(key, value, line)?,
            _ => {
                return Err(Error::Parse {
                    line,
                    msg: format!("unknown key {key:?}"),
                })
            }
        }
        Ok(())
    }

    /// Parses `key = value` lines; `#` starts a comment.
    pub fn parse_str(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: i + 1,
                msg: "expected key=value".into(),
            })?;
            cfg.set(k.trim(), v.trim(), i + 1)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse_str(&std::fs::read_to_string(path)?)
    }

    /// The file named by the environment variable, or defaults.
    pub fn from_env() -> Result<Self> {
        match std::env::var_os(CONFIG_ENV) {
            Some(p) => Self::load(Path::new(&p)),
            None => Ok(Self::default()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("quad_tol", self.quad_tol), ("identity_tol", self.identity_tol), ("slope_tol", self.slope_tol)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Domain(format!("{name} must be positive")));
            }
        }
        if self.nodes < 2 {
            return Err(Error::Domain("nodes must be at least 2".into()));
        }
        Ok(())
    }

    pub fn quad(&self) -> QuadConfig {
        QuadConfig {
            nodes: self.nodes,
            ..QuadConfig::default().with_tol(self.quad_tol)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_file() {
        let cfg = RunConfig::parse_str("# comment\nseed = 11\nformat=csv\nquad_tol=1e-6\n").unwrap();
        assert_eq!(cfg.seed, 11);
        assert_eq!(cfg.format, OutputFormat::Csv);
        assert_eq!(cfg.quad_tol, 1e-6);
        assert!(RunConfig::parse_str("nope=1").is_err());
        assert!(RunConfig::parse_str("quad_tol=-1").is_err());
    }
}
