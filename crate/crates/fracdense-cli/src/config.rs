//! Run configuration: built-in defaults, JSON overlay, flag overlay,
//! and the resolved numeric context shared by every subcommand.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use fracdense::density::{ApproxMethod, Placement};
use fracdense::kernel::FracParams;
use fracdense::quadrature::QuadSettings;
use fracdense::{Error, Result};

/// Everything a run needs beyond subcommand-specific arguments.
/// Missing JSON fields fall back to the defaults; unknown fields are
/// rejected so typos fail loudly.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub s: f64,
    pub seed: u64,
    pub quad_tol: f64,
    pub grid: usize,
    pub out_dir: PathBuf,
    pub method: String,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            s: 0.5,
            seed: 12345,
            quad_tol: 1e-10,
            grid: 41,
            out_dir: PathBuf::from("."),
            method: "taylor-rescale".into(),
        }
    }
}

/// Optional per-field overrides collected from the command line.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub s: Option<f64>,
    pub seed: Option<u64>,
    pub quad_tol: Option<f64>,
    pub grid: Option<usize>,
    pub out_dir: Option<PathBuf>,
    pub method: Option<String>,
}

impl RunConfig {
    /// defaults <- config file <- flags, flags winning.
    pub fn resolve(config_path: Option<&Path>, over: &Overrides) -> Result<RunConfig> {
        let mut cfg = match config_path {
            Some(p) => serde_json::from_str(&fs::read_to_string(p)?)?,
            None => RunConfig::default(),
        };
        if let Some(s) = over.s {
            cfg.s = s;
        }
        if let Some(seed) = over.seed {
            cfg.seed = seed;
        }
        if let Some(t) = over.quad_tol {
            cfg.quad_tol = t;
        }
        if let Some(g) = over.grid {
            cfg.grid = g;
        }
        if let Some(d) = &over.out_dir {
            cfg.out_dir = d.clone();
        }
        if let Some(m) = &over.method {
            cfg.method = m.clone();
        }
        Ok(cfg)
    }

    /// Validates every field and builds the numeric context.
    pub fn context(&self) -> Result<Context> {
        let params = FracParams::new(self.s, 1)?;
        if !(self.quad_tol >= 1e-14 && self.quad_tol <= 1e-2) {
            return Err(Error::InvalidInput(format!(
                "quad_tol must lie in [1e-14, 1e-2], got {}",
                self.quad_tol
            )));
        }
        if !(2..=1001).contains(&self.grid) {
            return Err(Error::InvalidInput(format!(
                "grid must lie in 2..=1001, got {}",
                self.grid
            )));
        }
        let method: ApproxMethod = self.method.parse()?;
        Ok(Context {
            params,
            quad: QuadSettings::default().with_tol(self.quad_tol),
            placement: Placement { seed: self.seed, ..Placement::default() },
            grid: self.grid,
            out_dir: self.out_dir.clone(),
            method,
        })
    }
}

/// Validated, ready-to-use run state.
#[derive(Debug, Clone)]
pub struct Context {
    pub params: FracParams,
    pub quad: QuadSettings,
    pub placement: Placement,
    pub grid: usize,
    pub out_dir: PathBuf,
    pub method: ApproxMethod,
}

/// Writes through a dotted temp file in the same directory, then
/// renames; readers never observe a half-written file.
pub fn write_atomic(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let target = dir.join(name);
    let tmp = dir.join(format!(".{name}.tmp"));
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, &target)?;
    Ok(target)
}

/// Pretty JSON with a trailing newline; field order follows the struct,
/// floats print shortest-round-trip, so bytes are reproducible.
pub fn pretty<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}
