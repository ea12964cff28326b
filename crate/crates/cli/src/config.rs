//! `key = value` config files. Flags given on the command line win.
//!
//! ```text
//! # defaults for this machine
//! seed = 7
//! out_dir = results
//! eq15_variant = squared
//! restarts = 20
//! tol.evolution = 1e-6
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use ghzdyn::analytic::TwoSidedVariant;
use ghzdyn::harness::Campaign;

pub const DEFAULT_SEED: u64 = 42;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct CliConfig {
    pub seed: Option<u64>,
    pub tolerances: BTreeMap<Campaign, f64>,
    pub out_dir: Option<PathBuf>,
    pub two_sided: Option<TwoSidedVariant>,
    pub restarts: Option<usize>,
}

impl CliConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        Self::parse(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let mut cfg = Self::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let lineno = n + 1;
            let (key, value) = line
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| format!("line {lineno}: expected key = value"))?;
            let bad = |what: &str| format!("line {lineno}: invalid {what} '{value}'");
            match key {
                "seed" => cfg.seed = Some(value.parse().map_err(|_| bad("seed"))?),
                "out_dir" => cfg.out_dir = Some(PathBuf::from(value)),
                "eq15_variant" => cfg.two_sided = Some(value.parse().map_err(|_| bad("two-sided variant"))?),
                "restarts" => cfg.restarts = Some(value.parse().map_err(|_| bad("restart count"))?),
                k if k.starts_with("tol.") => {
                    let campaign: Campaign = k[4..]
                        .parse()
                        .map_err(|e| format!("line {lineno}: {e}"))?;
                    let tol: f64 = value.parse().map_err(|_| bad("tolerance"))?;
                    if !(tol.is_finite() && tol >= 0.0) {
                        return Err(bad("tolerance"));
                    }
                    cfg.tolerances.insert(campaign, tol);
                }
                other => return Err(format!("line {lineno}: unknown key '{other}'")),
            }
        }
        Ok(cfg)
    }

    /// Where an output file lands: relative paths go under `out_dir`.
    pub fn output_path(&self, out: &Path) -> PathBuf {
        match &self.out_dir {
            Some(dir) if out.is_relative() => dir.join(out),
            _ => out.to_path_buf(),
        }
    }
}
