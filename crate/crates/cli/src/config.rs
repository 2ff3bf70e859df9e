//! Pipeline parameters from a flat `key = value` file, overridden by flags.

use std::path::{Path, PathBuf};

use adasvd::{Params, Strategy};
use anyhow::{bail, Context, Result};
use clap::Args;

/// Parameter flags shared by every subcommand. Unset flags fall back to the
/// config file, then to the built-in defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct ParamArgs {
    /// Flat `key = value` file; keys are the long flag names, with dashes or underscores.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Rank kept after (re-)initialization.
    #[arg(long)]
    pub ell: Option<usize>,
    /// Rank that triggers a re-initialization.
    #[arg(long = "n-star")]
    pub n_star: Option<usize>,
    /// System size controlling the singular value cap.
    #[arg(long)]
    pub eta: Option<f64>,
    /// Slope threshold as a fraction of the singular value cap.
    #[arg(long = "tau-star-factor")]
    pub tau_star_factor: Option<f64>,
    /// Frames per update block.
    #[arg(long)]
    pub beta: Option<usize>,
    /// Similarity partners per frame.
    #[arg(long)]
    pub nu: Option<usize>,
    /// Summed temporal distance of the similarity partners.
    #[arg(long = "delta-t")]
    pub delta_t: Option<usize>,
    /// Minimum mean similarity for a frame to enter the update.
    #[arg(long = "s-bar")]
    pub s_bar: Option<f64>,
    /// Disable the similarity gate.
    #[arg(long = "no-similarity")]
    pub no_similarity: bool,
    /// Binarization threshold in normalized intensity units.
    #[arg(long)]
    pub theta: Option<f64>,
    /// Forced update every N blocks (0 disables).
    #[arg(long)]
    pub period: Option<usize>,
    /// Re-initialization strategy.
    #[arg(long, value_parser = parse_strategy)]
    pub strategy: Option<Strategy>,
    /// Background projections kept for strategy ii.
    #[arg(long = "store-size")]
    pub store_size: Option<usize>,
    /// Offer only every N-th frame for a background update.
    #[arg(long)]
    pub stride: Option<usize>,
    /// Box-filter downsampling window.
    #[arg(long)]
    pub downsample: Option<usize>,
    /// Disk radius of the morphological closing (0 disables).
    #[arg(long = "morph-radius")]
    pub morph_radius: Option<usize>,
    /// Minimum blob area in pixels (0 or 1 disables).
    #[arg(long = "min-blob")]
    pub min_blob: Option<usize>,
}

fn parse_strategy(s: &str) -> std::result::Result<Strategy, String> {
    s.parse().map_err(|e: adasvd::Error| e.to_string())
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value
        .parse()
        .map_err(|e| anyhow::anyhow!("invalid value `{value}` for `{key}`: {e}"))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" | "on" => Ok(true),
        "0" | "false" | "no" | "off" => Ok(false),
        _ => bail!("invalid boolean `{value}` for `{key}`"),
    }
}

/// Sets one parameter by its flag name (dashes and underscores are equivalent).
pub fn apply_setting(params: &mut Params, key: &str, value: &str) -> Result<()> {
    let norm = key.trim().replace('_', "-");
    let value = value.trim();
    match norm.as_str() {
        "ell" => params.ell = parse_value(key, value)?,
        "n-star" => params.n_star = parse_value(key, value)?,
        "eta" => params.eta = parse_value(key, value)?,
        "tau-star-factor" => params.tau_star_factor = parse_value(key, value)?,
        "beta" => params.beta = parse_value(key, value)?,
        "nu" => params.nu = parse_value(key, value)?,
        "delta-t" => params.delta_t = parse_value(key, value)?,
        "s-bar" => params.s_bar = parse_value(key, value)?,
        "similarity" => params.similarity_check = parse_bool(key, value)?,
        "no-similarity" => params.similarity_check = !parse_bool(key, value)?,
        "theta" => params.theta = parse_value(key, value)?,
        "period" => params.period = parse_value(key, value)?,
        "strategy" => params.strategy = parse_value(key, value)?,
        "store-size" => params.store_size = parse_value(key, value)?,
        "stride" => params.update_stride = parse_value(key, value)?,
        "downsample" => params.downsample_window = parse_value(key, value)?,
        "morph-radius" => params.morph_radius = parse_value(key, value)?,
        "min-blob" => params.min_blob_area = parse_value(key, value)?,
        _ => bail!("unknown parameter `{key}`"),
    }
    Ok(())
}

/// Parses `key = value` lines. `#` starts a comment; blank lines are skipped.
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            bail!("line {}: expected `key = value`, found `{line}`", n + 1);
        };
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

pub fn load_config(path: &Path, params: &mut Params) -> Result<()> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    for (k, v) in parse_config(&text).with_context(|| format!("in {}", path.display()))? {
        apply_setting(params, &k, &v).with_context(|| format!("in {}", path.display()))?;
    }
    Ok(())
}

impl ParamArgs {
    /// Defaults, then the config file, then explicit flags.
    pub fn resolve(&self) -> Result<Params> {
        let mut p = Params::default();
        if let Some(path) = &self.config {
            load_config(path, &mut p)?;
        }
        macro_rules! over {
            ($($flag:ident => $field:ident),* $(,)?) => {
                $(if let Some(v) = self.$flag { p.$field = v; })*
            };
        }
        over!(
            ell => ell,
            n_star => n_star,
            eta => eta,
            tau_star_factor => tau_star_factor,
            beta => beta,
            nu => nu,
            delta_t => delta_t,
            s_bar => s_bar,
            theta => theta,
            period => period,
            strategy => strategy,
            store_size => store_size,
            stride => update_stride,
            downsample => downsample_window,
            morph_radius => morph_radius,
            min_blob => min_blob_area,
        );
        if self.no_similarity {
            p.similarity_check = false;
        }
        p.validate()?;
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_lines() {
        let kv = parse_config("# comment\nell = 10\n\n n_star=20 # trailing\nstrategy = ii\n").unwrap();
        assert_eq!(kv.len(), 3);
        let mut p = Params::default();
        for (k, v) in kv {
            apply_setting(&mut p, &k, &v).unwrap();
        }
        assert_eq!((p.ell, p.n_star, p.strategy), (10, 20, Strategy::II));
        assert!(parse_config("ell 10").is_err());
        assert!(apply_setting(&mut p, "gamma", "1").is_err());
        assert!(apply_setting(&mut p, "beta", "six").is_err());
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        std::fs::write(&path, "ell = 10\ntheta = 2.5\nsimilarity = false\n").unwrap();
        let args = ParamArgs {
            config: Some(path),
            ell: Some(12),
            ..ParamArgs::default()
        };
        let p = args.resolve().unwrap();
        assert_eq!(p.ell, 12);
        assert_eq!(p.theta, 2.5);
        assert!(!p.similarity_check);
        assert_eq!(p.beta, 6);
    }

    #[test]
    fn defaults_without_flags() {
        assert_eq!(ParamArgs::default().resolve().unwrap(), Params::default());
    }

    #[test]
    fn invalid_combination_is_reported() {
        let args = ParamArgs {
            ell: Some(40),
            ..ParamArgs::default()
        };
        assert!(args.resolve().is_err());
    }
}
