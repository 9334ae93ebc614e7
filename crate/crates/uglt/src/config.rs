//! TOML run configuration shared by the command-line entry points.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::DomainSpec;

/// Resource ceilings; exceeding one aborts with the resource-cap exit code.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Caps {
    /// largest matrix dimension passed to a dense eigensolver
    pub eig_dim: usize,
    /// largest matrix dimension passed to a dense SVD
    pub svd_dim: usize,
    /// soft ceiling on dense-matrix storage, in MiB
    pub memory_mb: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            eig_dim: crate::spectral::DEFAULT_EIG_CAP,
            svd_dim: crate::spectral::DEFAULT_SVD_CAP,
            memory_mb: 4096,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// built-in domain name (`unit_square`, `axis_box`, `disk`, `cusp`)
    pub domain: String,
    /// built-in frequency-symbol name (see `generators::builtin_frequency_names`)
    pub symbol: String,
    /// grid sizes, one `m` per entry (grids are `n = (m,…,m)`)
    pub n_list: Vec<usize>,
    /// exhaustion steps
    pub t_list: Vec<f64>,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub theta_per_axis: usize,
    pub caps: Caps,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            domain: "cusp".into(),
            symbol: "laplace_2d".into(),
            n_list: crate::experiment::DEFAULT_M_LIST.to_vec(),
            t_list: crate::experiment::DEFAULT_T_LIST.to_vec(),
            seed: 0,
            output_dir: PathBuf::from("out"),
            theta_per_axis: crate::experiment::DEFAULT_THETA_PER_AXIS,
            caps: Caps::default(),
        }
    }
}

impl RunConfig {
    pub fn from_path(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let cfg: RunConfig = toml::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        DomainSpec::builtin(&self.domain)?;
        crate::generators::builtin_frequency(&self.symbol)?;
        if self.n_list.is_empty() {
            return Err(Error::Config("n_list must not be empty".into()));
        }
        if self.n_list.iter().any(|&m| m < 2) {
            return Err(Error::Config("grid sizes must be at least 2".into()));
        }
        if self.t_list.iter().any(|&t| t.is_nan() || t <= 0.0) {
            return Err(Error::Config("exhaustion steps must be positive".into()));
        }
        if self.theta_per_axis == 0 {
            return Err(Error::Config("theta_per_axis must be positive".into()));
        }
        if self.caps.eig_dim == 0 || self.caps.svd_dim == 0 {
            return Err(Error::Config("caps must be positive".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_valid() {
        RunConfig::default().validate().unwrap();
    }

    #[test]
    fn parses_round_trip() {
        let cfg = RunConfig::default();
        let text = toml::to_string(&cfg).unwrap();
        let back: RunConfig = toml::from_str(&text).unwrap();
        assert_eq!(back.domain, cfg.domain);
        assert_eq!(back.n_list, cfg.n_list);
    }

    #[test]
    fn rejects_unknown_domain() {
        let cfg = RunConfig { domain: "pentagon".into(), ..Default::default() };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn rejects_bad_lists() {
        let cfg = RunConfig { n_list: vec![], ..Default::default() };
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
        let cfg = RunConfig { t_list: vec![-1.0], ..Default::default() };
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
    }

    #[test]
    fn rejects_unknown_keys_and_missing_file() {
        let err: std::result::Result<RunConfig, _> = toml::from_str("bogus_key = 1");
        assert!(err.is_err());
        assert!(matches!(
            RunConfig::from_path(Path::new("/nonexistent/x.toml")),
            Err(Error::Config(_))
        ));
    }
}
