//! Settings resolution: command-line flags override the `--config` file,
//! which overrides built-in defaults.

use std::path::Path;

use anyhow::{Context, Result};
use seco_core::components::Adjacency;
use seco_core::io::SccConfig;
use seco_core::psa::PsaConfig;
use serde::Deserialize;

use crate::args::{PsaFlags, SccFlags};

pub const BACKEND_ENV: &str = "SECO_BACKEND";

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub backend: Option<String>,
    pub workers: Option<usize>,
    pub psa: PsaConfig,
    pub scc: SccConfig,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else { return Ok(Self::default()) };
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let cfg: Self =
            serde_json::from_str(&text).map_err(|e| seco_core::Error::Config(format!("{}: {e}", path.display())))?;
        Ok(cfg)
    }

    /// Flag, then config file, then the environment.
    pub fn backend(&self, flag: Option<&str>) -> Result<String> {
        flag.map(str::to_string)
            .or_else(|| self.backend.clone())
            .or_else(|| std::env::var(BACKEND_ENV).ok().filter(|s| !s.is_empty()))
            .ok_or_else(|| {
                seco_core::Error::Config(format!("no backend given; use --backend or set {BACKEND_ENV}")).into()
            })
    }
}

pub fn psa_config(base: &PsaConfig, flags: &PsaFlags) -> Result<PsaConfig> {
    let mut cfg = base.clone();
    if let Some(v) = flags.area_factor {
        cfg.area_factor = v;
    }
    if let Some(v) = flags.adjacency {
        cfg.adjacency = Adjacency::from_count(v).expect("validated by the parser");
    }
    if let Some(v) = flags.min_seed_area {
        cfg.min_seed_area = v;
    }
    if let Some(v) = flags.min_area {
        cfg.min_area = v;
    }
    if let Some(v) = flags.overlap_thresh {
        cfg.overlap_thresh = v;
    }
    if let Some(v) = flags.min_labeled_frac {
        cfg.min_labeled_frac = v;
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn scc_config(base: &SccConfig, flags: &SccFlags) -> Result<SccConfig> {
    let mut cfg = base.clone();
    if let Some(v) = flags.tau_ns {
        cfg.tau_ns = v;
    }
    if let Some(v) = flags.tau_cr {
        cfg.tau_cr = v;
    }
    if let Some(v) = flags.warmup_iters {
        cfg.warmup_iters = v;
    }
    if let Some(v) = flags.batch_size {
        cfg.batch_size = v;
    }
    if let Some(v) = flags.learning_rate {
        cfg.learning_rate = v;
    }
    if let Some(v) = flags.momentum {
        cfg.momentum = v;
    }
    if let Some(v) = flags.seed {
        cfg.seed = v;
    }
    if flags.per_image_gmm {
        cfg.per_image_gmm = true;
    }
    cfg.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_beat_file_beat_defaults() {
        let file: FileConfig =
            serde_json::from_str(r#"{"scc": {"tau_ns": 0.5, "seed": 9}, "psa": {"area_factor": 2.0}}"#).unwrap();
        let flags = SccFlags { seed: Some(3), ..Default::default() };
        let scc = scc_config(&file.scc, &flags).unwrap();
        assert_eq!((scc.tau_ns, scc.seed, scc.tau_cr), (0.5, 3, 0.95));
        let psa = psa_config(&file.psa, &PsaFlags { adjacency: Some(4), ..Default::default() }).unwrap();
        assert_eq!((psa.area_factor, psa.adjacency, psa.min_seed_area), (2.0, Adjacency::Four, 16));
    }

    #[test]
    fn invalid_values_rejected() {
        assert!(scc_config(&SccConfig::default(), &SccFlags { tau_ns: Some(1.2), ..Default::default() }).is_err());
        assert!(psa_config(&PsaConfig::default(), &PsaFlags { area_factor: Some(0.5), ..Default::default() }).is_err());
        assert!(serde_json::from_str::<FileConfig>(r#"{"unknown": 1}"#).is_err());
    }
}
