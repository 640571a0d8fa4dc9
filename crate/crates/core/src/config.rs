//! Run configuration read from TOML.
//!
//! Every section is optional and every key has a default, so an empty file
//! is a valid configuration. Unknown keys are rejected. The digest is the
//! SHA-256 of the configuration re-serialized with defaults filled in, so
//! two files that differ only in layout or comments share a digest.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cvae::CvaeConfig;
use crate::gan::GanConfig;
use crate::realnvp::FlowConfig;
use crate::vae::VaeConfig;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DatasetSection {
    pub n: usize,
    pub seed: u64,
    /// Training CSV, relative to the output directory unless absolute.
    pub path: PathBuf,
}

impl Default for DatasetSection {
    fn default() -> Self {
        Self {
            n: 200,
            seed: 42,
            path: PathBuf::from("train.csv"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GenerationSection {
    pub n: usize,
    pub seed: u64,
}

impl Default for GenerationSection {
    fn default() -> Self {
        Self { n: 500, seed: 7 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ValidationSection {
    /// Samples file used by `validate` when none is given on the command line.
    pub samples: Option<PathBuf>,
    /// Report files used by `compare` when none are given on the command line.
    pub reports: Vec<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub out_dir: PathBuf,
    pub dataset: DatasetSection,
    pub gan: GanConfig,
    pub nf: FlowConfig,
    pub vae: VaeConfig,
    pub cvae: CvaeConfig,
    pub generation: GenerationSection,
    pub validation: ValidationSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            out_dir: PathBuf::from("tabgen-out"),
            dataset: DatasetSection::default(),
            gan: GanConfig::default(),
            nf: FlowConfig::default(),
            vae: VaeConfig::default(),
            cvae: CvaeConfig::default(),
            generation: GenerationSection::default(),
            validation: ValidationSection::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Canonical text: every key present, fixed order.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config types always serialize")
    }

    /// Hex SHA-256 of [`to_toml`](Self::to_toml).
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.to_toml().as_bytes()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.dataset.n < 2 {
            return Err(Error::InvalidArgument(format!(
                "dataset.n = {} but standardization needs at least 2 samples",
                self.dataset.n
            )));
        }
        if self.generation.n == 0 {
            return Err(Error::InvalidArgument("generation.n must be at least 1".into()));
        }
        self.gan.validate()?;
        self.nf.validate()?;
        self.vae.validate()?;
        self.cvae.validate()
    }

    pub fn dataset_path(&self) -> PathBuf {
        self.out_dir.join(&self.dataset.path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let cfg = RunConfig::from_toml("").unwrap();
        assert_eq!(cfg, RunConfig::default());
        assert_eq!(cfg.gan.epochs, 30_000);
        assert_eq!(cfg.vae.epochs, 3000);
        assert_eq!(cfg.vae.batch_size, 30);
        assert_eq!(cfg.nf.epochs, 5000);
        assert_eq!(cfg.dataset.n, 200);
        assert_eq!(cfg.generation.n, 500);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(matches!(
            RunConfig::from_toml("[gan]\nepoch = 3\n"),
            Err(Error::Config(_))
        ));
        assert!(matches!(RunConfig::from_toml("[extra]\n"), Err(Error::Config(_))));
    }

    #[test]
    fn digest_ignores_layout_but_not_values() {
        let a = RunConfig::from_toml("[vae]\nepochs = 10\n").unwrap();
        let b = RunConfig::from_toml("# comment\n[vae]\n  epochs   =   10\n\n").unwrap();
        let c = RunConfig::from_toml("[vae]\nepochs = 11\n").unwrap();
        assert_eq!(a.digest(), b.digest());
        assert_ne!(a.digest(), c.digest());
        assert_eq!(a.digest().len(), 64);
    }

    #[test]
    fn canonical_text_round_trips() {
        let mut cfg = RunConfig::default();
        cfg.nf.noise_std = 0.125;
        cfg.validation.samples = Some("x.csv".into());
        assert_eq!(RunConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
    }

    #[test]
    fn invalid_values_rejected() {
        assert!(RunConfig::from_toml("[dataset]\nn = 0\n").is_err());
        assert!(RunConfig::from_toml("[vae]\ndropout = 1.5\n").is_err());
    }
}
