//! The four model families behind one type, and the checkpoint file format.
//!
//! A checkpoint is line-oriented text:
//!
//! ```text
//! TABGEN-NET v1
//! model vae
//! config_digest <hex>
//! means <9 values>
//! stds <9 values>
//! <model body>
//! ```

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cvae::{cvae_generate, random_labels, CvaeModel};
use crate::dataset::{Standardizer, SAMPLE_DIM};
use crate::gan::{gan_generate, GanModel};
use crate::nn::{Matrix, NET_MAGIC};
use crate::realnvp::{nf_generate, FlowStack};
use crate::text::{join_f64, FieldReader};
use crate::vae::{vae_generate, VaeModel};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Gan,
    Nf,
    Vae,
    Cvae,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [ModelKind::Gan, ModelKind::Nf, ModelKind::Vae, ModelKind::Cvae];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Gan => "gan",
            ModelKind::Nf => "nf",
            ModelKind::Vae => "vae",
            ModelKind::Cvae => "cvae",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown model '{s}' (expected gan, nf, vae or cvae)")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TrainedModel {
    Gan(GanModel),
    Nf(FlowStack),
    Vae(VaeModel),
    Cvae(CvaeModel),
}

impl TrainedModel {
    pub fn kind(&self) -> ModelKind {
        match self {
            TrainedModel::Gan(_) => ModelKind::Gan,
            TrainedModel::Nf(_) => ModelKind::Nf,
            TrainedModel::Vae(_) => ModelKind::Vae,
            TrainedModel::Cvae(_) => ModelKind::Cvae,
        }
    }

    /// `n` standardized samples. Only the conditional model accepts raw
    /// `labels` (one per sample); without them it draws labels uniformly on
    /// the input domain.
    pub fn generate(&self, n: usize, seed: u64, labels: Option<&[f64]>) -> Result<Matrix> {
        if labels.is_some() && !matches!(self, TrainedModel::Cvae(_)) {
            return Err(Error::InvalidArgument(format!(
                "labels only apply to the cvae model, not {}",
                self.kind()
            )));
        }
        match self {
            TrainedModel::Gan(m) => gan_generate(m, n, seed),
            TrainedModel::Nf(m) => nf_generate(m, n, seed),
            TrainedModel::Vae(m) => vae_generate(m, n, seed),
            TrainedModel::Cvae(m) => match labels {
                Some(l) => {
                    if l.len() != n {
                        return Err(Error::InvalidArgument(format!(
                            "{} labels supplied for {n} samples",
                            l.len()
                        )));
                    }
                    cvae_generate(m, l, seed)
                }
                None => {
                    if n == 0 {
                        return Err(Error::InvalidArgument("sample count must be at least 1".into()));
                    }
                    cvae_generate(m, &random_labels(n, seed.wrapping_add(1)), seed)
                }
            },
        }
    }

    pub fn to_checkpoint(&self, standardizer: &Standardizer, config_digest: &str) -> String {
        let mut out = format!("{NET_MAGIC}\nmodel {}\nconfig_digest {config_digest}\n", self.kind());
        out.push_str(&format!("means {}\n", join_f64(&standardizer.means)));
        out.push_str(&format!("stds {}\n", join_f64(&standardizer.stds)));
        match self {
            TrainedModel::Gan(m) => m.write_body(&mut out),
            TrainedModel::Nf(m) => m.write_body(&mut out),
            TrainedModel::Vae(m) => m.write_body(&mut out),
            TrainedModel::Cvae(m) => m.write_body(&mut out),
        }
        out
    }

    /// Parses a checkpoint into the model, its standardizer and config digest.
    pub fn from_checkpoint(text: &str) -> Result<(Self, Standardizer, String)> {
        let mut r = FieldReader::new(text);
        let (_, magic) = r.line()?;
        if magic.trim() != NET_MAGIC {
            return Err(Error::Checkpoint(format!("expected header '{NET_MAGIC}', found '{}'", magic.trim())));
        }
        let kind: ModelKind = r
            .expect_one("model")?
            .parse()
            .map_err(|_| Error::Checkpoint("unknown model kind".into()))?;
        let digest = r.expect_one("config_digest")?.to_owned();
        let means = r.expect_f64s("means", SAMPLE_DIM)?;
        let stds = r.expect_f64s("stds", SAMPLE_DIM)?;
        if stds.iter().any(|s| s.is_nan() || *s <= 0.0) {
            return Err(Error::Checkpoint("standardizer has a non-positive std".into()));
        }
        let standardizer = Standardizer {
            means: means.try_into().expect("length checked"),
            stds: stds.try_into().expect("length checked"),
        };
        let model = match kind {
            ModelKind::Gan => TrainedModel::Gan(GanModel::read_body(&mut r)?),
            ModelKind::Nf => TrainedModel::Nf(FlowStack::read_body(&mut r)?),
            ModelKind::Vae => TrainedModel::Vae(VaeModel::read_body(&mut r)?),
            ModelKind::Cvae => TrainedModel::Cvae(CvaeModel::read_body(&mut r)?),
        };
        if r.peek_key().is_some() {
            return Err(Error::Checkpoint("trailing content after model body".into()));
        }
        Ok((model, standardizer, digest))
    }
}
