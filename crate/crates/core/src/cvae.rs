//! Conditional VAE: one sample component (P1008 by default) is appended as a
//! label to both the encoder and the decoder input.
//!
//! The decoder still reconstructs all nine components, so how well generated
//! samples follow the requested label is learned rather than enforced.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::dataset::{Standardizer, PMP_DOMAIN, SAMPLE_DIM};
use crate::nn::Matrix;
use crate::rng::{open_uniform, seeded, standard_normal_matrix};
use crate::text::{fmt_f64, FieldReader};
use crate::vae::{train_loop, ElboTerms, VaeConfig, VaeGradients, VaeLog, VaeModel};
use crate::{Error, Result};

/// Same fields and defaults as [`VaeConfig`] plus the label component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CvaeConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub latent_dim: usize,
    pub hidden: Vec<usize>,
    pub dropout: f64,
    pub batch_norm: bool,
    pub kl_weight: f64,
    pub learning_rate: f64,
    pub seed: u64,
    /// Sample component used as the label; 0 is P1008.
    pub label_index: usize,
}

impl Default for CvaeConfig {
    fn default() -> Self {
        Self::from_vae(&VaeConfig::default(), 0)
    }
}

impl CvaeConfig {
    pub fn from_vae(v: &VaeConfig, label_index: usize) -> Self {
        Self {
            epochs: v.epochs,
            batch_size: v.batch_size,
            latent_dim: v.latent_dim,
            hidden: v.hidden.clone(),
            dropout: v.dropout,
            batch_norm: v.batch_norm,
            kl_weight: v.kl_weight,
            learning_rate: v.learning_rate,
            seed: v.seed,
            label_index,
        }
    }

    pub fn vae(&self) -> VaeConfig {
        VaeConfig {
            epochs: self.epochs,
            batch_size: self.batch_size,
            latent_dim: self.latent_dim,
            hidden: self.hidden.clone(),
            dropout: self.dropout,
            batch_norm: self.batch_norm,
            kl_weight: self.kl_weight,
            learning_rate: self.learning_rate,
            seed: self.seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.label_index >= SAMPLE_DIM {
            return Err(Error::InvalidArgument(format!(
                "label_index {} outside 0..{SAMPLE_DIM}",
                self.label_index
            )));
        }
        self.vae().validate()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvaeModel {
    /// Encoder takes `data | label`, decoder takes `latent | label`.
    pub vae: VaeModel,
    pub label_index: usize,
    /// Raw-unit statistics used to standardize labels.
    pub label_mean: f64,
    pub label_std: f64,
}

impl CvaeModel {
    pub fn new(config: &CvaeConfig, standardizer: &Standardizer, seed: u64) -> Result<Self> {
        config.validate()?;
        let vae = VaeModel::new(&config.vae(), SAMPLE_DIM, 1, seed)?;
        Ok(Self {
            vae,
            label_index: config.label_index,
            label_mean: standardizer.means[config.label_index],
            label_std: standardizer.stds[config.label_index],
        })
    }

    pub fn standardize_label(&self, raw: f64) -> f64 {
        (raw - self.label_mean) / self.label_std
    }

    pub fn latent_dim(&self) -> usize {
        self.vae.latent_dim
    }

    /// Standardized label column taken from standardized data.
    pub fn labels_of(&self, x: &Matrix) -> Matrix {
        x.select_columns(&[self.label_index])
    }

    pub fn write_body(&self, out: &mut String) {
        let _ = writeln!(out, "label_index {}", self.label_index);
        let _ = writeln!(out, "label_mean {}", fmt_f64(self.label_mean));
        let _ = writeln!(out, "label_std {}", fmt_f64(self.label_std));
        self.vae.write_body(out);
    }

    pub fn read_body(r: &mut FieldReader<'_>) -> Result<Self> {
        let label_index = r.expect_usize("label_index")?;
        let label_mean = r.expect_f64("label_mean")?;
        let label_std = r.expect_f64("label_std")?;
        let vae = VaeModel::read_body(r)?;
        if vae.label_dim() != 1 || label_index >= vae.data_dim() || label_std.is_nan() || label_std <= 0.0 {
            return Err(Error::Checkpoint("inconsistent conditional model".into()));
        }
        Ok(Self {
            vae,
            label_index,
            label_mean,
            label_std,
        })
    }
}

/// Inference-mode loss terms with standardized labels `c`, one per row of `x`.
pub fn cvae_loss(model: &CvaeModel, x: &Matrix, c: &[f64], eps: &Matrix, kl_weight: f64) -> Result<ElboTerms> {
    Ok(cvae_loss_and_grad(model, x, c, eps, kl_weight)?.0)
}

pub fn cvae_loss_and_grad(
    model: &CvaeModel,
    x: &Matrix,
    c: &[f64],
    eps: &Matrix,
    kl_weight: f64,
) -> Result<(ElboTerms, VaeGradients)> {
    let labels = Matrix::from_vec(c.len(), 1, c.to_vec())?;
    let (terms, grads, _) = model
        .vae
        .loss_and_grad(x, Some(&labels), eps, kl_weight, false, None)?;
    Ok((terms, grads))
}

/// Trains on standardized `data`; labels are its `label_index` column.
/// `standardizer` supplies the raw-unit label statistics for generation.
pub fn train_cvae(
    data: &Matrix,
    standardizer: &Standardizer,
    config: &CvaeConfig,
) -> Result<(CvaeModel, VaeLog)> {
    if data.cols() != SAMPLE_DIM {
        return Err(Error::Shape(format!(
            "conditional model trains on {SAMPLE_DIM} columns, got {}",
            data.cols()
        )));
    }
    let mut model = CvaeModel::new(config, standardizer, config.seed)?;
    let labels = model.labels_of(data);
    let log = train_loop(&mut model.vae, data, Some(&labels), &config.vae())?;
    Ok((model, log))
}

/// One standardized sample per raw label value.
pub fn cvae_generate(model: &CvaeModel, labels: &[f64], seed: u64) -> Result<Matrix> {
    if labels.is_empty() {
        return Err(Error::InvalidArgument("label list is empty".into()));
    }
    if let Some(bad) = labels.iter().find(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(format!("label {bad} is not finite")));
    }
    let c: Vec<f64> = labels.iter().map(|&v| model.standardize_label(v)).collect();
    let c = Matrix::from_vec(c.len(), 1, c)?;
    let mut rng = seeded(seed);
    let z = standard_normal_matrix(&mut rng, labels.len(), model.latent_dim());
    model.vae.decode_batch(&z, Some(&c))
}

/// Raw labels drawn uniformly on the open input domain.
pub fn random_labels(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = seeded(seed);
    (0..n)
        .map(|_| open_uniform(&mut rng, PMP_DOMAIN.0, PMP_DOMAIN.1))
        .collect()
}
