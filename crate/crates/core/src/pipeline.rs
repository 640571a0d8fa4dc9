//! The end-to-end run: oracle dataset, training of all four models,
//! generation, validation and comparison.
//!
//! Artifacts are produced as in-memory text first and written afterwards,
//! so a run can be inspected or compared without touching the disk. Every
//! CSV starts with a `# key=value` line carrying the config digest.

use std::path::Path;
use std::time::{Duration, Instant};

use log::info;

use crate::config::RunConfig;
use crate::cvae::train_cvae;
use crate::dataset::{fit_standardizer, make_training_set, samples_to_csv, CsvMetadata, Sample, Standardizer};
use crate::gan::train_gan;
use crate::model::{ModelKind, TrainedModel};
use crate::nn::Matrix;
use crate::realnvp::train_nf;
use crate::vae::train_vae;
use crate::validation::{compare_models, errors_to_csv, validate, ComparisonReport, ModelReport, Validation};
use crate::{Error, Result};

pub const TRAINING_FILE: &str = "train.csv";
pub const COMPARISON_FILE: &str = "comparison.json";

pub fn checkpoint_file(kind: ModelKind) -> String {
    format!("{kind}.ckpt")
}

pub fn training_log_file(kind: ModelKind) -> String {
    format!("{kind}_training_log.csv")
}

pub fn samples_file(kind: ModelKind) -> String {
    format!("{kind}_samples.csv")
}

pub fn report_file(kind: ModelKind) -> String {
    format!("{kind}_report.json")
}

pub fn errors_file(kind: ModelKind) -> String {
    format!("{kind}_errors.csv")
}

fn digest_line(digest: &str) -> String {
    format!("# config_digest={digest}\n")
}

/// Oracle training set and its CSV text.
pub fn make_dataset(config: &RunConfig) -> Result<(Vec<Sample>, String)> {
    let samples = make_training_set(config.dataset.n, config.dataset.seed)?;
    let mut meta = CsvMetadata::default();
    meta.push("n", config.dataset.n.to_string());
    meta.push("seed", config.dataset.seed.to_string());
    meta.push("config_digest", config.digest());
    let csv = samples_to_csv(&samples, &meta, false);
    Ok((samples, csv))
}

/// Trains one model on standardized data; returns it with its training log CSV.
pub fn train_model(
    kind: ModelKind,
    data: &Matrix,
    standardizer: &Standardizer,
    config: &RunConfig,
) -> Result<(TrainedModel, String)> {
    let (model, log) = match kind {
        ModelKind::Gan => {
            let (m, log) = train_gan(data, &config.gan)?;
            info!(
                "gan: discriminator accuracy over the last 100 epochs {:.3}",
                log.mean_accuracy_last(100)
            );
            (TrainedModel::Gan(m), log.to_csv())
        }
        ModelKind::Nf => {
            let (m, log) = train_nf(data, &config.nf)?;
            (TrainedModel::Nf(m), log.to_csv())
        }
        ModelKind::Vae => {
            let (m, log) = train_vae(data, &config.vae)?;
            (TrainedModel::Vae(m), log.to_csv())
        }
        ModelKind::Cvae => {
            let (m, log) = train_cvae(data, standardizer, &config.cvae)?;
            (TrainedModel::Cvae(m), log.to_csv())
        }
    };
    Ok((model, digest_line(&config.digest()) + &log))
}

/// Generated samples in raw units as CSV, with an `InDomain` flag column.
pub fn samples_csv(kind: ModelKind, samples: &[Sample], seed: u64, digest: &str) -> String {
    let mut meta = CsvMetadata::default();
    meta.push("model", kind.name());
    meta.push("seed", seed.to_string());
    meta.push("config_digest", digest);
    samples_to_csv(samples, &meta, true)
}

pub fn error_csv(kind: ModelKind, validation: &Validation, digest: &str) -> String {
    digest_line(digest) + &errors_to_csv(kind, &validation.errors)
}

/// Everything one model contributes to a run.
#[derive(Debug, Clone)]
pub struct ModelArtifacts {
    pub model: TrainedModel,
    pub checkpoint: String,
    pub training_log: String,
    pub samples_csv: String,
    pub validation: Validation,
    pub report: ModelReport,
    pub report_json: String,
    pub errors_csv: String,
    /// Wall-clock training time; not part of any artifact.
    pub training_time: Duration,
}

impl ModelArtifacts {
    pub fn kind(&self) -> ModelKind {
        self.model.kind()
    }
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub config_digest: String,
    pub training_set: Vec<Sample>,
    pub training_csv: String,
    pub standardizer: Standardizer,
    /// In the order gan, nf, vae, cvae.
    pub models: Vec<ModelArtifacts>,
    pub comparison: ComparisonReport,
    pub comparison_json: String,
}

impl PipelineOutput {
    pub fn get(&self, kind: ModelKind) -> &ModelArtifacts {
        self.models
            .iter()
            .find(|m| m.kind() == kind)
            .expect("every model is trained")
    }

    /// `(file name, contents)` for every artifact, in a fixed order.
    pub fn files(&self) -> Vec<(String, &str)> {
        let mut out = vec![(TRAINING_FILE.to_owned(), self.training_csv.as_str())];
        for m in &self.models {
            let k = m.kind();
            out.push((checkpoint_file(k), &m.checkpoint));
            out.push((training_log_file(k), &m.training_log));
            out.push((samples_file(k), &m.samples_csv));
            out.push((report_file(k), &m.report_json));
            out.push((errors_file(k), &m.errors_csv));
        }
        out.push((COMPARISON_FILE.to_owned(), &self.comparison_json));
        out
    }

    pub fn write_to(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for (name, text) in self.files() {
            let path = dir.join(name);
            std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        }
        Ok(())
    }
}

/// Runs one model from training through validation.
pub fn run_model(
    kind: ModelKind,
    data: &Matrix,
    standardizer: &Standardizer,
    config: &RunConfig,
) -> Result<ModelArtifacts> {
    let digest = config.digest();
    let gen = &config.generation;
    info!("{kind}: training");
    let start = Instant::now();
    let (model, training_log) = train_model(kind, data, standardizer, config)?;
    let training_time = start.elapsed();
    info!("{kind}: trained in {:.1} s", training_time.as_secs_f64());

    let generated = model.generate(gen.n, gen.seed, None)?;
    let validation = validate(&generated, standardizer)?;
    info!(
        "{kind}: {} of {} generated samples in domain",
        validation.in_domain_count, gen.n
    );
    let report = ModelReport::new(kind, &validation, gen.seed, &digest);
    Ok(ModelArtifacts {
        checkpoint: model.to_checkpoint(standardizer, &digest),
        training_log,
        samples_csv: samples_csv(kind, &validation.samples, gen.seed, &digest),
        report_json: report.to_json()?,
        errors_csv: error_csv(kind, &validation, &digest),
        validation,
        report,
        model,
        training_time,
    })
}

pub fn run_pipeline(config: &RunConfig) -> Result<PipelineOutput> {
    config.validate()?;
    let (training_set, training_csv) = make_dataset(config)?;
    let standardizer = fit_standardizer(&training_set)?;
    let data = standardizer.standardize_all(&training_set);
    let models = ModelKind::ALL
        .iter()
        .map(|&k| run_model(k, &data, &standardizer, config))
        .collect::<Result<Vec<_>>>()?;
    let reports: Vec<ModelReport> = models.iter().map(|m| m.report.clone()).collect();
    let comparison = compare_models(&reports)?;
    Ok(PipelineOutput {
        config_digest: config.digest(),
        training_set,
        training_csv,
        standardizer,
        comparison_json: comparison.to_json()?,
        comparison,
        models,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_config() -> RunConfig {
        RunConfig::from_toml(
            "[dataset]\nn = 40\n\
             [gan]\nepochs = 20\n\
             [nf]\nepochs = 20\nhidden = [8, 8]\n\
             [vae]\nepochs = 20\nhidden = [8, 8, 8]\n\
             [cvae]\nepochs = 20\nhidden = [8, 8, 8]\n\
             [generation]\nn = 30\n",
        )
        .unwrap()
    }

    #[test]
    fn tiny_run_produces_every_artifact() {
        let out = run_pipeline(&tiny_config()).unwrap();
        let files = out.files();
        assert_eq!(files.len(), 2 + 5 * 4);
        for (name, text) in &files {
            assert!(text.contains(&out.config_digest), "{name} lacks the digest");
        }
        for m in &out.models {
            assert_eq!(m.report.generated_count, 30);
            assert!(m.samples_csv.lines().nth(1).unwrap().ends_with("InDomain"));
            let (back, st, _) = TrainedModel::from_checkpoint(&m.checkpoint).unwrap();
            assert_eq!(back, m.model);
            assert_eq!(st, out.standardizer);
        }
        assert_eq!(out.comparison.models.len(), 4);
    }

    #[test]
    fn tiny_run_is_reproducible() {
        let a = run_pipeline(&tiny_config()).unwrap();
        let b = run_pipeline(&tiny_config()).unwrap();
        assert_eq!(a.files(), b.files());
    }
}
