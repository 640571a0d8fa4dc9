//! Checks generated samples against the oracle.
//!
//! Generated samples are destandardized and filtered to the input domain;
//! the oracle is re-run at each kept input vector and the error
//! `generated - oracle` is summarised per output by its mean and population
//! standard deviation.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::dataset::{
    in_domain_filter, oracle_evaluate, Sample, Standardizer, COLUMN_NAMES, ORACLE_VERSION, PMP_DIM, VOID_DIM,
};
use crate::model::ModelKind;
use crate::nn::Matrix;
use crate::text::fmt_f64;
use crate::{Error, Result};

/// Output names as used for JSON keys.
pub const OUTPUT_KEYS: [&str; VOID_DIM] = ["voidf1", "voidf2", "voidf3", "voidf4"];

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputError {
    pub mu: f64,
    pub sigma: f64,
}

/// Per-output error moments.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputErrors {
    pub voidf1: OutputError,
    pub voidf2: OutputError,
    pub voidf3: OutputError,
    pub voidf4: OutputError,
}

impl OutputErrors {
    pub fn from_array(v: [OutputError; VOID_DIM]) -> Self {
        Self {
            voidf1: v[0],
            voidf2: v[1],
            voidf3: v[2],
            voidf4: v[3],
        }
    }

    pub fn to_array(&self) -> [OutputError; VOID_DIM] {
        [self.voidf1, self.voidf2, self.voidf3, self.voidf4]
    }

    pub fn mean_sigma(&self) -> f64 {
        self.to_array().iter().map(|e| e.sigma).sum::<f64>() / VOID_DIM as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorStats {
    pub outputs: OutputErrors,
    pub n_validated: usize,
}

/// Everything [`validate`] derives from one batch of generated samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Validation {
    /// All generated samples in raw units, in generation order.
    pub samples: Vec<Sample>,
    pub in_domain_count: usize,
    /// One row of `generated - oracle` per in-domain sample.
    pub errors: Vec<[f64; VOID_DIM]>,
    pub stats: ErrorStats,
}

/// Mean and population standard deviation.
pub fn mean_and_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Validates raw-unit samples.
pub fn validate_samples(samples: &[Sample]) -> Result<Validation> {
    let (kept, _) = in_domain_filter(samples);
    if kept.is_empty() {
        return Err(Error::NoInDomainSamples);
    }
    let errors = kept
        .iter()
        .map(|s| {
            let oracle = oracle_evaluate(&s.inputs)?.to_array();
            let generated = s.outputs.to_array();
            Ok(std::array::from_fn(|j| generated[j] - oracle[j]))
        })
        .collect::<Result<Vec<[f64; VOID_DIM]>>>()?;
    let per_output: [OutputError; VOID_DIM] = std::array::from_fn(|j| {
        let column: Vec<f64> = errors.iter().map(|e| e[j]).collect();
        let (mu, sigma) = mean_and_std(&column);
        OutputError { mu, sigma }
    });
    Ok(Validation {
        samples: samples.to_vec(),
        in_domain_count: kept.len(),
        stats: ErrorStats {
            outputs: OutputErrors::from_array(per_output),
            n_validated: kept.len(),
        },
        errors,
    })
}

/// Destandardizes `generated` with the training standardizer, then validates.
pub fn validate(generated: &Matrix, standardizer: &Standardizer) -> Result<Validation> {
    validate_samples(&standardizer.destandardize_all(generated)?)
}

/// Per-model summary; serializes to the report JSON layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelReport {
    pub model: ModelKind,
    pub generated_count: usize,
    pub in_domain_count: usize,
    pub errors: OutputErrors,
    pub seed: u64,
    pub config_digest: String,
    pub oracle_version: String,
}

impl ModelReport {
    pub fn new(model: ModelKind, validation: &Validation, seed: u64, config_digest: &str) -> Self {
        Self {
            model,
            generated_count: validation.samples.len(),
            in_domain_count: validation.in_domain_count,
            errors: validation.stats.outputs,
            seed,
            config_digest: config_digest.to_owned(),
            oracle_version: ORACLE_VERSION.to_owned(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let report: Self = serde_json::from_str(text)?;
        if report.in_domain_count > report.generated_count {
            return Err(Error::schema("in_domain_count exceeds generated_count"));
        }
        Ok(report)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComparisonReport {
    pub oracle_version: String,
    /// Models ordered by mean error sigma, smallest first.
    pub ranking: Vec<ModelKind>,
    /// One entry per model in the fixed order gan, nf, vae, cvae.
    pub models: Vec<ModelReport>,
}

impl ComparisonReport {
    pub fn get(&self, kind: ModelKind) -> Option<&ModelReport> {
        self.models.iter().find(|m| m.model == kind)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Plain-text table for terminals.
    pub fn to_table(&self) -> String {
        let mut out = String::from("model  generated  in_domain");
        for k in OUTPUT_KEYS {
            let _ = write!(out, "  {:>10}  {:>10}", format!("mu_{k}"), format!("sigma_{k}"));
        }
        out.push('\n');
        for m in &self.models {
            let _ = write!(out, "{:<5}  {:>9}  {:>9}", m.model.name(), m.generated_count, m.in_domain_count);
            for e in m.errors.to_array() {
                let _ = write!(out, "  {:>10.3e}  {:>10.3e}", e.mu, e.sigma);
            }
            out.push('\n');
        }
        let ranking: Vec<&str> = self.ranking.iter().map(|k| k.name()).collect();
        let _ = writeln!(out, "ranking (mean sigma): {}", ranking.join(" < "));
        out
    }
}

/// Assembles the four-model comparison. Every model must appear exactly once.
pub fn compare_models(reports: &[ModelReport]) -> Result<ComparisonReport> {
    let missing: Vec<String> = ModelKind::ALL
        .iter()
        .filter(|k| !reports.iter().any(|r| r.model == **k))
        .map(|k| k.name().to_owned())
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingModels(missing));
    }
    if reports.len() != ModelKind::ALL.len() {
        return Err(Error::InvalidArgument("each model must be reported once".into()));
    }
    if let Some(r) = reports.iter().find(|r| r.oracle_version != ORACLE_VERSION) {
        return Err(Error::schema(format!(
            "{} report was validated with oracle '{}', this build uses '{ORACLE_VERSION}'",
            r.model, r.oracle_version
        )));
    }
    let models: Vec<ModelReport> = ModelKind::ALL
        .iter()
        .filter_map(|k| reports.iter().find(|r| r.model == *k).cloned())
        .collect();
    let mut ranking: Vec<&ModelReport> = models.iter().collect();
    // stable sort keeps the fixed model order on ties
    ranking.sort_by(|a, b| a.errors.mean_sigma().total_cmp(&b.errors.mean_sigma()));
    Ok(ComparisonReport {
        oracle_version: ORACLE_VERSION.to_owned(),
        ranking: ranking.iter().map(|r| r.model).collect(),
        models,
    })
}

/// Plot-ready long-format error table: `model,output_name,error`.
pub fn errors_to_csv(model: ModelKind, errors: &[[f64; VOID_DIM]]) -> String {
    let mut out = String::from("model,output_name,error\n");
    for row in errors {
        for (j, e) in row.iter().enumerate() {
            let _ = writeln!(out, "{},{},{}", model.name(), COLUMN_NAMES[PMP_DIM + j], fmt_f64(*e));
        }
    }
    out
}
