//! Command-line front end. Each command is a function returning the text it
//! prints, so the binary stays a thin wrapper.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use log::info;

use crate::config::RunConfig;
use crate::dataset::{fit_standardizer, in_domain_filter, samples_from_csv, COLUMN_NAMES, PMP_DIM, SAMPLE_DIM};
use crate::model::{ModelKind, TrainedModel};
use crate::pipeline::{
    checkpoint_file, error_csv, errors_file, make_dataset, report_file, samples_csv, samples_file, train_model,
    training_log_file, COMPARISON_FILE,
};
use crate::validation::{compare_models, validate_samples, ModelReport, Validation};
use crate::{Error, Result};

/// Environment variable holding the log filter, e.g. `TABGEN_LOG=info`.
pub const LOG_ENV: &str = "TABGEN_LOG";

#[derive(Debug, Parser)]
#[command(name = "tabgen", version, about = "Generative models for small tabular datasets")]
pub struct Cli {
    /// TOML run configuration; defaults apply to anything it leaves out.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Seed for the command: dataset, model training or generation.
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,
    /// Output directory (overrides `out_dir` in the config).
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample inputs uniformly and label them with the oracle.
    MakeData {
        /// Number of samples (overrides `dataset.n`).
        #[arg(long)]
        n: Option<usize>,
    },
    /// Train one model and write its checkpoint and training log.
    Train {
        /// One of gan, nf, vae, cvae.
        model: String,
        /// Training CSV; defaults to the dataset path in the output directory.
        #[arg(long, value_name = "PATH")]
        data: Option<PathBuf>,
    },
    /// Draw samples from a checkpoint.
    Generate {
        checkpoint: PathBuf,
        /// Number of samples (overrides `generation.n`).
        #[arg(long)]
        n: Option<usize>,
        /// P1008 values to condition on, one per line (cvae only).
        #[arg(long, value_name = "PATH")]
        labels: Option<PathBuf>,
    },
    /// Check generated samples against the oracle.
    Validate {
        /// Samples CSV; defaults to `validation.samples` from the config.
        samples: Option<PathBuf>,
        /// Model name, when the samples file does not record it.
        #[arg(long)]
        model: Option<String>,
    },
    /// Rank the four models from their validation reports.
    Compare {
        /// Report files; defaults to `validation.reports` from the config.
        reports: Vec<PathBuf>,
    },
}

/// Config with command-line overrides applied.
pub fn effective_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(out) = &cli.out {
        cfg.out_dir = out.clone();
    }
    match &cli.command {
        Command::MakeData { n } => {
            if let Some(n) = n {
                cfg.dataset.n = *n;
            }
            if let Some(s) = cli.seed {
                cfg.dataset.seed = s;
            }
        }
        Command::Train { model, .. } => {
            if let (Some(s), Ok(kind)) = (cli.seed, model.parse::<ModelKind>()) {
                match kind {
                    ModelKind::Gan => cfg.gan.seed = s,
                    ModelKind::Nf => cfg.nf.seed = s,
                    ModelKind::Vae => cfg.vae.seed = s,
                    ModelKind::Cvae => cfg.cvae.seed = s,
                }
            }
        }
        Command::Generate { n, .. } => {
            if let Some(n) = n {
                cfg.generation.n = *n;
            }
            if let Some(s) = cli.seed {
                cfg.generation.seed = s;
            }
        }
        Command::Validate { .. } | Command::Compare { .. } => {}
    }
    cfg.validate()?;
    Ok(cfg)
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn cmd_make_data(cfg: &RunConfig) -> Result<String> {
    let (samples, csv) = make_dataset(cfg)?;
    let path = cfg.dataset_path();
    write_file(&path, &csv)?;
    let mut out = format!(
        "wrote {} samples (seed {}) to {}\n",
        samples.len(),
        cfg.dataset.seed,
        path.display()
    );
    for (c, name) in COLUMN_NAMES.iter().enumerate() {
        let (lo, hi) = samples.iter().map(|s| s.to_array()[c]).fold(
            (f64::INFINITY, f64::NEG_INFINITY),
            |(lo, hi), v| (lo.min(v), hi.max(v)),
        );
        let _ = writeln!(out, "  {name:<7} [{lo:.4}, {hi:.4}]");
    }
    Ok(out)
}

pub fn cmd_train(cfg: &RunConfig, model: &str, data: Option<&Path>) -> Result<String> {
    let kind: ModelKind = model.parse()?;
    let path = data.map_or_else(|| cfg.dataset_path(), Path::to_path_buf);
    let (samples, _) = samples_from_csv(&read_file(&path)?)?;
    let standardizer = fit_standardizer(&samples)?;
    let x = standardizer.standardize_all(&samples);
    info!("training {kind} on {} samples from {}", samples.len(), path.display());
    let (trained, log) = train_model(kind, &x, &standardizer, cfg)?;
    let ckpt = cfg.out_dir.join(checkpoint_file(kind));
    write_file(&ckpt, &trained.to_checkpoint(&standardizer, &cfg.digest()))?;
    let log_path = cfg.out_dir.join(training_log_file(kind));
    write_file(&log_path, &log)?;
    Ok(format!(
        "trained {kind} on {} samples\ncheckpoint: {}\ntraining log: {}\n",
        samples.len(),
        ckpt.display(),
        log_path.display()
    ))
}

/// Parses a labels file: one number per line, blank lines, `#` comments and
/// a `P1008` header line allowed.
pub fn parse_labels(text: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') || (out.is_empty() && t == COLUMN_NAMES[0]) {
            continue;
        }
        let v: f64 = t.parse().map_err(|_| Error::Schema {
            row: Some(i + 1),
            column: Some(COLUMN_NAMES[0].into()),
            message: format!("'{t}' is not a number"),
        })?;
        out.push(v);
    }
    if out.is_empty() {
        return Err(Error::schema("labels file holds no values"));
    }
    Ok(out)
}

pub fn cmd_generate(cfg: &RunConfig, checkpoint: &Path, labels: Option<&Path>, n_given: bool) -> Result<String> {
    let (model, standardizer, _) = TrainedModel::from_checkpoint(&read_file(checkpoint)?).map_err(|e| match e {
        Error::Checkpoint(msg) => Error::Checkpoint(format!("{}: {msg}", checkpoint.display())),
        other => other,
    })?;
    let kind = model.kind();
    let labels = labels.map(|p| read_file(p).and_then(|t| parse_labels(&t))).transpose()?;
    let n = match &labels {
        Some(l) if n_given && l.len() != cfg.generation.n => {
            return Err(Error::InvalidArgument(format!(
                "--n {} disagrees with {} labels",
                cfg.generation.n,
                l.len()
            )))
        }
        Some(l) => l.len(),
        None => cfg.generation.n,
    };
    let seed = cfg.generation.seed;
    let generated = model.generate(n, seed, labels.as_deref())?;
    let samples = standardizer.destandardize_all(&generated)?;
    let (kept, _) = in_domain_filter(&samples);
    let path = cfg.out_dir.join(samples_file(kind));
    write_file(&path, &samples_csv(kind, &samples, seed, &cfg.digest()))?;
    Ok(format!(
        "generated {n} {kind} samples (seed {seed}), {} in domain\nsamples: {}\n",
        kept.len(),
        path.display()
    ))
}

/// Error moments laid out with outputs as columns and mu/sigma as rows.
pub fn error_table(v: &Validation) -> String {
    let mut out = format!("{:<6}", "");
    for name in &COLUMN_NAMES[PMP_DIM..SAMPLE_DIM] {
        let _ = write!(out, "  {name:>12}");
    }
    out.push('\n');
    let stats = v.stats.outputs.to_array();
    for (label, pick) in [("mu", 0), ("sigma", 1)] {
        let _ = write!(out, "{label:<6}");
        for e in &stats {
            let value = if pick == 0 { e.mu } else { e.sigma };
            let _ = write!(out, "  {value:>12.4e}");
        }
        out.push('\n');
    }
    out
}

pub fn cmd_validate(cfg: &RunConfig, samples: Option<&Path>, model: Option<&str>) -> Result<String> {
    let path = samples
        .map(Path::to_path_buf)
        .or_else(|| cfg.validation.samples.clone())
        .ok_or_else(|| Error::InvalidArgument("no samples file given".into()))?;
    let (samples, meta) = samples_from_csv(&read_file(&path)?)?;
    let kind: ModelKind = match model.or(meta.get("model")) {
        Some(m) => m.parse()?,
        None => {
            return Err(Error::InvalidArgument(format!(
                "{} does not name its model; pass --model",
                path.display()
            )))
        }
    };
    let seed = match meta.get("seed") {
        Some(s) => s
            .parse()
            .map_err(|_| Error::schema(format!("bad seed '{s}' in {}", path.display())))?,
        None => cfg.generation.seed,
    };
    let validation = validate_samples(&samples)?;
    let digest = cfg.digest();
    let report = ModelReport::new(kind, &validation, seed, &digest);
    let report_path = cfg.out_dir.join(report_file(kind));
    write_file(&report_path, &report.to_json()?)?;
    let errors_path = cfg.out_dir.join(errors_file(kind));
    write_file(&errors_path, &error_csv(kind, &validation, &digest))?;
    Ok(format!(
        "{kind}: {} of {} samples in domain\n{}report: {}\nerrors: {}\n",
        validation.in_domain_count,
        validation.samples.len(),
        error_table(&validation),
        report_path.display(),
        errors_path.display()
    ))
}

pub fn cmd_compare(cfg: &RunConfig, reports: &[PathBuf]) -> Result<String> {
    let paths = if reports.is_empty() {
        cfg.validation.reports.clone()
    } else {
        reports.to_vec()
    };
    let mut parsed: Vec<ModelReport> = Vec::with_capacity(paths.len());
    for p in &paths {
        let r = ModelReport::from_json(&read_file(p)?).map_err(|e| match e {
            Error::Json(j) => Error::schema(format!("{}: {j}", p.display())),
            other => other,
        })?;
        if parsed.iter().any(|q| q.model == r.model) {
            return Err(Error::InvalidArgument(format!(
                "duplicate report for {} in {}",
                r.model,
                p.display()
            )));
        }
        parsed.push(r);
    }
    let comparison = compare_models(&parsed)?;
    let path = cfg.out_dir.join(COMPARISON_FILE);
    write_file(&path, &comparison.to_json()?)?;
    Ok(format!("{}comparison: {}\n", comparison.to_table(), path.display()))
}

pub fn execute(cli: &Cli) -> Result<String> {
    let cfg = effective_config(cli)?;
    match &cli.command {
        Command::MakeData { .. } => cmd_make_data(&cfg),
        Command::Train { model, data } => cmd_train(&cfg, model, data.as_deref()),
        Command::Generate { checkpoint, n, labels } => {
            cmd_generate(&cfg, checkpoint, labels.as_deref(), n.is_some())
        }
        Command::Validate { samples, model } => cmd_validate(&cfg, samples.as_deref(), model.as_deref()),
        Command::Compare { reports } => cmd_compare(&cfg, reports),
    }
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let _ = env_logger::Builder::from_env(env_logger::Env::new().filter_or(LOG_ENV, "warn"))
        .format_timestamp(None)
        .try_init();
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(text) => {
            print!("{text}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_file_formats() {
        assert_eq!(parse_labels("P1008\n0.5\n\n# c\n4.5\n").unwrap(), vec![0.5, 4.5]);
        match parse_labels("1\nx\n") {
            Err(Error::Schema { row, .. }) => assert_eq!(row, Some(2)),
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse_labels("# nothing\n").is_err());
    }

    #[test]
    fn seed_override_targets_the_command() {
        let cli = Cli::try_parse_from(["tabgen", "--seed", "9", "train", "vae"]).unwrap();
        let cfg = effective_config(&cli).unwrap();
        assert_eq!(cfg.vae.seed, 9);
        assert_eq!(cfg.gan.seed, 42);
        let cli = Cli::try_parse_from(["tabgen", "make-data", "--seed", "3", "--n", "10"]).unwrap();
        let cfg = effective_config(&cli).unwrap();
        assert_eq!((cfg.dataset.seed, cfg.dataset.n), (3, 10));
    }

    #[test]
    fn zero_samples_is_a_usage_error() {
        let cli = Cli::try_parse_from(["tabgen", "make-data", "--n", "0"]).unwrap();
        let e = effective_config(&cli).unwrap_err();
        assert_eq!(e.exit_code(), 1);
    }

    #[test]
    fn unknown_model_lists_choices() {
        let e = cmd_train(&RunConfig::default(), "xyz", None).unwrap_err();
        assert_eq!(e.exit_code(), 1);
        assert!(e.to_string().contains("gan, nf, vae or cvae"));
    }
}
