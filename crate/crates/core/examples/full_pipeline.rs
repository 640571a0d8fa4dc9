//! Runs the whole pipeline and writes every artifact.
//!
//! Usage: `cargo run --release --example full_pipeline [config.toml] [out-dir]`
//!
//! Defaults train every model at full size, which takes a few minutes.

use std::path::PathBuf;

use tabgen::config::RunConfig;
use tabgen::pipeline::run_pipeline;

fn main() -> tabgen::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("TABGEN_LOG", "info")).init();
    let mut args = std::env::args().skip(1);
    let config = match args.next() {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let out = args.next().map_or_else(|| config.out_dir.clone(), PathBuf::from);

    let run = run_pipeline(&config)?;
    run.write_to(&out)?;
    for m in &run.models {
        println!(
            "{:>5}: trained in {:>6.1} s, {} of {} in domain",
            m.kind(),
            m.training_time.as_secs_f64(),
            m.report.in_domain_count,
            m.report.generated_count
        );
    }
    print!("{}", run.comparison.to_table());
    println!("artifacts in {}", out.display());
    Ok(())
}
