//! Trains the GAN on the oracle dataset and prints discriminator accuracy.
//!
//! Usage: `cargo run --release --example gan_training [epochs]`

use tabgen::dataset::{fit_standardizer, make_training_set};
use tabgen::gan::{gan_generate, train_gan, GanConfig};
use tabgen::validation::validate;

fn main() -> tabgen::Result<()> {
    let epochs = std::env::args().nth(1).map_or(3000, |a| a.parse().expect("epochs"));
    let data = make_training_set(200, 42)?;
    let st = fit_standardizer(&data)?;
    let x = st.standardize_all(&data);

    let config = GanConfig { epochs, ..GanConfig::default() };
    let (model, log) = train_gan(&x, &config)?;
    for r in log.records.iter().step_by((epochs / 10).max(1)) {
        println!(
            "epoch {:>6}  D loss {:.4}  G loss {:.4}  accuracy {:.3}",
            r.epoch,
            r.discriminator_loss,
            r.generator_loss,
            r.accuracy()
        );
    }
    println!("accuracy over the last 100 epochs: {:.3}", log.mean_accuracy_last(100));

    let v = validate(&gan_generate(&model, 500, 7)?, &st)?;
    println!("in domain: {} of 500", v.in_domain_count);
    println!("mean error sigma: {:.4}", v.stats.outputs.mean_sigma());
    Ok(())
}
