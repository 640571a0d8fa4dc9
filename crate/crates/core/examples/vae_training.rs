//! Trains the VAE and reports the ELBO terms and sample quality.

use tabgen::dataset::{fit_standardizer, make_training_set};
use tabgen::vae::{train_vae, vae_generate, VaeConfig};
use tabgen::validation::validate;

fn main() -> tabgen::Result<()> {
    let data = make_training_set(200, 42)?;
    let st = fit_standardizer(&data)?;
    let x = st.standardize_all(&data);

    let config = VaeConfig { epochs: 1000, ..VaeConfig::default() };
    let (model, log) = train_vae(&x, &config)?;
    for (i, t) in log.epochs.iter().enumerate().step_by(200) {
        println!("epoch {i:>5}  loss {:.4}  recon {:.4}  kl {:.4}", t.total, t.reconstruction, t.kl);
    }

    let v = validate(&vae_generate(&model, 500, 7)?, &st)?;
    println!("in domain: {} of 500", v.in_domain_count);
    for (name, e) in ["VoidF1", "VoidF2", "VoidF3", "VoidF4"].iter().zip(v.stats.outputs.to_array()) {
        println!("{name}: mu {:+.4}  sigma {:.4}", e.mu, e.sigma);
    }
    Ok(())
}
