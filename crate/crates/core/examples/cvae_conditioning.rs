//! Conditions the CVAE on chosen P1008 values and checks what comes back.

use tabgen::cvae::{cvae_generate, train_cvae, CvaeConfig};
use tabgen::dataset::{fit_standardizer, make_training_set};

fn main() -> tabgen::Result<()> {
    let data = make_training_set(200, 42)?;
    let st = fit_standardizer(&data)?;
    let x = st.standardize_all(&data);

    let config = CvaeConfig { epochs: 1000, ..CvaeConfig::default() };
    let (model, _) = train_cvae(&x, &st, &config)?;

    println!("{:>6} {:>10} {:>10}", "label", "mean P1008", "mean VoidF4");
    for label in [0.5, 1.5, 2.5, 3.5, 4.5] {
        let samples = st.destandardize_all(&cvae_generate(&model, &[label; 100], 3)?)?;
        let p: f64 = samples.iter().map(|s| s.inputs.to_array()[0]).sum::<f64>() / 100.0;
        let v: f64 = samples.iter().map(|s| s.outputs.to_array()[3]).sum::<f64>() / 100.0;
        println!("{label:>6.1} {p:>10.3} {v:>10.4}");
    }
    Ok(())
}
