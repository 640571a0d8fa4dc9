//! Validates perturbed oracle samples and prints the JSON report.

use rand::Rng;
use tabgen::dataset::{make_training_set, Sample, SAMPLE_DIM};
use tabgen::model::ModelKind;
use tabgen::rng::seeded;
use tabgen::validation::{validate_samples, ModelReport};

fn main() -> tabgen::Result<()> {
    let mut rng = seeded(1);
    // oracle rows with small noise on the outputs, as a stand-in generator
    let samples: Vec<Sample> = make_training_set(300, 8)?
        .iter()
        .map(|s| {
            let mut v = s.to_array();
            for x in &mut v[5..SAMPLE_DIM] {
                *x += rng.random_range(-0.01..0.01);
            }
            Sample::from_array(v)
        })
        .collect();

    let v = validate_samples(&samples)?;
    let report = ModelReport::new(ModelKind::Vae, &v, 1, "example");
    print!("{}", report.to_json()?);
    Ok(())
}
