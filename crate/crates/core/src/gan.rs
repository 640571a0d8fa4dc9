//! Generator/discriminator pair trained by alternating minimax updates.
//!
//! The discriminator descends `-[mean ln D(x) + mean ln(1 - D(G(z)))]`; the
//! generator uses the non-saturating objective `-mean ln D(G(z))`, which has
//! the same fixed point but keeps useful gradients early in training.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::nn::loss::{binary_cross_entropy_grad, clamp_probability};
use crate::nn::serialize::{read_network, write_network};
use crate::nn::{Activation, AdamState, DenseNetwork, Matrix, MlpSpec, Mode, NetworkGradients};
use crate::rng::{permutation, seeded, standard_normal_matrix, SeededRng};
use crate::text::FieldReader;
use crate::{Error, Result};

/// Value of the minimax objective at equilibrium, `2 JS(p_X || p_G) - 2 ln 2`
/// with vanishing divergence.
pub const EQUILIBRIUM_LOSS: f64 = -2.0 * std::f64::consts::LN_2;

pub fn equilibrium_loss_value() -> f64 {
    EQUILIBRIUM_LOSS
}

/// Discriminator that is optimal for a fixed generator: `p_x / (p_x + p_g)`.
pub fn optimal_discriminator(p_x: f64, p_g: f64) -> Result<f64> {
    if !(p_x >= 0.0 && p_g >= 0.0) || !p_x.is_finite() || !p_g.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "densities must be finite and nonnegative, got {p_x} and {p_g}"
        )));
    }
    if p_x + p_g == 0.0 {
        return Err(Error::InvalidArgument("both densities are zero".into()));
    }
    Ok(p_x / (p_x + p_g))
}

/// `mean ln D(x) + mean ln(1 - D(G(z)))` with clamped probabilities.
pub fn minimax_objective(d_real: &[f64], d_fake: &[f64]) -> Result<f64> {
    Ok(-discriminator_loss(d_real, d_fake)?)
}

pub fn discriminator_loss(d_real: &[f64], d_fake: &[f64]) -> Result<f64> {
    if d_real.is_empty() || d_fake.is_empty() {
        return Err(Error::InvalidArgument("empty batch".into()));
    }
    let real = d_real.iter().map(|&p| clamp_probability(p).ln()).sum::<f64>() / d_real.len() as f64;
    let fake = d_fake
        .iter()
        .map(|&p| (1.0 - clamp_probability(p)).ln())
        .sum::<f64>()
        / d_fake.len() as f64;
    Ok(-(real + fake))
}

pub fn generator_loss(d_fake: &[f64]) -> Result<f64> {
    if d_fake.is_empty() {
        return Err(Error::InvalidArgument("empty batch".into()));
    }
    Ok(-d_fake.iter().map(|&p| clamp_probability(p).ln()).sum::<f64>() / d_fake.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GanConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub latent_dim: usize,
    pub generator_hidden: Vec<usize>,
    pub discriminator_hidden: Vec<usize>,
    pub generator_learning_rate: f64,
    pub discriminator_learning_rate: f64,
    /// Std of Gaussian noise added to every discriminator input during
    /// training. Zero disables it.
    pub instance_noise: f64,
    pub seed: u64,
}

impl Default for GanConfig {
    fn default() -> Self {
        Self {
            epochs: 30_000,
            batch_size: 32,
            latent_dim: 5,
            generator_hidden: vec![32, 32],
            discriminator_hidden: vec![32, 32],
            generator_learning_rate: 1e-3,
            discriminator_learning_rate: 1e-3,
            instance_noise: 0.5,
            seed: 42,
        }
    }
}

impl GanConfig {
    pub fn validate(&self) -> Result<()> {
        let counts = [self.epochs, self.batch_size, self.latent_dim];
        if counts.contains(&0)
            || self.generator_hidden.contains(&0)
            || self.discriminator_hidden.contains(&0)
        {
            return Err(Error::InvalidArgument("GAN counts must be positive".into()));
        }
        if !(self.generator_learning_rate > 0.0 && self.discriminator_learning_rate > 0.0) {
            return Err(Error::InvalidArgument("learning rates must be positive".into()));
        }
        if !(self.instance_noise >= 0.0 && self.instance_noise.is_finite()) {
            return Err(Error::InvalidArgument("instance_noise must be non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GanModel {
    /// `latent_dim -> data_dim`, ReLU hidden layers and a linear head.
    pub generator: DenseNetwork,
    /// `data_dim -> 1`, ReLU hidden layers and a sigmoid head.
    pub discriminator: DenseNetwork,
    pub latent_dim: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GanEpochRecord {
    pub epoch: usize,
    pub generator_loss: f64,
    pub discriminator_loss: f64,
    pub accuracy_real: f64,
    pub accuracy_fake: f64,
}

impl GanEpochRecord {
    pub fn accuracy(&self) -> f64 {
        0.5 * (self.accuracy_real + self.accuracy_fake)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainingLog {
    pub records: Vec<GanEpochRecord>,
}

impl TrainingLog {
    /// Mean balanced discriminator accuracy over the last `n` epochs.
    pub fn mean_accuracy_last(&self, n: usize) -> f64 {
        let tail = &self.records[self.records.len().saturating_sub(n)..];
        tail.iter().map(GanEpochRecord::accuracy).sum::<f64>() / tail.len().max(1) as f64
    }

    pub fn to_csv(&self) -> String {
        let mut out =
            String::from("epoch,generator_loss,discriminator_loss,accuracy_real,accuracy_fake\n");
        for r in &self.records {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                r.epoch, r.generator_loss, r.discriminator_loss, r.accuracy_real, r.accuracy_fake
            );
        }
        out
    }
}

impl GanModel {
    pub fn new(config: &GanConfig, data_dim: usize, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut rng = seeded(seed);
        let mut g_sizes = vec![config.latent_dim];
        g_sizes.extend(&config.generator_hidden);
        g_sizes.push(data_dim);
        let mut d_sizes = vec![data_dim];
        d_sizes.extend(&config.discriminator_hidden);
        d_sizes.push(1);
        let generator = DenseNetwork::mlp(
            &MlpSpec::new(&g_sizes, Activation::ReLU, Activation::Linear),
            &mut rng,
        )?;
        let discriminator = DenseNetwork::mlp(
            &MlpSpec::new(&d_sizes, Activation::ReLU, Activation::Sigmoid),
            &mut rng,
        )?;
        Ok(Self {
            generator,
            discriminator,
            latent_dim: config.latent_dim,
        })
    }

    pub fn data_dim(&self) -> usize {
        self.generator.output_size()
    }

    /// `G(z)` for each latent row.
    pub fn generate_from_latent(&self, latent: &Matrix) -> Result<Matrix> {
        self.generator.forward_batch(latent)
    }

    pub fn discriminate(&self, x: &Matrix) -> Result<Vec<f64>> {
        Ok(self.discriminator.forward_batch(x)?.into_vec())
    }

    /// Discriminator loss for a real batch and generated samples from
    /// `latent`, with its gradient w.r.t. the discriminator parameters.
    /// `noise`, when given, is added to the stacked `[real; fake]` inputs.
    pub fn discriminator_loss_and_grad(
        &self,
        real: &Matrix,
        latent: &Matrix,
        noise: Option<&Matrix>,
    ) -> Result<(f64, NetworkGradients, [f64; 2])> {
        let fake = self.generate_from_latent(latent)?;
        let mut both = real.vstack(&fake)?;
        if let Some(n) = noise {
            add_noise(&mut both, n)?;
        }
        let (probs, tape) = self.discriminator.forward_recorded(&both, Mode::Inference)?;
        let p = probs.as_slice();
        let (p_real, p_fake) = p.split_at(real.rows());
        let loss = discriminator_loss(p_real, p_fake)?;

        let n_real = real.rows() as f64;
        let n_fake = fake.rows() as f64;
        let upstream: Vec<f64> = p_real
            .iter()
            .map(|&q| binary_cross_entropy_grad(q, 1.0) / n_real)
            .chain(p_fake.iter().map(|&q| binary_cross_entropy_grad(q, 0.0) / n_fake))
            .collect();
        let upstream = Matrix::from_vec(both.rows(), 1, upstream)?;
        let (grads, _) = self.discriminator.backward(&tape, &upstream)?;

        let acc_real = p_real.iter().filter(|&&q| q >= 0.5).count() as f64 / n_real;
        let acc_fake = p_fake.iter().filter(|&&q| q < 0.5).count() as f64 / n_fake;
        Ok((loss, grads, [acc_real, acc_fake]))
    }

    /// Non-saturating generator loss with its gradient w.r.t. the generator
    /// parameters; the discriminator is held fixed. `noise`, when given, is
    /// added to the generated samples before they reach the discriminator.
    pub fn generator_loss_and_grad(
        &self,
        latent: &Matrix,
        noise: Option<&Matrix>,
    ) -> Result<(f64, NetworkGradients)> {
        let (mut fake, g_tape) = self.generator.forward_recorded(latent, Mode::Inference)?;
        if let Some(n) = noise {
            add_noise(&mut fake, n)?;
        }
        let (probs, d_tape) = self.discriminator.forward_recorded(&fake, Mode::Inference)?;
        let loss = generator_loss(probs.as_slice())?;
        let n = latent.rows() as f64;
        let upstream = probs.map(|q| binary_cross_entropy_grad(q, 1.0) / n);
        let (_, d_input) = self.discriminator.backward(&d_tape, &upstream)?;
        let (grads, _) = self.generator.backward(&g_tape, &d_input)?;
        Ok((loss, grads))
    }

    pub fn write_body(&self, out: &mut String) {
        let _ = writeln!(out, "latent_dim {}", self.latent_dim);
        out.push_str("generator\n");
        write_network(out, &self.generator);
        out.push_str("discriminator\n");
        write_network(out, &self.discriminator);
    }

    pub fn read_body(r: &mut FieldReader<'_>) -> Result<Self> {
        let latent_dim = r.expect_usize("latent_dim")?;
        r.expect("generator")?;
        let generator = read_network(r)?;
        r.expect("discriminator")?;
        let discriminator = read_network(r)?;
        if generator.input_size() != latent_dim
            || discriminator.input_size() != generator.output_size()
            || discriminator.output_size() != 1
        {
            return Err(Error::Checkpoint("GAN network shapes are inconsistent".into()));
        }
        Ok(Self {
            generator,
            discriminator,
            latent_dim,
        })
    }
}

fn add_noise(x: &mut Matrix, noise: &Matrix) -> Result<()> {
    if (x.rows(), x.cols()) != (noise.rows(), noise.cols()) {
        return Err(Error::Shape(format!(
            "noise is {}x{}, inputs are {}x{}",
            noise.rows(),
            noise.cols(),
            x.rows(),
            x.cols()
        )));
    }
    x.add_assign(noise);
    Ok(())
}

/// Alternating training: per minibatch one discriminator step, then one
/// generator step. An epoch is one pass over `data`.
pub fn train_gan(data: &Matrix, config: &GanConfig) -> Result<(GanModel, TrainingLog)> {
    if data.rows() == 0 {
        return Err(Error::InvalidArgument("empty training set".into()));
    }
    let mut model = GanModel::new(config, data.cols(), config.seed)?;
    let mut rng = seeded(config.seed.wrapping_add(1));
    let mut d_opt = AdamState::new(
        model.discriminator.parameter_count(),
        config.discriminator_learning_rate,
    );
    let mut g_opt = AdamState::new(model.generator.parameter_count(), config.generator_learning_rate);
    let mut log = TrainingLog::default();
    let mut params = Vec::new();

    for epoch in 0..config.epochs {
        let order = permutation(&mut rng, data.rows());
        let (mut g_sum, mut d_sum, mut acc_r, mut acc_f, mut batches) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for chunk in order.chunks(config.batch_size) {
            let real = data.select_rows(chunk);

            let latent = standard_normal_matrix(&mut rng, chunk.len(), model.latent_dim);
            let noise = instance_noise(&mut rng, 2 * chunk.len(), data.cols(), config.instance_noise);
            let (d_loss, d_grads, [ar, af]) =
                model
                    .discriminator_loss_and_grad(&real, &latent, noise.as_ref())
                    .map_err(|e| e.at_epoch(epoch))?;
            if !d_loss.is_finite() {
                return Err(Error::Diverged {
                    epoch,
                    what: "discriminator loss".into(),
                });
            }
            params.clear();
            model.discriminator.parameters_into(&mut params);
            d_opt.update(&mut params, &d_grads.flatten())?;
            model.discriminator.set_parameters(&params)?;

            let latent = standard_normal_matrix(&mut rng, chunk.len(), model.latent_dim);
            let noise = instance_noise(&mut rng, chunk.len(), data.cols(), config.instance_noise);
            let (g_loss, g_grads) = model
                .generator_loss_and_grad(&latent, noise.as_ref())
                .map_err(|e| e.at_epoch(epoch))?;
            if !g_loss.is_finite() {
                return Err(Error::Diverged {
                    epoch,
                    what: "generator loss".into(),
                });
            }
            params.clear();
            model.generator.parameters_into(&mut params);
            g_opt.update(&mut params, &g_grads.flatten())?;
            model.generator.set_parameters(&params)?;

            g_sum += g_loss;
            d_sum += d_loss;
            acc_r += ar;
            acc_f += af;
            batches += 1.0;
        }
        log.records.push(GanEpochRecord {
            epoch,
            generator_loss: g_sum / batches,
            discriminator_loss: d_sum / batches,
            accuracy_real: acc_r / batches,
            accuracy_fake: acc_f / batches,
        });
    }
    Ok((model, log))
}

fn instance_noise(rng: &mut SeededRng, rows: usize, cols: usize, std: f64) -> Option<Matrix> {
    (std > 0.0).then(|| standard_normal_matrix(rng, rows, cols).map(|v| v * std))
}

/// `n` standardized samples from i.i.d. standard normal latents.
pub fn gan_generate(model: &GanModel, n: usize, seed: u64) -> Result<Matrix> {
    if n == 0 {
        return Err(Error::InvalidArgument("sample count must be at least 1".into()));
    }
    let mut rng = seeded(seed);
    let latent = standard_normal_matrix(&mut rng, n, model.latent_dim);
    model.generate_from_latent(&latent)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gradcheck::{central_difference, max_relative_error, DEFAULT_STEP};
    use crate::rng::standard_normal_matrix;
    use std::f64::consts::LN_2;

    #[test]
    fn discriminator_loss_reference_values() {
        assert!((discriminator_loss(&[0.5], &[0.5]).unwrap() - 2.0 * LN_2).abs() < 1e-15);
        let near_perfect = discriminator_loss(&[1.0 - 1e-12], &[1e-12]).unwrap();
        assert!(near_perfect > 0.0 && near_perfect < 1e-6);
        let mixed = discriminator_loss(&[0.8], &[0.3]).unwrap();
        assert!((mixed - (-(0.8f64.ln()) - 0.7f64.ln())).abs() < 1e-15);
        assert!((mixed - 0.579_818_495_252_942).abs() < 1e-12);
        assert!(discriminator_loss(&[], &[0.5]).is_err());
    }

    #[test]
    fn generator_loss_reference_values() {
        assert!((generator_loss(&[0.5]).unwrap() - LN_2).abs() < 1e-15);
        assert!(generator_loss(&[1.0]).unwrap() < 1e-6);
        let v = generator_loss(&[0.25, 0.75]).unwrap();
        assert!((v - 0.836_988_216_785_835_8).abs() < 1e-12);
        assert!(generator_loss(&[]).is_err());
    }

    #[test]
    fn optimal_discriminator_cases() {
        assert_eq!(optimal_discriminator(0.3, 0.3).unwrap(), 0.5);
        assert_eq!(optimal_discriminator(0.7, 0.0).unwrap(), 1.0);
        assert!((optimal_discriminator(0.2, 0.6).unwrap() - 0.25).abs() < 1e-15);
        assert!(optimal_discriminator(0.0, 0.0).is_err());
        assert!(optimal_discriminator(-1.0, 0.5).is_err());
    }

    #[test]
    fn equilibrium_objective() {
        assert!((equilibrium_loss_value() + 1.386_294_361_119_890_6).abs() < 1e-15);
        let v = minimax_objective(&[0.5; 4], &[0.5; 4]).unwrap();
        assert!((v - EQUILIBRIUM_LOSS).abs() < 1e-12);
    }

    #[test]
    fn disjoint_atoms_give_zero_max_objective() {
        // p_X = (1, 0), p_G = (0, 1): optimal D is 1 on the first atom, 0 on the second
        let p_x = [1.0, 0.0];
        let p_g = [0.0, 1.0];
        let d: Vec<f64> = p_x
            .iter()
            .zip(&p_g)
            .map(|(a, b)| optimal_discriminator(*a, *b).unwrap())
            .collect();
        let mut objective = 0.0;
        for i in 0..2 {
            if p_x[i] > 0.0 {
                objective += p_x[i] * d[i].ln();
            }
            if p_g[i] > 0.0 {
                objective += p_g[i] * (1.0 - d[i]).ln();
            }
        }
        // Jensen-Shannon divergence of disjoint atoms is ln 2
        let js = LN_2;
        assert_eq!(objective, 0.0);
        assert!((objective - (2.0 * js + EQUILIBRIUM_LOSS)).abs() < 1e-15);
    }

    #[test]
    fn generation_is_seeded_and_sized() {
        let model = GanModel::new(&GanConfig::default(), 9, 1).unwrap();
        let a = gan_generate(&model, 500, 7).unwrap();
        assert_eq!((a.rows(), a.cols()), (500, 9));
        assert_eq!(a, gan_generate(&model, 500, 7).unwrap());
        assert!(gan_generate(&model, 0, 7).is_err());
        let zero = model.generate_from_latent(&Matrix::zeros(1, 5)).unwrap();
        assert_eq!(zero.into_vec(), model.generator.forward(&[0.0; 5]).unwrap());
    }

    #[test]
    fn short_training_is_deterministic() {
        let data = Matrix::from_rows(
            &(0..40)
                .map(|i| vec![(i as f64 * 0.37).sin(); 9])
                .collect::<Vec<_>>(),
        )
        .unwrap();
        let config = GanConfig {
            epochs: 5,
            ..GanConfig::default()
        };
        let (a, la) = train_gan(&data, &config).unwrap();
        let (b, lb) = train_gan(&data, &config).unwrap();
        assert_eq!(a, b);
        assert_eq!(la, lb);
        assert_eq!(la.records.len(), 5);
        assert!(la
            .records
            .iter()
            .all(|r| (0.0..=1.0).contains(&r.accuracy_real) && r.generator_loss >= 0.0));
    }

    fn small_model() -> (GanModel, Matrix, Matrix, SeededRng) {
        let config = GanConfig {
            latent_dim: 3,
            generator_hidden: vec![6, 5],
            discriminator_hidden: vec![5, 4],
            ..GanConfig::default()
        };
        let mut model = GanModel::new(&config, 4, 11).unwrap();
        let mut rng = seeded(12);
        // Zero biases put dead rows exactly on ReLU kinks, where differences are one-sided.
        let g = standard_normal_matrix(&mut rng, 1, model.generator.parameter_count());
        model.generator.set_parameters(&g.map(|v| 0.5 * v).into_vec()).unwrap();
        let d = standard_normal_matrix(&mut rng, 1, model.discriminator.parameter_count());
        model.discriminator.set_parameters(&d.map(|v| 0.5 * v).into_vec()).unwrap();
        let real = standard_normal_matrix(&mut rng, 6, 4);
        let latent = standard_normal_matrix(&mut rng, 5, 3);
        (model, real, latent, rng)
    }

    #[test]
    fn discriminator_gradient_matches_differences() {
        let (model, real, latent, mut rng) = small_model();
        let noise = standard_normal_matrix(&mut rng, 11, 4).map(|v| 0.3 * v);
        for noise in [None, Some(&noise)] {
            let (_, grads, _) = model.discriminator_loss_and_grad(&real, &latent, noise).unwrap();
            let numeric = central_difference(&model.discriminator.parameters(), DEFAULT_STEP, |p| {
                let mut m = model.clone();
                m.discriminator.set_parameters(p).unwrap();
                m.discriminator_loss_and_grad(&real, &latent, noise).unwrap().0
            });
            assert!(max_relative_error(&grads.flatten(), &numeric) < 1e-4);
        }
    }

    #[test]
    fn generator_gradient_matches_differences() {
        let (model, _, latent, mut rng) = small_model();
        let noise = standard_normal_matrix(&mut rng, 5, 4).map(|v| 0.3 * v);
        for noise in [None, Some(&noise)] {
            let (_, grads) = model.generator_loss_and_grad(&latent, noise).unwrap();
            let numeric = central_difference(&model.generator.parameters(), DEFAULT_STEP, |p| {
                let mut m = model.clone();
                m.generator.set_parameters(p).unwrap();
                m.generator_loss_and_grad(&latent, noise).unwrap().0
            });
            assert!(max_relative_error(&grads.flatten(), &numeric) < 1e-4);
        }
    }
}
