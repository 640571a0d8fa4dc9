//! Variational autoencoder with a diagonal Gaussian encoder and a
//! squared-error decoder.
//!
//! The loss per sample is `||x - decode(z)||^2 + kl_weight * KL(q(z|x) || N(0, I))`
//! with `z = mu + exp(logvar / 2) * eps`. Batch losses are means over rows.
//! Every function takes an optional label matrix which, when present, is
//! appended to both the encoder and the decoder input; the conditional model
//! in [`crate::cvae`] is built on that.

use std::fmt::Write as _;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::nn::serialize::{read_network, write_network};
use crate::nn::{Activation, AdamState, DenseNetwork, Matrix, MlpSpec, Mode, NetworkGradients, Tape};
use crate::rng::{permutation, seeded, standard_normal_matrix, SeededRng};
use crate::text::FieldReader;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VaeConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub latent_dim: usize,
    pub hidden: Vec<usize>,
    pub dropout: f64,
    pub batch_norm: bool,
    pub kl_weight: f64,
    pub learning_rate: f64,
    pub seed: u64,
}

impl Default for VaeConfig {
    fn default() -> Self {
        Self {
            epochs: 3000,
            batch_size: 30,
            latent_dim: 4,
            hidden: vec![64, 64, 64],
            dropout: 0.1,
            batch_norm: true,
            kl_weight: 1.0,
            learning_rate: 1e-3,
            seed: 42,
        }
    }
}

impl VaeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.batch_size == 0 || self.latent_dim == 0 || self.hidden.contains(&0) {
            return Err(Error::InvalidArgument("VAE counts must be positive".into()));
        }
        if self.batch_norm && self.batch_size < 2 {
            return Err(Error::InvalidArgument(
                "batch normalization needs batches of at least 2".into(),
            ));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::InvalidArgument(format!(
                "dropout {} outside [0, 1)",
                self.dropout
            )));
        }
        if !(self.kl_weight >= 0.0 && self.kl_weight.is_finite()) {
            return Err(Error::InvalidArgument("kl_weight must be non-negative".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidArgument("VAE learning rate must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VaeModel {
    /// `data (+ labels) -> [mu | logvar]`.
    pub encoder: DenseNetwork,
    /// `latent (+ labels) -> data`.
    pub decoder: DenseNetwork,
    pub latent_dim: usize,
}

/// Batch means of the loss terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElboTerms {
    pub total: f64,
    pub reconstruction: f64,
    pub kl: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VaeGradients {
    pub encoder: NetworkGradients,
    pub decoder: NetworkGradients,
}

impl VaeGradients {
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = self.encoder.flatten();
        self.decoder.flatten_into(&mut out);
        out
    }
}

pub(crate) struct Tapes {
    pub encoder: Tape,
    pub decoder: Tape,
}

impl VaeModel {
    /// Glorot-initialised model for `data_dim` features plus `label_dim` conditioning inputs.
    pub fn new(config: &VaeConfig, data_dim: usize, label_dim: usize, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut rng = seeded(seed);
        let mut sizes = vec![data_dim + label_dim];
        sizes.extend(&config.hidden);
        sizes.push(2 * config.latent_dim);
        let spec = MlpSpec {
            batch_norm: config.batch_norm,
            dropout: config.dropout,
            ..MlpSpec::new(&sizes, Activation::ReLU, Activation::Linear)
        };
        let encoder = DenseNetwork::mlp(&spec, &mut rng)?;

        let mut sizes = vec![config.latent_dim + label_dim];
        sizes.extend(config.hidden.iter().rev());
        sizes.push(data_dim);
        let spec = MlpSpec { sizes: &sizes, ..spec };
        let decoder = DenseNetwork::mlp(&spec, &mut rng)?;
        Self::from_parts(encoder, decoder, config.latent_dim)
    }

    pub fn from_parts(encoder: DenseNetwork, decoder: DenseNetwork, latent_dim: usize) -> Result<Self> {
        if encoder.output_size() != 2 * latent_dim {
            return Err(Error::Shape(format!(
                "encoder emits {} values, latent dimension {latent_dim} needs {}",
                encoder.output_size(),
                2 * latent_dim
            )));
        }
        let label_dim = decoder.input_size().checked_sub(latent_dim).ok_or_else(|| {
            Error::Shape(format!(
                "decoder takes {} inputs, fewer than the latent dimension {latent_dim}",
                decoder.input_size()
            ))
        })?;
        if encoder.input_size() != decoder.output_size() + label_dim {
            return Err(Error::Shape(format!(
                "encoder takes {} inputs, decoder emits {} with {label_dim} labels",
                encoder.input_size(),
                decoder.output_size()
            )));
        }
        Ok(Self {
            encoder,
            decoder,
            latent_dim,
        })
    }

    pub fn data_dim(&self) -> usize {
        self.decoder.output_size()
    }

    pub fn label_dim(&self) -> usize {
        self.decoder.input_size() - self.latent_dim
    }

    fn check_labels(&self, rows: usize, cond: Option<&Matrix>) -> Result<()> {
        let cols = cond.map_or(0, Matrix::cols);
        if cols != self.label_dim() || cond.is_some_and(|c| c.rows() != rows) {
            return Err(Error::Shape(format!(
                "model expects {} label columns for {rows} rows",
                self.label_dim()
            )));
        }
        Ok(())
    }

    pub(crate) fn encode_batch(&self, x: &Matrix, cond: Option<&Matrix>) -> Result<(Matrix, Matrix)> {
        self.check_labels(x.rows(), cond)?;
        let input = with_labels(x, cond)?;
        let h = self.encoder.forward_batch(&input)?;
        let l = self.latent_dim;
        Ok((h.slice_columns(0, l), h.slice_columns(l, 2 * l)))
    }

    pub(crate) fn decode_batch(&self, z: &Matrix, cond: Option<&Matrix>) -> Result<Matrix> {
        if z.cols() != self.latent_dim {
            return Err(Error::Shape(format!(
                "latent width {} differs from {}",
                z.cols(),
                self.latent_dim
            )));
        }
        self.check_labels(z.rows(), cond)?;
        self.decoder.forward_batch(&with_labels(z, cond)?)
    }

    /// Loss terms and parameter gradients for one batch with fixed noise `eps`.
    ///
    /// With `training` set, batch norm uses batch statistics and dropout
    /// draws masks from `rng` when one is given; otherwise both networks run
    /// in inference mode.
    pub(crate) fn loss_and_grad(
        &self,
        x: &Matrix,
        cond: Option<&Matrix>,
        eps: &Matrix,
        kl_weight: f64,
        training: bool,
        mut rng: Option<&mut SeededRng>,
    ) -> Result<(ElboTerms, VaeGradients, Tapes)> {
        self.check_labels(x.rows(), cond)?;
        let l = self.latent_dim;
        if eps.rows() != x.rows() || eps.cols() != l {
            return Err(Error::Shape(format!(
                "noise is {}x{}, expected {}x{l}",
                eps.rows(),
                eps.cols(),
                x.rows()
            )));
        }
        let enc_mode = mode_for(training, rng.as_deref_mut());
        let (h, enc_tape) = self.encoder.forward_recorded(&with_labels(x, cond)?, enc_mode)?;
        let mu = h.slice_columns(0, l);
        let logvar = h.slice_columns(l, 2 * l);
        let z = reparameterize_batch(&mu, &logvar, eps)?;
        let dec_mode = mode_for(training, rng);
        let (xr, dec_tape) = self.decoder.forward_recorded(&with_labels(&z, cond)?, dec_mode)?;

        let b = x.rows() as f64;
        let mut reconstruction = 0.0;
        let mut d_xr = Matrix::zeros(x.rows(), x.cols());
        for ((d, &xi), &ri) in d_xr.as_mut_slice().iter_mut().zip(x.as_slice()).zip(xr.as_slice()) {
            let diff = xi - ri;
            reconstruction += diff * diff;
            *d = -2.0 * diff / b;
        }
        reconstruction /= b;
        let kl = mu
            .iter_rows()
            .zip(logvar.iter_rows())
            .map(|(m, v)| kl_standard_normal(m, v))
            .sum::<Result<f64>>()?
            / b;
        let terms = ElboTerms {
            total: reconstruction + kl_weight * kl,
            reconstruction,
            kl,
        };
        if !terms.total.is_finite() {
            return Err(Error::NonFinite("VAE loss".into()));
        }

        let (dec_grads, d_dec_in) = self.decoder.backward(&dec_tape, &d_xr)?;
        let mut d_h = Matrix::zeros(x.rows(), 2 * l);
        for r in 0..x.rows() {
            let (m, v, e, dz) = (mu.row(r), logvar.row(r), eps.row(r), &d_dec_in.row(r)[..l]);
            let dst = d_h.row_mut(r);
            for j in 0..l {
                let sd = (0.5 * v[j]).exp();
                dst[j] = dz[j] + kl_weight * m[j] / b;
                dst[l + j] = dz[j] * e[j] * 0.5 * sd + kl_weight * 0.5 * (sd * sd - 1.0) / b;
            }
        }
        let (enc_grads, _) = self.encoder.backward(&enc_tape, &d_h)?;
        Ok((
            terms,
            VaeGradients {
                encoder: enc_grads,
                decoder: dec_grads,
            },
            Tapes {
                encoder: enc_tape,
                decoder: dec_tape,
            },
        ))
    }

    pub fn parameters(&self) -> Vec<f64> {
        let mut out = self.encoder.parameters();
        self.decoder.parameters_into(&mut out);
        out
    }

    pub fn set_parameters(&mut self, params: &[f64]) -> Result<()> {
        let rest = self.encoder.set_parameters(params)?;
        let rest = self.decoder.set_parameters(rest)?;
        if !rest.is_empty() {
            return Err(Error::Shape(format!("{} surplus VAE parameters", rest.len())));
        }
        Ok(())
    }

    pub fn write_body(&self, out: &mut String) {
        let _ = writeln!(out, "latent_dim {}", self.latent_dim);
        out.push_str("encoder\n");
        write_network(out, &self.encoder);
        out.push_str("decoder\n");
        write_network(out, &self.decoder);
    }

    pub fn read_body(r: &mut FieldReader<'_>) -> Result<Self> {
        let latent_dim = r.expect_usize("latent_dim")?;
        r.expect("encoder")?;
        let encoder = read_network(r)?;
        r.expect("decoder")?;
        let decoder = read_network(r)?;
        Self::from_parts(encoder, decoder, latent_dim)
    }
}

fn mode_for(training: bool, rng: Option<&mut SeededRng>) -> Mode<'_> {
    if training {
        Mode::Training(rng.map(|r| r as &mut dyn RngCore))
    } else {
        Mode::Inference
    }
}

fn with_labels(x: &Matrix, cond: Option<&Matrix>) -> Result<Matrix> {
    match cond {
        Some(c) => x.hstack(c),
        None => Ok(x.clone()),
    }
}

/// Inference-mode encoder output for one standardized vector.
pub fn encode(model: &VaeModel, x: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let (mu, logvar) = model.encode_batch(&Matrix::row_vector(x), None)?;
    Ok((mu.into_vec(), logvar.into_vec()))
}

/// `mu + exp(logvar / 2) * eps`.
pub fn reparameterize(mu: &[f64], logvar: &[f64], eps: &[f64]) -> Result<Vec<f64>> {
    if mu.len() != logvar.len() || mu.len() != eps.len() {
        return Err(Error::Shape(format!(
            "reparameterize lengths {}, {}, {}",
            mu.len(),
            logvar.len(),
            eps.len()
        )));
    }
    Ok(mu
        .iter()
        .zip(logvar)
        .zip(eps)
        .map(|((m, v), e)| m + (0.5 * v).exp() * e)
        .collect())
}

fn reparameterize_batch(mu: &Matrix, logvar: &Matrix, eps: &Matrix) -> Result<Matrix> {
    let data = reparameterize(mu.as_slice(), logvar.as_slice(), eps.as_slice())?;
    Matrix::from_vec(mu.rows(), mu.cols(), data)
}

/// `KL(N(mu, diag(exp(logvar))) || N(0, I))` in closed form.
pub fn kl_standard_normal(mu: &[f64], logvar: &[f64]) -> Result<f64> {
    if mu.len() != logvar.len() {
        return Err(Error::Shape(format!(
            "mu has {} entries, logvar {}",
            mu.len(),
            logvar.len()
        )));
    }
    Ok(0.5
        * mu.iter()
            .zip(logvar)
            .map(|(m, v)| m * m + v.exp() - 1.0 - v)
            .sum::<f64>())
}

/// Inference-mode loss terms for a batch with fixed noise (one row of `eps`
/// per row of `x`), weighting the KL term by `kl_weight`.
pub fn elbo_loss(model: &VaeModel, x: &Matrix, eps: &Matrix, kl_weight: f64) -> Result<ElboTerms> {
    Ok(model.loss_and_grad(x, None, eps, kl_weight, false, None)?.0)
}

/// [`elbo_loss`] together with its gradient, flattened encoder then decoder.
pub fn elbo_loss_and_grad(
    model: &VaeModel,
    x: &Matrix,
    eps: &Matrix,
    kl_weight: f64,
) -> Result<(ElboTerms, VaeGradients)> {
    let (terms, grads, _) = model.loss_and_grad(x, None, eps, kl_weight, false, None)?;
    Ok((terms, grads))
}

/// Per-epoch means over minibatches, measured in training mode.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct VaeLog {
    pub epochs: Vec<ElboTerms>,
}

impl VaeLog {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("epoch,total,reconstruction,kl\n");
        for (e, t) in self.epochs.iter().enumerate() {
            let _ = writeln!(out, "{e},{},{},{}", t.total, t.reconstruction, t.kl);
        }
        out
    }
}

pub(crate) fn train_loop(
    model: &mut VaeModel,
    data: &Matrix,
    labels: Option<&Matrix>,
    config: &VaeConfig,
) -> Result<VaeLog> {
    config.validate()?;
    if data.rows() == 0 {
        return Err(Error::InvalidArgument("empty training set".into()));
    }
    let mut rng = seeded(config.seed.wrapping_add(1));
    let mut params = model.parameters();
    let mut opt = AdamState::new(params.len(), config.learning_rate);
    let mut log = VaeLog::default();
    let min_batch = if config.batch_norm { 2 } else { 1 };

    for epoch in 0..config.epochs {
        let order = permutation(&mut rng, data.rows());
        let mut sum = [0.0; 3];
        let mut batches = 0.0;
        for chunk in order.chunks(config.batch_size) {
            if chunk.len() < min_batch {
                continue;
            }
            let x = data.select_rows(chunk);
            let c = labels.map(|l| l.select_rows(chunk));
            let eps = standard_normal_matrix(&mut rng, chunk.len(), model.latent_dim);
            let (terms, grads, tapes) = model
                .loss_and_grad(&x, c.as_ref(), &eps, config.kl_weight, true, Some(&mut rng))
                .map_err(|e| e.at_epoch(epoch))?;
            opt.update(&mut params, &grads.flatten())?;
            model.set_parameters(&params)?;
            model.encoder.update_running_stats(&tapes.encoder);
            model.decoder.update_running_stats(&tapes.decoder);
            sum[0] += terms.total;
            sum[1] += terms.reconstruction;
            sum[2] += terms.kl;
            batches += 1.0;
        }
        if batches == 0.0 {
            return Err(Error::InvalidArgument(
                "no minibatch is large enough for batch normalization".into(),
            ));
        }
        log.epochs.push(ElboTerms {
            total: sum[0] / batches,
            reconstruction: sum[1] / batches,
            kl: sum[2] / batches,
        });
    }
    Ok(log)
}

/// Minibatch Adam on the mean loss over standardized `data`.
pub fn train_vae(data: &Matrix, config: &VaeConfig) -> Result<(VaeModel, VaeLog)> {
    let mut model = VaeModel::new(config, data.cols(), 0, config.seed)?;
    let log = train_loop(&mut model, data, None, config)?;
    Ok((model, log))
}

/// Decodes `n` standard normal latents in inference mode.
pub fn vae_generate(model: &VaeModel, n: usize, seed: u64) -> Result<Matrix> {
    if n == 0 {
        return Err(Error::InvalidArgument("sample count must be at least 1".into()));
    }
    let mut rng = seeded(seed);
    let z = standard_normal_matrix(&mut rng, n, model.latent_dim);
    model.decode_batch(&z, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gradcheck;
    use crate::nn::DenseLayer;

    fn small_config() -> VaeConfig {
        VaeConfig {
            epochs: 40,
            batch_size: 10,
            latent_dim: 3,
            hidden: vec![8, 7, 6],
            ..VaeConfig::default()
        }
    }

    #[test]
    fn encoder_shapes() {
        let model = VaeModel::new(&small_config(), 9, 0, 1).unwrap();
        let (mu, lv) = encode(&model, &[0.1; 9]).unwrap();
        assert_eq!((mu.len(), lv.len()), (3, 3));
        assert_eq!(encode(&model, &[0.1; 9]).unwrap(), (mu, lv));
        assert!(encode(&model, &[0.1; 8]).is_err());
    }

    #[test]
    fn zero_weight_encoder_emits_bias() {
        let bias = vec![0.5, -1.0, 2.0, 0.25];
        let enc = DenseNetwork::new(vec![
            DenseLayer::new(Matrix::zeros(4, 9), bias.clone(), Activation::Linear).unwrap()
        ])
        .unwrap();
        let dec = DenseNetwork::new(vec![
            DenseLayer::new(Matrix::zeros(9, 2), vec![0.0; 9], Activation::Linear).unwrap()
        ])
        .unwrap();
        let model = VaeModel::from_parts(enc, dec, 2).unwrap();
        let (mu, lv) = encode(&model, &[3.0; 9]).unwrap();
        assert_eq!(mu, vec![0.5, -1.0]);
        assert_eq!(lv, vec![2.0, 0.25]);
    }

    #[test]
    fn reparameterize_cases() {
        assert_eq!(reparameterize(&[1.0, -2.0], &[0.3, 0.7], &[0.0, 0.0]).unwrap(), vec![1.0, -2.0]);
        assert_eq!(reparameterize(&[1.0], &[0.0], &[0.5]).unwrap(), vec![1.5]);
        assert!(reparameterize(&[1.0], &[0.0, 0.0], &[0.5]).is_err());
    }

    #[test]
    fn reparameterize_monte_carlo() {
        let (mu, lv) = (0.7, -0.6f64);
        let mut rng = seeded(17);
        let eps = standard_normal_matrix(&mut rng, 100_000, 1);
        let z: Vec<f64> = eps
            .as_slice()
            .iter()
            .map(|e| reparameterize(&[mu], &[lv], &[*e]).unwrap()[0])
            .collect();
        let n = z.len() as f64;
        let mean = z.iter().sum::<f64>() / n;
        let sd = (z.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
        assert!((mean - mu).abs() / mu < 0.02);
        let expected = (0.5 * lv).exp();
        assert!((sd - expected).abs() / expected < 0.02);
    }

    #[test]
    fn kl_closed_form_values() {
        assert_eq!(kl_standard_normal(&[0.0, 0.0], &[0.0, 0.0]).unwrap(), 0.0);
        assert!((kl_standard_normal(&[1.0], &[0.0]).unwrap() - 0.5).abs() < 1e-15);
        let v = kl_standard_normal(&[0.0], &[4f64.ln()]).unwrap();
        assert!((v - 0.5 * (3.0 - 4f64.ln())).abs() < 1e-15);
        assert!((v - 0.806_852_819_440_054_7).abs() < 1e-12);
        assert!(kl_standard_normal(&[0.0], &[]).is_err());
    }

    #[test]
    fn kl_matches_quadrature() {
        // integral of q ln(q / p) on a fine grid
        for (mu, lv) in [(1.0, 0.0), (-0.4, 0.9), (0.3, -1.2)] {
            let sd = (0.5f64 * lv).exp();
            let (lo, hi, n) = (mu - 12.0 * sd, mu + 12.0 * sd, 200_000);
            let h = (hi - lo) / n as f64;
            let q = |x: f64| (-0.5 * ((x - mu) / sd).powi(2)).exp() / (sd * (2.0 * std::f64::consts::PI).sqrt());
            let p = |x: f64| (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
            let integral: f64 = (0..n)
                .map(|i| {
                    let x = lo + (i as f64 + 0.5) * h;
                    let qx = q(x);
                    if qx > 0.0 { qx * (qx / p(x)).ln() } else { 0.0 }
                })
                .sum::<f64>()
                * h;
            assert!((integral - kl_standard_normal(&[mu], &[lv]).unwrap()).abs() < 1e-6);
        }
    }

    proptest::proptest! {
        #[test]
        fn kl_is_non_negative(mu in -5.0f64..5.0, lv in -5.0f64..5.0) {
            proptest::prop_assert!(kl_standard_normal(&[mu], &[lv]).unwrap() >= 0.0);
        }
    }

    #[test]
    fn zero_decoder_reconstruction_is_squared_norm() {
        let cfg = small_config();
        let mut model = VaeModel::new(&cfg, 9, 0, 2).unwrap();
        for l in model.decoder.layers_mut() {
            l.weights = Matrix::zeros(l.output_size(), l.input_size());
            l.bias.iter_mut().for_each(|b| *b = 0.0);
        }
        // last layer zero gives zero output whatever the hidden state
        let mut x = vec![0.0; 9];
        x[0] = 2.0;
        let terms = elbo_loss(&model, &Matrix::row_vector(&x), &Matrix::zeros(1, 3), 1.0).unwrap();
        assert_eq!(terms.reconstruction, 4.0);
        assert_eq!(terms.total, terms.reconstruction + terms.kl);
    }

    #[test]
    fn elbo_gradients_match_finite_differences() {
        let cfg = small_config();
        let model = VaeModel::new(&cfg, 9, 0, 3).unwrap();
        let mut rng = seeded(4);
        let x = standard_normal_matrix(&mut rng, 6, 9);
        let eps = standard_normal_matrix(&mut rng, 6, 3);
        for training in [false, true] {
            let (_, g, _) = model.loss_and_grad(&x, None, &eps, 1.0, training, None).unwrap();
            let mut probe = model.clone();
            let numeric = gradcheck::central_difference(&model.parameters(), gradcheck::DEFAULT_STEP, |p| {
                probe.set_parameters(p).unwrap();
                probe.loss_and_grad(&x, None, &eps, 1.0, training, None).unwrap().0.total
            });
            let err = gradcheck::max_relative_error(&g.flatten(), &numeric);
            assert!(err < 1e-4, "training={training} error {err}");
        }
    }

    #[test]
    fn training_is_seeded_and_reduces_loss() {
        let mut rng = seeded(5);
        let x = standard_normal_matrix(&mut rng, 60, 9);
        let cfg = small_config();
        let (a, la) = train_vae(&x, &cfg).unwrap();
        let (b, lb) = train_vae(&x, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(la, lb);
        assert!(la.epochs.last().unwrap().total < la.epochs[0].total);
        assert_eq!(vae_generate(&a, 5, 1).unwrap(), vae_generate(&a, 5, 1).unwrap());
        assert!(vae_generate(&a, 0, 1).is_err());
    }

    #[test]
    fn checkpoint_body_round_trip() {
        let model = VaeModel::new(&small_config(), 9, 0, 6).unwrap();
        let mut text = String::new();
        model.write_body(&mut text);
        assert_eq!(VaeModel::read_body(&mut FieldReader::new(&text)).unwrap(), model);
    }

    #[test]
    fn config_validation() {
        let bad = VaeConfig {
            dropout: 1.0,
            ..VaeConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = VaeConfig {
            batch_size: 1,
            ..VaeConfig::default()
        };
        assert!(bad.validate().is_err());
        assert!(VaeConfig::default().validate().is_ok());
    }
}
