//! Real NVP normalizing flow built from affine coupling layers.
//!
//! In the normalizing direction a coupling layer copies its pass-through block
//! `x_a` and maps the rest as `z_b = x_b * exp(s(x_a)) + t(x_a)`, so the
//! Jacobian is triangular and `ln|det J| = sum(s(x_a))`. Generation runs the
//! layers backwards with `x_b = (z_b - t(z_a)) * exp(-s(z_a))`.

use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::nn::serialize::{read_network, write_network};
use crate::nn::{Activation, AdamState, DenseNetwork, Matrix, MlpSpec, Mode, NetworkGradients, Tape};
use crate::rng::{seeded, standard_normal_matrix, SeededRng};
use crate::text::FieldReader;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CouplingLayer {
    /// `true` marks the pass-through block.
    mask: Vec<bool>,
    /// Pass-through block to transformed block, tanh head (scales within `e^±1`).
    pub s_net: DenseNetwork,
    /// Pass-through block to transformed block, linear head.
    pub t_net: DenseNetwork,
    pass: Vec<usize>,
    transform: Vec<usize>,
}

struct CouplingRecord {
    xb: Matrix,
    exp_s: Matrix,
    s_tape: Tape,
    t_tape: Tape,
}

/// Gradients of one coupling layer's scale and shift networks.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingGradients {
    pub s_net: NetworkGradients,
    pub t_net: NetworkGradients,
}

impl CouplingLayer {
    pub fn new(mask: Vec<bool>, s_net: DenseNetwork, t_net: DenseNetwork) -> Result<Self> {
        let pass: Vec<usize> = (0..mask.len()).filter(|&i| mask[i]).collect();
        let transform: Vec<usize> = (0..mask.len()).filter(|&i| !mask[i]).collect();
        if pass.is_empty() || transform.is_empty() {
            return Err(Error::InvalidArgument(
                "coupling mask must pass through and transform at least one component".into(),
            ));
        }
        for net in [&s_net, &t_net] {
            if net.input_size() != pass.len() || net.output_size() != transform.len() {
                return Err(Error::Shape(format!(
                    "coupling network maps {} -> {}, mask needs {} -> {}",
                    net.input_size(),
                    net.output_size(),
                    pass.len(),
                    transform.len()
                )));
            }
        }
        Ok(Self {
            mask,
            s_net,
            t_net,
            pass,
            transform,
        })
    }

    /// Glorot-initialised layer with the given hidden widths.
    pub fn random(mask: Vec<bool>, hidden: &[usize], rng: &mut SeededRng) -> Result<Self> {
        let d = mask.iter().filter(|m| **m).count();
        let mut sizes = vec![d];
        sizes.extend(hidden);
        sizes.push(mask.len() - d);
        let s_net = DenseNetwork::mlp(&MlpSpec::new(&sizes, Activation::ReLU, Activation::Tanh), rng)?;
        let t_net = DenseNetwork::mlp(&MlpSpec::new(&sizes, Activation::ReLU, Activation::Linear), rng)?;
        Self::new(mask, s_net, t_net)
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn dim(&self) -> usize {
        self.mask.len()
    }

    fn check_width(&self, m: &Matrix) -> Result<()> {
        if m.cols() != self.dim() {
            return Err(Error::Shape(format!(
                "coupling layer expects width {}, got {}",
                self.dim(),
                m.cols()
            )));
        }
        Ok(())
    }

    fn forward_recorded(&self, x: &Matrix) -> Result<(Matrix, Vec<f64>, CouplingRecord)> {
        self.check_width(x)?;
        let xa = x.select_columns(&self.pass);
        let xb = x.select_columns(&self.transform);
        let (s, s_tape) = self.s_net.forward_recorded(&xa, Mode::Inference)?;
        let (t, t_tape) = self.t_net.forward_recorded(&xa, Mode::Inference)?;
        let exp_s = s.map(f64::exp);
        let mut zb = Matrix::zeros(xb.rows(), xb.cols());
        for ((z, (&b, &e)), &sh) in zb
            .as_mut_slice()
            .iter_mut()
            .zip(xb.as_slice().iter().zip(exp_s.as_slice()))
            .zip(t.as_slice())
        {
            *z = b * e + sh;
        }
        let log_det: Vec<f64> = s.iter_rows().map(|r| r.iter().sum()).collect();
        let mut z = x.clone();
        z.scatter_columns(&self.transform, &zb);
        if !z.is_finite() {
            return Err(Error::NonFinite("coupling forward".into()));
        }
        Ok((
            z,
            log_det,
            CouplingRecord {
                xb,
                exp_s,
                s_tape,
                t_tape,
            },
        ))
    }

    /// Normalizing direction for a batch: returns `z` and per-row `ln|det J|`.
    pub fn forward_batch(&self, x: &Matrix) -> Result<(Matrix, Vec<f64>)> {
        let (z, ld, _) = self.forward_recorded(x)?;
        Ok((z, ld))
    }

    /// Generation direction for a batch.
    pub fn inverse_batch(&self, z: &Matrix) -> Result<Matrix> {
        self.check_width(z)?;
        let za = z.select_columns(&self.pass);
        let zb = z.select_columns(&self.transform);
        let s = self.s_net.forward_batch(&za)?;
        let t = self.t_net.forward_batch(&za)?;
        let mut xb = Matrix::zeros(zb.rows(), zb.cols());
        for (((x, &b), &sc), &sh) in xb
            .as_mut_slice()
            .iter_mut()
            .zip(zb.as_slice())
            .zip(s.as_slice())
            .zip(t.as_slice())
        {
            *x = (b - sh) * (-sc).exp();
        }
        let mut x = z.clone();
        x.scatter_columns(&self.transform, &xb);
        if !x.is_finite() {
            return Err(Error::NonFinite("coupling inverse".into()));
        }
        Ok(x)
    }

    /// `d_z` is the loss gradient w.r.t. this layer's output, `d_log_det` the
    /// gradient w.r.t. each row's log-determinant.
    fn backward(
        &self,
        rec: &CouplingRecord,
        d_z: &Matrix,
        d_log_det: &[f64],
    ) -> Result<(CouplingGradients, Matrix)> {
        let dzb = d_z.select_columns(&self.transform);
        let mut dxb = Matrix::zeros(dzb.rows(), dzb.cols());
        let mut ds = Matrix::zeros(dzb.rows(), dzb.cols());
        for (r, &dl) in d_log_det.iter().enumerate().take(dzb.rows()) {
            let g = dzb.row(r);
            let e = rec.exp_s.row(r);
            let xb = rec.xb.row(r);
            let dst_x = dxb.row_mut(r);
            for c in 0..g.len() {
                dst_x[c] = g[c] * e[c];
            }
            let dst_s = ds.row_mut(r);
            for c in 0..g.len() {
                dst_s[c] = g[c] * xb[c] * e[c] + dl;
            }
        }
        let (s_grads, dxa_s) = self.s_net.backward(&rec.s_tape, &ds)?;
        let (t_grads, dxa_t) = self.t_net.backward(&rec.t_tape, &dzb)?;
        let mut dxa = d_z.select_columns(&self.pass);
        dxa.add_assign(&dxa_s);
        dxa.add_assign(&dxa_t);
        let mut dx = Matrix::zeros(d_z.rows(), d_z.cols());
        dx.scatter_columns(&self.pass, &dxa);
        dx.scatter_columns(&self.transform, &dxb);
        Ok((
            CouplingGradients {
                s_net: s_grads,
                t_net: t_grads,
            },
            dx,
        ))
    }
}

/// Single-vector form of [`CouplingLayer::forward_batch`].
pub fn coupling_forward(layer: &CouplingLayer, x: &[f64]) -> Result<(Vec<f64>, f64)> {
    let (z, ld) = layer.forward_batch(&Matrix::row_vector(x))?;
    Ok((z.into_vec(), ld[0]))
}

pub fn coupling_inverse(layer: &CouplingLayer, z: &[f64]) -> Result<Vec<f64>> {
    Ok(layer.inverse_batch(&Matrix::row_vector(z))?.into_vec())
}

/// Masks alternating between the first `ceil(D/2)` and the remaining components.
pub fn alternating_masks(dim: usize, layers: usize) -> Vec<Vec<bool>> {
    let d = dim.div_ceil(2);
    (0..layers)
        .map(|k| (0..dim).map(|i| (i < d) == (k % 2 == 0)).collect())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FlowConfig {
    pub epochs: usize,
    pub layers: usize,
    pub hidden: Vec<usize>,
    pub learning_rate: f64,
    /// Std of Gaussian jitter added to the standardized data each epoch.
    /// Outputs are an exact function of inputs, so without it the likelihood
    /// is unbounded and training collapses onto the training points.
    pub noise_std: f64,
    pub seed: u64,
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self {
            epochs: 5000,
            layers: 5,
            hidden: vec![32, 32],
            learning_rate: 1e-3,
            noise_std: 0.02,
            seed: 42,
        }
    }
}

impl FlowConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.layers == 0 || self.hidden.contains(&0) {
            return Err(Error::InvalidArgument("flow counts must be positive".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidArgument("flow learning rate must be positive".into()));
        }
        if !(self.noise_std >= 0.0 && self.noise_std.is_finite()) {
            return Err(Error::InvalidArgument("noise_std must be non-negative".into()));
        }
        Ok(())
    }
}

/// Ordered coupling layers over a standard normal base distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowStack {
    pub layers: Vec<CouplingLayer>,
}

impl FlowStack {
    pub fn new(layers: Vec<CouplingLayer>) -> Result<Self> {
        let Some(first) = layers.first() else {
            return Err(Error::InvalidArgument("flow needs at least one layer".into()));
        };
        let dim = first.dim();
        if layers.iter().any(|l| l.dim() != dim) {
            return Err(Error::Shape("coupling layers disagree on dimension".into()));
        }
        Ok(Self { layers })
    }

    pub fn random(dim: usize, layers: usize, hidden: &[usize], seed: u64) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidArgument("flows need at least 2 dimensions".into()));
        }
        let mut rng = seeded(seed);
        let layers = alternating_masks(dim, layers)
            .into_iter()
            .map(|m| CouplingLayer::random(m, hidden, &mut rng))
            .collect::<Result<_>>()?;
        Self::new(layers)
    }

    pub fn dim(&self) -> usize {
        self.layers[0].dim()
    }

    /// Every component is transformed by at least one layer.
    pub fn covers_all_components(&self) -> bool {
        (0..self.dim()).all(|i| self.layers.iter().any(|l| !l.mask[i]))
    }

    /// `x -> z` through all layers, with the summed log-determinant per row.
    pub fn forward_batch(&self, x: &Matrix) -> Result<(Matrix, Vec<f64>)> {
        let mut z = x.clone();
        let mut total = vec![0.0; x.rows()];
        for layer in &self.layers {
            let (next, ld) = layer.forward_batch(&z)?;
            for (t, l) in total.iter_mut().zip(ld) {
                *t += l;
            }
            z = next;
        }
        Ok((z, total))
    }

    /// `z -> x`, layers applied in reverse order.
    pub fn inverse_batch(&self, z: &Matrix) -> Result<Matrix> {
        let mut x = z.clone();
        for layer in self.layers.iter().rev() {
            x = layer.inverse_batch(&x)?;
        }
        Ok(x)
    }

    pub fn log_likelihood_batch(&self, x: &Matrix) -> Result<Vec<f64>> {
        let (z, ld) = self.forward_batch(x)?;
        let ll: Vec<f64> = z
            .iter_rows()
            .zip(ld)
            .map(|(r, l)| standard_normal_log_density(r) + l)
            .collect();
        if ll.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("flow log-likelihood".into()));
        }
        Ok(ll)
    }

    /// Mean negative log-likelihood of the batch and its gradient for every
    /// coupling network, in layer order.
    pub fn nll_and_grad(&self, x: &Matrix) -> Result<(f64, Vec<CouplingGradients>)> {
        let n = x.rows() as f64;
        let mut records = Vec::with_capacity(self.layers.len());
        let mut z = x.clone();
        let mut total = vec![0.0; x.rows()];
        for layer in &self.layers {
            let (next, ld, rec) = layer.forward_recorded(&z)?;
            for (t, l) in total.iter_mut().zip(ld) {
                *t += l;
            }
            records.push(rec);
            z = next;
        }
        let ll: f64 = z
            .iter_rows()
            .zip(&total)
            .map(|(r, l)| standard_normal_log_density(r) + l)
            .sum();
        let nll = -ll / n;

        let mut delta = z.map(|v| v / n);
        let d_log_det = vec![-1.0 / n; x.rows()];
        let mut grads = Vec::with_capacity(self.layers.len());
        for (layer, rec) in self.layers.iter().zip(&records).rev() {
            let (g, dx) = layer.backward(rec, &delta, &d_log_det)?;
            grads.push(g);
            delta = dx;
        }
        grads.reverse();
        Ok((nll, grads))
    }

    pub fn parameters(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for l in &self.layers {
            l.s_net.parameters_into(&mut out);
            l.t_net.parameters_into(&mut out);
        }
        out
    }

    pub fn set_parameters(&mut self, params: &[f64]) -> Result<()> {
        let mut rest = params;
        for l in &mut self.layers {
            rest = l.s_net.set_parameters(rest)?;
            rest = l.t_net.set_parameters(rest)?;
        }
        if !rest.is_empty() {
            return Err(Error::Shape(format!("{} surplus flow parameters", rest.len())));
        }
        Ok(())
    }

    pub fn write_body(&self, out: &mut String) {
        let _ = writeln!(out, "dim {}", self.dim());
        let _ = writeln!(out, "layers {}", self.layers.len());
        for l in &self.layers {
            let mask: Vec<&str> = l.mask.iter().map(|&m| if m { "1" } else { "0" }).collect();
            let _ = writeln!(out, "mask {}", mask.join(" "));
            out.push_str("s_net\n");
            write_network(out, &l.s_net);
            out.push_str("t_net\n");
            write_network(out, &l.t_net);
        }
    }

    pub fn read_body(r: &mut FieldReader<'_>) -> Result<Self> {
        let dim = r.expect_usize("dim")?;
        let count = r.expect_usize("layers")?;
        let mut layers = Vec::with_capacity(count);
        for _ in 0..count {
            let mask = r
                .expect("mask")?
                .iter()
                .map(|t| match *t {
                    "1" => Ok(true),
                    "0" => Ok(false),
                    other => Err(Error::Checkpoint(format!("bad mask entry '{other}'"))),
                })
                .collect::<Result<Vec<bool>>>()?;
            if mask.len() != dim {
                return Err(Error::Checkpoint(format!(
                    "mask has {} entries, flow dimension is {dim}",
                    mask.len()
                )));
            }
            r.expect("s_net")?;
            let s_net = read_network(r)?;
            r.expect("t_net")?;
            let t_net = read_network(r)?;
            layers.push(CouplingLayer::new(mask, s_net, t_net)?);
        }
        Self::new(layers)
    }
}

pub fn standard_normal_log_density(z: &[f64]) -> f64 {
    let sq: f64 = z.iter().map(|v| v * v).sum();
    -0.5 * sq - 0.5 * z.len() as f64 * (2.0 * PI).ln()
}

/// `ln p_Z(f(x)) + ln|det df/dx|` for a single vector.
pub fn flow_log_likelihood(stack: &FlowStack, x: &[f64]) -> Result<f64> {
    Ok(stack.log_likelihood_batch(&Matrix::row_vector(x))?[0])
}

/// Mean training log-likelihood per epoch (on the jittered batch), measured
/// before that epoch's update.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FlowLog {
    pub mean_log_likelihood: Vec<f64>,
}

impl FlowLog {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("epoch,mean_log_likelihood\n");
        for (e, v) in self.mean_log_likelihood.iter().enumerate() {
            let _ = writeln!(out, "{e},{v}");
        }
        out
    }
}

/// Full-batch Adam ascent on the mean log-likelihood.
pub fn train_nf(data: &Matrix, config: &FlowConfig) -> Result<(FlowStack, FlowLog)> {
    if data.rows() == 0 {
        return Err(Error::InvalidArgument("empty training set".into()));
    }
    config.validate()?;
    let mut stack = FlowStack::random(data.cols(), config.layers, &config.hidden, config.seed)?;
    let mut params = stack.parameters();
    let mut opt = AdamState::new(params.len(), config.learning_rate);
    let mut log = FlowLog::default();
    let mut flat = Vec::with_capacity(params.len());
    let mut rng = seeded(config.seed.wrapping_add(1));
    let mut batch = data.clone();
    for epoch in 0..config.epochs {
        if config.noise_std > 0.0 {
            let noise = standard_normal_matrix(&mut rng, data.rows(), data.cols());
            for ((b, &x), &e) in batch
                .as_mut_slice()
                .iter_mut()
                .zip(data.as_slice())
                .zip(noise.as_slice())
            {
                *b = x + config.noise_std * e;
            }
        }
        let (nll, grads) = stack.nll_and_grad(&batch).map_err(|e| e.at_epoch(epoch))?;
        if !nll.is_finite() {
            return Err(Error::Diverged {
                epoch,
                what: "negative log-likelihood".into(),
            });
        }
        log.mean_log_likelihood.push(-nll);
        flat.clear();
        for g in &grads {
            g.s_net.flatten_into(&mut flat);
            g.t_net.flatten_into(&mut flat);
        }
        opt.update(&mut params, &flat)?;
        stack.set_parameters(&params)?;
    }
    Ok((stack, log))
}

/// Draws `n` base samples and maps them through the inverse flow.
pub fn nf_generate(stack: &FlowStack, n: usize, seed: u64) -> Result<Matrix> {
    if n == 0 {
        return Err(Error::InvalidArgument("sample count must be at least 1".into()));
    }
    let mut rng = seeded(seed);
    let z = standard_normal_matrix(&mut rng, n, stack.dim());
    stack.inverse_batch(&z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gradcheck;
    use crate::nn::DenseLayer;

    fn constant_net(input: usize, output: usize, value: f64, act: Activation) -> DenseNetwork {
        let layer = DenseLayer::new(Matrix::zeros(output, input), vec![value; output], act).unwrap();
        DenseNetwork::new(vec![layer]).unwrap()
    }

    fn identity_layer(mask: Vec<bool>) -> CouplingLayer {
        let d = mask.iter().filter(|m| **m).count();
        let rest = mask.len() - d;
        CouplingLayer::new(
            mask,
            constant_net(d, rest, 0.0, Activation::Tanh),
            constant_net(d, rest, 0.0, Activation::Linear),
        )
        .unwrap()
    }

    #[test]
    fn identity_coupling() {
        let layer = identity_layer(alternating_masks(9, 1).remove(0));
        let x: Vec<f64> = (0..9).map(|i| i as f64 - 3.5).collect();
        let (z, ld) = coupling_forward(&layer, &x).unwrap();
        assert_eq!(z, x);
        assert_eq!(ld, 0.0);
        assert_eq!(coupling_inverse(&layer, &x).unwrap(), x);
    }

    #[test]
    fn constant_scale_two_dims() {
        // tanh(atanh(0.6)) = 0.6 = c
        let c = 0.6f64;
        let layer = CouplingLayer::new(
            vec![true, false],
            constant_net(1, 1, c.atanh(), Activation::Tanh),
            constant_net(1, 1, 0.0, Activation::Linear),
        )
        .unwrap();
        let (z, ld) = coupling_forward(&layer, &[0.4, 2.0]).unwrap();
        assert_eq!(z[0], 0.4);
        assert!((z[1] - 2.0 * c.exp()).abs() < 1e-12);
        assert!((ld - c).abs() < 1e-12);
        let x = coupling_inverse(&layer, &z).unwrap();
        assert!((x[1] - z[1] * (-c).exp()).abs() < 1e-12);
        assert!((x[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn identity_stack_is_standard_normal() {
        let layers = alternating_masks(9, 5).into_iter().map(identity_layer).collect();
        let stack = FlowStack::new(layers).unwrap();
        let ll0 = flow_log_likelihood(&stack, &[0.0; 9]).unwrap();
        assert!((ll0 + 4.5 * (2.0 * PI).ln()).abs() < 1e-12);
        assert!((ll0 + 8.270_446_798_842_054).abs() < 1e-12);
        let x = [0.3, -1.0, 2.0, 0.0, 0.5, -0.7, 1.1, 0.2, -2.2];
        let ll = flow_log_likelihood(&stack, &x).unwrap();
        assert!((ll - standard_normal_log_density(&x)).abs() < 1e-12);
        let samples = nf_generate(&stack, 4, 3).unwrap();
        assert_eq!(samples, standard_normal_matrix(&mut seeded(3), 4, 9));
    }

    #[test]
    fn masks_cover_every_component() {
        let stack = FlowStack::random(9, 5, &[8], 1).unwrap();
        assert!(stack.covers_all_components());
        let masks = alternating_masks(9, 2);
        assert_eq!(masks[0].iter().filter(|m| **m).count(), 5);
        assert_eq!(masks[1].iter().filter(|m| **m).count(), 4);
        assert!(masks[0].iter().zip(&masks[1]).all(|(a, b)| a != b));
    }

    #[test]
    fn degenerate_masks_rejected() {
        let net = constant_net(2, 1, 0.0, Activation::Linear);
        assert!(CouplingLayer::new(vec![true, true], net.clone(), net).is_err());
    }

    fn random_rows(rng: &mut SeededRng, n: usize, dim: usize, scale: f64) -> Matrix {
        standard_normal_matrix(rng, n, dim).map(|v| v * scale)
    }

    #[test]
    fn stack_round_trip_and_additive_log_det() {
        let stack = FlowStack::random(9, 5, &[32, 32], 11).unwrap();
        let x = random_rows(&mut seeded(12), 200, 9, 2.0);
        let (z, ld) = stack.forward_batch(&x).unwrap();
        let back = stack.inverse_batch(&z).unwrap();
        for (a, b) in x.as_slice().iter().zip(back.as_slice()) {
            assert!((a - b).abs() < 1e-9);
        }
        let mut h = x.clone();
        let mut sum = vec![0.0; x.rows()];
        for layer in &stack.layers {
            let (next, l) = layer.forward_batch(&h).unwrap();
            assert_eq!(layer.inverse_batch(&next).unwrap().rows(), h.rows());
            sum.iter_mut().zip(l).for_each(|(s, v)| *s += v);
            h = next;
        }
        for (a, b) in sum.iter().zip(&ld) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn log_det_matches_numerical_jacobian() {
        let stack = FlowStack::random(9, 5, &[32, 32], 5).unwrap();
        let mut rng = seeded(6);
        for row in random_rows(&mut rng, 10, 9, 1.5).iter_rows() {
            let layer = &stack.layers[1];
            let (_, ld) = coupling_forward(layer, row).unwrap();
            let j = gradcheck::jacobian(row, 1e-5, |x| coupling_forward(layer, x).unwrap().0);
            assert!((gradcheck::log_abs_det(&j) - ld).abs() < 1e-5);

            let (_, total) = stack.forward_batch(&Matrix::row_vector(row)).unwrap();
            let j = gradcheck::jacobian(row, 1e-5, |x| {
                stack.forward_batch(&Matrix::row_vector(x)).unwrap().0.into_vec()
            });
            assert!((gradcheck::log_abs_det(&j) - total[0]).abs() < 1e-5);
        }
    }

    #[test]
    fn nll_gradient_matches_finite_differences() {
        let stack = FlowStack::random(9, 3, &[6, 5], 8).unwrap();
        let x = random_rows(&mut seeded(9), 7, 9, 1.0);
        let (_, grads) = stack.nll_and_grad(&x).unwrap();
        let mut analytic = Vec::new();
        for g in &grads {
            g.s_net.flatten_into(&mut analytic);
            g.t_net.flatten_into(&mut analytic);
        }
        let mut probe = stack.clone();
        let numeric = gradcheck::central_difference(&stack.parameters(), gradcheck::DEFAULT_STEP, |p| {
            probe.set_parameters(p).unwrap();
            probe.nll_and_grad(&x).unwrap().0
        });
        assert!(gradcheck::max_relative_error(&analytic, &numeric) < 1e-4);
    }

    fn density_grid_integral(stack: &FlowStack, half_width: f64, step: f64) -> f64 {
        let n = (2.0 * half_width / step) as usize;
        let mut rows = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let a = -half_width + (i as f64 + 0.5) * step;
                let b = -half_width + (j as f64 + 0.5) * step;
                rows.push([a, b]);
            }
        }
        let ll = stack
            .log_likelihood_batch(&Matrix::from_rows(&rows).unwrap())
            .unwrap();
        ll.iter().map(|l| l.exp()).sum::<f64>() * step * step
    }

    #[test]
    fn random_two_dim_flow_is_normalized() {
        let stack = FlowStack::random(2, 5, &[16, 16], 21).unwrap();
        let mass = density_grid_integral(&stack, 12.0, 0.04);
        assert!((mass - 1.0).abs() < 0.02, "mass {mass}");
    }

    #[test]
    fn learns_one_dimensional_standard_normal() {
        // second column is an independent dummy dimension
        let x = standard_normal_matrix(&mut seeded(30), 1000, 2);
        let cfg = FlowConfig {
            epochs: 400,
            hidden: vec![16, 16],
            learning_rate: 3e-3,
            noise_std: 0.0,
            ..FlowConfig::default()
        };
        let (stack, log) = train_nf(&x, &cfg).unwrap();
        assert!(log.mean_log_likelihood.last() > log.mean_log_likelihood.first());
        // marginal density at 0 of the first component
        let step = 0.02;
        let rows: Vec<[f64; 2]> = (0..800).map(|j| [0.0, -8.0 + (j as f64 + 0.5) * step]).collect();
        let ll = stack
            .log_likelihood_batch(&Matrix::from_rows(&rows).unwrap())
            .unwrap();
        let p0: f64 = ll.iter().map(|l| l.exp()).sum::<f64>() * step;
        let exact = 1.0 / (2.0 * PI).sqrt();
        assert!((p0 - exact).abs() / exact < 0.2, "p(0) = {p0}");
        assert!((density_grid_integral(&stack, 10.0, 0.05) - 1.0).abs() < 0.02);
    }

    #[test]
    fn training_is_seeded() {
        let x = random_rows(&mut seeded(3), 40, 9, 1.0);
        let cfg = FlowConfig {
            epochs: 30,
            hidden: vec![8],
            ..FlowConfig::default()
        };
        let (a, la) = train_nf(&x, &cfg).unwrap();
        let (b, lb) = train_nf(&x, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(la, lb);
        assert!(la.mean_log_likelihood.iter().all(|v| v.is_finite()));
        let bad = FlowConfig {
            noise_std: -1.0,
            ..cfg
        };
        assert!(train_nf(&x, &bad).is_err());
    }

    #[test]
    fn checkpoint_body_round_trip() {
        let stack = FlowStack::random(9, 5, &[8, 8], 2).unwrap();
        let mut text = String::new();
        stack.write_body(&mut text);
        let back = FlowStack::read_body(&mut FieldReader::new(&text)).unwrap();
        assert_eq!(back, stack);
    }

    #[test]
    fn parameters_round_trip_and_seeded_generation() {
        let mut stack = FlowStack::random(9, 5, &[16, 16], 4).unwrap();
        let p = stack.parameters();
        stack.set_parameters(&p).unwrap();
        assert_eq!(stack.parameters(), p);
        let a = nf_generate(&stack, 50, 2).unwrap();
        assert_eq!(a, nf_generate(&stack, 50, 2).unwrap());
        assert!(nf_generate(&stack, 0, 2).is_err());
    }
}
