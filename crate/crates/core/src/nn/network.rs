//! Feed-forward stack of dense layers with a recorded tape for reverse-mode
//! gradients.
//!
//! A training pass returns the output together with a [`Tape`] holding every
//! intermediate needed by [`DenseNetwork::backward`]. The tape is a plain value
//! owned by the caller, so the network itself stays immutable during a pass.

use rand::{Rng, RngCore};

use super::layer::{BATCH_NORM_EPS, BATCH_NORM_MOMENTUM};
use super::{Activation, DenseLayer, Matrix};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct DenseNetwork {
    layers: Vec<DenseLayer>,
}

/// Shape of a multilayer perceptron: `sizes[0]` inputs, `sizes[last]` outputs.
#[derive(Debug, Clone)]
pub struct MlpSpec<'a> {
    pub sizes: &'a [usize],
    pub hidden: Activation,
    pub output: Activation,
    /// Batch norm on every hidden layer.
    pub batch_norm: bool,
    /// Dropout on every hidden layer.
    pub dropout: f64,
}

impl<'a> MlpSpec<'a> {
    pub fn new(sizes: &'a [usize], hidden: Activation, output: Activation) -> Self {
        Self {
            sizes,
            hidden,
            output,
            batch_norm: false,
            dropout: 0.0,
        }
    }
}

/// How a pass treats batch norm and dropout.
pub enum Mode<'r> {
    /// Running batch-norm statistics, no dropout.
    Inference,
    /// Batch statistics; dropout masks drawn from the generator when present.
    Training(Option<&'r mut dyn RngCore>),
}

#[derive(Debug, Clone)]
struct NormRecord {
    normalized: Matrix,
    inv_std: Vec<f64>,
    batch_mean: Vec<f64>,
    batch_var: Vec<f64>,
    from_batch: bool,
}

#[derive(Debug, Clone)]
struct LayerRecord {
    input: Matrix,
    /// Input to the activation (after batch norm when present).
    pre_activation: Matrix,
    norm: Option<NormRecord>,
    activated: Matrix,
    /// Inverted-dropout multipliers, one per activation.
    dropout_mask: Option<Vec<f64>>,
}

/// Intermediate values of one recorded forward pass.
#[derive(Debug, Clone, Default)]
pub struct Tape {
    records: Vec<LayerRecord>,
}

impl Tape {
    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn batch_size(&self) -> usize {
        self.records.first().map_or(0, |r| r.input.rows())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerGradients {
    pub weights: Matrix,
    pub bias: Vec<f64>,
    /// Empty unless the layer has batch norm.
    pub gamma: Vec<f64>,
    pub beta: Vec<f64>,
}

/// Gradient of a scalar loss with respect to every network parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkGradients {
    pub layers: Vec<LayerGradients>,
}

impl NetworkGradients {
    pub fn zeros_like(net: &DenseNetwork) -> Self {
        let layers = net
            .layers
            .iter()
            .map(|l| {
                let bn = l.batch_norm.as_ref().map_or(0, |b| b.width());
                LayerGradients {
                    weights: Matrix::zeros(l.weights.rows(), l.weights.cols()),
                    bias: vec![0.0; l.bias.len()],
                    gamma: vec![0.0; bn],
                    beta: vec![0.0; bn],
                }
            })
            .collect();
        Self { layers }
    }

    /// Same ordering as [`DenseNetwork::parameters`].
    pub fn flatten_into(&self, out: &mut Vec<f64>) {
        for l in &self.layers {
            out.extend_from_slice(l.weights.as_slice());
            out.extend_from_slice(&l.bias);
            out.extend_from_slice(&l.gamma);
            out.extend_from_slice(&l.beta);
        }
    }

    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::new();
        self.flatten_into(&mut out);
        out
    }

    pub fn add_assign(&mut self, other: &NetworkGradients) {
        for (a, b) in self.layers.iter_mut().zip(&other.layers) {
            a.weights.add_assign(&b.weights);
            for (x, y) in a.bias.iter_mut().zip(&b.bias) {
                *x += y;
            }
            for (x, y) in a.gamma.iter_mut().zip(&b.gamma) {
                *x += y;
            }
            for (x, y) in a.beta.iter_mut().zip(&b.beta) {
                *x += y;
            }
        }
    }
}

impl DenseNetwork {
    /// Checks that adjacent layers are dimension compatible.
    pub fn new(layers: Vec<DenseLayer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::InvalidArgument("network needs at least one layer".into()));
        }
        for (k, pair) in layers.windows(2).enumerate() {
            if pair[0].output_size() != pair[1].input_size() {
                return Err(Error::LayerDimension {
                    layer: k + 1,
                    expected: pair[0].output_size(),
                    actual: pair[1].input_size(),
                });
            }
        }
        Ok(Self { layers })
    }

    /// Glorot-initialised perceptron.
    pub fn mlp<R: Rng + ?Sized>(spec: &MlpSpec<'_>, rng: &mut R) -> Result<Self> {
        if spec.sizes.len() < 2 {
            return Err(Error::InvalidArgument(
                "an MLP needs input and output sizes".into(),
            ));
        }
        let last = spec.sizes.len() - 2;
        let mut layers = Vec::with_capacity(spec.sizes.len() - 1);
        for (k, w) in spec.sizes.windows(2).enumerate() {
            if k == last {
                layers.push(DenseLayer::glorot(w[0], w[1], spec.output, rng)?);
            } else {
                let mut layer = DenseLayer::glorot(w[0], w[1], spec.hidden, rng)?;
                if spec.batch_norm {
                    layer = layer.with_batch_norm();
                }
                layers.push(layer.with_dropout(spec.dropout)?);
            }
        }
        Self::new(layers)
    }

    pub fn layers(&self) -> &[DenseLayer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [DenseLayer] {
        &mut self.layers
    }

    pub fn input_size(&self) -> usize {
        self.layers[0].input_size()
    }

    pub fn output_size(&self) -> usize {
        self.layers[self.layers.len() - 1].output_size()
    }

    pub fn parameter_count(&self) -> usize {
        self.layers.iter().map(DenseLayer::parameter_count).sum()
    }

    /// Flat parameter vector: per layer weights, bias, then batch-norm gamma and beta.
    pub fn parameters(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.parameter_count());
        self.parameters_into(&mut out);
        out
    }

    pub fn parameters_into(&self, out: &mut Vec<f64>) {
        for l in &self.layers {
            out.extend_from_slice(l.weights.as_slice());
            out.extend_from_slice(&l.bias);
            if let Some(bn) = &l.batch_norm {
                out.extend_from_slice(&bn.gamma);
                out.extend_from_slice(&bn.beta);
            }
        }
    }

    /// Inverse of [`parameters_into`](Self::parameters_into); returns the unread tail.
    pub fn set_parameters<'p>(&mut self, params: &'p [f64]) -> Result<&'p [f64]> {
        if params.len() < self.parameter_count() {
            return Err(Error::Shape(format!(
                "{} parameters supplied, network needs {}",
                params.len(),
                self.parameter_count()
            )));
        }
        let mut rest = params;
        let mut take = |dst: &mut [f64]| {
            let (head, tail) = rest.split_at(dst.len());
            dst.copy_from_slice(head);
            rest = tail;
        };
        for l in &mut self.layers {
            take(l.weights.as_mut_slice());
            take(&mut l.bias);
            if let Some(bn) = &mut l.batch_norm {
                take(&mut bn.gamma);
                take(&mut bn.beta);
            }
        }
        Ok(rest)
    }

    /// Inference-mode evaluation of a single vector.
    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        let out = self.forward_batch(&Matrix::row_vector(x))?;
        Ok(out.into_vec())
    }

    /// Inference-mode evaluation of a batch, one sample per row.
    pub fn forward_batch(&self, x: &Matrix) -> Result<Matrix> {
        Ok(self.forward_recorded(x, Mode::Inference)?.0)
    }

    /// Forward pass that records a tape for [`backward`](Self::backward).
    pub fn forward_recorded(&self, x: &Matrix, mut mode: Mode<'_>) -> Result<(Matrix, Tape)> {
        if x.cols() != self.input_size() {
            return Err(Error::LayerDimension {
                layer: 0,
                expected: self.input_size(),
                actual: x.cols(),
            });
        }
        let mut records = Vec::with_capacity(self.layers.len());
        let mut current = x.clone();
        for layer in &self.layers {
            let mut pre = current.matmul_transposed(&layer.weights)?;
            for row in 0..pre.rows() {
                for (v, b) in pre.row_mut(row).iter_mut().zip(&layer.bias) {
                    *v += b;
                }
            }

            let norm = match (&layer.batch_norm, &mode) {
                (None, _) => None,
                (Some(bn), Mode::Inference) => {
                    let inv_std: Vec<f64> = bn
                        .running_var
                        .iter()
                        .map(|v| 1.0 / (v + BATCH_NORM_EPS).sqrt())
                        .collect();
                    Some(normalize(&mut pre, bn, &bn.running_mean, &bn.running_var, inv_std, false))
                }
                (Some(bn), Mode::Training(_)) => {
                    let n = pre.rows() as f64;
                    let mean: Vec<f64> = pre.column_sums().iter().map(|s| s / n).collect();
                    let mut var = vec![0.0; pre.cols()];
                    for r in pre.iter_rows() {
                        for ((v, x), m) in var.iter_mut().zip(r).zip(&mean) {
                            *v += (x - m) * (x - m);
                        }
                    }
                    var.iter_mut().for_each(|v| *v /= n);
                    let inv_std = var.iter().map(|v| 1.0 / (v + BATCH_NORM_EPS).sqrt()).collect();
                    Some(normalize(&mut pre, bn, &mean, &var, inv_std, true))
                }
            };

            let act = layer.activation;
            let activated = pre.map(|z| act.apply(z));
            let mut output = activated.clone();
            let mut dropout_mask = None;
            if let Mode::Training(Some(rng)) = &mut mode {
                if layer.dropout > 0.0 {
                    let keep = 1.0 - layer.dropout;
                    let mask: Vec<f64> = (0..output.as_slice().len())
                        .map(|_| {
                            if rng.random::<f64>() < keep {
                                1.0 / keep
                            } else {
                                0.0
                            }
                        })
                        .collect();
                    for (o, m) in output.as_mut_slice().iter_mut().zip(&mask) {
                        *o *= m;
                    }
                    dropout_mask = Some(mask);
                }
            }

            records.push(LayerRecord {
                input: current,
                pre_activation: pre,
                norm,
                activated,
                dropout_mask,
            });
            current = output;
        }
        if !current.is_finite() {
            return Err(Error::NonFinite("network output".into()));
        }
        Ok((current, Tape { records }))
    }

    /// Back-propagates `upstream = dL/d(output)` through a recorded pass.
    ///
    /// Returns the parameter gradients and `dL/d(input)`.
    pub fn backward(&self, tape: &Tape, upstream: &Matrix) -> Result<(NetworkGradients, Matrix)> {
        if tape.is_empty() {
            return Err(Error::NoForwardPass);
        }
        if tape.records.len() != self.layers.len() {
            return Err(Error::Shape(format!(
                "tape has {} layers, network has {}",
                tape.records.len(),
                self.layers.len()
            )));
        }
        let last = &tape.records[tape.records.len() - 1];
        if upstream.rows() != last.activated.rows() || upstream.cols() != last.activated.cols() {
            return Err(Error::Shape(format!(
                "upstream gradient is {}x{}, output is {}x{}",
                upstream.rows(),
                upstream.cols(),
                last.activated.rows(),
                last.activated.cols()
            )));
        }

        let mut grads = Vec::with_capacity(self.layers.len());
        let mut delta = upstream.clone();
        for (k, (layer, rec)) in self.layers.iter().zip(&tape.records).enumerate().rev() {
            if let Some(mask) = &rec.dropout_mask {
                for (d, m) in delta.as_mut_slice().iter_mut().zip(mask) {
                    *d *= m;
                }
            }
            let act = layer.activation;
            for ((d, &z), &a) in delta
                .as_mut_slice()
                .iter_mut()
                .zip(rec.pre_activation.as_slice())
                .zip(rec.activated.as_slice())
            {
                *d *= act.derivative(z, a);
            }

            let (gamma, beta) = match (&layer.batch_norm, &rec.norm) {
                (Some(bn), Some(norm)) => batch_norm_backward(&mut delta, &bn.gamma, norm),
                _ => (Vec::new(), Vec::new()),
            };

            let weights = delta.transposed_matmul(&rec.input)?;
            let bias = delta.column_sums();
            let next = delta.matmul(&layer.weights)?;

            let finite = weights.is_finite()
                && bias.iter().chain(&gamma).chain(&beta).all(|v| v.is_finite());
            if !finite {
                return Err(Error::NonFiniteGradient { layer: k });
            }
            grads.push(LayerGradients {
                weights,
                bias,
                gamma,
                beta,
            });
            delta = next;
        }
        grads.reverse();
        Ok((NetworkGradients { layers: grads }, delta))
    }

    /// Folds the batch statistics of a training pass into the running averages.
    pub fn update_running_stats(&mut self, tape: &Tape) {
        for (layer, rec) in self.layers.iter_mut().zip(&tape.records) {
            if let (Some(bn), Some(norm)) = (&mut layer.batch_norm, &rec.norm) {
                if !norm.from_batch {
                    continue;
                }
                let n = rec.input.rows() as f64;
                // unbiased variance for the running estimate, as in common frameworks
                let correction = if n > 1.0 { n / (n - 1.0) } else { 1.0 };
                for i in 0..bn.width() {
                    bn.running_mean[i] = (1.0 - BATCH_NORM_MOMENTUM) * bn.running_mean[i]
                        + BATCH_NORM_MOMENTUM * norm.batch_mean[i];
                    bn.running_var[i] = (1.0 - BATCH_NORM_MOMENTUM) * bn.running_var[i]
                        + BATCH_NORM_MOMENTUM * norm.batch_var[i] * correction;
                }
            }
        }
    }
}

fn normalize(
    pre: &mut Matrix,
    bn: &super::BatchNorm,
    mean: &[f64],
    var: &[f64],
    inv_std: Vec<f64>,
    from_batch: bool,
) -> NormRecord {
    let mut normalized = Matrix::zeros(pre.rows(), pre.cols());
    for r in 0..pre.rows() {
        let src = pre.row_mut(r);
        let dst = normalized.row_mut(r);
        for c in 0..src.len() {
            let xh = (src[c] - mean[c]) * inv_std[c];
            dst[c] = xh;
            src[c] = bn.gamma[c] * xh + bn.beta[c];
        }
    }
    NormRecord {
        normalized,
        inv_std,
        batch_mean: mean.to_vec(),
        batch_var: var.to_vec(),
        from_batch,
    }
}

/// Replaces `delta` (gradient w.r.t. the normalized output) by the gradient
/// w.r.t. the normalization input. Returns `(dgamma, dbeta)`.
fn batch_norm_backward(delta: &mut Matrix, gamma: &[f64], norm: &NormRecord) -> (Vec<f64>, Vec<f64>) {
    let cols = delta.cols();
    let n = delta.rows() as f64;
    let mut dgamma = vec![0.0; cols];
    let mut dbeta = vec![0.0; cols];
    for r in 0..delta.rows() {
        let d = delta.row(r);
        let xh = norm.normalized.row(r);
        for c in 0..cols {
            dgamma[c] += d[c] * xh[c];
            dbeta[c] += d[c];
        }
    }
    if norm.from_batch {
        // dx = inv_std / n * (n*dxh - sum(dxh) - xh * sum(dxh*xh)), dxh = d * gamma
        let sum_dxh: Vec<f64> = (0..cols).map(|c| dbeta[c] * gamma[c]).collect();
        let sum_dxh_xh: Vec<f64> = (0..cols).map(|c| dgamma[c] * gamma[c]).collect();
        for r in 0..delta.rows() {
            let xh = norm.normalized.row(r).to_vec();
            let d = delta.row_mut(r);
            for c in 0..cols {
                let dxh = d[c] * gamma[c];
                d[c] = norm.inv_std[c] / n * (n * dxh - sum_dxh[c] - xh[c] * sum_dxh_xh[c]);
            }
        }
    } else {
        for r in 0..delta.rows() {
            let d = delta.row_mut(r);
            for c in 0..cols {
                d[c] *= gamma[c] * norm.inv_std[c];
            }
        }
    }
    (dgamma, dbeta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn single(weights: Matrix, bias: Vec<f64>, act: Activation) -> DenseNetwork {
        DenseNetwork::new(vec![DenseLayer::new(weights, bias, act).unwrap()]).unwrap()
    }

    #[test]
    fn identity_linear_layer() {
        let net = single(Matrix::identity(3), vec![0.0; 3], Activation::Linear);
        assert_eq!(net.forward(&[1.0, 2.0, 3.0]).unwrap(), vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn relu_clips_negative() {
        let net = single(Matrix::identity(2), vec![0.0; 2], Activation::ReLU);
        assert_eq!(net.forward(&[-1.0, 4.0]).unwrap(), vec![0.0, 4.0]);
    }

    #[test]
    fn two_layer_hand_evaluation() {
        // h = relu([[1,-1],[0.5,2]] x + [0.1,-0.2]); y = [2,-1] h + 0.3
        let l1 = DenseLayer::new(
            Matrix::from_rows(&[[1.0, -1.0], [0.5, 2.0]]).unwrap(),
            vec![0.1, -0.2],
            Activation::ReLU,
        )
        .unwrap();
        let l2 = DenseLayer::new(
            Matrix::from_rows(&[[2.0, -1.0]]).unwrap(),
            vec![0.3],
            Activation::Linear,
        )
        .unwrap();
        let net = DenseNetwork::new(vec![l1, l2]).unwrap();
        // x = (3, 1): h = relu(2.1, 3.3) ; y = 4.2 - 3.3 + 0.3 = 1.2
        let y = net.forward(&[3.0, 1.0]).unwrap();
        assert!((y[0] - 1.2).abs() < 1e-12);
        // x = (-1, 2): pre = (-2.9, 3.3) -> h = (0, 3.3); y = -3.3 + 0.3 = -3.0
        let y = net.forward(&[-1.0, 2.0]).unwrap();
        assert!((y[0] + 3.0).abs() < 1e-12);
    }

    #[test]
    fn product_rule_for_scalar_weight() {
        let net = single(Matrix::from_vec(1, 1, vec![0.7]).unwrap(), vec![0.0], Activation::Linear);
        let (_, tape) = net
            .forward_recorded(&Matrix::row_vector(&[2.0]), Mode::Inference)
            .unwrap();
        let (g, dx) = net.backward(&tape, &Matrix::row_vector(&[1.0])).unwrap();
        assert_eq!(g.layers[0].weights.as_slice(), &[2.0]);
        assert_eq!(g.layers[0].bias, vec![1.0]);
        assert_eq!(dx.as_slice(), &[0.7]);
    }

    #[test]
    fn sigmoid_local_derivative() {
        let net = single(Matrix::identity(1), vec![0.0], Activation::Sigmoid);
        let (_, tape) = net
            .forward_recorded(&Matrix::row_vector(&[0.0]), Mode::Inference)
            .unwrap();
        let (_, dx) = net.backward(&tape, &Matrix::row_vector(&[1.0])).unwrap();
        assert_eq!(dx.as_slice(), &[0.25]);
    }

    #[test]
    fn backward_requires_tape() {
        let net = single(Matrix::identity(2), vec![0.0; 2], Activation::Linear);
        let err = net
            .backward(&Tape::default(), &Matrix::row_vector(&[1.0, 1.0]))
            .unwrap_err();
        assert!(matches!(err, Error::NoForwardPass));
    }

    #[test]
    fn mismatch_names_layer() {
        let a = DenseLayer::new(Matrix::zeros(3, 2), vec![0.0; 3], Activation::ReLU).unwrap();
        let b = DenseLayer::new(Matrix::zeros(1, 4), vec![0.0], Activation::Linear).unwrap();
        match DenseNetwork::new(vec![a.clone(), b]) {
            Err(Error::LayerDimension { layer: 1, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        let net = DenseNetwork::new(vec![a]).unwrap();
        assert!(matches!(
            net.forward(&[1.0, 2.0, 3.0]),
            Err(Error::LayerDimension { layer: 0, .. })
        ));
    }

    #[test]
    fn parameter_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut spec = MlpSpec::new(&[4, 6, 2], Activation::Tanh, Activation::Linear);
        spec.batch_norm = true;
        let mut net = DenseNetwork::mlp(&spec, &mut rng).unwrap();
        let p = net.parameters();
        assert_eq!(p.len(), net.parameter_count());
        let shifted: Vec<f64> = p.iter().map(|v| v + 1.0).collect();
        let rest = net.set_parameters(&shifted).unwrap();
        assert!(rest.is_empty());
        assert_eq!(net.parameters(), shifted);
    }

    #[test]
    fn forward_is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let spec = MlpSpec::new(&[3, 8, 8, 2], Activation::ReLU, Activation::Sigmoid);
        let net = DenseNetwork::mlp(&spec, &mut rng).unwrap();
        let a = net.forward(&[0.3, -1.2, 2.0]).unwrap();
        let b = net.forward(&[0.3, -1.2, 2.0]).unwrap();
        assert_eq!(a.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
                   b.iter().map(|v| v.to_bits()).collect::<Vec<_>>());
    }
}
