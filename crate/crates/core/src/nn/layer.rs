use rand::Rng;
use rand_distr::{Distribution, Uniform};

use super::{Activation, Matrix};
use crate::{Error, Result};

pub(crate) const BATCH_NORM_EPS: f64 = 1e-5;
pub(crate) const BATCH_NORM_MOMENTUM: f64 = 0.1;

/// Per-feature batch normalization applied between the affine map and the
/// activation.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchNorm {
    pub gamma: Vec<f64>,
    pub beta: Vec<f64>,
    pub running_mean: Vec<f64>,
    pub running_var: Vec<f64>,
}

impl BatchNorm {
    pub fn new(width: usize) -> Self {
        Self {
            gamma: vec![1.0; width],
            beta: vec![0.0; width],
            running_mean: vec![0.0; width],
            running_var: vec![1.0; width],
        }
    }

    pub fn width(&self) -> usize {
        self.gamma.len()
    }
}

/// `y = dropout(activation(bn(W x + b)))`, with batch norm and dropout optional.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    /// Shape `out x in`.
    pub weights: Matrix,
    pub bias: Vec<f64>,
    pub activation: Activation,
    pub batch_norm: Option<BatchNorm>,
    /// Drop probability used in training passes only.
    pub dropout: f64,
}

impl DenseLayer {
    pub fn new(weights: Matrix, bias: Vec<f64>, activation: Activation) -> Result<Self> {
        if bias.len() != weights.rows() {
            return Err(Error::Shape(format!(
                "bias length {} does not match {} weight rows",
                bias.len(),
                weights.rows()
            )));
        }
        if weights.rows() == 0 || weights.cols() == 0 {
            return Err(Error::Shape("layer dimensions must be positive".into()));
        }
        Ok(Self {
            weights,
            bias,
            activation,
            batch_norm: None,
            dropout: 0.0,
        })
    }

    /// Glorot-uniform weights in `±sqrt(6 / (fan_in + fan_out))`, zero bias.
    pub fn glorot<R: Rng + ?Sized>(
        input: usize,
        output: usize,
        activation: Activation,
        rng: &mut R,
    ) -> Result<Self> {
        if input == 0 || output == 0 {
            return Err(Error::Shape("layer dimensions must be positive".into()));
        }
        let limit = (6.0 / (input + output) as f64).sqrt();
        let dist = Uniform::new(-limit, limit).expect("finite positive limit");
        let data = (0..input * output).map(|_| dist.sample(rng)).collect();
        let weights = Matrix::from_vec(output, input, data)?;
        Self::new(weights, vec![0.0; output], activation)
    }

    pub fn with_batch_norm(mut self) -> Self {
        self.batch_norm = Some(BatchNorm::new(self.output_size()));
        self
    }

    pub fn with_dropout(mut self, rate: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&rate) {
            return Err(Error::InvalidArgument(format!(
                "dropout rate {rate} outside [0, 1)"
            )));
        }
        self.dropout = rate;
        Ok(self)
    }

    #[inline]
    pub fn input_size(&self) -> usize {
        self.weights.cols()
    }

    #[inline]
    pub fn output_size(&self) -> usize {
        self.weights.rows()
    }

    pub fn parameter_count(&self) -> usize {
        let bn = self.batch_norm.as_ref().map_or(0, |b| 2 * b.width());
        self.weights.rows() * self.weights.cols() + self.bias.len() + bn
    }
}
