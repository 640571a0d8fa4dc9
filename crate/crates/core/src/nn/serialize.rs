//! Text serialization of networks, headed by [`NET_MAGIC`].
//!
//! ```text
//! TABGEN-NET v1
//! network <layers>
//! layer <in> <out> <activation> <batch_norm 0|1> <dropout>
//! weights ...      (row-major, out x in)
//! bias ...
//! gamma / beta / running_mean / running_var ...   (batch-norm layers only)
//! ```

use std::fmt::Write as _;

use super::{BatchNorm, DenseLayer, DenseNetwork, Matrix};
use crate::text::{join_f64, FieldReader};
use crate::{Error, Result};

pub const NET_MAGIC: &str = "TABGEN-NET v1";

pub fn write_network(out: &mut String, net: &DenseNetwork) {
    let _ = writeln!(out, "network {}", net.layers().len());
    for l in net.layers() {
        let _ = writeln!(
            out,
            "layer {} {} {} {} {}",
            l.input_size(),
            l.output_size(),
            l.activation,
            u8::from(l.batch_norm.is_some()),
            crate::text::fmt_f64(l.dropout)
        );
        let _ = writeln!(out, "weights {}", join_f64(l.weights.as_slice()));
        let _ = writeln!(out, "bias {}", join_f64(&l.bias));
        if let Some(bn) = &l.batch_norm {
            let _ = writeln!(out, "gamma {}", join_f64(&bn.gamma));
            let _ = writeln!(out, "beta {}", join_f64(&bn.beta));
            let _ = writeln!(out, "running_mean {}", join_f64(&bn.running_mean));
            let _ = writeln!(out, "running_var {}", join_f64(&bn.running_var));
        }
    }
}

pub fn read_network(r: &mut FieldReader<'_>) -> Result<DenseNetwork> {
    let n = r.expect_usize("network")?;
    let mut layers = Vec::with_capacity(n);
    for _ in 0..n {
        let header = r.expect("layer")?;
        let [input, output, act, bn, dropout] = header.as_slice() else {
            return Err(Error::Checkpoint("layer header needs 5 fields".into()));
        };
        let count = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| Error::Checkpoint(format!("bad layer size '{s}'")))
        };
        let (input, output) = (count(input)?, count(output)?);
        let weights = Matrix::from_vec(output, input, r.expect_f64s("weights", input * output)?)?;
        let bias = r.expect_f64s("bias", output)?;
        let mut layer = DenseLayer::new(weights, bias, act.parse()?)?;
        layer.dropout = dropout
            .parse()
            .map_err(|_| Error::Checkpoint(format!("bad dropout '{dropout}'")))?;
        if *bn == "1" {
            layer.batch_norm = Some(BatchNorm {
                gamma: r.expect_f64s("gamma", output)?,
                beta: r.expect_f64s("beta", output)?,
                running_mean: r.expect_f64s("running_mean", output)?,
                running_var: r.expect_f64s("running_var", output)?,
            });
        }
        layers.push(layer);
    }
    DenseNetwork::new(layers)
}

impl DenseNetwork {
    pub fn to_text(&self) -> String {
        let mut out = format!("{NET_MAGIC}\n");
        write_network(&mut out, self);
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut r = FieldReader::new(text);
        let (_, magic) = r.line()?;
        if magic != NET_MAGIC {
            return Err(Error::Checkpoint(format!(
                "expected header '{NET_MAGIC}', found '{magic}'"
            )));
        }
        read_network(&mut r)
    }
}
