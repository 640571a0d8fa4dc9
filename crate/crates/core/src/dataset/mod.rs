//! The 9-column sample schema: five physical model parameters (PMPs) followed
//! by four axial void fractions, plus the analytic simulator oracle, training
//! set generation, standardization and the training-domain filter.

mod io;
mod oracle;
mod standardize;

pub use io::{load_csv, samples_from_csv, samples_to_csv, save_csv, CsvMetadata, IN_DOMAIN_COLUMN};
pub use oracle::{oracle_evaluate, AXIAL_POSITIONS, ORACLE_VERSION};
pub use standardize::{fit_standardizer, Standardizer};

use crate::rng::{open_uniform, seeded};
use crate::{Error, Result};

pub const SAMPLE_DIM: usize = 9;
pub const PMP_DIM: usize = 5;
pub const VOID_DIM: usize = 4;

/// Canonical CSV column names, in sample order.
pub const COLUMN_NAMES: [&str; SAMPLE_DIM] = [
    "P1008", "P1012", "P1022", "P1028", "P1029", "VoidF1", "VoidF2", "VoidF3", "VoidF4",
];

/// Open interval every PMP must lie in to be inside the training domain.
pub const PMP_DOMAIN: (f64, f64) = (0.0, 5.0);

/// Multiplicative factors on the five perturbed closure models.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PmpVector {
    pub p1008: f64,
    pub p1012: f64,
    pub p1022: f64,
    pub p1028: f64,
    pub p1029: f64,
}

impl PmpVector {
    pub fn new(values: [f64; PMP_DIM]) -> Self {
        let [p1008, p1012, p1022, p1028, p1029] = values;
        Self {
            p1008,
            p1012,
            p1022,
            p1028,
            p1029,
        }
    }

    pub fn splat(v: f64) -> Self {
        Self::new([v; PMP_DIM])
    }

    pub fn to_array(self) -> [f64; PMP_DIM] {
        [self.p1008, self.p1012, self.p1022, self.p1028, self.p1029]
    }

    pub fn in_domain(&self) -> bool {
        self.to_array()
            .iter()
            .all(|&p| p > PMP_DOMAIN.0 && p < PMP_DOMAIN.1)
    }
}

/// Void fractions at the four measurement elevations, bottom to top.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VoidFractionVector {
    pub voidf1: f64,
    pub voidf2: f64,
    pub voidf3: f64,
    pub voidf4: f64,
}

impl VoidFractionVector {
    pub fn new(values: [f64; VOID_DIM]) -> Self {
        let [voidf1, voidf2, voidf3, voidf4] = values;
        Self {
            voidf1,
            voidf2,
            voidf3,
            voidf4,
        }
    }

    pub fn to_array(self) -> [f64; VOID_DIM] {
        [self.voidf1, self.voidf2, self.voidf3, self.voidf4]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub inputs: PmpVector,
    pub outputs: VoidFractionVector,
}

impl Sample {
    pub fn from_array(v: [f64; SAMPLE_DIM]) -> Self {
        Self {
            inputs: PmpVector::new([v[0], v[1], v[2], v[3], v[4]]),
            outputs: VoidFractionVector::new([v[5], v[6], v[7], v[8]]),
        }
    }

    pub fn from_slice(v: &[f64]) -> Result<Self> {
        let arr: [f64; SAMPLE_DIM] = v.try_into().map_err(|_| {
            Error::Shape(format!("a sample has {SAMPLE_DIM} components, got {}", v.len()))
        })?;
        Ok(Self::from_array(arr))
    }

    pub fn to_array(&self) -> [f64; SAMPLE_DIM] {
        let i = self.inputs.to_array();
        let o = self.outputs.to_array();
        [i[0], i[1], i[2], i[3], i[4], o[0], o[1], o[2], o[3]]
    }

    /// Pairs `inputs` with the oracle's outputs.
    pub fn from_oracle(inputs: PmpVector) -> Result<Self> {
        Ok(Self {
            inputs,
            outputs: oracle_evaluate(&inputs)?,
        })
    }
}

/// `n` samples with PMPs i.i.d. uniform on `(0, 5)^5` and oracle outputs.
pub fn make_training_set(n: usize, seed: u64) -> Result<Vec<Sample>> {
    if n == 0 {
        return Err(Error::InvalidArgument("training set size must be at least 1".into()));
    }
    let mut rng = seeded(seed);
    let mut draw = || open_uniform(&mut rng, PMP_DOMAIN.0, PMP_DOMAIN.1);
    (0..n)
        .map(|_| {
            let pmp = PmpVector::new([draw(), draw(), draw(), draw(), draw()]);
            Sample::from_oracle(pmp)
        })
        .collect()
}

/// Keeps samples whose PMPs all lie strictly inside `(0, 5)`; void fractions
/// are not inspected.
pub fn in_domain_filter(samples: &[Sample]) -> (Vec<Sample>, usize) {
    let kept: Vec<Sample> = samples
        .iter()
        .filter(|s| s.inputs.in_domain())
        .copied()
        .collect();
    let rejected = samples.len() - kept.len();
    (kept, rejected)
}
