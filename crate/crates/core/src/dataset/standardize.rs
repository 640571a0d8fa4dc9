use serde::{Deserialize, Serialize};

use super::{Sample, COLUMN_NAMES, SAMPLE_DIM};
use crate::nn::Matrix;
use crate::{Error, Result};

/// Per-column z-score transform with population standard deviations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub means: [f64; SAMPLE_DIM],
    pub stds: [f64; SAMPLE_DIM],
}

pub fn fit_standardizer(data: &[Sample]) -> Result<Standardizer> {
    Standardizer::fit(data)
}

impl Standardizer {
    pub fn fit(data: &[Sample]) -> Result<Self> {
        if data.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "standardizer needs at least 2 samples, got {}",
                data.len()
            )));
        }
        let n = data.len() as f64;
        let mut means = [0.0; SAMPLE_DIM];
        for s in data {
            for (m, v) in means.iter_mut().zip(s.to_array()) {
                *m += v;
            }
        }
        means.iter_mut().for_each(|m| *m /= n);
        let mut stds = [0.0; SAMPLE_DIM];
        for s in data {
            for ((acc, v), m) in stds.iter_mut().zip(s.to_array()).zip(&means) {
                *acc += (v - m) * (v - m);
            }
        }
        for (c, sd) in stds.iter_mut().enumerate() {
            *sd = (*sd / n).sqrt();
            if sd.is_nan() || *sd <= f64::EPSILON * means[c].abs().max(1.0) {
                return Err(Error::ConstantColumn {
                    column: COLUMN_NAMES[c],
                });
            }
        }
        Ok(Self { means, stds })
    }

    pub fn standardize(&self, sample: &Sample) -> [f64; SAMPLE_DIM] {
        let v = sample.to_array();
        std::array::from_fn(|i| (v[i] - self.means[i]) / self.stds[i])
    }

    pub fn destandardize(&self, z: &[f64; SAMPLE_DIM]) -> Sample {
        Sample::from_array(std::array::from_fn(|i| z[i] * self.stds[i] + self.means[i]))
    }

    pub fn standardize_column(&self, column: usize, value: f64) -> f64 {
        (value - self.means[column]) / self.stds[column]
    }

    pub fn destandardize_column(&self, column: usize, z: f64) -> f64 {
        z * self.stds[column] + self.means[column]
    }

    /// Standardized data, one sample per row.
    pub fn standardize_all(&self, data: &[Sample]) -> Matrix {
        let rows: Vec<[f64; SAMPLE_DIM]> = data.iter().map(|s| self.standardize(s)).collect();
        Matrix::from_rows(&rows).expect("uniform width")
    }

    pub fn destandardize_all(&self, z: &Matrix) -> Result<Vec<Sample>> {
        if z.cols() != SAMPLE_DIM {
            return Err(Error::Shape(format!(
                "expected {SAMPLE_DIM} columns, got {}",
                z.cols()
            )));
        }
        Ok(z
            .iter_rows()
            .map(|r| self.destandardize(r.try_into().expect("checked width")))
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::make_training_set;
    use proptest::prelude::*;

    fn with_first_column(values: &[f64]) -> Vec<Sample> {
        values
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let mut a = [0.0; SAMPLE_DIM];
                a[0] = v;
                for (c, x) in a.iter_mut().enumerate().skip(1) {
                    *x = (i * c) as f64;
                }
                Sample::from_array(a)
            })
            .collect()
    }

    #[test]
    fn two_point_column() {
        let data = with_first_column(&[1.0, 3.0]);
        let s = Standardizer::fit(&data).unwrap();
        assert_eq!(s.means[0], 2.0);
        assert_eq!(s.stds[0], 1.0);
        assert_eq!(s.standardize(&data[0])[0], -1.0);
        assert_eq!(s.standardize(&data[1])[0], 1.0);
    }

    #[test]
    fn constant_column_named() {
        let mut data = with_first_column(&[1.0, 3.0, 4.0]);
        for s in &mut data {
            s.outputs.voidf2 = 0.4;
        }
        match Standardizer::fit(&data) {
            Err(Error::ConstantColumn { column }) => assert_eq!(column, "VoidF2"),
            other => panic!("unexpected {other:?}"),
        }
        assert!(Standardizer::fit(&data[..1]).is_err());
    }

    #[test]
    fn streaming_statistics_agree() {
        let data = make_training_set(200, 42).unwrap();
        let s = Standardizer::fit(&data).unwrap();
        // Welford's single-pass recurrence as an independent route
        for c in 0..SAMPLE_DIM {
            let (mut mean, mut m2) = (0.0, 0.0);
            for (k, x) in data.iter().map(|d| d.to_array()[c]).enumerate() {
                let delta = x - mean;
                mean += delta / (k + 1) as f64;
                m2 += delta * (x - mean);
            }
            let std = (m2 / data.len() as f64).sqrt();
            assert!((mean - s.means[c]).abs() < 1e-12);
            assert!((std - s.stds[c]).abs() < 1e-12);
        }
        let z = s.standardize_all(&data);
        for c in 0..SAMPLE_DIM {
            let col: Vec<f64> = z.iter_rows().map(|r| r[c]).collect();
            let m = col.iter().sum::<f64>() / col.len() as f64;
            let v = col.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / col.len() as f64;
            assert!(m.abs() < 1e-10);
            assert!((v.sqrt() - 1.0).abs() < 1e-10);
        }
    }

    proptest! {
        #[test]
        fn round_trip_within_tolerance(v in prop::array::uniform9(-10.0f64..10.0)) {
            let data = make_training_set(50, 3).unwrap();
            let s = Standardizer::fit(&data).unwrap();
            let sample = Sample::from_array(v);
            let back = s.destandardize(&s.standardize(&sample)).to_array();
            for (a, b) in back.iter().zip(v) {
                prop_assert!((a - b).abs() <= 1e-12);
            }
        }
    }
}
