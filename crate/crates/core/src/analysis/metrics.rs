use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::snn::SpikeTrain;

/// Fraction of `(step, neuron)` slots holding a spike.
pub fn infill(train: &SpikeTrain) -> Result<f64> {
    if train.is_empty() {
        return Err(Error::fault("infill of an empty spike train"));
    }
    Ok(train.spike_count() as f64 / train.as_slice().len() as f64)
}

/// One minus the normalized Hamming distance between two equally shaped trains.
pub fn match_score(a: &SpikeTrain, b: &SpikeTrain) -> Result<f64> {
    if a.width() != b.width() || a.len() != b.len() {
        return Err(Error::contract(format!(
            "cannot match {}x{} against {}x{} spike trains",
            a.len(),
            a.width(),
            b.len(),
            b.width()
        )));
    }
    if a.is_empty() {
        return Err(Error::fault("match of empty spike trains"));
    }
    let differing = a
        .as_slice()
        .iter()
        .zip(b.as_slice())
        .filter(|(x, y)| x != y)
        .count();
    Ok(1.0 - differing as f64 / a.as_slice().len() as f64)
}

pub fn thrust_rmse<S: Scalar>(a: &[S], b: &[S]) -> Result<S> {
    if a.len() != b.len() {
        return Err(Error::contract(format!(
            "thrust sequences differ in length: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    if a.is_empty() {
        return Err(Error::contract("thrust sequences are empty"));
    }
    let sq = a
        .iter()
        .zip(b)
        .fold(S::zero(), |acc, (&x, &y)| acc + (x - y) * (x - y));
    Ok((sq / S::lit(a.len() as f64)).sqrt())
}

/// Mean, median, sample standard deviation (N − 1), min and max.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary<S> {
    pub mean: S,
    pub median: S,
    pub sd: S,
    pub min: S,
    pub max: S,
}

pub fn summarize<S: Scalar>(values: &[S]) -> Result<Summary<S>> {
    if values.is_empty() {
        return Err(Error::fault("summary of an empty sample"));
    }
    if values.iter().any(|v| v.is_nan()) {
        return Err(Error::fault("summary of a sample containing NaN"));
    }
    let n = S::lit(values.len() as f64);
    let mean = values.iter().fold(S::zero(), |acc, &v| acc + v) / n;
    let sd = if values.len() > 1 {
        let ss = values
            .iter()
            .fold(S::zero(), |acc, &v| acc + (v - mean) * (v - mean));
        (ss / (n - S::one())).sqrt()
    } else {
        S::zero()
    };
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("NaN excluded"));
    let mid = sorted.len() / 2;
    let median = if sorted.len() % 2 == 1 {
        sorted[mid]
    } else {
        (sorted[mid - 1] + sorted[mid]) / S::lit(2.0)
    };
    Ok(Summary {
        mean,
        median,
        sd,
        min: sorted[0],
        max: sorted[sorted.len() - 1],
    })
}
