use rand::Rng;
use rand_distr::StandardNormal;

use super::{EpisodeParams, VehicleState};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Ground-truth divergence `−v/h`, positive while descending.
pub fn true_divergence<S: Scalar>(state: &VehicleState<S>) -> Result<S> {
    if !(state.h > S::zero()) {
        return Err(Error::fault(format!(
            "divergence undefined at height {}",
            state.h
        )));
    }
    Ok(-state.v / state.h)
}

/// Noisy divergence observation `D·(1 + ε_p) + ε_a`.
///
/// Both normal draws are always taken, so the stream advances identically
/// whatever the sigmas are.
pub fn measure_divergence<R: Rng + ?Sized>(d_true: f64, params: &EpisodeParams, rng: &mut R) -> f64 {
    let zp: f64 = rng.sample(StandardNormal);
    let za: f64 = rng.sample(StandardNormal);
    d_true * (1.0 + params.prop_sigma * zp) + params.noise_sigma * za
}

/// Image-plane distances of tracked corner pairs, one track per pair,
/// sampled once per frame.
#[derive(Clone, Debug, PartialEq)]
pub struct CornerPairSet<S: Scalar> {
    tracks: Vec<Vec<S>>,
}

impl<S: Scalar> CornerPairSet<S> {
    pub fn new(tracks: Vec<Vec<S>>) -> Result<Self> {
        if let Some(first) = tracks.first() {
            if tracks.iter().any(|t| t.len() != first.len()) {
                return Err(Error::contract("corner tracks must share one length"));
            }
        }
        Ok(Self { tracks })
    }

    /// Pinhole tracks for pure vertical motion over a plane: `l_i = s_i / h`.
    pub fn from_heights(scales: &[S], heights: &[S]) -> Result<Self> {
        Self::new(
            scales
                .iter()
                .map(|&s| heights.iter().map(|&h| s / h).collect())
                .collect(),
        )
    }

    pub fn pairs(&self) -> usize {
        self.tracks.len()
    }

    pub fn frames(&self) -> usize {
        self.tracks.first().map_or(0, Vec::len)
    }

    pub fn tracks(&self) -> &[Vec<S>] {
        &self.tracks
    }
}

/// Mean relative growth rate of the pair distances between frames `k − 1` and `k`.
pub fn estimate_divergence_pairs<S: Scalar>(pairs: &CornerPairSet<S>, k: usize, dt: S) -> Result<S> {
    if pairs.pairs() == 0 {
        return Err(Error::fault("no corner pairs to estimate divergence from"));
    }
    if k == 0 || k >= pairs.frames() {
        return Err(Error::contract(format!(
            "frame {k} needs a predecessor within {} frames",
            pairs.frames()
        )));
    }
    let mut sum = S::zero();
    for (i, track) in pairs.tracks().iter().enumerate() {
        let (prev, cur) = (track[k - 1], track[k]);
        if !(prev > S::zero()) || !(cur > S::zero()) {
            return Err(Error::fault(format!("pair {i} has non-positive distance")));
        }
        sum = sum + (cur - prev) / prev / dt;
    }
    Ok(sum / S::lit(pairs.pairs() as f64))
}
