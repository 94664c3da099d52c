//! Position coding of the divergence error and trace-based thrust decoding.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::snn::{ControllerGenome, InputSpikes, OutputSpikes, N_INPUT, N_OUTPUT};

/// Thrust associated with each output neuron, in g.
pub const THRUST_VECTOR: [f64; N_OUTPUT] = [-0.4, -0.2, 0.0, 0.2, 0.4];
pub const THRUST_LIMIT: f64 = 0.4;

/// Cubic bucket edges `(k − 10)^3 / 100`, `k = 0..=20`, in s⁻¹.
///
/// Bucket `j` covers `(edges[j], edges[j + 1]]`; the first bucket extends to
/// −∞ and the last to +∞, so every finite value lands in exactly one of the
/// 20 buckets.
#[derive(Clone, Debug, PartialEq)]
pub struct BucketTable<S: Scalar> {
    edges: [S; N_INPUT + 1],
}

impl<S: Scalar> Default for BucketTable<S> {
    fn default() -> Self {
        Self::new()
    }
}

impl<S: Scalar> BucketTable<S> {
    pub fn new() -> Self {
        let edges = std::array::from_fn(|k| {
            let c = k as f64 - 10.0;
            S::lit(c * c * c / 100.0)
        });
        Self { edges }
    }

    pub fn edges(&self) -> &[S; N_INPUT + 1] {
        &self.edges
    }

    /// Index of the bucket containing `x`.
    pub fn bucket(&self, x: S) -> Result<usize> {
        if !x.is_finite() {
            return Err(Error::fault(format!("cannot encode non-finite value {x}")));
        }
        // Interior edges 1..=19 decide; count those strictly below x.
        Ok(self.edges[1..N_INPUT].partition_point(|&e| e < x))
    }

    /// One-hot spike vector for `x`.
    pub fn encode(&self, x: S) -> Result<InputSpikes> {
        let mut spikes = [false; N_INPUT];
        spikes[self.bucket(x)?] = true;
        Ok(spikes)
    }
}

/// Per-episode decoder state: output spike traces and the last emitted thrust.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceState<S: Scalar> {
    pub traces: [S; N_OUTPUT],
    pub last_thrust: S,
}

impl<S: Scalar> Default for TraceState<S> {
    fn default() -> Self {
        Self {
            traces: [S::zero(); N_OUTPUT],
            last_thrust: S::zero(),
        }
    }
}

/// Low-pass spike traces `X = τ_x·X + α_x·s` and the weighted-average thrust.
#[derive(Clone, Debug)]
pub struct TraceDecoder<S: Scalar> {
    alpha: [S; N_OUTPUT],
    tau: [S; N_OUTPUT],
    thrust: [S; N_OUTPUT],
    state: TraceState<S>,
}

impl<S: Scalar> TraceDecoder<S> {
    pub fn new(genome: &ControllerGenome) -> Self {
        Self::with_params(genome.alpha_x.map(S::lit), genome.tau_x.map(S::lit))
    }

    pub fn with_params(alpha: [S; N_OUTPUT], tau: [S; N_OUTPUT]) -> Self {
        Self {
            alpha,
            tau,
            thrust: THRUST_VECTOR.map(S::lit),
            state: TraceState::default(),
        }
    }

    pub fn state(&self) -> &TraceState<S> {
        &self.state
    }

    /// Update traces with this step's output spikes and return the thrust setpoint in g.
    ///
    /// While every trace is zero the previous setpoint (initially 0) is held.
    pub fn decode(&mut self, spikes: &OutputSpikes) -> S {
        let mut total = S::zero();
        let mut weighted = S::zero();
        for i in 0..N_OUTPUT {
            let mut x = self.tau[i] * self.state.traces[i];
            if spikes[i] {
                x = x + self.alpha[i];
            }
            self.state.traces[i] = x;
            total = total + x;
            weighted = weighted + self.thrust[i] * x;
        }
        if total > S::zero() {
            let limit = S::lit(THRUST_LIMIT);
            self.state.last_thrust = (weighted / total).max(-limit).min(limit);
        }
        self.state.last_thrust
    }

    pub fn reset(&mut self) {
        self.state = TraceState::default();
    }
}
