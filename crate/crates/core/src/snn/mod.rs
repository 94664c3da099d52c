//! Spiking network backends for the fixed 20-10-5 controller topology.
//!
//! Two interchangeable implementations share one stepping contract:
//!
//! * [`ReferenceBackend`]: real-valued LIF neurons, `v = τ_v·v + u`.
//! * [`LoihiBackend`]: integer CUBA-LIF with `2^6` weight scaling and
//!   truncating decay, as executed by the neuromorphic chip.
//!
//! Layers are updated once per step and every layer boundary holds a one-step
//! delay buffer: an input spike presented at step `t` reaches the hidden layer
//! at `t + 1` and can first influence output spiking at `t + 2`.

mod genome;
mod loihi;
mod reference;
mod train;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use genome::{
    ControllerGenome, DELTA_MAX, DELTA_U_FIXED, GENOME_FORMAT_VERSION, THETA_MAX, THETA_MIN,
    WEIGHT_MAX, WEIGHT_MIN,
};
pub use loihi::{LoihiBackend, LOIHI_WEIGHT_SHIFT};
pub use reference::ReferenceBackend;
pub use train::{spike_string, SpikeTrain};

pub const N_INPUT: usize = 20;
pub const N_HIDDEN: usize = 10;
pub const N_OUTPUT: usize = 5;

/// Decay parameters are expressed in 1/4096 units.
pub const DECAY_ONE: i64 = 4096;

pub type InputSpikes = [bool; N_INPUT];
pub type HiddenSpikes = [bool; N_HIDDEN];
pub type OutputSpikes = [bool; N_OUTPUT];

/// Membrane potential and synaptic current of one layer.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NeuronLayerState<T, const N: usize> {
    pub v: [T; N],
    pub u: [T; N],
}

impl<T: Copy + Default, const N: usize> Default for NeuronLayerState<T, N> {
    fn default() -> Self {
        Self {
            v: [T::default(); N],
            u: [T::default(); N],
        }
    }
}

/// Pending spikes waiting to cross each layer boundary.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct DelayBuffer {
    /// Input spikes presented last step, consumed by the hidden layer this step.
    pub input: InputSpikes,
    /// Hidden spikes emitted last step, consumed by the output layer this step.
    pub hidden: HiddenSpikes,
}

impl DelayBuffer {
    pub fn clear(&mut self) {
        *self = Self::default();
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct StepSpikes {
    pub hidden: HiddenSpikes,
    pub output: OutputSpikes,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    Reference,
    Loihi,
}

impl BackendKind {
    pub const ALL: [BackendKind; 2] = [BackendKind::Reference, BackendKind::Loihi];

    pub fn as_str(self) -> &'static str {
        match self {
            BackendKind::Reference => "reference",
            BackendKind::Loihi => "loihi",
        }
    }
}

impl fmt::Display for BackendKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BackendKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "reference" => Ok(BackendKind::Reference),
            "loihi" => Ok(BackendKind::Loihi),
            other => Err(Error::contract(format!("unknown backend `{other}`"))),
        }
    }
}

/// Stateful stepping interface shared by both backends.
pub trait SpikingBackend {
    /// Advance every layer by one step and return this step's spikes.
    fn step(&mut self, input: &InputSpikes) -> Result<StepSpikes>;

    /// Zero all membrane state and clear the delay buffers.
    fn reset(&mut self);

    fn kind(&self) -> BackendKind;
}

/// Enum-dispatched backend, f64 for the reference variant.
#[derive(Clone, Debug)]
pub enum Network {
    Reference(ReferenceBackend<f64>),
    Loihi(LoihiBackend),
}

impl Network {
    pub fn new(kind: BackendKind, genome: &ControllerGenome) -> Result<Self> {
        Ok(match kind {
            BackendKind::Reference => Network::Reference(ReferenceBackend::new(genome)?),
            BackendKind::Loihi => Network::Loihi(LoihiBackend::new(genome)?),
        })
    }
}

impl SpikingBackend for Network {
    #[inline]
    fn step(&mut self, input: &InputSpikes) -> Result<StepSpikes> {
        match self {
            Network::Reference(net) => net.step(input),
            Network::Loihi(net) => net.step(input),
        }
    }

    fn reset(&mut self) {
        match self {
            Network::Reference(net) => net.reset(),
            Network::Loihi(net) => net.reset(),
        }
    }

    fn kind(&self) -> BackendKind {
        match self {
            Network::Reference(_) => BackendKind::Reference,
            Network::Loihi(_) => BackendKind::Loihi,
        }
    }
}

/// Drive any backend over a whole input train, starting from its current state.
pub fn run_backend<B: SpikingBackend + ?Sized>(
    backend: &mut B,
    input: &SpikeTrain,
) -> Result<(SpikeTrain, SpikeTrain)> {
    if input.width() != N_INPUT {
        return Err(Error::contract(format!(
            "input train has {} neurons, expected {N_INPUT}",
            input.width()
        )));
    }
    let mut hidden = SpikeTrain::with_capacity(N_HIDDEN, input.dt(), input.len());
    let mut output = SpikeTrain::with_capacity(N_OUTPUT, input.dt(), input.len());
    for row in input.rows() {
        let mut spikes = [false; N_INPUT];
        spikes.copy_from_slice(row);
        let step = backend.step(&spikes)?;
        hidden.push(&step.hidden)?;
        output.push(&step.output)?;
    }
    Ok((hidden, output))
}

/// Run a freshly reset network of the given kind over an input train.
pub fn run_episode_network(
    genome: &ControllerGenome,
    kind: BackendKind,
    input: &SpikeTrain,
) -> Result<(SpikeTrain, SpikeTrain)> {
    let mut net = Network::new(kind, genome)?;
    run_backend(&mut net, input)
}
