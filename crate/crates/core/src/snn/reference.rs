//! Real-valued LIF backend.

use super::{
    ControllerGenome, DelayBuffer, InputSpikes, NeuronLayerState, SpikingBackend, StepSpikes,
    BackendKind, DECAY_ONE, N_HIDDEN, N_INPUT, N_OUTPUT,
};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Reference network: `u = τ_u·u + Σ w·s`, `v = τ_v·v + u`, spike when `v ≥ θ`.
///
/// Decay factors `(4096 − δ)/4096` are evaluated exactly in `S`; with the
/// pinned `δ_u = 4096` the current carries no memory between steps.
#[derive(Clone, Debug)]
pub struct ReferenceBackend<S: Scalar> {
    w_in_by_pre: [[S; N_HIDDEN]; N_INPUT],
    w_out_by_pre: [[S; N_OUTPUT]; N_HIDDEN],
    theta_hidden: [S; N_HIDDEN],
    theta_out: [S; N_OUTPUT],
    decay_v_hidden: [S; N_HIDDEN],
    decay_v_out: [S; N_OUTPUT],
    decay_u: S,
    hidden: NeuronLayerState<S, N_HIDDEN>,
    output: NeuronLayerState<S, N_OUTPUT>,
    buffers: DelayBuffer,
}

fn decay_factor<S: Scalar>(delta: i32) -> S {
    S::lit((DECAY_ONE - delta as i64) as f64 / DECAY_ONE as f64)
}

impl<S: Scalar> ReferenceBackend<S> {
    pub fn new(genome: &ControllerGenome) -> Result<Self> {
        genome.validate()?;
        let mut w_in_by_pre = [[S::zero(); N_HIDDEN]; N_INPUT];
        for (i, row) in genome.w_in_hidden.iter().enumerate() {
            for (j, &w) in row.iter().enumerate() {
                w_in_by_pre[j][i] = S::lit(w as f64);
            }
        }
        let mut w_out_by_pre = [[S::zero(); N_OUTPUT]; N_HIDDEN];
        for (i, row) in genome.w_hidden_out.iter().enumerate() {
            for (j, &w) in row.iter().enumerate() {
                w_out_by_pre[j][i] = S::lit(w as f64);
            }
        }
        Ok(Self {
            w_in_by_pre,
            w_out_by_pre,
            theta_hidden: genome.theta_hidden.map(|t| S::lit(t as f64)),
            theta_out: genome.theta_out.map(|t| S::lit(t as f64)),
            decay_v_hidden: genome.delta_v_hidden.map(decay_factor),
            decay_v_out: genome.delta_v_out.map(decay_factor),
            decay_u: decay_factor(genome.delta_u),
            hidden: NeuronLayerState::default(),
            output: NeuronLayerState::default(),
            buffers: DelayBuffer::default(),
        })
    }

    pub fn hidden_state(&self) -> &NeuronLayerState<S, N_HIDDEN> {
        &self.hidden
    }

    pub fn output_state(&self) -> &NeuronLayerState<S, N_OUTPUT> {
        &self.output
    }

    pub fn buffers(&self) -> &DelayBuffer {
        &self.buffers
    }
}

#[inline]
fn update_layer<S: Scalar, const PRE: usize, const N: usize>(
    state: &mut NeuronLayerState<S, N>,
    w_by_pre: &[[S; N]; PRE],
    pre: &[bool; PRE],
    decay_v: &[S; N],
    decay_u: S,
    theta: &[S; N],
) -> Result<[bool; N]> {
    for u in state.u.iter_mut() {
        *u = decay_u * *u;
    }
    for (w_col, _) in w_by_pre.iter().zip(pre).filter(|(_, &s)| s) {
        for (u, &w) in state.u.iter_mut().zip(w_col) {
            *u = *u + w;
        }
    }
    let mut spikes = [false; N];
    for i in 0..N {
        let v = decay_v[i] * state.v[i] + state.u[i];
        if !v.is_finite() {
            return Err(Error::fault(format!("non-finite membrane potential in neuron {i}")));
        }
        if v >= theta[i] {
            spikes[i] = true;
            state.v[i] = S::zero();
        } else {
            state.v[i] = v;
        }
    }
    Ok(spikes)
}

impl<S: Scalar> SpikingBackend for ReferenceBackend<S> {
    fn step(&mut self, input: &InputSpikes) -> Result<StepSpikes> {
        let hidden = update_layer(
            &mut self.hidden,
            &self.w_in_by_pre,
            &self.buffers.input,
            &self.decay_v_hidden,
            self.decay_u,
            &self.theta_hidden,
        )?;
        let output = update_layer(
            &mut self.output,
            &self.w_out_by_pre,
            &self.buffers.hidden,
            &self.decay_v_out,
            self.decay_u,
            &self.theta_out,
        )?;
        self.buffers.input = *input;
        self.buffers.hidden = hidden;
        Ok(StepSpikes { hidden, output })
    }

    fn reset(&mut self) {
        self.hidden = NeuronLayerState::default();
        self.output = NeuronLayerState::default();
        self.buffers.clear();
    }

    fn kind(&self) -> BackendKind {
        BackendKind::Reference
    }
}
