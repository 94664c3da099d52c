//! Integer CUBA-LIF backend mirroring the chip's fixed-point arithmetic.

use super::{
    ControllerGenome, DelayBuffer, InputSpikes, NeuronLayerState, SpikingBackend, StepSpikes,
    BackendKind, DECAY_ONE, N_HIDDEN, N_INPUT, N_OUTPUT,
};
use crate::error::{Error, Result};

/// Weights enter the current as `w · 2^(6 + β)` with `β = 0`; thresholds scale the same way.
pub const LOIHI_WEIGHT_SHIFT: u32 = 6;

/// Fixed-point network.
///
/// `u = trunc(u·(4096 − δ_u)/4096) + 2^6·Σ w·s`,
/// `v = trunc(v·(4096 − δ_v)/4096) + u`, spike when `v ≥ θ·2^6`.
/// Truncation is toward zero. State is held in `i64`; every update is
/// overflow-checked.
#[derive(Clone, Debug)]
pub struct LoihiBackend {
    w_in_by_pre: [[i64; N_HIDDEN]; N_INPUT],
    w_out_by_pre: [[i64; N_OUTPUT]; N_HIDDEN],
    theta_hidden: [i64; N_HIDDEN],
    theta_out: [i64; N_OUTPUT],
    keep_v_hidden: [i64; N_HIDDEN],
    keep_v_out: [i64; N_OUTPUT],
    keep_u: i64,
    hidden: NeuronLayerState<i64, N_HIDDEN>,
    output: NeuronLayerState<i64, N_OUTPUT>,
    buffers: DelayBuffer,
}

impl LoihiBackend {
    pub fn new(genome: &ControllerGenome) -> Result<Self> {
        genome.validate()?;
        let scale = |w: i32| (w as i64) << LOIHI_WEIGHT_SHIFT;
        let mut w_in_by_pre = [[0; N_HIDDEN]; N_INPUT];
        for (i, row) in genome.w_in_hidden.iter().enumerate() {
            for (j, &w) in row.iter().enumerate() {
                w_in_by_pre[j][i] = scale(w);
            }
        }
        let mut w_out_by_pre = [[0; N_OUTPUT]; N_HIDDEN];
        for (i, row) in genome.w_hidden_out.iter().enumerate() {
            for (j, &w) in row.iter().enumerate() {
                w_out_by_pre[j][i] = scale(w);
            }
        }
        let keep = |d: i32| DECAY_ONE - d as i64;
        Ok(Self {
            w_in_by_pre,
            w_out_by_pre,
            theta_hidden: genome.theta_hidden.map(scale),
            theta_out: genome.theta_out.map(scale),
            keep_v_hidden: genome.delta_v_hidden.map(keep),
            keep_v_out: genome.delta_v_out.map(keep),
            keep_u: keep(genome.delta_u),
            hidden: NeuronLayerState::default(),
            output: NeuronLayerState::default(),
            buffers: DelayBuffer::default(),
        })
    }

    pub fn hidden_state(&self) -> &NeuronLayerState<i64, N_HIDDEN> {
        &self.hidden
    }

    pub fn output_state(&self) -> &NeuronLayerState<i64, N_OUTPUT> {
        &self.output
    }

    pub fn buffers(&self) -> &DelayBuffer {
        &self.buffers
    }
}

/// `trunc(x · keep / 4096)`; Rust integer division already truncates toward zero.
#[inline]
fn decay(x: i64, keep: i64) -> Option<i64> {
    Some(x.checked_mul(keep)? / DECAY_ONE)
}

#[inline]
fn update_layer<const PRE: usize, const N: usize>(
    state: &mut NeuronLayerState<i64, N>,
    w_by_pre: &[[i64; N]; PRE],
    pre: &[bool; PRE],
    keep_v: &[i64; N],
    keep_u: i64,
    theta: &[i64; N],
) -> Result<[bool; N]> {
    let overflow = |i: usize| Error::fault(format!("fixed-point overflow in neuron {i}"));
    for (i, u) in state.u.iter_mut().enumerate() {
        *u = decay(*u, keep_u).ok_or_else(|| overflow(i))?;
    }
    for (w_col, _) in w_by_pre.iter().zip(pre).filter(|(_, &s)| s) {
        for (i, (u, &w)) in state.u.iter_mut().zip(w_col).enumerate() {
            *u = u.checked_add(w).ok_or_else(|| overflow(i))?;
        }
    }
    let mut spikes = [false; N];
    for i in 0..N {
        let v = decay(state.v[i], keep_v[i])
            .and_then(|v| v.checked_add(state.u[i]))
            .ok_or_else(|| overflow(i))?;
        if v >= theta[i] {
            spikes[i] = true;
            state.v[i] = 0;
        } else {
            state.v[i] = v;
        }
    }
    Ok(spikes)
}

impl SpikingBackend for LoihiBackend {
    fn step(&mut self, input: &InputSpikes) -> Result<StepSpikes> {
        let hidden = update_layer(
            &mut self.hidden,
            &self.w_in_by_pre,
            &self.buffers.input,
            &self.keep_v_hidden,
            self.keep_u,
            &self.theta_hidden,
        )?;
        let output = update_layer(
            &mut self.output,
            &self.w_out_by_pre,
            &self.buffers.hidden,
            &self.keep_v_out,
            self.keep_u,
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
        BackendKind::Loihi
    }
}
