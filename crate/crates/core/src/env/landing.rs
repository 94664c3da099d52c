use std::io::Write;

use super::{
    measure_divergence, sample_episode_params, true_divergence, EnvConfig, EpisodeParams,
    PointMass, VehicleState, D_SETPOINT, LANDED_HEIGHT,
};
use crate::codec::{BucketTable, TraceDecoder};
use crate::error::{Error, Result};
use crate::rng::stream;
use crate::snn::{
    spike_string, BackendKind, ControllerGenome, HiddenSpikes, InputSpikes, Network, OutputSpikes,
    SpikeTrain, SpikingBackend, N_HIDDEN, N_INPUT, N_OUTPUT,
};

pub const TRACE_CSV_HEADER: [&str; 11] = [
    "t",
    "h",
    "v",
    "D_true",
    "D_hat",
    "err",
    "T_sp",
    "T_actual",
    "spikes_in",
    "spikes_hidden",
    "spikes_out",
];

const PARAMS_STREAM: u64 = 1;
const NOISE_STREAM: u64 = 2;

/// One control step. Divergence, spikes and setpoint are computed from the
/// state at the start of the step; `t`, `h`, `v` and `t_actual` are the state
/// after the step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceRow {
    pub t: f64,
    pub h: f64,
    pub v: f64,
    pub d_true: f64,
    pub d_hat: f64,
    pub err: f64,
    pub t_sp: f64,
    pub t_actual: f64,
    pub spikes_in: InputSpikes,
    pub spikes_hidden: HiddenSpikes,
    pub spikes_out: OutputSpikes,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LandingTrace {
    pub backend: BackendKind,
    pub dt: f64,
    pub h0: f64,
    pub params: EpisodeParams,
    pub rows: Vec<TraceRow>,
}

impl LandingTrace {
    /// Accumulated absolute divergence error, one term per step.
    pub fn fitness(&self) -> f64 {
        self.rows.iter().map(|r| r.err.abs()).sum()
    }

    pub fn final_row(&self) -> Option<&TraceRow> {
        self.rows.last()
    }

    pub fn landed(&self) -> bool {
        self.final_row().is_some_and(|r| r.h <= LANDED_HEIGHT)
    }

    pub fn duration(&self) -> f64 {
        self.final_row().map_or(0.0, |r| r.t)
    }

    pub fn touchdown_velocity(&self) -> Option<f64> {
        self.final_row().filter(|r| r.h <= LANDED_HEIGHT).map(|r| r.v)
    }

    pub fn thrust_setpoints(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.t_sp).collect()
    }

    pub fn input_train(&self) -> SpikeTrain {
        self.train(N_INPUT, |r| &r.spikes_in)
    }

    pub fn hidden_train(&self) -> SpikeTrain {
        self.train(N_HIDDEN, |r| &r.spikes_hidden)
    }

    pub fn output_train(&self) -> SpikeTrain {
        self.train(N_OUTPUT, |r| &r.spikes_out)
    }

    fn train(&self, width: usize, pick: impl Fn(&TraceRow) -> &[bool]) -> SpikeTrain {
        let mut train = SpikeTrain::with_capacity(width, self.dt, self.rows.len());
        for row in &self.rows {
            train.push(pick(row)).expect("fixed-width rows");
        }
        train
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut csv = csv::Writer::from_writer(writer);
        csv.write_record(TRACE_CSV_HEADER)?;
        for r in &self.rows {
            csv.write_record([
                r.t.to_string(),
                r.h.to_string(),
                r.v.to_string(),
                r.d_true.to_string(),
                r.d_hat.to_string(),
                r.err.to_string(),
                r.t_sp.to_string(),
                r.t_actual.to_string(),
                spike_string(&r.spikes_in),
                spike_string(&r.spikes_hidden),
                spike_string(&r.spikes_out),
            ])?;
        }
        csv.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("in-memory write");
        String::from_utf8(buf).expect("csv is utf-8")
    }
}

/// Closed-loop landing with an explicit environment draw and noise seed.
///
/// Per step: measure divergence, encode the error `D̂ − D_sp`, step the
/// network, decode thrust, advance the vehicle. Stops once `h ≤ 0.1 m` or the
/// timeout is reached.
pub fn run_episode(
    genome: &ControllerGenome,
    kind: BackendKind,
    env: &EnvConfig,
    params: &EpisodeParams,
    h0: f64,
    noise_seed: u64,
) -> Result<LandingTrace> {
    env.validate()?;
    if !(h0.is_finite() && h0 > LANDED_HEIGHT) {
        return Err(Error::Config(format!(
            "start height must exceed {LANDED_HEIGHT} m, got {h0}"
        )));
    }
    let mut net = Network::new(kind, genome)?;
    let mut decoder = TraceDecoder::<f64>::new(genome);
    let table = BucketTable::<f64>::new();
    let mut body = PointMass::new(VehicleState::at_rest(h0), params.delay_steps, params.thrust_tau);
    let mut noise = stream(noise_seed, &[NOISE_STREAM]);
    let max_steps = env.max_steps();
    let mut rows = Vec::with_capacity(max_steps.min(4096));

    for k in 0..max_steps {
        let d_true = true_divergence(&body.state)?;
        let d_hat = measure_divergence(d_true, params, &mut noise);
        let err = d_hat - D_SETPOINT;
        let spikes_in = table.encode(err)?;
        let spikes = net.step(&spikes_in)?;
        let t_sp = decoder.decode(&spikes.output);
        let state = body.step(t_sp, env.dt);
        if !(state.h.is_finite() && state.v.is_finite()) {
            return Err(Error::fault("vehicle state became non-finite"));
        }
        rows.push(TraceRow {
            t: (k + 1) as f64 * env.dt,
            h: state.h,
            v: state.v,
            d_true,
            d_hat,
            err,
            t_sp,
            t_actual: state.thrust,
            spikes_in,
            spikes_hidden: spikes.hidden,
            spikes_out: spikes.output,
        });
        if state.h <= LANDED_HEIGHT {
            break;
        }
    }
    Ok(LandingTrace {
        backend: kind,
        dt: env.dt,
        h0,
        params: *params,
        rows,
    })
}

/// Landing whose environment draw and noise both derive from `config.seed`.
pub fn run_landing(
    genome: &ControllerGenome,
    kind: BackendKind,
    config: &EnvConfig,
    h0: f64,
) -> Result<LandingTrace> {
    config.validate()?;
    let params = sample_episode_params(config, &mut stream(config.seed, &[PARAMS_STREAM]));
    run_episode(genome, kind, config, &params, h0, config.seed)
}
