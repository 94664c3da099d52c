//! Randomized vertical-landing simulation.
//!
//! A gravity-compensated point mass (thrust in g, `0` hovers) descends toward a
//! planar ground while a controller holds the optic-flow divergence
//! `D = −v/h` at the setpoint [`D_SETPOINT`]. Each episode draws its own
//! actuator lag, setpoint delay and measurement noise from [`EnvConfig`].

mod divergence;
mod dynamics;
mod landing;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use divergence::{estimate_divergence_pairs, measure_divergence, true_divergence, CornerPairSet};
pub use dynamics::{step_dynamics, PointMass, VehicleState, GRAVITY};
pub use landing::{run_episode, run_landing, LandingTrace, TraceRow, TRACE_CSV_HEADER};

/// Divergence setpoint in s⁻¹.
pub const D_SETPOINT: f64 = 1.0;
/// Episodes end once the height drops to this value (m).
pub const LANDED_HEIGHT: f64 = 0.1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvConfig {
    /// Control period (s).
    pub dt: f64,
    /// Default start height (m).
    pub h0: f64,
    /// Episode timeout (s).
    pub t_max: f64,
    /// First-order thrust lag time constant (s).
    pub thrust_tau_range: (f64, f64),
    /// Setpoint transport delay, whole steps.
    pub delay_steps_range: (u32, u32),
    /// Additive divergence noise standard deviation (s⁻¹).
    pub noise_sigma_range: (f64, f64),
    /// Proportional divergence noise standard deviation.
    pub prop_noise_range: (f64, f64),
    pub seed: u64,
}

impl Default for EnvConfig {
    fn default() -> Self {
        Self {
            dt: 0.02,
            h0: 4.0,
            t_max: 30.0,
            thrust_tau_range: (0.02, 0.30),
            delay_steps_range: (1, 4),
            noise_sigma_range: (0.05, 0.15),
            prop_noise_range: (0.0, 0.10),
            seed: 0,
        }
    }
}

impl EnvConfig {
    /// Same lag and delay ranges with both noise sources switched off.
    pub fn noiseless(mut self) -> Self {
        self.noise_sigma_range = (0.0, 0.0);
        self.prop_noise_range = (0.0, 0.0);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Number of control steps before the timeout.
    pub fn max_steps(&self) -> usize {
        (self.t_max / self.dt).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.t_max.is_finite() && self.t_max > 0.0) {
            return bad(format!("t_max must be positive, got {}", self.t_max));
        }
        if !(self.h0.is_finite() && self.h0 > LANDED_HEIGHT) {
            return bad(format!("h0 must exceed {LANDED_HEIGHT} m, got {}", self.h0));
        }
        for (name, (lo, hi)) in [
            ("thrust_tau_range", self.thrust_tau_range),
            ("noise_sigma_range", self.noise_sigma_range),
            ("prop_noise_range", self.prop_noise_range),
        ] {
            if !(lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo <= hi) {
                return bad(format!("{name} must satisfy 0 <= lo <= hi, got ({lo}, {hi})"));
            }
        }
        let (lo, hi) = self.delay_steps_range;
        if lo > hi {
            return bad(format!("delay_steps_range must satisfy lo <= hi, got ({lo}, {hi})"));
        }
        Ok(())
    }
}

/// Environment draw for one episode.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeParams {
    pub thrust_tau: f64,
    pub delay_steps: u32,
    pub noise_sigma: f64,
    pub prop_sigma: f64,
}

impl EpisodeParams {
    /// Instant actuator, no delay, no noise.
    pub const IDEAL: EpisodeParams = EpisodeParams {
        thrust_tau: 0.0,
        delay_steps: 0,
        noise_sigma: 0.0,
        prop_sigma: 0.0,
    };
}

fn uniform<R: Rng + ?Sized>(rng: &mut R, (lo, hi): (f64, f64)) -> f64 {
    // Always consume one draw so streams stay aligned across configs.
    let u: f64 = rng.random();
    if lo == hi {
        lo
    } else {
        lo + (hi - lo) * u
    }
}

/// Draw each episode parameter uniformly from its configured range.
pub fn sample_episode_params<R: Rng + ?Sized>(config: &EnvConfig, rng: &mut R) -> EpisodeParams {
    let thrust_tau = uniform(rng, config.thrust_tau_range);
    let (dlo, dhi) = config.delay_steps_range;
    let delay_steps = rng.random_range(dlo..=dhi);
    let noise_sigma = uniform(rng, config.noise_sigma_range);
    let prop_sigma = uniform(rng, config.prop_noise_range);
    EpisodeParams {
        thrust_tau,
        delay_steps,
        noise_sigma,
        prop_sigma,
    }
}
