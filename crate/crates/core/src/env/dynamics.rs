use std::collections::VecDeque;

use crate::scalar::Scalar;

/// Gravitational acceleration (m/s²) converting thrust in g to acceleration.
pub const GRAVITY: f64 = 9.81;

/// Vertical state of the vehicle. `v` is positive up; `thrust` is the
/// realized excess specific thrust in g.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VehicleState<S: Scalar> {
    pub h: S,
    pub v: S,
    pub thrust: S,
}

impl<S: Scalar> VehicleState<S> {
    pub fn at_rest(h: S) -> Self {
        Self {
            h,
            v: S::zero(),
            thrust: S::zero(),
        }
    }
}

/// One semi-implicit Euler step with a first-order thrust lag.
///
/// `delayed_setpoint` is the command that left the delay line this step. The
/// lag gain `dt/τ` is capped at 1, so `τ ≤ dt` tracks the setpoint exactly.
pub fn step_dynamics<S: Scalar>(
    state: VehicleState<S>,
    delayed_setpoint: S,
    thrust_tau: S,
    dt: S,
) -> VehicleState<S> {
    let gain = if thrust_tau > S::zero() {
        (dt / thrust_tau).min(S::one())
    } else {
        S::one()
    };
    let thrust = state.thrust + gain * (delayed_setpoint - state.thrust);
    let v = state.v + dt * thrust * S::lit(GRAVITY);
    let h = state.h + dt * v;
    VehicleState { h, v, thrust }
}

/// Vehicle plus its setpoint delay line.
#[derive(Clone, Debug)]
pub struct PointMass<S: Scalar> {
    pub state: VehicleState<S>,
    pending: VecDeque<S>,
    thrust_tau: S,
}

impl<S: Scalar> PointMass<S> {
    pub fn new(state: VehicleState<S>, delay_steps: u32, thrust_tau: S) -> Self {
        Self {
            state,
            pending: std::iter::repeat_n(S::zero(), delay_steps as usize).collect(),
            thrust_tau,
        }
    }

    /// Queue `setpoint` and advance with the one issued `delay_steps` ago.
    pub fn step(&mut self, setpoint: S, dt: S) -> VehicleState<S> {
        self.pending.push_back(setpoint);
        let delayed = self.pending.pop_front().unwrap_or(setpoint);
        self.state = step_dynamics(self.state, delayed, self.thrust_tau, dt);
        self.state
    }
}
