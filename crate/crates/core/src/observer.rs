//! Fractional-power velocity observer and the scalar linear/nonlinear demo pair.
//!
//! The observer works in the body-frame coordinate `z = x cos phi + y sin phi`,
//! whose derivative is `z' = v + w` with the measurable term
//! `w = (y cos phi - x sin phi) phi'`. With `e = z - z^` it integrates
//!
//! ```text
//! z^' = v^ + w + spow(e, 3/5)
//! v^' = accel + spow(e, 1/5)
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode::{rk4_step, spow_scalar};
use crate::vehicle::{AgentState, ControlInput};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObserverPowers {
    /// Power on the output error in the `z^` equation.
    pub position: f64,
    /// Power on the output error in the `v^` equation.
    pub speed: f64,
}

impl Default for ObserverPowers {
    fn default() -> Self {
        Self {
            position: 3.0 / 5.0,
            speed: 1.0 / 5.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ObserverState {
    pub z_hat: f64,
    pub v_hat: f64,
}

/// Measured transformed coordinates `(z, w)` of one agent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Measurement {
    pub z: f64,
    pub w: f64,
}

pub fn transform(state: &AgentState, input: &ControlInput) -> Measurement {
    let (s, c) = state.heading.sin_cos();
    let (x, y) = (state.position.x, state.position.y);
    Measurement {
        z: x * c + y * s,
        w: (y * c - x * s) * input.turn_rate,
    }
}

/// Advances the observer over `dt`, interpolating the measurement linearly between
/// the samples taken at the start and the end of the step.
pub fn observer_step(
    obs: &ObserverState,
    start: &Measurement,
    end: &Measurement,
    input: &ControlInput,
    dt: f64,
    powers: &ObserverPowers,
) -> Result<ObserverState> {
    if !(dt > 0.0) {
        return Err(Error::domain(format!("time step must be > 0, got {dt}")));
    }
    let y = rk4_step(0.0, &[obs.z_hat, obs.v_hat], dt, |s, y| {
        let frac = s / dt;
        let z = start.z + (end.z - start.z) * frac;
        let w = start.w + (end.w - start.w) * frac;
        let e = z - y[0];
        [
            y[1] + w + spow_scalar(e, powers.position),
            input.accel + spow_scalar(e, powers.speed),
        ]
    });
    if !(y[0].is_finite() && y[1].is_finite()) {
        return Err(Error::NonFinite(format!("observer state {y:?}")));
    }
    Ok(ObserverState {
        z_hat: y[0],
        v_hat: y[1],
    })
}

/// Plant `y1' = y2, y2' = -y1 - y2` together with an estimate of it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DemoState {
    pub y1: f64,
    pub y2: f64,
    pub y1_hat: f64,
    pub y2_hat: f64,
}

impl DemoState {
    pub fn new(states: [f64; 2], estimates: [f64; 2]) -> Self {
        Self {
            y1: states[0],
            y2: states[1],
            y1_hat: estimates[0],
            y2_hat: estimates[1],
        }
    }

    /// Euclidean norm of the estimation error `(y1 - y1^, y2 - y2^)`.
    pub fn error_norm(&self) -> f64 {
        (self.y1 - self.y1_hat).hypot(self.y2 - self.y2_hat)
    }

    /// Absolute error on the measured output `y1`.
    pub fn output_error(&self) -> f64 {
        (self.y1 - self.y1_hat).abs()
    }

    fn to_array(self) -> [f64; 4] {
        [self.y1, self.y2, self.y1_hat, self.y2_hat]
    }

    fn from_array(a: [f64; 4]) -> Self {
        Self {
            y1: a[0],
            y2: a[1],
            y1_hat: a[2],
            y2_hat: a[3],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DemoObserver {
    Linear,
    Nonlinear,
}

fn demo_rhs(y: &[f64; 4], kind: DemoObserver) -> [f64; 4] {
    let e = y[0] - y[2];
    let (c1, c2) = match kind {
        DemoObserver::Linear => (e, e),
        DemoObserver::Nonlinear => (spow_scalar(e, 3.0 / 5.0), spow_scalar(e, 1.0 / 5.0)),
    };
    [y[1], -y[0] - y[1], y[3] + c1, -y[2] - y[3] + c2]
}

fn demo_step(d: &DemoState, dt: f64, kind: DemoObserver) -> Result<DemoState> {
    if !(dt > 0.0) {
        return Err(Error::domain(format!("time step must be > 0, got {dt}")));
    }
    Ok(DemoState::from_array(rk4_step(0.0, &d.to_array(), dt, |_, y| {
        demo_rhs(y, kind)
    })))
}

pub fn demo_linear_step(d: &DemoState, dt: f64) -> Result<DemoState> {
    demo_step(d, dt, DemoObserver::Linear)
}

pub fn demo_nonlinear_step(d: &DemoState, dt: f64) -> Result<DemoState> {
    demo_step(d, dt, DemoObserver::Nonlinear)
}

/// Samples `(t, state)` from `t = 0` to `horizon` inclusive.
pub fn run_demo(initial: DemoState, kind: DemoObserver, dt: f64, horizon: f64) -> Result<Vec<(f64, DemoState)>> {
    let steps = (horizon / dt + 1e-9).floor() as usize;
    let mut out = Vec::with_capacity(steps + 1);
    let mut d = initial;
    out.push((0.0, d));
    for k in 1..=steps {
        d = demo_step(&d, dt, kind)?;
        out.push((k as f64 * dt, d));
    }
    Ok(out)
}

/// First sample time from which the error norm stays below `threshold`.
pub fn settling_time(trace: &[(f64, DemoState)], threshold: f64) -> Option<f64> {
    let last_bad = trace.iter().rposition(|(_, d)| d.error_norm() >= threshold);
    match last_bad {
        None => trace.first().map(|(t, _)| *t),
        Some(i) => trace.get(i + 1).map(|(t, _)| *t),
    }
}

/// Initial states and estimates of the scalar demo.
pub const DEMO_INITIAL_STATES: [f64; 2] = [1.0, -1.0];
pub const DEMO_INITIAL_ESTIMATES: [f64; 2] = [-1.0, 1.0];
