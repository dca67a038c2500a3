//! Planar unicycle kinematics shared by the UAVs and the target.

use std::f64::consts::PI;

use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode::rk4_step;
use crate::Vec2;

pub const DEFAULT_DT: f64 = 0.05;

/// Position, speed and heading of one agent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgentState {
    pub position: Vec2,
    pub speed: f64,
    /// Heading in radians, kept in `(-pi, pi]` by the integrator.
    pub heading: f64,
}

impl AgentState {
    pub fn new(x: f64, y: f64, speed: f64, heading: f64) -> Self {
        Self {
            position: Vec2::new(x, y),
            speed,
            heading,
        }
    }

    /// Cartesian velocity `v [cos phi, sin phi]`.
    pub fn velocity(&self) -> Vec2 {
        let (s, c) = self.heading.sin_cos();
        Vec2::new(self.speed * c, self.speed * s)
    }

    fn to_array(self) -> [f64; 4] {
        [self.position.x, self.position.y, self.speed, self.heading]
    }

    fn from_array(y: [f64; 4]) -> Self {
        Self::new(y[0], y[1], y[2], y[3])
    }

    fn is_finite(&self) -> bool {
        self.position.x.is_finite() && self.position.y.is_finite() && self.speed.is_finite() && self.heading.is_finite()
    }
}

/// Linear acceleration and turn rate, `u = [v', phi']`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ControlInput {
    pub accel: f64,
    pub turn_rate: f64,
}

impl ControlInput {
    pub const ZERO: ControlInput = ControlInput {
        accel: 0.0,
        turn_rate: 0.0,
    };

    pub fn new(accel: f64, turn_rate: f64) -> Self {
        Self { accel, turn_rate }
    }

    pub fn is_finite(&self) -> bool {
        self.accel.is_finite() && self.turn_rate.is_finite()
    }

    /// `|accel| + |turn_rate|`, the per-step control effort integrand.
    pub fn effort(&self) -> f64 {
        self.accel.abs() + self.turn_rate.abs()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VelocityBounds {
    pub v_min: f64,
    pub v_max: f64,
}

impl VelocityBounds {
    pub fn new(v_min: f64, v_max: f64) -> Result<Self> {
        if !(v_min > 0.0 && v_min < v_max && v_max.is_finite()) {
            return Err(Error::domain(format!(
                "velocity bounds need 0 < v_min < v_max, got [{v_min}, {v_max}]"
            )));
        }
        Ok(Self { v_min, v_max })
    }

    pub fn clamp(&self, speed: f64) -> f64 {
        speed.clamp(self.v_min, self.v_max)
    }
}

/// How the target's scheduled 2-vector is applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TargetInputMode {
    /// The vector is `[v', phi']`.
    #[default]
    SpeedHeading,
    /// The vector is a Cartesian acceleration `[x'', y'']`, mapped through the
    /// inverse input matrix.
    Cartesian,
}

/// Target start state and its weaving input schedule `[0, A sin(2 pi t / T)]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetProfile {
    pub initial: AgentState,
    pub amplitude: f64,
    pub period: f64,
    pub mode: TargetInputMode,
}

impl TargetProfile {
    pub const DEFAULT_AMPLITUDE: f64 = 0.5;
    pub const DEFAULT_PERIOD: f64 = 50.0;

    pub fn new(initial: AgentState, mode: TargetInputMode) -> Self {
        Self {
            initial,
            amplitude: Self::DEFAULT_AMPLITUDE,
            period: Self::DEFAULT_PERIOD,
            mode,
        }
    }

    fn schedule(&self, t: f64) -> [f64; 2] {
        [0.0, self.amplitude * (2.0 * PI * t / self.period).sin()]
    }

    /// Unicycle input applied to the target at time `t` from state `state`.
    pub fn input(&self, t: f64, state: &AgentState) -> Result<ControlInput> {
        let [a, b] = self.schedule(t);
        match self.mode {
            TargetInputMode::SpeedHeading => Ok(ControlInput::new(a, b)),
            TargetInputMode::Cartesian => {
                let u = input_matrix_inverse(state, f64::MIN_POSITIVE)? * Vec2::new(a, b);
                Ok(ControlInput::new(u.x, u.y))
            }
        }
    }
}

/// The target's default schedule read as `[v', phi']`.
pub fn target_input(t: f64) -> ControlInput {
    ControlInput::new(
        0.0,
        TargetProfile::DEFAULT_AMPLITUDE * (2.0 * PI * t / TargetProfile::DEFAULT_PERIOD).sin(),
    )
}

/// `M = [[cos phi, -v sin phi], [sin phi, v cos phi]]`, so that `p'' = M u`.
pub fn input_matrix(state: &AgentState) -> Matrix2<f64> {
    let (s, c) = state.heading.sin_cos();
    let v = state.speed;
    Matrix2::new(c, -v * s, s, v * c)
}

/// Closed-form inverse of [`input_matrix`], guarded against speeds below `v_min`.
pub fn input_matrix_inverse(state: &AgentState, v_min: f64) -> Result<Matrix2<f64>> {
    let v = state.speed;
    if !(v >= v_min) || v <= 0.0 {
        return Err(Error::Singular { speed: v, v_min });
    }
    let (s, c) = state.heading.sin_cos();
    Ok(Matrix2::new(c, s, -s / v, c / v))
}

/// Cartesian acceleration `M u` produced by `input` at `state`.
pub fn acceleration(state: &AgentState, input: &ControlInput) -> Vec2 {
    input_matrix(state) * Vec2::new(input.accel, input.turn_rate)
}

/// Time derivative `(x', y', v', phi')` of the unicycle state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateDerivative {
    pub velocity: Vec2,
    pub accel: f64,
    pub turn_rate: f64,
}

pub fn state_derivative(state: &AgentState, input: &ControlInput) -> StateDerivative {
    StateDerivative {
        velocity: state.velocity(),
        accel: input.accel,
        turn_rate: input.turn_rate,
    }
}

fn rhs(y: &[f64; 4], input: &ControlInput) -> [f64; 4] {
    let (s, c) = y[3].sin_cos();
    [y[2] * c, y[2] * s, input.accel, input.turn_rate]
}

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_angle(angle: f64) -> f64 {
    let mut a = angle.rem_euclid(2.0 * PI);
    if a > PI {
        a -= 2.0 * PI;
    }
    a
}

/// RK4 advance with the input held over the step; heading wrapped, speed unbounded.
pub fn advance(state: &AgentState, input: &ControlInput, dt: f64) -> Result<AgentState> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::domain(format!("time step must be > 0, got {dt}")));
    }
    let y = rk4_step(0.0, &state.to_array(), dt, |_, y| rhs(y, input));
    let mut next = AgentState::from_array(y);
    if !next.is_finite() {
        return Err(Error::NonFinite(format!("agent state after step: {next:?}")));
    }
    next.heading = wrap_angle(next.heading);
    Ok(next)
}

/// RK4 advance followed by clamping the speed into `bounds`.
pub fn step(state: &AgentState, input: &ControlInput, dt: f64, bounds: &VelocityBounds) -> Result<AgentState> {
    let mut next = advance(state, input, dt)?;
    next.speed = bounds.clamp(next.speed);
    Ok(next)
}
