//! Decentralized formation control laws.
//!
//! Each UAV steers its "hat" position `p_i - P_i` toward those of its neighbors
//! (the target's offset is zero), feeding forward the neighbors' accelerations.
//! The fractional-power law applies signed powers `alpha1 = 1 + 2 tau` and
//! `alpha2 = (1 + 2 tau) / (1 + tau)` to the position and velocity
//! differences; `tau = 0` recovers the linear law.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode::spow_scalar;
use crate::vehicle::{input_matrix_inverse, AgentState, ControlInput};
use crate::Vec2;

/// Elementwise signed power of a planar vector.
pub fn spow(x: Vec2, alpha: f64) -> Vec2 {
    Vec2::new(spow_scalar(x.x, alpha), spow_scalar(x.y, alpha))
}

/// `(alpha1, alpha2) = (1 + 2 tau, (1 + 2 tau) / (1 + tau))`.
pub fn derived_powers(tau: f64) -> Result<(f64, f64)> {
    if !(tau > -0.5) || !tau.is_finite() {
        return Err(Error::domain(format!("tau must be > -1/2, got {tau}")));
    }
    let alpha1 = 1.0 + 2.0 * tau;
    Ok((alpha1, alpha1 / (1.0 + tau)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControllerParams {
    k1: f64,
    k2: f64,
    tau: f64,
    alpha1: f64,
    alpha2: f64,
}

impl ControllerParams {
    pub fn new(k1: f64, k2: f64, tau: f64) -> Result<Self> {
        if !k1.is_finite() || !k2.is_finite() {
            return Err(Error::domain("controller gains must be finite"));
        }
        let (alpha1, alpha2) = derived_powers(tau)?;
        Ok(Self {
            k1,
            k2,
            tau,
            alpha1,
            alpha2,
        })
    }

    pub fn k1(&self) -> f64 {
        self.k1
    }
    pub fn k2(&self) -> f64 {
        self.k2
    }
    pub fn tau(&self) -> f64 {
        self.tau
    }
    pub fn alpha1(&self) -> f64 {
        self.alpha1
    }
    pub fn alpha2(&self) -> f64 {
        self.alpha2
    }

    pub fn with_tau(&self, tau: f64) -> Result<Self> {
        Self::new(self.k1, self.k2, tau)
    }
}

/// Desired offsets `P_i = delta [cos psi_i, sin psi_i]` around the target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FormationSpec {
    delta: f64,
    psi: Vec<f64>,
}

impl FormationSpec {
    pub fn new(delta: f64, psi: Vec<f64>) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::domain(format!(
                "formation radius delta must be > 0, got {delta}"
            )));
        }
        if psi.iter().any(|a| !a.is_finite()) {
            return Err(Error::domain("formation angles must be finite"));
        }
        Ok(Self { delta, psi })
    }

    /// Regular polygon: `psi_i = 2 pi i / n` for `i = 1..=n`.
    pub fn regular(delta: f64, n: usize) -> Result<Self> {
        let psi = (1..=n).map(|i| 2.0 * PI * i as f64 / n as f64).collect();
        Self::new(delta, psi)
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn psi(&self) -> &[f64] {
        &self.psi
    }

    pub fn len(&self) -> usize {
        self.psi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.psi.is_empty()
    }

    pub fn offset(&self, i: usize) -> Vec2 {
        let (s, c) = self.psi[i].sin_cos();
        Vec2::new(self.delta * c, self.delta * s)
    }

    pub fn offsets(&self) -> Vec<Vec2> {
        (0..self.len()).map(|i| self.offset(i)).collect()
    }
}

/// What agent `i` knows about one neighbor `j` at the current instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeighborData {
    /// Link weight `a_ij > 0`.
    pub weight: f64,
    /// `p_j - P_j`; for the target this is its plain position.
    pub hat_position: Vec2,
    pub velocity: Vec2,
    pub acceleration: Vec2,
}

/// `p''_j - k1 spow(p^_i - p^_j, alpha1) - k2 spow(p'_i - p'_j, alpha2)`.
pub fn bracket(own_hat: Vec2, own_velocity: Vec2, neighbor: &NeighborData, params: &ControllerParams) -> Vec2 {
    neighbor.acceleration
        - spow(own_hat - neighbor.hat_position, params.alpha1) * params.k1
        - spow(own_velocity - neighbor.velocity, params.alpha2) * params.k2
}

fn to_input(state: &AgentState, demand: Vec2, v_min: f64) -> Result<ControlInput> {
    let u = input_matrix_inverse(state, v_min)? * demand;
    let input = ControlInput::new(u.x, u.y);
    if !input.is_finite() {
        return Err(Error::NonFinite(format!("control input {input:?}")));
    }
    Ok(input)
}

/// Fractional-power law against a single neighbor.
pub fn pairwise_control(
    state: &AgentState,
    own_offset: Vec2,
    neighbor: &NeighborData,
    params: &ControllerParams,
    v_min: f64,
) -> Result<ControlInput> {
    let demand = bracket(state.position - own_offset, state.velocity(), neighbor, params);
    to_input(state, demand, v_min)
}

/// Cartesian acceleration demanded by the weighted consensus law, i.e. `M_i u_i`.
pub fn consensus_demand(
    state: &AgentState,
    own_offset: Vec2,
    neighbors: &[NeighborData],
    params: &ControllerParams,
) -> Result<Vec2> {
    let total: f64 = neighbors.iter().map(|n| n.weight).sum();
    if !(total > 0.0) {
        return Err(Error::Isolated { total_weight: total });
    }
    let own_hat = state.position - own_offset;
    let own_velocity = state.velocity();
    let sum = neighbors.iter().fold(Vec2::zeros(), |acc, n| {
        acc + bracket(own_hat, own_velocity, n, params) * n.weight
    });
    Ok(sum / total)
}

/// Weighted fractional-power consensus law over all current neighbors.
pub fn consensus_control(
    state: &AgentState,
    own_offset: Vec2,
    neighbors: &[NeighborData],
    params: &ControllerParams,
    v_min: f64,
) -> Result<ControlInput> {
    let demand = consensus_demand(state, own_offset, neighbors, params)?;
    to_input(state, demand, v_min)
}

/// The linear consensus law (no fractional powers) with gains `k1`, `k2`.
pub fn linear_consensus_control(
    state: &AgentState,
    own_offset: Vec2,
    neighbors: &[NeighborData],
    k1: f64,
    k2: f64,
    v_min: f64,
) -> Result<ControlInput> {
    let total: f64 = neighbors.iter().map(|n| n.weight).sum();
    if !(total > 0.0) {
        return Err(Error::Isolated { total_weight: total });
    }
    let own_hat = state.position - own_offset;
    let own_velocity = state.velocity();
    let mut demand = Vec2::zeros();
    for n in neighbors {
        let term = n.acceleration - (own_hat - n.hat_position) * k1 - (own_velocity - n.velocity) * k2;
        demand += term * n.weight;
    }
    to_input(state, demand / total, v_min)
}
