//! Closed-loop formation simulation.
//!
//! Every step builds the communication graph over the UAVs and the target
//! (target last), lets each UAV evaluate the consensus law from a snapshot of
//! its neighbors, and then advances all agents with RK4. Neighbor
//! accelerations are the ones published at the end of the previous step; the
//! target's is exact. A UAV that momentarily has no neighbor holds zero input.

use serde::Serialize;

use crate::analysis::formation_error;
use crate::config::ScenarioConfig;
use crate::controller::{consensus_control, NeighborData};
use crate::error::{Error, Result};
use crate::graph::{algebraic_connectivity, build_adjacency, laplacian};
use crate::observer::{observer_step, transform, ObserverState};
use crate::vehicle::{acceleration, advance, step, AgentState, ControlInput};
use crate::Vec2;

/// One logged instant. `inputs[i]` is the command evaluated at this instant.
#[derive(Debug, Clone, PartialEq)]
pub struct LogRow {
    pub t: f64,
    pub uavs: Vec<AgentState>,
    pub inputs: Vec<ControlInput>,
    pub target: AgentState,
    pub agent_errors: Vec<f64>,
    pub position_error: f64,
    pub lambda2: f64,
    pub v_hat: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsolationEvent {
    pub step: usize,
    pub uav: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryLog {
    pub rows: Vec<LogRow>,
    pub isolation_events: Vec<IsolationEvent>,
    pub observer_enabled: bool,
}

impl TrajectoryLog {
    pub fn uav_count(&self) -> usize {
        self.rows.first().map_or(0, |r| r.uavs.len())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub tau: f64,
    /// Every UAV within the convergence threshold from some instant to the horizon.
    pub converged: bool,
    pub convergence_time: Option<f64>,
    pub min_lambda2: f64,
    /// `lambda_2 > connectivity_tol` at every step.
    pub connectivity_maintained: bool,
    /// Per UAV, `sum (|accel| + |turn_rate|) dt` over the applied commands.
    pub control_effort: Vec<f64>,
    pub final_separations: Vec<f64>,
    pub final_errors: Vec<f64>,
    pub isolation_events: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationOutput {
    pub log: TrajectoryLog,
    pub summary: RunSummary,
}

fn row_errors(cfg: &ScenarioConfig, uavs: &[AgentState], target: &AgentState) -> Result<(Vec<f64>, f64)> {
    let e = formation_error(uavs, target, &cfg.formation)?;
    let per_agent = (0..e.agent_count()).map(|i| e.agent_position_norm(i)).collect();
    Ok((per_agent, e.position_norm()))
}

pub fn run_simulation(cfg: &ScenarioConfig) -> Result<SimulationOutput> {
    cfg.validate()?;
    let n = cfg.uavs.len();
    let steps = cfg.steps();
    let offsets = cfg.formation.offsets();
    let v_min = cfg.bounds.v_min;

    let mut uavs = cfg.uavs.clone();
    let mut target = cfg.target.initial;
    let mut published = vec![Vec2::zeros(); n];
    let mut observers: Option<Vec<ObserverState>> = cfg.observer.enabled.then(|| {
        uavs.iter()
            .map(|s| ObserverState {
                z_hat: transform(s, &ControlInput::ZERO).z,
                v_hat: cfg.observer.initial_speed,
            })
            .collect()
    });

    let mut rows = Vec::with_capacity(steps + 1);
    let mut isolation_events = Vec::new();
    let mut effort = vec![0.0; n];
    let mut positions = Vec::with_capacity(n + 1);

    for k in 0..=steps {
        let t = k as f64 * cfg.dt;

        positions.clear();
        positions.extend(uavs.iter().map(|s| s.position));
        positions.push(target.position);
        let adj = build_adjacency(&positions, &cfg.comm)?;
        let lambda2 = algebraic_connectivity(&laplacian(&adj))?;

        let target_input = cfg.target.input(t, &target)?;
        let target_neighbor = |w: f64| NeighborData {
            weight: w,
            hat_position: target.position,
            velocity: target.velocity(),
            acceleration: acceleration(&target, &target_input),
        };

        let mut inputs = Vec::with_capacity(n);
        let mut isolated = 0;
        for i in 0..n {
            let mut nbrs = Vec::with_capacity(n);
            for j in 0..n {
                let w = adj.weight(i, j);
                if j != i && w > 0.0 {
                    nbrs.push(NeighborData {
                        weight: w,
                        hat_position: uavs[j].position - offsets[j],
                        velocity: uavs[j].velocity(),
                        acceleration: published[j],
                    });
                }
            }
            let wt = adj.weight(i, n);
            if wt > 0.0 {
                nbrs.push(target_neighbor(wt));
            }
            let input = match consensus_control(&uavs[i], offsets[i], &nbrs, &cfg.controller, v_min) {
                Ok(u) => u,
                Err(Error::Isolated { .. }) => {
                    isolated += 1;
                    isolation_events.push(IsolationEvent { step: k, uav: i });
                    ControlInput::ZERO
                }
                Err(e) => {
                    return Err(Error::Aborted {
                        step: k,
                        reason: format!("UAV {}: {e}", i + 1),
                    })
                }
            };
            inputs.push(input);
        }
        if isolated == n {
            return Err(Error::Aborted {
                step: k,
                reason: "every UAV lost all neighbors".into(),
            });
        }

        let (agent_errors, position_error) = row_errors(cfg, &uavs, &target)?;
        rows.push(LogRow {
            t,
            uavs: uavs.clone(),
            inputs: inputs.clone(),
            target,
            agent_errors,
            position_error,
            lambda2,
            v_hat: observers.as_ref().map(|o| o.iter().map(|s| s.v_hat).collect()),
        });
        if k == steps {
            break;
        }

        for i in 0..n {
            effort[i] += inputs[i].effort() * cfg.dt;
            let before = uavs[i];
            let after = step(&before, &inputs[i], cfg.dt, &cfg.bounds).map_err(|e| Error::Aborted {
                step: k,
                reason: format!("UAV {}: {e}", i + 1),
            })?;
            // What the vehicle actually did once the speed clamp is accounted for.
            let applied = ControlInput::new((after.speed - before.speed) / cfg.dt, inputs[i].turn_rate);
            published[i] = acceleration(&before, &applied);
            if let Some(obs) = observers.as_mut() {
                let start = transform(&before, &applied);
                let end = transform(&after, &applied);
                obs[i] = observer_step(&obs[i], &start, &end, &applied, cfg.dt, &cfg.observer.powers).map_err(|e| {
                    Error::Aborted {
                        step: k,
                        reason: format!("observer {}: {e}", i + 1),
                    }
                })?;
            }
            uavs[i] = after;
        }
        target = advance(&target, &target_input, cfg.dt).map_err(|e| Error::Aborted {
            step: k,
            reason: format!("target: {e}"),
        })?;
    }

    let summary = summarize(cfg, &rows, &effort, isolation_events.len());
    Ok(SimulationOutput {
        log: TrajectoryLog {
            rows,
            isolation_events,
            observer_enabled: cfg.observer.enabled,
        },
        summary,
    })
}

fn summarize(cfg: &ScenarioConfig, rows: &[LogRow], effort: &[f64], isolation_events: usize) -> RunSummary {
    let min_lambda2 = rows.iter().map(|r| r.lambda2).fold(f64::INFINITY, f64::min);
    let connectivity_maintained = min_lambda2 > cfg.connectivity_tol;

    let in_formation = |r: &LogRow| r.agent_errors.iter().all(|&e| e < cfg.convergence_threshold);
    let settled_from = rows.iter().rposition(|r| !in_formation(r)).map_or(0, |k| k + 1);
    let convergence_time = (connectivity_maintained && settled_from < rows.len()).then(|| rows[settled_from].t);

    let last = rows.last().expect("at least one row");
    RunSummary {
        tau: cfg.controller.tau(),
        converged: convergence_time.is_some(),
        convergence_time,
        min_lambda2,
        connectivity_maintained,
        control_effort: effort.to_vec(),
        final_separations: last
            .uavs
            .iter()
            .map(|s| (s.position - last.target.position).norm())
            .collect(),
        final_errors: last.agent_errors.clone(),
        isolation_events,
    }
}

/// Runs `cfg` once per `tau`; runs are independent and execute on separate threads.
pub fn sweep_tau(cfg: &ScenarioConfig, taus: &[f64]) -> Vec<Result<SimulationOutput>> {
    std::thread::scope(|scope| {
        let handles: Vec<_> = taus
            .iter()
            .map(|&tau| scope.spawn(move || run_simulation(&cfg.with_tau(tau)?)))
            .collect();
        handles
            .into_iter()
            .map(|h| {
                h.join()
                    .unwrap_or_else(|_| Err(Error::Internal("simulation thread panicked".into())))
            })
            .collect()
    })
}
