//! Scenario files.
//!
//! A scenario is a line-oriented `key = value` file with `[section]` headers
//! (a TOML subset). Angles are in radians, lengths in meters, times in
//! seconds. See `configs/README.md` in the repository for the full grammar.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;

use crate::controller::{ControllerParams, FormationSpec};
use crate::error::{Error, Result};
use crate::graph::{CommModel, DEFAULT_CONNECTIVITY_TOL};
use crate::observer::ObserverPowers;
use crate::vehicle::{AgentState, TargetInputMode, TargetProfile, VelocityBounds, DEFAULT_DT};

pub const FORMAT_VERSION: i64 = 1;
pub const DEFAULT_HORIZON: f64 = 100.0;
pub const DEFAULT_CONVERGENCE_THRESHOLD: f64 = 1.0;

#[derive(Debug, Clone, PartialEq)]
pub struct ObserverSettings {
    pub enabled: bool,
    pub powers: ObserverPowers,
    /// Initial speed estimate for every UAV; the position estimate starts at the measurement.
    pub initial_speed: f64,
}

impl Default for ObserverSettings {
    fn default() -> Self {
        Self {
            enabled: false,
            powers: ObserverPowers::default(),
            initial_speed: 0.0,
        }
    }
}

/// A fully validated experiment definition.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub uavs: Vec<AgentState>,
    pub target: TargetProfile,
    pub formation: FormationSpec,
    pub comm: CommModel,
    pub controller: ControllerParams,
    pub bounds: VelocityBounds,
    pub dt: f64,
    pub horizon: f64,
    pub observer: ObserverSettings,
    pub connectivity_tol: f64,
    /// Per-agent position error below which a UAV counts as in formation.
    pub convergence_threshold: f64,
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::validation(
                "simulation.dt",
                format!("must be > 0, got {}", self.dt),
            ));
        }
        if !(self.horizon >= self.dt && self.horizon.is_finite()) {
            return Err(Error::validation(
                "simulation.horizon",
                format!("must be >= dt ({}), got {}", self.dt, self.horizon),
            ));
        }
        if self.uavs.is_empty() {
            return Err(Error::validation("uav", "at least one UAV is required"));
        }
        if self.formation.len() != self.uavs.len() {
            return Err(Error::validation(
                "formation.psi",
                format!("{} angles for {} UAVs", self.formation.len(), self.uavs.len()),
            ));
        }
        for (i, s) in self.uavs.iter().enumerate() {
            let ok = [s.position.x, s.position.y, s.speed, s.heading]
                .iter()
                .all(|v| v.is_finite());
            if !ok {
                return Err(Error::validation(format!("uav.{}", i + 1), "non-finite state"));
            }
            if s.speed < self.bounds.v_min || s.speed > self.bounds.v_max {
                return Err(Error::validation(
                    format!("uav.{}.speed", i + 1),
                    format!(
                        "{} outside velocity bounds [{}, {}]",
                        s.speed, self.bounds.v_min, self.bounds.v_max
                    ),
                ));
            }
        }
        for (field, gain) in [
            ("controller.k1", self.controller.k1()),
            ("controller.k2", self.controller.k2()),
        ] {
            if !(gain > 0.0) {
                return Err(Error::validation(field, format!("must be > 0, got {gain}")));
            }
        }
        if !(self.target.initial.speed > 0.0) {
            return Err(Error::validation("target.speed", "must be > 0"));
        }
        if !(self.target.period > 0.0) {
            return Err(Error::validation("target.period", "must be > 0"));
        }
        if !(self.connectivity_tol > 0.0) {
            return Err(Error::validation("simulation.connectivity_tol", "must be > 0"));
        }
        if !(self.convergence_threshold > 0.0) {
            return Err(Error::validation("simulation.convergence_threshold", "must be > 0"));
        }
        Ok(())
    }

    pub fn with_tau(&self, tau: f64) -> Result<Self> {
        let controller = self
            .controller
            .with_tau(tau)
            .map_err(|e| Error::validation("controller.tau", e.to_string()))?;
        Ok(Self {
            controller,
            ..self.clone()
        })
    }

    /// Number of integration steps; the log holds one more row than this.
    pub fn steps(&self) -> usize {
        (self.horizon / self.dt + 1e-9).floor() as usize
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    format: i64,
    #[serde(default)]
    simulation: RawSimulation,
    #[serde(default)]
    observer: RawObserver,
    target: RawTarget,
    formation: RawFormation,
    comm: RawComm,
    controller: RawController,
    bounds: RawBounds,
    uav: BTreeMap<String, RawAgent>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawSimulation {
    dt: f64,
    horizon: f64,
    connectivity_tol: f64,
    convergence_threshold: f64,
}

impl Default for RawSimulation {
    fn default() -> Self {
        Self {
            dt: DEFAULT_DT,
            horizon: DEFAULT_HORIZON,
            connectivity_tol: DEFAULT_CONNECTIVITY_TOL,
            convergence_threshold: DEFAULT_CONVERGENCE_THRESHOLD,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawObserver {
    enabled: bool,
    position_power: f64,
    speed_power: f64,
    initial_speed: f64,
}

impl Default for RawObserver {
    fn default() -> Self {
        let d = ObserverSettings::default();
        Self {
            enabled: d.enabled,
            position_power: d.powers.position,
            speed_power: d.powers.speed,
            initial_speed: d.initial_speed,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAgent {
    x: f64,
    y: f64,
    speed: f64,
    heading: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTarget {
    x: f64,
    y: f64,
    speed: f64,
    heading: f64,
    #[serde(default)]
    input_mode: TargetInputMode,
    #[serde(default = "default_amplitude")]
    amplitude: f64,
    #[serde(default = "default_period")]
    period: f64,
}

fn default_amplitude() -> f64 {
    TargetProfile::DEFAULT_AMPLITUDE
}

fn default_period() -> f64 {
    TargetProfile::DEFAULT_PERIOD
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFormation {
    delta: f64,
    psi: Option<Vec<f64>>,
    spacing: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawComm {
    range: f64,
    sigma: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawController {
    k1: f64,
    k2: f64,
    tau: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBounds {
    v_min: f64,
    v_max: f64,
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

fn field_err(field: &str) -> impl Fn(Error) -> Error + '_ {
    move |e| match e {
        Error::Domain(msg) => Error::validation(field, msg),
        other => other,
    }
}

/// Parses and validates scenario text.
pub fn parse_config(text: &str) -> Result<ScenarioConfig> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Parse {
        line: e.span().map(|s| line_of(text, s.start)).unwrap_or(0),
        message: e.message().trim().to_string(),
    })?;
    if raw.format != FORMAT_VERSION {
        return Err(Error::validation(
            "format",
            format!("unsupported format {} (expected {FORMAT_VERSION})", raw.format),
        ));
    }

    // UAV sections are `[uav.1]`, `[uav.2]`, ... and are ordered numerically.
    let mut indexed = Vec::with_capacity(raw.uav.len());
    for (key, a) in raw.uav {
        let idx: usize = key
            .parse()
            .ok()
            .filter(|&i| i >= 1)
            .ok_or_else(|| Error::validation(format!("uav.{key}"), "UAV sections must be numbered 1, 2, ..."))?;
        indexed.push((idx, AgentState::new(a.x, a.y, a.speed, a.heading)));
    }
    indexed.sort_by_key(|(i, _)| *i);
    for (expected, (idx, _)) in indexed.iter().enumerate() {
        if *idx != expected + 1 {
            return Err(Error::validation(
                format!("uav.{idx}"),
                "UAV numbering must be contiguous from 1",
            ));
        }
    }
    let uavs: Vec<AgentState> = indexed.into_iter().map(|(_, s)| s).collect();
    let n = uavs.len();

    let formation = match (raw.formation.psi, raw.formation.spacing) {
        (Some(_), Some(_)) => {
            return Err(Error::validation(
                "formation",
                "give either `psi` or `spacing`, not both",
            ));
        }
        (Some(psi), None) => FormationSpec::new(raw.formation.delta, psi),
        (None, Some(spacing)) => FormationSpec::new(raw.formation.delta, (1..=n).map(|i| spacing * i as f64).collect()),
        (None, None) => FormationSpec::regular(raw.formation.delta, n),
    }
    .map_err(field_err("formation"))?;

    let comm = CommModel::new(raw.comm.range, raw.comm.sigma).map_err(field_err("comm"))?;
    let controller = ControllerParams::new(raw.controller.k1, raw.controller.k2, raw.controller.tau)
        .map_err(field_err("controller"))?;
    let bounds = VelocityBounds::new(raw.bounds.v_min, raw.bounds.v_max).map_err(field_err("bounds"))?;

    let t = raw.target;
    let mut target = TargetProfile::new(AgentState::new(t.x, t.y, t.speed, t.heading), t.input_mode);
    target.amplitude = t.amplitude;
    target.period = t.period;

    let cfg = ScenarioConfig {
        uavs,
        target,
        formation,
        comm,
        controller,
        bounds,
        dt: raw.simulation.dt,
        horizon: raw.simulation.horizon,
        observer: ObserverSettings {
            enabled: raw.observer.enabled,
            powers: ObserverPowers {
                position: raw.observer.position_power,
                speed: raw.observer.speed_power,
            },
            initial_speed: raw.observer.initial_speed,
        },
        connectivity_tol: raw.simulation.connectivity_tol,
        convergence_threshold: raw.simulation.convergence_threshold,
    };
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: impl AsRef<Path>) -> Result<ScenarioConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&text)
}
