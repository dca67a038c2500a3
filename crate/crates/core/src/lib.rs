//! Decentralized fractional-power formation control for a team of unicycle
//! UAVs encircling a mobile target.
//!
//! The crate is split along the simulation pipeline:
//!
//! - [`graph`]: distance-weighted communication graph, Laplacian and algebraic connectivity
//! - [`vehicle`]: unicycle kinematics, RK4 stepping and speed saturation
//! - [`controller`]: linear and fractional-power consensus formation laws
//! - [`observer`]: fractional-power velocity observer and a scalar demo pair
//! - [`analysis`]: closed-form special solutions, residual bounds, Lyapunov checks
//! - [`config`], [`sim`], [`csv`], [`cli`]: scenarios, the simulation loop, output and the CLI

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod cli;
pub mod config;
pub mod controller;
pub mod csv;
pub mod eigen;
pub mod error;
pub mod graph;
pub mod observer;
pub mod ode;
pub mod sim;
pub mod vehicle;

pub use error::{Error, Result};

/// Planar vector in meters (or m/s, m/s²).
pub type Vec2 = nalgebra::Vector2<f64>;
