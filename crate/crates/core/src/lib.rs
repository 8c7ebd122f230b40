//! Simulation and design tools for chemical-reaction microfluidic logic.
//!
//! A circuit is a [`network::Netlist`] of inlets, straight channels and
//! two-input merging junctions. Channels may host bimolecular reactions
//! ([`kinetics`]); the [`solver`] integrates the 1D convection–diffusion–
//! reaction equation on every channel with operator splitting.
//!
//! On top of that sit the module and gate builders ([`library`]), the
//! digital read-out and steady-state oracle ([`harness`]) and two-level
//! logic synthesis onto library gates ([`synthesis`]).

pub mod error;
pub mod harness;
pub mod kinetics;
pub mod library;
pub mod network;
pub mod solver;
pub mod synthesis;
pub mod trace;
pub mod transport;

pub use error::{Error, Result};
