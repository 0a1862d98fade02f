//! Independent reference solutions used to validate the mesoscopic-lead
//! dynamics.
//!
//! - [`chain`]: exact unitary evolution with each bath mapped onto a
//!   finite tight-binding chain, valid up to a light-cone horizon.
//! - [`pauli`]: classical rate equation for a single driven level.
//! - [`landauer`]: steady-state currents of a static single level from the
//!   transmission integral.

pub mod chain;
pub mod landauer;
pub mod pauli;

pub use chain::{chain_evolve, chain_map, validity_horizon, ChainBath, ChainOptions, ChainRecord, ChainRun};
pub use landauer::{landauer_currents, LandauerCurrents};
pub use pauli::{pauli_evolve, PauliSample};
