//! Driven, non-interacting fermionic systems strongly coupled to thermal
//! baths, simulated with damped mesoscopic leads.
//!
//! Each continuum bath is replaced by a finite set of lead modes, each
//! locally damped toward its own thermal occupation. For quadratic
//! Hamiltonians the resulting Lindblad dynamics closes on the single-particle
//! correlation matrix `C_pq = <d_q^dag d_p>`, which obeys the differential
//! Lyapunov equation
//!
//! ```text
//! dC/dt = -(W(t) C + C W(t)^dag) + F,    W(t) = i H_ext(t) + Upsilon / 2
//! ```
//!
//! The crate is organised bottom-up:
//!
//! - [`spectral`]: spectral functions and their lin-log discretisation into
//!   damped lead modes.
//! - [`model`]: system Hamiltonian, drive protocol and the assembled
//!   extended generator.
//! - [`lyapunov`]: RK4 time integration and the static steady state.
//! - [`floquet`]: harmonic (limit-cycle) solution for periodic drives.
//! - [`thermo`]: currents, heat, work, entropy production and rectification.
//! - [`oracle`]: independent validators (chain mapping, Pauli master
//!   equation, Landauer integral).

pub mod error;
pub mod floquet;
pub mod linalg;
pub mod lyapunov;
pub mod model;
pub mod oracle;
pub mod spectral;
pub mod thermo;

pub use error::{Error, Result};

pub use linalg::C64;
pub use model::{
    BlockLayout, CorrelationMatrix, Coupling, DriveProtocol, ExtendedGenerator, Harmonic,
    SystemModel,
};

pub use spectral::{BathSpec, DiscretizationScheme, LeadMode, SpectralFunction};

