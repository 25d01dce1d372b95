//! Low-rank reaction-rate sensitivities and skeletal mechanism reduction.
//!
//! The crate is `no_std` (with `alloc`). It covers the numerical pipeline end
//! to end:
//!
//! - [`mechanism`]: species thermochemistry (NASA-7), reactions, rate laws and
//!   mass-action production rates.
//! - [`reactor`]: the constant-pressure adiabatic reactor, its Jacobian `L` and
//!   the reaction forcing `F` of the sensitivity equation `dS/dt = L S + F`.
//! - [`bdf`] and [`fom`]: fixed-step BDF4 integration of the reactor state and
//!   of the full sensitivity matrix.
//! - [`tdbcur`]: the implicit time-dependent-basis CUR integrator that evolves
//!   `S = U Σ Yᵀ` from sampled columns and rows only.
//! - [`ranking`]: reaction weights, the `χ` importance vector, species ranking
//!   and skeletal mechanism construction.
//! - [`ignition`]: case set-up helpers and ignition-delay extraction.
//!
//! File formats, timing, parallel campaigns and the command-line tool live in
//! the companion `skeletal` crate.
#![no_std]

extern crate alloc;
#[cfg(any(test, feature = "std"))]
extern crate std;

pub mod bdf;
pub mod elements;
pub mod error;
pub mod fom;
pub mod ignition;
pub mod linalg;
pub mod mechanism;
pub mod ranking;
pub mod reactor;
pub mod tdbcur;

pub use error::{Error, MechanismError};
pub use mechanism::{Arrhenius, Mechanism, Nasa7, Reaction, ReactionKind, SourceTag, Species};
pub use reactor::{ReactorState, Reactor};

/// Universal gas constant, J/(kmol·K).
pub const GAS_CONSTANT: f64 = 8314.462_618_153_24;

/// Standard-state pressure for equilibrium constants, Pa.
pub const ONE_ATMOSPHERE: f64 = 101_325.0;
