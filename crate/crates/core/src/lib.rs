//! Simulation and analysis of a pair of quantum emitters coupled to the
//! degenerate clockwise/counter-clockwise modes of a whispering-gallery-mode
//! microresonator.
//!
//! The crate is organised by subsystem:
//!
//! - [`quantum`]: dense operator algebra on the two-emitter, two-mode Hilbert
//!   space and construction of the system Hamiltonian and collapse operators.
//! - [`dit`]: closed-form dipole-induced-transparency transmission with a Fano
//!   background, plus a direct linear-solve cross-check.
//! - [`dynamics`]: Lindblad master-equation integration, post-pulse state
//!   preparation, directional wavepackets, pumped steady states and two-time
//!   correlations.
//! - [`rate_model`]: the cascaded superradiant decay picture and the heralded
//!   spin-spin entanglement protocol.
//! - [`metrics`]: Purcell factor, cooperativity and linewidth arithmetic.
//! - [`fitting`]: bounded Nelder-Mead and the staged spectral fits.
//!
//! Rates are stored as angular frequencies in rad/ns. Ordinary frequencies
//! (GHz, MHz) only appear at the I/O boundary, see [`units`].

pub mod dit;
pub mod dynamics;
pub mod error;
pub mod fitting;
pub mod metrics;
pub mod quantum;
pub mod rate_model;
pub mod spectrum;
pub mod units;

pub use error::{Error, Result};
pub use num_complex::Complex64;
