//! Time-domain master-equation engine: post-pulse preparation, RK4
//! evolution, directional wavepackets, pumped steady states and two-time
//! correlations.

mod bad_cavity;
mod correlation;
mod evolve;
mod generator;
mod prep;
mod steady;
mod wavepacket;

pub use bad_cavity::{bad_cavity_model, EmitterPairModel, EMITTER_PAIR_DIM};
pub use correlation::{g2_auto_cross, g2_correlation};
pub use evolve::{
    default_dt, evolve, evolve_open, step_limit, EvolveOptions, NormPolicy, Physicality, Trajectory,
    DEFAULT_SAMPLE_INTERVAL, MAX_DEFAULT_DT,
};
pub use generator::{diagonal_support, lindblad_rhs, lindblad_rhs_open, reachable_support, Generator};
pub use prep::{excited_population, prepare_post_pulse_state, prepare_with_model, Direction, PrepModel, PulsePrep};
pub use steady::{
    pumped_system, steady_state, steady_state_in_sector, steady_state_residual, steady_state_with,
    SteadyStateMethod,
};
pub use wavepacket::{beat_period, beat_period_after, wavepacket, WavepacketPair};
