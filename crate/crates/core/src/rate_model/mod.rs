//! Closed-form rate pictures: cascaded decay of an emitter pair into the
//! two propagating directions, and the heralded spin-spin entanglement
//! protocol with an explicit enumeration cross-check.

mod cascade;
mod herald;

pub use cascade::{cascade_rates, cross_auto_ratio, CascadeResult};
pub use herald::{
    bell_state, enumerate_protocol, enumerate_protocol_oracle, herald_entanglement, Bell, Channel, HeraldOutcome,
    HeraldResult, SpinSetup, SPIN_BASIS,
};
