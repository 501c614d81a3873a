//! Discovery and evaluation of small stabilizer codes assembled from
//! tensor-network building blocks.
//!
//! The crate is organized bottom-up:
//!
//! * [`pauli`] / [`group`] / [`code`] — signed Pauli operators over packed
//!   GF(2) bit vectors, generating-set linear algebra, check matrices.
//! * [`lego`] — building blocks, networks, contraction, code derivation.
//! * [`circuit`] / [`layout`] / [`synth`] — Clifford circuits, coupling
//!   graphs, encoder and syndrome-extraction synthesis, routing.
//! * [`noise`] / [`tableau`] / [`dense`] / [`channel`] — noise models and
//!   the two execution engines plus the relaxation channel toolkit.
//! * [`eval`] / [`protocol`] — the state-preparation protocol, correction
//!   tables, non-detection probability, fidelity fits, renormalization.
//! * [`game`] / [`agents`] / [`learn`] — the construction game and agents.
//! * [`backend`] / [`jobstore`] — execution backends and persistent jobs.

pub mod agents;
pub mod backend;
pub mod channel;
pub mod circuit;
pub mod code;
pub mod dense;
pub mod error;
pub mod eval;
pub mod game;
pub mod group;
pub mod jobstore;
pub mod layout;
pub mod learn;
pub mod lego;
pub mod noise;
pub mod protocol;
pub mod synth;
pub mod tableau;

pub use circuit::CliffordCircuit;
pub use code::CheckMatrix;
pub use error::{Error, Result};
pub use noise::NoiseModel;
pub use pauli::{Pauli, PauliOperator};

pub mod pauli;
