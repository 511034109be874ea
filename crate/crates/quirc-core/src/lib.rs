//! Core library for a distributed surface-code workbench: exact stabilizer
//! simulation, a noisy circuit IR with Pauli-frame sampling, lattice-surgery
//! merge circuits, a matching-graph decoder, Pauli-product schedule
//! transpilation, and routing-card EP scheduling with exact protocol
//! verification.

pub mod circuit;
pub mod decoder;
pub mod dense;
pub mod pauli;
pub mod routecard;
pub mod sched;
pub mod surgery;
pub mod tableau;

pub use pauli::{Gate, PauliError, PauliKind, PauliString};
pub use tableau::{Measurement, OutcomeSource, StabilizerTableau};
