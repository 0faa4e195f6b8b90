//! Simulation toolkit for chirality qubits in chiral p-wave superconductors.
//!
//! * [`kspace`]: the Γ5⁻ order parameter and its `m̂` texture.
//! * [`chirality`]: the topological chirality number, by two independent methods.
//! * [`dynamics`]: single-qubit tunneling dynamics, dephasing and RF driving.
//! * [`register`]: linear chains of qubits with switchable exchange links.
//! * [`script`]: the line-oriented gate-script format driving a chain.
//! * [`device`]: sizing estimates for a single-domain qubit.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod chirality;
pub mod device;
pub mod dynamics;
pub mod kspace;
pub mod linalg;
pub mod register;
pub mod script;

pub use kspace::{Chirality, GapParams, Momentum};
