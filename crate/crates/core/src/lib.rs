//! Stochastic energy extraction from a qubit quantum battery.
//!
//! A battery `B` is entangled with an auxiliary `A`, the auxiliary is
//! disturbed by an environment `E`, and a projective measurement is performed
//! either on `A` together with an uncorrelated external qubit `X` (a POVM on
//! `A`), on `AE` (a type-1 non-positive measurement), or on `AEX` (type-2).
//! The largest eigenvalue of the corresponding reduced operator gives the
//! maximum of `p * ΔE` over all projective measurements.
//!
//! The crate is organised bottom-up:
//!
//! * [`hilbert`]: labelled dense operators, partial traces, Hermitian
//!   eigendecomposition and unitary propagators.
//! * [`model`]: Hamiltonians and initial states.
//! * [`noise`]: two-qubit dilations of amplitude-damping, bit-flip and
//!   dephasing noise on the auxiliary.
//! * [`protocol`]: the preparation pipeline and the extractable-energy
//!   operators for each measurement family.
//! * [`optimizer`]: restricted (local-unitary) measurement search and Haar
//!   sampling oracles.
//! * [`scenarios`]: parameter sweeps that regenerate each figure.
//! * [`validation`]: the invariant and acceptance checks behind
//!   `qbatt validate`.
//! * [`cli`]: command-line driver plus CSV and SVG emitters.

pub mod cli;
pub mod error;
pub mod hilbert;
pub mod model;
pub mod noise;
pub mod optimizer;
pub mod protocol;
pub mod scenarios;
pub mod validation;

pub use error::{QbattError, Result};
pub use hilbert::{ComplexOperator, Subsystem, C64};
