//! Quantum reservoir computing on random regular graphs.
//!
//! The crate builds disordered spin Hamiltonians on connected random regular
//! graphs, drives them with a repeated input-injection channel, and trains
//! classical readouts (ridge regression and RBF-kernel SVMs) on local
//! computational-basis measurements of the reservoir.
//!
//! Module map:
//!
//! - [`graph`]: connected random regular graphs.
//! - [`qstate`]: dense multi-qubit linear algebra (partial traces, partial
//!   transposes, norms, Hermitian eigensolver, propagators).
//! - [`hamiltonian`]: the disordered `zz + xx + x + z` spin Hamiltonian and
//!   level-spacing statistics.
//! - [`reservoir`]: input encodings, the injection channel and feature
//!   extraction.
//! - [`readout`]: ridge regression, SMO kernel classifier and metrics.
//! - [`tasks`]: memory and logical-multitask benchmark sequences.
//! - [`diagnostics`]: correlation-norm and logarithmic-negativity dynamics.
//! - [`experiment`]: seeded, parallel parameter sweeps with CSV/JSON output.

pub mod diagnostics;
pub mod error;
pub mod experiment;
pub mod graph;
pub mod hamiltonian;
pub mod qstate;
pub mod readout;
pub mod reservoir;
pub mod tasks;

pub use error::{QrcError, Result};
pub use faer::c64;
