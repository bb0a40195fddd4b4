//! Simulator for quantum Turing machines on a one-dimensional qudit lattice.
//!
//! A machine is a step operator `T` built from local terms. The crate
//! applies `T` and `T†` to sparse states, checks whether `T` is distinct
//! path generating, follows paths, and evolves states under
//! `H = K(2 − T − T†)`.

pub mod cli;
pub mod dynamics;
pub mod error;
pub mod graphs;
pub mod io;
pub mod machines;
pub mod operators;
pub mod paths;
pub mod state;

pub use error::{QtmError, Result};
pub use operators::{CMatrix, StepOperator, StepTerm};
pub use state::{BasisVector, Dims, QuditLattice, WaveState};
