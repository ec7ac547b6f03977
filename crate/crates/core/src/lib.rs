//! Coupled kinetic-fluid solver for a Vlasov-Fokker-Planck population
//! immersed in a compressible Navier-Stokes fluid, together with the
//! two-phase Euler / Navier-Stokes limit model and relative-entropy
//! diagnostics, on a one-dimensional slab.

pub mod config;
pub mod entropy;
pub mod error;
pub mod fluid;
pub mod grid;
pub mod harness;
pub mod io;
pub mod kinetic;
pub mod limit;
pub mod moments;

pub use config::ExperimentConfig;
pub use error::{Error, Result};
pub use grid::{FluidState, KineticState, PhaseGrid, ScalingParams, TwoPhaseState};
