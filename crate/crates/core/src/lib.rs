//! Stationary states and quantum thermodynamics of a periodically driven,
//! lossy, anharmonic Jaynes–Cummings polariton.
//!
//! The pipeline for one parameter point is
//! [`PolaritonSpec`] → [`liouville::assemble`] → [`propagator::solve`] →
//! [`thermo::evaluate`]; [`sweep`] maps it over parameter grids and writes
//! tables.

pub mod error;
pub mod expm;
pub mod linalg;
pub mod liouville;
pub mod model;
pub mod propagator;
pub mod state;
pub mod sweep;
pub mod thermo;
pub mod units;

pub use error::{Error, Result};
pub use liouville::{assemble, GeneratorSet, SuperOp};
pub use model::{BasisState, Branch, EnergyOperators, PolaritonSpec, Spectrum};
pub use propagator::{solve, stationary_state, PropagationResult, Solution};
pub use state::DensityMatrix;
pub use sweep::{Axis, ResultTable, SweepConfig, SweepPlan};
pub use thermo::{Energies, ThermoRecord};
