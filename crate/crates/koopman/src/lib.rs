//! Koopman-operator learning and control toolkit.
//!
//! Fits linear operator models (DMD, forward-backward DMD, DMD with control,
//! extended DMD, HAVOK) from trajectory data of nonlinear dynamical systems,
//! extracts and validates Koopman eigenfunctions, approximates transfer
//! operators on box partitions, and closes the loop with a receding-horizon
//! model predictive controller over any fitted lifted linear model.

pub mod control;
pub mod dmd;
pub mod edmd;
pub mod error;
pub mod havok;
pub mod numerics;
pub mod observables;
pub mod systems;

pub use error::{Error, Result};
