//! Benchmark dynamical systems, fixed-step integration, and training-data
//! generation.

mod catalog;
mod integrate;
mod training;

pub use catalog::{make_system, SystemKind, SystemSpec};
pub use integrate::{integrate_rk4, InputSignal, Trajectory};
pub use training::{generate_training_set, Box, TrainingSet};
