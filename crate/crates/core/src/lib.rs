//! Gaussian classical capacity of bosonic channels with additive, correlated
//! Gaussian noise.
//!
//! The crate solves the quantum water-filling problem at the level of
//! covariance matrices: single modes ([`one_mode`]), finite sets of modes with
//! commuting noise blocks ([`multi_mode`]) and stationary noise with a
//! continuous spectrum ([`spectral`]). [`coherent`] computes the rate achieved
//! with coherent-state inputs, [`input_state`] reconstructs the optimal input
//! covariance, and [`oracle`] provides brute-force cross checks.

pub mod coherent;
pub mod error;
pub mod input_state;
pub mod multi_mode;
pub mod numeric;
pub mod one_mode;
pub mod oracle;
pub mod spectral;

pub use error::{CapacityError, Result};
pub use numeric::{Bracket, SolverTolerances};
pub use one_mode::{InputEnergy, OneModeNoise, OneModeSolution, Regime};
