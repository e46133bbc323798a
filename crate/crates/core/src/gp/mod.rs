//! Evolutionary tuning of the oscillator parameters.
//!
//! A real-valued evolution strategy searches over seven coefficients of the
//! network. Each candidate drives the surrogate for a few seconds with every
//! tonic input at 1 and is scored on its terminal velocity, heading error
//! and distance travelled toward a goal straight ahead.

mod evolve;
mod genome;

pub use evolve::{evolve, EvolveConfig, EvolveResult, GenerationStats};
pub use genome::{fitness, oscillates, rollout_displacement, FitnessConfig, GeneBounds, Genome, GENE_NAMES, N_GENES};
