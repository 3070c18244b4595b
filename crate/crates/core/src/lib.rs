//! Secretary-problem selection rules that use a predicted additive gap
//! between the largest and the k-th largest weight, together with their
//! closed-form guarantees, benchmark instance generators and a
//! deterministic Monte Carlo engine.

pub mod algorithms;
pub mod bounds;
pub mod error;
pub mod generators;
pub mod model;
pub mod montecarlo;
pub mod oracle;

pub use error::{Error, Result};
pub use model::{
    best_so_far, prediction_error, true_gap, Acceptance, ArrivalDraw, GapInfo, SelectionOutcome,
    WeightProfile,
};
