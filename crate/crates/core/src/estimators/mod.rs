//! Monte Carlo functionals of `(X, L)` and the checkers that hold them
//! against closed-form bounds.
//!
//! Replicas run in parallel but are always reduced in replica order with a
//! fixed pairwise tree, so every estimate is independent of the thread count.

mod chain;
mod feller;
mod first_jump;
mod harnack;
mod holding;
mod lemma21;
mod mc;
mod moments;
mod report;
mod semigroup;
mod truncation;

pub use chain::{chain_marginal_check, MarginalEntry};
pub use feller::{feller_modulus, Anchor, FellerPoint, FellerProbe, DISCONTINUITY_THRESHOLD};
pub use first_jump::first_jump_estimate;
pub use harnack::{harnack_check, harnack_cost, DEFAULT_POSITIVITY_FLOOR};
pub use holding::{holding_lower_bound, holding_time_check, CONFIDENCE_Z};
pub use lemma21::{lemma21_case, lemma21_sweep, lemma21_sweep_case, random_sinusoidal_q, SinusoidalRates};
pub use mc::{partition_outcomes, replicate, McEstimate, ABORT_TOLERANCE};
pub use moments::{growth_integral, moment_bound_check, moment_bound_rhs, DEFAULT_BDG_CONSTANT};
pub use report::{report_params, BoundReport, ReportParams, ReportRecord};
pub use semigroup::{semigroup_estimate, TestFunction};
pub use truncation::{agree_until_exit, exit_probability_bound, truncation_consistency, truncation_exit_check};

use crate::error::ModelError;
use crate::models::{check_one, Assumption, CheckStatus, ModelSpec, SamplingPlan};

/// Sampled pre-condition check; the first failing assumption is returned
/// with its witness.
pub fn require(m: &ModelSpec, assumptions: &[Assumption], horizon: f64) -> Result<(), ModelError> {
    let plan = SamplingPlan { pairs: 2000, ..SamplingPlan::with_horizon(horizon) };
    for &a in assumptions {
        let c = check_one(a, m, &plan);
        if c.status != CheckStatus::Pass {
            let detail = match &c.witness {
                Some(w) => format!("{} at t={}, x={:?}, regime {:?}: {}", c.note, w.t, w.x, w.regime, w.detail),
                None => c.note.clone(),
            };
            return Err(ModelError::AssumptionFailed { assumption: a.label(), detail });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests;
