//! Counterfactual serve strategy with the process-utility weight switched
//! off, and its cost through the scoring chain.
//!
//! The baseline opponent mirrors the player: both win their own service
//! points with the observed probability, so the baseline set and match odds
//! are exactly one half. The counterfactual replaces only the player's own
//! service-point probability.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scoring::{expected_prize, PrizeLadder, ScoreChain, ScoringError};
use crate::structural::{StructuralError, StructuralFit};

/// Strategy and outcome changes from re-optimizing at delta = 0. Strategy
/// and chain deltas are in percentage points, the prize delta in currency.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CounterfactualReport {
    pub delta_x1: f64,
    pub delta_x2: f64,
    pub delta_point: f64,
    pub delta_game: f64,
    pub delta_set: f64,
    pub delta_match: f64,
    pub delta_prize: f64,
    pub baseline_point: f64,
}

#[derive(Debug, Error)]
pub enum CounterfactualError {
    #[error("no interior solution: a/(lambda+1) = {0} leaves (0,1)")]
    NoInteriorSolution(f64),
    #[error("invalid fit: {0}")]
    InvalidFit(String),
    #[error(transparent)]
    Structural(#[from] StructuralError),
    #[error(transparent)]
    Scoring(#[from] ScoringError),
}

/// Outcome-maximizing strategy under the fitted aggregate curve:
/// x2^lambda = a/(lambda+1), x1^lambda = x2^lambda (1 - lambda/(1+lambda) x2),
/// and the resulting point probability.
pub fn reoptimize_at_beta_one(fit: &StructuralFit) -> Result<(f64, f64, f64), CounterfactualError> {
    let s = &fit.skills;
    if !(s.tau > 0.0) {
        return Err(CounterfactualError::InvalidFit(format!(
            "aggregate slope tau = {} must be positive",
            s.tau
        )));
    }
    let x2_pow = s.a / (s.lambda + 1.0);
    if !(0.0 < x2_pow && x2_pow < 1.0) {
        return Err(CounterfactualError::NoInteriorSolution(x2_pow));
    }
    let x2 = (x2_pow.ln() / s.lambda).exp();
    let x1_pow = x2_pow * (1.0 - s.lambda / (1.0 + s.lambda) * x2);
    if !(0.0 < x1_pow && x1_pow < 1.0) {
        return Err(CounterfactualError::NoInteriorSolution(x1_pow));
    }
    let x1 = (x1_pow.ln() / s.lambda).exp();
    let p = x1 * s.y(x1) + (1.0 - x1) * x2 * s.y(x2);
    Ok((x1, x2, p))
}

/// Builds the full report: observed chain against a mirrored opponent
/// (exactly even odds), counterfactual chain with the re-optimized point
/// probability, and the prize difference at 1/2 + match-probability delta.
pub fn counterfactual_report(
    fit: &StructuralFit,
    ladder: &PrizeLadder,
    best_of: u32,
) -> Result<CounterfactualReport, CounterfactualError> {
    ladder.validate()?;
    let (x1_cf, x2_cf, p_cf) = reoptimize_at_beta_one(fit)?;
    let p_obs = fit.stats.point_prob();

    let base = ScoreChain::compute(p_obs, 1.0 - p_obs, best_of)?;
    let cf = ScoreChain::compute(p_cf, 1.0 - p_obs, best_of)?;
    debug_assert!((base.p_match - 0.5).abs() < 1e-12);

    let d_match = cf.p_match - base.p_match;
    let delta_prize = expected_prize(0.5 + d_match, ladder) - expected_prize(0.5, ladder);

    Ok(CounterfactualReport {
        delta_x1: (x1_cf - fit.stats.x1) * 100.0,
        delta_x2: (x2_cf - fit.stats.x2) * 100.0,
        delta_point: (p_cf - p_obs) * 100.0,
        delta_game: (cf.p_game_hold - base.p_game_hold) * 100.0,
        delta_set: (cf.p_set - base.p_set) * 100.0,
        delta_match: d_match * 100.0,
        delta_prize,
        baseline_point: p_obs,
    })
}
