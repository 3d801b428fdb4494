//! Parametric bootstrap over the binomial counting tree.
//!
//! Each replicate redraws the counts edge by edge from the fitted
//! probabilities, re-runs an arbitrary estimator, and percentile intervals
//! are read off the replicate distribution. Replicates get independent
//! deterministic generators derived from (seed, replicate index), so
//! results do not depend on scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::estimation::ServeStats;
use crate::ingest::ServeCounts;
use crate::robustness::percentile;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BootstrapConfig {
    pub replications: usize,
    /// Confidence level in (0,1).
    pub level: f64,
    pub seed: u64,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        BootstrapConfig {
            replications: 300,
            level: 0.95,
            seed: 0,
        }
    }
}

/// Percentile interval for one estimand.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct IntervalEstimate {
    pub point: f64,
    pub lo: f64,
    pub hi: f64,
    /// Interval excludes the estimand's reference value (1 for the
    /// curvature, 0 for everything else).
    pub significant: bool,
}

/// All intervals for one player plus the number of dropped replicates.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BootstrapCis {
    pub intervals: Vec<IntervalEstimate>,
    pub failed_replicates: usize,
}

#[derive(Debug, Error)]
pub enum BootstrapError {
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("degenerate probability: {0}")]
    DegenerateProbability(String),
    #[error("estimator failed on the original counts")]
    PointEstimateFailed,
    #[error("{failed} of {total} replicates failed (more than 20%)")]
    TooManyFailures { failed: usize, total: usize },
}

fn draw_binomial<R: Rng>(n: u64, p: f64, what: &str, rng: &mut R) -> Result<u64, BootstrapError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(BootstrapError::DegenerateProbability(format!(
            "{what}: probability {p} outside [0,1]"
        )));
    }
    if n == 0 || p == 0.0 {
        return Ok(0);
    }
    if p == 1.0 {
        return Ok(n);
    }
    let dist = Binomial::new(n, p)
        .map_err(|e| BootstrapError::DegenerateProbability(format!("{what}: {e}")))?;
    Ok(dist.sample(rng))
}

/// One parametric redraw of the counting tree: serve-in counts first, then
/// the one-shot splits, then the multi-shot splits with edge probability
/// k/(1-f). When f = 1 the one-shot edge absorbs all serve-in points and
/// the multi-shot branch is empty.
pub fn resample_counts<R: Rng>(
    counts: &ServeCounts,
    stats: &ServeStats,
    rng: &mut R,
) -> Result<ServeCounts, BootstrapError> {
    let multi_edge = |f: f64, k: f64, what: &str| -> Result<f64, BootstrapError> {
        if f >= 1.0 {
            return Ok(0.0); // no trials remain; probability unused
        }
        let edge = k / (1.0 - f);
        if !(0.0..=1.0).contains(&edge) {
            return Err(BootstrapError::DegenerateProbability(format!(
                "{what}: k/(1-f) = {edge} outside [0,1]"
            )));
        }
        Ok(edge)
    };
    let edge1 = multi_edge(stats.f1, stats.k1, "k1")?;
    let edge2 = multi_edge(stats.f2, stats.k2, "k2")?;

    let n_x1 = draw_binomial(counts.n, stats.x1, "x1", rng)?;
    let n_x2 = draw_binomial(counts.n - n_x1, stats.x2, "x2", rng)?;
    let n_f1 = draw_binomial(n_x1, stats.f1, "f1", rng)?;
    let n_k1 = draw_binomial(n_x1 - n_f1, edge1, "k1", rng)?;
    let n_f2 = draw_binomial(n_x2, stats.f2, "f2", rng)?;
    let n_k2 = draw_binomial(n_x2 - n_f2, edge2, "k2", rng)?;

    Ok(ServeCounts {
        player_id: counts.player_id.clone(),
        n_matches: counts.n_matches,
        n: counts.n,
        n_x1,
        n_x2,
        n_f1,
        n_f2,
        n_k1,
        n_k2,
    })
}

fn replicate_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64 + 1);
    rng
}

/// Percentile confidence intervals for a vector-valued estimator.
///
/// Resamples are drawn from the tree at the maximum-likelihood
/// probabilities of the original counts. The estimator maps counts to
/// estimands and may return `None` on degenerate resamples; such replicates
/// are dropped and counted, and more than 20% of them is an error.
/// `reference` supplies the per-estimand null value for the significance
/// flag.
pub fn bootstrap_ci<F>(
    counts: &ServeCounts,
    estimator: F,
    reference: &[f64],
    cfg: &BootstrapConfig,
) -> Result<BootstrapCis, BootstrapError>
where
    F: Fn(&ServeCounts) -> Option<Vec<f64>> + Sync,
{
    if cfg.replications < 2 {
        return Err(BootstrapError::InvalidConfig(format!(
            "need at least 2 replications, got {}",
            cfg.replications
        )));
    }
    if !(cfg.level > 0.0 && cfg.level < 1.0) {
        return Err(BootstrapError::InvalidConfig(format!(
            "level must lie in (0,1), got {}",
            cfg.level
        )));
    }
    let stats = crate::estimation::mle_stats(counts)
        .map_err(|e| BootstrapError::DegenerateProbability(e.to_string()))?;
    let stats = &stats;

    let point = estimator(counts).ok_or(BootstrapError::PointEstimateFailed)?;
    if point.len() != reference.len() {
        return Err(BootstrapError::InvalidConfig(format!(
            "estimator returned {} values but {} reference values were given",
            point.len(),
            reference.len()
        )));
    }

    let draws: Vec<Option<Vec<f64>>> = (0..cfg.replications)
        .into_par_iter()
        .map(|rep| {
            let mut rng = replicate_rng(cfg.seed, rep);
            resample_counts(counts, stats, &mut rng)
                .ok()
                .and_then(|c| estimator(&c))
                .filter(|v| v.len() == point.len() && v.iter().all(|x| x.is_finite()))
        })
        .collect();

    let kept: Vec<&Vec<f64>> = draws.iter().flatten().collect();
    let failed = cfg.replications - kept.len();
    if failed * 5 > cfg.replications {
        return Err(BootstrapError::TooManyFailures {
            failed,
            total: cfg.replications,
        });
    }

    let alpha = 1.0 - cfg.level;
    let intervals = point
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            let mut values: Vec<f64> = kept.iter().map(|v| v[i]).collect();
            values.sort_by(f64::total_cmp);
            let lo = percentile(&values, alpha / 2.0);
            let hi = percentile(&values, 1.0 - alpha / 2.0);
            IntervalEstimate {
                point: p,
                lo,
                hi,
                significant: reference[i] < lo || reference[i] > hi,
            }
        })
        .collect();

    Ok(BootstrapCis {
        intervals,
        failed_replicates: failed,
    })
}
