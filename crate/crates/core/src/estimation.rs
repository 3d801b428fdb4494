//! Maximum-likelihood estimation of the six serve probabilities and the
//! data conditions required by the fixed-point solver.

use std::fmt;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;
use thiserror::Error;

use crate::ingest::ServeCounts;

/// The six estimated probabilities: serve-in rates and the one-shot /
/// multi-shot win splits conditional on the serve landing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ServeStats {
    /// First serve in.
    pub x1: f64,
    /// Second serve in.
    pub x2: f64,
    /// Win in one shot given first serve in.
    pub f1: f64,
    /// Win in one shot given second serve in.
    pub f2: f64,
    /// Win in an odd rally of length >= 3 given first serve in.
    pub k1: f64,
    /// Same on second serve.
    pub k2: f64,
}

impl ServeStats {
    pub fn new(x1: f64, x2: f64, f1: f64, f2: f64, k1: f64, k2: f64) -> Self {
        ServeStats {
            x1,
            x2,
            f1,
            f2,
            k1,
            k2,
        }
    }

    /// Win probability given first serve in.
    pub fn y1(&self) -> f64 {
        self.f1 + self.k1
    }

    /// Win probability given second serve in.
    pub fn y2(&self) -> f64 {
        self.f2 + self.k2
    }

    /// All six probabilities in \[0,1\] with f + k <= 1 on both serves.
    pub fn validate(&self) -> Result<(), EstimationError> {
        let in_unit = |v: f64| (0.0..=1.0).contains(&v);
        let all = [self.x1, self.x2, self.f1, self.f2, self.k1, self.k2];
        if !all.iter().copied().all(in_unit) {
            return Err(EstimationError::DomainError(format!(
                "probabilities outside [0,1]: {self:?}"
            )));
        }
        if self.y1() > 1.0 + 1e-12 || self.y2() > 1.0 + 1e-12 {
            return Err(EstimationError::DomainError(format!(
                "f + k exceeds 1: y1 = {}, y2 = {}",
                self.y1(),
                self.y2()
            )));
        }
        Ok(())
    }

    /// Point-win probability on own serve for the observed strategy.
    pub fn point_prob(&self) -> f64 {
        self.x1 * self.y1() + (1.0 - self.x1) * self.x2 * self.y2()
    }
}

/// Outcome of checking the solver's data conditions on (x1, x2).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DataConditionReport {
    /// 0 < x1 < x2 < 1.
    pub a1_holds: bool,
    /// ln(x2/x1) < x2.
    pub a2_holds: bool,
    /// 2(x2 - x1) < x2^2.
    pub a3_holds: bool,
    pub details: String,
}

impl DataConditionReport {
    pub fn all_hold(&self) -> bool {
        self.a1_holds && self.a2_holds && self.a3_holds
    }
}

impl fmt::Display for DataConditionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "A1: {}, A2: {}, A3: {} ({})",
            self.a1_holds, self.a2_holds, self.a3_holds, self.details
        )
    }
}

#[derive(Debug, Error)]
pub enum EstimationError {
    #[error("degenerate counts: {0}")]
    DegenerateCounts(String),
    #[error("domain error: {0}")]
    DomainError(String),
}

fn ratio(num: u64, den: u64, what: &str) -> Result<f64, EstimationError> {
    if den == 0 {
        if num == 0 {
            // No trials on this branch; the estimate carries no information
            // and is pinned at zero.
            Ok(0.0)
        } else {
            Err(EstimationError::DegenerateCounts(format!(
                "{what}: {num} successes out of 0 trials"
            )))
        }
    } else {
        Ok(num as f64 / den as f64)
    }
}

/// Frequency estimates of the six probabilities; each branch of the counting
/// tree is an independent binomial, so the frequency is the MLE.
pub fn mle_stats(counts: &ServeCounts) -> Result<ServeStats, EstimationError> {
    counts
        .validate()
        .map_err(EstimationError::DegenerateCounts)?;
    if counts.n == 0 {
        return Err(EstimationError::DegenerateCounts(
            "no service points".to_string(),
        ));
    }
    Ok(ServeStats {
        x1: ratio(counts.n_x1, counts.n, "x1")?,
        x2: ratio(counts.n_x2, counts.n - counts.n_x1, "x2")?,
        f1: ratio(counts.n_f1, counts.n_x1, "f1")?,
        k1: ratio(counts.n_k1, counts.n_x1, "k1")?,
        f2: ratio(counts.n_f2, counts.n_x2, "f2")?,
        k2: ratio(counts.n_k2, counts.n_x2, "k2")?,
    })
}

fn ln_choose(n: u64, k: u64) -> f64 {
    ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
}

/// One binomial log-likelihood term, log C(n,k) + k log p + (n-k) log(1-p),
/// with the convention 0 * log 0 = 0.
fn binom_term(n: u64, k: u64, p: f64, what: &str) -> Result<f64, EstimationError> {
    if k > n {
        return Err(EstimationError::DomainError(format!(
            "{what}: {k} successes out of {n} trials"
        )));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(EstimationError::DomainError(format!(
            "{what}: probability {p} outside [0,1]"
        )));
    }
    let mut ll = ln_choose(n, k);
    if k > 0 {
        if p == 0.0 {
            return Err(EstimationError::DomainError(format!(
                "{what}: {k} successes with probability 0"
            )));
        }
        ll += k as f64 * p.ln();
    }
    if n - k > 0 {
        if p == 1.0 {
            return Err(EstimationError::DomainError(format!(
                "{what}: {} failures with probability 1",
                n - k
            )));
        }
        ll += (n - k) as f64 * (1.0 - p).ln();
    }
    Ok(ll)
}

/// Log-likelihood of the counts under the given probabilities.
///
/// The six terms follow the counting tree: serve-in splits at the root, the
/// one-shot split on serve-in points, and the multi-shot split on the
/// remaining points with edge probability k/(1-f). Maximized exactly at
/// [`mle_stats`].
pub fn log_likelihood(counts: &ServeCounts, stats: &ServeStats) -> Result<f64, EstimationError> {
    counts
        .validate()
        .map_err(EstimationError::DegenerateCounts)?;
    stats.validate()?;

    let mut ll = binom_term(counts.n, counts.n_x1, stats.x1, "x1")?;
    ll += binom_term(counts.n - counts.n_x1, counts.n_x2, stats.x2, "x2")?;
    ll += binom_term(counts.n_x1, counts.n_f1, stats.f1, "f1")?;
    ll += binom_term(counts.n_x2, counts.n_f2, stats.f2, "f2")?;
    ll += multi_shot_term(
        counts.n_x1,
        counts.n_f1,
        counts.n_k1,
        stats.f1,
        stats.k1,
        "k1",
    )?;
    ll += multi_shot_term(
        counts.n_x2,
        counts.n_f2,
        counts.n_k2,
        stats.f2,
        stats.k2,
        "k2",
    )?;
    Ok(ll)
}

fn multi_shot_term(
    n_x: u64,
    n_f: u64,
    n_k: u64,
    f: f64,
    k: f64,
    what: &str,
) -> Result<f64, EstimationError> {
    let trials = n_x - n_f;
    if trials == 0 && n_k == 0 {
        return Ok(0.0);
    }
    if f >= 1.0 {
        return Err(EstimationError::DomainError(format!(
            "{what}: multi-shot trials remain but f = 1"
        )));
    }
    let edge = k / (1.0 - f);
    if edge > 1.0 + 1e-12 {
        return Err(EstimationError::DomainError(format!(
            "{what}: edge probability k/(1-f) = {edge} exceeds 1"
        )));
    }
    binom_term(trials, n_k, edge.min(1.0), what)
}

/// Evaluates the three data conditions under which the fixed-point map has a
/// unique solution above 1: (A1) 0 < x1 < x2 < 1, (A2) ln(x2/x1) < x2,
/// (A3) 2(x2 - x1) < x2^2.
pub fn validate_theorem_conditions(x1: f64, x2: f64) -> DataConditionReport {
    let a1 = 0.0 < x1 && x1 < x2 && x2 < 1.0;
    let a2 = x1 > 0.0 && x2 > 0.0 && (x2 / x1).ln() < x2;
    let a3 = 2.0 * (x2 - x1) < x2 * x2;
    let mut failing = Vec::new();
    if !a1 {
        failing.push(format!(
            "A1: need 0 < x1 < x2 < 1, got x1 = {x1}, x2 = {x2}"
        ));
    }
    if !a2 {
        failing.push(format!(
            "A2: need ln(x2/x1) < x2, got {} vs {x2}",
            if x1 > 0.0 && x2 > 0.0 {
                (x2 / x1).ln()
            } else {
                f64::NAN
            }
        ));
    }
    if !a3 {
        failing.push(format!(
            "A3: need 2(x2 - x1) < x2^2, got {} vs {}",
            2.0 * (x2 - x1),
            x2 * x2
        ));
    }
    let details = if failing.is_empty() {
        "all conditions hold".to_string()
    } else {
        failing.join("; ")
    };
    DataConditionReport {
        a1_holds: a1,
        a2_holds: a2,
        a3_holds: a3,
        details,
    }
}
