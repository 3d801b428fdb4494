//! Alternative models probing the robustness of the salience-weight
//! estimates: an exponential (softmax) parametrization of the win curves, a
//! relative-curvature grid that lets the multi-shot curve bend differently,
//! and a double-fault-aversion model with a smoothing-based orthogonality
//! diagnostic.

mod lowess;

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use lowess::lowess;
use lowess::lowess_at;

use crate::estimation::ServeStats;
use crate::structural::{powl, solve_lambda, StructuralError};

#[derive(Debug, Error)]
pub enum RobustnessError {
    #[error("domain error: {0}")]
    DomainError(String),
    #[error("no root of the fixed-point equation on (0, {lambda_max}]")]
    NoRoot { lambda_max: f64 },
    #[error("singular denominator in {0}")]
    SingularDenominator(&'static str),
    #[error("too few points: got {got}, need at least {need}")]
    TooFewPoints { got: usize, need: usize },
    #[error(transparent)]
    Structural(#[from] StructuralError),
}

/// Fit of the exponential-curve model f(x) = a_f + tau_f exp(lambda x),
/// k likewise, where the marginal win probabilities have elasticity
/// lambda x instead of the constant lambda - 1.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SoftmaxFit {
    pub lambda: f64,
    pub tau_f: f64,
    pub a_f: f64,
    pub tau_k: f64,
    pub a_k: f64,
    pub beta: f64,
    pub delta: f64,
    /// Roots the scan located; more than one flags a non-unique solution.
    pub roots_found: usize,
}

/// Fit with one-shot curvature lambda - 1 and multi-shot curvature
/// t lambda - 1; `solved = false` reproduces the grid's empty cells where
/// the fixed point has no solution.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CurvatureTFit {
    pub t: f64,
    pub lambda: f64,
    pub tau_f: f64,
    pub a_f: f64,
    pub tau_k: f64,
    pub a_k: f64,
    pub beta: f64,
    pub delta: f64,
    pub solved: bool,
    pub roots_found: usize,
}

/// Fit of the model where conservatism stems from a disutility gamma per
/// double fault instead of process utility. Shares the curvature and the
/// aggregate win curve with the main model by construction.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DoubleFaultFit {
    pub gamma: f64,
    pub lambda: f64,
    pub a: f64,
    pub tau: f64,
}

const LAMBDA_SCAN_MIN: f64 = 1e-3;
const LAMBDA_SCAN_MAX: f64 = 64.0;
const LAMBDA_SCAN_POINTS: usize = 1024;

/// Scans g on a log-spaced grid and bisects every bracketed sign change.
/// A sign change across a pole stalls with a large residual and is
/// discarded; the genuine roots come back in increasing order.
fn scan_and_bisect<G: Fn(f64) -> f64>(g: G, eps: f64) -> Vec<f64> {
    let ratio = (LAMBDA_SCAN_MAX / LAMBDA_SCAN_MIN).powf(1.0 / (LAMBDA_SCAN_POINTS - 1) as f64);
    let mut roots = Vec::new();
    let mut prev: Option<(f64, f64)> = None;
    let mut x = LAMBDA_SCAN_MIN;
    for _ in 0..LAMBDA_SCAN_POINTS {
        let gx = g(x);
        if gx.is_finite() {
            if let Some((px, pg)) = prev {
                if pg.signum() != gx.signum() && pg != 0.0 && gx != 0.0 {
                    if let Some(root) = bisect(&g, px, x, eps) {
                        roots.push(root);
                    }
                }
            }
            prev = Some((x, gx));
        }
        x *= ratio;
    }
    roots
}

fn bisect<G: Fn(f64) -> f64>(g: &G, mut lo: f64, mut hi: f64, eps: f64) -> Option<f64> {
    let mut g_lo = g(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let g_mid = g(mid);
        if !g_mid.is_finite() {
            return None;
        }
        if g_mid == 0.0 {
            return Some(mid);
        }
        if g_mid.signum() == g_lo.signum() {
            lo = mid;
            g_lo = g_mid;
        } else {
            hi = mid;
        }
        if hi - lo < eps && g_mid.abs() < 10.0 * eps.max(1e-12) {
            return Some(mid);
        }
        if hi - lo < f64::EPSILON * hi.abs() {
            break;
        }
    }
    // bracket exhausted without the residual vanishing: a pole, not a root
    let mid = 0.5 * (lo + hi);
    (g(mid).abs() < 1e-6).then_some(mid)
}

fn check_two_point_preconditions(stats: &ServeStats) -> Result<(), RobustnessError> {
    if !(0.0 < stats.x1 && stats.x1 < stats.x2 && stats.x2 < 1.0) {
        return Err(RobustnessError::DomainError(format!(
            "need 0 < x1 < x2 < 1, got x1 = {}, x2 = {}",
            stats.x1, stats.x2
        )));
    }
    if stats.f1 == stats.f2 {
        return Err(RobustnessError::SingularDenominator("f difference"));
    }
    if stats.k1 == stats.k2 {
        return Err(RobustnessError::SingularDenominator("k difference"));
    }
    Ok(())
}

/// Fits the softmax model. The curvature solves
/// lambda = (e2 - e1)/(x1 e1 - x2 (1 - x2) e2) with e_j = exp(lambda x_j);
/// slopes and intercepts then interpolate the two observed points of each
/// curve, and the preference weight comes from the second-serve optimality
/// condition.
pub fn softmax_fit(stats: &ServeStats, eps: f64) -> Result<SoftmaxFit, RobustnessError> {
    check_two_point_preconditions(stats)?;
    let (x1, x2) = (stats.x1, stats.x2);
    let g = |lam: f64| {
        let e1 = (lam * x1).exp();
        let e2 = (lam * x2).exp();
        (e2 - e1) / (x1 * e1 - x2 * (1.0 - x2) * e2) - lam
    };
    let roots = scan_and_bisect(g, eps);
    let lambda = *roots.first().ok_or(RobustnessError::NoRoot {
        lambda_max: LAMBDA_SCAN_MAX,
    })?;
    let roots_found = roots.len();

    let z1 = (lambda * x1).exp();
    let z2 = (lambda * x2).exp();
    let tau_f = (stats.f2 - stats.f1) / (z2 - z1);
    let a_f = stats.f1 - tau_f * z1;
    let tau_k = (stats.k2 - stats.k1) / (z2 - z1);
    let a_k = stats.k1 - tau_k * z1;

    let denom = stats.k2 * (z2 - z1) + lambda * x2 * z2 * (stats.k2 - stats.k1);
    if denom == 0.0 {
        return Err(RobustnessError::SingularDenominator("preference recovery"));
    }
    let beta = -(stats.f2 * (z2 - z1) + lambda * x2 * z2 * (stats.f2 - stats.f1)) / denom;

    Ok(SoftmaxFit {
        lambda,
        tau_f,
        a_f,
        tau_k,
        a_k,
        beta,
        delta: beta - 1.0,
        roots_found,
    })
}

struct TEval {
    lambda_next: f64,
    tau_f: f64,
    a_f: f64,
    tau_k: f64,
    a_k: f64,
    beta: f64,
}

/// One evaluation of the t-model updating map at a trial curvature.
fn t_model_step(stats: &ServeStats, t: f64, lam: f64) -> TEval {
    let z1 = powl(stats.x1, lam);
    let z2 = powl(stats.x2, lam);
    let w1 = powl(stats.x1, t * lam);
    let w2 = powl(stats.x2, t * lam);
    let tau_f = -(z1 - z2) / (stats.f1 - stats.f2);
    let a_f = tau_f * stats.f1 + z1;
    let tau_k = -(w1 - w2) / (stats.k1 - stats.k2);
    let a_k = tau_k * stats.k1 + w1;
    let beta =
        -(a_f * tau_k - tau_k * (1.0 + lam) * z2) / (a_k * tau_f - tau_f * (1.0 + t * lam) * w2);
    let r = beta * tau_f / tau_k;
    let lambda_next =
        (a_f - z1 + r * (a_k - w1) - stats.x2 * (a_f - z2 + r * (a_k - w2))) / (z1 + t * w1 * r);
    TEval {
        lambda_next,
        tau_f,
        a_f,
        tau_k,
        a_k,
        beta,
    }
}

/// Fits the relative-curvature model for a given t by solving its
/// one-dimensional fixed point.
///
/// A root only counts as a solution when the implied curves respect the
/// maintained shape conditions: the one-shot curve needs lambda > 1 and the
/// multi-shot curve needs t lambda >= 1 (an increasing k must be convex, a
/// decreasing one concave; between those, the elasticity t lambda - 1 may
/// not be negative). With no uniqueness theorem away from t = 1, a cell
/// with several shape-valid roots is ambiguous. Either way the fit comes
/// back with `solved = false` and NaN parameters, mirroring the empty grid
/// cells.
pub fn curvature_t_fit(
    stats: &ServeStats,
    t: f64,
    eps: f64,
) -> Result<CurvatureTFit, RobustnessError> {
    if !(t > 0.0) {
        return Err(RobustnessError::DomainError(format!("need t > 0, got {t}")));
    }
    check_two_point_preconditions(stats)?;

    let g = |lam: f64| t_model_step(stats, t, lam).lambda_next - lam;
    let roots = scan_and_bisect(g, eps);
    let roots_found = roots.len();
    let valid: Vec<f64> = roots
        .into_iter()
        .filter(|&lam| lam > 1.0 && t * lam >= 1.0)
        .collect();
    let root = (valid.len() == 1).then(|| valid[0]);
    match root {
        Some(lambda) => {
            let e = t_model_step(stats, t, lambda);
            Ok(CurvatureTFit {
                t,
                lambda,
                tau_f: e.tau_f,
                a_f: e.a_f,
                tau_k: e.tau_k,
                a_k: e.a_k,
                beta: e.beta,
                delta: e.beta - 1.0,
                solved: true,
                roots_found,
            })
        }
        None => Ok(CurvatureTFit {
            t,
            lambda: f64::NAN,
            tau_f: f64::NAN,
            a_f: f64::NAN,
            tau_k: f64::NAN,
            a_k: f64::NAN,
            beta: f64::NAN,
            delta: f64::NAN,
            solved: false,
            roots_found,
        }),
    }
}

/// Fits the double-fault-aversion model. The first-serve condition is the
/// same as in the main model, so the curvature comes from the same fixed
/// point; tau and a interpolate the aggregate curve through the two
/// observed points, and gamma closes the second-serve condition:
/// x2^lambda (lambda + 1) = a + tau gamma.
pub fn double_fault_fit(stats: &ServeStats, eps: f64) -> Result<DoubleFaultFit, RobustnessError> {
    let fp = solve_lambda(stats.x1, stats.x2, eps)?;
    let z1 = powl(stats.x1, fp.lambda);
    let z2 = powl(stats.x2, fp.lambda);
    let y1 = stats.y1();
    let y2 = stats.y2();
    if y1 == y2 {
        return Err(RobustnessError::SingularDenominator("y difference"));
    }
    let tau = (z2 - z1) / (y1 - y2);
    let a = tau * y2 + z2;
    let gamma = (z2 * (fp.lambda + 1.0) - a) / tau;
    Ok(DoubleFaultFit {
        gamma,
        lambda: fp.lambda,
        a,
        tau,
    })
}

/// Smoothed orthogonality diagnostic for one player and one serve.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiagnosticEntry {
    pub player_id: String,
    /// Which one-shot probability was multiplied in: 1 or 2.
    pub j: u8,
    /// In-sample smoothed value of gamma * f_j at this player's covariates.
    pub fitted: f64,
    pub lo: f64,
    pub hi: f64,
    /// Confidence interval excludes zero from below.
    pub significant: bool,
}

/// Minimum players for the cross-sectional diagnostic.
pub const MIN_DIAGNOSTIC_PLAYERS: usize = 10;

/// Tests whether the double-fault parameter is orthogonal to how rallies
/// are won: smooths gamma_i f_j(i) against (x1, x2, y1, y2) across players
/// and bootstraps the players (B resamples, percentile intervals at 95%).
/// If double-fault aversion were the data-generating mechanism these
/// conditional moments would be centered at zero.
pub fn gamma_diagnostic(
    fits: &BTreeMap<String, (DoubleFaultFit, ServeStats)>,
    span: f64,
    replications: usize,
    seed: u64,
) -> Result<Vec<DiagnosticEntry>, RobustnessError> {
    let n = fits.len();
    if n < MIN_DIAGNOSTIC_PLAYERS {
        return Err(RobustnessError::TooFewPoints {
            got: n,
            need: MIN_DIAGNOSTIC_PLAYERS,
        });
    }
    if replications < 100 {
        return Err(RobustnessError::DomainError(format!(
            "need at least 100 bootstrap replications, got {replications}"
        )));
    }

    let players: Vec<&String> = fits.keys().collect();
    let raw: Vec<[f64; 4]> = fits
        .values()
        .map(|(_, s)| [s.x1, s.x2, s.y1(), s.y2()])
        .collect();

    // standardize each covariate to unit variance across players
    let mut covs: Vec<Vec<f64>> = vec![vec![0.0; 4]; n];
    for dim in 0..4 {
        let mean = raw.iter().map(|r| r[dim]).sum::<f64>() / n as f64;
        let var = raw
            .iter()
            .map(|r| (r[dim] - mean) * (r[dim] - mean))
            .sum::<f64>()
            / n as f64;
        let sd = var.sqrt();
        for (row, r) in covs.iter_mut().zip(&raw) {
            row[dim] = if sd > 0.0 { (r[dim] - mean) / sd } else { 0.0 };
        }
    }

    let responses: [Vec<f64>; 2] = [
        fits.values().map(|(df, s)| df.gamma * s.f1).collect(),
        fits.values().map(|(df, s)| df.gamma * s.f2).collect(),
    ];

    let mut out = Vec::with_capacity(2 * n);
    for (j_idx, ys) in responses.iter().enumerate() {
        let fitted = lowess(&covs, ys, span)?;

        // resample players, re-smooth, predict at the original covariates
        let predictions: Vec<Vec<f64>> = (0..replications)
            .into_par_iter()
            .map(|rep| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(1 + j_idx as u64 * replications as u64 + rep as u64);
                let mut bx = Vec::with_capacity(n);
                let mut by = Vec::with_capacity(n);
                for _ in 0..n {
                    let pick = rng.gen_range(0..n);
                    bx.push(covs[pick].clone());
                    by.push(ys[pick]);
                }
                lowess_at(&bx, &by, &covs, span)
            })
            .collect();

        for (i, player) in players.iter().enumerate() {
            let mut draws: Vec<f64> = predictions.iter().map(|p| p[i]).collect();
            draws.sort_by(f64::total_cmp);
            let lo = percentile(&draws, 0.025);
            let hi = percentile(&draws, 0.975);
            out.push(DiagnosticEntry {
                player_id: (*player).clone(),
                j: j_idx as u8 + 1,
                fitted: fitted[i],
                lo,
                hi,
                significant: lo > 0.0,
            });
        }
    }
    Ok(out)
}

pub(crate) fn percentile(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = q * (n - 1) as f64;
    let i = pos.floor() as usize;
    let frac = pos - i as f64;
    if i + 1 < n {
        sorted[i] * (1.0 - frac) + sorted[i + 1] * frac
    } else {
        sorted[n - 1]
    }
}
