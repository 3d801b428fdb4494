//! Structural recovery of curvature, skill, and preference parameters from
//! the observed serve statistics.
//!
//! Under the power-curve parametrization, f(x) = (a_f - x^lambda)/tau_f and
//! k(x) = (a_k - x^lambda)/tau_k, the two first-order optimality conditions
//! plus the four observed win probabilities exactly identify the six
//! parameters. The curvature solves the one-dimensional fixed point
//! lambda = (x2/x1)^lambda (1 + lambda (1 - x2)) - 1, which is strictly
//! increasing and convex in lambda and crosses the diagonal exactly once
//! when the data conditions hold; everything else is closed-form.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::estimation::{validate_theorem_conditions, DataConditionReport, ServeStats};

/// x^lambda as exp(lambda ln x); bases live in (0,1) so this avoids the
/// pow edge cases at the boundary.
pub(crate) fn powl(x: f64, lambda: f64) -> f64 {
    if x == 0.0 {
        return if lambda == 0.0 { 1.0 } else { 0.0 };
    }
    (lambda * x.ln()).exp()
}

/// Skill side of a fit: curvature plus the slope/intercept pairs of the
/// one-shot and multi-shot win curves and of their sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SkillParams {
    pub lambda: f64,
    pub tau_f: f64,
    pub a_f: f64,
    pub tau_k: f64,
    pub a_k: f64,
    /// Aggregate intercept: a = (a_f tau_k + a_k tau_f)/(tau_f + tau_k).
    pub a: f64,
    /// Aggregate slope: tau = tau_f tau_k/(tau_f + tau_k).
    pub tau: f64,
}

impl SkillParams {
    /// One-shot win curve f(x).
    pub fn f(&self, x: f64) -> f64 {
        (self.a_f - powl(x, self.lambda)) / self.tau_f
    }

    /// Multi-shot win curve k(x).
    pub fn k(&self, x: f64) -> f64 {
        (self.a_k - powl(x, self.lambda)) / self.tau_k
    }

    /// Conditional win curve y(x) = f(x) + k(x).
    pub fn y(&self, x: f64) -> f64 {
        (self.a - powl(x, self.lambda)) / self.tau
    }

    /// Preference-weighted curve f(x) + beta k(x).
    pub fn perceived_y(&self, x: f64, beta: f64) -> f64 {
        self.f(x) + beta * self.k(x)
    }
}

/// Preference side of a fit. `delta = beta - 1` is the salience weight on
/// winning through rallies rather than outright.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PreferenceParams {
    pub beta: f64,
    pub delta: f64,
}

impl PreferenceParams {
    pub fn from_beta(beta: f64) -> Self {
        PreferenceParams {
            beta,
            delta: beta - 1.0,
        }
    }
}

/// Per-clause report on the parametric shape restrictions:
/// (i) lambda > 1, (ii) tau_f > 0 and either tau_k > 0 or
/// -tau_k > max(tau_f, beta tau_f), (iii) 0 < a < lambda + 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Condition3Report {
    pub i: bool,
    pub ii: bool,
    pub iii: bool,
}

impl Condition3Report {
    pub fn all(&self) -> bool {
        self.i && self.ii && self.iii
    }
}

/// Complete structural fit for one player.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StructuralFit {
    pub stats: ServeStats,
    pub skills: SkillParams,
    pub prefs: PreferenceParams,
    pub soc_ok: bool,
    pub condition3: Condition3Report,
    pub iterations: u32,
    pub residual: f64,
}

/// Solution of the curvature fixed point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedPoint {
    pub lambda: f64,
    pub iterations: u32,
    /// |map(lambda) - lambda| at the returned value.
    pub residual: f64,
}

#[derive(Debug, Error)]
pub enum StructuralError {
    #[error("domain error: {0}")]
    DomainError(String),
    #[error("data conditions fail: {0}")]
    PreconditionFailed(DataConditionReport),
    #[error("no bracket: map(u) <= u for all u <= {u_max}")]
    BracketError { u_max: f64 },
    #[error("division by zero: {0} values coincide on the two serves")]
    DivisionByZero(&'static str),
    #[error("singular denominator in preference recovery")]
    SingularDenominator,
    #[error("no interior solution: optimal x^lambda = {0} leaves (0,1)")]
    NoInteriorSolution(f64),
    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<StructuralError>,
    },
}

fn stage(name: &'static str) -> impl Fn(StructuralError) -> StructuralError {
    move |e| StructuralError::Stage {
        stage: name,
        source: Box::new(e),
    }
}

/// The curvature self-map (x2/x1)^lambda (1 + lambda(1 - x2)) - 1.
///
/// Strictly positive, strictly increasing and strictly convex on lambda > 0
/// for any 0 < x1 < x2 < 1; its unique fixed point identifies the curvature.
pub fn lambda_map(lambda: f64, x1: f64, x2: f64) -> Result<f64, StructuralError> {
    if !(0.0 < x1 && x1 < x2 && x2 < 1.0) {
        return Err(StructuralError::DomainError(format!(
            "need 0 < x1 < x2 < 1, got x1 = {x1}, x2 = {x2}"
        )));
    }
    if !(lambda > 0.0) {
        return Err(StructuralError::DomainError(format!(
            "need lambda > 0, got {lambda}"
        )));
    }
    Ok((lambda * (x2 / x1).ln()).exp() * (1.0 + lambda * (1.0 - x2)) - 1.0)
}

const BRACKET_LO: f64 = 1e-6;
const BRACKET_HI_START: f64 = 4.0;
// The fixed point grows like ln(1/(1-x2))/ln(x2/x1) as the two serve rates
// approach each other, so the bracket cap must dwarf any plausible data.
const BRACKET_HI_MAX: f64 = 1e9;

/// Default bracket-width tolerance for the curvature bisection.
pub const DEFAULT_EPS: f64 = 1e-10;

/// Bisects for the unique fixed point of [`lambda_map`].
///
/// Requires all three data conditions (checked up front); the bracket grows
/// upward from 4 by doubling until the map crosses the diagonal, then
/// shrinks until its width drops below `eps`.
pub fn solve_lambda(x1: f64, x2: f64, eps: f64) -> Result<FixedPoint, StructuralError> {
    let report = validate_theorem_conditions(x1, x2);
    if !report.all_hold() {
        return Err(StructuralError::PreconditionFailed(report));
    }
    if !(eps > 0.0) {
        return Err(StructuralError::DomainError(format!(
            "need eps > 0, got {eps}"
        )));
    }

    let mut lo = BRACKET_LO;
    let mut hi = BRACKET_HI_START;
    while lambda_map(hi, x1, x2)? <= hi {
        hi *= 2.0;
        if hi > BRACKET_HI_MAX {
            return Err(StructuralError::BracketError {
                u_max: BRACKET_HI_MAX,
            });
        }
    }

    let mut iterations = 0u32;
    while hi - lo >= eps && iterations < 400 {
        let mid = 0.5 * (lo + hi);
        if lambda_map(mid, x1, x2)? < mid {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    let lambda = 0.5 * (lo + hi);
    let residual = (lambda_map(lambda, x1, x2)? - lambda).abs();
    Ok(FixedPoint {
        lambda,
        iterations,
        residual,
    })
}

/// Closed-form slopes and intercepts of f and k given the curvature: each
/// curve is pinned by its two observed points (x1^lambda, v1), (x2^lambda, v2).
pub fn recover_slopes_constants(
    lambda: f64,
    stats: &ServeStats,
) -> Result<SkillParams, StructuralError> {
    let z1 = powl(stats.x1, lambda);
    let z2 = powl(stats.x2, lambda);
    if z1 == z2 {
        return Err(StructuralError::DivisionByZero("z"));
    }
    if stats.f1 == stats.f2 {
        return Err(StructuralError::DivisionByZero("f"));
    }
    if stats.k1 == stats.k2 {
        return Err(StructuralError::DivisionByZero("k"));
    }
    let tau_f = -(z1 - z2) / (stats.f1 - stats.f2);
    let tau_k = -(z1 - z2) / (stats.k1 - stats.k2);
    let a_f = tau_f * stats.f1 + z1;
    let a_k = tau_k * stats.k1 + z1;
    let denom = tau_f + tau_k;
    if denom == 0.0 {
        return Err(StructuralError::DivisionByZero("tau_f + tau_k"));
    }
    Ok(SkillParams {
        lambda,
        tau_f,
        a_f,
        tau_k,
        a_k,
        a: (a_f * tau_k + a_k * tau_f) / denom,
        tau: tau_f * tau_k / denom,
    })
}

/// Preference weight from the second-serve optimality condition:
/// beta = -(f2/k2) (dz + lambda df)/(dz + lambda dk) with relative
/// differences dl = (l1 - l2)/l2.
pub fn recover_beta(lambda: f64, stats: &ServeStats) -> Result<PreferenceParams, StructuralError> {
    if !(stats.x2 > 0.0 && stats.f2 > 0.0 && stats.k2 > 0.0) {
        return Err(StructuralError::DomainError(format!(
            "need x2, f2, k2 > 0, got x2 = {}, f2 = {}, k2 = {}",
            stats.x2, stats.f2, stats.k2
        )));
    }
    let z1 = powl(stats.x1, lambda);
    let z2 = powl(stats.x2, lambda);
    let dz = (z1 - z2) / z2;
    let df = (stats.f1 - stats.f2) / stats.f2;
    let dk = (stats.k1 - stats.k2) / stats.k2;
    let denom = dz + lambda * dk;
    if denom == 0.0 {
        return Err(StructuralError::SingularDenominator);
    }
    let beta = -(stats.f2 / stats.k2) * (dz + lambda * df) / denom;
    Ok(PreferenceParams::from_beta(beta))
}

fn soc_holds(skills: &SkillParams, beta: f64, x1: f64, x2: f64) -> bool {
    let lam = skills.lambda;
    let curvature = 1.0 + beta * skills.tau_f / skills.tau_k;
    let h11 = -skills.tau_f * lam * (1.0 + lam) * powl(x1, lam - 1.0) * curvature;
    let h22 = -skills.tau_f * (1.0 - x1) * lam * (1.0 + lam) * powl(x2, lam - 1.0) * curvature;
    h11 <= 0.0 && h22 <= 0.0
}

/// Second-order condition at the fitted strategy: both diagonal entries of
/// the (diagonal) Hessian must be non-positive.
pub fn check_soc(fit: &StructuralFit) -> bool {
    soc_holds(&fit.skills, fit.prefs.beta, fit.stats.x1, fit.stats.x2)
}

/// Full structural fit: curvature fixed point, then closed-form skills and
/// preference, plus the shape-condition report and second-order check.
pub fn fit_player(stats: &ServeStats, eps: f64) -> Result<StructuralFit, StructuralError> {
    stats
        .validate()
        .map_err(|e| StructuralError::DomainError(e.to_string()))?;
    let fp = solve_lambda(stats.x1, stats.x2, eps).map_err(stage("solve_lambda"))?;
    let skills =
        recover_slopes_constants(fp.lambda, stats).map_err(stage("recover_slopes_constants"))?;
    let prefs = recover_beta(fp.lambda, stats).map_err(stage("recover_beta"))?;
    let condition3 = Condition3Report {
        i: skills.lambda > 1.0,
        ii: skills.tau_f > 0.0
            && (skills.tau_k > 0.0 || -skills.tau_k > skills.tau_f.max(prefs.beta * skills.tau_f)),
        iii: 0.0 < skills.a && skills.a < skills.lambda + 1.0,
    };
    let soc_ok = soc_holds(&skills, prefs.beta, stats.x1, stats.x2);
    Ok(StructuralFit {
        stats: *stats,
        skills,
        prefs,
        soc_ok,
        condition3,
        iterations: fp.iterations,
        residual: fp.residual,
    })
}

/// Optimal serve strategy under the fitted curves at an arbitrary
/// preference weight: x2*^lambda = (a_f + a_k r)/((1+lambda)(1+r)) with
/// r = beta tau_f/tau_k, and x1*^lambda = x2*^lambda (1 - lambda/(1+lambda) x2*).
pub fn optimal_strategy(skills: &SkillParams, beta: f64) -> Result<(f64, f64), StructuralError> {
    let r = beta * skills.tau_f / skills.tau_k;
    if !(1.0 + r > 0.0) {
        return Err(StructuralError::DomainError(format!(
            "need 1 + beta tau_f/tau_k > 0, got {}",
            1.0 + r
        )));
    }
    let lam = skills.lambda;
    let x2_pow = (skills.a_f + skills.a_k * r) / ((1.0 + lam) * (1.0 + r));
    if !(0.0 < x2_pow && x2_pow < 1.0) {
        return Err(StructuralError::NoInteriorSolution(x2_pow));
    }
    let x2 = (x2_pow.ln() / lam).exp();
    let x1_pow = x2_pow * (1.0 - lam / (1.0 + lam) * x2);
    if !(0.0 < x1_pow && x1_pow < 1.0) {
        return Err(StructuralError::NoInteriorSolution(x1_pow));
    }
    let x1 = (x1_pow.ln() / lam).exp();
    Ok((x1, x2))
}

/// Splits expected utility at a strategy into its outcome part (the true
/// point-win probability) and process part ((beta - 1) times the multi-shot
/// win probability).
pub fn decompose_utility(
    x1: f64,
    x2: f64,
    skills: &SkillParams,
    beta: f64,
) -> Result<(f64, f64, f64), StructuralError> {
    if !(0.0 < x1 && x1 < 1.0 && 0.0 < x2 && x2 < 1.0) {
        return Err(StructuralError::DomainError(format!(
            "strategy outside (0,1): x1 = {x1}, x2 = {x2}"
        )));
    }
    let outcome = x1 * skills.y(x1) + (1.0 - x1) * x2 * skills.y(x2);
    let process = (beta - 1.0) * (x1 * skills.k(x1) + (1.0 - x1) * x2 * skills.k(x2));
    Ok((outcome, process, outcome + process))
}

/// Direction in which the optimal serve-in rates move as the preference for
/// multi-shot wins strengthens.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StrategyResponse {
    Increasing,
    Decreasing,
    Invariant,
}

impl fmt::Display for StrategyResponse {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StrategyResponse::Increasing => write!(f, "Increasing"),
            StrategyResponse::Decreasing => write!(f, "Decreasing"),
            StrategyResponse::Invariant => write!(f, "Invariant"),
        }
    }
}

/// Sign of d x*/d beta: both serve-in rates move against the sign of
/// tau_k (a_f - a_k), and not at all when a_f = a_k.
pub fn comparative_statics_sign(skills: &SkillParams) -> StrategyResponse {
    let product = skills.tau_k * (skills.a_f - skills.a_k);
    if product < 0.0 {
        StrategyResponse::Increasing
    } else if product > 0.0 {
        StrategyResponse::Decreasing
    } else {
        StrategyResponse::Invariant
    }
}
