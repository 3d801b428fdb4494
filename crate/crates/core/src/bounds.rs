//! Nonparametric bounds on the salience weight from revealed-preference
//! inequalities, plus the triangle geometry that quantifies how restrictive
//! the sufficient condition for a positive weight is.
//!
//! Optimality of the observed strategy against the two pure deviations
//! ("serve the first-serve way twice" and "serve the second-serve way
//! twice") gives inequalities of the form A + delta B >= 0, where A is the
//! change in the point-win probability and B the change in its multi-shot
//! component. Each inequality with B != 0 bounds delta on one side.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::estimation::ServeStats;

/// Deviation endpoint at which the A/B/C differences are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Endpoint {
    X1Star,
    X2Star,
}

/// Differences against the all-first-serve deviation, split into total (A),
/// multi-shot (B) and one-shot (C) parts; A = B + C by construction.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EndpointAbc {
    pub at: Endpoint,
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

/// What the data alone allow concluding about the sign of the weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SignConclusion {
    /// The optimality inequalities already force delta > 0.
    PositiveLowerBound,
    /// The sufficient-condition geometry leaves little room for delta <= 0.
    LikelyPositive,
    Inconclusive,
}

impl std::fmt::Display for SignConclusion {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SignConclusion::PositiveLowerBound => write!(f, "PositiveLowerBound"),
            SignConclusion::LikelyPositive => write!(f, "LikelyPositive"),
            SignConclusion::Inconclusive => write!(f, "Inconclusive"),
        }
    }
}

/// Interval for the salience weight implied by the optimality inequalities.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundsResult {
    /// Greatest lower bound; -inf when no inequality restricts from below.
    pub lower: f64,
    /// Least upper bound; +inf when unrestricted (23 of 151 players in the
    /// source sample).
    pub upper: f64,
    pub abc_x1: EndpointAbc,
    pub abc_x2: EndpointAbc,
    pub sign_conditions_ok: bool,
    pub sign_conclusion: SignConclusion,
}

impl BoundsResult {
    /// First sign condition: B(x1*) > A(x1*) > 0.
    pub fn sign_condition_b(&self) -> bool {
        self.abc_x1.b > self.abc_x1.a && self.abc_x1.a > 0.0
    }

    /// Second sign condition: B(x2*) > 0 > A(x2*).
    pub fn sign_condition_c(&self) -> bool {
        self.abc_x2.b > 0.0 && self.abc_x2.a < 0.0
    }
}

/// Feasibility triangle of the concave map x f(x) on [x1*, x2*] and the
/// sub-triangle excluded by the sufficient condition.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TriangleGeometry {
    /// Intercept of the cutting line l4.
    pub b12: f64,
    /// Apex abscissa where the two tangent chords cross.
    pub x12: f64,
    /// Where l4 meets the left chord.
    pub x14: f64,
    /// Where l4 meets the right chord.
    pub x24: f64,
    /// Area of the feasibility triangle.
    pub a1: f64,
    /// Area cut off above l4; zero when the line clears the triangle.
    pub a2: f64,
    /// a2/a1, or `None` for a degenerate (zero-area) triangle.
    pub ratio: Option<f64>,
}

#[derive(Debug, Error)]
pub enum BoundsError {
    #[error("triangle condition fails: x1* f1* does not exceed x2* f2*")]
    ConditionBFailed,
}

/// Default restrictiveness cutoff for [`classify_player`]: the largest
/// ratio observed among players whose bounds alone already force a
/// positive weight.
pub const DEFAULT_RATIO_THRESHOLD: f64 = 0.114;

/// A/B/C differences of strategy (x0, x2*) against (x1*, x1*), evaluated at
/// the two observable endpoints x0 in {x1*, x2*}.
pub fn endpoint_abc(stats: &ServeStats, at: Endpoint) -> EndpointAbc {
    let (y1, y2) = (stats.y1(), stats.y2());
    let (x1, x2) = (stats.x1, stats.x2);
    let base_total = (2.0 - x1) * x1 * y1;
    let base_multi = (2.0 - x1) * x1 * stats.k1;
    let base_one = (2.0 - x1) * x1 * stats.f1;
    let (a, b, c) = match at {
        Endpoint::X1Star => (
            x1 * y1 + (1.0 - x1) * x2 * y2 - base_total,
            x1 * stats.k1 + (1.0 - x1) * x2 * stats.k2 - base_multi,
            x1 * stats.f1 + (1.0 - x1) * x2 * stats.f2 - base_one,
        ),
        Endpoint::X2Star => (
            (2.0 - x2) * x2 * y2 - base_total,
            (2.0 - x2) * x2 * stats.k2 - base_multi,
            (2.0 - x2) * x2 * stats.f2 - base_one,
        ),
    };
    EndpointAbc { at, a, b, c }
}

/// Intersects the one-sided bounds from the two optimality inequalities.
pub fn optimality_bounds(stats: &ServeStats) -> BoundsResult {
    let e1 = endpoint_abc(stats, Endpoint::X1Star);
    let e2 = endpoint_abc(stats, Endpoint::X2Star);

    // First inequality: observed vs all-first-serve, exactly (A, B) at x1*.
    // Second inequality: observed vs all-second-serve; both strategies are
    // compared to the same all-first-serve base, so its (A, B) is the
    // difference of the endpoint values.
    let pairs = [(e1.a, e1.b), (e1.a - e2.a, e1.b - e2.b)];

    let mut lower = f64::NEG_INFINITY;
    let mut upper = f64::INFINITY;
    for (a, b) in pairs {
        if b > 0.0 {
            lower = lower.max(-a / b);
        } else if b < 0.0 {
            upper = upper.min(-a / b);
        }
    }

    let mut result = BoundsResult {
        lower,
        upper,
        abc_x1: e1,
        abc_x2: e2,
        sign_conditions_ok: false,
        sign_conclusion: SignConclusion::Inconclusive,
    };
    result.sign_conditions_ok = result.sign_condition_b() && result.sign_condition_c();
    if result.lower > 0.0 {
        result.sign_conclusion = SignConclusion::PositiveLowerBound;
    }
    result
}

/// Triangle geometry of the sufficient condition.
///
/// With m(x) = x f(x) concave, the graph of m on [x1*, x2*] lies in the
/// triangle spanned by the chord through the endpoints and the two tangent
/// lines through (0,0) and (1,0); the condition cuts this triangle with the
/// line l4(x) = m2* x + b12 and the excluded share is a2/a1.
pub fn triangle_geometry(stats: &ServeStats) -> Result<TriangleGeometry, BoundsError> {
    let (x1, x2) = (stats.x1, stats.x2);
    let m1 = x1 * stats.f1;
    let m2 = x2 * stats.f2;
    if !(m1 > m2) {
        return Err(BoundsError::ConditionBFailed);
    }

    let b12 = (2.0 - x1) * m1 - m2;
    let x12 = m2 * x1 / ((1.0 - x2) * m1 + m2 * x1);
    let x14 = b12 * x1 / (m1 - m2 * x1);
    let x24 = (m2 - (1.0 - x2) * b12) / (m2 * (2.0 - x2));
    let a1 = 0.5 * (x2 * (stats.f1 - stats.f2) * (x12 - x1)).abs();
    let a2 = if x14 < x24 {
        0.5 * ((x12 - x14) * (m2 / (1.0 - x2) * (1.0 - x24) - stats.f1 * x24)).abs()
    } else {
        0.0
    };
    let ratio = if a1 > 0.0 { Some(a2 / a1) } else { None };
    Ok(TriangleGeometry {
        b12,
        x12,
        x14,
        x24,
        a1,
        a2,
        ratio,
    })
}

/// Classification combining the hard bounds with the triangle geometry:
/// a positive lower bound wins outright; otherwise the sign conditions plus
/// a small enough excluded share make a positive weight likely.
pub fn classify_player(stats: &ServeStats, ratio_threshold: f64) -> SignConclusion {
    let bounds = optimality_bounds(stats);
    if bounds.sign_conclusion == SignConclusion::PositiveLowerBound {
        return SignConclusion::PositiveLowerBound;
    }
    if bounds.sign_conditions_ok {
        if let Ok(geom) = triangle_geometry(stats) {
            if let Some(ratio) = geom.ratio {
                if ratio <= ratio_threshold {
                    return SignConclusion::LikelyPositive;
                }
            }
        }
    }
    SignConclusion::Inconclusive
}
