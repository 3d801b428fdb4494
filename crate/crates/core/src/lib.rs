//! Structural estimation of tennis serve strategies.
//!
//! The pipeline runs from raw point-by-point data to counterfactual prize
//! money in five stages:
//!
//! 1. [`ingest`] parses normalized point CSVs and aggregates them into
//!    per-player binomial counts.
//! 2. [`estimation`] turns counts into maximum-likelihood serve
//!    probabilities and checks the data conditions required by the
//!    fixed-point solver.
//! 3. [`structural`] recovers each player's curvature, skill and preference
//!    parameters from the optimality conditions; [`bounds`] derives
//!    nonparametric bounds on the preference weight that need no
//!    functional-form assumption.
//! 4. [`scoring`] chains point probabilities through games, sets, matches
//!    and tournament prize ladders; [`counterfactual`] re-optimizes each
//!    player's strategy with the process-utility weight switched off and
//!    reports the outcome cost.
//! 5. [`robustness`] refits under alternative parametrizations (softmax
//!    curves, unequal curvature, double-fault aversion) and [`bootstrap`]
//!    attaches parametric-bootstrap confidence intervals to everything.

pub mod bootstrap;
pub mod bounds;
pub mod counterfactual;
pub mod estimation;
pub mod ingest;
pub mod robustness;
pub mod scoring;
pub mod structural;

pub use bootstrap::{
    bootstrap_ci, resample_counts, BootstrapCis, BootstrapConfig, IntervalEstimate,
};
pub use bounds::{
    classify_player, endpoint_abc, optimality_bounds, triangle_geometry, BoundsResult, Endpoint,
    EndpointAbc, SignConclusion, TriangleGeometry, DEFAULT_RATIO_THRESHOLD,
};
pub use counterfactual::{counterfactual_report, reoptimize_at_beta_one, CounterfactualReport};
pub use estimation::{
    log_likelihood, mle_stats, validate_theorem_conditions, DataConditionReport, ServeStats,
};
pub use ingest::{aggregate_counts, parse_points_csv, PointRecord, ServeCounts, ServeNumber};
pub use robustness::{
    curvature_t_fit, double_fault_fit, gamma_diagnostic, lowess, softmax_fit, CurvatureTFit,
    DiagnosticEntry, DoubleFaultFit, SoftmaxFit,
};
pub use scoring::{
    expected_prize, game_prob, match_prob, set_prob, tiebreak_prob, PrizeLadder, ScoreChain,
};
pub use structural::{
    check_soc, comparative_statics_sign, decompose_utility, fit_player, lambda_map,
    optimal_strategy, recover_beta, recover_slopes_constants, solve_lambda, FixedPoint,
    PreferenceParams, SkillParams, StrategyResponse, StructuralFit,
};
