//! Shared fixtures: the twelve reference players with their published
//! estimates, and a generator of random valid model configurations.

#![allow(dead_code)]

use rand::Rng;
use servelab_core::estimation::{validate_theorem_conditions, ServeStats};
use servelab_core::structural::{optimal_strategy, SkillParams};

pub struct PlayerFixture {
    pub id: &'static str,
    pub stats: ServeStats,
    pub delta: f64,
    pub lambda: f64,
    pub tau_f: f64,
    pub a_f: f64,
    pub tau_k: f64,
    pub a_k: f64,
    /// Slope/intercept of the multi-shot curve checked only where its
    /// magnitude is moderate; the huge-slope players have interval
    /// estimates spanning hundreds.
    pub tau_k_checked: bool,
}

const fn stats(x1: f64, x2: f64, f1: f64, f2: f64, k1: f64, k2: f64) -> ServeStats {
    ServeStats {
        x1,
        x2,
        f1,
        f2,
        k1,
        k2,
    }
}

pub const PLAYERS: [PlayerFixture; 12] = [
    PlayerFixture {
        id: "novak_djokovic",
        stats: stats(0.649, 0.920, 0.341, 0.168, 0.392, 0.420),
        delta: 0.27,
        lambda: 3.67,
        tau_f: 3.09,
        a_f: 1.26,
        tau_k: -19.58,
        a_k: -7.48,
        tau_k_checked: true,
    },
    PlayerFixture {
        id: "rafael_nadal",
        stats: stats(0.686, 0.926, 0.276, 0.161, 0.429, 0.434),
        delta: 0.21,
        lambda: 4.89,
        tau_f: 4.62,
        a_f: 1.43,
        tau_k: -105.09,
        a_k: -44.96,
        tau_k_checked: false,
    },
    PlayerFixture {
        id: "roger_federer",
        stats: stats(0.618, 0.943, 0.415, 0.192, 0.354, 0.390),
        delta: 0.32,
        lambda: 2.81,
        tau_f: 2.64,
        a_f: 1.35,
        tau_k: -16.27,
        a_k: -5.50,
        tau_k_checked: true,
    },
    PlayerFixture {
        id: "pete_sampras",
        stats: stats(0.565, 0.897, 0.536, 0.215, 0.267, 0.342),
        delta: 0.42,
        lambda: 1.93,
        tau_f: 1.49,
        a_f: 1.13,
        tau_k: -6.41,
        a_k: -1.38,
        tau_k_checked: true,
    },
    PlayerFixture {
        id: "boris_becker",
        stats: stats(0.550, 0.882, 0.477, 0.195, 0.295, 0.329),
        delta: 0.56,
        lambda: 1.73,
        tau_f: 1.59,
        a_f: 1.12,
        tau_k: -13.23,
        a_k: -3.55,
        tau_k_checked: true,
    },
    PlayerFixture {
        id: "carlos_alcaraz",
        stats: stats(0.646, 0.909, 0.320, 0.178, 0.400, 0.420),
        delta: 0.05,
        lambda: 3.66,
        tau_f: 3.56,
        a_f: 1.34,
        tau_k: -25.78,
        a_k: -10.11,
        tau_k_checked: true,
    },
    PlayerFixture {
        id: "jannik_sinner",
        stats: stats(0.603, 0.933, 0.384, 0.170, 0.374, 0.422),
        delta: 0.06,
        lambda: 2.52,
        tau_f: 2.61,
        a_f: 1.28,
        tau_k: -11.65,
        a_k: -4.08,
        tau_k_checked: true,
    },
    PlayerFixture {
        id: "ivo_karlovic",
        stats: stats(0.654, 0.863, 0.570, 0.310, 0.238, 0.288),
        delta: 1.19,
        lambda: 4.37,
        tau_f: 1.42,
        a_f: 0.96,
        tau_k: -7.41,
        a_k: -1.61,
        tau_k_checked: true,
    },
    PlayerFixture {
        id: "john_isner",
        stats: stats(0.695, 0.919, 0.541, 0.264, 0.235, 0.321),
        delta: 0.79,
        lambda: 5.33,
        tau_f: 1.78,
        a_f: 1.11,
        tau_k: -5.68,
        a_k: -1.19,
        tau_k_checked: true,
    },
    PlayerFixture {
        id: "reilly_opelka",
        stats: stats(0.656, 0.919, 0.550, 0.260, 0.224, 0.338),
        delta: 0.36,
        lambda: 3.89,
        tau_f: 1.81,
        a_f: 1.19,
        tau_k: -4.63,
        a_k: -0.84,
        tau_k_checked: true,
    },
    PlayerFixture {
        id: "david_ferrer",
        stats: stats(0.617, 0.913, 0.240, 0.132, 0.402, 0.389),
        delta: -0.01,
        lambda: 2.90,
        tau_f: 4.82,
        a_f: 1.41,
        tau_k: 40.72,
        a_k: 16.62,
        tau_k_checked: false,
    },
    PlayerFixture {
        id: "diego_schwartzman",
        stats: stats(0.639, 0.896, 0.216, 0.143, 0.420, 0.412),
        delta: -0.38,
        lambda: 3.57,
        tau_f: 6.45,
        a_f: 1.60,
        tau_k: 62.62,
        a_k: 26.49,
        tau_k_checked: false,
    },
];

pub fn federer() -> &'static PlayerFixture {
    &PLAYERS[2]
}

/// Counterfactual reference rows: strategy and chain deltas in percentage
/// points, prize delta in thousands.
pub struct CounterfactualFixture {
    pub id: &'static str,
    pub dx1: f64,
    pub dx2: f64,
    pub dpt: f64,
    pub dgm: f64,
    pub dset: f64,
    pub dmat: f64,
    pub dprize_k: f64,
}

pub const COUNTERFACTUALS: [CounterfactualFixture; 12] = [
    CounterfactualFixture {
        id: "novak_djokovic",
        dx1: -1.06,
        dx2: -4.31,
        dpt: 0.12,
        dgm: 0.18,
        dset: 0.39,
        dmat: 0.73,
        dprize_k: 8.07,
    },
    CounterfactualFixture {
        id: "rafael_nadal",
        dx1: -0.63,
        dx2: -2.36,
        dpt: 0.04,
        dgm: 0.06,
        dset: 0.13,
        dmat: 0.24,
        dprize_k: 2.56,
    },
    CounterfactualFixture {
        id: "roger_federer",
        dx1: -1.07,
        dx2: -6.01,
        dpt: 0.20,
        dgm: 0.27,
        dset: 0.64,
        dmat: 1.20,
        dprize_k: 13.51,
    },
    CounterfactualFixture {
        id: "pete_sampras",
        dx1: -2.25,
        dx2: -9.94,
        dpt: 0.57,
        dgm: 0.82,
        dset: 1.82,
        dmat: 3.41,
        dprize_k: 42.01,
    },
    CounterfactualFixture {
        id: "boris_becker",
        dx1: -2.53,
        dx2: -10.79,
        dpt: 0.64,
        dgm: 1.14,
        dset: 2.13,
        dmat: 3.99,
        dprize_k: 50.26,
    },
    CounterfactualFixture {
        id: "carlos_alcaraz",
        dx1: -0.21,
        dx2: -0.89,
        dpt: 0.00,
        dgm: 0.01,
        dset: 0.02,
        dmat: 0.03,
        dprize_k: 0.31,
    },
    CounterfactualFixture {
        id: "jannik_sinner",
        dx1: -0.23,
        dx2: -1.61,
        dpt: 0.01,
        dgm: 0.02,
        dset: 0.04,
        dmat: 0.07,
        dprize_k: 0.80,
    },
    CounterfactualFixture {
        id: "ivo_karlovic",
        dx1: -4.69,
        dx2: -10.79,
        dpt: 1.53,
        dgm: 1.61,
        dset: 4.64,
        dmat: 8.66,
        dprize_k: 132.87,
    },
    CounterfactualFixture {
        id: "john_isner",
        dx1: -3.87,
        dx2: -10.18,
        dpt: 1.20,
        dgm: 1.33,
        dset: 3.67,
        dmat: 6.86,
        dprize_k: 97.63,
    },
    CounterfactualFixture {
        id: "reilly_opelka",
        dx1: -2.24,
        dx2: -7.71,
        dpt: 0.48,
        dgm: 0.57,
        dset: 1.48,
        dmat: 2.78,
        dprize_k: 33.36,
    },
    CounterfactualFixture {
        id: "david_ferrer",
        dx1: 0.04,
        dx2: 0.21,
        dpt: 0.00,
        dgm: 0.00,
        dset: 0.00,
        dmat: 0.00,
        dprize_k: 0.01,
    },
    CounterfactualFixture {
        id: "diego_schwartzman",
        dx1: 1.14,
        dx2: 6.25,
        dpt: 0.17,
        dgm: 0.38,
        dset: 0.60,
        dmat: 1.12,
        dprize_k: 12.56,
    },
];

pub fn fixture_stats(id: &str) -> ServeStats {
    PLAYERS.iter().find(|p| p.id == id).unwrap().stats
}

/// The tournament payout fixture used by the counterfactual tests.
pub fn prize_ladder() -> servelab_core::scoring::PrizeLadder {
    servelab_core::scoring::PrizeLadder::new(vec![
        110_000.0,
        154_000.0,
        237_000.0,
        400_000.0,
        660_000.0,
        1_260_000.0,
        2_500_000.0,
        5_000_000.0,
    ])
    .unwrap()
}

/// One random model configuration that satisfies the shape and validity
/// conditions, together with the stats its optimum generates.
pub struct SyntheticPlayer {
    pub skills: SkillParams,
    pub beta: f64,
    pub stats: ServeStats,
}

/// Rejection-samples skill/preference parameters until the implied optimum
/// produces interior, solver-admissible data.
pub fn random_valid_player(rng: &mut impl Rng) -> SyntheticPlayer {
    for _ in 0..100_000 {
        let lambda: f64 = rng.gen_range(1.2..5.5);
        let tau_f: f64 = rng.gen_range(0.8..7.0);
        let beta: f64 = rng.gen_range(0.4..2.2);
        let tau_k = if rng.gen_bool(0.7) {
            -tau_f.max(beta * tau_f) * rng.gen_range(1.1..20.0)
        } else {
            rng.gen_range(2.0..80.0)
        };
        let a_f = rng.gen_range(0.9..1.7);
        let a_k = a_f + tau_k / tau_f * rng.gen_range(0.05..0.6) * a_f;
        let denom = tau_f + tau_k;
        if denom.abs() < 0.2 {
            continue;
        }
        let skills = SkillParams {
            lambda,
            tau_f,
            a_f,
            tau_k,
            a_k,
            a: (a_f * tau_k + a_k * tau_f) / denom,
            tau: tau_f * tau_k / denom,
        };
        if !(skills.tau > 0.0 && skills.a > 0.0 && skills.a < lambda + 1.0) {
            continue;
        }
        let Ok((x1, x2)) = optimal_strategy(&skills, beta) else {
            continue;
        };
        if !(0.30 < x1 && x1 + 0.02 < x2 && x2 < 0.99) {
            continue;
        }
        if !validate_theorem_conditions(x1, x2).all_hold() {
            continue;
        }
        let stats = ServeStats::new(
            x1,
            x2,
            skills.f(x1),
            skills.f(x2),
            skills.k(x1),
            skills.k(x2),
        );
        let probs = [stats.f1, stats.f2, stats.k1, stats.k2];
        if !probs.iter().all(|p| (0.01..0.95).contains(p)) {
            continue;
        }
        if stats.y1() > 0.99 || stats.y2() > 0.99 {
            continue;
        }
        if (stats.f1 - stats.f2).abs() < 1e-4 || (stats.k1 - stats.k2).abs() < 1e-5 {
            continue;
        }
        return SyntheticPlayer {
            skills,
            beta,
            stats,
        };
    }
    panic!("rejection sampling failed to produce a valid configuration");
}
