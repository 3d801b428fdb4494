//! Exact probability chain from a single service point to game, set,
//! best-of-N match, and expected tournament prize money.
//!
//! Standard rules throughout: games are first to 4 points with win-by-2
//! deuce, sets first to 6 games with win-by-2 and a 7-point tiebreak at 6-6
//! in every set, matches are races to a majority of sets treated as i.i.d.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ScoringError {
    #[error("best_of must be odd and positive, got {0}")]
    InvalidBestOf(u32),
    #[error("invalid prize ladder: {0}")]
    InvalidLadder(String),
}

/// Probability of holding serve in a standard game given the per-point win
/// probability `p`.
///
/// Closed form: reach 4-0/4-1/4-2 directly, or reach deuce-equivalent 3-3
/// and win the win-by-2 race, p^2/(1 - 2pq) per attempt pair.
pub fn game_prob(p: f64) -> f64 {
    let q = 1.0 - p;
    let direct = p.powi(4) * (1.0 + 4.0 * q + 10.0 * q * q);
    let denom = 1.0 - 2.0 * p * q;
    direct + 20.0 * p.powi(3) * q.powi(3) * p * p / denom
}

fn tiebreak_server_is_a(points_played: u32) -> bool {
    // Serve order: A, BB, AA, BB, ... The player who served point 1 serves
    // again whenever the pair index (points - 1)/2 is odd.
    points_played == 0 || ((points_played - 1) / 2) % 2 == 1
}

/// Probability that the player serving the first point wins a 7-point
/// tiebreak, given per-point win probabilities on own serve and on return.
///
/// Dynamic program over the score; from 6-6 every consecutive point pair
/// has one serve each, so the win-by-2 race collapses to
/// sweep_a/(sweep_a + sweep_b).
pub fn tiebreak_prob(p_serve: f64, p_return: f64) -> f64 {
    let mut memo = [[f64::NAN; 7]; 7];

    // states are filled in decreasing total-score order so that every
    // transition target is already known
    for total in (0..=12).rev() {
        for a in 0..=total.min(6) {
            let b = total - a;
            if b > 6 {
                continue;
            }
            if a == 6 && b == 6 {
                let sweep_a = p_serve * p_return;
                let sweep_b = (1.0 - p_serve) * (1.0 - p_return);
                memo[6][6] = if sweep_a + sweep_b == 0.0 {
                    0.5
                } else {
                    sweep_a / (sweep_a + sweep_b)
                };
                continue;
            }
            let p_point = if tiebreak_server_is_a((a + b) as u32) {
                p_serve
            } else {
                p_return
            };
            let win_branch = if a + 1 == 7 { 1.0 } else { memo[a + 1][b] };
            let lose_branch = if b + 1 == 7 { 0.0 } else { memo[a][b + 1] };
            memo[a][b] = p_point * win_branch + (1.0 - p_point) * lose_branch;
        }
    }
    memo[0][0]
}

/// Probability that player A wins a set, serving the first game. `hold_a`
/// and `hold_b` are the game-hold probabilities; the point probabilities
/// feed the tiebreak at 6-6.
pub fn set_prob(hold_a: f64, hold_b: f64, p_serve: f64, p_return: f64) -> f64 {
    // games won by A / by B; server alternates, A serves game 1. At 6-6 the
    // next game's server (always A after 12 games) serves the tiebreak first.
    fn solve(
        ga: usize,
        gb: usize,
        a_serves: bool,
        hold_a: f64,
        hold_b: f64,
        p_serve: f64,
        p_return: f64,
        memo: &mut [[[Option<f64>; 2]; 8]; 8],
    ) -> f64 {
        if ga >= 6 && ga >= gb + 2 {
            return 1.0;
        }
        if gb >= 6 && gb >= ga + 2 {
            return 0.0;
        }
        if ga == 6 && gb == 6 {
            return if a_serves {
                tiebreak_prob(p_serve, p_return)
            } else {
                1.0 - tiebreak_prob(1.0 - p_return, 1.0 - p_serve)
            };
        }
        if let Some(v) = memo[ga][gb][a_serves as usize] {
            return v;
        }
        let p_game = if a_serves { hold_a } else { 1.0 - hold_b };
        let v = p_game
            * solve(
                ga + 1,
                gb,
                !a_serves,
                hold_a,
                hold_b,
                p_serve,
                p_return,
                memo,
            )
            + (1.0 - p_game)
                * solve(
                    ga,
                    gb + 1,
                    !a_serves,
                    hold_a,
                    hold_b,
                    p_serve,
                    p_return,
                    memo,
                );
        memo[ga][gb][a_serves as usize] = Some(v);
        v
    }
    let mut memo = [[[None; 2]; 8]; 8];
    solve(0, 0, true, hold_a, hold_b, p_serve, p_return, &mut memo)
}

/// Probability of winning a race to ceil(best_of/2) i.i.d. sets.
pub fn match_prob(p_set: f64, best_of: u32) -> Result<f64, ScoringError> {
    if best_of == 0 || best_of % 2 == 0 {
        return Err(ScoringError::InvalidBestOf(best_of));
    }
    let need = (best_of as usize + 1) / 2;
    let q = 1.0 - p_set;
    // P(win j losses before the clinching set) = C(need-1+j, j) p^need q^j
    let mut total = 0.0;
    let mut coef = 1.0;
    for j in 0..need {
        if j > 0 {
            coef = coef * (need - 1 + j) as f64 / j as f64;
        }
        total += coef * p_set.powi(need as i32) * q.powi(j as i32);
    }
    Ok(total)
}

/// Tournament payout by number of matches won: `prizes[r]` is paid on
/// exiting after `r` wins, `prizes[rounds]` to the champion.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PrizeLadder {
    pub rounds: usize,
    pub prizes: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
}

impl PrizeLadder {
    pub fn new(prizes: Vec<f64>) -> Result<Self, ScoringError> {
        if prizes.len() < 2 {
            return Err(ScoringError::InvalidLadder(
                "need at least a first-round and a champion prize".to_string(),
            ));
        }
        if prizes.windows(2).any(|w| w[1] < w[0]) {
            return Err(ScoringError::InvalidLadder(
                "prizes must be non-decreasing in rounds won".to_string(),
            ));
        }
        Ok(PrizeLadder {
            rounds: prizes.len() - 1,
            prizes,
            source: None,
        })
    }

    pub fn validate(&self) -> Result<(), ScoringError> {
        if self.rounds < 1 {
            return Err(ScoringError::InvalidLadder(
                "rounds must be >= 1".to_string(),
            ));
        }
        if self.prizes.len() != self.rounds + 1 {
            return Err(ScoringError::InvalidLadder(format!(
                "need rounds + 1 = {} prizes, got {}",
                self.rounds + 1,
                self.prizes.len()
            )));
        }
        if self.prizes.windows(2).any(|w| w[1] < w[0]) {
            return Err(ScoringError::InvalidLadder(
                "prizes must be non-decreasing in rounds won".to_string(),
            ));
        }
        Ok(())
    }
}

/// Expected payout when each match is won independently with probability
/// `q_match`: sum of exit prizes q^r (1-q) `prizes[r]` plus the champion
/// term q^R `prizes[R]`.
pub fn expected_prize(q_match: f64, ladder: &PrizeLadder) -> f64 {
    let r = ladder.rounds;
    let mut total = 0.0;
    let mut pow = 1.0;
    for prize in &ladder.prizes[..r] {
        total += pow * (1.0 - q_match) * prize;
        pow *= q_match;
    }
    total + pow * ladder.prizes[r]
}

/// Full chain for one player against a fixed opponent.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScoreChain {
    /// Point-win probability on own serve.
    pub p_point_serve: f64,
    /// Point-win probability returning the opponent's serve.
    pub q_point_opp_serve: f64,
    pub p_game_hold: f64,
    pub p_set: f64,
    pub p_match: f64,
    pub best_of: u32,
}

impl ScoreChain {
    pub fn compute(
        p_point_serve: f64,
        q_point_opp_serve: f64,
        best_of: u32,
    ) -> Result<Self, ScoringError> {
        let p_game_hold = game_prob(p_point_serve);
        let opp_hold = game_prob(1.0 - q_point_opp_serve);
        let p_set = set_prob(p_game_hold, opp_hold, p_point_serve, q_point_opp_serve);
        let p_match = match_prob(p_set, best_of)?;
        Ok(ScoreChain {
            p_point_serve,
            q_point_opp_serve,
            p_game_hold,
            p_set,
            p_match,
            best_of,
        })
    }
}
