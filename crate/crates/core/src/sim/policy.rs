//! In-campaign decision making: adversary inference from history and
//! per-phase strategy selection.

use rand::Rng;
use rand_chacha::ChaCha12Rng;

use crate::record::{BattleRecord, FleetKind, Phase, Role, StrategyMask};
use crate::strategy::STRATEGY_COUNT;

/// Add-one-smoothed empirical frequencies of the adversary's strategies
/// over the last `window` records where `own_fleet` played `own_role`.
/// With no matching history this is the uniform distribution.
pub fn infer_adversary(
    history: &[BattleRecord],
    own_fleet: FleetKind,
    own_role: Role,
    window: usize,
) -> [f64; STRATEGY_COUNT] {
    let adversary = own_fleet.opponent();
    let mut counts = [0u32; STRATEGY_COUNT];
    let mut seen = 0usize;
    for record in history.iter().rev() {
        if seen == window {
            break;
        }
        if record.role_of(own_fleet) != own_role {
            continue;
        }
        counts[record.strategy_of(adversary) as usize - 1] += 1;
        seen += 1;
    }
    let total = seen as f64 + STRATEGY_COUNT as f64;
    let mut probs = [0.0; STRATEGY_COUNT];
    for (p, &c) in probs.iter_mut().zip(counts.iter()) {
        *p = (c as f64 + 1.0) / total;
    }
    probs
}

/// Running win/loss tallies per (own strategy, adversary strategy) profile,
/// accumulated over a campaign from one fleet-and-role point of view.
#[derive(Debug, Clone, Default)]
pub struct RunningPayoffs {
    pub wins: [[u32; STRATEGY_COUNT]; STRATEGY_COUNT],
    pub counts: [[u32; STRATEGY_COUNT]; STRATEGY_COUNT],
}

impl RunningPayoffs {
    pub fn record(&mut self, own_strategy: u8, adversary_strategy: u8, won: bool) {
        let i = own_strategy as usize - 1;
        let j = adversary_strategy as usize - 1;
        self.counts[i][j] += 1;
        if won {
            self.wins[i][j] += 1;
        }
    }

    /// Laplace-smoothed win-rate estimate for a profile.
    pub fn win_rate(&self, own_strategy: u8, adversary_strategy: u8) -> f64 {
        let i = own_strategy as usize - 1;
        let j = adversary_strategy as usize - 1;
        (self.wins[i][j] as f64 + 1.0) / (self.counts[i][j] as f64 + 2.0)
    }
}

/// Pick a strategy from the available set.
///
/// Stochastic phase: uniform draw over available strategies. Intelligent
/// phase: argmax of expected win probability against the inferred
/// adversary distribution, using the running payoff estimates; ties go to
/// the lowest index.
pub fn select_strategy(
    phase: Phase,
    available: StrategyMask,
    history: &[BattleRecord],
    own_fleet: FleetKind,
    own_role: Role,
    inference_window: usize,
    payoffs: &RunningPayoffs,
    rng: &mut ChaCha12Rng,
) -> u8 {
    let choices: Vec<u8> = available.indices().collect();
    assert!(!choices.is_empty(), "availability mask must have at least one strategy");
    if choices.len() == 1 {
        return choices[0];
    }
    match phase {
        Phase::Stochastic => choices[rng.random_range(0..choices.len())],
        Phase::Intelligent => {
            let adversary = infer_adversary(history, own_fleet, own_role, inference_window);
            let mut best = choices[0];
            let mut best_value = f64::NEG_INFINITY;
            for &i in &choices {
                let expected: f64 = (1..=STRATEGY_COUNT as u8)
                    .map(|j| adversary[j as usize - 1] * payoffs.win_rate(i, j))
                    .sum();
                if expected > best_value {
                    best_value = expected;
                    best = i;
                }
            }
            best
        }
    }
}
