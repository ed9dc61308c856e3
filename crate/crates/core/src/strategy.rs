//! Strategy tables: the 10 attack and 10 defense strategies, each a band of
//! safety levels, plus classification of realized safety levels back into
//! strategy indices.
//!
//! A safety level is the ratio between an attribute a convoy actually carries
//! (firepower or capacity) and the corresponding demand requirement.

use crate::error::{Error, Result};

/// Number of strategies per side. The solver and all masks assume this shape.
pub const STRATEGY_COUNT: usize = 10;

/// A half-open interval `[lo, hi)` of safety levels. `hi` may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SafetyBand {
    pub lo: f64,
    pub hi: f64,
}

impl SafetyBand {
    pub const fn new(lo: f64, hi: f64) -> Self {
        SafetyBand { lo, hi }
    }

    /// Half-open membership: `lo <= x < hi`.
    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x < self.hi
    }
}

impl std::fmt::Display for SafetyBand {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.hi.is_infinite() {
            write!(f, "[{}, inf)", self.lo)
        } else {
            write!(f, "[{}, {})", self.lo, self.hi)
        }
    }
}

/// One of the 10 attack strategies: a firepower safety band.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttackStrategy {
    pub index: u8,
    pub firepower_band: SafetyBand,
}

/// One of the 10 defense strategies: a firepower band paired with a
/// capacity band.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DefenseStrategy {
    pub index: u8,
    pub firepower_band: SafetyBand,
    pub capacity_band: SafetyBand,
}

/// Realized safety levels of a convoy against a demand.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SafetyLevel {
    pub firepower: f64,
    pub capacity: f64,
}

const INF: f64 = f64::INFINITY;

/// Attack strategies 1..10: firepower bands of width 0.5 tiling [0, inf).
pub const ATTACK_STRATEGIES: [AttackStrategy; STRATEGY_COUNT] = [
    AttackStrategy { index: 1, firepower_band: SafetyBand::new(0.0, 0.5) },
    AttackStrategy { index: 2, firepower_band: SafetyBand::new(0.5, 1.0) },
    AttackStrategy { index: 3, firepower_band: SafetyBand::new(1.0, 1.5) },
    AttackStrategy { index: 4, firepower_band: SafetyBand::new(1.5, 2.0) },
    AttackStrategy { index: 5, firepower_band: SafetyBand::new(2.0, 2.5) },
    AttackStrategy { index: 6, firepower_band: SafetyBand::new(2.5, 3.0) },
    AttackStrategy { index: 7, firepower_band: SafetyBand::new(3.0, 3.5) },
    AttackStrategy { index: 8, firepower_band: SafetyBand::new(3.5, 4.0) },
    AttackStrategy { index: 9, firepower_band: SafetyBand::new(4.0, 4.5) },
    AttackStrategy { index: 10, firepower_band: SafetyBand::new(4.5, INF) },
];

/// Defense strategies 1..10. Strategy 1 is the give-up strategy (sub-unit
/// safety in both attributes); strategies 2..10 are the cross product of
/// three firepower bands with three capacity bands.
pub const DEFENSE_STRATEGIES: [DefenseStrategy; STRATEGY_COUNT] = [
    DefenseStrategy {
        index: 1,
        firepower_band: SafetyBand::new(0.0, 1.0),
        capacity_band: SafetyBand::new(0.0, 1.0),
    },
    DefenseStrategy {
        index: 2,
        firepower_band: SafetyBand::new(1.0, 1.5),
        capacity_band: SafetyBand::new(1.0, 1.5),
    },
    DefenseStrategy {
        index: 3,
        firepower_band: SafetyBand::new(1.0, 1.5),
        capacity_band: SafetyBand::new(1.5, 2.0),
    },
    DefenseStrategy {
        index: 4,
        firepower_band: SafetyBand::new(1.0, 1.5),
        capacity_band: SafetyBand::new(2.0, INF),
    },
    DefenseStrategy {
        index: 5,
        firepower_band: SafetyBand::new(1.5, 2.0),
        capacity_band: SafetyBand::new(1.0, 1.5),
    },
    DefenseStrategy {
        index: 6,
        firepower_band: SafetyBand::new(1.5, 2.0),
        capacity_band: SafetyBand::new(1.5, 2.0),
    },
    DefenseStrategy {
        index: 7,
        firepower_band: SafetyBand::new(1.5, 2.0),
        capacity_band: SafetyBand::new(2.0, INF),
    },
    DefenseStrategy {
        index: 8,
        firepower_band: SafetyBand::new(2.0, INF),
        capacity_band: SafetyBand::new(1.0, 1.5),
    },
    DefenseStrategy {
        index: 9,
        firepower_band: SafetyBand::new(2.0, INF),
        capacity_band: SafetyBand::new(1.5, 2.0),
    },
    DefenseStrategy {
        index: 10,
        firepower_band: SafetyBand::new(2.0, INF),
        capacity_band: SafetyBand::new(2.0, INF),
    },
];

/// Firepower band of the attack strategy with the given 1-based index.
pub fn attack_band(index: u8) -> Result<SafetyBand> {
    strategy_index_ok(index)?;
    Ok(ATTACK_STRATEGIES[index as usize - 1].firepower_band)
}

/// Both bands of the defense strategy with the given 1-based index.
pub fn defense_bands(index: u8) -> Result<(SafetyBand, SafetyBand)> {
    strategy_index_ok(index)?;
    let d = DEFENSE_STRATEGIES[index as usize - 1];
    Ok((d.firepower_band, d.capacity_band))
}

fn strategy_index_ok(index: u8) -> Result<()> {
    if (1..=STRATEGY_COUNT as u8).contains(&index) {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "strategy index {index} out of range 1..{STRATEGY_COUNT}"
        )))
    }
}

/// Classify a firepower safety level into the attack strategy whose band
/// contains it.
pub fn classify_attack(firepower_safety: f64) -> Result<u8> {
    if !firepower_safety.is_finite() || firepower_safety < 0.0 {
        return Err(Error::domain(format!(
            "attack safety level must be finite and nonnegative, got {firepower_safety}"
        )));
    }
    // Bands have width 0.5 up to 4.5, unbounded above after that.
    let idx = (firepower_safety / 0.5) as usize + 1;
    Ok(idx.min(STRATEGY_COUNT) as u8)
}

/// Classify a pair of safety levels into a defense strategy.
///
/// Any profile with firepower < 1 or capacity < 1 maps to strategy 1, the
/// give-up strategy: requirements are unmet, so the printed d1 cell and the
/// uncovered corners of the table collapse to the same choice.
pub fn classify_defense(level: SafetyLevel) -> Result<u8> {
    if !level.firepower.is_finite() || !level.capacity.is_finite() {
        return Err(Error::domain(format!(
            "defense safety levels must be finite, got ({}, {})",
            level.firepower, level.capacity
        )));
    }
    if level.firepower < 0.0 || level.capacity < 0.0 {
        return Err(Error::domain(format!(
            "defense safety levels must be nonnegative, got ({}, {})",
            level.firepower, level.capacity
        )));
    }
    if level.firepower < 1.0 || level.capacity < 1.0 {
        return Ok(1);
    }
    let group = |x: f64| -> u8 {
        if x < 1.5 {
            0
        } else if x < 2.0 {
            1
        } else {
            2
        }
    };
    Ok(2 + 3 * group(level.firepower) + group(level.capacity))
}
