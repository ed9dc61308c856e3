//! Battle records and the line-oriented battle-log format.
//!
//! One engagement produces one record; the log file is the contract between
//! the simulator and both fitting pipelines. Each record is one line of
//! space-separated fields:
//!
//! ```text
//! index phase stage modular_role mod_strategy conv_strategy modular_won \
//!     mod_avail conv_avail mod_next conv_next
//! ```
//!
//! Masks are 10-character 0/1 strings with strategy 1 leftmost.

use std::fmt;

use crate::error::{Error, Result};
use crate::strategy::STRATEGY_COUNT;

/// Which fleet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FleetKind {
    Modular,
    Conventional,
}

impl FleetKind {
    pub fn opponent(self) -> FleetKind {
        match self {
            FleetKind::Modular => FleetKind::Conventional,
            FleetKind::Conventional => FleetKind::Modular,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            FleetKind::Modular => "modular",
            FleetKind::Conventional => "conventional",
        }
    }
}

/// Role a fleet plays in one engagement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    Attacker,
    Defender,
}

impl Role {
    pub fn opponent(self) -> Role {
        match self {
            Role::Attacker => Role::Defender,
            Role::Defender => Role::Attacker,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Role::Attacker => "attacker",
            Role::Defender => "defender",
        }
    }

    /// Single-letter form used in role schedules: A or D.
    pub fn letter(self) -> char {
        match self {
            Role::Attacker => 'A',
            Role::Defender => 'D',
        }
    }

    pub fn from_letter(c: char) -> Result<Role> {
        match c {
            'A' | 'a' => Ok(Role::Attacker),
            'D' | 'd' => Ok(Role::Defender),
            _ => Err(Error::config(format!("role letter must be A or D, got {c:?}"))),
        }
    }
}

/// Campaign phase the engagement belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    Stochastic,
    Intelligent,
}

impl Phase {
    pub fn name(self) -> &'static str {
        match self {
            Phase::Stochastic => "stochastic",
            Phase::Intelligent => "intelligent",
        }
    }
}

/// Set of available strategies as a 10-bit mask. Bit `i - 1` holds
/// strategy `i`; the serialized string puts strategy 1 leftmost.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StrategyMask(pub u16);

impl StrategyMask {
    pub const EMPTY: StrategyMask = StrategyMask(0);
    pub const ALL: StrategyMask = StrategyMask((1 << STRATEGY_COUNT) - 1);

    /// Mask of the first `n` strategies.
    pub fn first(n: usize) -> StrategyMask {
        debug_assert!(n <= STRATEGY_COUNT);
        StrategyMask(((1u32 << n) - 1) as u16)
    }

    pub fn contains(self, index: u8) -> bool {
        (1..=STRATEGY_COUNT as u8).contains(&index) && self.0 & (1 << (index - 1)) != 0
    }

    pub fn insert(&mut self, index: u8) {
        debug_assert!((1..=STRATEGY_COUNT as u8).contains(&index));
        self.0 |= 1 << (index - 1);
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    /// Strategy indices present, ascending.
    pub fn indices(self) -> impl Iterator<Item = u8> {
        (1..=STRATEGY_COUNT as u8).filter(move |&i| self.contains(i))
    }

    pub fn parse(s: &str) -> Result<StrategyMask> {
        if s.len() != STRATEGY_COUNT {
            return Err(Error::data(format!(
                "strategy mask must be {STRATEGY_COUNT} characters, got {:?}",
                s
            )));
        }
        let mut mask = StrategyMask::EMPTY;
        for (pos, c) in s.chars().enumerate() {
            match c {
                '1' => mask.insert(pos as u8 + 1),
                '0' => {}
                _ => {
                    return Err(Error::data(format!(
                        "strategy mask may contain only 0 and 1, got {:?}",
                        s
                    )))
                }
            }
        }
        Ok(mask)
    }
}

impl fmt::Display for StrategyMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 1..=STRATEGY_COUNT as u8 {
            write!(f, "{}", if self.contains(i) { '1' } else { '0' })?;
        }
        Ok(())
    }
}

/// Outcome row for one engagement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BattleRecord {
    pub engagement_index: u32,
    pub phase: Phase,
    /// Position inside the 3-engagement stage window, 1..3.
    pub stage_in_window: u8,
    pub modular_role: Role,
    pub modular_strategy: u8,
    pub conventional_strategy: u8,
    pub modular_won: bool,
    pub modular_avail_mask: StrategyMask,
    pub conventional_avail_mask: StrategyMask,
    pub modular_next_mask: StrategyMask,
    pub conventional_next_mask: StrategyMask,
}

impl BattleRecord {
    pub fn conventional_role(&self) -> Role {
        self.modular_role.opponent()
    }

    pub fn winner(&self) -> FleetKind {
        if self.modular_won {
            FleetKind::Modular
        } else {
            FleetKind::Conventional
        }
    }

    pub fn strategy_of(&self, fleet: FleetKind) -> u8 {
        match fleet {
            FleetKind::Modular => self.modular_strategy,
            FleetKind::Conventional => self.conventional_strategy,
        }
    }

    pub fn won_by(&self, fleet: FleetKind) -> bool {
        self.winner() == fleet
    }

    pub fn role_of(&self, fleet: FleetKind) -> Role {
        match fleet {
            FleetKind::Modular => self.modular_role,
            FleetKind::Conventional => self.conventional_role(),
        }
    }

    /// Structural checks: strategy indices in range, chosen strategies
    /// present in the corresponding availability masks, stage in 1..3.
    pub fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.stage_in_window) {
            return Err(Error::data(format!(
                "record {}: stage_in_window {} out of 1..3",
                self.engagement_index, self.stage_in_window
            )));
        }
        for (name, strat, mask) in [
            ("modular", self.modular_strategy, self.modular_avail_mask),
            ("conventional", self.conventional_strategy, self.conventional_avail_mask),
        ] {
            if !(1..=STRATEGY_COUNT as u8).contains(&strat) {
                return Err(Error::data(format!(
                    "record {}: {name} strategy {strat} out of range",
                    self.engagement_index
                )));
            }
            if !mask.contains(strat) {
                return Err(Error::data(format!(
                    "record {}: {name} strategy {strat} not in availability mask {mask}",
                    self.engagement_index
                )));
            }
        }
        Ok(())
    }

    pub fn to_line(&self) -> String {
        format!(
            "{} {} {} {} {} {} {} {} {} {} {}",
            self.engagement_index,
            self.phase.name(),
            self.stage_in_window,
            self.modular_role.name(),
            self.modular_strategy,
            self.conventional_strategy,
            self.modular_won as u8,
            self.modular_avail_mask,
            self.conventional_avail_mask,
            self.modular_next_mask,
            self.conventional_next_mask,
        )
    }

    pub fn parse_line(line: &str) -> Result<BattleRecord> {
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 11 {
            return Err(Error::data(format!(
                "battle record needs 11 fields, got {}: {:?}",
                fields.len(),
                line
            )));
        }
        let engagement_index = fields[0]
            .parse::<u32>()
            .map_err(|e| Error::data(format!("bad engagement index {:?}: {e}", fields[0])))?;
        let phase = match fields[1] {
            "stochastic" => Phase::Stochastic,
            "intelligent" => Phase::Intelligent,
            other => return Err(Error::data(format!("unknown phase {other:?}"))),
        };
        let stage_in_window = fields[2]
            .parse::<u8>()
            .map_err(|e| Error::data(format!("bad stage {:?}: {e}", fields[2])))?;
        let modular_role = match fields[3] {
            "attacker" => Role::Attacker,
            "defender" => Role::Defender,
            other => return Err(Error::data(format!("unknown role {other:?}"))),
        };
        let parse_strat = |s: &str| -> Result<u8> {
            s.parse::<u8>()
                .map_err(|e| Error::data(format!("bad strategy index {s:?}: {e}")))
        };
        let modular_strategy = parse_strat(fields[4])?;
        let conventional_strategy = parse_strat(fields[5])?;
        let modular_won = match fields[6] {
            "1" => true,
            "0" => false,
            other => return Err(Error::data(format!("modular_won must be 0 or 1, got {other:?}"))),
        };
        let record = BattleRecord {
            engagement_index,
            phase,
            stage_in_window,
            modular_role,
            modular_strategy,
            conventional_strategy,
            modular_won,
            modular_avail_mask: StrategyMask::parse(fields[7])?,
            conventional_avail_mask: StrategyMask::parse(fields[8])?,
            modular_next_mask: StrategyMask::parse(fields[9])?,
            conventional_next_mask: StrategyMask::parse(fields[10])?,
        };
        record.validate()?;
        Ok(record)
    }
}

/// Serialize a record stream to battle-log text. Lines starting with `#`
/// are comments; the header documents the column order.
pub fn write_log(records: &[BattleRecord]) -> String {
    let mut out = String::new();
    out.push_str(
        "# battle log v1: index phase stage modular_role modular_strategy \
         conventional_strategy modular_won modular_avail conventional_avail \
         modular_next conventional_next\n",
    );
    for r in records {
        out.push_str(&r.to_line());
        out.push('\n');
    }
    out
}

/// Parse battle-log text produced by [`write_log`].
pub fn parse_log(text: &str) -> Result<Vec<BattleRecord>> {
    let mut records = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let record = BattleRecord::parse_line(trimmed)
            .map_err(|e| Error::data(format!("line {}: {e}", lineno + 1)))?;
        records.push(record);
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> BattleRecord {
        BattleRecord {
            engagement_index: 7,
            phase: Phase::Intelligent,
            stage_in_window: 2,
            modular_role: Role::Attacker,
            modular_strategy: 3,
            conventional_strategy: 5,
            modular_won: true,
            modular_avail_mask: StrategyMask::parse("1110000000").unwrap(),
            conventional_avail_mask: StrategyMask::parse("1111100000").unwrap(),
            modular_next_mask: StrategyMask::ALL,
            conventional_next_mask: StrategyMask::ALL,
        }
    }

    #[test]
    fn mask_string_has_strategy_one_leftmost() {
        let mut m = StrategyMask::EMPTY;
        m.insert(1);
        assert_eq!(m.to_string(), "1000000000");
        m.insert(10);
        assert_eq!(m.to_string(), "1000000001");
        assert_eq!(StrategyMask::parse("1000000001").unwrap(), m);
        assert_eq!(m.indices().collect::<Vec<_>>(), vec![1, 10]);
    }

    #[test]
    fn record_line_round_trips() {
        let r = sample();
        let parsed = BattleRecord::parse_line(&r.to_line()).unwrap();
        assert_eq!(parsed, r);
    }

    #[test]
    fn log_round_trips_with_header() {
        let records = vec![sample(), {
            let mut r = sample();
            r.engagement_index = 8;
            r.modular_won = false;
            r
        }];
        let text = write_log(&records);
        assert!(text.starts_with("# battle log v1"));
        assert_eq!(parse_log(&text).unwrap(), records);
    }

    #[test]
    fn chosen_strategy_must_be_available() {
        let mut r = sample();
        r.modular_strategy = 9; // not in 1110000000
        assert!(r.validate().is_err());
        assert!(BattleRecord::parse_line(&r.to_line()).is_err());
    }

    #[test]
    fn malformed_lines_are_rejected() {
        assert!(BattleRecord::parse_line("1 2 3").is_err());
        assert!(parse_log("0 nonsense 1 attacker 1 1 1 1 1 1 1").is_err());
    }
}
