//! Declarative campaign configuration: TOML sections for the campaign
//! shape, demand ranges, fleet compositions, and the damage/downtime
//! constants.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::record::Role;
use crate::sim::battle::{DamageConfig, DemandRanges};
use crate::sim::fleet::DowntimeConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CampaignSection {
    /// Engagements per campaign.
    pub engagements: u32,
    /// Leading fraction of engagements played with uniform-random strategies.
    pub stochastic_fraction: f64,
    /// Hours between engagements, during which recovery and ADR proceed.
    pub gap_hours: f64,
    /// "random", or a 3-letter A/D schedule for the modular fleet.
    pub role_schedule: String,
    /// How many same-role records adversary inference looks back over.
    pub inference_window: u32,
}

impl Default for CampaignSection {
    fn default() -> Self {
        CampaignSection {
            engagements: 200,
            stochastic_fraction: 0.3,
            gap_hours: 24.0,
            role_schedule: "random".into(),
            inference_window: 30,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ConventionalConfig {
    pub gun_trucks: u32,
    pub gun_truck_firepower: f64,
    pub transports: u32,
    pub transport_capacity: f64,
}

impl Default for ConventionalConfig {
    fn default() -> Self {
        ConventionalConfig {
            gun_trucks: 5,
            gun_truck_firepower: 4.0,
            transports: 5,
            transport_capacity: 4.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModularConfig {
    pub chassis: u32,
    pub weapon_modules: u32,
    pub weapon_firepower: f64,
    pub cargo_modules: u32,
    pub cargo_capacity: f64,
    pub slots_per_chassis: u8,
}

impl Default for ModularConfig {
    fn default() -> Self {
        ModularConfig {
            chassis: 10,
            weapon_modules: 5,
            weapon_firepower: 4.0,
            cargo_modules: 5,
            cargo_capacity: 4.0,
            slots_per_chassis: 2,
        }
    }
}

/// Role assignment rule for the modular fleet.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RoleSchedule {
    /// Fair coin per engagement.
    Random,
    /// Fixed 3-stage cycle.
    Fixed([Role; 3]),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default)]
pub struct CampaignConfig {
    pub campaign: CampaignSection,
    pub demand: DemandRanges,
    pub conventional: ConventionalConfig,
    pub modular: ModularConfig,
    pub damage: DamageConfig,
    pub downtime: DowntimeConfig,
}

impl CampaignConfig {
    pub fn from_toml(text: &str) -> Result<CampaignConfig> {
        let config: CampaignConfig =
            toml::from_str(text).map_err(|e| Error::config(format!("bad config file: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn role_schedule(&self) -> Result<RoleSchedule> {
        parse_role_schedule(&self.campaign.role_schedule)
    }

    pub fn validate(&self) -> Result<()> {
        self.demand.validate()?;
        let c = &self.campaign;
        if !(0.0..=1.0).contains(&c.stochastic_fraction) {
            return Err(Error::config(format!(
                "stochastic_fraction must lie in [0, 1], got {}",
                c.stochastic_fraction
            )));
        }
        if !c.gap_hours.is_finite() || c.gap_hours < 0.0 {
            return Err(Error::config(format!("gap_hours must be nonnegative, got {}", c.gap_hours)));
        }
        if c.inference_window == 0 {
            return Err(Error::config("inference_window must be at least 1".into()));
        }
        self.role_schedule()?;
        for (name, v) in [
            ("gun_truck_firepower", self.conventional.gun_truck_firepower),
            ("transport_capacity", self.conventional.transport_capacity),
            ("weapon_firepower", self.modular.weapon_firepower),
            ("cargo_capacity", self.modular.cargo_capacity),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::config(format!("{name} must be nonnegative, got {v}")));
            }
        }
        if self.modular.slots_per_chassis == 0 {
            return Err(Error::config("slots_per_chassis must be at least 1".into()));
        }
        let d = &self.damage;
        if !d.coefficient.is_finite() || d.coefficient < 0.0 || !(0.0..=1.0).contains(&d.cap) {
            return Err(Error::config(format!(
                "damage law needs coefficient >= 0 and cap in [0, 1], got {} / {}",
                d.coefficient, d.cap
            )));
        }
        let t = &self.downtime;
        for (name, v) in [
            ("assembly_hours", t.assembly_hours),
            ("disassembly_hours", t.disassembly_hours),
            ("recovery_hours", t.recovery_hours),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::config(format!("{name} must be nonnegative, got {v}")));
            }
        }
        Ok(())
    }

    /// Engagements played stochastically before the intelligent phase.
    pub fn stochastic_count(&self) -> u32 {
        let n = self.campaign.engagements as f64;
        (self.campaign.stochastic_fraction * n).round() as u32
    }
}

pub fn parse_role_schedule(text: &str) -> Result<RoleSchedule> {
    if text.eq_ignore_ascii_case("random") {
        return Ok(RoleSchedule::Random);
    }
    let letters: Vec<char> = text.chars().collect();
    if letters.len() != 3 {
        return Err(Error::config(format!(
            "role schedule must be \"random\" or 3 letters over A/D, got {text:?}"
        )));
    }
    let mut roles = [Role::Attacker; 3];
    for (slot, &c) in roles.iter_mut().zip(letters.iter()) {
        *slot = Role::from_letter(c)?;
    }
    Ok(RoleSchedule::Fixed(roles))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_valid() {
        CampaignConfig::default().validate().unwrap();
    }

    #[test]
    fn toml_round_trip() {
        let config = CampaignConfig::default();
        let text = config.to_toml();
        let back = CampaignConfig::from_toml(&text).unwrap();
        assert_eq!(back, config);
    }

    #[test]
    fn partial_toml_fills_defaults() {
        let config = CampaignConfig::from_toml(
            "[campaign]\nengagements = 12\n\n[demand]\nfirepower_min = 2.0\n",
        )
        .unwrap();
        assert_eq!(config.campaign.engagements, 12);
        assert_eq!(config.demand.firepower_min, 2.0);
        assert_eq!(config.modular.chassis, ModularConfig::default().chassis);
    }

    #[test]
    fn schedules_parse() {
        assert_eq!(parse_role_schedule("random").unwrap(), RoleSchedule::Random);
        assert_eq!(
            parse_role_schedule("AAD").unwrap(),
            RoleSchedule::Fixed([Role::Attacker, Role::Attacker, Role::Defender])
        );
        assert!(parse_role_schedule("AXD").is_err());
        assert!(parse_role_schedule("AA").is_err());
    }

    #[test]
    fn bad_configs_are_rejected_before_simulation() {
        let mut config = CampaignConfig::default();
        config.campaign.stochastic_fraction = 1.5;
        assert!(config.validate().is_err());

        let mut config = CampaignConfig::default();
        config.demand.firepower_min = -1.0;
        assert!(config.validate().is_err());

        let mut config = CampaignConfig::default();
        config.damage.cap = 1.2;
        assert!(config.validate().is_err());
    }

    #[test]
    fn stochastic_count_rounds_the_fraction() {
        let mut config = CampaignConfig::default();
        config.campaign.engagements = 200;
        config.campaign.stochastic_fraction = 0.3;
        assert_eq!(config.stochastic_count(), 60);
        config.campaign.engagements = 0;
        assert_eq!(config.stochastic_count(), 0);
    }
}
