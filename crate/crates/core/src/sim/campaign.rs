//! The campaign loop: alternating engagements between the modular and the
//! conventional fleet, with recovery and reconfiguration in the gaps.
//!
//! The whole record stream is a pure function of (config, seed). Per
//! engagement the generator is consumed in a fixed order: role coin (random
//! schedules only), demand, modular strategy draw, conventional strategy
//! draw, defender damage, attacker damage.

use rand::Rng;
use rand_chacha::ChaCha12Rng;
use rand::SeedableRng;

use crate::error::Result;
use crate::record::{BattleRecord, FleetKind, Phase, Role, StrategyMask};
use crate::sim::battle::{
    assemble_convoy, availability_mask, generate_demand, resolve_confrontation, Demand,
};
use crate::sim::config::{CampaignConfig, RoleSchedule};
use crate::sim::fleet::{
    default_reconfiguration_target, execute_plan, reconfigure_plan, FleetState, VehicleStatus,
};
use crate::sim::policy::{select_strategy, RunningPayoffs};

/// Everything fixed at the start of an engagement: roles, demand, and the
/// availability masks those imply.
struct EngagementSetup {
    modular_role: Role,
    demand: Demand,
    modular_mask: StrategyMask,
    conventional_mask: StrategyMask,
}

struct Tables {
    modular_attacker: RunningPayoffs,
    modular_defender: RunningPayoffs,
    conventional_attacker: RunningPayoffs,
    conventional_defender: RunningPayoffs,
}

impl Tables {
    fn new() -> Tables {
        Tables {
            modular_attacker: RunningPayoffs::default(),
            modular_defender: RunningPayoffs::default(),
            conventional_attacker: RunningPayoffs::default(),
            conventional_defender: RunningPayoffs::default(),
        }
    }

    fn for_fleet(&mut self, fleet: FleetKind, role: Role) -> &mut RunningPayoffs {
        match (fleet, role) {
            (FleetKind::Modular, Role::Attacker) => &mut self.modular_attacker,
            (FleetKind::Modular, Role::Defender) => &mut self.modular_defender,
            (FleetKind::Conventional, Role::Attacker) => &mut self.conventional_attacker,
            (FleetKind::Conventional, Role::Defender) => &mut self.conventional_defender,
        }
    }
}

/// Run one campaign and return its record stream.
pub fn run_campaign(config: &CampaignConfig, seed: u64) -> Result<Vec<BattleRecord>> {
    run_campaign_with_inspector(config, seed, |_, _, _| {})
}

/// Like [`run_campaign`], calling `inspect(engagement_index, modular,
/// conventional)` after each engagement's gap processing. Used by tests to
/// watch invariants over every prefix of the stream.
pub fn run_campaign_with_inspector(
    config: &CampaignConfig,
    seed: u64,
    mut inspect: impl FnMut(u32, &FleetState, &FleetState),
) -> Result<Vec<BattleRecord>> {
    config.validate()?;
    let schedule = config.role_schedule()?;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);

    let mut modular = build_modular(config);
    let mut conventional = build_conventional(config);

    let engagements = config.campaign.engagements;
    let stochastic_count = config.stochastic_count();
    let mut history: Vec<BattleRecord> = Vec::new();
    let mut tables = Tables::new();
    let mut records = Vec::with_capacity(engagements as usize);

    if engagements == 0 {
        return Ok(records);
    }

    let mut setup = engagement_setup(config, schedule, 0, &modular, &conventional, &mut rng)?;

    for index in 0..engagements {
        let phase =
            if index < stochastic_count { Phase::Stochastic } else { Phase::Intelligent };
        let modular_role = setup.modular_role;
        let conventional_role = modular_role.opponent();

        let modular_strategy = select_strategy(
            phase,
            setup.modular_mask,
            &history,
            FleetKind::Modular,
            modular_role,
            config.campaign.inference_window as usize,
            tables.for_fleet(FleetKind::Modular, modular_role),
            &mut rng,
        );
        let conventional_strategy = select_strategy(
            phase,
            setup.conventional_mask,
            &history,
            FleetKind::Conventional,
            conventional_role,
            config.campaign.inference_window as usize,
            tables.for_fleet(FleetKind::Conventional, conventional_role),
            &mut rng,
        );

        let modular_convoy = assemble_convoy(&modular, modular_role, modular_strategy, &setup.demand)?
            .expect("selected strategy came from the availability mask");
        let conventional_convoy =
            assemble_convoy(&conventional, conventional_role, conventional_strategy, &setup.demand)?
                .expect("selected strategy came from the availability mask");

        for &id in &modular_convoy.vehicle_ids {
            if let Some(v) = modular.vehicle_mut(id) {
                v.status = VehicleStatus::Dispatched;
            }
        }
        for &id in &conventional_convoy.vehicle_ids {
            if let Some(v) = conventional.vehicle_mut(id) {
                v.status = VehicleStatus::Dispatched;
            }
        }

        let outcome = match modular_role {
            Role::Defender => resolve_confrontation(
                &modular, &modular_convoy, &conventional_convoy, &setup.demand,
                &config.damage, &mut rng,
            ),
            Role::Attacker => resolve_confrontation(
                &conventional, &conventional_convoy, &modular_convoy, &setup.demand,
                &config.damage, &mut rng,
            ),
        };
        let modular_won = (modular_role == Role::Defender) == outcome.defender_won;
        let (damaged_modular, damaged_conventional) = match modular_role {
            Role::Defender => (&outcome.damaged_defender, &outcome.damaged_attacker),
            Role::Attacker => (&outcome.damaged_attacker, &outcome.damaged_defender),
        };

        // Survivors return to ready; damaged vehicles start recovery (a
        // modular vehicle dissolves into recovering modules).
        for &id in &modular_convoy.vehicle_ids {
            if let Some(v) = modular.vehicle_mut(id) {
                v.status = VehicleStatus::Ready;
            }
        }
        for &id in &conventional_convoy.vehicle_ids {
            if let Some(v) = conventional.vehicle_mut(id) {
                v.status = VehicleStatus::Ready;
            }
        }
        for &id in damaged_modular {
            modular.damage_vehicle(id, config.downtime.recovery_hours);
        }
        for &id in damaged_conventional {
            conventional.damage_vehicle(id, config.downtime.recovery_hours);
        }

        tables
            .for_fleet(FleetKind::Modular, modular_role)
            .record(modular_strategy, conventional_strategy, modular_won);
        tables
            .for_fleet(FleetKind::Conventional, conventional_role)
            .record(conventional_strategy, modular_strategy, !modular_won);

        // Inter-engagement gap: timers run down, then the modular base
        // executes as much of its reconfiguration plan as fits.
        let gap = config.campaign.gap_hours;
        modular.step_recovery(gap);
        conventional.step_recovery(gap);
        let target = default_reconfiguration_target(&modular, config.modular.slots_per_chassis);
        let plan = reconfigure_plan(&modular, &target, &config.downtime)?;
        execute_plan(&mut modular, &plan, &config.downtime, gap);
        modular.clock += gap;
        conventional.clock += gap;

        let next = engagement_setup(config, schedule, index + 1, &modular, &conventional, &mut rng)?;

        let record = BattleRecord {
            engagement_index: index,
            phase,
            stage_in_window: (index % 3) as u8 + 1,
            modular_role,
            modular_strategy,
            conventional_strategy,
            modular_won,
            modular_avail_mask: setup.modular_mask,
            conventional_avail_mask: setup.conventional_mask,
            modular_next_mask: next.modular_mask,
            conventional_next_mask: next.conventional_mask,
        };
        debug_assert!(record.validate().is_ok());
        history.push(record.clone());
        records.push(record);
        setup = next;

        inspect(index, &modular, &conventional);
    }

    Ok(records)
}

fn engagement_setup(
    config: &CampaignConfig,
    schedule: RoleSchedule,
    index: u32,
    modular: &FleetState,
    conventional: &FleetState,
    rng: &mut ChaCha12Rng,
) -> Result<EngagementSetup> {
    let modular_role = match schedule {
        RoleSchedule::Random => {
            if rng.random_bool(0.5) {
                Role::Attacker
            } else {
                Role::Defender
            }
        }
        RoleSchedule::Fixed(roles) => roles[(index % 3) as usize],
    };
    let demand = generate_demand(rng, &config.demand)?;
    let modular_mask = availability_mask(modular, modular_role, &demand);
    let conventional_mask = availability_mask(conventional, modular_role.opponent(), &demand);
    Ok(EngagementSetup { modular_role, demand, modular_mask, conventional_mask })
}

fn build_modular(config: &CampaignConfig) -> FleetState {
    let m = &config.modular;
    let weapons = vec![m.weapon_firepower; m.weapon_modules as usize];
    let cargos = vec![m.cargo_capacity; m.cargo_modules as usize];
    FleetState::new_modular(m.chassis as usize, &weapons, &cargos, m.slots_per_chassis)
}

fn build_conventional(config: &CampaignConfig) -> FleetState {
    let c = &config.conventional;
    let trucks = vec![(c.gun_truck_firepower, 0.0); c.gun_trucks as usize];
    let transports = vec![(0.0, c.transport_capacity); c.transports as usize];
    FleetState::new_conventional(&trucks, &transports)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::record::write_log;

    fn small_config(engagements: u32) -> CampaignConfig {
        let mut config = CampaignConfig::default();
        config.campaign.engagements = engagements;
        config
    }

    #[test]
    fn same_seed_means_byte_identical_logs() {
        let config = small_config(40);
        let a = run_campaign(&config, 11).unwrap();
        let b = run_campaign(&config, 11).unwrap();
        assert_eq!(write_log(&a), write_log(&b));
    }

    #[test]
    fn different_seeds_diverge() {
        let config = small_config(40);
        let a = run_campaign(&config, 1).unwrap();
        let b = run_campaign(&config, 2).unwrap();
        assert_ne!(write_log(&a), write_log(&b));
    }

    #[test]
    fn zero_engagements_gives_an_empty_log() {
        let config = small_config(0);
        assert!(run_campaign(&config, 5).unwrap().is_empty());
    }

    #[test]
    fn module_census_is_invariant_over_every_prefix() {
        let config = small_config(60);
        let mut baseline = None;
        run_campaign_with_inspector(&config, 3, |_, modular, _| {
            let census = modular.module_census();
            match baseline {
                None => baseline = Some(census),
                Some(expected) => assert_eq!(census, expected),
            }
        })
        .unwrap();
        assert!(baseline.is_some());
    }

    #[test]
    fn conventional_vehicle_count_is_constant() {
        let config = small_config(60);
        let expected =
            (config.conventional.gun_trucks + config.conventional.transports) as usize;
        run_campaign_with_inspector(&config, 4, |_, _, conventional| {
            assert_eq!(conventional.vehicles.len(), expected);
        })
        .unwrap();
    }

    #[test]
    fn chosen_strategies_always_sit_in_their_masks() {
        let config = small_config(80);
        for record in run_campaign(&config, 8).unwrap() {
            record.validate().unwrap();
        }
    }

    #[test]
    fn phase_split_honors_the_fraction() {
        let config = small_config(50); // 30% of 50 = 15
        let records = run_campaign(&config, 6).unwrap();
        let stochastic = records.iter().filter(|r| r.phase == Phase::Stochastic).count();
        assert_eq!(stochastic, 15);
        assert!(records[..15].iter().all(|r| r.phase == Phase::Stochastic));
        assert!(records[15..].iter().all(|r| r.phase == Phase::Intelligent));
    }

    #[test]
    fn fixed_schedule_pins_roles_per_window_position() {
        let mut config = small_config(30);
        config.campaign.role_schedule = "AAD".into();
        let records = run_campaign(&config, 7).unwrap();
        for record in records {
            let expected = match record.stage_in_window {
                1 | 2 => Role::Attacker,
                _ => Role::Defender,
            };
            assert_eq!(record.modular_role, expected);
        }
    }

    #[test]
    fn next_mask_matches_the_following_engagement() {
        let config = small_config(30);
        let records = run_campaign(&config, 12).unwrap();
        for pair in records.windows(2) {
            assert_eq!(pair[0].modular_next_mask, pair[1].modular_avail_mask);
            assert_eq!(pair[0].conventional_next_mask, pair[1].conventional_avail_mask);
        }
    }
}
