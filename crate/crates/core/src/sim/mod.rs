//! Desk-scale attacker-defender campaign simulator.

pub mod battle;
pub mod campaign;
pub mod config;
pub mod fleet;
pub mod policy;

pub use battle::{
    assemble_convoy, availability_mask, generate_demand, resolve_confrontation,
    ConfrontationOutcome, Convoy, DamageConfig, Demand, DemandRanges,
};
pub use campaign::{run_campaign, run_campaign_with_inspector};
pub use config::{parse_role_schedule, CampaignConfig, CampaignSection, ConventionalConfig, ModularConfig, RoleSchedule};
pub use fleet::{
    default_reconfiguration_target, execute_plan, reconfigure_plan, AdrStep, Composition,
    DowntimeConfig, FleetState, ModuleCensus, ModuleKind, ModuleStatus, ModuleUnit, ReconfigPlan,
    Vehicle, VehicleBody, VehicleId, VehicleStatus,
};
pub use policy::{infer_adversary, select_strategy, RunningPayoffs};
