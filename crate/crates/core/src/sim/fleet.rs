//! Fleet inventories: vehicles, swappable modules, recovery timers, and
//! reconfiguration planning for the modular fleet.

use crate::error::{Error, Result};
use crate::record::FleetKind;

/// What a module contributes. Weapons carry firepower, cargo modules carry
/// capacity, chassis carry neither but every vehicle needs exactly one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModuleKind {
    Weapon,
    Cargo,
    Chassis,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModuleStatus {
    Ready,
    InProcess,
    Recovering,
}

/// A single swappable module.
#[derive(Debug, Clone, PartialEq)]
pub struct ModuleUnit {
    pub kind: ModuleKind,
    pub firepower: f64,
    pub capacity: f64,
    pub status: ModuleStatus,
    pub recovery_remaining: f64,
}

impl ModuleUnit {
    pub fn weapon(firepower: f64) -> Self {
        ModuleUnit {
            kind: ModuleKind::Weapon,
            firepower,
            capacity: 0.0,
            status: ModuleStatus::Ready,
            recovery_remaining: 0.0,
        }
    }

    pub fn cargo(capacity: f64) -> Self {
        ModuleUnit {
            kind: ModuleKind::Cargo,
            firepower: 0.0,
            capacity,
            status: ModuleStatus::Ready,
            recovery_remaining: 0.0,
        }
    }

    pub fn chassis() -> Self {
        ModuleUnit {
            kind: ModuleKind::Chassis,
            firepower: 0.0,
            capacity: 0.0,
            status: ModuleStatus::Ready,
            recovery_remaining: 0.0,
        }
    }

    fn start_recovery(&mut self, hours: f64) {
        self.status = ModuleStatus::Recovering;
        self.recovery_remaining = hours;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VehicleStatus {
    Ready,
    Dispatched,
    Damaged,
    Recovering,
}

/// Fixed vehicle types of the conventional fleet.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConventionalType {
    GunTruck,
    Transport,
}

#[derive(Debug, Clone, PartialEq)]
pub enum VehicleBody {
    /// Built from swappable modules; one of them is the chassis.
    Modular { modules: Vec<ModuleUnit> },
    /// Fixed composition for the campaign.
    Conventional { type_tag: ConventionalType, firepower: f64, capacity: f64 },
}

pub type VehicleId = u32;

#[derive(Debug, Clone, PartialEq)]
pub struct Vehicle {
    pub id: VehicleId,
    pub body: VehicleBody,
    pub status: VehicleStatus,
    pub recovery_remaining: f64,
}

impl Vehicle {
    pub fn firepower(&self) -> f64 {
        match &self.body {
            VehicleBody::Modular { modules } => modules.iter().map(|m| m.firepower).sum(),
            VehicleBody::Conventional { firepower, .. } => *firepower,
        }
    }

    pub fn capacity(&self) -> f64 {
        match &self.body {
            VehicleBody::Modular { modules } => modules.iter().map(|m| m.capacity).sum(),
            VehicleBody::Conventional { capacity, .. } => *capacity,
        }
    }

    pub fn is_ready(&self) -> bool {
        self.status == VehicleStatus::Ready
    }

    /// Counts of attribute modules installed (modular bodies only).
    pub fn composition(&self) -> Composition {
        match &self.body {
            VehicleBody::Modular { modules } => Composition {
                weapons: modules.iter().filter(|m| m.kind == ModuleKind::Weapon).count() as u8,
                cargos: modules.iter().filter(|m| m.kind == ModuleKind::Cargo).count() as u8,
            },
            VehicleBody::Conventional { .. } => Composition { weapons: 0, cargos: 0 },
        }
    }
}

/// Attribute-module counts describing a modular vehicle type. The chassis
/// is implicit: every vehicle has exactly one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Composition {
    pub weapons: u8,
    pub cargos: u8,
}

impl Composition {
    pub fn module_count(self) -> u8 {
        self.weapons + self.cargos
    }
}

/// Multiset census of modules by kind, used to check conservation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModuleCensus {
    pub weapons: usize,
    pub cargos: usize,
    pub chassis: usize,
}

/// Hour costs of ADR actions and recovery.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct DowntimeConfig {
    pub assembly_hours: f64,
    pub disassembly_hours: f64,
    pub recovery_hours: f64,
}

impl Default for DowntimeConfig {
    fn default() -> Self {
        DowntimeConfig { assembly_hours: 1.0, disassembly_hours: 0.5, recovery_hours: 10.0 }
    }
}

/// One fleet's full inventory.
#[derive(Debug, Clone, PartialEq)]
pub struct FleetState {
    pub kind: FleetKind,
    pub vehicles: Vec<Vehicle>,
    /// Uninstalled modules (modular fleet only), ready or recovering.
    pub spare_modules: Vec<ModuleUnit>,
    /// Campaign clock in hours.
    pub clock: f64,
    next_vehicle_id: VehicleId,
}

impl FleetState {
    pub fn new_conventional(gun_trucks: &[(f64, f64)], transports: &[(f64, f64)]) -> Self {
        let mut vehicles = Vec::new();
        let mut id = 0;
        for &(fp, cap) in gun_trucks {
            vehicles.push(Vehicle {
                id,
                body: VehicleBody::Conventional { type_tag: ConventionalType::GunTruck, firepower: fp, capacity: cap },
                status: VehicleStatus::Ready,
                recovery_remaining: 0.0,
            });
            id += 1;
        }
        for &(fp, cap) in transports {
            vehicles.push(Vehicle {
                id,
                body: VehicleBody::Conventional { type_tag: ConventionalType::Transport, firepower: fp, capacity: cap },
                status: VehicleStatus::Ready,
                recovery_remaining: 0.0,
            });
            id += 1;
        }
        FleetState {
            kind: FleetKind::Conventional,
            vehicles,
            spare_modules: Vec::new(),
            clock: 0.0,
            next_vehicle_id: id,
        }
    }

    /// Build a modular fleet from a module pool. Modules are spread across
    /// chassis one per pass (weapon first when counts tie) until chassis
    /// slots or modules run out; leftover chassis and modules stay spare.
    pub fn new_modular(
        chassis_count: usize,
        weapon_firepowers: &[f64],
        cargo_capacities: &[f64],
        slots_per_chassis: u8,
    ) -> Self {
        let mut weapons: Vec<ModuleUnit> = weapon_firepowers.iter().map(|&f| ModuleUnit::weapon(f)).collect();
        let mut cargos: Vec<ModuleUnit> = cargo_capacities.iter().map(|&c| ModuleUnit::cargo(c)).collect();

        let vehicle_count = chassis_count.min(weapons.len() + cargos.len());
        let mut vehicles: Vec<Vehicle> = (0..vehicle_count)
            .map(|i| Vehicle {
                id: i as VehicleId,
                body: VehicleBody::Modular { modules: vec![ModuleUnit::chassis()] },
                status: VehicleStatus::Ready,
                recovery_remaining: 0.0,
            })
            .collect();

        let mut assigned = true;
        while assigned {
            assigned = false;
            for vehicle in &mut vehicles {
                let comp = vehicle.composition();
                if comp.module_count() >= slots_per_chassis {
                    continue;
                }
                let next = if weapons.len() >= cargos.len() { weapons.pop() } else { cargos.pop() };
                let Some(module) = next else { break };
                if let VehicleBody::Modular { modules } = &mut vehicle.body {
                    modules.push(module);
                }
                assigned = true;
            }
        }

        let mut spare_modules: Vec<ModuleUnit> =
            (vehicle_count..chassis_count).map(|_| ModuleUnit::chassis()).collect();
        spare_modules.append(&mut weapons);
        spare_modules.append(&mut cargos);

        FleetState {
            kind: FleetKind::Modular,
            vehicles,
            spare_modules,
            clock: 0.0,
            next_vehicle_id: vehicle_count as VehicleId,
        }
    }

    pub fn ready_vehicles(&self) -> impl Iterator<Item = &Vehicle> {
        self.vehicles.iter().filter(|v| v.is_ready())
    }

    pub fn vehicle_mut(&mut self, id: VehicleId) -> Option<&mut Vehicle> {
        self.vehicles.iter_mut().find(|v| v.id == id)
    }

    /// Count all modules owned by the fleet: installed, spare, recovering.
    pub fn module_census(&self) -> ModuleCensus {
        let mut census = ModuleCensus { weapons: 0, cargos: 0, chassis: 0 };
        let mut tally = |m: &ModuleUnit| match m.kind {
            ModuleKind::Weapon => census.weapons += 1,
            ModuleKind::Cargo => census.cargos += 1,
            ModuleKind::Chassis => census.chassis += 1,
        };
        for v in &self.vehicles {
            if let VehicleBody::Modular { modules } = &v.body {
                modules.iter().for_each(&mut tally);
            }
        }
        self.spare_modules.iter().for_each(&mut tally);
        census
    }

    /// Advance recovery timers by `dt` hours; anything reaching zero
    /// becomes ready again.
    pub fn step_recovery(&mut self, dt: f64) {
        debug_assert!(dt >= 0.0);
        for module in &mut self.spare_modules {
            if module.status == ModuleStatus::Recovering {
                module.recovery_remaining = (module.recovery_remaining - dt).max(0.0);
                if module.recovery_remaining == 0.0 {
                    module.status = ModuleStatus::Ready;
                }
            }
        }
        for vehicle in &mut self.vehicles {
            if vehicle.status == VehicleStatus::Recovering {
                vehicle.recovery_remaining = (vehicle.recovery_remaining - dt).max(0.0);
                if vehicle.recovery_remaining == 0.0 {
                    vehicle.status = VehicleStatus::Ready;
                }
            }
        }
    }

    /// Take a vehicle out of action after battle damage. A conventional
    /// vehicle recovers whole; a modular vehicle dissolves and each of its
    /// modules (chassis included) recovers separately in the spare pool.
    pub fn damage_vehicle(&mut self, id: VehicleId, recovery_hours: f64) {
        match self.kind {
            FleetKind::Conventional => {
                if let Some(v) = self.vehicle_mut(id) {
                    v.status = VehicleStatus::Recovering;
                    v.recovery_remaining = recovery_hours;
                }
            }
            FleetKind::Modular => {
                if let Some(pos) = self.vehicles.iter().position(|v| v.id == id) {
                    let vehicle = self.vehicles.remove(pos);
                    if let VehicleBody::Modular { modules } = vehicle.body {
                        for mut module in modules {
                            module.start_recovery(recovery_hours);
                            self.spare_modules.push(module);
                        }
                    }
                }
            }
        }
    }

    fn ready_spares(&self, kind: ModuleKind) -> usize {
        self.spare_modules
            .iter()
            .filter(|m| m.kind == kind && m.status == ModuleStatus::Ready)
            .count()
    }

    fn take_ready_spare(&mut self, kind: ModuleKind) -> Option<ModuleUnit> {
        let pos = self
            .spare_modules
            .iter()
            .position(|m| m.kind == kind && m.status == ModuleStatus::Ready)?;
        let mut module = self.spare_modules.remove(pos);
        module.status = ModuleStatus::InProcess;
        Some(module)
    }
}

/// One ADR step. Detaching frees a module into the spare pool; attaching
/// installs a ready spare. Commission/decommission move the chassis itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdrStep {
    Detach { vehicle: VehicleId, kind: ModuleKind },
    Attach { vehicle: VehicleId, kind: ModuleKind },
    /// Build a new vehicle around a spare chassis; costs one assembly.
    Commission { vehicle: VehicleId },
    /// Remove a bare vehicle, returning its chassis; costs one disassembly.
    Decommission { vehicle: VehicleId },
}

impl AdrStep {
    pub fn hours(&self, downtime: &DowntimeConfig) -> f64 {
        match self {
            AdrStep::Detach { .. } | AdrStep::Decommission { .. } => downtime.disassembly_hours,
            AdrStep::Attach { .. } | AdrStep::Commission { .. } => downtime.assembly_hours,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReconfigPlan {
    pub steps: Vec<AdrStep>,
    pub total_downtime: f64,
}

/// Plan the ADR steps that take a modular fleet's ready vehicles to the
/// target multiset of compositions. Pairs each target with the cheapest
/// current vehicle (ties to the lowest id); leftover vehicles are torn
/// down, leftover targets are commissioned from spare chassis. Detach
/// steps come before attach steps so the pool never goes negative.
pub fn reconfigure_plan(
    state: &FleetState,
    target: &[Composition],
    downtime: &DowntimeConfig,
) -> Result<ReconfigPlan> {
    if state.kind != FleetKind::Modular {
        return Err(Error::Unsupported(
            "reconfiguration is only defined for the modular fleet".into(),
        ));
    }

    let current: Vec<(VehicleId, Composition)> = state
        .vehicles
        .iter()
        .filter(|v| v.is_ready())
        .map(|v| (v.id, v.composition()))
        .collect();

    // Stable target order: big vehicles first so they grab the closest hulls.
    let mut targets: Vec<Composition> = target.to_vec();
    targets.sort_by(|a, b| b.cmp(a));

    let swap_cost = |from: Composition, to: Composition| -> (u8, u8) {
        let det = from.weapons.saturating_sub(to.weapons) + from.cargos.saturating_sub(to.cargos);
        let att = to.weapons.saturating_sub(from.weapons) + to.cargos.saturating_sub(from.cargos);
        (det, att)
    };

    let mut matched: Vec<(VehicleId, Composition, Composition)> = Vec::new();
    let mut unmatched_vehicles: Vec<(VehicleId, Composition)> = current.clone();
    let mut new_targets: Vec<Composition> = Vec::new();

    for &t in &targets {
        let best = unmatched_vehicles
            .iter()
            .enumerate()
            .min_by_key(|(_, (id, comp))| {
                let (det, att) = swap_cost(*comp, t);
                (det as u32 + att as u32, *id)
            })
            .map(|(pos, _)| pos);
        match best {
            Some(pos) => {
                let (id, comp) = unmatched_vehicles.remove(pos);
                matched.push((id, comp, t));
            }
            None => new_targets.push(t),
        }
    }

    let mut detach_steps = Vec::new();
    let mut attach_steps = Vec::new();
    let mut freed_weapons = 0usize;
    let mut freed_cargos = 0usize;
    let mut freed_chassis = 0usize;
    let mut need_weapons = 0usize;
    let mut need_cargos = 0usize;

    matched.sort_by_key(|(id, _, _)| *id);
    for &(id, from, to) in &matched {
        for _ in 0..from.weapons.saturating_sub(to.weapons) {
            detach_steps.push(AdrStep::Detach { vehicle: id, kind: ModuleKind::Weapon });
            freed_weapons += 1;
        }
        for _ in 0..from.cargos.saturating_sub(to.cargos) {
            detach_steps.push(AdrStep::Detach { vehicle: id, kind: ModuleKind::Cargo });
            freed_cargos += 1;
        }
        for _ in 0..to.weapons.saturating_sub(from.weapons) {
            attach_steps.push(AdrStep::Attach { vehicle: id, kind: ModuleKind::Weapon });
            need_weapons += 1;
        }
        for _ in 0..to.cargos.saturating_sub(from.cargos) {
            attach_steps.push(AdrStep::Attach { vehicle: id, kind: ModuleKind::Cargo });
            need_cargos += 1;
        }
    }

    for &(id, comp) in &unmatched_vehicles {
        for _ in 0..comp.weapons {
            detach_steps.push(AdrStep::Detach { vehicle: id, kind: ModuleKind::Weapon });
            freed_weapons += 1;
        }
        for _ in 0..comp.cargos {
            detach_steps.push(AdrStep::Detach { vehicle: id, kind: ModuleKind::Cargo });
            freed_cargos += 1;
        }
        detach_steps.push(AdrStep::Decommission { vehicle: id });
        freed_chassis += 1;
    }

    let mut next_id = state.next_vehicle_id;
    for &t in &new_targets {
        let id = next_id;
        next_id += 1;
        attach_steps.push(AdrStep::Commission { vehicle: id });
        for _ in 0..t.weapons {
            attach_steps.push(AdrStep::Attach { vehicle: id, kind: ModuleKind::Weapon });
            need_weapons += 1;
        }
        for _ in 0..t.cargos {
            attach_steps.push(AdrStep::Attach { vehicle: id, kind: ModuleKind::Cargo });
            need_cargos += 1;
        }
    }

    let have_weapons = state.ready_spares(ModuleKind::Weapon) + freed_weapons;
    let have_cargos = state.ready_spares(ModuleKind::Cargo) + freed_cargos;
    let have_chassis = state.ready_spares(ModuleKind::Chassis) + freed_chassis;
    if need_weapons > have_weapons || need_cargos > have_cargos || new_targets.len() > have_chassis {
        return Err(Error::InfeasiblePlan(format!(
            "target needs {need_weapons} weapons / {need_cargos} cargos / {} chassis, \
             pool offers {have_weapons} / {have_cargos} / {have_chassis}",
            new_targets.len()
        )));
    }

    let mut steps = detach_steps;
    steps.extend(attach_steps);
    let total_downtime = steps.iter().map(|s| s.hours(downtime)).sum();
    Ok(ReconfigPlan { steps, total_downtime })
}

/// Execute as many whole plan steps as fit in `budget_hours`, in order.
/// Returns the hours actually spent.
pub fn execute_plan(
    state: &mut FleetState,
    plan: &ReconfigPlan,
    downtime: &DowntimeConfig,
    budget_hours: f64,
) -> f64 {
    let mut spent = 0.0;
    for step in &plan.steps {
        let cost = step.hours(downtime);
        if spent + cost > budget_hours + 1e-9 {
            break;
        }
        match *step {
            AdrStep::Detach { vehicle, kind } => {
                if let Some(v) = state.vehicle_mut(vehicle) {
                    if let VehicleBody::Modular { modules } = &mut v.body {
                        if let Some(pos) = modules.iter().position(|m| m.kind == kind) {
                            let mut module = modules.remove(pos);
                            module.status = ModuleStatus::Ready;
                            state.spare_modules.push(module);
                        }
                    }
                }
            }
            AdrStep::Attach { vehicle, kind } => {
                if let Some(mut module) = state.take_ready_spare(kind) {
                    if let Some(v) = state.vehicle_mut(vehicle) {
                        if let VehicleBody::Modular { modules } = &mut v.body {
                            module.status = ModuleStatus::Ready;
                            modules.push(module);
                        }
                    } else {
                        module.status = ModuleStatus::Ready;
                        state.spare_modules.push(module);
                    }
                }
            }
            AdrStep::Commission { vehicle } => {
                if let Some(mut chassis) = state.take_ready_spare(ModuleKind::Chassis) {
                    chassis.status = ModuleStatus::Ready;
                    state.vehicles.push(Vehicle {
                        id: vehicle,
                        body: VehicleBody::Modular { modules: vec![chassis] },
                        status: VehicleStatus::Ready,
                        recovery_remaining: 0.0,
                    });
                    state.next_vehicle_id = state.next_vehicle_id.max(vehicle + 1);
                }
            }
            AdrStep::Decommission { vehicle } => {
                if let Some(pos) = state.vehicles.iter().position(|v| v.id == vehicle) {
                    let v = state.vehicles.remove(pos);
                    if let VehicleBody::Modular { modules } = v.body {
                        for mut module in modules {
                            module.status = ModuleStatus::Ready;
                            state.spare_modules.push(module);
                        }
                    }
                }
            }
        }
        spent += cost;
    }
    spent
}

/// Default base-agent target: keep every current vehicle as is, then spread
/// ready spare attribute modules over free slots (existing vehicles first,
/// then fresh chassis), one module per vehicle per pass.
pub fn default_reconfiguration_target(state: &FleetState, slots_per_chassis: u8) -> Vec<Composition> {
    let mut targets: Vec<Composition> = state
        .vehicles
        .iter()
        .filter(|v| v.is_ready())
        .map(|v| v.composition())
        .collect();

    let mut spare_weapons = state.ready_spares(ModuleKind::Weapon);
    let mut spare_cargos = state.ready_spares(ModuleKind::Cargo);
    let spare_chassis = state.ready_spares(ModuleKind::Chassis);

    let existing = targets.len();
    targets.extend(std::iter::repeat(Composition { weapons: 0, cargos: 0 }).take(spare_chassis));

    let mut assigned = true;
    while assigned && spare_weapons + spare_cargos > 0 {
        assigned = false;
        for t in targets.iter_mut() {
            if spare_weapons + spare_cargos == 0 {
                break;
            }
            if t.module_count() >= slots_per_chassis {
                continue;
            }
            if spare_weapons >= spare_cargos && spare_weapons > 0 {
                t.weapons += 1;
                spare_weapons -= 1;
            } else if spare_cargos > 0 {
                t.cargos += 1;
                spare_cargos -= 1;
            }
            assigned = true;
        }
    }

    // A commissioned chassis with nothing on it adds no capability.
    let mut result: Vec<Composition> = targets[..existing].to_vec();
    result.extend(targets[existing..].iter().copied().filter(|t| t.module_count() > 0));
    result
}

#[cfg(test)]
mod tests {
    use super::*;

    fn modular_fixture() -> FleetState {
        FleetState::new_modular(4, &[4.0, 4.0], &[4.0, 4.0], 2)
    }

    #[test]
    fn modular_vehicle_attributes_sum_modules() {
        let state = modular_fixture();
        assert_eq!(state.vehicles.len(), 4);
        let total_fp: f64 = state.vehicles.iter().map(|v| v.firepower()).sum();
        let total_cap: f64 = state.vehicles.iter().map(|v| v.capacity()).sum();
        assert_eq!(total_fp, 8.0);
        assert_eq!(total_cap, 8.0);
        assert_eq!(state.module_census(), ModuleCensus { weapons: 2, cargos: 2, chassis: 4 });
    }

    #[test]
    fn recovery_counts_down_and_releases() {
        let mut state = modular_fixture();
        state.damage_vehicle(0, 10.0);
        assert_eq!(state.vehicles.len(), 3);
        let recovering = state
            .spare_modules
            .iter()
            .filter(|m| m.status == ModuleStatus::Recovering)
            .count();
        assert_eq!(recovering, 2); // chassis + one attribute module

        state.step_recovery(0.0);
        assert!(state.spare_modules.iter().any(|m| m.status == ModuleStatus::Recovering));
        state.step_recovery(4.0);
        state.step_recovery(6.0);
        assert!(state.spare_modules.iter().all(|m| m.status == ModuleStatus::Ready));
        // census unchanged through damage + recovery
        assert_eq!(state.module_census(), ModuleCensus { weapons: 2, cargos: 2, chassis: 4 });
    }

    #[test]
    fn conventional_vehicle_recovers_whole() {
        let mut state = FleetState::new_conventional(&[(4.0, 0.0)], &[(0.0, 4.0)]);
        state.damage_vehicle(0, 10.0);
        assert_eq!(state.vehicles.len(), 2);
        assert_eq!(state.vehicles[0].status, VehicleStatus::Recovering);
        state.step_recovery(10.0);
        assert_eq!(state.vehicles[0].status, VehicleStatus::Ready);
    }

    #[test]
    fn identity_target_is_free() {
        let state = modular_fixture();
        let target: Vec<Composition> =
            state.vehicles.iter().map(|v| v.composition()).collect();
        let plan = reconfigure_plan(&state, &target, &DowntimeConfig::default()).unwrap();
        assert!(plan.steps.is_empty());
        assert_eq!(plan.total_downtime, 0.0);
    }

    #[test]
    fn single_swap_costs_one_and_a_half_hours() {
        // Two vehicles: one with a weapon, one with a cargo module. Swap the
        // cargo vehicle to a weapon vehicle using a spare weapon.
        let mut state = FleetState::new_modular(2, &[4.0], &[4.0], 2);
        state.spare_modules.push(ModuleUnit::weapon(4.0));
        let target = vec![
            Composition { weapons: 1, cargos: 0 },
            Composition { weapons: 1, cargos: 0 },
        ];
        let plan = reconfigure_plan(&state, &target, &DowntimeConfig::default()).unwrap();
        assert_eq!(plan.total_downtime, 1.5);
        assert_eq!(plan.steps.len(), 2);
    }

    #[test]
    fn three_vehicles_two_swaps_each_cost_nine_hours() {
        let mut state = FleetState::new_modular(3, &[4.0, 4.0, 4.0, 4.0, 4.0, 4.0], &[], 2);
        // all three vehicles carry 2 weapons; swap both modules on each
        state.spare_modules.extend((0..6).map(|_| ModuleUnit::cargo(4.0)));
        let target = vec![Composition { weapons: 0, cargos: 2 }; 3];
        let plan = reconfigure_plan(&state, &target, &DowntimeConfig::default()).unwrap();
        assert_eq!(plan.total_downtime, 9.0);
    }

    #[test]
    fn plan_execution_conserves_modules() {
        let mut state = modular_fixture();
        state.damage_vehicle(1, 10.0);
        state.step_recovery(10.0);
        let before = state.module_census();
        let target = default_reconfiguration_target(&state, 2);
        let plan = reconfigure_plan(&state, &target, &DowntimeConfig::default()).unwrap();
        execute_plan(&mut state, &plan, &DowntimeConfig::default(), f64::INFINITY);
        assert_eq!(state.module_census(), before);
        // everything re-deployed: no ready attribute modules left spare
        assert_eq!(state.ready_spares(ModuleKind::Weapon), 0);
        assert_eq!(state.ready_spares(ModuleKind::Cargo), 0);
    }

    #[test]
    fn unachievable_target_is_rejected() {
        let state = modular_fixture();
        let target = vec![Composition { weapons: 5, cargos: 0 }];
        let err = reconfigure_plan(&state, &target, &DowntimeConfig::default()).unwrap_err();
        assert!(matches!(err, Error::InfeasiblePlan(_)));
    }

    #[test]
    fn conventional_fleet_cannot_reconfigure() {
        let state = FleetState::new_conventional(&[(4.0, 0.0)], &[]);
        let err = reconfigure_plan(&state, &[], &DowntimeConfig::default()).unwrap_err();
        assert!(matches!(err, Error::Unsupported(_)));
    }

    #[test]
    fn budget_cuts_plan_execution() {
        let mut state = FleetState::new_modular(2, &[4.0], &[4.0], 2);
        state.spare_modules.push(ModuleUnit::weapon(4.0));
        let target = vec![
            Composition { weapons: 1, cargos: 0 },
            Composition { weapons: 1, cargos: 0 },
        ];
        let plan = reconfigure_plan(&state, &target, &DowntimeConfig::default()).unwrap();
        // 0.5 budget: only the detach fits
        let spent = execute_plan(&mut state, &plan, &DowntimeConfig::default(), 0.5);
        assert_eq!(spent, 0.5);
        let census = state.module_census();
        assert_eq!(census, ModuleCensus { weapons: 2, cargos: 1, chassis: 2 });
    }
}
