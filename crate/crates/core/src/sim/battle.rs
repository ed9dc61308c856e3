//! Engagement mechanics: demand generation, convoy assembly against a
//! strategy band, stochastic damage, and strategy availability.

use rand::Rng;
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};
use crate::record::{Role, StrategyMask};
use crate::sim::fleet::{FleetState, Vehicle, VehicleId};
use crate::strategy::{attack_band, defense_bands, SafetyBand, STRATEGY_COUNT};

/// Requirements a demand places on the defender's delivery.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Demand {
    pub firepower_req: f64,
    pub capacity_req: f64,
}

/// Uniform sampling ranges for demand requirements.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct DemandRanges {
    pub firepower_min: f64,
    pub firepower_max: f64,
    pub capacity_min: f64,
    pub capacity_max: f64,
}

impl Default for DemandRanges {
    fn default() -> Self {
        DemandRanges { firepower_min: 3.0, firepower_max: 9.0, capacity_min: 3.0, capacity_max: 9.0 }
    }
}

impl DemandRanges {
    pub fn validate(&self) -> Result<()> {
        for (name, lo, hi) in [
            ("firepower", self.firepower_min, self.firepower_max),
            ("capacity", self.capacity_min, self.capacity_max),
        ] {
            if !(lo.is_finite() && hi.is_finite()) || lo <= 0.0 {
                return Err(Error::config(format!(
                    "demand {name} range must be finite and positive, got [{lo}, {hi}]"
                )));
            }
            if lo > hi {
                return Err(Error::config(format!(
                    "demand {name} range is inverted: [{lo}, {hi}]"
                )));
            }
        }
        Ok(())
    }
}

/// Draw a demand uniformly from the configured ranges.
pub fn generate_demand(rng: &mut ChaCha12Rng, ranges: &DemandRanges) -> Result<Demand> {
    ranges.validate()?;
    let firepower_req = rng.random_range(ranges.firepower_min..=ranges.firepower_max);
    let capacity_req = rng.random_range(ranges.capacity_min..=ranges.capacity_max);
    Ok(Demand { firepower_req, capacity_req })
}

/// The vehicles a fleet commits to one engagement.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Convoy {
    pub vehicle_ids: Vec<VehicleId>,
    pub total_firepower: f64,
    pub total_capacity: f64,
}

impl Convoy {
    fn from_vehicles(vehicles: &[&Vehicle]) -> Convoy {
        Convoy {
            vehicle_ids: vehicles.iter().map(|v| v.id).collect(),
            total_firepower: vehicles.iter().map(|v| v.firepower()).sum(),
            total_capacity: vehicles.iter().map(|v| v.capacity()).sum(),
        }
    }
}

/// Half-open attribute window: lower bound scaled from the band, upper
/// bound likewise (may be infinite).
#[derive(Debug, Clone, Copy)]
struct Window {
    lo: f64,
    hi: f64,
}

impl Window {
    fn scaled(band: SafetyBand, req: f64) -> Window {
        Window { lo: band.lo * req, hi: band.hi * req }
    }

    fn unconstrained() -> Window {
        Window { lo: 0.0, hi: f64::INFINITY }
    }

    fn contains(&self, x: f64) -> bool {
        self.lo <= x && x < self.hi
    }
}

/// Beyond this many ready vehicles the exact subset fallback is skipped and
/// the greedy verdict stands.
const EXACT_SEARCH_LIMIT: usize = 20;

/// Build a convoy whose safety levels land inside the strategy's band(s):
/// the firepower band alone for an attacker, both bands for a defender.
/// Returns `None` when no subset of ready vehicles achieves the band.
///
/// Selection is deterministic: a greedy pass (largest attribute first,
/// fill to the lower bound, then verify the upper bound), with an
/// exhaustive subset fallback at desk-scale inventories when the greedy
/// overshoots.
pub fn assemble_convoy(
    state: &FleetState,
    role: Role,
    strategy_index: u8,
    demand: &Demand,
) -> Result<Option<Convoy>> {
    let (fp_window, cap_window) = match role {
        Role::Attacker => {
            let band = attack_band(strategy_index)?;
            (Window::scaled(band, demand.firepower_req), Window::unconstrained())
        }
        Role::Defender => {
            let (fp_band, cap_band) = defense_bands(strategy_index)?;
            (
                Window::scaled(fp_band, demand.firepower_req),
                Window::scaled(cap_band, demand.capacity_req),
            )
        }
    };

    // Deterministic vehicle order: biggest combined attributes first,
    // vehicle id breaking ties.
    let mut ready: Vec<&Vehicle> = state.ready_vehicles().collect();
    ready.sort_by(|a, b| {
        let ka = a.firepower() + a.capacity();
        let kb = b.firepower() + b.capacity();
        kb.partial_cmp(&ka).unwrap().then(a.id.cmp(&b.id))
    });

    if let Some(picked) = greedy_fill(&ready, fp_window, cap_window) {
        return Ok(Some(Convoy::from_vehicles(&picked)));
    }
    if ready.len() > EXACT_SEARCH_LIMIT {
        return Ok(None);
    }
    let attrs: Vec<(f64, f64)> = ready.iter().map(|v| (v.firepower(), v.capacity())).collect();
    match subset_search(&attrs, fp_window, cap_window) {
        Some(indices) => {
            let chosen: Vec<&Vehicle> = indices.into_iter().map(|i| ready[i]).collect();
            Ok(Some(Convoy::from_vehicles(&chosen)))
        }
        None => Ok(None),
    }
}

/// Greedy pass: meet the firepower lower bound with the biggest guns, then
/// the capacity lower bound with the biggest haulers, then verify both
/// upper bounds.
fn greedy_fill<'a>(
    ready: &[&'a Vehicle],
    fp_window: Window,
    cap_window: Window,
) -> Option<Vec<&'a Vehicle>> {
    let mut by_fp: Vec<&Vehicle> = ready.to_vec();
    by_fp.sort_by(|a, b| {
        b.firepower().partial_cmp(&a.firepower()).unwrap().then(a.id.cmp(&b.id))
    });

    let mut picked: Vec<&Vehicle> = Vec::new();
    let mut total_fp = 0.0;
    let mut total_cap = 0.0;
    for v in &by_fp {
        if total_fp >= fp_window.lo {
            break;
        }
        picked.push(v);
        total_fp += v.firepower();
        total_cap += v.capacity();
    }

    if cap_window.lo > 0.0 {
        let mut by_cap: Vec<&Vehicle> = by_fp
            .iter()
            .filter(|v| !picked.iter().any(|p| p.id == v.id))
            .copied()
            .collect();
        by_cap.sort_by(|a, b| {
            b.capacity().partial_cmp(&a.capacity()).unwrap().then(a.id.cmp(&b.id))
        });
        for v in &by_cap {
            if total_cap >= cap_window.lo {
                break;
            }
            picked.push(v);
            total_fp += v.firepower();
            total_cap += v.capacity();
        }
    }

    if fp_window.contains(total_fp) && cap_window.contains(total_cap) {
        Some(picked)
    } else {
        None
    }
}

/// Depth-first search over subsets of the (sorted) vehicle list, pruned by
/// upper bounds and by the best-case remaining sums. Include branches are
/// explored before exclude branches, so the first hit is deterministic.
fn subset_search(attrs: &[(f64, f64)], fp_window: Window, cap_window: Window) -> Option<Vec<usize>> {
    // Suffix sums bound what the remaining vehicles could still add.
    let n = attrs.len();
    let mut suffix_fp = vec![0.0; n + 1];
    let mut suffix_cap = vec![0.0; n + 1];
    for i in (0..n).rev() {
        suffix_fp[i] = suffix_fp[i + 1] + attrs[i].0;
        suffix_cap[i] = suffix_cap[i + 1] + attrs[i].1;
    }

    fn recurse(
        attrs: &[(f64, f64)],
        suffix_fp: &[f64],
        suffix_cap: &[f64],
        fp_window: Window,
        cap_window: Window,
        idx: usize,
        fp: f64,
        cap: f64,
        chosen: &mut Vec<usize>,
    ) -> bool {
        if fp_window.contains(fp) && cap_window.contains(cap) {
            return true;
        }
        if idx == attrs.len() {
            return false;
        }
        // Already past an upper bound: adding more cannot help.
        if fp >= fp_window.hi || cap >= cap_window.hi {
            return false;
        }
        // Even taking everything left cannot reach a lower bound.
        if fp + suffix_fp[idx] < fp_window.lo || cap + suffix_cap[idx] < cap_window.lo {
            return false;
        }
        chosen.push(idx);
        if recurse(
            attrs, suffix_fp, suffix_cap, fp_window, cap_window,
            idx + 1, fp + attrs[idx].0, cap + attrs[idx].1, chosen,
        ) {
            return true;
        }
        chosen.pop();
        recurse(attrs, suffix_fp, suffix_cap, fp_window, cap_window, idx + 1, fp, cap, chosen)
    }

    let mut chosen = Vec::new();
    if recurse(attrs, &suffix_fp, &suffix_cap, fp_window, cap_window, 0, 0.0, 0.0, &mut chosen) {
        Some(chosen)
    } else {
        None
    }
}

/// Per-vehicle damage law constants.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct DamageConfig {
    /// Multiplier on the opposing/own firepower ratio.
    pub coefficient: f64,
    /// Probability ceiling.
    pub cap: f64,
}

impl Default for DamageConfig {
    fn default() -> Self {
        DamageConfig { coefficient: 0.3, cap: 0.9 }
    }
}

const OWN_FIREPOWER_FLOOR: f64 = 1e-6;

impl DamageConfig {
    /// `min(cap, coefficient * opposing / max(own, 1e-6))`
    pub fn vehicle_damage_probability(&self, own_firepower: f64, opposing_firepower: f64) -> f64 {
        let ratio = opposing_firepower / own_firepower.max(OWN_FIREPOWER_FLOOR);
        (self.coefficient * ratio).min(self.cap)
    }
}

/// Result of one confrontation. Exactly one side wins.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfrontationOutcome {
    pub defender_won: bool,
    pub damaged_defender: Vec<VehicleId>,
    pub damaged_attacker: Vec<VehicleId>,
}

/// Resolve a confrontation: every vehicle on each side is independently
/// damaged with a probability driven by the convoy firepower ratio; the
/// defender wins iff its surviving attributes still meet the demand.
/// Damage draws happen defender convoy first, then attacker, in convoy
/// order.
pub fn resolve_confrontation(
    defender_state: &FleetState,
    defender: &Convoy,
    attacker: &Convoy,
    demand: &Demand,
    damage: &DamageConfig,
    rng: &mut ChaCha12Rng,
) -> ConfrontationOutcome {
    let p_defender =
        damage.vehicle_damage_probability(defender.total_firepower, attacker.total_firepower);
    let p_attacker =
        damage.vehicle_damage_probability(attacker.total_firepower, defender.total_firepower);

    let mut damaged_defender = Vec::new();
    let mut surviving_fp = 0.0;
    let mut surviving_cap = 0.0;
    for &id in &defender.vehicle_ids {
        let vehicle = defender_state
            .vehicles
            .iter()
            .find(|v| v.id == id)
            .expect("convoy vehicle present in fleet");
        if rng.random::<f64>() < p_defender {
            damaged_defender.push(id);
        } else {
            surviving_fp += vehicle.firepower();
            surviving_cap += vehicle.capacity();
        }
    }

    let mut damaged_attacker = Vec::new();
    for &id in &attacker.vehicle_ids {
        if rng.random::<f64>() < p_attacker {
            damaged_attacker.push(id);
        }
    }

    let defender_won =
        surviving_fp >= demand.firepower_req && surviving_cap >= demand.capacity_req;
    ConfrontationOutcome { defender_won, damaged_defender, damaged_attacker }
}

/// Bit i is set iff a convoy for strategy i can be assembled right now.
/// Strategy 1 is always available for both roles: its bands start at zero,
/// so the empty (give-up / token) convoy qualifies.
pub fn availability_mask(state: &FleetState, role: Role, demand: &Demand) -> StrategyMask {
    let mut mask = StrategyMask::EMPTY;
    for index in 1..=STRATEGY_COUNT as u8 {
        if let Ok(Some(_)) = assemble_convoy(state, role, index, demand) {
            mask.insert(index);
        }
    }
    mask
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn rng(seed: u64) -> ChaCha12Rng {
        ChaCha12Rng::seed_from_u64(seed)
    }

    fn gun_fleet(firepowers: &[f64]) -> FleetState {
        let trucks: Vec<(f64, f64)> = firepowers.iter().map(|&f| (f, 0.0)).collect();
        FleetState::new_conventional(&trucks, &[])
    }

    #[test]
    fn degenerate_range_forces_demand() {
        let ranges = DemandRanges {
            firepower_min: 10.0,
            firepower_max: 10.0,
            capacity_min: 5.0,
            capacity_max: 5.0,
        };
        let d = generate_demand(&mut rng(1), &ranges).unwrap();
        assert_eq!(d.firepower_req, 10.0);
        assert_eq!(d.capacity_req, 5.0);
    }

    #[test]
    fn demand_is_deterministic_per_seed() {
        let ranges = DemandRanges::default();
        let a = generate_demand(&mut rng(9), &ranges).unwrap();
        let b = generate_demand(&mut rng(9), &ranges).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn inverted_range_is_config_error() {
        let ranges = DemandRanges {
            firepower_min: 9.0,
            firepower_max: 3.0,
            ..DemandRanges::default()
        };
        assert!(generate_demand(&mut rng(1), &ranges).is_err());
    }

    #[test]
    fn demand_sample_mean_matches_uniform() {
        let ranges = DemandRanges {
            firepower_min: 5.0,
            firepower_max: 15.0,
            capacity_min: 5.0,
            capacity_max: 15.0,
        };
        let mut r = rng(77);
        let n = 10_000;
        let mean: f64 = (0..n)
            .map(|_| generate_demand(&mut r, &ranges).unwrap().firepower_req)
            .sum::<f64>()
            / n as f64;
        // U(5,15): sd = 10/sqrt(12); three standard errors around 10.
        let se = 10.0 / 12f64.sqrt() / (n as f64).sqrt();
        assert!((mean - 10.0).abs() < 3.0 * se, "mean = {mean}");
    }

    #[test]
    fn empty_inventory_only_fits_zero_lower_bound() {
        let state = gun_fleet(&[]);
        let demand = Demand { firepower_req: 4.0, capacity_req: 4.0 };
        // lo > 0: infeasible
        assert!(assemble_convoy(&state, Role::Attacker, 3, &demand).unwrap().is_none());
        // a1 band starts at zero: the empty token convoy works
        let token = assemble_convoy(&state, Role::Attacker, 1, &demand).unwrap().unwrap();
        assert!(token.vehicle_ids.is_empty());
    }

    #[test]
    fn defender_give_up_is_the_empty_convoy() {
        let state = gun_fleet(&[4.0]);
        let demand = Demand { firepower_req: 4.0, capacity_req: 4.0 };
        let convoy = assemble_convoy(&state, Role::Defender, 1, &demand).unwrap().unwrap();
        assert!(convoy.vehicle_ids.is_empty());
        assert_eq!(convoy.total_firepower, 0.0);
        assert_eq!(convoy.total_capacity, 0.0);
    }

    #[test]
    fn minimal_feasible_subset_is_selected() {
        let state = gun_fleet(&[4.0, 4.0, 4.0]);
        let demand = Demand { firepower_req: 4.0, capacity_req: 4.0 };
        // a3 band [1, 1.5): one vehicle gives safety exactly 1.0
        let convoy = assemble_convoy(&state, Role::Attacker, 3, &demand).unwrap().unwrap();
        assert_eq!(convoy.vehicle_ids.len(), 1);
        assert_eq!(convoy.total_firepower, 4.0);
    }

    #[test]
    fn subset_fallback_finds_what_greedy_misses() {
        // Greedy largest-first: 3 then +2 -> 5, safety 1.25 overshoots [1, 1.25).
        // The exact fallback finds {2, 2} (safety exactly 1.0).
        let state = gun_fleet(&[3.0, 2.0, 2.0]);
        let demand = Demand { firepower_req: 4.0, capacity_req: 1.0 };
        let band = SafetyBand::new(1.0, 1.25);
        let window = Window::scaled(band, demand.firepower_req);
        let ready: Vec<&Vehicle> = state.ready_vehicles().collect();
        assert!(greedy_fill(&ready, window, Window::unconstrained()).is_none());

        let attrs: Vec<(f64, f64)> = ready.iter().map(|v| (v.firepower(), v.capacity())).collect();
        let subset = subset_search(&attrs, window, Window::unconstrained()).unwrap();
        let total: f64 = subset.iter().map(|&i| attrs[i].0).sum();
        assert_eq!(total, 4.0);
    }

    #[test]
    fn attacker_mask_tracks_inventory_strength() {
        // Inventory sums to 12 against demand 10: safety 1.2 lies in a3.
        let state = gun_fleet(&[4.0, 4.0, 4.0]);
        let demand = Demand { firepower_req: 10.0, capacity_req: 1.0 };
        let mask = availability_mask(&state, Role::Attacker, &demand);
        assert_eq!(mask.to_string(), "1110000000");
    }

    #[test]
    fn abundant_inventory_sets_every_bit() {
        let trucks: Vec<(f64, f64)> = (0..10).map(|_| (5.0, 5.0)).collect();
        let state = FleetState::new_conventional(&trucks, &[]);
        let demand = Demand { firepower_req: 10.0, capacity_req: 10.0 };
        assert_eq!(availability_mask(&state, Role::Attacker, &demand), StrategyMask::ALL);
        assert_eq!(availability_mask(&state, Role::Defender, &demand), StrategyMask::ALL);
    }

    #[test]
    fn empty_inventory_defender_mask_is_give_up_only() {
        let state = gun_fleet(&[]);
        let demand = Demand { firepower_req: 4.0, capacity_req: 4.0 };
        let mask = availability_mask(&state, Role::Defender, &demand);
        assert_eq!(mask.to_string(), "1000000000");
    }

    #[test]
    fn damage_probability_follows_the_ratio_formula() {
        let damage = DamageConfig::default();
        assert_eq!(damage.vehicle_damage_probability(2.0, 3.0), 0.45);
        assert_eq!(damage.vehicle_damage_probability(1.0, 100.0), 0.9);
        assert_eq!(damage.vehicle_damage_probability(2.0, 0.0), 0.0);
        // more opposing firepower never lowers the probability
        let mut last = 0.0;
        for opposing in [0.0, 1.0, 2.0, 5.0, 50.0] {
            let p = damage.vehicle_damage_probability(3.0, opposing);
            assert!(p >= last);
            last = p;
        }
    }

    #[test]
    fn harmless_attacker_cannot_stop_a_sufficient_defender() {
        let defender_state = FleetState::new_conventional(&[(6.0, 6.0)], &[]);
        let attacker_state = gun_fleet(&[]);
        let demand = Demand { firepower_req: 5.0, capacity_req: 5.0 };
        let defender = assemble_convoy(&defender_state, Role::Defender, 2, &demand).unwrap().unwrap();
        let attacker = assemble_convoy(&attacker_state, Role::Attacker, 1, &demand).unwrap().unwrap();
        let _ = attacker_state;
        for seed in 0..20 {
            let outcome = resolve_confrontation(
                &defender_state, &defender, &attacker, &demand,
                &DamageConfig::default(), &mut rng(seed),
            );
            assert!(outcome.defender_won);
            assert!(outcome.damaged_defender.is_empty());
        }
    }

    #[test]
    fn empty_defender_convoy_loses() {
        let defender_state = gun_fleet(&[4.0]);
        let demand = Demand { firepower_req: 4.0, capacity_req: 4.0 };
        let defender = Convoy::default();
        let attacker = Convoy { vehicle_ids: vec![], total_firepower: 0.0, total_capacity: 0.0 };
        let outcome = resolve_confrontation(
            &defender_state, &defender, &attacker, &demand,
            &DamageConfig::default(), &mut rng(3),
        );
        assert!(!outcome.defender_won);
    }
}
