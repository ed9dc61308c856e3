//! Fitting the game model from battle logs: single-stage payoff matrices,
//! availability classes, class transition tables, and the assembled
//! three-stage stochastic game with its tabular text format.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::record::{BattleRecord, Phase, Role, StrategyMask};
use crate::strategy::STRATEGY_COUNT;

pub type ClassId = usize;

/// An availability class: the pair of feasibility masks that defines which
/// 10x10 game is being played.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AvailabilityClass {
    pub id: ClassId,
    pub modular_mask: StrategyMask,
    pub conventional_mask: StrategyMask,
}

/// Interns mask pairs into dense class ids, first seen first numbered.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ClassRegistry {
    classes: Vec<AvailabilityClass>,
    index: HashMap<(u16, u16), ClassId>,
}

impl ClassRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn intern(&mut self, modular_mask: StrategyMask, conventional_mask: StrategyMask) -> ClassId {
        let key = (modular_mask.0, conventional_mask.0);
        if let Some(&id) = self.index.get(&key) {
            return id;
        }
        let id = self.classes.len();
        self.classes.push(AvailabilityClass { id, modular_mask, conventional_mask });
        self.index.insert(key, id);
        id
    }

    pub fn get(&self, id: ClassId) -> Option<&AvailabilityClass> {
        self.classes.get(id)
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &AvailabilityClass> {
        self.classes.iter()
    }
}

/// Provenance of a payoff cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellFlag {
    /// Estimated from at least one observed engagement.
    Supported,
    /// No observations; carries the uninformative (50, 50) fallback.
    NoData,
    /// Strategy pair not playable in this class; pinned to (0, 0).
    Unavailable,
}

impl CellFlag {
    pub fn token(self) -> &'static str {
        match self {
            CellFlag::Supported => "ok",
            CellFlag::NoData => "nodata",
            CellFlag::Unavailable => "unavail",
        }
    }

    pub fn from_token(token: &str) -> Result<CellFlag> {
        match token {
            "ok" => Ok(CellFlag::Supported),
            "nodata" => Ok(CellFlag::NoData),
            "unavail" => Ok(CellFlag::Unavailable),
            other => Err(Error::data(format!("unknown cell flag {other:?}"))),
        }
    }
}

/// One cell: the pair of payoffs (modular, conventional), the observation
/// count behind it, and its provenance flag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PayoffCell {
    pub modular: f64,
    pub conventional: f64,
    pub support: u32,
    pub flag: CellFlag,
}

impl PayoffCell {
    fn no_data() -> Self {
        PayoffCell { modular: 50.0, conventional: 50.0, support: 0, flag: CellFlag::NoData }
    }

    fn unavailable() -> Self {
        PayoffCell { modular: 0.0, conventional: 0.0, support: 0, flag: CellFlag::Unavailable }
    }
}

/// A 10x10 grid of payoff pairs; rows are modular strategies, columns
/// conventional strategies, both 1-based.
#[derive(Debug, Clone, PartialEq)]
pub struct PayoffMatrix {
    cells: Vec<PayoffCell>,
    /// True when the whole matrix was fabricated for an unpopulated class.
    pub fallback: bool,
}

impl PayoffMatrix {
    pub fn filled(cell: PayoffCell) -> Self {
        PayoffMatrix { cells: vec![cell; STRATEGY_COUNT * STRATEGY_COUNT], fallback: false }
    }

    /// Fallback matrix for a class nobody visited: available cells carry
    /// the flagged (50, 50) prior, unavailable cells stay (0, 0).
    pub fn class_fallback(class: &AvailabilityClass) -> Self {
        let mut matrix = PayoffMatrix::filled(PayoffCell::no_data());
        matrix.fallback = true;
        for i in 1..=STRATEGY_COUNT as u8 {
            for j in 1..=STRATEGY_COUNT as u8 {
                if !class.modular_mask.contains(i) || !class.conventional_mask.contains(j) {
                    *matrix.cell_mut(i, j) = PayoffCell::unavailable();
                }
            }
        }
        matrix
    }

    pub fn cell(&self, modular_strategy: u8, conventional_strategy: u8) -> &PayoffCell {
        &self.cells[Self::slot(modular_strategy, conventional_strategy)]
    }

    pub fn cell_mut(&mut self, modular_strategy: u8, conventional_strategy: u8) -> &mut PayoffCell {
        &mut self.cells[Self::slot(modular_strategy, conventional_strategy)]
    }

    fn slot(i: u8, j: u8) -> usize {
        debug_assert!((1..=STRATEGY_COUNT as u8).contains(&i));
        debug_assert!((1..=STRATEGY_COUNT as u8).contains(&j));
        (i as usize - 1) * STRATEGY_COUNT + (j as usize - 1)
    }

    pub fn total_support(&self) -> u32 {
        self.cells.iter().map(|c| c.support).sum()
    }

    /// Row player's (modular) payoffs as a dense array.
    pub fn modular_payoffs(&self) -> [[f64; STRATEGY_COUNT]; STRATEGY_COUNT] {
        let mut out = [[0.0; STRATEGY_COUNT]; STRATEGY_COUNT];
        for i in 0..STRATEGY_COUNT {
            for j in 0..STRATEGY_COUNT {
                out[i][j] = self.cells[i * STRATEGY_COUNT + j].modular;
            }
        }
        out
    }

    /// Column player's (conventional) payoffs as a dense array.
    pub fn conventional_payoffs(&self) -> [[f64; STRATEGY_COUNT]; STRATEGY_COUNT] {
        let mut out = [[0.0; STRATEGY_COUNT]; STRATEGY_COUNT];
        for i in 0..STRATEGY_COUNT {
            for j in 0..STRATEGY_COUNT {
                out[i][j] = self.cells[i * STRATEGY_COUNT + j].conventional;
            }
        }
        out
    }
}

/// Record filter for payoff estimation: the modular fleet's role, and
/// optionally an exact availability-class mask pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PayoffFilter {
    pub modular_role: Role,
    pub class: Option<(StrategyMask, StrategyMask)>,
}

fn matches_filter(record: &BattleRecord, filter: &PayoffFilter) -> bool {
    record.phase == Phase::Intelligent
        && record.modular_role == filter.modular_role
        && match filter.class {
            None => true,
            Some((m, c)) => {
                record.modular_avail_mask == m && record.conventional_avail_mask == c
            }
        }
}

/// Estimate the single-stage payoff matrix from intelligent-phase records
/// matching the filter. Cell (i, j) holds 100 * wins / count for the
/// modular fleet and the complement for the conventional fleet;
/// unobserved cells fall back to a flagged (50, 50), and cells outside the
/// class masks are pinned to a flagged (0, 0).
pub fn estimate_payoff_matrix(
    records: &[BattleRecord],
    filter: &PayoffFilter,
) -> Result<PayoffMatrix> {
    let mut counts = [[0u32; STRATEGY_COUNT]; STRATEGY_COUNT];
    let mut wins = [[0u32; STRATEGY_COUNT]; STRATEGY_COUNT];
    let mut matched = 0u32;
    for record in records.iter().filter(|r| matches_filter(r, filter)) {
        let i = record.modular_strategy as usize - 1;
        let j = record.conventional_strategy as usize - 1;
        counts[i][j] += 1;
        if record.modular_won {
            wins[i][j] += 1;
        }
        matched += 1;
    }
    if matched == 0 {
        return Err(Error::domain(
            "no records match the payoff filter; nothing to estimate".into(),
        ));
    }

    let mut matrix = PayoffMatrix::filled(PayoffCell::no_data());
    for i in 1..=STRATEGY_COUNT as u8 {
        for j in 1..=STRATEGY_COUNT as u8 {
            let unavailable = match filter.class {
                Some((m, c)) => !m.contains(i) || !c.contains(j),
                None => false,
            };
            let cell = matrix.cell_mut(i, j);
            if unavailable {
                *cell = PayoffCell::unavailable();
                continue;
            }
            let n = counts[i as usize - 1][j as usize - 1];
            if n > 0 {
                let w = wins[i as usize - 1][j as usize - 1];
                let modular = 100.0 * w as f64 / n as f64;
                *cell = PayoffCell {
                    modular,
                    conventional: 100.0 - modular,
                    support: n,
                    flag: CellFlag::Supported,
                };
            }
        }
    }
    Ok(matrix)
}

/// What the transition table knows about a conditional.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TransitionDist<'a> {
    /// Observed distribution over next classes; sums to one.
    Observed(&'a [(ClassId, f64)]),
    /// Never observed: fall back to staying in the same class.
    StayFallback,
}

/// Empirical p(next class | class, modular strategy, conventional
/// strategy), estimated from one stage's records.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TransitionTable {
    map: BTreeMap<(ClassId, u8, u8), Vec<(ClassId, f64)>>,
}

impl TransitionTable {
    pub fn distribution(&self, class: ClassId, i: u8, j: u8) -> TransitionDist<'_> {
        match self.map.get(&(class, i, j)) {
            Some(dist) => TransitionDist::Observed(dist),
            None => TransitionDist::StayFallback,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(ClassId, u8, u8), &Vec<(ClassId, f64)>)> {
        self.map.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// Classes reachable at the next stage from `from`, including the
    /// stay-fallback self loop for any playable-but-unseen profile.
    fn reachable_from(&self, from: &AvailabilityClass) -> Vec<ClassId> {
        let mut out = Vec::new();
        let mut any_unseen = false;
        for i in from.modular_mask.indices() {
            for j in from.conventional_mask.indices() {
                match self.distribution(from.id, i, j) {
                    TransitionDist::Observed(dist) => {
                        out.extend(dist.iter().map(|&(k, _)| k));
                    }
                    TransitionDist::StayFallback => any_unseen = true,
                }
            }
        }
        if any_unseen {
            out.push(from.id);
        }
        out.sort_unstable();
        out.dedup();
        out
    }
}

/// Estimate a transition table from records that carry next-stage masks,
/// interning every mask pair seen (current or next) into the registry.
pub fn estimate_transitions(
    records: &[BattleRecord],
    registry: &mut ClassRegistry,
) -> Result<TransitionTable> {
    if records.is_empty() {
        return Err(Error::domain("no records to estimate transitions from".into()));
    }
    let mut counts: BTreeMap<(ClassId, u8, u8), BTreeMap<ClassId, u32>> = BTreeMap::new();
    for record in records {
        let from = registry.intern(record.modular_avail_mask, record.conventional_avail_mask);
        let to = registry.intern(record.modular_next_mask, record.conventional_next_mask);
        *counts
            .entry((from, record.modular_strategy, record.conventional_strategy))
            .or_default()
            .entry(to)
            .or_default() += 1;
    }
    let mut map = BTreeMap::new();
    for (key, tos) in counts {
        let total: u32 = tos.values().sum();
        let dist: Vec<(ClassId, f64)> =
            tos.into_iter().map(|(k, n)| (k, n as f64 / total as f64)).collect();
        map.insert(key, dist);
    }
    Ok(TransitionTable { map })
}

/// Add expected continuation values onto a stage's per-class matrices.
/// Cell (i, j) of class k gains sum_k' p(k' | k, i, j) * continuation(k');
/// unavailable cells stay (0, 0).
pub fn propagate_stage_payoffs(
    stage_matrices: &BTreeMap<ClassId, PayoffMatrix>,
    transitions: &TransitionTable,
    continuation: &BTreeMap<ClassId, (f64, f64)>,
) -> Result<BTreeMap<ClassId, PayoffMatrix>> {
    let mut out = BTreeMap::new();
    for (&class, matrix) in stage_matrices {
        let mut propagated = matrix.clone();
        for i in 1..=STRATEGY_COUNT as u8 {
            for j in 1..=STRATEGY_COUNT as u8 {
                let cell = propagated.cell_mut(i, j);
                if cell.flag == CellFlag::Unavailable {
                    continue;
                }
                let (add_m, add_c) = match transitions.distribution(class, i, j) {
                    TransitionDist::Observed(dist) => {
                        let mut add = (0.0, 0.0);
                        for &(next, p) in dist {
                            let &(vm, vc) = continuation.get(&next).ok_or_else(|| {
                                Error::domain(format!(
                                    "no continuation value for reachable class {next}"
                                ))
                            })?;
                            add.0 += p * vm;
                            add.1 += p * vc;
                        }
                        add
                    }
                    TransitionDist::StayFallback => *continuation.get(&class).ok_or_else(|| {
                        Error::domain(format!(
                            "no continuation value for stay-fallback class {class}"
                        ))
                    })?,
                };
                cell.modular += add_m;
                cell.conventional += add_c;
            }
        }
        out.insert(class, propagated);
    }
    Ok(out)
}

/// The fitted multi-stage game: per-stage per-class matrices, per-stage
/// pooled matrices, and the stage-to-stage transition tables.
#[derive(Debug, Clone, PartialEq)]
pub struct StageGameTree {
    /// Number of stages actually present, 1..=3.
    pub horizon: u8,
    /// Modular fleet's role per stage (always 3 slots; extra slots unused
    /// when the horizon is shorter).
    pub role_schedule: [Role; 3],
    pub registry: ClassRegistry,
    /// `stage_matrices[t - 1][class]`.
    pub stage_matrices: Vec<BTreeMap<ClassId, PayoffMatrix>>,
    /// Pooled (class-blind) matrix per stage.
    pub pooled: Vec<PayoffMatrix>,
    /// `transitions[t - 1]` maps stage t to stage t + 1; length horizon - 1.
    pub transitions: Vec<TransitionTable>,
    /// Observed record count per (stage, class).
    pub stage_class_support: Vec<BTreeMap<ClassId, u32>>,
    /// Modal stage-1 class: the game the campaign most often starts in.
    pub initial_class: ClassId,
}

impl StageGameTree {
    pub fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.horizon) {
            return Err(Error::data(format!("horizon must be 1..3, got {}", self.horizon)));
        }
        let h = self.horizon as usize;
        if self.stage_matrices.len() != h || self.pooled.len() != h || self.transitions.len() + 1 != h
        {
            return Err(Error::data("stage game tree has inconsistent stage counts".into()));
        }
        for class in self.registry.iter() {
            if class.modular_mask.is_empty() || class.conventional_mask.is_empty() {
                return Err(Error::data(format!(
                    "class {} has an empty availability mask",
                    class.id
                )));
            }
        }
        if self.registry.get(self.initial_class).is_none() {
            return Err(Error::data(format!("initial class {} unknown", self.initial_class)));
        }
        // Every class reachable at stage t+1 must have a matrix there.
        for t in 0..h - 1 {
            for (&class, _) in &self.stage_matrices[t] {
                let from = self.registry.get(class).expect("interned");
                for next in self.transitions[t].reachable_from(from) {
                    if !self.stage_matrices[t + 1].contains_key(&next) {
                        return Err(Error::data(format!(
                            "class {next} reachable at stage {} has no payoff matrix",
                            t + 2
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Same game cut down to the first `horizon` stages.
    pub fn truncated(&self, horizon: u8) -> Result<StageGameTree> {
        if horizon == 0 || horizon > self.horizon {
            return Err(Error::domain(format!(
                "cannot truncate a {}-stage game to {horizon} stages",
                self.horizon
            )));
        }
        let h = horizon as usize;
        Ok(StageGameTree {
            horizon,
            role_schedule: self.role_schedule,
            registry: self.registry.clone(),
            stage_matrices: self.stage_matrices[..h].to_vec(),
            pooled: self.pooled[..h].to_vec(),
            transitions: self.transitions[..h - 1].to_vec(),
            stage_class_support: self.stage_class_support[..h].to_vec(),
            initial_class: self.initial_class,
        })
    }

    /// Modular fleet's role at a 1-based stage.
    pub fn role_at(&self, stage: u8) -> Role {
        self.role_schedule[(stage as usize - 1) % 3]
    }
}

/// Complete 3-engagement windows whose roles match the schedule: windows
/// start where `stage_in_window == 1`, run over consecutive engagement
/// indices, and must be fully intelligent-phase.
fn matching_windows<'a>(
    records: &'a [BattleRecord],
    schedule: [Role; 3],
) -> Vec<[&'a BattleRecord; 3]> {
    let mut windows = Vec::new();
    let mut i = 0;
    while i + 2 < records.len() {
        let w = [&records[i], &records[i + 1], &records[i + 2]];
        let consecutive = w[1].engagement_index == w[0].engagement_index + 1
            && w[2].engagement_index == w[0].engagement_index + 2;
        let staged = w[0].stage_in_window == 1
            && w[1].stage_in_window == 2
            && w[2].stage_in_window == 3;
        if !(consecutive && staged) {
            i += 1;
            continue;
        }
        let intelligent = w.iter().all(|r| r.phase == Phase::Intelligent);
        let roles_match = (0..3).all(|t| w[t].modular_role == schedule[t]);
        if intelligent && roles_match {
            windows.push(w);
        }
        i += 3;
    }
    windows
}

/// Build the three-stage game from a record stream under a fixed role
/// schedule for the modular fleet.
pub fn build_three_stage_game(
    records: &[BattleRecord],
    schedule: [Role; 3],
) -> Result<StageGameTree> {
    let windows = matching_windows(records, schedule);
    if windows.is_empty() {
        let letters: String = schedule.iter().map(|r| r.letter()).collect();
        return Err(Error::data(format!(
            "no complete intelligent-phase windows match role schedule {letters}; \
             simulate with --schedule {letters} or supply more data"
        )));
    }

    let mut registry = ClassRegistry::new();
    let mut stage_records: Vec<Vec<BattleRecord>> = vec![Vec::new(); 3];
    for w in &windows {
        for t in 0..3 {
            stage_records[t].push(w[t].clone());
        }
    }

    let mut stage_matrices = Vec::new();
    let mut pooled = Vec::new();
    let mut stage_class_support = Vec::new();
    let mut transitions = Vec::new();

    for t in 0..3 {
        let role = schedule[t];
        let recs = &stage_records[t];

        let mut support: BTreeMap<ClassId, u32> = BTreeMap::new();
        for r in recs {
            let k = registry.intern(r.modular_avail_mask, r.conventional_avail_mask);
            *support.entry(k).or_default() += 1;
        }

        let mut matrices = BTreeMap::new();
        for &k in support.keys() {
            let class = *registry.get(k).expect("interned");
            let filter = PayoffFilter {
                modular_role: role,
                class: Some((class.modular_mask, class.conventional_mask)),
            };
            matrices.insert(k, estimate_payoff_matrix(recs, &filter)?);
        }
        pooled.push(estimate_payoff_matrix(recs, &PayoffFilter { modular_role: role, class: None })?);
        stage_matrices.push(matrices);
        stage_class_support.push(support);

        if t < 2 {
            transitions.push(estimate_transitions(recs, &mut registry)?);
        }
    }

    // Any class reachable at stage t+1 but never observed there gets a
    // flagged fallback matrix so the solver always has a game to solve.
    for t in 0..2 {
        let from_classes: Vec<ClassId> = stage_matrices[t].keys().copied().collect();
        for class_id in from_classes {
            let from = *registry.get(class_id).expect("interned");
            for next in transitions[t].reachable_from(&from) {
                stage_matrices[t + 1].entry(next).or_insert_with(|| {
                    PayoffMatrix::class_fallback(registry.get(next).expect("interned"))
                });
            }
        }
    }

    let initial_class = stage_class_support[0]
        .iter()
        .max_by_key(|(&k, &n)| (n, std::cmp::Reverse(k)))
        .map(|(&k, _)| k)
        .expect("stage 1 has at least one window");

    let tree = StageGameTree {
        horizon: 3,
        role_schedule: schedule,
        registry,
        stage_matrices,
        pooled,
        transitions,
        stage_class_support,
        initial_class,
    };
    tree.validate()?;
    Ok(tree)
}

/// Serialize a stage game tree to its tabular text format: one `payoff`
/// line per cell plus `class`, `support`, `pooled`, and `transition`
/// lines. Floats use shortest round-trip formatting, so reloading
/// reproduces the tree exactly.
pub fn write_game_text(tree: &StageGameTree) -> String {
    let mut out = String::new();
    out.push_str("# stage game v1\n");
    let letters: String = tree.role_schedule.iter().map(|r| r.letter()).collect();
    writeln!(out, "horizon {}", tree.horizon).unwrap();
    writeln!(out, "schedule {letters}").unwrap();
    writeln!(out, "initial {}", tree.initial_class).unwrap();
    for class in tree.registry.iter() {
        writeln!(out, "class {} {} {}", class.id, class.modular_mask, class.conventional_mask)
            .unwrap();
    }
    for (t, support) in tree.stage_class_support.iter().enumerate() {
        for (class, n) in support {
            writeln!(out, "support {} {} {}", t + 1, class, n).unwrap();
        }
    }
    for (t, matrices) in tree.stage_matrices.iter().enumerate() {
        for (class, matrix) in matrices {
            writeln!(
                out,
                "matrix {} {} {}",
                t + 1,
                class,
                if matrix.fallback { "fallback" } else { "estimated" }
            )
            .unwrap();
            for i in 1..=STRATEGY_COUNT as u8 {
                for j in 1..=STRATEGY_COUNT as u8 {
                    let cell = matrix.cell(i, j);
                    writeln!(
                        out,
                        "payoff {} {} {} {} {} {} {} {}",
                        t + 1,
                        class,
                        i,
                        j,
                        cell.modular,
                        cell.conventional,
                        cell.support,
                        cell.flag.token()
                    )
                    .unwrap();
                }
            }
        }
    }
    for (t, matrix) in tree.pooled.iter().enumerate() {
        for i in 1..=STRATEGY_COUNT as u8 {
            for j in 1..=STRATEGY_COUNT as u8 {
                let cell = matrix.cell(i, j);
                writeln!(
                    out,
                    "pooled {} {} {} {} {} {} {}",
                    t + 1,
                    i,
                    j,
                    cell.modular,
                    cell.conventional,
                    cell.support,
                    cell.flag.token()
                )
                .unwrap();
            }
        }
    }
    for (t, table) in tree.transitions.iter().enumerate() {
        for (&(class, i, j), dist) in table.iter() {
            for &(next, p) in dist {
                writeln!(out, "transition {} {} {} {} {} {}", t + 1, class, i, j, next, p)
                    .unwrap();
            }
        }
    }
    out
}

/// Parse the tabular text format back into a stage game tree.
pub fn parse_game_text(text: &str) -> Result<StageGameTree> {
    let mut horizon: Option<u8> = None;
    let mut schedule: Option<[Role; 3]> = None;
    let mut initial: Option<ClassId> = None;
    let mut registry = ClassRegistry::new();
    let mut declared: BTreeMap<(usize, ClassId), bool> = BTreeMap::new();
    let mut payoffs: BTreeMap<(usize, ClassId), BTreeMap<(u8, u8), PayoffCell>> = BTreeMap::new();
    let mut pooled_cells: BTreeMap<usize, BTreeMap<(u8, u8), PayoffCell>> = BTreeMap::new();
    let mut supports: BTreeMap<usize, BTreeMap<ClassId, u32>> = BTreeMap::new();
    let mut transitions: BTreeMap<usize, BTreeMap<(ClassId, u8, u8), Vec<(ClassId, f64)>>> =
        BTreeMap::new();
    let mut class_lines: BTreeMap<ClassId, (StrategyMask, StrategyMask)> = BTreeMap::new();

    let bad = |lineno: usize, msg: &str| Error::data(format!("game file line {lineno}: {msg}"));

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        match fields[0] {
            "horizon" if fields.len() == 2 => {
                horizon = Some(
                    fields[1].parse().map_err(|_| bad(lineno, "bad horizon"))?,
                );
            }
            "schedule" if fields.len() == 2 && fields[1].len() == 3 => {
                let mut roles = [Role::Attacker; 3];
                for (slot, c) in roles.iter_mut().zip(fields[1].chars()) {
                    *slot = Role::from_letter(c)?;
                }
                schedule = Some(roles);
            }
            "initial" if fields.len() == 2 => {
                initial = Some(fields[1].parse().map_err(|_| bad(lineno, "bad initial class"))?);
            }
            "class" if fields.len() == 4 => {
                let id: ClassId = fields[1].parse().map_err(|_| bad(lineno, "bad class id"))?;
                class_lines
                    .insert(id, (StrategyMask::parse(fields[2])?, StrategyMask::parse(fields[3])?));
            }
            "support" if fields.len() == 4 => {
                let stage: usize = fields[1].parse().map_err(|_| bad(lineno, "bad stage"))?;
                let class: ClassId = fields[2].parse().map_err(|_| bad(lineno, "bad class"))?;
                let n: u32 = fields[3].parse().map_err(|_| bad(lineno, "bad support"))?;
                supports.entry(stage).or_default().insert(class, n);
            }
            "matrix" if fields.len() == 4 => {
                let stage: usize = fields[1].parse().map_err(|_| bad(lineno, "bad stage"))?;
                let class: ClassId = fields[2].parse().map_err(|_| bad(lineno, "bad class"))?;
                declared.insert((stage, class), fields[3] == "fallback");
            }
            "payoff" if fields.len() == 9 => {
                let stage: usize = fields[1].parse().map_err(|_| bad(lineno, "bad stage"))?;
                let class: ClassId = fields[2].parse().map_err(|_| bad(lineno, "bad class"))?;
                let i: u8 = fields[3].parse().map_err(|_| bad(lineno, "bad row"))?;
                let j: u8 = fields[4].parse().map_err(|_| bad(lineno, "bad column"))?;
                let cell = PayoffCell {
                    modular: fields[5].parse().map_err(|_| bad(lineno, "bad payoff"))?,
                    conventional: fields[6].parse().map_err(|_| bad(lineno, "bad payoff"))?,
                    support: fields[7].parse().map_err(|_| bad(lineno, "bad support"))?,
                    flag: CellFlag::from_token(fields[8])?,
                };
                payoffs.entry((stage, class)).or_default().insert((i, j), cell);
            }
            "pooled" if fields.len() == 8 => {
                let stage: usize = fields[1].parse().map_err(|_| bad(lineno, "bad stage"))?;
                let i: u8 = fields[2].parse().map_err(|_| bad(lineno, "bad row"))?;
                let j: u8 = fields[3].parse().map_err(|_| bad(lineno, "bad column"))?;
                let cell = PayoffCell {
                    modular: fields[4].parse().map_err(|_| bad(lineno, "bad payoff"))?,
                    conventional: fields[5].parse().map_err(|_| bad(lineno, "bad payoff"))?,
                    support: fields[6].parse().map_err(|_| bad(lineno, "bad support"))?,
                    flag: CellFlag::from_token(fields[7])?,
                };
                pooled_cells.entry(stage).or_default().insert((i, j), cell);
            }
            "transition" if fields.len() == 7 => {
                let stage: usize = fields[1].parse().map_err(|_| bad(lineno, "bad stage"))?;
                let class: ClassId = fields[2].parse().map_err(|_| bad(lineno, "bad class"))?;
                let i: u8 = fields[3].parse().map_err(|_| bad(lineno, "bad row"))?;
                let j: u8 = fields[4].parse().map_err(|_| bad(lineno, "bad column"))?;
                let next: ClassId = fields[5].parse().map_err(|_| bad(lineno, "bad class"))?;
                let p: f64 = fields[6].parse().map_err(|_| bad(lineno, "bad probability"))?;
                transitions
                    .entry(stage)
                    .or_default()
                    .entry((class, i, j))
                    .or_default()
                    .push((next, p));
            }
            other => return Err(bad(lineno, &format!("unknown or malformed line kind {other:?}"))),
        }
    }

    let horizon = horizon.ok_or_else(|| Error::data("game file missing horizon".into()))?;
    let schedule = schedule.ok_or_else(|| Error::data("game file missing schedule".into()))?;
    let initial = initial.ok_or_else(|| Error::data("game file missing initial class".into()))?;

    // class ids must be dense and in order for the registry to reproduce.
    for (expected, (&id, &(m, c))) in class_lines.iter().enumerate() {
        if id != expected {
            return Err(Error::data(format!("class ids must be dense, missing {expected}")));
        }
        registry.intern(m, c);
    }

    let h = horizon as usize;
    let mut stage_matrices: Vec<BTreeMap<ClassId, PayoffMatrix>> = vec![BTreeMap::new(); h];
    for (&(stage, class), cells) in &payoffs {
        if stage == 0 || stage > h {
            return Err(Error::data(format!("payoff stage {stage} outside horizon {horizon}")));
        }
        if cells.len() != STRATEGY_COUNT * STRATEGY_COUNT {
            return Err(Error::data(format!(
                "matrix for stage {stage} class {class} has {} cells, wants {}",
                cells.len(),
                STRATEGY_COUNT * STRATEGY_COUNT
            )));
        }
        let mut matrix = PayoffMatrix::filled(PayoffCell::no_data());
        matrix.fallback = *declared.get(&(stage, class)).unwrap_or(&false);
        for (&(i, j), &cell) in cells {
            *matrix.cell_mut(i, j) = cell;
        }
        stage_matrices[stage - 1].insert(class, matrix);
    }

    let mut pooled = Vec::new();
    for stage in 1..=h {
        let cells = pooled_cells
            .get(&stage)
            .ok_or_else(|| Error::data(format!("game file missing pooled matrix for stage {stage}")))?;
        if cells.len() != STRATEGY_COUNT * STRATEGY_COUNT {
            return Err(Error::data(format!("pooled matrix for stage {stage} is incomplete")));
        }
        let mut matrix = PayoffMatrix::filled(PayoffCell::no_data());
        for (&(i, j), &cell) in cells {
            *matrix.cell_mut(i, j) = cell;
        }
        pooled.push(matrix);
    }

    let mut transition_tables = Vec::new();
    for stage in 1..h {
        let map = transitions.remove(&stage).unwrap_or_default();
        transition_tables.push(TransitionTable { map });
    }

    let mut stage_class_support = Vec::new();
    for stage in 1..=h {
        stage_class_support.push(supports.remove(&stage).unwrap_or_default());
    }

    let tree = StageGameTree {
        horizon,
        role_schedule: schedule,
        registry,
        stage_matrices,
        pooled,
        transitions: transition_tables,
        stage_class_support,
        initial_class: initial,
    };
    tree.validate()?;
    Ok(tree)
}

/// Render a payoff matrix in the familiar table layout: row strategies for
/// the modular fleet, column strategies for the conventional fleet, labels
/// chosen from the modular role. `?` marks no-data cells, `-` unavailable
/// ones.
pub fn render_payoff_table(matrix: &PayoffMatrix, modular_role: Role) -> String {
    let (row_prefix, col_prefix) = match modular_role {
        Role::Attacker => ("a", "d"),
        Role::Defender => ("d", "a"),
    };
    let mut out = String::new();
    write!(out, "{:>6}", "").unwrap();
    for j in 1..=STRATEGY_COUNT {
        write!(out, " {:>13}", format!("{col_prefix}{j}")).unwrap();
    }
    out.push('\n');
    for i in 1..=STRATEGY_COUNT as u8 {
        write!(out, "{:>6}", format!("{row_prefix}{i}")).unwrap();
        for j in 1..=STRATEGY_COUNT as u8 {
            let cell = matrix.cell(i, j);
            let mark = match cell.flag {
                CellFlag::Supported => "",
                CellFlag::NoData => "?",
                CellFlag::Unavailable => "-",
            };
            write!(out, " {:>13}", format!("({:.0},{:.0}){mark}", cell.modular, cell.conventional))
                .unwrap();
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(
        index: u32,
        stage: u8,
        modular_role: Role,
        i: u8,
        j: u8,
        won: bool,
        avail: (StrategyMask, StrategyMask),
        next: (StrategyMask, StrategyMask),
    ) -> BattleRecord {
        BattleRecord {
            engagement_index: index,
            phase: Phase::Intelligent,
            stage_in_window: stage,
            modular_role,
            modular_strategy: i,
            conventional_strategy: j,
            modular_won: won,
            modular_avail_mask: avail.0,
            conventional_avail_mask: avail.1,
            modular_next_mask: next.0,
            conventional_next_mask: next.1,
        }
    }

    fn all() -> (StrategyMask, StrategyMask) {
        (StrategyMask::ALL, StrategyMask::ALL)
    }

    #[test]
    fn payoff_cells_are_win_percentages() {
        let mut records = Vec::new();
        // profile (1,2): 89 wins of 100; profile (1,1): 10 of 10
        for n in 0..100 {
            records.push(record(n, 1, Role::Attacker, 1, 2, n < 89, all(), all()));
        }
        for n in 0..10 {
            records.push(record(100 + n, 1, Role::Attacker, 1, 1, true, all(), all()));
        }
        let matrix = estimate_payoff_matrix(
            &records,
            &PayoffFilter { modular_role: Role::Attacker, class: None },
        )
        .unwrap();
        let c12 = matrix.cell(1, 2);
        assert_eq!((c12.modular, c12.conventional), (89.0, 11.0));
        assert_eq!(c12.support, 100);
        assert_eq!(c12.flag, CellFlag::Supported);
        let c11 = matrix.cell(1, 1);
        assert_eq!((c11.modular, c11.conventional), (100.0, 0.0));
        // never observed
        let c55 = matrix.cell(5, 5);
        assert_eq!(c55.flag, CellFlag::NoData);
        assert_eq!((c55.modular, c55.conventional), (50.0, 50.0));
        assert_eq!(matrix.total_support(), 110);
    }

    #[test]
    fn class_filter_pins_unavailable_cells_to_zero() {
        let narrow = (StrategyMask::parse("1100000000").unwrap(), StrategyMask::ALL);
        let records =
            vec![record(0, 1, Role::Attacker, 1, 1, true, narrow, all())];
        let matrix = estimate_payoff_matrix(
            &records,
            &PayoffFilter { modular_role: Role::Attacker, class: Some(narrow) },
        )
        .unwrap();
        let blocked = matrix.cell(3, 1);
        assert_eq!(blocked.flag, CellFlag::Unavailable);
        assert_eq!((blocked.modular, blocked.conventional), (0.0, 0.0));
        assert_eq!(matrix.cell(1, 1).flag, CellFlag::Supported);
    }

    #[test]
    fn empty_filter_match_is_a_domain_error() {
        let records = vec![record(0, 1, Role::Attacker, 1, 1, true, all(), all())];
        let err = estimate_payoff_matrix(
            &records,
            &PayoffFilter { modular_role: Role::Defender, class: None },
        )
        .unwrap_err();
        assert!(matches!(err, Error::Domain(_)));
    }

    #[test]
    fn transitions_count_ratios_exactly() {
        let m0 = (StrategyMask::ALL, StrategyMask::ALL);
        let m1 = (StrategyMask::parse("1111100000").unwrap(), StrategyMask::ALL);
        let m2 = (StrategyMask::parse("1000000000").unwrap(), StrategyMask::ALL);
        let mut records = Vec::new();
        for n in 0..3 {
            records.push(record(n, 1, Role::Attacker, 5, 5, true, m0, m1));
        }
        records.push(record(3, 1, Role::Attacker, 5, 5, true, m0, m2));
        records.push(record(4, 1, Role::Attacker, 10, 10, true, m0, m1));

        let mut registry = ClassRegistry::new();
        let table = estimate_transitions(&records, &mut registry).unwrap();

        let k0 = registry.intern(m0.0, m0.1);
        let k1 = registry.intern(m1.0, m1.1);
        let k2 = registry.intern(m2.0, m2.1);

        match table.distribution(k0, 5, 5) {
            TransitionDist::Observed(dist) => {
                assert_eq!(dist, &[(k1, 0.75), (k2, 0.25)]);
            }
            _ => panic!("expected observed distribution"),
        }
        match table.distribution(k0, 10, 10) {
            TransitionDist::Observed(dist) => assert_eq!(dist, &[(k1, 1.0)]),
            _ => panic!("expected observed distribution"),
        }
        assert_eq!(table.distribution(k0, 2, 2), TransitionDist::StayFallback);

        for (_, dist) in table.iter() {
            let total: f64 = dist.iter().map(|&(_, p)| p).sum();
            assert!((total - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn propagation_shifts_available_cells_by_expected_continuation() {
        let mut registry = ClassRegistry::new();
        let m0 = (StrategyMask::ALL, StrategyMask::ALL);
        let records = vec![record(0, 1, Role::Attacker, 1, 1, true, m0, m0)];
        let k0 = registry.intern(m0.0, m0.1);
        let matrix = estimate_payoff_matrix(
            &records,
            &PayoffFilter { modular_role: Role::Attacker, class: Some(m0) },
        )
        .unwrap();
        let matrices: BTreeMap<ClassId, PayoffMatrix> = [(k0, matrix.clone())].into();

        // zero continuation leaves everything unchanged
        let zero: BTreeMap<ClassId, (f64, f64)> = [(k0, (0.0, 0.0))].into();
        let unchanged =
            propagate_stage_payoffs(&matrices, &TransitionTable::default(), &zero).unwrap();
        assert_eq!(unchanged[&k0], matrix);

        // constant self-transition shifts every available cell by (v, w)
        let cont: BTreeMap<ClassId, (f64, f64)> = [(k0, (7.0, 3.0))].into();
        let shifted =
            propagate_stage_payoffs(&matrices, &TransitionTable::default(), &cont).unwrap();
        assert_eq!(shifted[&k0].cell(1, 1).modular, matrix.cell(1, 1).modular + 7.0);
        assert_eq!(shifted[&k0].cell(5, 5).conventional, matrix.cell(5, 5).conventional + 3.0);
    }

    #[test]
    fn propagation_mixes_continuations_by_probability() {
        let mut registry = ClassRegistry::new();
        let m0 = (StrategyMask::ALL, StrategyMask::ALL);
        let m1 = (StrategyMask::parse("1111100000").unwrap(), StrategyMask::ALL);
        let m2 = (StrategyMask::parse("1000000000").unwrap(), StrategyMask::ALL);
        let mut records = Vec::new();
        for n in 0..3 {
            records.push(record(n, 1, Role::Attacker, 5, 5, true, m0, m1));
        }
        records.push(record(3, 1, Role::Attacker, 5, 5, true, m0, m2));
        let table = estimate_transitions(&records, &mut registry).unwrap();
        let k0 = registry.intern(m0.0, m0.1);
        let k1 = registry.intern(m1.0, m1.1);
        let k2 = registry.intern(m2.0, m2.1);

        let matrix = estimate_payoff_matrix(
            &records,
            &PayoffFilter { modular_role: Role::Attacker, class: Some(m0) },
        )
        .unwrap();
        let base = matrix.cell(5, 5).modular;
        let matrices: BTreeMap<ClassId, PayoffMatrix> = [(k0, matrix)].into();
        let cont: BTreeMap<ClassId, (f64, f64)> =
            [(k0, (0.0, 0.0)), (k1, (100.0, 0.0)), (k2, (0.0, 100.0))].into();
        let shifted = propagate_stage_payoffs(&matrices, &table, &cont).unwrap();
        // (0.75, 0.25) over (100,0)/(0,100) adds (75, 25)
        assert_eq!(shifted[&k0].cell(5, 5).modular, base + 75.0);
        assert_eq!(shifted[&k0].cell(5, 5).conventional, (100.0 - base) + 25.0);
        // missing continuation for a reachable class is an error
        let incomplete: BTreeMap<ClassId, (f64, f64)> = [(k0, (0.0, 0.0))].into();
        assert!(propagate_stage_payoffs(&matrices, &table, &incomplete).is_err());
    }

    fn window(base: u32, roles: [Role; 3]) -> Vec<BattleRecord> {
        (0..3)
            .map(|t| {
                record(
                    base + t,
                    t as u8 + 1,
                    roles[t as usize],
                    (t as u8 % 3) + 1,
                    1,
                    t % 2 == 0,
                    all(),
                    all(),
                )
            })
            .collect()
    }

    #[test]
    fn game_builder_selects_matching_windows() {
        let schedule = [Role::Attacker, Role::Attacker, Role::Defender];
        let mut records = Vec::new();
        records.extend(window(0, [Role::Attacker, Role::Attacker, Role::Defender]));
        records.extend(window(3, [Role::Defender, Role::Attacker, Role::Defender])); // mismatch
        records.extend(window(6, [Role::Attacker, Role::Attacker, Role::Defender]));
        let tree = build_three_stage_game(&records, schedule).unwrap();
        assert_eq!(tree.horizon, 3);
        // two matching windows -> 2 records per stage
        let stage1_total: u32 = tree.stage_matrices[0].values().map(|m| m.total_support()).sum();
        assert_eq!(stage1_total, 2);
        assert_eq!(tree.stage_class_support[0].values().sum::<u32>(), 2);
    }

    #[test]
    fn game_builder_needs_matching_windows() {
        let records = window(0, [Role::Defender, Role::Attacker, Role::Defender]);
        let err = build_three_stage_game(
            &records,
            [Role::Attacker, Role::Attacker, Role::Defender],
        )
        .unwrap_err();
        assert!(matches!(err, Error::Data(_)));
    }

    #[test]
    fn single_class_degenerates_gracefully() {
        let schedule = [Role::Attacker, Role::Attacker, Role::Defender];
        let mut records = Vec::new();
        for w in 0..4 {
            records.extend(window(w * 3, schedule));
        }
        let tree = build_three_stage_game(&records, schedule).unwrap();
        assert_eq!(tree.registry.len(), 1);
        for t in 0..3 {
            assert_eq!(tree.stage_matrices[t].len(), 1);
        }
    }

    #[test]
    fn game_text_round_trips() {
        let schedule = [Role::Attacker, Role::Attacker, Role::Defender];
        let mut records = Vec::new();
        for w in 0..4 {
            records.extend(window(w * 3, schedule));
        }
        let tree = build_three_stage_game(&records, schedule).unwrap();
        let text = write_game_text(&tree);
        let back = parse_game_text(&text).unwrap();
        assert_eq!(back, tree);
    }

    #[test]
    fn truncation_drops_later_stages() {
        let schedule = [Role::Attacker, Role::Attacker, Role::Defender];
        let mut records = Vec::new();
        for w in 0..4 {
            records.extend(window(w * 3, schedule));
        }
        let tree = build_three_stage_game(&records, schedule).unwrap();
        let one = tree.truncated(1).unwrap();
        assert_eq!(one.horizon, 1);
        assert!(one.transitions.is_empty());
        assert_eq!(one.stage_matrices.len(), 1);
        assert!(tree.truncated(4).is_err());
        assert!(tree.truncated(0).is_err());
    }

    #[test]
    fn table_rendering_marks_missing_data() {
        let records = vec![record(0, 1, Role::Attacker, 1, 1, true, all(), all())];
        let matrix = estimate_payoff_matrix(
            &records,
            &PayoffFilter { modular_role: Role::Attacker, class: None },
        )
        .unwrap();
        let table = render_payoff_table(&matrix, Role::Attacker);
        assert!(table.contains("a1"));
        assert!(table.contains("d10"));
        assert!(table.contains("(100,0)"));
        assert!(table.contains("(50,50)?"));
    }
}
