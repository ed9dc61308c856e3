//! Decision-tree mining over battle logs: two-class entropy, binary
//! ordinal splits, and the four fleet-by-role training subsets.

use crate::error::{Error, Result};
use crate::record::{BattleRecord, FleetKind, Phase, Role};

/// Ordinal features a case exposes, ordered by name so split ties resolve
/// the same way everywhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Feature {
    AdversaryStrategy,
    OwnStrategy,
    StageInWindow,
}

impl Feature {
    pub const ALL: [Feature; 3] =
        [Feature::AdversaryStrategy, Feature::OwnStrategy, Feature::StageInWindow];

    pub fn name(self) -> &'static str {
        match self {
            Feature::AdversaryStrategy => "adversary_strategy",
            Feature::OwnStrategy => "own_strategy",
            Feature::StageInWindow => "stage_in_window",
        }
    }

    pub fn from_name(name: &str) -> Result<Feature> {
        Feature::ALL
            .into_iter()
            .find(|f| f.name() == name)
            .ok_or_else(|| Error::domain(format!("unknown feature {name:?}")))
    }
}

/// One training case: the engagement seen from one fleet's side.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LabeledCase {
    pub own_strategy: u8,
    pub adversary_strategy: u8,
    pub stage_in_window: u8,
    /// true for a win.
    pub win: bool,
}

impl LabeledCase {
    pub fn value(&self, feature: Feature) -> u8 {
        match feature {
            Feature::OwnStrategy => self.own_strategy,
            Feature::AdversaryStrategy => self.adversary_strategy,
            Feature::StageInWindow => self.stage_in_window,
        }
    }
}

/// `feature <= threshold` goes left.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Split {
    pub feature: Feature,
    pub threshold: u8,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecisionNode {
    pub win_count: u32,
    pub loss_count: u32,
    pub split: Option<Split>,
    pub left: Option<Box<DecisionNode>>,
    pub right: Option<Box<DecisionNode>>,
}

impl DecisionNode {
    pub fn is_leaf(&self) -> bool {
        self.split.is_none()
    }

    pub fn total(&self) -> u32 {
        self.win_count + self.loss_count
    }

    pub fn entropy(&self) -> f64 {
        entropy(self.win_count, self.loss_count).unwrap_or(0.0)
    }

    pub fn win_fraction(&self) -> f64 {
        self.win_count as f64 / self.total() as f64
    }

    pub fn depth(&self) -> usize {
        match (&self.left, &self.right) {
            (Some(l), Some(r)) => 1 + l.depth().max(r.depth()),
            _ => 0,
        }
    }

    pub fn leaf_count(&self) -> usize {
        match (&self.left, &self.right) {
            (Some(l), Some(r)) => l.leaf_count() + r.leaf_count(),
            _ => 1,
        }
    }
}

/// Two-class Shannon entropy in bits; `0 * log2(0)` counts as zero.
pub fn entropy(win_count: u32, loss_count: u32) -> Result<f64> {
    let total = win_count + loss_count;
    if total == 0 {
        return Err(Error::domain("entropy of an empty set is undefined".into()));
    }
    let mut h = 0.0;
    for count in [win_count, loss_count] {
        if count > 0 {
            let p = count as f64 / total as f64;
            h -= p * p.log2();
        }
    }
    Ok(h)
}

fn count_labels(cases: &[LabeledCase]) -> (u32, u32) {
    let wins = cases.iter().filter(|c| c.win).count() as u32;
    (wins, cases.len() as u32 - wins)
}

/// Find the (feature, threshold) cut minimizing the case-count-weighted
/// mean of child entropies. Candidate thresholds sit between consecutive
/// observed values. Returns `None` when no cut strictly beats the parent
/// entropy. Ties resolve to the first feature in name order, then the
/// lowest threshold.
pub fn best_split(cases: &[LabeledCase]) -> Option<(Feature, u8, f64)> {
    if cases.is_empty() {
        return None;
    }
    let (wins, losses) = count_labels(cases);
    let parent = entropy(wins, losses).expect("nonempty");
    let total = cases.len() as f64;

    let mut best: Option<(Feature, u8, f64)> = None;
    for feature in Feature::ALL {
        let mut values: Vec<u8> = cases.iter().map(|c| c.value(feature)).collect();
        values.sort_unstable();
        values.dedup();
        // Cut at each value except the last keeps both children nonempty.
        for &threshold in &values[..values.len().saturating_sub(1)] {
            let mut left = (0u32, 0u32);
            let mut right = (0u32, 0u32);
            for case in cases {
                let side = if case.value(feature) <= threshold { &mut left } else { &mut right };
                if case.win {
                    side.0 += 1;
                } else {
                    side.1 += 1;
                }
            }
            let left_total = (left.0 + left.1) as f64;
            let right_total = (right.0 + right.1) as f64;
            let weighted = left_total / total * entropy(left.0, left.1).unwrap()
                + right_total / total * entropy(right.0, right.1).unwrap();
            let better = match best {
                None => true,
                Some((_, _, best_weighted)) => weighted + 1e-12 < best_weighted,
            };
            if better {
                best = Some((feature, threshold, weighted));
            }
        }
    }

    match best {
        Some((_, _, weighted)) if weighted + 1e-12 < parent => best,
        _ => None,
    }
}

/// Stopping parameters for tree fitting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitParams {
    /// A node whose entropy is at or below this becomes a leaf.
    pub purity_threshold: f64,
    /// Nodes with fewer cases than this are not split.
    pub min_samples: usize,
    /// Maximum number of split levels below the root.
    pub max_depth: usize,
}

impl Default for FitParams {
    fn default() -> Self {
        FitParams { purity_threshold: 0.2, min_samples: 5, max_depth: 6 }
    }
}

/// Fit a binary decision tree by recursively applying [`best_split`].
pub fn fit_tree(cases: &[LabeledCase], params: &FitParams) -> Result<DecisionNode> {
    if cases.is_empty() {
        return Err(Error::domain("cannot fit a tree on an empty case set".into()));
    }
    Ok(fit_node(cases, params, params.max_depth))
}

fn fit_node(cases: &[LabeledCase], params: &FitParams, depth_remaining: usize) -> DecisionNode {
    let (win_count, loss_count) = count_labels(cases);
    let mut node =
        DecisionNode { win_count, loss_count, split: None, left: None, right: None };

    let node_entropy = entropy(win_count, loss_count).expect("nonempty");
    if node_entropy <= params.purity_threshold
        || cases.len() < params.min_samples
        || depth_remaining == 0
    {
        return node;
    }
    let Some((feature, threshold, _)) = best_split(cases) else {
        return node;
    };

    let (left_cases, right_cases): (Vec<LabeledCase>, Vec<LabeledCase>) =
        cases.iter().partition(|c| c.value(feature) <= threshold);
    node.split = Some(Split { feature, threshold });
    node.left = Some(Box::new(fit_node(&left_cases, params, depth_remaining - 1)));
    node.right = Some(Box::new(fit_node(&right_cases, params, depth_remaining - 1)));
    node
}

/// The four training subsets, in a fixed order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subset {
    ModularDefender,
    ConventionalDefender,
    ModularAttacker,
    ConventionalAttacker,
}

impl Subset {
    pub const ALL: [Subset; 4] = [
        Subset::ModularDefender,
        Subset::ConventionalDefender,
        Subset::ModularAttacker,
        Subset::ConventionalAttacker,
    ];

    pub fn fleet(self) -> FleetKind {
        match self {
            Subset::ModularDefender | Subset::ModularAttacker => FleetKind::Modular,
            _ => FleetKind::Conventional,
        }
    }

    pub fn role(self) -> Role {
        match self {
            Subset::ModularDefender | Subset::ConventionalDefender => Role::Defender,
            _ => Role::Attacker,
        }
    }

    /// Stable key used for output file names.
    pub fn key(self) -> &'static str {
        match self {
            Subset::ModularDefender => "modular_defender",
            Subset::ConventionalDefender => "conventional_defender",
            Subset::ModularAttacker => "modular_attacker",
            Subset::ConventionalAttacker => "conventional_attacker",
        }
    }

    pub fn title(self) -> String {
        format!("{} fleet as {}", self.fleet().name(), self.role().name())
    }
}

/// Partition intelligent-phase records into the four fleet-by-role case
/// sets, each labeled from that fleet's own perspective.
pub fn partition_by_role(records: &[BattleRecord]) -> [Vec<LabeledCase>; 4] {
    let mut subsets: [Vec<LabeledCase>; 4] = Default::default();
    for record in records {
        if record.phase != Phase::Intelligent {
            continue;
        }
        for (slot, subset) in Subset::ALL.iter().enumerate() {
            let fleet = subset.fleet();
            if record.role_of(fleet) != subset.role() {
                continue;
            }
            subsets[slot].push(LabeledCase {
                own_strategy: record.strategy_of(fleet),
                adversary_strategy: record.strategy_of(fleet.opponent()),
                stage_in_window: record.stage_in_window,
                win: record.won_by(fleet),
            });
        }
    }
    subsets
}

/// Route a case down the tree; returns the leaf's empirical win fraction.
pub fn classify(tree: &DecisionNode, case: &LabeledCase) -> f64 {
    let mut node = tree;
    while let Some(split) = node.split {
        let child = if case.value(split.feature) <= split.threshold {
            node.left.as_deref()
        } else {
            node.right.as_deref()
        };
        node = child.expect("split nodes have both children");
    }
    node.win_fraction()
}

/// Deterministic indented outline: one node per line with counts, entropy,
/// and the split condition; children indented two spaces, left first.
pub fn render_outline(tree: &DecisionNode) -> String {
    let mut out = String::new();
    render_outline_node(tree, 0, &mut out);
    out
}

fn render_outline_node(node: &DecisionNode, depth: usize, out: &mut String) {
    for _ in 0..depth {
        out.push_str("  ");
    }
    out.push_str(&format!(
        "wins={} losses={} entropy={:.4}",
        node.win_count,
        node.loss_count,
        node.entropy()
    ));
    match node.split {
        Some(split) => {
            out.push_str(&format!(" split=[{} <= {}]\n", split.feature.name(), split.threshold));
            render_outline_node(node.left.as_ref().unwrap(), depth + 1, out);
            render_outline_node(node.right.as_ref().unwrap(), depth + 1, out);
        }
        None => out.push_str(" leaf\n"),
    }
}

/// Parse the (indent, wins, losses) triples back out of an outline, in the
/// preorder the renderer used.
pub fn parse_outline_counts(outline: &str) -> Result<Vec<(usize, u32, u32)>> {
    let mut rows = Vec::new();
    for line in outline.lines() {
        if line.trim().is_empty() {
            continue;
        }
        let indent = (line.len() - line.trim_start().len()) / 2;
        let mut wins = None;
        let mut losses = None;
        for token in line.trim().split_whitespace() {
            if let Some(v) = token.strip_prefix("wins=") {
                wins = v.parse::<u32>().ok();
            } else if let Some(v) = token.strip_prefix("losses=") {
                losses = v.parse::<u32>().ok();
            }
        }
        match (wins, losses) {
            (Some(w), Some(l)) => rows.push((indent, w, l)),
            _ => return Err(Error::data(format!("unparseable outline line: {line:?}"))),
        }
    }
    Ok(rows)
}

/// Graph-description (DOT) rendering for external tooling.
pub fn render_dot(tree: &DecisionNode, title: &str) -> String {
    let mut out = String::new();
    out.push_str("digraph decision_tree {\n");
    out.push_str(&format!("  label=\"{title}\";\n"));
    out.push_str("  node [shape=box];\n");
    let mut counter = 0;
    render_dot_node(tree, &mut counter, &mut out);
    out.push_str("}\n");
    out
}

fn render_dot_node(node: &DecisionNode, counter: &mut usize, out: &mut String) -> usize {
    let id = *counter;
    *counter += 1;
    let header = match node.split {
        Some(split) => format!("{} <= {}\\n", split.feature.name(), split.threshold),
        None => String::new(),
    };
    out.push_str(&format!(
        "  n{id} [label=\"{header}wins={} losses={}\\nentropy={:.4}\"];\n",
        node.win_count,
        node.loss_count,
        node.entropy()
    ));
    if let (Some(left), Some(right)) = (&node.left, &node.right) {
        let left_id = render_dot_node(left, counter, out);
        out.push_str(&format!("  n{id} -> n{left_id} [label=\"yes\"];\n"));
        let right_id = render_dot_node(right, counter, out);
        out.push_str(&format!("  n{id} -> n{right_id} [label=\"no\"];\n"));
    }
    id
}
