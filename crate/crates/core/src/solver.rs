//! Bimatrix Nash equilibria by extreme-equilibrium enumeration, and the
//! backward-induction solve of the multi-stage game.
//!
//! The enumeration works over equal-size support pairs after merging
//! exact-duplicate strategies and iteratively removing strictly dominated
//! ones (both preserve the equilibrium set). Solutions with components
//! pinned to zero cover the extreme points of degenerate components, which
//! fitted matrices produce routinely; those equilibria carry a degeneracy
//! flag instead of failing.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::estimator::{propagate_stage_payoffs, ClassId, StageGameTree};
use crate::record::StrategyMask;
use crate::strategy::STRATEGY_COUNT;

pub type Matrix10 = [[f64; STRATEGY_COUNT]; STRATEGY_COUNT];

/// Numerical tolerances: linear-algebra feasibility noise versus
/// economically meaningful best-response slack.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub feasibility: f64,
    pub best_response: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { feasibility: 1e-9, best_response: 1e-7 }
    }
}

/// A probability vector over the 10 strategies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixedStrategy {
    pub probabilities: [f64; STRATEGY_COUNT],
}

impl MixedStrategy {
    pub fn pure(index: u8) -> MixedStrategy {
        let mut probabilities = [0.0; STRATEGY_COUNT];
        probabilities[index as usize - 1] = 1.0;
        MixedStrategy { probabilities }
    }

    pub fn support(&self) -> StrategyMask {
        let mut mask = StrategyMask::EMPTY;
        for (slot, &p) in self.probabilities.iter().enumerate() {
            if p > 0.0 {
                mask.insert(slot as u8 + 1);
            }
        }
        mask
    }

    /// 1-based index of the most likely strategy.
    pub fn modal_index(&self) -> u8 {
        let mut best = 0;
        for (slot, &p) in self.probabilities.iter().enumerate() {
            if p > self.probabilities[best] {
                best = slot;
            }
        }
        best as u8 + 1
    }

    /// Some(index) when all mass sits on a single strategy.
    pub fn as_pure(&self, tol: f64) -> Option<u8> {
        let modal = self.modal_index();
        if self.probabilities[modal as usize - 1] >= 1.0 - tol {
            Some(modal)
        } else {
            None
        }
    }

    pub fn validate(&self, mask: StrategyMask, tol: &Tolerances) -> Result<()> {
        let mut sum = 0.0;
        for (slot, &p) in self.probabilities.iter().enumerate() {
            if p < -tol.feasibility || p > 1.0 + tol.feasibility {
                return Err(Error::domain(format!("probability {p} outside [0, 1]")));
            }
            if p > 0.0 && !mask.contains(slot as u8 + 1) {
                return Err(Error::domain(format!(
                    "strategy {} has positive probability but is unavailable",
                    slot + 1
                )));
            }
            sum += p;
        }
        if (sum - 1.0).abs() > tol.feasibility {
            return Err(Error::domain(format!("probabilities sum to {sum}, not 1")));
        }
        Ok(())
    }
}

/// One equilibrium of a restricted bimatrix game.
#[derive(Debug, Clone, PartialEq)]
pub struct Equilibrium {
    pub row: MixedStrategy,
    pub col: MixedStrategy,
    pub value_row: f64,
    pub value_col: f64,
    pub degenerate: bool,
}

/// Bilinear expected payoffs `(x' A y, x' B y)`.
pub fn expected_payoff(
    a: &Matrix10,
    b: &Matrix10,
    x: &MixedStrategy,
    y: &MixedStrategy,
) -> (f64, f64) {
    let mut va = 0.0;
    let mut vb = 0.0;
    for i in 0..STRATEGY_COUNT {
        let xi = x.probabilities[i];
        if xi == 0.0 {
            continue;
        }
        for j in 0..STRATEGY_COUNT {
            let yj = y.probabilities[j];
            if yj == 0.0 {
                continue;
            }
            va += xi * yj * a[i][j];
            vb += xi * yj * b[i][j];
        }
    }
    (va, vb)
}

/// Gaussian elimination with partial pivoting; `None` when singular.
fn solve_linear(mut m: Vec<Vec<f64>>, mut rhs: Vec<f64>) -> Option<Vec<f64>> {
    let n = rhs.len();
    let scale = m
        .iter()
        .flat_map(|row| row.iter())
        .fold(1.0f64, |acc, &v| acc.max(v.abs()));
    let tiny = 1e-12 * scale;
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&p, &q| m[p][col].abs().partial_cmp(&m[q][col].abs()).unwrap())
            .unwrap();
        if m[pivot_row][col].abs() <= tiny {
            return None;
        }
        m.swap(col, pivot_row);
        rhs.swap(col, pivot_row);
        for row in col + 1..n {
            let factor = m[row][col] / m[col][col];
            if factor != 0.0 {
                for c in col..n {
                    m[row][c] -= factor * m[col][c];
                }
                rhs[row] -= factor * rhs[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = rhs[row];
        for c in row + 1..n {
            acc -= m[row][c] * x[c];
        }
        x[row] = acc / m[row][row];
    }
    Some(x)
}

fn subsets_of_size(pool: &[usize], k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(k);
    fn recurse(pool: &[usize], k: usize, start: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if current.len() == k {
            out.push(current.clone());
            return;
        }
        let needed = k - current.len();
        for idx in start..=pool.len().saturating_sub(needed) {
            current.push(pool[idx]);
            recurse(pool, k, idx + 1, current, out);
            current.pop();
        }
    }
    recurse(pool, k, 0, &mut current, &mut out);
    out
}

/// All extreme equilibria of the bimatrix game `(a, b)` restricted to the
/// availability masks. Duplicate and strictly dominated strategies are
/// stripped before enumeration (neither changes the equilibrium set);
/// every candidate is re-verified against the full available strategy
/// sets. Equilibria with excess best responses are flagged degenerate.
pub fn find_nash(
    a: &Matrix10,
    b: &Matrix10,
    row_mask: StrategyMask,
    col_mask: StrategyMask,
    tol: &Tolerances,
) -> Result<Vec<Equilibrium>> {
    if row_mask.is_empty() || col_mask.is_empty() {
        return Err(Error::domain("both players need at least one available strategy".into()));
    }
    let all_rows: Vec<usize> = row_mask.indices().map(|i| i as usize - 1).collect();
    let all_cols: Vec<usize> = col_mask.indices().map(|j| j as usize - 1).collect();

    // Merge exact duplicates (rows equal in both payoff matrices across
    // available columns, and vice versa).
    let mut rows: Vec<usize> = Vec::new();
    for &r in &all_rows {
        let duplicate = rows.iter().any(|&kept| {
            all_cols.iter().all(|&c| a[kept][c] == a[r][c] && b[kept][c] == b[r][c])
        });
        if !duplicate {
            rows.push(r);
        }
    }
    let mut cols: Vec<usize> = Vec::new();
    for &c in &all_cols {
        let duplicate = cols.iter().any(|&kept| {
            all_rows.iter().all(|&r| a[r][kept] == a[r][c] && b[r][kept] == b[r][c])
        });
        if !duplicate {
            cols.push(c);
        }
    }

    // Iterated strict pure dominance (safe: strictly dominated strategies
    // are in no equilibrium support).
    loop {
        let mut changed = false;
        let mut keep_rows = Vec::with_capacity(rows.len());
        for &r in &rows {
            let dominated = rows
                .iter()
                .any(|&d| d != r && cols.iter().all(|&c| a[d][c] > a[r][c]));
            if dominated {
                changed = true;
            } else {
                keep_rows.push(r);
            }
        }
        rows = keep_rows;
        let mut keep_cols = Vec::with_capacity(cols.len());
        for &c in &cols {
            let dominated = cols
                .iter()
                .any(|&d| d != c && rows.iter().all(|&r| b[r][d] > b[r][c]));
            if dominated {
                changed = true;
            } else {
                keep_cols.push(c);
            }
        }
        cols = keep_cols;
        if !changed {
            break;
        }
    }

    // Equilibrium-preserving positive shift, applied to the solve only;
    // reported values come from the original matrices.
    let shift_a = 1.0 - all_rows
        .iter()
        .flat_map(|&r| all_cols.iter().map(move |&c| a[r][c]))
        .fold(f64::INFINITY, f64::min);
    let shift_b = 1.0 - all_rows
        .iter()
        .flat_map(|&r| all_cols.iter().map(move |&c| b[r][c]))
        .fold(f64::INFINITY, f64::min);

    let mut found: Vec<Equilibrium> = Vec::new();
    let max_k = rows.len().min(cols.len());
    for k in 1..=max_k {
        for support_rows in subsets_of_size(&rows, k) {
            for support_cols in subsets_of_size(&cols, k) {
                if let Some(eq) = try_support(
                    a, b, shift_a, shift_b, &support_rows, &support_cols,
                    &all_rows, &all_cols, tol,
                ) {
                    let duplicate = found.iter().any(|e| {
                        strategies_close(&e.row, &eq.row, 1e-9)
                            && strategies_close(&e.col, &eq.col, 1e-9)
                    });
                    if !duplicate {
                        found.push(eq);
                    }
                }
            }
        }
    }

    found.sort_by(|p, q| {
        lex_cmp(&p.row.probabilities, &q.row.probabilities)
            .then_with(|| lex_cmp(&p.col.probabilities, &q.col.probabilities))
    });
    Ok(found)
}

fn strategies_close(p: &MixedStrategy, q: &MixedStrategy, tol: f64) -> bool {
    p.probabilities
        .iter()
        .zip(q.probabilities.iter())
        .all(|(a, b)| (a - b).abs() <= tol)
}

fn lex_cmp(p: &[f64; STRATEGY_COUNT], q: &[f64; STRATEGY_COUNT]) -> std::cmp::Ordering {
    for (a, b) in p.iter().zip(q.iter()) {
        match a.partial_cmp(b).unwrap() {
            std::cmp::Ordering::Equal => continue,
            other => return other,
        }
    }
    std::cmp::Ordering::Equal
}

#[allow(clippy::too_many_arguments)]
fn try_support(
    a: &Matrix10,
    b: &Matrix10,
    shift_a: f64,
    shift_b: f64,
    support_rows: &[usize],
    support_cols: &[usize],
    all_rows: &[usize],
    all_cols: &[usize],
    tol: &Tolerances,
) -> Option<Equilibrium> {
    let k = support_rows.len();

    // Column mix y making the supported rows indifferent (shifted payoffs).
    let mut m = vec![vec![0.0; k + 1]; k + 1];
    let mut rhs = vec![0.0; k + 1];
    for (eq, &r) in support_rows.iter().enumerate() {
        for (var, &c) in support_cols.iter().enumerate() {
            m[eq][var] = a[r][c] + shift_a;
        }
        m[eq][k] = -1.0;
    }
    for var in 0..k {
        m[k][var] = 1.0;
    }
    rhs[k] = 1.0;
    let y_sol = solve_linear(m, rhs)?;

    // Row mix x making the supported columns indifferent.
    let mut m = vec![vec![0.0; k + 1]; k + 1];
    let mut rhs = vec![0.0; k + 1];
    for (eq, &c) in support_cols.iter().enumerate() {
        for (var, &r) in support_rows.iter().enumerate() {
            m[eq][var] = b[r][c] + shift_b;
        }
        m[eq][k] = -1.0;
    }
    for var in 0..k {
        m[k][var] = 1.0;
    }
    rhs[k] = 1.0;
    let x_sol = solve_linear(m, rhs)?;

    // Feasibility: probabilities may touch zero but not go negative.
    if y_sol[..k].iter().any(|&p| p < -tol.feasibility)
        || x_sol[..k].iter().any(|&p| p < -tol.feasibility)
    {
        return None;
    }

    let mut row = MixedStrategy { probabilities: [0.0; STRATEGY_COUNT] };
    for (&r, &p) in support_rows.iter().zip(x_sol.iter()) {
        row.probabilities[r] = p.max(0.0);
    }
    let mut col = MixedStrategy { probabilities: [0.0; STRATEGY_COUNT] };
    for (&c, &p) in support_cols.iter().zip(y_sol.iter()) {
        col.probabilities[c] = p.max(0.0);
    }
    normalize(&mut row.probabilities);
    normalize(&mut col.probabilities);

    let (value_row, value_col) = expected_payoff(a, b, &row, &col);

    // Best-response check over the full available sets.
    let mut row_best_responses = 0;
    for &r in all_rows {
        let payoff: f64 =
            all_cols.iter().map(|&c| a[r][c] * col.probabilities[c]).sum();
        if payoff > value_row + tol.best_response {
            return None;
        }
        if payoff >= value_row - tol.best_response {
            row_best_responses += 1;
        }
    }
    let mut col_best_responses = 0;
    for &c in all_cols {
        let payoff: f64 =
            all_rows.iter().map(|&r| b[r][c] * row.probabilities[r]).sum();
        if payoff > value_col + tol.best_response {
            return None;
        }
        if payoff >= value_col - tol.best_response {
            col_best_responses += 1;
        }
    }

    let row_support = row.probabilities.iter().filter(|&&p| p > 0.0).count();
    let col_support = col.probabilities.iter().filter(|&&p| p > 0.0).count();
    let degenerate = row_best_responses > row_support
        || col_best_responses > col_support
        || row_support != col_support;

    Some(Equilibrium { row, col, value_row, value_col, degenerate })
}

fn normalize(probabilities: &mut [f64; STRATEGY_COUNT]) {
    let sum: f64 = probabilities.iter().sum();
    if sum > 0.0 {
        for p in probabilities.iter_mut() {
            *p /= sum;
        }
    }
}

/// Pick one equilibrium: highest welfare (sum of both values), ties broken
/// by lexicographically smallest (row, col) probability vectors.
pub fn select_equilibrium(candidates: &[Equilibrium]) -> Result<Equilibrium> {
    let mut best: Option<&Equilibrium> = None;
    for candidate in candidates {
        match best {
            None => best = Some(candidate),
            Some(current) => {
                let welfare_candidate = candidate.value_row + candidate.value_col;
                let welfare_current = current.value_row + current.value_col;
                if welfare_candidate > welfare_current + 1e-9 {
                    best = Some(candidate);
                } else if (welfare_candidate - welfare_current).abs() <= 1e-9 {
                    let ordering = lex_cmp(&candidate.row.probabilities, &current.row.probabilities)
                        .then_with(|| {
                            lex_cmp(&candidate.col.probabilities, &current.col.probabilities)
                        });
                    if ordering == std::cmp::Ordering::Less {
                        best = Some(candidate);
                    }
                }
            }
        }
    }
    best.cloned().ok_or_else(|| Error::domain("no equilibrium candidates to select from".into()))
}

/// Solved multi-stage game: the selected equilibrium per (stage, class),
/// and the cumulative values read off the initial stage-1 class.
#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumProfile {
    pub horizon: u8,
    /// `per_stage[t - 1]` maps class id to the selected equilibrium. The
    /// stage-t values already include continuation from stages t+1.. .
    pub per_stage: Vec<BTreeMap<ClassId, Equilibrium>>,
    pub initial_class: ClassId,
    pub cumulative_value: (f64, f64),
}

impl EquilibriumProfile {
    pub fn selection(&self, stage: u8, class: ClassId) -> Option<&Equilibrium> {
        self.per_stage.get(stage as usize - 1).and_then(|m| m.get(&class))
    }
}

/// Backward induction over the stage game tree:
/// solve every final-stage class game, fold the selected values into the
/// previous stage through the transition table, and repeat down to stage 1.
pub fn solve_multistage(game: &StageGameTree, tol: &Tolerances) -> Result<EquilibriumProfile> {
    game.validate()?;
    let horizon = game.horizon as usize;
    let mut per_stage: Vec<BTreeMap<ClassId, Equilibrium>> = vec![BTreeMap::new(); horizon];
    let mut continuation: BTreeMap<ClassId, (f64, f64)> = BTreeMap::new();

    for stage in (1..=horizon).rev() {
        let matrices = if stage == horizon {
            game.stage_matrices[stage - 1].clone()
        } else {
            propagate_stage_payoffs(
                &game.stage_matrices[stage - 1],
                &game.transitions[stage - 1],
                &continuation,
            )?
        };
        let mut next_continuation = BTreeMap::new();
        for (&class_id, matrix) in &matrices {
            let class = game
                .registry
                .get(class_id)
                .ok_or_else(|| Error::domain(format!("unknown class {class_id}")))?;
            let candidates = find_nash(
                &matrix.modular_payoffs(),
                &matrix.conventional_payoffs(),
                class.modular_mask,
                class.conventional_mask,
                tol,
            )?;
            if candidates.is_empty() {
                return Err(Error::domain(format!(
                    "no equilibrium found for stage {stage} class {class_id}"
                )));
            }
            let selected = select_equilibrium(&candidates)?;
            next_continuation.insert(class_id, (selected.value_row, selected.value_col));
            per_stage[stage - 1].insert(class_id, selected);
        }
        continuation = next_continuation;
    }

    let cumulative_value = continuation
        .get(&game.initial_class)
        .copied()
        .ok_or_else(|| Error::domain("initial class has no stage-1 equilibrium".into()))?;

    Ok(EquilibriumProfile {
        horizon: game.horizon,
        per_stage,
        initial_class: game.initial_class,
        cumulative_value,
    })
}

/// Embed a small game into the fixed 10x10 shape (helper for tests and
/// fixtures; cells outside the submatrix stay zero).
pub fn pad_matrix(rows: &[Vec<f64>]) -> Matrix10 {
    let mut out = [[0.0; STRATEGY_COUNT]; STRATEGY_COUNT];
    for (i, row) in rows.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            out[i][j] = v;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mask(n: usize) -> StrategyMask {
        StrategyMask::first(n)
    }

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn matching_pennies_has_the_even_mix() {
        let a = pad_matrix(&[vec![1.0, -1.0], vec![-1.0, 1.0]]);
        let b = pad_matrix(&[vec![-1.0, 1.0], vec![1.0, -1.0]]);
        let eqs = find_nash(&a, &b, mask(2), mask(2), &tol()).unwrap();
        assert_eq!(eqs.len(), 1);
        let eq = &eqs[0];
        assert!((eq.row.probabilities[0] - 0.5).abs() < 1e-9);
        assert!((eq.col.probabilities[0] - 0.5).abs() < 1e-9);
        assert!(eq.value_row.abs() < 1e-9 && eq.value_col.abs() < 1e-9);
        assert!(!eq.degenerate);
    }

    #[test]
    fn prisoners_dilemma_lands_on_the_dominant_profile() {
        // strategies: 1 = cooperate, 2 = defect; defect strictly dominates
        let a = pad_matrix(&[vec![3.0, 0.0], vec![5.0, 1.0]]);
        let b = pad_matrix(&[vec![3.0, 5.0], vec![0.0, 1.0]]);
        let eqs = find_nash(&a, &b, mask(2), mask(2), &tol()).unwrap();
        assert_eq!(eqs.len(), 1);
        assert_eq!(eqs[0].row.as_pure(1e-9), Some(2));
        assert_eq!(eqs[0].col.as_pure(1e-9), Some(2));
        assert_eq!((eqs[0].value_row, eqs[0].value_col), (1.0, 1.0));
    }

    #[test]
    fn battle_of_the_sexes_has_three_equilibria() {
        let a = pad_matrix(&[vec![2.0, 0.0], vec![0.0, 1.0]]);
        let b = pad_matrix(&[vec![1.0, 0.0], vec![0.0, 2.0]]);
        let eqs = find_nash(&a, &b, mask(2), mask(2), &tol()).unwrap();
        assert_eq!(eqs.len(), 3);
        let mixed = eqs
            .iter()
            .find(|e| e.row.as_pure(1e-6).is_none())
            .expect("one mixed equilibrium");
        assert!((mixed.row.probabilities[0] - 2.0 / 3.0).abs() < 1e-9);
        assert!((mixed.col.probabilities[0] - 1.0 / 3.0).abs() < 1e-9);
        let pures = eqs.iter().filter(|e| e.row.as_pure(1e-6).is_some()).count();
        assert_eq!(pures, 2);
    }

    #[test]
    fn expected_payoff_fixtures() {
        let a = pad_matrix(&[vec![100.0, 89.0], vec![100.0, 98.0]]);
        let b = pad_matrix(&[vec![0.0, 11.0], vec![0.0, 2.0]]);
        let x = MixedStrategy::pure(1);
        let y = MixedStrategy::pure(2);
        assert_eq!(expected_payoff(&a, &b, &x, &y), (89.0, 11.0));

        // constants stay constants under any mix
        let c = pad_matrix(&[vec![7.0, 7.0], vec![7.0, 7.0]]);
        let d = pad_matrix(&[vec![3.0, 3.0], vec![3.0, 3.0]]);
        let mut half = MixedStrategy::pure(1);
        half.probabilities = [0.0; STRATEGY_COUNT];
        half.probabilities[0] = 0.5;
        half.probabilities[1] = 0.5;
        let (vc, vd) = expected_payoff(&c, &d, &half, &half);
        assert!((vc - 7.0).abs() < 1e-12);
        assert!((vd - 3.0).abs() < 1e-12);
    }

    #[test]
    fn strictly_increasing_payoffs_select_the_strongest_pair() {
        // payoff strictly increasing in own index for both players
        let mut a = [[0.0; STRATEGY_COUNT]; STRATEGY_COUNT];
        let mut b = [[0.0; STRATEGY_COUNT]; STRATEGY_COUNT];
        for i in 0..STRATEGY_COUNT {
            for j in 0..STRATEGY_COUNT {
                a[i][j] = 50.0 + 5.0 * i as f64 - 5.0 * j as f64;
                b[i][j] = 100.0 - a[i][j];
            }
        }
        let eqs = find_nash(&a, &b, StrategyMask::ALL, StrategyMask::ALL, &tol()).unwrap();
        assert_eq!(eqs.len(), 1);
        assert_eq!(eqs[0].row.as_pure(1e-9), Some(10));
        assert_eq!(eqs[0].col.as_pure(1e-9), Some(10));
    }

    #[test]
    fn duplicate_columns_flag_degeneracy() {
        // columns 1 and 2 identical for both players
        let a = pad_matrix(&[vec![4.0, 4.0, 0.0], vec![1.0, 1.0, 2.0]]);
        let b = pad_matrix(&[vec![1.0, 1.0, 2.0], vec![3.0, 3.0, 0.0]]);
        let eqs = find_nash(&a, &b, mask(2), mask(3), &tol()).unwrap();
        assert!(!eqs.is_empty());
        assert!(eqs.iter().any(|e| e.degenerate));
    }

    #[test]
    fn masked_strategies_never_enter_supports() {
        let a = pad_matrix(&[
            vec![1.0, 0.0, 9.0],
            vec![0.0, 1.0, 9.0],
            vec![9.0, 9.0, 9.0],
        ]);
        let b = pad_matrix(&[
            vec![1.0, 0.0, 9.0],
            vec![0.0, 1.0, 9.0],
            vec![9.0, 9.0, 9.0],
        ]);
        let mut row_mask = StrategyMask::EMPTY;
        row_mask.insert(1);
        row_mask.insert(2);
        let mut col_mask = StrategyMask::EMPTY;
        col_mask.insert(1);
        col_mask.insert(2);
        let eqs = find_nash(&a, &b, row_mask, col_mask, &tol()).unwrap();
        assert!(!eqs.is_empty());
        for eq in &eqs {
            assert_eq!(eq.row.probabilities[2], 0.0);
            assert_eq!(eq.col.probabilities[2], 0.0);
            eq.row.validate(row_mask, &tol()).unwrap();
            eq.col.validate(col_mask, &tol()).unwrap();
        }
    }

    #[test]
    fn empty_masks_are_domain_errors() {
        let a = pad_matrix(&[vec![1.0]]);
        assert!(find_nash(&a, &a, StrategyMask::EMPTY, mask(1), &tol()).is_err());
    }

    #[test]
    fn shifting_one_players_payoffs_shifts_only_their_value() {
        let a = pad_matrix(&[vec![2.0, 0.0], vec![0.0, 1.0]]);
        let b = pad_matrix(&[vec![1.0, 0.0], vec![0.0, 2.0]]);
        let mut a_shifted = a;
        for row in a_shifted.iter_mut().take(2) {
            for v in row.iter_mut().take(2) {
                *v += 10.0;
            }
        }
        let eqs = find_nash(&a, &b, mask(2), mask(2), &tol()).unwrap();
        let eqs_shifted = find_nash(&a_shifted, &b, mask(2), mask(2), &tol()).unwrap();
        assert_eq!(eqs.len(), eqs_shifted.len());
        for (e, s) in eqs.iter().zip(eqs_shifted.iter()) {
            assert!(strategies_close(&e.row, &s.row, 1e-9));
            assert!(strategies_close(&e.col, &s.col, 1e-9));
            assert!((s.value_row - e.value_row - 10.0).abs() < 1e-9);
            assert!((s.value_col - e.value_col).abs() < 1e-9);
        }
    }

    #[test]
    fn selection_prefers_welfare_then_lexicographic() {
        let a = pad_matrix(&[vec![2.0, 0.0], vec![0.0, 1.0]]);
        let b = pad_matrix(&[vec![1.0, 0.0], vec![0.0, 2.0]]);
        let eqs = find_nash(&a, &b, mask(2), mask(2), &tol()).unwrap();
        let selected = select_equilibrium(&eqs).unwrap();
        // welfare 3 for both pure equilibria beats 4/3 mixed; the tie
        // breaks to the lexicographically smaller row vector (0, 1, ...)
        assert_eq!(selected.row.as_pure(1e-9), Some(2));
        assert_eq!(selected.col.as_pure(1e-9), Some(2));
        assert!(select_equilibrium(&[]).is_err());
    }

    #[test]
    fn single_candidate_is_returned_as_is() {
        let a = pad_matrix(&[vec![1.0]]);
        let eqs = find_nash(&a, &a, mask(1), mask(1), &tol()).unwrap();
        let selected = select_equilibrium(&eqs).unwrap();
        assert_eq!(&selected, &eqs[0]);
    }
}
