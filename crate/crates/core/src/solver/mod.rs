//! Exact full-tree CFR training.
//!
//! Every iteration walks the whole tree once per player, enumerating chance
//! outcomes with their probabilities. Counterfactual action values are summed
//! over the histories of each infoset, and the resulting instantaneous
//! regrets are handed to the active [`VariantPolicy`]. Training is
//! deterministic: no randomness is involved anywhere.

pub mod policy;
pub mod update;

use std::time::Instant;

use thiserror::Error;

use crate::exploitability::{exploitability_of_table, StrategyProfile};
use crate::game::PlayerId;
use crate::tree::{GameTree, Node, StrategyTable};

pub use policy::{BetaMode, Variant, VariantPolicy};
pub use update::RegretRecord;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("unknown solver {0:?} (expected cfr, cfr+, lcfr, dcfr or ecfr)")]
    UnknownPolicy(String),
    #[error("unparseable beta mode {0:?}")]
    BadBetaMode(String),
    #[error("iteration count must be at least 1")]
    NoIterations,
    #[error("non-finite value at infoset {key} on iteration {iteration}")]
    NonFinite { key: String, iteration: u64 },
    #[error("invariant violated at infoset {key} on iteration {iteration}: {what}")]
    Invariant {
        key: String,
        iteration: u64,
        what: String,
    },
}

/// How often the per-update invariants are asserted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InvariantMode {
    /// Every infoset update.
    Full,
    /// One in every `n` infoset updates.
    Sampled(u64),
    Off,
}

impl Default for InvariantMode {
    /// Every update in builds with debug assertions (including tests), one
    /// update in a hundred otherwise.
    fn default() -> Self {
        if cfg!(debug_assertions) {
            InvariantMode::Full
        } else {
            InvariantMode::Sampled(100)
        }
    }
}

/// Which iterations produce an exploitability sample.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EvalSchedule {
    /// Every `k`-th iteration.
    Every(u64),
    /// 1, 2, 5, 10, 20, 50, ... plus the final iteration.
    Geometric,
    /// Exactly these iterations (out-of-range entries are ignored).
    At(Vec<u64>),
    Never,
}

impl EvalSchedule {
    pub fn iterations(&self, total: u64) -> Vec<u64> {
        let mut its: Vec<u64> = match self {
            EvalSchedule::Every(k) => {
                let k = (*k).max(1);
                (1..=total / k).map(|i| i * k).collect()
            }
            EvalSchedule::Geometric => {
                let mut v = Vec::new();
                let mut decade = 1u64;
                'outer: loop {
                    for m in [1, 2, 5] {
                        let it = decade * m;
                        if it > total {
                            break 'outer;
                        }
                        v.push(it);
                    }
                    decade *= 10;
                }
                v.push(total);
                v
            }
            EvalSchedule::At(v) => v.iter().copied().filter(|&t| t >= 1 && t <= total).collect(),
            EvalSchedule::Never => Vec::new(),
        };
        its.sort_unstable();
        its.dedup();
        its
    }
}

/// One benchmark sample.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub game: String,
    pub solver: String,
    pub iteration: u64,
    pub exploitability: f64,
    /// Training wall time so far, excluding evaluation.
    pub elapsed_ms: u64,
}

/// Counterfactual values of every infoset of one player.
#[derive(Debug, Clone)]
pub struct CounterfactualValues {
    /// Expected utility of the player at the root.
    pub root_value: f64,
    /// `v(I)` per infoset index (zero for the other player's infosets).
    pub infoset_values: Vec<f64>,
    /// `v(I, a)` laid out by [`crate::tree::InfosetInfo::offset`].
    pub action_values: Vec<f64>,
    /// Own reach probability `π_i(I)` (shared by all histories of `I`).
    pub reach_self: Vec<f64>,
}

trait StrategySource {
    fn probs(&self, infoset: usize, offset: usize, len: usize) -> &[f64];
}

impl StrategySource for [Vec<f64>] {
    #[inline]
    fn probs(&self, infoset: usize, _offset: usize, _len: usize) -> &[f64] {
        &self[infoset]
    }
}

/// Strategies laid out like the tree's flat per-action buffers.
impl StrategySource for [f64] {
    #[inline]
    fn probs(&self, _infoset: usize, offset: usize, len: usize) -> &[f64] {
        &self[offset..offset + len]
    }
}

struct Walk<'a, S: StrategySource + ?Sized> {
    tree: &'a GameTree,
    strategy: &'a S,
    player: PlayerId,
    out: &'a mut CounterfactualValues,
}

impl<S: StrategySource + ?Sized> Walk<'_, S> {
    /// Returns the player's expected utility below `node` given it is reached.
    fn visit(&mut self, node: usize, reach_self: f64, reach_other: f64) -> f64 {
        match self.tree.node(node) {
            Node::Terminal { payoff } => match self.player {
                PlayerId::P0 => payoff,
                PlayerId::P1 => -payoff,
            },
            Node::Chance { first, len } => {
                let mut v = 0.0;
                for slot in 0..len as usize {
                    let p = self.tree.chance_prob(first, slot);
                    v += p * self.visit(self.tree.child(first, slot), reach_self, reach_other * p);
                }
                v
            }
            Node::Decision {
                player,
                infoset,
                offset,
                first,
                len,
            } => {
                let infoset = infoset as usize;
                let tree = self.tree;
                let strategy = self.strategy;
                let offset = offset as usize;
                let sigma = strategy.probs(infoset, offset, len as usize);
                if player == self.player {
                    let mut v = 0.0;
                    for slot in 0..len as usize {
                        let va = self.visit(tree.child(first, slot), reach_self * sigma[slot], reach_other);
                        self.out.action_values[offset + slot] += reach_other * va;
                        v += sigma[slot] * va;
                    }
                    self.out.infoset_values[infoset] += reach_other * v;
                    self.out.reach_self[infoset] = reach_self;
                    v
                } else {
                    let mut v = 0.0;
                    for slot in 0..len as usize {
                        let s = sigma[slot];
                        v += s * self.visit(tree.child(first, slot), reach_self, reach_other * s);
                    }
                    v
                }
            }
        }
    }
}

impl CounterfactualValues {
    fn zeroed(tree: &GameTree) -> Self {
        Self {
            root_value: 0.0,
            infoset_values: vec![0.0; tree.infosets().len()],
            action_values: vec![0.0; tree.total_actions()],
            reach_self: vec![0.0; tree.infosets().len()],
        }
    }

    fn reset(&mut self) {
        self.root_value = 0.0;
        self.infoset_values.iter_mut().for_each(|v| *v = 0.0);
        self.action_values.iter_mut().for_each(|v| *v = 0.0);
        self.reach_self.iter_mut().for_each(|v| *v = 0.0);
    }

    pub fn actions(&self, tree: &GameTree, infoset: usize) -> &[f64] {
        let info = &tree.infosets()[infoset];
        &self.action_values[info.offset..info.offset + info.num_actions()]
    }
}

fn walk_into<S: StrategySource + ?Sized>(
    tree: &GameTree,
    strategy: &S,
    player: PlayerId,
    out: &mut CounterfactualValues,
) {
    out.reset();
    let mut walk = Walk {
        tree,
        strategy,
        player,
        out,
    };
    let root = walk.visit(0, 1.0, 1.0);
    walk.out.root_value = root;
}

/// Both players' counterfactual values in a single pass, used when the
/// policy updates both players from the same strategy profile.
struct JointWalk<'a, S: StrategySource + ?Sized> {
    tree: &'a GameTree,
    strategy: &'a S,
    out: &'a mut [CounterfactualValues; 2],
}

impl<S: StrategySource + ?Sized> JointWalk<'_, S> {
    /// Returns P0's expected utility below `node` given it is reached.
    /// `reach` holds P0's, P1's and chance's contributions.
    fn visit(&mut self, node: usize, reach: [f64; 3]) -> f64 {
        match self.tree.node(node) {
            Node::Terminal { payoff } => payoff,
            Node::Chance { first, len } => {
                let mut v = 0.0;
                for slot in 0..len as usize {
                    let p = self.tree.chance_prob(first, slot);
                    v += p * self.visit(self.tree.child(first, slot), [reach[0], reach[1], reach[2] * p]);
                }
                v
            }
            Node::Decision {
                player,
                infoset,
                offset,
                first,
                len,
            } => {
                let infoset = infoset as usize;
                let tree = self.tree;
                let offset = offset as usize;
                let sigma = self.strategy.probs(infoset, offset, len as usize);
                let me = player.index();
                let other = reach[1 - me] * reach[2];
                // Values are stored from the acting player's perspective.
                let sign = if me == 0 { 1.0 } else { -1.0 };
                let mut v = 0.0;
                for slot in 0..len as usize {
                    let mut child_reach = reach;
                    child_reach[me] *= sigma[slot];
                    let va = self.visit(tree.child(first, slot), child_reach);
                    self.out[me].action_values[offset + slot] += other * sign * va;
                    v += sigma[slot] * va;
                }
                let out = &mut self.out[me];
                out.infoset_values[infoset] += other * sign * v;
                out.reach_self[infoset] = reach[me];
                v
            }
        }
    }
}

fn joint_walk_into<S: StrategySource + ?Sized>(tree: &GameTree, strategy: &S, out: &mut [CounterfactualValues; 2]) {
    out.iter_mut().for_each(CounterfactualValues::reset);
    let mut walk = JointWalk { tree, strategy, out };
    let root = walk.visit(0, [1.0, 1.0, 1.0]);
    walk.out[0].root_value = root;
    walk.out[1].root_value = -root;
}

/// Counterfactual values for `player` under a fixed strategy table.
pub fn counterfactual_values(tree: &GameTree, strategy: &StrategyTable, player: PlayerId) -> CounterfactualValues {
    let mut out = CounterfactualValues::zeroed(tree);
    walk_into(tree, strategy.as_slice(), player, &mut out);
    out
}

/// A solver bound to one game and one variant policy.
#[derive(Debug, Clone)]
pub struct SolverState<'g> {
    tree: &'g GameTree,
    policy: VariantPolicy,
    table: Vec<RegretRecord>,
    /// Every record's current strategy, in the tree's flat action layout.
    current: Vec<f64>,
    iteration: u64,
    invariants: InvariantMode,
    update_counter: u64,
    scratch: Option<Box<[CounterfactualValues; 2]>>,
}

impl<'g> SolverState<'g> {
    pub fn new(tree: &'g GameTree, policy: VariantPolicy) -> Self {
        let table = tree
            .infosets()
            .iter()
            .map(|i| RegretRecord::new(i.num_actions()))
            .collect::<Vec<RegretRecord>>();
        let mut current = vec![0.0; tree.total_actions()];
        for (info, record) in tree.infosets().iter().zip(&table) {
            current[info.offset..info.offset + info.num_actions()].copy_from_slice(&record.current_strategy);
        }
        Self {
            tree,
            policy,
            table,
            current,
            iteration: 0,
            invariants: InvariantMode::default(),
            update_counter: 0,
            scratch: None,
        }
    }

    pub fn with_invariants(mut self, mode: InvariantMode) -> Self {
        self.invariants = mode;
        self
    }

    pub fn tree(&self) -> &'g GameTree {
        self.tree
    }

    pub fn policy(&self) -> &VariantPolicy {
        &self.policy
    }

    /// Completed iterations.
    pub fn iteration(&self) -> u64 {
        self.iteration
    }

    pub fn records(&self) -> &[RegretRecord] {
        &self.table
    }

    pub fn record(&self, key: &crate::game::InfoSetKey) -> Option<&RegretRecord> {
        self.tree.infoset_index(key).map(|i| &self.table[i])
    }

    /// Runs one full iteration over both players.
    pub fn step(&mut self) -> Result<(), SolverError> {
        let t = self.iteration + 1;
        let [mut first, mut second] = match self.scratch.take() {
            Some(bufs) => *bufs,
            None => [
                CounterfactualValues::zeroed(self.tree),
                CounterfactualValues::zeroed(self.tree),
            ],
        };
        let result = if self.policy.alternating() {
            walk_into(self.tree, self.current.as_slice(), PlayerId::P0, &mut first);
            self.update_player(PlayerId::P0, &first, t).and_then(|_| {
                walk_into(self.tree, self.current.as_slice(), PlayerId::P1, &mut second);
                self.update_player(PlayerId::P1, &second, t)
            })
        } else {
            let mut both = [first, second];
            joint_walk_into(self.tree, self.current.as_slice(), &mut both);
            [first, second] = both;
            self.update_player(PlayerId::P0, &first, t)
                .and_then(|_| self.update_player(PlayerId::P1, &second, t))
        };
        self.scratch = Some(Box::new([first, second]));
        result?;
        self.iteration = t;
        Ok(())
    }

    fn should_check(&mut self) -> bool {
        self.update_counter += 1;
        match self.invariants {
            InvariantMode::Full => true,
            InvariantMode::Sampled(n) => self.update_counter % n.max(1) == 0,
            InvariantMode::Off => false,
        }
    }

    fn update_player(&mut self, player: PlayerId, cfv: &CounterfactualValues, t: u64) -> Result<(), SolverError> {
        let tree = self.tree;
        let policy = self.policy;
        for (idx, info) in tree.infosets().iter().enumerate() {
            if info.player() != player {
                continue;
            }
            let action_values = cfv.actions(tree, idx);
            let check = self.should_check();
            let record = &mut self.table[idx];
            let fail = |what: String| SolverError::Invariant {
                key: info.key.to_string(),
                iteration: t,
                what,
            };

            if check {
                let sigma = &record.current_strategy;
                check_distribution(sigma).map_err(fail)?;
                let value = update::strategy_value(sigma, action_values);
                if (value - cfv.infoset_values[idx]).abs() > 1e-9 {
                    return Err(fail(format!(
                        "v(I) = {} but Σσ·v(I,a) = {value}",
                        cfv.infoset_values[idx]
                    )));
                }
                let orth: f64 = sigma.iter().zip(action_values).map(|(s, v)| s * (v - value)).sum();
                if orth.abs() > 1e-9 {
                    return Err(fail(format!("Σσ·r = {orth}")));
                }
            }

            record.apply_update(action_values, cfv.reach_self[idx], t, &policy);
            self.current[info.offset..info.offset + info.num_actions()].copy_from_slice(&record.current_strategy);

            if !record.is_finite() {
                return Err(SolverError::NonFinite {
                    key: info.key.to_string(),
                    iteration: t,
                });
            }
            if check {
                check_distribution(&record.current_strategy).map_err(fail)?;
                check_average(&record.avg_strategy_numerator).map_err(fail)?;
                if policy.variant == Variant::CfrPlus && record.cumulative_regret.iter().any(|r| *r < 0.0) {
                    return Err(fail("negative CFR+ regret".into()));
                }
            }
        }
        Ok(())
    }

    /// Average strategy per infoset index.
    pub fn average_table(&self) -> StrategyTable {
        self.table.iter().map(RegretRecord::average_strategy).collect()
    }

    pub fn current_table(&self) -> StrategyTable {
        self.table.iter().map(|r| r.current_strategy.clone()).collect()
    }

    /// The average strategy keyed by infoset; unreached infosets are uniform.
    pub fn extract_average_strategy(&self) -> StrategyProfile {
        self.tree.profile_from_table(&self.average_table())
    }

    /// Largest `max_a R(I, a) / T` over all infosets.
    pub fn max_average_regret(&self) -> f64 {
        if self.iteration == 0 {
            return 0.0;
        }
        let t = self.iteration as f64;
        self.table
            .iter()
            .flat_map(|r| r.cumulative_regret.iter())
            .fold(f64::NEG_INFINITY, |m, r| m.max(*r))
            / t
    }

    /// Trains to `iterations` total, sampling exploitability on `schedule`.
    ///
    /// Each sample is handed to `sink` as soon as it is computed.
    pub fn run<F>(
        &mut self,
        iterations: u64,
        schedule: &EvalSchedule,
        label: &str,
        mut sink: F,
    ) -> Result<Vec<ConvergenceRow>, RunError>
    where
        F: FnMut(&ConvergenceRow) -> std::io::Result<()>,
    {
        if iterations == 0 {
            return Err(SolverError::NoIterations.into());
        }
        let evals = schedule.iterations(iterations);
        let mut next_eval = evals.iter().peekable();
        let mut rows = Vec::with_capacity(evals.len());
        let mut trained = std::time::Duration::ZERO;
        while self.iteration < iterations {
            let start = Instant::now();
            self.step()?;
            trained += start.elapsed();
            if next_eval.peek().is_some_and(|&&it| it == self.iteration) {
                next_eval.next();
                let report = exploitability_of_table(self.tree, &self.average_table());
                if self.invariants != InvariantMode::Off && report.total_exploitability < -1e-9 {
                    return Err(SolverError::Invariant {
                        key: "<root>".into(),
                        iteration: self.iteration,
                        what: format!("negative exploitability {}", report.total_exploitability),
                    }
                    .into());
                }
                let row = ConvergenceRow {
                    game: self.tree.name().to_string(),
                    solver: label.to_string(),
                    iteration: self.iteration,
                    exploitability: report.total_exploitability,
                    elapsed_ms: trained.as_millis() as u64,
                };
                sink(&row)?;
                rows.push(row);
            }
        }
        Ok(rows)
    }
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("writing results: {0}")]
    Io(#[from] std::io::Error),
}

fn check_distribution(p: &[f64]) -> Result<(), String> {
    if p.iter().any(|x| !(*x >= 0.0)) {
        return Err(format!("negative or NaN probability in {p:?}"));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(format!("probabilities sum to {total}"));
    }
    Ok(())
}

/// The normalized form of `numerator` must be a distribution; an all-zero
/// numerator stands for the uniform strategy.
fn check_average(numerator: &[f64]) -> Result<(), String> {
    if numerator.iter().any(|x| !(*x >= 0.0)) {
        return Err(format!("negative or NaN average numerator in {numerator:?}"));
    }
    let total: f64 = numerator.iter().sum();
    if total > 0.0 {
        let normalized: f64 = numerator.iter().map(|x| x / total).sum();
        if (normalized - 1.0).abs() > 1e-9 {
            return Err(format!("average strategy sums to {normalized}"));
        }
    }
    Ok(())
}

/// Trains `policy` on `tree` for `iterations` and returns the solver plus its samples.
pub fn train<'g>(
    tree: &'g GameTree,
    policy: VariantPolicy,
    iterations: u64,
    schedule: &EvalSchedule,
) -> Result<(SolverState<'g>, Vec<ConvergenceRow>), RunError> {
    let mut state = SolverState::new(tree, policy);
    let label = policy.label();
    let rows = state.run(iterations, schedule, &label, |_| Ok(()))?;
    Ok((state, rows))
}
