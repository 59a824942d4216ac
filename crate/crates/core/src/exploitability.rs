//! Best responses and exploitability.
//!
//! The best response to a fixed opponent is computed by backward induction
//! over the compiled tree: every node value is weighted by the probability
//! that chance and the opponent reach it, and the responder picks, per
//! infoset, the action with the largest summed value over the infoset's
//! histories. Exploitability is `br_0 + br_1`, which is zero exactly at a
//! Nash equilibrium of a zero-sum game.
//!
//! [`expected_utility`] is deliberately written against the
//! [`GameDefinition`] contract rather than the compiled tree, so it serves as
//! an independent oracle for the solver's traversal.

use std::collections::HashMap;

use crate::game::{GameDefinition, GameError, HistoryState, InfoSetKey, PlayerId, StateKind};
use crate::tree::{GameTree, Node, StrategyTable};

/// Behavior strategies of both players keyed by infoset. Missing infosets
/// are played uniformly.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StrategyProfile {
    map: HashMap<InfoSetKey, Vec<f64>>,
}

impl StrategyProfile {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, key: InfoSetKey, probs: Vec<f64>) {
        self.map.insert(key, probs);
    }

    pub fn get(&self, key: &InfoSetKey) -> Option<&[f64]> {
        self.map.get(key).map(Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&InfoSetKey, &Vec<f64>)> {
        self.map.iter()
    }

    /// Probability of `action` out of `num_actions` at `key`.
    pub fn prob(&self, key: &InfoSetKey, action: usize, num_actions: usize) -> f64 {
        match self.map.get(key) {
            Some(p) if p.len() == num_actions => p[action],
            _ => 1.0 / num_actions as f64,
        }
    }

    /// True when every listed distribution is nonnegative and sums to one.
    pub fn is_valid(&self) -> bool {
        self.map
            .values()
            .all(|p| p.iter().all(|x| *x >= 0.0) && (p.iter().sum::<f64>() - 1.0).abs() < 1e-9)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExploitabilityReport {
    /// Value of `BR(σ_{-i})` for player `i`, indexed by player.
    pub br_value_per_player: [f64; 2],
    pub total_exploitability: f64,
    /// Player 0's expected utility under the profile.
    pub game_value_estimate: f64,
}

struct BestResponse<'a> {
    tree: &'a GameTree,
    table: &'a StrategyTable,
    player: PlayerId,
    reach: Vec<f64>,
    value: Vec<f64>,
    done: Vec<bool>,
    choice: Vec<Option<usize>>,
}

impl BestResponse<'_> {
    fn forward(&mut self, node: usize, reach: f64) {
        self.reach[node] = reach;
        match self.tree.node(node) {
            Node::Terminal { .. } => {}
            Node::Chance { first, len } => {
                for slot in 0..len as usize {
                    let p = self.tree.chance_prob(first, slot);
                    self.forward(self.tree.child(first, slot), reach * p);
                }
            }
            Node::Decision {
                player,
                infoset,
                first,
                len,
                ..
            } => {
                for slot in 0..len as usize {
                    let r = if player == self.player {
                        reach
                    } else {
                        reach * self.table[infoset as usize][slot]
                    };
                    self.forward(self.tree.child(first, slot), r);
                }
            }
        }
    }

    /// Reach-weighted value of `node` with the responder playing its best
    /// response below it.
    fn node_value(&mut self, node: usize) -> f64 {
        if self.done[node] {
            return self.value[node];
        }
        let v = match self.tree.node(node) {
            Node::Terminal { payoff } => {
                let u = if self.player == PlayerId::P0 { payoff } else { -payoff };
                self.reach[node] * u
            }
            Node::Chance { first, len } => (0..len as usize)
                .map(|s| self.tree.child(first, s))
                .collect::<Vec<_>>()
                .into_iter()
                .map(|c| self.node_value(c))
                .sum(),
            Node::Decision {
                player,
                infoset,
                first,
                len,
                ..
            } => {
                if player == self.player {
                    let a = self.best_action(infoset as usize);
                    self.node_value(self.tree.child(first, a))
                } else {
                    let mut v = 0.0;
                    for slot in 0..len as usize {
                        v += self.node_value(self.tree.child(first, slot));
                    }
                    v
                }
            }
        };
        self.value[node] = v;
        self.done[node] = true;
        v
    }

    fn best_action(&mut self, infoset: usize) -> usize {
        if let Some(a) = self.choice[infoset] {
            return a;
        }
        let tree = self.tree;
        let info = &tree.infosets()[infoset];
        let mut best = (0, f64::NEG_INFINITY);
        for a in 0..info.num_actions() {
            let mut total = 0.0;
            for &n in &info.nodes {
                if let Node::Decision { first, .. } = tree.node(n as usize) {
                    total += self.node_value(tree.child(first, a));
                }
            }
            if total > best.1 {
                best = (a, total);
            }
        }
        self.choice[infoset] = Some(best.0);
        best.0
    }
}

fn best_response_table(tree: &GameTree, table: &StrategyTable, player: PlayerId) -> (f64, Vec<Option<usize>>) {
    let n = tree.num_nodes();
    let mut br = BestResponse {
        tree,
        table,
        player,
        reach: vec![0.0; n],
        value: vec![0.0; n],
        done: vec![false; n],
        choice: vec![None; tree.infosets().len()],
    };
    br.forward(0, 1.0);
    let v = br.node_value(0);
    (v, br.choice)
}

/// `max_{σ'} u_i(σ', σ_{-i})`, ignoring the player's own entries in `profile`.
pub fn best_response_value(tree: &GameTree, profile: &StrategyProfile, player: PlayerId) -> f64 {
    best_response_table(tree, &tree.table_from_profile(profile), player).0
}

/// A pure best response as an action index per infoset of `player`.
pub fn best_response_strategy(tree: &GameTree, profile: &StrategyProfile, player: PlayerId) -> StrategyProfile {
    let (_, choice) = best_response_table(tree, &tree.table_from_profile(profile), player);
    let mut out = StrategyProfile::new();
    for (info, c) in tree.infosets().iter().zip(choice) {
        if info.player() == player {
            let mut p = vec![0.0; info.num_actions()];
            p[c.unwrap_or(0)] = 1.0;
            out.insert(info.key.clone(), p);
        }
    }
    out
}

fn table_value(tree: &GameTree, table: &StrategyTable, node: usize) -> f64 {
    match tree.node(node) {
        Node::Terminal { payoff } => payoff,
        Node::Chance { first, len } => (0..len as usize)
            .map(|s| tree.chance_prob(first, s) * table_value(tree, table, tree.child(first, s)))
            .sum(),
        Node::Decision {
            infoset, first, len, ..
        } => (0..len as usize)
            .map(|s| table[infoset as usize][s] * table_value(tree, table, tree.child(first, s)))
            .sum(),
    }
}

pub(crate) fn exploitability_of_table(tree: &GameTree, table: &StrategyTable) -> ExploitabilityReport {
    let br0 = best_response_table(tree, table, PlayerId::P0).0;
    let br1 = best_response_table(tree, table, PlayerId::P1).0;
    ExploitabilityReport {
        br_value_per_player: [br0, br1],
        total_exploitability: br0 + br1,
        game_value_estimate: table_value(tree, table, 0),
    }
}

pub fn exploitability(tree: &GameTree, profile: &StrategyProfile) -> ExploitabilityReport {
    exploitability_of_table(tree, &tree.table_from_profile(profile))
}

/// Exact expected utility by enumerating every terminal history of `game`.
pub fn expected_utility(game: &dyn GameDefinition, profile: &StrategyProfile, player: PlayerId) -> Result<f64, GameError> {
    fn go(game: &dyn GameDefinition, profile: &StrategyProfile, player: PlayerId, state: &HistoryState) -> Result<f64, GameError> {
        match state.kind() {
            StateKind::Terminal => game.terminal_utility(state, player),
            StateKind::Chance => {
                let mut v = 0.0;
                for (a, p) in game.chance_probabilities(state)? {
                    v += p * go(game, profile, player, &game.next_state(state, a.id)?)?;
                }
                Ok(v)
            }
            StateKind::Decision(_) => {
                let key = game.infoset_key(state)?;
                let actions = game.legal_actions(state)?;
                let n = actions.len();
                let mut v = 0.0;
                for a in actions {
                    let p = profile.prob(&key, a.id, n);
                    if p != 0.0 {
                        v += p * go(game, profile, player, &game.next_state(state, a.id)?)?;
                    }
                }
                Ok(v)
            }
        }
    }
    go(game, profile, player, &game.root())
}
