//! A game compiled into flat arrays for repeated traversal.
//!
//! Solvers and best-response code visit every node thousands of times, so the
//! tree is expanded once from a [`GameDefinition`] and stored as an arena:
//! node 0 is the root, each node's children occupy a contiguous slice of
//! `children`, and decision nodes carry a dense infoset index.

use std::collections::HashMap;

use crate::exploitability::StrategyProfile;
use crate::game::{GameDefinition, GameError, HistoryState, InfoSetKey, PlayerId, StateKind};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Node {
    Terminal {
        /// Payoff to player 0; player 1 receives the negation.
        payoff: f64,
    },
    Chance {
        first: u32,
        len: u32,
    },
    Decision {
        player: PlayerId,
        infoset: u32,
        /// Start of this infoset's slice in flat per-action buffers.
        offset: u32,
        first: u32,
        len: u32,
    },
}

#[derive(Debug, Clone)]
pub struct InfosetInfo {
    pub key: InfoSetKey,
    pub action_labels: Vec<String>,
    /// Offset of this infoset's first action in flat per-action buffers.
    pub offset: usize,
    /// Every node belonging to the infoset.
    pub nodes: Vec<u32>,
}

impl InfosetInfo {
    pub fn num_actions(&self) -> usize {
        self.action_labels.len()
    }

    pub fn player(&self) -> PlayerId {
        self.key.player()
    }
}

#[derive(Debug, Clone)]
pub struct GameTree {
    name: String,
    delta: f64,
    nodes: Vec<Node>,
    children: Vec<u32>,
    /// Parallel to `children`; only meaningful for chance children.
    chance_probs: Vec<f64>,
    infosets: Vec<InfosetInfo>,
    by_key: HashMap<InfoSetKey, usize>,
    total_actions: usize,
}

/// One probability vector per infoset, indexed like [`GameTree::infosets`].
pub type StrategyTable = Vec<Vec<f64>>;

impl GameTree {
    /// Expands the full game. Fails if two histories sharing an infoset key
    /// disagree on the actor or the legal action labels.
    pub fn compile(game: &dyn GameDefinition) -> Result<Self, GameError> {
        let mut tree = GameTree {
            name: game.name().to_string(),
            delta: game.max_payoff_spread(),
            nodes: vec![Node::Terminal { payoff: 0.0 }],
            children: Vec::new(),
            chance_probs: Vec::new(),
            infosets: Vec::new(),
            by_key: HashMap::new(),
            total_actions: 0,
        };
        tree.expand(game, game.root(), 0)?;
        Ok(tree)
    }

    fn expand(&mut self, game: &dyn GameDefinition, state: HistoryState, index: usize) -> Result<(), GameError> {
        let (node, kids, probs) = match state.kind() {
            StateKind::Terminal => {
                let payoff = game.terminal_utility(&state, PlayerId::P0)?;
                self.nodes[index] = Node::Terminal { payoff };
                return Ok(());
            }
            StateKind::Chance => {
                let outcomes = game.chance_probabilities(&state)?;
                let first = self.children.len() as u32;
                let len = outcomes.len() as u32;
                let probs: Vec<f64> = outcomes.iter().map(|(_, p)| *p).collect();
                let kids = outcomes.into_iter().map(|(a, _)| a.id).collect::<Vec<_>>();
                (Node::Chance { first, len }, kids, probs)
            }
            StateKind::Decision(player) => {
                let key = game.infoset_key(&state)?;
                if key.player() != player {
                    return Err(GameError::InconsistentInfoset(key));
                }
                let actions = game.legal_actions(&state)?;
                let labels: Vec<String> = actions.iter().map(|a| a.label.clone()).collect();
                let infoset = match self.by_key.get(&key) {
                    Some(&i) => {
                        if self.infosets[i].action_labels != labels {
                            return Err(GameError::InconsistentInfoset(key));
                        }
                        i
                    }
                    None => {
                        let i = self.infosets.len();
                        self.infosets.push(InfosetInfo {
                            key: key.clone(),
                            offset: self.total_actions,
                            action_labels: labels,
                            nodes: Vec::new(),
                        });
                        self.total_actions += actions.len();
                        self.by_key.insert(key, i);
                        i
                    }
                };
                self.infosets[infoset].nodes.push(index as u32);
                let first = self.children.len() as u32;
                let len = actions.len() as u32;
                let n = actions.len();
                (
                    Node::Decision {
                        player,
                        infoset: infoset as u32,
                        offset: self.infosets[infoset].offset as u32,
                        first,
                        len,
                    },
                    actions.into_iter().map(|a| a.id).collect(),
                    vec![0.0; n],
                )
            }
        };
        self.nodes[index] = node;
        let first = self.children.len();
        for &p in &probs {
            let child = self.nodes.len();
            self.nodes.push(Node::Terminal { payoff: 0.0 });
            self.children.push(child as u32);
            self.chance_probs.push(p);
        }
        for (slot, action) in kids.into_iter().enumerate() {
            let child_state = game.next_state(&state, action)?;
            let child = self.children[first + slot] as usize;
            self.expand(game, child_state, child)?;
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Largest single-player stake of the source game.
    pub fn delta(&self) -> f64 {
        self.delta
    }

    #[inline]
    pub fn node(&self, index: usize) -> Node {
        self.nodes[index]
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    #[inline]
    pub fn child(&self, first: u32, slot: usize) -> usize {
        self.children[first as usize + slot] as usize
    }

    #[inline]
    pub fn chance_prob(&self, first: u32, slot: usize) -> f64 {
        self.chance_probs[first as usize + slot]
    }

    pub fn infosets(&self) -> &[InfosetInfo] {
        &self.infosets
    }

    pub fn infoset_index(&self, key: &InfoSetKey) -> Option<usize> {
        self.by_key.get(key).copied()
    }

    pub fn total_actions(&self) -> usize {
        self.total_actions
    }

    pub fn num_terminals(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, Node::Terminal { .. }))
            .count()
    }

    pub fn uniform_table(&self) -> StrategyTable {
        self.infosets
            .iter()
            .map(|i| vec![1.0 / i.num_actions() as f64; i.num_actions()])
            .collect()
    }

    /// Resolves a keyed profile against this tree; missing infosets play uniformly.
    pub fn table_from_profile(&self, profile: &StrategyProfile) -> StrategyTable {
        self.infosets
            .iter()
            .map(|info| match profile.get(&info.key) {
                Some(p) if p.len() == info.num_actions() => p.to_vec(),
                _ => vec![1.0 / info.num_actions() as f64; info.num_actions()],
            })
            .collect()
    }

    pub fn profile_from_table(&self, table: &StrategyTable) -> StrategyProfile {
        let mut profile = StrategyProfile::new();
        for (info, probs) in self.infosets.iter().zip(table) {
            profile.insert(info.key.clone(), probs.clone());
        }
        profile
    }
}
