//! The extensive-form game contract shared by every concrete game and solver.
//!
//! A game is described by a [`GameDefinition`]: it answers, for any
//! [`HistoryState`], who acts, which actions are legal, how chance is
//! distributed, what the terminal payoffs are and which information set the
//! acting player is in. States are immutable values; [`GameDefinition::next_state`]
//! always returns a fresh child.

use std::fmt;

use thiserror::Error;

/// One of the two decision players.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PlayerId {
    P0,
    P1,
}

impl PlayerId {
    pub const BOTH: [PlayerId; 2] = [PlayerId::P0, PlayerId::P1];

    #[inline]
    pub fn index(self) -> usize {
        match self {
            PlayerId::P0 => 0,
            PlayerId::P1 => 1,
        }
    }

    #[inline]
    pub fn opponent(self) -> PlayerId {
        match self {
            PlayerId::P0 => PlayerId::P1,
            PlayerId::P1 => PlayerId::P0,
        }
    }

    pub fn from_index(index: usize) -> Option<PlayerId> {
        match index {
            0 => Some(PlayerId::P0),
            1 => Some(PlayerId::P1),
            _ => None,
        }
    }
}

impl fmt::Display for PlayerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "P{}", self.index())
    }
}

/// Whoever moves at a non-terminal state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Actor {
    Player(PlayerId),
    /// Nature. Never receives a payoff.
    Chance,
}

/// An action available at a decision point or a chance outcome.
///
/// Ids are dense (`0..k`) and local to the state they were listed at.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Action {
    pub id: usize,
    pub label: String,
}

impl Action {
    pub fn new(id: usize, label: impl Into<String>) -> Self {
        Self {
            id,
            label: label.into(),
        }
    }
}

/// Cached classification of a history.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StateKind {
    Decision(PlayerId),
    Chance,
    Terminal,
}

/// A node of the game tree, identified by the action ids taken from the root.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct HistoryState {
    actions: Vec<usize>,
    kind: StateKind,
}

impl HistoryState {
    /// Games construct states; solvers only receive them.
    pub fn new(actions: Vec<usize>, kind: StateKind) -> Self {
        Self { actions, kind }
    }

    pub fn actions(&self) -> &[usize] {
        &self.actions
    }

    pub fn kind(&self) -> StateKind {
        self.kind
    }

    pub fn is_root(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn is_terminal(&self) -> bool {
        self.kind == StateKind::Terminal
    }

    pub fn actor(&self) -> Option<Actor> {
        match self.kind {
            StateKind::Decision(p) => Some(Actor::Player(p)),
            StateKind::Chance => Some(Actor::Chance),
            StateKind::Terminal => None,
        }
    }
}

impl fmt::Display for HistoryState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, a) in self.actions.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, "]")
    }
}

/// Identifier of an information set: the acting player plus everything that
/// player has observed, in the canonical form
/// `P<idx>|<private>|<public>|<betting>`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct InfoSetKey {
    player: PlayerId,
    observation: String,
}

impl InfoSetKey {
    pub fn new(player: PlayerId, observation: impl Into<String>) -> Self {
        Self {
            player,
            observation: observation.into(),
        }
    }

    pub fn player(&self) -> PlayerId {
        self.player
    }

    pub fn observation(&self) -> &str {
        &self.observation
    }
}

impl fmt::Display for InfoSetKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}|{}", self.player, self.observation)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GameError {
    #[error("state {0} is terminal")]
    TerminalState(HistoryState),
    #[error("state {0} is not terminal")]
    NotTerminal(HistoryState),
    #[error("state {0} is a chance node")]
    ChanceNode(HistoryState),
    #[error("state {0} is a decision node, not a chance node")]
    NotChance(HistoryState),
    #[error("action {action} is not legal at state {state}")]
    IllegalAction { state: HistoryState, action: usize },
    #[error("state {0} was not produced by this game")]
    InvalidState(HistoryState),
    #[error("expected {expected} public cards, got {got}")]
    PublicCardCount { expected: usize, got: usize },
    #[error("histories in infoset {0} disagree on actor or legal actions")]
    InconsistentInfoset(InfoSetKey),
    #[error("unknown game {0:?} (expected kuhn, leduc or royal)")]
    UnknownGame(String),
}

/// A finite two-player zero-sum extensive-form game with uniform chance.
pub trait GameDefinition: Send + Sync {
    fn name(&self) -> &str;

    /// The empty history.
    fn root(&self) -> HistoryState;

    fn legal_actions(&self, state: &HistoryState) -> Result<Vec<Action>, GameError>;

    fn next_state(&self, state: &HistoryState, action: usize) -> Result<HistoryState, GameError>;

    fn current_player(&self, state: &HistoryState) -> Result<Actor, GameError> {
        state
            .actor()
            .ok_or_else(|| GameError::TerminalState(state.clone()))
    }

    /// Outcome distribution at a chance node; every probability is positive.
    fn chance_probabilities(&self, state: &HistoryState) -> Result<Vec<(Action, f64)>, GameError>;

    /// Payoff in chips. `u_0(z) + u_1(z) == 0` at every terminal.
    fn terminal_utility(&self, state: &HistoryState, player: PlayerId) -> Result<f64, GameError>;

    fn infoset_key(&self, state: &HistoryState) -> Result<InfoSetKey, GameError>;

    /// Largest stake a single player can commit; bounds every payoff magnitude.
    fn max_payoff_spread(&self) -> f64;
}

/// Node, terminal and infoset counts of a full enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TreeStats {
    pub nodes: usize,
    pub terminals: usize,
    pub chance_nodes: usize,
    pub decision_nodes: usize,
    pub infosets: usize,
}

/// Walks the whole game from the root.
pub fn enumerate_stats(game: &dyn GameDefinition) -> Result<TreeStats, GameError> {
    let mut stats = TreeStats::default();
    let mut keys = std::collections::HashSet::new();
    let mut stack = vec![game.root()];
    while let Some(state) = stack.pop() {
        stats.nodes += 1;
        match state.kind() {
            StateKind::Terminal => {
                stats.terminals += 1;
                continue;
            }
            StateKind::Chance => stats.chance_nodes += 1,
            StateKind::Decision(_) => {
                stats.decision_nodes += 1;
                keys.insert(game.infoset_key(&state)?);
            }
        }
        for action in game.legal_actions(&state)? {
            stack.push(game.next_state(&state, action.id)?);
        }
    }
    stats.infosets = keys.len();
    Ok(stats)
}
