//! Kuhn, Leduc and Royal poker.
//!
//! All three share one engine: each player antes 1 and receives one private
//! card, then a fixed-limit betting round is played. Leduc and Royal reveal
//! one public card before every later round. At showdown a private card that
//! pairs a public card beats any unpaired hand; otherwise the higher private
//! rank wins and equal ranks split the pot.
//!
//! | game  | deck            | rounds | bet sizes | max bets per round |
//! |-------|-----------------|--------|-----------|--------------------|
//! | kuhn  | J Q K           | 1      | 1         | 1                  |
//! | leduc | J Q K x 2 suits | 2      | 2, 4      | 2                  |
//! | royal | J Q K A x 2     | 3      | 2, 4, 4   | 2                  |

use std::fmt;

use crate::game::{Action, GameDefinition, GameError, HistoryState, InfoSetKey, PlayerId, StateKind};

const RANK_NAMES: [char; 4] = ['J', 'Q', 'K', 'A'];
const SUIT_NAMES: [char; 2] = ['s', 'h'];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Card {
    pub rank: u8,
    pub suit: u8,
}

impl Card {
    pub fn new(rank: u8, suit: u8) -> Self {
        Self { rank, suit }
    }
}

impl fmt::Display for Card {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", RANK_NAMES[self.rank as usize], SUIT_NAMES[self.suit as usize])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BettingRules {
    pub rounds: usize,
    pub bet_size_per_round: Vec<u32>,
    pub ante: u32,
    /// Bets plus raises allowed in one round; the opening bet counts.
    pub max_raises_per_round: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Bet {
    Check,
    Bet,
    Fold,
    Call,
    Raise,
}

impl Bet {
    fn label(self) -> &'static str {
        match self {
            Bet::Check => "check",
            Bet::Bet => "bet",
            Bet::Fold => "fold",
            Bet::Call => "call",
            Bet::Raise => "raise",
        }
    }

    fn symbol(self) -> char {
        match self {
            Bet::Check | Bet::Call => 'k',
            Bet::Bet => 'b',
            Bet::Raise => 'r',
            Bet::Fold => 'f',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    DealPrivate,
    DealPublic,
    Betting,
    Folded(PlayerId),
    Showdown,
}

/// Everything implied by replaying an action sequence.
#[derive(Debug, Clone)]
struct Situation {
    phase: Phase,
    hands: [usize; 2],
    public: Vec<usize>,
    round: usize,
    contrib: [u32; 2],
    betting: Vec<String>,
    raises: u32,
    to_act: PlayerId,
}

/// A poker variant from the Kuhn/Leduc/Royal family.
#[derive(Debug, Clone)]
pub struct PokerGame {
    name: String,
    deck: Vec<Card>,
    single_suit: bool,
    rules: BettingRules,
}

pub fn build_kuhn() -> PokerGame {
    PokerGame::new(
        "kuhn",
        3,
        1,
        BettingRules {
            rounds: 1,
            bet_size_per_round: vec![1],
            ante: 1,
            max_raises_per_round: 1,
        },
    )
}

pub fn build_leduc() -> PokerGame {
    PokerGame::new(
        "leduc",
        3,
        2,
        BettingRules {
            rounds: 2,
            bet_size_per_round: vec![2, 4],
            ante: 1,
            max_raises_per_round: 2,
        },
    )
}

pub fn build_royal() -> PokerGame {
    PokerGame::new(
        "royal",
        4,
        2,
        BettingRules {
            rounds: 3,
            bet_size_per_round: vec![2, 4, 4],
            ante: 1,
            max_raises_per_round: 2,
        },
    )
}

/// Looks up one of the benchmark games: `kuhn`, `leduc` or `royal`.
pub fn game_by_name(name: &str) -> Result<PokerGame, GameError> {
    match name.to_ascii_lowercase().as_str() {
        "kuhn" => Ok(build_kuhn()),
        "leduc" => Ok(build_leduc()),
        "royal" => Ok(build_royal()),
        _ => Err(GameError::UnknownGame(name.to_string())),
    }
}

pub const GAME_NAMES: [&str; 3] = ["kuhn", "leduc", "royal"];

impl PokerGame {
    fn new(name: &str, ranks: u8, suits: u8, rules: BettingRules) -> Self {
        // Deck order is rank-major so that card indices sort by rank.
        let deck = (0..ranks)
            .flat_map(|r| (0..suits).map(move |s| Card::new(r, s)))
            .collect();
        Self {
            name: name.to_string(),
            deck,
            single_suit: suits == 1,
            rules,
        }
    }

    pub fn deck(&self) -> &[Card] {
        &self.deck
    }

    pub fn rules(&self) -> &BettingRules {
        &self.rules
    }

    pub fn public_card_count(&self) -> usize {
        self.rules.rounds - 1
    }

    fn card_name(&self, index: usize) -> String {
        let card = self.deck[index];
        if self.single_suit {
            RANK_NAMES[card.rank as usize].to_string()
        } else {
            card.to_string()
        }
    }

    /// Showdown strength; the larger key wins and equal keys tie.
    ///
    /// A private card that pairs any public card scores `1000 + rank`,
    /// anything else scores its rank.
    pub fn hand_rank(&self, private: Card, publics: &[Card]) -> Result<u32, GameError> {
        if publics.len() != self.public_card_count() {
            return Err(GameError::PublicCardCount {
                expected: self.public_card_count(),
                got: publics.len(),
            });
        }
        let paired = publics.iter().any(|p| p.rank == private.rank);
        Ok(if paired { 1000 } else { 0 } + u32::from(private.rank))
    }

    fn initial(&self) -> Situation {
        Situation {
            phase: Phase::DealPrivate,
            hands: [usize::MAX; 2],
            public: Vec::new(),
            round: 0,
            contrib: [self.rules.ante; 2],
            betting: vec![String::new()],
            raises: 0,
            to_act: PlayerId::P0,
        }
    }

    fn private_deals(&self) -> Vec<[usize; 2]> {
        let n = self.deck.len();
        let mut deals = Vec::with_capacity(n * (n - 1));
        for a in 0..n {
            for b in 0..n {
                if a != b {
                    deals.push([a, b]);
                }
            }
        }
        deals
    }

    fn remaining_cards(&self, sit: &Situation) -> Vec<usize> {
        (0..self.deck.len())
            .filter(|c| !sit.hands.contains(c) && !sit.public.contains(c))
            .collect()
    }

    fn betting_options(&self, sit: &Situation) -> Vec<Bet> {
        let can_raise = sit.raises < self.rules.max_raises_per_round;
        let facing_bet = sit.contrib[0] != sit.contrib[1];
        match (facing_bet, can_raise) {
            (false, true) => vec![Bet::Check, Bet::Bet],
            (false, false) => vec![Bet::Check],
            (true, true) => vec![Bet::Fold, Bet::Call, Bet::Raise],
            (true, false) => vec![Bet::Fold, Bet::Call],
        }
    }

    /// Number of outcomes or actions available in `sit`; zero when terminal.
    fn branching(&self, sit: &Situation) -> usize {
        match sit.phase {
            Phase::DealPrivate => self.deck.len() * (self.deck.len() - 1),
            Phase::DealPublic => self.deck.len() - 2 - sit.public.len(),
            Phase::Betting => self.betting_options(sit).len(),
            Phase::Folded(_) | Phase::Showdown => 0,
        }
    }

    fn close_round(&self, sit: &mut Situation) {
        if sit.round + 1 == self.rules.rounds {
            sit.phase = Phase::Showdown;
        } else {
            sit.round += 1;
            sit.phase = Phase::DealPublic;
            sit.raises = 0;
            sit.to_act = PlayerId::P0;
            sit.betting.push(String::new());
        }
    }

    fn apply(&self, sit: &mut Situation, action: usize) -> Result<(), ()> {
        if action >= self.branching(sit) {
            return Err(());
        }
        match sit.phase {
            Phase::DealPrivate => {
                sit.hands = self.private_deals()[action];
                sit.phase = Phase::Betting;
            }
            Phase::DealPublic => {
                let card = self.remaining_cards(sit)[action];
                sit.public.push(card);
                sit.phase = Phase::Betting;
            }
            Phase::Betting => {
                let bet = self.betting_options(sit)[action];
                let actor = sit.to_act.index();
                let opp = sit.to_act.opponent().index();
                let line = sit.betting.last_mut().expect("one betting string per round");
                line.push(bet.symbol());
                match bet {
                    Bet::Check => {
                        if line.len() >= 2 {
                            self.close_round(sit);
                            return Ok(());
                        }
                    }
                    Bet::Bet | Bet::Raise => {
                        sit.contrib[actor] =
                            sit.contrib[opp] + self.rules.bet_size_per_round[sit.round];
                        sit.raises += 1;
                    }
                    Bet::Call => {
                        sit.contrib[actor] = sit.contrib[opp];
                        self.close_round(sit);
                        return Ok(());
                    }
                    Bet::Fold => {
                        sit.phase = Phase::Folded(sit.to_act);
                        return Ok(());
                    }
                }
                sit.to_act = sit.to_act.opponent();
            }
            Phase::Folded(_) | Phase::Showdown => return Err(()),
        }
        Ok(())
    }

    fn replay(&self, state: &HistoryState) -> Result<Situation, GameError> {
        let mut sit = self.initial();
        for &a in state.actions() {
            self.apply(&mut sit, a)
                .map_err(|_| GameError::InvalidState(state.clone()))?;
        }
        Ok(sit)
    }

    fn kind_of(sit: &Situation) -> StateKind {
        match sit.phase {
            Phase::DealPrivate | Phase::DealPublic => StateKind::Chance,
            Phase::Betting => StateKind::Decision(sit.to_act),
            Phase::Folded(_) | Phase::Showdown => StateKind::Terminal,
        }
    }

    fn payoff_p0(&self, sit: &Situation) -> Result<f64, ()> {
        match sit.phase {
            Phase::Folded(folder) => {
                let lost = f64::from(sit.contrib[folder.index()]);
                Ok(if folder == PlayerId::P0 { -lost } else { lost })
            }
            Phase::Showdown => {
                let publics: Vec<Card> = sit.public.iter().map(|&c| self.deck[c]).collect();
                let s0 = self.hand_rank(self.deck[sit.hands[0]], &publics).map_err(|_| ())?;
                let s1 = self.hand_rank(self.deck[sit.hands[1]], &publics).map_err(|_| ())?;
                let pot = f64::from(sit.contrib[0]);
                Ok(match s0.cmp(&s1) {
                    std::cmp::Ordering::Greater => pot,
                    std::cmp::Ordering::Less => -pot,
                    std::cmp::Ordering::Equal => 0.0,
                })
            }
            _ => Err(()),
        }
    }
}

impl GameDefinition for PokerGame {
    fn name(&self) -> &str {
        &self.name
    }

    fn root(&self) -> HistoryState {
        HistoryState::new(Vec::new(), StateKind::Chance)
    }

    fn legal_actions(&self, state: &HistoryState) -> Result<Vec<Action>, GameError> {
        let sit = self.replay(state)?;
        match sit.phase {
            Phase::DealPrivate => Ok(self
                .private_deals()
                .iter()
                .enumerate()
                .map(|(i, [a, b])| {
                    Action::new(i, format!("{}{}", self.card_name(*a), self.card_name(*b)))
                })
                .collect()),
            Phase::DealPublic => Ok(self
                .remaining_cards(&sit)
                .into_iter()
                .enumerate()
                .map(|(i, c)| Action::new(i, self.card_name(c)))
                .collect()),
            Phase::Betting => Ok(self
                .betting_options(&sit)
                .into_iter()
                .enumerate()
                .map(|(i, b)| Action::new(i, b.label()))
                .collect()),
            Phase::Folded(_) | Phase::Showdown => Err(GameError::TerminalState(state.clone())),
        }
    }

    fn next_state(&self, state: &HistoryState, action: usize) -> Result<HistoryState, GameError> {
        let mut sit = self.replay(state)?;
        if matches!(sit.phase, Phase::Folded(_) | Phase::Showdown) {
            return Err(GameError::TerminalState(state.clone()));
        }
        self.apply(&mut sit, action)
            .map_err(|_| GameError::IllegalAction {
                state: state.clone(),
                action,
            })?;
        let mut actions = state.actions().to_vec();
        actions.push(action);
        Ok(HistoryState::new(actions, Self::kind_of(&sit)))
    }

    fn chance_probabilities(&self, state: &HistoryState) -> Result<Vec<(Action, f64)>, GameError> {
        match state.kind() {
            StateKind::Chance => {
                let actions = self.legal_actions(state)?;
                let p = 1.0 / actions.len() as f64;
                Ok(actions.into_iter().map(|a| (a, p)).collect())
            }
            StateKind::Terminal => Err(GameError::TerminalState(state.clone())),
            StateKind::Decision(_) => Err(GameError::NotChance(state.clone())),
        }
    }

    fn terminal_utility(&self, state: &HistoryState, player: PlayerId) -> Result<f64, GameError> {
        let sit = self.replay(state)?;
        let u0 = self
            .payoff_p0(&sit)
            .map_err(|_| GameError::NotTerminal(state.clone()))?;
        Ok(match player {
            PlayerId::P0 => u0,
            PlayerId::P1 => -u0,
        })
    }

    fn infoset_key(&self, state: &HistoryState) -> Result<InfoSetKey, GameError> {
        let sit = self.replay(state)?;
        let player = match sit.phase {
            Phase::Betting => sit.to_act,
            Phase::DealPrivate | Phase::DealPublic => return Err(GameError::ChanceNode(state.clone())),
            _ => return Err(GameError::TerminalState(state.clone())),
        };
        let mut obs = self.card_name(sit.hands[player.index()]);
        obs.push('|');
        if self.public_card_count() > 0 {
            for &c in &sit.public {
                obs.push_str(&self.card_name(c));
            }
            obs.push('|');
        }
        obs.push_str(&sit.betting.join("/"));
        Ok(InfoSetKey::new(player, obs))
    }

    fn max_payoff_spread(&self) -> f64 {
        let bets: u32 = self
            .rules
            .bet_size_per_round
            .iter()
            .map(|b| b * self.rules.max_raises_per_round)
            .sum();
        f64::from(self.rules.ante + bets)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{enumerate_stats, Actor};

    fn play(game: &PokerGame, actions: &[usize]) -> HistoryState {
        actions
            .iter()
            .fold(game.root(), |s, &a| game.next_state(&s, a).unwrap())
    }

    fn deal_index(game: &PokerGame, p0: usize, p1: usize) -> usize {
        game.private_deals().iter().position(|d| *d == [p0, p1]).unwrap()
    }

    #[test]
    fn kuhn_root_is_six_ordered_deals() {
        let g = build_kuhn();
        let acts = g.legal_actions(&g.root()).unwrap();
        assert_eq!(acts.len(), 6);
        assert_eq!(acts[0].label, "JQ");
        let probs = g.chance_probabilities(&g.root()).unwrap();
        assert!(probs.iter().all(|(_, p)| (*p - 1.0 / 6.0).abs() < 1e-15));
        assert_eq!(g.current_player(&g.root()).unwrap(), Actor::Chance);
    }

    #[test]
    fn kuhn_first_decision() {
        let g = build_kuhn();
        let s = play(&g, &[0]);
        assert_eq!(g.current_player(&s).unwrap(), Actor::Player(PlayerId::P0));
        let labels: Vec<_> = g.legal_actions(&s).unwrap().into_iter().map(|a| a.label).collect();
        assert_eq!(labels, ["check", "bet"]);
        assert_eq!(g.infoset_key(&s).unwrap().to_string(), "P0|J|");
    }

    #[test]
    fn kuhn_check_check_is_showdown() {
        let g = build_kuhn();
        // P0 holds K, P1 holds Q.
        let s = play(&g, &[deal_index(&g, 2, 1), 0, 0]);
        assert!(s.is_terminal());
        assert_eq!(g.terminal_utility(&s, PlayerId::P0).unwrap(), 1.0);
        assert_eq!(g.terminal_utility(&s, PlayerId::P1).unwrap(), -1.0);
    }

    #[test]
    fn kuhn_bet_fold_wins_ante() {
        let g = build_kuhn();
        let s = play(&g, &[deal_index(&g, 0, 2), 1, 0]);
        assert!(s.is_terminal());
        assert_eq!(g.terminal_utility(&s, PlayerId::P0).unwrap(), 1.0);
    }

    #[test]
    fn kuhn_bet_call_showdown_for_two() {
        let g = build_kuhn();
        let s = play(&g, &[deal_index(&g, 0, 2), 1, 1]);
        assert_eq!(g.terminal_utility(&s, PlayerId::P0).unwrap(), -2.0);
    }

    #[test]
    fn kuhn_second_player_key_hides_opponent_card() {
        let g = build_kuhn();
        let a = play(&g, &[deal_index(&g, 0, 1), 1]);
        let b = play(&g, &[deal_index(&g, 2, 1), 1]);
        assert_eq!(g.infoset_key(&a).unwrap(), g.infoset_key(&b).unwrap());
        assert_eq!(g.infoset_key(&a).unwrap().to_string(), "P1|Q|b");
    }

    #[test]
    fn terminal_and_illegal_queries_fail() {
        let g = build_kuhn();
        let t = play(&g, &[0, 0, 0]);
        assert!(matches!(g.legal_actions(&t), Err(GameError::TerminalState(_))));
        assert!(matches!(g.current_player(&t), Err(GameError::TerminalState(_))));
        assert!(matches!(g.next_state(&t, 0), Err(GameError::TerminalState(_))));
        let s = play(&g, &[0]);
        assert!(matches!(
            g.next_state(&s, 7),
            Err(GameError::IllegalAction { action: 7, .. })
        ));
        assert!(matches!(g.terminal_utility(&s, PlayerId::P0), Err(GameError::NotTerminal(_))));
        assert!(matches!(g.chance_probabilities(&s), Err(GameError::NotChance(_))));
        assert!(matches!(g.infoset_key(&g.root()), Err(GameError::ChanceNode(_))));
    }

    #[test]
    fn kuhn_counts() {
        let stats = enumerate_stats(&build_kuhn()).unwrap();
        assert_eq!(stats.terminals, 30);
        assert_eq!(stats.infosets, 12);
        assert_eq!(stats.decision_nodes, 24);
        assert_eq!(stats.chance_nodes, 1);
        assert_eq!(stats.nodes, 55);
    }

    #[test]
    fn leduc_structure() {
        let g = build_leduc();
        assert_eq!(g.deck().len(), 6);
        assert_eq!(g.public_card_count(), 1);
        assert_eq!(g.max_payoff_spread(), 13.0);
        // check-check closes round one
        let s = play(&g, &[0, 0, 0]);
        assert_eq!(g.current_player(&s).unwrap(), Actor::Chance);
        let probs = g.chance_probabilities(&s).unwrap();
        assert_eq!(probs.len(), 4);
        assert!(probs.iter().all(|(_, p)| (*p - 0.25).abs() < 1e-15));
        let s = play(&g, &[0, 0, 0, 0]);
        assert_eq!(g.current_player(&s).unwrap(), Actor::Player(PlayerId::P0));
    }

    #[test]
    fn leduc_raise_cap() {
        let g = build_leduc();
        // bet, raise: facing the raise only fold/call remain
        let s = play(&g, &[0, 1, 2]);
        let labels: Vec<_> = g.legal_actions(&s).unwrap().into_iter().map(|a| a.label).collect();
        assert_eq!(labels, ["fold", "call"]);
        let called = g.next_state(&s, 1).unwrap();
        assert_eq!(called.kind(), StateKind::Chance);
    }

    #[test]
    fn royal_structure() {
        let g = build_royal();
        assert_eq!(g.deck().len(), 8);
        assert_eq!(g.rules().rounds, 3);
        assert_eq!(g.rules().bet_size_per_round, vec![2, 4, 4]);
        assert_eq!(g.public_card_count(), 2);
        let s = play(&g, &[0, 0, 0, 0, 0, 0]);
        assert_eq!(g.chance_probabilities(&s).unwrap().len(), 5);
        assert_eq!(g.max_payoff_spread(), 21.0);
    }

    #[test]
    fn hand_ranks() {
        let kuhn = build_kuhn();
        let k = Card::new(2, 0);
        let q = Card::new(1, 0);
        assert!(kuhn.hand_rank(k, &[]).unwrap() > kuhn.hand_rank(q, &[]).unwrap());
        assert!(kuhn.hand_rank(k, &[q]).is_err());

        let leduc = build_leduc();
        let j = Card::new(0, 0);
        let pub_j = Card::new(0, 1);
        assert_eq!(leduc.hand_rank(j, &[pub_j]).unwrap(), 1000);
        assert!(leduc.hand_rank(j, &[pub_j]).unwrap() > leduc.hand_rank(k, &[pub_j]).unwrap());
        assert!(leduc.hand_rank(j, &[]).is_err());

        let royal = build_royal();
        let a = Card::new(3, 0);
        let qs = Card::new(1, 0);
        let qh = Card::new(1, 1);
        // a public pair does not help either private card
        assert_eq!(royal.hand_rank(a, &[qs, qh]).unwrap(), 3);
        let kh = Card::new(2, 1);
        let ks = Card::new(2, 0);
        let jh = Card::new(0, 1);
        assert!(royal.hand_rank(j, &[jh, kh]).unwrap() > royal.hand_rank(a, &[jh, kh]).unwrap());
        assert!(royal.hand_rank(ks, &[jh, kh]).unwrap() > royal.hand_rank(j, &[jh, kh]).unwrap());
    }

    #[test]
    fn unknown_game_name() {
        assert!(matches!(game_by_name("holdem"), Err(GameError::UnknownGame(_))));
        assert_eq!(game_by_name("Leduc").unwrap().name(), "leduc");
    }
}
