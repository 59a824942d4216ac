//! Exact counterfactual regret minimization for two-player zero-sum
//! imperfect-information games.
//!
//! The crate ships three poker benchmarks ([`poker`]), a compiled game tree
//! ([`tree`]), five regret minimizers sharing one traversal ([`solver`]), and
//! best-response based exploitability ([`exploitability`]). The [`bench`]
//! module drives experiment sweeps and writes convergence CSVs.
//!
//! ```
//! use regret_forge::{poker, solver, tree::GameTree, exploitability};
//!
//! let tree = GameTree::compile(&poker::build_kuhn()).unwrap();
//! let policy = solver::VariantPolicy::new(solver::Variant::Ecfr);
//! let (state, _) = solver::train(&tree, policy, 1000, &solver::EvalSchedule::Never).unwrap();
//! let report = exploitability::exploitability(&tree, &state.extract_average_strategy());
//! assert!(report.total_exploitability < 0.05);
//! ```

pub mod bench;
pub mod exploitability;
pub mod game;
pub mod poker;
pub mod solver;
pub mod tree;

pub use game::{Action, Actor, GameDefinition, GameError, HistoryState, InfoSetKey, PlayerId};
pub use solver::{BetaMode, EvalSchedule, SolverState, Variant, VariantPolicy};
pub use tree::GameTree;

// The guide's code listings run as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/games.md")]
    mod games {}
    #[doc = include_str!("../../../book/src/cfr.md")]
    mod cfr {}
    #[doc = include_str!("../../../book/src/variants.md")]
    mod variants {}
    #[doc = include_str!("../../../book/src/ecfr.md")]
    mod ecfr {}
    #[doc = include_str!("../../../book/src/exploitability.md")]
    mod exploitability {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
