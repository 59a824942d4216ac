//! Helpers shared by the integration test targets.
#![allow(dead_code)]

use rand::Rng;
use regret_forge::exploitability::StrategyProfile;
use regret_forge::tree::GameTree;
use regret_forge::PlayerId;

/// A random profile over every infoset of `tree`. Roughly one action in
/// `zero_every` is given probability zero (never all of an infoset).
pub fn random_profile<R: Rng>(rng: &mut R, tree: &GameTree, zero_every: u32) -> StrategyProfile {
    let mut profile = StrategyProfile::new();
    for info in tree.infosets() {
        let n = info.num_actions();
        let mut w: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
        if zero_every > 0 {
            for x in w.iter_mut() {
                if rng.gen_ratio(1, zero_every) {
                    *x = 0.0;
                }
            }
        }
        let total: f64 = w.iter().sum();
        let p = if total > 0.0 {
            w.iter().map(|x| x / total).collect()
        } else {
            vec![1.0 / n as f64; n]
        };
        profile.insert(info.key.clone(), p);
    }
    profile
}

/// The pure strategy of `player` selected by the bits of `mask`, one bit per
/// infoset in tree order (every infoset of the player must have two actions).
pub fn pure_strategy(tree: &GameTree, player: PlayerId, mask: u64) -> StrategyProfile {
    let mut profile = StrategyProfile::new();
    let mut bit = 0;
    for info in tree.infosets().iter().filter(|i| i.player() == player) {
        assert_eq!(info.num_actions(), 2);
        let a = ((mask >> bit) & 1) as usize;
        let mut p = vec![0.0; 2];
        p[a] = 1.0;
        profile.insert(info.key.clone(), p);
        bit += 1;
    }
    profile
}

pub fn infoset_count(tree: &GameTree, player: PlayerId) -> usize {
    tree.infosets().iter().filter(|i| i.player() == player).count()
}

/// Merges `b` into `a`, `b` winning on shared keys.
pub fn merge(mut a: StrategyProfile, b: &StrategyProfile) -> StrategyProfile {
    for (k, v) in b.iter() {
        a.insert(k.clone(), v.clone());
    }
    a
}
