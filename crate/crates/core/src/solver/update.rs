//! Per-infoset regret bookkeeping and the update rules of every variant.

use super::policy::{BetaMode, Variant, VariantPolicy};

/// Accumulated state of one information set.
#[derive(Debug, Clone, PartialEq)]
pub struct RegretRecord {
    pub cumulative_regret: Vec<f64>,
    /// Unnormalized average strategy.
    pub avg_strategy_numerator: Vec<f64>,
    /// Strategy played on the next iteration.
    pub current_strategy: Vec<f64>,
    pub last_instant_regret: Vec<f64>,
    /// ECFR loss from the latest update, already clamped. Zero for other variants.
    pub last_l1: Vec<f64>,
}

impl RegretRecord {
    pub fn new(num_actions: usize) -> Self {
        assert!(num_actions > 0, "an infoset needs at least one action");
        Self {
            cumulative_regret: vec![0.0; num_actions],
            avg_strategy_numerator: vec![0.0; num_actions],
            current_strategy: vec![1.0 / num_actions as f64; num_actions],
            last_instant_regret: vec![0.0; num_actions],
            last_l1: vec![0.0; num_actions],
        }
    }

    pub fn num_actions(&self) -> usize {
        self.current_strategy.len()
    }

    /// Adds this iteration's instantaneous regret according to `policy`.
    pub fn accumulate_regret(&mut self, instant: &[f64], t: u64, policy: &VariantPolicy) {
        debug_assert_eq!(instant.len(), self.num_actions());
        self.last_instant_regret.copy_from_slice(instant);
        self.accumulate_last_regret(t, policy);
    }

    fn accumulate_last_regret(&mut self, t: u64, policy: &VariantPolicy) {
        let instant = &self.last_instant_regret;
        let tf = t as f64;
        match policy.variant {
            Variant::Cfr => {
                for (acc, r) in self.cumulative_regret.iter_mut().zip(instant) {
                    *acc += r;
                }
            }
            Variant::CfrPlus => {
                for (acc, r) in self.cumulative_regret.iter_mut().zip(instant) {
                    *acc = (*acc + r).max(0.0);
                }
            }
            Variant::Lcfr => {
                for (acc, r) in self.cumulative_regret.iter_mut().zip(instant) {
                    *acc += tf * r;
                }
            }
            Variant::Dcfr => {
                let pos = discount_factor(tf, policy.dcfr_alpha);
                let neg = discount_factor(tf, policy.dcfr_beta);
                for (acc, r) in self.cumulative_regret.iter_mut().zip(instant) {
                    *acc += r;
                    if *acc > 0.0 {
                        *acc *= pos;
                    } else if *acc < 0.0 {
                        *acc *= neg;
                    }
                }
            }
            Variant::Ecfr => self.accumulate_last_regret_ecfr(t, &policy.ecfr_beta, policy.l1_clamp, policy.ecfr_exponential),
        }
    }

    /// ECFR regret accumulation: each action gains `e^{L1} * r` when its
    /// instantaneous regret is positive and `e^{L1} * β(r, t)` otherwise.
    pub fn accumulate_regret_ecfr(
        &mut self,
        instant: &[f64],
        t: u64,
        beta: &BetaMode,
        l1_clamp: f64,
        exponential: bool,
    ) {
        self.last_instant_regret.copy_from_slice(instant);
        self.accumulate_last_regret_ecfr(t, beta, l1_clamp, exponential);
    }

    fn accumulate_last_regret_ecfr(&mut self, t: u64, beta: &BetaMode, l1_clamp: f64, exponential: bool) {
        let instant = &self.last_instant_regret;
        if exponential {
            let mean = instant.iter().sum::<f64>() / instant.len() as f64;
            for (l, r) in self.last_l1.iter_mut().zip(instant) {
                *l = (r - mean).clamp(-l1_clamp, l1_clamp);
            }
        } else {
            self.last_l1.iter_mut().for_each(|l| *l = 0.0);
        }
        for ((acc, &r), &l1) in self.cumulative_regret.iter_mut().zip(instant).zip(&self.last_l1) {
            *acc += exp_weight(r, l1, beta.eval(r, t));
        }
    }

    /// One complete iteration for this infoset, without allocating: computes
    /// the instantaneous regret from `action_values`, accumulates regret and
    /// average strategy, and moves to the next strategy. Returns `Σσ·v(I,a)`.
    pub fn apply_update(&mut self, action_values: &[f64], reach_self: f64, t: u64, policy: &VariantPolicy) -> f64 {
        debug_assert_eq!(action_values.len(), self.num_actions());
        let value = strategy_value(&self.current_strategy, action_values);
        for (r, v) in self.last_instant_regret.iter_mut().zip(action_values) {
            *r = v - value;
        }
        if policy.variant == Variant::Ecfr {
            self.apply_ecfr(reach_self, t, policy);
            return value;
        }
        self.accumulate_last_regret(t, policy);

        let tf = t as f64;
        for (num, s) in self.avg_strategy_numerator.iter_mut().zip(&self.current_strategy) {
            let w = match policy.variant {
                Variant::CfrPlus | Variant::Lcfr => tf,
                _ => 1.0,
            };
            *num += w * reach_self * s;
        }
        if policy.variant == Variant::Dcfr {
            let factor = (tf / (tf + 1.0)).powf(policy.dcfr_gamma);
            self.avg_strategy_numerator.iter_mut().for_each(|n| *n *= factor);
        }

        for (s, r) in self.current_strategy.iter_mut().zip(&self.cumulative_regret) {
            *s = r.max(0.0);
        }
        normalize_in_place(&mut self.current_strategy);
        value
    }

    /// The ECFR part of [`apply_update`](Self::apply_update), fused so that
    /// `e^{L1}` is evaluated once per action.
    fn apply_ecfr(&mut self, reach_self: f64, t: u64, policy: &VariantPolicy) {
        let n = self.num_actions() as f64;
        let mean = self.last_instant_regret.iter().sum::<f64>() / n;
        for a in 0..self.current_strategy.len() {
            let r = self.last_instant_regret[a];
            let l1 = if policy.ecfr_exponential {
                (r - mean).clamp(-policy.l1_clamp, policy.l1_clamp)
            } else {
                0.0
            };
            let e = l1.exp();
            self.last_l1[a] = l1;
            self.cumulative_regret[a] += if r > 0.0 { e * r } else { e * policy.ecfr_beta.eval(r, t) };
            self.avg_strategy_numerator[a] += e * reach_self * self.current_strategy[a];
            self.current_strategy[a] = e * self.cumulative_regret[a].max(0.0);
        }
        normalize_in_place(&mut self.current_strategy);
    }

    /// Adds `weight[a] * reach_self * σ(a)` to the average numerator, with σ
    /// the strategy played this iteration.
    pub fn accumulate_average_strategy(&mut self, reach_self: f64, weights: &[f64]) {
        for ((num, s), w) in self
            .avg_strategy_numerator
            .iter_mut()
            .zip(&self.current_strategy)
            .zip(weights)
        {
            *num += w * reach_self * s;
        }
    }

    /// Per-action weights on this iteration's average-strategy contribution.
    pub fn average_weights(&self, t: u64, policy: &VariantPolicy) -> Vec<f64> {
        let n = self.num_actions();
        match policy.variant {
            Variant::Cfr | Variant::Dcfr => vec![1.0; n],
            Variant::CfrPlus | Variant::Lcfr => vec![t as f64; n],
            Variant::Ecfr => self.last_l1.iter().map(|l| l.exp()).collect(),
        }
    }

    /// Strategy for the next iteration under `policy`.
    pub fn next_strategy(&self, policy: &VariantPolicy) -> Vec<f64> {
        match policy.variant {
            Variant::Ecfr => next_strategy_ecfr(&self.cumulative_regret, &self.last_l1),
            _ => regret_matching(&self.cumulative_regret),
        }
    }

    /// Normalized average strategy; uniform when nothing was accumulated.
    pub fn average_strategy(&self) -> Vec<f64> {
        normalize_or_uniform(&self.avg_strategy_numerator)
    }

    pub fn is_finite(&self) -> bool {
        self.cumulative_regret
            .iter()
            .chain(&self.avg_strategy_numerator)
            .chain(&self.current_strategy)
            .all(|v| v.is_finite())
    }
}

/// `t^e / (t^e + 1)`.
pub fn discount_factor(t: f64, exponent: f64) -> f64 {
    let p = t.powf(exponent);
    p / (p + 1.0)
}

/// Expected counterfactual value `Σ_a σ(a) v(a)`.
pub fn strategy_value(strategy: &[f64], action_values: &[f64]) -> f64 {
    strategy.iter().zip(action_values).map(|(s, v)| s * v).sum()
}

/// `r(a) = v(I, a) - v(I)`.
pub fn instant_regret(infoset_value: f64, action_values: &[f64]) -> Vec<f64> {
    action_values.iter().map(|v| v - infoset_value).collect()
}

/// Regret matching: play in proportion to positive regret, uniformly if
/// no regret is positive.
pub fn regret_matching(cumulative: &[f64]) -> Vec<f64> {
    let positive: Vec<f64> = cumulative.iter().map(|r| r.max(0.0)).collect();
    normalize_or_uniform(&positive)
}

/// ECFR loss: each regret minus the mean regret, clamped to `±clamp`.
pub fn ecfr_l1(instant: &[f64], clamp: f64) -> Vec<f64> {
    let mean = instant.iter().sum::<f64>() / instant.len() as f64;
    instant.iter().map(|r| (r - mean).clamp(-clamp, clamp)).collect()
}

/// Exponential weighting: `e^α x` for positive `x`, `e^α β` otherwise.
#[inline]
pub fn exp_weight(x: f64, alpha: f64, beta: f64) -> f64 {
    if x > 0.0 {
        alpha.exp() * x
    } else {
        alpha.exp() * beta
    }
}

/// ECFR next strategy: proportional to `e^{L1(a)} * max(R(a), 0)`, uniform
/// when every weight is zero.
pub fn next_strategy_ecfr(cumulative: &[f64], l1: &[f64]) -> Vec<f64> {
    let weights: Vec<f64> = cumulative
        .iter()
        .zip(l1)
        .map(|(r, l)| l.exp() * r.max(0.0))
        .collect();
    normalize_or_uniform(&weights)
}

fn normalize_in_place(weights: &mut [f64]) {
    let total: f64 = weights.iter().sum();
    if total > 0.0 && total.is_finite() {
        weights.iter_mut().for_each(|w| *w /= total);
    } else {
        let u = 1.0 / weights.len() as f64;
        weights.iter_mut().for_each(|w| *w = u);
    }
}

fn normalize_or_uniform(weights: &[f64]) -> Vec<f64> {
    let total: f64 = weights.iter().sum();
    if total > 0.0 && total.is_finite() {
        weights.iter().map(|w| w / total).collect()
    } else {
        vec![1.0 / weights.len() as f64; weights.len()]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: &[f64], b: &[f64]) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-12)
    }

    #[test]
    fn instant_regret_arithmetic() {
        let sigma = [0.5, 0.5];
        let v = [3.0, 1.0];
        let vi = strategy_value(&sigma, &v);
        assert_eq!(vi, 2.0);
        assert_eq!(instant_regret(vi, &v), vec![1.0, -1.0]);
        assert_eq!(instant_regret(4.0, &[4.0, 4.0, 4.0]), vec![0.0; 3]);
    }

    #[test]
    fn regret_matching_cases() {
        assert!(close(&regret_matching(&[3.0, 1.0, 0.0]), &[0.75, 0.25, 0.0]));
        assert!(close(&regret_matching(&[-1.0, -2.0]), &[0.5, 0.5]));
        assert!(close(&regret_matching(&[30.0, 10.0, 0.0]), &[0.75, 0.25, 0.0]));
    }

    #[test]
    fn l1_cases() {
        assert!(close(&ecfr_l1(&[4.0, 0.0, -1.0], 20.0), &[3.0, -1.0, -2.0]));
        assert!(close(&ecfr_l1(&[2.0, 2.0], 20.0), &[0.0, 0.0]));
        assert!(close(&ecfr_l1(&[100.0, -100.0], 20.0), &[20.0, -20.0]));
    }

    #[test]
    fn exp_weight_cases() {
        assert_eq!(exp_weight(2.0, 0.0, 123.0), 2.0);
        assert_eq!(exp_weight(-5.0, 0.0, 0.5), 0.5);
        assert!((exp_weight(3.0, 2f64.ln(), 0.0) - 6.0).abs() < 1e-12);
        // zero takes the non-positive branch
        assert_eq!(exp_weight(0.0, 0.0, 0.25), 0.25);
    }

    #[test]
    fn ecfr_accumulation_cases() {
        let beta = BetaMode::neg_r_squared();
        // single action: L1 is always 0
        let mut rec = RegretRecord::new(1);
        rec.accumulate_regret_ecfr(&[2.0], 1, &beta, 20.0, true);
        assert_eq!(rec.cumulative_regret, vec![2.0]);
        let mut rec = RegretRecord::new(1);
        rec.accumulate_regret_ecfr(&[-1.0], 1, &beta, 20.0, true);
        assert_eq!(rec.cumulative_regret, vec![-1.0]);
        let mut rec = RegretRecord::new(1);
        rec.accumulate_regret_ecfr(&[0.0], 1, &beta, 20.0, true);
        assert_eq!(rec.cumulative_regret, vec![0.0]);

        // two actions, L1 = ±1
        let mut rec = RegretRecord::new(2);
        rec.accumulate_regret_ecfr(&[1.0, -1.0], 3, &beta, 20.0, true);
        assert!(close(&rec.last_l1, &[1.0, -1.0]));
        let e = std::f64::consts::E;
        assert!(close(&rec.cumulative_regret, &[e, -1.0 / e]));
    }

    #[test]
    fn ecfr_next_strategy_cases() {
        assert!(close(&next_strategy_ecfr(&[2.0, 2.0], &[0.0, 0.0]), &[0.5, 0.5]));
        assert!(close(
            &next_strategy_ecfr(&[1.0, 1.0], &[2f64.ln(), 0.0]),
            &[2.0 / 3.0, 1.0 / 3.0]
        ));
        assert!(close(&next_strategy_ecfr(&[-1.0, 0.0, -3.0], &[1.0, 0.0, -1.0]), &[1.0 / 3.0; 3]));
    }

    #[test]
    fn average_accumulation() {
        let policy = VariantPolicy::new(Variant::Cfr);
        let mut rec = RegretRecord::new(2);
        rec.current_strategy = vec![1.0, 0.0];
        let w = rec.average_weights(1, &policy);
        rec.accumulate_average_strategy(0.5, &w);
        rec.current_strategy = vec![0.0, 1.0];
        rec.accumulate_average_strategy(0.5, &w);
        assert!(close(&rec.average_strategy(), &[0.5, 0.5]));
        assert!(close(&RegretRecord::new(3).average_strategy(), &[1.0 / 3.0; 3]));

        // ECFR with zero loss weighs like vanilla
        let ecfr = VariantPolicy::new(Variant::Ecfr);
        let rec = RegretRecord::new(3);
        assert_eq!(rec.average_weights(9, &ecfr), vec![1.0; 3]);
    }

    #[test]
    fn variant_regret_rules() {
        let mut plus = RegretRecord::new(1);
        plus.accumulate_regret(&[-5.0], 1, &VariantPolicy::new(Variant::CfrPlus));
        assert_eq!(plus.cumulative_regret, vec![0.0]);

        let mut lin = RegretRecord::new(2);
        lin.accumulate_regret(&[1.0, -1.0], 3, &VariantPolicy::new(Variant::Lcfr));
        assert_eq!(lin.cumulative_regret, vec![3.0, -3.0]);

        let dcfr = VariantPolicy::new(Variant::Dcfr);
        assert_eq!(discount_factor(1.0, 1.5), 0.5);
        for t in [1.0, 7.0, 1e4] {
            assert_eq!(discount_factor(t, 0.0), 0.5);
        }
        let mut d = RegretRecord::new(2);
        d.accumulate_regret(&[4.0, -4.0], 1, &dcfr);
        assert_eq!(d.cumulative_regret, vec![2.0, -2.0]);
    }

    proptest! {
        #[test]
        fn fused_update_matches_the_stepwise_rules(
            values in prop::collection::vec(-10.0f64..10.0, 2..5),
            prior in prop::collection::vec(-3.0f64..3.0, 4),
            reach in 0.0f64..1.0,
            t in 1u64..50,
            variant in prop::sample::select(Variant::ALL.to_vec()),
        ) {
            let n = values.len();
            let policy = VariantPolicy::new(variant);
            let mut start = RegretRecord::new(n);
            start.cumulative_regret.copy_from_slice(&prior[..n]);
            if variant == Variant::CfrPlus {
                start.cumulative_regret.iter_mut().for_each(|r| *r = r.max(0.0));
            }
            start.current_strategy = regret_matching(&start.cumulative_regret);

            let mut fused = start.clone();
            let v = fused.apply_update(&values, reach, t, &policy);

            let mut stepwise = start.clone();
            let value = strategy_value(&stepwise.current_strategy, &values);
            let instant = instant_regret(value, &values);
            stepwise.accumulate_regret(&instant, t, &policy);
            let w = stepwise.average_weights(t, &policy);
            stepwise.accumulate_average_strategy(reach, &w);
            if variant == Variant::Dcfr {
                let f = (t as f64 / (t as f64 + 1.0)).powf(policy.dcfr_gamma);
                stepwise.avg_strategy_numerator.iter_mut().for_each(|x| *x *= f);
            }
            stepwise.current_strategy = stepwise.next_strategy(&policy);

            prop_assert!((v - value).abs() < 1e-12);
            for (a, b) in [
                (&fused.cumulative_regret, &stepwise.cumulative_regret),
                (&fused.avg_strategy_numerator, &stepwise.avg_strategy_numerator),
                (&fused.current_strategy, &stepwise.current_strategy),
                (&fused.last_l1, &stepwise.last_l1),
                (&fused.last_instant_regret, &stepwise.last_instant_regret),
            ] {
                prop_assert!(a.iter().zip(b.iter()).all(|(x, y)| (x - y).abs() <= 1e-12 * (1.0 + y.abs())), "{:?} vs {:?}", a, b);
            }
        }

        #[test]
        fn regret_matching_is_a_distribution(r in prop::collection::vec(-50.0f64..50.0, 1..6)) {
            let s = regret_matching(&r);
            prop_assert!(s.iter().all(|p| *p >= 0.0));
            prop_assert!((s.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }

        #[test]
        fn regret_matching_scale_invariant(r in prop::collection::vec(-50.0f64..50.0, 1..6), c in 0.01f64..100.0) {
            let scaled: Vec<f64> = r.iter().map(|x| x * c).collect();
            let a = regret_matching(&r);
            let b = regret_matching(&scaled);
            prop_assert!(a.iter().zip(&b).all(|(x, y)| (x - y).abs() < 1e-9));
        }

        #[test]
        fn l1_has_zero_mean(r in prop::collection::vec(-5.0f64..5.0, 1..6)) {
            let l = ecfr_l1(&r, 20.0);
            prop_assert!(l.iter().sum::<f64>().abs() < 1e-9);
        }

        #[test]
        fn instant_regret_is_orthogonal_to_strategy(
            v in prop::collection::vec(-10.0f64..10.0, 1..6),
            w in prop::collection::vec(0.01f64..1.0, 6),
        ) {
            let total: f64 = w[..v.len()].iter().sum();
            let sigma: Vec<f64> = w[..v.len()].iter().map(|x| x / total).collect();
            let r = instant_regret(strategy_value(&sigma, &v), &v);
            prop_assert!(strategy_value(&sigma, &r).abs() < 1e-9);
        }

        #[test]
        fn ecfr_strategy_argmax_preserved(
            r in prop::collection::vec(-5.0f64..5.0, 1..6),
            l in prop::collection::vec(-20.0f64..20.0, 6),
        ) {
            let l1 = &l[..r.len()];
            let s = next_strategy_ecfr(&r, l1);
            prop_assert!((s.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            let w: Vec<f64> = r.iter().zip(l1).map(|(r, l)| l.exp() * r.max(0.0)).collect();
            let best = s.iter().cloned().fold(f64::MIN, f64::max);
            let wmax = w.iter().cloned().fold(f64::MIN, f64::max);
            for (p, wi) in s.iter().zip(&w) {
                if *p == best {
                    prop_assert!(*wi >= wmax * (1.0 - 1e-12));
                }
            }
        }
    }
}
