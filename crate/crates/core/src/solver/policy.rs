//! Variant policies: the weighting rules that tell CFR, CFR+, LCFR, DCFR and
//! ECFR apart.

use std::fmt;
use std::str::FromStr;

use super::SolverError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Variant {
    Cfr,
    CfrPlus,
    Lcfr,
    Dcfr,
    Ecfr,
}

impl Variant {
    pub const ALL: [Variant; 5] = [
        Variant::Cfr,
        Variant::CfrPlus,
        Variant::Lcfr,
        Variant::Dcfr,
        Variant::Ecfr,
    ];

    /// Name used on the command line and in CSV output.
    pub fn name(self) -> &'static str {
        match self {
            Variant::Cfr => "cfr",
            Variant::CfrPlus => "cfr+",
            Variant::Lcfr => "lcfr",
            Variant::Dcfr => "dcfr",
            Variant::Ecfr => "ecfr",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = SolverError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "cfr" => Ok(Variant::Cfr),
            "cfr+" | "cfr_plus" | "cfrplus" | "cfr-plus" => Ok(Variant::CfrPlus),
            "lcfr" => Ok(Variant::Lcfr),
            "dcfr" => Ok(Variant::Dcfr),
            "ecfr" => Ok(Variant::Ecfr),
            _ => Err(SolverError::UnknownPolicy(s.to_string())),
        }
    }
}

/// The value ECFR accumulates (before the exponential factor) for an action
/// whose instantaneous regret is not positive: `coefficient * r^r_power * t^t_power`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaMode {
    pub coefficient: f64,
    pub r_power: u8,
    pub t_power: i8,
}

impl BetaMode {
    pub const fn new(coefficient: f64, r_power: u8, t_power: i8) -> Self {
        Self {
            coefficient,
            r_power,
            t_power,
        }
    }

    pub const fn constant(c: f64) -> Self {
        Self::new(c, 0, 0)
    }

    /// `β = -r²`, the shipped default.
    pub const fn neg_r_squared() -> Self {
        Self::new(-1.0, 2, 0)
    }

    /// `β = r`; together with a unit exponent this reduces ECFR's regret
    /// accumulation to plain CFR.
    pub const fn identity() -> Self {
        Self::new(1.0, 1, 0)
    }

    /// Accumulates nothing for non-positive regrets.
    pub const fn zero() -> Self {
        Self::constant(0.0)
    }

    #[inline]
    pub fn eval(&self, r: f64, t: u64) -> f64 {
        if self.coefficient == 0.0 {
            return 0.0;
        }
        let mut v = self.coefficient * r.powi(i32::from(self.r_power));
        if self.t_power != 0 {
            v *= (t as f64).powi(i32::from(self.t_power));
        }
        v
    }

    /// The coarse sweep: signed constants, powers of `r`, powers of `1/t`
    /// and `t * r^k`.
    pub fn coarse_grid() -> Vec<BetaMode> {
        let mut grid = Vec::new();
        for c in [1.0, 0.1, 0.01, 0.001, 0.0001, 0.00001] {
            grid.push(BetaMode::constant(c));
            grid.push(BetaMode::constant(-c));
        }
        for p in 1..=3 {
            grid.push(BetaMode::new(1.0, p, 0));
            grid.push(BetaMode::new(-1.0, p, 0));
        }
        for q in 1..=3 {
            grid.push(BetaMode::new(1.0, 0, -q));
            grid.push(BetaMode::new(-1.0, 0, -q));
        }
        for p in 1..=3 {
            grid.push(BetaMode::new(1.0, p, 1));
        }
        grid
    }

    /// The refinement around the best coarse settings.
    pub fn fine_grid() -> Vec<BetaMode> {
        vec![
            BetaMode::constant(-0.008),
            BetaMode::constant(-0.009),
            BetaMode::constant(-0.0001),
            BetaMode::constant(-0.00011),
            BetaMode::constant(-0.00012),
            BetaMode::new(-1.0, 2, 0),
            BetaMode::new(-1.0, 2, -1),
            BetaMode::new(-1.0, 2, -2),
        ]
    }

    /// Parses `coarse`, `fine` or a comma separated list of mode names.
    pub fn parse_grid(spec: &str) -> Result<Vec<BetaMode>, SolverError> {
        match spec.trim() {
            "coarse" => Ok(Self::coarse_grid()),
            "fine" => Ok(Self::fine_grid()),
            list => list.split(',').map(|s| s.trim().parse()).collect(),
        }
    }
}

impl Default for BetaMode {
    fn default() -> Self {
        Self::neg_r_squared()
    }
}

fn r_name(p: u8) -> &'static str {
    match p {
        1 => "r",
        2 => "r2",
        _ => "r3",
    }
}

fn inv_t_name(q: i8) -> &'static str {
    match q {
        -1 => "t",
        -2 => "t2",
        _ => "t3",
    }
}

impl fmt::Display for BetaMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (r, t) = (self.r_power, self.t_power);
        if self.coefficient == 0.0 {
            return f.write_str("zero");
        }
        if r == 0 && t == 0 {
            return write!(f, "const:{}", self.coefficient);
        }
        let body = match (r, t) {
            (1..=3, 0) => Some(r_name(r).to_string()),
            (0, -3..=-1) => Some(format!("inv-{}", inv_t_name(t))),
            (1..=3, 1) => Some(format!("t-{}", r_name(r))),
            (1..=3, -3..=-1) => Some(format!("{}-over-{}", r_name(r), inv_t_name(t))),
            _ => None,
        };
        match (body, self.coefficient) {
            (Some(b), c) if c == 1.0 => f.write_str(&b),
            (Some(b), c) if c == -1.0 => write!(f, "neg-{b}"),
            _ => write!(f, "{}*r^{}*t^{}", self.coefficient, r, t),
        }
    }
}

impl FromStr for BetaMode {
    type Err = SolverError;

    /// Accepts `const:<value>`, `zero`, and `[neg-]<body>` where body is one
    /// of `r`, `r2`, `r3`, `inv-t`, `inv-t2`, `inv-t3`, `t-r`, `t-r2`, `t-r3`,
    /// or `r<k>-over-t<m>`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || SolverError::BadBetaMode(s.to_string());
        let s_trim = s.trim();
        if let Some(v) = s_trim.strip_prefix("const:") {
            return v.parse::<f64>().ok().filter(|v| v.is_finite()).map(BetaMode::constant).ok_or_else(bad);
        }
        if s_trim == "zero" || s_trim == "none" {
            return Ok(BetaMode::zero());
        }
        let (sign, body) = match s_trim.strip_prefix("neg-") {
            Some(rest) => (-1.0, rest),
            None => (1.0, s_trim),
        };
        let r_pow = |x: &str| match x {
            "r" => Some(1u8),
            "r2" => Some(2),
            "r3" => Some(3),
            _ => None,
        };
        let t_pow = |x: &str| match x {
            "t" => Some(1i8),
            "t2" => Some(2),
            "t3" => Some(3),
            _ => None,
        };
        if let Some(p) = r_pow(body) {
            return Ok(BetaMode::new(sign, p, 0));
        }
        if let Some(q) = body.strip_prefix("inv-").and_then(t_pow) {
            return Ok(BetaMode::new(sign, 0, -q));
        }
        if let Some(p) = body.strip_prefix("t-").and_then(r_pow) {
            return Ok(BetaMode::new(sign, p, 1));
        }
        if let Some((num, den)) = body.split_once("-over-") {
            if let (Some(p), Some(q)) = (r_pow(num), t_pow(den)) {
                return Ok(BetaMode::new(sign, p, -q));
            }
        }
        Err(bad())
    }
}

/// Full configuration of one solver variant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VariantPolicy {
    pub variant: Variant,
    pub dcfr_alpha: f64,
    pub dcfr_beta: f64,
    pub dcfr_gamma: f64,
    pub ecfr_beta: BetaMode,
    /// Bound applied to the ECFR loss before exponentiation.
    pub l1_clamp: f64,
    /// When false, ECFR uses a unit weight instead of `e^{L1}` everywhere.
    pub ecfr_exponential: bool,
    /// Update the players one after the other within an iteration, so the
    /// second player's traversal sees the first player's new strategy. When
    /// false both players update from the same profile.
    pub alternating: bool,
}

impl VariantPolicy {
    pub fn new(variant: Variant) -> Self {
        Self {
            variant,
            dcfr_alpha: 1.5,
            dcfr_beta: 0.0,
            dcfr_gamma: 2.0,
            ecfr_beta: BetaMode::default(),
            l1_clamp: 20.0,
            ecfr_exponential: true,
            alternating: true,
        }
    }

    pub fn ecfr(beta: BetaMode) -> Self {
        Self {
            ecfr_beta: beta,
            ..Self::new(Variant::Ecfr)
        }
    }

    /// Whether the players update alternately. CFR+ always does; it is part
    /// of the method's definition.
    pub fn alternating(&self) -> bool {
        self.alternating || self.variant == Variant::CfrPlus
    }

    /// Label used for this configuration in reports.
    pub fn label(&self) -> String {
        self.variant.name().to_string()
    }
}

impl FromStr for VariantPolicy {
    type Err = SolverError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.parse::<Variant>().map(VariantPolicy::new)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_variants() {
        assert_eq!("cfr+".parse::<Variant>().unwrap(), Variant::CfrPlus);
        assert_eq!("cfr_plus".parse::<Variant>().unwrap(), Variant::CfrPlus);
        assert_eq!("ECFR".parse::<Variant>().unwrap(), Variant::Ecfr);
        assert!(matches!("hedge".parse::<Variant>(), Err(SolverError::UnknownPolicy(_))));
    }

    #[test]
    fn policy_defaults() {
        let p = VariantPolicy::new(Variant::Dcfr);
        assert_eq!((p.dcfr_alpha, p.dcfr_beta, p.dcfr_gamma), (1.5, 0.0, 2.0));
        assert_eq!(p.l1_clamp, 20.0);
        assert_eq!(p.ecfr_beta, BetaMode::neg_r_squared());
    }

    #[test]
    fn constant_mode_parses() {
        let m: BetaMode = "const:-0.0001".parse().unwrap();
        assert_eq!(m.eval(5.0, 3), -0.0001);
        assert_eq!(m.eval(-2.0, 100), -0.0001);
    }

    #[test]
    fn r2_over_t_modes() {
        let pos: BetaMode = "r2-over-t".parse().unwrap();
        let neg: BetaMode = "neg-r2-over-t".parse().unwrap();
        assert_eq!(pos.eval(2.0, 4), 1.0);
        assert_eq!(neg.eval(2.0, 4), -1.0);
    }

    #[test]
    fn neg_r2_is_negative_square() {
        let m: BetaMode = "neg-r2".parse().unwrap();
        assert_eq!(m, BetaMode::neg_r_squared());
        assert_eq!(m.eval(-1.0, 7), -1.0);
        assert_eq!(m.eval(0.0, 7), 0.0);
        assert_eq!(m.eval(-3.0, 7), -9.0);
    }

    #[test]
    fn other_modes() {
        let inv: BetaMode = "neg-inv-t2".parse().unwrap();
        assert_eq!(inv.eval(-5.0, 2), -0.25);
        let tr: BetaMode = "t-r".parse().unwrap();
        assert_eq!(tr.eval(-0.5, 4), -2.0);
        let r3: BetaMode = "r3".parse().unwrap();
        assert_eq!(r3.eval(-2.0, 1), -8.0);
        assert_eq!("zero".parse::<BetaMode>().unwrap().eval(-3.0, 1), 0.0);
    }

    #[test]
    fn bad_modes_rejected() {
        for bad in ["", "r4", "const:abc", "neg-", "inv-t9", "r2-over-q"] {
            assert!(bad.parse::<BetaMode>().is_err(), "{bad}");
        }
    }

    #[test]
    fn grids() {
        let coarse = BetaMode::coarse_grid();
        assert_eq!(coarse.len(), 27);
        assert!(coarse.contains(&BetaMode::neg_r_squared()));
        let fine = BetaMode::fine_grid();
        assert_eq!(fine.len(), 8);
        assert_eq!(BetaMode::parse_grid("neg-r2, const:-0.0001").unwrap().len(), 2);
        assert!(BetaMode::parse_grid("neg-r2,bogus").is_err());
    }

    #[test]
    fn display_roundtrips_through_parse() {
        for m in BetaMode::coarse_grid().into_iter().chain(BetaMode::fine_grid()) {
            let text = m.to_string();
            assert_eq!(text.parse::<BetaMode>().unwrap(), m, "{text}");
        }
    }
}
