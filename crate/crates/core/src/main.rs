//! `regret-forge`: train CFR-family solvers on poker benchmarks and write
//! exploitability curves as CSV.
//!
//! Exit status is 0 on success, 2 for invalid arguments and 1 when a run
//! fails.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

use regret_forge::bench::{self, BenchError, RunConfig, SweepConfig};
use regret_forge::solver::{BetaMode, ConvergenceRow, EvalSchedule, Variant, VariantPolicy};

#[derive(Parser)]
#[command(name = "regret-forge", version, about = "Counterfactual regret minimization benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train one solver on one game.
    Solve(SolveArgs),
    /// Train every listed solver on every listed game.
    Compare(CompareArgs),
    /// Sweep ECFR over a grid of β modes.
    AblateBeta(AblateArgs),
    /// ECFR with its β rule against ECFR without it.
    AblateWithWithout(WithWithoutArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ScheduleKind {
    /// Every `--eval-every` iterations.
    Every,
    /// 1, 2, 5, 10, 20, 50, ... and the final iteration.
    Geometric,
}

#[derive(Args)]
struct Common {
    /// Training iterations per run.
    #[arg(long)]
    iterations: Option<u64>,
    /// Evaluate exploitability every K iterations.
    #[arg(long)]
    eval_every: Option<u64>,
    #[arg(long, value_enum)]
    schedule: Option<ScheduleKind>,
    /// Output CSV path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for multi-run commands.
    #[arg(long, env = "REGRET_FORGE_THREADS")]
    threads: Option<usize>,
    /// Flat key=value file supplying defaults; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Write 0 in the elapsed_ms column so output is reproducible byte for byte.
    #[arg(long)]
    no_timing: bool,
    /// Also write a gnuplot script plotting the output CSV.
    #[arg(long)]
    gnuplot_script: Option<PathBuf>,
    /// Update both players from the same profile each iteration instead of
    /// alternating (CFR+ always alternates).
    #[arg(long)]
    simultaneous: bool,
}

#[derive(Args)]
struct SolverParams {
    /// ECFR β rule, e.g. neg-r2, const:-0.5, inv-t.
    #[arg(long)]
    beta_mode: Option<String>,
    #[arg(long)]
    dcfr_alpha: Option<f64>,
    #[arg(long)]
    dcfr_beta: Option<f64>,
    #[arg(long)]
    dcfr_gamma: Option<f64>,
}

#[derive(Args)]
struct SolveArgs {
    /// kuhn, leduc or royal.
    #[arg(long)]
    game: Option<String>,
    /// cfr, cfr+, lcfr, dcfr or ecfr.
    #[arg(long)]
    solver: Option<String>,
    #[command(flatten)]
    params: SolverParams,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct CompareArgs {
    /// Comma-separated games.
    #[arg(long)]
    games: Option<String>,
    /// Comma-separated solvers.
    #[arg(long)]
    solvers: Option<String>,
    #[command(flatten)]
    params: SolverParams,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct AblateArgs {
    #[arg(long)]
    game: Option<String>,
    /// `coarse`, `fine`, or a comma-separated list of β modes.
    #[arg(long)]
    grid: Option<String>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct WithWithoutArgs {
    #[arg(long)]
    game: Option<String>,
    /// β rule used by the with-β run.
    #[arg(long)]
    beta_mode: Option<String>,
    #[command(flatten)]
    common: Common,
}

/// Resolves each setting from the command line first, then the config file,
/// then the built-in default.
struct Settings {
    file: BTreeMap<String, String>,
}

impl Settings {
    fn load(path: Option<&Path>) -> Result<Self, BenchError> {
        let file = match path {
            Some(p) => {
                let text = fs::read_to_string(p)
                    .map_err(|e| BenchError::Usage(format!("cannot read config {}: {e}", p.display())))?;
                bench::parse_config(&text)?
            }
            None => BTreeMap::new(),
        };
        Ok(Self { file })
    }

    fn string(&self, flag: &Option<String>, key: &str) -> Option<String> {
        flag.clone().or_else(|| self.file.get(key).cloned())
    }

    fn parsed<T: FromStr + Clone>(&self, flag: &Option<T>, key: &str) -> Result<Option<T>, BenchError>
    where
        T::Err: std::fmt::Display,
    {
        if let Some(v) = flag {
            return Ok(Some(v.clone()));
        }
        self.file
            .get(key)
            .map(|s| s.parse::<T>().map_err(|e| BenchError::Usage(format!("config key {key}: {e}"))))
            .transpose()
    }

    fn flag(&self, key: &str) -> Result<bool, BenchError> {
        match self.file.get(key).map(String::as_str) {
            None | Some("false") => Ok(false),
            Some("true") => Ok(true),
            Some(other) => Err(BenchError::Usage(format!("config key {key}: expected true or false, got {other:?}"))),
        }
    }

    fn required(&self, flag: &Option<String>, key: &str) -> Result<String, BenchError> {
        self.string(flag, key)
            .ok_or_else(|| BenchError::Usage(format!("missing --{}", key.replace('_', "-"))))
    }
}

struct Resolved {
    alternating: bool,
    iterations: u64,
    schedule: EvalSchedule,
    threads: usize,
    out: Option<PathBuf>,
    timing: bool,
    gnuplot: Option<PathBuf>,
}

fn resolve_common(c: &Common, s: &Settings, default_iterations: u64) -> Result<Resolved, BenchError> {
    let iterations = s.parsed(&c.iterations, "iterations")?.unwrap_or(default_iterations);
    let eval_every = s.parsed(&c.eval_every, "eval_every")?;
    let kind = match c.schedule {
        Some(k) => Some(k),
        None => match s.file.get("schedule").map(String::as_str) {
            None => None,
            Some("every") => Some(ScheduleKind::Every),
            Some("geometric") => Some(ScheduleKind::Geometric),
            Some(other) => return Err(BenchError::Usage(format!("unknown schedule {other:?}"))),
        },
    };
    let schedule = match (kind, eval_every) {
        (Some(ScheduleKind::Geometric), _) => EvalSchedule::Geometric,
        (_, Some(0)) => return Err(BenchError::Usage("--eval-every must be at least 1".into())),
        (_, Some(k)) => EvalSchedule::Every(k),
        (_, None) => EvalSchedule::Every((iterations / 100).max(1)),
    };
    let threads = s.parsed(&c.threads, "threads")?.unwrap_or(1);
    if threads == 0 {
        return Err(BenchError::Usage("--threads must be at least 1".into()));
    }
    let no_timing = c.no_timing || s.flag("no_timing")?;
    let simultaneous = c.simultaneous || s.flag("simultaneous")?;
    Ok(Resolved {
        alternating: !simultaneous,
        iterations,
        schedule,
        threads,
        out: c.out.clone().or_else(|| s.file.get("out").map(PathBuf::from)),
        timing: !no_timing,
        gnuplot: c.gnuplot_script.clone().or_else(|| s.file.get("gnuplot_script").map(PathBuf::from)),
    })
}

fn policy_for(name: &str, p: &SolverParams, s: &Settings, r: &Resolved) -> Result<VariantPolicy, BenchError> {
    let mut policy = VariantPolicy::new(name.trim().parse::<Variant>()?);
    policy.alternating = r.alternating;
    if let Some(a) = s.parsed(&p.dcfr_alpha, "dcfr_alpha")? {
        policy.dcfr_alpha = a;
    }
    if let Some(b) = s.parsed(&p.dcfr_beta, "dcfr_beta")? {
        policy.dcfr_beta = b;
    }
    if let Some(g) = s.parsed(&p.dcfr_gamma, "dcfr_gamma")? {
        policy.dcfr_gamma = g;
    }
    if let Some(m) = s.string(&p.beta_mode, "beta_mode") {
        policy.ecfr_beta = m.parse::<BetaMode>()?;
    }
    Ok(policy)
}

fn split_list(list: &str) -> Vec<String> {
    list.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect()
}

fn sweep(r: &Resolved) -> SweepConfig {
    SweepConfig {
        iterations: r.iterations,
        schedule: r.schedule.clone(),
        threads: r.threads,
        timing: r.timing,
        out: r.out.clone(),
    }
}

fn finish(rows: &[ConvergenceRow], r: &Resolved) -> Result<(), BenchError> {
    if r.out.is_none() {
        let mut stdout = std::io::stdout().lock();
        bench::write_csv(&mut stdout, rows)?;
    }
    if let Some(script) = &r.gnuplot {
        let csv = r.out.clone().unwrap_or_else(|| PathBuf::from("results.csv"));
        fs::write(script, bench::gnuplot_script(&csv, rows))?;
    }
    for ((game, solver), e) in bench::final_exploitability(rows) {
        eprintln!("{game:>6} {solver:<24} final exploitability {e:.6e}");
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), BenchError> {
    match cli.command {
        Command::Solve(a) => {
            let s = Settings::load(a.common.config.as_deref())?;
            let r = resolve_common(&a.common, &s, 1000)?;
            let game = s.required(&a.game, "game")?;
            let solver = s.required(&a.solver, "solver")?;
            let policy = policy_for(&solver, &a.params, &s, &r)?;
            let config = RunConfig {
                game,
                label: policy.label(),
                policy,
                iterations: r.iterations,
                schedule: r.schedule.clone(),
                out: r.out.clone(),
                threads: r.threads,
                timing: r.timing,
            };
            let rows = bench::run_single(&config)?;
            finish(&rows, &r)
        }
        Command::Compare(a) => {
            let s = Settings::load(a.common.config.as_deref())?;
            let r = resolve_common(&a.common, &s, 1000)?;
            let games = split_list(&s.string(&a.games, "games").unwrap_or_else(|| "kuhn,leduc,royal".into()));
            let solvers = split_list(&s.string(&a.solvers, "solvers").unwrap_or_else(|| "cfr,cfr+,lcfr,dcfr,ecfr".into()));
            let policies = solvers
                .iter()
                .map(|n| policy_for(n, &a.params, &s, &r))
                .collect::<Result<Vec<_>, _>>()?;
            let rows = bench::run_comparison(&games, &policies, &sweep(&r))?;
            finish(&rows, &r)
        }
        Command::AblateBeta(a) => {
            let s = Settings::load(a.common.config.as_deref())?;
            let r = resolve_common(&a.common, &s, 1000)?;
            let game = s.required(&a.game, "game")?;
            let grid = BetaMode::parse_grid(&s.string(&a.grid, "grid").unwrap_or_else(|| "coarse".into()))?;
            let base = VariantPolicy {
                alternating: r.alternating,
                ..VariantPolicy::ecfr(BetaMode::default())
            };
            let rows = bench::run_beta_ablation(&game, &grid, base, &sweep(&r))?;
            finish(&rows, &r)
        }
        Command::AblateWithWithout(a) => {
            let s = Settings::load(a.common.config.as_deref())?;
            let r = resolve_common(&a.common, &s, 1000)?;
            let game = s.required(&a.game, "game")?;
            let beta = match s.string(&a.beta_mode, "beta_mode") {
                Some(m) => m.parse::<BetaMode>()?,
                None => BetaMode::default(),
            };
            let with_beta = VariantPolicy {
                alternating: r.alternating,
                ..VariantPolicy::ecfr(beta)
            };
            let rows = bench::run_with_without_beta(&game, with_beta, &sweep(&r))?;
            finish(&rows, &r)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_usage() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
