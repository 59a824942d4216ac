//! Experiment runner behind the `regret-forge` binary.
//!
//! A run cell is one (game, solver configuration) pair trained for a fixed
//! number of iterations, with exploitability sampled on a schedule. Cells are
//! independent: each owns its solver state, so a comparison can spread them
//! over a worker pool without affecting any number in the output. Results
//! are CSV with the header `game,solver,iteration,exploitability,elapsed_ms`.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use thiserror::Error;

use crate::game::GameError;
use crate::poker::game_by_name;
use crate::solver::{BetaMode, ConvergenceRow, EvalSchedule, RunError, SolverError, SolverState, VariantPolicy};
use crate::tree::GameTree;

pub const CSV_HEADER: &str = "game,solver,iteration,exploitability,elapsed_ms";

#[derive(Debug, Error)]
pub enum BenchError {
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Run(#[from] RunError),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("{0}")]
    Usage(String),
    #[error("{failed} of {total} run cells failed:\n{details}")]
    CellsFailed {
        failed: usize,
        total: usize,
        details: String,
    },
}

impl BenchError {
    /// True for errors caused by bad input rather than a failed computation.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            BenchError::Usage(_)
                | BenchError::Game(GameError::UnknownGame(_))
                | BenchError::Solver(SolverError::UnknownPolicy(_) | SolverError::BadBetaMode(_) | SolverError::NoIterations)
                | BenchError::Run(RunError::Solver(SolverError::NoIterations))
        )
    }
}

/// Formats a row exactly as it appears in the CSV output.
pub fn format_row(row: &ConvergenceRow) -> String {
    format!(
        "{},{},{},{:.11e},{}",
        row.game, row.solver, row.iteration, row.exploitability, row.elapsed_ms
    )
}

pub fn parse_row(line: &str) -> Option<ConvergenceRow> {
    let mut it = line.trim_end().split(',');
    let row = ConvergenceRow {
        game: it.next()?.to_string(),
        solver: it.next()?.to_string(),
        iteration: it.next()?.parse().ok()?,
        exploitability: it.next()?.parse().ok()?,
        elapsed_ms: it.next()?.parse().ok()?,
    };
    it.next().is_none().then_some(row)
}

pub fn read_csv(path: &Path) -> io::Result<Vec<ConvergenceRow>> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    if lines.next() != Some(CSV_HEADER) {
        return Err(io::Error::new(io::ErrorKind::InvalidData, "missing CSV header"));
    }
    lines
        .map(|l| parse_row(l).ok_or_else(|| io::Error::new(io::ErrorKind::InvalidData, format!("bad row {l:?}"))))
        .collect()
}

pub fn write_csv<W: Write>(mut w: W, rows: &[ConvergenceRow]) -> io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in rows {
        writeln!(w, "{}", format_row(r))?;
    }
    w.flush()
}

/// Configuration of a single training run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub game: String,
    pub policy: VariantPolicy,
    /// Solver column in the output; defaults to the variant name.
    pub label: String,
    pub iterations: u64,
    pub schedule: EvalSchedule,
    pub out: Option<PathBuf>,
    pub threads: usize,
    /// When false every `elapsed_ms` cell is written as 0.
    pub timing: bool,
}

impl RunConfig {
    pub fn new(game: &str, policy: VariantPolicy, iterations: u64, eval_every: u64) -> Self {
        Self {
            game: game.to_string(),
            label: policy.label(),
            policy,
            iterations,
            schedule: EvalSchedule::Every(eval_every),
            out: None,
            threads: 1,
            timing: true,
        }
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        if self.iterations == 0 {
            return Err(BenchError::Usage("iterations must be at least 1".into()));
        }
        if let EvalSchedule::Every(0) = self.schedule {
            return Err(BenchError::Usage("eval-every must be at least 1".into()));
        }
        game_by_name(&self.game)?;
        Ok(())
    }
}

pub fn compile_game(name: &str) -> Result<GameTree, BenchError> {
    Ok(GameTree::compile(&game_by_name(name)?)?)
}

fn train_cell<W: Write>(
    tree: &GameTree,
    policy: VariantPolicy,
    label: &str,
    iterations: u64,
    schedule: &EvalSchedule,
    timing: bool,
    out: &mut W,
) -> Result<Vec<ConvergenceRow>, BenchError> {
    let mut state = SolverState::new(tree, policy);
    let rows = state.run(iterations, schedule, label, |row| {
        let mut row = row.clone();
        if !timing {
            row.elapsed_ms = 0;
        }
        writeln!(out, "{}", format_row(&row))?;
        out.flush()
    })?;
    Ok(rows
        .into_iter()
        .map(|mut r| {
            if !timing {
                r.elapsed_ms = 0;
            }
            r
        })
        .collect())
}

/// Trains one configuration, appending each sample to `config.out` (flushed
/// per row) as it is produced.
pub fn run_single(config: &RunConfig) -> Result<Vec<ConvergenceRow>, BenchError> {
    config.validate()?;
    let tree = compile_game(&config.game)?;
    match &config.out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            writeln!(w, "{CSV_HEADER}")?;
            w.flush()?;
            train_cell(&tree, config.policy, &config.label, config.iterations, &config.schedule, config.timing, &mut w)
        }
        None => train_cell(
            &tree,
            config.policy,
            &config.label,
            config.iterations,
            &config.schedule,
            config.timing,
            &mut io::sink(),
        ),
    }
}

/// One unit of work in a sweep.
#[derive(Debug, Clone)]
pub struct Cell {
    pub game: String,
    pub label: String,
    pub policy: VariantPolicy,
}

/// Shared settings of a sweep.
#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub iterations: u64,
    pub schedule: EvalSchedule,
    pub threads: usize,
    pub timing: bool,
    /// Consolidated CSV destination. Per-cell files go to `<out>.cells/`
    /// while the sweep runs.
    pub out: Option<PathBuf>,
}

impl SweepConfig {
    pub fn new(iterations: u64, schedule: EvalSchedule) -> Self {
        Self {
            iterations,
            schedule,
            threads: 1,
            timing: true,
            out: None,
        }
    }
}

fn sort_rows(rows: &mut [ConvergenceRow]) {
    rows.sort_by(|a, b| (&a.game, &a.solver, a.iteration).cmp(&(&b.game, &b.solver, b.iteration)));
}

fn cell_file_name(cell: &Cell, index: usize) -> String {
    let safe: String = format!("{}-{}", cell.game, cell.label)
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '.' { c } else { '_' })
        .collect();
    format!("{index:03}-{safe}.csv")
}

/// Runs every cell on a pool of `config.threads` workers and merges the
/// results sorted by (game, solver, iteration).
///
/// Every cell is attempted; if any fail, the successful rows are still
/// written and the error lists the failed cells.
pub fn run_cells(cells: &[Cell], config: &SweepConfig) -> Result<Vec<ConvergenceRow>, BenchError> {
    if cells.is_empty() {
        return Err(BenchError::Usage("nothing to run".into()));
    }
    if config.iterations == 0 {
        return Err(BenchError::Usage("iterations must be at least 1".into()));
    }
    if let EvalSchedule::Every(0) = config.schedule {
        return Err(BenchError::Usage("eval-every must be at least 1".into()));
    }

    let mut trees: HashMap<String, Arc<GameTree>> = HashMap::new();
    for cell in cells {
        if !trees.contains_key(&cell.game) {
            trees.insert(cell.game.clone(), Arc::new(compile_game(&cell.game)?));
        }
    }

    let parts_dir = config.out.as_ref().map(|o| {
        let mut name = o.file_name().unwrap_or_default().to_os_string();
        name.push(".cells");
        o.with_file_name(name)
    });
    if let Some(dir) = &parts_dir {
        fs::create_dir_all(dir)?;
    }

    let next = AtomicUsize::new(0);
    let results: Mutex<BTreeMap<usize, Result<Vec<ConvergenceRow>, BenchError>>> = Mutex::new(BTreeMap::new());
    let workers = config.threads.clamp(1, cells.len());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(cell) = cells.get(i) else { break };
                let tree = &trees[&cell.game];
                let outcome = (|| {
                    match &parts_dir {
                        Some(dir) => {
                            let mut w = BufWriter::new(File::create(dir.join(cell_file_name(cell, i)))?);
                            writeln!(w, "{CSV_HEADER}")?;
                            train_cell(tree, cell.policy, &cell.label, config.iterations, &config.schedule, config.timing, &mut w)
                        }
                        None => train_cell(
                            tree,
                            cell.policy,
                            &cell.label,
                            config.iterations,
                            &config.schedule,
                            config.timing,
                            &mut io::sink(),
                        ),
                    }
                })();
                results.lock().expect("result lock").insert(i, outcome);
            });
        }
    });

    let mut rows = Vec::new();
    let mut details = String::new();
    let mut failed = 0;
    for (i, outcome) in results.into_inner().expect("result lock") {
        match outcome {
            Ok(r) => rows.extend(r),
            Err(e) => {
                failed += 1;
                let _ = writeln!(details, "  {} / {}: {e}", cells[i].game, cells[i].label);
            }
        }
    }
    sort_rows(&mut rows);
    if let Some(out) = &config.out {
        write_csv(BufWriter::new(File::create(out)?), &rows)?;
        if let Some(dir) = &parts_dir {
            fs::remove_dir_all(dir)?;
        }
    }
    if failed > 0 {
        return Err(BenchError::CellsFailed {
            failed,
            total: cells.len(),
            details,
        });
    }
    Ok(rows)
}

/// Cross product of games and solver configurations.
pub fn comparison_cells(games: &[String], policies: &[VariantPolicy]) -> Vec<Cell> {
    games
        .iter()
        .flat_map(|g| {
            policies.iter().map(move |p| Cell {
                game: g.clone(),
                label: p.label(),
                policy: *p,
            })
        })
        .collect()
}

pub fn run_comparison(
    games: &[String],
    policies: &[VariantPolicy],
    config: &SweepConfig,
) -> Result<Vec<ConvergenceRow>, BenchError> {
    if games.is_empty() || policies.is_empty() {
        return Err(BenchError::Usage("games and solvers must be non-empty".into()));
    }
    for g in games {
        game_by_name(g)?;
    }
    run_cells(&comparison_cells(games, policies), config)
}

/// One ECFR cell per β mode; the solver column reads `ecfr:<mode>`.
pub fn ablation_cells(game: &str, grid: &[BetaMode], base: VariantPolicy) -> Vec<Cell> {
    grid.iter()
        .map(|m| Cell {
            game: game.to_string(),
            label: format!("ecfr:{m}"),
            policy: VariantPolicy { ecfr_beta: *m, ..base },
        })
        .collect()
}

/// Sweeps `base` (an ECFR policy) over every β mode in `grid`.
pub fn run_beta_ablation(
    game: &str,
    grid: &[BetaMode],
    base: VariantPolicy,
    config: &SweepConfig,
) -> Result<Vec<ConvergenceRow>, BenchError> {
    if grid.is_empty() {
        return Err(BenchError::Usage("empty beta grid".into()));
    }
    game_by_name(game)?;
    run_cells(&ablation_cells(game, grid, base), config)
}

/// ECFR with its β rule (`ecfr:with-beta`) against the same configuration
/// accumulating zero for non-positive regrets (`ecfr:without-beta`).
pub fn with_without_cells(game: &str, with_beta: VariantPolicy) -> Vec<Cell> {
    vec![
        Cell {
            game: game.to_string(),
            label: "ecfr:with-beta".into(),
            policy: with_beta,
        },
        Cell {
            game: game.to_string(),
            label: "ecfr:without-beta".into(),
            policy: VariantPolicy {
                ecfr_beta: BetaMode::zero(),
                ..with_beta
            },
        },
    ]
}

pub fn run_with_without_beta(
    game: &str,
    with_beta: VariantPolicy,
    config: &SweepConfig,
) -> Result<Vec<ConvergenceRow>, BenchError> {
    game_by_name(game)?;
    run_cells(&with_without_cells(game, with_beta), config)
}

/// Final-iteration exploitability of each (game, solver) series.
pub fn final_exploitability(rows: &[ConvergenceRow]) -> BTreeMap<(String, String), f64> {
    let mut last: BTreeMap<(String, String), (u64, f64)> = BTreeMap::new();
    for r in rows {
        let e = last.entry((r.game.clone(), r.solver.clone())).or_insert((0, f64::NAN));
        if r.iteration >= e.0 {
            *e = (r.iteration, r.exploitability);
        }
    }
    last.into_iter().map(|(k, (_, v))| (k, v)).collect()
}

/// A gnuplot script drawing one log-scale exploitability curve per
/// (game, solver) series of `csv`.
pub fn gnuplot_script(csv: &Path, rows: &[ConvergenceRow]) -> String {
    let series = final_exploitability(rows);
    let csv = csv.display().to_string().replace('\'', "");
    let mut games: Vec<&String> = series.keys().map(|(g, _)| g).collect();
    games.dedup();
    let mut s = String::new();
    let _ = writeln!(s, "set datafile separator ','");
    let _ = writeln!(s, "set logscale y");
    let _ = writeln!(s, "set xlabel 'iteration'");
    let _ = writeln!(s, "set ylabel 'exploitability (chips)'");
    let _ = writeln!(s, "set key outside right");
    let _ = writeln!(s, "set terminal pngcairo size 1000,600");
    for game in games {
        let _ = writeln!(s, "set output '{game}.png'");
        let _ = writeln!(s, "set title '{game}'");
        let plots: Vec<String> = series
            .keys()
            .filter(|(g, _)| g == game)
            .map(|(_, solver)| {
                format!(
                    "'{csv}' using 3:(stringcolumn(1) eq '{game}' && stringcolumn(2) eq '{solver}' ? $4 : 1/0) with lines title '{solver}'"
                )
            })
            .collect();
        let _ = writeln!(s, "plot {}", plots.join(", \\\n     "));
    }
    s
}

/// Reads a flat `key = value` file. Blank lines and `#` comments are skipped.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, BenchError> {
    let mut map = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| BenchError::Usage(format!("config line {}: expected key=value", n + 1)))?;
        map.insert(k.trim().replace('-', "_"), v.trim().to_string());
    }
    Ok(map)
}
