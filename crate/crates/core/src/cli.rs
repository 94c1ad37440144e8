//! `hyperbt` command line: fit, simulate, rank, bench.
//!
//! Exit codes: 0 success (fit converged), 2 fit did not converge but results
//! were written, 1 any error including usage errors.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::evaluation::{
    correlation_matrix, pairwise_projection, rank_by_win_rate, replication_experiment, timing_bench,
    write_cell_summary, write_rankings, ExperimentConfig, Method, Ranking,
};
use crate::formats::{
    filter_min_games, parse_games, synthetic_labels, write_games, write_truth, PlayerRecord, ResultFile,
};
use crate::inference::{add_pseudocounts, check_degeneracy, fit, fit_matrix, FitConfig, Normalization, UpdateRule};
use crate::model::{log_likelihood, GameDataset, ModelKind, PlayerRegistry};
use crate::synthetic::{generate_dataset, generate_nondegenerate, SyntheticConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_NOT_CONVERGED: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "hyperbt", version, about = "Player strengths from two-team game records")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit one model to a games file and write per-player strengths.
    Fit(FitArgs),
    /// Generate a synthetic games file plus a `.truth` sidecar.
    Simulate(SimulateArgs),
    /// Rank players under several methods and compare them.
    Rank(RankArgs),
    /// Run the synthetic recovery / timing experiment grid.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
struct DataArgs {
    /// Games file (`winners|losers|weight` per line).
    #[arg(long)]
    input: PathBuf,
    /// Accept games with a player on both teams.
    #[arg(long)]
    allow_overlap: bool,
    /// Add this weight to both orientations of every observed team pairing.
    #[arg(long, value_name = "W")]
    laplace: Option<f64>,
    /// Drop games involving players with fewer than T games.
    #[arg(long, value_name = "T")]
    min_games: Option<usize>,
}

#[derive(Debug, Args)]
struct FitArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, default_value = "hbt", value_parser = ["bt", "hbt", "gbt"])]
    model: String,
    /// zermelo|newman for bt, mm for hbt, huang|newman for gbt.
    #[arg(long)]
    rule: Option<String>,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, default_value_t = 10_000)]
    max_sweeps: usize,
    /// none|sum|geomean; defaults to geomean for bt/gbt, none for hbt.
    #[arg(long, value_parser = ["none", "sum", "geomean"])]
    normalize: Option<String>,
    /// Fit bt on the pairwise projection of team games.
    #[arg(long)]
    project: bool,
    /// Result file; stdout if omitted.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Per-sweep log-likelihood CSV.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long)]
    players: usize,
    #[arg(long)]
    games: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    output: PathBuf,
    #[arg(long, default_value_t = 0.9)]
    split_prob: f64,
    /// Keep the first draw even if some player has no wins or no losses.
    #[arg(long)]
    allow_degenerate: bool,
}

#[derive(Debug, Args)]
struct RankArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Comma-separated: winrate, bt, hbt, gbt (or model-rule, e.g. gbt-huang).
    #[arg(long, default_value = "winrate,bt,hbt,gbt")]
    methods: String,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, default_value_t = 10_000)]
    max_sweeps: usize,
    /// rankings.csv destination; stdout if omitted.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[arg(long, value_delimiter = ',', default_value = "20")]
    players_list: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "200,2000,20000")]
    games_list: Vec<usize>,
    #[arg(long, default_value_t = 10)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "hbt,gbt,bt")]
    methods: String,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, default_value_t = 10_000)]
    max_sweeps: usize,
    /// Run replications in parallel; timings are then re-measured sequentially.
    #[arg(long)]
    parallel: bool,
    /// cell_summary.csv destination; stdout if omitted.
    #[arg(long)]
    output: Option<PathBuf>,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
        }
    };
    let outcome = match cli.command {
        Command::Fit(a) => cmd_fit(&a),
        Command::Simulate(a) => cmd_simulate(&a).map(|_| EXIT_OK),
        Command::Rank(a) => cmd_rank(&a).map(|_| EXIT_OK),
        Command::Bench(a) => cmd_bench(&a).map(|_| EXIT_OK),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}

fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Error::Io(format!("{}: {e}", p.display()))),
        None => {
            io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn label_of(reg: &PlayerRegistry, p: usize) -> String {
    reg.label(p).map(str::to_owned).unwrap_or_else(|| format!("#{p}"))
}

/// Rewrites errors that carry a player index so they name the player.
fn with_labels(err: Error, reg: &PlayerRegistry) -> Error {
    let player = match err.root() {
        Error::ZeroNumerator { player }
        | Error::ZeroDenominator { player }
        | Error::NonPositiveNumerator { player, .. }
        | Error::Overlap { player }
        | Error::NoGames { player } => *player,
        _ => return err,
    };
    Error::Config(format!("{err} (player `{}`)", label_of(reg, player)))
}

/// Loads, filters and optionally regularizes the input. Returns the observed
/// data (for win/played counts) and the data to fit.
fn load(args: &DataArgs) -> Result<(PlayerRegistry, GameDataset, GameDataset)> {
    let (reg, data) = parse_games(&args.input, args.allow_overlap)?;
    let (reg, data) = match args.min_games {
        Some(t) => filter_min_games(&reg, &data, t)?,
        None => (reg, data),
    };
    let fitted = match args.laplace {
        Some(w) => add_pseudocounts(&data, w)?,
        None => data.clone(),
    };
    Ok((reg, data, fitted))
}

fn check_or_fail(reg: &PlayerRegistry, data: &GameDataset, model: ModelKind) -> Result<()> {
    let report = check_degeneracy(data, model);
    for w in report.warnings() {
        eprintln!("warning: {w}");
    }
    if report.is_fatal() {
        return Err(Error::Degenerate(format!(
            "{} (use --laplace W to regularize)",
            report.describe(|p| format!("`{}`", label_of(reg, p)))
        )));
    }
    Ok(())
}

fn cmd_fit(args: &FitArgs) -> Result<i32> {
    let model: ModelKind = args.model.parse()?;
    let rule = match &args.rule {
        Some(r) => UpdateRule::parse_for(r, model)?,
        None => UpdateRule::default_for(model),
    };
    let normalization = match (&args.normalize, model) {
        (Some(n), ModelKind::Hbt) => {
            if n != "none" {
                eprintln!("warning: normalization `{n}` ignored for hbt (the model is not scale invariant)");
            }
            Normalization::None
        }
        (Some(n), _) => n.parse()?,
        (None, ModelKind::Hbt) => Normalization::None,
        (None, _) => Normalization::GeometricMeanOne,
    };
    let cfg = FitConfig {
        tolerance: args.tol,
        max_sweeps: args.max_sweeps,
        normalization,
        record_trace: args.trace.is_some(),
    };
    let (reg, observed, mut data) = load(&args.data)?;
    if model == ModelKind::Bt && args.project {
        data = pairwise_projection(&data)?.to_dataset()?;
    }
    check_or_fail(&reg, &data, model)?;
    let result = fit(&data, model, rule, &cfg).map_err(|e| with_labels(e, &reg))?;
    let loglik = log_likelihood(&data, &result.pi, model)?;

    let weights = observed.player_weights();
    let players = result
        .pi
        .pi()
        .iter()
        .enumerate()
        .map(|(i, &pi)| PlayerRecord {
            label: label_of(&reg, i),
            pi,
            s: pi.ln(),
            games_won_weight: weights[i].0,
            games_total_weight: weights[i].1,
        })
        .collect();
    let file = ResultFile {
        model: model.to_string(),
        rule: rule.to_string(),
        sweeps: result.sweeps_used,
        converged: result.converged,
        final_delta: result.final_delta,
        log_likelihood: loglik,
        players,
    };
    write_output(args.output.as_deref(), &file.render())?;
    if let (Some(path), Some(trace)) = (&args.trace, &result.loglik_trace) {
        let mut text = String::from("sweep,log_likelihood\n");
        for (i, ll) in trace.iter().enumerate() {
            text.push_str(&format!("{},{}\n", i + 1, ll));
        }
        write_output(Some(path), &text)?;
    }
    if result.converged {
        Ok(EXIT_OK)
    } else {
        eprintln!(
            "warning: not converged after {} sweeps (last change {:e})",
            result.sweeps_used, result.final_delta
        );
        Ok(EXIT_NOT_CONVERGED)
    }
}

fn truth_path(output: &Path) -> PathBuf {
    let mut s = output.as_os_str().to_owned();
    s.push(".truth");
    PathBuf::from(s)
}

fn cmd_simulate(args: &SimulateArgs) -> Result<()> {
    let cfg = SyntheticConfig {
        split_prob_2v2: args.split_prob,
        ..SyntheticConfig::new(args.players, args.games, args.seed)
    };
    let ds = if args.allow_degenerate {
        generate_dataset(&cfg)?
    } else {
        let (ds, rejected) = generate_nondegenerate(&cfg, 1000)?;
        if rejected > 0 {
            eprintln!(
                "note: {rejected} degenerate draw(s) discarded; dataset generated with seed {}",
                ds.seed
            );
        }
        ds
    };
    let labels = synthetic_labels(args.players);
    let reg = PlayerRegistry::from_labels(labels.iter().cloned())?;
    write_output(Some(&args.output), &write_games(&reg, &ds.data))?;
    write_output(
        Some(&truth_path(&args.output)),
        &write_truth(&labels, &ds.true_strengths),
    )?;
    Ok(())
}

fn cmd_rank(args: &RankArgs) -> Result<()> {
    let (reg, observed, data) = load(&args.data)?;
    let mut cfg = FitConfig {
        tolerance: args.tol,
        max_sweeps: args.max_sweeps,
        ..FitConfig::default()
    };
    let mut rankings: Vec<(String, Ranking)> = Vec::new();
    for name in args.methods.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        if name == "winrate" {
            rankings.push((
                name.to_owned(),
                rank_by_win_rate(&observed).map_err(|e| with_labels(e, &reg))?,
            ));
            continue;
        }
        let method: Method = name.parse()?;
        cfg.normalization = if method.model == ModelKind::Hbt {
            Normalization::None
        } else {
            Normalization::GeometricMeanOne
        };
        let result = if method.model == ModelKind::Bt {
            let w = pairwise_projection(&data)?;
            check_or_fail(&reg, &w.to_dataset()?, ModelKind::Bt)?;
            fit_matrix(&w, method.rule, &cfg)
        } else {
            check_or_fail(&reg, &data, method.model)?;
            fit(&data, method.model, method.rule, &cfg)
        }
        .map_err(|e| with_labels(e, &reg))?;
        if !result.converged {
            eprintln!("warning: {name} not converged after {} sweeps", result.sweeps_used);
        }
        rankings.push((method.name(), Ranking::from_scores(&result.log_strengths())));
    }
    if rankings.is_empty() {
        return Err(Error::Config("no methods selected".into()));
    }
    let mut csv = Vec::new();
    write_rankings(&mut csv, &reg, &rankings)?;
    write_output(args.output.as_deref(), &String::from_utf8_lossy(&csv))?;

    let series: Vec<Vec<f64>> = rankings.iter().map(|(_, r)| r.scores()).collect();
    let corr = correlation_matrix(&series);
    let mut table = String::from("pearson");
    for (name, _) in &rankings {
        table.push_str(&format!("\t{name}"));
    }
    table.push('\n');
    for (row, (name, _)) in corr.iter().zip(&rankings) {
        table.push_str(name);
        for v in row {
            match v {
                Some(r) => table.push_str(&format!("\t{r:.4}")),
                None => table.push_str("\tNA"),
            }
        }
        table.push('\n');
    }
    if args.output.is_some() {
        print!("{table}");
    } else {
        eprint!("{table}");
    }
    Ok(())
}

fn cmd_bench(args: &BenchArgs) -> Result<()> {
    let methods = args
        .methods
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::parse)
        .collect::<Result<Vec<Method>>>()?;
    let grid: Vec<(usize, usize)> = args
        .players_list
        .iter()
        .flat_map(|&n| args.games_list.iter().map(move |&m| (n, m)))
        .collect();
    let mut cfg = ExperimentConfig::new(grid, args.reps, args.seed, methods);
    cfg.fit.tolerance = args.tol;
    cfg.fit.max_sweeps = args.max_sweeps;
    cfg.parallel = args.parallel;
    let mut summary = replication_experiment(&cfg)?;
    if args.parallel {
        let timing = timing_bench(&cfg)?;
        for (cell, t) in summary.cells.iter_mut().zip(timing) {
            cell.median_seconds = t.median_seconds;
        }
    }
    if summary.regenerated > 0 {
        eprintln!("note: {} degenerate dataset(s) regenerated", summary.regenerated);
    }
    for c in summary.cells.iter().filter(|c| c.not_converged > 0) {
        eprintln!(
            "warning: n={} m={} {}: {} of {} fits did not converge",
            c.n, c.m, c.method, c.not_converged, c.replications
        );
    }
    let mut csv = Vec::new();
    write_cell_summary(&mut csv, &summary.cells)?;
    write_output(args.output.as_deref(), &String::from_utf8_lossy(&csv))
}
