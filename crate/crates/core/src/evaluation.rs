//! Metrics, rankings, and the synthetic replication / timing experiments.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::inference::{check_degeneracy, fit, fit_matrix, FitConfig, FitResult, UpdateRule};
use crate::model::{GameDataset, ModelKind, PlayerRegistry, WinMatrix};
use crate::synthetic::{generate_until, SyntheticConfig, SyntheticDataset};

/// Sample Pearson correlation.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::SeriesLength(x.len(), y.len()));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::ZeroVariance);
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Counts every game as a win of each winner over each loser.
pub fn pairwise_projection(data: &GameDataset) -> Result<WinMatrix> {
    let mut w = WinMatrix::zeros(data.n());
    for e in data.edges() {
        if let Some(player) = e.overlap() {
            return Err(Error::Overlap { player });
        }
        for &i in e.winners.iter() {
            for &j in e.losers.iter() {
                w.add(i, j, e.weight);
            }
        }
    }
    Ok(w)
}

/// Players ordered by descending score; equal scores keep ascending index.
#[derive(Debug, Clone, PartialEq)]
pub struct Ranking {
    entries: Vec<(usize, f64)>,
}

impl Ranking {
    pub fn from_scores(scores: &[f64]) -> Self {
        let mut entries: Vec<(usize, f64)> = scores.iter().copied().enumerate().collect();
        entries.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        Self { entries }
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn order(&self) -> Vec<usize> {
        self.entries.iter().map(|e| e.0).collect()
    }

    /// Scores indexed by player.
    pub fn scores(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.entries.len()];
        for &(p, s) in &self.entries {
            out[p] = s;
        }
        out
    }
}

pub fn rank_by_win_rate(data: &GameDataset) -> Result<Ranking> {
    let mut scores = Vec::with_capacity(data.n());
    for (player, (won, played)) in data.player_weights().into_iter().enumerate() {
        if played <= 0.0 {
            return Err(Error::NoGames { player });
        }
        scores.push(won / played);
    }
    Ok(Ranking::from_scores(&scores))
}

pub fn rank_by_strength(result: &FitResult) -> Ranking {
    Ranking::from_scores(&result.log_strengths())
}

/// A model paired with the update rule used to fit it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Method {
    pub model: ModelKind,
    pub rule: UpdateRule,
}

impl Method {
    pub const HBT: Method = Method {
        model: ModelKind::Hbt,
        rule: UpdateRule::HbtMm,
    };
    pub const GBT: Method = Method {
        model: ModelKind::Gbt,
        rule: UpdateRule::GbtNewman,
    };
    /// Newman's update on the pairwise projection.
    pub const BT: Method = Method {
        model: ModelKind::Bt,
        rule: UpdateRule::Newman,
    };

    pub fn name(&self) -> String {
        if self.rule == UpdateRule::default_for(self.model) {
            self.model.to_string()
        } else {
            format!("{}-{}", self.model, self.rule)
        }
    }

    /// Fits the method, timing only the fit call. `Bt` is fitted on the
    /// pairwise projection, which is built before the clock starts.
    pub fn fit_timed(&self, data: &GameDataset, cfg: &FitConfig) -> Result<(FitResult, Duration)> {
        match self.model {
            ModelKind::Bt => {
                let w = pairwise_projection(data)?;
                let start = Instant::now();
                let r = fit_matrix(&w, self.rule, cfg)?;
                Ok((r, start.elapsed()))
            }
            _ => {
                let start = Instant::now();
                let r = fit(data, self.model, self.rule, cfg)?;
                Ok((r, start.elapsed()))
            }
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for Method {
    type Err = Error;
    /// `hbt`, `gbt`, `bt`, or `model-rule` such as `gbt-huang`.
    fn from_str(s: &str) -> Result<Self> {
        let (model, rule) = match s.split_once('-') {
            Some((m, r)) => {
                let model: ModelKind = m.parse()?;
                (model, UpdateRule::parse_for(r, model)?)
            }
            None => {
                let model: ModelKind = s.parse()?;
                (model, UpdateRule::default_for(model))
            }
        };
        Ok(Method { model, rule })
    }
}

/// Mixes `(base, n, m, replication)` into a 64-bit seed (SplitMix64 finalizer
/// over each word in turn).
pub fn derive_seed(base_seed: u64, n: usize, m: usize, replication: usize) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    [n as u64, m as u64, replication as u64]
        .iter()
        .fold(mix(base_seed), |h, &w| mix(h ^ w))
}

/// Linear-interpolated quantile of sorted data (`q` in `[0, 1]`).
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty());
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Ordinary least-squares line `y = a + b x`; returns `(a, b, r_squared)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<(f64, f64, f64)> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::SeriesLength(x.len(), y.len()));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::ZeroVariance);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok((intercept, slope, r2))
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    /// `(n, m)` cells.
    pub grid: Vec<(usize, usize)>,
    pub replications: usize,
    pub base_seed: u64,
    pub methods: Vec<Method>,
    pub fit: FitConfig,
    /// Run replications on the rayon pool. Timings then include contention.
    pub parallel: bool,
    /// Seeds tried per replication before giving up on a degenerate dataset.
    pub max_regenerations: usize,
    pub split_prob_2v2: f64,
}

impl ExperimentConfig {
    pub fn new(grid: Vec<(usize, usize)>, replications: usize, base_seed: u64, methods: Vec<Method>) -> Self {
        Self {
            grid,
            replications,
            base_seed,
            methods,
            fit: FitConfig::default(),
            parallel: false,
            max_regenerations: 100,
            split_prob_2v2: 0.9,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.grid.is_empty() {
            return Err(Error::Config("experiment grid is empty".into()));
        }
        if self.replications == 0 {
            return Err(Error::Config("replications must be at least 1".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::Config("no methods selected".into()));
        }
        self.fit.validate()
    }
}

/// One fitted replication of one method.
#[derive(Debug, Clone, PartialEq)]
pub struct Measurement {
    pub correlation: f64,
    pub seconds: f64,
    pub sweeps: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub n: usize,
    pub m: usize,
    pub method: String,
    pub median_r: f64,
    pub q1_r: f64,
    pub q3_r: f64,
    pub median_seconds: f64,
    pub replications: usize,
    pub not_converged: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationSummary {
    pub cells: Vec<CellSummary>,
    /// Datasets discarded as degenerate and regenerated with the next seed.
    pub regenerated: usize,
    /// Raw measurements, `[cell][method][replication]`.
    pub measurements: Vec<Vec<Vec<Measurement>>>,
}

fn acceptable(data: &GameDataset, needs_projection: bool) -> bool {
    if check_degeneracy(data, ModelKind::Hbt).has_hard_flags() {
        return false;
    }
    !needs_projection
        || pairwise_projection(data)
            .and_then(|w| w.to_dataset())
            .map(|d| !check_degeneracy(&d, ModelKind::Bt).is_fatal())
            .unwrap_or(false)
}

/// Generates the replication dataset for `(n, m, rep)` under `cfg`.
pub fn replication_dataset(
    cfg: &ExperimentConfig,
    n: usize,
    m: usize,
    rep: usize,
) -> Result<(SyntheticDataset, usize)> {
    let needs_projection = cfg.methods.iter().any(|me| me.model == ModelKind::Bt);
    let syn = SyntheticConfig {
        split_prob_2v2: cfg.split_prob_2v2,
        ..SyntheticConfig::new(n, m, derive_seed(cfg.base_seed, n, m, rep))
    };
    generate_until(&syn, cfg.max_regenerations, |d| acceptable(d, needs_projection))
}

fn run_replication(cfg: &ExperimentConfig, n: usize, m: usize, rep: usize) -> Result<(Vec<Measurement>, usize)> {
    let (ds, rejected) = replication_dataset(cfg, n, m, rep)?;
    let mut out = Vec::with_capacity(cfg.methods.len());
    for method in &cfg.methods {
        let (r, elapsed) = method.fit_timed(&ds.data, &cfg.fit)?;
        out.push(Measurement {
            correlation: pearson(&r.log_strengths(), &ds.true_strengths)?,
            seconds: elapsed.as_secs_f64(),
            sweeps: r.sweeps_used,
            converged: r.converged,
        });
    }
    Ok((out, rejected))
}

/// For every cell and replication: generate a synthetic dataset, fit each
/// method, and correlate fitted with true log-strengths. Results are merged
/// by `(cell, replication)`, so the parallel and sequential paths agree.
pub fn replication_experiment(cfg: &ExperimentConfig) -> Result<ReplicationSummary> {
    cfg.validate()?;
    let jobs: Vec<(usize, usize)> = (0..cfg.grid.len())
        .flat_map(|c| (0..cfg.replications).map(move |r| (c, r)))
        .collect();
    let run = |&(c, r): &(usize, usize)| {
        let (n, m) = cfg.grid[c];
        run_replication(cfg, n, m, r)
    };
    let results: Vec<Result<(Vec<Measurement>, usize)>> = if cfg.parallel {
        jobs.par_iter().map(run).collect()
    } else {
        jobs.iter().map(run).collect()
    };

    let k = cfg.methods.len();
    let mut measurements = vec![vec![Vec::with_capacity(cfg.replications); k]; cfg.grid.len()];
    let mut regenerated = 0;
    for (&(c, _), res) in jobs.iter().zip(results) {
        let (ms, rejected) = res?;
        regenerated += rejected;
        for (mi, meas) in ms.into_iter().enumerate() {
            measurements[c][mi].push(meas);
        }
    }

    let mut cells = Vec::new();
    for (c, &(n, m)) in cfg.grid.iter().enumerate() {
        for (mi, method) in cfg.methods.iter().enumerate() {
            let ms = &measurements[c][mi];
            let mut r: Vec<f64> = ms.iter().map(|x| x.correlation).collect();
            let mut t: Vec<f64> = ms.iter().map(|x| x.seconds).collect();
            r.sort_by(f64::total_cmp);
            t.sort_by(f64::total_cmp);
            cells.push(CellSummary {
                n,
                m,
                method: method.name(),
                median_r: quantile(&r, 0.5),
                q1_r: quantile(&r, 0.25),
                q3_r: quantile(&r, 0.75),
                median_seconds: quantile(&t, 0.5),
                replications: ms.len(),
                not_converged: ms.iter().filter(|x| !x.converged).count(),
            });
        }
    }
    Ok(ReplicationSummary {
        cells,
        regenerated,
        measurements,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimingRow {
    pub n: usize,
    pub m: usize,
    pub method: String,
    pub median_seconds: f64,
}

/// Median fit wall-time per cell and method, always run sequentially.
pub fn timing_bench(cfg: &ExperimentConfig) -> Result<Vec<TimingRow>> {
    let sequential = ExperimentConfig {
        parallel: false,
        ..cfg.clone()
    };
    Ok(replication_experiment(&sequential)?
        .cells
        .into_iter()
        .map(|c| TimingRow {
            n: c.n,
            m: c.m,
            method: c.method,
            median_seconds: c.median_seconds,
        })
        .collect())
}

pub const CELL_SUMMARY_HEADER: &str = "n,m,method,median_r,q1_r,q3_r,median_seconds";
pub const RANKINGS_HEADER: &str = "rank,method,player,score";

pub fn write_cell_summary<W: Write>(mut out: W, cells: &[CellSummary]) -> io::Result<()> {
    writeln!(out, "{CELL_SUMMARY_HEADER}")?;
    for c in cells {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            c.n, c.m, c.method, c.median_r, c.q1_r, c.q3_r, c.median_seconds
        )?;
    }
    Ok(())
}

pub fn write_timing<W: Write>(mut out: W, rows: &[TimingRow]) -> io::Result<()> {
    writeln!(out, "n,m,method,median_seconds")?;
    for r in rows {
        writeln!(out, "{},{},{},{}", r.n, r.m, r.method, r.median_seconds)?;
    }
    Ok(())
}

/// Writes rankings, one row per (method, position), ranks starting at 1.
pub fn write_rankings<W: Write>(
    mut out: W,
    registry: &PlayerRegistry,
    rankings: &[(String, Ranking)],
) -> io::Result<()> {
    writeln!(out, "{RANKINGS_HEADER}")?;
    for (method, ranking) in rankings {
        for (pos, &(player, score)) in ranking.entries().iter().enumerate() {
            let label = registry
                .label(player)
                .map(str::to_owned)
                .unwrap_or_else(|| player.to_string());
            writeln!(out, "{},{},{},{}", pos + 1, method, label, score)?;
        }
    }
    Ok(())
}

/// Pairwise Pearson correlations between score vectors; `None` where a
/// vector is constant.
pub fn correlation_matrix(series: &[Vec<f64>]) -> Vec<Vec<Option<f64>>> {
    series
        .iter()
        .map(|a| series.iter().map(|b| pearson(a, b).ok()).collect())
        .collect()
}
