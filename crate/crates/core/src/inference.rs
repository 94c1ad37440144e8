//! Fixed-point update rules and the sweep-based fit loop.
//!
//! Every sweep updates players in ascending index order, in place, so each
//! update sees the values already produced earlier in the same sweep.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::evaluation::pairwise_projection;
use crate::model::{
    bt_log_likelihood_matrix_unchecked, log_likelihood_unchecked, log_logistic, logistic, sum_of, GameDataset,
    ModelKind, Strengths, Team, WinMatrix,
};

/// Log-strengths are kept inside this range so `exp` stays finite.
pub const MAX_ABS_LOG_STRENGTH: f64 = 700.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UpdateRule {
    /// Classical fixed point for pairwise data.
    Zermelo,
    /// Newman's rearrangement of the same stationarity condition.
    Newman,
    /// Hypergraph model update (product team strengths).
    HbtMm,
    /// Huang et al.'s update for sum team strengths.
    GbtHuang,
    /// Newman-style update for sum team strengths.
    GbtNewman,
}

impl UpdateRule {
    pub fn model(self) -> ModelKind {
        match self {
            UpdateRule::Zermelo | UpdateRule::Newman => ModelKind::Bt,
            UpdateRule::HbtMm => ModelKind::Hbt,
            UpdateRule::GbtHuang | UpdateRule::GbtNewman => ModelKind::Gbt,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            UpdateRule::Zermelo => "zermelo",
            UpdateRule::Newman => "newman",
            UpdateRule::HbtMm => "mm",
            UpdateRule::GbtHuang => "huang",
            UpdateRule::GbtNewman => "newman",
        }
    }

    /// The rule used when none is requested: the Newman-style update of each
    /// model.
    pub fn default_for(model: ModelKind) -> Self {
        match model {
            ModelKind::Bt => UpdateRule::Newman,
            ModelKind::Hbt => UpdateRule::HbtMm,
            ModelKind::Gbt => UpdateRule::GbtNewman,
        }
    }

    /// Resolves a command-line rule name against a model.
    pub fn parse_for(name: &str, model: ModelKind) -> Result<Self> {
        let rule = match (name.to_ascii_lowercase().as_str(), model) {
            ("zermelo", ModelKind::Bt) => UpdateRule::Zermelo,
            ("newman", ModelKind::Bt) => UpdateRule::Newman,
            ("mm", ModelKind::Hbt) => UpdateRule::HbtMm,
            ("huang", ModelKind::Gbt) => UpdateRule::GbtHuang,
            ("newman", ModelKind::Gbt) => UpdateRule::GbtNewman,
            (n @ ("zermelo" | "newman" | "mm" | "huang"), _) => {
                let rule: &'static str = match n {
                    "zermelo" => "zermelo",
                    "newman" => "newman",
                    "mm" => "mm",
                    _ => "huang",
                };
                return Err(Error::IncompatibleRule { rule, model });
            }
            (other, _) => return Err(Error::Config(format!("unknown update rule `{other}`"))),
        };
        Ok(rule)
    }

    fn check_model(self, model: ModelKind) -> Result<()> {
        if self.model() != model {
            return Err(Error::IncompatibleRule {
                rule: self.as_str(),
                model,
            });
        }
        Ok(())
    }
}

impl fmt::Display for UpdateRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Normalization {
    None,
    SumOne,
    #[default]
    GeometricMeanOne,
}

impl Normalization {
    pub fn as_str(self) -> &'static str {
        match self {
            Normalization::None => "none",
            Normalization::SumOne => "sum",
            Normalization::GeometricMeanOne => "geomean",
        }
    }
}

impl FromStr for Normalization {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "none" => Ok(Normalization::None),
            "sum" => Ok(Normalization::SumOne),
            "geomean" => Ok(Normalization::GeometricMeanOne),
            other => Err(Error::Config(format!("unknown normalization `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig {
    /// Bound on `max_k |log pi_k(new) - log pi_k(old)|` for one sweep.
    pub tolerance: f64,
    pub max_sweeps: usize,
    /// Applied after every sweep for scale-invariant models; ignored for HBT.
    pub normalization: Normalization,
    pub record_trace: bool,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_sweeps: 10_000,
            normalization: Normalization::GeometricMeanOne,
            record_trace: false,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance.is_finite() && self.tolerance > 0.0) {
            return Err(Error::Config(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        if self.max_sweeps == 0 {
            return Err(Error::Config("max_sweeps must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub pi: Strengths,
    pub sweeps_used: usize,
    /// False when sweeps ran out, or when a strength stalled at the
    /// `MAX_ABS_LOG_STRENGTH` clamp (no finite maximizer).
    pub converged: bool,
    pub final_delta: f64,
    /// Log-likelihood after each sweep, when requested.
    pub loglik_trace: Option<Vec<f64>>,
    /// Set when a normalization was requested for a model that forbids it.
    pub normalization_ignored: bool,
}

impl FitResult {
    pub fn log_strengths(&self) -> Vec<f64> {
        self.pi.log_strengths()
    }
}

pub fn normalize(pi: &Strengths, policy: Normalization) -> Strengths {
    let mut v = pi.pi().to_vec();
    normalize_in_place(&mut v, policy);
    Strengths::from_raw(v)
}

fn normalize_in_place(pi: &mut [f64], policy: Normalization) {
    let scale = match policy {
        Normalization::None => return,
        Normalization::SumOne => pi.iter().sum::<f64>(),
        Normalization::GeometricMeanOne => (pi.iter().map(|p| p.ln()).sum::<f64>() / pi.len() as f64).exp(),
    };
    for p in pi.iter_mut() {
        *p /= scale;
    }
}

/// Players whose update is undefined, and connectivity of the comparison graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegeneracyReport {
    pub model: ModelKind,
    /// Players never on a winning side (excluding games where they are on both).
    pub no_wins: Vec<usize>,
    /// Players never on a losing side (same exclusion).
    pub no_losses: Vec<usize>,
    /// Strong connectivity of the digraph with an arc `j -> i` whenever `i`
    /// beat `j` in some game.
    pub strongly_connected: bool,
}

impl DegeneracyReport {
    pub fn hard_flag_count(&self) -> usize {
        self.no_wins.len() + self.no_losses.len()
    }

    pub fn has_hard_flags(&self) -> bool {
        self.hard_flag_count() > 0
    }

    /// Disconnection only blocks the pairwise model; for team models it is a
    /// warning.
    pub fn is_fatal(&self) -> bool {
        self.has_hard_flags() || (self.model == ModelKind::Bt && !self.strongly_connected)
    }

    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !self.strongly_connected && self.model != ModelKind::Bt {
            out.push("comparison graph is not strongly connected; strengths may not be identifiable".into());
        }
        out
    }

    /// Human-readable summary naming players through `label`.
    pub fn describe(&self, label: impl Fn(usize) -> String) -> String {
        let mut parts = Vec::new();
        if !self.no_wins.is_empty() {
            let names: Vec<String> = self.no_wins.iter().map(|&p| label(p)).collect();
            parts.push(format!("players with no wins: {}", names.join(", ")));
        }
        if !self.no_losses.is_empty() {
            let names: Vec<String> = self.no_losses.iter().map(|&p| label(p)).collect();
            parts.push(format!("players with no losses: {}", names.join(", ")));
        }
        if !self.strongly_connected {
            parts.push("comparison graph is not strongly connected".into());
        }
        parts.join("; ")
    }
}

pub fn check_degeneracy(data: &GameDataset, model: ModelKind) -> DegeneracyReport {
    let n = data.n();
    let mut wins = vec![false; n];
    let mut losses = vec![false; n];
    let mut fwd: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut rev: Vec<Vec<usize>> = vec![Vec::new(); n];
    for e in data.edges() {
        for &j in e.losers.iter().filter(|&&j| !e.winners.contains(j)) {
            losses[j] = true;
        }
        for &i in e.winners.iter().filter(|&&i| !e.losers.contains(i)) {
            wins[i] = true;
            for &j in e.losers.iter().filter(|&&j| !e.winners.contains(j)) {
                fwd[j].push(i);
                rev[i].push(j);
            }
        }
    }
    DegeneracyReport {
        model,
        no_wins: (0..n).filter(|&k| !wins[k]).collect(),
        no_losses: (0..n).filter(|&k| !losses[k]).collect(),
        strongly_connected: reaches_all(&fwd) && reaches_all(&rev),
    }
}

fn matrix_degeneracy(w: &WinMatrix) -> DegeneracyReport {
    let n = w.n();
    let mut fwd: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut rev: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut wins = vec![false; n];
    let mut losses = vec![false; n];
    for i in 0..n {
        for j in 0..n {
            if i != j && w.get(i, j) > 0.0 {
                wins[i] = true;
                losses[j] = true;
                fwd[j].push(i);
                rev[i].push(j);
            }
        }
    }
    DegeneracyReport {
        model: ModelKind::Bt,
        no_wins: (0..n).filter(|&k| !wins[k]).collect(),
        no_losses: (0..n).filter(|&k| !losses[k]).collect(),
        strongly_connected: reaches_all(&fwd) && reaches_all(&rev),
    }
}

fn reaches_all(adj: &[Vec<usize>]) -> bool {
    if adj.is_empty() {
        return true;
    }
    let mut seen = vec![false; adj.len()];
    let mut stack = vec![0];
    seen[0] = true;
    let mut count = 1;
    while let Some(u) = stack.pop() {
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                count += 1;
                stack.push(v);
            }
        }
    }
    count == adj.len()
}

/// Adds `weight` to both orientations of every observed unordered team
/// pairing. Off by default; an explicit escape hatch for degenerate players.
pub fn add_pseudocounts(data: &GameDataset, weight: f64) -> Result<GameDataset> {
    if !(weight.is_finite() && weight > 0.0) {
        return Err(Error::InvalidWeight(weight));
    }
    let mut seen: Vec<(Team, Team)> = Vec::new();
    let mut keys = std::collections::HashSet::new();
    for e in data.edges() {
        let key = canonical_pairing(&e.winners, &e.losers);
        if keys.insert(key.clone()) {
            seen.push(key);
        }
    }
    let mut out = data.clone();
    for (a, b) in seen {
        out.push(crate::model::DirectedHyperedge::new(a.clone(), b.clone(), weight)?)?;
        out.push(crate::model::DirectedHyperedge::new(b, a, weight)?)?;
    }
    Ok(out)
}

fn canonical_pairing(a: &Team, b: &Team) -> (Team, Team) {
    if a <= b {
        (a.clone(), b.clone())
    } else {
        (b.clone(), a.clone())
    }
}

/// Per-player edge incidence split by side.
struct Incidence {
    /// Edges with k on the winning side only.
    wins: Vec<Vec<usize>>,
    /// Edges with k on the losing side only.
    losses: Vec<Vec<usize>>,
    /// Edges with k on both sides.
    both: Vec<Vec<usize>>,
}

impl Incidence {
    fn new(data: &GameDataset) -> Self {
        let n = data.n();
        let mut inc = Incidence {
            wins: vec![Vec::new(); n],
            losses: vec![Vec::new(); n],
            both: vec![Vec::new(); n],
        };
        for (idx, e) in data.edges().iter().enumerate() {
            for &k in e.winners.iter() {
                if e.losers.contains(k) {
                    inc.both[k].push(idx);
                } else {
                    inc.wins[k].push(idx);
                }
            }
            for &k in e.losers.iter() {
                if !e.winners.contains(k) {
                    inc.losses[k].push(idx);
                }
            }
        }
        inc
    }
}

/// Unordered team pairings with combined weight, for the Huang denominator.
struct Pairings {
    teams: Vec<(Team, Team)>,
    weight: Vec<f64>,
    by_player: Vec<Vec<usize>>,
}

impl Pairings {
    fn new(data: &GameDataset) -> Self {
        let mut index: HashMap<(Team, Team), usize> = HashMap::new();
        let mut teams = Vec::new();
        let mut weight: Vec<f64> = Vec::new();
        for e in data.edges() {
            let key = canonical_pairing(&e.winners, &e.losers);
            let id = *index.entry(key.clone()).or_insert_with(|| {
                teams.push(key);
                weight.push(0.0);
                teams.len() - 1
            });
            weight[id] += e.weight;
        }
        let mut by_player = vec![Vec::new(); data.n()];
        for (id, (a, b)) in teams.iter().enumerate() {
            for &k in a.iter().chain(b.iter()) {
                if by_player[k].last() != Some(&id) {
                    by_player[k].push(id);
                }
            }
        }
        Pairings {
            teams,
            weight,
            by_player,
        }
    }
}

fn check_len(pi: &Strengths, n: usize) -> Result<()> {
    if pi.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: pi.len(),
        });
    }
    Ok(())
}

#[inline]
fn set_player(pi: &mut [f64], k: usize, value: f64) {
    let bound = MAX_ABS_LOG_STRENGTH.exp();
    pi[k] = value.clamp(1.0 / bound, bound);
}

fn zermelo_in_place(w: &WinMatrix, pi: &mut [f64]) -> Result<()> {
    let n = w.n();
    for i in 0..n {
        let mut num = 0.0;
        let mut den = 0.0;
        for j in 0..n {
            if i == j {
                continue;
            }
            num += w.get(i, j);
            den += (w.get(i, j) + w.get(j, i)) / (pi[i] + pi[j]);
        }
        if num <= 0.0 {
            return Err(Error::ZeroNumerator { player: i });
        }
        if den <= 0.0 {
            return Err(Error::ZeroDenominator { player: i });
        }
        set_player(pi, i, num / den);
    }
    Ok(())
}

fn newman_in_place(w: &WinMatrix, pi: &mut [f64]) -> Result<()> {
    let n = w.n();
    for i in 0..n {
        let mut num = 0.0;
        let mut den = 0.0;
        for j in 0..n {
            if i == j {
                continue;
            }
            let s = pi[i] + pi[j];
            num += w.get(i, j) * pi[j] / s;
            den += w.get(j, i) / s;
        }
        if num <= 0.0 {
            return Err(Error::ZeroNumerator { player: i });
        }
        if den <= 0.0 {
            return Err(Error::ZeroDenominator { player: i });
        }
        set_player(pi, i, num / den);
    }
    Ok(())
}

/// New log-strength of player `k` under the hypergraph update.
fn hbt_update(data: &GameDataset, inc: &Incidence, k: usize, log_pi: &[f64]) -> Result<f64> {
    if inc.wins[k].is_empty() {
        return Err(Error::ZeroNumerator { player: k });
    }
    if inc.losses[k].is_empty() {
        return Err(Error::ZeroDenominator { player: k });
    }
    let edges = data.edges();
    let margin = |idx: usize| {
        let e = &edges[idx];
        let s_i: f64 = e.winners.iter().map(|&i| log_pi[i]).sum();
        let s_j: f64 = e.losers.iter().map(|&j| log_pi[j]).sum();
        (e.weight, s_j - s_i)
    };
    // W * P[J <- I] summed per side; redone in log space if either sum
    // underflows, which happens once strengths start to diverge.
    let linear = |list: &[usize]| -> f64 {
        list.iter()
            .map(|&idx| {
                let (w, x) = margin(idx);
                w * logistic(x)
            })
            .sum()
    };
    let (num, den) = (linear(&inc.wins[k]), linear(&inc.losses[k]));
    let step = if num >= f64::MIN_POSITIVE && den >= f64::MIN_POSITIVE {
        num.ln() - den.ln()
    } else {
        let log_side = |list: &[usize]| {
            log_sum_exp(list.iter().map(|&idx| {
                let (w, x) = margin(idx);
                w.ln() + log_logistic(x)
            }))
        };
        log_side(&inc.wins[k]) - log_side(&inc.losses[k])
    };
    Ok((log_pi[k] + step).clamp(-MAX_ABS_LOG_STRENGTH, MAX_ABS_LOG_STRENGTH))
}

fn log_sum_exp(terms: impl Iterator<Item = f64>) -> f64 {
    let terms: Vec<f64> = terms.collect();
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
}

fn hbt_in_place(data: &GameDataset, inc: &Incidence, pi: &mut [f64], log_pi: &mut [f64]) -> Result<()> {
    for k in 0..data.n() {
        let s = hbt_update(data, inc, k, log_pi)?;
        log_pi[k] = s;
        pi[k] = s.exp();
    }
    Ok(())
}

fn gbt_huang_in_place(data: &GameDataset, inc: &Incidence, pairings: &Pairings, pi: &mut [f64]) -> Result<()> {
    let edges = data.edges();
    for k in 0..data.n() {
        let num: f64 = inc.wins[k]
            .iter()
            .map(|&e| edges[e].weight / sum_of(&edges[e].winners, pi))
            .sum();
        let den: f64 = pairings.by_player[k]
            .iter()
            .map(|&p| {
                let (a, b) = &pairings.teams[p];
                pairings.weight[p] / (sum_of(a, pi) + sum_of(b, pi))
            })
            .sum();
        if num <= 0.0 {
            if inc.wins[k].is_empty() {
                return Err(Error::ZeroNumerator { player: k });
            }
            return Err(Error::NonPositiveNumerator { player: k, value: num });
        }
        if den <= 0.0 {
            return Err(Error::ZeroDenominator { player: k });
        }
        set_player(pi, k, pi[k] * num / den);
    }
    Ok(())
}

fn gbt_newman_in_place(data: &GameDataset, inc: &Incidence, pi: &mut [f64]) -> Result<()> {
    let edges = data.edges();
    for k in 0..data.n() {
        let mut num = 0.0;
        for &e in &inc.wins[k] {
            let (pi_i, pi_j) = (sum_of(&edges[e].winners, pi), sum_of(&edges[e].losers, pi));
            num += edges[e].weight * pi_j / (pi_i * (pi_i + pi_j));
        }
        for &e in &inc.both[k] {
            let (pi_i, pi_j) = (sum_of(&edges[e].winners, pi), sum_of(&edges[e].losers, pi));
            num += edges[e].weight * (pi_j - pi_i) / (pi_i * (pi_i + pi_j));
        }
        let den: f64 = inc.losses[k]
            .iter()
            .map(|&e| edges[e].weight / (sum_of(&edges[e].winners, pi) + sum_of(&edges[e].losers, pi)))
            .sum();
        if num <= 0.0 {
            if inc.wins[k].is_empty() && inc.both[k].is_empty() {
                return Err(Error::ZeroNumerator { player: k });
            }
            return Err(Error::NonPositiveNumerator { player: k, value: num });
        }
        if den <= 0.0 {
            return Err(Error::ZeroDenominator { player: k });
        }
        set_player(pi, k, pi[k] * num / den);
    }
    Ok(())
}

/// One in-place sweep of the classical fixed point over a win matrix.
pub fn zermelo_sweep(w: &WinMatrix, pi: &Strengths) -> Result<Strengths> {
    check_len(pi, w.n())?;
    let mut v = pi.pi().to_vec();
    zermelo_in_place(w, &mut v)?;
    Ok(Strengths::from_raw(v))
}

/// One in-place sweep of Newman's update over a win matrix.
pub fn newman_sweep(w: &WinMatrix, pi: &Strengths) -> Result<Strengths> {
    check_len(pi, w.n())?;
    let mut v = pi.pi().to_vec();
    newman_in_place(w, &mut v)?;
    Ok(Strengths::from_raw(v))
}

/// One sweep of the hypergraph update
/// `pi_k <- pi_k * sum_{k in I} W P[J<-I] / sum_{k in J} W P[J<-I]`.
///
/// Games with `k` on both sides are skipped for `k`; they contribute nothing
/// to its stationarity condition.
pub fn hbt_sweep(data: &GameDataset, pi: &Strengths) -> Result<Strengths> {
    check_len(pi, data.n())?;
    let inc = Incidence::new(data);
    let mut v = pi.pi().to_vec();
    let mut log_v = pi.log_strengths();
    hbt_in_place(data, &inc, &mut v, &mut log_v)?;
    Ok(Strengths::from_raw(v))
}

/// One sweep of Huang et al.'s update for the sum-strength model:
/// `pi_k <- pi_k * sum_{k in I} W/pi_I / sum_{{I,J} ∋ k} (W_IJ + W_JI)/(pi_I + pi_J)`,
/// the denominator running once over each unordered team pairing.
pub fn gbt_huang_sweep(data: &GameDataset, pi: &Strengths) -> Result<Strengths> {
    check_len(pi, data.n())?;
    if let Some(player) = data.edges().iter().find_map(|e| e.overlap()) {
        return Err(Error::Overlap { player });
    }
    let inc = Incidence::new(data);
    let pairings = Pairings::new(data);
    let mut v = pi.pi().to_vec();
    gbt_huang_in_place(data, &inc, &pairings, &mut v)?;
    Ok(Strengths::from_raw(v))
}

/// One sweep of the Newman-style sum-strength update. Games with `k` on both
/// sides add `W (pi_J - pi_I) / (pi_I (pi_I + pi_J))` to the numerator.
pub fn gbt_newman_sweep(data: &GameDataset, pi: &Strengths) -> Result<Strengths> {
    check_len(pi, data.n())?;
    let inc = Incidence::new(data);
    let mut v = pi.pi().to_vec();
    gbt_newman_in_place(data, &inc, &mut v)?;
    Ok(Strengths::from_raw(v))
}

fn max_log_delta(old: &[f64], new: &[f64]) -> f64 {
    old.iter()
        .zip(new)
        .map(|(a, b)| (b.ln() - a.ln()).abs())
        .fold(0.0, f64::max)
}

struct SweepOutcome {
    pi: Vec<f64>,
    sweeps: usize,
    converged: bool,
    delta: f64,
    trace: Option<Vec<f64>>,
}

fn run_sweeps(
    n: usize,
    cfg: &FitConfig,
    normalization: Normalization,
    mut sweep: impl FnMut(&mut [f64]) -> Result<()>,
    loglik: impl Fn(&[f64]) -> f64,
) -> Result<SweepOutcome> {
    let mut pi = vec![1.0; n];
    let mut trace = cfg.record_trace.then(Vec::new);
    let mut delta = f64::INFINITY;
    let mut sweeps = 0;
    let mut converged = false;
    while sweeps < cfg.max_sweeps {
        sweeps += 1;
        let old = pi.clone();
        sweep(&mut pi).map_err(|e| Error::Sweep {
            sweep: sweeps,
            source: Box::new(e),
        })?;
        // A strength held at the clamp is diverging; it can stop moving
        // without the fit having found a maximizer.
        let pinned = pi.iter().any(|p| p.ln().abs() >= MAX_ABS_LOG_STRENGTH - 1e-9);
        normalize_in_place(&mut pi, normalization);
        delta = max_log_delta(&old, &pi);
        if let Some(t) = trace.as_mut() {
            t.push(loglik(&pi));
        }
        if delta <= cfg.tolerance {
            converged = !pinned;
            break;
        }
    }
    Ok(SweepOutcome {
        pi,
        sweeps,
        converged,
        delta,
        trace,
    })
}

/// Fits strengths by repeated sweeps from `pi = 1`, stopping once a sweep
/// moves no log-strength by more than `cfg.tolerance`.
///
/// `Bt` requires one-against-one games and is fitted on their win matrix.
/// Running out of sweeps is reported through `converged`, not as an error.
pub fn fit(data: &GameDataset, model: ModelKind, rule: UpdateRule, cfg: &FitConfig) -> Result<FitResult> {
    cfg.validate()?;
    rule.check_model(model)?;
    if model == ModelKind::Bt {
        data.check_pairwise(model)?;
        return fit_matrix(&pairwise_projection(data)?, rule, cfg);
    }
    if rule == UpdateRule::GbtHuang {
        if let Some(player) = data.edges().iter().find_map(|e| e.overlap()) {
            return Err(Error::Overlap { player });
        }
    }
    let report = check_degeneracy(data, model);
    if report.is_fatal() {
        return Err(Error::Degenerate(report.describe(|p| format!("#{p}"))));
    }
    let (normalization, ignored) = match model {
        ModelKind::Hbt => (Normalization::None, cfg.normalization != Normalization::None),
        _ => (cfg.normalization, false),
    };
    let inc = Incidence::new(data);
    let n = data.n();
    let loglik = |pi: &[f64]| log_likelihood_unchecked(data, pi, model);
    let out = match rule {
        UpdateRule::HbtMm => {
            let mut log_pi = vec![0.0; n];
            run_sweeps(
                n,
                cfg,
                normalization,
                |pi| {
                    for (l, p) in log_pi.iter_mut().zip(pi.iter()) {
                        *l = p.ln();
                    }
                    hbt_in_place(data, &inc, pi, &mut log_pi)
                },
                loglik,
            )?
        }
        UpdateRule::GbtHuang => {
            let pairings = Pairings::new(data);
            run_sweeps(
                n,
                cfg,
                normalization,
                |pi| gbt_huang_in_place(data, &inc, &pairings, pi),
                loglik,
            )?
        }
        UpdateRule::GbtNewman => run_sweeps(n, cfg, normalization, |pi| gbt_newman_in_place(data, &inc, pi), loglik)?,
        UpdateRule::Zermelo | UpdateRule::Newman => unreachable!("pairwise rules are handled above"),
    };
    Ok(FitResult {
        pi: Strengths::from_raw(out.pi),
        sweeps_used: out.sweeps,
        converged: out.converged,
        final_delta: out.delta,
        loglik_trace: out.trace,
        normalization_ignored: ignored,
    })
}

/// Fits the classical model directly on a win matrix with `Zermelo` or
/// `Newman`.
pub fn fit_matrix(w: &WinMatrix, rule: UpdateRule, cfg: &FitConfig) -> Result<FitResult> {
    cfg.validate()?;
    rule.check_model(ModelKind::Bt)?;
    if w.n() == 0 {
        return Err(Error::NoPlayers);
    }
    let report = matrix_degeneracy(w);
    if report.is_fatal() {
        return Err(Error::Degenerate(report.describe(|p| format!("#{p}"))));
    }
    let loglik = |pi: &[f64]| bt_log_likelihood_matrix_unchecked(w, pi);
    let out = match rule {
        UpdateRule::Zermelo => run_sweeps(w.n(), cfg, cfg.normalization, |pi| zermelo_in_place(w, pi), loglik)?,
        _ => run_sweeps(w.n(), cfg, cfg.normalization, |pi| newman_in_place(w, pi), loglik)?,
    };
    Ok(FitResult {
        pi: Strengths::from_raw(out.pi),
        sweeps_used: out.sweeps,
        converged: out.converged,
        final_delta: out.delta,
        loglik_trace: out.trace,
        normalization_ignored: false,
    })
}
