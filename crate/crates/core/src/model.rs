//! Domain types for recorded team games and the pure evaluation of the three
//! paired-comparison models over them.
//!
//! A game is a directed hyperedge `(I, J, W)`: team `I` beat team `J`, and the
//! record carries weight `W`. Three models assign the win probability
//! `P[I <- J]`:
//!
//! * `Bt`: classical Bradley-Terry, one player per side, `pi_i / (pi_i + pi_j)`.
//! * `Hbt`: team strength is the product of member strengths, i.e. the logistic
//!   of the difference of summed log-strengths.
//! * `Gbt`: team strength is the sum of member strengths.
//!
//! Every probability is evaluated as `logistic(log A - log B)` for the two
//! team strengths, so products never overflow and the three models coincide
//! bit-for-bit on one-against-one games.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Dense mapping between external player labels and indices `0..n`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PlayerRegistry {
    names: Vec<String>,
    index: HashMap<String, usize>,
}

impl PlayerRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_labels<I, S>(labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut reg = Self::new();
        for label in labels {
            let label = label.into();
            if reg.index.contains_key(&label) {
                return Err(Error::DuplicateLabel(label));
            }
            reg.intern(&label);
        }
        Ok(reg)
    }

    /// Returns the index of `label`, registering it if unseen.
    pub fn intern(&mut self, label: &str) -> usize {
        if let Some(&i) = self.index.get(label) {
            return i;
        }
        let i = self.names.len();
        self.names.push(label.to_owned());
        self.index.insert(label.to_owned(), i);
        i
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }

    pub fn label(&self, index: usize) -> Option<&str> {
        self.names.get(index).map(String::as_str)
    }

    pub fn labels(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }
}

/// A set of players, stored as a sorted, duplicate-free index sequence.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Team(Vec<usize>);

impl Team {
    pub fn new<I: IntoIterator<Item = usize>>(members: I) -> Result<Self> {
        let mut v: Vec<usize> = members.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        if v.is_empty() {
            return Err(Error::EmptyTeam);
        }
        Ok(Team(v))
    }

    pub fn members(&self) -> &[usize] {
        &self.0
    }

    pub fn contains(&self, player: usize) -> bool {
        self.0.binary_search(&player).is_ok()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn intersects(&self, other: &Team) -> Option<usize> {
        self.0.iter().copied().find(|&p| other.contains(p))
    }
}

impl std::ops::Deref for Team {
    type Target = [usize];
    fn deref(&self) -> &[usize] {
        &self.0
    }
}

/// One recorded game: `winners` beat `losers`, counted with `weight`.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectedHyperedge {
    pub winners: Team,
    pub losers: Team,
    pub weight: f64,
}

impl DirectedHyperedge {
    pub fn new(winners: Team, losers: Team, weight: f64) -> Result<Self> {
        if !(weight.is_finite() && weight > 0.0) {
            return Err(Error::InvalidWeight(weight));
        }
        Ok(Self {
            winners,
            losers,
            weight,
        })
    }

    /// Convenience constructor from raw index lists.
    pub fn from_indices(winners: &[usize], losers: &[usize], weight: f64) -> Result<Self> {
        Self::new(
            Team::new(winners.iter().copied())?,
            Team::new(losers.iter().copied())?,
            weight,
        )
    }

    pub fn is_pairwise(&self) -> bool {
        self.winners.len() == 1 && self.losers.len() == 1
    }

    pub fn overlap(&self) -> Option<usize> {
        self.winners.intersects(&self.losers)
    }

    /// The same pairing with the outcome reversed.
    pub fn reversed(&self) -> Self {
        Self {
            winners: self.losers.clone(),
            losers: self.winners.clone(),
            weight: self.weight,
        }
    }
}

/// A weighted set of recorded games over `n` players.
#[derive(Debug, Clone, PartialEq)]
pub struct GameDataset {
    n: usize,
    edges: Vec<DirectedHyperedge>,
    overlap_allowed: bool,
}

impl GameDataset {
    pub fn new(n: usize, overlap_allowed: bool) -> Result<Self> {
        if n == 0 {
            return Err(Error::NoPlayers);
        }
        Ok(Self {
            n,
            edges: Vec::new(),
            overlap_allowed,
        })
    }

    pub fn from_edges(
        n: usize,
        edges: impl IntoIterator<Item = DirectedHyperedge>,
        overlap_allowed: bool,
    ) -> Result<Self> {
        let mut data = Self::new(n, overlap_allowed)?;
        for e in edges {
            data.push(e)?;
        }
        Ok(data)
    }

    pub fn push(&mut self, edge: DirectedHyperedge) -> Result<()> {
        for &p in edge.winners.iter().chain(edge.losers.iter()) {
            if p >= self.n {
                return Err(Error::IndexOutOfRange { index: p, n: self.n });
            }
        }
        if !self.overlap_allowed {
            if let Some(player) = edge.overlap() {
                return Err(Error::Overlap { player });
            }
        }
        self.edges.push(edge);
        Ok(())
    }

    /// Adds a game from raw index lists.
    pub fn add_game(&mut self, winners: &[usize], losers: &[usize], weight: f64) -> Result<()> {
        self.push(DirectedHyperedge::from_indices(winners, losers, weight)?)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[DirectedHyperedge] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn overlap_allowed(&self) -> bool {
        self.overlap_allowed
    }

    /// True if some game actually has a player on both sides.
    pub fn has_overlap(&self) -> bool {
        self.edges.iter().any(|e| e.overlap().is_some())
    }

    pub fn is_pairwise(&self) -> bool {
        self.edges.iter().all(DirectedHyperedge::is_pairwise)
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.weight).sum()
    }

    /// Per-player `(won weight, played weight)`. A player on both sides of a
    /// game counts that game once as played and once as won.
    pub fn player_weights(&self) -> Vec<(f64, f64)> {
        let mut out = vec![(0.0, 0.0); self.n];
        for e in &self.edges {
            for &p in e.winners.iter() {
                out[p].0 += e.weight;
                out[p].1 += e.weight;
            }
            for &p in e.losers.iter() {
                if !e.winners.contains(p) {
                    out[p].1 += e.weight;
                }
            }
        }
        out
    }

    pub(crate) fn check_pairwise(&self, model: ModelKind) -> Result<()> {
        for (i, e) in self.edges.iter().enumerate() {
            if !e.is_pairwise() || e.overlap().is_some() {
                return Err(Error::NotPairwise {
                    model,
                    edge: i,
                    winners: e.winners.len(),
                    losers: e.losers.len(),
                });
            }
        }
        Ok(())
    }
}

/// Per-player positive ratings `pi`; `s = log(pi)` is the log-strength view.
#[derive(Debug, Clone, PartialEq)]
pub struct Strengths {
    pi: Vec<f64>,
}

impl Strengths {
    pub fn new(pi: Vec<f64>) -> Result<Self> {
        for (player, &value) in pi.iter().enumerate() {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidStrength { player, value });
            }
        }
        Ok(Self { pi })
    }

    pub fn ones(n: usize) -> Self {
        Self { pi: vec![1.0; n] }
    }

    pub fn from_log(s: &[f64]) -> Result<Self> {
        Self::new(s.iter().map(|x| x.exp()).collect())
    }

    pub fn pi(&self) -> &[f64] {
        &self.pi
    }

    pub fn log_strengths(&self) -> Vec<f64> {
        self.pi.iter().map(|p| p.ln()).collect()
    }

    pub fn len(&self) -> usize {
        self.pi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pi.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.pi
    }

    pub(crate) fn from_raw(pi: Vec<f64>) -> Self {
        debug_assert!(pi.iter().all(|p| p.is_finite() && *p > 0.0));
        Self { pi }
    }

    fn check_len(&self, n: usize) -> Result<()> {
        if self.pi.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: self.pi.len(),
            });
        }
        Ok(())
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i >= self.pi.len() {
            return Err(Error::IndexOutOfRange {
                index: i,
                n: self.pi.len(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    Bt,
    Hbt,
    Gbt,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Bt => "bt",
            ModelKind::Hbt => "hbt",
            ModelKind::Gbt => "gbt",
        }
    }

    /// True if win probabilities are unchanged by a common rescaling of `pi`.
    pub fn scale_invariant(self) -> bool {
        !matches!(self, ModelKind::Hbt)
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bt" => Ok(ModelKind::Bt),
            "hbt" => Ok(ModelKind::Hbt),
            "gbt" => Ok(ModelKind::Gbt),
            other => Err(Error::Config(format!("unknown model `{other}`"))),
        }
    }
}

/// Square matrix of pairwise win weights; `get(i, j)` is the weight of `i`
/// beating `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct WinMatrix {
    n: usize,
    data: Vec<f64>,
}

impl WinMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut m = Self::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidMatrix);
            }
            for (j, &w) in row.iter().enumerate() {
                if !(w.is_finite() && w >= 0.0) {
                    return Err(Error::InvalidMatrix);
                }
                m.data[i * n + j] = w;
            }
        }
        Ok(m)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn add(&mut self, i: usize, j: usize, w: f64) {
        self.data[i * self.n + j] += w;
    }

    pub fn total(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.n.max(1)).map(<[f64]>::to_vec).collect()
    }

    /// Expands the matrix into one-against-one games, one per nonzero entry.
    pub fn to_dataset(&self) -> Result<GameDataset> {
        let mut data = GameDataset::new(self.n, false)?;
        for i in 0..self.n {
            for j in 0..self.n {
                let w = self.get(i, j);
                if w > 0.0 && i != j {
                    data.add_game(&[i], &[j], w)?;
                }
            }
        }
        Ok(data)
    }
}

/// `1 / (1 + e^-x)`, never exponentiating a positive argument.
#[inline]
pub fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `log(logistic(x))`.
#[inline]
pub fn log_logistic(x: f64) -> f64 {
    if x >= 0.0 {
        -(-x).exp().ln_1p()
    } else {
        x - x.exp().ln_1p()
    }
}

#[inline]
pub(crate) fn sum_of(team: &[usize], pi: &[f64]) -> f64 {
    team.iter().map(|&i| pi[i]).sum()
}

/// Log of the team strength of `team` under `model`.
#[inline]
pub(crate) fn log_team_strength(model: ModelKind, team: &[usize], pi: &[f64]) -> f64 {
    match model {
        ModelKind::Bt | ModelKind::Hbt => team.iter().map(|&i| pi[i].ln()).sum(),
        ModelKind::Gbt => sum_of(team, pi).ln(),
    }
}

fn check_team(team: &[usize], pi: &Strengths) -> Result<()> {
    if team.is_empty() {
        return Err(Error::EmptyTeam);
    }
    team.iter().try_for_each(|&i| pi.check_index(i))
}

/// `P[I <- J]` under the hypergraph model: `Pi_I / (Pi_I + Pi_J)` with
/// `Pi_S` the product of member strengths.
pub fn hbt_win_prob(winners: &[usize], losers: &[usize], pi: &Strengths) -> Result<f64> {
    check_team(winners, pi)?;
    check_team(losers, pi)?;
    Ok(win_prob_unchecked(ModelKind::Hbt, winners, losers, pi.pi()))
}

/// `P[i <- j] = pi_i / (pi_i + pi_j)`.
pub fn bt_win_prob(i: usize, j: usize, pi: &Strengths) -> Result<f64> {
    pi.check_index(i)?;
    pi.check_index(j)?;
    if i == j {
        return Err(Error::Overlap { player: i });
    }
    Ok(win_prob_unchecked(ModelKind::Bt, &[i], &[j], pi.pi()))
}

/// `P[I <- J] = pi_I / (pi_I + pi_J)` with `pi_S` the sum of member strengths.
pub fn gbt_win_prob(winners: &[usize], losers: &[usize], pi: &Strengths) -> Result<f64> {
    check_team(winners, pi)?;
    check_team(losers, pi)?;
    Ok(win_prob_unchecked(ModelKind::Gbt, winners, losers, pi.pi()))
}

pub fn win_prob(model: ModelKind, winners: &[usize], losers: &[usize], pi: &Strengths) -> Result<f64> {
    match model {
        ModelKind::Bt => {
            if winners.len() != 1 || losers.len() != 1 {
                return Err(Error::NotPairwise {
                    model,
                    edge: 0,
                    winners: winners.len(),
                    losers: losers.len(),
                });
            }
            bt_win_prob(winners[0], losers[0], pi)
        }
        ModelKind::Hbt => hbt_win_prob(winners, losers, pi),
        ModelKind::Gbt => gbt_win_prob(winners, losers, pi),
    }
}

#[inline]
pub(crate) fn win_prob_unchecked(model: ModelKind, winners: &[usize], losers: &[usize], pi: &[f64]) -> f64 {
    logistic(log_team_strength(model, winners, pi) - log_team_strength(model, losers, pi))
}

fn check_data(data: &GameDataset, pi: &Strengths, model: ModelKind) -> Result<()> {
    pi.check_len(data.n())?;
    if model == ModelKind::Bt {
        data.check_pairwise(model)?;
    }
    Ok(())
}

/// `sum_{(I,J)} W_IJ log P[I <- J]`.
pub fn log_likelihood(data: &GameDataset, pi: &Strengths, model: ModelKind) -> Result<f64> {
    check_data(data, pi, model)?;
    Ok(log_likelihood_unchecked(data, pi.pi(), model))
}

pub(crate) fn log_likelihood_unchecked(data: &GameDataset, pi: &[f64], model: ModelKind) -> f64 {
    data.edges()
        .iter()
        .map(|e| {
            let d = log_team_strength(model, &e.winners, pi) - log_team_strength(model, &e.losers, pi);
            e.weight * log_logistic(d)
        })
        .sum()
}

/// Classical log-likelihood over a win matrix.
pub fn bt_log_likelihood_matrix(w: &WinMatrix, pi: &Strengths) -> Result<f64> {
    pi.check_len(w.n())?;
    Ok(bt_log_likelihood_matrix_unchecked(w, pi.pi()))
}

pub(crate) fn bt_log_likelihood_matrix_unchecked(w: &WinMatrix, pi: &[f64]) -> f64 {
    let n = w.n();
    let mut ll = 0.0;
    for (i, &pi_i) in pi.iter().enumerate().take(n) {
        let li = pi_i.ln();
        for (j, &pi_j) in pi.iter().enumerate().take(n) {
            let wij = w.get(i, j);
            if i != j && wij > 0.0 {
                ll += wij * log_logistic(li - pi_j.ln());
            }
        }
    }
    ll
}

/// Partial derivatives of the log-likelihood with respect to each `pi_k`.
///
/// A player on both sides of a game gets zero from it under `Hbt` and
/// `W (pi_J - pi_I) / (pi_I (pi_I + pi_J))` under `Gbt`.
pub fn grad_log_likelihood(data: &GameDataset, pi: &Strengths, model: ModelKind) -> Result<Vec<f64>> {
    check_data(data, pi, model)?;
    let p = pi.pi();
    let mut grad = vec![0.0; data.n()];
    for e in data.edges() {
        let (w, winners, losers) = (e.weight, &e.winners, &e.losers);
        match model {
            ModelKind::Bt | ModelKind::Hbt => {
                let lose_p = win_prob_unchecked(ModelKind::Hbt, losers, winners, p);
                for &k in winners.iter() {
                    if !losers.contains(k) {
                        grad[k] += w * lose_p / p[k];
                    }
                }
                for &k in losers.iter() {
                    if !winners.contains(k) {
                        grad[k] -= w * lose_p / p[k];
                    }
                }
            }
            ModelKind::Gbt => {
                let pi_i = sum_of(winners, p);
                let pi_j = sum_of(losers, p);
                let total = pi_i + pi_j;
                for &k in winners.iter() {
                    if losers.contains(k) {
                        grad[k] += w * (pi_j - pi_i) / (pi_i * total);
                    } else {
                        grad[k] += w * pi_j / (pi_i * total);
                    }
                }
                for &k in losers.iter() {
                    if !winners.contains(k) {
                        grad[k] -= w / total;
                    }
                }
            }
        }
    }
    Ok(grad)
}

/// Gradient of the win-matrix log-likelihood with respect to `pi`.
pub fn bt_grad_matrix(w: &WinMatrix, pi: &Strengths) -> Result<Vec<f64>> {
    pi.check_len(w.n())?;
    let p = pi.pi();
    let n = w.n();
    let mut grad = vec![0.0; n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let s = p[i] + p[j];
            grad[i] += w.get(i, j) / p[i] - (w.get(i, j) + w.get(j, i)) / s;
        }
    }
    Ok(grad)
}
