//! Text formats: the games file, the fit result file, and the truth sidecar.
//!
//! Games file grammar (UTF-8, one record per line):
//!
//! ```text
//! line   = blank | "#" any* | game
//! game   = team "|" team [ "|" weight ]
//! team   = label { "," label }
//! label  = one or more characters other than ',', '|' and whitespace
//! weight = positive finite decimal, default 1
//! ```
//!
//! Whitespace around labels and fields is ignored. Players are indexed in
//! order of first appearance, winners before losers.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{DirectedHyperedge, GameDataset, PlayerRegistry, Team};

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn parse_team(field: &str, line: usize, reg: &mut PlayerRegistry) -> Result<Vec<usize>> {
    let mut members = Vec::new();
    for raw in field.split(',') {
        let label = raw.trim();
        if label.is_empty() {
            return Err(parse_err(line, "empty player label"));
        }
        if label.chars().any(char::is_whitespace) {
            return Err(parse_err(line, format!("label `{label}` contains whitespace")));
        }
        let idx = reg.intern(label);
        if members.contains(&idx) {
            return Err(parse_err(line, format!("player `{label}` listed twice in one team")));
        }
        members.push(idx);
    }
    Ok(members)
}

/// Parses games-file text into a registry and dataset.
pub fn parse_games_str(text: &str, allow_overlap: bool) -> Result<(PlayerRegistry, GameDataset)> {
    let mut reg = PlayerRegistry::new();
    let mut games: Vec<(usize, Vec<usize>, Vec<usize>, f64)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split('|').collect();
        if !(2..=3).contains(&fields.len()) {
            return Err(parse_err(line, "expected `winners|losers` or `winners|losers|weight`"));
        }
        let winners = parse_team(fields[0], line, &mut reg)?;
        let losers = parse_team(fields[1], line, &mut reg)?;
        let weight = match fields.get(2) {
            None => 1.0,
            Some(w) => {
                let w = w.trim();
                let v: f64 = w.parse().map_err(|_| parse_err(line, format!("bad weight `{w}`")))?;
                if !(v.is_finite() && v > 0.0) {
                    return Err(parse_err(line, format!("weight must be positive, got `{w}`")));
                }
                v
            }
        };
        if !allow_overlap {
            if let Some(&p) = winners.iter().find(|p| losers.contains(p)) {
                return Err(parse_err(
                    line,
                    format!(
                        "player `{}` is on both teams (pass --allow-overlap to accept)",
                        reg.label(p).unwrap_or_default()
                    ),
                ));
            }
        }
        games.push((line, winners, losers, weight));
    }
    if reg.is_empty() {
        return Err(parse_err(0, "no games found"));
    }
    let mut data = GameDataset::new(reg.len(), allow_overlap)?;
    for (line, winners, losers, weight) in games {
        let edge = DirectedHyperedge::new(Team::new(winners)?, Team::new(losers)?, weight)
            .map_err(|e| parse_err(line, e.to_string()))?;
        data.push(edge).map_err(|e| parse_err(line, e.to_string()))?;
    }
    Ok((reg, data))
}

pub fn parse_games(path: impl AsRef<Path>, allow_overlap: bool) -> Result<(PlayerRegistry, GameDataset)> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_games_str(&text, allow_overlap)
}

/// Renders a dataset in games-file syntax; weights of exactly 1 are omitted.
pub fn write_games(reg: &PlayerRegistry, data: &GameDataset) -> String {
    let mut out = String::new();
    let team = |t: &Team| -> String {
        t.iter()
            .map(|&i| reg.label(i).map(str::to_owned).unwrap_or_else(|| i.to_string()))
            .collect::<Vec<_>>()
            .join(",")
    };
    for e in data.edges() {
        if e.weight == 1.0 {
            let _ = writeln!(out, "{}|{}", team(&e.winners), team(&e.losers));
        } else {
            let _ = writeln!(out, "{}|{}|{}", team(&e.winners), team(&e.losers), e.weight);
        }
    }
    out
}

/// Drops every game involving a player who appears in fewer than
/// `min_games` games (single pass), then re-indexes the survivors.
pub fn filter_min_games(
    reg: &PlayerRegistry,
    data: &GameDataset,
    min_games: usize,
) -> Result<(PlayerRegistry, GameDataset)> {
    let mut count = vec![0usize; data.n()];
    for e in data.edges() {
        let mut seen: Vec<usize> = e.winners.iter().chain(e.losers.iter()).copied().collect();
        seen.sort_unstable();
        seen.dedup();
        for p in seen {
            count[p] += 1;
        }
    }
    let keep = |p: usize| count[p] >= min_games;
    let mut new_reg = PlayerRegistry::new();
    let mut kept = Vec::new();
    for e in data.edges() {
        if e.winners.iter().chain(e.losers.iter()).all(|&p| keep(p)) {
            let mut remap = |t: &Team| -> Vec<usize> {
                t.iter()
                    .map(|&p| new_reg.intern(reg.label(p).unwrap_or_default()))
                    .collect()
            };
            let w = remap(&e.winners);
            let l = remap(&e.losers);
            kept.push((w, l, e.weight));
        }
    }
    if new_reg.is_empty() {
        return Err(Error::Degenerate(format!(
            "no games left after requiring {min_games} games per player"
        )));
    }
    let mut out = GameDataset::new(new_reg.len(), data.overlap_allowed())?;
    for (w, l, weight) in kept {
        out.add_game(&w, &l, weight)?;
    }
    Ok((new_reg, out))
}

/// Per-player record of a result file.
#[derive(Debug, Clone, PartialEq)]
pub struct PlayerRecord {
    pub label: String,
    pub pi: f64,
    pub s: f64,
    pub games_won_weight: f64,
    pub games_total_weight: f64,
}

/// Fit output: `key=value` header records, then a CSV block with one row per
/// player in registry order.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultFile {
    pub model: String,
    pub rule: String,
    pub sweeps: usize,
    pub converged: bool,
    pub final_delta: f64,
    pub log_likelihood: f64,
    pub players: Vec<PlayerRecord>,
}

pub const RESULT_PLAYER_HEADER: &str = "label,pi,s,games_won_weight,games_total_weight";

impl ResultFile {
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "model={}", self.model);
        let _ = writeln!(out, "rule={}", self.rule);
        let _ = writeln!(out, "sweeps={}", self.sweeps);
        let _ = writeln!(out, "converged={}", self.converged);
        let _ = writeln!(out, "final_delta={}", self.final_delta);
        let _ = writeln!(out, "log_likelihood={}", self.log_likelihood);
        let _ = writeln!(out, "{RESULT_PLAYER_HEADER}");
        for p in &self.players {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                p.label, p.pi, p.s, p.games_won_weight, p.games_total_weight
            );
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let mut header = std::collections::HashMap::new();
        for (i, line) in lines.by_ref() {
            if line == RESULT_PLAYER_HEADER {
                break;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| parse_err(i + 1, "expected key=value header record"))?;
            header.insert(k.to_owned(), v.to_owned());
        }
        let get = |k: &str| {
            header
                .get(k)
                .cloned()
                .ok_or_else(|| parse_err(0, format!("missing header record `{k}`")))
        };
        let num = |k: &str| -> Result<f64> {
            get(k)?
                .parse()
                .map_err(|_| parse_err(0, format!("bad number in `{k}`")))
        };
        let mut players = Vec::new();
        for (i, line) in lines {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 5 {
                return Err(parse_err(i + 1, "expected 5 fields"));
            }
            let n = |s: &str| {
                s.parse::<f64>()
                    .map_err(|_| parse_err(i + 1, format!("bad number `{s}`")))
            };
            players.push(PlayerRecord {
                label: f[0].to_owned(),
                pi: n(f[1])?,
                s: n(f[2])?,
                games_won_weight: n(f[3])?,
                games_total_weight: n(f[4])?,
            });
        }
        Ok(ResultFile {
            model: get("model")?,
            rule: get("rule")?,
            sweeps: get("sweeps")?.parse().map_err(|_| parse_err(0, "bad sweeps"))?,
            converged: get("converged")? == "true",
            final_delta: num("final_delta")?,
            log_likelihood: num("log_likelihood")?,
            players,
        })
    }
}

pub const TRUTH_HEADER: &str = "player,true_s";

/// Truth sidecar: one `label,true_s` row per player, in index order.
pub fn write_truth(labels: &[String], strengths: &[f64]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{TRUTH_HEADER}");
    for (l, s) in labels.iter().zip(strengths) {
        let _ = writeln!(out, "{l},{s}");
    }
    out
}

pub fn parse_truth(text: &str) -> Result<Vec<(String, f64)>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 && line == TRUTH_HEADER || line.trim().is_empty() {
            continue;
        }
        let (l, s) = line
            .split_once(',')
            .ok_or_else(|| parse_err(i + 1, "expected `label,true_s`"))?;
        let s: f64 = s
            .trim()
            .parse()
            .map_err(|_| parse_err(i + 1, format!("bad number `{s}`")))?;
        out.push((l.trim().to_owned(), s));
    }
    Ok(out)
}

/// Labels used for synthetic players: `p0`, `p1`, ...
pub fn synthetic_labels(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("p{i}")).collect()
}
