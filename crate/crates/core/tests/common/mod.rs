// Shared random-instance builders for the integration tests.
#![allow(dead_code)]

use hyperbt::inference::check_degeneracy;
use hyperbt::{GameDataset, ModelKind, Strengths, WinMatrix};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random game over `n` players with team sizes in `1..=max_team`, weight
/// an integer in `1..=max_weight`. With `overlap`, the two teams share one
/// player while keeping both set differences non-empty.
pub fn random_game<R: Rng>(
    rng: &mut R,
    n: usize,
    max_team: usize,
    max_weight: u32,
    overlap: bool,
) -> (Vec<usize>, Vec<usize>, f64) {
    let mut players: Vec<usize> = (0..n).collect();
    players.shuffle(rng);
    let shared = usize::from(overlap);
    let budget = n - shared;
    let a = rng.random_range(1..=max_team.min(budget - 1));
    let b = rng.random_range(1..=max_team.min(budget - a));
    let mut winners = players[..a].to_vec();
    let mut losers = players[a..a + b].to_vec();
    if overlap {
        let s = players[a + b];
        winners.push(s);
        losers.push(s);
    }
    let w = f64::from(rng.random_range(1..=max_weight));
    (winners, losers, w)
}

pub fn random_dataset<R: Rng>(
    rng: &mut R,
    n: usize,
    m: usize,
    max_team: usize,
    max_weight: u32,
    overlap_prob: f64,
) -> GameDataset {
    let mut d = GameDataset::new(n, overlap_prob > 0.0).unwrap();
    for _ in 0..m {
        let overlap = n >= 3 && rng.random::<f64>() < overlap_prob;
        let (w, l, wt) = random_game(rng, n, max_team, max_weight, overlap);
        d.add_game(&w, &l, wt).unwrap();
    }
    d
}

/// Retries `random_dataset` until no player lacks a win or a loss (and, for
/// `Bt`, the comparison graph is strongly connected).
pub fn nondegenerate_dataset<R: Rng>(
    rng: &mut R,
    model: ModelKind,
    n: usize,
    m: usize,
    max_team: usize,
    max_weight: u32,
    overlap_prob: f64,
) -> GameDataset {
    loop {
        let d = random_dataset(rng, n, m, max_team, max_weight, overlap_prob);
        let rep = check_degeneracy(&d, model);
        if !rep.has_hard_flags() && !rep.is_fatal() {
            return d;
        }
    }
}

/// Random win matrix with a full round-robin in both directions, so it is
/// always strongly connected.
pub fn random_matrix<R: Rng>(rng: &mut R, n: usize) -> WinMatrix {
    let mut w = WinMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            if i != j {
                w.add(i, j, f64::from(rng.random_range(1..=5u32)));
            }
        }
    }
    w
}

pub fn random_strengths<R: Rng>(rng: &mut R, n: usize, spread: f64) -> Strengths {
    let s: Vec<f64> = (0..n).map(|_| rng.random_range(-spread..spread)).collect();
    Strengths::from_log(&s).unwrap()
}

/// Log-strengths drawn from the standard normal.
pub fn gaussian_strengths<R: Rng>(rng: &mut R, n: usize) -> Strengths {
    let s: Vec<f64> = (0..n).map(|_| rng.sample(rand_distr::StandardNormal)).collect();
    Strengths::from_log(&s).unwrap()
}

pub fn centered(s: &[f64]) -> Vec<f64> {
    let mean = s.iter().sum::<f64>() / s.len() as f64;
    s.iter().map(|x| x - mean).collect()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Reference log-likelihood written directly from the model definitions,
/// independent of the library's evaluation path.
pub fn reference_loglik(data: &GameDataset, log_s: &[f64], model: ModelKind) -> f64 {
    let strength = |team: &[usize]| -> f64 {
        match model {
            ModelKind::Gbt => team.iter().map(|&i| log_s[i].exp()).sum::<f64>().ln(),
            _ => team.iter().map(|&i| log_s[i]).sum(),
        }
    };
    data.edges()
        .iter()
        .map(|e| {
            let x = strength(&e.winners) - strength(&e.losers);
            // log(1 / (1 + e^-x)) computed without overflow
            -(if x > 0.0 {
                (-x).exp().ln_1p()
            } else {
                -x + x.exp().ln_1p()
            }) * e.weight
        })
        .sum()
}
