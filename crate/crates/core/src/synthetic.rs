//! Seeded generation of ground-truth strengths and random team games.
//!
//! All randomness comes from one ChaCha8 stream per dataset, seeded with
//! `ChaCha8Rng::seed_from_u64(seed)`. Strengths are drawn first, then games.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::inference::check_degeneracy;
use crate::model::{logistic, DirectedHyperedge, GameDataset, ModelKind, Team};

pub type SyntheticRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SyntheticRng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticConfig {
    pub n: usize,
    pub m: usize,
    pub seed: u64,
    /// Probability of an even split of the pool; otherwise one against the rest.
    pub split_prob_2v2: f64,
    pub pool_per_game: usize,
}

impl SyntheticConfig {
    pub fn new(n: usize, m: usize, seed: u64) -> Self {
        Self {
            n,
            m,
            seed,
            split_prob_2v2: 0.9,
            pool_per_game: 4,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.pool_per_game < 2 {
            return Err(Error::Config("pool_per_game must be at least 2".into()));
        }
        if self.n < self.pool_per_game {
            return Err(Error::Config(format!(
                "need at least {} players, got {}",
                self.pool_per_game, self.n
            )));
        }
        if self.m == 0 {
            return Err(Error::Config("number of games must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.split_prob_2v2) {
            return Err(Error::Config(format!(
                "split probability must lie in [0, 1], got {}",
                self.split_prob_2v2
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticDataset {
    /// True log-strengths `s_i`.
    pub true_strengths: Vec<f64>,
    pub data: GameDataset,
    /// Seed that produced this dataset (differs from the config seed after
    /// regeneration).
    pub seed: u64,
}

/// `n` independent standard normal log-strengths.
pub fn sample_strengths<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

/// Draws `pool_per_game` distinct players uniformly without replacement,
/// splits them in draw order, and samples the winner from the hypergraph
/// model.
///
/// The even split is first half against second half; the uneven split puts
/// the first-drawn player alone against the rest.
pub fn sample_game<R: Rng + ?Sized>(
    strengths: &[f64],
    cfg: &SyntheticConfig,
    rng: &mut R,
) -> Result<DirectedHyperedge> {
    let n = strengths.len();
    let k = cfg.pool_per_game;
    if k < 2 || n < k {
        return Err(Error::Config(format!(
            "need at least {k} players to sample a game, got {n}"
        )));
    }
    let mut pool = Vec::with_capacity(k);
    while pool.len() < k {
        let p = rng.random_range(0..n);
        if !pool.contains(&p) {
            pool.push(p);
        }
    }
    let cut = if rng.random::<f64>() < cfg.split_prob_2v2 {
        k / 2
    } else {
        1
    };
    let (a, b) = pool.split_at(cut);
    let s_a: f64 = a.iter().map(|&i| strengths[i]).sum();
    let s_b: f64 = b.iter().map(|&i| strengths[i]).sum();
    let a_wins = rng.random::<f64>() < logistic(s_a - s_b);
    let (a, b) = (Team::new(a.iter().copied())?, Team::new(b.iter().copied())?);
    let (winners, losers) = if a_wins { (a, b) } else { (b, a) };
    DirectedHyperedge::new(winners, losers, 1.0)
}

pub fn generate_dataset(cfg: &SyntheticConfig) -> Result<SyntheticDataset> {
    cfg.validate()?;
    let mut rng = rng_from_seed(cfg.seed);
    let true_strengths = sample_strengths(cfg.n, &mut rng);
    let mut data = GameDataset::new(cfg.n, false)?;
    for _ in 0..cfg.m {
        data.push(sample_game(&true_strengths, cfg, &mut rng)?)?;
    }
    Ok(SyntheticDataset {
        true_strengths,
        data,
        seed: cfg.seed,
    })
}

/// Generates with `cfg.seed`, `cfg.seed + 1`, ... until `accept` holds for a
/// dataset. Returns the dataset and the number of rejected attempts.
pub fn generate_until(
    cfg: &SyntheticConfig,
    max_attempts: usize,
    accept: impl Fn(&GameDataset) -> bool,
) -> Result<(SyntheticDataset, usize)> {
    let mut attempt_cfg = cfg.clone();
    for attempt in 0..max_attempts.max(1) {
        attempt_cfg.seed = cfg.seed.wrapping_add(attempt as u64);
        let ds = generate_dataset(&attempt_cfg)?;
        if accept(&ds.data) {
            return Ok((ds, attempt));
        }
    }
    Err(Error::Degenerate(format!(
        "no non-degenerate dataset within {max_attempts} seeds starting at {}",
        cfg.seed
    )))
}

/// Regenerates with incremented seeds until every player has a win and a loss.
pub fn generate_nondegenerate(cfg: &SyntheticConfig, max_attempts: usize) -> Result<(SyntheticDataset, usize)> {
    generate_until(cfg, max_attempts, |d| {
        !check_degeneracy(d, ModelKind::Hbt).has_hard_flags()
    })
}
