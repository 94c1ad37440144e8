//! Strength inference for games between two teams of players.
//!
//! Games are directed hyperedges (winning team, losing team, weight). The
//! crate fits per-player strengths under three models: classical
//! Bradley-Terry on one-against-one games, the hypergraph model where a team's
//! strength is the product of its members' strengths, and the generalized
//! model where it is their sum. Each model has a sweep-based fixed-point
//! fitter; synthetic generation and evaluation helpers reproduce recovery and
//! timing experiments.

pub mod cli;
pub mod error;
pub mod evaluation;
pub mod formats;
pub mod inference;
pub mod model;
pub mod synthetic;

pub use error::{Error, Result};
pub use evaluation::{pairwise_projection, pearson, rank_by_strength, rank_by_win_rate, Method, Ranking};
pub use inference::{
    check_degeneracy, fit, fit_matrix, gbt_huang_sweep, gbt_newman_sweep, hbt_sweep, newman_sweep, normalize,
    zermelo_sweep, DegeneracyReport, FitConfig, FitResult, Normalization, UpdateRule,
};
pub use model::{
    bt_win_prob, gbt_win_prob, grad_log_likelihood, hbt_win_prob, log_likelihood, logistic, DirectedHyperedge,
    GameDataset, ModelKind, PlayerRegistry, Strengths, Team, WinMatrix,
};
