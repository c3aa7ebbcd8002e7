//! Static-split benchmark: evaluate every fixed (bandwidth, compute) split
//! over a shared seed schedule and summarize the trade-off cloud, plus the
//! Pareto frontier over any (maximize, minimize) objective pair.
//!
//! Episode seeds are shared across splits (common random numbers), which
//! sharpens split-versus-split comparisons.

use crate::config::{episode_seed, RewardParams, SimConfig, Step};
use crate::env::{run_episode, Action, EpisodeSummary, SimEnv};

/// Aggregates for one fixed split over a seed set. Means and standard
/// deviations are across per-episode means; episodes with no qualifying
/// completions are skipped by the corresponding statistic.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitResult {
    pub comm_split: f64,
    pub comp_split: f64,
    pub mean_aosi: Option<f64>,
    pub sd_aosi: Option<f64>,
    pub mean_aori: Option<f64>,
    pub sd_aori: Option<f64>,
    /// Mean per-episode Mbit over completed requests.
    pub served_mbit: f64,
    /// `served_mbit` as a share of the nominal offered traffic, in percent.
    pub served_pct: f64,
    pub episodes: usize,
}

fn across_episodes(values: &[f64]) -> (Option<f64>, Option<f64>) {
    if values.is_empty() {
        return (None, None);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let sd = if values.len() > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    (Some(mean), Some(sd))
}

/// Collapse per-episode summaries into a [`SplitResult`].
pub fn aggregate_split(comm_split: f64, comp_split: f64, episodes: &[EpisodeSummary]) -> SplitResult {
    let aosi: Vec<f64> = episodes.iter().filter_map(|e| e.mean_aosi).collect();
    let aori: Vec<f64> = episodes.iter().filter_map(|e| e.mean_aori).collect();
    let (mean_aosi, sd_aosi) = across_episodes(&aosi);
    let (mean_aori, sd_aori) = across_episodes(&aori);
    let n = episodes.len().max(1) as f64;
    let served_mbit = episodes.iter().map(|e| e.served_mbit).sum::<f64>() / n;
    let served_pct = episodes.iter().map(|e| e.served_fraction).sum::<f64>() / n * 100.0;
    SplitResult {
        comm_split,
        comp_split,
        mean_aosi,
        sd_aosi,
        mean_aori,
        sd_aori,
        served_mbit,
        served_pct,
        episodes: episodes.len(),
    }
}

/// Evaluate one fixed split over the shared seed schedule.
pub fn evaluate_split(
    config: &SimConfig,
    reward: &RewardParams,
    comm_split: f64,
    comp_split: f64,
    master_seed: u64,
    episodes: usize,
    horizon: Step,
) -> (SplitResult, Vec<EpisodeSummary>) {
    assert!(episodes > 0, "at least one episode");
    let mut cfg = config.clone();
    cfg.episode_length = horizon;
    let mut env = SimEnv::new(cfg, reward.clone());
    let action = Action::new(comm_split, comp_split);
    let summaries: Vec<EpisodeSummary> = (0..episodes as u64)
        .map(|i| run_episode(&mut env, episode_seed(master_seed, i), horizon, |_| action))
        .collect();
    (aggregate_split(comm_split, comp_split, &summaries), summaries)
}

/// Exhaustive evaluation of `grid × grid` fixed splits (communication split
/// outer, compute split inner), every split over the same seed schedule.
pub fn grid_search(
    config: &SimConfig,
    reward: &RewardParams,
    grid: &[f64],
    master_seed: u64,
    episodes: usize,
    horizon: Step,
) -> Vec<SplitResult> {
    assert!(grid.iter().all(|v| (0.0..=1.0).contains(v)), "grid values must be fractions");
    let mut results = Vec::with_capacity(grid.len() * grid.len());
    for &comm in grid {
        for &comp in grid {
            let (result, _) =
                evaluate_split(config, reward, comm, comp, master_seed, episodes, horizon);
            results.push(result);
        }
    }
    results
}

/// The conventional 11-point split grid `{0, 0.1, ..., 1}`.
pub fn default_grid() -> Vec<f64> {
    (0..=10).map(|i| i as f64 / 10.0).collect()
}

/// Indices of the Pareto-efficient points among `(maximize, minimize)`
/// pairs, in input order. A point is dropped iff some other point is at
/// least as good in both objectives and strictly better in one.
pub fn pareto_frontier(points: &[(f64, f64)]) -> Vec<usize> {
    let dominates = |a: (f64, f64), b: (f64, f64)| {
        a.0 >= b.0 && a.1 <= b.1 && (a.0 > b.0 || a.1 < b.1)
    };
    (0..points.len())
        .filter(|&i| !points.iter().enumerate().any(|(j, &p)| j != i && dominates(p, points[i])))
        .collect()
}
