//! Command implementations. All file output is deterministic: fixed column
//! orders, fixed float formatting, no wall-clock anywhere.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};

use twinsim::aoi::throughput_summary;
use twinsim::baseline::{
    aggregate_split, default_grid, grid_search, pareto_frontier, SplitResult,
};
use twinsim::config::episode_seed;
use twinsim::env::{run_episode, Action, EpisodeSummary, SimEnv};
use twinsim::ppo::{self, Checkpoint, PpoConfig, TrainRecord};
use twinsim::{load_config, RewardParams, SimConfig};

use crate::manifest::{default_sweep, parse_sweep, Manifest, SweepPoint};
use crate::SharedArgs;

/// Validation failures exit 2, runtime failures exit 1.
#[derive(Debug)]
pub enum AppError {
    Validation(anyhow::Error),
    Runtime(anyhow::Error),
}

pub type AppResult<T> = Result<T, AppError>;

fn validation(e: impl Into<anyhow::Error>) -> AppError {
    AppError::Validation(e.into())
}

fn runtime(e: impl Into<anyhow::Error>) -> AppError {
    AppError::Runtime(e.into())
}

struct Setup {
    config: SimConfig,
    reward: RewardParams,
    master_seed: u64,
    out_dir: PathBuf,
}

fn load_setup(shared: &SharedArgs) -> AppResult<Setup> {
    let (config, reward) = match &shared.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| validation(anyhow!("cannot read config file `{path}`: {e}")))?;
            load_config(&text).map_err(validation)?
        }
        None => (SimConfig::default(), RewardParams::default()),
    };
    if shared.episodes == 0 {
        return Err(validation(anyhow!("--episodes must be at least 1")));
    }
    if shared.horizon == 0 {
        return Err(validation(anyhow!("--horizon must be at least 1")));
    }
    let out_dir = PathBuf::from(&shared.out);
    fs::create_dir_all(&out_dir)
        .with_context(|| format!("cannot create output directory `{}`", shared.out))
        .map_err(runtime)?;
    Ok(Setup {
        master_seed: shared.seed.unwrap_or(config.master_seed),
        config,
        reward,
        out_dir,
    })
}

fn write_out(path: &Path, contents: &str) -> AppResult<()> {
    fs::write(path, contents)
        .with_context(|| format!("cannot write `{}`", path.display()))
        .map_err(runtime)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_default()
}

fn episode_row(
    episode: usize,
    seed: u64,
    split: Option<(f64, f64)>,
    s: &EpisodeSummary,
) -> String {
    let (comm, comp) = match split {
        Some((c, p)) => (format!("{c:.6}"), format!("{p:.6}")),
        None => (String::new(), String::new()),
    };
    format!(
        "{episode},{seed},{comm},{comp},{:.6},{},{},{},{},{:.6},{:.6}\n",
        s.total_reward,
        s.completed_requests,
        s.flagged_requests,
        fmt_opt(s.mean_aori),
        fmt_opt(s.mean_aosi),
        s.served_mbit,
        s.served_fraction * 100.0,
    )
}

const EPISODE_HEADER: &str = "episode,seed,comm_split,comp_split,total_reward,completed_requests,\
flagged_requests,mean_aori,mean_aosi,served_mbit,served_pct\n";

fn parse_split(spec: &str) -> AppResult<(f64, f64)> {
    let (a, b) = spec
        .split_once(',')
        .ok_or_else(|| validation(anyhow!("--split must be of the form comm,comp")))?;
    let comm: f64 =
        a.trim().parse().map_err(|_| validation(anyhow!("bad comm fraction `{a}`")))?;
    let comp: f64 =
        b.trim().parse().map_err(|_| validation(anyhow!("bad comp fraction `{b}`")))?;
    for v in [comm, comp] {
        if !(0.0..=1.0).contains(&v) {
            return Err(validation(anyhow!("split fractions must be in [0, 1], got {v}")));
        }
    }
    Ok((comm, comp))
}

fn load_checkpoint(path: &str) -> AppResult<Checkpoint> {
    let text = fs::read_to_string(path)
        .map_err(|e| validation(anyhow!("cannot read checkpoint `{path}`: {e}")))?;
    Checkpoint::from_json(&text).map_err(validation)
}

pub fn simulate(
    shared: &SharedArgs,
    split: Option<&str>,
    checkpoint: Option<&str>,
    trace: bool,
) -> AppResult<()> {
    let setup = load_setup(shared)?;
    let (fixed, policy) = match (split, checkpoint) {
        (Some(s), None) => (Some(parse_split(s)?), None),
        (None, Some(c)) => {
            let ck = load_checkpoint(c)?;
            let net = ck.restore().map_err(validation)?;
            (None, Some((net, ck.config.obs_norm_cap)))
        }
        (None, None) => {
            return Err(validation(anyhow!("provide exactly one of --split or --checkpoint")))
        }
        (Some(_), Some(_)) => {
            return Err(validation(anyhow!("--split and --checkpoint are mutually exclusive")))
        }
    };

    let mut cfg = setup.config.clone();
    cfg.episode_length = shared.horizon;
    let mut env = SimEnv::new(cfg.clone(), setup.reward.clone());
    env.enable_trace(trace);

    let mut episodes_csv = String::from(EPISODE_HEADER);
    let mut steps_csv =
        String::from("episode,step,ue_queue,sensor_queue,reward,completed_this_step\n");
    let mut events_log = String::from("episode,step,unit,kind,source,source_id\n");
    let mut ledger_csv = String::new();

    for ep in 0..shared.episodes {
        let seed = episode_seed(setup.master_seed, ep as u64);
        let mut obs = env.reset(seed);
        let mut total_reward = 0.0;
        for _ in 0..shared.horizon {
            let action = match (&fixed, &policy) {
                (Some((c, p)), _) => Action::new(*c, *p),
                (None, Some((net, cap))) => {
                    let a = net.mean_action(obs.normalized(*cap));
                    Action::new(a[0], a[1])
                }
                (None, None) => unreachable!(),
            };
            let out = env.step(action).expect("within the episode");
            total_reward += out.reward;
            steps_csv.push_str(&format!(
                "{ep},{},{:.6},{:.6},{:.6},{}\n",
                out.info.step,
                out.observation.ue_queue,
                out.observation.sensor_queue,
                out.reward,
                out.info.completions.len(),
            ));
            obs = out.observation;
            if out.done {
                break;
            }
        }
        let summary = throughput_summary(
            env.ledger(),
            shared.horizon,
            cfg.num_ues,
            cfg.ue_request_prob,
            cfg.ue_comm_mean_mbit,
        );
        let ep_summary = EpisodeSummary {
            seed,
            total_reward,
            served_mbit: summary.served_mbit,
            served_fraction: summary.served_fraction,
            mean_aori: summary.aori.map(|(m, _)| m),
            mean_aosi: summary.aosi.map(|(m, _)| m),
            completed_requests: summary.completed_requests,
            flagged_requests: summary.flagged_requests,
            generated_request_mbit: env.generated_request_mbit(),
        };
        episodes_csv.push_str(&episode_row(ep, seed, fixed, &ep_summary));
        if trace {
            for ev in env.trace_events() {
                events_log.push_str(&format!("{ep},{}\n", ev.to_line()));
            }
            for line in env.ledger().export_lines().lines().skip(1) {
                ledger_csv.push_str(&format!("{ep},{line}\n"));
            }
        }
    }

    write_out(&setup.out_dir.join("episodes.csv"), &episodes_csv)?;
    write_out(&setup.out_dir.join("steps.csv"), &steps_csv)?;
    if trace {
        write_out(&setup.out_dir.join("events.log"), &events_log)?;
        let mut ledger_full = String::from(
            "episode,id,kind,source,gen,tx_start,bs_arrival,proc_start,completion,aori,aosi,\
reference_update_id,flagged\n",
        );
        ledger_full.push_str(&ledger_csv);
        write_out(&setup.out_dir.join("ledger.csv"), &ledger_full)?;
    }
    let mut extras = Vec::new();
    if let Some((c, p)) = fixed {
        extras.push(("comm_split".to_string(), format!("{c}")));
        extras.push(("comp_split".to_string(), format!("{p}")));
    }
    if let Some(c) = checkpoint {
        extras.push(("checkpoint".to_string(), format!("\"{c}\"")));
    }
    extras.push(("trace".to_string(), format!("{trace}")));
    let manifest = Manifest {
        command: "simulate",
        config_path: shared.config.clone(),
        master_seed: setup.master_seed,
        out_dir: shared.out.clone(),
        episodes: shared.episodes,
        horizon: shared.horizon,
        extras,
    };
    write_out(&setup.out_dir.join("run_manifest.toml"), &manifest.to_toml())
}

const GRID_HEADER: &str =
    "comm_split,comp_split,mean_aosi,sd_aosi,mean_aori,sd_aori,served_mbit,served_pct,episodes\n";

fn grid_row(r: &SplitResult) -> String {
    format!(
        "{:.6},{:.6},{},{},{},{},{:.6},{:.6},{}\n",
        r.comm_split,
        r.comp_split,
        fmt_opt(r.mean_aosi),
        fmt_opt(r.sd_aosi),
        fmt_opt(r.mean_aori),
        fmt_opt(r.sd_aori),
        r.served_mbit,
        r.served_pct,
        r.episodes,
    )
}

fn parse_grid(spec: &str) -> AppResult<Vec<f64>> {
    let mut grid = Vec::new();
    for part in spec.split(',') {
        let v: f64 = part
            .trim()
            .parse()
            .map_err(|_| validation(anyhow!("bad grid fraction `{}`", part.trim())))?;
        if !(0.0..=1.0).contains(&v) {
            return Err(validation(anyhow!("grid fractions must be in [0, 1], got {v}")));
        }
        grid.push(v);
    }
    if grid.is_empty() {
        return Err(validation(anyhow!("grid must contain at least one fraction")));
    }
    Ok(grid)
}

pub fn grid(shared: &SharedArgs, grid_spec: Option<&str>) -> AppResult<()> {
    let setup = load_setup(shared)?;
    let grid_values = match grid_spec {
        Some(s) => parse_grid(s)?,
        None => default_grid(),
    };
    let results = grid_search(
        &setup.config,
        &setup.reward,
        &grid_values,
        setup.master_seed,
        shared.episodes,
        shared.horizon,
    );
    let mut csv = String::from(GRID_HEADER);
    for r in &results {
        csv.push_str(&grid_row(r));
    }
    write_out(&setup.out_dir.join("grid.csv"), &csv)?;
    let manifest = Manifest {
        command: "grid",
        config_path: shared.config.clone(),
        master_seed: setup.master_seed,
        out_dir: shared.out.clone(),
        episodes: shared.episodes,
        horizon: shared.horizon,
        extras: vec![(
            "grid".to_string(),
            format!("\"{}\"", grid_values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")),
        )],
    };
    write_out(&setup.out_dir.join("run_manifest.toml"), &manifest.to_toml())
}

fn training_log_csv(log: &[TrainRecord]) -> String {
    let mut csv = String::from(
        "update,env_steps,mean_return,clip_loss,value_loss,entropy,eval_return,eval_aosi,\
eval_aori,eval_served_pct\n",
    );
    for r in log {
        let (er, easi, eari, esrv) = match &r.eval {
            Some(e) => (
                format!("{:.6}", e.mean_return),
                fmt_opt(e.mean_aosi),
                fmt_opt(e.mean_aori),
                format!("{:.6}", e.served_fraction * 100.0),
            ),
            None => Default::default(),
        };
        csv.push_str(&format!(
            "{},{},{},{:.6},{:.6},{:.6},{},{},{},{}\n",
            r.update,
            r.env_steps,
            fmt_opt(r.mean_return),
            r.clip_loss,
            r.value_loss,
            r.entropy,
            er,
            easi,
            eari,
            esrv,
        ));
    }
    csv
}

/// Train one policy for the given reward shaping; returns the checkpoint
/// and the log.
fn train_one(
    config: &SimConfig,
    reward_base: &RewardParams,
    eta: f64,
    penalty: f64,
    steps: usize,
    horizon: u64,
    train_seed: u64,
) -> Result<(Checkpoint, Vec<TrainRecord>), ppo::PpoError> {
    let mut reward = reward_base.clone();
    reward.sync_discount = eta;
    reward.delay_penalty = penalty;
    reward.validate().map_err(|e| ppo::PpoError::InvalidConfig(e.to_string()))?;
    let mut cfg = config.clone();
    cfg.episode_length = horizon;
    let ppo_cfg = PpoConfig { total_steps: steps, gamma: reward.gamma, ..PpoConfig::default() };
    let mut env = twinsim::env::SimEnvRollout::new(cfg, reward, ppo_cfg.obs_norm_cap);
    let out = ppo::train(&mut env, &ppo_cfg, train_seed)?;
    Ok((Checkpoint::from_net(&out.net, &ppo_cfg), out.log))
}

pub fn train(shared: &SharedArgs, eta: f64, penalty: f64, steps: usize) -> AppResult<()> {
    let setup = load_setup(shared)?;
    if !(eta > 0.0 && eta < 1.0) {
        return Err(validation(anyhow!("--eta must be in (0, 1), got {eta}")));
    }
    if penalty > 0.0 {
        return Err(validation(anyhow!("--penalty must be at most 0, got {penalty}")));
    }
    let (checkpoint, log) = train_one(
        &setup.config,
        &setup.reward,
        eta,
        penalty,
        steps,
        shared.horizon,
        setup.master_seed,
    )
    .map_err(runtime)?;
    write_out(&setup.out_dir.join("checkpoint.json"), &checkpoint.to_json())?;
    write_out(&setup.out_dir.join("training_log.csv"), &training_log_csv(&log))?;
    let manifest = Manifest {
        command: "train",
        config_path: shared.config.clone(),
        master_seed: setup.master_seed,
        out_dir: shared.out.clone(),
        episodes: shared.episodes,
        horizon: shared.horizon,
        extras: vec![
            ("eta".to_string(), format!("{eta}")),
            ("penalty".to_string(), format!("{penalty}")),
            ("steps".to_string(), format!("{steps}")),
        ],
    };
    write_out(&setup.out_dir.join("run_manifest.toml"), &manifest.to_toml())
}

/// Deterministic-policy episodes over the shared seed schedule.
fn eval_policy_episodes(
    config: &SimConfig,
    reward: &RewardParams,
    checkpoint: &Checkpoint,
    master_seed: u64,
    episodes: usize,
    horizon: u64,
) -> Result<Vec<EpisodeSummary>, ppo::PpoError> {
    let net = checkpoint.restore()?;
    let cap = checkpoint.config.obs_norm_cap;
    let mut cfg = config.clone();
    cfg.episode_length = horizon;
    let mut env = SimEnv::new(cfg, reward.clone());
    Ok((0..episodes as u64)
        .map(|i| {
            run_episode(&mut env, episode_seed(master_seed, i), horizon, |obs| {
                let a = net.mean_action(obs.normalized(cap));
                Action::new(a[0], a[1])
            })
        })
        .collect())
}

pub fn eval(shared: &SharedArgs, checkpoint_path: &str) -> AppResult<()> {
    let setup = load_setup(shared)?;
    let checkpoint = load_checkpoint(checkpoint_path)?;
    let summaries = eval_policy_episodes(
        &setup.config,
        &setup.reward,
        &checkpoint,
        setup.master_seed,
        shared.episodes,
        shared.horizon,
    )
    .map_err(runtime)?;
    let mut csv = String::from(EPISODE_HEADER);
    for (ep, s) in summaries.iter().enumerate() {
        csv.push_str(&episode_row(ep, s.seed, None, s));
    }
    write_out(&setup.out_dir.join("eval_episodes.csv"), &csv)?;
    let agg = aggregate_split(f64::NAN, f64::NAN, &summaries);
    let mut summary_csv = String::from(
        "episodes,mean_aosi,sd_aosi,mean_aori,sd_aori,served_mbit,served_pct\n",
    );
    summary_csv.push_str(&format!(
        "{},{},{},{},{},{:.6},{:.6}\n",
        agg.episodes,
        fmt_opt(agg.mean_aosi),
        fmt_opt(agg.sd_aosi),
        fmt_opt(agg.mean_aori),
        fmt_opt(agg.sd_aori),
        agg.served_mbit,
        agg.served_pct,
    ));
    write_out(&setup.out_dir.join("eval_summary.csv"), &summary_csv)?;
    let manifest = Manifest {
        command: "eval",
        config_path: shared.config.clone(),
        master_seed: setup.master_seed,
        out_dir: shared.out.clone(),
        episodes: shared.episodes,
        horizon: shared.horizon,
        extras: vec![("checkpoint".to_string(), format!("\"{checkpoint_path}\""))],
    };
    write_out(&setup.out_dir.join("run_manifest.toml"), &manifest.to_toml())
}

pub fn report(shared: &SharedArgs, sweep_spec: Option<&str>, steps: usize) -> AppResult<()> {
    let setup = load_setup(shared)?;
    let sweep: Vec<SweepPoint> = match sweep_spec {
        Some(s) => parse_sweep(s).map_err(|e| validation(anyhow!(e)))?,
        None => default_sweep(),
    };

    // Fixed-split benchmark, shared seed schedule.
    let grid_values = default_grid();
    let grid_results = grid_search(
        &setup.config,
        &setup.reward,
        &grid_values,
        setup.master_seed,
        shared.episodes,
        shared.horizon,
    );
    let mut grid_csv = String::from(GRID_HEADER);
    for r in &grid_results {
        grid_csv.push_str(&grid_row(r));
    }
    write_out(&setup.out_dir.join("grid.csv"), &grid_csv)?;

    // One policy per sweep point, evaluated over the same seeds.
    struct DrlPoint {
        point: SweepPoint,
        result: Option<SplitResult>,
    }
    let mut drl_points = Vec::with_capacity(sweep.len());
    for (i, point) in sweep.iter().enumerate() {
        let train_seed = episode_seed(setup.master_seed, 10_000 + i as u64);
        let trained = train_one(
            &setup.config,
            &setup.reward,
            point.eta,
            point.penalty,
            steps,
            shared.horizon,
            train_seed,
        );
        match trained {
            Ok((checkpoint, log)) => {
                write_out(
                    &setup.out_dir.join(format!("checkpoint_{}.json", point.label)),
                    &checkpoint.to_json(),
                )?;
                write_out(
                    &setup.out_dir.join(format!("training_log_{}.csv", point.label)),
                    &training_log_csv(&log),
                )?;
                let summaries = eval_policy_episodes(
                    &setup.config,
                    &setup.reward,
                    &checkpoint,
                    setup.master_seed,
                    shared.episodes,
                    shared.horizon,
                )
                .map_err(runtime)?;
                let agg = aggregate_split(f64::NAN, f64::NAN, &summaries);
                drl_points.push(DrlPoint { point: *point, result: Some(agg) });
            }
            Err(e) => {
                eprintln!("sweep point {} ({}:{}) failed: {e}", point.label, point.eta, point.penalty);
                drl_points.push(DrlPoint { point: *point, result: None });
            }
        }
    }

    let mut drl_csv = String::from(
        "label,eta,c2,mean_aosi,sd_aosi,mean_aori,sd_aori,served_mbit,served_pct\n",
    );
    for dp in &drl_points {
        match &dp.result {
            Some(r) => drl_csv.push_str(&format!(
                "{},{:.6},{:.6},{},{},{},{},{:.6},{:.6}\n",
                dp.point.label,
                dp.point.eta,
                dp.point.penalty,
                fmt_opt(r.mean_aosi),
                fmt_opt(r.sd_aosi),
                fmt_opt(r.mean_aori),
                fmt_opt(r.sd_aori),
                r.served_mbit,
                r.served_pct,
            )),
            None => drl_csv.push_str(&format!(
                "{},{:.6},{:.6},,,,,,\n",
                dp.point.label, dp.point.eta, dp.point.penalty,
            )),
        }
    }
    write_out(&setup.out_dir.join("drl_points.csv"), &drl_csv)?;

    // Pareto annotations over (served_mbit maximize, mean_aosi minimize),
    // grid points first, then the learned points.
    struct ParetoRow {
        kind: &'static str,
        label: String,
        served_mbit: f64,
        mean_aosi: f64,
    }
    let mut rows = Vec::new();
    for r in &grid_results {
        if let Some(aosi) = r.mean_aosi {
            rows.push(ParetoRow {
                kind: "grid",
                label: format!("{:.1}/{:.1}", r.comm_split, r.comp_split),
                served_mbit: r.served_mbit,
                mean_aosi: aosi,
            });
        }
    }
    for dp in &drl_points {
        if let Some(r) = &dp.result {
            if let Some(aosi) = r.mean_aosi {
                rows.push(ParetoRow {
                    kind: "drl",
                    label: dp.point.label.to_string(),
                    served_mbit: r.served_mbit,
                    mean_aosi: aosi,
                });
            }
        }
    }
    let points: Vec<(f64, f64)> = rows.iter().map(|r| (r.served_mbit, r.mean_aosi)).collect();
    let frontier = pareto_frontier(&points);
    let mut pareto_csv = String::from("kind,label,served_mbit,mean_aosi,on_frontier\n");
    for (i, row) in rows.iter().enumerate() {
        pareto_csv.push_str(&format!(
            "{},{},{:.6},{:.6},{}\n",
            row.kind,
            row.label,
            row.served_mbit,
            row.mean_aosi,
            frontier.contains(&i),
        ));
    }
    write_out(&setup.out_dir.join("pareto.csv"), &pareto_csv)?;

    // Side-by-side comparison of the reference splits and every learned
    // policy.
    let mut cmp_csv = String::from(
        "kind,label,eta,c2,comm_split,comp_split,mean_aosi,sd_aosi,mean_aori,sd_aori,served_pct\n",
    );
    for (c, p) in [(0.3, 0.3), (0.3, 0.4), (0.4, 0.4)] {
        if let Some(r) = grid_results
            .iter()
            .find(|r| (r.comm_split - c).abs() < 1e-9 && (r.comp_split - p).abs() < 1e-9)
        {
            cmp_csv.push_str(&format!(
                "fixed,({c:.1}:{p:.1}),,,{:.6},{:.6},{},{},{},{},{:.6}\n",
                r.comm_split,
                r.comp_split,
                fmt_opt(r.mean_aosi),
                fmt_opt(r.sd_aosi),
                fmt_opt(r.mean_aori),
                fmt_opt(r.sd_aori),
                r.served_pct,
            ));
        }
    }
    for dp in &drl_points {
        if let Some(r) = &dp.result {
            cmp_csv.push_str(&format!(
                "drl,{},{:.6},{:.6},,,{},{},{},{},{:.6}\n",
                dp.point.label,
                dp.point.eta,
                dp.point.penalty,
                fmt_opt(r.mean_aosi),
                fmt_opt(r.sd_aosi),
                fmt_opt(r.mean_aori),
                fmt_opt(r.sd_aori),
                r.served_pct,
            ));
        }
    }
    write_out(&setup.out_dir.join("comparison.csv"), &cmp_csv)?;

    let sweep_echo = sweep
        .iter()
        .map(|p| format!("{}:{}", p.eta, p.penalty))
        .collect::<Vec<_>>()
        .join(",");
    let manifest = Manifest {
        command: "report",
        config_path: shared.config.clone(),
        master_seed: setup.master_seed,
        out_dir: shared.out.clone(),
        episodes: shared.episodes,
        horizon: shared.horizon,
        extras: vec![
            ("steps".to_string(), format!("{steps}")),
            ("sweep".to_string(), format!("\"{sweep_echo}\"")),
        ],
    };
    write_out(&setup.out_dir.join("run_manifest.toml"), &manifest.to_toml())
}
