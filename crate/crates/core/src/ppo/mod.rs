//! Proximal policy optimization for the two-queue observation and the
//! two-fraction continuous action, built from scratch: Beta policy heads,
//! generalized advantage estimation, the clipped surrogate with value loss
//! and entropy bonus, and Adam. Everything runs at double precision and is
//! bit-reproducible from a master seed.

pub mod gae;
pub mod loss;
pub mod net;
pub mod special;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{episode_seed, RngHub, StreamKind};
use gae::{compute_gae, normalize, Trajectory};
use loss::{ppo_loss_and_grad, MiniBatch};
use net::{Adam, PolicyNet};
use rand::seq::SliceRandom;

#[derive(Debug, Error)]
pub enum PpoError {
    #[error("invalid ppo configuration: {0}")]
    InvalidConfig(String),
    #[error("training diverged: non-finite loss at update {update}, minibatch {minibatch}")]
    NonFiniteLoss { update: usize, minibatch: usize },
    #[error("training diverged: non-finite parameters after update {update}")]
    NonFiniteParams { update: usize },
    #[error("checkpoint rejected: {0}")]
    Checkpoint(String),
}

/// Hyperparameters. Defaults are conventional PPO settings; the training
/// budget is deliberately modest since the task is two-dimensional.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PpoConfig {
    pub clip_epsilon: f64,
    pub value_coef: f64,
    pub entropy_coef: f64,
    pub gae_lambda: f64,
    pub gamma: f64,
    pub learning_rate: f64,
    pub epochs_per_update: usize,
    pub minibatch_size: usize,
    pub rollout_length: usize,
    pub total_steps: usize,
    pub hidden_dim: usize,
    /// Queue-length cap used to normalize observations fed to the nets.
    pub obs_norm_cap: f64,
    pub normalize_advantages: bool,
    /// Deterministic-policy evaluation cadence, in updates (0 disables).
    pub eval_interval_updates: usize,
    pub eval_episodes: usize,
}

impl Default for PpoConfig {
    fn default() -> Self {
        Self {
            clip_epsilon: 0.2,
            value_coef: 0.5,
            entropy_coef: 0.01,
            gae_lambda: 0.95,
            gamma: 0.99,
            learning_rate: 3e-4,
            epochs_per_update: 10,
            minibatch_size: 64,
            rollout_length: 2048,
            total_steps: 200_000,
            hidden_dim: 64,
            obs_norm_cap: 200.0,
            normalize_advantages: true,
            eval_interval_updates: 5,
            eval_episodes: 3,
        }
    }
}

impl PpoConfig {
    pub fn validate(&self) -> Result<(), PpoError> {
        let fail = |m: String| Err(PpoError::InvalidConfig(m));
        if !(self.clip_epsilon > 0.0 && self.clip_epsilon < 1.0) {
            return fail(format!("clip_epsilon must be in (0, 1), got {}", self.clip_epsilon));
        }
        if self.value_coef < 0.0 || self.entropy_coef < 0.0 {
            return fail("loss coefficients must be nonnegative".into());
        }
        if !(0.0..=1.0).contains(&self.gae_lambda) {
            return fail(format!("gae_lambda must be in [0, 1], got {}", self.gae_lambda));
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return fail(format!("gamma must be in [0, 1], got {}", self.gamma));
        }
        if self.learning_rate <= 0.0 {
            return fail("learning_rate must be positive".into());
        }
        if self.epochs_per_update == 0
            || self.minibatch_size == 0
            || self.rollout_length == 0
            || self.hidden_dim == 0
        {
            return fail("epochs, minibatch, rollout, and hidden sizes must be positive".into());
        }
        if self.obs_norm_cap <= 0.0 {
            return fail("obs_norm_cap must be positive".into());
        }
        Ok(())
    }
}

/// What the trainer needs from an environment: episodic reset/step over the
/// normalized two-component observation.
pub trait RolloutEnv {
    fn reset(&mut self, seed: u64) -> [f64; 2];
    /// Returns `(next_observation, reward, done)`.
    fn step(&mut self, action: [f64; 2]) -> ([f64; 2], f64, bool);
    /// Domain metrics for the episode just finished, when the environment
    /// tracks any.
    fn episode_metrics(&self) -> Option<EvalMetrics> {
        None
    }
}

/// Domain-level evaluation numbers reported alongside returns.
#[derive(Debug, Clone, Copy, Default)]
pub struct EvalMetrics {
    pub mean_aosi: Option<f64>,
    pub mean_aori: Option<f64>,
    pub served_mbit: f64,
    pub served_fraction: f64,
}

/// Deterministic-policy evaluation snapshot.
#[derive(Debug, Clone, Copy)]
pub struct EvalSnapshot {
    pub mean_return: f64,
    pub mean_aosi: Option<f64>,
    pub mean_aori: Option<f64>,
    pub served_mbit: f64,
    pub served_fraction: f64,
}

/// One row of the training log.
#[derive(Debug, Clone)]
pub struct TrainRecord {
    pub update: usize,
    pub env_steps: usize,
    /// Mean return of episodes finished during this update's rollout.
    pub mean_return: Option<f64>,
    pub clip_loss: f64,
    pub value_loss: f64,
    pub entropy: f64,
    pub eval: Option<EvalSnapshot>,
}

/// Training result: the final policy and the per-update log.
#[derive(Debug)]
pub struct TrainOutput {
    pub net: PolicyNet,
    pub log: Vec<TrainRecord>,
    pub env_steps: usize,
}

/// Run PPO against `env` for `config.total_steps` environment steps.
/// Episode seeds, network initialization, action sampling, and minibatch
/// shuffling all derive from `master_seed`, so repeated runs are identical.
pub fn train<E: RolloutEnv>(
    env: &mut E,
    config: &PpoConfig,
    master_seed: u64,
) -> Result<TrainOutput, PpoError> {
    config.validate()?;
    let hub = RngHub::new(master_seed);
    let mut rng_init = hub.stream(StreamKind::PolicyInit);
    let mut rng_sample = hub.stream(StreamKind::PolicySampling);
    let mut net = PolicyNet::new(config.hidden_dim, &mut rng_init);
    let mut adam = Adam::new(config.learning_rate, net.param_count());
    let mut log = Vec::new();

    let mut steps_done = 0usize;
    let mut update = 0usize;
    let mut episode_counter = 0u64;
    let mut current_obs: Option<[f64; 2]> = None;
    let mut episode_return = 0.0;
    let mut traj = Trajectory::default();

    while steps_done < config.total_steps {
        update += 1;
        traj.clear();
        let mut finished_returns: Vec<f64> = Vec::new();
        let mut obs = match current_obs {
            Some(o) => o,
            None => {
                episode_return = 0.0;
                let seed = episode_seed(master_seed, episode_counter);
                episode_counter += 1;
                env.reset(seed)
            }
        };
        let rollout = config.rollout_length.min(config.total_steps - steps_done);
        for _ in 0..rollout {
            let (action, log_prob, value) = net.sample_action(obs, &mut rng_sample);
            let (next_obs, reward, done) = env.step(action);
            traj.push(obs, action, log_prob, reward, value, done);
            episode_return += reward;
            if done {
                finished_returns.push(episode_return);
                episode_return = 0.0;
                let seed = episode_seed(master_seed, episode_counter);
                episode_counter += 1;
                obs = env.reset(seed);
            } else {
                obs = next_obs;
            }
        }
        steps_done += rollout;
        current_obs = Some(obs);
        traj.bootstrap_value = if *traj.dones.last().expect("rollout nonempty") {
            0.0
        } else {
            net.forward(obs).1
        };

        let (mut advantages, targets) = compute_gae(&traj, config.gamma, config.gae_lambda);
        if config.normalize_advantages {
            normalize(&mut advantages);
        }

        let mut params = net.flat_params();
        let mut indices: Vec<usize> = (0..traj.len()).collect();
        let mut clip_acc = 0.0;
        let mut value_acc = 0.0;
        let mut entropy_acc = 0.0;
        let mut minibatches = 0usize;
        for _ in 0..config.epochs_per_update {
            indices.shuffle(&mut rng_sample);
            for chunk in indices.chunks(config.minibatch_size) {
                let obs_mb: Vec<[f64; 2]> = chunk.iter().map(|&i| traj.observations[i]).collect();
                let act_mb: Vec<[f64; 2]> = chunk.iter().map(|&i| traj.actions[i]).collect();
                let old_mb: Vec<f64> = chunk.iter().map(|&i| traj.log_probs[i]).collect();
                let adv_mb: Vec<f64> = chunk.iter().map(|&i| advantages[i]).collect();
                let tgt_mb: Vec<f64> = chunk.iter().map(|&i| targets[i]).collect();
                let batch = MiniBatch {
                    observations: &obs_mb,
                    actions: &act_mb,
                    old_log_probs: &old_mb,
                    advantages: &adv_mb,
                    value_targets: &tgt_mb,
                };
                let (terms, grad) = ppo_loss_and_grad(&net, &batch, config);
                if !terms.is_finite() {
                    return Err(PpoError::NonFiniteLoss { update, minibatch: minibatches });
                }
                adam.step(&mut params, &grad);
                net.set_flat_params(&params);
                clip_acc += terms.clip;
                value_acc += terms.value;
                entropy_acc += terms.entropy;
                minibatches += 1;
            }
        }
        if !net.params_finite() {
            return Err(PpoError::NonFiniteParams { update });
        }

        let mean_return = if finished_returns.is_empty() {
            None
        } else {
            Some(finished_returns.iter().sum::<f64>() / finished_returns.len() as f64)
        };
        let eval = if config.eval_interval_updates > 0
            && update % config.eval_interval_updates == 0
            && config.eval_episodes > 0
        {
            let snap = evaluate(env, &net, config.eval_episodes, master_seed);
            // The evaluation consumed the environment; restart collection.
            current_obs = None;
            Some(snap)
        } else {
            None
        };
        log.push(TrainRecord {
            update,
            env_steps: steps_done,
            mean_return,
            clip_loss: clip_acc / minibatches as f64,
            value_loss: value_acc / minibatches as f64,
            entropy: entropy_acc / minibatches as f64,
            eval,
        });
    }

    Ok(TrainOutput { net, log, env_steps: steps_done })
}

/// Run full episodes under the distribution-mean action and average the
/// returns and domain metrics. Seeds come from a reserved schedule so
/// evaluations never collide with training episodes.
pub fn evaluate<E: RolloutEnv>(
    env: &mut E,
    net: &PolicyNet,
    episodes: usize,
    master_seed: u64,
) -> EvalSnapshot {
    let eval_base = master_seed ^ 0x5eed_0f0f_1234_abcd;
    let mut returns = 0.0;
    let mut aosi_acc = Vec::new();
    let mut aori_acc = Vec::new();
    let mut served_mbit = 0.0;
    let mut served_fraction = 0.0;
    for ep in 0..episodes {
        let mut obs = env.reset(episode_seed(eval_base, ep as u64));
        let mut ep_return = 0.0;
        loop {
            let action = net.mean_action(obs);
            let (next_obs, reward, done) = env.step(action);
            ep_return += reward;
            obs = next_obs;
            if done {
                break;
            }
        }
        returns += ep_return;
        if let Some(m) = env.episode_metrics() {
            if let Some(v) = m.mean_aosi {
                aosi_acc.push(v);
            }
            if let Some(v) = m.mean_aori {
                aori_acc.push(v);
            }
            served_mbit += m.served_mbit;
            served_fraction += m.served_fraction;
        }
    }
    let n = episodes as f64;
    let avg = |v: &[f64]| {
        if v.is_empty() {
            None
        } else {
            Some(v.iter().sum::<f64>() / v.len() as f64)
        }
    };
    EvalSnapshot {
        mean_return: returns / n,
        mean_aosi: avg(&aosi_acc),
        mean_aori: avg(&aori_acc),
        served_mbit: served_mbit / n,
        served_fraction: served_fraction / n,
    }
}

/// Versioned checkpoint: hyperparameters plus the flat parameter vector.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Checkpoint {
    pub version: u32,
    pub config: PpoConfig,
    pub params: Vec<f64>,
}

pub const CHECKPOINT_VERSION: u32 = 1;

impl Checkpoint {
    pub fn from_net(net: &PolicyNet, config: &PpoConfig) -> Self {
        Self { version: CHECKPOINT_VERSION, config: config.clone(), params: net.flat_params() }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("checkpoint serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, PpoError> {
        let ck: Checkpoint =
            serde_json::from_str(text).map_err(|e| PpoError::Checkpoint(e.to_string()))?;
        if ck.version != CHECKPOINT_VERSION {
            return Err(PpoError::Checkpoint(format!(
                "unsupported checkpoint version {} (expected {})",
                ck.version, CHECKPOINT_VERSION
            )));
        }
        Ok(ck)
    }

    /// Rebuild the policy this checkpoint captured.
    pub fn restore(&self) -> Result<PolicyNet, PpoError> {
        use rand::SeedableRng;
        let mut scratch = rand_chacha::ChaCha8Rng::seed_from_u64(0);
        let mut net = PolicyNet::new(self.config.hidden_dim, &mut scratch);
        if self.params.len() != net.param_count() {
            return Err(PpoError::Checkpoint(format!(
                "parameter count {} does not match hidden_dim {} (expected {})",
                self.params.len(),
                self.config.hidden_dim,
                net.param_count()
            )));
        }
        net.set_flat_params(&self.params);
        Ok(net)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Deterministic environment whose one-step reward peaks at a known
    /// split; observations carry no information.
    struct StylizedEnv {
        t: usize,
        horizon: usize,
    }

    impl StylizedEnv {
        fn new() -> Self {
            Self { t: 0, horizon: 64 }
        }

        fn reward(action: [f64; 2]) -> f64 {
            let d0 = action[0] - 0.7;
            let d1 = action[1] - 0.3;
            (-4.0 * (d0 * d0 + d1 * d1)).exp()
        }
    }

    impl RolloutEnv for StylizedEnv {
        fn reset(&mut self, _seed: u64) -> [f64; 2] {
            self.t = 0;
            [0.0, 0.0]
        }

        fn step(&mut self, action: [f64; 2]) -> ([f64; 2], f64, bool) {
            self.t += 1;
            ([0.0, 0.0], Self::reward(action), self.t >= self.horizon)
        }
    }

    fn quick_config() -> PpoConfig {
        PpoConfig {
            total_steps: 24_576,
            rollout_length: 1024,
            minibatch_size: 128,
            epochs_per_update: 10,
            hidden_dim: 16,
            gamma: 0.0,
            gae_lambda: 0.95,
            learning_rate: 7e-4,
            entropy_coef: 0.003,
            eval_interval_updates: 0,
            ..PpoConfig::default()
        }
    }

    #[test]
    fn zero_budget_returns_the_initialized_net() {
        let mut env = StylizedEnv::new();
        let cfg = PpoConfig { total_steps: 0, ..quick_config() };
        let out = train(&mut env, &cfg, 9).unwrap();
        use rand::SeedableRng;
        let hub = RngHub::new(9);
        let mut rng_init = hub.stream(StreamKind::PolicyInit);
        let fresh = PolicyNet::new(cfg.hidden_dim, &mut rng_init);
        let _ = rand_chacha::ChaCha8Rng::seed_from_u64(0);
        assert_eq!(out.net.flat_params(), fresh.flat_params());
        assert!(out.log.is_empty());
    }

    #[test]
    fn learns_the_known_optimal_split() {
        let mut env = StylizedEnv::new();
        let out = train(&mut env, &quick_config(), 12).unwrap();
        // Exhaustive fixed-split target over the 11x11 grid: the optimum
        // (0.7, 0.3) sits on the grid, returning horizon * 1.0.
        let mut best_grid = f64::NEG_INFINITY;
        for i in 0..=10 {
            for j in 0..=10 {
                let a = [i as f64 / 10.0, j as f64 / 10.0];
                let per_step = StylizedEnv::reward(a);
                best_grid = best_grid.max(64.0 * per_step);
            }
        }
        assert_eq!(best_grid, 64.0);
        let snap = evaluate(&mut env, &out.net, 3, 12);
        assert!(
            snap.mean_return >= 0.95 * best_grid,
            "evaluated return {} below 95% of grid target {best_grid}",
            snap.mean_return
        );
    }

    #[test]
    fn training_is_bit_reproducible() {
        let cfg = PpoConfig { total_steps: 4096, ..quick_config() };
        let mut env_a = StylizedEnv::new();
        let mut env_b = StylizedEnv::new();
        let a = train(&mut env_a, &cfg, 77).unwrap();
        let b = train(&mut env_b, &cfg, 77).unwrap();
        assert_eq!(a.net.flat_params(), b.net.flat_params());
    }

    #[test]
    fn ratio_identity_after_synchronizing_old_policy() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        let net = PolicyNet::new(16, &mut rng);
        for i in 0..200 {
            let obs = [(i % 17) as f64 / 17.0, (i % 13) as f64 / 13.0];
            let (action, logp, _) = net.sample_action(obs, &mut rng);
            let ratio = (net.log_prob(obs, action) - logp).exp();
            assert!((ratio - 1.0).abs() < 1e-12, "ratio {ratio}");
        }
    }

    #[test]
    fn checkpoint_round_trip() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let cfg = PpoConfig::default();
        let net = PolicyNet::new(cfg.hidden_dim, &mut rng);
        let ck = Checkpoint::from_net(&net, &cfg);
        let restored = Checkpoint::from_json(&ck.to_json()).unwrap().restore().unwrap();
        assert_eq!(restored.flat_params(), net.flat_params());
    }

    #[test]
    fn checkpoint_version_is_enforced() {
        let text = r#"{"version":999,"config":null,"params":[]}"#;
        assert!(Checkpoint::from_json(text).is_err());
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let cfg = PpoConfig::default();
        let net = PolicyNet::new(cfg.hidden_dim, &mut rng);
        let mut ck = Checkpoint::from_net(&net, &cfg);
        ck.version = 2;
        let err = Checkpoint::from_json(&ck.to_json()).unwrap_err();
        assert!(err.to_string().contains("version"));
    }

    #[test]
    fn invalid_config_is_rejected() {
        let cfg = PpoConfig { clip_epsilon: 1.5, ..PpoConfig::default() };
        assert!(cfg.validate().is_err());
        let cfg = PpoConfig { gae_lambda: -0.1, ..PpoConfig::default() };
        assert!(cfg.validate().is_err());
    }
}
