//! Generalized advantage estimation over collected rollouts.

/// Rollout storage: one entry per environment step, in collection order.
/// `dones[t]` marks the step that ended its episode; `bootstrap_value` is
/// the critic's estimate for the state after the final stored step (zero if
/// that step was terminal).
#[derive(Debug, Clone, Default)]
pub struct Trajectory {
    pub observations: Vec<[f64; 2]>,
    pub actions: Vec<[f64; 2]>,
    pub log_probs: Vec<f64>,
    pub rewards: Vec<f64>,
    pub values: Vec<f64>,
    pub dones: Vec<bool>,
    pub bootstrap_value: f64,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.rewards.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rewards.is_empty()
    }

    pub fn push(
        &mut self,
        obs: [f64; 2],
        action: [f64; 2],
        log_prob: f64,
        reward: f64,
        value: f64,
        done: bool,
    ) {
        self.observations.push(obs);
        self.actions.push(action);
        self.log_probs.push(log_prob);
        self.rewards.push(reward);
        self.values.push(value);
        self.dones.push(done);
    }

    pub fn clear(&mut self) {
        self.observations.clear();
        self.actions.clear();
        self.log_probs.clear();
        self.rewards.clear();
        self.values.clear();
        self.dones.clear();
        self.bootstrap_value = 0.0;
    }
}

/// Exponentially weighted advantages and value targets:
/// `A_t = sum_l (gamma*lambda)^l * delta_{t+l}` within each episode, with
/// `delta_t = r_t + gamma * V(s_{t+1}) * (1 - done_t) - V(s_t)`, and
/// `target_t = A_t + V(s_t)`.
pub fn compute_gae(traj: &Trajectory, gamma: f64, lambda: f64) -> (Vec<f64>, Vec<f64>) {
    let n = traj.len();
    let mut advantages = vec![0.0; n];
    let mut targets = vec![0.0; n];
    let mut carry = 0.0;
    for t in (0..n).rev() {
        let not_done = if traj.dones[t] { 0.0 } else { 1.0 };
        let next_value = if t + 1 < n { traj.values[t + 1] } else { traj.bootstrap_value };
        let delta = traj.rewards[t] + gamma * next_value * not_done - traj.values[t];
        carry = delta + gamma * lambda * not_done * carry;
        advantages[t] = carry;
        targets[t] = carry + traj.values[t];
    }
    (advantages, targets)
}

/// Normalize to zero mean and unit variance in place; identity for fewer
/// than two samples or a constant batch.
pub fn normalize(advantages: &mut [f64]) {
    if advantages.len() < 2 {
        return;
    }
    let n = advantages.len() as f64;
    let mean = advantages.iter().sum::<f64>() / n;
    let var = advantages.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / n;
    let sd = var.sqrt();
    if sd <= 1e-12 {
        return;
    }
    for a in advantages.iter_mut() {
        *a = (*a - mean) / sd;
    }
}
