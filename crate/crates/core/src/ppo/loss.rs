//! The clipped-surrogate objective with exact analytic gradients.
//!
//! Minimized total: `-L_clip + value_coef * L_value - entropy_coef * L_entropy`,
//! where `L_clip = mean(min(r * A, clip(r, 1 - eps, 1 + eps) * A))` over
//! probability ratios against the rollout policy, `L_value` is the mean
//! squared error of the critic against the value targets, and `L_entropy`
//! is the mean policy entropy. Gradients flow through the Beta log-density
//! and entropy in closed form and through the MLPs by backprop; the test
//! suite pins them against central finite differences.

use super::net::PolicyNet;
use super::special::{beta_entropy, beta_entropy_grad, beta_log_pdf, beta_log_pdf_grad, sigmoid};
use super::PpoConfig;

/// One update slice, borrowing from the rollout buffers.
#[derive(Debug, Clone, Copy)]
pub struct MiniBatch<'a> {
    pub observations: &'a [[f64; 2]],
    pub actions: &'a [[f64; 2]],
    pub old_log_probs: &'a [f64],
    pub advantages: &'a [f64],
    pub value_targets: &'a [f64],
}

impl MiniBatch<'_> {
    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }
}

/// Loss pieces; `total` is the minimized scalar.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossTerms {
    pub total: f64,
    pub clip: f64,
    pub value: f64,
    pub entropy: f64,
}

impl LossTerms {
    pub fn is_finite(&self) -> bool {
        self.total.is_finite()
            && self.clip.is_finite()
            && self.value.is_finite()
            && self.entropy.is_finite()
    }
}

/// Loss only; used by the finite-difference oracle.
pub fn ppo_loss(net: &PolicyNet, batch: &MiniBatch, cfg: &PpoConfig) -> LossTerms {
    evaluate(net, batch, cfg, None)
}

/// Loss and the gradient of `total` with respect to the flat parameter
/// vector (actor first, critic after).
pub fn ppo_loss_and_grad(
    net: &PolicyNet,
    batch: &MiniBatch,
    cfg: &PpoConfig,
) -> (LossTerms, Vec<f64>) {
    let mut grad = vec![0.0; net.param_count()];
    let terms = evaluate(net, batch, cfg, Some(&mut grad));
    (terms, grad)
}

fn evaluate(
    net: &PolicyNet,
    batch: &MiniBatch,
    cfg: &PpoConfig,
    mut grad: Option<&mut Vec<f64>>,
) -> LossTerms {
    assert!(!batch.is_empty(), "empty minibatch");
    let n = batch.len() as f64;
    let inv_n = 1.0 / n;
    let eps = cfg.clip_epsilon;
    let actor_params = net.actor.param_count();

    let mut clip_sum = 0.0;
    let mut value_sum = 0.0;
    let mut entropy_sum = 0.0;

    for i in 0..batch.len() {
        let obs = batch.observations[i];
        let action = batch.actions[i];
        let adv = batch.advantages[i];

        let actor_cache = net.actor.forward_cached(&obs);
        let out = actor_cache.output();
        let params = PolicyNet::beta_params(out);

        let mut log_prob = 0.0;
        let mut entropy = 0.0;
        for (d, &(alpha, beta)) in params.iter().enumerate() {
            let x = action[d].clamp(1e-12, 1.0 - 1e-12);
            log_prob += beta_log_pdf(x, alpha, beta);
            entropy += beta_entropy(alpha, beta);
        }
        let ratio = (log_prob - batch.old_log_probs[i]).exp();
        let clipped_ratio = ratio.clamp(1.0 - eps, 1.0 + eps);
        let unclipped = ratio * adv;
        let clipped = clipped_ratio * adv;
        let surrogate = unclipped.min(clipped);
        clip_sum += surrogate;
        entropy_sum += entropy;

        let critic_cache = net.critic.forward_cached(&obs);
        let value = critic_cache.output()[0];
        let err = value - batch.value_targets[i];
        value_sum += err * err;

        if let Some(grad) = grad.as_deref_mut() {
            // d total / d log_prob, through the active min branch. The
            // ratio path contributes only where the surrogate follows it.
            let d_surr_d_ratio = if unclipped <= clipped {
                adv
            } else if (1.0 - eps..=1.0 + eps).contains(&ratio) {
                adv
            } else {
                0.0
            };
            let d_total_d_logp = -inv_n * d_surr_d_ratio * ratio;
            let d_total_d_entropy = -cfg.entropy_coef * inv_n;

            let mut d_out = [0.0; 4];
            for (d, &(alpha, beta)) in params.iter().enumerate() {
                let x = action[d].clamp(1e-12, 1.0 - 1e-12);
                let (dlp_da, dlp_db) = beta_log_pdf_grad(x, alpha, beta);
                let (dh_da, dh_db) = beta_entropy_grad(alpha, beta);
                let da_dout = sigmoid(out[2 * d]);
                let db_dout = sigmoid(out[2 * d + 1]);
                d_out[2 * d] = (d_total_d_logp * dlp_da + d_total_d_entropy * dh_da) * da_dout;
                d_out[2 * d + 1] =
                    (d_total_d_logp * dlp_db + d_total_d_entropy * dh_db) * db_dout;
            }
            net.actor.backward(&actor_cache, &d_out, &mut grad[..actor_params]);

            let d_value = cfg.value_coef * 2.0 * err * inv_n;
            net.critic.backward(&critic_cache, &[d_value], &mut grad[actor_params..]);
        }
    }

    let clip = clip_sum * inv_n;
    let value = value_sum * inv_n;
    let entropy = entropy_sum * inv_n;
    LossTerms {
        total: -clip + cfg.value_coef * value - cfg.entropy_coef * entropy,
        clip,
        value,
        entropy,
    }
}
