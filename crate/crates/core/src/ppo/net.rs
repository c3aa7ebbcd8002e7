//! Actor-critic networks: plain double-precision MLPs with tanh hidden
//! layers, hand-rolled backprop, orthogonal initialization, and an Adam
//! optimizer. The actor parameterizes two Beta distributions through
//! `1 + softplus`, so sampled actions live exactly in the unit square.

use rand::RngExt;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution};

use super::special::{beta_log_pdf, softplus};

/// One dense layer; weights are row-major `[out][in]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Linear {
    pub in_dim: usize,
    pub out_dim: usize,
    pub w: Vec<f64>,
    pub b: Vec<f64>,
}

impl Linear {
    fn forward(&self, x: &[f64], out: &mut Vec<f64>) {
        out.clear();
        for i in 0..self.out_dim {
            let row = &self.w[i * self.in_dim..(i + 1) * self.in_dim];
            let mut acc = self.b[i];
            for (wj, xj) in row.iter().zip(x) {
                acc += wj * xj;
            }
            out.push(acc);
        }
    }

    fn param_count(&self) -> usize {
        self.w.len() + self.b.len()
    }
}

/// Random matrix with orthonormal rows (or columns, whichever fit), scaled
/// by `gain`.
fn orthogonal(out_dim: usize, in_dim: usize, gain: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let (nvec, dim, transpose) =
        if out_dim <= in_dim { (out_dim, in_dim, false) } else { (in_dim, out_dim, true) };
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(nvec);
    while basis.len() < nvec {
        let mut v: Vec<f64> = (0..dim).map(|_| standard_normal(rng)).collect();
        for u in &basis {
            let dot: f64 = v.iter().zip(u).map(|(a, b)| a * b).sum();
            for (vi, ui) in v.iter_mut().zip(u) {
                *vi -= dot * ui;
            }
        }
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm < 1e-8 {
            continue;
        }
        for vi in v.iter_mut() {
            *vi /= norm;
        }
        basis.push(v);
    }
    let mut w = vec![0.0; out_dim * in_dim];
    for i in 0..out_dim {
        for j in 0..in_dim {
            let v = if transpose { basis[j][i] } else { basis[i][j] };
            w[i * in_dim + j] = gain * v;
        }
    }
    w
}

fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller; only used at initialization.
    let u1: f64 = rng.random::<f64>().max(1e-12);
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Multi-layer perceptron with tanh hidden activations and a linear output.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    pub layers: Vec<Linear>,
}

/// Per-layer inputs and outputs kept from a forward pass for backprop.
/// `act[l]` is the input fed to layer `l`.
#[derive(Debug, Clone)]
pub struct MlpCache {
    act: Vec<Vec<f64>>,
    out: Vec<f64>,
}

impl MlpCache {
    pub fn output(&self) -> &[f64] {
        &self.out
    }
}

impl Mlp {
    /// `dims` lists layer widths input-first; `head_gain` scales the output
    /// layer (hidden layers use gain sqrt(2)), biases start at zero.
    pub fn new(dims: &[usize], head_gain: f64, rng: &mut ChaCha8Rng) -> Self {
        assert!(dims.len() >= 2);
        let mut layers = Vec::with_capacity(dims.len() - 1);
        for i in 0..dims.len() - 1 {
            let last = i == dims.len() - 2;
            let gain = if last { head_gain } else { std::f64::consts::SQRT_2 };
            layers.push(Linear {
                in_dim: dims[i],
                out_dim: dims[i + 1],
                w: orthogonal(dims[i + 1], dims[i], gain, rng),
                b: vec![0.0; dims[i + 1]],
            });
        }
        Self { layers }
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        self.forward_cached(x).out
    }

    pub fn forward_cached(&self, x: &[f64]) -> MlpCache {
        let n = self.layers.len();
        let mut act: Vec<Vec<f64>> = Vec::with_capacity(n);
        let mut cur = x.to_vec();
        let mut next = Vec::new();
        for (l, layer) in self.layers.iter().enumerate() {
            layer.forward(&cur, &mut next);
            if l + 1 < n {
                for v in next.iter_mut() {
                    *v = v.tanh();
                }
            }
            act.push(std::mem::replace(&mut cur, next.clone()));
        }
        MlpCache { act, out: cur }
    }

    /// Accumulate parameter gradients for `d(loss)/d(output) = dout` into
    /// `grad` (same flat layout as [`Mlp::write_params`]).
    pub fn backward(&self, cache: &MlpCache, dout: &[f64], grad: &mut [f64]) {
        debug_assert_eq!(grad.len(), self.param_count());
        let n = self.layers.len();
        let mut offsets = Vec::with_capacity(n);
        let mut off = 0;
        for layer in &self.layers {
            offsets.push(off);
            off += layer.param_count();
        }
        let mut dz = dout.to_vec();
        for l in (0..n).rev() {
            let layer = &self.layers[l];
            let a_in = &cache.act[l];
            let g = &mut grad[offsets[l]..offsets[l] + layer.param_count()];
            for i in 0..layer.out_dim {
                let gi = dz[i];
                let row = &mut g[i * layer.in_dim..(i + 1) * layer.in_dim];
                for (gw, aj) in row.iter_mut().zip(a_in) {
                    *gw += gi * aj;
                }
            }
            let gb = &mut g[layer.out_dim * layer.in_dim..];
            for (gbi, gi) in gb.iter_mut().zip(&dz) {
                *gbi += gi;
            }
            if l > 0 {
                let mut da = vec![0.0; layer.in_dim];
                for i in 0..layer.out_dim {
                    let row = &layer.w[i * layer.in_dim..(i + 1) * layer.in_dim];
                    let gi = dz[i];
                    for (daj, wj) in da.iter_mut().zip(row) {
                        *daj += gi * wj;
                    }
                }
                // a_in is the tanh output of layer l-1.
                dz = da.iter().zip(a_in).map(|(d, a)| d * (1.0 - a * a)).collect();
            }
        }
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(Linear::param_count).sum()
    }

    pub fn write_params(&self, dst: &mut Vec<f64>) {
        for layer in &self.layers {
            dst.extend_from_slice(&layer.w);
            dst.extend_from_slice(&layer.b);
        }
    }

    pub fn load_params(&mut self, src: &[f64]) -> usize {
        let mut off = 0;
        for layer in &mut self.layers {
            let wn = layer.w.len();
            layer.w.copy_from_slice(&src[off..off + wn]);
            off += wn;
            let bn = layer.b.len();
            layer.b.copy_from_slice(&src[off..off + bn]);
            off += bn;
        }
        off
    }
}

/// Beta parameters for the two action dimensions.
pub type BetaPair = [(f64, f64); 2];

/// Actor-critic pair over the 2-dimensional observation. The actor's four
/// outputs map to `alpha = 1 + softplus`, `beta = 1 + softplus` per action
/// dimension, keeping both above 1 so the density is unimodal with support
/// exactly [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyNet {
    pub actor: Mlp,
    pub critic: Mlp,
}

impl PolicyNet {
    pub fn new(hidden_dim: usize, rng: &mut ChaCha8Rng) -> Self {
        let actor = Mlp::new(&[2, hidden_dim, hidden_dim, 4], 0.01, rng);
        let critic = Mlp::new(&[2, hidden_dim, hidden_dim, 1], 1.0, rng);
        Self { actor, critic }
    }

    pub fn hidden_dim(&self) -> usize {
        self.actor.layers[0].out_dim
    }

    /// Map raw actor outputs to Beta parameters.
    pub fn beta_params(actor_out: &[f64]) -> BetaPair {
        [
            (1.0 + softplus(actor_out[0]), 1.0 + softplus(actor_out[1])),
            (1.0 + softplus(actor_out[2]), 1.0 + softplus(actor_out[3])),
        ]
    }

    /// Distribution parameters and state value for one observation.
    pub fn forward(&self, obs: [f64; 2]) -> (BetaPair, f64) {
        let params = Self::beta_params(&self.actor.forward(&obs));
        let value = self.critic.forward(&obs)[0];
        (params, value)
    }

    /// Sample an action and its log-probability under the current policy.
    pub fn sample_action(&self, obs: [f64; 2], rng: &mut ChaCha8Rng) -> ([f64; 2], f64, f64) {
        let (params, value) = self.forward(obs);
        let mut action = [0.0; 2];
        let mut log_prob = 0.0;
        for (d, &(alpha, beta)) in params.iter().enumerate() {
            let x = Beta::new(alpha, beta).expect("parameters exceed 1").sample(rng);
            // Keep the sample strictly interior so log terms stay finite.
            let x = x.clamp(1e-12, 1.0 - 1e-12);
            action[d] = x;
            log_prob += beta_log_pdf(x, alpha, beta);
        }
        (action, log_prob, value)
    }

    /// Deterministic action: the per-dimension distribution mean.
    pub fn mean_action(&self, obs: [f64; 2]) -> [f64; 2] {
        let (params, _) = self.forward(obs);
        [params[0].0 / (params[0].0 + params[0].1), params[1].0 / (params[1].0 + params[1].1)]
    }

    /// Log-probability of a stored action under the current parameters.
    pub fn log_prob(&self, obs: [f64; 2], action: [f64; 2]) -> f64 {
        let (params, _) = self.forward(obs);
        params
            .iter()
            .zip(action)
            .map(|(&(a, b), x)| beta_log_pdf(x.clamp(1e-12, 1.0 - 1e-12), a, b))
            .sum()
    }

    pub fn param_count(&self) -> usize {
        self.actor.param_count() + self.critic.param_count()
    }

    /// Flat parameter vector: actor first, then critic.
    pub fn flat_params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        self.actor.write_params(&mut out);
        self.critic.write_params(&mut out);
        out
    }

    pub fn set_flat_params(&mut self, params: &[f64]) {
        assert_eq!(params.len(), self.param_count(), "parameter vector length mismatch");
        let used = self.actor.load_params(params);
        self.critic.load_params(&params[used..]);
    }

    pub fn params_finite(&self) -> bool {
        self.flat_params().iter().all(|p| p.is_finite())
    }
}

/// Plain Adam over a flat parameter vector.
#[derive(Debug, Clone)]
pub struct Adam {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
}

impl Adam {
    pub fn new(learning_rate: f64, param_count: usize) -> Self {
        Self {
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            m: vec![0.0; param_count],
            v: vec![0.0; param_count],
            t: 0,
        }
    }

    pub fn step(&mut self, params: &mut [f64], grad: &[f64]) {
        debug_assert_eq!(params.len(), grad.len());
        self.t += 1;
        let bc1 = 1.0 - self.beta1.powi(self.t as i32);
        let bc2 = 1.0 - self.beta2.powi(self.t as i32);
        for i in 0..params.len() {
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * grad[i];
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * grad[i] * grad[i];
            let m_hat = self.m[i] / bc1;
            let v_hat = self.v[i] / bc2;
            params[i] -= self.learning_rate * m_hat / (v_hat.sqrt() + self.epsilon);
        }
    }
}
