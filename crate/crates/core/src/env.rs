//! Episodic environment over the simulator: two-queue-length observation,
//! continuous two-fraction action, and a synchronization reward with a
//! delay penalty.
//!
//! Within-step order is fixed and results depend on it: move devices,
//! generate arrivals, transmit under the communication split, process under
//! the compute split, account rewards from this step's completions, then
//! observe the queues. A unit that crosses the whole pipeline inside one
//! step therefore has end-to-end delay exactly 1.

use thiserror::Error;

use crate::aoi::{self, CompletionRecord, Ledger, SensorHistory};
use crate::config::{QueueLenUnit, RngHub, RewardParams, SimConfig, Step, StreamKind};
use crate::queueing::{self, ComputeAllocation, QueueSystem, TraceEvent, TraceSink};
use crate::radio::{self, BandwidthAllocation};
use crate::traffic::{self, DeviceState, SourceKind};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Error)]
pub enum EnvError {
    #[error("step called after the episode ended")]
    EpisodeDone,
    #[error("reset must be called before stepping")]
    NotReset,
}

/// The agent-visible state: the two computation-queue backlogs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    pub ue_queue: f64,
    pub sensor_queue: f64,
}

impl Observation {
    /// Backlogs divided by `cap` and clamped to 1, for agents that want a
    /// bounded input. Raw counts remain the canonical state.
    pub fn normalized(&self, cap: f64) -> [f64; 2] {
        [(self.ue_queue / cap).clamp(0.0, 1.0), (self.sensor_queue / cap).clamp(0.0, 1.0)]
    }
}

/// Resource split: fractions of bandwidth and compute assigned to the
/// request class; the complements go to sensors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Action {
    pub comm_split: f64,
    pub comp_split: f64,
}

impl Action {
    pub fn new(comm_split: f64, comp_split: f64) -> Self {
        Self { comm_split, comp_split }
    }

    pub fn clamped(self) -> Self {
        Self {
            comm_split: self.comm_split.clamp(0.0, 1.0),
            comp_split: self.comp_split.clamp(0.0, 1.0),
        }
    }
}

/// Reward pieces for one step; `total = sync + delay` exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RewardBreakdown {
    pub total: f64,
    pub sync: f64,
    pub delay: f64,
}

/// Everything a step returns.
#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub observation: Observation,
    pub reward: f64,
    pub sync_reward: f64,
    pub delay_penalty: f64,
    pub done: bool,
    pub info: StepInfo,
}

#[derive(Debug, Clone)]
pub struct StepInfo {
    /// The step index that was just simulated.
    pub step: Step,
    /// Records completed during this step (requests and sensor updates).
    pub completions: Vec<CompletionRecord>,
    /// Cumulative Mbit over completed requests.
    pub served_mbit: f64,
    /// Cumulative Mbit generated by requests.
    pub generated_request_mbit: f64,
}

/// Reward for the requests completed this step: a base reward geometrically
/// discounted per step of sensor-information age, plus a flat penalty for
/// each request whose end-to-end delay strictly exceeds the threshold.
pub fn compute_reward(completions: &[CompletionRecord], params: &RewardParams) -> RewardBreakdown {
    let mut sync = 0.0;
    let mut delay = 0.0;
    for r in completions.iter().filter(|r| r.source_kind == SourceKind::Ue) {
        let aosi = r.aosi.expect("request records carry an age") as i32;
        sync += params.sync_base * params.sync_discount.powi(aosi);
        if r.aori > params.delay_threshold_steps {
            delay += params.delay_penalty;
        }
    }
    RewardBreakdown { total: sync + delay, sync, delay }
}

/// One episode-owned simulator instance.
#[derive(Debug)]
pub struct SimEnv {
    config: SimConfig,
    reward_params: RewardParams,
    ues: Vec<DeviceState>,
    sensors: Vec<DeviceState>,
    queues: QueueSystem,
    ledger: Ledger,
    history: SensorHistory,
    trace: TraceSink,
    trace_wanted: bool,
    rng_traffic: ChaCha8Rng,
    rng_mobility: ChaCha8Rng,
    rng_sizes: ChaCha8Rng,
    t: Step,
    done: bool,
    ready: bool,
    next_unit_id: u64,
    units_generated: u64,
    units_completed: u64,
    served_mbit: f64,
    generated_request_mbit: f64,
}

impl SimEnv {
    pub fn new(config: SimConfig, reward_params: RewardParams) -> Self {
        let hub = RngHub::new(config.master_seed);
        Self {
            ues: Vec::new(),
            sensors: Vec::new(),
            queues: QueueSystem::new(),
            ledger: Ledger::new(),
            history: SensorHistory::new(config.num_sensors),
            trace: TraceSink::disabled(),
            trace_wanted: false,
            rng_traffic: hub.stream(StreamKind::Traffic),
            rng_mobility: hub.stream(StreamKind::Mobility),
            rng_sizes: hub.stream(StreamKind::Sizes),
            t: 0,
            done: true,
            ready: false,
            next_unit_id: 0,
            units_generated: 0,
            units_completed: 0,
            served_mbit: 0.0,
            generated_request_mbit: 0.0,
            config,
            reward_params,
        }
    }

    /// Record per-unit state transitions for oracle replay. Takes effect at
    /// the next reset.
    pub fn enable_trace(&mut self, enabled: bool) {
        self.trace_wanted = enabled;
    }

    /// Fresh placement, empty queues, step zero. The observation of an
    /// empty system is `(0, 0)`.
    pub fn reset(&mut self, seed: u64) -> Observation {
        let hub = RngHub::new(seed);
        self.rng_traffic = hub.stream(StreamKind::Traffic);
        self.rng_mobility = hub.stream(StreamKind::Mobility);
        self.rng_sizes = hub.stream(StreamKind::Sizes);
        let (ues, sensors) = traffic::place_devices(&self.config, &mut self.rng_mobility);
        self.ues = ues;
        self.sensors = sensors;
        self.queues = QueueSystem::new();
        self.ledger = Ledger::new();
        self.history = SensorHistory::new(self.config.num_sensors);
        self.trace = if self.trace_wanted { TraceSink::enabled() } else { TraceSink::disabled() };
        self.t = 0;
        self.done = false;
        self.ready = true;
        self.next_unit_id = 0;
        self.units_generated = 0;
        self.units_completed = 0;
        self.served_mbit = 0.0;
        self.generated_request_mbit = 0.0;
        self.observe()
    }

    pub fn observe(&self) -> Observation {
        let (l, l_hat) = match self.config.queue_len_unit {
            QueueLenUnit::Count => {
                let (a, b) = self.queues.lengths();
                (a as f64, b as f64)
            }
            QueueLenUnit::Mbit => self.queues.backlog_mbit(),
        };
        Observation { ue_queue: l, sensor_queue: l_hat }
    }

    /// Advance one step under the given split.
    pub fn step(&mut self, action: Action) -> Result<StepOutcome, EnvError> {
        if !self.ready {
            return Err(EnvError::NotReset);
        }
        if self.done {
            return Err(EnvError::EpisodeDone);
        }
        let action = action.clamped();
        let t = self.t;
        let cfg = &self.config;

        // 1. Mobility.
        traffic::move_ues(&mut self.ues, cfg, cfg.step_duration_s, &mut self.rng_mobility);

        // 2. Arrivals, stamped with this step and (for requests) the sensor
        //    covering the device's position right now.
        let new_requests = traffic::generate_ue_arrivals(
            &mut self.ues,
            cfg,
            t,
            &mut self.rng_traffic,
            &mut self.rng_sizes,
            &mut self.next_unit_id,
        );
        for ue in self.ues.iter_mut() {
            let covering = aoi::select_sensor(ue.position, &self.sensors);
            for unit in ue.comm_queue.iter_mut().rev() {
                if unit.gen_time != t || unit.selected_sensor.is_some() {
                    break;
                }
                unit.selected_sensor = Some(covering);
                self.generated_request_mbit += unit.comm_size;
                self.trace.record(TraceEvent {
                    step: t,
                    unit: unit.id,
                    kind: queueing::EventKind::Generated,
                    source_kind: SourceKind::Ue,
                    source_id: unit.source_id,
                });
            }
        }
        let new_updates = traffic::generate_sensor_updates(
            &mut self.sensors,
            cfg,
            t,
            &mut self.rng_sizes,
            &mut self.next_unit_id,
        );
        if self.trace.is_enabled() {
            for sensor in &self.sensors {
                for unit in sensor.comm_queue.iter().rev() {
                    if unit.gen_time != t {
                        break;
                    }
                    self.trace.record(TraceEvent {
                        step: t,
                        unit: unit.id,
                        kind: queueing::EventKind::Generated,
                        source_kind: SourceKind::Sensor,
                        source_id: unit.source_id,
                    });
                }
            }
        }
        self.units_generated += (new_requests.len() + new_updates.len()) as u64;

        // 3. Bandwidth split over backlogged devices, then transmission.
        let active_ues: Vec<usize> =
            self.ues.iter().filter(|d| !d.comm_queue.is_empty()).map(|d| d.id).collect();
        let active_sensors: Vec<usize> =
            self.sensors.iter().filter(|d| !d.comm_queue.is_empty()).map(|d| d.id).collect();
        let alloc: BandwidthAllocation = radio::allocate_bandwidth(
            action.comm_split,
            cfg.bandwidth_mhz,
            active_ues,
            active_sensors,
        );
        let ue_rates: Vec<(usize, f64)> = alloc
            .active_ues
            .iter()
            .map(|&id| {
                (id, radio::link_budget(self.ues[id].position, alloc.per_ue_mhz, cfg).rate_mbps)
            })
            .collect();
        let sensor_rates: Vec<(usize, f64)> = alloc
            .active_sensors
            .iter()
            .map(|&id| {
                (
                    id,
                    radio::link_budget(self.sensors[id].position, alloc.per_sensor_mhz, cfg)
                        .rate_mbps,
                )
            })
            .collect();
        queueing::transmit_step(
            &mut self.ues,
            &ue_rates,
            cfg.step_duration_s,
            t,
            &mut self.queues.ue_comp,
            &mut self.trace,
        );
        queueing::transmit_step(
            &mut self.sensors,
            &sensor_rates,
            cfg.step_duration_s,
            t,
            &mut self.queues.sensor_comp,
            &mut self.trace,
        );

        // 4. Processing under the compute split.
        let comp_alloc = ComputeAllocation::new(action.comp_split, cfg.compute_units);
        let completed = queueing::process_step(&mut self.queues, &comp_alloc, t, &mut self.trace);

        // 5. Ledger records and the step reward. Sensor completions enter
        //    the history first; same-step completions never qualify as a
        //    reference because the age rule is strict.
        let mut records: Vec<CompletionRecord> = Vec::with_capacity(completed.len());
        for unit in completed.iter().filter(|u| u.source_kind == SourceKind::Sensor) {
            let r = self.ledger.complete(unit, &mut self.history).expect("timestamps stamped");
            records.push(r.clone());
        }
        for unit in completed.iter().filter(|u| u.source_kind == SourceKind::Ue) {
            let r = self.ledger.complete(unit, &mut self.history).expect("timestamps stamped");
            self.served_mbit += r.comm_size;
            records.push(r.clone());
        }
        self.units_completed += completed.len() as u64;
        let reward = compute_reward(&records, &self.reward_params);

        // 6. Observe and close out the step.
        self.t += 1;
        self.done = self.t >= cfg.episode_length;
        Ok(StepOutcome {
            observation: self.observe(),
            reward: reward.total,
            sync_reward: reward.sync,
            delay_penalty: reward.delay,
            done: self.done,
            info: StepInfo {
                step: t,
                completions: records,
                served_mbit: self.served_mbit,
                generated_request_mbit: self.generated_request_mbit,
            },
        })
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn reward_params(&self) -> &RewardParams {
        &self.reward_params
    }

    pub fn ledger(&self) -> &Ledger {
        &self.ledger
    }

    pub fn history(&self) -> &SensorHistory {
        &self.history
    }

    pub fn trace_events(&self) -> &[TraceEvent] {
        self.trace.events()
    }

    pub fn ue_positions(&self) -> Vec<(f64, f64)> {
        self.ues.iter().map(|d| (d.position.x, d.position.y)).collect()
    }

    pub fn sensor_positions(&self) -> Vec<(f64, f64)> {
        self.sensors.iter().map(|d| (d.position.x, d.position.y)).collect()
    }

    /// Exact unit accounting: everything generated is in a device queue, a
    /// computation queue, or the ledger.
    pub fn conservation_holds(&self) -> bool {
        let in_device: usize = self
            .ues
            .iter()
            .chain(self.sensors.iter())
            .map(|d| d.comm_queue.len())
            .sum();
        let (l, l_hat) = self.queues.lengths();
        self.units_generated == (in_device + l + l_hat) as u64 + self.units_completed
    }

    pub fn units_generated(&self) -> u64 {
        self.units_generated
    }

    pub fn generated_request_mbit(&self) -> f64 {
        self.generated_request_mbit
    }

    pub fn queue_lengths(&self) -> (usize, usize) {
        self.queues.lengths()
    }

    pub fn current_step(&self) -> Step {
        self.t
    }

    pub fn is_done(&self) -> bool {
        self.done
    }
}

/// [`SimEnv`] behind the trainer's episodic interface: observations are
/// normalized by a queue-length cap before they reach the networks.
#[derive(Debug)]
pub struct SimEnvRollout {
    env: SimEnv,
    obs_cap: f64,
}

impl SimEnvRollout {
    pub fn new(config: SimConfig, reward_params: RewardParams, obs_cap: f64) -> Self {
        Self { env: SimEnv::new(config, reward_params), obs_cap }
    }

    pub fn env(&self) -> &SimEnv {
        &self.env
    }
}

impl crate::ppo::RolloutEnv for SimEnvRollout {
    fn reset(&mut self, seed: u64) -> [f64; 2] {
        self.env.reset(seed).normalized(self.obs_cap)
    }

    fn step(&mut self, action: [f64; 2]) -> ([f64; 2], f64, bool) {
        let out = self
            .env
            .step(Action::new(action[0], action[1]))
            .expect("the trainer resets finished episodes");
        (out.observation.normalized(self.obs_cap), out.reward, out.done)
    }

    fn episode_metrics(&self) -> Option<crate::ppo::EvalMetrics> {
        let cfg = self.env.config();
        let summary = aoi::throughput_summary(
            self.env.ledger(),
            cfg.episode_length,
            cfg.num_ues,
            cfg.ue_request_prob,
            cfg.ue_comm_mean_mbit,
        );
        Some(crate::ppo::EvalMetrics {
            mean_aosi: summary.aosi.map(|(m, _)| m),
            mean_aori: summary.aori.map(|(m, _)| m),
            served_mbit: summary.served_mbit,
            served_fraction: summary.served_fraction,
        })
    }
}

/// Per-episode aggregates produced by [`run_episode`].
#[derive(Debug, Clone)]
pub struct EpisodeSummary {
    pub seed: u64,
    pub total_reward: f64,
    pub served_mbit: f64,
    pub served_fraction: f64,
    pub mean_aori: Option<f64>,
    pub mean_aosi: Option<f64>,
    pub completed_requests: usize,
    pub flagged_requests: usize,
    pub generated_request_mbit: f64,
}

/// Run one full episode under a per-step controller and summarize it.
pub fn run_episode(
    env: &mut SimEnv,
    seed: u64,
    horizon: Step,
    mut controller: impl FnMut(&Observation) -> Action,
) -> EpisodeSummary {
    let mut obs = env.reset(seed);
    let mut total_reward = 0.0;
    for _ in 0..horizon {
        let out = env.step(controller(&obs)).expect("episode still running");
        total_reward += out.reward;
        obs = out.observation;
        if out.done {
            break;
        }
    }
    let cfg = env.config();
    let summary = aoi::throughput_summary(
        env.ledger(),
        horizon,
        cfg.num_ues,
        cfg.ue_request_prob,
        cfg.ue_comm_mean_mbit,
    );
    EpisodeSummary {
        seed,
        total_reward,
        served_mbit: summary.served_mbit,
        served_fraction: summary.served_fraction,
        mean_aori: summary.aori.map(|(m, _)| m),
        mean_aosi: summary.aosi.map(|(m, _)| m),
        completed_requests: summary.completed_requests,
        flagged_requests: summary.flagged_requests,
        generated_request_mbit: env.generated_request_mbit(),
    }
}
