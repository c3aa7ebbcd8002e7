//! Traffic generation and device mobility.
//!
//! Mobile devices emit Bernoulli service requests, sensors emit strictly
//! periodic updates; both carry Poisson-distributed communication sizes and
//! processing loads (resampled when a draw comes out zero, since a 0-Mbit
//! request has no meaning in the queueing dynamics).

use std::collections::VecDeque;

use rand::RngExt;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use crate::config::{SimConfig, Step};

/// Globally unique (per episode) identifier of a service unit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct UnitId(pub u64);

impl std::fmt::Display for UnitId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SourceKind {
    Ue,
    Sensor,
}

impl SourceKind {
    pub fn label(self) -> &'static str {
        match self {
            SourceKind::Ue => "ue",
            SourceKind::Sensor => "sensor",
        }
    }
}

/// A 2-D position in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(self, other: Point) -> f64 {
        ((self.x - other.x).powi(2) + (self.y - other.y).powi(2)).sqrt()
    }
}

/// One request or sensor update moving through the pipeline. Lifecycle
/// timestamps are stamped by the queueing stages and, once set, satisfy
/// `gen <= tx_start <= bs_arrival <= proc_start <= completion`.
#[derive(Debug, Clone, PartialEq)]
pub struct ServiceUnit {
    pub id: UnitId,
    pub source_kind: SourceKind,
    pub source_id: usize,
    pub gen_time: Step,
    /// Communication size in Mbit.
    pub comm_size: f64,
    /// Processing load in compute units.
    pub comp_load: f64,
    pub comm_remaining: f64,
    pub comp_remaining: f64,
    /// For requests: the sensor covering the device's position at
    /// generation time (nearest sensor, frozen at that instant).
    pub selected_sensor: Option<usize>,
    pub tx_start: Option<Step>,
    pub bs_arrival: Option<Step>,
    pub proc_start: Option<Step>,
    pub completion: Option<Step>,
}

impl ServiceUnit {
    pub fn new(
        id: UnitId,
        source_kind: SourceKind,
        source_id: usize,
        gen_time: Step,
        comm_size: f64,
        comp_load: f64,
    ) -> Self {
        Self {
            id,
            source_kind,
            source_id,
            gen_time,
            comm_size,
            comp_load,
            comm_remaining: comm_size,
            comp_remaining: comp_load,
            selected_sensor: None,
            tx_start: None,
            bs_arrival: None,
            proc_start: None,
            completion: None,
        }
    }
}

/// A device and its outbound communication queue. Sensors never move;
/// mobile devices walk between random waypoints.
#[derive(Debug, Clone)]
pub struct DeviceState {
    pub id: usize,
    pub kind: SourceKind,
    pub position: Point,
    pub waypoint: Option<Point>,
    pub comm_queue: VecDeque<ServiceUnit>,
}

impl DeviceState {
    fn new(id: usize, kind: SourceKind, position: Point) -> Self {
        Self { id, kind, position, waypoint: None, comm_queue: VecDeque::new() }
    }
}

/// Zero-truncated Poisson draw: resample until the value is at least 1.
pub fn sample_positive_poisson(mean: f64, rng: &mut ChaCha8Rng) -> f64 {
    let dist = Poisson::new(mean).expect("poisson mean must be positive");
    loop {
        let v: f64 = dist.sample(rng);
        if v >= 1.0 {
            return v;
        }
    }
}

/// Bernoulli request arrivals: each device independently emits one unit
/// with probability `ue_request_prob`, appended to its communication queue.
/// Returns the ids of the units generated this step.
pub fn generate_ue_arrivals(
    ues: &mut [DeviceState],
    cfg: &SimConfig,
    t: Step,
    rng_traffic: &mut ChaCha8Rng,
    rng_sizes: &mut ChaCha8Rng,
    next_id: &mut u64,
) -> Vec<UnitId> {
    let mut out = Vec::new();
    for ue in ues.iter_mut() {
        if rng_traffic.random::<f64>() < cfg.ue_request_prob {
            let comm = sample_positive_poisson(cfg.ue_comm_mean_mbit, rng_sizes);
            let comp = sample_positive_poisson(cfg.ue_comp_mean_units, rng_sizes);
            let id = UnitId(*next_id);
            *next_id += 1;
            ue.comm_queue.push_back(ServiceUnit::new(id, SourceKind::Ue, ue.id, t, comm, comp));
            out.push(id);
        }
    }
    out
}

/// Periodic sensor updates: every sensor whose interval divides `t` emits
/// exactly one unit. Update instants are `{0, T, 2T, ...}`.
pub fn generate_sensor_updates(
    sensors: &mut [DeviceState],
    cfg: &SimConfig,
    t: Step,
    rng_sizes: &mut ChaCha8Rng,
    next_id: &mut u64,
) -> Vec<UnitId> {
    let mut out = Vec::new();
    if t % cfg.sensor_interval_steps != 0 {
        return out;
    }
    for sensor in sensors.iter_mut() {
        let comm = sample_positive_poisson(cfg.sensor_comm_mean_mbit, rng_sizes);
        let comp = sample_positive_poisson(cfg.sensor_comp_mean_units, rng_sizes);
        let id = UnitId(*next_id);
        *next_id += 1;
        sensor
            .comm_queue
            .push_back(ServiceUnit::new(id, SourceKind::Sensor, sensor.id, t, comm, comp));
        out.push(id);
    }
    out
}

/// Random-waypoint motion: walk toward the current waypoint at the
/// configured speed; on arrival draw a fresh uniform waypoint and keep
/// walking with the leftover travel budget. Positions stay inside the area.
pub fn move_ues(ues: &mut [DeviceState], cfg: &SimConfig, dt_s: f64, rng: &mut ChaCha8Rng) {
    let travel = cfg.ue_speed_mps * dt_s;
    if travel <= 0.0 {
        return;
    }
    for ue in ues.iter_mut() {
        let mut budget = travel;
        while budget > 1e-12 {
            let wp = match ue.waypoint {
                Some(wp) => wp,
                None => {
                    let wp = uniform_point(cfg, rng);
                    ue.waypoint = Some(wp);
                    wp
                }
            };
            let dist = ue.position.distance(wp);
            if dist <= budget {
                ue.position = wp;
                ue.waypoint = None;
                budget -= dist;
            } else {
                let frac = budget / dist;
                ue.position = Point::new(
                    ue.position.x + (wp.x - ue.position.x) * frac,
                    ue.position.y + (wp.y - ue.position.y) * frac,
                );
                budget = 0.0;
            }
        }
    }
}

fn uniform_point(cfg: &SimConfig, rng: &mut ChaCha8Rng) -> Point {
    Point::new(rng.random_range(0.0..cfg.area_width_m), rng.random_range(0.0..cfg.area_height_m))
}

/// Initial placement: sensors on a jittered uniform grid so the whole area
/// is covered, mobile devices uniformly at random. All queues start empty.
/// Returns `(ues, sensors)`.
pub fn place_devices(cfg: &SimConfig, rng: &mut ChaCha8Rng) -> (Vec<DeviceState>, Vec<DeviceState>) {
    let n = cfg.num_sensors;
    let aspect = cfg.area_width_m / cfg.area_height_m;
    let cols = ((n as f64 * aspect).sqrt().ceil() as usize).max(1);
    let rows = n.div_ceil(cols);
    let cell_w = cfg.area_width_m / cols as f64;
    let cell_h = cfg.area_height_m / rows as f64;
    let jitter = 0.25 * cell_w.min(cell_h);

    let mut sensors = Vec::with_capacity(n);
    for i in 0..n {
        let (r, c) = (i / cols, i % cols);
        let cx = (c as f64 + 0.5) * cell_w + rng.random_range(-jitter..jitter);
        let cy = (r as f64 + 0.5) * cell_h + rng.random_range(-jitter..jitter);
        let pos = Point::new(cx.clamp(0.0, cfg.area_width_m), cy.clamp(0.0, cfg.area_height_m));
        sensors.push(DeviceState::new(i, SourceKind::Sensor, pos));
    }

    let mut ues = Vec::with_capacity(cfg.num_ues);
    for k in 0..cfg.num_ues {
        ues.push(DeviceState::new(k, SourceKind::Ue, uniform_point(cfg, rng)));
    }
    (ues, sensors)
}
