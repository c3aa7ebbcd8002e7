//! The transmission/processing pipeline: per-device communication queues
//! feed two computation queues at the base station (one per traffic class),
//! which the edge server drains under the compute split.
//!
//! Service is fluid with carry-over: a unit may make partial progress in a
//! step, and leftover per-device bandwidth (or per-class compute) flows to
//! the next unit in the same queue within the step. Queues are unbounded.
//!
//! Timestamp conventions, chosen so a unit generated, transmitted, and
//! processed within one step has end-to-end delay exactly 1:
//! * `tx_start`  = the step during which transmission first progressed
//! * `bs_arrival` = t + 1 when transmission finishes during step t
//! * `proc_start` = max(step of first processing progress, bs_arrival)
//! * `completion` = t + 1 when processing finishes during step t

use std::collections::VecDeque;

use crate::config::Step;
use crate::traffic::{DeviceState, ServiceUnit, SourceKind, UnitId};

/// Residual size below which a transfer or load counts as finished;
/// guards against float dust from fluid service.
const RESIDUAL_EPS: f64 = 1e-9;

/// The two base-station computation queues.
#[derive(Debug, Clone, Default)]
pub struct QueueSystem {
    pub ue_comp: VecDeque<ServiceUnit>,
    pub sensor_comp: VecDeque<ServiceUnit>,
}

impl QueueSystem {
    pub fn new() -> Self {
        Self::default()
    }

    /// Computation-queue lengths `(l, l_hat)` in unit counts.
    pub fn lengths(&self) -> (usize, usize) {
        (self.ue_comp.len(), self.sensor_comp.len())
    }

    /// Computation-queue backlog in Mbit of accumulated traffic.
    pub fn backlog_mbit(&self) -> (f64, f64) {
        (
            self.ue_comp.iter().map(|u| u.comm_size).sum(),
            self.sensor_comp.iter().map(|u| u.comm_size).sum(),
        )
    }
}

/// Compute split: the device fraction of total capacity goes to the request
/// queue, the complement to the sensor-update queue.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComputeAllocation {
    pub ue_fraction: f64,
    pub ue_capacity: f64,
    pub sensor_capacity: f64,
}

impl ComputeAllocation {
    pub fn new(rho_p: f64, total_units: f64) -> Self {
        let rho_p = rho_p.clamp(0.0, 1.0);
        Self {
            ue_fraction: rho_p,
            ue_capacity: rho_p * total_units,
            sensor_capacity: (1.0 - rho_p) * total_units,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    Generated,
    TxStart,
    BsArrival,
    ProcStart,
    Completed,
}

impl EventKind {
    pub fn label(self) -> &'static str {
        match self {
            EventKind::Generated => "generated",
            EventKind::TxStart => "tx_start",
            EventKind::BsArrival => "bs_arrival",
            EventKind::ProcStart => "proc_start",
            EventKind::Completed => "completed",
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        match s {
            "generated" => Some(EventKind::Generated),
            "tx_start" => Some(EventKind::TxStart),
            "bs_arrival" => Some(EventKind::BsArrival),
            "proc_start" => Some(EventKind::ProcStart),
            "completed" => Some(EventKind::Completed),
            _ => None,
        }
    }
}

/// One state transition of one unit, recorded at the step it happened in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceEvent {
    pub step: Step,
    pub unit: UnitId,
    pub kind: EventKind,
    pub source_kind: SourceKind,
    pub source_id: usize,
}

impl TraceEvent {
    /// Line form used by the event-trace export: `step,unit,kind,source,id`.
    pub fn to_line(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.step,
            self.unit,
            self.kind.label(),
            self.source_kind.label(),
            self.source_id
        )
    }

    pub fn parse_line(line: &str) -> Option<Self> {
        let mut it = line.trim().split(',');
        let step = it.next()?.parse().ok()?;
        let unit = UnitId(it.next()?.parse().ok()?);
        let kind = EventKind::from_label(it.next()?)?;
        let source_kind = match it.next()? {
            "ue" => SourceKind::Ue,
            "sensor" => SourceKind::Sensor,
            _ => return None,
        };
        let source_id = it.next()?.parse().ok()?;
        Some(Self { step, unit, kind, source_kind, source_id })
    }
}

/// Optional event-trace sink. A disabled sink costs one branch per event.
#[derive(Debug, Default)]
pub struct TraceSink {
    events: Option<Vec<TraceEvent>>,
}

impl TraceSink {
    pub fn disabled() -> Self {
        Self { events: None }
    }

    pub fn enabled() -> Self {
        Self { events: Some(Vec::new()) }
    }

    pub fn is_enabled(&self) -> bool {
        self.events.is_some()
    }

    pub fn record(&mut self, ev: TraceEvent) {
        if let Some(events) = &mut self.events {
            events.push(ev);
        }
    }

    pub fn events(&self) -> &[TraceEvent] {
        self.events.as_deref().unwrap_or(&[])
    }

    pub fn clear(&mut self) {
        if let Some(events) = &mut self.events {
            events.clear();
        }
    }
}

/// Advance transmissions for one device class during step `t`. `rates`
/// pairs device ids with their uplink rate in Mbit/s for this step; each
/// device's head-of-line unit is served first and any leftover budget flows
/// to the next queued unit. Finished units are stamped and enqueued into
/// `comp_queue` in device-id order. Returns how many units reached the BS.
pub fn transmit_step(
    devices: &mut [DeviceState],
    rates: &[(usize, f64)],
    step_duration_s: f64,
    t: Step,
    comp_queue: &mut VecDeque<ServiceUnit>,
    trace: &mut TraceSink,
) -> usize {
    let mut arrivals = 0;
    for &(device_id, rate_mbps) in rates {
        let device = &mut devices[device_id];
        debug_assert_eq!(device.id, device_id);
        let mut budget_mbit = rate_mbps * step_duration_s;
        while budget_mbit > RESIDUAL_EPS {
            let Some(head) = device.comm_queue.front_mut() else { break };
            let served = budget_mbit.min(head.comm_remaining);
            if served <= 0.0 {
                break;
            }
            if head.tx_start.is_none() {
                head.tx_start = Some(t);
                trace.record(TraceEvent {
                    step: t,
                    unit: head.id,
                    kind: EventKind::TxStart,
                    source_kind: head.source_kind,
                    source_id: head.source_id,
                });
            }
            head.comm_remaining -= served;
            budget_mbit -= served;
            if head.comm_remaining <= RESIDUAL_EPS {
                head.comm_remaining = 0.0;
                let mut unit = device.comm_queue.pop_front().expect("head exists");
                unit.bs_arrival = Some(t + 1);
                trace.record(TraceEvent {
                    step: t,
                    unit: unit.id,
                    kind: EventKind::BsArrival,
                    source_kind: unit.source_kind,
                    source_id: unit.source_id,
                });
                comp_queue.push_back(unit);
                arrivals += 1;
            }
        }
    }
    arrivals
}

/// Drain both computation queues for step `t`. Each queue independently
/// consumes its capacity head-of-line with carry-over. Completed units are
/// returned in completion order: request-queue completions first, then
/// sensor-queue completions.
pub fn process_step(
    queues: &mut QueueSystem,
    alloc: &ComputeAllocation,
    t: Step,
    trace: &mut TraceSink,
) -> Vec<ServiceUnit> {
    let mut completed = Vec::new();
    serve_comp_queue(&mut queues.ue_comp, alloc.ue_capacity, t, &mut completed, trace);
    serve_comp_queue(&mut queues.sensor_comp, alloc.sensor_capacity, t, &mut completed, trace);
    completed
}

fn serve_comp_queue(
    queue: &mut VecDeque<ServiceUnit>,
    capacity: f64,
    t: Step,
    completed: &mut Vec<ServiceUnit>,
    trace: &mut TraceSink,
) {
    let mut budget = capacity;
    while budget > RESIDUAL_EPS {
        let Some(head) = queue.front_mut() else { break };
        let served = budget.min(head.comp_remaining);
        if served <= 0.0 {
            break;
        }
        if head.proc_start.is_none() {
            // A unit that arrived this very step carries bs_arrival = t + 1;
            // processing cannot be stamped before it.
            head.proc_start = Some(head.bs_arrival.expect("processed units reached the BS").max(t));
            trace.record(TraceEvent {
                step: t,
                unit: head.id,
                kind: EventKind::ProcStart,
                source_kind: head.source_kind,
                source_id: head.source_id,
            });
        }
        head.comp_remaining -= served;
        budget -= served;
        if head.comp_remaining <= RESIDUAL_EPS {
            head.comp_remaining = 0.0;
            let mut unit = queue.pop_front().expect("head exists");
            unit.completion = Some(t + 1);
            trace.record(TraceEvent {
                step: t,
                unit: unit.id,
                kind: EventKind::Completed,
                source_kind: unit.source_kind,
                source_id: unit.source_id,
            });
            completed.push(unit);
        }
    }
}

/// The two computation-queue lengths `(l, l_hat)` in unit counts.
pub fn observe_queues(queues: &QueueSystem) -> (usize, usize) {
    queues.lengths()
}
