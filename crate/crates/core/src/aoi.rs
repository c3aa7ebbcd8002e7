//! Freshness metrics and the completion ledger.
//!
//! Two ages are tracked per completed request: the end-to-end service delay
//! (device queueing + transmission + BS waiting + processing) and the
//! sensor-information age: the absolute gap between the request's
//! generation time and the generation time of the freshest update from the
//! request's covering sensor that finished processing before the request
//! did. The absolute value handles the case where an update generated
//! *after* the request is processed first.
//!
//! A request that completes before any update of its sensor has ever been
//! processed is measured against a virtual time-zero snapshot and flagged;
//! flagged records feed the reward like any other but are reported
//! separately in summaries.

use thiserror::Error;

use crate::config::Step;
use crate::traffic::{DeviceState, Point, ServiceUnit, SourceKind, UnitId};

#[derive(Debug, Error)]
pub enum MetricError {
    #[error("unit {unit} is missing timestamp `{which}`")]
    MissingTimestamp { unit: UnitId, which: &'static str },
}

/// Immutable ledger entry written when a unit finishes processing.
#[derive(Debug, Clone, PartialEq)]
pub struct CompletionRecord {
    pub id: UnitId,
    pub source_kind: SourceKind,
    pub source_id: usize,
    pub gen_time: Step,
    pub comm_size: f64,
    pub comp_load: f64,
    pub tx_start: Step,
    pub bs_arrival: Step,
    pub proc_start: Step,
    pub completion: Step,
    /// End-to-end delay in steps; at least 1 by construction.
    pub aori: Step,
    /// Sensor-information age in steps. Requests only.
    pub aosi: Option<Step>,
    /// The update the age was measured against, when one existed.
    pub reference_update_id: Option<UnitId>,
    /// Covering sensor chosen at generation time. Requests only.
    pub selected_sensor: Option<usize>,
    /// True when no processed update existed and the virtual time-zero
    /// snapshot was used.
    pub flagged: bool,
}

/// One processed sensor update, as seen by the age computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProcessedUpdate {
    pub id: UnitId,
    pub gen_time: Step,
    pub completion: Step,
}

/// Per-sensor lists of processed updates, ordered by completion time.
#[derive(Debug, Clone, Default)]
pub struct SensorHistory {
    per_sensor: Vec<Vec<ProcessedUpdate>>,
}

impl SensorHistory {
    pub fn new(num_sensors: usize) -> Self {
        Self { per_sensor: vec![Vec::new(); num_sensors] }
    }

    pub fn push(&mut self, sensor_id: usize, update: ProcessedUpdate) {
        let list = &mut self.per_sensor[sensor_id];
        if let Some(last) = list.last() {
            debug_assert!(last.completion <= update.completion, "history is completion-ordered");
        }
        list.push(update);
    }

    pub fn updates(&self, sensor_id: usize) -> &[ProcessedUpdate] {
        &self.per_sensor[sensor_id]
    }
}

/// The sensor covering a position: minimum Euclidean distance, ties broken
/// by the lowest sensor id.
pub fn select_sensor(position: Point, sensors: &[DeviceState]) -> usize {
    debug_assert!(!sensors.is_empty(), "at least one sensor must exist");
    let mut best = 0usize;
    let mut best_d = f64::INFINITY;
    for s in sensors {
        let d = position.distance(s.position);
        if d < best_d {
            best_d = d;
            best = s.id;
        }
    }
    best
}

/// The freshest update available when a request finishes: among updates
/// processed strictly before `request_completion`, the one with the largest
/// generation time (ties: latest completion, then highest id). An update
/// generated after the request counts if it was processed in time.
pub fn reference_update(
    history: &[ProcessedUpdate],
    _request_gen: Step,
    request_completion: Step,
) -> Option<ProcessedUpdate> {
    let mut best: Option<ProcessedUpdate> = None;
    for u in history {
        if u.completion >= request_completion {
            // History is completion-ordered; nothing later qualifies.
            break;
        }
        let better = match best {
            None => true,
            Some(b) => {
                (u.gen_time, u.completion, u.id.0) > (b.gen_time, b.completion, b.id.0)
            }
        };
        if better {
            best = Some(*u);
        }
    }
    best
}

/// Absolute gap between request and reference generation times.
pub fn compute_aosi(request_gen: Step, reference_gen: Step) -> Step {
    request_gen.abs_diff(reference_gen)
}

/// End-to-end delay of a finished unit: completion minus generation, which
/// by construction equals the sum of the four stage intervals.
pub fn compute_aori(unit: &ServiceUnit) -> Result<Step, MetricError> {
    let need = |ts: Option<Step>, which: &'static str| {
        ts.ok_or(MetricError::MissingTimestamp { unit: unit.id, which })
    };
    let tx_start = need(unit.tx_start, "tx_start")?;
    let bs_arrival = need(unit.bs_arrival, "bs_arrival")?;
    let proc_start = need(unit.proc_start, "proc_start")?;
    let completion = need(unit.completion, "completion")?;
    debug_assert!(unit.gen_time <= tx_start);
    debug_assert!(tx_start <= bs_arrival);
    debug_assert!(bs_arrival <= proc_start);
    debug_assert!(proc_start <= completion);
    Ok(completion - unit.gen_time)
}

/// Append-only ledger of completion records plus the running counters the
/// conservation identity needs.
#[derive(Debug, Clone, Default)]
pub struct Ledger {
    pub records: Vec<CompletionRecord>,
}

impl Ledger {
    pub fn new() -> Self {
        Self::default()
    }

    /// Finalize a processed unit into a record. Sensor completions are also
    /// appended to `history`, requests are measured against it.
    pub fn complete(
        &mut self,
        unit: &ServiceUnit,
        history: &mut SensorHistory,
    ) -> Result<&CompletionRecord, MetricError> {
        let aori = compute_aori(unit)?;
        let completion = unit.completion.expect("checked by compute_aori");
        let mut record = CompletionRecord {
            id: unit.id,
            source_kind: unit.source_kind,
            source_id: unit.source_id,
            gen_time: unit.gen_time,
            comm_size: unit.comm_size,
            comp_load: unit.comp_load,
            tx_start: unit.tx_start.expect("checked"),
            bs_arrival: unit.bs_arrival.expect("checked"),
            proc_start: unit.proc_start.expect("checked"),
            completion,
            aori,
            aosi: None,
            reference_update_id: None,
            selected_sensor: unit.selected_sensor,
            flagged: false,
        };
        match unit.source_kind {
            SourceKind::Sensor => {
                history.push(
                    unit.source_id,
                    ProcessedUpdate { id: unit.id, gen_time: unit.gen_time, completion },
                );
            }
            SourceKind::Ue => {
                let sensor =
                    unit.selected_sensor.expect("requests carry their covering sensor");
                match reference_update(history.updates(sensor), unit.gen_time, completion) {
                    Some(r) => {
                        record.aosi = Some(compute_aosi(unit.gen_time, r.gen_time));
                        record.reference_update_id = Some(r.id);
                    }
                    None => {
                        // Virtual time-zero snapshot.
                        record.aosi = Some(unit.gen_time);
                        record.flagged = true;
                    }
                }
            }
        }
        self.records.push(record);
        Ok(self.records.last().expect("just pushed"))
    }

    /// Export: one CSV line per record with a fixed header.
    pub fn export_lines(&self) -> String {
        let mut out = String::from(
            "id,kind,source,gen,tx_start,bs_arrival,proc_start,completion,aori,aosi,reference_update_id,flagged\n",
        );
        for r in &self.records {
            let aosi = r.aosi.map(|v| v.to_string()).unwrap_or_default();
            let rref = r.reference_update_id.map(|v| v.to_string()).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{},{}\n",
                r.id,
                r.source_kind.label(),
                r.source_id,
                r.gen_time,
                r.tx_start,
                r.bs_arrival,
                r.proc_start,
                r.completion,
                r.aori,
                aosi,
                rref,
                r.flagged
            ));
        }
        out
    }
}

/// Mean and sample standard deviation of per-record values; `None` when no
/// record qualifies.
fn mean_sd(values: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    let vals: Vec<f64> = values.collect();
    if vals.is_empty() {
        return None;
    }
    let n = vals.len() as f64;
    let mean = vals.iter().sum::<f64>() / n;
    let sd = if vals.len() > 1 {
        (vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    Some((mean, sd))
}

/// Episode-level aggregates over the ledger.
#[derive(Debug, Clone, PartialEq)]
pub struct ThroughputSummary {
    /// Mbit summed over completed requests.
    pub served_mbit: f64,
    /// Served share of the nominal offered request traffic
    /// `K * p * horizon * mean_size`.
    pub served_fraction: f64,
    /// Over completed requests (flagged included; the end-to-end delay is
    /// unaffected by the snapshot fallback).
    pub aori: Option<(f64, f64)>,
    /// Over completed, unflagged requests.
    pub aosi: Option<(f64, f64)>,
    pub completed_requests: usize,
    pub flagged_requests: usize,
}

/// Aggregate request-side metrics for one episode of `horizon` steps.
pub fn throughput_summary(
    ledger: &Ledger,
    horizon: Step,
    num_ues: usize,
    request_prob: f64,
    mean_request_mbit: f64,
) -> ThroughputSummary {
    assert!(horizon > 0, "horizon must be positive");
    let ue_records: Vec<&CompletionRecord> =
        ledger.records.iter().filter(|r| r.source_kind == SourceKind::Ue).collect();
    let served_mbit: f64 = ue_records.iter().map(|r| r.comm_size).sum();
    let offered = num_ues as f64 * request_prob * horizon as f64 * mean_request_mbit;
    let served_fraction = if offered > 0.0 { served_mbit / offered } else { 0.0 };
    let aori = mean_sd(ue_records.iter().map(|r| r.aori as f64));
    let aosi = mean_sd(
        ue_records
            .iter()
            .filter(|r| !r.flagged)
            .filter_map(|r| r.aosi.map(|v| v as f64)),
    );
    ThroughputSummary {
        served_mbit,
        served_fraction,
        aori,
        aosi,
        completed_requests: ue_records.len(),
        flagged_requests: ue_records.iter().filter(|r| r.flagged).count(),
    }
}
