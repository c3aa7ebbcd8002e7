//! Uplink link budgets and per-class bandwidth sharing.
//!
//! Deterministic log-distance pathloss and Shannon capacity over the
//! allocated band; no fading or shadowing, so rates are a pure function of
//! positions and the split. The device share of the band goes equally to
//! devices with backlog; a class with nothing to send leaves its share
//! unused rather than donating it to the other class, which keeps the
//! split's meaning exact.

use crate::config::SimConfig;
use crate::traffic::{Point, SourceKind};

/// One link's derived quantities for a step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    pub distance_m: f64,
    pub pathloss_db: f64,
    pub rx_power_dbm: f64,
    /// Noise power over the allocated band.
    pub noise_power_dbm: f64,
    pub snr_linear: f64,
    pub rate_mbps: f64,
}

/// Log-distance pathloss: `reference_loss + 10 * exponent * log10(d)`,
/// with the distance clamped to 1 m below.
pub fn path_loss_db(distance_m: f64, reference_loss_db: f64, pathloss_exponent: f64) -> f64 {
    let d = distance_m.max(1.0);
    reference_loss_db + 10.0 * pathloss_exponent * d.log10()
}

/// Shannon rate over an allocated band, in Mbit/s. Zero bandwidth carries
/// nothing.
pub fn data_rate_mbps(
    bandwidth_mhz: f64,
    pathloss_db: f64,
    tx_power_dbm: f64,
    noise_dbm_hz: f64,
) -> f64 {
    if bandwidth_mhz <= 0.0 {
        return 0.0;
    }
    let noise_power_dbm = noise_dbm_hz + 10.0 * (bandwidth_mhz * 1e6).log10();
    let snr_db = tx_power_dbm - pathloss_db - noise_power_dbm;
    let snr = 10f64.powf(snr_db / 10.0);
    bandwidth_mhz * (1.0 + snr).log2()
}

/// Slant distance between a device and the base station, accounting for
/// antenna heights.
pub fn link_distance_m(device: Point, cfg: &SimConfig) -> f64 {
    let (bx, by) = cfg.bs_position();
    let horiz = device.distance(Point::new(bx, by));
    let dh = cfg.bs_height_m - cfg.device_height_m;
    (horiz * horiz + dh * dh).sqrt()
}

/// Full link budget for a device at `position` given its allocated band.
pub fn link_budget(position: Point, bandwidth_mhz: f64, cfg: &SimConfig) -> LinkBudget {
    let distance_m = link_distance_m(position, cfg);
    let pathloss_db = path_loss_db(distance_m, cfg.reference_loss_db, cfg.pathloss_exponent);
    let rx_power_dbm = cfg.tx_power_dbm - pathloss_db;
    let noise_power_dbm = if bandwidth_mhz > 0.0 {
        cfg.noise_dbm_hz + 10.0 * (bandwidth_mhz * 1e6).log10()
    } else {
        f64::NEG_INFINITY
    };
    let snr_linear = if bandwidth_mhz > 0.0 {
        10f64.powf((rx_power_dbm - noise_power_dbm) / 10.0)
    } else {
        0.0
    };
    let rate_mbps = data_rate_mbps(bandwidth_mhz, pathloss_db, cfg.tx_power_dbm, cfg.noise_dbm_hz);
    LinkBudget { distance_m, pathloss_db, rx_power_dbm, noise_power_dbm, snr_linear, rate_mbps }
}

/// Per-step bandwidth shares. The device fraction of the total band is
/// split equally among backlogged devices of that class; the complement
/// goes to the other class the same way.
#[derive(Debug, Clone, PartialEq)]
pub struct BandwidthAllocation {
    /// Fraction of the band assigned to the request class.
    pub ue_fraction: f64,
    pub total_mhz: f64,
    pub active_ues: Vec<usize>,
    pub active_sensors: Vec<usize>,
    pub per_ue_mhz: f64,
    pub per_sensor_mhz: f64,
}

/// Split the band between the two classes and equally within each class.
/// `active_*` must list the devices with non-empty communication queues.
pub fn allocate_bandwidth(
    rho_c: f64,
    total_mhz: f64,
    active_ues: Vec<usize>,
    active_sensors: Vec<usize>,
) -> BandwidthAllocation {
    let rho_c = rho_c.clamp(0.0, 1.0);
    let ue_share = rho_c * total_mhz;
    let sensor_share = (1.0 - rho_c) * total_mhz;
    let per_ue_mhz =
        if active_ues.is_empty() { 0.0 } else { ue_share / active_ues.len() as f64 };
    let per_sensor_mhz =
        if active_sensors.is_empty() { 0.0 } else { sensor_share / active_sensors.len() as f64 };
    BandwidthAllocation {
        ue_fraction: rho_c,
        total_mhz,
        active_ues,
        active_sensors,
        per_ue_mhz,
        per_sensor_mhz,
    }
}

impl BandwidthAllocation {
    pub fn bandwidth_for(&self, kind: SourceKind, device_id: usize) -> f64 {
        match kind {
            SourceKind::Ue if self.active_ues.contains(&device_id) => self.per_ue_mhz,
            SourceKind::Sensor if self.active_sensors.contains(&device_id) => self.per_sensor_mhz,
            _ => 0.0,
        }
    }

    pub fn total_allocated_mhz(&self) -> f64 {
        self.per_ue_mhz * self.active_ues.len() as f64
            + self.per_sensor_mhz * self.active_sensors.len() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn reference_loss_at_one_meter() {
        assert_eq!(path_loss_db(1.0, 43.3, 3.0), 43.3);
        // Distances below 1 m clamp to the reference point.
        assert_eq!(path_loss_db(0.2, 43.3, 3.0), 43.3);
    }

    #[test]
    fn decade_law() {
        let a = path_loss_db(10.0, 43.3, 3.0);
        let b = path_loss_db(100.0, 43.3, 3.0);
        assert_relative_eq!(b - a, 30.0, max_relative = 1e-12);
    }

    #[test]
    fn pathloss_at_250_meters() {
        // 43.3 + 30 * log10(250)
        assert_relative_eq!(
            path_loss_db(250.0, 43.3, 3.0),
            115.23820026016113,
            max_relative = 1e-12
        );
    }

    #[test]
    fn zero_bandwidth_carries_nothing() {
        assert_eq!(data_rate_mbps(0.0, 100.0, 40.0, -174.0), 0.0);
    }

    #[test]
    fn unit_snr_rate_equals_bandwidth() {
        // Force SNR = 1 (0 dB): tx - pl = noise power over the band.
        let bw = 10.0;
        let noise_power = -174.0 + 10.0 * (bw * 1e6f64).log10();
        let rate = data_rate_mbps(bw, 40.0 - noise_power, 40.0, -174.0);
        assert_relative_eq!(rate, bw, max_relative = 1e-12);
    }

    #[test]
    fn worked_link_budget() {
        // 10 MHz at 115.2 dB pathloss, 40 dBm tx, -174 dBm/Hz noise:
        // SNR = 10^2.88, rate = 10 * log2(1 + 758.6) Mbit/s.
        let rate = data_rate_mbps(10.0, 115.2, 40.0, -174.0);
        assert_relative_eq!(rate, 95.693, max_relative = 1e-4);
    }

    #[test]
    fn rate_monotone_in_bandwidth() {
        let mut prev = 0.0;
        for i in 1..=200 {
            let bw = i as f64 * 0.5;
            let r = data_rate_mbps(bw, 115.2, 40.0, -174.0);
            assert!(r > prev, "rate must grow with bandwidth: {bw} MHz -> {r}");
            prev = r;
        }
    }

    #[test]
    fn pathloss_increases_with_distance() {
        let mut prev = f64::NEG_INFINITY;
        for d in [1.0, 5.0, 20.0, 100.0, 353.0] {
            let pl = path_loss_db(d, 43.3, 3.0);
            assert!(pl > prev);
            prev = pl;
        }
    }

    #[test]
    fn single_active_ue_gets_the_whole_band() {
        let alloc = allocate_bandwidth(1.0, 100.0, vec![3], vec![]);
        assert_eq!(alloc.bandwidth_for(SourceKind::Ue, 3), 100.0);
        assert_eq!(alloc.bandwidth_for(SourceKind::Ue, 4), 0.0);
    }

    #[test]
    fn equal_split_within_classes() {
        let alloc = allocate_bandwidth(0.5, 100.0, vec![0, 1], vec![0, 1, 2, 3]);
        assert_eq!(alloc.per_ue_mhz, 25.0);
        assert_eq!(alloc.per_sensor_mhz, 12.5);
    }

    #[test]
    fn idle_class_share_is_not_redistributed() {
        let alloc = allocate_bandwidth(0.3, 100.0, vec![], vec![0, 1, 2]);
        assert_eq!(alloc.per_ue_mhz, 0.0);
        assert_relative_eq!(alloc.per_sensor_mhz, 70.0 / 3.0, max_relative = 1e-12);
        assert_relative_eq!(alloc.total_allocated_mhz(), 70.0, max_relative = 1e-12);
    }

    #[test]
    fn allocation_never_exceeds_the_band() {
        for i in 0..=10 {
            let rho = i as f64 / 10.0;
            for (nu, ns) in [(0, 0), (1, 0), (0, 4), (3, 5), (10, 15)] {
                let alloc = allocate_bandwidth(
                    rho,
                    100.0,
                    (0..nu).collect(),
                    (0..ns).collect(),
                );
                assert!(alloc.total_allocated_mhz() <= 100.0 + 1e-9);
            }
        }
    }
}
