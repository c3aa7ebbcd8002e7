//! The resolved experiment manifest: everything a command is about to do,
//! echoed into the output directory so any run can be reproduced from the
//! files it left behind.

use std::fmt::Write as _;

/// A reward sweep point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub label: char,
    pub eta: f64,
    pub penalty: f64,
}

/// The two-phase default sweep: penalty 0 with the discount stepping
/// 0.9 → 0.4 (labels A–F), then the same discounts with penalty −1
/// (labels G–L).
pub fn default_sweep() -> Vec<SweepPoint> {
    let etas = [0.9, 0.8, 0.7, 0.6, 0.5, 0.4];
    let mut points = Vec::with_capacity(12);
    for (phase, penalty) in [(0usize, 0.0), (1, -1.0)] {
        for (i, &eta) in etas.iter().enumerate() {
            let label = (b'A' + (phase * etas.len() + i) as u8) as char;
            points.push(SweepPoint { label, eta, penalty });
        }
    }
    points
}

/// Parse "eta:penalty,eta:penalty,..." into labeled points (A, B, ... in
/// the order given).
pub fn parse_sweep(spec: &str) -> Result<Vec<SweepPoint>, String> {
    let mut points = Vec::new();
    for (i, part) in spec.split(',').map(str::trim).enumerate() {
        if part.is_empty() {
            return Err(format!("empty sweep entry at position {}", i + 1));
        }
        let (eta_s, pen_s) = part
            .split_once(':')
            .ok_or_else(|| format!("sweep entry `{part}` is not of the form eta:penalty"))?;
        let eta: f64 =
            eta_s.trim().parse().map_err(|_| format!("bad eta in sweep entry `{part}`"))?;
        let penalty: f64 =
            pen_s.trim().parse().map_err(|_| format!("bad penalty in sweep entry `{part}`"))?;
        if !(eta > 0.0 && eta < 1.0) {
            return Err(format!("eta must be in (0, 1), got {eta}"));
        }
        if penalty > 0.0 {
            return Err(format!("penalty must be at most 0, got {penalty}"));
        }
        if i >= 26 {
            return Err("at most 26 sweep points are supported".into());
        }
        points.push(SweepPoint { label: (b'A' + i as u8) as char, eta, penalty });
    }
    if points.is_empty() {
        return Err("sweep must contain at least one point".into());
    }
    Ok(points)
}

/// Flat echo of the resolved run parameters.
#[derive(Debug, Clone)]
pub struct Manifest {
    pub command: &'static str,
    pub config_path: Option<String>,
    pub master_seed: u64,
    pub out_dir: String,
    pub episodes: usize,
    pub horizon: u64,
    pub extras: Vec<(String, String)>,
}

impl Manifest {
    pub fn to_toml(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "command = \"{}\"", self.command);
        match &self.config_path {
            Some(p) => {
                let _ = writeln!(s, "config = \"{p}\"");
            }
            None => {
                let _ = writeln!(s, "config = \"<defaults>\"");
            }
        }
        let _ = writeln!(s, "master_seed = {}", self.master_seed);
        let _ = writeln!(s, "out_dir = \"{}\"", self.out_dir);
        let _ = writeln!(s, "episodes = {}", self.episodes);
        let _ = writeln!(s, "horizon = {}", self.horizon);
        for (k, v) in &self.extras {
            let _ = writeln!(s, "{k} = {v}");
        }
        s
    }
}
