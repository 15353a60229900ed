//! Experiment specification: resolved parameters for one run, a flat
//! key-value config format, and grid parsing.
//!
//! Resolution order is defaults < config file < command-line flags. A spec
//! round-trips losslessly through the key-value format (floats are written
//! in shortest-round-trip form).

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use serde::Serialize;
use uslink::prelude::*;

/// What a run computes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ExperimentKind {
    BerVsRho,
    BerVsSnr,
    CapacityVsRho,
    OptimalRho,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::BerVsRho => "ber-vs-rho",
            ExperimentKind::BerVsSnr => "ber-vs-snr",
            ExperimentKind::CapacityVsRho => "capacity-vs-rho",
            ExperimentKind::OptimalRho => "optimal-rho",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "ber-vs-rho" => Some(ExperimentKind::BerVsRho),
            "ber-vs-snr" => Some(ExperimentKind::BerVsSnr),
            "capacity-vs-rho" => Some(ExperimentKind::CapacityVsRho),
            "optimal-rho" => Some(ExperimentKind::OptimalRho),
            _ => None,
        }
    }
}

/// Channel selector (the Nakagami parameters live in the experiment spec).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ChannelKind {
    Gaussian,
    Nakagami,
}

impl ChannelKind {
    pub fn name(&self) -> &'static str {
        match self {
            ChannelKind::Gaussian => "gaussian",
            ChannelKind::Nakagami => "nakagami",
        }
    }
}

/// How the splitting ratio is chosen along an SNR sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RhoPolicy {
    /// Use the configured splitting ratio everywhere.
    Fixed,
    /// Re-derive the error-minimizing ratio at every SNR point (averaged
    /// over the channel estimate for fading channels); single-branch
    /// receivers keep their forced ratio.
    Optimal,
}

impl RhoPolicy {
    pub fn name(&self) -> &'static str {
        match self {
            RhoPolicy::Fixed => "fixed",
            RhoPolicy::Optimal => "optimal",
        }
    }
}

/// Fully resolved experiment description.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentSpec {
    pub name: String,
    pub kind: ExperimentKind,
    pub receivers: Vec<ReceiverKind>,
    pub m_orders: Vec<u32>,
    /// Sweep grid: rho values for rho-axis runs, dB values for SNR-axis runs.
    pub grid: Vec<f64>,
    /// Fixed nominal SNRs (dB) for rho-axis experiments.
    pub snr_db: Vec<f64>,
    /// Fixed splitting ratio for SNR-axis experiments.
    pub rho: f64,
    pub rho_policy: RhoPolicy,
    pub c_dim: f64,
    pub ns: Vec<u32>,
    pub sigma_e2: Vec<f64>,
    pub channels: Vec<ChannelKind>,
    /// Generalized Nakagami (m, Omega, z).
    pub nakagami: (f64, f64, f64),
    pub normalize_fading: bool,
    pub symbols: u64,
    pub theory_draws: u64,
    pub capacity_draws: u64,
    pub seed: u64,
    pub workers: usize,
    pub square_noise: SquareNoiseMode,
    pub out: PathBuf,
}

impl ExperimentSpec {
    /// Defaults for a given experiment kind.
    pub fn defaults(kind: ExperimentKind) -> Self {
        let grid = match kind {
            ExperimentKind::BerVsRho | ExperimentKind::CapacityVsRho => {
                parse_grid("0:0.01:1").expect("static grid")
            }
            ExperimentKind::BerVsSnr | ExperimentKind::OptimalRho => {
                parse_grid("0:1:15").expect("static grid")
            }
        };
        ExperimentSpec {
            name: kind.name().to_string(),
            kind,
            receivers: vec![ReceiverKind::Sdsd, ReceiverKind::Sdjd],
            m_orders: vec![2],
            grid,
            snr_db: vec![9.0],
            rho: 0.5,
            rho_policy: RhoPolicy::Fixed,
            c_dim: 50.0,
            ns: vec![1],
            sigma_e2: vec![0.0],
            channels: vec![ChannelKind::Gaussian],
            nakagami: (1.12, 0.05, 0.59),
            normalize_fading: false,
            symbols: 1_000_000,
            theory_draws: 100_000,
            capacity_draws: 100_000,
            seed: 1,
            workers: default_workers(),
            square_noise: SquareNoiseMode::GaussianApprox,
            out: PathBuf::from(format!("{}.csv", kind.name())),
        }
    }

    /// Builds the channel model for a selector.
    pub fn channel_model(&self, kind: ChannelKind) -> Result<ChannelModel> {
        match kind {
            ChannelKind::Gaussian => Ok(ChannelModel::Gaussian),
            ChannelKind::Nakagami => {
                let (m, omega, z) = self.nakagami;
                ChannelModel::generalized_nakagami(m, omega, z)
            }
        }
    }

    /// Serializes to the flat key-value config format.
    pub fn to_kv(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "name = {}", self.name);
        let _ = writeln!(s, "kind = {}", self.kind.name());
        let _ = writeln!(s, "receivers = {}", join(self.receivers.iter().map(|r| r.name())));
        let _ = writeln!(s, "m_order = {}", join(self.m_orders.iter()));
        let _ = writeln!(s, "grid = {}", join(self.grid.iter()));
        let _ = writeln!(s, "snr_db = {}", join(self.snr_db.iter()));
        let _ = writeln!(s, "rho = {}", self.rho);
        let _ = writeln!(s, "rho_policy = {}", self.rho_policy.name());
        let _ = writeln!(s, "c_dim = {}", self.c_dim);
        let _ = writeln!(s, "ns = {}", join(self.ns.iter()));
        let _ = writeln!(s, "sigma_e2 = {}", join(self.sigma_e2.iter()));
        let _ = writeln!(s, "channel = {}", join(self.channels.iter().map(|c| c.name())));
        let _ = writeln!(
            s,
            "nakagami = {},{},{}",
            self.nakagami.0, self.nakagami.1, self.nakagami.2
        );
        let _ = writeln!(s, "normalize_fading = {}", self.normalize_fading);
        let _ = writeln!(s, "symbols = {}", self.symbols);
        let _ = writeln!(s, "theory_draws = {}", self.theory_draws);
        let _ = writeln!(s, "capacity_draws = {}", self.capacity_draws);
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "workers = {}", self.workers);
        let _ = writeln!(s, "square_noise = {}", self.square_noise.name());
        let _ = writeln!(s, "out = {}", self.out.display());
        s
    }

    /// Applies `key = value` lines on top of the current spec. Unknown keys
    /// are errors; `#` starts a comment.
    pub fn apply_kv(&mut self, text: &str) -> std::result::Result<(), String> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected `key = value`", lineno + 1))?;
            self.apply_pair(key.trim(), value.trim())
                .map_err(|e| format!("line {}: {}", lineno + 1, e))?;
        }
        Ok(())
    }

    pub fn apply_pair(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        match key {
            "name" => self.name = value.to_string(),
            "kind" => {
                self.kind = ExperimentKind::from_name(value)
                    .ok_or_else(|| format!("unknown experiment kind `{value}`"))?
            }
            "receivers" | "receiver" => {
                self.receivers = split_list(value)
                    .map(|r| r.parse::<ReceiverKind>().map_err(|e| e.to_string()))
                    .collect::<std::result::Result<_, _>>()?;
            }
            "m_order" => {
                self.m_orders = split_list(value)
                    .map(|v| v.parse::<u32>().map_err(|e| format!("m_order: {e}")))
                    .collect::<std::result::Result<_, _>>()?;
            }
            "grid" => self.grid = parse_grid(value)?,
            "snr_db" => self.snr_db = parse_grid(value)?,
            "rho" => self.rho = parse_f64(value)?,
            "rho_policy" => {
                self.rho_policy = match value {
                    "fixed" => RhoPolicy::Fixed,
                    "optimal" => RhoPolicy::Optimal,
                    other => return Err(format!("unknown rho policy `{other}`")),
                }
            }
            "c_dim" => self.c_dim = parse_f64(value)?,
            "ns" => {
                self.ns = split_list(value)
                    .map(|v| v.parse::<u32>().map_err(|e| format!("ns: {e}")))
                    .collect::<std::result::Result<_, _>>()?;
            }
            "sigma_e2" => {
                self.sigma_e2 = split_list(value)
                    .map(parse_f64)
                    .collect::<std::result::Result<_, _>>()?;
            }
            "channel" => {
                self.channels = split_list(value)
                    .map(|c| match c {
                        "gaussian" => Ok(ChannelKind::Gaussian),
                        "nakagami" => Ok(ChannelKind::Nakagami),
                        other => Err(format!("unknown channel `{other}`")),
                    })
                    .collect::<std::result::Result<_, _>>()?;
            }
            "nakagami" => {
                let parts: Vec<&str> = split_list(value).collect();
                if parts.len() != 3 {
                    return Err("nakagami needs `m,omega,z`".to_string());
                }
                self.nakagami = (
                    parse_f64(parts[0])?,
                    parse_f64(parts[1])?,
                    parse_f64(parts[2])?,
                );
            }
            "normalize_fading" => {
                self.normalize_fading = value
                    .parse::<bool>()
                    .map_err(|_| format!("normalize_fading: expected true/false, got `{value}`"))?
            }
            "symbols" => self.symbols = parse_u64(value)?,
            "theory_draws" => self.theory_draws = parse_u64(value)?,
            "capacity_draws" => self.capacity_draws = parse_u64(value)?,
            "seed" => self.seed = parse_u64(value)?,
            "workers" => {
                self.workers = value
                    .parse::<usize>()
                    .map_err(|e| format!("workers: {e}"))?
            }
            "square_noise" => {
                self.square_noise = value
                    .parse::<SquareNoiseMode>()
                    .map_err(|e| e.to_string())?
            }
            "out" => self.out = PathBuf::from(value),
            other => return Err(format!("unknown key `{other}`")),
        }
        Ok(())
    }
}

fn default_workers() -> usize {
    std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
}

fn join<T: std::fmt::Display>(items: impl Iterator<Item = T>) -> String {
    items
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn split_list(value: &str) -> impl Iterator<Item = &str> {
    value.split(',').map(str::trim).filter(|v| !v.is_empty())
}

fn parse_f64(value: &str) -> std::result::Result<f64, String> {
    value
        .parse::<f64>()
        .map_err(|e| format!("`{value}`: {e}"))
}

fn parse_u64(value: &str) -> std::result::Result<u64, String> {
    value
        .parse::<u64>()
        .map_err(|e| format!("`{value}`: {e}"))
}

/// Parses a grid: either `start:step:stop` (inclusive, in step units) or a
/// comma-separated list of values.
pub fn parse_grid(value: &str) -> std::result::Result<Vec<f64>, String> {
    if value.contains(':') {
        let parts: Vec<&str> = value.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("grid `{value}`: expected start:step:stop"));
        }
        let start = parse_f64(parts[0])?;
        let step = parse_f64(parts[1])?;
        let stop = parse_f64(parts[2])?;
        if step.is_nan() || step <= 0.0 {
            return Err(format!("grid `{value}`: step must be > 0"));
        }
        if stop < start {
            return Err(format!("grid `{value}`: stop < start"));
        }
        let n = ((stop - start) / step).round() as usize;
        let mut grid: Vec<f64> = (0..=n).map(|i| start + i as f64 * step).collect();
        if let Some(last) = grid.last_mut() {
            if (*last - stop).abs() < step * 1e-9 {
                *last = stop;
            }
        }
        grid.retain(|&v| v <= stop + step * 1e-9);
        Ok(grid)
    } else {
        let grid: Vec<f64> = split_list(value)
            .map(parse_f64)
            .collect::<std::result::Result<_, _>>()?;
        if grid.is_empty() {
            return Err("empty grid".to_string());
        }
        Ok(grid)
    }
}

/// One map of resolved spec fields for the JSON summary (stable ordering).
pub fn summary_map(spec: &ExperimentSpec) -> BTreeMap<String, serde_json::Value> {
    let mut map = BTreeMap::new();
    let kv = spec.to_kv();
    for line in kv.lines() {
        if let Some((k, v)) = line.split_once('=') {
            map.insert(
                k.trim().to_string(),
                serde_json::Value::String(v.trim().to_string()),
            );
        }
    }
    map
}
