//! Experiment execution and file output.
//!
//! Error-rate runs write one CSV per channel with the fixed schema
//!
//! ```text
//! rho,snr_db,receiver,m_order,ns,sigma_e2,ber_theory,ber_sim,ci95_low,ci95_high,trials,seed
//! ```
//!
//! plus one JSON summary per run carrying the fully resolved spec. Capacity
//! and optimal-ratio runs use their own documented schemas. All numbers are
//! written in shortest-round-trip form, so identical specs and seeds produce
//! byte-identical files.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use uslink::prelude::*;
use uslink::rng::derive_seed;

use crate::spec::{ChannelKind, ExperimentKind, ExperimentSpec, RhoPolicy};

pub const BER_CSV_HEADER: &str =
    "rho,snr_db,receiver,m_order,ns,sigma_e2,ber_theory,ber_sim,ci95_low,ci95_high,trials,seed";
pub const CAPACITY_CSV_HEADER: &str =
    "rho,snr_db,receiver,m_order,channel,capacity,std_err,draws,seed";
pub const OPTIMAL_RHO_CSV_HEADER: &str =
    "snr_db,receiver,channel,sigma_e2,rho_star,rho_star_se,seed";

/// Outcome of one run: written files and any per-point failures.
#[derive(Debug, Serialize)]
pub struct RunReport {
    pub experiment: String,
    pub outputs: Vec<PathBuf>,
    pub summary: PathBuf,
    pub points: usize,
    pub failures: Vec<String>,
}

impl RunReport {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Executes a resolved spec and writes its outputs.
pub fn run_experiment(spec: &ExperimentSpec) -> std::result::Result<RunReport, String> {
    validate_spec(spec)?;
    let mut outputs = Vec::new();
    let mut failures = Vec::new();
    let mut points = 0usize;

    for &channel_kind in &spec.channels {
        let path = channel_path(&spec.out, channel_kind, spec.channels.len() > 1);
        let mut csv = String::new();
        match spec.kind {
            ExperimentKind::BerVsRho => {
                let _ = writeln!(csv, "{BER_CSV_HEADER}");
                run_ber_vs_rho(spec, channel_kind, &mut csv, &mut points, &mut failures)?;
            }
            ExperimentKind::BerVsSnr => {
                let _ = writeln!(csv, "{BER_CSV_HEADER}");
                run_ber_vs_snr(spec, channel_kind, &mut csv, &mut points, &mut failures)?;
            }
            ExperimentKind::CapacityVsRho => {
                let _ = writeln!(csv, "{CAPACITY_CSV_HEADER}");
                run_capacity(spec, channel_kind, &mut csv, &mut points, &mut failures)?;
            }
            ExperimentKind::OptimalRho => {
                let _ = writeln!(csv, "{OPTIMAL_RHO_CSV_HEADER}");
                run_optimal_rho(spec, channel_kind, &mut csv, &mut points, &mut failures)?;
            }
        }
        write_text(&path, &csv)?;
        outputs.push(path);
    }

    let summary = spec.out.with_extension("json");
    let report = RunReport {
        experiment: spec.name.clone(),
        outputs,
        summary: summary.clone(),
        points,
        failures,
    };
    let doc = serde_json::json!({
        "experiment": report.experiment,
        "spec": crate::spec::summary_map(spec),
        "outputs": report.outputs,
        "points": report.points,
        "failures": report.failures,
    });
    write_text(
        &summary,
        &format!("{}\n", serde_json::to_string_pretty(&doc).expect("serializable")),
    )?;
    Ok(report)
}

fn validate_spec(spec: &ExperimentSpec) -> std::result::Result<(), String> {
    if spec.receivers.is_empty() {
        return Err("no receivers selected".to_string());
    }
    if spec.grid.is_empty() {
        return Err("empty grid".to_string());
    }
    if spec.channels.is_empty() {
        return Err("no channels selected".to_string());
    }
    if spec.grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err("grid must be strictly increasing".to_string());
    }
    for &m in &spec.m_orders {
        let params = LinkParams::from_snr_db(m, 9.0).with_c_dim(spec.c_dim);
        let report = params.validate();
        if !report.is_valid() {
            return Err(format!("invalid parameters: {report}"));
        }
    }
    Ok(())
}

/// Per-channel output path: the configured path as-is for single-channel
/// runs, `<stem>_<channel>.<ext>` otherwise (the fixed CSV schema carries no
/// channel column).
fn channel_path(out: &Path, kind: ChannelKind, multi: bool) -> PathBuf {
    if !multi {
        return out.to_path_buf();
    }
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    let ext = out.extension().and_then(|s| s.to_str()).unwrap_or("csv");
    out.with_file_name(format!("{stem}_{}.{ext}", kind.name()))
}

fn write_text(path: &Path, text: &str) -> std::result::Result<(), String> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .map_err(|e| format!("creating {}: {e}", parent.display()))?;
        }
    }
    std::fs::write(path, text).map_err(|e| format!("writing {}: {e}", path.display()))
}

/// Seed for one experimental condition, independent of every other condition.
fn condition_seed(spec: &ExperimentSpec, parts: &[(&str, u64)]) -> u64 {
    let mut seed = spec.seed;
    for (label, bits) in parts {
        seed = derive_seed(seed, label, *bits);
    }
    seed
}

#[allow(clippy::too_many_arguments)]
fn sim_config(
    spec: &ExperimentSpec,
    channel: ChannelModel,
    receiver: ReceiverKind,
    m_order: u32,
    snr_db: f64,
    rho: f64,
    ns: u32,
    sigma_e2: f64,
    seed: u64,
) -> SimConfig {
    let params = LinkParams::from_snr_db(m_order, snr_db)
        .with_rho(rho)
        .with_c_dim(spec.c_dim)
        .with_ns(ns)
        .with_sigma_e2(sigma_e2);
    SimConfig {
        params,
        channel,
        receiver,
        n_symbols: spec.symbols,
        seed,
        workers: spec.workers,
        square_noise_mode: spec.square_noise,
        count_mode: CountMode::SymbolThenConvert,
        normalize_fading: spec.normalize_fading,
    }
}

struct BerRow {
    rho: f64,
    snr_db: f64,
    receiver: ReceiverKind,
    m_order: u32,
    ns: u32,
    sigma_e2: f64,
    theory: BerEstimate,
    sim: BerEstimate,
    seed: u64,
}

fn push_ber_row(csv: &mut String, row: &BerRow) {
    let _ = writeln!(
        csv,
        "{},{},{},{},{},{},{},{},{},{},{},{}",
        row.rho,
        row.snr_db,
        row.receiver,
        row.m_order,
        row.ns,
        row.sigma_e2,
        row.theory.ber,
        row.sim.ber,
        row.sim.ci95_low,
        row.sim.ci95_high,
        row.sim.trials,
        row.seed
    );
}

fn run_ber_vs_rho(
    spec: &ExperimentSpec,
    channel_kind: ChannelKind,
    csv: &mut String,
    points: &mut usize,
    failures: &mut Vec<String>,
) -> std::result::Result<(), String> {
    let channel = spec.channel_model(channel_kind).map_err(|e| e.to_string())?;
    for &receiver in &spec.receivers {
        for &m_order in &spec.m_orders {
            for &ns in &spec.ns {
                for &sigma_e2 in &spec.sigma_e2 {
                    for &snr_db in &spec.snr_db {
                        let seed = condition_seed(
                            spec,
                            &[
                                ("channel", channel_kind as u64),
                                ("receiver", receiver as u64),
                                ("m", m_order as u64),
                                ("ns", ns as u64),
                                ("sigma_e2", sigma_e2.to_bits()),
                                ("snr", snr_db.to_bits()),
                            ],
                        );
                        let cfg = sim_config(
                            spec, channel, receiver, m_order, snr_db, spec.rho, ns, sigma_e2,
                            seed,
                        );
                        let results = sweep(
                            SweepAxis::Rho,
                            &spec.grid,
                            &cfg,
                            &SweepOptions {
                                theory_draws: spec.theory_draws,
                            },
                        )
                        .map_err(|e| e.to_string())?;
                        for (value, outcome) in spec.grid.iter().zip(results) {
                            *points += 1;
                            match outcome {
                                Ok(point) => push_ber_row(
                                    csv,
                                    &BerRow {
                                        rho: point.value,
                                        snr_db,
                                        receiver,
                                        m_order,
                                        ns,
                                        sigma_e2,
                                        theory: point.theory,
                                        sim: point.sim,
                                        seed: point.seed,
                                    },
                                ),
                                Err(e) => failures.push(format!(
                                    "{} {receiver} M={m_order} ns={ns} sigma_e2={sigma_e2} \
                                     snr={snr_db} rho={value}: {e}",
                                    channel_kind.name()
                                )),
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(())
}

fn run_ber_vs_snr(
    spec: &ExperimentSpec,
    channel_kind: ChannelKind,
    csv: &mut String,
    points: &mut usize,
    failures: &mut Vec<String>,
) -> std::result::Result<(), String> {
    let channel = spec.channel_model(channel_kind).map_err(|e| e.to_string())?;
    for &receiver in &spec.receivers {
        for &m_order in &spec.m_orders {
            for &ns in &spec.ns {
                for &sigma_e2 in &spec.sigma_e2 {
                    let cond_seed = condition_seed(
                        spec,
                        &[
                            ("channel", channel_kind as u64),
                            ("receiver", receiver as u64),
                            ("m", m_order as u64),
                            ("ns", ns as u64),
                            ("sigma_e2", sigma_e2.to_bits()),
                        ],
                    );
                    for &snr_db in &spec.grid {
                        *points += 1;
                        let point_seed = derive_seed(cond_seed, "snr_db", snr_db.to_bits());
                        let rho = match (spec.rho_policy, receiver) {
                            (RhoPolicy::Optimal, ReceiverKind::Sdsd | ReceiverKind::Sdjd) => {
                                let gamma = 10f64.powf(snr_db / 10.0);
                                match average_optimal_rho(
                                    receiver,
                                    gamma,
                                    spec.c_dim,
                                    &channel,
                                    sigma_e2,
                                    spec.normalize_fading,
                                    spec.theory_draws,
                                    derive_seed(point_seed, "rho_star", 0),
                                ) {
                                    Ok((mean, _)) => mean,
                                    Err(e) => {
                                        failures.push(format!(
                                            "{} {receiver} snr={snr_db}: rho*: {e}",
                                            channel_kind.name()
                                        ));
                                        continue;
                                    }
                                }
                            }
                            _ => spec.rho,
                        };
                        let cfg = sim_config(
                            spec, channel, receiver, m_order, snr_db, rho, ns, sigma_e2,
                            point_seed,
                        );
                        let outcome = simulate_ber(&cfg)
                            .and_then(|sim| Ok((sim, theory_estimate(&cfg, spec.theory_draws)?)));
                        match outcome {
                            Ok((sim, theory)) => push_ber_row(
                                csv,
                                &BerRow {
                                    rho,
                                    snr_db,
                                    receiver,
                                    m_order,
                                    ns,
                                    sigma_e2,
                                    theory,
                                    sim,
                                    seed: point_seed,
                                },
                            ),
                            Err(e) => failures.push(format!(
                                "{} {receiver} M={m_order} ns={ns} sigma_e2={sigma_e2} \
                                 snr={snr_db}: {e}",
                                channel_kind.name()
                            )),
                        }
                    }
                }
            }
        }
    }
    Ok(())
}

fn run_capacity(
    spec: &ExperimentSpec,
    channel_kind: ChannelKind,
    csv: &mut String,
    points: &mut usize,
    failures: &mut Vec<String>,
) -> std::result::Result<(), String> {
    let model = spec.channel_model(channel_kind).map_err(|e| e.to_string())?;
    for &receiver in &spec.receivers {
        for &m_order in &spec.m_orders {
            for &snr_db in &spec.snr_db {
                let cond_seed = condition_seed(
                    spec,
                    &[
                        ("channel", channel_kind as u64),
                        ("receiver", receiver as u64),
                        ("m", m_order as u64),
                        ("snr", snr_db.to_bits()),
                    ],
                );
                let ep = 10f64.powf(snr_db / 10.0);
                for &rho in &spec.grid {
                    *points += 1;
                    let seed = derive_seed(cond_seed, "rho", rho.to_bits());
                    let query = CapacityQuery {
                        receiver,
                        rho,
                        c_dim: spec.c_dim,
                        m_order,
                        draws: spec.capacity_draws,
                        seed,
                    };
                    let setting = match channel_kind {
                        ChannelKind::Gaussian => CapacityChannel::Conditioned { gamma: ep, h: 1.0 },
                        ChannelKind::Nakagami => CapacityChannel::Faded {
                            channel: model,
                            ep,
                            n0: 1.0,
                            normalize: spec.normalize_fading,
                        },
                    };
                    match capacity(&query, &setting) {
                        Ok(est) => {
                            let _ = writeln!(
                                csv,
                                "{},{},{},{},{},{},{},{},{}",
                                rho,
                                snr_db,
                                receiver,
                                m_order,
                                channel_kind.name(),
                                est.bits,
                                est.std_err,
                                est.draws,
                                seed
                            );
                        }
                        Err(e) => failures.push(format!(
                            "{} {receiver} M={m_order} snr={snr_db} rho={rho}: {e}",
                            channel_kind.name()
                        )),
                    }
                }
            }
        }
    }
    Ok(())
}

fn run_optimal_rho(
    spec: &ExperimentSpec,
    channel_kind: ChannelKind,
    csv: &mut String,
    points: &mut usize,
    failures: &mut Vec<String>,
) -> std::result::Result<(), String> {
    let model = spec.channel_model(channel_kind).map_err(|e| e.to_string())?;
    for &receiver in &spec.receivers {
        for &sigma_e2 in &spec.sigma_e2 {
            for &snr_db in &spec.grid {
                *points += 1;
                let seed = condition_seed(
                    spec,
                    &[
                        ("channel", channel_kind as u64),
                        ("receiver", receiver as u64),
                        ("sigma_e2", sigma_e2.to_bits()),
                        ("snr_db", snr_db.to_bits()),
                    ],
                );
                let gamma = 10f64.powf(snr_db / 10.0);
                match average_optimal_rho(
                    receiver,
                    gamma,
                    spec.c_dim,
                    &model,
                    sigma_e2,
                    spec.normalize_fading,
                    spec.theory_draws,
                    seed,
                ) {
                    Ok((mean, se)) => {
                        let _ = writeln!(
                            csv,
                            "{},{},{},{},{},{},{}",
                            snr_db,
                            receiver,
                            channel_kind.name(),
                            sigma_e2,
                            mean,
                            se,
                            seed
                        );
                    }
                    Err(e) => failures.push(format!(
                        "{} {receiver} sigma_e2={sigma_e2} snr={snr_db}: {e}",
                        channel_kind.name()
                    )),
                }
            }
        }
    }
    Ok(())
}
