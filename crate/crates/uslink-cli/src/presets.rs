//! Reproduction presets: ready-made experiment specs for the reference
//! figures, selectable as `reproduce <name>`.

use std::path::PathBuf;

use uslink::prelude::*;

use crate::spec::{ChannelKind, ExperimentKind, ExperimentSpec, RhoPolicy};

pub struct Preset {
    pub name: &'static str,
    pub figure: &'static str,
    pub description: &'static str,
}

pub const PRESETS: [Preset; 5] = [
    Preset {
        name: "fig3",
        figure: "figure 3",
        description: "channel capacity vs splitting ratio, 2-PPM, SNR 6 and 9 dB, \
                      Gaussian and generalized Nakagami channels",
    },
    Preset {
        name: "fig5",
        figure: "figure 5",
        description: "BER vs splitting ratio, 2-PPM and 4-PPM, sigma_e2 0 and 0.001, \
                      SNR 9 dB, Gaussian and generalized Nakagami channels",
    },
    Preset {
        name: "fig6",
        figure: "figure 6",
        description: "BER vs splitting ratio with spreading codes Ns 1 and 2, 2-PPM, \
                      SNR 6 and 9 dB, generalized Nakagami channels",
    },
    Preset {
        name: "fig7",
        figure: "figure 7",
        description: "optimal splitting ratio vs SNR, sigma_e2 0 and 0.0001, Gaussian \
                      and generalized Nakagami channels",
    },
    Preset {
        name: "fig8",
        figure: "figure 8",
        description: "BER vs SNR at the per-point optimal splitting ratio, all four \
                      receivers, sigma_e2 0 and 0.0001, generalized Nakagami channels",
    },
];

/// The resolved spec behind one preset name.
pub fn preset_spec(name: &str) -> Option<ExperimentSpec> {
    let mut spec = match name {
        "fig3" => {
            let mut s = ExperimentSpec::defaults(ExperimentKind::CapacityVsRho);
            s.receivers = vec![ReceiverKind::Sdsd, ReceiverKind::Sdjd];
            s.snr_db = vec![6.0, 9.0];
            s.channels = vec![ChannelKind::Gaussian, ChannelKind::Nakagami];
            s
        }
        "fig5" => {
            let mut s = ExperimentSpec::defaults(ExperimentKind::BerVsRho);
            s.receivers = vec![ReceiverKind::Sdsd, ReceiverKind::Sdjd];
            s.m_orders = vec![2, 4];
            s.snr_db = vec![9.0];
            s.sigma_e2 = vec![0.0, 0.001];
            s.channels = vec![ChannelKind::Gaussian, ChannelKind::Nakagami];
            s
        }
        "fig6" => {
            let mut s = ExperimentSpec::defaults(ExperimentKind::BerVsRho);
            s.receivers = vec![ReceiverKind::Sdsd, ReceiverKind::Sdjd];
            s.ns = vec![1, 2];
            s.snr_db = vec![6.0, 9.0];
            s.channels = vec![ChannelKind::Nakagami];
            s
        }
        "fig7" => {
            let mut s = ExperimentSpec::defaults(ExperimentKind::OptimalRho);
            s.receivers = vec![ReceiverKind::Sdsd, ReceiverKind::Sdjd];
            s.sigma_e2 = vec![0.0, 0.0001];
            s.channels = vec![ChannelKind::Gaussian, ChannelKind::Nakagami];
            s
        }
        "fig8" => {
            let mut s = ExperimentSpec::defaults(ExperimentKind::BerVsSnr);
            s.receivers = vec![
                ReceiverKind::Cd,
                ReceiverKind::Ed,
                ReceiverKind::Sdsd,
                ReceiverKind::Sdjd,
            ];
            s.sigma_e2 = vec![0.0, 0.0001];
            s.channels = vec![ChannelKind::Nakagami];
            s.rho_policy = RhoPolicy::Optimal;
            s
        }
        _ => return None,
    };
    spec.name = format!("reproduce-{name}");
    spec.out = PathBuf::from(format!("{name}.csv"));
    Some(spec)
}

/// Renders the preset table for `list-presets`.
pub fn preset_table() -> String {
    let mut out = String::new();
    out.push_str("available presets:\n");
    for p in &PRESETS {
        let spec = preset_spec(p.name).expect("static preset");
        out.push_str(&format!(
            "  {:5}  reproduces {:9}  {}\n         defaults: receivers={} m_order={} ns={} \
             sigma_e2={} channels={} nakagami=m:{},omega:{},z:{}\n",
            p.name,
            p.figure,
            p.description,
            spec.receivers
                .iter()
                .map(|r| r.name())
                .collect::<Vec<_>>()
                .join(","),
            spec.m_orders
                .iter()
                .map(|m| m.to_string())
                .collect::<Vec<_>>()
                .join(","),
            spec.ns
                .iter()
                .map(|n| n.to_string())
                .collect::<Vec<_>>()
                .join(","),
            spec.sigma_e2
                .iter()
                .map(|s| s.to_string())
                .collect::<Vec<_>>()
                .join(","),
            spec.channels
                .iter()
                .map(|c| c.name())
                .collect::<Vec<_>>()
                .join(","),
            spec.nakagami.0,
            spec.nakagami.1,
            spec.nakagami.2,
        ));
    }
    out
}
