//! Decision rules for the four receiver architectures, plus soft de-spread
//! combining across spreading chips.
//!
//! The separate-decision receiver resolves the 2xM decision matrix against
//! the estimated gains `s1 = h_bar sqrt(rho) Ep`, `s2 = (1-rho) h_bar^2 Ep`
//! by minimizing `||Y - S X_i||^2` over position hypotheses. Expanding the
//! norm, only the inner product `s1 y1[i] + s2 y2[i]` varies across `i`, so
//! the rule is implemented as an argmax of that inner product (one
//! multiply-add per position). The joint-decision receiver simply sums the
//! branches per position and takes the maximum; no channel estimate enters.
//!
//! Ties break toward the lowest index everywhere: deterministic, and a
//! measure-zero event under continuous noise.

use crate::error::{Error, Result};
use crate::modem::ChipObservation;
use crate::params::{LinkParams, ReceiverKind};

/// Outcome of one chip (or one de-spread bit) decision.
#[derive(Debug, Clone, PartialEq)]
pub struct Decision {
    /// Decided position index (argmax of `metric`, lowest index on ties).
    pub index_hat: u32,
    /// Per-position decision statistic.
    pub metric: Vec<f64>,
}

fn argmax_lowest(metric: &[f64]) -> u32 {
    let mut best = 0usize;
    for (i, &v) in metric.iter().enumerate().skip(1) {
        if v > metric[best] {
            best = i;
        }
    }
    best as u32
}

fn decide_by_metric(metric: Vec<f64>) -> Decision {
    Decision {
        index_hat: argmax_lowest(&metric),
        metric,
    }
}

/// Coherent decision: argmax of the matched-filter branch.
pub fn decide_cd(obs: &ChipObservation) -> Decision {
    decide_by_metric(obs.y1.clone())
}

/// Energy decision: argmax of the square-law branch.
pub fn decide_ed(obs: &ChipObservation) -> Decision {
    decide_by_metric(obs.y2.clone())
}

/// Separate decision against the estimated gains (inner-product form of the
/// minimum-distance rule). With `h_bar = 0` the metric is identically zero
/// and the tie rule returns position 0; with `h_bar < 0` the weights flip
/// sign, exactly as the matrix rule would.
pub fn decide_sdsd(obs: &ChipObservation, p: &LinkParams) -> Decision {
    let (s1, s2) = sdsd_gains(obs, p);
    let metric = obs
        .y1
        .iter()
        .zip(&obs.y2)
        .map(|(&a, &b)| s1 * a + s2 * b)
        .collect();
    decide_by_metric(metric)
}

/// Estimated-gain pair used by the separate-decision rule.
pub fn sdsd_gains(obs: &ChipObservation, p: &LinkParams) -> (f64, f64) {
    let hb = obs.draw.h_bar;
    (
        hb * p.rho.sqrt() * p.ep,
        (1.0 - p.rho) * hb * hb * p.ep,
    )
}

/// Joint decision: per-position sum of both branches into a max selector.
pub fn decide_sdjd(obs: &ChipObservation) -> Decision {
    let metric = obs
        .y1
        .iter()
        .zip(&obs.y2)
        .map(|(&a, &b)| a + b)
        .collect();
    decide_by_metric(metric)
}

/// Dispatches to the configured receiver's rule.
pub fn decide(kind: ReceiverKind, obs: &ChipObservation, p: &LinkParams) -> Decision {
    match kind {
        ReceiverKind::Cd => decide_cd(obs),
        ReceiverKind::Ed => decide_ed(obs),
        ReceiverKind::Sdsd => decide_sdsd(obs, p),
        ReceiverKind::Sdjd => decide_sdjd(obs),
    }
}

/// Allocation-free decision used by the simulation hot loop; same rules as
/// [`decide`].
pub(crate) fn decide_index(kind: ReceiverKind, obs: &ChipObservation, p: &LinkParams) -> u32 {
    let m = obs.y1.len();
    let mut best = 0usize;
    let mut best_v = f64::NEG_INFINITY;
    match kind {
        ReceiverKind::Cd => {
            for i in 0..m {
                if obs.y1[i] > best_v {
                    best_v = obs.y1[i];
                    best = i;
                }
            }
        }
        ReceiverKind::Ed => {
            for i in 0..m {
                if obs.y2[i] > best_v {
                    best_v = obs.y2[i];
                    best = i;
                }
            }
        }
        ReceiverKind::Sdjd => {
            for i in 0..m {
                let v = obs.y1[i] + obs.y2[i];
                if v > best_v {
                    best_v = v;
                    best = i;
                }
            }
        }
        ReceiverKind::Sdsd => {
            let (s1, s2) = sdsd_gains(obs, p);
            for i in 0..m {
                let v = s1 * obs.y1[i] + s2 * obs.y2[i];
                if v > best_v {
                    best_v = v;
                    best = i;
                }
            }
        }
    }
    best as u32
}

/// Allocation-free de-spread decision for the hot loop; preconditions (2-PPM,
/// matching lengths) are the caller's.
pub(crate) fn despread_index(
    obs_list: &[ChipObservation],
    code: &[u8],
    kind: ReceiverKind,
    p: &LinkParams,
) -> u32 {
    let mut combined = [0.0f64; 2];
    for (obs, &c) in obs_list.iter().zip(code) {
        let metric_at = |pos: usize| -> f64 {
            match kind {
                ReceiverKind::Cd => obs.y1[pos],
                ReceiverKind::Ed => obs.y2[pos],
                ReceiverKind::Sdjd => obs.y1[pos] + obs.y2[pos],
                ReceiverKind::Sdsd => {
                    let (s1, s2) = sdsd_gains(obs, p);
                    s1 * obs.y1[pos] + s2 * obs.y2[pos]
                }
            }
        };
        for (bit, acc) in combined.iter_mut().enumerate() {
            *acc += metric_at((bit as u8 ^ c ^ 1) as usize);
        }
    }
    u32::from(combined[1] > combined[0])
}

fn chip_metric(kind: ReceiverKind, obs: &ChipObservation, p: &LinkParams) -> Vec<f64> {
    match kind {
        ReceiverKind::Cd => obs.y1.clone(),
        ReceiverKind::Ed => obs.y2.clone(),
        ReceiverKind::Sdjd => obs.y1.iter().zip(&obs.y2).map(|(&a, &b)| a + b).collect(),
        ReceiverKind::Sdsd => {
            let (s1, s2) = sdsd_gains(obs, p);
            obs.y1
                .iter()
                .zip(&obs.y2)
                .map(|(&a, &b)| s1 * a + s2 * b)
                .collect()
        }
    }
}

/// De-spread soft combining for one spread bit (2-PPM): the linear per-chip
/// metrics are aligned with the code (chip `i` of bit hypothesis `b` sits at
/// position `b XNOR code[i]`) and summed before the argmax. With `N_s = 1`
/// this is the single-chip rule.
pub fn decide_spread(
    obs_list: &[ChipObservation],
    code: &[u8],
    kind: ReceiverKind,
    p: &LinkParams,
) -> Result<Decision> {
    if obs_list.len() != code.len() {
        return Err(Error::domain(format!(
            "decide_spread: {} chips for a code of length {}",
            obs_list.len(),
            code.len()
        )));
    }
    if obs_list.is_empty() {
        return Err(Error::domain("decide_spread: no chips"));
    }
    if obs_list.iter().any(|o| o.m_order() != 2) {
        return Err(Error::unsupported(
            "decide_spread: spreading codes are defined for 2-PPM only",
        ));
    }
    let mut combined = [0.0f64; 2];
    for (obs, &c) in obs_list.iter().zip(code) {
        let m = chip_metric(kind, obs, p);
        for (bit, acc) in combined.iter_mut().enumerate() {
            let pos = (bit as u8 ^ c ^ 1) as usize;
            *acc += m[pos];
        }
    }
    Ok(decide_by_metric(combined.to_vec()))
}
