//! Optimal splitting ratios, signal-space geometry, and the spreading-code
//! SNR rule.
//!
//! Minimizing the 2-PPM error rate over the splitting ratio is equivalent to
//! maximizing `R(X) = (X + 1) gamma / sqrt(X^2 gamma + 2 gamma + 2 c)` over
//! the receiver-specific statistic `X`; the stationary point sits at
//! `X = 2 (gamma + c) / gamma`. Solving for rho with the channel estimate in
//! place of the true coefficient gives the closed forms implemented here:
//! `X = rho / ((1-rho)^2 hbar^2)` for the separate decision and
//! `X = sqrt(rho) / ((1-rho) hbar)` for the joint decision.

use rand::Rng;
use rand_distr::StandardNormal;
use crate::channel::FadingSampler;
use crate::error::{Error, Result};
use crate::params::{ChannelModel, ReceiverKind};
use crate::rng::block_stream;

/// Closed-form error-minimizing splitting ratio for the splitting receivers,
/// as a function of SNR, square-noise dimensionality, and the channel
/// estimate.
pub fn optimal_rho(receiver: ReceiverKind, gamma: f64, c: f64, h_bar: f64) -> Result<f64> {
    if !crate::params::pos_finite(gamma) {
        return Err(Error::domain(format!("gamma = {gamma} must be > 0")));
    }
    if !crate::params::pos_finite(c) {
        return Err(Error::domain(format!("c = {c} must be > 0")));
    }
    if !crate::params::pos_finite(h_bar) {
        return Err(Error::domain(format!("h_bar = {h_bar} must be > 0")));
    }
    let hb2 = h_bar * h_bar;
    match receiver {
        ReceiverKind::Sdsd => Ok((gamma + 4.0 * hb2 * gamma + 4.0 * hb2 * c
            - gamma.sqrt() * (gamma + 8.0 * gamma * hb2 + 8.0 * hb2 * c).sqrt())
            / (4.0 * (hb2 * gamma + hb2 * c))),
        ReceiverKind::Sdjd => {
            let gc = gamma + c;
            Ok((gamma * gamma + 8.0 * hb2 * gamma * gamma
                + 16.0 * hb2 * gamma * c
                + 8.0 * hb2 * c * c
                - gamma
                    * (32.0 * hb2 * gamma * c
                        + 16.0 * hb2 * c * c
                        + gamma * gamma * (1.0 + 16.0 * hb2))
                        .sqrt())
                / (8.0 * hb2 * gc * gc))
        }
        other => Err(Error::unsupported(format!(
            "optimal splitting ratio is defined for the splitting receivers, not {other}"
        ))),
    }
}

/// Average optimal ratio over fading and estimation error,
/// `E over h_bar of rho*(gamma, c, h_bar)` with `h_bar = h + h_e`, at a fixed
/// nominal SNR. Returns `(mean, standard error)`.
///
/// The closed forms are even in `h_bar`, so sign flips from large estimation
/// error change nothing; an exactly zero draw (measure zero) is skipped.
#[allow(clippy::too_many_arguments)]
pub fn average_optimal_rho(
    receiver: ReceiverKind,
    gamma: f64,
    c: f64,
    channel: &ChannelModel,
    sigma_e2: f64,
    normalize_fading: bool,
    draws: u64,
    seed: u64,
) -> Result<(f64, f64)> {
    if draws == 0 {
        return Err(Error::domain("average optimal ratio needs draws >= 1"));
    }
    if sigma_e2 < 0.0 {
        return Err(Error::domain("sigma_e2 must be >= 0"));
    }
    if !channel.is_fading() && sigma_e2 == 0.0 {
        return Ok((optimal_rho(receiver, gamma, c, 1.0)?, 0.0));
    }
    let fading = FadingSampler::new(channel, normalize_fading)?;
    let sigma_e = sigma_e2.sqrt();
    let mut rng = block_stream(seed, 0);
    let mut sum = 0.0;
    let mut sumsq = 0.0;
    let mut n = 0u64;
    for _ in 0..draws {
        let h = fading.sample(&mut rng);
        let z: f64 = rng.sample(StandardNormal);
        let h_bar = (h + sigma_e * z).abs();
        if h_bar == 0.0 {
            continue;
        }
        // the closed forms live in (0, 1); clamping only matters for the
        // cancellation-dominated regime of near-zero estimates
        let r = optimal_rho(receiver, gamma, c, h_bar)?.clamp(0.0, 1.0);
        sum += r;
        sumsq += r * r;
        n += 1;
    }
    let nf = n as f64;
    let mean = sum / nf;
    let var = (sumsq / nf - mean * mean).max(0.0);
    Ok((mean, (var / nf).sqrt()))
}

/// Pairwise signal-space distance of the M-PPM constellation under splitting
/// detection with unit received energy: `2 sqrt(1 + (1-rho)^2 / rho)` for
/// `0 < rho < 1`, and exactly 2 at the single-branch endpoints.
pub fn signal_space_distance(rho: f64, m_order: u32) -> Result<f64> {
    if m_order < 2 || !m_order.is_power_of_two() {
        return Err(Error::domain(format!(
            "m_order = {m_order} is not a power of two >= 2"
        )));
    }
    if !(0.0..=1.0).contains(&rho) {
        return Err(Error::domain(format!("rho = {rho} outside [0, 1]")));
    }
    if rho == 0.0 || rho == 1.0 {
        return Ok(2.0);
    }
    Ok(2.0 * (1.0 + (1.0 - rho) * (1.0 - rho) / rho).sqrt())
}

/// Spreading-code rule: soft combining of `ns` chips under one fading state
/// scales both the SNR and the square-noise dimensionality,
/// `(gamma, c) -> (ns gamma, ns c)`.
pub fn apply_spreading(gamma: f64, c: f64, ns: u32) -> Result<(f64, f64)> {
    if ns < 1 {
        return Err(Error::domain("spreading length must be >= 1"));
    }
    Ok((ns as f64 * gamma, ns as f64 * c))
}
