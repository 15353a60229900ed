//! Channel capacity of the equiprobable M-PPM input constellation, by Monte
//! Carlo evaluation of the M-dimensional mutual-information expectation.
//!
//! Conditioned on the pulse sitting in position 1, every branch of a
//! receiver contributes a log-likelihood-ratio exponent of the form
//!
//! ```text
//! e_i += w * s * (v_i - v_1) + (1 - w) * (v_i^2 - v_1^2) / 2
//! ```
//!
//! where `v_1 ~ N(s, r)`, `v_i ~ N(0, 1)` for the other positions,
//! `s = (mu_pulse - mu_rest) / sigma_rest`, `r = sigma_pulse^2 / sigma_rest^2`
//! and `w = 1/r`. The capacity sample is
//! `log2(M) - log2(sum_i exp(e_i))` with `e_1 = 0`.
//!
//! The coherent branch has `s = sqrt(2 gamma)`, `r = 1` (pure linear term);
//! the energy branch has `s = gamma / sqrt(c)`, `r = 1 + 2 gamma / c`;
//! neither depends on the splitting ratio, which is why the separate-decision
//! receiver's capacity does not either. The joint-decision receiver sums the
//! branches before deciding, so its single combined branch keeps the
//! splitting ratio and the channel coefficient in `s` and `r`.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::FadingSampler;
use crate::error::{Error, Result};
use crate::estimate::{CapacityEstimate, EstimateSource};
use crate::params::{ChannelModel, ReceiverKind};
use crate::rng::{block_stream, mix, BLOCK_LEN};

/// What the capacity is conditioned on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum CapacityChannel {
    /// Fixed channel state: instantaneous SNR `gamma` through coefficient `h`.
    Conditioned { gamma: f64, h: f64 },
    /// Outer expectation over a fading model at pulse energy `ep`, noise
    /// density `n0`.
    Faded {
        channel: ChannelModel,
        ep: f64,
        n0: f64,
        normalize: bool,
    },
}

impl CapacityChannel {
    /// Unit-channel shorthand.
    pub fn gaussian(gamma: f64) -> Self {
        CapacityChannel::Conditioned { gamma, h: 1.0 }
    }
}

/// Capacity evaluation request.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapacityQuery {
    pub receiver: ReceiverKind,
    pub rho: f64,
    pub c_dim: f64,
    pub m_order: u32,
    pub draws: u64,
    pub seed: u64,
}

/// One branch of the log-likelihood exponent.
#[derive(Debug, Clone, Copy)]
struct Branch {
    s: f64,
    /// Standard deviation of the pulse-position statistic, `sqrt(r)`.
    sd1: f64,
    /// Linear weight `1/r`.
    w_lin: f64,
    /// Quadratic weight `1 - 1/r`.
    w_quad: f64,
}

impl Branch {
    fn new(s: f64, r: f64) -> Self {
        Branch {
            s,
            sd1: r.sqrt(),
            w_lin: 1.0 / r,
            w_quad: 1.0 - 1.0 / r,
        }
    }

    fn coherent(gamma: f64) -> Self {
        Branch::new((2.0 * gamma).sqrt(), 1.0)
    }

    fn energy(gamma: f64, c: f64) -> Self {
        Branch::new(gamma / c.sqrt(), 1.0 + 2.0 * gamma / c)
    }

    /// Combined branch of the joint decision: pulse/rest statistics of the
    /// per-position branch sum. `ep` is the noise-normalized pulse energy
    /// `Ep / N0`, kept separate from `h` so that a vanishing fading draw
    /// degenerates smoothly to a zero-information branch.
    fn joint(ep: f64, h: f64, rho: f64, c: f64) -> Self {
        // mean gap      d = h sqrt(rho) ep + h^2 (1-rho) ep
        // rest variance s2 = rho ep / 2 + (1-rho)^2 c
        // pulse variance s1 = s2 + 2 h^2 (1-rho)^2 ep
        let omr = 1.0 - rho;
        let d = h * rho.sqrt() * ep + h * h * omr * ep;
        let s2 = rho * ep / 2.0 + omr * omr * c;
        let s1 = s2 + 2.0 * h * h * omr * omr * ep;
        Branch::new(d / s2.sqrt(), s1 / s2)
    }
}

fn branches_for(
    receiver: ReceiverKind,
    ep: f64,
    h: f64,
    rho: f64,
    c: f64,
    out: &mut Vec<Branch>,
) {
    let gamma = h * h * ep;
    out.clear();
    match receiver {
        ReceiverKind::Cd => out.push(Branch::coherent(gamma)),
        ReceiverKind::Ed => out.push(Branch::energy(gamma, c)),
        ReceiverKind::Sdsd => {
            out.push(Branch::coherent(gamma));
            out.push(Branch::energy(gamma, c));
        }
        ReceiverKind::Sdjd => out.push(Branch::joint(ep, h, rho, c)),
    }
}

/// Monte Carlo channel-capacity estimate in bits per channel use, clamped to
/// `[0, log2 M]`. Deterministic for a fixed `(seed, draws)` regardless of
/// thread count.
pub fn capacity(query: &CapacityQuery, channel: &CapacityChannel) -> Result<CapacityEstimate> {
    if query.m_order < 2 || !query.m_order.is_power_of_two() {
        return Err(Error::domain(format!(
            "m_order = {} is not a power of two >= 2",
            query.m_order
        )));
    }
    if !(0.0..=1.0).contains(&query.rho) {
        return Err(Error::domain(format!("rho = {} outside [0, 1]", query.rho)));
    }
    if !crate::params::pos_finite(query.c_dim) {
        return Err(Error::domain("c_dim must be > 0"));
    }
    if query.draws == 0 {
        return Err(Error::domain("capacity needs draws >= 1"));
    }
    match channel {
        CapacityChannel::Conditioned { gamma, h } => {
            if !crate::params::pos_finite(*gamma) || !crate::params::pos_finite(*h) {
                return Err(Error::domain("conditioned capacity needs gamma > 0, h > 0"));
            }
        }
        CapacityChannel::Faded { ep, n0, .. } => {
            if !crate::params::pos_finite(*ep) || !crate::params::pos_finite(*n0) {
                return Err(Error::domain("faded capacity needs ep > 0, n0 > 0"));
            }
        }
    }

    let m = query.m_order as usize;
    let log2m = (query.m_order as f64).log2();
    let fading = match channel {
        CapacityChannel::Faded {
            channel: model,
            normalize,
            ..
        } => Some(FadingSampler::new(model, *normalize)?),
        CapacityChannel::Conditioned { .. } => None,
    };

    let blocks = query.draws.div_ceil(BLOCK_LEN);
    let (sum, sumsq) = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = block_stream(mix(query.seed, 0xcab1), b);
            let lo = b * BLOCK_LEN;
            let hi = ((b + 1) * BLOCK_LEN).min(query.draws);
            let mut branches = Vec::with_capacity(2);
            let mut exps = vec![0.0f64; m];
            let mut s = 0.0;
            let mut s2 = 0.0;
            for _ in lo..hi {
                let (ep, h) = match channel {
                    CapacityChannel::Conditioned { gamma, h } => (gamma / (h * h), *h),
                    CapacityChannel::Faded { ep, n0, .. } => {
                        let h = fading.as_ref().expect("faded channel has sampler").sample(&mut rng);
                        (ep / n0, h)
                    }
                };
                branches_for(query.receiver, ep, h, query.rho, query.c_dim, &mut branches);
                exps.iter_mut().for_each(|e| *e = 0.0);
                for br in &branches {
                    let z1: f64 = rng.sample(StandardNormal);
                    let v1 = br.s + br.sd1 * z1;
                    let lin = br.w_lin * br.s;
                    let base = -lin * v1 - br.w_quad * 0.5 * v1 * v1;
                    for e in exps.iter_mut().skip(1) {
                        let v: f64 = rng.sample(StandardNormal);
                        *e += lin * v + br.w_quad * 0.5 * v * v + base;
                    }
                }
                // log2 sum of exp(e_i) with e_1 = 0, max-shifted
                let mx = exps.iter().skip(1).fold(0.0f64, |a, &b| a.max(b));
                let lse = mx + exps.iter().map(|&e| (e - mx).exp()).sum::<f64>().ln();
                let sample = log2m - lse / std::f64::consts::LN_2;
                s += sample;
                s2 += sample * sample;
            }
            (s, s2)
        })
        .reduce(|| (0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));

    let n = query.draws as f64;
    let mean = sum / n;
    let var = (sumsq / n - mean * mean).max(0.0);
    Ok(CapacityEstimate {
        bits: mean.clamp(0.0, log2m),
        std_err: (var / n).sqrt(),
        draws: query.draws,
        source: EstimateSource::Theory,
    })
}
