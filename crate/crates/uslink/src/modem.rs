//! Bit-to-symbol mapping for M-PPM, spreading-code expansion, and synthesis
//! of per-chip branch observations.
//!
//! The simulation is symbol-level: the matched-filter and square-law
//! integrals are realized directly through their closed-form statistics, so
//! one "chip" is the pair of length-M vectors
//!
//! ```text
//! y1[i] = h sqrt(rho) Ep [i = a]  +  sqrt(rho Ep) n1[i]
//! y2[i] = (1 - rho) ( h^2 Ep [i = a] + 2 h sqrt(Ep) n2 [i = a] + eps[i] )
//! ```
//!
//! where `a` is the transmitted position index.

use crate::channel::{ChannelDraw, NoiseDraw};
use crate::error::{Error, Result};
use crate::params::LinkParams;

/// A run of modulated chips: source bits plus the position index per chip.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolFrame {
    /// Source bits, `k * n` of them for `n` symbols (values 0/1).
    pub bits: Vec<u8>,
    /// PPM position index per chip, each in `0..M`.
    pub indices: Vec<u32>,
}

/// Natural-binary bit-to-position mapping: `k = log2(M)` bits per symbol,
/// index = the bits read as a big-endian binary number (for 4-PPM the bit
/// pairs 00, 01, 10, 11 map to positions 0, 1, 2, 3).
pub fn modulate(bits: &[u8], m_order: u32) -> Result<SymbolFrame> {
    if m_order < 2 || !m_order.is_power_of_two() {
        return Err(Error::domain(format!(
            "modulate: m_order = {m_order} is not a power of two >= 2"
        )));
    }
    let k = m_order.ilog2() as usize;
    if !bits.len().is_multiple_of(k) {
        return Err(Error::domain(format!(
            "modulate: {} bits not divisible by {} bits/symbol",
            bits.len(),
            k
        )));
    }
    if let Some(&b) = bits.iter().find(|&&b| b > 1) {
        return Err(Error::domain(format!("modulate: bit value {b} not in {{0,1}}")));
    }
    let indices = bits
        .chunks_exact(k)
        .map(|chunk| chunk.iter().fold(0u32, |acc, &b| (acc << 1) | b as u32))
        .collect();
    Ok(SymbolFrame {
        bits: bits.to_vec(),
        indices,
    })
}

/// Natural-binary index of one symbol's bits, the inverse of
/// [`bits_of_index`].
pub fn index_of_bits(bits: &[u8]) -> u32 {
    bits.iter().fold(0u32, |acc, &b| (acc << 1) | (b & 1) as u32)
}

/// Big-endian `k`-bit expansion of a position index.
pub fn bits_of_index(index: u32, k: u32) -> Vec<u8> {
    (0..k).rev().map(|b| ((index >> b) & 1) as u8).collect()
}

/// Spreads a 2-PPM frame with a chip code of length `N_s`: each source bit
/// `b` becomes `N_s` chips with position `d_i = b XNOR code[i]`, so the chip
/// pattern of `b = 1` is the code itself and `b = 0` transmits its
/// complement (code "10" spreads bit 0 to chips "01").
pub fn spread(frame: &SymbolFrame, code: &[u8]) -> Result<SymbolFrame> {
    if frame.indices.iter().any(|&i| i > 1) {
        return Err(Error::unsupported(
            "spread: spreading codes are defined for 2-PPM only",
        ));
    }
    if code.is_empty() {
        return Err(Error::domain("spread: empty spreading code"));
    }
    if let Some(&b) = code.iter().find(|&&b| b > 1) {
        return Err(Error::domain(format!("spread: code chip {b} not in {{0,1}}")));
    }
    let indices = frame
        .indices
        .iter()
        .flat_map(|&bit| code.iter().map(move |&c| bit ^ (c as u32) ^ 1))
        .collect();
    Ok(SymbolFrame {
        bits: frame.bits.clone(),
        indices,
    })
}

/// The two branch vectors observed for one chip, plus the ground truth that
/// produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct ChipObservation {
    /// Matched-filter (coherent) integrals per position.
    pub y1: Vec<f64>,
    /// Square-law (energy) integrals per position.
    pub y2: Vec<f64>,
    /// Transmitted position index.
    pub truth: u32,
    /// Channel state for this chip.
    pub draw: ChannelDraw,
}

impl ChipObservation {
    pub fn zeros(m_order: u32) -> Self {
        ChipObservation {
            y1: vec![0.0; m_order as usize],
            y2: vec![0.0; m_order as usize],
            truth: 0,
            draw: ChannelDraw { h: 1.0, h_bar: 1.0 },
        }
    }

    pub fn m_order(&self) -> u32 {
        self.y1.len() as u32
    }
}

/// Synthesizes one chip observation from the transmitted index, channel
/// state, and noise draw, writing into `obs` (hot path).
pub fn synthesize_chip_into(
    obs: &mut ChipObservation,
    index: u32,
    p: &LinkParams,
    draw: ChannelDraw,
    noise: &NoiseDraw,
) {
    let m = p.m_order as usize;
    debug_assert!((index as usize) < m);
    debug_assert_eq!(noise.n1.len(), m);
    debug_assert_eq!(noise.eps.len(), m);
    obs.y1.resize(m, 0.0);
    obs.y2.resize(m, 0.0);
    let cd_gain = (p.rho * p.ep).sqrt();
    let one_minus_rho = 1.0 - p.rho;
    for i in 0..m {
        obs.y1[i] = cd_gain * noise.n1[i];
        obs.y2[i] = one_minus_rho * noise.eps[i];
    }
    let i = index as usize;
    obs.y1[i] += draw.h * p.rho.sqrt() * p.ep;
    obs.y2[i] += one_minus_rho
        * (draw.h * draw.h * p.ep + 2.0 * draw.h * p.ep.sqrt() * noise.n2_pulse);
    obs.truth = index;
    obs.draw = draw;
}

/// Synthesizes one chip observation.
pub fn synthesize_chip(
    index: u32,
    p: &LinkParams,
    draw: ChannelDraw,
    noise: &NoiseDraw,
) -> Result<ChipObservation> {
    if index >= p.m_order {
        return Err(Error::domain(format!(
            "synthesize_chip: index {index} out of range for M = {}",
            p.m_order
        )));
    }
    let mut obs = ChipObservation::zeros(p.m_order);
    synthesize_chip_into(&mut obs, index, p, draw, noise);
    Ok(obs)
}
