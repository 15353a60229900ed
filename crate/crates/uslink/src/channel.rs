//! Random sampling of fading coefficients, channel-estimation error, and the
//! noise terms entering the per-chip branch integrals.
//!
//! The generalized Nakagami amplitude is sampled through its Gamma kernel:
//! if `G ~ Gamma(shape m, scale Omega/m)` then `h = G^(1/(2z))` has exactly
//! the generalized Nakagami density, because `h^(2z)` recovers `G`.
//!
//! The energy-detector branch carries two statistically distinct noise
//! contributions per position: a signal-cross-term `2 h sqrt(Ep) n2` present
//! only at the pulse position, and a square-noise energy `eps` present at
//! every position. The analysis model assigns them independent statistics
//! (`n2 ~ N(0, N0/2)`, `eps ~ N(c N0, c N0^2)` for large `c`), and the
//! sampler reproduces that model rather than the underlying waveform
//! correlation, so that simulation and theory share one noise model.

use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{ChannelModel, LinkParams};

/// Fading coefficient and its receiver-side estimate for one chip.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelDraw {
    /// True fading coefficient (exactly 1 on the unit-gain channel).
    pub h: f64,
    /// Estimated coefficient `h_bar = h + h_e`, `h_e ~ N(0, sigma_e^2)`.
    pub h_bar: f64,
}

/// All noise entering one chip.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseDraw {
    /// Matched-filter projection noise per position, `N(0, N0/2)` i.i.d.
    pub n1: Vec<f64>,
    /// Cross-term noise at the pulse position, `N(0, N0/2)`.
    pub n2_pulse: f64,
    /// Square-noise energy per position.
    pub eps: Vec<f64>,
}

impl NoiseDraw {
    pub fn zeros(m_order: u32) -> Self {
        NoiseDraw {
            n1: vec![0.0; m_order as usize],
            n2_pulse: 0.0,
            eps: vec![0.0; m_order as usize],
        }
    }
}

/// How the square-noise energies are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum SquareNoiseMode {
    /// `eps ~ N(c N0, c N0^2)`: the large-`c` Gaussian model the analytical
    /// expressions assume. Negative energies are possible and permitted.
    #[default]
    GaussianApprox,
    /// `eps ~ Gamma(shape c, scale N0)`: positivity-preserving chi-square
    /// style alternative with the same mean and variance, for probing the
    /// approximation error.
    ExactGamma,
}

impl std::str::FromStr for SquareNoiseMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gaussian" => Ok(SquareNoiseMode::GaussianApprox),
            "gamma" => Ok(SquareNoiseMode::ExactGamma),
            other => Err(Error::domain(format!("unknown square-noise mode: {other}"))),
        }
    }
}

impl SquareNoiseMode {
    pub fn name(&self) -> &'static str {
        match self {
            SquareNoiseMode::GaussianApprox => "gaussian",
            SquareNoiseMode::ExactGamma => "gamma",
        }
    }
}

/// Reusable fading sampler. `normalize` rescales draws so that
/// `E[h^2] = 1`, which reinterprets the nominal SNR as the average SNR.
#[derive(Debug, Clone)]
pub struct FadingSampler {
    kind: FadingKind,
    scale: f64,
}

#[derive(Debug, Clone)]
enum FadingKind {
    Unit,
    Nakagami { gamma: Gamma<f64>, inv_2z: f64 },
}

impl FadingSampler {
    pub fn new(model: &ChannelModel, normalize: bool) -> Result<Self> {
        let scale = if normalize {
            1.0 / model.mean_square().sqrt()
        } else {
            1.0
        };
        match *model {
            ChannelModel::Gaussian => Ok(FadingSampler {
                kind: FadingKind::Unit,
                scale: 1.0, // E[h^2] is already 1
            }),
            ChannelModel::GeneralizedNakagami {
                m_shape,
                omega,
                z_gen,
            } => {
                let gamma = Gamma::new(m_shape, omega / m_shape).map_err(|e| {
                    Error::domain(format!("invalid Nakagami parameters: {e}"))
                })?;
                Ok(FadingSampler {
                    kind: FadingKind::Nakagami {
                        gamma,
                        inv_2z: 1.0 / (2.0 * z_gen),
                    },
                    scale,
                })
            }
        }
    }

    /// One fading coefficient `h >= 0`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match &self.kind {
            FadingKind::Unit => 1.0,
            FadingKind::Nakagami { gamma, inv_2z } => {
                self.scale * gamma.sample(rng).powf(*inv_2z)
            }
        }
    }
}

/// One fading draw from `model` (unnormalized).
pub fn sample_fading<R: Rng + ?Sized>(model: &ChannelModel, rng: &mut R) -> Result<f64> {
    Ok(FadingSampler::new(model, false)?.sample(rng))
}

/// Zero-mean Gaussian estimation error with variance `sigma_e2`; exactly 0.0
/// when the variance is zero.
pub fn sample_estimation_error<R: Rng + ?Sized>(sigma_e2: f64, rng: &mut R) -> Result<f64> {
    if sigma_e2 < 0.0 || !sigma_e2.is_finite() {
        return Err(Error::domain(format!(
            "estimation-error variance must be >= 0, got {sigma_e2}"
        )));
    }
    // always consume one draw so streams stay aligned across sigma_e2 settings
    let z: f64 = rng.sample(StandardNormal);
    Ok(sigma_e2.sqrt() * z)
}

/// Reusable per-chip noise sampler for a fixed parameter set.
#[derive(Debug, Clone)]
pub struct NoiseSampler {
    m_order: usize,
    sigma_n: f64,
    mode: SquareNoiseMode,
    eps_mean: f64,
    eps_std: f64,
    eps_gamma: Option<Gamma<f64>>,
}

impl NoiseSampler {
    pub fn new(p: &LinkParams, mode: SquareNoiseMode) -> Result<Self> {
        if !crate::params::pos_finite(p.n0) || !crate::params::pos_finite(p.c_dim) {
            return Err(Error::domain("noise sampler needs n0 > 0 and c_dim > 0"));
        }
        let eps_gamma = match mode {
            SquareNoiseMode::GaussianApprox => None,
            SquareNoiseMode::ExactGamma => Some(
                Gamma::new(p.c_dim, p.n0)
                    .map_err(|e| Error::domain(format!("invalid gamma square-noise: {e}")))?,
            ),
        };
        Ok(NoiseSampler {
            m_order: p.m_order as usize,
            sigma_n: (p.n0 / 2.0).sqrt(),
            mode,
            eps_mean: p.c_dim * p.n0,
            eps_std: p.c_dim.sqrt() * p.n0,
            eps_gamma,
        })
    }

    /// Fills `draw` in place; the hot path of the simulator.
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, draw: &mut NoiseDraw) {
        draw.n1.resize(self.m_order, 0.0);
        draw.eps.resize(self.m_order, 0.0);
        for v in draw.n1.iter_mut() {
            let z: f64 = rng.sample(StandardNormal);
            *v = self.sigma_n * z;
        }
        let z: f64 = rng.sample(StandardNormal);
        draw.n2_pulse = self.sigma_n * z;
        match self.mode {
            SquareNoiseMode::GaussianApprox => {
                for v in draw.eps.iter_mut() {
                    let z: f64 = rng.sample(StandardNormal);
                    *v = self.eps_mean + self.eps_std * z;
                }
            }
            SquareNoiseMode::ExactGamma => {
                let g = self.eps_gamma.as_ref().expect("gamma mode has sampler");
                for v in draw.eps.iter_mut() {
                    *v = g.sample(rng);
                }
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> NoiseDraw {
        let mut draw = NoiseDraw::zeros(self.m_order as u32);
        self.sample_into(rng, &mut draw);
        draw
    }
}

/// One full noise draw for the given parameters.
pub fn sample_noise<R: Rng + ?Sized>(
    p: &LinkParams,
    mode: SquareNoiseMode,
    rng: &mut R,
) -> Result<NoiseDraw> {
    Ok(NoiseSampler::new(p, mode)?.sample(rng))
}

/// Draws the `(h, h_bar)` pair for one chip.
pub fn sample_channel<R: Rng + ?Sized>(
    fading: &FadingSampler,
    sigma_e2: f64,
    rng: &mut R,
) -> Result<ChannelDraw> {
    let h = fading.sample(rng);
    let h_e = sample_estimation_error(sigma_e2, rng)?;
    Ok(ChannelDraw { h, h_bar: h + h_e })
}
