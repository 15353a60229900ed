//! Link parameters, channel descriptors, and receiver selection.
//!
//! The noise density is fixed at `n0 = 1` by the [`LinkParams::from_snr_db`]
//! constructor, so the pulse energy alone carries the nominal SNR:
//! `ep = 10^(dB/10)`. The instantaneous SNR seen through a fading coefficient
//! `h` is `gamma = h^2 * ep / n0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// True iff `v` is finite and strictly positive (NaN fails).
#[inline]
pub(crate) fn pos_finite(v: f64) -> bool {
    v.is_finite() && v > 0.0
}

/// Square-noise dimensionality below which the Gaussian approximation of the
/// energy-detector noise is shaky; the central limit theorem needs roughly
/// this many independent components in one integration window.
pub const CLT_MIN_C_DIM: f64 = 40.0;

/// Default square-noise dimensionality: the smallest round value comfortably
/// above [`CLT_MIN_C_DIM`].
pub const DEFAULT_C_DIM: f64 = 50.0;

/// Physical-layer parameters of one link configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkParams {
    /// Modulation order M (positions per chip); must be a power of two >= 2.
    pub m_order: u32,
    /// Energy of one transmitted pulse, E_p.
    pub ep: f64,
    /// One-sided noise spectral density, N_0.
    pub n0: f64,
    /// Power splitting ratio in `[0, 1]`: fraction routed to the coherent branch.
    pub rho: f64,
    /// Square-noise dimensionality c = delta * W_rx.
    pub c_dim: f64,
    /// Spreading-code length N_s (1 = no spreading).
    pub ns: u32,
    /// Channel-estimation error variance sigma_e^2.
    pub sigma_e2: f64,
}

impl LinkParams {
    /// Canonical constructor: fixes `n0 = 1` and sets `ep` from the nominal
    /// SNR in dB. Splitting ratio defaults to 0.5, `c_dim` to
    /// [`DEFAULT_C_DIM`], no spreading, perfect estimation.
    pub fn from_snr_db(m_order: u32, snr_db: f64) -> Self {
        LinkParams {
            m_order,
            ep: 10f64.powf(snr_db / 10.0),
            n0: 1.0,
            rho: 0.5,
            c_dim: DEFAULT_C_DIM,
            ns: 1,
            sigma_e2: 0.0,
        }
    }

    pub fn with_rho(mut self, rho: f64) -> Self {
        self.rho = rho;
        self
    }

    pub fn with_c_dim(mut self, c_dim: f64) -> Self {
        self.c_dim = c_dim;
        self
    }

    pub fn with_ns(mut self, ns: u32) -> Self {
        self.ns = ns;
        self
    }

    pub fn with_sigma_e2(mut self, sigma_e2: f64) -> Self {
        self.sigma_e2 = sigma_e2;
        self
    }

    /// Bits per symbol, `k = log2(M)`. Meaningful only for valid `m_order`.
    pub fn bits_per_symbol(&self) -> u32 {
        self.m_order.max(1).ilog2()
    }

    /// Nominal SNR `ep / n0` (the value quoted as "SNR = x dB", i.e. `h = 1`).
    pub fn nominal_snr(&self) -> f64 {
        self.ep / self.n0
    }

    /// Instantaneous SNR `gamma = h^2 * ep / n0`.
    pub fn snr(&self, h: f64) -> f64 {
        h * h * self.ep / self.n0
    }

    /// Checks every invariant and returns a report; construction never fails,
    /// so downstream entry points gate on this instead.
    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        if self.m_order < 2 || !self.m_order.is_power_of_two() {
            report
                .errors
                .push(ParamIssue::MOrderNotPowerOfTwo(self.m_order));
        }
        if !pos_finite(self.ep) {
            report.errors.push(ParamIssue::NonPositive("ep", self.ep));
        }
        if !pos_finite(self.n0) {
            report.errors.push(ParamIssue::NonPositive("n0", self.n0));
        }
        if !(0.0..=1.0).contains(&self.rho) || !self.rho.is_finite() {
            report.errors.push(ParamIssue::RhoOutOfRange(self.rho));
        }
        if !pos_finite(self.c_dim) {
            report
                .errors
                .push(ParamIssue::NonPositive("c_dim", self.c_dim));
        } else if self.c_dim < CLT_MIN_C_DIM {
            report
                .warnings
                .push(ParamIssue::CDimBelowCltThreshold(self.c_dim));
        }
        if self.ns < 1 {
            report.errors.push(ParamIssue::NsZero);
        }
        if self.sigma_e2 < 0.0 || !self.sigma_e2.is_finite() {
            report
                .errors
                .push(ParamIssue::SigmaE2Negative(self.sigma_e2));
        }
        report
    }

    /// Validates and converts violations into an error.
    pub fn checked(self) -> Result<Self> {
        let report = self.validate();
        if report.is_valid() {
            Ok(self)
        } else {
            Err(Error::InvalidParams(report))
        }
    }
}

/// One validation finding. Warnings keep the parameter set usable; errors
/// make it invalid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum ParamIssue {
    MOrderNotPowerOfTwo(u32),
    RhoOutOfRange(f64),
    NonPositive(&'static str, f64),
    SigmaE2Negative(f64),
    NsZero,
    /// The Gaussian model of the square-noise needs c above
    /// [`CLT_MIN_C_DIM`]; smaller values work but the approximation degrades.
    CDimBelowCltThreshold(f64),
}

impl std::fmt::Display for ParamIssue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ParamIssue::MOrderNotPowerOfTwo(m) => {
                write!(f, "m_order = {m} is not a power of two >= 2")
            }
            ParamIssue::RhoOutOfRange(r) => write!(f, "rho = {r} outside [0, 1]"),
            ParamIssue::NonPositive(name, v) => write!(f, "{name} = {v} must be > 0"),
            ParamIssue::SigmaE2Negative(v) => write!(f, "sigma_e2 = {v} must be >= 0"),
            ParamIssue::NsZero => write!(f, "ns must be >= 1"),
            ParamIssue::CDimBelowCltThreshold(c) => write!(
                f,
                "c_dim = {c} < {CLT_MIN_C_DIM}: Gaussian square-noise approximation is unreliable"
            ),
        }
    }
}

/// Validation outcome: `is_valid()` iff no errors; warnings are advisory.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct ValidationReport {
    pub errors: Vec<ParamIssue>,
    pub warnings: Vec<ParamIssue>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.errors.is_empty()
    }

    pub fn has_warnings(&self) -> bool {
        !self.warnings.is_empty()
    }
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut first = true;
        for issue in self.errors.iter().chain(&self.warnings) {
            if !first {
                write!(f, "; ")?;
            }
            write!(f, "{issue}")?;
            first = false;
        }
        if first {
            write!(f, "ok")?;
        }
        Ok(())
    }
}

/// Report-style validation entry point.
pub fn validate_params(p: &LinkParams) -> ValidationReport {
    p.validate()
}

/// Fading model of the link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ChannelModel {
    /// Unit-gain channel: `h = 1` always.
    Gaussian,
    /// Generalized Nakagami amplitude fading with density
    /// `f(h) = 2 z m^m h^(2zm-1) exp(-(m/Omega) h^(2z)) / (Gamma(m) Omega^m)`.
    GeneralizedNakagami {
        /// Shaping parameter m.
        m_shape: f64,
        /// Spreading parameter Omega = E[h^(2z)].
        omega: f64,
        /// Generalization parameter z (z = 1 recovers Nakagami-m).
        z_gen: f64,
    },
}

impl ChannelModel {
    pub fn gaussian() -> Self {
        ChannelModel::Gaussian
    }

    pub fn generalized_nakagami(m_shape: f64, omega: f64, z_gen: f64) -> Result<Self> {
        if !pos_finite(m_shape) {
            return Err(Error::domain(format!("nakagami m = {m_shape} must be > 0")));
        }
        if !pos_finite(omega) {
            return Err(Error::domain(format!("nakagami omega = {omega} must be > 0")));
        }
        if !pos_finite(z_gen) {
            return Err(Error::domain(format!("nakagami z = {z_gen} must be > 0")));
        }
        Ok(ChannelModel::GeneralizedNakagami {
            m_shape,
            omega,
            z_gen,
        })
    }

    /// Measured soft-tissue parameter set for ultrasonic intra-body
    /// propagation: m = 1.12, Omega = 0.05, z = 0.59. Experimental reports
    /// often label the shaping parameter `s`; it plays the role of `m` in the
    /// density above.
    pub fn intra_body_ultrasound() -> Self {
        ChannelModel::GeneralizedNakagami {
            m_shape: 1.12,
            omega: 0.05,
            z_gen: 0.59,
        }
    }

    pub fn is_fading(&self) -> bool {
        matches!(self, ChannelModel::GeneralizedNakagami { .. })
    }

    /// Mean-square fading gain `E[h^2]`.
    ///
    /// For the generalized Nakagami model, `h^(2z) ~ Gamma(m, Omega/m)`, so
    /// `E[h^2] = (Omega/m)^(1/z) * Gamma(m + 1/z) / Gamma(m)`.
    pub fn mean_square(&self) -> f64 {
        match *self {
            ChannelModel::Gaussian => 1.0,
            ChannelModel::GeneralizedNakagami {
                m_shape,
                omega,
                z_gen,
            } => {
                use statrs::function::gamma::ln_gamma;
                let s = 1.0 / z_gen;
                ((omega / m_shape).ln() * s + ln_gamma(m_shape + s) - ln_gamma(m_shape)).exp()
            }
        }
    }

    /// Fading amplitude density. Only the Nakagami variant has one; the
    /// Gaussian channel is a point mass at `h = 1`.
    pub fn pdf(&self, h: f64) -> Result<f64> {
        match *self {
            ChannelModel::Gaussian => Err(Error::domain(
                "pdf: the unit-gain channel has no density (point mass at h = 1)",
            )),
            ChannelModel::GeneralizedNakagami {
                m_shape,
                omega,
                z_gen,
            } => {
                if h <= 0.0 {
                    return Ok(0.0);
                }
                use statrs::function::gamma::ln_gamma;
                let ln_pdf = (2.0 * z_gen).ln() + m_shape * (m_shape / omega).ln()
                    + (2.0 * z_gen * m_shape - 1.0) * h.ln()
                    - (m_shape / omega) * h.powf(2.0 * z_gen)
                    - ln_gamma(m_shape);
                Ok(ln_pdf.exp())
            }
        }
    }

    /// Fading amplitude CDF `P[h <= x]` (Nakagami variant only):
    /// the regularized lower incomplete gamma `P(m, (m/Omega) x^(2z))`.
    pub fn cdf(&self, x: f64) -> Result<f64> {
        match *self {
            ChannelModel::Gaussian => Err(Error::domain(
                "cdf: the unit-gain channel has no continuous CDF",
            )),
            ChannelModel::GeneralizedNakagami {
                m_shape,
                omega,
                z_gen,
            } => {
                if x <= 0.0 {
                    return Ok(0.0);
                }
                Ok(statrs::function::gamma::gamma_lr(
                    m_shape,
                    (m_shape / omega) * x.powf(2.0 * z_gen),
                ))
            }
        }
    }
}

/// Receiver architecture on the decision side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ReceiverKind {
    /// Coherent detection only (all power to the matched-filter branch).
    Cd,
    /// Energy detection only (all power to the square-law branch).
    Ed,
    /// Splitting detection, separate decision: a 2xM decision matrix resolved
    /// against estimated channel gains.
    Sdsd,
    /// Splitting detection, joint decision: per-position sum of both branches
    /// into a max selector; needs no channel estimate.
    Sdjd,
}

impl ReceiverKind {
    pub const ALL: [ReceiverKind; 4] = [
        ReceiverKind::Cd,
        ReceiverKind::Ed,
        ReceiverKind::Sdsd,
        ReceiverKind::Sdjd,
    ];

    /// The splitting ratio the receiver actually operates at: CD forces
    /// `rho = 1`, ED forces `rho = 0`, the splitting receivers use the
    /// configured value.
    pub fn effective_rho(&self, configured: f64) -> f64 {
        match self {
            ReceiverKind::Cd => 1.0,
            ReceiverKind::Ed => 0.0,
            ReceiverKind::Sdsd | ReceiverKind::Sdjd => configured,
        }
    }

    /// True for receivers whose decision rule consumes the channel estimate.
    pub fn uses_channel_estimate(&self) -> bool {
        matches!(self, ReceiverKind::Sdsd)
    }

    pub fn name(&self) -> &'static str {
        match self {
            ReceiverKind::Cd => "cd",
            ReceiverKind::Ed => "ed",
            ReceiverKind::Sdsd => "sdsd",
            ReceiverKind::Sdjd => "sdjd",
        }
    }
}

impl std::str::FromStr for ReceiverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cd" => Ok(ReceiverKind::Cd),
            "ed" => Ok(ReceiverKind::Ed),
            "sdsd" => Ok(ReceiverKind::Sdsd),
            "sdjd" => Ok(ReceiverKind::Sdjd),
            other => Err(Error::domain(format!("unknown receiver kind: {other}"))),
        }
    }
}

impl std::fmt::Display for ReceiverKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}
