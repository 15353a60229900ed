//! Point estimates with confidence intervals and provenance.

use serde::{Deserialize, Serialize};

/// Where an estimate came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EstimateSource {
    Theory,
    Simulation,
}

/// 97.5th percentile of the standard normal: the z-value of a two-sided 95%
/// interval.
pub const Z_95: f64 = 1.959_963_984_540_054;

/// A bit-error-rate estimate. Simulation estimates carry a Wilson score
/// interval on the counted proportion; theory estimates either are exact
/// (degenerate interval) or carry a normal interval from the Monte Carlo
/// standard error of a fading expectation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BerEstimate {
    pub ber: f64,
    /// Raw error events counted (0 for theory values).
    pub errors_counted: u64,
    /// Trials behind the estimate (symbols, bits, or expectation draws).
    pub trials: u64,
    pub ci95_low: f64,
    pub ci95_high: f64,
    pub source: EstimateSource,
    /// Set when fewer than 10 error events back a simulation estimate.
    pub low_confidence: bool,
}

impl BerEstimate {
    /// Wilson score interval on `errors / trials`, with the proportion and
    /// both bounds scaled by `scale` (the symbol-to-bit conversion factor;
    /// 1.0 when counting bits directly).
    pub fn from_counts(errors: u64, trials: u64, scale: f64, source: EstimateSource) -> Self {
        assert!(trials > 0, "BerEstimate::from_counts: no trials");
        let n = trials as f64;
        let p = errors as f64 / n;
        let z2 = Z_95 * Z_95;
        let denom = 1.0 + z2 / n;
        let center = (p + z2 / (2.0 * n)) / denom;
        let half = Z_95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
        BerEstimate {
            ber: scale * p,
            errors_counted: errors,
            trials,
            ci95_low: (scale * (center - half)).max(0.0),
            ci95_high: (scale * (center + half)).min(1.0),
            source,
            low_confidence: errors < 10,
        }
    }

    /// Exact theoretical value; degenerate interval.
    pub fn exact_theory(ber: f64) -> Self {
        BerEstimate {
            ber,
            errors_counted: 0,
            trials: 0,
            ci95_low: ber,
            ci95_high: ber,
            source: EstimateSource::Theory,
            low_confidence: false,
        }
    }

    /// Theoretical expectation estimated by Monte Carlo: normal interval
    /// from the standard error.
    pub fn theory_mean_se(mean: f64, se: f64, draws: u64) -> Self {
        BerEstimate {
            ber: mean,
            errors_counted: 0,
            trials: draws,
            ci95_low: (mean - Z_95 * se).max(0.0),
            ci95_high: (mean + Z_95 * se).min(1.0),
            source: EstimateSource::Theory,
            low_confidence: false,
        }
    }

    /// Half-width of a 3-standard-error band around a reference value `p0`,
    /// for `trials` binomial trials: the agreement yardstick used when
    /// cross-checking simulation against theory.
    pub fn binomial_3se(p0: f64, trials: u64) -> f64 {
        3.0 * (p0 * (1.0 - p0) / trials as f64).sqrt()
    }
}

/// A channel-capacity estimate in bits per channel use.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapacityEstimate {
    pub bits: f64,
    pub std_err: f64,
    pub draws: u64,
    pub source: EstimateSource,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_interval_brackets_the_point() {
        let e = BerEstimate::from_counts(241, 100_000, 1.0, EstimateSource::Simulation);
        assert!(e.ci95_low < e.ber && e.ber < e.ci95_high);
        assert!(!e.low_confidence);
        // against the textbook Wilson formula at p = 0.00241, n = 1e5
        assert!((e.ber - 0.00241).abs() < 1e-12);
    }

    #[test]
    fn wilson_interval_sane_at_zero_errors() {
        let e = BerEstimate::from_counts(0, 1000, 1.0, EstimateSource::Simulation);
        assert_eq!(e.ber, 0.0);
        assert!(e.ci95_low >= 0.0 && e.ci95_low < 1e-12);
        assert!(e.ci95_high > 0.0 && e.ci95_high < 0.01);
        assert!(e.low_confidence);
    }

    #[test]
    fn symbol_scale_propagates_to_bounds() {
        let sym = BerEstimate::from_counts(300, 10_000, 1.0, EstimateSource::Simulation);
        let bit = BerEstimate::from_counts(300, 10_000, 2.0 / 3.0, EstimateSource::Simulation);
        assert!((bit.ber - sym.ber * 2.0 / 3.0).abs() < 1e-15);
        assert!((bit.ci95_low - sym.ci95_low * 2.0 / 3.0).abs() < 1e-15);
        assert!((bit.ci95_high - sym.ci95_high * 2.0 / 3.0).abs() < 1e-15);
    }
}
