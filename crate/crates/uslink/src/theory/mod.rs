//! Analytical and semi-analytical performance evaluation: error rates,
//! channel capacity, signal-space geometry, and optimal splitting ratios.

mod ber;
mod capacity;
mod splitting;

pub use ber::{
    ber_2ppm_closed, ber_cd, ber_ed, ber_faded, ber_mppm_numeric, bit_error_from_symbol,
    conditioned_ber, ConditionedBerQuery, ExpectationMethod, FadedBerQuery,
};
pub(crate) use ber::symbol_to_bit_factor;
pub use capacity::{capacity, CapacityChannel, CapacityQuery};
pub use splitting::{
    apply_spreading, average_optimal_rho, optimal_rho, signal_space_distance,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::{trapezoid_expect_std_normal, GaussHermite};

/// Quadrature scheme for one-dimensional expectations against a standard
/// normal density.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum QuadratureScheme {
    GaussHermite,
    AdaptiveTrapezoid,
}

/// Quadrature configuration. Every evaluation runs at `node_count` and again
/// at twice that; a difference above 1e-6 is reported as non-convergence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub node_count: usize,
    pub scheme: QuadratureScheme,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            node_count: 64,
            scheme: QuadratureScheme::GaussHermite,
        }
    }
}

/// Convergence tolerance between the `n`-node and `2n`-node evaluations.
pub const QUADRATURE_TOL: f64 = 1e-6;

impl QuadratureSpec {
    pub fn gauss_hermite(node_count: usize) -> Self {
        QuadratureSpec {
            node_count,
            scheme: QuadratureScheme::GaussHermite,
        }
    }

    pub fn adaptive_trapezoid(node_count: usize) -> Self {
        QuadratureSpec {
            node_count,
            scheme: QuadratureScheme::AdaptiveTrapezoid,
        }
    }

    fn expect_at<F: Fn(f64) -> f64>(&self, nodes: usize, f: &F) -> Result<f64> {
        match self.scheme {
            QuadratureScheme::GaussHermite => Ok(GaussHermite::new(nodes)?.expect_std_normal(f)),
            QuadratureScheme::AdaptiveTrapezoid => Ok(trapezoid_expect_std_normal(nodes, f)),
        }
    }

    /// `E[f(T)]`, `T ~ N(0,1)`, with the doubling self-check.
    pub fn expect_std_normal<F: Fn(f64) -> f64>(&self, f: F) -> Result<f64> {
        if self.node_count < 8 {
            return Err(Error::domain(format!(
                "quadrature node count {} < 8",
                self.node_count
            )));
        }
        let coarse = self.expect_at(self.node_count, &f)?;
        let fine = self.expect_at(self.node_count * 2, &f)?;
        if (coarse - fine).abs() > QUADRATURE_TOL {
            return Err(Error::numeric(format!(
                "quadrature did not converge: |{coarse} - {fine}| > {QUADRATURE_TOL} after doubling {} nodes",
                self.node_count
            )));
        }
        Ok(fine)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::q;

    #[test]
    fn doubling_self_check_converges_on_smooth_integrands() {
        let f = |t: f64| (1.0 - q(1.2 + 0.9 * t)).powi(3);
        let gh = QuadratureSpec::default().expect_std_normal(f).unwrap();
        let tr = QuadratureSpec::adaptive_trapezoid(2048)
            .expect_std_normal(f)
            .unwrap();
        assert!((gh - tr).abs() < 1e-8);
    }

    #[test]
    fn undersized_rule_is_rejected() {
        assert!(QuadratureSpec::gauss_hermite(4)
            .expect_std_normal(|t| t)
            .is_err());
    }

    #[test]
    fn converged_results_move_less_than_1e8_under_doubling() {
        // on a representative decision kernel the rule is well inside its
        // convergence regime
        let query = ConditionedBerQuery::new(
            crate::params::ReceiverKind::Sdjd,
            7.943282347242815,
            0.4,
            50.0,
        )
        .with_m_order(8);
        let a = ber_mppm_numeric(&query, &QuadratureSpec::gauss_hermite(64)).unwrap();
        let b = ber_mppm_numeric(&query, &QuadratureSpec::gauss_hermite(128)).unwrap();
        assert!((a - b).abs() < 1e-8, "{a} vs {b}");
    }

    #[test]
    fn steep_integrands_report_non_convergence() {
        // a sigmoid raised to a high power transitions too sharply for the
        // low-node rule; the doubling self-check must catch it
        let f = |t: f64| (1.0 - q(1.2 + 0.9 * t)).powi(15);
        assert!(matches!(
            QuadratureSpec::gauss_hermite(8).expect_std_normal(f),
            Err(crate::error::Error::Numeric(_))
        ));
    }
}
