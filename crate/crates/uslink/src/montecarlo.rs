//! Seeded, parallel bit-error-rate simulation, and paired
//! simulation/theory sweeps.
//!
//! Reproducibility: trials are partitioned into fixed-size blocks; block `b`
//! of a run draws from the counter-mode stream `(seed, b)`. Physical threads
//! only pick blocks up, so `errors_counted` is bit-identical for any worker
//! count, and merging is an integer sum. Sweep points derive their seeds
//! from `(seed, axis, grid value)`, so adding or removing grid points leaves
//! every other point's result untouched.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{sample_channel, FadingSampler, NoiseDraw, NoiseSampler, SquareNoiseMode};
use crate::error::{Error, Result};
use crate::estimate::{BerEstimate, EstimateSource};
use crate::modem::{synthesize_chip_into, ChipObservation};
use crate::params::{ChannelModel, LinkParams, ReceiverKind};
use crate::receivers::{decide_index, despread_index};
use crate::rng::{block_stream, derive_seed, mix, BLOCK_LEN};
use crate::theory::{
    apply_spreading, ber_faded, symbol_to_bit_factor, ExpectationMethod, FadedBerQuery,
};

/// How errors are counted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum CountMode {
    /// Count symbol errors and convert through the orthogonal-constellation
    /// factor `2^(k-1) / (2^k - 1)`.
    #[default]
    SymbolThenConvert,
    /// Count natural-mapping bit errors directly.
    DirectBits,
}

/// Fully specified simulation run. Two runs with identical configurations
/// (seed and workers included) produce bit-identical estimates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub params: LinkParams,
    pub channel: ChannelModel,
    pub receiver: ReceiverKind,
    pub n_symbols: u64,
    pub seed: u64,
    pub workers: usize,
    pub square_noise_mode: SquareNoiseMode,
    pub count_mode: CountMode,
    /// Rescale fading draws so `E[h^2] = 1`.
    pub normalize_fading: bool,
}

impl SimConfig {
    /// Sensible defaults: one million symbols, Gaussian-approximated square
    /// noise, symbol counting, single worker.
    pub fn new(params: LinkParams, channel: ChannelModel, receiver: ReceiverKind) -> Self {
        SimConfig {
            params,
            channel,
            receiver,
            n_symbols: 1_000_000,
            seed: 0,
            workers: 1,
            square_noise_mode: SquareNoiseMode::GaussianApprox,
            count_mode: CountMode::SymbolThenConvert,
            normalize_fading: false,
        }
    }

    pub fn with_symbols(mut self, n_symbols: u64) -> Self {
        self.n_symbols = n_symbols;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    fn validate(&self) -> Result<()> {
        let report = self.params.validate();
        if !report.is_valid() {
            return Err(Error::InvalidParams(report));
        }
        if self.n_symbols == 0 {
            return Err(Error::domain("n_symbols must be >= 1"));
        }
        if self.workers == 0 {
            return Err(Error::domain("workers must be >= 1"));
        }
        if self.params.ns > 1 && self.params.m_order != 2 {
            return Err(Error::unsupported(
                "spreading codes are defined for 2-PPM only",
            ));
        }
        Ok(())
    }
}

/// Deterministic pseudorandom spreading code of length `ns` (bit values
/// 0/1), derived from the run seed.
pub fn pseudorandom_code(ns: u32, seed: u64) -> Vec<u8> {
    let mut rng = block_stream(mix(seed, 0x5c0d), 0);
    (0..ns).map(|_| rng.random_range(0..2u8)).collect()
}

/// Error tallies of one block.
#[derive(Debug, Default, Clone, Copy)]
struct Tally {
    symbol_errors: u64,
    bit_errors: u64,
}

impl Tally {
    fn merge(self, other: Tally) -> Tally {
        Tally {
            symbol_errors: self.symbol_errors + other.symbol_errors,
            bit_errors: self.bit_errors + other.bit_errors,
        }
    }
}

/// Runs the configured simulation and returns the estimate with its Wilson
/// 95% interval. Fewer than 10 observed errors set the low-confidence flag.
pub fn simulate_ber(cfg: &SimConfig) -> Result<BerEstimate> {
    cfg.validate()?;
    let eff = cfg
        .params
        .with_rho(cfg.receiver.effective_rho(cfg.params.rho));
    let fading = FadingSampler::new(&cfg.channel, cfg.normalize_fading)?;
    let noise = NoiseSampler::new(&eff, cfg.square_noise_mode)?;
    let code = if eff.ns > 1 {
        pseudorandom_code(eff.ns, cfg.seed)
    } else {
        vec![1]
    };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::numeric(format!("thread pool: {e}")))?;

    let blocks = cfg.n_symbols.div_ceil(BLOCK_LEN);
    let tally = pool.install(|| {
        (0..blocks)
            .into_par_iter()
            .map(|b| {
                let lo = b * BLOCK_LEN;
                let hi = ((b + 1) * BLOCK_LEN).min(cfg.n_symbols);
                run_block(cfg, &eff, &fading, &noise, &code, b, hi - lo)
            })
            .reduce(Tally::default, Tally::merge)
    });

    let k = eff.bits_per_symbol() as u64;
    Ok(match cfg.count_mode {
        CountMode::SymbolThenConvert => BerEstimate::from_counts(
            tally.symbol_errors,
            cfg.n_symbols,
            symbol_to_bit_factor(eff.m_order),
            EstimateSource::Simulation,
        ),
        CountMode::DirectBits => BerEstimate::from_counts(
            tally.bit_errors,
            cfg.n_symbols * k,
            1.0,
            EstimateSource::Simulation,
        ),
    })
}

fn run_block(
    cfg: &SimConfig,
    eff: &LinkParams,
    fading: &FadingSampler,
    noise: &NoiseSampler,
    code: &[u8],
    block: u64,
    count: u64,
) -> Tally {
    let mut rng = block_stream(cfg.seed, block);
    let mut tally = Tally::default();
    let m = eff.m_order;
    if eff.ns <= 1 {
        let mut obs = ChipObservation::zeros(m);
        let mut draw = NoiseDraw::zeros(m);
        for _ in 0..count {
            let truth = rng.random_range(0..m);
            let ch = sample_channel(fading, eff.sigma_e2, &mut rng)
                .expect("validated sigma_e2");
            noise.sample_into(&mut rng, &mut draw);
            synthesize_chip_into(&mut obs, truth, eff, ch, &draw);
            let hat = decide_index(cfg.receiver, &obs, eff);
            if hat != truth {
                tally.symbol_errors += 1;
                tally.bit_errors += u64::from((hat ^ truth).count_ones());
            }
        }
    } else {
        // one fading state per spread bit, fresh noise per chip
        let mut chips: Vec<ChipObservation> =
            (0..code.len()).map(|_| ChipObservation::zeros(m)).collect();
        let mut draw = NoiseDraw::zeros(m);
        for _ in 0..count {
            let bit = rng.random_range(0..2u32);
            let ch = sample_channel(fading, eff.sigma_e2, &mut rng)
                .expect("validated sigma_e2");
            for (obs, &c) in chips.iter_mut().zip(code) {
                let idx = bit ^ (c as u32) ^ 1;
                noise.sample_into(&mut rng, &mut draw);
                synthesize_chip_into(obs, idx, eff, ch, &draw);
            }
            let hat = despread_index(&chips, code, cfg.receiver, eff);
            if hat != bit {
                tally.symbol_errors += 1;
                tally.bit_errors += 1;
            }
        }
    }
    tally
}

/// Grid axis of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepAxis {
    Rho,
    SnrDb,
}

impl SweepAxis {
    pub fn label(&self) -> &'static str {
        match self {
            SweepAxis::Rho => "rho",
            SweepAxis::SnrDb => "snr_db",
        }
    }
}

/// One resolved sweep point: the paired simulation and theory estimates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub value: f64,
    pub seed: u64,
    pub sim: BerEstimate,
    pub theory: BerEstimate,
}

/// Sweep tuning knobs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepOptions {
    /// Draw count for fading-averaged theory expectations.
    pub theory_draws: u64,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            theory_draws: 100_000,
        }
    }
}

/// Applies one grid value to the template configuration.
fn configure_point(cfg: &SimConfig, axis: SweepAxis, value: f64) -> SimConfig {
    let mut point = *cfg;
    match axis {
        SweepAxis::Rho => point.params.rho = value,
        SweepAxis::SnrDb => {
            point.params.ep = 10f64.powf(value / 10.0);
            point.params.n0 = 1.0;
        }
    }
    point
}

/// Theoretical estimate matching a simulation configuration: exact on the
/// unit channel with perfect estimation, otherwise a seeded expectation over
/// the channel state. Spreading maps to the `(ns gamma, ns c)` rule.
pub fn theory_estimate(cfg: &SimConfig, theory_draws: u64) -> Result<BerEstimate> {
    let (ep_eff, c_eff) = {
        let (g, c) = apply_spreading(cfg.params.nominal_snr(), cfg.params.c_dim, cfg.params.ns)?;
        (g * cfg.params.n0, c)
    };
    let query = FadedBerQuery {
        receiver: cfg.receiver,
        rho: cfg.receiver.effective_rho(cfg.params.rho),
        c_dim: c_eff,
        m_order: cfg.params.m_order,
        ep: ep_eff,
        n0: cfg.params.n0,
        sigma_e2: cfg.params.sigma_e2,
        normalize_fading: cfg.normalize_fading,
    };
    ber_faded(
        &query,
        &cfg.channel,
        &ExpectationMethod::MonteCarlo {
            draws: theory_draws,
            seed: derive_seed(cfg.seed, "theory", 0),
        },
    )
}

/// Runs one paired simulation/theory estimate per grid point. Point failures
/// are reported in place without aborting the rest of the grid.
pub fn sweep(
    axis: SweepAxis,
    grid: &[f64],
    cfg: &SimConfig,
    opts: &SweepOptions,
) -> Result<Vec<Result<SweepPoint>>> {
    if grid.is_empty() {
        return Err(Error::domain("sweep: empty grid"));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::domain("sweep: grid must be strictly increasing"));
    }
    Ok(grid
        .iter()
        .map(|&value| {
            let seed = derive_seed(cfg.seed, axis.label(), value.to_bits());
            let mut point = configure_point(cfg, axis, value);
            point.seed = seed;
            let sim = simulate_ber(&point)?;
            let theory = theory_estimate(&point, opts.theory_draws)?;
            Ok(SweepPoint {
                value,
                seed,
                sim,
                theory,
            })
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::theory::{ber_cd, ber_ed};

    fn gamma_9db() -> f64 {
        10f64.powf(9.0 / 10.0)
    }

    fn base_config(receiver: ReceiverKind) -> SimConfig {
        SimConfig::new(
            LinkParams::from_snr_db(2, 9.0),
            ChannelModel::Gaussian,
            receiver,
        )
        .with_seed(0xA11CE)
    }

    #[test]
    fn cd_simulation_matches_theory_interval() {
        let cfg = base_config(ReceiverKind::Cd).with_symbols(1_000_000);
        let est = simulate_ber(&cfg).unwrap();
        let expected = ber_cd(gamma_9db());
        assert!(
            est.ci95_low <= expected && expected <= est.ci95_high,
            "theory {expected} outside [{}, {}]",
            est.ci95_low,
            est.ci95_high
        );
        assert!(!est.low_confidence);
    }

    #[test]
    fn ed_simulation_matches_theory() {
        let cfg = base_config(ReceiverKind::Ed).with_symbols(400_000);
        let est = simulate_ber(&cfg).unwrap();
        let expected = ber_ed(gamma_9db(), 50.0);
        let band = BerEstimate::binomial_3se(expected, cfg.n_symbols);
        assert!(
            (est.ber - expected).abs() < band,
            "{} vs {expected} (band {band})",
            est.ber
        );
    }

    #[test]
    fn deterministic_across_runs_and_workers() {
        let cfg = base_config(ReceiverKind::Sdjd).with_symbols(100_000);
        let a = simulate_ber(&cfg).unwrap();
        let b = simulate_ber(&cfg).unwrap();
        assert_eq!(a, b);
        let four = simulate_ber(&cfg.with_workers(4)).unwrap();
        assert_eq!(a.errors_counted, four.errors_counted);
        assert_eq!(a.ber, four.ber);
    }

    #[test]
    fn sdjd_at_rho_zero_is_statistically_ed() {
        let sdjd = SimConfig {
            params: LinkParams::from_snr_db(2, 9.0).with_rho(0.0),
            ..base_config(ReceiverKind::Sdjd)
        }
        .with_symbols(300_000);
        let ed = SimConfig {
            receiver: ReceiverKind::Ed,
            ..sdjd
        };
        let a = simulate_ber(&sdjd).unwrap();
        let b = simulate_ber(&ed).unwrap();
        let p = ber_ed(gamma_9db(), 50.0);
        let band = BerEstimate::binomial_3se(p, 300_000) * std::f64::consts::SQRT_2;
        assert!((a.ber - b.ber).abs() < band, "{} vs {}", a.ber, b.ber);
    }

    #[test]
    fn count_modes_agree_for_m4() {
        let params = LinkParams::from_snr_db(4, 9.0).with_rho(0.5);
        let cfg = SimConfig {
            params,
            ..base_config(ReceiverKind::Sdjd)
        }
        .with_symbols(400_000);
        let sym = simulate_ber(&cfg).unwrap();
        let bits = simulate_ber(&SimConfig {
            count_mode: CountMode::DirectBits,
            ..cfg
        })
        .unwrap();
        let band = 3.0 * ((sym.ber * (1.0 - sym.ber)) / cfg.n_symbols as f64).sqrt();
        assert!(
            (sym.ber - bits.ber).abs() < band,
            "symbol-converted {} vs direct bits {}",
            sym.ber,
            bits.ber
        );
    }

    #[test]
    fn scale_equivariance_in_pulse_energy() {
        // multiplying ep and n0 by the same constant leaves error events
        // unchanged draw for draw
        for receiver in [ReceiverKind::Sdjd, ReceiverKind::Sdsd] {
            let cfg = base_config(receiver).with_symbols(50_000);
            let scaled = SimConfig {
                params: LinkParams {
                    ep: cfg.params.ep * 7.5,
                    n0: cfg.params.n0 * 7.5,
                    ..cfg.params
                },
                ..cfg
            };
            let a = simulate_ber(&cfg).unwrap();
            let b = simulate_ber(&scaled).unwrap();
            assert_eq!(a.errors_counted, b.errors_counted, "{receiver}");
        }
    }

    #[test]
    fn low_confidence_flag_on_tiny_runs() {
        let cfg = base_config(ReceiverKind::Cd).with_symbols(200);
        let est = simulate_ber(&cfg).unwrap();
        assert!(est.low_confidence);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let mut cfg = base_config(ReceiverKind::Cd);
        cfg.params.rho = 2.0;
        assert!(matches!(simulate_ber(&cfg), Err(Error::InvalidParams(_))));
        let mut cfg = base_config(ReceiverKind::Cd);
        cfg.n_symbols = 0;
        assert!(simulate_ber(&cfg).is_err());
        let mut cfg = base_config(ReceiverKind::Sdjd);
        cfg.params.m_order = 4;
        cfg.params.ns = 2;
        assert!(matches!(simulate_ber(&cfg), Err(Error::Unsupported(_))));
    }

    #[test]
    fn spread_link_matches_scaled_theory() {
        // soft de-spreading with ns = 2 behaves like (2 gamma, 2 c)
        let params = LinkParams::from_snr_db(2, 6.0).with_rho(0.5).with_ns(2);
        let cfg = SimConfig {
            params,
            ..base_config(ReceiverKind::Sdjd)
        }
        .with_symbols(400_000);
        let est = simulate_ber(&cfg).unwrap();
        let theory = theory_estimate(&cfg, 1).unwrap();
        let band = BerEstimate::binomial_3se(theory.ber, cfg.n_symbols);
        assert!(
            (est.ber - theory.ber).abs() < band,
            "{} vs {} (band {band})",
            est.ber,
            theory.ber
        );
    }

    #[test]
    fn sweep_endpoints_recover_single_branch_receivers() {
        let cfg = base_config(ReceiverKind::Sdjd).with_symbols(200_000);
        let points = sweep(
            SweepAxis::Rho,
            &[0.0, 0.5, 1.0],
            &cfg,
            &SweepOptions::default(),
        )
        .unwrap();
        let points: Vec<SweepPoint> = points.into_iter().map(|p| p.unwrap()).collect();
        assert_eq!(points[0].theory.ber, ber_ed(gamma_9db(), 50.0));
        assert_eq!(points[2].theory.ber, ber_cd(gamma_9db()));
        for p in &points {
            let band = BerEstimate::binomial_3se(p.theory.ber.max(1e-6), 200_000);
            assert!(
                (p.sim.ber - p.theory.ber).abs() < band,
                "rho={}: sim {} theory {}",
                p.value,
                p.sim.ber,
                p.theory.ber
            );
        }
    }

    #[test]
    fn sweep_rejects_bad_grids() {
        let cfg = base_config(ReceiverKind::Cd);
        assert!(sweep(SweepAxis::Rho, &[], &cfg, &SweepOptions::default()).is_err());
        assert!(sweep(
            SweepAxis::Rho,
            &[0.5, 0.4],
            &cfg,
            &SweepOptions::default()
        )
        .is_err());
    }

    #[test]
    fn sweep_point_seeds_do_not_depend_on_the_rest_of_the_grid() {
        let cfg = base_config(ReceiverKind::Sdjd).with_symbols(50_000);
        let full = sweep(
            SweepAxis::Rho,
            &[0.2, 0.5, 0.8],
            &cfg,
            &SweepOptions::default(),
        )
        .unwrap();
        let partial = sweep(SweepAxis::Rho, &[0.5], &cfg, &SweepOptions::default()).unwrap();
        let a = full[1].as_ref().unwrap();
        let b = partial[0].as_ref().unwrap();
        assert_eq!(a.sim, b.sim);
        assert_eq!(a.seed, b.seed);
    }

    #[test]
    fn snr_axis_sets_energy_from_decibels() {
        let cfg = base_config(ReceiverKind::Cd).with_symbols(50_000);
        let points = sweep(
            SweepAxis::SnrDb,
            &[0.0, 6.0, 9.0],
            &cfg,
            &SweepOptions::default(),
        )
        .unwrap();
        let pts: Vec<SweepPoint> = points.into_iter().map(|p| p.unwrap()).collect();
        assert_eq!(pts[2].theory.ber, ber_cd(gamma_9db()));
        // monotone improvement with SNR, far beyond Monte Carlo noise here
        assert!(pts[0].sim.ber > pts[1].sim.ber && pts[1].sim.ber > pts[2].sim.ber);
    }

    #[test]
    fn pseudorandom_code_is_deterministic() {
        assert_eq!(pseudorandom_code(8, 5), pseudorandom_code(8, 5));
        assert!(pseudorandom_code(64, 5).iter().all(|&b| b <= 1));
    }
}
