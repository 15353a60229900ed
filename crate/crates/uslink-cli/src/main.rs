//! Experiment runner for the intra-body link simulator.
//!
//! Every subcommand resolves an experiment spec (defaults < `--config` file
//! < flags), runs it, and writes one CSV per channel plus a JSON summary of
//! the fully resolved configuration. Exit status is nonzero iff any grid
//! point failed.

mod presets;
mod runner;
mod spec;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use spec::{ExperimentKind, ExperimentSpec};

#[derive(Parser)]
#[command(
    name = "uslink",
    version,
    about = "Ultrasonic intra-body link experiments: error rates, capacity, and splitting ratios"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulated and theoretical BER over a splitting-ratio grid
    BerVsRho(CommonArgs),
    /// Simulated and theoretical BER over an SNR grid
    BerVsSnr(CommonArgs),
    /// Channel capacity over a splitting-ratio grid
    CapacityVsRho(CommonArgs),
    /// Optimal splitting ratios over an SNR grid
    OptimalRho(CommonArgs),
    /// Run a named reproduction preset (see list-presets)
    Reproduce {
        /// Preset name: fig3, fig5, fig6, fig7, or fig8
        preset: String,
        #[command(flatten)]
        overrides: CommonArgs,
    },
    /// List the reproduction presets and their default parameters
    ListPresets,
}

#[derive(Args, Default)]
struct CommonArgs {
    /// Config file of `key = value` lines; flags override its values
    #[arg(long)]
    config: Option<PathBuf>,
    /// Receivers, comma-separated: cd, ed, sdsd, sdjd
    #[arg(long)]
    receiver: Option<String>,
    /// Modulation orders, comma-separated powers of two
    #[arg(long)]
    m_order: Option<String>,
    /// Nominal SNR(s) in dB: a value, list, or start:step:stop grid
    #[arg(long)]
    snr_db: Option<String>,
    /// Splitting ratio(s): a value for SNR sweeps, or a grid for rho sweeps
    #[arg(long)]
    rho: Option<String>,
    /// Square-noise dimensionality c
    #[arg(long)]
    c_dim: Option<f64>,
    /// Spreading-code lengths, comma-separated (2-PPM only)
    #[arg(long)]
    ns: Option<String>,
    /// Channel-estimation error variances, comma-separated
    #[arg(long)]
    sigma_e2: Option<String>,
    /// Channels, comma-separated: gaussian, nakagami
    #[arg(long)]
    channel: Option<String>,
    /// Generalized Nakagami parameters as m,omega,z
    #[arg(long)]
    nakagami: Option<String>,
    /// Rescale fading so the mean-square coefficient is 1
    #[arg(long)]
    normalize_fading: bool,
    /// Symbols simulated per grid point
    #[arg(long)]
    symbols: Option<u64>,
    /// Base seed; every condition and grid point derives its own stream
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for the per-point simulation
    #[arg(long)]
    workers: Option<usize>,
    /// Output CSV path (multi-channel runs append the channel name)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Square-noise model: gaussian (analysis model) or gamma (positive)
    #[arg(long)]
    square_noise: Option<String>,
    /// Draws for fading-averaged theory values and optimal-ratio averages
    #[arg(long)]
    theory_draws: Option<u64>,
    /// Draws per capacity estimate
    #[arg(long)]
    capacity_draws: Option<u64>,
}

impl CommonArgs {
    fn apply(&self, spec: &mut ExperimentSpec) -> Result<(), String> {
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path)
                .map_err(|e| format!("reading {}: {e}", path.display()))?;
            spec.apply_kv(&text)
                .map_err(|e| format!("{}: {e}", path.display()))?;
        }
        if let Some(v) = &self.receiver {
            spec.apply_pair("receivers", v)?;
        }
        if let Some(v) = &self.m_order {
            spec.apply_pair("m_order", v)?;
        }
        if let Some(v) = &self.snr_db {
            match spec.kind {
                ExperimentKind::BerVsSnr | ExperimentKind::OptimalRho => {
                    spec.apply_pair("grid", v)?
                }
                _ => spec.apply_pair("snr_db", v)?,
            }
        }
        if let Some(v) = &self.rho {
            match spec.kind {
                ExperimentKind::BerVsRho | ExperimentKind::CapacityVsRho => {
                    spec.apply_pair("grid", v)?
                }
                _ => spec.apply_pair("rho", v)?,
            }
        }
        if let Some(v) = self.c_dim {
            spec.c_dim = v;
        }
        if let Some(v) = &self.ns {
            spec.apply_pair("ns", v)?;
        }
        if let Some(v) = &self.sigma_e2 {
            spec.apply_pair("sigma_e2", v)?;
        }
        if let Some(v) = &self.channel {
            spec.apply_pair("channel", v)?;
        }
        if let Some(v) = &self.nakagami {
            spec.apply_pair("nakagami", v)?;
        }
        if self.normalize_fading {
            spec.normalize_fading = true;
        }
        if let Some(v) = self.symbols {
            spec.symbols = v;
        }
        if let Some(v) = self.seed {
            spec.seed = v;
        }
        if let Some(v) = self.workers {
            spec.workers = v;
        }
        if let Some(v) = &self.out {
            spec.out = v.clone();
        }
        if let Some(v) = &self.square_noise {
            spec.apply_pair("square_noise", v)?;
        }
        if let Some(v) = self.theory_draws {
            spec.theory_draws = v;
        }
        if let Some(v) = self.capacity_draws {
            spec.capacity_draws = v;
        }
        Ok(())
    }
}

fn run(kind: ExperimentKind, args: &CommonArgs) -> Result<runner::RunReport, String> {
    let mut spec = ExperimentSpec::defaults(kind);
    args.apply(&mut spec)?;
    runner::run_experiment(&spec)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::BerVsRho(args) => run(ExperimentKind::BerVsRho, args),
        Command::BerVsSnr(args) => run(ExperimentKind::BerVsSnr, args),
        Command::CapacityVsRho(args) => run(ExperimentKind::CapacityVsRho, args),
        Command::OptimalRho(args) => run(ExperimentKind::OptimalRho, args),
        Command::Reproduce { preset, overrides } => match presets::preset_spec(preset) {
            Some(mut spec) => overrides
                .apply(&mut spec)
                .and_then(|()| runner::run_experiment(&spec)),
            None => Err(format!(
                "unknown preset `{preset}`; run `uslink list-presets`"
            )),
        },
        Command::ListPresets => {
            print!("{}", presets::preset_table());
            return ExitCode::SUCCESS;
        }
    };
    match outcome {
        Ok(report) => {
            for path in &report.outputs {
                println!("wrote {}", path.display());
            }
            println!("wrote {}", report.summary.display());
            if report.ok() {
                println!("{} points, all ok", report.points);
                ExitCode::SUCCESS
            } else {
                eprintln!(
                    "{} of {} points failed:",
                    report.failures.len(),
                    report.points
                );
                for failure in &report.failures {
                    eprintln!("  {failure}");
                }
                ExitCode::FAILURE
            }
        }
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::FAILURE
        }
    }
}
