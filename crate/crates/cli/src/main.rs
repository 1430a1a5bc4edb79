mod config;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use gabormult_core::channel::LinkConfig;
use gabormult_core::symbols::SymbolFamilySpec;

use config::{ApproxParams, Command, Cutoffs, DecayParams, ExperimentConfig, FrameParams, Grid, OperatorParams, OperatorSource, WindowKind};

/// Gabor multipliers, side-diagonal decompositions and doubly dispersive
/// channel experiments on Z_L.
#[derive(Parser)]
#[command(name = "gabormult", version, about)]
struct Cli {
    /// Print the resolved configuration as JSON and exit without running.
    #[arg(long, global = true)]
    print_config: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Frame bounds of a Gaussian Gabor system; writes the window as JSON.
    Frame(FrameArgs),
    /// Side-diagonal symbols of an operator; writes the symbol family as JSON.
    Decompose(OperatorArgs),
    /// Truncation error sweep; writes `N,E_N,bound_tail_sum` CSV.
    Approx(ApproxArgs),
    /// Side-diagonal envelope by lattice-norm shell; writes `n,shell_max` CSV.
    Decay(DecayArgs),
    /// Monte-Carlo link simulation; writes `method,band,mse,ber,residual,cond` CSV.
    Channel(ChannelArgs),
    /// Run an experiment described by a JSON config file.
    Run(RunArgs),
}

#[derive(Args)]
struct GridArgs {
    /// Signal length.
    #[arg(long = "L")]
    len: usize,
    /// Time step of the lattice.
    #[arg(long)]
    a: usize,
    /// Frequency step of the lattice [default: a]
    #[arg(long)]
    b: Option<usize>,
    /// Gaussian width relative to sqrt(L).
    #[arg(long, default_value_t = 1.0)]
    width: f64,
}

impl GridArgs {
    fn grid(&self) -> Grid {
        Grid { len: self.len, a: self.a, b: self.b.unwrap_or(self.a), width: self.width }
    }
}

#[derive(Args)]
struct CommonArgs {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct SourceArgs {
    /// Operator as a square-matrix JSON file.
    #[arg(long)]
    op: Option<PathBuf>,
    /// Symbol family spec JSON file.
    #[arg(long)]
    symbol_family: Option<PathBuf>,
    /// Polynomial decay order of a generated symbol seeded by --seed.
    #[arg(long)]
    s: Option<f64>,
}

impl SourceArgs {
    fn source(&self, seed: u64) -> Result<OperatorSource> {
        if let Some(path) = &self.op {
            return Ok(OperatorSource::File(path.clone()));
        }
        if let Some(path) = &self.symbol_family {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let spec: SymbolFamilySpec = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
            return Ok(OperatorSource::Symbol(spec));
        }
        match self.s {
            Some(s) => Ok(OperatorSource::Symbol(SymbolFamilySpec::poly(s, seed))),
            None => bail!("one of --op, --symbol-family, --s is required"),
        }
    }
}

#[derive(Args)]
struct FrameArgs {
    #[command(flatten)]
    grid: GridArgs,
    /// Use the canonical tight window.
    #[arg(long, conflicts_with = "dual")]
    tight: bool,
    /// Use the canonical dual window.
    #[arg(long)]
    dual: bool,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct OperatorArgs {
    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    source: SourceArgs,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct ApproxArgs {
    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    source: SourceArgs,
    /// Cutoffs as start:step:end, in lattice steps.
    #[arg(long = "Ns")]
    ns: Cutoffs,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct DecayArgs {
    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    source: SourceArgs,
    /// Fit range lo:hi in lattice steps [default: 2 to L/(2 max(a,b)) - 1]
    #[arg(long, value_parser = parse_pair)]
    fit_range: Option<(usize, usize)>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct ChannelArgs {
    #[command(flatten)]
    grid: GridArgs,
    /// Maximal delay in samples.
    #[arg(long, default_value_t = 2)]
    tau0: usize,
    /// Maximal Doppler in frequency bins.
    #[arg(long, default_value_t = 1)]
    nu0: usize,
    /// Received SNR in dB.
    #[arg(long, default_value_t = 20.0, conflicts_with = "noiseless")]
    snr: f64,
    /// Disable additive noise.
    #[arg(long)]
    noiseless: bool,
    /// Band half-widths of the banded equalizers, in lattice steps.
    #[arg(long, value_delimiter = ',', default_value = "0,1,2,4")]
    bands: Vec<usize>,
    #[arg(long, default_value_t = 50)]
    trials: usize,
    /// Weight of the line-of-sight identity path.
    #[arg(long, default_value_t = 1.0)]
    identity_weight: f64,
    /// Total energy of the random spreading taps.
    #[arg(long, default_value_t = 0.25)]
    tap_energy: f64,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
}

fn parse_pair(s: &str) -> std::result::Result<(usize, usize), String> {
    let (lo, hi) = s.split_once(':').ok_or_else(|| format!("expected lo:hi, got {s:?}"))?;
    let num = |p: &str| p.trim().parse::<usize>().map_err(|_| format!("not a nonnegative integer: {p:?}"));
    Ok((num(lo)?, num(hi)?))
}

fn resolve(cmd: Cmd) -> Result<ExperimentConfig> {
    let (command, common) = match cmd {
        Cmd::Frame(a) => {
            let window = if a.tight {
                WindowKind::Tight
            } else if a.dual {
                WindowKind::Dual
            } else {
                WindowKind::Gaussian
            };
            (Command::Frame(FrameParams { grid: a.grid.grid(), window }), a.common)
        }
        Cmd::Decompose(a) => {
            let operator = a.source.source(a.common.seed)?;
            (Command::Decompose(OperatorParams { grid: a.grid.grid(), operator }), a.common)
        }
        Cmd::Approx(a) => {
            let operator = a.source.source(a.common.seed)?;
            (Command::Approx(ApproxParams { grid: a.grid.grid(), operator, ns: a.ns }), a.common)
        }
        Cmd::Decay(a) => {
            let operator = a.source.source(a.common.seed)?;
            (Command::Decay(DecayParams { grid: a.grid.grid(), operator, fit_range: a.fit_range }), a.common)
        }
        Cmd::Channel(a) => {
            let g = a.grid.grid();
            let link = LinkConfig {
                len: g.len,
                a: g.a,
                b: g.b,
                width: g.width,
                tau0: a.tau0,
                nu0: a.nu0,
                identity_weight: a.identity_weight,
                tap_energy: a.tap_energy,
                snr_db: (!a.noiseless).then_some(a.snr),
                bands: a.bands,
                trials: a.trials,
                seed: a.common.seed,
            };
            (Command::Channel(link), a.common)
        }
        Cmd::Run(a) => {
            let text = std::fs::read_to_string(&a.config).with_context(|| format!("reading {}", a.config.display()))?;
            return ExperimentConfig::from_json(&text);
        }
    };
    let cfg = ExperimentConfig { command, seed: common.seed, out: common.out };
    cfg.validate()?;
    Ok(cfg)
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var("GABORMULT_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|&n| n > 0).with_context(|| format!("GABORMULT_THREADS must be a positive integer, got {raw:?}"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|()| resolve(cli.cmd)).and_then(|cfg| {
        if cli.print_config {
            println!("{}", cfg.to_json());
            Ok(())
        } else {
            run::run(&cfg).map(|_| ())
        }
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
