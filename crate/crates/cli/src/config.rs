//! Experiment configuration shared by the flag parser and `run --config`.

use std::fmt;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use gabormult_core::channel::LinkConfig;
use gabormult_core::symbols::SymbolFamilySpec;
use gabormult_core::tf::TFLattice;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: Command,
    pub seed: u64,
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Command {
    Frame(FrameParams),
    Decompose(OperatorParams),
    Approx(ApproxParams),
    Decay(DecayParams),
    Channel(LinkConfig),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Frame(_) => "frame",
            Command::Decompose(_) => "decompose",
            Command::Approx(_) => "approx",
            Command::Decay(_) => "decay",
            Command::Channel(_) => "channel",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowKind {
    Gaussian,
    Tight,
    Dual,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    #[serde(rename = "L")]
    pub len: usize,
    pub a: usize,
    pub b: usize,
    pub width: f64,
}

impl Grid {
    pub fn lattice(&self) -> Result<TFLattice> {
        Ok(TFLattice::new(self.len, self.a, self.b)?)
    }

    fn validate(&self) -> Result<()> {
        if self.len == 0 {
            bail!("L must be positive");
        }
        if self.a == 0 || self.b == 0 {
            bail!("a and b must be positive");
        }
        self.lattice()?;
        if !(self.width > 0.0 && self.width.is_finite()) {
            bail!("width must be positive, got {}", self.width);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameParams {
    pub grid: Grid,
    pub window: WindowKind,
}

/// Where the operator under study comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum OperatorSource {
    /// Square-matrix JSON file.
    File(PathBuf),
    /// Kohn-Nirenberg operator of a generated symbol.
    Symbol(SymbolFamilySpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorParams {
    pub grid: Grid,
    pub operator: OperatorSource,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ApproxParams {
    pub grid: Grid,
    pub operator: OperatorSource,
    pub ns: Cutoffs,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecayParams {
    pub grid: Grid,
    pub operator: OperatorSource,
    pub fit_range: Option<(usize, usize)>,
}

/// Inclusive `start:step:end` range of truncation cutoffs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Cutoffs {
    pub start: usize,
    pub step: usize,
    pub end: usize,
}

impl Cutoffs {
    pub fn values(&self) -> Vec<usize> {
        (self.start..=self.end).step_by(self.step).collect()
    }
}

impl std::str::FromStr for Cutoffs {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [start, step, end] = parts.as_slice() else {
            return Err(format!("expected start:step:end, got {s:?}"));
        };
        let num = |p: &str| p.trim().parse::<usize>().map_err(|_| format!("not a nonnegative integer: {p:?}"));
        let (start, step, end) = (num(start)?, num(step)?, num(end)?);
        if step == 0 {
            return Err("step must be positive".into());
        }
        if start > end {
            return Err(format!("start {start} exceeds end {end}"));
        }
        Ok(Cutoffs { start, step, end })
    }
}

impl TryFrom<String> for Cutoffs {
    type Error = String;

    fn try_from(s: String) -> std::result::Result<Self, String> {
        s.parse()
    }
}

impl From<Cutoffs> for String {
    fn from(c: Cutoffs) -> String {
        c.to_string()
    }
}

impl fmt::Display for Cutoffs {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.step, self.end)
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text).context("invalid config")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        match &self.command {
            Command::Frame(p) => p.grid.validate(),
            Command::Decompose(p) => {
                p.grid.validate()?;
                validate_source(&p.operator, &p.grid)
            }
            Command::Approx(p) => {
                p.grid.validate()?;
                validate_source(&p.operator, &p.grid)
            }
            Command::Decay(p) => {
                p.grid.validate()?;
                validate_source(&p.operator, &p.grid)?;
                if let Some((lo, hi)) = p.fit_range {
                    if lo > hi {
                        bail!("fit_range start {lo} exceeds end {hi}");
                    }
                }
                Ok(())
            }
            Command::Channel(c) => {
                if c.seed != self.seed {
                    bail!("channel seed {} differs from run seed {}", c.seed, self.seed);
                }
                validate_link(c)
            }
        }
    }
}

fn validate_source(src: &OperatorSource, grid: &Grid) -> Result<()> {
    if let OperatorSource::Symbol(spec) = src {
        spec.validate().context("symbol")?;
        if grid.len < 8 {
            bail!("L must be at least 8 for generated symbols");
        }
    }
    Ok(())
}

fn validate_link(c: &LinkConfig) -> Result<()> {
    Grid { len: c.len, a: c.a, b: c.b, width: c.width }.validate()?;
    if 4 * c.tau0 >= c.len {
        bail!("tau0 must be below L/4");
    }
    if 4 * c.nu0 >= c.len {
        bail!("nu0 must be below L/4");
    }
    if c.trials == 0 {
        bail!("trials must be at least 1");
    }
    if !(c.identity_weight >= 0.0 && c.identity_weight.is_finite()) {
        bail!("identity_weight must be >= 0");
    }
    if !(c.tap_energy >= 0.0 && c.tap_energy.is_finite()) {
        bail!("tap_energy must be >= 0");
    }
    if let Some(snr) = c.snr_db {
        if !snr.is_finite() {
            bail!("snr must be finite");
        }
    }
    Ok(())
}
