//! Experiment configuration: a TOML file, overridden field by field by flags.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context};
use clap::{Parser, ValueEnum};
use relindex_core::ensemble::DescriptorFamily;
use relindex_core::{AlgebraDescriptor, Ensemble, EpsSchedule};
use serde::Deserialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Xi,
    Det,
    BsVerify,
    BsLimit,
    BkVerify,
    Ssf,
    Sweep,
}

impl Command {
    pub const ALL: [Command; 7] = [
        Command::Xi,
        Command::Det,
        Command::BsVerify,
        Command::BsLimit,
        Command::BkVerify,
        Command::Ssf,
        Command::Sweep,
    ];

    /// What `sweep` runs, in order.
    pub const SWEPT: [Command; 6] = [
        Command::Xi,
        Command::Det,
        Command::BsVerify,
        Command::BsLimit,
        Command::BkVerify,
        Command::Ssf,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Xi => "xi",
            Command::Det => "det",
            Command::BsVerify => "bs-verify",
            Command::BsLimit => "bs-limit",
            Command::BkVerify => "bk-verify",
            Command::Ssf => "ssf",
            Command::Sweep => "sweep",
        }
    }

    /// Commands whose operators are self-adjoint draws.
    fn self_adjoint_inputs(self) -> bool {
        matches!(self, Command::BkVerify | Command::Ssf)
    }

    pub fn default_ensemble(self) -> Ensemble {
        if self.self_adjoint_inputs() {
            Ensemble::HermitianGaussian
        } else {
            Ensemble::Dissipative
        }
    }

    fn accepts(self, e: Ensemble) -> bool {
        match e {
            Ensemble::UnitaryHaarLike => false,
            Ensemble::Dissipative => !self.self_adjoint_inputs(),
            Ensemble::HermitianGaussian | Ensemble::PositiveDefinite => true,
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Parser, Default)]
#[command(name = "relindex", version, about = "Seeded verification runs for relative index identities")]
pub struct Cli {
    /// TOML experiment file; flags override its fields.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub command: Option<Command>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Largest block dimension of random descriptors.
    #[arg(long)]
    pub dim: Option<usize>,
    /// Fixed descriptor, e.g. "2x0.25,2x0.25" or "3,3".
    #[arg(long, value_name = "SPEC")]
    pub blocks: Option<String>,
    #[arg(long)]
    pub trials: Option<usize>,
    /// Tolerance applied to every check, replacing the built-in ones.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub eps_start: Option<f64>,
    #[arg(long)]
    pub eps_factor: Option<f64>,
    #[arg(long)]
    pub eps_steps: Option<usize>,
    /// JSONL report file.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Operator file for `xi` and `det`.
    #[arg(long, value_name = "PATH")]
    pub input: Option<PathBuf>,
    /// bs-limit: n-invertible | both | boundary. bk-verify: matrix | synthetic.
    #[arg(long)]
    pub mode: Option<String>,
    #[arg(long)]
    pub ensemble: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct EpsFile {
    pub start: Option<f64>,
    pub factor: Option<f64>,
    pub steps: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct FileConfig {
    pub command: Option<Command>,
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub dim: Option<usize>,
    pub min_dim: Option<usize>,
    pub blocks: Option<String>,
    pub family: Option<DescriptorFamily>,
    pub ensemble: Option<String>,
    pub mode: Option<String>,
    pub tol: Option<f64>,
    /// Per-command tolerance, keyed by command name.
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default)]
    pub eps: EpsFile,
    pub input: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

impl FileConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("malformed config {}", path.display()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BkMode {
    Matrix,
    Synthetic,
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub command: Command,
    pub seed: u64,
    pub trials: usize,
    pub min_dim: usize,
    pub max_dim: usize,
    pub blocks: Option<Arc<AlgebraDescriptor>>,
    pub family: DescriptorFamily,
    /// `None` means each command's default.
    pub ensemble: Option<Ensemble>,
    pub limit_mode: relindex_core::bschwinger::LimitMode,
    pub bk_mode: BkMode,
    pub tol: Option<f64>,
    pub tolerances: BTreeMap<Command, f64>,
    pub schedule: EpsSchedule,
    pub input: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

pub const DEFAULT_MAX_DIM: usize = 8;
pub const DEFAULT_MIN_DIM: usize = 2;
/// Dense blocks beyond this size are refused.
pub const MAX_BLOCK_DIM: usize = 64;

fn positive(name: &str, x: f64) -> anyhow::Result<f64> {
    if !(x.is_finite() && x > 0.0) {
        bail!("{name} must be a positive number, got {x}");
    }
    Ok(x)
}

impl ExperimentConfig {
    pub fn resolve(cli: &Cli) -> anyhow::Result<Self> {
        let file = match &cli.config {
            Some(p) => FileConfig::load(p)?,
            None => FileConfig::default(),
        };
        let command = cli.command.or(file.command).context("no command given (--command or `command` in the config)")?;
        let seed = cli
            .seed
            .or(file.seed)
            .context("no seed given (--seed or `seed` in the config); runs must be reproducible")?;
        let trials = cli.trials.or(file.trials).unwrap_or(1);
        if trials == 0 {
            bail!("trials must be at least 1");
        }
        let max_dim = cli.dim.or(file.dim).unwrap_or(DEFAULT_MAX_DIM);
        let min_dim = file.min_dim.unwrap_or(DEFAULT_MIN_DIM.min(max_dim));
        if min_dim == 0 || min_dim > max_dim || max_dim > MAX_BLOCK_DIM {
            bail!("block dimensions must satisfy 1 <= min-dim <= dim <= {MAX_BLOCK_DIM} (got {min_dim}..={max_dim})");
        }
        let blocks = match cli.blocks.as_ref().or(file.blocks.as_ref()) {
            Some(spec) => {
                let d: AlgebraDescriptor = spec.parse().with_context(|| format!("bad block specification `{spec}`"))?;
                if d.dims().iter().any(|&n| n > MAX_BLOCK_DIM) {
                    bail!("block dimensions above {MAX_BLOCK_DIM} are not supported");
                }
                Some(Arc::new(d))
            }
            None => None,
        };
        let ensemble = match cli.ensemble.as_ref().or(file.ensemble.as_ref()) {
            Some(name) => {
                let e: Ensemble = name.parse()?;
                let targets: Vec<Command> =
                    if command == Command::Sweep { Command::SWEPT.to_vec() } else { vec![command] };
                if let Some(c) = targets.iter().find(|c| !c.accepts(e)) {
                    bail!("ensemble {e} is not valid for {c}");
                }
                Some(e)
            }
            None => None,
        };
        let mode = cli.mode.as_ref().or(file.mode.as_ref()).map(|m| m.to_ascii_lowercase());
        let (limit_mode, bk_mode) = parse_mode(command, mode.as_deref())?;

        let tol = cli.tol.or(file.tol).map(|t| positive("tol", t)).transpose()?;
        let mut tolerances = BTreeMap::new();
        for (key, &t) in &file.tolerances {
            let c = Command::ALL
                .iter()
                .find(|c| c.name() == key)
                .with_context(|| format!("unknown command `{key}` in [tolerances]"))?;
            tolerances.insert(*c, positive(&format!("tolerances.{key}"), t)?);
        }

        let default = EpsSchedule::default();
        let start = cli.eps_start.or(file.eps.start).unwrap_or(default.values()[0]);
        let factor = cli
            .eps_factor
            .or(file.eps.factor)
            .unwrap_or(default.values()[1] / default.values()[0]);
        let steps = cli.eps_steps.or(file.eps.steps).unwrap_or(default.values().len());
        let schedule = EpsSchedule::geometric(positive("eps-start", start)?, factor, steps)
            .context("invalid epsilon schedule")?;

        let input = cli.input.clone().or(file.input);
        if input.is_some() && !matches!(command, Command::Xi | Command::Det) {
            bail!("--input is only used by the xi and det commands");
        }
        Ok(Self {
            command,
            seed,
            trials,
            min_dim,
            max_dim,
            blocks,
            family: file.family.unwrap_or(DescriptorFamily::Mixed),
            ensemble,
            limit_mode,
            bk_mode,
            tol,
            tolerances,
            schedule,
            input,
            out: cli.out.clone().or(file.out),
        })
    }

    pub fn ensemble_for(&self, command: Command) -> Ensemble {
        self.ensemble.unwrap_or_else(|| command.default_ensemble())
    }

    /// Tolerance override for `command`, if any.
    pub fn tolerance_for(&self, command: Command) -> Option<f64> {
        self.tol.or_else(|| self.tolerances.get(&command).copied())
    }
}

fn parse_mode(
    command: Command,
    mode: Option<&str>,
) -> anyhow::Result<(relindex_core::bschwinger::LimitMode, BkMode)> {
    use relindex_core::bschwinger::LimitMode;
    let mut limit = LimitMode::NInvertible;
    let mut bk = BkMode::Matrix;
    match (command, mode) {
        (_, None) => {}
        (Command::BsLimit, Some(m)) => {
            limit = match m {
                "n-invertible" => LimitMode::NInvertible,
                "both" => LimitMode::BothRegularized,
                "boundary" => LimitMode::Boundary,
                other => bail!("unknown bs-limit mode `{other}` (n-invertible, both, boundary)"),
            }
        }
        (Command::BkVerify, Some(m)) => {
            bk = match m {
                "matrix" => BkMode::Matrix,
                "synthetic" => BkMode::Synthetic,
                other => bail!("unknown bk-verify mode `{other}` (matrix, synthetic)"),
            }
        }
        (c, Some(_)) => bail!("--mode does not apply to {c}"),
    }
    Ok((limit, bk))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cli(command: Command) -> Cli {
        Cli {
            command: Some(command),
            seed: Some(1),
            ..Cli::default()
        }
    }

    #[test]
    fn defaults() {
        let c = ExperimentConfig::resolve(&cli(Command::BsVerify)).unwrap();
        assert_eq!(c.trials, 1);
        assert_eq!((c.min_dim, c.max_dim), (2, 8));
        assert_eq!(c.schedule, EpsSchedule::default());
        assert_eq!(c.ensemble_for(Command::BkVerify), Ensemble::HermitianGaussian);
    }

    #[test]
    fn seed_is_required() {
        let mut c = cli(Command::Xi);
        c.seed = None;
        assert!(ExperimentConfig::resolve(&c).is_err());
    }

    #[test]
    fn rejects_invalid_combinations() {
        let mut c = cli(Command::BkVerify);
        c.ensemble = Some("dissipative".into());
        assert!(ExperimentConfig::resolve(&c).is_err());
        let mut c = cli(Command::Ssf);
        c.mode = Some("both".into());
        assert!(ExperimentConfig::resolve(&c).is_err());
        let mut c = cli(Command::BsVerify);
        c.trials = Some(0);
        assert!(ExperimentConfig::resolve(&c).is_err());
        let mut c = cli(Command::BsVerify);
        c.eps_factor = Some(2.0);
        assert!(ExperimentConfig::resolve(&c).is_err());
        let mut c = cli(Command::BsVerify);
        c.input = Some("m.txt".into());
        assert!(ExperimentConfig::resolve(&c).is_err());
    }

    #[test]
    fn file_fields_and_overrides() {
        let file: FileConfig = toml::from_str(
            "command = \"bs-limit\"\nseed = 9\ntrials = 4\nmode = \"both\"\n[tolerances]\nbs-limit = 1e-5\n[eps]\nsteps = 8\n",
        )
        .unwrap();
        assert_eq!(file.command, Some(Command::BsLimit));
        assert!(toml::from_str::<FileConfig>("colour = 3\n").is_err());
    }
}
