//! Experiment presets, strict configuration and CSV output for `lowres`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fmt;
use std::fs;
use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use lowres::quantization::Resolution;

pub mod config;
pub mod output;
pub mod plots;
pub mod presets;

pub use config::{validate_config, ConfigErrors, ExperimentConfig, Sweep};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// Front-end power budget per architecture.
    PowerTable,
    /// Closed-form SINR versus SNR and SIR.
    AqnmCurves,
    /// OFDM link simulation against the closed-form prediction.
    LinkValidate,
    /// Two-user link with an in-band interferer.
    SdmaLink,
    /// Multi-cell OFDMA at several ADC resolutions.
    CellOfdma,
    /// Multi-cell SDMA against OFDMA.
    CellSdma,
    /// Transmit power spectral density.
    TxPsd,
    /// Adjacent-channel leakage versus DAC bits and filter order.
    AclrSweep,
    /// EVM versus RF noise and DAC bits.
    EvmSweep,
}

impl Preset {
    pub fn name(self) -> &'static str {
        match self {
            Preset::PowerTable => "power-table",
            Preset::AqnmCurves => "aqnm-curves",
            Preset::LinkValidate => "link-validate",
            Preset::SdmaLink => "sdma-link",
            Preset::CellOfdma => "cell-ofdma",
            Preset::CellSdma => "cell-sdma",
            Preset::TxPsd => "tx-psd",
            Preset::AclrSweep => "aclr-sweep",
            Preset::EvmSweep => "evm-sweep",
        }
    }

    /// Config key that `--bits` sets.
    fn bits_key(self) -> Option<&'static str> {
        match self {
            Preset::PowerTable | Preset::CellSdma => None,
            Preset::AqnmCurves => Some("aqnm.bits"),
            Preset::LinkValidate => Some("link.bits"),
            Preset::SdmaLink => Some("link.sdma_bits"),
            Preset::CellOfdma => Some("cell.bits"),
            Preset::TxPsd => Some("tx.psd_bits"),
            Preset::AclrSweep => Some("tx.aclr_bits"),
            Preset::EvmSweep => Some("tx.evm_bits"),
        }
    }

    /// Config key that `--snr` sets.
    fn snr_key(self) -> Option<&'static str> {
        match self {
            Preset::AqnmCurves => Some("aqnm.snr_db"),
            Preset::LinkValidate => Some("link.snr_db"),
            Preset::EvmSweep => Some("tx.evm_rf_snr_db"),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Parser)]
#[command(name = "lowres", version, about = "Low-resolution converter experiments")]
pub struct Cli {
    #[arg(long, value_enum)]
    pub preset: Preset,
    /// TOML configuration; omitted sections take their defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Master seed; overrides `seed` in the config.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    pub jobs: Option<usize>,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Omit the timestamp header line so reruns are byte-identical.
    #[arg(long)]
    pub no_timestamp: bool,
    /// Evaluate the preset's acceptance checks; exit 3 if any fails.
    #[arg(long)]
    pub check: bool,
    /// Override a config key, e.g. `--set network.n_drops=5`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// Resolution list such as `2,3,4,inf`.
    #[arg(long)]
    pub bits: Option<String>,
    /// Sweep `start:stop[:step]` in dB (step defaults to 5).
    #[arg(long, allow_hyphen_values = true)]
    pub snr: Option<String>,
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Domain(lowres::Error),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 1,
            CliError::Domain(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error:\n{m}"),
            CliError::Domain(e) => write!(f, "domain error: {e}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<lowres::Error> for CliError {
    fn from(e: lowres::Error) -> Self {
        CliError::Domain(e)
    }
}

impl From<ConfigErrors> for CliError {
    fn from(e: ConfigErrors) -> Self {
        CliError::Config(e.to_string())
    }
}

/// One acceptance check of a preset.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            pass,
            detail: detail.into(),
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.pass { "PASS" } else { "FAIL" };
        write!(f, "{tag} {}: {}", self.name, self.detail)
    }
}

#[derive(Debug)]
pub struct RunReport {
    pub files: Vec<PathBuf>,
    pub checks: Vec<Check>,
}

impl RunReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

fn bits_literal(list: &str) -> Result<String, CliError> {
    let items = list
        .split(',')
        .map(|t| {
            t.parse::<Resolution>()
                .map(|r| match r {
                    Resolution::Bits(n) => n.to_string(),
                    Resolution::Infinite => "\"inf\"".to_string(),
                })
                .map_err(|e| CliError::Config(format!("--bits: {e}")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(format!("[{}]", items.join(", ")))
}

/// Config text plus flag-derived overrides, resolved and validated.
pub fn resolve(cli: &Cli) -> Result<ExperimentConfig, CliError> {
    let text = match &cli.config {
        Some(p) => fs::read_to_string(p).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?,
        None => String::new(),
    };
    let mut overrides = cli.overrides.clone();
    if let Some(s) = cli.seed {
        overrides.push(format!("seed={s}"));
    }
    if let Some(b) = &cli.bits {
        let key = cli.preset.bits_key().ok_or_else(|| {
            CliError::Config(format!("--bits does not apply to preset {}", cli.preset.name()))
        })?;
        overrides.push(format!("{key}={}", bits_literal(b)?));
    }
    if let Some(s) = &cli.snr {
        let key = cli.preset.snr_key().ok_or_else(|| {
            CliError::Config(format!("--snr does not apply to preset {}", cli.preset.name()))
        })?;
        let sw = Sweep::parse(s).map_err(|e| CliError::Config(format!("--snr: {e}")))?;
        overrides.push(format!(
            "{key}={{ start = {:?}, stop = {:?}, step = {:?} }}",
            sw.start, sw.stop, sw.step
        ));
    }
    Ok(validate_config(&text, &overrides)?)
}

/// Resolve the config, run the preset on a pool of `--jobs` workers and
/// write its files.
pub fn run(cli: &Cli) -> Result<RunReport, CliError> {
    let cfg = resolve(cli)?;
    if cli.jobs == Some(0) {
        return Err(CliError::Config("--jobs must be at least 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Config(format!("worker pool: {e}")))?;
    let stamp = (!cli.no_timestamp).then(|| chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true));
    let mut out = output::OutputDir::create(&cli.out, cli.preset.name(), cfg.seed, &cfg.to_toml(), stamp)?;
    let checks = pool.install(|| presets::run_preset(cli.preset, &cfg, &mut out))?;
    Ok(RunReport {
        files: out.files().to_vec(),
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_become_overrides() {
        let cli = Cli::parse_from([
            "lowres", "--preset", "link-validate", "--bits", "2,3,inf", "--snr", "-5:30", "--seed", "7",
        ]);
        let cfg = resolve(&cli).unwrap();
        assert_eq!(
            cfg.link.bits,
            vec![Resolution::Bits(2), Resolution::Bits(3), Resolution::Infinite]
        );
        assert_eq!(cfg.link.snr_db, Sweep::new(-5.0, 30.0, 5.0));
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.tx.signal.seed, 7);
    }

    #[test]
    fn misplaced_flags_rejected() {
        let cli = Cli::parse_from(["lowres", "--preset", "power-table", "--snr", "0:10"]);
        assert_eq!(resolve(&cli).unwrap_err().exit_code(), 1);
        let cli = Cli::parse_from(["lowres", "--preset", "aclr-sweep", "--bits", "0,3"]);
        assert_eq!(resolve(&cli).unwrap_err().exit_code(), 1);
    }
}
