//! Experiment configuration: one TOML file with a section per module.
//!
//! Parsing is strict. Unknown keys and every invariant violation are
//! collected and reported together, each with its line when it can be found.

use std::fmt;

use lowres::network::NetworkConfig;
use lowres::ofdm::{Modulation, OfdmNumerology};
use lowres::power::{RxFrontEndConfig, TxFrontEndConfig};
use lowres::quantization::Resolution;
use lowres::tx_chain::{ChannelPlan, DacChainConfig, TxSignalConfig};
use serde::{Deserialize, Serialize};
use toml::{Table, Value};

/// Inclusive sweep `start, start + step, ...` up to `stop`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Sweep {
    pub const fn new(start: f64, stop: f64, step: f64) -> Self {
        Self { start, stop, step }
    }

    pub fn points(&self) -> Vec<f64> {
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        (0..n).map(|i| self.start + i as f64 * self.step).collect()
    }

    fn violations(&self, name: &str) -> Vec<String> {
        let mut v = Vec::new();
        if !(self.step > 0.0) || !self.step.is_finite() {
            v.push(format!("{name}.step must be positive"));
        }
        if !(self.stop >= self.start) {
            v.push(format!("{name}.stop must be >= {name}.start"));
        }
        v
    }

    /// `a:b` (step 5) or `a:b:step`.
    pub fn parse(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |t: &str| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| format!("not a number in sweep {s:?}: {t:?}"))
        };
        match parts.as_slice() {
            [a, b] => Ok(Self::new(num(a)?, num(b)?, 5.0)),
            [a, b, c] => Ok(Self::new(num(a)?, num(b)?, num(c)?)),
            _ => Err(format!("sweep must look like start:stop or start:stop:step, got {s:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PowerSection {
    pub low_res_bits: u32,
    pub hybrid_streams: u32,
    pub tx: TxFrontEndConfig,
    pub rx: RxFrontEndConfig,
}

impl Default for PowerSection {
    fn default() -> Self {
        Self {
            low_res_bits: 4,
            hybrid_streams: 2,
            tx: TxFrontEndConfig::default(),
            rx: RxFrontEndConfig::default(),
        }
    }
}

/// Closed-form SINR curves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AqnmSection {
    pub bits: Vec<Resolution>,
    pub bf_gain: f64,
    pub snr_db: Sweep,
    pub sdma_bits: Vec<Resolution>,
    pub sdma_gamma0_db: Vec<f64>,
    pub sir_db: Sweep,
}

impl Default for AqnmSection {
    fn default() -> Self {
        Self {
            bits: vec![
                Resolution::Bits(1),
                Resolution::Bits(2),
                Resolution::Bits(3),
                Resolution::Bits(4),
                Resolution::Bits(5),
                Resolution::Infinite,
            ],
            bf_gain: 1.0,
            snr_db: Sweep::new(-10.0, 40.0, 1.0),
            sdma_bits: vec![Resolution::Bits(3), Resolution::Bits(4), Resolution::Infinite],
            sdma_gamma0_db: vec![0.0, 15.0],
            sir_db: Sweep::new(0.0, 40.0, 2.0),
        }
    }
}

/// OFDM link simulations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LinkSection {
    pub bits: Vec<Resolution>,
    /// DAC resolution relative to the ADC; `dac_ideal` overrides it.
    pub dac_extra_bits: u32,
    pub dac_ideal: bool,
    pub snr_db: Sweep,
    pub n_symbols: usize,
    pub n_pilots: usize,
    pub fir_taps: usize,
    pub modulation: Modulation,
    /// Independent channel/noise realizations averaged per point.
    pub trials: usize,
    pub sdma_bits: Vec<Resolution>,
    pub sdma_gamma0_db: Vec<f64>,
    pub sdma_sir_db: Sweep,
    pub numerology: OfdmNumerology,
}

impl Default for LinkSection {
    fn default() -> Self {
        Self {
            bits: vec![
                Resolution::Bits(2),
                Resolution::Bits(3),
                Resolution::Bits(4),
                Resolution::Bits(5),
            ],
            dac_extra_bits: 2,
            dac_ideal: false,
            snr_db: Sweep::new(-5.0, 30.0, 5.0),
            n_symbols: 20,
            n_pilots: 2,
            fir_taps: 129,
            modulation: Modulation::Qpsk,
            trials: 1,
            sdma_bits: vec![Resolution::Bits(3), Resolution::Bits(4)],
            sdma_gamma0_db: vec![0.0, 15.0],
            sdma_sir_db: Sweep::new(0.0, 40.0, 5.0),
            numerology: OfdmNumerology::default(),
        }
    }
}

/// Sweeps over the multi-cell simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CellSection {
    pub bits: Vec<Resolution>,
    pub sdma_beams: Vec<usize>,
}

impl Default for CellSection {
    fn default() -> Self {
        Self {
            bits: vec![
                Resolution::Bits(2),
                Resolution::Bits(3),
                Resolution::Bits(4),
                Resolution::Infinite,
            ],
            sdma_beams: vec![2, 4],
        }
    }
}

/// Transmit chain measurements.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TxSection {
    pub nperseg: usize,
    pub psd_bits: Vec<Resolution>,
    pub psd_orders: Vec<u32>,
    pub aclr_bits: Vec<Resolution>,
    pub aclr_orders: Vec<u32>,
    pub evm_bits: Vec<Resolution>,
    /// `-10 log10(sigma_rf^2)` per resource element.
    pub evm_rf_snr_db: Sweep,
    pub dac: DacChainConfig,
    pub plan: ChannelPlan,
    pub signal: TxSignalConfig,
}

impl Default for TxSection {
    fn default() -> Self {
        Self {
            nperseg: 8192,
            psd_bits: vec![Resolution::Bits(4), Resolution::Infinite],
            psd_orders: vec![0, 1],
            aclr_bits: vec![
                Resolution::Bits(2),
                Resolution::Bits(3),
                Resolution::Bits(4),
                Resolution::Bits(5),
                Resolution::Bits(6),
                Resolution::Infinite,
            ],
            aclr_orders: vec![0, 1, 2, 3],
            evm_bits: vec![
                Resolution::Bits(3),
                Resolution::Bits(4),
                Resolution::Bits(5),
                Resolution::Bits(6),
            ],
            evm_rf_snr_db: Sweep::new(10.0, 60.0, 5.0),
            dac: DacChainConfig::default(),
            plan: ChannelPlan::default(),
            signal: TxSignalConfig::default(),
        }
    }
}

/// Full configuration. The top-level `seed` seeds every module.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub power: PowerSection,
    pub aqnm: AqnmSection,
    pub link: LinkSection,
    pub cell: CellSection,
    pub network: NetworkConfig,
    pub tx: TxSection,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let mut cfg = Self {
            seed: 1,
            power: PowerSection::default(),
            aqnm: AqnmSection::default(),
            link: LinkSection::default(),
            cell: CellSection::default(),
            network: NetworkConfig::default(),
            tx: TxSection::default(),
        };
        cfg.propagate_seed();
        cfg
    }
}

fn check_bits(name: &str, bits: &[Resolution], v: &mut Vec<String>) {
    if bits.is_empty() {
        v.push(format!("{name} must not be empty"));
    }
    for b in bits {
        if let Err(e) = b.validate() {
            v.push(format!("{name}: {e}"));
        }
    }
}

impl ExperimentConfig {
    /// Copy the master seed into the module configs; `network.seed` and
    /// `tx.signal.seed` in a file are always overwritten.
    fn propagate_seed(&mut self) {
        self.network.seed = self.seed;
        self.tx.signal.seed = self.seed;
    }

    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        let p = &self.power;
        v.extend(p.tx.violations());
        v.extend(p.rx.violations());
        if !(1..=16).contains(&p.low_res_bits) {
            v.push("power.low_res_bits must be in 1..=16".into());
        }
        if p.hybrid_streams == 0 {
            v.push("power.hybrid_streams must be >= 1".into());
        }

        let a = &self.aqnm;
        check_bits("aqnm.bits", &a.bits, &mut v);
        check_bits("aqnm.sdma_bits", &a.sdma_bits, &mut v);
        if !(a.bf_gain >= 1.0) {
            v.push("aqnm.bf_gain must be >= 1".into());
        }
        v.extend(a.snr_db.violations("aqnm.snr_db"));
        v.extend(a.sir_db.violations("aqnm.sir_db"));

        let l = &self.link;
        check_bits("link.bits", &l.bits, &mut v);
        check_bits("link.sdma_bits", &l.sdma_bits, &mut v);
        v.extend(l.snr_db.violations("link.snr_db"));
        v.extend(l.sdma_sir_db.violations("link.sdma_sir_db"));
        if l.trials == 0 {
            v.push("link.trials must be >= 1".into());
        }
        for b in l.bits.iter().filter(|b| b.validate().is_ok()) {
            let cfg = self.link_trial(*b, 0.0, 0);
            v.extend(cfg.violations().into_iter().map(|m| format!("link: {m}")));
        }

        check_bits("cell.bits", &self.cell.bits, &mut v);
        if self.cell.sdma_beams.is_empty() || self.cell.sdma_beams.contains(&0) {
            v.push("cell.sdma_beams must be non-empty and positive".into());
        }
        v.extend(self.network.violations());

        let t = &self.tx;
        v.extend(t.dac.violations());
        v.extend(t.plan.violations());
        v.extend(t.signal.violations());
        check_bits("tx.psd_bits", &t.psd_bits, &mut v);
        check_bits("tx.aclr_bits", &t.aclr_bits, &mut v);
        check_bits("tx.evm_bits", &t.evm_bits, &mut v);
        v.extend(t.evm_rf_snr_db.violations("tx.evm_rf_snr_db"));
        if t.nperseg < 16 {
            v.push("tx.nperseg must be >= 16".into());
        }
        v
    }

    /// Link trial at ADC resolution `n_adc` and input SNR `snr_db`.
    pub fn link_trial(&self, n_adc: Resolution, snr_db: f64, seed: u64) -> lowres::ofdm::LinkTrialConfig {
        let l = &self.link;
        let n_dac = if l.dac_ideal {
            Resolution::Infinite
        } else {
            match n_adc {
                Resolution::Bits(n) => Resolution::Bits((n + l.dac_extra_bits).min(16)),
                Resolution::Infinite => Resolution::Infinite,
            }
        };
        lowres::ofdm::LinkTrialConfig {
            snr_db,
            n_adc,
            n_dac,
            numerology: l.numerology,
            n_symbols: l.n_symbols,
            n_pilots: l.n_pilots,
            fir_taps: l.fir_taps,
            modulation: l.modulation,
            seed,
            sir_db: None,
            gamma0_db: None,
        }
    }

    /// Resolved config as TOML text.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes to TOML")
    }
}

/// One or more configuration problems.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigErrors(pub Vec<String>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigErrors {}

/// Line (1-based) where the dotted key `path` is assigned, if found.
fn key_line(text: &str, path: &str) -> Option<usize> {
    let mut table = String::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.starts_with('[') {
            table = line.trim_matches(|c| c == '[' || c == ']').trim().to_string();
            if table == path {
                return Some(i + 1);
            }
            continue;
        }
        if let Some((k, _)) = line.split_once('=') {
            let k = k.trim().trim_matches('"');
            let full = if table.is_empty() {
                k.to_string()
            } else {
                format!("{table}.{k}")
            };
            if full == path {
                return Some(i + 1);
            }
        }
    }
    None
}

fn unknown_keys(user: &Table, known: &Table, prefix: &str, out: &mut Vec<String>) {
    for (k, v) in user {
        let path = if prefix.is_empty() {
            k.clone()
        } else {
            format!("{prefix}.{k}")
        };
        match known.get(k) {
            None => out.push(path),
            Some(Value::Table(kt)) => {
                if let Value::Table(ut) = v {
                    unknown_keys(ut, kt, &path, out);
                }
            }
            Some(_) => {}
        }
    }
}

/// Overlay `user` on `base`, recursing into tables present in both.
fn merge(base: &mut Table, user: Table) {
    for (k, v) in user {
        match (base.get_mut(&k), v) {
            (Some(Value::Table(b)), Value::Table(u)) => merge(b, u),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

/// Set a dotted key in a TOML table, creating intermediate tables.
pub fn apply_override(table: &mut Table, assignment: &str) -> Result<(), String> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| format!("override must look like key=value, got {assignment:?}"))?;
    let key = key.trim();
    if key.is_empty() {
        return Err(format!("override has an empty key: {assignment:?}"));
    }
    let value = match format!("v = {}", raw.trim()).parse::<Table>() {
        Ok(mut t) => t.remove("v").expect("parsed key"),
        Err(_) => Value::String(raw.trim().to_string()),
    };
    let parts: Vec<&str> = key.split('.').collect();
    let mut cur = table;
    for p in &parts[..parts.len() - 1] {
        let entry = cur
            .entry(p.to_string())
            .or_insert_with(|| Value::Table(Table::new()));
        cur = match entry {
            Value::Table(t) => t,
            _ => return Err(format!("override {key:?}: {p:?} is not a section")),
        };
    }
    cur.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

/// Parse, apply overrides, fill defaults and check every invariant.
pub fn validate_config(text: &str, overrides: &[String]) -> Result<ExperimentConfig, ConfigErrors> {
    let mut table: Table = text
        .parse()
        .map_err(|e: toml::de::Error| ConfigErrors(vec![format!("parse error: {e}")]))?;
    let mut errors = Vec::new();
    for o in overrides {
        if let Err(e) = apply_override(&mut table, o) {
            errors.push(e);
        }
    }
    let known = match Value::try_from(ExperimentConfig::default()) {
        Ok(Value::Table(t)) => t,
        _ => unreachable!("default config is a table"),
    };
    let mut unknown = Vec::new();
    unknown_keys(&table, &known, "", &mut unknown);
    for path in unknown {
        let at = key_line(text, &path).map(|l| format!(" (line {l})")).unwrap_or_default();
        errors.push(format!("unknown key `{path}`{at}"));
    }
    if !errors.is_empty() {
        return Err(ConfigErrors(errors));
    }
    let mut merged = known;
    merge(&mut merged, table);
    let mut cfg: ExperimentConfig = Value::Table(merged)
        .try_into()
        .map_err(|e: toml::de::Error| ConfigErrors(vec![format!("invalid value: {e}")]))?;
    cfg.propagate_seed();
    let v = cfg.violations();
    if v.is_empty() {
        Ok(cfg)
    } else {
        Err(ConfigErrors(v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_gives_defaults() {
        let cfg = validate_config("", &[]).unwrap();
        assert_eq!(cfg, ExperimentConfig::default());
        assert_eq!(cfg.network.tx_power_dbm, 35.0);
        assert_eq!(cfg.power.tx.eirp_dbm, 30.0);
    }

    #[test]
    fn resolved_config_round_trips() {
        let cfg = validate_config("seed = 42\n", &[]).unwrap();
        assert_eq!(cfg.network.seed, 42);
        assert_eq!(validate_config(&cfg.to_toml(), &[]).unwrap(), cfg);
        let c = validate_config("seed = 3\n[network]\nseed = 9\n", &[]).unwrap();
        assert_eq!(c.network.seed, 3);
    }

    #[test]
    fn unknown_keys_reported_with_lines() {
        let text = "seed = 3\n[network]\nbw_hz = 1e9\nbandwith = 2\n[link]\nbitz = [2]\n";
        let e = validate_config(text, &[]).unwrap_err();
        assert_eq!(e.0.len(), 2, "{e}");
        assert!(e.0[0].contains("`network.bandwith` (line 4)") || e.0[1].contains("`network.bandwith` (line 4)"));
        assert!(e.to_string().contains("link.bitz"));
    }

    #[test]
    fn all_violations_collected() {
        let text = "[network]\nbw_hz = -1.0\n[link]\nbits = [0]\n";
        let e = validate_config(text, &[]).unwrap_err();
        assert!(e.0.iter().any(|m| m.contains("bw_hz")), "{e}");
        assert!(e.0.iter().any(|m| m.contains("link.bits")), "{e}");
    }

    #[test]
    fn overrides_apply() {
        let cfg = validate_config(
            "",
            &["network.n_drops=3".into(), "link.bits=[3,\"inf\"]".into(), "seed=9".into()],
        )
        .unwrap();
        assert_eq!(cfg.network.n_drops, 3);
        assert_eq!(cfg.link.bits, vec![Resolution::Bits(3), Resolution::Infinite]);
        assert_eq!(cfg.network.seed, 9);
        assert!(validate_config("", &["nosuch.key=1".into()]).is_err());
        assert!(validate_config("", &["junk".into()]).is_err());
    }

    #[test]
    fn partial_nested_tables_keep_defaults() {
        let cfg = validate_config("[power.rx.adc]\nfom_fj_per_conv = 200.0\n", &[]).unwrap();
        assert_eq!(cfg.power.rx.adc.fom_fj_per_conv, 200.0);
        assert_eq!(cfg.power.rx.adc.fs_hz, 1e9);
    }

    #[test]
    fn sweep_parsing() {
        assert_eq!(Sweep::parse("-5:30").unwrap().points().len(), 8);
        let s = Sweep::parse("0:1:0.25").unwrap();
        assert_eq!(s.points(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert!(Sweep::parse("a:b").is_err());
        assert!(Sweep::parse("1").is_err());
    }

    #[test]
    fn wrong_type_is_an_error() {
        let e = validate_config("[network]\nn_drops = \"many\"\n", &[]).unwrap_err();
        assert!(e.to_string().contains("n_drops") || e.to_string().contains("invalid"));
    }
}
