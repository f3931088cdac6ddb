//! Front-end power budgets for analog, hybrid and fully digital arrays.
//!
//! Components are characterised by figures of merit: PA efficiency, LNA
//! gain/noise FoM, VGA gain-bandwidth FoM, converter energy per conversion
//! step, and filter power per pole per hertz. Mixers, splitters and phase
//! shifters are passive and only contribute insertion loss.

use serde::{Deserialize, Serialize};

use crate::error::{invalid_arg, Error, Result};
use crate::units::{db_to_lin, dbm_to_mw};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArchKind {
    Analog,
    Hybrid,
    Digital,
}

/// Beamforming architecture and its number of baseband streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ArchSpec {
    pub kind: ArchKind,
    pub n_streams: u32,
}

impl ArchSpec {
    pub fn analog() -> Self {
        Self {
            kind: ArchKind::Analog,
            n_streams: 1,
        }
    }

    pub fn hybrid(k: u32) -> Self {
        Self {
            kind: ArchKind::Hybrid,
            n_streams: k,
        }
    }

    pub fn digital(n_antennas: u32) -> Self {
        Self {
            kind: ArchKind::Digital,
            n_streams: n_antennas,
        }
    }

    pub fn validate(&self, n_antennas: u32) -> Result<()> {
        match self.kind {
            _ if self.n_streams == 0 => invalid_arg("architecture needs at least one stream"),
            ArchKind::Analog if self.n_streams != 1 => {
                invalid_arg("analog beamforming has exactly one stream")
            }
            ArchKind::Digital if self.n_streams != n_antennas => invalid_arg(format!(
                "digital beamforming needs one stream per antenna ({n_antennas}), got {}",
                self.n_streams
            )),
            ArchKind::Hybrid if self.n_streams > n_antennas => {
                invalid_arg("hybrid architecture cannot have more streams than antennas")
            }
            _ => Ok(()),
        }
    }

    fn uses_phase_shifters(&self) -> bool {
        !matches!(self.kind, ArchKind::Digital)
    }
}

/// Data converter: `P = FoM * fs * 2^n` per converter, two per I/Q pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConverterSpec {
    pub fom_fj_per_conv: f64,
    pub fs_hz: f64,
    pub n_bits: u32,
    /// I/Q converter pairs per stream.
    pub pairs: u32,
}

impl ConverterSpec {
    pub fn adc_reference() -> Self {
        Self {
            fom_fj_per_conv: 65.0,
            fs_hz: 1e9,
            n_bits: 8,
            pairs: 1,
        }
    }

    pub fn dac_reference() -> Self {
        Self {
            fom_fj_per_conv: 67.6,
            fs_hz: 1e9,
            n_bits: 8,
            pairs: 1,
        }
    }

    pub fn with_bits(mut self, n_bits: u32) -> Self {
        self.n_bits = n_bits;
        self
    }

    pub fn violations(&self, prefix: &str) -> Vec<String> {
        let mut v = Vec::new();
        if !(self.fom_fj_per_conv > 0.0) {
            v.push(format!("{prefix}.fom_fj_per_conv must be positive"));
        }
        if !(self.fs_hz > 0.0) {
            v.push(format!("{prefix}.fs_hz must be positive"));
        }
        if self.n_bits == 0 || self.n_bits > 24 {
            v.push(format!("{prefix}.n_bits must be in 1..=24"));
        }
        if self.pairs == 0 {
            v.push(format!("{prefix}.pairs must be positive"));
        }
        v
    }
}

/// Active low-pass filter characterised by power per pole per GHz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LpfSpec {
    pub fom_mw_per_ghz: f64,
    pub order: u32,
    pub fc_ghz: f64,
}

impl Default for LpfSpec {
    fn default() -> Self {
        Self {
            fom_mw_per_ghz: 1.3,
            order: 1,
            fc_ghz: 0.4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TxFrontEndConfig {
    pub eirp_dbm: f64,
    pub n_antennas: u32,
    /// Total baseband drive power.
    pub p_bb_in_dbm: f64,
    pub il_ps_db: f64,
    pub il_mix_db: f64,
    /// LO distribution power per stream.
    pub p_lo_mw: f64,
    pub eta_pae: f64,
    pub dac: ConverterSpec,
    pub lpf: LpfSpec,
}

impl Default for TxFrontEndConfig {
    fn default() -> Self {
        Self {
            eirp_dbm: 30.0,
            n_antennas: 16,
            p_bb_in_dbm: 10.0,
            il_ps_db: 10.0,
            il_mix_db: 6.0,
            p_lo_mw: 10.0,
            eta_pae: 0.2,
            dac: ConverterSpec::dac_reference(),
            lpf: LpfSpec::default(),
        }
    }
}

impl TxFrontEndConfig {
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if self.n_antennas == 0 {
            v.push("tx.n_antennas must be positive".into());
        }
        if !(self.eta_pae > 0.0 && self.eta_pae <= 1.0) {
            v.push(format!("tx.eta_pae must lie in (0, 1], got {}", self.eta_pae));
        }
        if self.il_ps_db < 0.0 {
            v.push("tx.il_ps_db must be >= 0".into());
        }
        if self.il_mix_db < 0.0 {
            v.push("tx.il_mix_db must be >= 0".into());
        }
        if self.p_lo_mw < 0.0 {
            v.push("tx.p_lo_mw must be >= 0".into());
        }
        v.extend(self.dac.violations("tx.dac"));
        if !(self.lpf.fom_mw_per_ghz >= 0.0) || !(self.lpf.fc_ghz > 0.0) {
            v.push("tx.lpf needs fom_mw_per_ghz >= 0 and fc_ghz > 0".into());
        }
        v
    }

    fn check(&self) -> Result<()> {
        match self.violations().into_iter().next() {
            Some(msg) => Err(Error::InvalidArgument(msg)),
            None => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RxFrontEndConfig {
    pub n_antennas: u32,
    /// LNA gain of the fully digital receiver; phase-shifter receivers add
    /// `il_ps_db` on top.
    pub g_lna_db: f64,
    pub il_ps_db: f64,
    pub nf_lna_db: f64,
    pub fom_lna_per_mw: f64,
    pub vga_fom: f64,
    pub vga_area_mm2: f64,
    pub bw_ghz: f64,
    pub vga_gain_range_db: f64,
    pub p_lo_mw: f64,
    pub adc: ConverterSpec,
}

impl Default for RxFrontEndConfig {
    fn default() -> Self {
        Self {
            n_antennas: 16,
            g_lna_db: 10.0,
            il_ps_db: 10.0,
            nf_lna_db: 3.0,
            fom_lna_per_mw: 6.5,
            vga_fom: 5280.0,
            vga_area_mm2: 0.01,
            bw_ghz: 1.0,
            vga_gain_range_db: 82.0,
            p_lo_mw: 10.0,
            adc: ConverterSpec::adc_reference(),
        }
    }
}

impl RxFrontEndConfig {
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if self.n_antennas == 0 {
            v.push("rx.n_antennas must be positive".into());
        }
        for (name, val) in [
            ("rx.fom_lna_per_mw", self.fom_lna_per_mw),
            ("rx.vga_fom", self.vga_fom),
            ("rx.vga_area_mm2", self.vga_area_mm2),
            ("rx.bw_ghz", self.bw_ghz),
            ("rx.nf_lna_db", self.nf_lna_db),
        ] {
            if !(val > 0.0) {
                v.push(format!("{name} must be positive, got {val}"));
            }
        }
        if self.il_ps_db < 0.0 {
            v.push("rx.il_ps_db must be >= 0".into());
        }
        if self.vga_gain_range_db < 0.0 {
            v.push("rx.vga_gain_range_db must be >= 0".into());
        }
        if self.p_lo_mw < 0.0 {
            v.push("rx.p_lo_mw must be >= 0".into());
        }
        v.extend(self.adc.violations("rx.adc"));
        v
    }
}

/// Per-chain power breakdown; `total_mw` is exactly the sum of the parts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerBudget {
    pub rffe_mw: f64,
    /// VGA on receive chains, LPF on transmit chains.
    pub gain_stage_mw: f64,
    pub converter_mw: f64,
    pub total_mw: f64,
}

impl PowerBudget {
    fn new(rffe_mw: f64, gain_stage_mw: f64, converter_mw: f64) -> Self {
        Self {
            rffe_mw,
            gain_stage_mw,
            converter_mw,
            total_mw: rffe_mw + gain_stage_mw + converter_mw,
        }
    }
}

/// Signal power at each PA input.
pub fn pa_input_power_dbm(cfg: &TxFrontEndConfig, arch: &ArchSpec) -> f64 {
    let split = 10.0 * (cfg.n_antennas as f64).log10();
    let ps = if arch.uses_phase_shifters() {
        cfg.il_ps_db
    } else {
        0.0
    };
    cfg.p_bb_in_dbm - split - ps - cfg.il_mix_db
}

/// Per-PA output power for the configured EIRP (array gain `20 log10 N`).
pub fn pa_output_power_dbm(cfg: &TxFrontEndConfig) -> f64 {
    cfg.eirp_dbm - 20.0 * (cfg.n_antennas as f64).log10()
}

/// PA DC power of all elements plus per-stream LO power.
pub fn tx_rffe_power_mw(cfg: &TxFrontEndConfig, arch: &ArchSpec) -> Result<f64> {
    cfg.check()?;
    arch.validate(cfg.n_antennas)?;
    let p_in = pa_input_power_dbm(cfg, arch);
    let p_out = pa_output_power_dbm(cfg);
    if p_in > p_out {
        return Err(Error::InfeasibleDrive {
            p_in_dbm: p_in,
            p_out_dbm: p_out,
        });
    }
    let pa_dc = (dbm_to_mw(p_out) - dbm_to_mw(p_in)) / cfg.eta_pae;
    Ok(cfg.n_antennas as f64 * pa_dc + arch.n_streams as f64 * cfg.p_lo_mw)
}

/// LNA DC power `G / (FoM (F - 1))` (linear), one per element, plus LO.
pub fn rx_rffe_power_mw(cfg: &RxFrontEndConfig, arch: &ArchSpec) -> Result<f64> {
    if !(cfg.nf_lna_db > 0.0) {
        return invalid_arg(format!("LNA noise figure must be > 0 dB, got {}", cfg.nf_lna_db));
    }
    if !(cfg.fom_lna_per_mw > 0.0) {
        return invalid_arg("LNA figure of merit must be positive");
    }
    arch.validate(cfg.n_antennas)?;
    let gain_db = if arch.uses_phase_shifters() {
        cfg.g_lna_db + cfg.il_ps_db
    } else {
        cfg.g_lna_db
    };
    let lna = db_to_lin(gain_db) / (cfg.fom_lna_per_mw * (db_to_lin(cfg.nf_lna_db) - 1.0));
    Ok(cfg.n_antennas as f64 * lna + arch.n_streams as f64 * cfg.p_lo_mw)
}

/// VGA gain range needed to hold the baseband power at `p_bb_out_dbm` down
/// to the cell-edge received power.
pub fn vga_gain_range_db(
    p_bb_out_dbm: f64,
    n_rx: u32,
    il_mix_db: f64,
    g_lna_net_db: f64,
    p_rx_edge_dbm: f64,
) -> f64 {
    p_bb_out_dbm - 10.0 * (n_rx as f64).log10() + il_mix_db - g_lna_net_db - p_rx_edge_dbm
}

/// One VGA per stream, `P = G_max f_BW / (FoM A_chip)`.
pub fn vga_power_mw(cfg: &RxFrontEndConfig, arch: &ArchSpec) -> f64 {
    let per_vga = cfg.vga_gain_range_db * cfg.bw_ghz / (cfg.vga_fom * cfg.vga_area_mm2);
    arch.n_streams as f64 * per_vga
}

/// `2 * pairs * n_streams * FoM * fs * 2^n`, in mW.
pub fn converter_power_mw(spec: &ConverterSpec, n_streams: u32) -> f64 {
    let per = spec.fom_fj_per_conv * 1e-15 * spec.fs_hz * 2f64.powi(spec.n_bits as i32) * 1e3;
    2.0 * spec.pairs as f64 * n_streams as f64 * per
}

/// `n_streams * FoM * order * fc`.
pub fn lpf_power_mw(spec: &LpfSpec, n_streams: u32) -> f64 {
    n_streams as f64 * spec.fom_mw_per_ghz * spec.order as f64 * spec.fc_ghz
}

pub fn tx_budget(cfg: &TxFrontEndConfig, arch: &ArchSpec) -> Result<PowerBudget> {
    let rffe = tx_rffe_power_mw(cfg, arch)?;
    Ok(PowerBudget::new(
        rffe,
        lpf_power_mw(&cfg.lpf, arch.n_streams),
        converter_power_mw(&cfg.dac, arch.n_streams),
    ))
}

pub fn rx_budget(cfg: &RxFrontEndConfig, arch: &ArchSpec) -> Result<PowerBudget> {
    let rffe = rx_rffe_power_mw(cfg, arch)?;
    Ok(PowerBudget::new(
        rffe,
        vga_power_mw(cfg, arch),
        converter_power_mw(&cfg.adc, arch.n_streams),
    ))
}

/// Transmit and receive budgets for one architecture.
pub fn front_end_budget(
    tx: &TxFrontEndConfig,
    rx: &RxFrontEndConfig,
    arch: &ArchSpec,
) -> Result<(PowerBudget, PowerBudget)> {
    Ok((tx_budget(tx, arch)?, rx_budget(rx, arch)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Chain {
    Rx,
    Tx,
}

/// One row of the architecture comparison table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BudgetRow {
    pub chain: Chain,
    pub label: &'static str,
    pub converter_bits: u32,
    pub budget: PowerBudget,
}

/// Analog, 2-stream hybrid, and digital at high and low converter
/// resolution, for both chains.
pub fn architecture_table(
    tx: &TxFrontEndConfig,
    rx: &RxFrontEndConfig,
    low_res_bits: u32,
    hybrid_streams: u32,
) -> Result<Vec<BudgetRow>> {
    let mut rows = Vec::with_capacity(8);
    let rx_low = RxFrontEndConfig {
        adc: rx.adc.with_bits(low_res_bits),
        ..*rx
    };
    let tx_low = TxFrontEndConfig {
        dac: tx.dac.with_bits(low_res_bits),
        ..*tx
    };
    let variants = [
        ("analog", ArchSpec::analog(), false),
        ("hybrid", ArchSpec::hybrid(hybrid_streams), false),
        ("digital_high_res", ArchSpec::digital(rx.n_antennas), false),
        ("digital_low_res", ArchSpec::digital(rx.n_antennas), true),
    ];
    for (label, arch, low) in variants {
        let cfg = if low { &rx_low } else { rx };
        rows.push(BudgetRow {
            chain: Chain::Rx,
            label,
            converter_bits: cfg.adc.n_bits,
            budget: rx_budget(cfg, &arch)?,
        });
    }
    for (label, arch, low) in variants {
        let arch = if arch.kind == ArchKind::Digital {
            ArchSpec::digital(tx.n_antennas)
        } else {
            arch
        };
        let cfg = if low { &tx_low } else { tx };
        rows.push(BudgetRow {
            chain: Chain::Tx,
            label,
            converter_bits: cfg.dac.n_bits,
            budget: tx_budget(cfg, &arch)?,
        });
    }
    Ok(rows)
}
