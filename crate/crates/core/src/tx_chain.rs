//! Transmit DAC chain: interpolation, quantization, zero-order hold and an
//! analog Butterworth low-pass, with PSD, ACLR and EVM measurements.
//!
//! The analog output is emulated at `L * fs` by repeating every DAC sample
//! `L` times, which reproduces the sinc roll-off and the images at
//! multiples of `fs`. The Butterworth filter is applied zero-phase in the
//! frequency domain.

use num_complex::Complex64;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::dsp;
use crate::error::{invalid_arg, Error, Result};
use crate::ofdm::{ofdm_demodulate, ofdm_modulate_ideal, Modulation, OfdmNumerology, ResourceGrid};
use crate::quantization::{mean_power, quantize_samples, ComplexSampleBlock, QuantizerSpec, Resolution};
use crate::units::lin_to_db;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DacChainConfig {
    pub interp_m: usize,
    pub n_bits: Resolution,
    /// Analog-rate emulation factor `L`.
    pub zoh_oversample: usize,
    /// 0 disables the filter.
    pub lpf_order: u32,
    pub lpf_fc_hz: f64,
    pub dac_fs_hz: f64,
    /// Anti-image filter length (odd).
    pub interp_taps: usize,
}

impl Default for DacChainConfig {
    fn default() -> Self {
        Self {
            interp_m: 2,
            n_bits: Resolution::Infinite,
            zoh_oversample: 8,
            lpf_order: 1,
            lpf_fc_hz: 400e6,
            dac_fs_hz: 983.04e6,
            interp_taps: 255,
        }
    }
}

impl DacChainConfig {
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if self.interp_m == 0 {
            v.push("dac.interp_m must be at least 1".into());
        }
        if let Err(e) = self.n_bits.validate() {
            v.push(format!("dac.n_bits: {e}"));
        }
        if self.zoh_oversample < 4 {
            v.push(format!(
                "dac.zoh_oversample must be at least 4, got {}",
                self.zoh_oversample
            ));
        }
        if !(self.lpf_fc_hz > 0.0) {
            v.push("dac.lpf_fc_hz must be positive".into());
        }
        if !(self.dac_fs_hz > 0.0) {
            v.push("dac.dac_fs_hz must be positive".into());
        }
        if self.interp_taps.is_multiple_of(2) {
            v.push("dac.interp_taps must be odd".into());
        }
        v
    }

    pub fn validate(&self) -> Result<()> {
        match self.violations().into_iter().next() {
            Some(m) => Err(Error::InvalidArgument(m)),
            None => Ok(()),
        }
    }

    pub fn analog_rate_hz(&self) -> f64 {
        self.dac_fs_hz * self.zoh_oversample as f64
    }

    pub fn chip_rate_hz(&self) -> f64 {
        self.dac_fs_hz / self.interp_m as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChannelPlan {
    pub ch_bw_hz: f64,
    pub meas_bw_hz: f64,
    pub n_adjacent: u32,
}

impl Default for ChannelPlan {
    fn default() -> Self {
        Self {
            ch_bw_hz: 400e6,
            meas_bw_hz: 396e6,
            n_adjacent: 2,
        }
    }
}

impl ChannelPlan {
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if !(self.ch_bw_hz > 0.0) {
            v.push("channel.ch_bw_hz must be positive".into());
        }
        if !(self.meas_bw_hz > 0.0 && self.meas_bw_hz <= self.ch_bw_hz) {
            v.push("channel.meas_bw_hz must lie in (0, ch_bw_hz]".into());
        }
        if self.n_adjacent < 1 {
            v.push("channel.n_adjacent must be at least 1".into());
        }
        v
    }
}

/// Transmit PSD with ACLR per adjacent channel (index `i` at position
/// `i - 1`, worst of the two sides) and an optional EVM.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumReport {
    pub freqs_hz: Vec<f64>,
    pub psd_dbm_per_hz: Vec<f64>,
    pub resolution_hz: f64,
    pub aclr_db: Vec<f64>,
    pub evm_pct: Option<f64>,
}

impl SpectrumReport {
    fn linear(&self) -> dsp::Psd {
        dsp::Psd {
            freqs_hz: self.freqs_hz.clone(),
            psd: self.psd_dbm_per_hz.iter().map(|d| 10f64.powf(d / 10.0)).collect(),
            resolution_hz: self.resolution_hz,
        }
    }

    /// Integrated power in mW.
    pub fn total_power_mw(&self) -> f64 {
        self.linear().total_power()
    }
}

/// Interpolate by `m`, quantize, and hold each DAC sample for `L` output
/// samples. The quantizer sees the interpolated signal scaled to unit power.
pub fn dac_convert(baseband: &ComplexSampleBlock, cfg: &DacChainConfig) -> Result<ComplexSampleBlock> {
    baseband.check()?;
    cfg.validate()?;
    let want = cfg.chip_rate_hz();
    if (baseband.sample_rate - want).abs() > 1e-6 * want {
        return invalid_arg(format!(
            "baseband rate {} Hz does not match dac_fs / interp_m = {want} Hz",
            baseband.sample_rate
        ));
    }
    let m = cfg.interp_m;
    let mut up = vec![Complex64::new(0.0, 0.0); baseband.len() * m];
    for (i, s) in baseband.samples.iter().enumerate() {
        up[i * m] = *s * m as f64;
    }
    let interpolated = if m > 1 {
        let h = dsp::design_lowpass(cfg.dac_fs_hz / (2.0 * m as f64), cfg.dac_fs_hz, cfg.interp_taps)?;
        dsp::filter_centered(&up, &h)
    } else {
        up
    };
    let p = mean_power(&interpolated);
    if p == 0.0 {
        return Err(Error::DegenerateInput("DAC input is all zeros".into()));
    }
    let g = 1.0 / p.sqrt();
    let scaled: Vec<Complex64> = interpolated.iter().map(|s| s * g).collect();
    let q = quantize_samples(&scaled, &QuantizerSpec::optimal(cfg.n_bits)?);
    let l = cfg.zoh_oversample;
    let mut held = Vec::with_capacity(q.len() * l);
    for s in q {
        held.extend(std::iter::repeat_n(s, l));
    }
    Ok(ComplexSampleBlock {
        samples: held,
        sample_rate: cfg.analog_rate_hz(),
    })
}

/// Zero-phase Butterworth magnitude `1 / sqrt(1 + (f/fc)^(2n))`; order 0 is
/// a pass-through.
pub fn butterworth_response(order: u32, fc_hz: f64, f_hz: f64) -> Result<f64> {
    if order == 0 {
        return Ok(1.0);
    }
    if !(fc_hz > 0.0) {
        return invalid_arg(format!("cutoff must be positive, got {fc_hz}"));
    }
    Ok(1.0 / (1.0 + (f_hz / fc_hz).abs().powi(2 * order as i32)).sqrt())
}

pub fn apply_butterworth(block: &ComplexSampleBlock, order: u32, fc_hz: f64) -> Result<ComplexSampleBlock> {
    block.check()?;
    butterworth_response(order, fc_hz, 0.0)?;
    if order == 0 {
        return Ok(block.clone());
    }
    let samples = dsp::apply_zero_phase(&block.samples, block.sample_rate, |f| {
        1.0 / (1.0 + (f / fc_hz).abs().powi(2 * order as i32)).sqrt()
    });
    Ok(ComplexSampleBlock {
        samples,
        sample_rate: block.sample_rate,
    })
}

/// Welch PSD (Hann, 50% overlap) in dBm/Hz with sample power read as mW.
pub fn estimate_psd(block: &ComplexSampleBlock, nperseg: usize) -> Result<SpectrumReport> {
    block.check()?;
    let psd = dsp::welch_psd(&block.samples, block.sample_rate, nperseg)?;
    Ok(SpectrumReport {
        psd_dbm_per_hz: psd.psd.iter().map(|p| 10.0 * p.max(1e-300).log10()).collect(),
        freqs_hz: psd.freqs_hz,
        resolution_hz: psd.resolution_hz,
        aclr_db: Vec::new(),
        evm_pct: None,
    })
}

/// In-channel over adjacent-channel power, both integrated over the
/// measurement bandwidth; `adjacent_index` is signed (negative = below).
pub fn measure_aclr(report: &SpectrumReport, plan: &ChannelPlan, adjacent_index: i32) -> Result<f64> {
    if let Some(m) = plan.violations().into_iter().next() {
        return Err(Error::InvalidArgument(m));
    }
    if adjacent_index == 0 {
        return invalid_arg("adjacent channel index must be nonzero");
    }
    let psd = report.linear();
    let half = plan.meas_bw_hz / 2.0;
    let centre = adjacent_index as f64 * plan.ch_bw_hz;
    let (lo, hi) = psd.span_hz();
    if centre - half < lo || centre + half > hi {
        return invalid_arg(format!(
            "PSD span [{lo:.4e}, {hi:.4e}] Hz does not cover adjacent channel {adjacent_index}"
        ));
    }
    let p_in = psd.band_power(-half, half);
    let p_adj = psd.band_power(centre - half, centre + half);
    if !(p_adj > 0.0) {
        return Err(Error::DegenerateInput("no power in adjacent channel".into()));
    }
    Ok(lin_to_db(p_in / p_adj))
}

/// Lower of the two ACLRs at `+-i`.
pub fn worst_aclr(report: &SpectrumReport, plan: &ChannelPlan, i: u32) -> Result<f64> {
    let i = i as i32;
    Ok(measure_aclr(report, plan, i)?.min(measure_aclr(report, plan, -i)?))
}

/// OFDM test signal for the transmit measurements.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TxSignalConfig {
    pub numerology: OfdmNumerology,
    pub n_symbols: usize,
    pub modulation: Modulation,
    pub seed: u64,
}

impl Default for TxSignalConfig {
    fn default() -> Self {
        Self {
            numerology: OfdmNumerology::default().with_prbs(275),
            n_symbols: 12,
            modulation: Modulation::Qam64,
            seed: 0,
        }
    }
}

impl TxSignalConfig {
    pub fn violations(&self) -> Vec<String> {
        let mut v = self.numerology.violations();
        if self.n_symbols == 0 {
            v.push("signal.n_symbols must be at least 1".into());
        }
        v
    }

    fn grid(&self) -> ResourceGrid {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        ResourceGrid::random(&self.numerology, self.modulation, self.n_symbols, &mut rng)
    }
}

fn check_rates(sig: &TxSignalConfig, cfg: &DacChainConfig) -> Result<()> {
    if let Some(m) = sig.violations().into_iter().next() {
        return Err(Error::InvalidArgument(m));
    }
    let chip = sig.numerology.chip_rate_hz;
    if (cfg.chip_rate_hz() - chip).abs() > 1e-6 * chip {
        return invalid_arg(format!(
            "dac_fs_hz must equal interp_m * chip rate ({} Hz)",
            chip * cfg.interp_m as f64
        ));
    }
    Ok(())
}

/// Analog-rate output of the full chain for an OFDM grid.
fn chain_output(grid: &ResourceGrid, sig: &TxSignalConfig, cfg: &DacChainConfig) -> Result<ComplexSampleBlock> {
    let x = ofdm_modulate_ideal(grid, &sig.numerology)?;
    let bb = ComplexSampleBlock::new(x, sig.numerology.chip_rate_hz)?;
    apply_butterworth(&dac_convert(&bb, cfg)?, cfg.lpf_order, cfg.lpf_fc_hz)
}

/// Transmit PSD normalised to 0 dBm with ACLR for adjacent channels
/// `1..=plan.n_adjacent`.
pub fn transmit_spectrum(
    cfg: &DacChainConfig,
    sig: &TxSignalConfig,
    plan: &ChannelPlan,
    nperseg: usize,
) -> Result<SpectrumReport> {
    check_rates(sig, cfg)?;
    let mut out = chain_output(&sig.grid(), sig, cfg)?;
    let g = 1.0 / out.power().sqrt();
    out.samples.iter_mut().for_each(|s| *s *= g);
    let mut report = estimate_psd(&out, nperseg)?;
    report.aclr_db = (1..=plan.n_adjacent)
        .map(|i| worst_aclr(&report, plan, i))
        .collect::<Result<_>>()?;
    Ok(report)
}

/// Ideal resampling of an analog-rate signal to `n_out` samples at the chip
/// rate: keep the spectrum within +-chip/2 and invert at the lower rate.
fn resample_ideal(x: &[Complex64], n_out: usize) -> Vec<Complex64> {
    let n = x.len();
    let mut planner = FftPlanner::new();
    let mut spec = x.to_vec();
    planner.plan_fft_forward(n).process(&mut spec);
    let mut low = vec![Complex64::new(0.0, 0.0); n_out];
    let half = n_out / 2;
    for k in 0..n_out {
        let src = if k < half { k } else { n - (n_out - k) };
        low[k] = spec[src] / n as f64;
    }
    planner.plan_fft_inverse(n_out).process(&mut low);
    low
}

/// Demodulated resource elements of the chain output at the chip rate.
fn received_grid(
    grid: &ResourceGrid,
    sig: &TxSignalConfig,
    cfg: &DacChainConfig,
) -> Result<Vec<Vec<Complex64>>> {
    let num = &sig.numerology;
    let out = chain_output(grid, sig, cfg)?;
    let n_chip = grid.n_symbols() * num.symbol_len();
    ofdm_demodulate(&resample_ideal(&out.samples, n_chip), num, num.cp_len / 2)
}

/// EVM in percent after ideal resampling, demodulation and per-subcarrier
/// equalisation.
///
/// The equaliser is fitted on a noise-free run of the same grid through an
/// infinite-resolution DAC, so the `(1 - alpha)` signal attenuation of the
/// quantizer counts as error. RF impairments are referred to the transmit
/// signal: circular Gaussian noise of variance `sigma_rf_sq` per resource
/// element, shaped by the same chain response as the signal.
pub fn measure_evm(cfg: &DacChainConfig, sigma_rf_sq: f64, sig: &TxSignalConfig) -> Result<f64> {
    if !(sigma_rf_sq >= 0.0) || !sigma_rf_sq.is_finite() {
        return invalid_arg(format!("sigma_rf_sq must be finite and >= 0, got {sigma_rf_sq}"));
    }
    check_rates(sig, cfg)?;
    let grid = sig.grid();
    let num = &sig.numerology;
    let ideal_cfg = DacChainConfig {
        n_bits: Resolution::Infinite,
        ..*cfg
    };
    let reference = received_grid(&grid, sig, &ideal_cfg)?;
    let rx = if cfg.n_bits.is_infinite() {
        reference.clone()
    } else {
        received_grid(&grid, sig, cfg)?
    };
    let mut rng = ChaCha8Rng::seed_from_u64(sig.seed);
    rng.set_stream(1);
    let noise = Normal::new(0.0, (sigma_rf_sq / 2.0).sqrt())
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let mut err = 0.0;
    let mut pow = 0.0;
    for i in num.used_range() {
        let mut a = Complex64::new(0.0, 0.0);
        let mut b = 0.0;
        for (t, row) in reference.iter().enumerate() {
            a += grid.symbols[t][i].conj() * row[i];
            b += grid.symbols[t][i].norm_sqr();
        }
        let h = a / b;
        for (t, row) in rx.iter().enumerate() {
            let ideal = grid.symbols[t][i];
            let n_rf = Complex64::new(noise.sample(&mut rng), noise.sample(&mut rng));
            err += ((row[i] + h * n_rf) / h - ideal).norm_sqr();
            pow += ideal.norm_sqr();
        }
    }
    Ok(100.0 * (err / pow).sqrt())
}

/// `100 * sqrt(alpha^2 + (sigma_rf^2 + sigma_v^2) / E|I|^2)`.
pub fn evm_prediction(alpha: f64, sigma_rf_sq: f64, sigma_v_sq: f64, sig_power: f64) -> Result<f64> {
    if !(sig_power > 0.0) {
        return invalid_arg("signal power must be positive");
    }
    if alpha < 0.0 || sigma_rf_sq < 0.0 || sigma_v_sq < 0.0 {
        return invalid_arg("EVM inputs must be nonnegative");
    }
    Ok(100.0 * (alpha * alpha + (sigma_rf_sq + sigma_v_sq) / sig_power).sqrt())
}

/// Quantization noise per resource element for a unit-power signal: the
/// white distortion `alpha (1 - alpha)` spread over `fs`, of which the
/// occupied band keeps `bw / fs`.
pub fn dac_noise_in_band(alpha: f64, occupied_bw_hz: f64, dac_fs_hz: f64) -> f64 {
    alpha * (1.0 - alpha) * occupied_bw_hz / dac_fs_hz
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantization::alpha_of;
    use std::f64::consts::PI;

    fn short_sig() -> TxSignalConfig {
        TxSignalConfig {
            n_symbols: 4,
            ..Default::default()
        }
    }

    #[test]
    fn dc_input_holds_constant() {
        let cfg = DacChainConfig {
            interp_m: 1,
            dac_fs_hz: 100.0,
            ..Default::default()
        };
        let bb = ComplexSampleBlock::new(vec![Complex64::new(0.6, -0.8); 64], 100.0).unwrap();
        let y = dac_convert(&bb, &cfg).unwrap();
        assert_eq!(y.len(), 64 * 8);
        assert_eq!(y.sample_rate, 800.0);
        for s in &y.samples {
            assert!((s - Complex64::new(0.6, -0.8)).norm() < 1e-12);
        }
    }

    #[test]
    fn rate_mismatch_rejected() {
        let bb = ComplexSampleBlock::new(vec![Complex64::new(1.0, 0.0); 64], 1e6).unwrap();
        assert!(matches!(
            dac_convert(&bb, &DacChainConfig::default()),
            Err(Error::InvalidArgument(_))
        ));
        let bad = DacChainConfig {
            zoh_oversample: 2,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn tone_images_follow_sinc() {
        // complex tone: images at f0 + k fs
        let fs_chip = 491.52e6;
        let cfg = DacChainConfig::default();
        let fs = cfg.dac_fs_hz;
        let f0 = 30.72e6;
        let n = 1 << 14;
        let x: Vec<Complex64> = (0..n)
            .map(|i| Complex64::from_polar(1.0, 2.0 * PI * f0 * i as f64 / fs_chip))
            .collect();
        let y = dac_convert(&ComplexSampleBlock::new(x, fs_chip).unwrap(), &cfg).unwrap();
        let psd = dsp::welch_psd(&y.samples, y.sample_rate, 8192).unwrap();
        let band = |f: f64| psd.band_power(f - 3e6, f + 3e6);
        let main = band(f0);
        let sinc = |f: f64| {
            let u = PI * f / fs;
            (u.sin() / u).powi(2)
        };
        // sample repetition is the discrete counterpart of the hold
        let l = cfg.zoh_oversample as f64;
        let dirichlet = |f: f64| {
            let u = PI * f / fs;
            (u.sin() / (l * (u / l).sin())).powi(2)
        };
        for img in [f0 - fs, f0 + fs, f0 - 2.0 * fs] {
            let got = band(img) / main;
            let exact = dirichlet(img) / dirichlet(f0);
            assert!((10.0 * (got / exact).log10()).abs() < 0.05, "{img}: {got} vs {exact}");
            let analog = sinc(img) / sinc(f0);
            assert!((10.0 * (got / analog).log10()).abs() < 1.0);
        }
    }

    #[test]
    fn butterworth_examples() {
        for order in 1..=4 {
            let g = butterworth_response(order, 400e6, 400e6).unwrap();
            assert!((20.0 * g.log10() + 3.0103).abs() < 1e-3);
        }
        let g = butterworth_response(1, 1.0, 10.0).unwrap();
        assert!((20.0 * g.log10() + 20.043).abs() < 1e-3);
        let g = butterworth_response(3, 1.0, 2.0).unwrap();
        assert!((20.0 * g.log10() + 10.0 * 65f64.log10()).abs() < 1e-9);
        assert!((20.0 * g.log10() + 18.13).abs() < 0.01);
        assert_eq!(butterworth_response(0, 0.0, 5.0).unwrap(), 1.0);
    }

    #[test]
    fn psd_integrates_to_power_at_each_stage() {
        let sig = short_sig();
        let cfg = DacChainConfig {
            n_bits: Resolution::Bits(4),
            ..Default::default()
        };
        let x = ofdm_modulate_ideal(&sig.grid(), &sig.numerology).unwrap();
        let bb = ComplexSampleBlock::new(x, sig.numerology.chip_rate_hz).unwrap();
        let dac = dac_convert(&bb, &cfg).unwrap();
        let lpf = apply_butterworth(&dac, 1, 400e6).unwrap();
        for (b, n) in [(&bb, 1024), (&dac, 4096), (&lpf, 4096)] {
            let r = estimate_psd(b, n).unwrap();
            assert!((r.total_power_mw() / b.power() - 1.0).abs() < 0.01);
        }
    }

    #[test]
    fn occupied_width_of_full_grid() {
        let sig = short_sig();
        let x = ofdm_modulate_ideal(&sig.grid(), &sig.numerology).unwrap();
        let bb = ComplexSampleBlock::new(x, sig.numerology.chip_rate_hz).unwrap();
        let r = estimate_psd(&bb, 2048).unwrap();
        let peak = r.psd_dbm_per_hz[1024 - 200..1024 + 200]
            .iter()
            .sum::<f64>()
            / 400.0;
        let above: Vec<f64> = r
            .freqs_hz
            .iter()
            .zip(&r.psd_dbm_per_hz)
            .filter(|(_, p)| **p > peak - 3.0)
            .map(|(f, _)| *f)
            .collect();
        let width = above.last().unwrap() - above.first().unwrap() + r.resolution_hz;
        assert!((395e6..=400e6).contains(&width), "{width}");
    }

    #[test]
    fn aclr_needs_span() {
        let bb = ComplexSampleBlock::new(vec![Complex64::new(1.0, 0.0); 4096], 500e6).unwrap();
        let r = estimate_psd(&bb, 256).unwrap();
        assert!(measure_aclr(&r, &ChannelPlan::default(), 1).is_err());
        assert!(measure_aclr(&r, &ChannelPlan::default(), 0).is_err());
    }

    #[test]
    fn image_spoils_second_adjacent_channel() {
        let cfg = DacChainConfig {
            lpf_order: 0,
            ..Default::default()
        };
        let r = transmit_spectrum(&cfg, &short_sig(), &ChannelPlan::default(), 8192).unwrap();
        assert!(r.aclr_db[1] < 28.0, "{:?}", r.aclr_db);
        assert!((r.total_power_mw() - 1.0).abs() < 0.01);
    }

    #[test]
    fn evm_prediction_examples() {
        assert_eq!(evm_prediction(0.0, 0.0, 0.0, 1.0).unwrap(), 0.0);
        assert!((evm_prediction(0.01, 0.0, 0.0, 1.0).unwrap() - 1.0).abs() < 1e-12);
        assert!(evm_prediction(0.1, 0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn clean_loopback_evm() {
        let cfg = DacChainConfig {
            lpf_order: 0,
            ..Default::default()
        };
        let e = measure_evm(&cfg, 0.0, &short_sig()).unwrap();
        assert!(e < 0.1, "{e}");
        for order in 1..=3 {
            let c = DacChainConfig {
                lpf_order: order,
                ..Default::default()
            };
            assert!(measure_evm(&c, 0.0, &short_sig()).unwrap() < 1.0);
        }
    }

    #[test]
    fn rf_noise_sets_evm() {
        let e = measure_evm(&DacChainConfig::default(), 1e-3, &short_sig()).unwrap();
        let want = evm_prediction(0.0, 1e-3, 0.0, 1.0).unwrap();
        assert!((e / want - 1.0).abs() < 0.05, "{e} vs {want}");
    }

    #[test]
    fn four_bit_floor() {
        let cfg = DacChainConfig {
            n_bits: Resolution::Bits(4),
            ..Default::default()
        };
        let sig = short_sig();
        let e = measure_evm(&cfg, 0.0, &sig).unwrap();
        let a = alpha_of(Resolution::Bits(4)).unwrap();
        let sv = dac_noise_in_band(a, sig.numerology.occupied_bw_hz(), cfg.dac_fs_hz);
        let want = evm_prediction(a, 0.0, sv, 1.0).unwrap();
        assert!((e / want - 1.0).abs() < 0.1, "{e} vs {want}");
    }
}
