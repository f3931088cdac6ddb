//! Wideband OFDM link simulator: DAC, AWGN, AGC, ADC, FIR, demodulation and
//! pilot-aided single-tap equalisation.
//!
//! The input SNR is wideband: unit signal power against complex noise of
//! variance `10^(-snr/10)` over the full chip-rate band. Only the occupied
//! subcarriers are demodulated, so the post-equalisation SNR of an ideal
//! receiver exceeds the input SNR by the oversampling ratio `N_fft / N_sc`.
//!
//! The channel applies a random phase and a random fractional-sample delay
//! per stream, both known to the equaliser. Transmit and receive converters
//! are therefore not sample-aligned, as in a real link.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::dsp;
use crate::error::{invalid_arg, Error, Result};
use crate::quantization::{
    alpha_of, mean_power, quantize_samples, ComplexSampleBlock, QuantizerSpec, Resolution,
};
use crate::sinr::{sinr_orthogonal_quantized, sinr_sdma_quantized, LinkQuality};
use crate::units::{db_to_lin, lin_to_db};

/// RNG substreams of one trial.
const STREAM_GRID: u64 = 0;
const STREAM_NOISE: u64 = 1;
const STREAM_INTERFERER: u64 = 2;
const STREAM_CHANNEL: u64 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OfdmNumerology {
    pub fft_size: usize,
    pub scs_hz: f64,
    pub chip_rate_hz: f64,
    pub sc_per_prb: usize,
    pub max_prbs: usize,
    pub used_prbs: usize,
    /// Cyclic prefix length in chips.
    pub cp_len: usize,
}

impl Default for OfdmNumerology {
    fn default() -> Self {
        Self {
            fft_size: 4096,
            scs_hz: 120e3,
            chip_rate_hz: 491.52e6,
            sc_per_prb: 12,
            max_prbs: 275,
            used_prbs: 274,
            cp_len: 288,
        }
    }
}

impl OfdmNumerology {
    pub fn with_prbs(mut self, used_prbs: usize) -> Self {
        self.used_prbs = used_prbs;
        self
    }

    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if self.fft_size < 2 {
            v.push("ofdm.fft_size must be at least 2".into());
        }
        if !(self.scs_hz > 0.0) {
            v.push("ofdm.scs_hz must be positive".into());
        }
        if !(self.chip_rate_hz > 0.0) {
            v.push("ofdm.chip_rate_hz must be positive".into());
        }
        let expect = self.fft_size as f64 * self.scs_hz;
        if (self.chip_rate_hz - expect).abs() > 1e-9 * expect.abs().max(1.0) {
            v.push(format!(
                "ofdm.chip_rate_hz ({}) must equal fft_size * scs_hz ({expect})",
                self.chip_rate_hz
            ));
        }
        if self.sc_per_prb == 0 {
            v.push("ofdm.sc_per_prb must be positive".into());
        }
        if self.used_prbs == 0 || self.used_prbs > self.max_prbs {
            v.push(format!(
                "ofdm.used_prbs must be in 1..={}, got {}",
                self.max_prbs, self.used_prbs
            ));
        }
        if self.n_sc() > self.fft_size {
            v.push(format!(
                "ofdm: {} used subcarriers exceed the FFT size {}",
                self.n_sc(),
                self.fft_size
            ));
        }
        if self.cp_len >= self.fft_size {
            v.push("ofdm.cp_len must be shorter than the FFT".into());
        }
        v
    }

    pub fn validate(&self) -> Result<()> {
        match self.violations().into_iter().next() {
            Some(m) => Err(Error::InvalidArgument(m)),
            None => Ok(()),
        }
    }

    pub fn n_sc(&self) -> usize {
        self.used_prbs * self.sc_per_prb
    }

    pub fn occupied_bw_hz(&self) -> f64 {
        self.n_sc() as f64 * self.scs_hz
    }

    pub fn symbol_len(&self) -> usize {
        self.fft_size + self.cp_len
    }

    pub fn cp_fraction(&self) -> f64 {
        self.cp_len as f64 / self.fft_size as f64
    }

    /// Index range of the occupied subcarriers within a grid row, whose
    /// entry `i` sits at frequency `(i - fft_size/2) * scs`.
    pub fn used_range(&self) -> std::ops::Range<usize> {
        let lo = self.fft_size / 2 - self.n_sc() / 2;
        lo..lo + self.n_sc()
    }

    fn subcarrier_offset(&self, row_index: usize) -> i64 {
        row_index as i64 - (self.fft_size / 2) as i64
    }

    fn fft_bin(&self, row_index: usize) -> usize {
        self.subcarrier_offset(row_index).rem_euclid(self.fft_size as i64) as usize
    }
}

/// `10 log10(n_fft / n_sc)`.
pub fn osr_gain_db(n_fft: usize, n_sc: usize) -> Result<f64> {
    if n_sc == 0 || n_sc > n_fft {
        return invalid_arg(format!("need 0 < n_sc <= n_fft, got n_sc={n_sc}, n_fft={n_fft}"));
    }
    Ok(10.0 * (n_fft as f64 / n_sc as f64).log10())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Modulation {
    Qpsk,
    Qam16,
    Qam64,
    Qam256,
}

impl Modulation {
    fn side(self) -> u32 {
        match self {
            Modulation::Qpsk => 2,
            Modulation::Qam16 => 4,
            Modulation::Qam64 => 8,
            Modulation::Qam256 => 16,
        }
    }

    pub fn order(self) -> u32 {
        self.side() * self.side()
    }

    /// Constellation point `(i, q)` with `i, q < sqrt(M)`, unit average energy.
    pub fn point(self, i: u32, q: u32) -> Complex64 {
        let m = self.order() as f64;
        let s = self.side() as f64;
        let norm = (2.0 * (m - 1.0) / 3.0).sqrt();
        let lvl = |x: u32| 2.0 * x as f64 - (s - 1.0);
        Complex64::new(lvl(i), lvl(q)) / norm
    }

    pub fn random<R: Rng + ?Sized>(self, rng: &mut R) -> Complex64 {
        let s = self.side();
        self.point(rng.random_range(0..s), rng.random_range(0..s))
    }
}

/// Frequency-domain symbols; each row has `fft_size` entries in ascending
/// frequency order and unused subcarriers are exactly zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ResourceGrid {
    pub symbols: Vec<Vec<Complex64>>,
    pub modulation: Modulation,
}

impl ResourceGrid {
    pub fn random<R: Rng + ?Sized>(
        num: &OfdmNumerology,
        modulation: Modulation,
        n_symbols: usize,
        rng: &mut R,
    ) -> Self {
        let used = num.used_range();
        let symbols = (0..n_symbols)
            .map(|_| {
                let mut row = vec![Complex64::new(0.0, 0.0); num.fft_size];
                for v in &mut row[used.clone()] {
                    *v = modulation.random(rng);
                }
                row
            })
            .collect();
        Self {
            symbols,
            modulation,
        }
    }

    pub fn n_symbols(&self) -> usize {
        self.symbols.len()
    }

    fn check(&self, num: &OfdmNumerology) -> Result<()> {
        if self.symbols.is_empty() {
            return invalid_arg("resource grid has no symbols");
        }
        if let Some(t) = self.symbols.iter().position(|r| r.len() != num.fft_size) {
            return invalid_arg(format!(
                "grid symbol {t} has {} subcarriers, numerology expects {}",
                self.symbols[t].len(),
                num.fft_size
            ));
        }
        Ok(())
    }
}

/// IFFT with `1/sqrt(N_sc)` scaling (unit mean power for unit-energy
/// symbols) and cyclic prefix, before any transmit quantization.
pub fn ofdm_modulate_ideal(grid: &ResourceGrid, num: &OfdmNumerology) -> Result<Vec<Complex64>> {
    num.validate()?;
    grid.check(num)?;
    let n = num.fft_size;
    let ifft = FftPlanner::new().plan_fft_inverse(n);
    let scale = 1.0 / (num.n_sc() as f64).sqrt();
    let mut out = Vec::with_capacity(grid.n_symbols() * num.symbol_len());
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for row in &grid.symbols {
        for (i, v) in row.iter().enumerate() {
            buf[num.fft_bin(i)] = v * scale;
        }
        ifft.process(&mut buf);
        out.extend_from_slice(&buf[n - num.cp_len..]);
        out.extend_from_slice(&buf);
    }
    Ok(out)
}

/// Modulate and apply the transmit quantizer.
pub fn ofdm_modulate(
    grid: &ResourceGrid,
    num: &OfdmNumerology,
    n_dac: Resolution,
) -> Result<ComplexSampleBlock> {
    let spec = QuantizerSpec::optimal(n_dac)?;
    let x = ofdm_modulate_ideal(grid, num)?;
    Ok(ComplexSampleBlock {
        samples: quantize_samples(&x, &spec),
        sample_rate: num.chip_rate_hz,
    })
}

/// FFT each symbol, starting the window `advance` samples into the cyclic
/// prefix (`cp_len` means no advance is applied), and undo the resulting
/// linear phase. Returns rows in the grid layout.
pub fn ofdm_demodulate(
    samples: &[Complex64],
    num: &OfdmNumerology,
    window_advance: usize,
) -> Result<Vec<Vec<Complex64>>> {
    num.validate()?;
    if window_advance > num.cp_len {
        return invalid_arg("FFT window advance exceeds the cyclic prefix");
    }
    let n = num.fft_size;
    let sym = num.symbol_len();
    if samples.len() < sym {
        return invalid_arg("sample block is shorter than one OFDM symbol");
    }
    let n_symbols = samples.len() / sym;
    let fft = FftPlanner::new().plan_fft_forward(n);
    let scale = (num.n_sc() as f64).sqrt() / n as f64;
    let rot: Vec<Complex64> = (0..n)
        .map(|i| {
            let k = num.subcarrier_offset(i) as f64;
            Complex64::from_polar(scale, 2.0 * PI * k * window_advance as f64 / n as f64)
        })
        .collect();
    let mut rows = Vec::with_capacity(n_symbols);
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for t in 0..n_symbols {
        let start = t * sym + num.cp_len - window_advance;
        buf.copy_from_slice(&samples[start..start + n]);
        fft.process(&mut buf);
        rows.push((0..n).map(|i| buf[num.fft_bin(i)] * rot[i]).collect());
    }
    Ok(rows)
}

/// Scale to unit empirical complex variance (no DC removal).
pub fn agc_normalize(block: &ComplexSampleBlock) -> Result<ComplexSampleBlock> {
    block.check()?;
    let p = block.power();
    if p == 0.0 {
        return Err(Error::DegenerateInput("AGC input is all zeros".into()));
    }
    let g = 1.0 / p.sqrt();
    Ok(ComplexSampleBlock {
        samples: block.samples.iter().map(|s| s * g).collect(),
        sample_rate: block.sample_rate,
    })
}

/// Linear-phase windowed-sinc low-pass, aligned to the input.
pub fn fir_lowpass(
    block: &ComplexSampleBlock,
    cutoff_hz: f64,
    taps: usize,
) -> Result<ComplexSampleBlock> {
    block.check()?;
    let h = dsp::design_lowpass(cutoff_hz, block.sample_rate, taps)?;
    Ok(ComplexSampleBlock {
        samples: dsp::filter_centered(&block.samples, &h),
        sample_rate: block.sample_rate,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LinkTrialConfig {
    pub snr_db: f64,
    pub n_adc: Resolution,
    pub n_dac: Resolution,
    pub numerology: OfdmNumerology,
    /// Data symbols; pilots come on top.
    pub n_symbols: usize,
    pub n_pilots: usize,
    pub fir_taps: usize,
    pub modulation: Modulation,
    pub seed: u64,
    pub sir_db: Option<f64>,
    pub gamma0_db: Option<f64>,
}

impl Default for LinkTrialConfig {
    fn default() -> Self {
        Self {
            snr_db: 10.0,
            n_adc: Resolution::Infinite,
            n_dac: Resolution::Infinite,
            numerology: OfdmNumerology::default(),
            n_symbols: 20,
            n_pilots: 2,
            fir_taps: 129,
            modulation: Modulation::Qpsk,
            seed: 0,
            sir_db: None,
            gamma0_db: None,
        }
    }
}

impl LinkTrialConfig {
    pub fn violations(&self) -> Vec<String> {
        let mut v = self.numerology.violations();
        if !self.snr_db.is_finite() {
            v.push("link.snr_db must be finite".into());
        }
        for (name, r) in [("n_adc", self.n_adc), ("n_dac", self.n_dac)] {
            if let Err(e) = r.validate() {
                v.push(format!("link.{name}: {e}"));
            }
        }
        if self.n_symbols == 0 {
            v.push("link.n_symbols must be at least 1".into());
        }
        if self.n_pilots == 0 {
            v.push("link.n_pilots must be at least 1".into());
        }
        if self.fir_taps.is_multiple_of(2) {
            v.push("link.fir_taps must be odd".into());
        }
        if self.fir_taps / 2 + DELAY_TAPS / 2 > self.numerology.cp_len / 2 {
            v.push("link.fir_taps: filter span exceeds the cyclic-prefix margin".into());
        }
        if let Some(s) = self.sir_db {
            if s.is_nan() {
                v.push("link.sir_db must be a number".into());
            }
        }
        if let Some(g) = self.gamma0_db {
            if !g.is_finite() {
                v.push("link.gamma0_db must be finite".into());
            }
        }
        v
    }

    pub fn validate(&self) -> Result<()> {
        match self.violations().into_iter().next() {
            Some(m) => Err(Error::InvalidArgument(m)),
            None => Ok(()),
        }
    }

    fn psi(&self) -> f64 {
        match self.sir_db {
            Some(s) if s.is_finite() => db_to_lin(-s),
            Some(s) if s < 0.0 => f64::INFINITY,
            _ => 0.0,
        }
    }

    fn osr(&self) -> f64 {
        self.numerology.fft_size as f64 / self.numerology.n_sc() as f64
    }
}

/// Taps of the fractional-delay interpolator in the channel.
const DELAY_TAPS: usize = 65;

/// Flat channel: unit gain, random phase, fractional-sample delay.
struct FlatChannel {
    rot: Complex64,
    delay: Vec<f64>,
}

impl FlatChannel {
    fn draw(rng: &mut ChaCha8Rng, taps: usize) -> Result<Self> {
        let rot = Complex64::from_polar(1.0, rng.random_range(0.0..2.0 * PI));
        let tau = rng.random_range(0.0..1.0);
        Ok(Self {
            rot,
            delay: dsp::design_fractional_delay(tau, taps)?,
        })
    }

    fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = dsp::filter_centered(x, &self.delay);
        y.iter_mut().for_each(|v| *v *= self.rot);
        y
    }

    fn response(&self, f_hz: f64, fs_hz: f64) -> Complex64 {
        self.rot * dsp::centered_response_complex(&self.delay, f_hz, fs_hz)
    }
}

fn substream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn add_awgn(x: &mut [Complex64], var: f64, rng: &mut ChaCha8Rng) {
    if var == 0.0 {
        return;
    }
    let d = Normal::new(0.0, (var / 2.0).sqrt()).expect("finite variance");
    for s in x {
        *s += Complex64::new(d.sample(rng), d.sample(rng));
    }
}

/// Post-equalisation SINR (linear) of one trial with noise variance
/// `noise_var` and interference-to-signal ratio `psi`.
fn simulate(cfg: &LinkTrialConfig, noise_var: f64, psi: f64) -> Result<f64> {
    cfg.validate()?;
    if !psi.is_finite() {
        return invalid_arg("interference power must be finite");
    }
    let num = &cfg.numerology;
    let n_total = cfg.n_pilots + cfg.n_symbols;
    let grid = ResourceGrid::random(
        num,
        cfg.modulation,
        n_total,
        &mut substream(cfg.seed, STREAM_GRID),
    );
    let mut chan = substream(cfg.seed, STREAM_CHANNEL);
    let sig_ch = FlatChannel::draw(&mut chan, DELAY_TAPS)?;
    let int_ch = FlatChannel::draw(&mut chan, DELAY_TAPS)?;
    let mut rx = sig_ch.apply(&ofdm_modulate(&grid, num, cfg.n_dac)?.samples);
    if psi > 0.0 {
        let other = ResourceGrid::random(
            num,
            cfg.modulation,
            n_total,
            &mut substream(cfg.seed, STREAM_INTERFERER),
        );
        let i = int_ch.apply(&ofdm_modulate(&other, num, cfg.n_dac)?.samples);
        let a = psi.sqrt();
        rx.iter_mut().zip(&i).for_each(|(r, v)| *r += v * a);
    }
    add_awgn(&mut rx, noise_var, &mut substream(cfg.seed, STREAM_NOISE));

    let block = agc_normalize(&ComplexSampleBlock {
        samples: rx,
        sample_rate: num.chip_rate_hz,
    })?;
    let adc = QuantizerSpec::optimal(cfg.n_adc)?;
    let cutoff = num.occupied_bw_hz() / 2.0;
    let h = dsp::design_lowpass(cutoff, num.chip_rate_hz, cfg.fir_taps)?;
    let y = dsp::filter_centered(&quantize_samples(&block.samples, &adc), &h);
    let rows = ofdm_demodulate(&y, num, num.cp_len / 2)?;

    // Known channel and filter response per subcarrier times one common
    // complex gain fitted to the pilots.
    let used = num.used_range();
    let resp: Vec<Complex64> = used
        .clone()
        .map(|i| {
            let f = num.subcarrier_offset(i) as f64 * num.scs_hz;
            sig_ch.response(f, num.chip_rate_hz)
                * dsp::centered_response(&h, f, num.chip_rate_hz)
        })
        .collect();
    let mut num_acc = Complex64::new(0.0, 0.0);
    let mut den_acc = 0.0;
    for t in 0..cfg.n_pilots {
        for (j, i) in used.clone().enumerate() {
            let ref_ = grid.symbols[t][i] * resp[j];
            num_acc += ref_.conj() * rows[t][i];
            den_acc += ref_.norm_sqr();
        }
    }
    let g = num_acc / den_acc;
    if !(g.norm() > 0.0) {
        return Err(Error::DegenerateInput("pilot correlation vanished".into()));
    }
    let mut sig = 0.0;
    let mut err = 0.0;
    for t in cfg.n_pilots..n_total {
        for (j, i) in used.clone().enumerate() {
            let ideal = grid.symbols[t][i];
            let z = rows[t][i] / (g * resp[j]);
            sig += ideal.norm_sqr();
            err += (z - ideal).norm_sqr();
        }
    }
    Ok(sig / err)
}

/// Post-equalisation SNR in dB for the configured input SNR.
pub fn run_link_trial(cfg: &LinkTrialConfig) -> Result<f64> {
    Ok(lin_to_db(simulate(cfg, db_to_lin(-cfg.snr_db), 0.0)?))
}

/// Post-equalisation SINR in dB with an independent in-band interferer at
/// relative power `10^(-sir/10)` and noise at `gamma0_db`. A missing or
/// infinite SIR means no interferer.
pub fn run_sdma_link_trial(cfg: &LinkTrialConfig) -> Result<f64> {
    let g0 = cfg
        .gamma0_db
        .ok_or_else(|| Error::InvalidArgument("SDMA trial needs gamma0_db".into()))?;
    Ok(lin_to_db(simulate(cfg, db_to_lin(-g0), cfg.psi())?))
}

/// Single-quantizer prediction of the post-equalisation SNR in dB: the
/// per-subcarrier SNR is `OSR * snr` and the beamforming gain is the OSR.
pub fn predicted_post_eq_db(cfg: &LinkTrialConfig) -> Result<f64> {
    let osr = cfg.osr();
    let alpha = alpha_of(cfg.n_adc)?;
    Ok(lin_to_db(sinr_orthogonal_quantized(
        db_to_lin(cfg.snr_db) * osr,
        alpha,
        osr,
    )?))
}

/// Prediction for the SDMA trial from the closed-form SINR.
pub fn predicted_sdma_db(cfg: &LinkTrialConfig) -> Result<f64> {
    let g0 = cfg
        .gamma0_db
        .ok_or_else(|| Error::InvalidArgument("SDMA prediction needs gamma0_db".into()))?;
    let osr = cfg.osr();
    let q = LinkQuality::new(db_to_lin(g0) * osr, osr, cfg.psi())?;
    Ok(lin_to_db(sinr_sdma_quantized(&q, alpha_of(cfg.n_adc)?)?))
}

/// Run independent trials in parallel; results keep the input order.
pub fn run_link_trials(cfgs: &[LinkTrialConfig]) -> Vec<Result<f64>> {
    cfgs.par_iter()
        .map(|c| {
            if c.gamma0_db.is_some() {
                run_sdma_link_trial(c)
            } else {
                run_link_trial(c)
            }
        })
        .collect()
}

/// Mean power of a block, exposed for diagnostics.
pub fn block_power(x: &[Complex64]) -> f64 {
    mean_power(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantization::measure_alpha;

    fn small() -> OfdmNumerology {
        OfdmNumerology {
            fft_size: 256,
            scs_hz: 120e3,
            chip_rate_hz: 256.0 * 120e3,
            sc_per_prb: 12,
            max_prbs: 20,
            used_prbs: 16,
            cp_len: 18,
        }
    }

    #[test]
    fn numerology_defaults() {
        let n = OfdmNumerology::default();
        n.validate().unwrap();
        assert_eq!(n.n_sc(), 3288);
        assert!((n.occupied_bw_hz() - 394.56e6).abs() < 1.0);
        // 4096 + 288 chips at 491.52 MHz
        let dur = n.symbol_len() as f64 / n.chip_rate_hz;
        assert!((dur - 8.92e-6).abs() < 0.01e-6);
        assert!(n.with_prbs(276).validate().is_err());
        let bad = OfdmNumerology {
            chip_rate_hz: 500e6,
            ..n
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn osr_examples() {
        assert!((osr_gain_db(4096, 3288).unwrap() - 0.95).abs() < 0.01);
        assert!((osr_gain_db(4096, 2400).unwrap() - 2.32).abs() < 0.01);
        assert_eq!(osr_gain_db(4096, 4096).unwrap(), 0.0);
        assert!(osr_gain_db(4096, 0).is_err());
    }

    #[test]
    fn constellations_have_unit_energy() {
        for m in [
            Modulation::Qpsk,
            Modulation::Qam16,
            Modulation::Qam64,
            Modulation::Qam256,
        ] {
            let s = m.side();
            let e: f64 = (0..s)
                .flat_map(|i| (0..s).map(move |q| m.point(i, q).norm_sqr()))
                .sum::<f64>()
                / m.order() as f64;
            assert!((e - 1.0).abs() < 1e-12, "{m:?}");
        }
    }

    #[test]
    fn unused_subcarriers_are_zero() {
        let num = small();
        let g = ResourceGrid::random(&num, Modulation::Qam16, 3, &mut substream(1, 0));
        let used = num.used_range();
        for row in &g.symbols {
            for (i, v) in row.iter().enumerate() {
                assert_eq!(used.contains(&i), *v != Complex64::new(0.0, 0.0));
            }
        }
    }

    #[test]
    fn single_tone_is_complex_exponential() {
        let num = small();
        let mut row = vec![Complex64::new(0.0, 0.0); num.fft_size];
        let idx = num.used_range().start + 5;
        row[idx] = Complex64::new(1.0, 0.0);
        let grid = ResourceGrid {
            symbols: vec![row],
            modulation: Modulation::Qpsk,
        };
        let x = ofdm_modulate(&grid, &num, Resolution::Infinite).unwrap().samples;
        let k = num.subcarrier_offset(idx) as f64;
        let amp = 1.0 / (num.n_sc() as f64).sqrt();
        for (m, v) in x.iter().enumerate() {
            let t = m as f64 - num.cp_len as f64;
            let want = Complex64::from_polar(amp, 2.0 * PI * k * t / num.fft_size as f64);
            assert!((v - want).norm() < 1e-12);
        }
    }

    #[test]
    fn parseval_and_unit_power() {
        let num = OfdmNumerology::default();
        let grid = ResourceGrid::random(&num, Modulation::Qpsk, 4, &mut substream(3, 0));
        let x = ofdm_modulate_ideal(&grid, &num).unwrap();
        for (t, row) in grid.symbols.iter().enumerate() {
            let body = &x[t * num.symbol_len() + num.cp_len..(t + 1) * num.symbol_len()];
            let time: f64 = body.iter().map(|v| v.norm_sqr()).sum();
            let freq: f64 = row.iter().map(|v| v.norm_sqr()).sum::<f64>() * num.fft_size as f64
                / num.n_sc() as f64;
            assert!((time / freq - 1.0).abs() < 1e-9);
        }
        let g16 = ResourceGrid::random(&num, Modulation::Qam16, 4, &mut substream(3, 0));
        let p = block_power(&ofdm_modulate_ideal(&g16, &num).unwrap());
        assert!((p - 1.0).abs() < 0.01, "{p}");
    }

    #[test]
    fn dac_distortion_matches_alpha() {
        let num = OfdmNumerology::default();
        let grid = ResourceGrid::random(&num, Modulation::Qpsk, 6, &mut substream(5, 0));
        let x = ofdm_modulate_ideal(&grid, &num).unwrap();
        let q = ofdm_modulate(&grid, &num, Resolution::Bits(4)).unwrap().samples;
        let xx: f64 = x.iter().map(|v| v.norm_sqr()).sum();
        let g = x.iter().zip(&q).map(|(a, b)| (a.conj() * b).re).sum::<f64>() / xx;
        let e: f64 = x.iter().zip(&q).map(|(a, b)| (b - a * g).norm_sqr()).sum::<f64>() / xx;
        let a = alpha_of(Resolution::Bits(4)).unwrap();
        assert!((e / (a * (1.0 - a)) - 1.0).abs() < 0.1, "{e}");
    }

    #[test]
    fn round_trip_recovers_grid() {
        let num = OfdmNumerology::default();
        let grid = ResourceGrid::random(&num, Modulation::Qam64, 3, &mut substream(7, 0));
        let x = ofdm_modulate_ideal(&grid, &num).unwrap();
        for adv in [0, num.cp_len / 2, num.cp_len] {
            let rows = ofdm_demodulate(&x, &num, adv).unwrap();
            for (a, b) in grid.symbols.iter().zip(&rows) {
                for (u, v) in a.iter().zip(b) {
                    assert!((u - v).norm() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let num = small();
        let grid = ResourceGrid {
            symbols: vec![vec![Complex64::new(0.0, 0.0); 10]],
            modulation: Modulation::Qpsk,
        };
        assert!(matches!(
            ofdm_modulate(&grid, &num, Resolution::Infinite),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn agc_examples() {
        let b = ComplexSampleBlock::new(vec![Complex64::new(2.0, 0.0), Complex64::new(0.0, -2.0)], 1.0)
            .unwrap();
        let n = agc_normalize(&b).unwrap();
        assert_eq!(n.samples[0], Complex64::new(1.0, 0.0));
        assert!((n.power() - 1.0).abs() < 1e-9);
        let again = agc_normalize(&n).unwrap();
        for (a, b) in n.samples.iter().zip(&again.samples) {
            assert!((a - b).norm() < 1e-9);
        }
        let z = ComplexSampleBlock::new(vec![Complex64::new(0.0, 0.0); 4], 1.0).unwrap();
        assert!(matches!(agc_normalize(&z), Err(Error::DegenerateInput(_))));
    }

    #[test]
    fn agc_then_quantize_gives_alpha() {
        let mut rng = substream(9, 0);
        let d = Normal::new(0.0, 1.7).unwrap();
        let s: Vec<Complex64> = (0..200_000)
            .map(|_| Complex64::new(d.sample(&mut rng), d.sample(&mut rng)))
            .collect();
        let b = agc_normalize(&ComplexSampleBlock::new(s, 1.0).unwrap()).unwrap();
        let spec = QuantizerSpec::optimal(Resolution::Bits(3)).unwrap();
        let q = crate::quantization::quantize(&b, &spec).unwrap();
        let a = measure_alpha(&b, &q).unwrap();
        assert!((a / spec.alpha() - 1.0).abs() < 0.05);
    }

    #[test]
    fn fir_lowpass_checks() {
        let b = ComplexSampleBlock::new(vec![Complex64::new(1.0, 0.0); 512], 100.0).unwrap();
        assert!(fir_lowpass(&b, 60.0, 129).is_err());
        assert!(fir_lowpass(&b, 0.0, 129).is_err());
        let y = fir_lowpass(&b, 20.0, 129).unwrap();
        assert!((y.samples[256].re - 1.0).abs() < 1e-9);
    }

    #[test]
    fn ideal_link_shows_osr_gain() {
        let cfg = LinkTrialConfig {
            snr_db: 10.0,
            ..Default::default()
        };
        let snr = run_link_trial(&cfg).unwrap();
        assert!((snr - 10.95).abs() < 0.3, "{snr}");
    }

    #[test]
    fn quantized_link_tracks_prediction() {
        for snr in [0.0, 15.0, 25.0] {
            let cfg = LinkTrialConfig {
                snr_db: snr,
                n_adc: Resolution::Bits(4),
                n_dac: Resolution::Bits(6),
                seed: 3,
                ..Default::default()
            };
            let sim = run_link_trial(&cfg).unwrap();
            let pred = predicted_post_eq_db(&cfg).unwrap();
            assert!((sim - pred).abs() < 0.5, "snr {snr}: {sim} vs {pred}");
        }
    }

    #[test]
    fn trials_are_reproducible_and_psi_zero_reduces() {
        let cfg = LinkTrialConfig {
            snr_db: 12.0,
            n_adc: Resolution::Bits(3),
            n_dac: Resolution::Bits(5),
            numerology: OfdmNumerology::default().with_prbs(100),
            n_symbols: 4,
            seed: 77,
            ..Default::default()
        };
        let a = run_link_trial(&cfg).unwrap();
        assert_eq!(a, run_link_trial(&cfg).unwrap());
        let sdma = LinkTrialConfig {
            gamma0_db: Some(12.0),
            sir_db: Some(f64::INFINITY),
            ..cfg
        };
        assert_eq!(a, run_sdma_link_trial(&sdma).unwrap());
        let par = run_link_trials(&[cfg, sdma, cfg]);
        assert_eq!(par[0].as_ref().unwrap(), &a);
        assert_eq!(par[2].as_ref().unwrap(), &a);
    }

    #[test]
    fn interference_lowers_sinr() {
        let base = LinkTrialConfig {
            gamma0_db: Some(10.0),
            n_symbols: 4,
            numerology: OfdmNumerology::default().with_prbs(100),
            ..Default::default()
        };
        let clean = run_sdma_link_trial(&base).unwrap();
        let hit = run_sdma_link_trial(&LinkTrialConfig {
            sir_db: Some(10.0),
            ..base
        })
        .unwrap();
        let pred = predicted_sdma_db(&LinkTrialConfig {
            sir_db: Some(10.0),
            ..base
        })
        .unwrap();
        assert!(hit < clean - 1.0);
        assert!((hit - pred).abs() < 0.5, "{hit} vs {pred}");
    }
}
