//! Signal-processing helpers: windowed-sinc FIR design, delay-compensated
//! filtering, Welch PSD and zero-phase frequency-domain filtering.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{invalid_arg, Result};

/// Blackman window of length `n` (symmetric).
pub fn blackman(n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![1.0];
    }
    let m = (n - 1) as f64;
    (0..n)
        .map(|i| {
            let x = 2.0 * PI * i as f64 / m;
            0.42 - 0.5 * x.cos() + 0.08 * (2.0 * x).cos()
        })
        .collect()
}

/// Periodic Hann window, the usual choice for spectral estimation.
pub fn hann_periodic(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / n as f64).cos())
        .collect()
}

/// Linear-phase low-pass: Blackman-windowed sinc with unit DC gain.
/// `taps` must be odd so the group delay is an integer number of samples.
pub fn design_lowpass(cutoff_hz: f64, fs_hz: f64, taps: usize) -> Result<Vec<f64>> {
    if !(fs_hz > 0.0) || !fs_hz.is_finite() {
        return invalid_arg(format!("sample rate must be positive, got {fs_hz}"));
    }
    if !(cutoff_hz > 0.0 && cutoff_hz < fs_hz / 2.0) {
        return invalid_arg(format!(
            "cutoff {cutoff_hz} Hz must lie in (0, fs/2 = {} Hz)",
            fs_hz / 2.0
        ));
    }
    if taps == 0 || taps.is_multiple_of(2) {
        return invalid_arg(format!("tap count must be odd, got {taps}"));
    }
    let fc = cutoff_hz / fs_hz;
    let mid = (taps / 2) as f64;
    let win = blackman(taps);
    let mut h: Vec<f64> = (0..taps)
        .map(|i| {
            let t = i as f64 - mid;
            let sinc = if t == 0.0 {
                2.0 * fc
            } else {
                (2.0 * PI * fc * t).sin() / (PI * t)
            };
            sinc * win[i]
        })
        .collect();
    let dc: f64 = h.iter().sum();
    h.iter_mut().for_each(|v| *v /= dc);
    Ok(h)
}

/// Frequency response of a symmetric FIR referenced to its centre tap, i.e.
/// the response seen after group-delay compensation. Real for symmetric taps.
pub fn centered_response(taps: &[f64], f_hz: f64, fs_hz: f64) -> f64 {
    let mid = (taps.len() / 2) as f64;
    taps.iter()
        .enumerate()
        .map(|(i, h)| h * (2.0 * PI * f_hz * (i as f64 - mid) / fs_hz).cos())
        .sum()
}

/// Complex response of an arbitrary real FIR referenced to its centre tap.
pub fn centered_response_complex(taps: &[f64], f_hz: f64, fs_hz: f64) -> Complex64 {
    let mid = (taps.len() / 2) as f64;
    taps.iter()
        .enumerate()
        .map(|(i, h)| Complex64::from_polar(*h, -2.0 * PI * f_hz * (i as f64 - mid) / fs_hz))
        .sum()
}

/// Windowed-sinc interpolator delaying by `tau` samples (`0 <= tau < 1`)
/// relative to its centre tap, with unit DC gain.
pub fn design_fractional_delay(tau: f64, taps: usize) -> Result<Vec<f64>> {
    if !(0.0..1.0).contains(&tau) {
        return invalid_arg(format!("fractional delay must lie in [0, 1), got {tau}"));
    }
    if taps < 3 || taps.is_multiple_of(2) {
        return invalid_arg(format!("tap count must be odd and >= 3, got {taps}"));
    }
    let mid = (taps / 2) as f64;
    let span = (taps - 1) as f64;
    let mut h: Vec<f64> = (0..taps)
        .map(|i| {
            let t = i as f64 - mid - tau;
            let sinc = if t == 0.0 { 1.0 } else { (PI * t).sin() / (PI * t) };
            let x = ((i as f64 - tau) / span).clamp(0.0, 1.0) * 2.0 * PI;
            sinc * (0.42 - 0.5 * x.cos() + 0.08 * (2.0 * x).cos())
        })
        .collect();
    let dc: f64 = h.iter().sum();
    h.iter_mut().for_each(|v| *v /= dc);
    Ok(h)
}

/// Convolve with an odd-length FIR and drop the group delay so that output
/// sample `i` aligns with input sample `i`. Samples beyond the ends are zero.
pub fn filter_centered(x: &[Complex64], taps: &[f64]) -> Vec<Complex64> {
    let half = taps.len() / 2;
    let n = x.len();
    let mut y = vec![Complex64::new(0.0, 0.0); n];
    for (i, out) in y.iter_mut().enumerate() {
        // y[i] = sum_k h[k] x[i + half - k]
        let k_lo = (i + half).saturating_sub(n - 1);
        let k_hi = (i + half).min(taps.len() - 1);
        let mut acc = Complex64::new(0.0, 0.0);
        for k in k_lo..=k_hi {
            acc += x[i + half - k] * taps[k];
        }
        *out = acc;
    }
    y
}

/// Frequency of FFT bin `k` for an `n`-point transform at rate `fs`,
/// mapped to [-fs/2, fs/2).
pub fn bin_frequency(k: usize, n: usize, fs_hz: f64) -> f64 {
    let signed = if k < n.div_ceil(2) {
        k as f64
    } else {
        k as f64 - n as f64
    };
    signed * fs_hz / n as f64
}

/// Multiply the spectrum of `x` by a real gain `gain(f)` (zero phase).
pub fn apply_zero_phase<F: Fn(f64) -> f64>(x: &[Complex64], fs_hz: f64, gain: F) -> Vec<Complex64> {
    let n = x.len();
    if n == 0 {
        return Vec::new();
    }
    let mut planner = FftPlanner::new();
    let mut buf = x.to_vec();
    planner.plan_fft_forward(n).process(&mut buf);
    for (k, v) in buf.iter_mut().enumerate() {
        *v *= gain(bin_frequency(k, n, fs_hz)) / n as f64;
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    buf
}

/// Two-sided power spectral density on an ascending frequency grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Psd {
    pub freqs_hz: Vec<f64>,
    /// Linear power per hertz.
    pub psd: Vec<f64>,
    pub resolution_hz: f64,
}

impl Psd {
    pub fn total_power(&self) -> f64 {
        self.psd.iter().sum::<f64>() * self.resolution_hz
    }

    /// Power in `[lo, hi]`, counting partially covered bins by overlap.
    pub fn band_power(&self, lo_hz: f64, hi_hz: f64) -> f64 {
        let df = self.resolution_hz;
        self.freqs_hz
            .iter()
            .zip(&self.psd)
            .map(|(&f, &p)| {
                let a = (f - df / 2.0).max(lo_hz);
                let b = (f + df / 2.0).min(hi_hz);
                if b > a {
                    p * (b - a)
                } else {
                    0.0
                }
            })
            .sum()
    }

    pub fn span_hz(&self) -> (f64, f64) {
        let df = self.resolution_hz;
        (
            self.freqs_hz[0] - df / 2.0,
            self.freqs_hz[self.freqs_hz.len() - 1] + df / 2.0,
        )
    }
}

/// Welch estimate with a periodic Hann window and 50% overlap, scaled so the
/// integrated PSD matches the mean sample power.
pub fn welch_psd(x: &[Complex64], fs_hz: f64, nperseg: usize) -> Result<Psd> {
    if nperseg < 2 {
        return invalid_arg("segment length must be at least 2");
    }
    if x.len() < 4 * nperseg {
        return invalid_arg(format!(
            "block of {} samples is too short for segments of {nperseg} (need 4x)",
            x.len()
        ));
    }
    if !(fs_hz > 0.0) {
        return invalid_arg("sample rate must be positive");
    }
    let win = hann_periodic(nperseg);
    let wss: f64 = win.iter().map(|w| w * w).sum();
    let step = nperseg / 2;
    let fft = FftPlanner::new().plan_fft_forward(nperseg);
    let mut acc = vec![0.0; nperseg];
    let mut segs = 0usize;
    let mut buf = vec![Complex64::new(0.0, 0.0); nperseg];
    let mut start = 0;
    while start + nperseg <= x.len() {
        for (b, (s, w)) in buf.iter_mut().zip(x[start..start + nperseg].iter().zip(&win)) {
            *b = s * w;
        }
        fft.process(&mut buf);
        for (a, b) in acc.iter_mut().zip(&buf) {
            *a += b.norm_sqr();
        }
        segs += 1;
        start += step;
    }
    let scale = 1.0 / (fs_hz * wss * segs as f64);
    // fftshift into ascending frequency order
    let half = nperseg / 2;
    let mut freqs = Vec::with_capacity(nperseg);
    let mut psd = Vec::with_capacity(nperseg);
    for i in 0..nperseg {
        let k = (i + nperseg - half) % nperseg;
        freqs.push(bin_frequency(k, nperseg, fs_hz));
        psd.push(acc[k] * scale);
    }
    Ok(Psd {
        freqs_hz: freqs,
        psd,
        resolution_hz: fs_hz / nperseg as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn tone(f: f64, fs: f64, n: usize) -> Vec<Complex64> {
        (0..n)
            .map(|i| Complex64::from_polar(1.0, 2.0 * PI * f * i as f64 / fs))
            .collect()
    }

    fn noise(n: usize, power: f64, seed: u64) -> Vec<Complex64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = Normal::new(0.0, (power / 2.0).sqrt()).unwrap();
        (0..n)
            .map(|_| Complex64::new(d.sample(&mut rng), d.sample(&mut rng)))
            .collect()
    }

    #[test]
    fn lowpass_design_checks() {
        assert!(design_lowpass(0.0, 1.0, 129).is_err());
        assert!(design_lowpass(0.5, 1.0, 129).is_err());
        assert!(design_lowpass(0.2, 1.0, 128).is_err());
        let h = design_lowpass(0.2, 1.0, 129).unwrap();
        assert!((h.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        for i in 0..h.len() {
            assert!((h[i] - h[h.len() - 1 - i]).abs() < 1e-15);
        }
    }

    #[test]
    fn passband_tone_kept_stopband_tone_removed() {
        let fs = 491.52e6;
        let fc = 197.28e6;
        let h = design_lowpass(fc, fs, 129).unwrap();
        let n = 8192;
        let pass = filter_centered(&tone(0.5 * fc, fs, n), &h);
        let mid = &pass[200..n - 200];
        let p: f64 = mid.iter().map(|v| v.norm_sqr()).sum::<f64>() / mid.len() as f64;
        assert!((10.0 * p.log10()).abs() < 0.1, "{p}");
        // 1.5 fc lies above fs/2 here, so probe the band edge instead
        let stop_f = (1.5 * fc).min(0.49 * fs);
        let stop = filter_centered(&tone(stop_f, fs, n), &h);
        let mid = &stop[200..n - 200];
        let p: f64 = mid.iter().map(|v| v.norm_sqr()).sum::<f64>() / mid.len() as f64;
        assert!(10.0 * p.log10() < -40.0, "{}", 10.0 * p.log10());
        assert!(20.0 * centered_response(&h, stop_f, fs).abs().log10() < -40.0);
    }

    #[test]
    fn one_and_a_half_cutoff_is_suppressed() {
        let fs = 1.0;
        for fc in [0.1, 0.15, 0.2, 0.3] {
            let h = design_lowpass(fc, fs, 129).unwrap();
            let f = 1.5 * fc;
            let g = if f < 0.5 { f } else { f - 1.0 };
            let db = 20.0 * centered_response(&h, g, fs).abs().log10();
            assert!(db < -40.0, "fc {fc}: {db}");
        }
    }

    #[test]
    fn fractional_delay_shifts_band_limited_tone() {
        let h = design_fractional_delay(0.3, 65).unwrap();
        let f = 0.1;
        let x = tone(f, 1.0, 400);
        let y = filter_centered(&x, &h);
        for i in 100..300 {
            let want = Complex64::from_polar(1.0, 2.0 * PI * f * (i as f64 - 0.3));
            assert!((y[i] - want).norm() < 1e-3);
        }
        let r = centered_response_complex(&h, f, 1.0);
        assert!((r - Complex64::from_polar(1.0, -2.0 * PI * f * 0.3)).norm() < 1e-3);
        assert!(design_fractional_delay(1.0, 65).is_err());
        let zero = design_fractional_delay(0.0, 9).unwrap();
        assert!((zero[4] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn filter_alignment_matches_direct_convolution() {
        let x = noise(300, 1.0, 3);
        let h = design_lowpass(0.1, 1.0, 21).unwrap();
        let y = filter_centered(&x, &h);
        for i in [0usize, 5, 150, 299] {
            let mut acc = Complex64::new(0.0, 0.0);
            for (k, hk) in h.iter().enumerate() {
                let j = i as isize + 10 - k as isize;
                if (0..300).contains(&j) {
                    acc += x[j as usize] * hk;
                }
            }
            assert!((acc - y[i]).norm() < 1e-12);
        }
    }

    #[test]
    fn white_noise_band_limited_by_filter() {
        let fs = 1.0;
        let h = design_lowpass(0.2, fs, 129).unwrap();
        let y = filter_centered(&noise(1 << 17, 1.0, 9), &h);
        let psd = welch_psd(&y, fs, 1024).unwrap();
        let inband = psd.band_power(-0.1, 0.1) / 0.2;
        let oob = psd.band_power(0.3, 0.5) / 0.2;
        assert!(10.0 * (inband / oob).log10() > 40.0);
    }

    #[test]
    fn welch_white_noise_integrates_to_power() {
        let x = noise(1 << 16, 2.5, 11);
        let psd = welch_psd(&x, 10.0, 256).unwrap();
        assert!((psd.total_power() / 2.5 - 1.0).abs() < 0.02);
        let flat = 2.5 / 10.0;
        let mean_mid: f64 = psd.psd[64..192].iter().sum::<f64>() / 128.0;
        assert!((mean_mid / flat - 1.0).abs() < 0.05);
    }

    #[test]
    fn welch_tone_single_peak() {
        let fs = 1024.0;
        let x = tone(128.0, fs, 1 << 14);
        let psd = welch_psd(&x, fs, 512).unwrap();
        assert!((psd.total_power() - 1.0).abs() < 0.02);
        let (imax, _) = psd
            .psd
            .iter()
            .enumerate()
            .fold((0, 0.0), |m, (i, &p)| if p > m.1 { (i, p) } else { m });
        assert!((psd.freqs_hz[imax] - 128.0).abs() < 1e-9);
        assert!(psd.band_power(120.0, 136.0) > 0.99);
    }

    #[test]
    fn welch_rejects_short_blocks() {
        assert!(welch_psd(&noise(100, 1.0, 1), 1.0, 64).is_err());
    }

    #[test]
    fn zero_phase_filter_identity_and_gain() {
        let x = noise(1000, 1.0, 5);
        let y = apply_zero_phase(&x, 1.0, |_| 1.0);
        for (a, b) in x.iter().zip(&y) {
            assert!((a - b).norm() < 1e-12);
        }
        let t = tone(0.125, 1.0, 1024);
        let y = apply_zero_phase(&t, 1.0, |f| if f > 0.0 { 0.5 } else { 1.0 });
        for (a, b) in t.iter().zip(&y) {
            assert!((a * 0.5 - b).norm() < 1e-12);
        }
    }
}
