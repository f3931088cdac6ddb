//! Uniform scalar quantization and the additive quantization noise model.
//!
//! A quantizer of resolution `n` bits is modelled as a midrise uniform
//! quantizer with `2^n` levels, saturating at the outermost levels. Its step
//! is chosen to minimise the mean-square error for a unit-variance Gaussian
//! input. The resulting normalised error power is the inverse coding gain
//! `alpha`, which parameterises the model
//!
//! ```text
//! Q(y) = (1 - alpha) y + v,   E|v|^2 = alpha (1 - alpha) E|y|^2
//! ```
//!
//! For the MSE-optimal step `E[y Q(y)] = E[Q(y)^2]`, so `v` is exactly
//! uncorrelated with `y` and the decomposition above holds without
//! approximation in second-order statistics.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{invalid_arg, Error, Result};

/// Largest supported finite resolution.
pub const MAX_BITS: u32 = 16;

/// Converter resolution: a finite number of bits, or an ideal converter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Resolution {
    Bits(u32),
    #[default]
    Infinite,
}

impl Resolution {
    pub fn is_infinite(self) -> bool {
        matches!(self, Resolution::Infinite)
    }

    pub fn bits(self) -> Option<u32> {
        match self {
            Resolution::Bits(n) => Some(n),
            Resolution::Infinite => None,
        }
    }

    pub fn validate(self) -> Result<Self> {
        match self {
            Resolution::Bits(n) if !(1..=MAX_BITS).contains(&n) => {
                invalid_arg(format!("resolution must be in 1..={MAX_BITS} bits, got {n}"))
            }
            r => Ok(r),
        }
    }

    /// One more bit (infinite stays infinite).
    pub fn finer(self) -> Self {
        match self {
            Resolution::Bits(n) if n < MAX_BITS => Resolution::Bits(n + 1),
            _ => Resolution::Infinite,
        }
    }
}

impl fmt::Display for Resolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Resolution::Bits(n) => write!(f, "{n}"),
            Resolution::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for Resolution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("inf") || t.eq_ignore_ascii_case("infinite") {
            return Ok(Resolution::Infinite);
        }
        let n: u32 = t
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("not a resolution: {s:?}")))?;
        Resolution::Bits(n).validate()
    }
}

impl Serialize for Resolution {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Resolution::Bits(n) => s.serialize_u32(*n),
            Resolution::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Resolution {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            // Range is checked by `validate`, so out-of-range values can be
            // reported together with every other config violation.
            Raw::Int(n) if n >= 0 && n <= u32::MAX as i64 => Ok(Resolution::Bits(n as u32)),
            Raw::Int(n) => Err(serde::de::Error::custom(format!("invalid resolution {n}"))),
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Resolution, step and inverse coding gain of a uniform scalar quantizer.
///
/// `step` is calibrated for a real input of unit variance; complex samples
/// with unit power are quantized per component with `step / sqrt(2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuantizerSpec {
    resolution: Resolution,
    step: f64,
    alpha: f64,
}

impl QuantizerSpec {
    /// MSE-optimal quantizer for a unit-variance Gaussian input.
    pub fn optimal(resolution: Resolution) -> Result<Self> {
        match resolution.validate()? {
            Resolution::Infinite => Ok(Self {
                resolution,
                step: 0.0,
                alpha: 0.0,
            }),
            Resolution::Bits(n) => {
                let (step, alpha) = optimal_point(n);
                Ok(Self {
                    resolution,
                    step,
                    alpha,
                })
            }
        }
    }

    /// Replaces the model parameter `alpha` while keeping the quantizer
    /// itself; used when an externally tabulated inverse coding gain is
    /// preferred for analytic predictions.
    pub fn with_alpha(mut self, alpha: f64) -> Result<Self> {
        match self.resolution {
            Resolution::Infinite if alpha != 0.0 => {
                invalid_arg("alpha must be 0 for infinite resolution")
            }
            Resolution::Bits(_) if !(alpha > 0.0 && alpha < 1.0) => {
                invalid_arg(format!("alpha must lie in (0, 1) for finite resolution, got {alpha}"))
            }
            _ => {
                self.alpha = alpha;
                Ok(self)
            }
        }
    }

    pub fn resolution(&self) -> Resolution {
        self.resolution
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Number of output levels per real component.
    pub fn levels(&self) -> Option<u64> {
        self.resolution.bits().map(|n| 1u64 << n)
    }
}

/// Complex baseband samples together with their sample rate.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSampleBlock {
    pub samples: Vec<Complex64>,
    pub sample_rate: f64,
}

impl ComplexSampleBlock {
    pub fn new(samples: Vec<Complex64>, sample_rate: f64) -> Result<Self> {
        let block = Self {
            samples,
            sample_rate,
        };
        block.check()?;
        Ok(block)
    }

    pub fn check(&self) -> Result<()> {
        if self.samples.is_empty() {
            return Err(Error::InvalidInput("sample block is empty".into()));
        }
        if !(self.sample_rate.is_finite() && self.sample_rate > 0.0) {
            return Err(Error::InvalidInput(format!(
                "sample rate must be positive, got {}",
                self.sample_rate
            )));
        }
        if let Some(i) = self.samples.iter().position(|s| !s.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite sample at index {i}")));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Mean of `|x|^2`.
    pub fn power(&self) -> f64 {
        mean_power(&self.samples)
    }
}

pub(crate) fn mean_power(x: &[Complex64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    x.iter().map(|s| s.norm_sqr()).sum::<f64>() / x.len() as f64
}

/// Step minimising `E[(y - Q(y))^2]` for `y ~ N(0, 1)`.
pub fn optimal_step(n_bits: u32) -> Result<f64> {
    Resolution::Bits(n_bits).validate()?;
    Ok(optimal_point(n_bits).0)
}

/// Inverse coding gain of the optimal uniform quantizer (0 for infinite).
pub fn alpha_of(resolution: Resolution) -> Result<f64> {
    match resolution.validate()? {
        Resolution::Infinite => Ok(0.0),
        Resolution::Bits(n) => Ok(optimal_point(n).1),
    }
}

/// Midrise quantization of a single real value with saturation.
///
/// Values exactly on a decision boundary go to the level above.
#[inline]
pub fn quantize_real(x: f64, step: f64, n_bits: u32) -> f64 {
    let half = (1i64 << (n_bits - 1)) as f64;
    let k = (x / step).floor().clamp(-half, half - 1.0);
    (k + 0.5) * step
}

/// Quantizes the real and imaginary parts independently.
///
/// The input is expected to have unit complex power (see
/// [`crate::ofdm::agc_normalize`]); the per-component step is the real-valued
/// step scaled by `1/sqrt(2)`.
pub fn quantize(block: &ComplexSampleBlock, spec: &QuantizerSpec) -> Result<ComplexSampleBlock> {
    block.check()?;
    Ok(ComplexSampleBlock {
        samples: quantize_samples(&block.samples, spec),
        sample_rate: block.sample_rate,
    })
}

pub(crate) fn quantize_samples(samples: &[Complex64], spec: &QuantizerSpec) -> Vec<Complex64> {
    match spec.resolution {
        Resolution::Infinite => samples.to_vec(),
        Resolution::Bits(n) => {
            let step = spec.step * std::f64::consts::FRAC_1_SQRT_2;
            samples
                .iter()
                .map(|s| {
                    Complex64::new(
                        quantize_real(s.re, step, n),
                        quantize_real(s.im, step, n),
                    )
                })
                .collect()
        }
    }
}

/// Empirical `1 - Re<out, in> / <in, in>`.
pub fn measure_alpha(input: &ComplexSampleBlock, output: &ComplexSampleBlock) -> Result<f64> {
    if input.len() != output.len() {
        return invalid_arg(format!(
            "length mismatch: input {} vs output {}",
            input.len(),
            output.len()
        ));
    }
    if input.len() < 1000 {
        return invalid_arg(format!("need at least 1000 samples, got {}", input.len()));
    }
    let mut cross = 0.0;
    let mut energy = 0.0;
    for (x, y) in input.samples.iter().zip(&output.samples) {
        cross += (y * x.conj()).re;
        energy += x.norm_sqr();
    }
    if energy == 0.0 {
        return Err(Error::DegenerateInput("input block has zero energy".into()));
    }
    Ok(1.0 - cross / energy)
}

// ---------------------------------------------------------------------------
// Optimal step search

fn optimal_point(n_bits: u32) -> (f64, f64) {
    static CACHE: [OnceLock<(f64, f64)>; MAX_BITS as usize] = [const { OnceLock::new() }; MAX_BITS as usize];
    *CACHE[(n_bits - 1) as usize].get_or_init(|| search_optimal_step(n_bits))
}

/// Golden-section search over `ln(step)`.
fn search_optimal_step(n_bits: u32) -> (f64, f64) {
    let f = |log_step: f64| gaussian_mse(log_step.exp(), n_bits);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (1e-7f64.ln(), 4f64.ln());
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > 1e-12 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let step = (0.5 * (a + b)).exp();
    (step, gaussian_mse(step, n_bits))
}

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

#[inline]
fn gauss_pdf(x: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * x * x).exp()
}

#[inline]
fn gauss_upper_tail(x: f64) -> f64 {
    0.5 * libm::erfc(x * std::f64::consts::FRAC_1_SQRT_2)
}

/// MSE of the midrise quantizer with the given step for `y ~ N(0, 1)`.
///
/// Granular cells are integrated with 8-point Gauss-Legendre (the integrand
/// is smooth inside a cell); the saturation cell uses the closed form of the
/// truncated Gaussian moments. The quantizer is odd-symmetric, so only the
/// positive half is integrated.
pub(crate) fn gaussian_mse(step: f64, n_bits: u32) -> f64 {
    let half = 1u64 << (n_bits - 1);
    let (nodes, weights) = gauss_legendre_8();
    let mut total = 0.0;
    for k in 0..half - 1 {
        let lo = k as f64 * step;
        let centre = lo + 0.5 * step;
        let mut cell = 0.0;
        for (t, w) in nodes.iter().zip(weights) {
            let y = centre + 0.5 * step * t;
            let e = y - centre;
            cell += w * e * e * gauss_pdf(y);
        }
        total += 0.5 * step * cell;
    }
    let b = (half - 1) as f64 * step;
    let c = b + 0.5 * step;
    total += (1.0 + c * c) * gauss_upper_tail(b) - (b + step) * gauss_pdf(b);
    2.0 * total
}

fn gauss_legendre_8() -> &'static ([f64; 8], [f64; 8]) {
    static RULE: OnceLock<([f64; 8], [f64; 8])> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = 8usize;
        let mut nodes = [0.0; 8];
        let mut weights = [0.0; 8];
        for i in 0..n {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            nodes[i] = x;
            weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
        (nodes, weights)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    /// Composite Simpson over [-12, 12]; independent of the cell-wise rule.
    fn simpson_mse(step: f64, n_bits: u32) -> f64 {
        let m = 200_000;
        let (a, b) = (-12.0, 12.0);
        let h = (b - a) / m as f64;
        let g = |y: f64| {
            let e = y - quantize_real(y, step, n_bits);
            e * e * gauss_pdf(y)
        };
        let mut s = g(a) + g(b);
        for i in 1..m {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * g(a + i as f64 * h);
        }
        s * h / 3.0
    }

    fn gaussian_block(n: usize, seed: u64) -> ComplexSampleBlock {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let samples = (0..n)
            .map(|_| {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                Complex64::new(s * re, s * im)
            })
            .collect();
        ComplexSampleBlock::new(samples, 1.0).unwrap()
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre_8();
        let s: f64 = w.iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
        let m14: f64 = x.iter().zip(w).map(|(x, w)| w * x.powi(14)).sum();
        assert!((m14 - 2.0 / 15.0).abs() < 1e-14);
    }

    #[test]
    fn one_bit_closed_form() {
        let step = optimal_step(1).unwrap();
        // outputs are +-sqrt(2/pi)
        assert!((0.5 * step - (2.0 / std::f64::consts::PI).sqrt()).abs() < 1e-6);
        assert!((step - 1.596).abs() < 1e-3);
        let a = alpha_of(Resolution::Bits(1)).unwrap();
        assert!((a - (1.0 - 2.0 / std::f64::consts::PI)).abs() < 1e-9);
    }

    #[test]
    fn mse_matches_simpson() {
        for n in 1..=6 {
            for step in [0.05, 0.2, 0.5, 1.1] {
                let a = gaussian_mse(step, n);
                let b = simpson_mse(step, n);
                assert!((a - b).abs() < 1e-9 * b.max(1e-3), "n={n} step={step}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn four_bit_step_matches_grid_search() {
        let best = (1..=10_000)
            .map(|i| {
                let step = 4.0 * i as f64 / 10_000.0;
                gaussian_mse_grid_oracle(step, 4)
            })
            .fold(f64::INFINITY, f64::min);
        let a = alpha_of(Resolution::Bits(4)).unwrap();
        assert!((a - best).abs() / best < 1e-4, "{a} vs {best}");
    }

    // Trapezoid on a fine grid: a third quadrature, kept cheap for the grid scan.
    fn gaussian_mse_grid_oracle(step: f64, n_bits: u32) -> f64 {
        let m = 4000;
        let h = 20.0 / m as f64;
        (0..=m)
            .map(|i| {
                let y = -10.0 + i as f64 * h;
                let e = y - quantize_real(y, step, n_bits);
                let w = if i == 0 || i == m { 0.5 } else { 1.0 };
                w * e * e * gauss_pdf(y)
            })
            .sum::<f64>()
            * h
    }

    #[test]
    fn alpha_values_and_limits() {
        assert_eq!(alpha_of(Resolution::Infinite).unwrap(), 0.0);
        let a16 = alpha_of(Resolution::Bits(16)).unwrap();
        assert!(a16 < 1e-6 && a16 > 0.0);
        let a3 = alpha_of(Resolution::Bits(3)).unwrap();
        let a4 = alpha_of(Resolution::Bits(4)).unwrap();
        assert!(a3 > a4 && a4 > 0.0);
        // optimal uniform 4-bit quantizer of a Gaussian
        assert!((a4 - 0.011_543).abs() < 2e-6);
        assert!((optimal_step(4).unwrap() - 0.3352).abs() < 1e-3);
    }

    #[test]
    fn alpha_strictly_decreasing() {
        let alphas: Vec<f64> = (1..=10)
            .map(|n| alpha_of(Resolution::Bits(n)).unwrap())
            .collect();
        assert!(alphas.windows(2).all(|w| w[1] < w[0]), "{alphas:?}");
    }

    #[test]
    fn out_of_range_bits() {
        assert!(matches!(optimal_step(0), Err(Error::InvalidArgument(_))));
        assert!(matches!(optimal_step(17), Err(Error::InvalidArgument(_))));
        assert!(alpha_of(Resolution::Bits(0)).is_err());
    }

    #[test]
    fn infinite_is_identity() {
        let block = gaussian_block(64, 1);
        let spec = QuantizerSpec::optimal(Resolution::Infinite).unwrap();
        assert_eq!(quantize(&block, &spec).unwrap(), block);
    }

    #[test]
    fn zero_maps_to_positive_level() {
        for n in 1..=8 {
            let spec = QuantizerSpec::optimal(Resolution::Bits(n)).unwrap();
            let block = ComplexSampleBlock::new(vec![Complex64::new(0.0, 0.0)], 1.0).unwrap();
            let q = quantize(&block, &spec).unwrap().samples[0];
            let h = 0.5 * spec.step() * std::f64::consts::FRAC_1_SQRT_2;
            assert_eq!(q, Complex64::new(h, h));
        }
    }

    #[test]
    fn boundary_rounds_up_and_saturates() {
        assert_eq!(quantize_real(1.0, 1.0, 3), 1.5);
        assert_eq!(quantize_real(-1.0, 1.0, 3), -0.5);
        assert_eq!(quantize_real(100.0, 1.0, 3), 3.5);
        assert_eq!(quantize_real(-100.0, 1.0, 3), -3.5);
    }

    #[test]
    fn non_finite_rejected() {
        let spec = QuantizerSpec::optimal(Resolution::Bits(3)).unwrap();
        let block = ComplexSampleBlock {
            samples: vec![Complex64::new(f64::NAN, 0.0)],
            sample_rate: 1.0,
        };
        assert!(matches!(quantize(&block, &spec), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn empirical_alpha_four_bits() {
        let block = gaussian_block(1_000_000, 7);
        let spec = QuantizerSpec::optimal(Resolution::Bits(4)).unwrap();
        let q = quantize(&block, &spec).unwrap();
        let err: f64 = block
            .samples
            .iter()
            .zip(&q.samples)
            .map(|(x, y)| (x - y).norm_sqr())
            .sum::<f64>()
            / block.samples.iter().map(|x| x.norm_sqr()).sum::<f64>();
        assert!((err / spec.alpha() - 1.0).abs() < 0.05, "{err} vs {}", spec.alpha());
    }

    #[test]
    fn measure_alpha_examples() {
        let block = gaussian_block(2000, 3);
        assert!(measure_alpha(&block, &block).unwrap().abs() < 1e-15);
        let scaled = ComplexSampleBlock {
            samples: block.samples.iter().map(|x| x * 0.75).collect(),
            sample_rate: 1.0,
        };
        assert!((measure_alpha(&block, &scaled).unwrap() - 0.25).abs() < 1e-12);
        let short = gaussian_block(10, 3);
        assert!(matches!(measure_alpha(&block, &short), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn measure_alpha_three_bits() {
        let block = gaussian_block(200_000, 11);
        let spec = QuantizerSpec::optimal(Resolution::Bits(3)).unwrap();
        let q = quantize(&block, &spec).unwrap();
        let a = measure_alpha(&block, &q).unwrap();
        assert!((a / spec.alpha() - 1.0).abs() < 0.05);
    }

    #[test]
    fn aqnm_noise_energy_and_correlation() {
        let block = gaussian_block(1_000_000, 5);
        let e_y: f64 = block.samples.iter().map(|x| x.norm_sqr()).sum();
        for n in 2..=6 {
            let spec = QuantizerSpec::optimal(Resolution::Bits(n)).unwrap();
            let q = quantize(&block, &spec).unwrap();
            let a = spec.alpha();
            let v: Vec<Complex64> = q
                .samples
                .iter()
                .zip(&block.samples)
                .map(|(qy, y)| qy - y * (1.0 - a))
                .collect();
            let e_v: f64 = v.iter().map(|x| x.norm_sqr()).sum();
            let cross: Complex64 = v.iter().zip(&block.samples).map(|(v, y)| v * y.conj()).sum();
            let corr = cross.norm() / (e_v * e_y).sqrt();
            assert!(corr < 0.02, "n={n} corr={corr}");
            assert!((e_v / (a * (1.0 - a) * e_y) - 1.0).abs() < 0.05, "n={n}");
        }
    }

    #[test]
    fn with_alpha_override() {
        let spec = QuantizerSpec::optimal(Resolution::Bits(4)).unwrap();
        assert_eq!(spec.with_alpha(0.0095).unwrap().alpha(), 0.0095);
        assert!(spec.with_alpha(0.0).is_err());
        let inf = QuantizerSpec::optimal(Resolution::Infinite).unwrap();
        assert!(inf.with_alpha(0.1).is_err());
    }

    #[test]
    fn resolution_parsing() {
        assert_eq!("inf".parse::<Resolution>().unwrap(), Resolution::Infinite);
        assert_eq!("4".parse::<Resolution>().unwrap(), Resolution::Bits(4));
        assert!("0".parse::<Resolution>().is_err());
        assert!("x".parse::<Resolution>().is_err());
    }

    proptest::proptest! {
        #[test]
        fn quantize_is_idempotent(re in -6.0f64..6.0, im in -6.0f64..6.0, n in 1u32..=8) {
            let spec = QuantizerSpec::optimal(Resolution::Bits(n)).unwrap();
            let block = ComplexSampleBlock::new(vec![Complex64::new(re, im)], 1.0).unwrap();
            let once = quantize(&block, &spec).unwrap();
            let twice = quantize(&once, &spec).unwrap();
            proptest::prop_assert_eq!(once, twice);
        }
    }
}
