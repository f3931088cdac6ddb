//! Closed-form SINR under the additive quantization noise model.
//!
//! All quantities are linear. `gamma_prime` is the per-stream beamformed SNR
//! `rho^2 G E / (sigma_n^2 + sigma_z^2)`, `bf_gain` the receive beamforming
//! gain `G`, and `psi` the intra-cell interference ratio
//! `sum_{j != k} gamma'_j = psi * gamma'_k`.

use serde::Serialize;

use crate::error::{invalid_arg, Error, Result};

/// Finite stand-in for an unbounded per-stream SNR.
pub const GAMMA_CAP: f64 = 1e12;

/// Link parameters entering the SDMA SINR expression.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinkQuality {
    pub gamma_prime: f64,
    pub bf_gain: f64,
    pub psi: f64,
}

impl LinkQuality {
    pub fn new(gamma_prime: f64, bf_gain: f64, psi: f64) -> Result<Self> {
        let q = Self {
            gamma_prime,
            bf_gain,
            psi,
        };
        q.validate()?;
        Ok(q)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma_prime >= 0.0) {
            return invalid_arg(format!("gamma_prime must be >= 0, got {}", self.gamma_prime));
        }
        if !(self.bf_gain >= 1.0) || !self.bf_gain.is_finite() {
            return invalid_arg(format!("bf_gain must be >= 1, got {}", self.bf_gain));
        }
        if !(self.psi >= 0.0) || !self.psi.is_finite() {
            return invalid_arg(format!("psi must be >= 0, got {}", self.psi));
        }
        Ok(())
    }

    fn capped_gamma(&self) -> f64 {
        self.gamma_prime.min(GAMMA_CAP)
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&alpha) {
        return invalid_arg(format!("alpha must lie in [0, 1], got {alpha}"));
    }
    Ok(())
}

/// `gamma'_k / (1 + sum_{j != k} gamma'_j)`.
pub fn sinr_beamformed(gammas: &[f64], k: usize) -> Result<f64> {
    if gammas.is_empty() {
        return invalid_arg("no streams");
    }
    if k >= gammas.len() {
        return invalid_arg(format!("stream index {k} out of range ({})", gammas.len()));
    }
    if let Some(g) = gammas.iter().find(|g| !(**g >= 0.0)) {
        return invalid_arg(format!("stream SNR must be >= 0, got {g}"));
    }
    let interference: f64 = gammas
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != k)
        .map(|(_, g)| g.min(GAMMA_CAP))
        .sum();
    Ok(gammas[k].min(GAMMA_CAP) / (1.0 + interference))
}

/// Post-quantization SINR of an orthogonal (TDMA/OFDMA) link.
pub fn sinr_orthogonal_quantized(gamma_bf: f64, alpha: f64, bf_gain: f64) -> Result<f64> {
    check_alpha(alpha)?;
    LinkQuality::new(gamma_bf, bf_gain, 0.0)?;
    let g = gamma_bf.min(GAMMA_CAP);
    Ok((1.0 - alpha) * g / (1.0 + alpha / bf_gain * g))
}

/// High-SNR ceiling `G (1 - alpha) / alpha` of the orthogonal link.
pub fn sinr_saturation(alpha: f64, bf_gain: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if alpha == 0.0 {
        return Err(Error::UnboundedResult(
            "saturation SINR is unbounded for alpha = 0".into(),
        ));
    }
    LinkQuality::new(0.0, bf_gain, 0.0)?;
    Ok(bf_gain * (1.0 - alpha) / alpha)
}

/// SDMA SINR with intra-cell interference and a common receive gain.
pub fn sinr_sdma_quantized(q: &LinkQuality, alpha: f64) -> Result<f64> {
    q.validate()?;
    check_alpha(alpha)?;
    Ok(sdma_unchecked(q.capped_gamma(), q.bf_gain, q.psi, alpha))
}

#[inline]
pub(crate) fn sdma_unchecked(gamma: f64, bf_gain: f64, psi: f64, alpha: f64) -> f64 {
    (1.0 - alpha) * gamma
        / (1.0 + (1.0 - alpha) * psi * gamma + (psi + 1.0) * alpha / bf_gain * gamma)
}

/// General form with a per-stream receive gain `G_j`.
///
/// `gammas[j]` and `gains[j]` describe every stream seen by user `k`; with all
/// gains equal this coincides with [`sinr_sdma_quantized`].
pub fn sinr_quantized_general(gammas: &[f64], gains: &[f64], k: usize, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if gammas.len() != gains.len() {
        return invalid_arg("gammas and gains differ in length");
    }
    sinr_beamformed(gammas, k)?;
    if let Some(g) = gains.iter().find(|g| !(**g >= 1.0)) {
        return invalid_arg(format!("bf_gain must be >= 1, got {g}"));
    }
    let gk = gammas[k].min(GAMMA_CAP);
    let mut ici = 0.0;
    let mut quant = gk / gains[k];
    for (j, (g, gain)) in gammas.iter().zip(gains).enumerate() {
        if j != k {
            ici += g.min(GAMMA_CAP);
            quant += g.min(GAMMA_CAP) / gain;
        }
    }
    Ok((1.0 - alpha) * gk / (1.0 + (1.0 - alpha) * ici + alpha * quant))
}

/// The factor `beta` in `gamma^{Q,BF} = (1 - alpha beta) gamma^{BF}`.
pub fn sdma_beta(q: &LinkQuality, alpha: f64) -> Result<f64> {
    q.validate()?;
    check_alpha(alpha)?;
    let g = q.capped_gamma();
    let num = 1.0 + (q.psi + 1.0) * g / q.bf_gain;
    let den = 1.0 + (1.0 - alpha) * q.psi * g + alpha * (q.psi + 1.0) * g / q.bf_gain;
    Ok(num / den)
}

/// `alpha (1 - alpha)` times the total power at the quantizer input.
pub fn quantization_noise_variance(
    signal_energies: &[f64],
    noise_var: f64,
    icv: f64,
    alpha: f64,
) -> Result<f64> {
    check_alpha(alpha)?;
    if noise_var < 0.0 || icv < 0.0 || signal_energies.iter().any(|e| !(*e >= 0.0)) {
        return invalid_arg("powers must be nonnegative");
    }
    let total: f64 = signal_energies.iter().sum::<f64>() + noise_var + icv;
    Ok(alpha * (1.0 - alpha) * total)
}
