//! Proportional-fair OFDMA and greedy SDMA scheduling.

use serde::Serialize;

use crate::sinr::sdma_unchecked;

/// Cumulative scheduled data per UE (the PF denominator).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SchedulerState {
    pub served_bits: Vec<f64>,
    pub tti_index: u64,
}

impl SchedulerState {
    /// Every UE starts with `epsilon` served bits.
    pub fn new(n_ue: usize, epsilon: f64) -> Self {
        Self {
            served_bits: vec![epsilon; n_ue],
            tti_index: 0,
        }
    }

    pub fn pf_weight(&self, ue: usize, spectral_eff: f64) -> f64 {
        spectral_eff / self.served_bits[ue]
    }

    /// Add scheduled bits; negative amounts are ignored.
    pub fn record(&mut self, ue: usize, bits: f64) {
        if bits > 0.0 {
            self.served_bits[ue] += bits;
        }
    }
}

/// PF bandwidth split among `ues` with spectral efficiencies `spectral_effs`:
/// shares proportional to `rho / served`, summing to `w_tot`. When every
/// weight is zero the band is split equally.
pub fn schedule_ofdma_pf(
    state: &SchedulerState,
    ues: &[usize],
    spectral_effs: &[f64],
    w_tot: f64,
) -> Vec<f64> {
    assert_eq!(ues.len(), spectral_effs.len());
    if ues.is_empty() {
        return Vec::new();
    }
    let w: Vec<f64> = ues
        .iter()
        .zip(spectral_effs)
        .map(|(&u, &r)| state.pf_weight(u, r.max(0.0)))
        .collect();
    let total: f64 = w.iter().sum();
    let mut shares: Vec<f64> = if total > 0.0 {
        w.iter().map(|x| x / total * w_tot).collect()
    } else {
        vec![w_tot / ues.len() as f64; ues.len()]
    };
    // put the rounding residue on the largest share so the sum is exact
    let residue = w_tot - shares.iter().sum::<f64>();
    if let Some(i) = (0..shares.len()).max_by(|&a, &b| shares[a].total_cmp(&shares[b])) {
        shares[i] += residue;
    }
    shares
}

/// Per-candidate inputs to the SDMA group model at one BS.
pub struct SdmaCandidates<'a> {
    pub ues: &'a [usize],
    /// Per-stream SNR at full power `P`, before the `1/K` split.
    pub gamma_full: &'a [f64],
    /// `cross[a][b]`: transmit gain of beam `b` on candidate `a`'s channel.
    pub cross: &'a [Vec<f64>],
    pub rx_gain: &'a [f64],
}

/// Modeled per-member SINR of a group with equal power split.
pub fn group_sinrs(c: &SdmaCandidates, group: &[usize], alpha: f64) -> Vec<f64> {
    let k = group.len() as f64;
    group
        .iter()
        .map(|&a| {
            let own = c.cross[a][a];
            let psi = if own > 0.0 {
                group
                    .iter()
                    .filter(|&&b| b != a)
                    .map(|&b| c.cross[a][b])
                    .sum::<f64>()
                    / own
            } else {
                0.0
            };
            sdma_unchecked(c.gamma_full[a] / k, c.rx_gain[a].max(1.0), psi, alpha)
        })
        .collect()
}

/// Greedy SDMA group over candidate indices: start from the largest PF
/// weight, then repeatedly add the candidate giving the largest modeled sum
/// rate while it strictly increases and the group is below `n_beams_max`.
/// `spectral_eff` maps SINR to bps/Hz; the model assumes no quantization.
pub fn schedule_sdma_greedy(
    state: &SchedulerState,
    c: &SdmaCandidates,
    n_beams_max: usize,
    spectral_eff: impl Fn(f64) -> f64,
) -> Vec<usize> {
    let n = c.ues.len();
    if n == 0 || n_beams_max == 0 {
        return Vec::new();
    }
    let sum_rate = |g: &[usize]| -> f64 { group_sinrs(c, g, 0.0).into_iter().map(&spectral_eff).sum() };
    let first = (0..n)
        .max_by(|&a, &b| {
            let wa = state.pf_weight(c.ues[a], spectral_eff(c.gamma_full[a]));
            let wb = state.pf_weight(c.ues[b], spectral_eff(c.gamma_full[b]));
            wa.total_cmp(&wb).then(b.cmp(&a))
        })
        .expect("non-empty candidate list");
    let mut group = vec![first];
    let mut current = sum_rate(&group);
    while group.len() < n_beams_max {
        let mut best: Option<(usize, f64)> = None;
        for cand in (0..n).filter(|i| !group.contains(i)) {
            let mut g = group.clone();
            g.push(cand);
            let r = sum_rate(&g);
            if best.is_none_or(|(_, br)| r > br) {
                best = Some((cand, r));
            }
        }
        match best {
            Some((cand, r)) if r > current => {
                group.push(cand);
                current = r;
            }
            _ => break,
        }
    }
    group
}

#[cfg(test)]
mod tests {
    use super::*;

    fn se(s: f64) -> f64 {
        (1.0 + s / 2.0).log2().min(7.4063)
    }

    #[test]
    fn single_ue_gets_full_band() {
        let st = SchedulerState::new(1, 1.0);
        assert_eq!(schedule_ofdma_pf(&st, &[0], &[3.0], 1e9), vec![1e9]);
        assert!(schedule_ofdma_pf(&st, &[], &[], 1e9).is_empty());
    }

    #[test]
    fn symmetric_split() {
        let st = SchedulerState::new(2, 1.0);
        let s = schedule_ofdma_pf(&st, &[0, 1], &[2.0, 2.0], 1e9);
        assert_eq!(s, vec![5e8, 5e8]);
    }

    #[test]
    fn shares_sum_exactly() {
        let mut st = SchedulerState::new(7, 1.0);
        for (i, b) in [3.0, 1e6, 17.0, 4e4, 9.0, 1.0, 2.5].iter().enumerate() {
            st.record(i, *b);
        }
        let ues: Vec<usize> = (0..7).collect();
        let s = schedule_ofdma_pf(&st, &ues, &[0.3, 7.0, 1.1, 2.2, 0.01, 5.0, 3.3], 1e9);
        assert_eq!(s.iter().sum::<f64>(), 1e9);
        assert!(s.iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn long_run_pf_fairness() {
        // equal spectral efficiency, PF drives time-average shares together
        let n = 5;
        let mut st = SchedulerState::new(n, 1.0);
        let ues: Vec<usize> = (0..n).collect();
        let rho = vec![4.0; n];
        let mut acc = vec![0.0; n];
        let ttis = 10_000;
        for _ in 0..ttis {
            let s = schedule_ofdma_pf(&st, &ues, &rho, 1.0);
            for i in 0..n {
                acc[i] += s[i];
                st.record(i, s[i] * rho[i]);
            }
            st.tti_index += 1;
        }
        for a in acc {
            let share = a / ttis as f64;
            assert!((share - 0.2).abs() < 0.2 * 0.02);
        }
    }

    #[test]
    fn one_beam_is_pf_choice() {
        let mut st = SchedulerState::new(3, 1.0);
        st.record(0, 100.0);
        let cross = vec![vec![1.0, 0.5, 0.5], vec![0.5, 1.0, 0.5], vec![0.5, 0.5, 1.0]];
        let c = SdmaCandidates {
            ues: &[0, 1, 2],
            gamma_full: &[100.0, 10.0, 50.0],
            cross: &cross,
            rx_gain: &[4.0; 3],
        };
        // weights: se(100)/101, se(10)/1, se(50)/1 -> candidate 2
        assert_eq!(schedule_sdma_greedy(&st, &c, 1, se), vec![2]);
    }

    #[test]
    fn orthogonal_users_both_admitted() {
        let st = SchedulerState::new(2, 1.0);
        let cross = vec![vec![64.0, 1e-9], vec![1e-9, 64.0]];
        let c = SdmaCandidates {
            ues: &[0, 1],
            gamma_full: &[20.0, 20.0],
            cross: &cross,
            rx_gain: &[16.0; 2],
        };
        let g = schedule_sdma_greedy(&st, &c, 4, se);
        assert_eq!(g.len(), 2);
    }

    #[test]
    fn colocated_users_not_admitted() {
        let st = SchedulerState::new(2, 1.0);
        let cross = vec![vec![64.0, 64.0], vec![64.0, 64.0]];
        let c = SdmaCandidates {
            ues: &[0, 1],
            gamma_full: &[100.0, 100.0],
            cross: &cross,
            rx_gain: &[16.0; 2],
        };
        assert_eq!(schedule_sdma_greedy(&st, &c, 4, se).len(), 1);
    }

    #[test]
    fn admissions_increase_sum_rate() {
        let st = SchedulerState::new(4, 1.0);
        let cross = vec![
            vec![50.0, 2.0, 9.0, 0.5],
            vec![1.0, 40.0, 3.0, 6.0],
            vec![8.0, 2.0, 30.0, 1.0],
            vec![0.2, 7.0, 1.0, 60.0],
        ];
        let c = SdmaCandidates {
            ues: &[0, 1, 2, 3],
            gamma_full: &[300.0, 80.0, 20.0, 500.0],
            cross: &cross,
            rx_gain: &[10.0; 4],
        };
        let g = schedule_sdma_greedy(&st, &c, 4, se);
        let mut prev = f64::MIN;
        for k in 1..=g.len() {
            let r: f64 = group_sinrs(&c, &g[..k], 0.0).into_iter().map(se).sum();
            assert!(r > prev);
            prev = r;
        }
    }
}
