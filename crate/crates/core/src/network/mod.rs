//! Multi-cell downlink system simulation with long-term beamforming and
//! quantized receivers.
//!
//! Each drop places sites on a hexagonal grid, drops UEs per cell, draws
//! every BS-UE link (state, shadowed pathloss, clusters) and then runs the
//! schedulers for `n_ttis` TTIs. Inter-cell interference at a UE is the
//! expected power of the other sites' currently scheduled beams through the
//! UE's receive beam. Schedulers are blind to quantization, so every
//! resolution sees exactly the same schedules and interference and differs
//! only in the final SINR mapping.
//!
//! Drop `d` of master seed `s` uses `ChaCha8Rng::seed_from_u64(s)` on
//! stream `d`, so results do not depend on how drops are spread over threads.

pub mod channel;
pub mod layout;
pub mod scheduler;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use channel::{
    free_space_pathloss_db, generate_clusters, longterm_beams, mean_pathloss_db, pathloss_db,
    quadratic_gain, CMatrix, Cluster, ClusterParams, ClusterSet, LinkGeometry, LinkState,
    LongTermBeams, PathlossParams, PlanarArray,
};
pub use layout::{drop_ues, generate_layout, hex_sites, NetworkDrop};
pub use scheduler::{
    group_sinrs, schedule_ofdma_pf, schedule_sdma_greedy, SchedulerState, SdmaCandidates,
};

use crate::error::{Error, Result};
use crate::quantization::{alpha_of, Resolution};
use crate::sinr::sdma_unchecked;
use crate::units::{db_to_lin, dbm_to_mw, lin_to_db, THERMAL_NOISE_DBM_PER_HZ};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchedulerKind {
    OfdmaPf,
    SdmaGreedy,
}

/// Per-cell UE count law.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UeDrop {
    Poisson,
    Fixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NetworkConfig {
    pub area_m: [f64; 2],
    pub cell_radius_m: f64,
    pub min_ue_distance_m: f64,
    pub fc_hz: f64,
    pub bw_hz: f64,
    pub tx_power_dbm: f64,
    pub noise_figure_db: f64,
    pub max_se_bps_hz: f64,
    pub bs_array: PlanarArray,
    pub ue_array: PlanarArray,
    pub tti_s: f64,
    pub overhead: f64,
    pub shannon_loss_db: f64,
    pub mean_ues_per_cell: f64,
    pub ue_drop: UeDrop,
    pub n_adc_bits: Resolution,
    pub n_beams_max: usize,
    pub scheduler: SchedulerKind,
    pub n_ttis: usize,
    pub n_drops: usize,
    pub pf_epsilon_bits: f64,
    pub seed: u64,
    pub pathloss: PathlossParams,
    pub clusters: ClusterParams,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        Self {
            area_m: [1000.0, 1000.0],
            cell_radius_m: 100.0,
            min_ue_distance_m: 10.0,
            fc_hz: 28e9,
            bw_hz: 1e9,
            tx_power_dbm: 35.0,
            noise_figure_db: 8.0,
            max_se_bps_hz: 7.4063,
            bs_array: PlanarArray::new(8, 8),
            ue_array: PlanarArray::new(4, 4),
            tti_s: 125e-6,
            overhead: 0.2,
            shannon_loss_db: 3.0,
            mean_ues_per_cell: 10.0,
            ue_drop: UeDrop::Poisson,
            n_adc_bits: Resolution::Infinite,
            n_beams_max: 1,
            scheduler: SchedulerKind::OfdmaPf,
            n_ttis: 200,
            n_drops: 20,
            pf_epsilon_bits: 1.0,
            seed: 1,
            pathloss: PathlossParams::default(),
            clusters: ClusterParams::default(),
        }
    }
}

impl NetworkConfig {
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        let positive = [
            ("area_m[0]", self.area_m[0]),
            ("area_m[1]", self.area_m[1]),
            ("cell_radius_m", self.cell_radius_m),
            ("fc_hz", self.fc_hz),
            ("bw_hz", self.bw_hz),
            ("max_se_bps_hz", self.max_se_bps_hz),
            ("tti_s", self.tti_s),
            ("mean_ues_per_cell", self.mean_ues_per_cell),
            ("pf_epsilon_bits", self.pf_epsilon_bits),
        ];
        for (n, x) in positive {
            if !(x > 0.0) || !x.is_finite() {
                v.push(format!("network.{n} must be positive and finite"));
            }
        }
        for (n, x) in [
            ("min_ue_distance_m", self.min_ue_distance_m),
            ("noise_figure_db", self.noise_figure_db),
            ("shannon_loss_db", self.shannon_loss_db),
        ] {
            if !(x >= 0.0) {
                v.push(format!("network.{n} must be >= 0"));
            }
        }
        if !self.tx_power_dbm.is_finite() {
            v.push("network.tx_power_dbm must be finite".into());
        }
        if !(0.0..1.0).contains(&self.overhead) {
            v.push("network.overhead must be in [0, 1)".into());
        }
        if self.min_ue_distance_m >= 3f64.sqrt() / 2.0 * self.cell_radius_m {
            v.push("network.min_ue_distance_m must be below the hexagon inradius".into());
        }
        for (n, a) in [("bs_array", self.bs_array), ("ue_array", self.ue_array)] {
            if a.n_elements() == 0 {
                v.push(format!("network.{n} must have at least one element"));
            }
        }
        if let Err(e) = self.n_adc_bits.validate() {
            v.push(format!("network.n_adc_bits: {e}"));
        }
        if self.n_beams_max == 0 {
            v.push("network.n_beams_max must be >= 1".into());
        }
        if self.n_ttis == 0 {
            v.push("network.n_ttis must be >= 1".into());
        }
        if self.n_drops == 0 {
            v.push("network.n_drops must be >= 1".into());
        }
        v.extend(self.pathloss.violations());
        v.extend(self.clusters.violations());
        v
    }

    pub fn validate(&self) -> Result<()> {
        match self.violations().into_iter().next() {
            Some(m) => Err(Error::InvalidArgument(m)),
            None => Ok(()),
        }
    }

    fn noise_psd_mw(&self) -> f64 {
        dbm_to_mw(THERMAL_NOISE_DBM_PER_HZ + self.noise_figure_db)
    }

    fn tx_psd_mw(&self) -> f64 {
        dbm_to_mw(self.tx_power_dbm) / self.bw_hz
    }

    /// Spectral efficiency after the Shannon gap, capped.
    pub fn spectral_eff(&self, sinr: f64) -> f64 {
        (1.0 + sinr.max(0.0) / db_to_lin(self.shannon_loss_db))
            .log2()
            .min(self.max_se_bps_hz)
    }
}

/// `(1 - overhead) w min(max_se, log2(1 + sinr / gap))` in bit/s.
pub fn rate_from_sinr(sinr_linear: f64, w_hz: f64, cfg: &NetworkConfig) -> f64 {
    (1.0 - cfg.overhead) * w_hz * cfg.spectral_eff(sinr_linear)
}

/// RNG of drop `drop` under master seed `seed`.
pub fn drop_rng(seed: u64, drop: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(drop);
    rng
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UeResult {
    pub drop: usize,
    pub ue: usize,
    pub serving_bs: usize,
    /// Served by a site with a full ring of neighbours.
    pub interior: bool,
    pub n_bits: Resolution,
    /// Mean post-quantization SINR over the TTIs the UE was scheduled in;
    /// `None` if it never was.
    pub sinr_db: Option<f64>,
    pub rate_bps: f64,
    pub scheduled_fraction: f64,
}

/// One scheduled UE in one TTI.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TtiRecord {
    pub tti: usize,
    pub ue: usize,
    pub rx_gain: f64,
    pub psi: f64,
    pub share: f64,
    /// Beamformed SINR before quantization (no intra-cell interference).
    pub gamma: f64,
    /// Post-quantization SINR per requested resolution.
    pub sinr: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DropOutput {
    /// Results per requested resolution, UEs in index order.
    pub ues: Vec<Vec<UeResult>>,
    /// `beam_usage[k]`: interior-site TTIs that served `k` UEs at once.
    pub beam_usage: Vec<u64>,
    pub trace: Vec<TtiRecord>,
}

/// Geometry-derived gains of one drop for the associated UEs.
struct DropGains {
    ues: Vec<usize>,
    serving: Vec<usize>,
    rx_gain: Vec<f64>,
    /// Full-power signal PSD (mW/Hz) through both beams.
    signal: Vec<f64>,
    /// `(site, coefficient)`: transmit PSD times receive gain over pathloss.
    inter: Vec<Vec<(usize, f64)>>,
    /// `h[a][b]`: transmit gain of UE `b`'s beam on UE `a`'s channel from
    /// `b`'s site.
    h: Vec<Vec<f64>>,
    /// Associated UEs per site, as local indices.
    by_site: Vec<Vec<usize>>,
}

fn drop_gains(cfg: &NetworkConfig, d: &NetworkDrop) -> Result<DropGains> {
    let ues: Vec<usize> = (0..d.n_ue()).filter(|&u| d.association[u].is_some()).collect();
    let serving: Vec<usize> = ues.iter().map(|&u| d.association[u].unwrap()).collect();
    let n = ues.len();
    let mut v = Vec::with_capacity(n);
    let mut u_rx = Vec::with_capacity(n);
    let mut tx_gain = Vec::with_capacity(n);
    let mut rx_gain = Vec::with_capacity(n);
    for (a, &ue) in ues.iter().enumerate() {
        let set = &d.clusters[ue][serving[a]];
        let (vb, gt) = set.dominant_beam(&cfg.bs_array, true)?;
        let (ub, gr) = set.dominant_beam(&cfg.ue_array, false)?;
        v.push(vb);
        u_rx.push(ub);
        tx_gain.push(gt);
        rx_gain.push(gr.max(1.0));
    }
    let mut by_site = vec![Vec::new(); d.n_bs()];
    for (a, &b) in serving.iter().enumerate() {
        by_site[b].push(a);
    }
    // E|u^H H v|^2 = (u^H Q_rx u)(v^H Q_tx v) / N_ue with trace(Q) = N_ant
    let p_psd = cfg.tx_psd_mw() / cfg.ue_array.n_elements() as f64;
    let signal = (0..n)
        .map(|a| p_psd * tx_gain[a] * rx_gain[a] / db_to_lin(d.pathloss_db[ues[a]][serving[a]]))
        .collect();
    let mut inter = vec![Vec::new(); n];
    let mut h = vec![vec![0.0; n]; n];
    for a in 0..n {
        let ue = ues[a];
        for j in 0..d.n_bs() {
            let set = &d.clusters[ue][j];
            if set.clusters.is_empty() || by_site[j].is_empty() {
                continue;
            }
            let beams: Vec<&[Complex64]> = by_site[j].iter().map(|&b| v[b].as_slice()).collect();
            let g = set.gains(&cfg.bs_array, true, &beams);
            for (&b, gb) in by_site[j].iter().zip(g) {
                h[a][b] = gb;
            }
            if j != serving[a] {
                let grx = set.gain(&cfg.ue_array, false, &u_rx[a]);
                let c = p_psd * grx / db_to_lin(d.pathloss_db[ue][j]);
                if c > 0.0 {
                    inter[a].push((j, c));
                }
            }
        }
        h[a][a] = tx_gain[a];
    }
    Ok(DropGains {
        ues,
        serving,
        rx_gain,
        signal,
        inter,
        h,
        by_site,
    })
}

fn interference(g: &DropGains, a: usize, active: &[Vec<(usize, f64)>]) -> f64 {
    g.inter[a]
        .iter()
        .map(|&(j, c)| c * active[j].iter().map(|&(b, s)| s * g.h[a][b]).sum::<f64>())
        .sum()
}

/// Simulate drop `drop_index` of `cfg`, evaluating every resolution in
/// `resolutions` on the same schedules. `cfg.n_adc_bits` is ignored.
pub fn simulate_drop(
    cfg: &NetworkConfig,
    drop_index: usize,
    resolutions: &[Resolution],
    keep_trace: bool,
) -> Result<DropOutput> {
    cfg.validate()?;
    let alphas = resolutions
        .iter()
        .map(|r| alpha_of(*r))
        .collect::<Result<Vec<f64>>>()?;
    let mut rng = drop_rng(cfg.seed, drop_index as u64);
    let d = generate_layout(cfg, &mut rng)?;
    let g = drop_gains(cfg, &d)?;
    let n = g.ues.len();
    let n_res = resolutions.len();
    let noise = cfg.noise_psd_mw();
    let w_tot = cfg.bw_hz;
    let n_beams = match cfg.scheduler {
        SchedulerKind::OfdmaPf => 1,
        SchedulerKind::SdmaGreedy => cfg.n_beams_max,
    };
    let mut state = SchedulerState::new(n, cfg.pf_epsilon_bits);
    // first TTI assumes every site splits its power evenly over its UEs
    let uniform: Vec<Vec<(usize, f64)>> = g
        .by_site
        .iter()
        .map(|l| l.iter().map(|&b| (b, 1.0 / l.len() as f64)).collect())
        .collect();
    let mut i_est: Vec<f64> = (0..n).map(|a| interference(&g, a, &uniform)).collect();
    let mut sinr_sum = vec![vec![0.0; n]; n_res];
    let mut rate_sum = vec![vec![0.0; n]; n_res];
    let mut scheduled = vec![0usize; n];
    let mut beam_usage = vec![0u64; n_beams + 1];
    let mut trace = Vec::new();
    let se = |s: f64| cfg.spectral_eff(s);

    for tti in 0..cfg.n_ttis {
        let gamma_est: Vec<f64> = (0..n).map(|a| g.signal[a] / (noise + i_est[a])).collect();
        // (ue, share of band or power) per site
        let mut active: Vec<Vec<(usize, f64)>> = vec![Vec::new(); d.n_bs()];
        for (j, members) in g.by_site.iter().enumerate() {
            if members.is_empty() {
                continue;
            }
            match cfg.scheduler {
                SchedulerKind::OfdmaPf => {
                    let rho: Vec<f64> = members.iter().map(|&a| se(gamma_est[a])).collect();
                    let shares = schedule_ofdma_pf(&state, members, &rho, w_tot);
                    for (&a, w) in members.iter().zip(shares) {
                        if w > 0.0 {
                            active[j].push((a, w / w_tot));
                            state.record(a, rate_from_sinr(gamma_est[a], w, cfg) * cfg.tti_s);
                        }
                    }
                }
                SchedulerKind::SdmaGreedy => {
                    let gf: Vec<f64> = members.iter().map(|&a| gamma_est[a]).collect();
                    let rx: Vec<f64> = members.iter().map(|&a| g.rx_gain[a]).collect();
                    let cross: Vec<Vec<f64>> = members
                        .iter()
                        .map(|&a| members.iter().map(|&b| g.h[a][b]).collect())
                        .collect();
                    let cands = SdmaCandidates {
                        ues: members,
                        gamma_full: &gf,
                        cross: &cross,
                        rx_gain: &rx,
                    };
                    let group = schedule_sdma_greedy(&state, &cands, n_beams, se);
                    let modeled = group_sinrs(&cands, &group, 0.0);
                    let k = group.len() as f64;
                    for (&c, s) in group.iter().zip(modeled) {
                        let a = members[c];
                        active[j].push((a, 1.0 / k));
                        state.record(a, rate_from_sinr(s, w_tot, cfg) * cfg.tti_s);
                    }
                }
            }
            if d.interior[j] {
                beam_usage[active[j].len().min(n_beams)] += 1;
            }
        }
        state.tti_index += 1;

        let i_now: Vec<f64> = (0..n).map(|a| interference(&g, a, &active)).collect();
        for j_active in &active {
            let k = j_active.len() as f64;
            for &(a, share) in j_active {
                let (gamma, psi, w) = match cfg.scheduler {
                    SchedulerKind::OfdmaPf => {
                        (g.signal[a] / (noise + i_now[a]), 0.0, share * w_tot)
                    }
                    SchedulerKind::SdmaGreedy => {
                        let own = g.h[a][a];
                        let ici: f64 = j_active
                            .iter()
                            .filter(|&&(b, _)| b != a)
                            .map(|&(b, _)| g.h[a][b])
                            .sum();
                        let psi = if own > 0.0 { ici / own } else { 0.0 };
                        (g.signal[a] / k / (noise + i_now[a]), psi, w_tot)
                    }
                };
                scheduled[a] += 1;
                let mut per_res = Vec::with_capacity(n_res);
                for (r, &alpha) in alphas.iter().enumerate() {
                    let s = sdma_unchecked(gamma, g.rx_gain[a], psi, alpha);
                    sinr_sum[r][a] += s;
                    rate_sum[r][a] += rate_from_sinr(s, w, cfg);
                    per_res.push(s);
                }
                if keep_trace {
                    trace.push(TtiRecord {
                        tti,
                        ue: g.ues[a],
                        rx_gain: g.rx_gain[a],
                        psi,
                        share,
                        gamma,
                        sinr: per_res,
                    });
                }
            }
        }
        i_est = i_now;
    }

    let ttis = cfg.n_ttis as f64;
    let ues = resolutions
        .iter()
        .enumerate()
        .map(|(r, &res)| {
            (0..n)
                .map(|a| UeResult {
                    drop: drop_index,
                    ue: g.ues[a],
                    serving_bs: g.serving[a],
                    interior: d.interior[g.serving[a]],
                    n_bits: res,
                    sinr_db: (scheduled[a] > 0)
                        .then(|| lin_to_db(sinr_sum[r][a] / scheduled[a] as f64)),
                    rate_bps: rate_sum[r][a] / ttis,
                    scheduled_fraction: scheduled[a] as f64 / ttis,
                })
                .collect()
        })
        .collect();
    Ok(DropOutput {
        ues,
        beam_usage,
        trace,
    })
}

/// Per-UE results of one drop at `cfg.n_adc_bits`.
pub fn run_drop(cfg: &NetworkConfig, drop_index: usize) -> Result<Vec<UeResult>> {
    let mut out = simulate_drop(cfg, drop_index, &[cfg.n_adc_bits], false)?;
    Ok(out.ues.swap_remove(0))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NetworkResult {
    pub n_bits: Resolution,
    pub ues: Vec<UeResult>,
    pub beam_usage: Vec<u64>,
}

impl NetworkResult {
    /// Results of UEs served by interior sites.
    pub fn interior(&self) -> impl Iterator<Item = &UeResult> {
        self.ues.iter().filter(|u| u.interior)
    }

    pub fn interior_sinr_db(&self) -> Vec<f64> {
        self.interior().filter_map(|u| u.sinr_db).collect()
    }

    pub fn interior_rates(&self) -> Vec<f64> {
        self.interior().map(|u| u.rate_bps).collect()
    }

    /// Fraction of interior-site TTIs serving exactly `k` UEs.
    pub fn beam_fraction(&self, k: usize) -> f64 {
        let total: u64 = self.beam_usage.iter().sum();
        if total == 0 {
            0.0
        } else {
            self.beam_usage.get(k).copied().unwrap_or(0) as f64 / total as f64
        }
    }
}

/// All drops of `cfg` in parallel, one result per resolution.
pub fn run_network_multi(cfg: &NetworkConfig, resolutions: &[Resolution]) -> Result<Vec<NetworkResult>> {
    cfg.validate()?;
    let drops = (0..cfg.n_drops)
        .into_par_iter()
        .map(|i| simulate_drop(cfg, i, resolutions, false))
        .collect::<Result<Vec<_>>>()?;
    Ok(resolutions
        .iter()
        .enumerate()
        .map(|(r, &res)| {
            let mut usage = Vec::new();
            let mut ues = Vec::new();
            for d in &drops {
                ues.extend(d.ues[r].iter().cloned());
                if usage.len() < d.beam_usage.len() {
                    usage.resize(d.beam_usage.len(), 0);
                }
                for (k, c) in d.beam_usage.iter().enumerate() {
                    usage[k] += c;
                }
            }
            NetworkResult {
                n_bits: res,
                ues,
                beam_usage: usage,
            }
        })
        .collect())
}

pub fn run_network(cfg: &NetworkConfig) -> Result<NetworkResult> {
    Ok(run_network_multi(cfg, &[cfg.n_adc_bits])?.swap_remove(0))
}

/// Linear-interpolated percentile (`p` in [0, 100]) of unsorted data.
pub fn percentile(values: &[f64], p: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::InvalidInput("percentile of an empty sample".into()));
    }
    if !(0.0..=100.0).contains(&p) {
        return Err(Error::InvalidArgument(format!("percentile {p} outside [0, 100]")));
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let pos = p / 100.0 * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    Ok(v[lo] + (v[hi] - v[lo]) * (pos - lo as f64))
}

/// `(percentile, value)` pairs at 0, 1, ..., 100.
pub fn cdf_summary(values: &[f64]) -> Result<Vec<(f64, f64)>> {
    (0..=100)
        .map(|p| Ok((p as f64, percentile(values, p as f64)?)))
        .collect()
}
