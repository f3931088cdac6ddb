//! Distance-dependent pathloss with LOS/NLOS/outage states, clustered
//! spatial covariances and long-term eigen-beams.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{invalid_arg, Error, Result};
use crate::units::SPEED_OF_LIGHT;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LinkState {
    Los,
    Nlos,
    Outage,
}

/// `PL = a + 10 b log10(d) + N(0, sigma^2)` per state, and the state
/// probabilities `p_out = max(0, 1 - exp(-d/out_decay + out_offset))`,
/// `p_los = (1 - p_out) exp(-d/los_decay)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PathlossParams {
    pub los_a: f64,
    pub los_b: f64,
    pub los_sigma_db: f64,
    pub nlos_a: f64,
    pub nlos_b: f64,
    pub nlos_sigma_db: f64,
    pub los_decay_m: f64,
    pub outage_decay_m: f64,
    pub outage_offset: f64,
}

impl Default for PathlossParams {
    fn default() -> Self {
        Self {
            los_a: 61.4,
            los_b: 2.0,
            los_sigma_db: 5.8,
            nlos_a: 72.0,
            nlos_b: 2.92,
            nlos_sigma_db: 8.7,
            los_decay_m: 67.1,
            outage_decay_m: 30.0,
            outage_offset: 5.2,
        }
    }
}

impl PathlossParams {
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        for (n, x) in [
            ("los_sigma_db", self.los_sigma_db),
            ("nlos_sigma_db", self.nlos_sigma_db),
        ] {
            if !(x >= 0.0) {
                v.push(format!("pathloss.{n} must be >= 0"));
            }
        }
        for (n, x) in [
            ("los_decay_m", self.los_decay_m),
            ("outage_decay_m", self.outage_decay_m),
        ] {
            if !(x > 0.0) {
                v.push(format!("pathloss.{n} must be positive"));
            }
        }
        v
    }

    pub fn outage_probability(&self, d_m: f64) -> f64 {
        (1.0 - (-d_m / self.outage_decay_m + self.outage_offset).exp()).max(0.0)
    }

    pub fn los_probability(&self, d_m: f64) -> f64 {
        (1.0 - self.outage_probability(d_m)) * (-d_m / self.los_decay_m).exp()
    }

    pub fn draw_state<R: Rng + ?Sized>(&self, d_m: f64, rng: &mut R) -> LinkState {
        let u: f64 = rng.random();
        let p_out = self.outage_probability(d_m);
        let p_los = self.los_probability(d_m);
        if u < p_out {
            LinkState::Outage
        } else if u < p_out + p_los {
            LinkState::Los
        } else {
            LinkState::Nlos
        }
    }

    fn coeffs(&self, state: LinkState) -> Option<(f64, f64, f64)> {
        match state {
            LinkState::Los => Some((self.los_a, self.los_b, self.los_sigma_db)),
            LinkState::Nlos => Some((self.nlos_a, self.nlos_b, self.nlos_sigma_db)),
            LinkState::Outage => None,
        }
    }
}

pub fn free_space_pathloss_db(d_m: f64, fc_hz: f64) -> f64 {
    20.0 * (4.0 * PI * d_m * fc_hz / SPEED_OF_LIGHT).log10()
}

/// Pathloss without shadowing; infinite in outage.
pub fn mean_pathloss_db(d_m: f64, state: LinkState, params: &PathlossParams) -> Result<f64> {
    if !(d_m > 0.0) {
        return invalid_arg(format!("distance must be positive, got {d_m}"));
    }
    Ok(match params.coeffs(state) {
        Some((a, b, _)) => a + 10.0 * b * d_m.log10(),
        None => f64::INFINITY,
    })
}

/// Pathloss with log-normal shadowing, never below free space at `fc_hz`.
pub fn pathloss_db<R: Rng + ?Sized>(
    d_m: f64,
    state: LinkState,
    params: &PathlossParams,
    fc_hz: f64,
    rng: &mut R,
) -> Result<f64> {
    let mean = mean_pathloss_db(d_m, state, params)?;
    let Some((_, _, sigma)) = params.coeffs(state) else {
        return Ok(f64::INFINITY);
    };
    let shadow = if sigma > 0.0 {
        Normal::new(0.0, sigma)
            .map_err(|e| Error::InvalidArgument(e.to_string()))?
            .sample(rng)
    } else {
        0.0
    };
    Ok((mean + shadow).max(free_space_pathloss_db(d_m, fc_hz)))
}

/// Uniform planar array with half-wavelength spacing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanarArray {
    pub rows: usize,
    pub cols: usize,
}

impl PlanarArray {
    pub fn new(rows: usize, cols: usize) -> Self {
        Self { rows, cols }
    }

    pub fn n_elements(&self) -> usize {
        self.rows * self.cols
    }

    /// Unit-modulus response toward azimuth `az` and elevation `el`
    /// (radians); its squared norm is the element count.
    pub fn steering(&self, az: f64, el: f64) -> Vec<Complex64> {
        let pv = PI * el.sin();
        let ph = PI * el.cos() * az.sin();
        let row: Vec<Complex64> = (0..self.cols)
            .map(|n| Complex64::from_polar(1.0, n as f64 * ph))
            .collect();
        let mut a = Vec::with_capacity(self.n_elements());
        for m in 0..self.rows {
            let r = Complex64::from_polar(1.0, m as f64 * pv);
            a.extend(row.iter().map(|x| r * x));
        }
        a
    }
}

/// One propagation cluster seen from both link ends.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cluster {
    pub power: f64,
    pub tx_az: f64,
    pub tx_el: f64,
    pub rx_az: f64,
    pub rx_el: f64,
    /// Subpath offsets `[tx_az, tx_el, rx_az, rx_el]` from the centre,
    /// sharing the cluster power equally. Empty means a single ray.
    pub rays: Vec<[f64; 4]>,
}

impl Cluster {
    fn ray_angles(&self) -> Vec<[f64; 4]> {
        let c = [self.tx_az, self.tx_el, self.rx_az, self.rx_el];
        if self.rays.is_empty() {
            return vec![c];
        }
        self.rays
            .iter()
            .map(|o| [c[0] + o[0], c[1] + o[1], c[2] + o[2], c[3] + o[3]])
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClusterParams {
    /// Mean of the Poisson count added to one mandatory cluster.
    pub mean_extra_clusters: f64,
    /// Cluster powers `U^(r - 1) 10^(-Z/10)`, `Z ~ N(0, zeta^2)`.
    pub power_r: f64,
    pub power_zeta_db: f64,
    /// Spread of the cluster centre elevations.
    pub bs_elevation_sigma_deg: f64,
    pub ue_elevation_sigma_deg: f64,
    /// Rays per cluster; 1 gives a rank-one cluster.
    pub subpaths: usize,
    /// RMS intra-cluster angular spreads.
    pub bs_az_spread_deg: f64,
    pub bs_el_spread_deg: f64,
    pub ue_az_spread_deg: f64,
    pub ue_el_spread_deg: f64,
}

impl Default for ClusterParams {
    fn default() -> Self {
        Self {
            mean_extra_clusters: 2.0,
            power_r: 2.8,
            power_zeta_db: 4.0,
            bs_elevation_sigma_deg: 5.0,
            ue_elevation_sigma_deg: 10.0,
            subpaths: 20,
            bs_az_spread_deg: 10.2,
            bs_el_spread_deg: 0.0,
            ue_az_spread_deg: 15.5,
            ue_el_spread_deg: 6.0,
        }
    }
}

impl ClusterParams {
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if !(self.mean_extra_clusters >= 0.0) {
            v.push("clusters.mean_extra_clusters must be >= 0".into());
        }
        if !(self.power_r >= 1.0) {
            v.push("clusters.power_r must be >= 1".into());
        }
        for (n, x) in [
            ("power_zeta_db", self.power_zeta_db),
            ("bs_elevation_sigma_deg", self.bs_elevation_sigma_deg),
            ("ue_elevation_sigma_deg", self.ue_elevation_sigma_deg),
            ("bs_az_spread_deg", self.bs_az_spread_deg),
            ("bs_el_spread_deg", self.bs_el_spread_deg),
            ("ue_az_spread_deg", self.ue_az_spread_deg),
            ("ue_el_spread_deg", self.ue_el_spread_deg),
        ] {
            if !(x >= 0.0) {
                v.push(format!("clusters.{n} must be >= 0"));
            }
        }
        if self.subpaths == 0 {
            v.push("clusters.subpaths must be >= 1".into());
        }
        v
    }
}

/// Clusters of one BS-UE link; powers sum to one.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterSet {
    pub clusters: Vec<Cluster>,
}

/// Direction of the UE seen from the BS (azimuth, radians).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkGeometry {
    pub bs_to_ue_az: f64,
}

fn normal_or_zero<R: Rng + ?Sized>(sigma: f64, rng: &mut R) -> f64 {
    if sigma > 0.0 {
        Normal::new(0.0, sigma).map(|d| d.sample(rng)).unwrap_or(0.0)
    } else {
        0.0
    }
}

/// Draw the clusters of one link. The strongest cluster points along the
/// geometric direction; the others arrive from uniform azimuths. Each
/// cluster is a bundle of equal-power rays with Gaussian angular offsets.
pub fn generate_clusters<R: Rng + ?Sized>(
    geometry: LinkGeometry,
    params: &ClusterParams,
    rng: &mut R,
) -> ClusterSet {
    let extra = if params.mean_extra_clusters > 0.0 {
        Poisson::new(params.mean_extra_clusters)
            .map(|d| d.sample(rng) as usize)
            .unwrap_or(0)
    } else {
        0
    };
    let n = 1 + extra;
    let mut powers: Vec<f64> = (0..n)
        .map(|_| {
            let u: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
            let z = normal_or_zero(params.power_zeta_db, rng);
            u.powf(params.power_r - 1.0) * 10f64.powf(-z / 10.0)
        })
        .collect();
    let total: f64 = powers.iter().sum();
    powers.iter_mut().for_each(|p| *p /= total);
    powers.sort_by(|a, b| b.total_cmp(a));
    let bs_el = params.bs_elevation_sigma_deg.to_radians();
    let ue_el = params.ue_elevation_sigma_deg.to_radians();
    let spread = [
        params.bs_az_spread_deg,
        params.bs_el_spread_deg,
        params.ue_az_spread_deg,
        params.ue_el_spread_deg,
    ]
    .map(f64::to_radians);
    let clusters = powers
        .into_iter()
        .enumerate()
        .map(|(c, power)| {
            let (tx_az, rx_az) = if c == 0 {
                (geometry.bs_to_ue_az, geometry.bs_to_ue_az + PI)
            } else {
                (rng.random_range(-PI..PI), rng.random_range(-PI..PI))
            };
            let tx_el = normal_or_zero(bs_el, rng);
            let rx_el = normal_or_zero(ue_el, rng);
            let rays = if params.subpaths > 1 {
                (0..params.subpaths)
                    .map(|_| spread.map(|s| normal_or_zero(s, rng)))
                    .collect()
            } else {
                Vec::new()
            };
            Cluster {
                power,
                tx_az,
                tx_el,
                rx_az,
                rx_el,
                rays,
            }
        })
        .collect();
    ClusterSet { clusters }
}

pub type CMatrix = DMatrix<Complex64>;

impl ClusterSet {
    fn steering_set(&self, array: &PlanarArray, tx: bool) -> Vec<(f64, Vec<Complex64>)> {
        let mut set = Vec::new();
        for c in &self.clusters {
            let rays = c.ray_angles();
            let p = c.power / rays.len() as f64;
            for r in rays {
                let a = if tx {
                    array.steering(r[0], r[1])
                } else {
                    array.steering(r[2], r[3])
                };
                set.push((p, a));
            }
        }
        set
    }

    fn covariance(&self, array: &PlanarArray, tx: bool) -> CMatrix {
        let n = array.n_elements();
        let mut q = CMatrix::zeros(n, n);
        for (p, a) in self.steering_set(array, tx) {
            let v = DVector::from_vec(a);
            q += (&v * v.adjoint()) * Complex64::new(p, 0.0);
        }
        q
    }

    /// `sum_c p_c a_c a_c^H` at the BS; trace equals the element count.
    pub fn cov_tx(&self, array: &PlanarArray) -> CMatrix {
        self.covariance(array, true)
    }

    pub fn cov_rx(&self, array: &PlanarArray) -> CMatrix {
        self.covariance(array, false)
    }

    /// `w^H Q w` without forming `Q`.
    pub fn gain(&self, array: &PlanarArray, tx: bool, w: &[Complex64]) -> f64 {
        self.gains(array, tx, &[w])[0]
    }

    /// `w^H Q w` for several beams, sharing the steering vectors.
    pub fn gains(&self, array: &PlanarArray, tx: bool, beams: &[&[Complex64]]) -> Vec<f64> {
        let set = self.steering_set(array, tx);
        beams
            .iter()
            .map(|w| set.iter().map(|(p, a)| p * dot_conj(a, w).norm_sqr()).sum())
            .collect()
    }

    /// Dominant eigenvector of the covariance and its eigenvalue. Uses power
    /// iteration from the strongest ray and falls back to the full
    /// eigensolver when the eigengap is too small to converge.
    pub fn dominant_beam(&self, array: &PlanarArray, tx: bool) -> Result<(Vec<Complex64>, f64)> {
        let set = self.steering_set(array, tx);
        if set.is_empty() {
            return Err(Error::DegenerateInput("link has no clusters".into()));
        }
        let n = array.n_elements();
        let b = CMatrix::from_fn(n, set.len(), |i, j| set[j].1[i] * set[j].0.sqrt());
        let q = &b * b.adjoint();
        let start = set
            .iter()
            .max_by(|x, y| x.0.total_cmp(&y.0))
            .map(|(_, a)| DVector::from_column_slice(a))
            .expect("non-empty ray set");
        let (x, lambda) = match power_iteration(&q, start) {
            Some(r) => r,
            None => top_eigenpair(&q)?,
        };
        Ok((normalize_phase(x.iter().copied().collect()), lambda))
    }
}

/// Power iteration until the eigen-residual is below `1e-11` of the
/// eigenvalue; `None` if that does not happen within the iteration budget.
fn power_iteration(q: &CMatrix, mut x: DVector<Complex64>) -> Option<(DVector<Complex64>, f64)> {
    let norm = x.norm();
    if !(norm > 0.0) {
        return None;
    }
    x /= Complex64::new(norm, 0.0);
    for _ in 0..2000 {
        let y = q * &x;
        let lambda = x.dotc(&y).re;
        if !(lambda > 0.0) {
            return None;
        }
        let resid = (&y - &x * Complex64::new(lambda, 0.0)).norm();
        let ny = y.norm();
        x = y / Complex64::new(ny, 0.0);
        if resid <= 1e-11 * lambda {
            let lambda = x.dotc(&(q * &x)).re;
            return Some((x, lambda));
        }
    }
    None
}

fn dot_conj(a: &[Complex64], w: &[Complex64]) -> Complex64 {
    a.iter().zip(w).map(|(x, y)| x.conj() * y).sum()
}

/// Rotate so the first non-negligible entry is real and positive.
fn normalize_phase(mut v: Vec<Complex64>) -> Vec<Complex64> {
    let scale = v.iter().map(|x| x.norm()).fold(0.0, f64::max);
    if let Some(first) = v.iter().find(|x| x.norm() > 1e-9 * scale).copied() {
        let r = first.conj() / first.norm();
        v.iter_mut().for_each(|x| *x *= r);
    }
    v
}

/// Largest eigenvalue and a unit eigenvector of a Hermitian matrix. Ties
/// go to the eigenvector whose first significant entry has the lowest index.
fn top_eigenpair(q: &CMatrix) -> Result<(DVector<Complex64>, f64)> {
    let eig = q.clone().symmetric_eigen();
    let lmax = eig.eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(lmax > 0.0) {
        return Err(Error::DegenerateInput("covariance has no positive eigenvalue".into()));
    }
    let tol = 1e-9 * lmax;
    let lead = |k: usize| {
        let col = eig.eigenvectors.column(k);
        let scale = col.iter().map(|x| x.norm()).fold(0.0, f64::max);
        col.iter().position(|x| x.norm() > 1e-6 * scale).unwrap_or(usize::MAX)
    };
    let best = (0..eig.eigenvalues.len())
        .filter(|&k| eig.eigenvalues[k] >= lmax - tol)
        .min_by_key(|&k| lead(k))
        .expect("at least one eigenvalue attains the maximum");
    Ok((eig.eigenvectors.column(best).into_owned(), eig.eigenvalues[best]))
}

/// Long-term beams and the gains they achieve on their own covariances.
#[derive(Debug, Clone, PartialEq)]
pub struct LongTermBeams {
    pub v: Vec<Complex64>,
    pub u: Vec<Complex64>,
    pub tx_gain: f64,
    pub rx_gain: f64,
}

/// Unit-norm dominant eigenvectors of the transmit and receive covariances.
pub fn longterm_beams(cov_tx: &CMatrix, cov_rx: &CMatrix) -> Result<LongTermBeams> {
    for (name, q) in [("transmit", cov_tx), ("receive", cov_rx)] {
        if !q.is_square() || q.nrows() == 0 {
            return invalid_arg(format!("{name} covariance must be square and non-empty"));
        }
        if q.iter().all(|x| x.norm() == 0.0) {
            return Err(Error::DegenerateInput(format!("{name} covariance is zero")));
        }
    }
    let (v, tx_gain) = top_eigenpair(cov_tx)?;
    let (u, rx_gain) = top_eigenpair(cov_rx)?;
    Ok(LongTermBeams {
        v: normalize_phase(v.iter().copied().collect()),
        u: normalize_phase(u.iter().copied().collect()),
        tx_gain,
        rx_gain,
    })
}

/// `w^H Q w` for an explicit matrix.
pub fn quadratic_gain(q: &CMatrix, w: &[Complex64]) -> f64 {
    let x = DVector::from_column_slice(w);
    (x.adjoint() * q * &x)[(0, 0)].re
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn pathloss_examples() {
        let p = PathlossParams::default();
        let nlos = mean_pathloss_db(100.0, LinkState::Nlos, &p).unwrap();
        let los = mean_pathloss_db(100.0, LinkState::Los, &p).unwrap();
        assert!((nlos - 130.4).abs() < 1e-9);
        assert!((los - 101.4).abs() < 1e-9);
        assert!(mean_pathloss_db(100.0, LinkState::Outage, &p).unwrap().is_infinite());
        assert!(mean_pathloss_db(0.0, LinkState::Los, &p).is_err());
        for s in [LinkState::Los, LinkState::Nlos] {
            for d in [10.0, 50.0, 200.0] {
                assert!(
                    mean_pathloss_db(2.0 * d, s, &p).unwrap() > mean_pathloss_db(d, s, &p).unwrap()
                );
            }
        }
    }

    #[test]
    fn shadowed_pathloss_respects_free_space() {
        let p = PathlossParams::default();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..2000 {
            let d = rng.random_range(1.0..500.0);
            let pl = pathloss_db(d, LinkState::Los, &p, 28e9, &mut rng).unwrap();
            assert!(pl >= free_space_pathloss_db(d, 28e9) - 1e-12);
        }
        // mean of shadowed NLOS loss far from the clamp equals the formula
        let n = 20_000;
        let m: f64 = (0..n)
            .map(|_| pathloss_db(200.0, LinkState::Nlos, &p, 28e9, &mut rng).unwrap())
            .sum::<f64>()
            / n as f64;
        assert!((m - mean_pathloss_db(200.0, LinkState::Nlos, &p).unwrap()).abs() < 0.2);
    }

    #[test]
    fn state_probabilities() {
        let p = PathlossParams::default();
        assert_eq!(p.outage_probability(50.0), 0.0);
        assert!(p.outage_probability(300.0) > 0.9);
        let d = 80.0;
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let n = 100_000;
        let los = (0..n)
            .filter(|_| p.draw_state(d, &mut rng) == LinkState::Los)
            .count() as f64
            / n as f64;
        assert!((los - p.los_probability(d)).abs() < 0.01);
    }

    #[test]
    fn steering_is_unit_modulus() {
        let a = PlanarArray::new(8, 8).steering(0.3, -0.1);
        assert_eq!(a.len(), 64);
        assert!(a.iter().all(|x| (x.norm() - 1.0).abs() < 1e-12));
    }

    fn check_hermitian_psd(q: &CMatrix, n: f64) {
        let tr: Complex64 = q.diagonal().iter().sum();
        assert!((tr.re - n).abs() < 1e-9 && tr.im.abs() < 1e-9);
        assert!((q - q.adjoint()).norm() < 1e-10);
        let eig = q.clone().symmetric_eigen();
        assert!(eig.eigenvalues.iter().all(|&l| l > -1e-10));
    }

    #[test]
    fn covariances_are_hermitian_psd_with_trace_n() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let bs = PlanarArray::new(8, 8);
        let ue = PlanarArray::new(4, 4);
        for _ in 0..20 {
            let set = generate_clusters(
                LinkGeometry {
                    bs_to_ue_az: rng.random_range(-PI..PI),
                },
                &ClusterParams::default(),
                &mut rng,
            );
            check_hermitian_psd(&set.cov_tx(&bs), 64.0);
            check_hermitian_psd(&set.cov_rx(&ue), 16.0);
        }
    }

    #[test]
    fn single_cluster_gives_full_array_gain() {
        let set = ClusterSet {
            clusters: vec![Cluster {
                power: 1.0,
                tx_az: 0.4,
                tx_el: 0.1,
                rx_az: -1.0,
                rx_el: 0.0,
                rays: Vec::new(),
            }],
        };
        let bs = PlanarArray::new(8, 8);
        let q = set.cov_tx(&bs);
        let eig = q.clone().symmetric_eigen();
        let mut ev: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        ev.sort_by(|a, b| b.total_cmp(a));
        assert!((ev[0] - 64.0).abs() < 1e-9);
        assert!(ev[1].abs() < 1e-9);
        let beams = longterm_beams(&q, &set.cov_rx(&PlanarArray::new(4, 4))).unwrap();
        assert!((beams.tx_gain - 64.0).abs() < 1e-9);
        assert!((10.0 * beams.tx_gain.log10() - 18.06).abs() < 0.01);
        let a = bs.steering(0.4, 0.1);
        let align = dot_conj(&a, &beams.v).norm() / 8.0;
        assert!((align - 1.0).abs() < 1e-9);
    }

    #[test]
    fn identity_covariance_tie_break() {
        let q = CMatrix::identity(4, 4);
        let b = longterm_beams(&q, &q).unwrap();
        assert!((b.rx_gain - 1.0).abs() < 1e-12);
        assert!((b.u[0] - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        assert!(b.u[1..].iter().all(|x| x.norm() < 1e-12));
    }

    #[test]
    fn zero_covariance_is_degenerate() {
        let z = CMatrix::zeros(3, 3);
        let i = CMatrix::identity(3, 3);
        assert!(matches!(longterm_beams(&z, &i), Err(Error::DegenerateInput(_))));
    }

    #[test]
    fn gram_route_matches_full_eigensolver() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let bs = PlanarArray::new(8, 8);
        let ue = PlanarArray::new(4, 4);
        for _ in 0..20 {
            let set = generate_clusters(
                LinkGeometry {
                    bs_to_ue_az: rng.random_range(-PI..PI),
                },
                &ClusterParams::default(),
                &mut rng,
            );
            let full = longterm_beams(&set.cov_tx(&bs), &set.cov_rx(&ue)).unwrap();
            let (v, gt) = set.dominant_beam(&bs, true).unwrap();
            let (u, gr) = set.dominant_beam(&ue, false).unwrap();
            assert!((gt - full.tx_gain).abs() < 1e-9 * gt);
            assert!((gr - full.rx_gain).abs() < 1e-9 * gr);
            // gain of the beam on its own covariance equals the top eigenvalue
            assert!((quadratic_gain(&set.cov_tx(&bs), &v) - full.tx_gain).abs() < 1e-9 * gt);
            assert!((set.gain(&ue, false, &u) - full.rx_gain).abs() < 1e-9 * gr);
            assert!((set.gain(&bs, true, &full.v) - gt).abs() < 1e-9 * gt);
        }
    }

    #[test]
    fn random_psd_gain_is_top_eigenvalue() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 6;
        let a = CMatrix::from_fn(n, n, |_, _| {
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        let q = &a * a.adjoint();
        let b = longterm_beams(&q, &q).unwrap();
        let eig = q.clone().symmetric_eigen();
        let lmax = eig.eigenvalues.iter().copied().fold(f64::MIN, f64::max);
        assert!((quadratic_gain(&q, &b.u) - lmax).abs() < 1e-9 * lmax);
        let norm: f64 = b.u.iter().map(|x| x.norm_sqr()).sum();
        assert!((norm - 1.0).abs() < 1e-12);
    }
}
