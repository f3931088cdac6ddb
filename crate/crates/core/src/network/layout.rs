//! Hexagonal site grid, UE drops, link states and association.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::Serialize;

use super::channel::{
    generate_clusters, pathloss_db, ClusterSet, CMatrix, LinkGeometry, LinkState,
};
use super::{NetworkConfig, UeDrop};
use crate::error::{Error, Result};

/// One random realization of sites, UEs and all BS-UE links.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NetworkDrop {
    pub bs_positions: Vec<[f64; 2]>,
    /// Sites whose six neighbours all exist.
    pub interior: Vec<bool>,
    pub ue_positions: Vec<[f64; 2]>,
    /// Cell each UE was dropped in.
    pub home_cell: Vec<usize>,
    /// Strongest BS, `None` when every link is in outage.
    pub association: Vec<Option<usize>>,
    pub link_state: Vec<Vec<LinkState>>,
    pub pathloss_db: Vec<Vec<f64>>,
    /// Clusters per (ue, bs); empty for outage links.
    pub clusters: Vec<Vec<ClusterSet>>,
}

impl NetworkDrop {
    pub fn n_bs(&self) -> usize {
        self.bs_positions.len()
    }

    pub fn n_ue(&self) -> usize {
        self.ue_positions.len()
    }

    /// Transmit covariance of the (ue, bs) link, `None` in outage.
    pub fn cov_tx(&self, cfg: &NetworkConfig, ue: usize, bs: usize) -> Option<CMatrix> {
        let c = &self.clusters[ue][bs];
        (!c.clusters.is_empty()).then(|| c.cov_tx(&cfg.bs_array))
    }

    pub fn cov_rx(&self, cfg: &NetworkConfig, ue: usize, bs: usize) -> Option<CMatrix> {
        let c = &self.clusters[ue][bs];
        (!c.clusters.is_empty()).then(|| c.cov_rx(&cfg.ue_array))
    }
}

/// Pointy-top hexagonal grid: rows `1.5 R` apart, sites `sqrt(3) R` apart,
/// odd rows shifted by half a site; every site inside the area is kept.
pub fn hex_sites(area_m: [f64; 2], radius_m: f64) -> Vec<[f64; 2]> {
    let dx = 3f64.sqrt() * radius_m;
    let dy = 1.5 * radius_m;
    let mut sites = Vec::new();
    let mut row = 0usize;
    loop {
        let y = radius_m / 2.0 + row as f64 * dy;
        if y > area_m[1] {
            break;
        }
        let x0 = if row.is_multiple_of(2) { dx / 2.0 } else { dx };
        let mut x = x0;
        while x <= area_m[0] {
            sites.push([x, y]);
            x += dx;
        }
        row += 1;
    }
    sites
}

fn interior_flags(sites: &[[f64; 2]], radius_m: f64) -> Vec<bool> {
    let reach = 3f64.sqrt() * radius_m * 1.01;
    sites
        .iter()
        .map(|a| {
            sites
                .iter()
                .filter(|b| {
                    let d = dist(*a, **b);
                    d > 0.0 && d <= reach
                })
                .count()
                == 6
        })
        .collect()
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

fn in_hexagon(dx: f64, dy: f64, radius_m: f64) -> bool {
    let (x, y) = (dx.abs(), dy.abs());
    x <= 3f64.sqrt() / 2.0 * radius_m && y <= radius_m - x / 3f64.sqrt()
}

fn drop_in_cell<R: Rng + ?Sized>(
    site: [f64; 2],
    cfg: &NetworkConfig,
    rng: &mut R,
) -> [f64; 2] {
    let r = cfg.cell_radius_m;
    loop {
        let dx = rng.random_range(-r..r);
        let dy = rng.random_range(-r..r);
        let p = [site[0] + dx, site[1] + dy];
        let inside_area = (0.0..=cfg.area_m[0]).contains(&p[0]) && (0.0..=cfg.area_m[1]).contains(&p[1]);
        if in_hexagon(dx, dy, r) && dx.hypot(dy) >= cfg.min_ue_distance_m && inside_area {
            return p;
        }
    }
}

/// Per-cell UE counts (Poisson or fixed) placed uniformly in each hexagon.
pub fn drop_ues<R: Rng + ?Sized>(
    cfg: &NetworkConfig,
    sites: &[[f64; 2]],
    rng: &mut R,
) -> Result<(Vec<[f64; 2]>, Vec<usize>)> {
    let poisson = match cfg.ue_drop {
        UeDrop::Poisson => Some(
            Poisson::new(cfg.mean_ues_per_cell)
                .map_err(|e| Error::InvalidArgument(e.to_string()))?,
        ),
        UeDrop::Fixed => None,
    };
    let mut positions = Vec::new();
    let mut home = Vec::new();
    for (b, &site) in sites.iter().enumerate() {
        let n = match &poisson {
            Some(p) => p.sample(rng) as usize,
            None => cfg.mean_ues_per_cell.round() as usize,
        };
        for _ in 0..n {
            positions.push(drop_in_cell(site, cfg, rng));
            home.push(b);
        }
    }
    Ok((positions, home))
}

/// Draw sites, UEs, link states, shadowed pathloss and clusters for every
/// BS-UE pair, then associate each UE with its lowest-pathloss BS.
pub fn generate_layout<R: Rng + ?Sized>(cfg: &NetworkConfig, rng: &mut R) -> Result<NetworkDrop> {
    cfg.validate()?;
    let bs_positions = hex_sites(cfg.area_m, cfg.cell_radius_m);
    if bs_positions.is_empty() {
        return Err(Error::InvalidArgument("area holds no cell sites".into()));
    }
    let interior = interior_flags(&bs_positions, cfg.cell_radius_m);
    let (ue_positions, home_cell) = drop_ues(cfg, &bs_positions, rng)?;
    let mut link_state = Vec::with_capacity(ue_positions.len());
    let mut pl = Vec::with_capacity(ue_positions.len());
    let mut clusters = Vec::with_capacity(ue_positions.len());
    for &ue in &ue_positions {
        let mut states = Vec::with_capacity(bs_positions.len());
        let mut losses = Vec::with_capacity(bs_positions.len());
        let mut sets = Vec::with_capacity(bs_positions.len());
        for &bs in &bs_positions {
            let d = dist(ue, bs).max(1.0);
            let s = cfg.pathloss.draw_state(d, rng);
            losses.push(pathloss_db(d, s, &cfg.pathloss, cfg.fc_hz, rng)?);
            let set = if s == LinkState::Outage {
                ClusterSet { clusters: Vec::new() }
            } else {
                let az = (ue[1] - bs[1]).atan2(ue[0] - bs[0]);
                generate_clusters(LinkGeometry { bs_to_ue_az: wrap(az) }, &cfg.clusters, rng)
            };
            states.push(s);
            sets.push(set);
        }
        link_state.push(states);
        pl.push(losses);
        clusters.push(sets);
    }
    let association = pl
        .iter()
        .map(|row| {
            row.iter()
                .enumerate()
                .filter(|(_, l)| l.is_finite())
                .min_by(|a, b| a.1.total_cmp(b.1))
                .map(|(b, _)| b)
        })
        .collect();
    Ok(NetworkDrop {
        bs_positions,
        interior,
        ue_positions,
        home_cell,
        association,
        link_state,
        pathloss_db: pl,
        clusters,
    })
}

fn wrap(a: f64) -> f64 {
    (a + PI).rem_euclid(2.0 * PI) - PI
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::drop_rng;

    #[test]
    fn site_count_in_expected_range() {
        let s = hex_sites([1000.0, 1000.0], 100.0);
        assert!((30..=45).contains(&s.len()), "{}", s.len());
        let interior = interior_flags(&s, 100.0);
        let n_int = interior.iter().filter(|&&x| x).count();
        assert!(n_int >= 10 && n_int < s.len());
    }

    #[test]
    fn hexagon_membership() {
        assert!(in_hexagon(0.0, 99.0, 100.0));
        assert!(!in_hexagon(0.0, 101.0, 100.0));
        assert!(in_hexagon(86.0, 0.0, 100.0));
        assert!(!in_hexagon(87.0, 0.0, 100.0));
        assert!(!in_hexagon(80.0, 60.0, 100.0));
    }

    #[test]
    fn layout_is_deterministic() {
        let cfg = NetworkConfig::default();
        let a = generate_layout(&cfg, &mut drop_rng(7, 0)).unwrap();
        let b = generate_layout(&cfg, &mut drop_rng(7, 0)).unwrap();
        assert_eq!(a, b);
        let c = generate_layout(&cfg, &mut drop_rng(7, 1)).unwrap();
        assert_ne!(a.ue_positions, c.ue_positions);
    }

    #[test]
    fn drop_invariants() {
        let cfg = NetworkConfig::default();
        let d = generate_layout(&cfg, &mut drop_rng(3, 0)).unwrap();
        for (u, p) in d.ue_positions.iter().enumerate() {
            let home = d.bs_positions[d.home_cell[u]];
            assert!(dist(*p, home) >= cfg.min_ue_distance_m);
            for b in 0..d.n_bs() {
                let fs = super::super::channel::free_space_pathloss_db(
                    dist(*p, d.bs_positions[b]).max(1.0),
                    cfg.fc_hz,
                );
                assert!(d.pathloss_db[u][b] >= fs - 1e-9);
                assert_eq!(
                    d.link_state[u][b] == LinkState::Outage,
                    d.pathloss_db[u][b].is_infinite()
                );
            }
            if let Some(b) = d.association[u] {
                let best = d.pathloss_db[u].iter().copied().fold(f64::INFINITY, f64::min);
                assert_eq!(d.pathloss_db[u][b], best);
            }
        }
        let q = d.cov_tx(&cfg, 0, d.association[0].unwrap()).unwrap();
        let tr: f64 = q.diagonal().iter().map(|x| x.re).sum();
        assert!((tr - 64.0).abs() < 1e-9);
    }

    #[test]
    fn mean_ues_per_cell() {
        let cfg = NetworkConfig::default();
        let sites = hex_sites(cfg.area_m, cfg.cell_radius_m);
        let mut rng = drop_rng(11, 0);
        let total: usize = (0..1000)
            .map(|_| drop_ues(&cfg, &sites, &mut rng).unwrap().0.len())
            .sum();
        let mean = total as f64 / (1000 * sites.len()) as f64;
        assert!((mean - 10.0).abs() < 0.2, "{mean}");
    }

    #[test]
    fn fixed_drop_mode() {
        let cfg = NetworkConfig {
            ue_drop: UeDrop::Fixed,
            ..NetworkConfig::default()
        };
        let d = generate_layout(&cfg, &mut drop_rng(1, 0)).unwrap();
        assert_eq!(d.n_ue(), 10 * d.n_bs());
    }
}
