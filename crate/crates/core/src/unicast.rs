//! Unicast links under partial co-channel interference and the network
//! load fixed point.
//!
//! A co-channel site transmits on the probed resource with probability
//! `x` (the network load). Collisions are drawn as `u_l < x` from stored
//! uniforms, so every quantity here is a monotone function of `x` for a
//! fixed seed.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{cell_radius, sample_in_cell, HexLayout, Point};
use crate::propagation::LinkBudget;
use crate::rng::{substream, SampleRng, Stream};
use crate::scenario::{Bundle, EfficiencyProfile, Numerics, Scenario};
use crate::sfn::{spectral_efficiency, SinrDistribution};

/// `(i, j)` shift parameters of the supported reuse patterns,
/// `K = i² + ij + j²`.
fn reuse_shift(k: u32) -> Result<(i32, i32)> {
    match k {
        1 => Ok((1, 0)),
        3 => Ok((1, 1)),
        4 => Ok((2, 0)),
        7 => Ok((2, 1)),
        other => Err(Error::UnsupportedReuse(other)),
    }
}

/// Indices of the sites sharing site 0's reuse colour, site 0 excluded.
pub fn cochannel_sites(layout: &HexLayout, reuse_k: u32) -> Result<Vec<usize>> {
    let (i, j) = reuse_shift(reuse_k)?;
    let k = i * i + i * j + j * j;
    Ok(layout
        .axial
        .iter()
        .enumerate()
        .skip(1)
        .filter(|(_, &(q, r))| ((i + j) * q + j * r) % k == 0 && (-j * q + i * r) % k == 0)
        .map(|(idx, _)| idx)
        .collect())
}

/// SINR from received powers (W): the serving link over the colliding
/// interferers plus noise.
pub fn unicast_sinr_from_powers(serving_w: f64, interferers_w: &[f64], collision: &[bool], noise_w: f64) -> f64 {
    let interference: f64 = interferers_w.iter().zip(collision).filter(|(_, &on)| on).map(|(p, _)| p).sum();
    serving_w / (interference + noise_w)
}

/// Raw unicast SINR of a user at `user` served by site 0 at the origin.
///
/// `shadowing_db[0]` belongs to the serving link and `shadowing_db[l + 1]`
/// to `interferers[l]`. A directional receiver points at the serving site.
pub fn unicast_sinr(
    user: &Point,
    interferers: &[Point],
    collision: &[bool],
    scenario: &Scenario,
    shadowing_db: &[f64],
) -> f64 {
    let budget = LinkBudget::new(scenario);
    let serving = Point::new(0.0, 0.0);
    let s = budget.rx_power_w(user.norm(), shadowing_db[0], 0.0);
    let powers: Vec<f64> = interferers
        .iter()
        .zip(&shadowing_db[1..])
        .map(|(site, &sh)| budget.rx_power_w(site.distance(user), sh, budget.discrimination(user, &serving, site)))
        .collect();
    unicast_sinr_from_powers(s, &powers, collision, budget.noise_w)
}

/// Unicast effective spectral efficiency.
pub fn unicast_ese(sinr: f64, profile: &EfficiencyProfile) -> Result<f64> {
    if !(sinr > 0.0) {
        return Err(Error::Domain(format!("SINR must be > 0 (got {sinr})")));
    }
    Ok(spectral_efficiency(sinr, profile))
}

/// Pre-drawn link realisations: serving power, interferer powers and the
/// collision uniforms, one row per realisation.
#[derive(Debug, Clone)]
struct LinkDraws {
    interferers: usize,
    noise_w: f64,
    serving: Vec<f64>,
    interference: Vec<f64>,
    uniform: Vec<f64>,
}

impl LinkDraws {
    fn len(&self) -> usize {
        self.serving.len()
    }

    #[inline]
    fn sinr(&self, i: usize, x: f64) -> f64 {
        let m = self.interferers;
        let row = i * m..(i + 1) * m;
        let mut interference = 0.0;
        for (p, u) in self.interference[row.clone()].iter().zip(&self.uniform[row]) {
            if *u < x {
                interference += p;
            }
        }
        self.serving[i] / (interference + self.noise_w)
    }
}

struct LinkSampler {
    budget: LinkBudget,
    sigma: f64,
    interferers: Vec<Point>,
}

impl LinkSampler {
    fn new(scenario: &Scenario, layout: &HexLayout) -> Result<Self> {
        let idx = cochannel_sites(layout, scenario.reuse_k)?;
        Ok(Self {
            budget: LinkBudget::new(scenario),
            sigma: scenario.shadowing_sigma,
            interferers: idx.into_iter().map(|i| layout.sites[i]).collect(),
        })
    }

    fn draw(&self, rng: &mut SampleRng, user: &Point, out: &mut (Vec<f64>, Vec<f64>, Vec<f64>)) {
        let origin = Point::new(0.0, 0.0);
        let z: f64 = StandardNormal.sample(rng);
        out.0.push(self.budget.rx_power_w(user.norm(), self.sigma * z, 0.0));
        for site in &self.interferers {
            let z: f64 = StandardNormal.sample(rng);
            let disc = self.budget.discrimination(user, &origin, site);
            out.1.push(self.budget.rx_power_w(site.distance(user), self.sigma * z, disc));
            out.2.push(rng.random::<f64>());
        }
    }

    fn collect(&self, rows: Vec<(Vec<f64>, Vec<f64>, Vec<f64>)>) -> LinkDraws {
        let mut d = LinkDraws {
            interferers: self.interferers.len(),
            noise_w: self.budget.noise_w,
            serving: Vec::new(),
            interference: Vec::new(),
            uniform: Vec::new(),
        };
        for (s, i, u) in rows {
            d.serving.extend(s);
            d.interference.extend(i);
            d.uniform.extend(u);
        }
        d
    }
}

/// Radial quadrature of the load equation with its Monte Carlo draws.
///
/// Node `j` sits at `r_j = R sqrt((j + 1/2) / N)` on the disc of the cell's
/// area, so every node carries weight `1/N` under the density `2r/R²`. Each
/// node has its own angle, shadowing and collision draws, reused for every
/// load and bandwidth evaluated.
#[derive(Debug, Clone)]
pub struct UnicastEnsemble {
    pub nodes: usize,
    pub draws_per_node: usize,
    pub radii: Vec<f64>,
    profile: EfficiencyProfile,
    draws: LinkDraws,
}

impl UnicastEnsemble {
    pub fn new(
        scenario: &Scenario,
        layout: &HexLayout,
        profile: &EfficiencyProfile,
        numerics: &Numerics,
        seed: u64,
    ) -> Result<Self> {
        let sampler = LinkSampler::new(scenario, layout)?;
        let (nodes, per) = (numerics.quadrature_nodes, numerics.draws_per_node);
        let big_r = cell_radius(layout.isd);
        let radii: Vec<f64> = (0..nodes).map(|j| big_r * ((j as f64 + 0.5) / nodes as f64).sqrt()).collect();
        let rows = radii
            .par_iter()
            .enumerate()
            .map(|(j, &r)| {
                let mut rng = substream(seed, Stream::Quadrature, j as u64);
                let m = sampler.interferers.len();
                let mut out = (Vec::with_capacity(per), Vec::with_capacity(per * m), Vec::with_capacity(per * m));
                for _ in 0..per {
                    let theta = rng.random::<f64>() * std::f64::consts::TAU;
                    let user = Point::new(r * theta.cos(), r * theta.sin());
                    sampler.draw(&mut rng, &user, &mut out);
                }
                out
            })
            .collect();
        Ok(Self { nodes, draws_per_node: per, radii, profile: *profile, draws: sampler.collect(rows) })
    }

    pub fn interferer_count(&self) -> usize {
        self.draws.interferers
    }

    /// Collision- and shadowing-averaged efficiency at each radial node.
    pub fn mean_ese(&self, x: f64) -> Vec<f64> {
        let per = self.draws_per_node;
        (0..self.nodes)
            .into_par_iter()
            .map(|j| {
                let sum: f64 =
                    (j * per..(j + 1) * per).map(|i| spectral_efficiency(self.draws.sinr(i, x), &self.profile)).sum();
                sum / per as f64
            })
            .collect()
    }

    /// Right-hand side of the load equation before clamping:
    /// `demand * mean_r 1 / (BW E_X[ESE(r, X)])` with demand in Mbit/s and
    /// `bw_mhz` in MHz.
    pub fn load_map(&self, x: f64, demand_mbps: f64, bw_mhz: f64) -> f64 {
        if demand_mbps == 0.0 {
            return 0.0;
        }
        let inv: f64 = self.mean_ese(x).iter().map(|e| 1.0 / e).sum();
        demand_mbps * inv / (self.nodes as f64 * bw_mhz)
    }

    /// Damped fixed-point iteration from `x = 0`.
    pub fn solve(&self, demand_mbps: f64, bw_mhz: f64, numerics: &Numerics) -> LoadSolution {
        let target = |x: f64| self.load_map(x, demand_mbps, bw_mhz).min(1.0);
        let alpha = numerics.damping;
        let mut x = 0.0;
        let mut residual = f64::INFINITY;
        for it in 1..=numerics.load_max_iter {
            let t = target(x);
            residual = (x - t).abs();
            if residual <= numerics.load_tolerance {
                return LoadSolution { x: t, iterations: it, residual, converged: true };
            }
            x = (1.0 - alpha) * x + alpha * t;
        }
        log::warn!("load iteration stopped after {} steps (residual {residual:.2e})", numerics.load_max_iter);
        LoadSolution { x, iterations: numerics.load_max_iter, residual, converged: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoadSolution {
    pub x: f64,
    pub iterations: usize,
    /// `|x - f(x)|` at the last evaluated iterate.
    pub residual: f64,
    pub converged: bool,
}

/// Network load for unicast intensities `rho_hd`, `rho_sd` (erlangs) on
/// `bw_uni` MHz.
pub fn solve_load(
    bundle: &Bundle,
    layout: &HexLayout,
    rho_hd: f64,
    rho_sd: f64,
    bw_uni: f64,
    seed: u64,
) -> Result<LoadSolution> {
    if !(bw_uni > 0.0) {
        return Err(Error::Domain(format!("unicast bandwidth must be > 0 (got {bw_uni})")));
    }
    let ens = UnicastEnsemble::new(&bundle.scenario, layout, &bundle.efficiency.unicast, &bundle.numerics, seed)?;
    let demand = rho_hd * bundle.service.r_hd + rho_sd * bundle.service.r_sd;
    Ok(ens.solve(demand, bw_uni, &bundle.numerics))
}

/// Unicast users spread uniformly over cell 0, with their link draws.
#[derive(Debug, Clone)]
pub struct UnicastUsers {
    draws: LinkDraws,
    pub seed: u64,
}

impl UnicastUsers {
    pub fn new(scenario: &Scenario, layout: &HexLayout, n: usize, seed: u64) -> Result<Self> {
        let sampler = LinkSampler::new(scenario, layout)?;
        let m = sampler.interferers.len();
        let rows = (0..n as u64)
            .into_par_iter()
            .map(|i| {
                let mut rng = substream(seed, Stream::Unicast, i);
                let user = sample_in_cell(&mut rng, layout.isd);
                let mut out = (Vec::with_capacity(1), Vec::with_capacity(m), Vec::with_capacity(m));
                sampler.draw(&mut rng, &user, &mut out);
                out
            })
            .collect();
        Ok(Self { draws: sampler.collect(rows), seed })
    }

    pub fn len(&self) -> usize {
        self.draws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.draws.len() == 0
    }

    /// Raw SINR law at network load `x`.
    pub fn sinr_distribution(&self, x: f64) -> SinrDistribution {
        let s = (0..self.draws.len()).into_par_iter().map(|i| self.draws.sinr(i, x)).collect();
        SinrDistribution::from_samples(s, self.seed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::build_layout;
    use crate::scenario::{LinkMode, Morphology};

    #[test]
    fn reuse_one_uses_everything() {
        let l = build_layout(1000.0, 2, false);
        assert_eq!(cochannel_sites(&l, 1).unwrap().len(), 18);
    }

    #[test]
    fn reuse_three_ring() {
        let l = build_layout(1000.0, 2, false);
        let s = cochannel_sites(&l, 3).unwrap();
        assert_eq!(s.len(), 6);
        for i in &s {
            assert!((l.sites[*i].norm() - 1000.0 * 3f64.sqrt()).abs() < 1e-6);
        }
        // 60 degree rotation maps the set onto itself
        let rot = |p: &Point| {
            let (c, sn) = (0.5, 3f64.sqrt() / 2.0);
            Point::new(c * p.x - sn * p.y, sn * p.x + c * p.y)
        };
        for i in &s {
            let q = rot(&l.sites[*i]);
            assert!(s.iter().any(|j| l.sites[*j].distance(&q) < 1e-6));
        }
    }

    #[test]
    fn reuse_four_and_seven_distances() {
        let l = build_layout(1.0, 4, false);
        for (k, d) in [(4u32, 2.0), (7, 7f64.sqrt())] {
            let s = cochannel_sites(&l, k).unwrap();
            let nearest = s.iter().map(|i| l.sites[*i].norm()).fold(f64::INFINITY, f64::min);
            assert!((nearest - d).abs() < 1e-9, "K={k}");
            assert_eq!(s.iter().filter(|i| (l.sites[**i].norm() - d).abs() < 1e-9).count(), 6);
        }
        assert!(matches!(cochannel_sites(&l, 5), Err(Error::UnsupportedReuse(5))));
    }

    #[test]
    fn sinr_from_powers() {
        assert_eq!(unicast_sinr_from_powers(2.0, &[1.0, 1.0], &[false, false], 0.5), 4.0);
        let p = 3e-9;
        let n = 1e-12;
        let v = unicast_sinr_from_powers(p, &[p], &[true], n);
        assert!((v - p / (p + n)).abs() < 1e-15);
    }

    #[test]
    fn collisions_only_hurt() {
        let s = Scenario::urban();
        let l = build_layout(s.isd, 2, false);
        let inter: Vec<Point> = cochannel_sites(&l, 3).unwrap().into_iter().map(|i| l.sites[i]).collect();
        let user = Point::new(120.0, -60.0);
        let sh = vec![1.0; inter.len() + 1];
        let off = unicast_sinr(&user, &inter, &vec![false; inter.len()], &s, &sh);
        let mut on = vec![false; inter.len()];
        for k in 0..inter.len() {
            on[k] = true;
            assert!(unicast_sinr(&user, &inter, &on, &s, &sh) <= off);
        }
    }

    #[test]
    fn ese_examples() {
        let p = EfficiencyProfile { beta_eff: 0.5, xi_eff: 0.5, per_stream_cap: 9.0, fading_margin: 0.0 };
        assert!((unicast_ese(2.0, &p).unwrap() - 0.5).abs() < 1e-15);
        let p = EfficiencyProfile::table(Morphology::Urban, LinkMode::Unicast, 4, 4);
        assert!((unicast_ese(1e40, &p).unwrap() - 21.24).abs() < 1e-9);
        assert!(unicast_ese(0.0, &p).is_err());
    }

    fn small_bundle() -> Bundle {
        let mut b = Bundle::preset(Morphology::Urban);
        b.numerics.quadrature_nodes = 16;
        b.numerics.draws_per_node = 200;
        b
    }

    #[test]
    fn load_limits() {
        let b = small_bundle();
        let l = build_layout(b.scenario.isd, 2, false);
        let zero = solve_load(&b, &l, 0.0, 0.0, 20.0, 1).unwrap();
        assert_eq!(zero.x, 0.0);
        let full = solve_load(&b, &l, 1e6, 1e6, 20.0, 1).unwrap();
        assert_eq!(full.x, 1.0);
        assert!(solve_load(&b, &l, 1.0, 1.0, 0.0, 1).is_err());
    }

    #[test]
    fn load_map_is_monotone() {
        let b = small_bundle();
        let l = build_layout(b.scenario.isd, 2, false);
        let e = UnicastEnsemble::new(&b.scenario, &l, &b.efficiency.unicast, &b.numerics, 4).unwrap();
        let mut prev = 0.0;
        for i in 0..=20 {
            let f = e.load_map(f64::from(i) / 20.0, 50.0, 10.0);
            assert!(f >= prev);
            prev = f;
        }
    }

    #[test]
    fn users_distribution_degrades_with_load() {
        let s = Scenario::urban();
        let l = build_layout(s.isd, 2, false);
        let u = UnicastUsers::new(&s, &l, 2000, 5).unwrap();
        let a = u.sinr_distribution(0.1);
        let b = u.sinr_distribution(0.9);
        assert!(a.samples.iter().zip(&b.samples).all(|(x, y)| x >= y));
    }
}
