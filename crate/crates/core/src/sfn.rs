//! Single-frequency-network broadcast: constructive/destructive split of
//! the received SFN signal, Monte Carlo SINR over user locations and
//! shadowing, effective spectral efficiency and the broadcast-only
//! bandwidth requirement.

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{sample_in_cell, HexLayout, Point};
use crate::propagation::{linear_to_db, LinkBudget};
use crate::rng::{substream, Stream};
use crate::scenario::{EfficiencyProfile, Scenario, ServiceConfig};

/// Speed of light in metres per microsecond.
pub const SPEED_OF_LIGHT_M_PER_US: f64 = 299.792_458;

/// OFDM timing of the SFN waveform, microseconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightParams {
    pub t_u: f64,
    pub t_cp: f64,
}

impl WeightParams {
    pub fn new(t_u: f64, t_cp: f64) -> Result<Self> {
        if !(t_u > 0.0 && t_cp >= 0.0 && t_cp < t_u) {
            return Err(Error::Domain(format!("invalid OFDM timing t_u={t_u}, t_cp={t_cp}")));
        }
        Ok(Self { t_u, t_cp })
    }

    pub fn from_scenario(s: &Scenario) -> Self {
        Self { t_u: s.t_u, t_cp: s.t_cp }
    }
}

/// Fraction of a copy delayed by `tau` µs that adds constructively.
///
/// Unity inside the cyclic prefix, linear ramps over one useful symbol on
/// either side, zero beyond.
pub fn weight(tau: f64, p: &WeightParams) -> f64 {
    if tau < -p.t_u {
        0.0
    } else if tau < 0.0 {
        1.0 + tau / p.t_u
    } else if tau < p.t_cp {
        1.0
    } else if tau < p.t_cp + p.t_u {
        1.0 - (tau - p.t_cp) / p.t_u
    } else {
        0.0
    }
}

/// Received SFN power split into its useful and interfering parts (W).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SfnPower {
    pub constructive: f64,
    pub destructive: f64,
    pub noise: f64,
}

impl SfnPower {
    pub fn sinr(&self) -> f64 {
        self.constructive / (self.destructive + self.noise)
    }
}

/// Splits the contributions of the transmitting sites, given as
/// `(distance m, received power W)`. Delays are taken relative to the
/// nearest site, which the receiver synchronises to.
pub fn sfn_power(links: &[(f64, f64)], params: &WeightParams, noise_w: f64) -> SfnPower {
    let nearest = links.iter().map(|l| l.0).fold(f64::INFINITY, f64::min);
    let mut out = SfnPower { constructive: 0.0, destructive: 0.0, noise: noise_w };
    for &(d, p) in links {
        let w = weight((d - nearest) / SPEED_OF_LIGHT_M_PER_US, params);
        out.constructive += w * p;
        out.destructive += (1.0 - w) * p;
    }
    out
}

/// Raw SFN SINR of a user in cell 0 for one shadowing realisation
/// (`shadowing_db[i]` belongs to site `i`). With `regional`, sites outside
/// the evaluated region are silent.
pub fn sfn_sinr(user: &Point, layout: &HexLayout, scenario: &Scenario, shadowing_db: &[f64], regional: bool) -> f64 {
    let budget = LinkBudget::new(scenario);
    let params = WeightParams::from_scenario(scenario);
    let mut links = Vec::with_capacity(layout.len());
    sfn_sinr_with(user, layout, &budget, &params, shadowing_db, regional, &mut links)
}

fn sfn_sinr_with(
    user: &Point,
    layout: &HexLayout,
    budget: &LinkBudget,
    params: &WeightParams,
    shadowing_db: &[f64],
    regional: bool,
    links: &mut Vec<(f64, f64)>,
) -> f64 {
    links.clear();
    let mut strongest = (f64::NEG_INFINITY, 0usize);
    for (i, site) in layout.sites.iter().enumerate() {
        if regional && !layout.in_region[i] {
            continue;
        }
        let d = site.distance(user);
        let p = budget.rx_power_w(d, shadowing_db[i], 0.0);
        if p > strongest.0 {
            strongest = (p, i);
        }
        links.push((d, p));
    }
    if let Some(mask) = budget.mask {
        let boresight = layout.sites[strongest.1];
        let active = layout.sites.iter().enumerate().filter(|(i, _)| !regional || layout.in_region[*i]);
        for (link, (_, site)) in links.iter_mut().zip(active) {
            let disc = mask.towards(user, &boresight, site);
            link.1 *= crate::propagation::db_to_linear(-disc);
        }
    }
    sfn_power(links, params, budget.noise_w).sinr()
}

/// Empirical SINR law over user positions and shadowing draws.
#[derive(Debug, Clone, PartialEq)]
pub struct SinrDistribution {
    /// Linear SINR values in ascending order.
    pub samples: Vec<f64>,
    pub seed: u64,
}

impl SinrDistribution {
    pub fn from_samples(mut samples: Vec<f64>, seed: u64) -> Self {
        samples.sort_by(f64::total_cmp);
        Self { samples, seed }
    }

    pub fn sample_count(&self) -> usize {
        self.samples.len()
    }

    /// Linearly interpolated quantile, `p` in [0, 1].
    pub fn percentile(&self, p: f64) -> f64 {
        let n = self.samples.len();
        assert!(n > 0, "empty SINR distribution");
        let pos = p.clamp(0.0, 1.0) * (n - 1) as f64;
        let lo = pos.floor() as usize;
        let hi = (lo + 1).min(n - 1);
        let frac = pos - lo as f64;
        self.samples[lo] * (1.0 - frac) + self.samples[hi] * frac
    }

    pub fn percentile_db(&self, p: f64) -> f64 {
        linear_to_db(self.percentile(p))
    }

    /// `sinr_db,cdf` CSV of the empirical distribution.
    pub fn to_cdf_csv(&self) -> String {
        let n = self.samples.len() as f64;
        let mut out = String::from("sinr_db,cdf\n");
        for (i, s) in self.samples.iter().enumerate() {
            out.push_str(&format!("{:.6},{:.8}\n", linear_to_db(*s), (i + 1) as f64 / n));
        }
        out
    }
}

/// Monte Carlo SFN SINR over `n_samples` uniform users in cell 0, each with
/// independent log-normal shadowing towards every site.
///
/// Sample `i` draws from its own generator, so national and regional runs
/// with the same seed see identical positions and shadowing.
pub fn simulate_sinr_distribution(
    layout: &HexLayout,
    scenario: &Scenario,
    n_samples: usize,
    seed: u64,
    regional: bool,
) -> SinrDistribution {
    let budget = LinkBudget::new(scenario);
    let params = WeightParams::from_scenario(scenario);
    let sigma = scenario.shadowing_sigma;
    let samples: Vec<f64> = (0..n_samples as u64)
        .into_par_iter()
        .map_init(
            || (Vec::with_capacity(layout.len()), Vec::with_capacity(layout.len())),
            |(shadow, links), i| {
                let mut rng = substream(seed, Stream::Broadcast, i);
                let user = sample_in_cell(&mut rng, layout.isd);
                shadow.clear();
                for _ in 0..layout.len() {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    shadow.push(sigma * z);
                }
                sfn_sinr_with(&user, layout, &budget, &params, shadow, regional, links)
            },
        )
        .collect();
    SinrDistribution::from_samples(samples, seed)
}

/// Modified Shannon efficiency `beta min(log2(1 + xi SINR'), cap)` with
/// SINR' the raw SINR less the fading margin. Total for any SINR >= 0.
#[inline]
pub fn spectral_efficiency(sinr: f64, profile: &EfficiencyProfile) -> f64 {
    let faded = sinr * crate::propagation::db_to_linear(-profile.fading_margin);
    profile.beta_eff * (profile.xi_eff * faded).ln_1p().min(profile.per_stream_cap * std::f64::consts::LN_2)
        / std::f64::consts::LN_2
}

/// Effective spectral efficiency of an SFN link at the dimensioning SINR.
pub fn broadcast_ese(sinr: f64, profile: &EfficiencyProfile) -> Result<f64> {
    if !(sinr > 0.0) {
        return Err(Error::Domain(format!("SINR must be > 0 (got {sinr})")));
    }
    Ok(spectral_efficiency(sinr, profile))
}

/// Spectrum (MHz) a border cell needs with every programme broadcast:
/// national programmes once over the large SFN, regional ones once per
/// intersecting region. Extra programmes count as national HD.
pub fn broadcast_bandwidth(service: &ServiceConfig, ese_national: f64, ese_regional: f64, regions_x: u32) -> f64 {
    let hd_national = f64::from(service.n_hd_total - service.n_regional_hd + service.extra_programs);
    let sd_national = f64::from(service.n_sd_total);
    let hd_regional = f64::from(service.n_regional_hd);
    let national = (hd_national * service.r_hd + sd_national * service.r_sd) / ese_national;
    let regional = if hd_regional > 0.0 { hd_regional * service.r_hd / ese_regional } else { 0.0 };
    national + f64::from(regions_x) * regional
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::build_layout;
    use crate::scenario::{LinkMode, Morphology};

    fn params() -> WeightParams {
        WeightParams::new(100.0, 20.0).unwrap()
    }

    #[test]
    fn weight_examples() {
        let p = params();
        assert_eq!(weight(0.0, &p), 1.0);
        assert_eq!(weight(-50.0, &p), 0.5);
        assert_eq!(weight(120.0, &p), 0.0);
        assert!((weight(20.0 + 25.0, &p) - 0.75).abs() < 1e-15);
        assert_eq!(weight(-100.5, &p), 0.0);
        assert_eq!(weight(19.999, &p), 1.0);
    }

    #[test]
    fn zero_cp_collapses_flat_top() {
        let p = WeightParams::new(10.0, 0.0).unwrap();
        assert_eq!(weight(0.0, &p), 1.0);
        assert!((weight(5.0, &p) - 0.5).abs() < 1e-15);
        assert!(WeightParams::new(10.0, 10.0).is_err());
    }

    #[test]
    fn single_site_is_noise_limited() {
        let s = sfn_power(&[(1000.0, 2e-9)], &params(), 1e-12);
        assert!((s.sinr() - 2e3).abs() < 1e-9);
    }

    #[test]
    fn two_equidistant_sites_add() {
        let s = sfn_power(&[(1000.0, 2e-9), (1000.0, 2e-9)], &params(), 1e-12);
        assert!((s.sinr() - 4e3).abs() < 1e-9);
    }

    #[test]
    fn distant_site_is_pure_interference() {
        let p = params();
        let far = 1000.0 + (p.t_cp + p.t_u + 1.0) * SPEED_OF_LIGHT_M_PER_US;
        let s = sfn_power(&[(1000.0, 2e-9), (far, 2e-9)], &p, 1e-12);
        let expected = 2e-9 / (2e-9 + 1e-12);
        assert!((s.sinr() - expected).abs() < 1e-12);
    }

    #[test]
    fn regional_split_is_worse_at_first_percentile() {
        let s = Scenario::rural();
        let layout = build_layout(s.isd, 4, true);
        let nat = simulate_sinr_distribution(&layout, &s, 20_000, 3, false);
        let reg = simulate_sinr_distribution(&layout, &s, 20_000, 3, true);
        assert!(reg.percentile(0.01) <= nat.percentile(0.01));
    }

    #[test]
    fn no_shadowing_fixed_user_is_deterministic() {
        let mut s = Scenario::urban();
        s.shadowing_sigma = 0.0;
        let layout = build_layout(s.isd, 2, false);
        let zero = vec![0.0; layout.len()];
        let centre = Point::new(0.0, 0.0);
        let a = sfn_sinr(&centre, &layout, &s, &zero, false);
        let b = sfn_sinr(&centre, &layout, &s, &zero, false);
        assert_eq!(a, b);
        assert!(a > 0.0);
    }

    #[test]
    fn distribution_is_reproducible() {
        let s = Scenario::urban();
        let layout = build_layout(s.isd, 2, false);
        let a = simulate_sinr_distribution(&layout, &s, 2_000, 11, false);
        let b = simulate_sinr_distribution(&layout, &s, 2_000, 11, false);
        assert_eq!(a, b);
        assert!(a.samples.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn ese_examples() {
        let p = EfficiencyProfile { beta_eff: 0.75, xi_eff: 1.0, per_stream_cap: 9.0, fading_margin: 0.0 };
        assert!((broadcast_ese(1.0, &p).unwrap() - 0.75).abs() < 1e-15);
        let p = EfficiencyProfile { beta_eff: 0.65, xi_eff: 2.0, per_stream_cap: 9.0, fading_margin: 5.0 };
        assert!((broadcast_ese(1e30, &p).unwrap() - 5.85).abs() < 1e-12);
        let p = EfficiencyProfile { beta_eff: 0.65, xi_eff: 0.5, per_stream_cap: 9.0, fading_margin: 5.0 };
        let v = broadcast_ese(10.0, &p).unwrap();
        let expected = 0.65 * (1.0 + 0.5 * 10f64.powf(0.5)).log2();
        assert!((v - expected).abs() < 1e-12);
        assert!((v - 0.889).abs() < 1e-3);
        assert!(broadcast_ese(0.0, &p).is_err());
        assert!(broadcast_ese(-1.0, &p).is_err());
    }

    #[test]
    fn more_antennas_never_lower_ese() {
        for sinr in [0.01, 0.5, 3.0, 40.0, 1e4] {
            let mut prev = 0.0;
            for (mt, mr) in [(1, 1), (4, 1), (4, 4), (8, 4), (8, 8)] {
                let p = EfficiencyProfile::table(Morphology::Rural, LinkMode::Broadcast, mt, mr);
                let e = broadcast_ese(sinr, &p).unwrap();
                assert!(e >= prev);
                prev = e;
            }
        }
    }

    #[test]
    fn broadcast_bandwidth_examples() {
        let svc = ServiceConfig::default();
        let bw = broadcast_bandwidth(&svc, 1.0, 1.0, 3);
        assert!((bw - 343.80).abs() < 1e-9, "{bw}");
        assert!((broadcast_bandwidth(&svc, 2.0, 2.0, 3) - bw / 2.0).abs() < 1e-12);
        let empty = ServiceConfig { n_hd_total: 0, n_sd_total: 0, n_regional_hd: 0, ..svc };
        assert_eq!(broadcast_bandwidth(&empty, 1.0, 1.0, 3), 0.0);
    }
}
