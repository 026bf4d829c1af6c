//! Viewer population, programme popularity and the streaming classes that
//! feed the multi-rate loss system.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::propagation::linear_to_db;
use crate::scenario::{EfficiencyProfile, Scenario, ServiceConfig, ViewingBase};
use crate::sfn::{spectral_efficiency, SinrDistribution};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Delivery {
    Broadcast,
    Unicast,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Program {
    pub id: u32,
    pub is_hd: bool,
    pub popularity: f64,
    pub delivery: Delivery,
}

/// The programme offer with popularity shares and delivery assignment.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ProgramCatalog {
    pub programs: Vec<Program>,
}

impl ProgramCatalog {
    pub fn len(&self) -> usize {
        self.programs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.programs.is_empty()
    }

    pub fn total_popularity(&self) -> f64 {
        self.programs.iter().map(|p| p.popularity).sum()
    }

    /// Popularity mass of the selected programmes, quantised to 1e-12 so
    /// catalogs that only spread a family's mass differently report the
    /// same total.
    fn mass(&self, keep: impl Fn(&Program) -> bool) -> f64 {
        let sum: f64 = self.programs.iter().filter(|p| keep(p)).map(|p| p.popularity).sum();
        (sum * 1e12).round() / 1e12
    }

    pub fn unicast_mass(&self) -> f64 {
        self.mass(|p| p.delivery == Delivery::Unicast)
    }

    pub fn unicast_hd_mass(&self) -> f64 {
        self.mass(|p| p.delivery == Delivery::Unicast && p.is_hd)
    }

    pub fn broadcast_mass(&self) -> f64 {
        self.mass(|p| p.delivery == Delivery::Broadcast)
    }

    /// Fraction of unicast viewing that goes to HD programmes (0 when
    /// nothing is unicast).
    pub fn unicast_hd_share(&self) -> f64 {
        let total = self.unicast_mass();
        if total > 0.0 {
            self.unicast_hd_mass() / total
        } else {
            0.0
        }
    }

    pub fn validate(&self) -> Result<()> {
        let total = self.total_popularity();
        if !self.is_empty() && (total - 1.0).abs() > 1e-9 {
            return Err(Error::Invalid(format!("popularities sum to {total}, expected 1")));
        }
        if self.programs.iter().any(|p| !(p.popularity >= 0.0)) {
            return Err(Error::Invalid("negative popularity".into()));
        }
        Ok(())
    }
}

fn zipf_weights(n: u32, s: f64) -> Vec<f64> {
    let w: Vec<f64> = (1..=n).map(|k| f64::from(k).powf(-s)).collect();
    let total: f64 = w.iter().sum();
    w.into_iter().map(|v| v / total).collect()
}

/// Builds the hybrid-mode catalog.
///
/// The `n_broadcast_hybrid` most popular programmes are HD and broadcast,
/// sharing `broadcast_share_of_viewers` equally. The remaining mass is
/// split between the HD and SD tails in proportion to their base sizes and
/// spread inside each tail by a Zipf law. `extra_programs` lengthen the HD
/// tail without changing either family's mass, so unicast HD/SD intensities
/// stay fixed.
pub fn popularity_model(service: &ServiceConfig, extra_programs: u32) -> ProgramCatalog {
    let n_top = service.n_broadcast_hybrid;
    let hd_tail_base = service.n_hd_total - n_top;
    let sd_tail = service.n_sd_total;
    let hd_tail = hd_tail_base + extra_programs;
    let tail_base = hd_tail_base + sd_tail;

    let (top_mass, tail_mass) = if hd_tail + sd_tail == 0 {
        (1.0, 0.0)
    } else if n_top == 0 {
        (0.0, 1.0)
    } else {
        (service.broadcast_share_of_viewers, 1.0 - service.broadcast_share_of_viewers)
    };
    let (hd_mass, sd_mass) = if tail_base > 0 {
        let hd = tail_mass * f64::from(hd_tail_base) / f64::from(tail_base);
        (hd, tail_mass - hd)
    } else if hd_tail > 0 {
        (tail_mass, 0.0)
    } else {
        (0.0, tail_mass)
    };

    let mut programs = Vec::with_capacity((n_top + hd_tail + sd_tail) as usize);
    let mut id = 0;
    let mut push = |is_hd, popularity, delivery| {
        programs.push(Program { id, is_hd, popularity, delivery });
        id += 1;
    };
    for _ in 0..n_top {
        push(true, top_mass / f64::from(n_top), Delivery::Broadcast);
    }
    for w in zipf_weights(hd_tail, service.zipf_exponent) {
        push(true, hd_mass * w, Delivery::Unicast);
    }
    for w in zipf_weights(sd_tail, service.zipf_exponent) {
        push(false, sd_mass * w, Delivery::Unicast);
    }
    ProgramCatalog { programs }
}

/// Viewer arrivals in one cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ViewerModel {
    pub expected_viewers: f64,
    /// 1/s.
    pub arrival_rate: f64,
    /// s.
    pub session_length: f64,
    /// s.
    pub subsession_length: f64,
    pub exit_prob: f64,
}

impl ViewerModel {
    pub const DEFAULT_SESSION_S: f64 = 3_600.0;
    pub const DEFAULT_SUBSESSION_S: f64 = 600.0;

    pub fn new(expected_viewers: f64, session_length: f64, subsession_length: f64) -> Self {
        Self {
            expected_viewers,
            arrival_rate: expected_viewers / session_length,
            session_length,
            subsession_length,
            exit_prob: subsession_length / session_length,
        }
    }

    pub fn with_viewers(expected_viewers: f64) -> Self {
        Self::new(expected_viewers, Self::DEFAULT_SESSION_S, Self::DEFAULT_SUBSESSION_S)
    }
}

/// Terrestrial TV receivers in a cell of `cell_area_km2`.
pub fn tv_receivers(scenario: &Scenario, cell_area_km2: f64) -> f64 {
    households(scenario, cell_area_km2) * scenario.tvs_per_household
}

fn households(scenario: &Scenario, cell_area_km2: f64) -> f64 {
    cell_area_km2 * scenario.population_density / scenario.persons_per_household * scenario.dtt_penetration
}

/// Mean number of simultaneous viewers in a cell at peak hour.
pub fn expected_viewers(scenario: &Scenario, cell_area_km2: f64) -> f64 {
    let base = match scenario.viewing_base {
        ViewingBase::PerReceiver => tv_receivers(scenario, cell_area_km2),
        ViewingBase::PerHousehold => households(scenario, cell_area_km2),
    };
    scenario.viewing_ratio * base
}

/// Offered unicast traffic in erlangs, `t_s * lambda * sum P_i` over the
/// unicast programmes.
pub fn unicast_intensity(viewers: &ViewerModel, catalog: &ProgramCatalog) -> f64 {
    viewers.session_length * viewers.arrival_rate * catalog.unicast_mass()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrafficClass {
    /// 1-based SINR bucket, lowest SINR first.
    pub bucket: usize,
    pub is_hd: bool,
    /// Erlangs.
    pub rho: f64,
    /// MHz.
    pub b_mhz: f64,
    /// SINR the class bandwidth is sized for, dB.
    pub sinr_edge_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrafficClasses {
    pub classes: Vec<TrafficClass>,
    /// Percent width of the SINR buckets.
    pub delta_pct: f64,
    /// Erlangs of users that cannot be served within the per-link cap.
    pub outage: f64,
}

impl TrafficClasses {
    pub fn total_rho(&self) -> f64 {
        self.classes.iter().map(|c| c.rho).sum()
    }

    pub fn max_b_mhz(&self) -> f64 {
        self.classes.iter().map(|c| c.b_mhz).fold(0.0, f64::max)
    }

    /// `k,family,sinr_edge_db,b_k_mhz,rho_k` CSV.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,family,sinr_edge_db,b_k_mhz,rho_k\n");
        for c in &self.classes {
            out.push_str(&format!(
                "{},{},{:.6},{:.6},{:.9}\n",
                c.bucket,
                if c.is_hd { "hd" } else { "sd" },
                c.sinr_edge_db,
                c.b_mhz,
                c.rho
            ));
        }
        out
    }
}

/// Splits unicast traffic into streaming classes by SINR quantile bucket.
///
/// Bucket `k` holds the `(k-1)delta..k delta` percent quantile range. Each
/// bucket is split into HD and SD subclasses by `hd_share`; a subclass's
/// bandwidth is its rate over the efficiency at the worst SINR it still
/// serves. Users needing more than `per_link_cap_mhz` are in outage.
/// Subclasses with equal bandwidth are merged, so `b_mhz` strictly
/// decreases with `bucket` inside each family.
pub fn build_classes(
    sinr: &SinrDistribution,
    delta_pct: f64,
    profile: &EfficiencyProfile,
    service: &ServiceConfig,
    rho_uni: f64,
    hd_share: f64,
    per_link_cap_mhz: f64,
) -> Result<TrafficClasses> {
    let n = sinr.sample_count();
    if n == 0 {
        return Err(Error::Domain("empty SINR distribution".into()));
    }
    let buckets = (100.0 / delta_pct).round() as usize;
    if buckets == 0 || ((100.0 / delta_pct) - buckets as f64).abs() > 1e-9 {
        return Err(Error::Domain(format!("delta {delta_pct} does not divide 100")));
    }

    let families = [(true, service.r_hd, rho_uni * hd_share), (false, service.r_sd, rho_uni * (1.0 - hd_share))];
    let mut classes = Vec::new();
    let mut outage = 0.0;
    let mut any_served = false;

    for (is_hd, rate, rho_family) in families {
        if rho_family <= 0.0 {
            continue;
        }
        let per_user = rho_family / n as f64;
        let mut family: Vec<TrafficClass> = Vec::new();
        for k in 0..buckets {
            let lo = k * n / buckets;
            let hi = (k + 1) * n / buckets;
            let bucket = &sinr.samples[lo..hi];
            // samples are ascending, so the served users form a suffix
            let first_served = bucket.partition_point(|&s| required_mhz(rate, s, profile) > per_link_cap_mhz);
            outage += per_user * first_served as f64;
            if first_served == bucket.len() {
                continue;
            }
            let edge = bucket[first_served];
            let b = required_mhz(rate, edge, profile);
            let rho = per_user * (bucket.len() - first_served) as f64;
            match family.last_mut() {
                Some(prev) if prev.b_mhz == b => prev.rho += rho,
                _ => {
                    family.push(TrafficClass { bucket: k + 1, is_hd, rho, b_mhz: b, sinr_edge_db: linear_to_db(edge) })
                }
            }
        }
        any_served |= !family.is_empty();
        classes.extend(family);
    }

    if rho_uni > 0.0 && !any_served {
        return Err(Error::AllOutage);
    }
    Ok(TrafficClasses { classes, delta_pct, outage })
}

fn required_mhz(rate_mbps: f64, sinr: f64, profile: &EfficiencyProfile) -> f64 {
    let ese = if sinr > 0.0 { spectral_efficiency(sinr, profile) } else { 0.0 };
    if ese > 0.0 {
        rate_mbps / ese
    } else {
        f64::INFINITY
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::cell_area;
    use crate::scenario::{LinkMode, Morphology};

    fn unicast_profile() -> EfficiencyProfile {
        EfficiencyProfile::table(Morphology::Urban, LinkMode::Unicast, 4, 1)
    }

    #[test]
    fn viewers_rural_and_urban() {
        let s = Scenario::rural();
        let e = expected_viewers(&s, cell_area(s.isd) / 1e6);
        assert!((e - 28.5).abs() < 0.05, "{e}");
        let s = Scenario::urban();
        let e = expected_viewers(&s, cell_area(s.isd) / 1e6);
        assert!((e - 61.9).abs() < 0.05, "{e}");
        let mut s = Scenario::rural();
        s.population_density = 0.0;
        assert_eq!(expected_viewers(&s, 100.0), 0.0);
    }

    #[test]
    fn per_household_base_halves_viewers() {
        let mut s = Scenario::rural();
        let a = expected_viewers(&s, 10.0);
        s.viewing_base = ViewingBase::PerHousehold;
        assert!((expected_viewers(&s, 10.0) - a / s.tvs_per_household).abs() < 1e-12);
    }

    #[test]
    fn default_catalog() {
        let c = popularity_model(&ServiceConfig::default(), 0);
        assert_eq!(c.len(), 60);
        c.validate().unwrap();
        for p in &c.programs[..3] {
            assert!((p.popularity - 1.0 / 6.0).abs() < 1e-15);
            assert!(p.is_hd && p.delivery == Delivery::Broadcast);
        }
        assert!((c.unicast_mass() - 0.5).abs() < 1e-12);
        assert!((c.unicast_hd_share() - 33.0 / 57.0).abs() < 1e-12);
        let tail: Vec<f64> = c.programs[3..36].iter().map(|p| p.popularity).collect();
        assert!(tail.windows(2).all(|w| w[0] > w[1]));
    }

    #[test]
    fn extra_programs_keep_masses() {
        let base = popularity_model(&ServiceConfig::default(), 0);
        let more = popularity_model(&ServiceConfig::default(), 20);
        assert_eq!(more.len(), 80);
        more.validate().unwrap();
        assert!((more.broadcast_mass() - 0.5).abs() < 1e-12);
        assert_eq!(more.unicast_hd_share(), base.unicast_hd_share());
        assert_eq!(more.unicast_mass(), base.unicast_mass());
    }

    #[test]
    fn intensity_examples() {
        let catalog = popularity_model(&ServiceConfig::default(), 0);
        let rho = unicast_intensity(&ViewerModel::with_viewers(28.5), &catalog);
        assert!((rho - 14.25).abs() < 1e-9);
        for t_s in [1.0, 60.0, 7200.0] {
            let v = ViewerModel::new(28.5, t_s, 0.5);
            assert!((unicast_intensity(&v, &catalog) - 14.25).abs() < 1e-9);
        }
        let all_bc = ProgramCatalog {
            programs: vec![Program { id: 0, is_hd: true, popularity: 1.0, delivery: Delivery::Broadcast }],
        };
        assert_eq!(unicast_intensity(&ViewerModel::with_viewers(28.5), &all_bc), 0.0);
        let all_uni = ProgramCatalog {
            programs: vec![Program { id: 0, is_hd: false, popularity: 1.0, delivery: Delivery::Unicast }],
        };
        assert!((unicast_intensity(&ViewerModel::with_viewers(28.5), &all_uni) - 28.5).abs() < 1e-9);
    }

    #[test]
    fn hd_sd_split_share() {
        let c = ProgramCatalog {
            programs: vec![
                Program { id: 0, is_hd: true, popularity: 0.5, delivery: Delivery::Broadcast },
                Program { id: 1, is_hd: true, popularity: 0.3, delivery: Delivery::Unicast },
                Program { id: 2, is_hd: false, popularity: 0.2, delivery: Delivery::Unicast },
            ],
        };
        assert!((c.unicast_hd_share() - 0.6).abs() < 1e-12);
    }

    fn spread(n: usize) -> SinrDistribution {
        // 0.01 .. 1000 linear, log-spaced
        let s = (0..n).map(|i| 10f64.powf(-2.0 + 5.0 * i as f64 / (n - 1) as f64)).collect();
        SinrDistribution::from_samples(s, 0)
    }

    #[test]
    fn classes_conserve_traffic() {
        let d = spread(10_000);
        let svc = ServiceConfig::default();
        let t = build_classes(&d, 5.0, &unicast_profile(), &svc, 14.25, 0.6, 20.0).unwrap();
        assert!((t.total_rho() + t.outage - 14.25).abs() < 1e-9);
        assert!(t.outage > 0.0);
        for hd in [true, false] {
            let b: Vec<f64> = t.classes.iter().filter(|c| c.is_hd == hd).map(|c| c.b_mhz).collect();
            assert!(b.windows(2).all(|w| w[0] > w[1]), "{b:?}");
            assert!(b.iter().all(|&v| v <= 20.0));
        }
        let hd: f64 = t.classes.iter().filter(|c| c.is_hd).map(|c| c.rho).sum();
        let sd: f64 = t.classes.iter().filter(|c| !c.is_hd).map(|c| c.rho).sum();
        assert!(hd > sd);
    }

    #[test]
    fn single_bucket() {
        let d = SinrDistribution::from_samples(vec![10.0, 20.0, 30.0, 40.0], 0);
        let svc = ServiceConfig::default();
        let t = build_classes(&d, 100.0, &unicast_profile(), &svc, 10.0, 0.5, 20.0).unwrap();
        assert_eq!(t.classes.len(), 2);
        assert_eq!(t.outage, 0.0);
        assert!((t.total_rho() - 10.0).abs() < 1e-12);
        let hd = &t.classes[0];
        let expected = svc.r_hd / spectral_efficiency(10.0, &unicast_profile());
        assert!((hd.b_mhz - expected).abs() < 1e-12);
    }

    #[test]
    fn everything_in_outage_is_an_error() {
        let d = SinrDistribution::from_samples(vec![1e-6; 100], 0);
        let e = build_classes(&d, 5.0, &unicast_profile(), &ServiceConfig::default(), 5.0, 0.5, 20.0);
        assert!(matches!(e, Err(Error::AllOutage)));
    }

    #[test]
    fn zero_traffic_gives_no_classes() {
        let d = spread(1000);
        let t = build_classes(&d, 5.0, &unicast_profile(), &ServiceConfig::default(), 0.0, 0.5, 20.0).unwrap();
        assert!(t.classes.is_empty());
        assert_eq!(t.outage, 0.0);
    }
}
