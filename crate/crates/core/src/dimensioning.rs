//! End-to-end spectrum requirement for broadcast-only and hybrid delivery.

use serde::{Deserialize, Serialize};

use crate::erlang::{kaufman_roberts, ErlangSystem};
use crate::error::{Error, Result};
use crate::geometry::{build_layout, cell_area};
use crate::propagation::linear_to_db;
use crate::scenario::{Bundle, ServiceConfig, UHF_BAND_MHZ};
use crate::sfn::{broadcast_bandwidth, broadcast_ese, simulate_sinr_distribution, SinrDistribution};
use crate::traffic::{
    build_classes, expected_viewers, popularity_model, unicast_intensity, TrafficClasses, ViewerModel,
};
use crate::unicast::{UnicastEnsemble, UnicastUsers};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    BroadcastOnly,
    Hybrid,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::BroadcastOnly => "broadcast",
            Mode::Hybrid => "hybrid",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "broadcast" | "broadcast_only" => Ok(Mode::BroadcastOnly),
            "hybrid" => Ok(Mode::Hybrid),
            other => Err(Error::Invalid(format!("unknown mode '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub sinr_1pct_national_db: Option<f64>,
    pub sinr_1pct_regional_db: Option<f64>,
    pub load_x: Option<f64>,
    pub aggregate_blocking: Option<f64>,
    pub unweighted_blocking: Option<f64>,
}

/// Required spectrum of one border cell, MHz.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensioningResult {
    pub mode: Mode,
    pub bw_national_sfn: f64,
    /// Total over all intersecting regions.
    pub bw_regional_sfn: f64,
    /// Total over all reuse colours.
    pub bw_unicast: f64,
    pub bw_required: f64,
    pub bw_saving: f64,
    /// The unicast search hit its ceiling; `bw_unicast` is then a lower bound.
    pub infeasible: bool,
    pub diagnostics: Diagnostics,
}

impl DimensioningResult {
    fn new(mode: Mode, national: f64, regional: f64, unicast: f64, diagnostics: Diagnostics) -> Self {
        let bw_required = national + regional + unicast;
        Self {
            mode,
            bw_national_sfn: national,
            bw_regional_sfn: regional,
            bw_unicast: unicast,
            bw_required,
            bw_saving: spectrum_saving(bw_required),
            infeasible: false,
            diagnostics,
        }
    }
}

/// Spectrum left in the UHF band; negative when the requirement does not fit.
pub fn spectrum_saving(bw_required: f64) -> f64 {
    UHF_BAND_MHZ - bw_required
}

pub fn dimension(bundle: &Bundle, mode: Mode, seed: u64) -> Result<DimensioningResult> {
    match mode {
        Mode::BroadcastOnly => dimension_broadcast_only(bundle, seed),
        Mode::Hybrid => dimension_hybrid(bundle, seed),
    }
}

/// National and regional SFN SINR laws on a layout split at the region
/// border. Both runs share positions and shadowing.
pub fn sfn_distributions(bundle: &Bundle, seed: u64, national: bool) -> (Option<SinrDistribution>, SinrDistribution) {
    let s = &bundle.scenario;
    let layout = build_layout(s.isd, s.interferer_rings, true);
    let n = bundle.numerics.samples;
    let nat = national.then(|| simulate_sinr_distribution(&layout, s, n, seed, false));
    let reg = simulate_sinr_distribution(&layout, s, n, seed, true);
    (nat, reg)
}

pub fn dimension_broadcast_only(bundle: &Bundle, seed: u64) -> Result<DimensioningResult> {
    bundle.validate()?;
    let p = bundle.service.coverage_percentile;
    let (nat, reg) = sfn_distributions(bundle, seed, true);
    let nat = nat.expect("national distribution requested");
    let (sn, sr) = (nat.percentile(p), reg.percentile(p));
    let profile = &bundle.efficiency.broadcast;
    let mut r = broadcast_only_from_ese(
        &bundle.service,
        broadcast_ese(sn, profile)?,
        broadcast_ese(sr, profile)?,
        bundle.scenario.regions_x,
    );
    r.diagnostics.sinr_1pct_national_db = Some(linear_to_db(sn));
    r.diagnostics.sinr_1pct_regional_db = Some(linear_to_db(sr));
    Ok(r)
}

/// Broadcast-only requirement for given national and regional efficiencies.
pub fn broadcast_only_from_ese(
    service: &ServiceConfig,
    ese_national: f64,
    ese_regional: f64,
    regions_x: u32,
) -> DimensioningResult {
    let hd_national = f64::from(service.n_hd_total - service.n_regional_hd + service.extra_programs);
    let national = (hd_national * service.r_hd + f64::from(service.n_sd_total) * service.r_sd) / ese_national;
    let total = broadcast_bandwidth(service, ese_national, ese_regional, regions_x);
    DimensioningResult::new(Mode::BroadcastOnly, national, total - national, 0.0, Diagnostics::default())
}

/// Outcome of one unicast bandwidth probe.
#[derive(Debug, Clone)]
pub struct UnicastProbe {
    pub bw_mhz: f64,
    pub load_x: f64,
    pub blocking: f64,
    pub unweighted: f64,
    pub classes: Option<TrafficClasses>,
}

impl UnicastProbe {
    pub fn meets(&self, target: f64) -> bool {
        self.blocking <= target
    }
}

/// Per-cell unicast problem: traffic, the load-equation ensemble and the
/// class-building users. Probing a bandwidth runs the load fixed point,
/// the SINR law at that load, the class split and the loss system.
pub struct UnicastProblem<'a> {
    bundle: &'a Bundle,
    pub rho_uni: f64,
    pub hd_share: f64,
    ensemble: UnicastEnsemble,
    users: UnicastUsers,
}

impl<'a> UnicastProblem<'a> {
    pub fn new(bundle: &'a Bundle, seed: u64) -> Result<Self> {
        let s = &bundle.scenario;
        let catalog = popularity_model(&bundle.service, bundle.service.extra_programs);
        let viewers = ViewerModel::with_viewers(expected_viewers(s, cell_area(s.isd) / 1e6));
        let layout = build_layout(s.isd, s.interferer_rings, false);
        Ok(Self {
            bundle,
            rho_uni: unicast_intensity(&viewers, &catalog),
            hd_share: catalog.unicast_hd_share(),
            ensemble: UnicastEnsemble::new(s, &layout, &bundle.efficiency.unicast, &bundle.numerics, seed)?,
            users: UnicastUsers::new(s, &layout, bundle.numerics.samples, seed)?,
        })
    }

    pub fn demand_mbps(&self) -> f64 {
        let svc = &self.bundle.service;
        self.rho_uni * (self.hd_share * svc.r_hd + (1.0 - self.hd_share) * svc.r_sd)
    }

    pub fn classes_at(&self, load_x: f64) -> Result<TrafficClasses> {
        let b = self.bundle;
        build_classes(
            &self.users.sinr_distribution(load_x),
            b.numerics.class_delta_pct,
            &b.efficiency.unicast,
            &b.service,
            self.rho_uni,
            self.hd_share,
            b.numerics.per_link_cap_mhz,
        )
    }

    /// Evaluates `capacity` units of unicast bandwidth per reuse colour.
    pub fn probe(&self, capacity: u32) -> Result<UnicastProbe> {
        let n = &self.bundle.numerics;
        let bw = f64::from(capacity) * n.erlang_unit_mhz;
        let load = self.ensemble.solve(self.demand_mbps(), bw, n);
        let classes = match self.classes_at(load.x) {
            Ok(c) => c,
            Err(Error::AllOutage) => {
                return Ok(UnicastProbe { bw_mhz: bw, load_x: load.x, blocking: 1.0, unweighted: 1.0, classes: None })
            }
            Err(e) => return Err(e),
        };
        let pairs: Vec<(f64, f64)> = classes.classes.iter().map(|c| (c.b_mhz, c.rho)).collect();
        let system = ErlangSystem::new(&pairs, n.erlang_unit_mhz, capacity);
        let (blocking, unweighted) = if capacity < system.max_units() {
            (1.0, 1.0)
        } else {
            let b = kaufman_roberts(&system)?;
            (b.aggregate, b.unweighted)
        };
        Ok(UnicastProbe { bw_mhz: bw, load_x: load.x, blocking, unweighted, classes: Some(classes) })
    }

    /// Smallest per-colour bandwidth meeting the blocking target, by
    /// bisection on the capacity. Returns the ceiling probe with `false`
    /// when even the ceiling fails.
    pub fn min_bandwidth(&self) -> Result<(UnicastProbe, bool)> {
        let n = &self.bundle.numerics;
        let target = self.bundle.service.blocking_target;
        let ceiling = (n.bw_uni_ceiling_mhz / n.erlang_unit_mhz).round() as u32;
        let top = self.probe(ceiling)?;
        if !top.meets(target) {
            return Ok((top, false));
        }
        let (mut lo, mut hi, mut best) = (0u32, ceiling, top);
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            let p = self.probe(mid)?;
            if p.meets(target) {
                hi = mid;
                best = p;
            } else {
                lo = mid;
            }
        }
        Ok((best, true))
    }
}

pub fn dimension_hybrid(bundle: &Bundle, seed: u64) -> Result<DimensioningResult> {
    bundle.validate()?;
    let svc = &bundle.service;
    let s = &bundle.scenario;
    let mut diag = Diagnostics::default();

    let regional = if svc.n_broadcast_hybrid > 0 {
        let (_, reg) = sfn_distributions(bundle, seed, false);
        let sr = reg.percentile(svc.coverage_percentile);
        diag.sinr_1pct_regional_db = Some(linear_to_db(sr));
        let ese = broadcast_ese(sr, &bundle.efficiency.broadcast)?;
        f64::from(s.regions_x) * f64::from(svc.n_broadcast_hybrid) * svc.r_hd / ese
    } else {
        0.0
    };

    let problem = UnicastProblem::new(bundle, seed)?;
    if problem.rho_uni == 0.0 {
        diag.load_x = Some(0.0);
        diag.aggregate_blocking = Some(0.0);
        return Ok(DimensioningResult::new(Mode::Hybrid, 0.0, regional, 0.0, diag));
    }
    let (probe, feasible) = problem.min_bandwidth()?;
    diag.load_x = Some(probe.load_x);
    diag.aggregate_blocking = Some(probe.blocking);
    diag.unweighted_blocking = Some(probe.unweighted);
    let unicast = f64::from(s.reuse_k) * probe.bw_mhz;
    let mut r = DimensioningResult::new(Mode::Hybrid, 0.0, regional, unicast, diag);
    r.infeasible = !feasible;
    Ok(r)
}
