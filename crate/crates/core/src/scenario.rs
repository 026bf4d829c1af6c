//! Scenario presets and parameter validation.
//!
//! A [`Bundle`] carries everything one evaluation needs: the deployment
//! ([`Scenario`]), the TV service offer ([`ServiceConfig`]), the link
//! efficiency profiles for broadcast and unicast ([`EfficiencyProfile`]) and
//! the numerical settings ([`Numerics`]). The rural and urban presets hold the
//! reference values for Swedish rural and urban areas.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Thermal noise density in dBm/Hz.
pub const THERMAL_DENSITY_DBM_HZ: f64 = -174.0;
/// Every power and noise figure is quoted on this reference bandwidth.
pub const REFERENCE_BANDWIDTH_HZ: f64 = 20e6;
/// The UHF band 470-790 MHz.
pub const UHF_BAND_MHZ: f64 = 320.0;

pub const RURAL_ISD_RANGE_M: (f64, f64) = (4_000.0, 16_000.0);
pub const URBAN_ISD_RANGE_M: (f64, f64) = (100.0, 1_500.0);
pub const BS_ANTENNA_OPTIONS: [u32; 2] = [4, 8];
pub const RX_ANTENNA_OPTIONS: [u32; 3] = [1, 4, 8];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Morphology {
    Rural,
    Urban,
}

impl std::str::FromStr for Morphology {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rural" => Ok(Self::Rural),
            "urban" => Ok(Self::Urban),
            other => Err(Error::Invalid(format!("unknown morphology '{other}'"))),
        }
    }
}

/// Which column of the efficiency table a link uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinkMode {
    Broadcast,
    Unicast,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RxPattern {
    Isotropic,
    /// Rooftop receiving-antenna directivity template (bands IV/V).
    DirectionalMask,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathLossModel {
    /// Okumura-Hata, open (rural) area.
    HataOpen,
    /// Okumura-Hata, suburban area.
    HataSuburban,
    /// Okumura-Hata, small/medium city.
    HataUrban,
    /// COST-231 Hata, medium city and suburban centres (C_m = 0 dB).
    Cost231Suburban,
    /// COST-231 Hata, metropolitan centres (C_m = 3 dB).
    Cost231Urban,
    FreeSpace,
}

/// How the expected number of active viewers is derived from receivers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViewingBase {
    /// Viewing ratio applied to every TV set.
    PerReceiver,
    /// Viewing ratio applied to DTT households (one stream per household).
    PerHousehold,
}

/// Deployment, radio and demographic parameters of one evaluation case.
///
/// Units: metres, MHz, dBm (per 20 MHz per antenna), dBi, dB, degrees,
/// inhabitants/km², microseconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub morphology: Morphology,
    pub isd: f64,
    pub carrier_freq: f64,
    pub bs_antenna_count: u32,
    pub rx_antenna_count: u32,
    pub bs_tx_power: f64,
    pub bs_antenna_gain: f64,
    pub rx_antenna_gain: f64,
    pub bs_height: f64,
    pub rx_height: f64,
    pub downtilt: f64,
    pub noise_figure: f64,
    /// Receiver noise floor in dBm on the 20 MHz reference bandwidth.
    pub noise_floor: f64,
    pub wall_loss: f64,
    pub shadowing_sigma: f64,
    pub population_density: f64,
    pub dtt_penetration: f64,
    pub persons_per_household: f64,
    pub tvs_per_household: f64,
    pub viewing_ratio: f64,
    pub viewing_base: ViewingBase,
    pub t_u: f64,
    pub t_cp: f64,
    pub reuse_k: u32,
    pub regions_x: u32,
    pub interferer_rings: u32,
    pub rx_pattern: RxPattern,
    pub path_loss_model: PathLossModel,
}

/// The TV programme offer and the quality targets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ServiceConfig {
    pub n_hd_total: u32,
    pub n_sd_total: u32,
    /// HD programmes with regional content (broadcast-only operation).
    pub n_regional_hd: u32,
    /// HD programmes broadcast over regional SFNs in hybrid operation.
    pub n_broadcast_hybrid: u32,
    /// Mbps.
    pub r_hd: f64,
    /// Mbps.
    pub r_sd: f64,
    /// Viewer share of the broadcast programmes in hybrid operation.
    pub broadcast_share_of_viewers: f64,
    pub blocking_target: f64,
    pub coverage_percentile: f64,
    /// Additional programmes appended to the catalog tail.
    pub extra_programs: u32,
    pub zipf_exponent: f64,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            n_hd_total: 36,
            n_sd_total: 24,
            n_regional_hd: 3,
            n_broadcast_hybrid: 3,
            r_hd: 7.14,
            r_sd: 1.83,
            broadcast_share_of_viewers: 0.5,
            blocking_target: 0.001,
            coverage_percentile: 0.01,
            extra_programs: 0,
            zipf_exponent: 1.0,
        }
    }
}

/// Parameters of the modified Shannon link model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EfficiencyProfile {
    pub beta_eff: f64,
    pub xi_eff: f64,
    /// bps/Hz per spatial stream.
    pub per_stream_cap: f64,
    /// Deep-fade loss applied to the raw SINR, dB.
    pub fading_margin: f64,
}

impl EfficiencyProfile {
    pub const PER_STREAM_CAP: f64 = 9.0;
    pub const FADING_MARGIN_DB: f64 = 5.0;

    /// The efficiency-table column for a morphology and link mode.
    pub fn table(morphology: Morphology, mode: LinkMode, m_t: u32, m_r: u32) -> Self {
        let streams = f64::from(m_t.min(m_r));
        let (beta_eff, xi_eff) = match (morphology, mode) {
            (Morphology::Rural, LinkMode::Broadcast) => (0.65, f64::from(m_t * m_r) / 2.0),
            (Morphology::Urban, LinkMode::Broadcast) => (0.75, f64::from(m_t * m_r) / 2.0),
            (Morphology::Rural, LinkMode::Unicast) => (0.5 * streams, 0.5),
            (Morphology::Urban, LinkMode::Unicast) => (0.59 * streams, 0.5),
        };
        Self { beta_eff, xi_eff, per_stream_cap: Self::PER_STREAM_CAP, fading_margin: Self::FADING_MARGIN_DB }
    }
}

/// Numerical settings; none of these change the model, only its resolution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Numerics {
    /// Monte Carlo user samples per SINR distribution.
    pub samples: usize,
    /// Width of the SINR quantile buckets used as streaming classes, percent.
    pub class_delta_pct: f64,
    /// Bandwidth quantum of the loss system, MHz.
    pub erlang_unit_mhz: f64,
    /// Largest bandwidth a single unicast stream may occupy, MHz.
    pub per_link_cap_mhz: f64,
    pub quadrature_nodes: usize,
    pub draws_per_node: usize,
    pub damping: f64,
    pub load_tolerance: f64,
    pub load_max_iter: usize,
    pub bw_uni_ceiling_mhz: f64,
}

impl Default for Numerics {
    fn default() -> Self {
        Self {
            samples: 100_000,
            class_delta_pct: 5.0,
            erlang_unit_mhz: 0.1,
            per_link_cap_mhz: 20.0,
            quadrature_nodes: 64,
            draws_per_node: 1_000,
            damping: 0.5,
            load_tolerance: 1e-3,
            load_max_iter: 100,
            bw_uni_ceiling_mhz: 2.0 * UHF_BAND_MHZ,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EfficiencyProfiles {
    pub broadcast: EfficiencyProfile,
    pub unicast: EfficiencyProfile,
}

/// Complete parameter set for one evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bundle {
    pub scenario: Scenario,
    pub service: ServiceConfig,
    pub numerics: Numerics,
    pub efficiency: EfficiencyProfiles,
}

/// Useful symbol time and cyclic prefix (µs) for a morphology.
///
/// Rural uses the extended-CP broadcast numerology (7.5 kHz subcarriers,
/// 20% CP overhead); urban uses the normal 15 kHz numerology with the CP
/// sized for a 7% overhead.
pub fn derive_cp_lengths(morphology: Morphology) -> (f64, f64) {
    let (t_u, overhead): (f64, f64) = match morphology {
        Morphology::Rural => (1e6 / 7_500.0, 0.2),
        Morphology::Urban => (1e6 / 15_000.0, 0.07),
    };
    (t_u, t_u * overhead / (1.0 - overhead))
}

/// Thermal noise floor (dBm) on the reference bandwidth for a noise figure.
pub fn thermal_noise_floor_dbm(noise_figure_db: f64) -> f64 {
    THERMAL_DENSITY_DBM_HZ + 10.0 * REFERENCE_BANDWIDTH_HZ.log10() + noise_figure_db
}

impl Scenario {
    pub fn rural() -> Self {
        let (t_u, t_cp) = derive_cp_lengths(Morphology::Rural);
        Self {
            morphology: Morphology::Rural,
            isd: 12_000.0,
            carrier_freq: 630.0,
            bs_antenna_count: 4,
            rx_antenna_count: 1,
            bs_tx_power: 46.0,
            bs_antenna_gain: 15.0,
            rx_antenna_gain: 8.0,
            bs_height: 90.0,
            rx_height: 10.0,
            downtilt: 2.5,
            noise_figure: 7.0,
            noise_floor: -94.0,
            wall_loss: 0.0,
            shadowing_sigma: 8.0,
            population_density: 1.0,
            dtt_penetration: 0.6,
            persons_per_household: 2.1,
            tvs_per_household: 2.0,
            viewing_ratio: 0.4,
            viewing_base: ViewingBase::PerReceiver,
            t_u,
            t_cp,
            reuse_k: 3,
            regions_x: 3,
            interferer_rings: 4,
            rx_pattern: RxPattern::DirectionalMask,
            path_loss_model: PathLossModel::HataOpen,
        }
    }

    pub fn urban() -> Self {
        let (t_u, t_cp) = derive_cp_lengths(Morphology::Urban);
        Self {
            morphology: Morphology::Urban,
            isd: 500.0,
            bs_height: 30.0,
            rx_height: 1.5,
            rx_antenna_gain: 0.0,
            noise_figure: 10.0,
            noise_floor: -91.0,
            wall_loss: 10.0,
            population_density: 5_000.0,
            dtt_penetration: 0.15,
            t_u,
            t_cp,
            rx_pattern: RxPattern::Isotropic,
            path_loss_model: PathLossModel::Cost231Urban,
            ..Self::rural()
        }
    }

    pub fn preset(morphology: Morphology) -> Self {
        match morphology {
            Morphology::Rural => Self::rural(),
            Morphology::Urban => Self::urban(),
        }
    }

    /// Total transmit power of one site in dBm: per-antenna power plus the
    /// array aggregation `10 log10 M_T`.
    pub fn total_tx_power_dbm(&self) -> f64 {
        self.bs_tx_power + 10.0 * f64::from(self.bs_antenna_count).log10()
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("isd", self.isd),
            ("carrier_freq", self.carrier_freq),
            ("bs_height", self.bs_height),
            ("rx_height", self.rx_height),
            ("persons_per_household", self.persons_per_household),
            ("t_u", self.t_u),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Invalid(format!("{name} must be > 0 (got {v})")));
            }
        }
        for (name, v) in [("dtt_penetration", self.dtt_penetration), ("viewing_ratio", self.viewing_ratio)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Invalid(format!("{name} must lie in [0, 1] (got {v})")));
            }
        }
        for (name, v) in [
            ("population_density", self.population_density),
            ("tvs_per_household", self.tvs_per_household),
            ("shadowing_sigma", self.shadowing_sigma),
            ("wall_loss", self.wall_loss),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Invalid(format!("{name} must be >= 0 (got {v})")));
            }
        }
        if !(self.t_cp >= 0.0 && self.t_cp < self.t_u) {
            return Err(Error::Invalid(format!(
                "t_cp must satisfy 0 <= t_cp < t_u (got t_cp={}, t_u={})",
                self.t_cp, self.t_u
            )));
        }
        if self.bs_antenna_count == 0 || self.rx_antenna_count == 0 {
            return Err(Error::Invalid("antenna counts must be >= 1".into()));
        }
        if self.reuse_k < 1 {
            return Err(Error::Invalid("reuse_k must be >= 1".into()));
        }
        if self.regions_x < 1 {
            return Err(Error::Invalid("regions_x must be >= 1".into()));
        }
        if self.interferer_rings < 1 {
            return Err(Error::Invalid("interferer_rings must be >= 1".into()));
        }
        let thermal = thermal_noise_floor_dbm(self.noise_figure);
        if (self.noise_floor - thermal).abs() > 0.5 {
            return Err(Error::Invalid(format!(
                "noise_floor {} dBm is inconsistent with noise_figure {} dB (thermal floor {:.2} dBm)",
                self.noise_floor, self.noise_figure, thermal
            )));
        }
        Ok(())
    }
}

impl ServiceConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_regional_hd > self.n_hd_total {
            return Err(Error::Invalid("n_regional_hd must not exceed n_hd_total".into()));
        }
        if self.n_broadcast_hybrid > self.n_hd_total {
            return Err(Error::Invalid("n_broadcast_hybrid must not exceed n_hd_total".into()));
        }
        if !(self.blocking_target > 0.0 && self.blocking_target < 1.0) {
            return Err(Error::Invalid("blocking_target must lie in (0, 1)".into()));
        }
        if !(self.coverage_percentile > 0.0 && self.coverage_percentile < 1.0) {
            return Err(Error::Invalid("coverage_percentile must lie in (0, 1)".into()));
        }
        if !(0.0..=1.0).contains(&self.broadcast_share_of_viewers) {
            return Err(Error::Invalid("broadcast_share_of_viewers must lie in [0, 1]".into()));
        }
        if !(self.r_hd > 0.0 && self.r_sd > 0.0) {
            return Err(Error::Invalid("programme rates must be > 0".into()));
        }
        if !(self.zipf_exponent >= 0.0) {
            return Err(Error::Invalid("zipf_exponent must be >= 0".into()));
        }
        Ok(())
    }
}

impl EfficiencyProfile {
    pub fn validate(&self) -> Result<()> {
        if !(self.beta_eff > 0.0) {
            return Err(Error::Invalid("beta_eff must be > 0".into()));
        }
        if !(self.xi_eff > 0.0) {
            return Err(Error::Invalid("xi_eff must be > 0".into()));
        }
        if !(self.per_stream_cap > 0.0) {
            return Err(Error::Invalid("per_stream_cap must be > 0".into()));
        }
        if !(self.fading_margin >= 0.0) {
            return Err(Error::Invalid("fading_margin must be >= 0".into()));
        }
        Ok(())
    }
}

impl Numerics {
    pub fn validate(&self) -> Result<()> {
        if self.samples < 100 {
            return Err(Error::Invalid("samples must be >= 100".into()));
        }
        let buckets = 100.0 / self.class_delta_pct;
        if !(self.class_delta_pct > 0.0 && (buckets - buckets.round()).abs() < 1e-9) {
            return Err(Error::Invalid("class_delta_pct must divide 100".into()));
        }
        if !(self.erlang_unit_mhz > 0.0 && self.per_link_cap_mhz > 0.0) {
            return Err(Error::Invalid("erlang_unit_mhz and per_link_cap_mhz must be > 0".into()));
        }
        if self.quadrature_nodes == 0 || self.draws_per_node == 0 || self.load_max_iter == 0 {
            return Err(Error::Invalid("quadrature and iteration counts must be >= 1".into()));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::Invalid("damping must lie in (0, 1]".into()));
        }
        if !(self.bw_uni_ceiling_mhz > 0.0) {
            return Err(Error::Invalid("bw_uni_ceiling_mhz must be > 0".into()));
        }
        Ok(())
    }
}

impl EfficiencyProfiles {
    pub fn table(scenario: &Scenario) -> Self {
        let (m, mt, mr) = (scenario.morphology, scenario.bs_antenna_count, scenario.rx_antenna_count);
        Self {
            broadcast: EfficiencyProfile::table(m, LinkMode::Broadcast, mt, mr),
            unicast: EfficiencyProfile::table(m, LinkMode::Unicast, mt, mr),
        }
    }
}

impl Bundle {
    pub fn preset(morphology: Morphology) -> Self {
        let scenario = Scenario::preset(morphology);
        let efficiency = EfficiencyProfiles::table(&scenario);
        Self { scenario, service: ServiceConfig::default(), numerics: Numerics::default(), efficiency }
    }

    /// Changes the antenna configuration and re-derives both efficiency
    /// profiles from the table.
    pub fn with_antennas(mut self, m_t: u32, m_r: u32) -> Self {
        self.scenario.bs_antenna_count = m_t;
        self.scenario.rx_antenna_count = m_r;
        self.efficiency = EfficiencyProfiles::table(&self.scenario);
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        self.service.validate()?;
        self.numerics.validate()?;
        self.efficiency.broadcast.validate()?;
        self.efficiency.unicast.validate()
    }
}

/// The preset triple for a morphology and link mode.
pub fn builtin_scenario(morphology: Morphology, mode: LinkMode) -> (Scenario, ServiceConfig, EfficiencyProfile) {
    let scenario = Scenario::preset(morphology);
    let profile = EfficiencyProfile::table(morphology, mode, scenario.bs_antenna_count, scenario.rx_antenna_count);
    (scenario, ServiceConfig::default(), profile)
}
