//! Link budget: path loss, shadowing, antenna gains, wall loss and noise.
//!
//! All Hata-family models reduce to `intercept + slope * log10(d_km)` once
//! frequency and antenna heights are fixed, which is what [`LinkBudget`]
//! precomputes for the Monte Carlo loops.

use std::sync::atomic::{AtomicBool, Ordering};

use crate::geometry::Point;
use crate::scenario::{PathLossModel, RxPattern, Scenario};

/// Distances below this are clamped before evaluating path loss.
pub const MIN_DISTANCE_M: f64 = 10.0;

static CLAMP_LOGGED: AtomicBool = AtomicBool::new(false);

#[inline]
pub fn db_to_linear(db: f64) -> f64 {
    (db * std::f64::consts::LN_10 / 10.0).exp()
}

#[inline]
pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// `(intercept dB, slope dB/decade)` of a model at the given frequency and
/// antenna heights, distance in km.
pub fn path_loss_coefficients(model: PathLossModel, f_mhz: f64, h_base: f64, h_mobile: f64) -> (f64, f64) {
    let lf = f_mhz.log10();
    let lhb = h_base.log10();
    let slope_hata = 44.9 - 6.55 * lhb;
    // small/medium city mobile antenna correction
    let a_hm = (1.1 * lf - 0.7) * h_mobile - (1.56 * lf - 0.8);
    let hata_urban = 69.55 + 26.16 * lf - 13.82 * lhb - a_hm;
    match model {
        PathLossModel::HataUrban => (hata_urban, slope_hata),
        PathLossModel::HataSuburban => {
            let c = (f_mhz / 28.0).log10();
            (hata_urban - 2.0 * c * c - 5.4, slope_hata)
        }
        PathLossModel::HataOpen => (hata_urban - 4.78 * lf * lf + 18.33 * lf - 40.94, slope_hata),
        PathLossModel::Cost231Suburban | PathLossModel::Cost231Urban => {
            let c_m = if model == PathLossModel::Cost231Urban { 3.0 } else { 0.0 };
            (46.3 + 33.9 * lf - 13.82 * lhb - a_hm + c_m, slope_hata)
        }
        PathLossModel::FreeSpace => (32.45 + 20.0 * lf, 20.0),
    }
}

/// Median path loss in dB at distance `d` metres.
pub fn path_loss(d: f64, scenario: &Scenario) -> f64 {
    let (intercept, slope) =
        path_loss_coefficients(scenario.path_loss_model, scenario.carrier_freq, scenario.bs_height, scenario.rx_height);
    intercept + slope * (clamp_distance(d) / 1000.0).log10()
}

fn clamp_distance(d: f64) -> f64 {
    if d < MIN_DISTANCE_M {
        if !CLAMP_LOGGED.swap(true, Ordering::Relaxed) {
            log::warn!("link distance {d:.2} m clamped to {MIN_DISTANCE_M} m");
        }
        MIN_DISTANCE_M
    } else {
        d
    }
}

/// Horizontal directivity of a rooftop receiving antenna in bands IV/V:
/// flat within ±20° of boresight, falling linearly to the 16 dB
/// front-to-back floor at 60°.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectionalMask {
    pub flat_deg: f64,
    pub floor_deg: f64,
    pub floor_db: f64,
}

impl Default for DirectionalMask {
    fn default() -> Self {
        Self { flat_deg: 20.0, floor_deg: 60.0, floor_db: 16.0 }
    }
}

impl DirectionalMask {
    /// Attenuation (dB, >= 0) at `angle_deg` off boresight.
    pub fn discrimination(&self, angle_deg: f64) -> f64 {
        let a = angle_deg.abs();
        if a <= self.flat_deg {
            0.0
        } else if a >= self.floor_deg {
            self.floor_db
        } else {
            self.floor_db * (a - self.flat_deg) / (self.floor_deg - self.flat_deg)
        }
    }

    /// Attenuation towards `tx` for a receiver at `user` pointed at `boresight`.
    pub fn towards(&self, user: &Point, boresight: &Point, tx: &Point) -> f64 {
        let (ax, ay) = (boresight.x - user.x, boresight.y - user.y);
        let (bx, by) = (tx.x - user.x, tx.y - user.y);
        if (ax == 0.0 && ay == 0.0) || (bx == 0.0 && by == 0.0) {
            return 0.0;
        }
        let angle = (ax * by - ay * bx).atan2(ax * bx + ay * by).to_degrees();
        self.discrimination(angle)
    }
}

/// Break-down of the propagation loss `q_i` of one link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkLoss {
    pub path_loss: f64,
    pub shadowing: f64,
    pub antenna_gain_tx: f64,
    /// Receive gain after directional discrimination.
    pub antenna_gain_rx: f64,
    pub wall_loss: f64,
    /// Linear loss factor: received power is `P / total_q`.
    pub total_q: f64,
}

impl LinkLoss {
    pub fn total_db(&self) -> f64 {
        self.path_loss + self.shadowing - self.antenna_gain_tx - self.antenna_gain_rx + self.wall_loss
    }
}

/// Loss between `tx_site` and a receiver at `user`.
///
/// `boresight` is where the receiving antenna points; it only matters for
/// [`RxPattern::DirectionalMask`].
pub fn link_q(
    tx_site: &Point,
    user: &Point,
    scenario: &Scenario,
    shadowing_db: f64,
    boresight: Option<&Point>,
) -> LinkLoss {
    let discrimination = match (scenario.rx_pattern, boresight) {
        (RxPattern::DirectionalMask, Some(b)) => DirectionalMask::default().towards(user, b, tx_site),
        _ => 0.0,
    };
    let mut l = LinkLoss {
        path_loss: path_loss(tx_site.distance(user), scenario),
        shadowing: shadowing_db,
        antenna_gain_tx: scenario.bs_antenna_gain,
        antenna_gain_rx: scenario.rx_antenna_gain - discrimination,
        wall_loss: scenario.wall_loss,
        total_q: 0.0,
    };
    l.total_q = db_to_linear(l.total_db());
    l
}

/// Receiver noise power in W on the 20 MHz reference bandwidth.
pub fn noise_power(scenario: &Scenario) -> f64 {
    db_to_linear(scenario.noise_floor - 30.0)
}

/// Precomputed per-scenario constants for fast received-power evaluation.
#[derive(Debug, Clone, Copy)]
pub struct LinkBudget {
    /// Site transmit power plus all distance-independent gains and losses, dBW.
    pub base_dbw: f64,
    pub intercept: f64,
    pub slope: f64,
    pub noise_w: f64,
    pub mask: Option<DirectionalMask>,
}

impl LinkBudget {
    pub fn new(scenario: &Scenario) -> Self {
        let (intercept, slope) = path_loss_coefficients(
            scenario.path_loss_model,
            scenario.carrier_freq,
            scenario.bs_height,
            scenario.rx_height,
        );
        Self {
            base_dbw: scenario.total_tx_power_dbm() - 30.0 + scenario.bs_antenna_gain + scenario.rx_antenna_gain
                - scenario.wall_loss,
            intercept,
            slope,
            noise_w: noise_power(scenario),
            mask: match scenario.rx_pattern {
                RxPattern::DirectionalMask => Some(DirectionalMask::default()),
                RxPattern::Isotropic => None,
            },
        }
    }

    /// Received power (W) over distance `d` metres with a shadowing draw
    /// and receive discrimination, both in dB.
    #[inline]
    pub fn rx_power_w(&self, d: f64, shadowing_db: f64, discrimination_db: f64) -> f64 {
        let pl = self.intercept + self.slope * (d.max(MIN_DISTANCE_M) / 1000.0).log10();
        db_to_linear(self.base_dbw - pl - shadowing_db - discrimination_db)
    }

    #[inline]
    pub fn discrimination(&self, user: &Point, boresight: &Point, tx: &Point) -> f64 {
        self.mask.map_or(0.0, |m| m.towards(user, boresight, tx))
    }
}
