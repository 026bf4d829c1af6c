//! Parameter sweeps and their CSV form.
//!
//! Every point of a sweep uses the same seed, so neighbouring points see the
//! same user positions and shadowing draws.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dimensioning::{dimension, DimensioningResult, Mode};
use crate::error::{Error, Result};
use crate::scenario::{Bundle, Morphology};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    /// Inter-site distance, metres.
    Isd,
    /// DTT household penetration, fraction.
    Penetration,
    /// Programmes added to the catalog.
    ExtraPrograms,
    /// Receive antenna count.
    Antennas,
}

impl Axis {
    pub fn as_str(&self) -> &'static str {
        match self {
            Axis::Isd => "isd_m",
            Axis::Penetration => "penetration",
            Axis::ExtraPrograms => "extra_programs",
            Axis::Antennas => "rx_antennas",
        }
    }

    /// Copy of `bundle` moved to `value` along this axis.
    pub fn apply(&self, bundle: &Bundle, value: f64) -> Bundle {
        let mut b = bundle.clone();
        match self {
            Axis::Isd => b.scenario.isd = value,
            Axis::Penetration => b.scenario.dtt_penetration = value,
            Axis::ExtraPrograms => b.service.extra_programs = value.round() as u32,
            Axis::Antennas => b = b.clone().with_antennas(b.scenario.bs_antenna_count, value.round() as u32),
        }
        b
    }
}

#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub series: String,
    pub axis: Axis,
    pub axis_value: f64,
    pub mode: Mode,
    pub bundle: Bundle,
}

#[derive(Debug, Clone)]
pub struct SweepRow {
    pub series: String,
    pub axis: Axis,
    pub axis_value: f64,
    pub mode: Mode,
    /// Per-point failures are kept in the row; the sweep carries on.
    pub result: std::result::Result<DimensioningResult, String>,
    pub runtime_s: f64,
}

impl SweepRow {
    pub fn status(&self) -> String {
        match &self.result {
            Ok(r) if r.infeasible => "infeasible".into(),
            Ok(_) => "ok".into(),
            Err(e) => format!("error: {}", e.replace([',', '\n'], ";")),
        }
    }
}

/// One point per value of `axis` for a single bundle and mode.
pub fn sweep_points(axis: Axis, values: &[f64], bundle: &Bundle, mode: Mode, series: &str) -> Vec<SweepPoint> {
    values
        .iter()
        .map(|&v| SweepPoint { series: series.to_string(), axis, axis_value: v, mode, bundle: axis.apply(bundle, v) })
        .collect()
}

/// Runs every point in parallel; rows come back in point order.
pub fn run_sweep(points: &[SweepPoint], seed: u64) -> Vec<SweepRow> {
    points
        .par_iter()
        .map(|p| {
            let start = Instant::now();
            let result = dimension(&p.bundle, p.mode, seed).map_err(|e| e.to_string());
            SweepRow {
                series: p.series.clone(),
                axis: p.axis,
                axis_value: p.axis_value,
                mode: p.mode,
                result,
                runtime_s: start.elapsed().as_secs_f64(),
            }
        })
        .collect()
}

/// Sweeps `axis` over `values`.
pub fn sweep(axis: Axis, values: &[f64], bundle: &Bundle, mode: Mode, seed: u64) -> Result<Vec<SweepRow>> {
    if values.is_empty() {
        return Err(Error::Invalid("empty sweep range".into()));
    }
    Ok(run_sweep(&sweep_points(axis, values, bundle, mode, "default"), seed))
}

pub const CSV_HEADER: &str = "series,axis,axis_value,mode,bw_national_mhz,bw_regional_mhz,bw_unicast_mhz,\
bw_required_mhz,bw_saving_mhz,sinr1pct_nat_db,sinr1pct_reg_db,load_x,blocking,status";

fn opt(v: Option<f64>) -> String {
    v.map(|v| format!("{v:.6}")).unwrap_or_default()
}

pub fn to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for row in rows {
        let head = format!("{},{},{},{}", row.series, row.axis.as_str(), row.axis_value, row.mode.as_str());
        let body = match &row.result {
            Ok(r) => format!(
                "{:.6},{:.6},{:.6},{:.6},{:.6},{},{},{},{}",
                r.bw_national_sfn,
                r.bw_regional_sfn,
                r.bw_unicast,
                r.bw_required,
                r.bw_saving,
                opt(r.diagnostics.sinr_1pct_national_db),
                opt(r.diagnostics.sinr_1pct_regional_db),
                opt(r.diagnostics.load_x),
                r.diagnostics.aggregate_blocking.map(|b| format!("{b:.6e}")).unwrap_or_default(),
            ),
            Err(_) => ",,,,,,,,".to_string(),
        };
        out.push_str(&format!("{head},{body},{}\n", row.status()));
    }
    out
}

pub const PRESETS: [&str; 5] = ["fig5", "fig6", "fig7", "fig8", "fig9"];

/// Antenna configurations `(M_T, M_R)` compared in the ISD sweeps.
pub const ANTENNA_SERIES: [(u32, u32); 3] = [(4, 1), (4, 4), (8, 8)];

fn range(start: f64, stop: f64, step: f64) -> Vec<f64> {
    let n = ((stop - start) / step).round() as usize;
    (0..=n).map(|i| start + step * i as f64).collect()
}

/// Named sweeps:
///
/// * `fig5`: rural broadcast-only over ISD 4-16 km, per antenna config;
/// * `fig6`: the same grid in hybrid mode;
/// * `fig7`: urban over ISD 100-1500 m, both modes, per antenna config;
/// * `fig8`: urban at ISD 500 m over DTT penetration, both modes;
/// * `fig9`: urban at ISD 500 m over extra programmes, both modes.
///
/// `customise` is applied to every base bundle (sample counts and the like).
pub fn preset_points(name: &str, customise: impl Fn(&mut Bundle)) -> Result<Vec<SweepPoint>> {
    let base = |m: Morphology, mt: u32, mr: u32| {
        let mut b = Bundle::preset(m).with_antennas(mt, mr);
        customise(&mut b);
        b
    };
    let series = |mt: u32, mr: u32| format!("{mt}x{mr}");
    let mut points = Vec::new();
    match name {
        "fig5" | "fig6" => {
            let mode = if name == "fig5" { Mode::BroadcastOnly } else { Mode::Hybrid };
            let isd = range(4_000.0, 16_000.0, 1_000.0);
            for (mt, mr) in ANTENNA_SERIES {
                points.extend(sweep_points(Axis::Isd, &isd, &base(Morphology::Rural, mt, mr), mode, &series(mt, mr)));
            }
        }
        "fig7" => {
            let isd = range(100.0, 1_500.0, 100.0);
            for mode in [Mode::BroadcastOnly, Mode::Hybrid] {
                for (mt, mr) in ANTENNA_SERIES {
                    points.extend(sweep_points(
                        Axis::Isd,
                        &isd,
                        &base(Morphology::Urban, mt, mr),
                        mode,
                        &series(mt, mr),
                    ));
                }
            }
        }
        "fig8" => {
            let pen = [0.005, 0.01, 0.02, 0.03, 0.04, 0.05, 0.06, 0.08, 0.10, 0.12, 0.15];
            for mode in [Mode::BroadcastOnly, Mode::Hybrid] {
                points.extend(sweep_points(Axis::Penetration, &pen, &base(Morphology::Urban, 4, 1), mode, "4x1"));
            }
        }
        "fig9" => {
            let extra = range(0.0, 40.0, 5.0);
            for mode in [Mode::BroadcastOnly, Mode::Hybrid] {
                points.extend(sweep_points(Axis::ExtraPrograms, &extra, &base(Morphology::Urban, 4, 1), mode, "4x1"));
            }
        }
        other => return Err(Error::Invalid(format!("unknown sweep preset '{other}' (expected one of {PRESETS:?})"))),
    }
    Ok(points)
}
