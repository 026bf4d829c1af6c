//! Key/value configuration files.
//!
//! The format is TOML restricted to scalar keys grouped under section
//! headers:
//!
//! ```text
//! preset = "rural"
//!
//! [scenario]
//! isd = 8000
//!
//! [efficiency.unicast]
//! beta_eff = 0.5
//! ```
//!
//! Every key is optional. Missing keys fall back to the preset named by
//! `preset` (or by `scenario.morphology`, or rural). The efficiency
//! sections default to the table values for the final antenna counts.
//! Overriding `noise_figure` without `noise_floor` re-derives the floor
//! from the thermal density.

use std::path::Path;

use serde::Serialize;
use toml::{Table, Value};

use crate::error::{Error, Result};
use crate::scenario::{
    thermal_noise_floor_dbm, Bundle, EfficiencyProfiles, Morphology, Numerics, Scenario, ServiceConfig,
};

const SECTIONS: [&str; 4] = ["scenario", "service", "numerics", "efficiency"];

pub fn load_scenario(path: impl AsRef<Path>) -> Result<Bundle> {
    let path = path.as_ref();
    let text =
        std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.display().to_string(), source })?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<Bundle> {
    let user: Table = text.parse().map_err(|e: toml::de::Error| Error::Parse {
        line: e.span().map(|s| line_of(text, s.start)).unwrap_or(1),
        message: e.message().to_string(),
    })?;

    for key in user.keys() {
        if key != "preset" && !SECTIONS.contains(&key.as_str()) {
            return Err(unknown_key(text, key));
        }
    }

    let morphology = match user.get("preset") {
        Some(Value::String(s)) => s.parse::<Morphology>()?,
        Some(_) => return Err(parse_err(text, "preset", "preset must be a string")),
        None => match user.get("scenario").and_then(|s| s.get("morphology")) {
            Some(Value::String(s)) => s.parse::<Morphology>()?,
            _ => Morphology::Rural,
        },
    };
    let base = Bundle::preset(morphology);

    let mut scenario: Scenario = overlay(text, &base.scenario, user.get("scenario"))?;
    let set = |key: &str| user.get("scenario").and_then(|s| s.get(key)).is_some();
    if set("noise_figure") && !set("noise_floor") {
        scenario.noise_floor = thermal_noise_floor_dbm(scenario.noise_figure);
    }
    let service: ServiceConfig = overlay(text, &base.service, user.get("service"))?;
    let numerics: Numerics = overlay(text, &base.numerics, user.get("numerics"))?;
    let table_profiles = EfficiencyProfiles::table(&scenario);
    let efficiency: EfficiencyProfiles = overlay(text, &table_profiles, user.get("efficiency"))?;

    let bundle = Bundle { scenario, service, numerics, efficiency };
    bundle.validate()?;
    Ok(bundle)
}

#[derive(Serialize)]
struct ConfigFile<'a> {
    preset: Morphology,
    scenario: &'a Scenario,
    service: &'a ServiceConfig,
    numerics: &'a Numerics,
    efficiency: &'a EfficiencyProfiles,
}

impl Bundle {
    /// Serialises every parameter; loading the result reproduces `self`.
    pub fn to_config_string(&self) -> String {
        let file = ConfigFile {
            preset: self.scenario.morphology,
            scenario: &self.scenario,
            service: &self.service,
            numerics: &self.numerics,
            efficiency: &self.efficiency,
        };
        toml::to_string(&file).expect("bundle is always representable as TOML")
    }
}

fn overlay<T>(text: &str, base: &T, user: Option<&Value>) -> Result<T>
where
    T: Serialize + serde::de::DeserializeOwned,
{
    let mut merged = Table::try_from(base).expect("config structs serialise to tables");
    if let Some(user) = user {
        let Value::Table(user) = user else {
            return Err(Error::Parse { line: 1, message: "expected a section".into() });
        };
        merge(text, &mut merged, user)?;
    }
    merged.try_into().map_err(|e: toml::de::Error| Error::Parse { line: 1, message: e.message().to_string() })
}

fn merge(text: &str, base: &mut Table, user: &Table) -> Result<()> {
    for (key, value) in user {
        match (base.get_mut(key), value) {
            (None, _) => return Err(unknown_key(text, key)),
            (Some(Value::Table(b)), Value::Table(u)) => merge(text, b, u)?,
            (Some(Value::Table(_)), _) => return Err(parse_err(text, key, &format!("'{key}' must be a section"))),
            (Some(slot), v) => {
                if !same_kind(slot, v) {
                    return Err(parse_err(text, key, &format!("'{key}' has the wrong type")));
                }
                *slot = v.clone();
            }
        }
    }
    Ok(())
}

fn same_kind(base: &Value, user: &Value) -> bool {
    matches!(
        (base, user),
        (Value::Float(_), Value::Float(_) | Value::Integer(_))
            | (Value::Integer(_), Value::Integer(_))
            | (Value::String(_), Value::String(_))
            | (Value::Boolean(_), Value::Boolean(_))
    )
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

fn key_line(text: &str, key: &str) -> usize {
    text.lines()
        .position(|l| {
            let l = l.trim_start();
            l.strip_prefix(key).is_some_and(|rest| rest.trim_start().starts_with('='))
                || l.trim_start_matches('[').starts_with(key)
        })
        .map_or(1, |i| i + 1)
}

fn unknown_key(text: &str, key: &str) -> Error {
    parse_err(text, key, &format!("unknown key '{key}'"))
}

fn parse_err(text: &str, key: &str, message: &str) -> Error {
    Error::Parse { line: key_line(text, key), message: message.to_string() }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn override_single_key() {
        let b = parse_config("preset = \"rural\"\n[scenario]\nisd = 8000\n").unwrap();
        let mut expected = Bundle::preset(Morphology::Rural);
        expected.scenario.isd = 8000.0;
        assert_eq!(b, expected);
    }

    #[test]
    fn empty_file_with_preset_is_exact_preset() {
        let b = parse_config("preset = \"urban\"\n").unwrap();
        assert_eq!(b, Bundle::preset(Morphology::Urban));
        assert_eq!(parse_config("").unwrap(), Bundle::preset(Morphology::Rural));
    }

    #[test]
    fn invalid_cp_is_rejected() {
        let e = parse_config("[scenario]\nt_cp = 200.0\n").unwrap_err();
        assert!(matches!(e, Error::Invalid(ref m) if m.contains("t_cp")), "{e}");
    }

    #[test]
    fn syntax_error_reports_line() {
        let e = parse_config("preset = \"rural\"\n\n[scenario]\nisd = = 3\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 4, .. }), "{e:?}");
    }

    #[test]
    fn unknown_key_reports_line() {
        let e = parse_config("preset = \"rural\"\n[scenario]\nisd = 1\nfoo = 2\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 4, .. }), "{e:?}");
    }

    #[test]
    fn noise_figure_override_moves_floor() {
        let b = parse_config("[scenario]\nnoise_figure = 0.0\n").unwrap();
        assert!((b.scenario.noise_floor + 101.0).abs() < 0.02);
        let b = parse_config("[scenario]\nnoise_figure = 0.0\nnoise_floor = -100.8\n").unwrap();
        assert_eq!(b.scenario.noise_floor, -100.8);
    }

    #[test]
    fn antenna_override_rederives_efficiency() {
        let b = parse_config("preset = \"urban\"\n[scenario]\nrx_antenna_count = 4\n").unwrap();
        assert!((b.efficiency.unicast.beta_eff - 2.36).abs() < 1e-12);
        assert_eq!(b.efficiency.broadcast.xi_eff, 8.0);
    }

    #[test]
    fn explicit_efficiency_wins() {
        let b = parse_config("[efficiency.broadcast]\nbeta_eff = 0.5\n").unwrap();
        assert_eq!(b.efficiency.broadcast.beta_eff, 0.5);
        assert_eq!(b.efficiency.unicast.beta_eff, 0.5);
    }

    #[test]
    fn round_trip() {
        for m in [Morphology::Rural, Morphology::Urban] {
            let mut b = Bundle::preset(m).with_antennas(8, 4);
            b.efficiency.unicast.fading_margin = 3.0;
            b.numerics.samples = 12_345;
            let text = b.to_config_string();
            assert_eq!(parse_config(&text).unwrap(), b, "{text}");
        }
    }
}
