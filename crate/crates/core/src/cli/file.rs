//! TOML scenario files.
//!
//! ```toml
//! map = "demo.map"          # relative to this file
//! horizon = 10000
//! seed = 7
//!
//! [legend]
//! A = { label = "room_a", role = "pwd_home" }
//! N = { label = "station", role = "nurse_base" }
//! D = { label = "dining", role = "appointment_site" }
//!
//! [watch]                   # optional; defaults shown
//! enabled = true
//! p_detect = 0.5
//! n_help = 1
//! intervention_interval = 1
//!
//! [schedule]                # drawn appointments per resident
//! appointments = 6
//! duration = 120
//!
//! [[pwd]]
//! home = "room_a"
//! p_d = 0.01                # p_i, p_noise, p_forget default to 0.2, 0.1, 0
//! # appointments = [{ location = "dining", start = 500, duration = 120 }]
//!
//! [[nurse]]
//! base = "station"
//! radius = 5.0
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::Deserialize;

use super::CliError;
use crate::agents::{Appointment, PwdParams, Schedule, WatchConfig};
use crate::engine::{
    NurseConfig, PwdTemplate, ScenarioTemplate, SchedulePolicy, DEFAULT_APPOINTMENTS,
    DEFAULT_APPOINTMENT_DURATION, DEFAULT_HORIZON, DEFAULT_RADIUS,
};
use crate::environment::{parse_map, GridMap, Legend, LegendEntry, Role};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub map: PathBuf,
    #[serde(default)]
    pub legend: BTreeMap<String, LegendSpec>,
    #[serde(default, rename = "pwd")]
    pub pwds: Vec<PwdSpec>,
    #[serde(default, rename = "nurse")]
    pub nurses: Vec<NurseSpec>,
    #[serde(default)]
    pub watch: WatchConfig,
    #[serde(default)]
    pub schedule: ScheduleSpec,
    #[serde(default = "default_horizon")]
    pub horizon: u64,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LegendSpec {
    pub label: String,
    pub role: Role,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PwdSpec {
    pub home: String,
    pub p_d: Option<f64>,
    pub p_i: Option<f64>,
    pub p_noise: Option<f64>,
    pub p_forget: Option<f64>,
    /// Fixed appointments instead of drawn ones.
    pub appointments: Option<Vec<Appointment>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NurseSpec {
    pub base: String,
    #[serde(default = "default_radius")]
    pub radius: f64,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScheduleSpec {
    pub appointments: usize,
    pub duration: u64,
}

impl Default for ScheduleSpec {
    fn default() -> Self {
        Self { appointments: DEFAULT_APPOINTMENTS, duration: DEFAULT_APPOINTMENT_DURATION }
    }
}

fn default_horizon() -> u64 {
    DEFAULT_HORIZON
}

fn default_radius() -> f64 {
    DEFAULT_RADIUS
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// 1-based line of a byte offset.
fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

impl ScenarioFile {
    pub fn parse(text: &str, origin: &Path) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| {
            let line = e.span().map_or(0, |s| line_of(text, s.start));
            CliError::Invalid(vec![format!(
                "{}:{line}: {}",
                origin.display(),
                e.message().replace('\n', " ")
            )])
        })
    }

    pub fn legend(&self) -> Result<Legend, CliError> {
        let mut legend = Legend::new();
        let mut errors = Vec::new();
        for (key, spec) in &self.legend {
            let mut chars = key.chars();
            match (chars.next(), chars.next()) {
                (Some(c), None) => {
                    legend.insert(c, LegendEntry::new(spec.label.clone(), spec.role));
                }
                _ => errors.push(format!("legend key '{key}' must be a single character")),
            }
        }
        if errors.is_empty() {
            Ok(legend)
        } else {
            Err(CliError::Invalid(errors))
        }
    }

    pub fn template(&self, map: GridMap) -> ScenarioTemplate {
        let defaults = PwdParams::default();
        let pwds = self
            .pwds
            .iter()
            .map(|p| PwdTemplate {
                home: p.home.clone(),
                params: PwdParams {
                    p_d: p.p_d.unwrap_or(defaults.p_d),
                    p_i: p.p_i.unwrap_or(defaults.p_i),
                    p_noise: p.p_noise.unwrap_or(defaults.p_noise),
                    p_forget: p.p_forget.unwrap_or(defaults.p_forget),
                },
                schedule: p.appointments.clone().map(Schedule::new),
            })
            .collect();
        let nurses = self
            .nurses
            .iter()
            .map(|n| NurseConfig { base: n.base.clone(), radius: n.radius })
            .collect();
        ScenarioTemplate {
            map: Arc::new(map),
            pwds,
            nurses,
            watch: self.watch,
            horizon: self.horizon,
            seed: self.seed,
            schedule: SchedulePolicy {
                appointments: self.schedule.appointments,
                duration: self.schedule.duration,
            },
        }
    }
}

/// Reads a scenario file and its map. `map_override` replaces the map path
/// named in the file.
pub fn load_template(path: &Path, map_override: Option<&Path>) -> Result<ScenarioTemplate, CliError> {
    let text = read(path)?;
    let file = ScenarioFile::parse(&text, path)?;
    let legend = file.legend()?;
    let map_path = match map_override {
        Some(p) => p.to_path_buf(),
        None => path.parent().unwrap_or(Path::new(".")).join(&file.map),
    };
    let map_text = read(&map_path)?;
    let map = parse_map(&map_text, &legend)
        .map_err(|e| CliError::Invalid(vec![format!("{}: {e}", map_path.display())]))?;
    Ok(file.template(map))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_fill_in() {
        let text = "map = \"m.map\"\n[[pwd]]\nhome = \"a\"\n[[nurse]]\nbase = \"n\"\n";
        let f = ScenarioFile::parse(text, Path::new("s.toml")).unwrap();
        assert_eq!(f.horizon, DEFAULT_HORIZON);
        assert_eq!(f.nurses[0].radius, DEFAULT_RADIUS);
        assert_eq!(f.watch, WatchConfig::default());
        assert_eq!(f.pwds[0].p_i, None);
    }

    #[test]
    fn unknown_field_names_the_line() {
        let text = "map = \"m.map\"\n\n[watch]\np_detekt = 0.5\n";
        let Err(CliError::Invalid(lines)) = ScenarioFile::parse(text, Path::new("s.toml")) else {
            panic!("expected a parse error");
        };
        assert!(lines[0].starts_with("s.toml:4:"), "{}", lines[0]);
        assert!(lines[0].contains("p_detekt"));
    }

    #[test]
    fn legend_keys_are_single_glyphs() {
        let text = "map = \"m.map\"\n[legend]\nAB = { label = \"x\", role = \"pwd_home\" }\n";
        let f = ScenarioFile::parse(text, Path::new("s.toml")).unwrap();
        assert!(f.legend().is_err());
    }
}
