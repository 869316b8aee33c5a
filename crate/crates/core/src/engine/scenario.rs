use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::rng::{derive_stream, Purpose};
use crate::agents::{generate_schedule, PwdParams, Schedule, ScheduleError, WatchConfig};
use crate::environment::{GridMap, MapError, Role};

pub const DEFAULT_HORIZON: u64 = 10_000;
pub const DEFAULT_RADIUS: f64 = 5.0;
pub const DEFAULT_APPOINTMENTS: usize = 6;
pub const DEFAULT_APPOINTMENT_DURATION: u64 = 120;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScenarioError {
    #[error("InvalidScenario: {}", .0.join("; "))]
    Invalid(Vec<String>),
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
}

impl ScenarioError {
    /// One line per violation.
    pub fn lines(&self) -> Vec<String> {
        match self {
            ScenarioError::Invalid(v) => v.clone(),
            other => vec![other.to_string()],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PwdConfig {
    pub home: String,
    pub schedule: Schedule,
    pub params: PwdParams,
    pub watch: WatchConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NurseConfig {
    pub base: String,
    pub radius: f64,
}

/// Everything one run needs. Resident and nurse ids are roster indices.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub map: Arc<GridMap>,
    pub pwds: Vec<PwdConfig>,
    pub nurses: Vec<NurseConfig>,
    pub horizon: u64,
    pub seed: u64,
}

fn check_probability(errors: &mut Vec<String>, who: &str, name: &str, p: f64) {
    if !(0.0..=1.0).contains(&p) {
        errors.push(format!("{who}: {name}={p} is outside [0, 1]"));
    }
}

impl Scenario {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        let map = &self.map;
        let mut errors = Vec::new();
        if self.horizon == 0 {
            errors.push("horizon must be positive".to_string());
        }
        if map.labels_with_role(Role::NurseBase).is_empty() {
            errors.push(
                MapError::MissingRole { label: "<any>".into(), role: Role::NurseBase }.to_string(),
            );
        }
        for (i, pwd) in self.pwds.iter().enumerate() {
            let who = format!("pwd:{i}");
            if map.role_of(&pwd.home) != Some(Role::PwdHome) {
                errors.push(format!("{who}: home '{}' is not a pwd_home label", pwd.home));
            }
            let p = &pwd.params;
            check_probability(&mut errors, &who, "p_d", p.p_d);
            check_probability(&mut errors, &who, "p_i", p.p_i);
            check_probability(&mut errors, &who, "p_noise", p.p_noise);
            check_probability(&mut errors, &who, "p_forget", p.p_forget);
            check_probability(&mut errors, &who, "p_detect", pwd.watch.p_detect);
            if pwd.watch.intervention_interval == 0 {
                errors.push(format!("{who}: intervention_interval must be at least 1"));
            }
            self.check_schedule(&mut errors, &who, pwd);
        }
        for (i, nurse) in self.nurses.iter().enumerate() {
            if map.role_of(&nurse.base) != Some(Role::NurseBase) {
                errors.push(format!("nurse:{i}: base '{}' is not a nurse_base label", nurse.base));
            }
            if !(nurse.radius.is_finite() && nurse.radius >= 0.0) {
                errors.push(format!("nurse:{i}: radius must be a non-negative number"));
            }
        }
        if errors.is_empty() {
            Ok(())
        } else {
            Err(ScenarioError::Invalid(errors))
        }
    }

    /// Appointments must not overlap once the walk there and back is added,
    /// and each must start and finish its dwell inside the horizon.
    fn check_schedule(&self, errors: &mut Vec<String>, who: &str, pwd: &PwdConfig) {
        let map = &self.map;
        let home = map.cells_of(&pwd.home).and_then(|c| c.first().copied());
        let mut busy_until = 0u64;
        for (k, appt) in pwd.schedule.appointments().iter().enumerate() {
            if map.role_of(&appt.location) != Some(Role::AppointmentSite) {
                errors.push(format!(
                    "{who}: appointment {k} location '{}' is not an appointment_site label",
                    appt.location
                ));
                continue;
            }
            if appt.start + appt.duration > self.horizon {
                errors.push(format!("{who}: appointment {k} ends after the horizon"));
            }
            if appt.start < busy_until {
                errors.push(format!(
                    "{who}: appointment {k} starts at {} before the previous one is over at {busy_until}",
                    appt.start
                ));
            }
            let travel = match home {
                Some(h) => {
                    let out = map.distance_to_label(h, &appt.location).unwrap_or(0);
                    let back = map.cells_of(&appt.location)
                        .into_iter()
                        .flatten()
                        .filter_map(|&c| map.distance(c, h))
                        .min()
                        .unwrap_or(0);
                    u64::from(out) + u64::from(back)
                }
                None => 0,
            };
            busy_until = appt.start + appt.duration + travel;
        }
    }
}

/// Scenario without schedules: schedules are drawn per replication.
#[derive(Debug, Clone)]
pub struct ScenarioTemplate {
    pub map: Arc<GridMap>,
    pub pwds: Vec<PwdTemplate>,
    pub nurses: Vec<NurseConfig>,
    pub watch: WatchConfig,
    pub horizon: u64,
    pub seed: u64,
    pub schedule: SchedulePolicy,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PwdTemplate {
    pub home: String,
    pub params: PwdParams,
    /// Fixed appointments; drawn from the map when absent.
    pub schedule: Option<Schedule>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SchedulePolicy {
    pub appointments: usize,
    pub duration: u64,
}

impl Default for SchedulePolicy {
    fn default() -> Self {
        Self { appointments: DEFAULT_APPOINTMENTS, duration: DEFAULT_APPOINTMENT_DURATION }
    }
}

impl ScenarioTemplate {
    /// One schedule per resident, drawn from streams keyed by `key`.
    pub fn schedules(&self, key: u64) -> Result<Vec<Schedule>, ScenarioError> {
        self.pwds
            .iter()
            .enumerate()
            .map(|(i, pwd)| match &pwd.schedule {
                Some(s) => Ok(s.clone()),
                None => {
                    let mut stream = derive_stream(key, i as u64, Purpose::Schedule);
                    Ok(generate_schedule(
                        &self.map,
                        self.schedule.appointments,
                        self.schedule.duration,
                        self.horizon,
                        &mut stream,
                    )?)
                }
            })
            .collect()
    }

    pub fn instantiate(&self, schedules: Vec<Schedule>, seed: u64) -> Scenario {
        let pwds = self
            .pwds
            .iter()
            .zip(schedules)
            .map(|(t, schedule)| PwdConfig {
                home: t.home.clone(),
                schedule,
                params: t.params,
                watch: self.watch,
            })
            .collect();
        Scenario {
            map: Arc::clone(&self.map),
            pwds,
            nurses: self.nurses.clone(),
            horizon: self.horizon,
            seed,
        }
    }

    /// Schedules and dynamics both keyed by `seed`.
    pub fn build(&self, seed: u64) -> Result<Scenario, ScenarioError> {
        let scenario = self.instantiate(self.schedules(seed)?, seed);
        scenario.validate()?;
        Ok(scenario)
    }
}
