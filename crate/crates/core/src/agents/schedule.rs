use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::rng::Stream;
use crate::environment::{GridMap, Role};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Appointment {
    /// Appointment-site label.
    pub location: String,
    /// Tick at which the resident should set off.
    pub start: u64,
    /// Ticks spent at the site after arriving.
    pub duration: u64,
}

/// A resident's appointments in start order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schedule {
    appointments: Vec<Appointment>,
}

impl Schedule {
    pub fn new(mut appointments: Vec<Appointment>) -> Self {
        appointments.sort_by_key(|a| a.start);
        Self { appointments }
    }

    pub fn appointments(&self) -> &[Appointment] {
        &self.appointments
    }

    pub fn get(&self, index: usize) -> Option<&Appointment> {
        self.appointments.get(index)
    }

    pub fn len(&self) -> usize {
        self.appointments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.appointments.is_empty()
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScheduleError {
    #[error("InsufficientSites: {needed} unique appointment sites needed, map has {available}")]
    InsufficientSites { needed: usize, available: usize },
    #[error("horizon {horizon} is too short for {count} appointments")]
    HorizonTooShort { horizon: u64, count: usize },
}

/// Draws `count` distinct appointment sites and spreads their start ticks
/// evenly over the horizon with a uniform jitter of up to a tenth of the
/// spacing either way.
pub fn generate_schedule(
    map: &GridMap,
    count: usize,
    duration: u64,
    horizon: u64,
    stream: &mut Stream,
) -> Result<Schedule, ScheduleError> {
    let mut sites = map.labels_with_role(Role::AppointmentSite);
    if sites.len() < count {
        return Err(ScheduleError::InsufficientSites { needed: count, available: sites.len() });
    }
    if count == 0 {
        return Ok(Schedule::default());
    }
    let spacing = horizon / (count as u64 + 1);
    if spacing == 0 {
        return Err(ScheduleError::HorizonTooShort { horizon, count });
    }
    // partial Fisher-Yates: the first `count` entries become the sample
    for i in 0..count {
        let j = i + stream.below((sites.len() - i) as u64) as usize;
        sites.swap(i, j);
    }
    let jitter = (spacing / 10) as i64;
    let appointments = sites[..count]
        .iter()
        .enumerate()
        .map(|(i, site)| {
            let nominal = (spacing * (i as u64 + 1)) as i64;
            Appointment {
                location: (*site).to_string(),
                start: (nominal + stream.between(-jitter, jitter)) as u64,
                duration,
            }
        })
        .collect();
    Ok(Schedule::new(appointments))
}
