//! Autonomy, nurse efficiency and travel efficiency, computed from an
//! [`EventLog`].
//!
//! - autonomy = (1 - t_guided / t_total) x 100
//! - efficiency = t_inactive / t_total x 100
//! - travel efficiency = t_nominal / t_taken x 100, averaged over completed trips
//!
//! `t_total` is the full horizon. Values are kept at full precision; rounding
//! to two decimals happens only when a report is written out.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::agents::{NurseId, PwdId};
use crate::engine::{EventKind, EventLog, ModeTag, StateTag};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MetricsError {
    #[error("UnknownAgent: {0} is not in the log")]
    UnknownAgent(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TripRecord {
    pub pwd: PwdId,
    pub trip: u32,
    pub t_nominal: u32,
    /// `None` while the trip is still open at the end of the run.
    pub t_taken: Option<u64>,
}

impl TripRecord {
    pub fn completed(&self) -> bool {
        self.t_taken.is_some()
    }

    /// Percentage for a completed trip; a zero-length trip counts as perfect.
    pub fn travel_efficiency(&self) -> Option<f64> {
        let taken = self.t_taken?;
        if taken == 0 {
            return Some(100.0);
        }
        Some(f64::from(self.t_nominal) / taken as f64 * 100.0)
    }
}

fn percent(part: u64, whole: u64) -> f64 {
    part as f64 * 100.0 / whole as f64
}

pub fn autonomy(log: &EventLog, pwd: PwdId) -> Result<f64, MetricsError> {
    let guided = log
        .pwd_ticks(pwd, ModeTag::Guided)
        .ok_or_else(|| MetricsError::UnknownAgent(pwd.to_string()))?;
    Ok(percent(log.horizon - guided, log.horizon))
}

pub fn nurse_efficiency(log: &EventLog, nurse: NurseId) -> Result<f64, MetricsError> {
    let inactive = log
        .nurse_ticks(nurse, StateTag::Inactive)
        .ok_or_else(|| MetricsError::UnknownAgent(nurse.to_string()))?;
    Ok(percent(inactive, log.horizon))
}

/// Every trip the resident started, in order.
pub fn trip_records(log: &EventLog, pwd: PwdId) -> Result<Vec<TripRecord>, MetricsError> {
    if pwd.index() >= log.pwd_count() {
        return Err(MetricsError::UnknownAgent(pwd.to_string()));
    }
    let mut trips: BTreeMap<u32, TripRecord> = BTreeMap::new();
    for e in log.events_for(pwd) {
        match e.kind {
            EventKind::TripStart { trip, nominal, .. } => {
                trips.insert(trip, TripRecord { pwd, trip, t_nominal: nominal, t_taken: None });
            }
            EventKind::TripEnd { trip, taken, .. } => {
                if let Some(r) = trips.get_mut(&trip) {
                    r.t_taken = Some(taken);
                }
            }
            _ => {}
        }
    }
    Ok(trips.into_values().collect())
}

/// Unweighted mean over completed trips; `None` when no trip was completed.
pub fn travel_efficiency(log: &EventLog, pwd: PwdId) -> Result<Option<f64>, MetricsError> {
    let values: Vec<f64> =
        trip_records(log, pwd)?.iter().filter_map(TripRecord::travel_efficiency).collect();
    if values.is_empty() {
        return Ok(None);
    }
    Ok(Some(values.iter().sum::<f64>() / values.len() as f64))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PwdMetrics {
    pub id: PwdId,
    pub autonomy: f64,
    pub t_guided: u64,
    pub travel_efficiency: Option<f64>,
    pub completed_trips: usize,
    pub incomplete_trips: usize,
    /// Disorientation episodes.
    pub episodes: usize,
    pub calls: usize,
    pub guidance_episodes: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NurseMetrics {
    pub id: NurseId,
    pub efficiency: f64,
    pub t_inactive: u64,
    pub responses: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricReport {
    pub seed: u64,
    pub t_total: u64,
    pub pwds: Vec<PwdMetrics>,
    pub nurses: Vec<NurseMetrics>,
}

impl MetricReport {
    pub fn episodes(&self) -> usize {
        self.pwds.iter().map(|p| p.episodes).sum()
    }

    pub fn calls(&self) -> usize {
        self.pwds.iter().map(|p| p.calls).sum()
    }

    /// JSON with percentages rounded to two decimals.
    pub fn to_json(&self) -> String {
        let round = |v: f64| (v * 100.0).round() / 100.0;
        let pwds: Vec<_> = self
            .pwds
            .iter()
            .map(|p| {
                serde_json::json!({
                    "id": p.id.to_string(),
                    "autonomy": round(p.autonomy),
                    "t_guided": p.t_guided,
                    "travel_efficiency": p.travel_efficiency.map(round),
                    "completed_trips": p.completed_trips,
                    "incomplete_trips": p.incomplete_trips,
                    "episodes": p.episodes,
                    "calls": p.calls,
                    "guidance_episodes": p.guidance_episodes,
                })
            })
            .collect();
        let nurses: Vec<_> = self
            .nurses
            .iter()
            .map(|n| {
                serde_json::json!({
                    "id": n.id.to_string(),
                    "efficiency": round(n.efficiency),
                    "t_inactive": n.t_inactive,
                    "responses": n.responses,
                })
            })
            .collect();
        let doc = serde_json::json!({
            "seed": self.seed,
            "t_total": self.t_total,
            "episodes": self.episodes(),
            "calls": self.calls(),
            "pwds": pwds,
            "nurses": nurses,
        });
        let mut text = serde_json::to_string_pretty(&doc).expect("report is valid json");
        text.push('\n');
        text
    }
}

/// All metrics for all agents in the log.
pub fn build_report(log: &EventLog) -> MetricReport {
    let mut pwds = Vec::with_capacity(log.pwd_count());
    for i in 0..log.pwd_count() {
        let id = PwdId(i as u32);
        let trips = trip_records(log, id).expect("pwd in range");
        let completed = trips.iter().filter(|t| t.completed()).count();
        let count = |name: &str| log.events_for(id).filter(|e| e.kind.name() == name).count();
        pwds.push(PwdMetrics {
            id,
            autonomy: autonomy(log, id).expect("pwd in range"),
            t_guided: log.pwd_ticks(id, ModeTag::Guided).unwrap_or(0),
            travel_efficiency: travel_efficiency(log, id).expect("pwd in range"),
            completed_trips: completed,
            incomplete_trips: trips.len() - completed,
            episodes: count("DisorientationStart"),
            calls: count("NurseCalled"),
            guidance_episodes: count("GuidanceStart"),
        });
    }
    let nurses = (0..log.nurse_count())
        .map(|i| {
            let id = NurseId(i as u32);
            NurseMetrics {
                id,
                efficiency: nurse_efficiency(log, id).expect("nurse in range"),
                t_inactive: log.nurse_ticks(id, StateTag::Inactive).unwrap_or(0),
                responses: log
                    .events
                    .iter()
                    .filter(|e| e.nurse() == Some(id) && e.kind.name() == "ResponseStart")
                    .count(),
            }
        })
        .collect();
    MetricReport { seed: log.seed, t_total: log.horizon, pwds, nurses }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{Event, Phase, Subject};

    fn log_with(horizon: u64, guided: u64, inactive: u64) -> EventLog {
        let mut log = EventLog::new(horizon, 0, 1, 1);
        let g = guided as usize;
        log.pwd_modes[0] = [vec![ModeTag::Guided; g], vec![ModeTag::Idle; horizon as usize - g]].concat();
        let n = inactive as usize;
        log.nurse_states[0] =
            [vec![StateTag::Inactive; n], vec![StateTag::Guiding; horizon as usize - n]].concat();
        log
    }

    #[test]
    fn autonomy_values() {
        assert_eq!(autonomy(&log_with(1000, 0, 0), PwdId(0)).unwrap(), 100.0);
        assert_eq!(autonomy(&log_with(1000, 1000, 0), PwdId(0)).unwrap(), 0.0);
        assert_eq!(autonomy(&log_with(1000, 250, 0), PwdId(0)).unwrap(), 75.0);
        assert!(matches!(autonomy(&log_with(10, 0, 0), PwdId(1)), Err(MetricsError::UnknownAgent(_))));
    }

    #[test]
    fn efficiency_values() {
        assert_eq!(nurse_efficiency(&log_with(400, 0, 400), NurseId(0)).unwrap(), 100.0);
        assert_eq!(nurse_efficiency(&log_with(400, 0, 200), NurseId(0)).unwrap(), 50.0);
        assert!(nurse_efficiency(&log_with(400, 0, 0), NurseId(2)).is_err());
    }

    fn trip(log: &mut EventLog, trip: u32, start: u64, end: Option<u64>, nominal: u32) {
        let subject = Subject::Pwd(PwdId(0));
        log.events.push(Event {
            tick: start,
            phase: Phase::Schedule,
            subject,
            kind: EventKind::TripStart {
                trip,
                origin: crate::environment::Position::new(0, 0),
                goal: "x".into(),
                nominal,
            },
        });
        if let Some(end) = end {
            log.events.push(Event {
                tick: end,
                phase: Phase::Schedule,
                subject,
                kind: EventKind::TripEnd { trip, taken: end - start, nominal },
            });
        }
    }

    #[test]
    fn travel_efficiency_values() {
        let mut log = log_with(1000, 0, 1000);
        assert_eq!(travel_efficiency(&log, PwdId(0)).unwrap(), None);
        trip(&mut log, 0, 10, Some(110), 50);
        assert_eq!(travel_efficiency(&log, PwdId(0)).unwrap(), Some(50.0));
        trip(&mut log, 1, 200, Some(220), 20);
        assert_eq!(travel_efficiency(&log, PwdId(0)).unwrap(), Some(75.0));
        // open trips are counted but not averaged
        trip(&mut log, 2, 900, None, 30);
        assert_eq!(travel_efficiency(&log, PwdId(0)).unwrap(), Some(75.0));
        let report = build_report(&log);
        assert_eq!(report.pwds[0].completed_trips, 2);
        assert_eq!(report.pwds[0].incomplete_trips, 1);
    }

    #[test]
    fn perfect_travel() {
        let mut log = log_with(500, 0, 500);
        trip(&mut log, 0, 0, Some(40), 40);
        trip(&mut log, 1, 100, Some(140), 40);
        assert_eq!(travel_efficiency(&log, PwdId(0)).unwrap(), Some(100.0));
    }

    #[test]
    fn idle_world_report() {
        let log = log_with(100, 0, 100);
        let r = build_report(&log);
        assert_eq!(r.pwds[0].autonomy, 100.0);
        assert_eq!(r.nurses[0].efficiency, 100.0);
        assert_eq!(r.pwds[0].travel_efficiency, None);
        assert!(r.to_json().contains("\"travel_efficiency\": null"));
    }
}
