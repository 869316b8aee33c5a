use serde::{Deserialize, Serialize};

use super::{NurseId, PwdId, Schedule};
use crate::engine::event::{Event, EventKind, Phase, Subject};
use crate::engine::rng::{derive_stream, Purpose, Stream};
use crate::environment::{GridMap, Position, Role};

/// A disoriented resident picks a new wrong destination this often.
pub const FALSE_GOAL_RESAMPLE_TICKS: u64 = 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PwdParams {
    /// Per-tick probability of becoming disoriented while travelling oriented.
    pub p_d: f64,
    /// Probability that one navigation hint reorients the resident.
    pub p_i: f64,
    /// Per-tick probability of not moving while travelling.
    pub p_noise: f64,
    /// Probability of forgetting to set off for an appointment.
    pub p_forget: f64,
}

impl Default for PwdParams {
    fn default() -> Self {
        Self { p_d: 0.0, p_i: 0.2, p_noise: 0.1, p_forget: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Leg {
    Outbound { appointment: usize },
    Return,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trip {
    pub id: u32,
    pub goal: String,
    pub start: u64,
    pub nominal: u32,
    pub leg: Leg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PwdMode {
    Idle,
    Traveling,
    AtAppointment { until: u64 },
    Guided { nurse: NurseId },
}

impl PwdMode {
    pub fn tag(self) -> &'static str {
        match self {
            PwdMode::Idle => "idle",
            PwdMode::Traveling => "traveling",
            PwdMode::AtAppointment { .. } => "at_appointment",
            PwdMode::Guided { .. } => "guided",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Orientation {
    Oriented,
    Disoriented { false_goal: String, since: u64 },
}

#[derive(Debug, Clone)]
struct PwdStreams {
    disorient: Stream,
    noise: Stream,
    false_goal: Stream,
    forget: Stream,
}

/// A resident following a schedule of appointments from a private room.
#[derive(Debug, Clone)]
pub struct PwdAgent {
    pub id: PwdId,
    pub home: String,
    pub schedule: Schedule,
    pub params: PwdParams,
    pub position: Position,
    pub mode: PwdMode,
    pub orientation: Orientation,
    trip: Option<Trip>,
    trips_started: u32,
    next_appointment: usize,
    forgotten: Option<(usize, u64)>,
    reminded: bool,
    streams: PwdStreams,
}

impl PwdAgent {
    pub fn new(
        id: PwdId,
        home: impl Into<String>,
        position: Position,
        schedule: Schedule,
        params: PwdParams,
        seed: u64,
    ) -> Self {
        let key = u64::from(id.0);
        Self {
            id,
            home: home.into(),
            schedule,
            params,
            position,
            mode: PwdMode::Idle,
            orientation: Orientation::Oriented,
            trip: None,
            trips_started: 0,
            next_appointment: 0,
            forgotten: None,
            reminded: false,
            streams: PwdStreams {
                disorient: derive_stream(seed, key, Purpose::Disorient),
                noise: derive_stream(seed, key, Purpose::Noise),
                false_goal: derive_stream(seed, key, Purpose::FalseGoal),
                forget: derive_stream(seed, key, Purpose::Forget),
            },
        }
    }

    pub fn trip(&self) -> Option<&Trip> {
        self.trip.as_ref()
    }

    pub fn is_disoriented(&self) -> bool {
        matches!(self.orientation, Orientation::Disoriented { .. })
    }

    pub fn is_guided(&self) -> bool {
        matches!(self.mode, PwdMode::Guided { .. })
    }

    pub fn guided_by(&self) -> Option<NurseId> {
        match self.mode {
            PwdMode::Guided { nurse } => Some(nurse),
            _ => None,
        }
    }

    /// The appointment the resident forgot to leave for, with the tick it
    /// was due.
    pub fn forgotten(&self) -> Option<(usize, u64)> {
        self.forgotten
    }

    /// A reminder makes the resident set off for the forgotten appointment
    /// at the next scheduling phase.
    pub fn remind(&mut self) {
        if self.forgotten.is_some() {
            self.reminded = true;
        }
    }

    /// A successful navigation hint.
    pub fn reorient(&mut self) {
        self.orientation = Orientation::Oriented;
    }

    /// A nurse has reached the resident and takes over navigation.
    pub fn begin_guidance(&mut self, nurse: NurseId) {
        debug_assert!(self.trip.is_some(), "guidance without a trip");
        self.mode = PwdMode::Guided { nurse };
        self.orientation = Orientation::Oriented;
    }

    /// Phase A: arrival, departures, and disorientation onset.
    pub fn schedule_phase(&mut self, map: &GridMap, tick: u64, events: &mut Vec<Event>) {
        if let Some(trip) = &self.trip {
            if map.has_label(self.position, &trip.goal) {
                self.finish_trip(tick, events);
            }
        }
        match self.mode {
            PwdMode::Idle => self.consider_departure(map, tick, events),
            PwdMode::AtAppointment { until } if tick >= until => {
                let home = self.home.clone();
                self.start_trip(map, home, Leg::Return, tick, events);
            }
            _ => {}
        }
        if self.mode != PwdMode::Traveling {
            return;
        }
        match &self.orientation {
            Orientation::Oriented => {
                if self.streams.disorient.chance(self.params.p_d) {
                    if let Some(false_goal) = self.sample_false_goal(map) {
                        let trip = self.trip.as_ref().map_or(0, |t| t.id);
                        self.emit(tick, events, EventKind::DisorientationStart {
                            trip,
                            false_goal: false_goal.clone(),
                        });
                        self.orientation = Orientation::Disoriented { false_goal, since: tick };
                    }
                }
            }
            Orientation::Disoriented { since, .. } => {
                let since = *since;
                let elapsed = tick - since;
                if elapsed > 0 && elapsed.is_multiple_of(FALSE_GOAL_RESAMPLE_TICKS) {
                    if let Some(false_goal) = self.sample_false_goal(map) {
                        self.orientation = Orientation::Disoriented { false_goal, since };
                    }
                }
            }
        }
    }

    /// Phase D: one step toward the current destination unless the
    /// locomotion-noise draw holds the resident in place.
    pub fn movement_phase(&mut self, map: &GridMap) {
        if !matches!(self.mode, PwdMode::Traveling | PwdMode::Guided { .. }) {
            return;
        }
        if self.streams.noise.chance(self.params.p_noise) {
            return;
        }
        let Some(trip) = &self.trip else { return };
        let target = match (&self.mode, &self.orientation) {
            (PwdMode::Traveling, Orientation::Disoriented { false_goal, .. }) => false_goal,
            _ => &trip.goal,
        };
        self.position = map.step_toward_label(self.position, target);
    }

    fn emit(&self, tick: u64, events: &mut Vec<Event>, kind: EventKind) {
        events.push(Event { tick, phase: Phase::Schedule, subject: Subject::Pwd(self.id), kind });
    }

    fn consider_departure(&mut self, map: &GridMap, tick: u64, events: &mut Vec<Event>) {
        if self.reminded {
            self.reminded = false;
            if let Some((index, _)) = self.forgotten.take() {
                self.depart_for(map, index, tick, events);
                return;
            }
        }
        let appointments = self.schedule.appointments();
        let due = (self.next_appointment..appointments.len())
            .take_while(|&i| appointments[i].start <= tick)
            .last();
        let Some(due) = due else { return };

        // Anything older than the latest due appointment can no longer be kept.
        if let Some((index, _)) = self.forgotten.take() {
            self.emit(tick, events, EventKind::AppointmentMissed { appointment: index as u32 });
        }
        for index in self.next_appointment..due {
            self.emit(tick, events, EventKind::AppointmentMissed { appointment: index as u32 });
        }
        self.next_appointment = due + 1;
        if self.streams.forget.chance(self.params.p_forget) {
            self.forgotten = Some((due, tick));
            return;
        }
        self.depart_for(map, due, tick, events);
    }

    fn depart_for(&mut self, map: &GridMap, index: usize, tick: u64, events: &mut Vec<Event>) {
        let goal = self.schedule.appointments()[index].location.clone();
        self.start_trip(map, goal, Leg::Outbound { appointment: index }, tick, events);
    }

    fn start_trip(
        &mut self,
        map: &GridMap,
        goal: String,
        leg: Leg,
        tick: u64,
        events: &mut Vec<Event>,
    ) {
        let nominal = map.distance_to_label(self.position, &goal).unwrap_or(0);
        let id = self.trips_started;
        self.trips_started += 1;
        self.emit(tick, events, EventKind::TripStart {
            trip: id,
            origin: self.position,
            goal: goal.clone(),
            nominal,
        });
        self.trip = Some(Trip { id, goal, start: tick, nominal, leg });
        self.mode = PwdMode::Traveling;
        self.orientation = Orientation::Oriented;
        if nominal == 0 {
            self.finish_trip(tick, events);
        }
    }

    fn finish_trip(&mut self, tick: u64, events: &mut Vec<Event>) {
        let Some(trip) = self.trip.take() else { return };
        self.emit(tick, events, EventKind::TripEnd {
            trip: trip.id,
            taken: tick - trip.start,
            nominal: trip.nominal,
        });
        self.orientation = Orientation::Oriented;
        self.mode = match trip.leg {
            Leg::Outbound { appointment } => {
                let duration = self.schedule.appointments()[appointment].duration;
                PwdMode::AtAppointment { until: tick + duration }
            }
            Leg::Return => PwdMode::Idle,
        };
    }

    fn sample_false_goal(&mut self, map: &GridMap) -> Option<String> {
        let goal = self.trip.as_ref().map(|t| t.goal.as_str());
        let candidates: Vec<&str> = map
            .labels_with_role(Role::AppointmentSite)
            .into_iter()
            .filter(|label| Some(*label) != goal)
            .collect();
        if candidates.is_empty() {
            return None;
        }
        let pick = self.streams.false_goal.below(candidates.len() as u64) as usize;
        Some(candidates[pick].to_string())
    }
}

/// Scheduling and movement for a resident with no watch or nurse involved.
pub fn pwd_step(agent: &mut PwdAgent, map: &GridMap, tick: u64) -> Vec<Event> {
    let mut events = Vec::new();
    agent.schedule_phase(map, tick, &mut events);
    agent.movement_phase(map);
    events
}
