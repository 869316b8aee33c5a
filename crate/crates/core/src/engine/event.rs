//! Simulation events and their line format.
//!
//! One event per line: `tick,phase,kind,subject,key=value,...` with a fixed
//! key order per kind.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::agents::{NurseId, PwdId};
use crate::environment::Position;

/// Tick phase in which an event was emitted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Phase {
    /// A: schedules, trip bookkeeping and disorientation onset.
    Schedule,
    /// B: smart-watch sensing, interventions, calls and call dispatch.
    Watch,
    /// C: nurse perception, approach and guidance.
    Nurse,
    /// D: movement.
    Movement,
}

impl Phase {
    pub fn letter(self) -> char {
        match self {
            Phase::Schedule => 'A',
            Phase::Watch => 'B',
            Phase::Nurse => 'C',
            Phase::Movement => 'D',
        }
    }

    fn from_letter(s: &str) -> Option<Phase> {
        Some(match s {
            "A" => Phase::Schedule,
            "B" => Phase::Watch,
            "C" => Phase::Nurse,
            "D" => Phase::Movement,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Subject {
    Pwd(PwdId),
    Nurse(NurseId),
}

impl fmt::Display for Subject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Subject::Pwd(id) => write!(f, "{id}"),
            Subject::Nurse(id) => write!(f, "{id}"),
        }
    }
}

impl FromStr for Subject {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if let Ok(id) = s.parse::<PwdId>() {
            return Ok(Subject::Pwd(id));
        }
        s.parse::<NurseId>().map(Subject::Nurse)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ResponseCause {
    Perceived,
    Called,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DropReason {
    /// The resident is already being guided.
    Guided,
    /// Another nurse is already on the way.
    Responded,
    /// The resident is no longer disoriented.
    Oriented,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EventKind {
    TripStart { trip: u32, origin: Position, goal: String, nominal: u32 },
    TripEnd { trip: u32, taken: u64, nominal: u32 },
    DisorientationStart { trip: u32, false_goal: String },
    Detection,
    InterventionSuccess { attempt: u32 },
    InterventionFail { fails: u32 },
    NurseCalled { at: Position },
    CallDropped { reason: DropReason },
    ResponseStart { pwd: PwdId, cause: ResponseCause },
    ResponseCancelled { pwd: PwdId },
    GuidanceStart { pwd: PwdId },
    GuidanceEnd { pwd: PwdId },
    Reminder { appointment: u32 },
    AppointmentMissed { appointment: u32 },
}

impl EventKind {
    pub fn name(&self) -> &'static str {
        match self {
            EventKind::TripStart { .. } => "TripStart",
            EventKind::TripEnd { .. } => "TripEnd",
            EventKind::DisorientationStart { .. } => "DisorientationStart",
            EventKind::Detection => "Detection",
            EventKind::InterventionSuccess { .. } => "InterventionSuccess",
            EventKind::InterventionFail { .. } => "InterventionFail",
            EventKind::NurseCalled { .. } => "NurseCalled",
            EventKind::CallDropped { .. } => "CallDropped",
            EventKind::ResponseStart { .. } => "ResponseStart",
            EventKind::ResponseCancelled { .. } => "ResponseCancelled",
            EventKind::GuidanceStart { .. } => "GuidanceStart",
            EventKind::GuidanceEnd { .. } => "GuidanceEnd",
            EventKind::Reminder { .. } => "Reminder",
            EventKind::AppointmentMissed { .. } => "AppointmentMissed",
        }
    }

    /// The resident an event concerns, whichever agent emitted it.
    pub fn pwd(&self) -> Option<PwdId> {
        match self {
            EventKind::ResponseStart { pwd, .. }
            | EventKind::ResponseCancelled { pwd }
            | EventKind::GuidanceStart { pwd }
            | EventKind::GuidanceEnd { pwd } => Some(*pwd),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Event {
    pub tick: u64,
    pub phase: Phase,
    pub subject: Subject,
    pub kind: EventKind,
}

impl Event {
    /// The resident this event is about: the subject for resident and watch
    /// events, the payload for nurse events.
    pub fn pwd(&self) -> Option<PwdId> {
        match self.subject {
            Subject::Pwd(id) => Some(id),
            Subject::Nurse(_) => self.kind.pwd(),
        }
    }

    pub fn nurse(&self) -> Option<NurseId> {
        match self.subject {
            Subject::Nurse(id) => Some(id),
            Subject::Pwd(_) => None,
        }
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{},{}", self.tick, self.phase.letter(), self.kind.name(), self.subject)?;
        match &self.kind {
            EventKind::TripStart { trip, origin, goal, nominal } => {
                write!(f, ",trip={trip},origin={origin},goal={goal},nominal={nominal}")
            }
            EventKind::TripEnd { trip, taken, nominal } => {
                write!(f, ",trip={trip},taken={taken},nominal={nominal}")
            }
            EventKind::DisorientationStart { trip, false_goal } => {
                write!(f, ",trip={trip},false_goal={false_goal}")
            }
            EventKind::Detection => Ok(()),
            EventKind::InterventionSuccess { attempt } => write!(f, ",attempt={attempt}"),
            EventKind::InterventionFail { fails } => write!(f, ",fails={fails}"),
            EventKind::NurseCalled { at } => write!(f, ",at={at}"),
            EventKind::CallDropped { reason } => {
                let reason = match reason {
                    DropReason::Guided => "guided",
                    DropReason::Responded => "responded",
                    DropReason::Oriented => "oriented",
                };
                write!(f, ",reason={reason}")
            }
            EventKind::ResponseStart { pwd, cause } => {
                let cause = match cause {
                    ResponseCause::Perceived => "perceived",
                    ResponseCause::Called => "called",
                };
                write!(f, ",pwd={},cause={cause}", pwd.0)
            }
            EventKind::ResponseCancelled { pwd }
            | EventKind::GuidanceStart { pwd }
            | EventKind::GuidanceEnd { pwd } => write!(f, ",pwd={}", pwd.0),
            EventKind::Reminder { appointment } | EventKind::AppointmentMissed { appointment } => {
                write!(f, ",appointment={appointment}")
            }
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("bad event line '{line}': {reason}")]
pub struct EventParseError {
    pub line: String,
    pub reason: String,
}

struct Fields<'a> {
    rest: std::str::Split<'a, char>,
}

impl<'a> Fields<'a> {
    fn take(&mut self, key: &str) -> Result<&'a str, String> {
        let field = self.rest.next().ok_or_else(|| format!("missing {key}"))?;
        field
            .strip_prefix(key)
            .and_then(|v| v.strip_prefix('='))
            .ok_or_else(|| format!("expected {key}=, found '{field}'"))
    }

    fn parse<T: FromStr>(&mut self, key: &str) -> Result<T, String> {
        let raw = self.take(key)?;
        raw.parse().map_err(|_| format!("bad {key} '{raw}'"))
    }
}

impl FromStr for Event {
    type Err = EventParseError;

    fn from_str(line: &str) -> Result<Self, Self::Err> {
        let fail = |reason: String| EventParseError { line: line.to_string(), reason };
        let mut parts = line.split(',');
        let mut next = |what: &str| parts.next().ok_or_else(|| fail(format!("missing {what}")));
        let tick = next("tick")?.parse().map_err(|_| fail("bad tick".into()))?;
        let phase = Phase::from_letter(next("phase")?).ok_or_else(|| fail("bad phase".into()))?;
        let name = next("kind")?;
        let subject = next("subject")?.parse().map_err(fail)?;
        let mut f = Fields { rest: parts };
        let kind = (|| -> Result<EventKind, String> {
            Ok(match name {
                "TripStart" => EventKind::TripStart {
                    trip: f.parse("trip")?,
                    origin: f.parse("origin")?,
                    goal: f.take("goal")?.to_string(),
                    nominal: f.parse("nominal")?,
                },
                "TripEnd" => EventKind::TripEnd {
                    trip: f.parse("trip")?,
                    taken: f.parse("taken")?,
                    nominal: f.parse("nominal")?,
                },
                "DisorientationStart" => EventKind::DisorientationStart {
                    trip: f.parse("trip")?,
                    false_goal: f.take("false_goal")?.to_string(),
                },
                "Detection" => EventKind::Detection,
                "InterventionSuccess" => EventKind::InterventionSuccess { attempt: f.parse("attempt")? },
                "InterventionFail" => EventKind::InterventionFail { fails: f.parse("fails")? },
                "NurseCalled" => EventKind::NurseCalled { at: f.parse("at")? },
                "CallDropped" => EventKind::CallDropped {
                    reason: match f.take("reason")? {
                        "guided" => DropReason::Guided,
                        "responded" => DropReason::Responded,
                        "oriented" => DropReason::Oriented,
                        other => return Err(format!("bad reason '{other}'")),
                    },
                },
                "ResponseStart" => EventKind::ResponseStart {
                    pwd: PwdId(f.parse("pwd")?),
                    cause: match f.take("cause")? {
                        "perceived" => ResponseCause::Perceived,
                        "called" => ResponseCause::Called,
                        other => return Err(format!("bad cause '{other}'")),
                    },
                },
                "ResponseCancelled" => EventKind::ResponseCancelled { pwd: PwdId(f.parse("pwd")?) },
                "GuidanceStart" => EventKind::GuidanceStart { pwd: PwdId(f.parse("pwd")?) },
                "GuidanceEnd" => EventKind::GuidanceEnd { pwd: PwdId(f.parse("pwd")?) },
                "Reminder" => EventKind::Reminder { appointment: f.parse("appointment")? },
                "AppointmentMissed" => {
                    EventKind::AppointmentMissed { appointment: f.parse("appointment")? }
                }
                other => return Err(format!("unknown kind '{other}'")),
            })
        })()
        .map_err(fail)?;
        if let Some(extra) = f.rest.next() {
            return Err(fail(format!("unexpected field '{extra}'")));
        }
        Ok(Event { tick, phase, subject, kind })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_format() {
        let e = Event {
            tick: 12,
            phase: Phase::Schedule,
            subject: Subject::Pwd(PwdId(0)),
            kind: EventKind::TripStart {
                trip: 0,
                origin: Position::new(3, 4),
                goal: "dining".into(),
                nominal: 17,
            },
        };
        assert_eq!(e.to_string(), "12,A,TripStart,pwd:0,trip=0,origin=3:4,goal=dining,nominal=17");
        assert_eq!(e.to_string().parse::<Event>().unwrap(), e);
    }

    #[test]
    fn nurse_event_round_trip() {
        let e = Event {
            tick: 7,
            phase: Phase::Watch,
            subject: Subject::Nurse(NurseId(2)),
            kind: EventKind::ResponseStart { pwd: PwdId(4), cause: ResponseCause::Called },
        };
        let line = e.to_string();
        assert_eq!(line, "7,B,ResponseStart,nurse:2,pwd=4,cause=called");
        assert_eq!(line.parse::<Event>().unwrap(), e);
        assert_eq!(e.pwd(), Some(PwdId(4)));
        assert_eq!(e.nurse(), Some(NurseId(2)));
    }

    #[test]
    fn rejects_malformed_lines() {
        assert!("x,A,Detection,pwd:0".parse::<Event>().is_err());
        assert!("1,Q,Detection,pwd:0".parse::<Event>().is_err());
        assert!("1,A,Bogus,pwd:0".parse::<Event>().is_err());
        assert!("1,A,Detection,pwd:0,extra=1".parse::<Event>().is_err());
        assert!("1,A,InterventionFail,pwd:0,count=1".parse::<Event>().is_err());
    }
}
