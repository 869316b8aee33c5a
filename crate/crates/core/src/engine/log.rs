//! The event log: every event of a run plus the per-tick state of every
//! agent. Metrics are computed from this record alone.

use std::fmt::Write as _;

use thiserror::Error;

use super::event::Event;
use crate::agents::{NurseId, NurseState, PwdId, PwdMode};

const HEADER: &str = "# ecq event log v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModeTag {
    Idle,
    Traveling,
    AtAppointment,
    Guided,
}

impl ModeTag {
    pub const ALL: [ModeTag; 4] =
        [ModeTag::Idle, ModeTag::Traveling, ModeTag::AtAppointment, ModeTag::Guided];

    pub fn name(self) -> &'static str {
        match self {
            ModeTag::Idle => "idle",
            ModeTag::Traveling => "traveling",
            ModeTag::AtAppointment => "at_appointment",
            ModeTag::Guided => "guided",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|t| t.name() == s)
    }
}

impl From<PwdMode> for ModeTag {
    fn from(mode: PwdMode) -> Self {
        match mode {
            PwdMode::Idle => ModeTag::Idle,
            PwdMode::Traveling => ModeTag::Traveling,
            PwdMode::AtAppointment { .. } => ModeTag::AtAppointment,
            PwdMode::Guided { .. } => ModeTag::Guided,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StateTag {
    Inactive,
    Responding,
    Guiding,
}

impl StateTag {
    pub const ALL: [StateTag; 3] = [StateTag::Inactive, StateTag::Responding, StateTag::Guiding];

    pub fn name(self) -> &'static str {
        match self {
            StateTag::Inactive => "inactive",
            StateTag::Responding => "responding",
            StateTag::Guiding => "guiding",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|t| t.name() == s)
    }
}

impl From<NurseState> for StateTag {
    fn from(state: NurseState) -> Self {
        match state {
            NurseState::Inactive => StateTag::Inactive,
            NurseState::Responding(_) => StateTag::Responding,
            NurseState::Guiding(_) => StateTag::Guiding,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventLog {
    pub horizon: u64,
    pub seed: u64,
    pub events: Vec<Event>,
    /// `pwd_modes[pwd][tick]`
    pub pwd_modes: Vec<Vec<ModeTag>>,
    /// `nurse_states[nurse][tick]`
    pub nurse_states: Vec<Vec<StateTag>>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("event log line {line}: {reason}")]
pub struct LogParseError {
    pub line: usize,
    pub reason: String,
}

impl EventLog {
    pub fn new(horizon: u64, seed: u64, pwds: usize, nurses: usize) -> Self {
        let cap = horizon as usize;
        Self {
            horizon,
            seed,
            events: Vec::new(),
            pwd_modes: (0..pwds).map(|_| Vec::with_capacity(cap)).collect(),
            nurse_states: (0..nurses).map(|_| Vec::with_capacity(cap)).collect(),
        }
    }

    pub fn pwd_count(&self) -> usize {
        self.pwd_modes.len()
    }

    pub fn nurse_count(&self) -> usize {
        self.nurse_states.len()
    }

    pub fn pwd_ticks(&self, pwd: PwdId, tag: ModeTag) -> Option<u64> {
        let tallies = self.pwd_modes.get(pwd.index())?;
        Some(tallies.iter().filter(|&&t| t == tag).count() as u64)
    }

    pub fn nurse_ticks(&self, nurse: NurseId, tag: StateTag) -> Option<u64> {
        let tallies = self.nurse_states.get(nurse.index())?;
        Some(tallies.iter().filter(|&&t| t == tag).count() as u64)
    }

    pub fn events_for(&self, pwd: PwdId) -> impl Iterator<Item = &Event> + '_ {
        self.events.iter().filter(move |e| e.pwd() == Some(pwd))
    }

    /// Stable text form; identical runs serialize to identical bytes.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{HEADER}");
        let _ = writeln!(out, "horizon,{}", self.horizon);
        let _ = writeln!(out, "seed,{}", self.seed);
        let _ = writeln!(out, "pwds,{}", self.pwd_count());
        let _ = writeln!(out, "nurses,{}", self.nurse_count());
        for e in &self.events {
            let _ = writeln!(out, "{e}");
        }
        for (i, tallies) in self.pwd_modes.iter().enumerate() {
            write_spans(&mut out, &PwdId(i as u32).to_string(), tallies, |t| t.name());
        }
        for (i, tallies) in self.nurse_states.iter().enumerate() {
            write_spans(&mut out, &NurseId(i as u32).to_string(), tallies, |t| t.name());
        }
        out
    }

    pub fn parse(text: &str) -> Result<EventLog, LogParseError> {
        let head: Vec<&str> = text.lines().take(5).collect();
        if head.first() != Some(&HEADER) {
            return Err(LogParseError { line: 1, reason: "missing log header".into() });
        }
        let field = |line: usize, key: &str| -> Result<u64, LogParseError> {
            head.get(line)
                .and_then(|l| l.strip_prefix(key))
                .and_then(|v| v.strip_prefix(','))
                .and_then(|v| v.parse().ok())
                .ok_or(LogParseError { line: line + 1, reason: format!("expected {key}") })
        };
        let horizon = field(1, "horizon")?;
        let seed = field(2, "seed")?;
        let pwds = field(3, "pwds")? as usize;
        let nurses = field(4, "nurses")? as usize;
        let mut log = EventLog::new(horizon, seed, pwds, nurses);
        for (n, line) in text.lines().enumerate().skip(5) {
            let err = |reason: String| LogParseError { line: n + 1, reason };
            if let Some(rest) = line.strip_prefix("span,") {
                let parts: Vec<&str> = rest.split(',').collect();
                let [agent, tag, from, to] = parts[..] else {
                    return Err(err("span needs agent,state,from,to".into()));
                };
                let from: u64 = from.parse().map_err(|_| err("bad span start".into()))?;
                let to: u64 = to.parse().map_err(|_| err("bad span end".into()))?;
                let len = to.checked_sub(from).ok_or_else(|| err("span ends before it starts".into()))?;
                if let Ok(id) = agent.parse::<PwdId>() {
                    let tag = ModeTag::parse(tag).ok_or_else(|| err(format!("bad mode '{tag}'")))?;
                    let tallies = log.pwd_modes.get_mut(id.index()).ok_or_else(|| err("unknown pwd".into()))?;
                    if tallies.len() as u64 != from {
                        return Err(err("span is not contiguous".into()));
                    }
                    tallies.extend(std::iter::repeat_n(tag, len as usize));
                } else if let Ok(id) = agent.parse::<NurseId>() {
                    let tag = StateTag::parse(tag).ok_or_else(|| err(format!("bad state '{tag}'")))?;
                    let tallies = log.nurse_states.get_mut(id.index()).ok_or_else(|| err("unknown nurse".into()))?;
                    if tallies.len() as u64 != from {
                        return Err(err("span is not contiguous".into()));
                    }
                    tallies.extend(std::iter::repeat_n(tag, len as usize));
                } else {
                    return Err(err(format!("bad agent '{agent}'")));
                }
            } else {
                log.events.push(line.parse().map_err(|e: super::event::EventParseError| err(e.reason))?);
            }
        }
        let complete = log.pwd_modes.iter().map(Vec::len)
            .chain(log.nurse_states.iter().map(Vec::len))
            .all(|len| len as u64 == horizon);
        if !complete {
            return Err(LogParseError { line: 0, reason: "tallies do not cover the horizon".into() });
        }
        Ok(log)
    }
}

/// Run-length form: `span,<agent>,<state>,<first tick>,<end tick exclusive>`.
fn write_spans<T: Copy + PartialEq>(
    out: &mut String,
    agent: &str,
    tallies: &[T],
    name: impl Fn(T) -> &'static str,
) {
    let mut start = 0;
    for i in 1..=tallies.len() {
        if i == tallies.len() || tallies[i] != tallies[start] {
            let _ = writeln!(out, "span,{agent},{},{start},{i}", name(tallies[start]));
            start = i;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::event::{EventKind, Phase, Subject};

    fn sample() -> EventLog {
        let mut log = EventLog::new(6, 9, 1, 1);
        log.events.push(Event {
            tick: 2,
            phase: Phase::Watch,
            subject: Subject::Pwd(PwdId(0)),
            kind: EventKind::Detection,
        });
        use ModeTag::*;
        log.pwd_modes[0] = vec![Idle, Idle, Traveling, Guided, Guided, AtAppointment];
        log.nurse_states[0] = vec![StateTag::Inactive; 6];
        log
    }

    #[test]
    fn spans_and_round_trip() {
        let log = sample();
        let text = log.serialize();
        assert!(text.contains("span,pwd:0,guided,3,5\n"));
        assert!(text.contains("span,nurse:0,inactive,0,6\n"));
        assert_eq!(EventLog::parse(&text).unwrap(), log);
    }

    #[test]
    fn tick_counts() {
        let log = sample();
        assert_eq!(log.pwd_ticks(PwdId(0), ModeTag::Guided), Some(2));
        assert_eq!(log.nurse_ticks(NurseId(0), StateTag::Inactive), Some(6));
        assert_eq!(log.pwd_ticks(PwdId(3), ModeTag::Guided), None);
    }

    #[test]
    fn rejects_short_tallies() {
        let text = sample().serialize().replace("span,nurse:0,inactive,0,6", "span,nurse:0,inactive,0,5");
        assert!(EventLog::parse(&text).is_err());
        assert!(EventLog::parse("horizon,3\n").is_err());
    }
}
