use serde::{Deserialize, Serialize};

use super::{PwdAgent, PwdId};
use crate::engine::event::{Event, EventKind, Phase, Subject};
use crate::engine::rng::{derive_stream, Purpose, Stream};
use crate::environment::Position;

/// Ticks after a forgotten departure before the watch reminds the resident.
pub const REMINDER_DELAY_TICKS: u64 = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WatchConfig {
    pub enabled: bool,
    /// Per-tick probability of noticing that the wearer is disoriented.
    pub p_detect: f64,
    /// Failed hints tolerated before a nurse is called; 0 calls on detection.
    pub n_help: u32,
    /// Ticks between navigation hints.
    pub intervention_interval: u32,
}

impl Default for WatchConfig {
    fn default() -> Self {
        Self { enabled: true, p_detect: 0.5, n_help: 1, intervention_interval: 1 }
    }
}

impl WatchConfig {
    pub fn disabled() -> Self {
        Self { enabled: false, ..Self::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WatchPhase {
    Dormant,
    Intervening { since: u64 },
    AwaitingNurse,
}

/// A request for a nurse, queued until a nurse is free.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NurseCall {
    pub pwd: PwdId,
    pub at: Position,
    pub tick: u64,
}

#[derive(Debug, Clone)]
pub struct SmartWatch {
    pub owner: PwdId,
    pub config: WatchConfig,
    pub fail_count: u32,
    pub phase: WatchPhase,
    detect: Stream,
    intervene: Stream,
}

impl SmartWatch {
    pub fn new(owner: PwdId, config: WatchConfig, seed: u64) -> Self {
        let key = u64::from(owner.0);
        Self {
            owner,
            config,
            fail_count: 0,
            phase: WatchPhase::Dormant,
            detect: derive_stream(seed, key, Purpose::Detect),
            intervene: derive_stream(seed, key, Purpose::Intervene),
        }
    }

    /// Back to idle monitoring, e.g. when a nurse starts guiding the wearer.
    pub fn reset(&mut self) {
        self.fail_count = 0;
        self.phase = WatchPhase::Dormant;
    }

    fn emit(&self, tick: u64, events: &mut Vec<Event>, kind: EventKind) {
        events.push(Event { tick, phase: Phase::Watch, subject: Subject::Pwd(self.owner), kind });
    }

    /// Phase B for one watch: reminders, detection, one hint per interval,
    /// and the nurse call once `n_help` consecutive hints have failed.
    pub fn step(
        &mut self,
        owner: &mut PwdAgent,
        tick: u64,
        events: &mut Vec<Event>,
    ) -> Option<NurseCall> {
        if !self.config.enabled {
            return None;
        }
        if let Some((appointment, due)) = owner.forgotten() {
            if tick - due >= REMINDER_DELAY_TICKS {
                owner.remind();
                self.emit(tick, events, EventKind::Reminder { appointment: appointment as u32 });
            }
        }
        if !owner.is_disoriented() || owner.is_guided() {
            self.reset();
            return None;
        }

        let since = match self.phase {
            WatchPhase::AwaitingNurse => return None,
            WatchPhase::Intervening { since } => since,
            WatchPhase::Dormant => {
                if !self.detect.chance(self.config.p_detect) {
                    return None;
                }
                self.emit(tick, events, EventKind::Detection);
                self.phase = WatchPhase::Intervening { since: tick };
                tick
            }
        };

        if self.fail_count >= self.config.n_help {
            return Some(self.call(owner, tick, events));
        }
        let interval = u64::from(self.config.intervention_interval.max(1));
        if !(tick - since).is_multiple_of(interval) {
            return None;
        }
        if self.intervene.chance(owner.params.p_i) {
            let attempt = self.fail_count + 1;
            owner.reorient();
            self.reset();
            self.emit(tick, events, EventKind::InterventionSuccess { attempt });
            return None;
        }
        self.fail_count += 1;
        self.emit(tick, events, EventKind::InterventionFail { fails: self.fail_count });
        if self.fail_count >= self.config.n_help {
            return Some(self.call(owner, tick, events));
        }
        None
    }

    fn call(&mut self, owner: &PwdAgent, tick: u64, events: &mut Vec<Event>) -> NurseCall {
        self.phase = WatchPhase::AwaitingNurse;
        self.emit(tick, events, EventKind::NurseCalled { at: owner.position });
        NurseCall { pwd: self.owner, at: owner.position, tick }
    }
}
