//! Resident (PwD), smart-watch and nurse state machines.
//!
//! Each agent is a step function over its own state, the shared map, and its
//! private random streams. The engine decides when each step runs.

mod dispatch;
mod nurse;
mod pwd;
mod schedule;
mod watch;

use std::fmt;
use std::str::FromStr;

pub use dispatch::{assign_calls, CallDecision};
pub use nurse::{nurse_step, NurseAgent, NurseOutcome, NurseState, PwdView};
pub use pwd::{
    pwd_step, Leg, Orientation, PwdAgent, PwdMode, PwdParams, Trip, FALSE_GOAL_RESAMPLE_TICKS,
};
pub use schedule::{generate_schedule, Appointment, Schedule, ScheduleError};
pub use watch::{NurseCall, SmartWatch, WatchConfig, WatchPhase, REMINDER_DELAY_TICKS};

macro_rules! agent_id {
    ($name:ident, $prefix:literal) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub struct $name(pub u32);

        impl $name {
            pub fn index(self) -> usize {
                self.0 as usize
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, concat!($prefix, ":{}"), self.0)
            }
        }

        impl FromStr for $name {
            type Err = String;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                s.strip_prefix(concat!($prefix, ":"))
                    .and_then(|n| n.parse().ok())
                    .map($name)
                    .ok_or_else(|| format!("bad {} id '{s}'", $prefix))
            }
        }
    };
}

agent_id!(PwdId, "pwd");
agent_id!(NurseId, "nurse");
