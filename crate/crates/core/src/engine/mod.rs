//! Discrete-time scheduler.
//!
//! Every tick runs the same phases, each over agents in ascending id order:
//!
//! - A: residents arrive, set off, or become disoriented
//! - B: watches sense, hint, and call; pending calls are dispatched
//! - C: nurses perceive, approach, and start or end guidance
//! - D: residents move; guiding nurses move with them
//! - E: every agent's state is tallied for the tick
//!
//! A detection in B can therefore bring a nurse moving in C of the same tick.

pub mod event;
pub mod log;
pub mod rng;
mod scenario;

use std::collections::VecDeque;

use crate::agents::{
    assign_calls, nurse_step, NurseAgent, NurseCall, NurseId, NurseOutcome, NurseState, PwdAgent,
    PwdId, PwdView, SmartWatch,
};
pub use event::{Event, EventKind, Phase, Subject};
pub use log::{EventLog, ModeTag, StateTag};
pub use rng::{derive_stream, Purpose, Stream};
pub use scenario::{
    NurseConfig, PwdConfig, PwdTemplate, Scenario, ScenarioError, ScenarioTemplate,
    SchedulePolicy, DEFAULT_APPOINTMENTS, DEFAULT_APPOINTMENT_DURATION, DEFAULT_HORIZON,
    DEFAULT_RADIUS,
};

/// Live state of one run.
struct World<'a> {
    scenario: &'a Scenario,
    pwds: Vec<PwdAgent>,
    watches: Vec<SmartWatch>,
    nurses: Vec<NurseAgent>,
    ward: Vec<PwdView>,
    calls: VecDeque<NurseCall>,
}

impl<'a> World<'a> {
    fn new(scenario: &'a Scenario) -> Self {
        let map = &scenario.map;
        let mut pwds = Vec::with_capacity(scenario.pwds.len());
        let mut watches = Vec::with_capacity(scenario.pwds.len());
        for (i, cfg) in scenario.pwds.iter().enumerate() {
            let id = PwdId(i as u32);
            let home = map.cells_of(&cfg.home).expect("validated home")[0];
            pwds.push(PwdAgent::new(id, &cfg.home, home, cfg.schedule.clone(), cfg.params, scenario.seed));
            watches.push(SmartWatch::new(id, cfg.watch, scenario.seed));
        }
        // Nurses sharing a base spread over its cells in id order.
        let nurses = scenario
            .nurses
            .iter()
            .enumerate()
            .map(|(i, cfg)| {
                let cells = map.cells_of(&cfg.base).expect("validated base");
                let sharing = scenario.nurses[..i].iter().filter(|n| n.base == cfg.base).count();
                NurseAgent::new(NurseId(i as u32), &cfg.base, cfg.radius, cells[sharing % cells.len()])
            })
            .collect();
        let ward = pwds
            .iter()
            .map(|p| PwdView {
                id: p.id,
                position: p.position,
                disoriented: false,
                guided_by: None,
                responder: None,
            })
            .collect();
        World { scenario, pwds, watches, nurses, ward, calls: VecDeque::new() }
    }

    fn refresh_ward(&mut self) {
        for (view, pwd) in self.ward.iter_mut().zip(&self.pwds) {
            view.position = pwd.position;
            view.disoriented = pwd.is_disoriented();
            view.guided_by = pwd.guided_by();
        }
    }

    fn tick(&mut self, tick: u64, log: &mut EventLog) {
        let map = &*self.scenario.map;
        let events = &mut log.events;

        for pwd in &mut self.pwds {
            pwd.schedule_phase(map, tick, events);
        }

        for (watch, pwd) in self.watches.iter_mut().zip(&mut self.pwds) {
            if let Some(call) = watch.step(pwd, tick, events) {
                self.calls.push_back(call);
            }
        }
        self.refresh_ward();
        if !self.calls.is_empty() {
            assign_calls(&mut self.calls, &mut self.nurses, &mut self.ward, map, tick, events);
        }

        for nurse in &mut self.nurses {
            if let Some(NurseOutcome::GuidanceStarted(p)) =
                nurse_step(nurse, &mut self.ward, map, tick, events)
            {
                self.pwds[p.index()].begin_guidance(nurse.id);
                self.watches[p.index()].reset();
            }
        }

        for pwd in &mut self.pwds {
            pwd.movement_phase(map);
        }
        for nurse in &mut self.nurses {
            if let NurseState::Guiding(p) = nurse.state {
                nurse.position = self.pwds[p.index()].position;
            }
        }

        for (tallies, pwd) in log.pwd_modes.iter_mut().zip(&self.pwds) {
            tallies.push(pwd.mode.into());
        }
        for (tallies, nurse) in log.nurse_states.iter_mut().zip(&self.nurses) {
            tallies.push(nurse.state.into());
        }
    }
}

/// Runs `scenario.horizon` ticks and returns the complete log.
pub fn run_simulation(scenario: &Scenario) -> Result<EventLog, ScenarioError> {
    scenario.validate()?;
    let mut log = EventLog::new(
        scenario.horizon,
        scenario.seed,
        scenario.pwds.len(),
        scenario.nurses.len(),
    );
    let mut world = World::new(scenario);
    for tick in 0..scenario.horizon {
        world.tick(tick, &mut log);
    }
    Ok(log)
}
