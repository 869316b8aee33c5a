use super::{NurseId, PwdId};
use crate::engine::event::{Event, EventKind, Phase, ResponseCause, Subject};
use crate::environment::{line_of_sight, GridMap, Position};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NurseState {
    Inactive,
    Responding(PwdId),
    Guiding(PwdId),
}

impl NurseState {
    pub fn tag(self) -> &'static str {
        match self {
            NurseState::Inactive => "inactive",
            NurseState::Responding(_) => "responding",
            NurseState::Guiding(_) => "guiding",
        }
    }

    pub fn target(self) -> Option<PwdId> {
        match self {
            NurseState::Inactive => None,
            NurseState::Responding(p) | NurseState::Guiding(p) => Some(p),
        }
    }
}

#[derive(Debug, Clone)]
pub struct NurseAgent {
    pub id: NurseId,
    pub base: String,
    /// Perception radius in cells.
    pub radius: f64,
    pub position: Position,
    pub state: NurseState,
}

impl NurseAgent {
    pub fn new(id: NurseId, base: impl Into<String>, radius: f64, position: Position) -> Self {
        Self { id, base: base.into(), radius, position, state: NurseState::Inactive }
    }

    pub fn is_inactive(&self) -> bool {
        self.state == NurseState::Inactive
    }

    pub(crate) fn emit(&self, tick: u64, phase: Phase, events: &mut Vec<Event>, kind: EventKind) {
        events.push(Event { tick, phase, subject: Subject::Nurse(self.id), kind });
    }
}

/// What nurses know about one resident. `responder` is the nurse currently
/// responding to or guiding the resident; at most one per resident.
#[derive(Debug, Clone, PartialEq)]
pub struct PwdView {
    pub id: PwdId,
    pub position: Position,
    pub disoriented: bool,
    pub guided_by: Option<NurseId>,
    pub responder: Option<NurseId>,
}

/// State changes a nurse step asks the engine to apply to the resident.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NurseOutcome {
    ResponseStarted(PwdId),
    ResponseCancelled(PwdId),
    GuidanceStarted(PwdId),
    GuidanceEnded(PwdId),
}

/// Phase C for one nurse. `ward` is indexed by resident id and is updated in
/// place so that nurses stepping later in the same tick see the claim.
pub fn nurse_step(
    nurse: &mut NurseAgent,
    ward: &mut [PwdView],
    map: &GridMap,
    tick: u64,
    events: &mut Vec<Event>,
) -> Option<NurseOutcome> {
    match nurse.state {
        NurseState::Inactive => {
            if let Some(pwd) = perceive(nurse, ward, map) {
                nurse.state = NurseState::Responding(pwd);
                ward[pwd.index()].responder = Some(nurse.id);
                nurse.emit(tick, Phase::Nurse, events, EventKind::ResponseStart {
                    pwd,
                    cause: ResponseCause::Perceived,
                });
                return Some(NurseOutcome::ResponseStarted(pwd));
            }
            nurse.position = map.step_toward_label(nurse.position, &nurse.base);
            None
        }
        NurseState::Responding(pwd) => {
            let view = &mut ward[pwd.index()];
            if !view.disoriented {
                view.responder = None;
                nurse.state = NurseState::Inactive;
                nurse.emit(tick, Phase::Nurse, events, EventKind::ResponseCancelled { pwd });
                return Some(NurseOutcome::ResponseCancelled(pwd));
            }
            if nurse.position != view.position {
                nurse.position = map.step_toward(nurse.position, view.position);
            }
            if nurse.position != view.position {
                return None;
            }
            view.guided_by = Some(nurse.id);
            view.disoriented = false;
            nurse.state = NurseState::Guiding(pwd);
            nurse.emit(tick, Phase::Nurse, events, EventKind::GuidanceStart { pwd });
            Some(NurseOutcome::GuidanceStarted(pwd))
        }
        NurseState::Guiding(pwd) => {
            let view = &mut ward[pwd.index()];
            if view.guided_by == Some(nurse.id) {
                return None;
            }
            view.responder = None;
            nurse.state = NurseState::Inactive;
            nurse.emit(tick, Phase::Nurse, events, EventKind::GuidanceEnd { pwd });
            Some(NurseOutcome::GuidanceEnded(pwd))
        }
    }
}

/// Nearest visible disoriented resident nobody is attending to; path
/// distance first, then resident id.
fn perceive(nurse: &NurseAgent, ward: &[PwdView], map: &GridMap) -> Option<PwdId> {
    ward.iter()
        .filter(|v| v.disoriented && v.responder.is_none() && v.guided_by.is_none())
        .filter(|v| line_of_sight(map, nurse.position, v.position, nurse.radius))
        .min_by_key(|v| (map.distance(nurse.position, v.position).unwrap_or(u32::MAX), v.id))
        .map(|v| v.id)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environment::{parse_map, Legend, LegendEntry, Role};

    fn room() -> GridMap {
        let legend = Legend::from([('N', LegendEntry::new("base", Role::NurseBase))]);
        let rows = ["N.........", "..........", "..........", ".........."];
        parse_map(&rows.join("\n"), &legend).unwrap()
    }

    fn view(id: u32, x: u32, y: u32, disoriented: bool) -> PwdView {
        PwdView {
            id: PwdId(id),
            position: Position::new(x, y),
            disoriented,
            guided_by: None,
            responder: None,
        }
    }

    #[test]
    fn idle_nurse_stays_inactive_at_base() {
        let map = room();
        let mut nurse = NurseAgent::new(NurseId(0), "base", 5.0, Position::new(0, 0));
        let mut ward = vec![view(0, 2, 0, false)];
        let mut events = Vec::new();
        for t in 0..100 {
            assert_eq!(nurse_step(&mut nurse, &mut ward, &map, t, &mut events), None);
        }
        assert!(events.is_empty());
        assert!(nurse.is_inactive());
        assert_eq!(nurse.position, Position::new(0, 0));
    }

    #[test]
    fn approach_takes_distance_ticks() {
        let map = room();
        let mut nurse = NurseAgent::new(NurseId(0), "base", 5.0, Position::new(0, 0));
        let mut ward = vec![view(0, 3, 0, true)];
        let mut events = Vec::new();
        nurse_step(&mut nurse, &mut ward, &map, 10, &mut events);
        assert_eq!(events[0].kind.name(), "ResponseStart");
        assert_eq!(events[0].tick, 10);
        for t in 11..20 {
            if nurse_step(&mut nurse, &mut ward, &map, t, &mut events).is_some() {
                break;
            }
        }
        let start = events.iter().find(|e| e.kind.name() == "GuidanceStart").unwrap();
        assert_eq!(start.tick, 13);
        assert_eq!(nurse.state, NurseState::Guiding(PwdId(0)));
        assert_eq!(ward[0].guided_by, Some(NurseId(0)));
    }

    #[test]
    fn nearest_first_and_second_nurse_takes_the_other() {
        let map = room();
        let mut a = NurseAgent::new(NurseId(0), "base", 5.0, Position::new(0, 0));
        let mut b = NurseAgent::new(NurseId(1), "base", 5.0, Position::new(0, 0));
        let mut ward = vec![view(0, 4, 0, true), view(1, 2, 0, true)];
        let mut events = Vec::new();
        nurse_step(&mut a, &mut ward, &map, 0, &mut events);
        nurse_step(&mut b, &mut ward, &map, 0, &mut events);
        assert_eq!(a.state, NurseState::Responding(PwdId(1)));
        assert_eq!(b.state, NurseState::Responding(PwdId(0)));
        assert_eq!(ward[1].responder, Some(NurseId(0)));
        assert_eq!(ward[0].responder, Some(NurseId(1)));
    }

    #[test]
    fn out_of_sight_is_ignored() {
        let legend = Legend::from([('N', LegendEntry::new("base", Role::NurseBase))]);
        let map = parse_map("N.#..\n.....", &legend).unwrap();
        let mut nurse = NurseAgent::new(NurseId(0), "base", 5.0, Position::new(0, 0));
        let mut ward = vec![view(0, 4, 0, true)];
        let mut events = Vec::new();
        nurse_step(&mut nurse, &mut ward, &map, 0, &mut events);
        assert!(nurse.is_inactive());
    }

    #[test]
    fn reoriented_target_cancels_response() {
        let map = room();
        let mut nurse = NurseAgent::new(NurseId(0), "base", 5.0, Position::new(0, 0));
        let mut ward = vec![view(0, 4, 0, true)];
        let mut events = Vec::new();
        nurse_step(&mut nurse, &mut ward, &map, 0, &mut events);
        ward[0].disoriented = false;
        let out = nurse_step(&mut nurse, &mut ward, &map, 1, &mut events);
        assert_eq!(out, Some(NurseOutcome::ResponseCancelled(PwdId(0))));
        assert_eq!(ward[0].responder, None);
        assert!(nurse.is_inactive());
    }

    #[test]
    fn guidance_ends_when_resident_is_released() {
        let map = room();
        let mut nurse = NurseAgent::new(NurseId(0), "base", 5.0, Position::new(1, 0));
        nurse.state = NurseState::Guiding(PwdId(0));
        let mut ward = vec![PwdView { guided_by: Some(NurseId(0)), responder: Some(NurseId(0)), ..view(0, 1, 0, false) }];
        let mut events = Vec::new();
        assert_eq!(nurse_step(&mut nurse, &mut ward, &map, 0, &mut events), None);
        ward[0].guided_by = None;
        let out = nurse_step(&mut nurse, &mut ward, &map, 1, &mut events);
        assert_eq!(out, Some(NurseOutcome::GuidanceEnded(PwdId(0))));
        assert!(nurse.is_inactive());
        // walks home afterwards
        nurse_step(&mut nurse, &mut ward, &map, 2, &mut events);
        assert_eq!(nurse.position, Position::new(0, 0));
    }
}
