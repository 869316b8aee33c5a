use std::collections::VecDeque;

use super::{NurseAgent, NurseCall, NurseId, NurseState, PwdId, PwdView};
use crate::engine::event::{DropReason, Event, EventKind, Phase, ResponseCause, Subject};
use crate::environment::GridMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CallDecision {
    Assigned { pwd: PwdId, nurse: NurseId },
    Dropped { pwd: PwdId, reason: DropReason },
    Queued { pwd: PwdId },
}

/// Works through pending calls oldest first. A call goes to the nearest
/// inactive nurse by path distance (lowest id on ties); calls nobody can take
/// stay queued in order, and calls that no longer need a nurse are dropped.
pub fn assign_calls(
    queue: &mut VecDeque<NurseCall>,
    nurses: &mut [NurseAgent],
    ward: &mut [PwdView],
    map: &GridMap,
    tick: u64,
    events: &mut Vec<Event>,
) -> Vec<CallDecision> {
    let mut decisions = Vec::with_capacity(queue.len());
    let mut still_waiting = VecDeque::new();
    while let Some(call) = queue.pop_front() {
        let view = &mut ward[call.pwd.index()];
        let drop = if view.guided_by.is_some() {
            Some(DropReason::Guided)
        } else if view.responder.is_some() {
            Some(DropReason::Responded)
        } else if !view.disoriented {
            Some(DropReason::Oriented)
        } else {
            None
        };
        if let Some(reason) = drop {
            events.push(Event {
                tick,
                phase: Phase::Watch,
                subject: Subject::Pwd(call.pwd),
                kind: EventKind::CallDropped { reason },
            });
            decisions.push(CallDecision::Dropped { pwd: call.pwd, reason });
            continue;
        }
        let nearest = nurses
            .iter_mut()
            .filter(|n| n.is_inactive())
            .min_by_key(|n| (map.distance(n.position, view.position).unwrap_or(u32::MAX), n.id));
        match nearest {
            Some(nurse) => {
                nurse.state = NurseState::Responding(call.pwd);
                view.responder = Some(nurse.id);
                nurse.emit(tick, Phase::Watch, events, EventKind::ResponseStart {
                    pwd: call.pwd,
                    cause: ResponseCause::Called,
                });
                decisions.push(CallDecision::Assigned { pwd: call.pwd, nurse: nurse.id });
            }
            None => {
                decisions.push(CallDecision::Queued { pwd: call.pwd });
                still_waiting.push_back(call);
            }
        }
    }
    *queue = still_waiting;
    decisions
}
