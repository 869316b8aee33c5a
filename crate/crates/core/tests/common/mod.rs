#![allow(dead_code)]

use std::collections::{BTreeMap, VecDeque};
use std::path::PathBuf;
use std::sync::Arc;

use ecq_core::agents::{Appointment, PwdParams, Schedule, WatchConfig};
use ecq_core::cli::load_template;
use ecq_core::engine::rng::{derive_stream, Purpose, Stream};
use ecq_core::engine::{
    EventKind, EventLog, NurseConfig, PwdConfig, Scenario, ScenarioTemplate, DEFAULT_RADIUS,
};
use ecq_core::environment::{parse_map, GridMap, Legend, LegendEntry, Position, Role};

pub fn workspace() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn demo_path() -> PathBuf {
    workspace().join("scenarios/demo.toml")
}

pub fn demo_template() -> ScenarioTemplate {
    load_template(&demo_path(), None).expect("demo scenario loads")
}

/// Plain-text grid of `width` x `height` with walls at rate `wall_rate`.
pub fn random_grid(stream: &mut Stream, width: usize, height: usize, wall_rate: f64) -> String {
    let mut text = String::new();
    for _ in 0..height {
        for _ in 0..width {
            text.push(if stream.chance(wall_rate) { '#' } else { '.' });
        }
        text.push('\n');
    }
    text
}

/// Textbook BFS over a char grid, sharing no code with the crate.
pub fn bfs_oracle(rows: &[Vec<char>], from: (usize, usize)) -> Vec<Vec<Option<usize>>> {
    let h = rows.len();
    let w = rows[0].len();
    let mut dist = vec![vec![None; w]; h];
    if rows[from.1][from.0] == '#' {
        return dist;
    }
    dist[from.1][from.0] = Some(0);
    let mut queue = VecDeque::from([from]);
    while let Some((x, y)) = queue.pop_front() {
        let d = dist[y][x].unwrap();
        let mut next = Vec::new();
        if x > 0 {
            next.push((x - 1, y));
        }
        if x + 1 < w {
            next.push((x + 1, y));
        }
        if y > 0 {
            next.push((x, y - 1));
        }
        if y + 1 < h {
            next.push((x, y + 1));
        }
        for (nx, ny) in next {
            if rows[ny][nx] != '#' && dist[ny][nx].is_none() {
                dist[ny][nx] = Some(d + 1);
                queue.push_back((nx, ny));
            }
        }
    }
    dist
}

/// One-row ward: `C` false-goal site, resident home, nurse base, then a
/// straight corridor to the `D` appointment `dining_at` cells from home.
///
/// ```text
/// C1N.......D
/// ```
pub fn corridor_map(dining_at: usize) -> GridMap {
    let mut text = String::from("C1N");
    text.push_str(&".".repeat(dining_at - 2));
    text.push('D');
    let legend = Legend::from([
        ('1', LegendEntry::new("room", Role::PwdHome)),
        ('N', LegendEntry::new("station", Role::NurseBase)),
        ('C', LegendEntry::new("clinic", Role::AppointmentSite)),
        ('D', LegendEntry::new("dining", Role::AppointmentSite)),
    ]);
    parse_map(&text, &legend).unwrap()
}

/// Disorientation certain, detection certain, every hint fails, a nurse is
/// called at once, and nobody stumbles.
pub fn forced_params() -> (PwdParams, WatchConfig) {
    (
        PwdParams { p_d: 1.0, p_i: 0.0, p_noise: 0.0, p_forget: 0.0 },
        WatchConfig { enabled: true, p_detect: 1.0, n_help: 0, intervention_interval: 1 },
    )
}

pub fn corridor_scenario(dining_at: usize, horizon: u64, schedule: Vec<Appointment>) -> Scenario {
    let (params, watch) = forced_params();
    Scenario {
        map: Arc::new(corridor_map(dining_at)),
        pwds: vec![PwdConfig { home: "room".into(), schedule: Schedule::new(schedule), params, watch }],
        nurses: vec![NurseConfig { base: "station".into(), radius: DEFAULT_RADIUS }],
        horizon,
        seed: 42,
    }
}

/// Random scenario on the demo ward: roster sizes, probabilities, watch
/// settings and horizon all vary with `seed`.
pub fn random_scenario(template: &ScenarioTemplate, seed: u64) -> Scenario {
    let mut s = derive_stream(seed, 0, Purpose::Schedule);
    let mut t = template.clone();
    let pwds = 1 + s.below(t.pwds.len() as u64) as usize;
    t.pwds.truncate(pwds);
    t.nurses.truncate(1 + s.below(t.nurses.len() as u64) as usize);
    t.horizon = 2000 + s.below(4000);
    t.schedule.appointments = 1 + s.below(4) as usize;
    t.schedule.duration = s.below(200);
    for pwd in &mut t.pwds {
        pwd.params = PwdParams {
            p_d: s.next_f64() * 0.2,
            p_i: s.next_f64(),
            p_noise: s.next_f64() * 0.3,
            p_forget: s.next_f64() * 0.5,
        };
    }
    t.watch = WatchConfig {
        enabled: s.chance(0.8),
        p_detect: s.next_f64(),
        n_help: s.below(6) as u32,
        intervention_interval: 1 + s.below(3) as u32,
    };
    for nurse in &mut t.nurses {
        nurse.radius = s.next_f64() * 8.0;
    }
    t.build(seed).expect("random scenario is valid")
}

/// Outcome of following every resident through its events.
#[derive(Debug, Default)]
pub struct Episodes {
    pub started: usize,
    pub detected: usize,
    pub called: usize,
    pub guided: usize,
}

/// Replays each resident's events through the episode life cycle and
/// panics on any event that arrives out of order.
pub fn check_causality(log: &EventLog) -> Episodes {
    #[derive(Default, Clone)]
    struct S {
        disoriented: bool,
        detected: bool,
        called: bool,
        responder: Option<u32>,
        guide: Option<u32>,
        last_tick: u64,
    }
    let mut state: BTreeMap<u32, S> = BTreeMap::new();
    let mut out = Episodes::default();
    let mut last = 0;
    for e in &log.events {
        assert!(e.tick >= last, "events out of tick order at {e}");
        last = e.tick;
        let Some(pwd) = e.pwd() else { continue };
        let s = state.entry(pwd.0).or_default();
        assert!(e.tick >= s.last_tick);
        s.last_tick = e.tick;
        let nurse = e.nurse().map(|n| n.0);
        match &e.kind {
            EventKind::DisorientationStart { .. } => {
                assert!(!s.disoriented && s.guide.is_none(), "{e}");
                *s = S { disoriented: true, last_tick: e.tick, ..S::default() };
                out.started += 1;
            }
            EventKind::Detection => {
                assert!(s.disoriented && !s.detected, "{e}");
                s.detected = true;
                out.detected += 1;
            }
            EventKind::InterventionFail { .. } => assert!(s.detected && !s.called, "{e}"),
            EventKind::InterventionSuccess { .. } => {
                assert!(s.detected && !s.called && s.disoriented, "{e}");
                s.disoriented = false;
            }
            EventKind::NurseCalled { .. } => {
                assert!(s.detected && !s.called, "{e}");
                s.called = true;
                out.called += 1;
            }
            EventKind::ResponseStart { .. } => {
                assert!(s.disoriented && s.responder.is_none(), "{e}");
                s.responder = nurse;
            }
            EventKind::ResponseCancelled { .. } => {
                assert_eq!(s.responder, nurse, "{e}");
                s.responder = None;
            }
            EventKind::GuidanceStart { .. } => {
                assert!(s.disoriented && s.responder == nurse, "{e}");
                *s = S { guide: nurse, last_tick: e.tick, ..S::default() };
                out.guided += 1;
            }
            EventKind::GuidanceEnd { .. } => {
                assert_eq!(s.guide, nurse, "{e}");
                s.guide = None;
            }
            EventKind::TripEnd { .. } => {
                s.disoriented = false;
                s.detected = false;
                s.called = false;
            }
            _ => {}
        }
    }
    out
}

pub fn pos(x: u32, y: u32) -> Position {
    Position::new(x, y)
}
