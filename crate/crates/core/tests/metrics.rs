mod common;

use common::{demo_template, random_scenario};
use ecq_core::agents::PwdId;
use ecq_core::engine::{run_simulation, EventLog, ModeTag};
use ecq_core::metrics::{autonomy, build_report, trip_records};

#[test]
fn report_from_parsed_log_matches_inline_report() {
    let template = demo_template();
    for seed in 0..5 {
        let log = run_simulation(&random_scenario(&template, seed)).unwrap();
        let parsed = EventLog::parse(&log.serialize()).unwrap();
        assert_eq!(build_report(&parsed), build_report(&log));
        assert_eq!(build_report(&parsed).to_json(), build_report(&log).to_json());
    }
}

#[test]
fn percentages_and_trip_bounds() {
    let template = demo_template();
    let mut trips = 0;
    for seed in 100..130 {
        let log = run_simulation(&random_scenario(&template, seed)).unwrap();
        let report = build_report(&log);
        for p in &report.pwds {
            assert!((0.0..=100.0).contains(&p.autonomy));
            // Autonomy and the guided share account for the whole horizon.
            let guided = log.pwd_ticks(p.id, ModeTag::Guided).unwrap();
            assert_eq!(guided, p.t_guided);
            let total = p.autonomy + 100.0 * guided as f64 / log.horizon as f64;
            assert!((total - 100.0).abs() < 1e-9);
            if let Some(te) = p.travel_efficiency {
                assert!((0.0..=100.0).contains(&te));
            }
            for trip in trip_records(&log, p.id).unwrap() {
                if let Some(taken) = trip.t_taken {
                    assert!(taken >= u64::from(trip.t_nominal), "{trip:?}");
                    trips += 1;
                }
            }
        }
        for n in &report.nurses {
            assert!((0.0..=100.0).contains(&n.efficiency));
        }
    }
    assert!(trips > 100);
}

#[test]
fn forced_scenario_calls_every_episode() {
    let mut t = demo_template();
    let (params, watch) = common::forced_params();
    for p in &mut t.pwds {
        p.params = params;
    }
    t.watch = watch;
    let report = build_report(&run_simulation(&t.build(8).unwrap()).unwrap());
    assert!(report.episodes() > 0);
    assert_eq!(report.calls(), report.episodes());
}

#[test]
fn unwatched_and_unseen_means_idle_nurses() {
    let mut t = demo_template();
    t.watch.enabled = false;
    for p in &mut t.pwds {
        p.params.p_d = 0.05;
    }
    for n in &mut t.nurses {
        n.radius = 0.0;
    }
    let mut checked = 0;
    for seed in 0..20 {
        let log = run_simulation(&t.build(seed).unwrap()).unwrap();
        let report = build_report(&log);
        if report.nurses.iter().all(|n| n.responses == 0) {
            assert!(report.nurses.iter().all(|n| n.efficiency == 100.0));
            checked += 1;
        }
    }
    assert!(checked > 0);
}

#[test]
fn calm_ward_is_fully_autonomous() {
    let mut t = demo_template();
    t.watch.enabled = false;
    for p in &mut t.pwds {
        p.params.p_d = 0.0;
    }
    let log = run_simulation(&t.build(2).unwrap()).unwrap();
    for i in 0..5 {
        assert_eq!(autonomy(&log, PwdId(i)).unwrap(), 100.0);
    }
    let report = build_report(&log);
    assert_eq!(report.episodes(), 0);
    assert!(report.nurses.iter().all(|n| n.efficiency == 100.0));
}
