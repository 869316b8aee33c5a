//! Parameter sweeps: a grid of (p_d, p_detect, strategy) levels crossed with
//! seeded replications, flattened into one row per agent and metric.
//!
//! Schedules depend only on `(base_seed, replication)`, so every strategy in a
//! replication sees the same appointments. Dynamics are keyed by
//! `(base_seed, config_id, replication)`.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::str::FromStr;

use rayon::prelude::*;
use thiserror::Error;

use crate::agents::{NurseId, PwdId, ScheduleError, WatchConfig};
use crate::engine::rng::combine;
use crate::engine::{run_simulation, Scenario, ScenarioError, ScenarioTemplate, Subject};
use crate::environment::Role;
use crate::metrics::build_report;

pub const DEFAULT_REPLICATIONS: usize = 200;

pub const ROWS_HEADER: &str = "config_id,replication,seed,p_d,p_detect,strategy,agent,metric,value";
pub const AGGREGATE_HEADER: &str = "p_d,p_detect,strategy,agent,metric,mean,std,count";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Strategy {
    NoWatch,
    /// Failed hints tolerated before calling a nurse.
    Watch(u32),
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Strategy::NoWatch => f.write_str("nowatch"),
            Strategy::Watch(n) => write!(f, "nhelp={n}"),
        }
    }
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "nowatch" {
            return Ok(Strategy::NoWatch);
        }
        s.strip_prefix("nhelp=")
            .and_then(|n| n.parse().ok())
            .map(Strategy::Watch)
            .ok_or_else(|| format!("bad strategy '{s}'"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Metric {
    Autonomy,
    TravelEfficiency,
    NurseEfficiency,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::Autonomy, Metric::TravelEfficiency, Metric::NurseEfficiency];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Autonomy => "autonomy",
            Metric::TravelEfficiency => "travel_efficiency",
            Metric::NurseEfficiency => "nurse_efficiency",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Metric::ALL.into_iter().find(|m| m.name() == s).ok_or_else(|| format!("bad metric '{s}'"))
    }
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub p_d: Vec<f64>,
    pub p_detect: Vec<f64>,
    pub strategies: Vec<Strategy>,
    pub replications: usize,
    pub base_seed: u64,
    /// Map, rosters, horizon and the per-resident p_i, p_noise, p_forget.
    /// The watch settings other than `enabled`, `p_detect` and `n_help` are
    /// taken from here too.
    pub template: ScenarioTemplate,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SweepError {
    #[error("InvalidSweep: {0}")]
    Invalid(String),
    #[error("InsufficientSites: {needed} distinct appointments per resident, {available} appointment_site labels")]
    InsufficientSites { needed: usize, available: usize },
    #[error("config {config_id} replication {replication}: {source}")]
    Run { config_id: usize, replication: usize, source: ScenarioError },
}

/// Coordinates of one scenario in the sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub config_id: usize,
    pub replication: usize,
    pub seed: u64,
    pub p_d: f64,
    pub p_detect: f64,
    pub strategy: Strategy,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub point: SweepPoint,
    pub agent: Subject,
    pub metric: Metric,
    pub value: f64,
}

impl SweepConfig {
    fn check(&self) -> Result<(), SweepError> {
        if self.replications == 0 {
            return Err(SweepError::Invalid("replications must be at least 1".into()));
        }
        if self.p_d.is_empty() || self.p_detect.is_empty() || self.strategies.is_empty() {
            return Err(SweepError::Invalid("every grid dimension needs at least one level".into()));
        }
        for &p in self.p_d.iter().chain(&self.p_detect) {
            if !(0.0..=1.0).contains(&p) {
                return Err(SweepError::Invalid(format!("probability level {p} is outside [0, 1]")));
            }
        }
        let needed = self.template.schedule.appointments;
        let available = self.template.map.labels_with_role(Role::AppointmentSite).len();
        let drawn = self.template.pwds.iter().any(|p| p.schedule.is_none());
        if drawn && available < needed {
            return Err(SweepError::InsufficientSites { needed, available });
        }
        Ok(())
    }

    /// Grid points in `config_id` order: p_d outermost, strategy innermost.
    pub fn levels(&self) -> Vec<(f64, f64, Strategy)> {
        let mut out = Vec::new();
        for &p_d in &self.p_d {
            for &p_detect in &self.p_detect {
                for &strategy in &self.strategies {
                    out.push((p_d, p_detect, strategy));
                }
            }
        }
        out
    }

    pub fn scenario_count(&self) -> usize {
        self.p_d.len() * self.p_detect.len() * self.strategies.len() * self.replications
    }
}

pub fn run_seed(base_seed: u64, config_id: usize, replication: usize) -> u64 {
    combine(combine(base_seed, config_id as u64), replication as u64)
}

pub fn schedule_key(base_seed: u64, replication: usize) -> u64 {
    combine(base_seed, replication as u64)
}

fn watch_for(base: WatchConfig, strategy: Strategy, p_detect: f64) -> WatchConfig {
    match strategy {
        Strategy::NoWatch => WatchConfig { enabled: false, p_detect, ..base },
        Strategy::Watch(n_help) => WatchConfig { enabled: true, p_detect, n_help, ..base },
    }
}

/// Every scenario of the sweep, in (config_id, replication) order.
pub fn expand_sweep(config: &SweepConfig) -> Result<Vec<(Scenario, SweepPoint)>, SweepError> {
    config.check()?;
    let schedules = (0..config.replications)
        .map(|r| {
            config.template.schedules(schedule_key(config.base_seed, r)).map_err(|e| match e {
                ScenarioError::Schedule(ScheduleError::InsufficientSites { needed, available }) => {
                    SweepError::InsufficientSites { needed, available }
                }
                source => SweepError::Run { config_id: 0, replication: r, source },
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut out = Vec::with_capacity(config.scenario_count());
    for (config_id, (p_d, p_detect, strategy)) in config.levels().into_iter().enumerate() {
        let mut template = config.template.clone();
        template.watch = watch_for(template.watch, strategy, p_detect);
        for pwd in &mut template.pwds {
            pwd.params.p_d = p_d;
        }
        for (replication, schedule) in schedules.iter().enumerate() {
            let seed = run_seed(config.base_seed, config_id, replication);
            let point = SweepPoint { config_id, replication, seed, p_d, p_detect, strategy };
            out.push((template.instantiate(schedule.clone(), seed), point));
        }
    }
    Ok(out)
}

fn run_one(scenario: &Scenario, point: SweepPoint) -> Result<Vec<SweepRow>, SweepError> {
    let log = run_simulation(scenario).map_err(|source| SweepError::Run {
        config_id: point.config_id,
        replication: point.replication,
        source,
    })?;
    let report = build_report(&log);
    let mut rows = Vec::with_capacity(2 * report.pwds.len() + report.nurses.len());
    for p in &report.pwds {
        let agent = Subject::Pwd(p.id);
        rows.push(SweepRow { point, agent, metric: Metric::Autonomy, value: p.autonomy });
        if let Some(te) = p.travel_efficiency {
            rows.push(SweepRow { point, agent, metric: Metric::TravelEfficiency, value: te });
        }
    }
    for n in &report.nurses {
        rows.push(SweepRow {
            point,
            agent: Subject::Nurse(n.id),
            metric: Metric::NurseEfficiency,
            value: n.efficiency,
        });
    }
    Ok(rows)
}

/// Runs the sweep on `jobs` threads (all available when `None`). Output order
/// does not depend on `jobs`.
pub fn run_sweep(config: &SweepConfig, jobs: Option<usize>) -> Result<Vec<SweepRow>, SweepError> {
    let work = expand_sweep(config)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| SweepError::Invalid(format!("cannot start worker threads: {e}")))?;
    let chunks: Vec<Vec<SweepRow>> = pool.install(|| {
        work.par_iter().map(|(s, p)| run_one(s, *p)).collect::<Result<_, _>>()
    })?;
    let mut rows: Vec<SweepRow> = chunks.into_iter().flatten().collect();
    rows.sort_by_key(|r| (r.point.config_id, r.point.replication, r.agent, r.metric));
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    pub p_d: f64,
    pub p_detect: f64,
    pub strategy: Strategy,
    /// `None` pools all agents.
    pub agent: Option<Subject>,
    pub metric: Metric,
    pub mean: f64,
    /// Sample standard deviation; 0 for a single value.
    pub std: f64,
    pub count: usize,
}

/// Probabilities are non-negative, so their bit patterns sort numerically.
type GroupKey = (u64, u64, Strategy, Metric, Option<Subject>);

/// Mean and sample standard deviation per (p_d, p_detect, strategy, agent,
/// metric), plus a pooled group per metric with `agent = None`.
pub fn aggregate(rows: &[SweepRow]) -> Vec<Aggregate> {
    let mut groups: BTreeMap<GroupKey, Vec<f64>> = BTreeMap::new();
    for r in rows {
        let p = &r.point;
        for agent in [Some(r.agent), None] {
            let key = (p.p_d.to_bits(), p.p_detect.to_bits(), p.strategy, r.metric, agent);
            groups.entry(key).or_default().push(r.value);
        }
    }
    groups
        .into_iter()
        .map(|((p_d, p_detect, strategy, metric, agent), values)| {
            let (mean, std) = mean_std(&values);
            Aggregate {
                p_d: f64::from_bits(p_d),
                p_detect: f64::from_bits(p_detect),
                strategy,
                agent,
                metric,
                mean,
                std,
                count: values.len(),
            }
        })
        .collect()
}

pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
    (mean, (ss / (n - 1.0)).sqrt())
}

pub fn rows_csv(rows: &[SweepRow]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(ROWS_HEADER);
    out.push('\n');
    for r in rows {
        let p = &r.point;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{:.2}",
            p.config_id, p.replication, p.seed, p.p_d, p.p_detect, p.strategy, r.agent, r.metric, r.value
        );
    }
    out
}

fn agent_label(agent: Option<Subject>) -> String {
    agent.map_or_else(|| "all".to_string(), |a| a.to_string())
}

pub fn aggregate_csv(aggregates: &[Aggregate]) -> String {
    let mut out = String::from(AGGREGATE_HEADER);
    out.push('\n');
    for a in aggregates {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{:.2},{:.2},{}",
            a.p_d, a.p_detect, a.strategy, agent_label(a.agent), a.metric, a.mean, a.std, a.count
        );
    }
    out
}

/// One series file per metric, named `<metric>.csv`, holding the aggregates
/// for that metric only.
pub fn figure_series(aggregates: &[Aggregate]) -> Vec<(String, String)> {
    Metric::ALL
        .into_iter()
        .map(|m| {
            let mut out = String::from("p_d,p_detect,strategy,agent,mean,std,count\n");
            for a in aggregates.iter().filter(|a| a.metric == m) {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{:.2},{:.2},{}",
                    a.p_d, a.p_detect, a.strategy, agent_label(a.agent), a.mean, a.std, a.count
                );
            }
            (format!("{m}.csv"), out)
        })
        .collect()
}

/// Parses one line of [`rows_csv`] output; values keep their two decimals.
pub fn parse_row(line: &str) -> Result<SweepRow, String> {
    let f: Vec<&str> = line.split(',').collect();
    let [config_id, replication, seed, p_d, p_detect, strategy, agent, metric, value] = f[..] else {
        return Err(format!("expected 9 fields in '{line}'"));
    };
    let num = |s: &str| s.parse::<f64>().map_err(|_| format!("bad number '{s}'"));
    let int = |s: &str| s.parse::<u64>().map_err(|_| format!("bad integer '{s}'"));
    let agent = if let Ok(p) = agent.parse::<PwdId>() {
        Subject::Pwd(p)
    } else {
        Subject::Nurse(agent.parse::<NurseId>().map_err(|_| format!("bad agent '{agent}'"))?)
    };
    Ok(SweepRow {
        point: SweepPoint {
            config_id: int(config_id)? as usize,
            replication: int(replication)? as usize,
            seed: int(seed)?,
            p_d: num(p_d)?,
            p_detect: num(p_detect)?,
            strategy: strategy.parse()?,
        },
        agent,
        metric: metric.parse()?,
        value: num(value)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(value: f64, agent: u32, strategy: Strategy) -> SweepRow {
        SweepRow {
            point: SweepPoint { config_id: 0, replication: 0, seed: 1, p_d: 0.5, p_detect: 0.5, strategy },
            agent: Subject::Pwd(PwdId(agent)),
            metric: Metric::Autonomy,
            value,
        }
    }

    #[test]
    fn strategy_text() {
        assert_eq!(Strategy::NoWatch.to_string(), "nowatch");
        assert_eq!(Strategy::Watch(3).to_string(), "nhelp=3");
        assert_eq!("nhelp=5".parse::<Strategy>(), Ok(Strategy::Watch(5)));
        assert!("nhelp=x".parse::<Strategy>().is_err());
    }

    #[test]
    fn single_value_has_zero_spread() {
        let a = aggregate(&[row(42.0, 0, Strategy::Watch(1))]);
        assert_eq!(a.len(), 2);
        assert!(a.iter().all(|a| a.mean == 42.0 && a.std == 0.0 && a.count == 1));
    }

    #[test]
    fn two_values() {
        let rows = [row(80.0, 0, Strategy::NoWatch), row(90.0, 1, Strategy::NoWatch)];
        let pooled = aggregate(&rows).into_iter().find(|a| a.agent.is_none()).unwrap();
        assert_eq!(pooled.mean, 85.0);
        assert!((pooled.std - 7.0710678).abs() < 1e-6);
        assert_eq!(pooled.count, 2);
    }

    #[test]
    fn csv_row_round_trip() {
        let r = row(66.666, 2, Strategy::Watch(4));
        let text = rows_csv(&[r]);
        let line = text.lines().nth(1).unwrap();
        assert_eq!(line, "0,0,1,0.5,0.5,nhelp=4,pwd:2,autonomy,66.67");
        let back = parse_row(line).unwrap();
        assert_eq!(back.value, 66.67);
        assert_eq!(back.agent, r.agent);
    }
}
