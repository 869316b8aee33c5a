//! Sweep grid specs: `key=v1,v2;key=...`.
//!
//! Keys `p_d`, `p_detect` and `strategy` take lists; `p_i` and `p_noise` take a
//! single value applied to every resident. Strategies are `nowatch`,
//! `nhelp=k` or `nhelp=a..b` (inclusive). Omitted keys keep the scenario's
//! values.

use thiserror::Error;

use crate::engine::ScenarioTemplate;
use crate::experiment::{Strategy, SweepConfig};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("malformed grid token '{0}'")]
pub struct GridError(pub String);

#[derive(Debug, Clone, Default, PartialEq)]
pub struct GridSpec {
    pub p_d: Option<Vec<f64>>,
    pub p_detect: Option<Vec<f64>>,
    pub strategies: Option<Vec<Strategy>>,
    pub p_i: Option<f64>,
    pub p_noise: Option<f64>,
}

fn probability(token: &str) -> Result<f64, GridError> {
    token
        .parse::<f64>()
        .ok()
        .filter(|p| (0.0..=1.0).contains(p))
        .ok_or_else(|| GridError(token.to_string()))
}

fn strategies(list: &str) -> Result<Vec<Strategy>, GridError> {
    let mut out = Vec::new();
    for token in list.split(',') {
        let bad = || GridError(token.to_string());
        if token == "nowatch" {
            out.push(Strategy::NoWatch);
            continue;
        }
        let n = token.strip_prefix("nhelp=").ok_or_else(bad)?;
        match n.split_once("..") {
            Some((lo, hi)) => {
                let lo: u32 = lo.parse().map_err(|_| bad())?;
                let hi: u32 = hi.parse().map_err(|_| bad())?;
                if lo > hi {
                    return Err(bad());
                }
                out.extend((lo..=hi).map(Strategy::Watch));
            }
            None => out.push(Strategy::Watch(n.parse().map_err(|_| bad())?)),
        }
    }
    Ok(out)
}

impl GridSpec {
    /// Five disorientation levels, two detection rates, no watch plus
    /// n_help 0 to 5, and p_i = 0.2.
    pub fn reference() -> Self {
        Self {
            p_d: Some(vec![0.0, 0.25, 0.5, 0.75, 1.0]),
            p_detect: Some(vec![0.5, 0.2]),
            strategies: Some(
                std::iter::once(Strategy::NoWatch).chain((0..=5).map(Strategy::Watch)).collect(),
            ),
            p_i: Some(0.2),
            p_noise: None,
        }
    }

    pub fn parse(text: &str) -> Result<Self, GridError> {
        let mut spec = GridSpec::default();
        for part in text.split(';').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, value) = part.split_once('=').ok_or_else(|| GridError(part.to_string()))?;
            let list = || value.split(',').map(probability).collect::<Result<Vec<_>, _>>();
            match key.trim() {
                "p_d" => spec.p_d = Some(list()?),
                "p_detect" => spec.p_detect = Some(list()?),
                "strategy" => spec.strategies = Some(strategies(value)?),
                "p_i" => spec.p_i = Some(probability(value)?),
                "p_noise" => spec.p_noise = Some(probability(value)?),
                _ => return Err(GridError(key.to_string())),
            }
        }
        Ok(spec)
    }

    /// Keys set in `other` win.
    pub fn overlay(self, other: GridSpec) -> GridSpec {
        GridSpec {
            p_d: other.p_d.or(self.p_d),
            p_detect: other.p_detect.or(self.p_detect),
            strategies: other.strategies.or(self.strategies),
            p_i: other.p_i.or(self.p_i),
            p_noise: other.p_noise.or(self.p_noise),
        }
    }

    pub fn sweep(
        &self,
        mut template: ScenarioTemplate,
        replications: usize,
        base_seed: u64,
    ) -> Result<SweepConfig, String> {
        for pwd in &mut template.pwds {
            if let Some(p) = self.p_i {
                pwd.params.p_i = p;
            }
            if let Some(p) = self.p_noise {
                pwd.params.p_noise = p;
            }
        }
        let p_d = match &self.p_d {
            Some(levels) => levels.clone(),
            None => {
                let mut levels: Vec<f64> = template.pwds.iter().map(|p| p.params.p_d).collect();
                levels.sort_by(f64::total_cmp);
                levels.dedup();
                if levels.len() > 1 {
                    return Err("residents have different p_d; the grid must set p_d".into());
                }
                levels
            }
        };
        let watch = template.watch;
        let p_detect = self.p_detect.clone().unwrap_or_else(|| vec![watch.p_detect]);
        let strategies = self.strategies.clone().unwrap_or_else(|| {
            vec![if watch.enabled { Strategy::Watch(watch.n_help) } else { Strategy::NoWatch }]
        });
        if p_d.is_empty() {
            return Err("the scenario has no residents to sweep".into());
        }
        Ok(SweepConfig { p_d, p_detect, strategies, replications, base_seed, template })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_lists_and_ranges() {
        let g = GridSpec::parse("p_d=0,0.5;p_detect=0.5;strategy=nowatch,nhelp=0..2").unwrap();
        assert_eq!(g.p_d, Some(vec![0.0, 0.5]));
        assert_eq!(g.p_detect, Some(vec![0.5]));
        assert_eq!(
            g.strategies,
            Some(vec![Strategy::NoWatch, Strategy::Watch(0), Strategy::Watch(1), Strategy::Watch(2)])
        );
    }

    #[test]
    fn names_the_offending_token() {
        assert_eq!(GridSpec::parse("p_d=0,x"), Err(GridError("x".into())));
        assert_eq!(GridSpec::parse("p_d=1.5"), Err(GridError("1.5".into())));
        assert_eq!(GridSpec::parse("speed=2"), Err(GridError("speed".into())));
        assert_eq!(GridSpec::parse("strategy=nhelp=3..1"), Err(GridError("nhelp=3..1".into())));
        assert_eq!(GridSpec::parse("p_d"), Err(GridError("p_d".into())));
    }

    #[test]
    fn reference_grid_size() {
        let g = GridSpec::reference();
        let n = g.p_d.unwrap().len() * g.p_detect.unwrap().len() * g.strategies.unwrap().len();
        assert_eq!(n, 70);
    }

    #[test]
    fn overlay_prefers_later_keys() {
        let g = GridSpec::reference().overlay(GridSpec::parse("p_d=0.5").unwrap());
        assert_eq!(g.p_d, Some(vec![0.5]));
        assert_eq!(g.p_detect, Some(vec![0.5, 0.2]));
    }
}
