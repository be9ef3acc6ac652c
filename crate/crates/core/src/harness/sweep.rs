use std::path::PathBuf;

use rayon::prelude::*;

use super::{run_experiment, HarnessError, MetricsReport, Scenario, ScenarioConfig};
use crate::sim::SimTime;
use crate::switch::Q0Mode;

/// A parsed experiment grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    pub runs: Vec<ScenarioConfig>,
    pub out: Option<PathBuf>,
}

fn list<T, F>(key: &str, value: &str, parse: F) -> Result<Vec<T>, HarnessError>
where
    F: Fn(&str) -> Option<T>,
{
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse(s).ok_or_else(|| HarnessError::Config(format!("bad value '{s}' for '{key}'"))))
        .collect()
}

/// Parse a `key = value` grid. List values are comma separated and the
/// grid is the cartesian product of all lists. `video` takes `mean:sigma`
/// pairs; otherwise `video_mean` and `video_sigma` are crossed.
///
/// ```text
/// scenario = wan
/// mss = 512, 9140
/// video = 5:5, 7.5:7, 10:5
/// seed = 1, 2, 3
/// ```
pub fn parse_matrix(text: &str) -> Result<Matrix, HarnessError> {
    let mut scenarios = vec![Scenario::Wan];
    let mut mss = vec![512u32, 9140];
    let mut pairs: Option<Vec<(f64, f64)>> = None;
    let mut means: Option<Vec<f64>> = None;
    let mut sigmas: Option<Vec<f64>> = None;
    let mut hursts = vec![0.8];
    let mut seeds = vec![1u64];
    let mut duration: Option<f64> = None;
    let mut n_tcp = None;
    let mut n_video = None;
    let mut sat_ms = None;
    let mut q0_mode = None;
    let mut out = None;

    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| HarnessError::Config(format!("line {}: expected key = value", n + 1)))?;
        let (key, value) = (key.trim(), value.trim());
        match key {
            "scenario" => scenarios = list(key, value, |s| s.parse().ok())?,
            "mss" => mss = list(key, value, |s| s.parse().ok())?,
            "video" => {
                pairs = Some(list(key, value, |s| {
                    let (m, sd) = s.split_once(':')?;
                    Some((m.trim().parse().ok()?, sd.trim().parse().ok()?))
                })?)
            }
            "video_mean" => means = Some(list(key, value, |s| s.parse().ok())?),
            "video_sigma" => sigmas = Some(list(key, value, |s| s.parse().ok())?),
            "hurst" => hursts = list(key, value, |s| s.parse().ok())?,
            "seed" => seeds = list(key, value, |s| s.parse().ok())?,
            "duration" => duration = Some(value.parse().map_err(|_| HarnessError::Config(format!("bad duration '{value}'")))?),
            "n_tcp" => n_tcp = Some(value.parse().map_err(|_| HarnessError::Config(format!("bad n_tcp '{value}'")))?),
            "n_video" => n_video = Some(value.parse().map_err(|_| HarnessError::Config(format!("bad n_video '{value}'")))?),
            "sat_one_way_ms" => sat_ms = Some(value.parse::<u64>().map_err(|_| HarnessError::Config(format!("bad sat_one_way_ms '{value}'")))?),
            "q0_mode" => q0_mode = Some(value.parse::<Q0Mode>().map_err(HarnessError::Config)?),
            "out" => out = Some(PathBuf::from(value)),
            other => return Err(HarnessError::Config(format!("line {}: unknown key '{other}'", n + 1))),
        }
    }

    let video = match (pairs, means, sigmas) {
        (Some(p), None, None) => p,
        (Some(_), _, _) => {
            return Err(HarnessError::Config("use either 'video' or 'video_mean'/'video_sigma'".into()))
        }
        (None, m, s) => {
            let m = m.unwrap_or_else(|| vec![5.0]);
            let s = s.unwrap_or_else(|| vec![5.0]);
            m.iter().flat_map(|&a| s.iter().map(move |&b| (a, b))).collect()
        }
    };
    if let Some(d) = duration {
        if !(d > 0.0) {
            return Err(HarnessError::Config(format!("duration must be positive, got {d}")));
        }
    }

    let mut runs = Vec::new();
    for &scenario in &scenarios {
        for &m in &mss {
            for &(mean, sigma) in &video {
                for &h in &hursts {
                    for &seed in &seeds {
                        let mut c = ScenarioConfig::new(scenario, m, mean, sigma, seed);
                        c.hurst = h;
                        if let Some(d) = duration {
                            c.duration = SimTime::from_secs_f64(d);
                        }
                        if let Some(n) = n_tcp {
                            c.n_tcp = n;
                        }
                        if let Some(n) = n_video {
                            c.n_video = n;
                        }
                        if let Some(ms) = sat_ms {
                            c.sat_one_way = SimTime::from_millis(ms);
                        }
                        if let Some(q) = q0_mode {
                            c.erica.q0_mode = q;
                        }
                        c.validate()?;
                        runs.push(c);
                    }
                }
            }
        }
    }
    Ok(Matrix { runs, out })
}

/// Run every grid point, in parallel, returning reports in grid order.
pub fn run_sweep(matrix: &Matrix) -> Result<Vec<MetricsReport>, HarnessError> {
    matrix.runs.par_iter().map(run_experiment).collect()
}
