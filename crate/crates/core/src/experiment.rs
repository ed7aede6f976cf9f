//! Parameter sweeps over many seeded runs, aggregated into CSV tables.
//!
//! A campaign file is TOML:
//!
//! ```toml
//! name = "cs-sweep"
//! schemes = ["random", "fresh", "ideal"]
//! runs_per_point = 200
//! seed_base = 1
//! sweep = { cs = [1, 5, 10, 15, 20] }   # or { n = [...] }, or "none"
//!
//! [base]          # any SimConfig field; omitted fields keep their defaults
//! n_swarm = 15
//! duration = 600.0
//! ```

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{Scheme, SimConfig};
use crate::engine::{contact_statistics, mean_delay, pdr, run, RunMetrics, TraceRow};
use crate::error::{CampaignError, ConfigError};
use crate::stats::{aggregate, AggregateStats};

pub const CONFIDENCE: f64 = 0.95;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sweep {
    Cs(Vec<usize>),
    N(Vec<usize>),
    None,
}

impl Sweep {
    pub fn label(&self) -> &'static str {
        match self {
            Sweep::Cs(_) => "cs",
            Sweep::N(_) => "n",
            Sweep::None => "none",
        }
    }

    /// Sweep values in ascending order, without duplicates.
    fn points(&self) -> Vec<Option<usize>> {
        let mut v = match self {
            Sweep::Cs(v) | Sweep::N(v) => v.clone(),
            Sweep::None => return vec![None],
        };
        v.sort_unstable();
        v.dedup();
        v.into_iter().map(Some).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Campaign {
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub base: SimConfig,
    pub sweep: Sweep,
    pub schemes: Vec<Scheme>,
    pub runs_per_point: usize,
    #[serde(default)]
    pub seed_base: u64,
}

impl Campaign {
    /// Scheme comparison over contact sizes 1..=20 at the default swarm size.
    pub fn cs_sweep() -> Self {
        Campaign {
            name: "paper-cs".into(),
            base: SimConfig::default(),
            sweep: Sweep::Cs((1..=20).collect()),
            schemes: Scheme::ALL.to_vec(),
            runs_per_point: 200,
            seed_base: 1,
        }
    }

    /// Scheme comparison over swarm sizes 1..=30 at contact size 10.
    pub fn n_sweep() -> Self {
        Campaign {
            name: "paper-n".into(),
            base: SimConfig {
                cs: 10,
                ..SimConfig::default()
            },
            sweep: Sweep::N((1..=30).collect()),
            schemes: Scheme::ALL.to_vec(),
            runs_per_point: 200,
            seed_base: 1,
        }
    }

    pub fn builtin(name: &str) -> Option<Self> {
        match name {
            "paper-cs" => Some(Self::cs_sweep()),
            "paper-n" => Some(Self::n_sweep()),
            _ => None,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let c: Campaign = toml::from_str(text).map_err(|e| ConfigError::Invalid(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    /// Loads a built-in campaign by name, or a campaign file from disk.
    pub fn load(name_or_path: &str) -> Result<Self, CampaignError> {
        if let Some(c) = Self::builtin(name_or_path) {
            return Ok(c);
        }
        let path = PathBuf::from(name_or_path);
        let text = fs::read_to_string(&path).map_err(|source| CampaignError::Io {
            path: path.clone(),
            source,
        })?;
        Self::from_toml(&text).map_err(|e| CampaignError::Parse {
            path,
            message: e.to_string(),
        })
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.runs_per_point == 0 {
            return Err(ConfigError::Invalid(
                "runs_per_point must be positive".into(),
            ));
        }
        if self.schemes.is_empty() {
            return Err(ConfigError::Invalid(
                "at least one scheme is required".into(),
            ));
        }
        if let Sweep::Cs(v) | Sweep::N(v) = &self.sweep {
            if v.is_empty() {
                return Err(ConfigError::Invalid("sweep has no values".into()));
            }
        }
        for value in self.sweep.points() {
            self.config_for(self.schemes[0], value, 0).validate()?;
        }
        Ok(())
    }

    fn schemes_sorted(&self) -> Vec<Scheme> {
        let mut s = self.schemes.clone();
        s.sort_unstable();
        s.dedup();
        s
    }

    /// Configuration of one run. Run `k` of every point shares seed
    /// `seed_base + k`, so points and schemes are compared on paired draws.
    pub fn config_for(&self, scheme: Scheme, value: Option<usize>, run: usize) -> SimConfig {
        let mut cfg = self.base.clone();
        cfg.scheme = scheme;
        cfg.seed = self.seed_base.wrapping_add(run as u64);
        match (&self.sweep, value) {
            (Sweep::Cs(_), Some(v)) => cfg.cs = v,
            (Sweep::N(_), Some(v)) => cfg.n_swarm = v,
            _ => {}
        }
        cfg
    }
}

/// Per-run figures kept after the full metrics are discarded.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub seed: u64,
    pub pdr: f64,
    /// Mean delay in seconds; absent without receptions.
    pub delay: Option<f64>,
    pub contact: Option<f64>,
    pub cbr_sent: u64,
    pub cbr_received: u64,
    pub conserved: bool,
    pub auditor_violations: u64,
    pub channel_violations: u64,
    pub chain_completed: bool,
}

impl RunSummary {
    pub fn from_metrics(seed: u64, m: &RunMetrics) -> Self {
        RunSummary {
            seed,
            pdr: pdr(m).unwrap_or(0.0),
            delay: mean_delay(m),
            contact: contact_statistics(m),
            cbr_sent: m.cbr_sent,
            cbr_received: m.cbr_received,
            conserved: m.is_conserved(),
            auditor_violations: m.auditor_violations,
            channel_violations: m.channel_violations,
            chain_completed: m.chain_completion_time.is_some(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointResult {
    pub scheme: Scheme,
    pub value: Option<usize>,
    pub runs: Vec<RunSummary>,
    pub pdr: Option<AggregateStats>,
    /// Aggregated over runs with at least one reception, in seconds.
    pub delay: Option<AggregateStats>,
}

impl PointResult {
    fn new(scheme: Scheme, value: Option<usize>, runs: Vec<RunSummary>) -> Self {
        let pdrs: Vec<f64> = runs.iter().map(|r| r.pdr).collect();
        let delays: Vec<f64> = runs.iter().filter_map(|r| r.delay).collect();
        PointResult {
            scheme,
            value,
            pdr: aggregate(&pdrs, CONFIDENCE),
            delay: aggregate(&delays, CONFIDENCE),
            runs,
        }
    }

    pub fn pdr_mean(&self) -> f64 {
        crate::stats::mean(&self.runs.iter().map(|r| r.pdr).collect::<Vec<_>>()).unwrap_or(0.0)
    }

    pub fn delay_mean(&self) -> Option<f64> {
        crate::stats::mean(&self.runs.iter().filter_map(|r| r.delay).collect::<Vec<_>>())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CampaignResult {
    pub sweep: &'static str,
    pub points: Vec<PointResult>,
}

/// Runs a single point: `runs` seeded executions of one configuration.
pub fn run_point(c: &Campaign, scheme: Scheme, value: Option<usize>) -> PointResult {
    let runs = (0..c.runs_per_point)
        .into_par_iter()
        .map(|k| {
            let cfg = c.config_for(scheme, value, k);
            let m = run(&cfg).expect("campaign configurations are validated up front");
            RunSummary::from_metrics(cfg.seed, &m)
        })
        .collect();
    PointResult::new(scheme, value, runs)
}

/// Executes every (scheme, value) point. Results are ordered by scheme then
/// sweep value regardless of how runs were scheduled on the workers.
pub fn run_campaign(c: &Campaign, workers: Option<usize>) -> Result<CampaignResult, CampaignError> {
    c.validate()?;
    let jobs: Vec<(Scheme, Option<usize>)> = c
        .schemes_sorted()
        .into_iter()
        .flat_map(|s| c.sweep.points().into_iter().map(move |v| (s, v)))
        .collect();
    let body = || {
        jobs.par_iter()
            .map(|&(s, v)| run_point(c, s, v))
            .collect::<Vec<_>>()
    };
    let points = match workers {
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k.max(1))
            .build()
            .map_err(|e| ConfigError::Invalid(format!("worker pool: {e}")))?
            .install(body),
        None => body(),
    };
    Ok(CampaignResult {
        sweep: c.sweep.label(),
        points,
    })
}

pub const CSV_HEADER: [&str; 10] = [
    "scheme",
    "sweep",
    "value",
    "n_runs",
    "pdr_mean",
    "pdr_ci_low",
    "pdr_ci_high",
    "delay_mean_ms",
    "delay_ci_low",
    "delay_ci_high",
];

fn fmt6(x: f64) -> String {
    format!("{x:.6}")
}

fn csv_fields(sweep: &str, p: &PointResult) -> [String; 10] {
    let ms = |x: f64| fmt6(x * 1e3);
    [
        p.scheme.name().to_string(),
        sweep.to_string(),
        p.value.map(|v| v.to_string()).unwrap_or_default(),
        p.runs.len().to_string(),
        fmt6(p.pdr_mean()),
        p.pdr.map(|s| fmt6(s.ci_low)).unwrap_or_default(),
        p.pdr.map(|s| fmt6(s.ci_high)).unwrap_or_default(),
        p.delay_mean().map(ms).unwrap_or_default(),
        p.delay.map(|s| ms(s.ci_low)).unwrap_or_default(),
        p.delay.map(|s| ms(s.ci_high)).unwrap_or_default(),
    ]
}

pub fn write_csv(result: &CampaignResult, path: &Path) -> Result<(), CampaignError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    w.write_record(CSV_HEADER).map_err(|e| csv_error(path, e))?;
    for p in &result.points {
        w.write_record(csv_fields(result.sweep, p))
            .map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|source| CampaignError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn csv_error(path: &Path, e: csv::Error) -> CampaignError {
    if e.is_io_error() {
        if let csv::ErrorKind::Io(source) = e.into_kind() {
            return CampaignError::Io {
                path: path.to_path_buf(),
                source,
            };
        }
        unreachable!("is_io_error implies an Io kind");
    }
    CampaignError::Csv(e)
}

/// Whitespace table for gnuplot: one block per scheme, separated by two
/// blank lines so that `index` selects a scheme. Missing values print as `?`.
pub fn gnuplot_table(result: &CampaignResult) -> String {
    let mut out = String::new();
    let mut current: Option<Scheme> = None;
    for p in &result.points {
        if current != Some(p.scheme) {
            if current.is_some() {
                out.push_str("\n\n");
            }
            let _ = writeln!(
                out,
                "# {}\n# value pdr_mean pdr_ci_low pdr_ci_high delay_mean_ms delay_ci_low delay_ci_high",
                p.scheme
            );
            current = Some(p.scheme);
        }
        let f = csv_fields(result.sweep, p);
        let cell = |s: &String| {
            if s.is_empty() {
                "?".to_string()
            } else {
                s.clone()
            }
        };
        let value = if f[2].is_empty() {
            "0".to_string()
        } else {
            f[2].clone()
        };
        let _ = writeln!(
            out,
            "{value} {}",
            f[4..].iter().map(cell).collect::<Vec<_>>().join(" ")
        );
    }
    out
}

/// Writes `<name>.csv` and `<name>.dat` into `dir`, creating it if needed.
pub fn write_outputs(
    result: &CampaignResult,
    dir: &Path,
    name: &str,
) -> Result<(PathBuf, PathBuf), CampaignError> {
    fs::create_dir_all(dir).map_err(|source| CampaignError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let csv_path = dir.join(format!("{name}.csv"));
    write_csv(result, &csv_path)?;
    let dat_path = dir.join(format!("{name}.dat"));
    fs::write(&dat_path, gnuplot_table(result)).map_err(|source| CampaignError::Io {
        path: dat_path.clone(),
        source,
    })?;
    Ok((csv_path, dat_path))
}

/// Writes a trajectory trace as CSV with columns time, node, role, x, y.
pub fn write_trace(rows: &[TraceRow], path: &Path) -> Result<(), CampaignError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    for r in rows {
        w.serialize(r).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|source| CampaignError::Io {
        path: path.to_path_buf(),
        source,
    })
}
