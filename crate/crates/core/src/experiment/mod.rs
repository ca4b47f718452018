//! Experiment descriptions, TOML configuration and CSV output.
//!
//! The configuration boundary uses degrees, milliwatts and decibels; the
//! engines see SI units only.

mod presets;

use std::fmt::Write as _;
use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytics::{optimize_tx_prob, Analytic};
use crate::desim::{self, MacConfig, Protocol, Region};
use crate::error::{Error, Result};
use crate::model::{AntennaPattern, Channel, DmaxMode, Scenario};
use crate::montecarlo;

pub use presets::{figure_preset, FIGURE_IDS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    Analytic,
    Montecarlo,
    Desim,
}

impl Engine {
    pub fn name(&self) -> &'static str {
        match self {
            Engine::Analytic => "analytic",
            Engine::Montecarlo => "montecarlo",
            Engine::Desim => "desim",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelConfig {
    pub tx_power_mw: f64,
    /// Channel gain at 1 m, in dB (negative).
    pub ref_gain_db: f64,
    pub pathloss_exponent: f64,
    pub sinr_threshold_db: f64,
    pub noise_power_dbm: f64,
    pub absorption_db_per_km: f64,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        let c = Channel::mmwave_60ghz();
        Self {
            tx_power_mw: c.tx_power * 1e3,
            ref_gain_db: 10.0 * c.ref_attenuation.log10(),
            pathloss_exponent: c.pathloss_exponent,
            sinr_threshold_db: 10.0 * c.sinr_threshold.log10(),
            noise_power_dbm: 10.0 * (c.noise_power * 1e3).log10(),
            absorption_db_per_km: c.absorption_db_per_km,
        }
    }
}

impl ChannelConfig {
    pub fn to_channel(&self) -> Channel {
        Channel {
            tx_power: self.tx_power_mw * 1e-3,
            ref_attenuation: 10f64.powf(self.ref_gain_db / 10.0),
            pathloss_exponent: self.pathloss_exponent,
            sinr_threshold: 10f64.powf(self.sinr_threshold_db / 10.0),
            noise_power: 10f64.powf(self.noise_power_dbm / 10.0) * 1e-3,
            absorption_db_per_km: self.absorption_db_per_km,
        }
    }
}

/// Scenario parameters in configuration units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub tx_density: f64,
    pub obstacle_density: f64,
    pub tx_prob: f64,
    pub beamwidth_deg: f64,
    pub coherence_angle_deg: f64,
    pub side_lobe: f64,
    pub region_area: f64,
    /// Fixed interference range in meters.
    pub dmax: f64,
    /// When set, the interference range is derived from the SINR equality at
    /// this link length and `dmax` is ignored.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference_link_length: Option<f64>,
    pub channel: ChannelConfig,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        let s = Scenario::default();
        Self {
            tx_density: s.tx_density,
            obstacle_density: s.obstacle_density,
            tx_prob: s.tx_prob,
            beamwidth_deg: 20.0,
            coherence_angle_deg: 5.0,
            side_lobe: s.antenna.side_lobe,
            region_area: s.region_area,
            dmax: 15.0,
            reference_link_length: None,
            channel: ChannelConfig::default(),
        }
    }
}

impl ScenarioConfig {
    pub fn to_scenario(&self) -> Scenario {
        Scenario {
            tx_density: self.tx_density,
            obstacle_density: self.obstacle_density,
            tx_prob: self.tx_prob,
            coherence_angle: self.coherence_angle_deg.to_radians(),
            region_area: self.region_area,
            antenna: AntennaPattern {
                beamwidth: self.beamwidth_deg.to_radians(),
                side_lobe: self.side_lobe,
            },
            channel: self.channel.to_channel(),
            dmax_mode: match self.reference_link_length {
                Some(link_length) => DmaxMode::DerivedFromLength { link_length },
                None => DmaxMode::Fixed(self.dmax),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub param: String,
    pub values: Vec<f64>,
}

/// Parameters a sweep may vary.
pub const SWEEP_PARAMS: &[&str] = &[
    "tx_density",
    "obstacle_density",
    "tx_prob",
    "beamwidth_deg",
    "coherence_angle_deg",
    "side_lobe",
    "region_area",
    "dmax",
    "reference_link_length",
    "link_length",
    "tx_power_mw",
    "sinr_threshold_db",
    "absorption_db_per_km",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSpec {
    pub name: String,
    pub engine: Engine,
    pub scenario: ScenarioConfig,
    pub mac: MacConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Sweep>,
    /// Condition collision metrics on this link length instead of averaging
    /// over the link-length law.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub link_length: Option<f64>,
    /// Also report the throughput-optimal transmission probability.
    pub optimize: bool,
    pub trials: u64,
    pub duration_s: f64,
    pub replications: u64,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self {
            name: "experiment".into(),
            engine: Engine::Analytic,
            scenario: ScenarioConfig::default(),
            mac: MacConfig::default(),
            sweep: None,
            link_length: None,
            optimize: false,
            trials: 100_000,
            duration_s: 1.0,
            replications: 20,
            seed: 1,
            output: None,
        }
    }
}

impl ExperimentSpec {
    pub fn from_toml(text: &str) -> Result<Self> {
        let spec: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be >= 1".into()));
        }
        if self.replications == 0 {
            return Err(Error::Config("replications must be >= 1".into()));
        }
        if !(self.duration_s.is_finite() && self.duration_s > 0.0) {
            return Err(Error::Config(format!(
                "duration_s = {} must be > 0",
                self.duration_s
            )));
        }
        if self.engine == Engine::Desim {
            self.mac.validate()?;
        }
        match &self.sweep {
            None => self.point(None).map(|_| ()),
            Some(sweep) => {
                if !SWEEP_PARAMS.contains(&sweep.param.as_str()) {
                    return Err(Error::Config(format!(
                        "unknown sweep parameter `{}`; expected one of {}",
                        sweep.param,
                        SWEEP_PARAMS.join(", ")
                    )));
                }
                if sweep.values.is_empty() {
                    return Err(Error::Config("sweep.values is empty".into()));
                }
                for &v in &sweep.values {
                    if !v.is_finite() {
                        return Err(Error::Config(format!("sweep value {v} is not finite")));
                    }
                    self.point(Some(v))
                        .map_err(|e| Error::Config(format!("sweep {} = {v}: {e}", sweep.param)))?;
                }
                Ok(())
            }
        }
    }

    /// Scenario, conditioning length and MAC for one sweep value. The ALOHA
    /// transmission probability always follows the scenario's `tx_prob`.
    fn point(&self, value: Option<f64>) -> Result<Point> {
        let mut cfg = self.scenario.clone();
        let mut link_length = self.link_length;
        if let (Some(sweep), Some(v)) = (&self.sweep, value) {
            match sweep.param.as_str() {
                "tx_density" => cfg.tx_density = v,
                "obstacle_density" => cfg.obstacle_density = v,
                "tx_prob" => cfg.tx_prob = v,
                "beamwidth_deg" => cfg.beamwidth_deg = v,
                "coherence_angle_deg" => cfg.coherence_angle_deg = v,
                "side_lobe" => cfg.side_lobe = v,
                "region_area" => cfg.region_area = v,
                "dmax" => cfg.dmax = v,
                "reference_link_length" => cfg.reference_link_length = Some(v),
                "link_length" => link_length = Some(v),
                "tx_power_mw" => cfg.channel.tx_power_mw = v,
                "sinr_threshold_db" => cfg.channel.sinr_threshold_db = v,
                "absorption_db_per_km" => cfg.channel.absorption_db_per_km = v,
                other => return Err(Error::Config(format!("unknown sweep parameter `{other}`"))),
            }
        }
        let scenario = cfg.to_scenario();
        scenario
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        if let Some(l) = link_length {
            if !(l >= 0.0) {
                return Err(Error::Config(format!("link_length = {l} must be >= 0")));
            }
            if let Ok(d) = scenario.dmax() {
                if l > d {
                    return Err(Error::Config(format!(
                        "link_length = {l} exceeds d_max = {d}"
                    )));
                }
            }
        }
        let mut mac = self.mac;
        if let Protocol::SlottedAloha { .. } = mac.protocol {
            mac.protocol = Protocol::SlottedAloha {
                tx_prob: scenario.tx_prob,
            };
        }
        Ok(Point {
            scenario,
            link_length,
            mac,
        })
    }
}

struct Point {
    scenario: Scenario,
    link_length: Option<f64>,
    mac: MacConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub sweep_param: String,
    pub sweep_value: Option<f64>,
    pub metric: &'static str,
    pub value: f64,
    pub stderr: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub name: String,
    pub engine: Engine,
    pub seed: u64,
    pub rows: Vec<Row>,
    /// Sweep points that failed numerically, with the reason.
    pub failures: Vec<(Option<f64>, String)>,
}

pub const CSV_HEADER: &str = "sweep_param,sweep_value,metric,value,stderr,engine,seed";

fn fmt_num(v: f64) -> String {
    format!("{v:.8e}")
}

impl ExperimentOutput {
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# mmwave-mac {}", env!("CARGO_PKG_VERSION"));
        let _ = writeln!(out, "# experiment: {}", self.name);
        let _ = writeln!(out, "# engine: {}", self.engine.name());
        let _ = writeln!(out, "# seed: {}", self.seed);
        if self.engine == Engine::Desim {
            let _ = writeln!(
                out,
                "# carrier sensing: idealized (collision-domain aware, zero latency)"
            );
        }
        for (v, why) in &self.failures {
            let at = v.map(fmt_num).unwrap_or_default();
            let _ = writeln!(out, "# failed point {at}: {why}");
        }
        out.push_str(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r.sweep_param,
                r.sweep_value.map(fmt_num).unwrap_or_default(),
                r.metric,
                fmt_num(r.value),
                r.stderr.map(fmt_num).unwrap_or_default(),
                self.engine.name(),
                self.seed
            );
        }
        out
    }
}

fn is_numerical(e: &Error) -> bool {
    matches!(
        e,
        Error::NoInterferenceRange { .. } | Error::Domain { .. } | Error::DegenerateDelay
    )
}

/// Runs every sweep point on the current rayon pool. Rows keep sweep order.
/// Points that fail numerically are reported in `failures`; if all of them
/// fail, the first error is returned.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentOutput> {
    spec.validate()?;
    let values: Vec<Option<f64>> = match &spec.sweep {
        Some(s) => s.values.iter().map(|&v| Some(v)).collect(),
        None => vec![None],
    };
    let param = spec
        .sweep
        .as_ref()
        .map_or("none".to_string(), |s| s.param.clone());
    let results: Vec<Result<Vec<(&'static str, f64, Option<f64>)>>> = values
        .par_iter()
        .map(|&v| evaluate(spec, &spec.point(v)?))
        .collect();

    let mut rows = Vec::new();
    let mut failures = Vec::new();
    let mut first_err = None;
    for (v, res) in values.iter().zip(results) {
        match res {
            Ok(metrics) => rows.extend(metrics.into_iter().map(|(metric, value, stderr)| Row {
                sweep_param: param.clone(),
                sweep_value: *v,
                metric,
                value,
                stderr,
            })),
            Err(e) if is_numerical(&e) => {
                failures.push((*v, e.to_string()));
                first_err.get_or_insert(e);
            }
            Err(e) => return Err(e),
        }
    }
    if rows.is_empty() {
        if let Some(e) = first_err {
            return Err(e);
        }
    }
    Ok(ExperimentOutput {
        name: spec.name.clone(),
        engine: spec.engine,
        seed: spec.seed,
        rows,
        failures,
    })
}

type Metrics = Vec<(&'static str, f64, Option<f64>)>;

fn evaluate(spec: &ExperimentSpec, p: &Point) -> Result<Metrics> {
    match spec.engine {
        Engine::Analytic => analytic_metrics(spec, p),
        Engine::Montecarlo => montecarlo_metrics(spec, p),
        Engine::Desim => desim_metrics(spec, p),
    }
}

fn analytic_metrics(spec: &ExperimentSpec, p: &Point) -> Result<Metrics> {
    let m = Analytic::new(&p.scenario)?;
    let c = m.collision();
    let collision = match p.link_length {
        Some(l) => m.collision_given_length(l)?,
        None => c.averaged,
    };
    let aloha = m.aloha_throughput();
    let tdma = m.tdma_throughput();
    let mut out = vec![
        ("dmax", m.params.dmax, None),
        ("sector_los_prob", m.sector_los_prob(), None),
        ("collision_prob", collision, None),
        ("collision_lower", c.lower_bound, None),
        ("collision_upper", c.upper_bound, None),
        ("aloha_throughput", aloha.per_link, None),
        ("aloha_throughput_lower", aloha.lower_bound, None),
        ("aloha_throughput_upper", aloha.upper_bound, None),
        ("aloha_ase", aloha.ase, None),
        ("tdma_throughput", tdma.per_link, None),
        ("tdma_ase", tdma.ase, None),
    ];
    if let Some(l) = p.link_length {
        out.push(("success_prob", m.success_given_length(l)?, None));
    }
    if spec.optimize {
        let opt = optimize_tx_prob(&p.scenario)?;
        out.push(("opt_tx_prob", opt.tx_prob, None));
        out.push(("opt_throughput", opt.throughput, None));
    }
    Ok(out)
}

fn montecarlo_metrics(spec: &ExperimentSpec, p: &Point) -> Result<Metrics> {
    let los = montecarlo::estimate_sector_los_prob(&p.scenario, spec.trials, spec.seed)?;
    let col =
        montecarlo::estimate_collision_prob(&p.scenario, p.link_length, spec.trials, spec.seed)?;
    Ok(vec![
        ("sector_los_prob", los.mean, Some(los.std_error)),
        ("collision_prob", col.mean, Some(col.std_error)),
    ])
}

fn mean_and_stderr(xs: &[f64]) -> (f64, Option<f64>) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, None);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, Some((var / n).sqrt()))
}

fn desim_metrics(spec: &ExperimentSpec, p: &Point) -> Result<Metrics> {
    let region = Region::square(p.scenario.region_area.sqrt());
    let runs = desim::replicate(
        &p.scenario,
        region,
        &p.mac,
        spec.duration_s,
        spec.replications,
        spec.seed,
    )?;
    let nonempty: Vec<_> = runs.iter().filter(|r| !r.per_link.is_empty()).collect();
    let per_link: Vec<f64> = nonempty.iter().map(|r| r.mean_link_throughput()).collect();
    let network: Vec<f64> = runs.iter().map(|r| r.network_throughput).collect();
    let ase: Vec<f64> = runs.iter().map(|r| r.ase).collect();
    let delay: Vec<f64> = runs.iter().filter_map(|r| r.mean_delay()).collect();
    let collision: Vec<f64> = nonempty
        .iter()
        .filter_map(|r| {
            let attempts: u64 = r.per_link.iter().map(|l| l.attempts).sum();
            let collided: u64 = r.per_link.iter().map(|l| l.collided).sum();
            (attempts > 0).then(|| collided as f64 / attempts as f64)
        })
        .collect();
    let mut out = Vec::new();
    let mut push = |name: &'static str, xs: &[f64]| {
        if !xs.is_empty() {
            let (m, se) = mean_and_stderr(xs);
            out.push((name, m, se));
        }
    };
    push("per_link_throughput", &per_link);
    push("network_throughput", &network);
    push("ase", &ase);
    push("mean_delay_slots", &delay);
    push("collision_rate", &collision);
    Ok(out)
}
