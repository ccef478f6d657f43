//! Scenario configuration: a TOML document describing source, channel chain,
//! metric and an optional one-parameter sweep.

use std::path::{Path, PathBuf};

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sensing::ExponentModel;
use crate::thermal::Segment;

/// Default absolute tolerance of the continuous-line integrator.
pub const DEFAULT_STEP_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub title: Option<String>,
    pub source: SourceConfig,
    #[serde(default, rename = "channel")]
    pub channels: Vec<ChannelConfig>,
    pub metric: MetricConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SourceConfig {
    Vacuum {
        #[serde(default = "one_mode")]
        modes: usize,
    },
    Thermal {
        mean_photons: f64,
    },
    /// Two-mode squeezed vacuum; `r` in nepers.
    Tmsv {
        squeezing_nepers: f64,
    },
}

fn one_mode() -> usize {
    1
}

fn unit() -> f64 {
    1.0
}

impl SourceConfig {
    pub fn n_modes(&self) -> usize {
        match self {
            SourceConfig::Vacuum { modes } => *modes,
            SourceConfig::Thermal { .. } => 1,
            SourceConfig::Tmsv { .. } => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ChannelConfig {
    Loss(LossConfig),
    Waveguide(WaveguideConfig),
    OpenAir(OpenAirConfig),
}

impl ChannelConfig {
    pub fn mode(&self) -> usize {
        match self {
            ChannelConfig::Loss(c) => c.mode,
            ChannelConfig::Waveguide(c) => c.mode,
            ChannelConfig::OpenAir(c) => c.mode,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            ChannelConfig::Loss(_) => "loss",
            ChannelConfig::Waveguide(_) => "waveguide",
            ChannelConfig::OpenAir(_) => "open_air",
        }
    }
}

/// Explicit loss with a bath given either as photons or as a temperature at
/// a carrier frequency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossConfig {
    pub mode: usize,
    pub loss_db: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bath_photons: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bath_temperature_k: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frequency_hz: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WaveguideModel {
    /// Product of per-segment beam splitters.
    #[default]
    Segmented,
    /// Integrated transfer equations.
    Continuous,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveguideConfig {
    pub mode: usize,
    pub frequency_hz: f64,
    #[serde(default)]
    pub model: WaveguideModel,
    #[serde(default = "default_step_tolerance")]
    pub step_tolerance: f64,
    #[serde(rename = "segment")]
    pub segments: Vec<Segment>,
}

fn default_step_tolerance() -> f64 {
    DEFAULT_STEP_TOLERANCE
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpenAirConfig {
    pub mode: usize,
    pub wavelength_m: f64,
    pub distance_km: f64,
    pub tx_aperture_m: f64,
    pub rx_aperture_m: f64,
    /// `"bundled"`, `"none"` or a path to an attenuation CSV.
    #[serde(default = "bundled")]
    pub atmosphere: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub absorption_path_km: Option<f64>,
    #[serde(default = "unit")]
    pub antenna_efficiency_ratio: f64,
    /// Temperature of the thermal background entering the link.
    pub bath_temperature_k: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub impedance: Option<ImpedanceConfig>,
}

fn bundled() -> String {
    ATMOSPHERE_BUNDLED.to_string()
}

pub const ATMOSPHERE_BUNDLED: &str = "bundled";
pub const ATMOSPHERE_NONE: &str = "none";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImpedanceConfig {
    pub source_ohm: f64,
    pub load_ohm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MetricConfig {
    Occupation {
        mode: usize,
    },
    LogNegativity,
    TeleportFidelity {
        #[serde(default = "unit")]
        gain_ratio: f64,
    },
    QiAdvantage {
        reflectivity_ratio: f64,
        signal_photons: f64,
        background_photons: f64,
        mode_pairs: u64,
        #[serde(default)]
        model: ExponentModel,
    },
    LinkLoss {
        mode: usize,
    },
}

impl MetricConfig {
    pub fn kind(&self) -> &'static str {
        match self {
            MetricConfig::Occupation { .. } => "occupation",
            MetricConfig::LogNegativity => "log_negativity",
            MetricConfig::TeleportFidelity { .. } => "teleport_fidelity",
            MetricConfig::QiAdvantage { .. } => "qi_advantage",
            MetricConfig::LinkLoss { .. } => "link_loss",
        }
    }
}

/// Linear sweep of one numeric field, addressed by a dotted path such as
/// `channel.0.loss_db` or `source.squeezing_nepers`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub parameter: String,
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl SweepConfig {
    pub fn values(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.start];
        }
        let n = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| self.start + (self.stop - self.start) * i as f64 / n)
            .collect()
    }

    /// Last path component, used to name the swept column.
    pub fn field_name(&self) -> &str {
        self.parameter.rsplit(['.', ']']).find(|s| !s.is_empty()).unwrap_or(&self.parameter)
    }
}

fn config_error(path: &str, msg: impl std::fmt::Display) -> Error {
    Error::Config(format!("{path}: {msg}"))
}

fn require(path: &str, ok: bool, msg: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(config_error(path, msg))
    }
}

fn finite_positive(v: f64) -> bool {
    v.is_finite() && v > 0.0
}

fn finite_non_negative(v: f64) -> bool {
    v.is_finite() && v >= 0.0
}

/// Keys present in `input` but absent from `echo`, as dotted paths.
fn unknown_keys(input: &toml::Value, echo: &toml::Value, path: &str, out: &mut Vec<String>) {
    match (input, echo) {
        (toml::Value::Table(a), toml::Value::Table(b)) => {
            for (key, value) in a {
                let sub = if path.is_empty() { key.clone() } else { format!("{path}.{key}") };
                match b.get(key) {
                    Some(other) => unknown_keys(value, other, &sub, out),
                    None => out.push(sub),
                }
            }
        }
        (toml::Value::Array(a), toml::Value::Array(b)) => {
            for (i, (x, y)) in a.iter().zip(b).enumerate() {
                unknown_keys(x, y, &format!("{path}[{i}]"), out);
            }
        }
        _ => {}
    }
}

impl ScenarioConfig {
    /// Parses and validates a TOML scenario. With `strict`, keys the schema
    /// does not know are an error; otherwise they are logged and ignored.
    pub fn from_toml_str(text: &str, strict: bool) -> Result<Self> {
        let input: toml::Table = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let config: ScenarioConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.check_unknown(&toml::Value::Table(input), strict)?;
        config.validate()?;
        Ok(config)
    }

    /// Reads a scenario file; relative atmosphere paths resolve against the
    /// file's directory.
    pub fn load(path: impl AsRef<Path>, strict: bool) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut config = Self::from_toml_str(&text, strict)?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        config.resolve_paths(&base);
        Ok(config)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        for ch in &mut self.channels {
            if let ChannelConfig::OpenAir(c) = ch {
                if c.atmosphere != ATMOSPHERE_BUNDLED && c.atmosphere != ATMOSPHERE_NONE {
                    let p = PathBuf::from(&c.atmosphere);
                    if p.is_relative() {
                        c.atmosphere = base.join(p).to_string_lossy().into_owned();
                    }
                }
            }
        }
    }

    fn check_unknown(&self, input: &toml::Value, strict: bool) -> Result<()> {
        let echo = toml::Value::try_from(self).map_err(|e| Error::Config(e.to_string()))?;
        let mut unknown = Vec::new();
        unknown_keys(input, &echo, "", &mut unknown);
        if unknown.is_empty() {
            return Ok(());
        }
        let list = unknown.join(", ");
        if strict {
            Err(Error::Config(format!("unknown keys: {list}")))
        } else {
            warn!("ignoring unknown keys: {list}");
            Ok(())
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.validate_fields()?;
        if let Some(sweep) = &self.sweep {
            require("sweep.steps", sweep.steps >= 1, "must be at least 1")?;
            require(
                "sweep",
                sweep.start.is_finite() && sweep.stop.is_finite(),
                "start and stop must be finite",
            )?;
            for v in [sweep.start, sweep.stop] {
                self.with_parameter_unvalidated(&sweep.parameter, v)?.validate_fields()?;
            }
        }
        Ok(())
    }

    fn validate_fields(&self) -> Result<()> {
        match &self.source {
            SourceConfig::Vacuum { modes } => require("source.modes", (1..=8).contains(modes), "must lie in 1..=8")?,
            SourceConfig::Thermal { mean_photons } => {
                require("source.mean_photons", finite_non_negative(*mean_photons), "must be >= 0")?
            }
            SourceConfig::Tmsv { squeezing_nepers } => require(
                "source.squeezing_nepers",
                squeezing_nepers.is_finite() && (0.0..=crate::gaussian::MAX_SQUEEZING).contains(squeezing_nepers),
                "must lie in [0, 30]",
            )?,
        }
        let n_modes = self.source.n_modes();
        for (i, ch) in self.channels.iter().enumerate() {
            let p = |field: &str| format!("channel[{i}].{field}");
            require(&p("mode"), ch.mode() < n_modes, &format!("source has {n_modes} mode(s)"))?;
            match ch {
                ChannelConfig::Loss(c) => {
                    require(&p("loss_db"), finite_non_negative(c.loss_db), "must be >= 0")?;
                    match (c.bath_photons, c.bath_temperature_k, c.frequency_hz) {
                        (Some(n), None, None) => require(&p("bath_photons"), finite_non_negative(n), "must be >= 0")?,
                        (None, Some(t), Some(f)) => {
                            require(&p("bath_temperature_k"), finite_non_negative(t), "must be >= 0")?;
                            require(&p("frequency_hz"), finite_positive(f), "must be > 0")?;
                        }
                        _ => {
                            return Err(config_error(
                                &format!("channel[{i}]"),
                                "give either bath_photons or both bath_temperature_k and frequency_hz",
                            ))
                        }
                    }
                }
                ChannelConfig::Waveguide(c) => {
                    require(&p("frequency_hz"), finite_positive(c.frequency_hz), "must be > 0")?;
                    require(&p("step_tolerance"), finite_positive(c.step_tolerance), "must be > 0")?;
                    require(&p("segment"), !c.segments.is_empty(), "needs at least one segment")?;
                    for (j, s) in c.segments.iter().enumerate() {
                        let q = |field: &str| format!("channel[{i}].segment[{j}].{field}");
                        require(&q("length_km"), finite_positive(s.length_km), "must be > 0")?;
                        require(&q("attenuation_db_per_km"), finite_non_negative(s.attenuation_db_per_km), "must be >= 0")?;
                        require(&q("temperature_k"), finite_non_negative(s.temperature_k), "must be >= 0")?;
                    }
                }
                ChannelConfig::OpenAir(c) => {
                    require(&p("wavelength_m"), finite_positive(c.wavelength_m), "must be > 0")?;
                    require(&p("distance_km"), finite_positive(c.distance_km), "must be > 0")?;
                    require(&p("tx_aperture_m"), finite_positive(c.tx_aperture_m), "must be > 0")?;
                    require(&p("rx_aperture_m"), finite_positive(c.rx_aperture_m), "must be > 0")?;
                    if let Some(a) = c.absorption_path_km {
                        require(
                            &p("absorption_path_km"),
                            finite_non_negative(a) && a <= c.distance_km,
                            "must lie in [0, distance_km]",
                        )?;
                    }
                    require(
                        &p("antenna_efficiency_ratio"),
                        c.antenna_efficiency_ratio > 0.0 && c.antenna_efficiency_ratio <= 1.0,
                        "must lie in (0, 1]",
                    )?;
                    require(&p("bath_temperature_k"), finite_non_negative(c.bath_temperature_k), "must be >= 0")?;
                    if let Some(z) = c.impedance {
                        require(&p("impedance.source_ohm"), finite_positive(z.source_ohm), "must be > 0")?;
                        require(&p("impedance.load_ohm"), finite_positive(z.load_ohm), "must be > 0")?;
                    }
                }
            }
        }
        match &self.metric {
            MetricConfig::Occupation { mode } | MetricConfig::LinkLoss { mode } => {
                require("metric.mode", *mode < n_modes, &format!("source has {n_modes} mode(s)"))?
            }
            MetricConfig::LogNegativity => require("metric", n_modes == 2, "log_negativity needs a two-mode source")?,
            MetricConfig::TeleportFidelity { gain_ratio } => {
                require("metric", n_modes == 2, "teleport_fidelity needs a two-mode source")?;
                require("metric.gain_ratio", finite_positive(*gain_ratio), "must be > 0")?;
            }
            MetricConfig::QiAdvantage {
                reflectivity_ratio,
                signal_photons,
                background_photons,
                mode_pairs,
                ..
            } => {
                require(
                    "metric.reflectivity_ratio",
                    *reflectivity_ratio > 0.0 && *reflectivity_ratio < 1.0,
                    "must lie in (0, 1)",
                )?;
                require("metric.signal_photons", finite_non_negative(*signal_photons), "must be >= 0")?;
                require("metric.background_photons", finite_non_negative(*background_photons), "must be >= 0")?;
                require("metric.mode_pairs", *mode_pairs >= 1, "must be at least 1")?;
            }
        }
        Ok(())
    }

    /// Copy with one numeric field replaced, validated.
    pub fn with_parameter(&self, parameter: &str, value: f64) -> Result<ScenarioConfig> {
        let out = self.with_parameter_unvalidated(parameter, value)?;
        out.validate_fields()?;
        Ok(out)
    }

    fn with_parameter_unvalidated(&self, parameter: &str, value: f64) -> Result<ScenarioConfig> {
        let err = |msg: &str| config_error(&format!("sweep.parameter `{parameter}`"), msg);
        let mut tree = toml::Value::try_from(self).map_err(|e| Error::Config(e.to_string()))?;
        let normalized = parameter.replace('[', ".").replace(']', "");
        let parts: Vec<&str> = normalized.split('.').filter(|s| !s.is_empty()).collect();
        let (last, parents) = parts.split_last().ok_or_else(|| err("is empty"))?;
        if parents.first() == Some(&"sweep") {
            return Err(err("cannot sweep the sweep itself"));
        }
        let mut node = &mut tree;
        for part in parents {
            node = match node {
                toml::Value::Table(t) => t.get_mut(*part),
                toml::Value::Array(a) => part.parse::<usize>().ok().and_then(|i| a.get_mut(i)),
                _ => None,
            }
            .ok_or_else(|| err("does not name an existing field"))?;
        }
        let slot = match node {
            toml::Value::Table(t) => t.get_mut(*last),
            toml::Value::Array(a) => last.parse::<usize>().ok().and_then(|i| a.get_mut(i)),
            _ => None,
        }
        .ok_or_else(|| err("does not name an existing field"))?;
        *slot = match slot {
            toml::Value::Float(_) => toml::Value::Float(value),
            toml::Value::Integer(_) => {
                let rounded = value.round();
                if (rounded - value).abs() > 1e-9 || rounded < 0.0 {
                    return Err(err("integer field swept with a non-integral or negative value"));
                }
                toml::Value::Integer(rounded as i64)
            }
            _ => return Err(err("is not a numeric field")),
        };
        tree.try_into().map_err(|e: toml::de::Error| Error::Config(e.to_string()))
    }

    /// One config per sweep point (a single point without a sweep).
    pub fn sweep_points(&self) -> Result<Vec<(Option<f64>, ScenarioConfig)>> {
        match &self.sweep {
            None => Ok(vec![(None, self.clone())]),
            Some(s) => s
                .values()
                .into_iter()
                .map(|v| Ok((Some(v), self.with_parameter(&s.parameter, v)?)))
                .collect(),
        }
    }
}
