//! Scripted multi-vehicle scenarios and their file format.

use std::collections::HashSet;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::taxonomy::TestTag;
use crate::error::{Error, Result};
use crate::geodesy::GeodeticPosition;
use crate::geolocate::VehicleState;
use crate::optics::CameraModel;
use crate::terrain::{load_grid, synth_terrain, SynthParams, TerrainGrid};
use crate::uncertainty::{Aim, NoiseModel};

pub const SCENARIO_FILE_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum TerrainSource {
    Synthetic(SynthParams),
    File { path: PathBuf },
}

impl TerrainSource {
    /// Relative file paths resolve against `base_dir`.
    pub fn load(&self, base_dir: Option<&Path>) -> Result<TerrainGrid> {
        match self {
            TerrainSource::Synthetic(p) => synth_terrain(p),
            TerrainSource::File { path } => match base_dir {
                Some(dir) if path.is_relative() => load_grid(dir.join(path)),
                _ => load_grid(path),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentSpec {
    pub id: String,
    pub state: VehicleState,
    pub camera: CameraModel,
    #[serde(default)]
    pub noise: NoiseModel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Action {
    /// Straight-line motion; zero duration teleports.
    MoveTo {
        target: GeodeticPosition,
        duration_s: f64,
    },
    Hover {
        duration_s: f64,
    },
    DetectAtPixel {
        aim: Aim,
    },
    /// Sends the latest detection; an empty list addresses every other agent.
    PublishGeolocation {
        #[serde(default)]
        to: Vec<String>,
    },
    StareAt {
        target: GeodeticPosition,
    },
    StareAtDetection,
    Assert {
        check: Check,
    },
}

impl Action {
    pub fn name(&self) -> &'static str {
        match self {
            Action::MoveTo { .. } => "move_to",
            Action::Hover { .. } => "hover",
            Action::DetectAtPixel { .. } => "detect_at_pixel",
            Action::PublishGeolocation { .. } => "publish_geolocation",
            Action::StareAt { .. } => "stare_at",
            Action::StareAtDetection => "stare_at_detection",
            Action::Assert { .. } => "assert",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "check", rename_all = "snake_case")]
pub enum Check {
    /// Vehicle yaw against the bearing to `target`.
    HeadingToward {
        target: GeodeticPosition,
        tolerance_deg: f64,
    },
    /// Latest own detection against `target`, horizontally.
    DetectionWithin { target: GeodeticPosition, tolerance_m: f64 },
    /// Number of accepted (non-stale) messages.
    Received { min: usize, max: usize },
}

impl Check {
    pub fn name(&self) -> &'static str {
        match self {
            Check::HeadingToward { .. } => "heading_toward",
            Check::DetectionWithin { .. } => "detection_within",
            Check::Received { .. } => "received",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScriptEvent {
    pub t_s: f64,
    pub agent: String,
    pub action: Action,
}

/// Delivery delay is `latency_mean_s` plus uniform jitter in
/// `[-latency_jitter_s, latency_jitter_s]`; each message is lost
/// independently with `drop_probability`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BusConfig {
    pub latency_mean_s: f64,
    pub latency_jitter_s: f64,
    pub drop_probability: f64,
}

impl BusConfig {
    pub const PERFECT: BusConfig = BusConfig {
        latency_mean_s: 0.0,
        latency_jitter_s: 0.0,
        drop_probability: 0.0,
    };
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub version: u32,
    pub name: String,
    pub terrain: TerrainSource,
    pub agents: Vec<AgentSpec>,
    pub script: Vec<ScriptEvent>,
    pub bus: BusConfig,
    pub seed: u64,
    pub tags: TestTag,
    /// Ground truth for scoring detections.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truth: Option<GeodeticPosition>,
    /// Messages still in flight at this time are reported as such.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub end_time_s: Option<f64>,
}

impl Scenario {
    pub fn agent_index(&self, id: &str) -> Option<usize> {
        self.agents.iter().position(|a| a.id == id)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Validation(format!("scenario {:?}: {m}", self.name)));
        if self.version != SCENARIO_FILE_VERSION {
            return Err(Error::UnsupportedVersion(self.version));
        }
        if self.agents.is_empty() {
            return fail("no agents".into());
        }
        let mut ids = HashSet::new();
        for a in &self.agents {
            if !ids.insert(a.id.as_str()) {
                return fail(format!("duplicate agent id {:?}", a.id));
            }
            a.noise.validate()?;
        }
        if self.tags.challenges.is_empty() {
            return fail("tags must name at least one challenge".into());
        }
        let b = &self.bus;
        if !(b.latency_mean_s.is_finite() && b.latency_mean_s >= 0.0) {
            return fail("bus latency mean must be non-negative".into());
        }
        if !(b.latency_jitter_s >= 0.0 && b.latency_jitter_s <= b.latency_mean_s) {
            return fail("bus jitter must lie in [0, latency mean] so delays stay non-negative".into());
        }
        if !(0.0..=1.0).contains(&b.drop_probability) {
            return fail("drop probability must lie in [0, 1]".into());
        }
        if let Some(end) = self.end_time_s {
            if !(end.is_finite() && end >= 0.0) {
                return fail("end time must be non-negative".into());
            }
        }
        for (i, ev) in self.script.iter().enumerate() {
            if !(ev.t_s.is_finite() && ev.t_s >= 0.0) {
                return fail(format!("event {i} has invalid time {}", ev.t_s));
            }
            if !ids.contains(ev.agent.as_str()) {
                return fail(format!("event {i} references unknown agent {:?}", ev.agent));
            }
            match &ev.action {
                Action::PublishGeolocation { to } => {
                    if let Some(bad) = to.iter().find(|t| !ids.contains(t.as_str())) {
                        return fail(format!("event {i} publishes to unknown agent {bad:?}"));
                    }
                }
                Action::MoveTo { duration_s, .. } | Action::Hover { duration_s }
                    if duration_s.is_nan() || *duration_s < 0.0 =>
                {
                    return fail(format!("event {i} has negative duration"));
                }
                _ => {}
            }
        }
        Ok(())
    }
}

#[derive(Deserialize)]
struct VersionProbe {
    version: u32,
}

pub fn read_scenario(mut reader: impl Read) -> Result<Scenario> {
    let mut text = String::new();
    reader.read_to_string(&mut text)?;
    let probe: VersionProbe = serde_json::from_str(&text).map_err(Error::from_json)?;
    if probe.version != SCENARIO_FILE_VERSION {
        return Err(Error::UnsupportedVersion(probe.version));
    }
    let s: Scenario = serde_json::from_str(&text).map_err(Error::from_json)?;
    s.validate()?;
    Ok(s)
}

pub fn write_scenario(s: &Scenario, mut writer: impl Write) -> Result<()> {
    serde_json::to_writer_pretty(&mut writer, s).map_err(Error::from_json)?;
    writer.write_all(b"\n")?;
    Ok(())
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario> {
    read_scenario(std::fs::File::open(path)?)
}

pub fn save_scenario(s: &Scenario, path: impl AsRef<Path>) -> Result<()> {
    write_scenario(s, std::io::BufWriter::new(std::fs::File::create(path)?))
}
