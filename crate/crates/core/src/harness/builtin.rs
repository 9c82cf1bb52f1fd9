//! Shipped scenarios. Bus parameters are placeholders, not measurements.

use nalgebra::Vector3;

use super::scenario::{
    Action, AgentSpec, BusConfig, Check, Scenario, ScriptEvent, TerrainSource, SCENARIO_FILE_VERSION,
};
use super::taxonomy::{Challenge, Complexity, TestLevel, TestTag};
use crate::error::Result;
use crate::geodesy::{Datum, GeodeticPosition};
use crate::geolocate::{LocalPlane, VehicleState};
use crate::optics::{stare_solution, CameraModel, GimbalLimits, GimbalState, PixelCoord};
use crate::terrain::{GridSpec, SynthKind, SynthParams};
use crate::uncertainty::{Aim, NoiseModel};

pub const SITE_LAT: f64 = 36.2125;
pub const SITE_LON: f64 = -96.0070;
pub const SITE_ELEVATION_M: f64 = 274.0;

pub const BUILTIN_SCENARIOS: [&str; 3] = ["collaborative-detection", "lossy-broadcast", "reordering"];

fn site_terrain() -> TerrainSource {
    let grid = GridSpec::centered(SITE_LAT, SITE_LON, 0.004, 1e-4, Datum::EllipsoidWgs84);
    TerrainSource::Synthetic(SynthParams::new(SynthKind::Flat, grid).with_base(SITE_ELEVATION_M))
}

/// Where the person stands.
pub fn site_person() -> GeodeticPosition {
    GeodeticPosition::wgs84(SITE_LAT, SITE_LON, SITE_ELEVATION_M).expect("valid")
}

fn offset(from: &GeodeticPosition, east: f64, north: f64, up: f64) -> GeodeticPosition {
    let (lat, lon, alt) = LocalPlane::at(from).to_lat_lon_alt(&Vector3::new(east, north, up));
    GeodeticPosition::new(lat, lon, alt, from.datum()).expect("valid")
}

fn camera() -> CameraModel {
    CameraModel::new(74.0, 1920, 1080).expect("valid")
}

fn event(t_s: f64, agent: &str, action: Action) -> ScriptEvent {
    ScriptEvent {
        t_s,
        agent: agent.into(),
        action,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollaborativeOptions {
    pub bus: BusConfig,
    pub noise: NoiseModel,
    pub seed: u64,
}

impl Default for CollaborativeOptions {
    fn default() -> Self {
        Self {
            bus: BusConfig {
                latency_mean_s: 0.25,
                latency_jitter_s: 0.1,
                drop_probability: 0.0,
            },
            noise: NoiseModel::zero(),
            seed: 7,
        }
    }
}

/// One vehicle spots a person, publishes the coordinate and both vehicles
/// turn to face it.
pub fn collaborative_detection(opts: CollaborativeOptions) -> Result<Scenario> {
    let person = site_person();
    let spotter = offset(&person, -40.0, -60.0, 40.0);
    let helper = offset(&person, 150.0, 30.0, 50.0);
    let spotter_attitude = stare_solution(&spotter, &person, &GimbalLimits::default())?.gimbal_state()?;
    let helper_attitude = GimbalState::from_euler(0.0, -30.0, 0.0)?;

    let mut script = vec![
        event(
            1.0,
            "alpha",
            Action::DetectAtPixel {
                aim: Aim::Pixel(PixelCoord::new(960.0, 540.0)),
            },
        ),
        event(1.0, "alpha", Action::StareAtDetection),
        event(1.2, "alpha", Action::PublishGeolocation { to: vec![] }),
        event(
            5.0,
            "alpha",
            Action::Assert {
                check: Check::HeadingToward {
                    target: person,
                    tolerance_deg: 0.5,
                },
            },
        ),
    ];
    let p = opts.bus.drop_probability;
    if p == 0.0 {
        script.push(event(
            5.0,
            "bravo",
            Action::Assert {
                check: Check::HeadingToward {
                    target: person,
                    tolerance_deg: 0.5,
                },
            },
        ));
    }
    let (min, max) = if p == 0.0 {
        (1, 1)
    } else if p >= 1.0 {
        (0, 0)
    } else {
        (0, 1)
    };
    script.push(event(
        5.0,
        "bravo",
        Action::Assert {
            check: Check::Received { min, max },
        },
    ));

    Ok(Scenario {
        version: SCENARIO_FILE_VERSION,
        name: "collaborative-detection".into(),
        terrain: site_terrain(),
        agents: vec![
            AgentSpec {
                id: "alpha".into(),
                state: VehicleState::new(spotter, spotter_attitude),
                camera: camera(),
                noise: opts.noise,
            },
            AgentSpec {
                id: "bravo".into(),
                state: VehicleState::new(helper, helper_attitude),
                camera: camera(),
                noise: opts.noise,
            },
        ],
        script,
        bus: opts.bus,
        seed: opts.seed,
        tags: TestTag::new(
            TestLevel::System,
            Complexity::Moderate,
            &[Challenge::C3, Challenge::C6, Challenge::C7],
        ),
        truth: Some(person),
        end_time_s: None,
    })
}

/// One detection re-published `messages` times over a lossy link.
pub fn lossy_broadcast(drop_probability: f64, seed: u64, messages: usize) -> Result<Scenario> {
    let mut s = collaborative_detection(CollaborativeOptions {
        bus: BusConfig {
            latency_mean_s: 0.25,
            latency_jitter_s: 0.1,
            drop_probability,
        },
        seed,
        ..Default::default()
    })?;
    s.name = "lossy-broadcast".into();
    s.script.truncate(1);
    s.script.extend((0..messages).map(|k| {
        event(
            2.0 + 0.05 * k as f64,
            "alpha",
            Action::PublishGeolocation { to: vec![] },
        )
    }));
    s.tags = TestTag::new(TestLevel::Integration, Complexity::Edge, &[Challenge::C7]);
    Ok(s)
}

/// A moving spotter publishing frequently over a link whose jitter exceeds
/// the publish interval, so deliveries arrive out of order.
pub fn reordering(seed: u64) -> Result<Scenario> {
    let mut s = collaborative_detection(CollaborativeOptions {
        bus: BusConfig {
            latency_mean_s: 1.0,
            latency_jitter_s: 1.0,
            drop_probability: 0.0,
        },
        seed,
        ..Default::default()
    })?;
    s.name = "reordering".into();
    let start = s.agents[0].state.position;
    s.agents[0].state.attitude = GimbalState::from_euler(0.0, -60.0, 0.0)?;
    let mut script = vec![event(
        0.0,
        "alpha",
        Action::MoveTo {
            target: offset(&start, 80.0, 0.0, 0.0),
            duration_s: 8.0,
        },
    )];
    for k in 0..16 {
        let t = 0.25 + 0.5 * k as f64;
        script.push(event(
            t,
            "alpha",
            Action::DetectAtPixel {
                aim: Aim::Pixel(PixelCoord::new(960.0, 540.0)),
            },
        ));
        script.push(event(t, "alpha", Action::PublishGeolocation { to: vec![] }));
    }
    s.script = script;
    s.truth = None;
    s.tags = TestTag::new(TestLevel::Integration, Complexity::Edge, &[Challenge::C7]);
    Ok(s)
}

pub fn builtin_scenario(name: &str, seed: Option<u64>) -> Result<Scenario> {
    let mut s = match name {
        "collaborative-detection" => collaborative_detection(CollaborativeOptions::default())?,
        "lossy-broadcast" => lossy_broadcast(0.3, 7, 100)?,
        "reordering" => reordering(7)?,
        other => {
            return Err(crate::Error::invalid(format!(
                "unknown builtin scenario {other:?}; expected one of {}",
                BUILTIN_SCENARIOS.join(", ")
            )))
        }
    };
    if let Some(seed) = seed {
        s.seed = seed;
    }
    Ok(s)
}
