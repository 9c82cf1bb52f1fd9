//! Deterministic discrete-event execution of a [`Scenario`].

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::scenario::{Action, AgentSpec, Check, Scenario};
use super::taxonomy::TestTag;
use crate::error::{Error, Result};
use crate::geodesy::{haversine_m, GeodeticPosition};
use crate::geolocate::{geolocate_pixel, LocalPlane, VehicleState};
use crate::optics::{enu_displacement, stare_solution, GimbalLimits};
use crate::terrain::TerrainGrid;
use crate::uncertainty::{lagged_state, perturbed_observation, ErrorStats, Scene, TrialRecord};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventOutcome {
    pub t_s: f64,
    pub agent: String,
    pub event: String,
    pub ok: bool,
    pub detail: String,
    /// Observation time carried by a received message.
    pub observed_at_s: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssertionOutcome {
    pub t_s: f64,
    pub agent: String,
    pub check: String,
    pub measured: f64,
    pub limit: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BusStats {
    pub sent: usize,
    pub delivered: usize,
    pub dropped: usize,
    pub in_flight: usize,
    /// Delivered but older than what the receiver already had.
    pub stale: usize,
    pub mean_latency_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentSummary {
    pub id: String,
    pub final_state: VehicleState,
    pub yaw_deg: f64,
    pub pitch_deg: f64,
    pub reorientations: usize,
    pub detections: usize,
    pub accepted_messages: usize,
    pub stale_messages: usize,
    /// Last coordinate received from another agent and its observation time.
    pub received_target: Option<(f64, GeodeticPosition)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub name: String,
    pub seed: u64,
    pub tags: TestTag,
    pub events: Vec<EventOutcome>,
    pub assertions: Vec<AssertionOutcome>,
    pub bus: BusStats,
    pub agents: Vec<AgentSummary>,
    /// Own detections scored against the scenario truth.
    pub detection_errors: Option<ErrorStats>,
}

impl ScenarioReport {
    pub fn passed(&self) -> bool {
        self.assertions.iter().all(|a| a.passed)
    }

    pub fn agent(&self, id: &str) -> Option<&AgentSummary> {
        self.agents.iter().find(|a| a.id == id)
    }

    /// Per-event table: `t_s, agent, event, ok, detail`.
    pub fn write_events_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for e in &self.events {
            w.serialize(e).map_err(|e| Error::Validation(format!("csv: {e}")))?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
struct Motion {
    from: GeodeticPosition,
    to: GeodeticPosition,
    t0: f64,
    t1: f64,
}

struct Agent {
    spec: AgentSpec,
    state: VehicleState,
    motion: Option<Motion>,
    detections: u64,
    last_detection: Option<(f64, GeodeticPosition)>,
    received: Option<(f64, GeodeticPosition)>,
    reorientations: usize,
    accepted: usize,
    stale: usize,
}

impl Agent {
    fn position_at(&self, t: f64) -> Result<GeodeticPosition> {
        let Some(m) = self.motion else {
            return Ok(self.state.position);
        };
        if t >= m.t1 {
            return Ok(m.to);
        }
        let frac = ((t - m.t0) / (m.t1 - m.t0)).clamp(0.0, 1.0);
        let plane = LocalPlane::at(&m.from);
        let d = plane.to_enu(m.to.lat(), m.to.lon(), m.to.alt()) * frac;
        let (lat, lon, alt) = plane.to_lat_lon_alt(&d);
        GeodeticPosition::new(lat, lon, alt, m.from.datum())
    }

    fn state_at(&self, t: f64) -> Result<VehicleState> {
        Ok(VehicleState {
            position: self.position_at(t)?,
            attitude: self.state.attitude,
            timestamp_s: t,
        })
    }

    fn advance(&mut self, t: f64) -> Result<()> {
        self.state = self.state_at(t)?;
        Ok(())
    }

    fn stare(&mut self, target: &GeodeticPosition) -> Result<()> {
        let cmd = stare_solution(&self.state.position, target, &GimbalLimits::default())?;
        self.state.attitude = cmd.gimbal_state()?;
        self.reorientations += 1;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
struct Message {
    to: usize,
    position: GeodeticPosition,
    observed_at: f64,
    latency: f64,
}

#[derive(Debug, Clone, Copy)]
enum Pending {
    Script(usize),
    Deliver(Message),
}

/// Min-heap entry ordered by time, then insertion sequence.
struct Queued {
    t: f64,
    seq: u64,
    what: Pending,
}

impl PartialEq for Queued {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Queued {}
impl PartialOrd for Queued {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Queued {
    fn cmp(&self, other: &Self) -> Ordering {
        other.t.total_cmp(&self.t).then_with(|| other.seq.cmp(&self.seq))
    }
}

/// Noise seed for agent `i`, decorrelated from the bus stream.
fn agent_seed(seed: u64, i: usize) -> u64 {
    seed ^ (i as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

fn bearing_deg(from: &GeodeticPosition, to: &GeodeticPosition) -> Result<f64> {
    let d = enu_displacement(from, to)?;
    Ok(d.x.atan2(d.y).to_degrees().rem_euclid(360.0))
}

fn angle_diff_deg(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(360.0);
    d.min(360.0 - d)
}

/// Loads the scenario's terrain and runs it.
pub fn run_scenario(s: &Scenario, base_dir: Option<&Path>) -> Result<ScenarioReport> {
    s.validate()?;
    let grid = s.terrain.load(base_dir)?;
    run_scenario_on(s, &grid)
}

pub fn run_scenario_on(s: &Scenario, grid: &TerrainGrid) -> Result<ScenarioReport> {
    s.validate()?;
    let mut agents: Vec<Agent> = s
        .agents
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let mut spec = a.clone();
            spec.noise = spec.noise.with_seed(agent_seed(s.seed, i));
            Agent {
                state: a.state,
                spec,
                motion: None,
                detections: 0,
                last_detection: None,
                received: None,
                reorientations: 0,
                accepted: 0,
                stale: 0,
            }
        })
        .collect();

    let mut bus_rng = ChaCha8Rng::seed_from_u64(s.seed);
    let mut queue = BinaryHeap::new();
    let mut seq = 0u64;
    for (i, ev) in s.script.iter().enumerate() {
        queue.push(Queued {
            t: ev.t_s,
            seq,
            what: Pending::Script(i),
        });
        seq += 1;
    }

    let mut events = Vec::new();
    let mut assertions = Vec::new();
    let mut records = Vec::new();
    let mut bus = BusStats {
        sent: 0,
        delivered: 0,
        dropped: 0,
        in_flight: 0,
        stale: 0,
        mean_latency_s: 0.0,
    };
    let mut latency_sum = 0.0;
    let end = s.end_time_s.unwrap_or(f64::INFINITY);

    while let Some(q) = queue.pop() {
        if q.t > end {
            queue.push(q);
            break;
        }
        let t = q.t;
        match q.what {
            Pending::Deliver(m) => {
                bus.delivered += 1;
                latency_sum += m.latency;
                let a = &mut agents[m.to];
                a.advance(t)?;
                let fresher = a.received.is_none_or(|(at, _)| m.observed_at > at);
                let (ok, detail) = if fresher {
                    a.received = Some((m.observed_at, m.position));
                    a.accepted += 1;
                    a.stare(&m.position)?;
                    (true, format!("accepted target observed at {}", m.observed_at))
                } else {
                    a.stale += 1;
                    bus.stale += 1;
                    (false, format!("ignored stale target observed at {}", m.observed_at))
                };
                events.push(EventOutcome {
                    t_s: t,
                    agent: a.spec.id.clone(),
                    event: "receive".into(),
                    ok,
                    detail,
                    observed_at_s: Some(m.observed_at),
                });
            }
            Pending::Script(i) => {
                let ev = &s.script[i];
                let idx = s.agent_index(&ev.agent).expect("validated");
                agents[idx].advance(t)?;
                let (ok, detail) = match &ev.action {
                    Action::MoveTo { target, duration_s } => {
                        let a = &mut agents[idx];
                        target.ensure_same_datum(&a.state.position)?;
                        a.motion = Some(Motion {
                            from: a.state.position,
                            to: *target,
                            t0: t,
                            t1: t + duration_s,
                        });
                        if *duration_s == 0.0 {
                            a.advance(t)?;
                        }
                        (true, format!("moving to {target} over {duration_s} s"))
                    }
                    Action::Hover { duration_s } => {
                        let a = &mut agents[idx];
                        a.motion = None;
                        (true, format!("holding for {duration_s} s"))
                    }
                    Action::DetectAtPixel { aim } => {
                        let a = &mut agents[idx];
                        let noise = a.spec.noise;
                        let believed = lagged_state(|tau| a.state_at(tau), t, &noise)?;
                        let scene = Scene {
                            state: believed,
                            camera: a.spec.camera,
                            aim: *aim,
                        };
                        let (state, px) = perturbed_observation(&scene, &noise, a.detections)?;
                        let r = geolocate_pixel(grid, &state, &a.spec.camera, px)?;
                        if let Some(truth) = &s.truth {
                            records.push(TrialRecord::score(records.len() as u64, r.status, r.hit, truth));
                        }
                        a.detections += 1;
                        match r.hit {
                            Some(hit) => {
                                a.last_detection = Some((t, hit));
                                (true, format!("hit {hit}"))
                            }
                            None => (false, format!("{:?}", r.status)),
                        }
                    }
                    Action::PublishGeolocation { to } => match agents[idx].last_detection {
                        None => (false, "no detection to publish".to_string()),
                        Some((observed_at, position)) => {
                            let recipients: Vec<usize> = if to.is_empty() {
                                (0..agents.len()).filter(|&j| j != idx).collect()
                            } else {
                                to.iter().map(|id| s.agent_index(id).expect("validated")).collect()
                            };
                            let mut lost = 0;
                            for j in &recipients {
                                bus.sent += 1;
                                // Both draws always happen so the stream layout is fixed.
                                let drop_draw: f64 = bus_rng.random();
                                let jitter_draw: f64 = bus_rng.random();
                                if drop_draw < s.bus.drop_probability {
                                    bus.dropped += 1;
                                    lost += 1;
                                    continue;
                                }
                                let latency = (s.bus.latency_mean_s
                                    + s.bus.latency_jitter_s * (2.0 * jitter_draw - 1.0))
                                    .max(0.0);
                                queue.push(Queued {
                                    t: t + latency,
                                    seq,
                                    what: Pending::Deliver(Message {
                                        to: *j,
                                        position,
                                        observed_at,
                                        latency,
                                    }),
                                });
                                seq += 1;
                            }
                            (true, format!("sent {} message(s), {lost} dropped", recipients.len()))
                        }
                    },
                    Action::StareAt { target } => {
                        agents[idx].stare(target)?;
                        (true, format!("staring at {target}"))
                    }
                    Action::StareAtDetection => match agents[idx].last_detection {
                        Some((_, p)) => {
                            agents[idx].stare(&p)?;
                            (true, format!("staring at {p}"))
                        }
                        None => (false, "no detection to stare at".to_string()),
                    },
                    Action::Assert { check } => {
                        let a = &agents[idx];
                        let (measured, limit, passed) = match check {
                            Check::HeadingToward { target, tolerance_deg } => {
                                let yaw = a.state.attitude.to_euler().0;
                                let d = angle_diff_deg(yaw, bearing_deg(&a.state.position, target)?);
                                (d, *tolerance_deg, d <= *tolerance_deg)
                            }
                            Check::DetectionWithin { target, tolerance_m } => match a.last_detection {
                                Some((_, p)) => {
                                    let d = haversine_m(&p, target);
                                    (d, *tolerance_m, d <= *tolerance_m)
                                }
                                None => (f64::INFINITY, *tolerance_m, false),
                            },
                            Check::Received { min, max } => {
                                let n = a.accepted;
                                (n as f64, *max as f64, (*min..=*max).contains(&n))
                            }
                        };
                        assertions.push(AssertionOutcome {
                            t_s: t,
                            agent: ev.agent.clone(),
                            check: check.name().into(),
                            measured,
                            limit,
                            passed,
                        });
                        (passed, format!("{} measured {measured} against {limit}", check.name()))
                    }
                };
                events.push(EventOutcome {
                    t_s: t,
                    agent: ev.agent.clone(),
                    event: ev.action.name().into(),
                    ok,
                    detail,
                    observed_at_s: None,
                });
            }
        }
    }

    for q in queue.into_sorted_vec().into_iter().rev() {
        match q.what {
            Pending::Deliver(_) => bus.in_flight += 1,
            Pending::Script(i) => events.push(EventOutcome {
                t_s: q.t,
                agent: s.script[i].agent.clone(),
                event: s.script[i].action.name().into(),
                ok: false,
                detail: "not executed before end of run".into(),
                observed_at_s: None,
            }),
        }
    }
    if bus.delivered > 0 {
        bus.mean_latency_s = latency_sum / bus.delivered as f64;
    }
    if bus.sent != bus.delivered + bus.dropped + bus.in_flight {
        return Err(Error::Validation(format!(
            "bus conservation violated: sent {} != delivered {} + dropped {} + in flight {}",
            bus.sent, bus.delivered, bus.dropped, bus.in_flight
        )));
    }

    let end_t = s
        .end_time_s
        .unwrap_or_else(|| events.iter().map(|e| e.t_s).fold(0.0, f64::max));
    let mut summaries = Vec::with_capacity(agents.len());
    for a in &mut agents {
        a.advance(end_t.max(a.state.timestamp_s))?;
        let (yaw, pitch, _) = a.state.attitude.to_euler();
        summaries.push(AgentSummary {
            id: a.spec.id.clone(),
            final_state: a.state,
            yaw_deg: yaw,
            pitch_deg: pitch,
            reorientations: a.reorientations,
            detections: a.detections as usize,
            accepted_messages: a.accepted,
            stale_messages: a.stale,
            received_target: a.received,
        });
    }

    Ok(ScenarioReport {
        name: s.name.clone(),
        seed: s.seed,
        tags: s.tags.clone(),
        events,
        assertions,
        bus,
        agents: summaries,
        detection_errors: (!records.is_empty()).then(|| ErrorStats::from_records(records)),
    })
}
