//! Command-line front end. The `tds` binary only forwards to [`main_with_args`].

mod output;

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

pub use output::{sig17, to_json_string, write_json};

use crate::error::{Error, Result};
use crate::geodesy::{Datum, GeodeticPosition};
use crate::geolocate::{cast_ray_with, CastOptions, GeolocationResult, PixelBox, VehicleState};
use crate::harness::{
    builtin_scenario, load_scenario, run_builtin_suite, run_scenario, save_scenario, taxonomy_report, TestOutcome,
    BUILTIN_SCENARIOS,
};
use crate::optics::calibration::{calibrate_frames, reference_observation};
use crate::optics::{
    camera_ray_to_world, pixel_to_camera_ray, stare_solution, CameraModel, GimbalLimits, GimbalState, PixelCoord,
};
use crate::terrain::{
    load_grid, save_grid, synth_terrain, GridSpec, SynthKind, SynthParams, TerrainGrid, DEFAULT_CELL_SIZE_DEG,
};
use crate::uncertainty::{monte_carlo_geolocation, Aim, NoiseModel, Scene, DEFAULT_SEED};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_ASSERTION: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
    Table,
}

#[derive(Debug, Parser)]
#[command(name = "tds", version, about = "Terrain-aware geolocation toolkit")]
pub struct CliConfig {
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Json)]
    pub format: OutputFormat,
    /// Output file (grid, CSV records or scenario file, depending on command).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate or inspect terrain grids.
    #[command(subcommand)]
    Terrain(TerrainCommand),
    /// Geolocate a pixel or detection box.
    Geolocate(SceneArgs),
    /// Vehicle yaw and gimbal angles that center a target.
    Stare(StareArgs),
    /// Monte Carlo error propagation for one scene.
    Montecarlo(MonteCarloArgs),
    /// Run or export multi-agent scenarios.
    #[command(subcommand)]
    Scenario(ScenarioCommand),
    /// Run the tagged check suite and print the coverage matrix.
    Report(ReportArgs),
    /// Enumerate frame conventions against the reference observation.
    CalibrateFrames,
}

#[derive(Debug, Subcommand)]
pub enum TerrainCommand {
    Gen(TerrainGenArgs),
    Info {
        #[arg(long)]
        grid: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct TerrainGenArgs {
    #[arg(long, default_value = "flat", value_parser = parse_kind)]
    pub kind: SynthKind,
    /// Base elevation, meters.
    #[arg(long, default_value_t = 274.0)]
    pub elev: f64,
    #[arg(long, value_parser = parse_lat_lon, default_value = "36.2125,-96.007")]
    pub center: (f64, f64),
    #[arg(long, default_value_t = 0.005)]
    pub half_extent_deg: f64,
    #[arg(long, default_value_t = DEFAULT_CELL_SIZE_DEG)]
    pub cell_size_deg: f64,
    #[arg(long)]
    pub magnitude: Option<f64>,
    #[arg(long)]
    pub width: Option<f64>,
    #[arg(long, default_value = "ELLIPSOID_WGS84", value_parser = parse_datum)]
    pub datum: Datum,
}

#[derive(Debug, Clone, Args)]
pub struct CameraArgs {
    #[arg(long = "fov-h", default_value_t = 74.0)]
    pub fov_h: f64,
    #[arg(long, value_parser = parse_res, default_value = "1920x1080")]
    pub res: (u32, u32),
}

impl CameraArgs {
    fn camera(&self) -> Result<CameraModel> {
        CameraModel::new(self.fov_h, self.res.0, self.res.1)
    }
}

#[derive(Debug, Clone, Args)]
pub struct SceneArgs {
    /// Terrain grid file.
    #[arg(long, required_unless_present = "flat", conflicts_with = "flat")]
    pub grid: Option<PathBuf>,
    /// Use flat terrain at this elevation around the drone instead of a file.
    #[arg(long, allow_hyphen_values = true)]
    pub flat: Option<f64>,
    #[arg(long, default_value_t = 0.01)]
    pub flat_extent_deg: f64,
    /// LAT,LON,ALT[,DATUM]
    #[arg(long, value_parser = parse_position, allow_hyphen_values = true)]
    pub drone: GeodeticPosition,
    /// Camera-to-ENU quaternion as X,Y,Z,W (scalar last).
    #[arg(long, value_parser = parse_quat, allow_hyphen_values = true)]
    pub quat: [f64; 4],
    #[command(flatten)]
    pub camera: CameraArgs,
    #[arg(long, value_parser = parse_pixel, conflicts_with = "bbox", required_unless_present = "bbox")]
    pub pixel: Option<PixelCoord>,
    /// X0,Y0,X1,Y1
    #[arg(long, value_parser = parse_bbox)]
    pub bbox: Option<PixelBox>,
    #[arg(long, default_value_t = crate::geolocate::DEFAULT_MAX_RANGE_M)]
    pub max_range: f64,
}

impl SceneArgs {
    fn grid(&self) -> Result<TerrainGrid> {
        match (&self.grid, self.flat) {
            (Some(path), _) => load_grid(path),
            (None, Some(elev)) => TerrainGrid::flat(
                &GridSpec::centered(
                    self.drone.lat(),
                    self.drone.lon(),
                    self.flat_extent_deg,
                    DEFAULT_CELL_SIZE_DEG,
                    self.drone.datum(),
                ),
                elev,
            ),
            (None, None) => Err(Error::invalid("either --grid or --flat is required")),
        }
    }

    fn scene(&self) -> Result<Scene> {
        let [x, y, z, w] = self.quat;
        let attitude = GimbalState::from_xyzw(x, y, z, w)?;
        let aim = match (self.pixel, self.bbox) {
            (Some(p), _) => Aim::Pixel(p),
            (None, Some(b)) => Aim::Detection(b),
            (None, None) => return Err(Error::invalid("either --pixel or --bbox is required")),
        };
        Ok(Scene {
            state: VehicleState::new(self.drone, attitude),
            camera: self.camera.camera()?,
            aim,
        })
    }
}

#[derive(Debug, Args)]
pub struct StareArgs {
    #[arg(long, value_parser = parse_position, allow_hyphen_values = true)]
    pub drone: GeodeticPosition,
    #[arg(long, value_parser = parse_position, allow_hyphen_values = true)]
    pub target: GeodeticPosition,
}

#[derive(Debug, Args)]
pub struct MonteCarloArgs {
    #[command(flatten)]
    pub scene: SceneArgs,
    /// Preset name or path to a JSON noise model.
    #[arg(long, default_value = "field-plausibility")]
    pub noise: String,
    #[arg(long, default_value_t = 1000)]
    pub trials: u64,
    /// Defaults to the zero-noise hit.
    #[arg(long, value_parser = parse_position, allow_hyphen_values = true)]
    pub truth: Option<GeodeticPosition>,
}

#[derive(Debug, Subcommand)]
pub enum ScenarioCommand {
    /// Execute a scenario file or a builtin scenario.
    Run(ScenarioSource),
    /// Write a builtin scenario to `--out` as JSON.
    Export {
        #[arg(long)]
        builtin: String,
    },
}

#[derive(Debug, Args)]
pub struct ScenarioSource {
    #[arg(long, conflicts_with = "builtin", required_unless_present = "builtin")]
    pub file: Option<PathBuf>,
    #[arg(long)]
    pub builtin: Option<String>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Extra results (JSON list of tagged outcomes), e.g. from hardware runs.
    #[arg(long)]
    pub results: Option<PathBuf>,
}

fn parse_floats<const N: usize>(s: &str, what: &str) -> std::result::Result<[f64; N], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != N {
        return Err(format!("{what} needs {N} comma-separated numbers, got {s:?}"));
    }
    let mut out = [0.0; N];
    for (o, p) in out.iter_mut().zip(parts) {
        *o = p.parse().map_err(|_| format!("{what}: {p:?} is not a number"))?;
    }
    Ok(out)
}

fn parse_position(s: &str) -> std::result::Result<GeodeticPosition, String> {
    let parts: Vec<&str> = s.split(',').collect();
    let (nums, datum) = match parts.len() {
        3 => (s.to_string(), Datum::EllipsoidWgs84),
        4 => (
            parts[..3].join(","),
            parts[3].parse::<Datum>().map_err(|e| e.to_string())?,
        ),
        _ => return Err(format!("position must be LAT,LON,ALT[,DATUM], got {s:?}")),
    };
    let [lat, lon, alt] = parse_floats::<3>(&nums, "position")?;
    GeodeticPosition::new(lat, lon, alt, datum).map_err(|e| e.to_string())
}

fn parse_lat_lon(s: &str) -> std::result::Result<(f64, f64), String> {
    parse_floats::<2>(s, "center").map(|[a, b]| (a, b))
}

fn parse_quat(s: &str) -> std::result::Result<[f64; 4], String> {
    parse_floats::<4>(s, "quaternion")
}

fn parse_pixel(s: &str) -> std::result::Result<PixelCoord, String> {
    parse_floats::<2>(s, "pixel").map(|[x, y]| PixelCoord::new(x, y))
}

fn parse_bbox(s: &str) -> std::result::Result<PixelBox, String> {
    parse_floats::<4>(s, "bbox").map(|[a, b, c, d]| PixelBox::new(a, b, c, d))
}

fn parse_res(s: &str) -> std::result::Result<(u32, u32), String> {
    let (w, h) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("resolution must be WxH, got {s:?}"))?;
    let p = |v: &str| v.trim().parse::<u32>().map_err(|_| format!("bad resolution {s:?}"));
    Ok((p(w)?, p(h)?))
}

fn parse_kind(s: &str) -> std::result::Result<SynthKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_datum(s: &str) -> std::result::Result<Datum, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Command failure, mapped to an exit code.
#[derive(Debug)]
enum Failure {
    Lib(Error),
    Assertion(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Lib(Error::Io(e))
    }
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::DatumMismatch { .. } => "datum_mismatch",
        Error::InvalidInput(_) => "invalid_input",
        Error::OutOfRegion { .. } => "out_of_region",
        Error::TooManyCells { .. } => "too_many_cells",
        Error::DimensionMismatch { .. } => "dimension_mismatch",
        Error::DegenerateGeometry(_) => "degenerate_geometry",
        Error::Parse { .. } => "parse",
        Error::UnsupportedVersion(_) => "unsupported_version",
        Error::Validation(_) => "validation",
        Error::Io(_) => "io",
    }
}

fn report_error(err: &mut dyn Write, format: OutputFormat, kind: &str, message: &str) {
    let _ = if format == OutputFormat::Json {
        let line = serde_json::json!({ "error": kind, "message": message });
        writeln!(err, "{line}")
    } else {
        writeln!(err, "error ({kind}): {message}")
    };
}

/// Parses `args` (including the program name) and runs the command.
pub fn main_with_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cfg = match CliConfig::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    EXIT_OK
                }
                _ => {
                    let explicit_json = args.windows(2).any(|w| w[0] == "--format" && w[1] == "json");
                    if explicit_json {
                        let msg = e.to_string();
                        let first = msg.lines().next().unwrap_or_default().trim_start_matches("error: ");
                        let line = serde_json::json!({ "error": "usage", "message": first, "usage": msg });
                        let _ = writeln!(err, "{line}");
                    } else {
                        let _ = write!(err, "{}", e.render());
                    }
                    EXIT_USAGE
                }
            };
        }
    };
    match dispatch(&cfg, out) {
        Ok(()) => EXIT_OK,
        Err(Failure::Lib(Error::Io(e))) if e.kind() == std::io::ErrorKind::BrokenPipe => EXIT_OK,
        Err(Failure::Lib(e)) => {
            report_error(err, cfg.format, error_kind(&e), &e.to_string());
            EXIT_VALIDATION
        }
        Err(Failure::Assertion(msg)) => {
            report_error(err, cfg.format, "assertion", &msg);
            EXIT_ASSERTION
        }
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

/// `key: value` lines for table output of a flat JSON object.
fn write_table<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<()> {
    fn walk(out: &mut dyn Write, prefix: &str, v: &serde_json::Value) -> std::io::Result<()> {
        match v {
            serde_json::Value::Object(m) => {
                for (k, v) in m {
                    let key = if prefix.is_empty() {
                        k.clone()
                    } else {
                        format!("{prefix}.{k}")
                    };
                    walk(out, &key, v)?;
                }
                Ok(())
            }
            serde_json::Value::Number(n) if n.is_f64() => {
                writeln!(out, "{prefix}: {}", sig17(n.as_f64().unwrap_or_default()))
            }
            other => writeln!(out, "{prefix}: {other}"),
        }
    }
    let v = serde_json::to_value(value).map_err(|e| Error::Validation(e.to_string()))?;
    walk(out, "", &v)?;
    Ok(())
}

fn emit<T: Serialize>(out: &mut dyn Write, format: OutputFormat, value: &T) -> std::result::Result<(), Failure> {
    match format {
        OutputFormat::Json => write_json(out, value)?,
        OutputFormat::Table | OutputFormat::Csv => write_table(out, value)?,
    }
    Ok(())
}

#[derive(Serialize)]
struct GridInfo {
    rows: usize,
    cols: usize,
    datum: Datum,
    /// `[lat_min, lon_min, lat_max, lon_max]`.
    region: [f64; 4],
    cell_size_deg: [f64; 2],
    min_elevation_m: f64,
    max_elevation_m: f64,
    features: usize,
}

impl GridInfo {
    fn of(g: &TerrainGrid) -> Self {
        let r = g.region();
        let (lo, hi) = g.elevation_range();
        let (dlat, dlon) = g.cell_size();
        Self {
            rows: g.rows(),
            cols: g.cols(),
            datum: g.datum(),
            region: [r.min_y, r.min_x, r.max_y, r.max_x],
            cell_size_deg: [dlat, dlon],
            min_elevation_m: lo,
            max_elevation_m: hi,
            features: g.features().len(),
        }
    }
}

fn geolocate(scene_args: &SceneArgs) -> Result<GeolocationResult> {
    let grid = scene_args.grid()?;
    let scene = scene_args.scene()?;
    let px = match scene.aim {
        Aim::Pixel(p) => p,
        Aim::Detection(b) => {
            b.validate(&scene.camera)?;
            b.center()
        }
    };
    let dir = camera_ray_to_world(&pixel_to_camera_ray(&scene.camera, px)?, &scene.state.attitude).normalize();
    cast_ray_with(
        &grid,
        &scene.state.position,
        &dir,
        &CastOptions {
            max_range_m: scene_args.max_range,
        },
    )
}

#[derive(Serialize)]
struct StareOutput {
    vehicle_yaw_deg: f64,
    gimbal_pitch_deg: f64,
    gimbal_roll_deg: f64,
    reachable: bool,
    quaternion_xyzw: [f64; 4],
}

#[derive(Serialize)]
struct MonteCarloSummary {
    trials: u64,
    seed: u64,
    noise: NoiseModel,
    truth: GeodeticPosition,
    n: usize,
    mean_haversine_m: f64,
    max_haversine_m: f64,
    mean_abs_elevation_err_m: f64,
    max_abs_elevation_err_m: f64,
    miss_count: usize,
}

fn load_noise(spec: &str) -> Result<NoiseModel> {
    if NoiseModel::PRESETS.contains(&spec) {
        return NoiseModel::preset(spec);
    }
    let path = Path::new(spec);
    if !path.exists() {
        return NoiseModel::preset(spec);
    }
    let text = std::fs::read_to_string(path)?;
    let m: NoiseModel = serde_json::from_str(&text).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    m.validate()?;
    Ok(m)
}

#[derive(Serialize)]
struct CalibrationSummary {
    candidates: usize,
    accepted: usize,
    tolerance_m: f64,
    selected: Option<crate::optics::calibration::CandidateOutcome>,
    /// Closest rejected candidates, for context.
    runners_up: Vec<crate::optics::calibration::CandidateOutcome>,
}

fn dispatch(cfg: &CliConfig, out: &mut dyn Write) -> std::result::Result<(), Failure> {
    match &cfg.command {
        Command::Terrain(TerrainCommand::Gen(a)) => {
            let grid_spec = GridSpec::centered(a.center.0, a.center.1, a.half_extent_deg, a.cell_size_deg, a.datum);
            let mut params = SynthParams::new(a.kind, grid_spec).with_base(a.elev);
            params.magnitude_m = a.magnitude;
            params.width_m = a.width;
            let grid = synth_terrain(&params)?;
            let path = cfg
                .out
                .as_ref()
                .ok_or_else(|| Error::invalid("terrain gen needs --out PATH"))?;
            save_grid(&grid, path)?;
            emit(out, cfg.format, &GridInfo::of(&grid))
        }
        Command::Terrain(TerrainCommand::Info { grid }) => emit(out, cfg.format, &GridInfo::of(&load_grid(grid)?)),
        Command::Geolocate(a) => emit(out, cfg.format, &geolocate(a)?),
        Command::Stare(a) => {
            let cmd = stare_solution(&a.drone, &a.target, &GimbalLimits::default())?;
            let q = cmd.gimbal_state()?.xyzw();
            emit(
                out,
                cfg.format,
                &StareOutput {
                    vehicle_yaw_deg: cmd.vehicle_yaw_deg,
                    gimbal_pitch_deg: cmd.gimbal_pitch_deg,
                    gimbal_roll_deg: cmd.gimbal_roll_deg,
                    reachable: cmd.reachable,
                    quaternion_xyzw: q,
                },
            )
        }
        Command::Montecarlo(a) => {
            let grid = a.scene.grid()?;
            let scene = a.scene.scene()?;
            let noise = load_noise(&a.noise)?.with_seed(cfg.seed);
            let truth = match a.truth {
                Some(t) => t,
                None => geolocate(&a.scene)?
                    .hit
                    .ok_or_else(|| Error::invalid("nominal ray misses the terrain; pass --truth"))?,
            };
            let stats = monte_carlo_geolocation(&grid, &scene, &truth, &noise, a.trials, cfg.seed)?;
            match &cfg.out {
                Some(path) => {
                    stats.write_csv(create(path)?)?;
                    if cfg.format == OutputFormat::Csv {
                        return Ok(());
                    }
                }
                None if cfg.format == OutputFormat::Csv => {
                    stats.write_csv(&mut *out)?;
                    return Ok(());
                }
                None => {}
            }
            emit(
                out,
                cfg.format,
                &MonteCarloSummary {
                    trials: a.trials,
                    seed: cfg.seed,
                    noise,
                    truth,
                    n: stats.n,
                    mean_haversine_m: stats.mean_haversine_m,
                    max_haversine_m: stats.max_haversine_m,
                    mean_abs_elevation_err_m: stats.mean_abs_elevation_err_m,
                    max_abs_elevation_err_m: stats.max_abs_elevation_err_m,
                    miss_count: stats.miss_count,
                },
            )
        }
        Command::Scenario(ScenarioCommand::Export { builtin }) => {
            let s = builtin_scenario(builtin, Some(cfg.seed))?;
            match &cfg.out {
                Some(path) => save_scenario(&s, path)?,
                None => write_json(&mut *out, &s)?,
            }
            Ok(())
        }
        Command::Scenario(ScenarioCommand::Run(src)) => {
            let (scenario, base) = match (&src.file, &src.builtin) {
                (Some(path), _) => (load_scenario(path)?, path.parent().map(Path::to_path_buf)),
                (None, Some(name)) => (builtin_scenario(name, Some(cfg.seed))?, None),
                (None, None) => {
                    return Err(Error::invalid(format!(
                        "pass --file PATH or --builtin ({})",
                        BUILTIN_SCENARIOS.join("|")
                    ))
                    .into())
                }
            };
            let report = run_scenario(&scenario, base.as_deref())?;
            if let Some(path) = &cfg.out {
                report.write_events_csv(create(path)?)?;
            }
            match cfg.format {
                OutputFormat::Csv => report.write_events_csv(&mut *out)?,
                OutputFormat::Json => write_json(&mut *out, &report)?,
                OutputFormat::Table => {
                    for e in &report.events {
                        writeln!(
                            out,
                            "{:>8.3} {:<6} {:<20} {:<5} {}",
                            e.t_s, e.agent, e.event, e.ok, e.detail
                        )?;
                    }
                    writeln!(
                        out,
                        "bus: sent {} delivered {} dropped {} in flight {} stale {}",
                        report.bus.sent,
                        report.bus.delivered,
                        report.bus.dropped,
                        report.bus.in_flight,
                        report.bus.stale
                    )?;
                }
            }
            if report.passed() {
                Ok(())
            } else {
                let failed = report.assertions.iter().filter(|a| !a.passed).count();
                Err(Failure::Assertion(format!("{failed} scenario assertion(s) failed")))
            }
        }
        Command::Report(a) => {
            let mut results = run_builtin_suite();
            if let Some(path) = &a.results {
                let text = std::fs::read_to_string(path)?;
                let extra: Vec<TestOutcome> = serde_json::from_str(&text).map_err(|e| Error::Parse {
                    line: e.line(),
                    column: e.column(),
                    message: e.to_string(),
                })?;
                results.extend(extra);
            }
            let report = taxonomy_report(&results);
            match cfg.format {
                OutputFormat::Json => write_json(&mut *out, &report)?,
                _ => out.write_all(report.to_table().as_bytes())?,
            }
            Ok(())
        }
        Command::CalibrateFrames => {
            let report = calibrate_frames(&reference_observation())?;
            let accepted = report.accepted().len();
            let mut rejected: Vec<_> = report
                .candidates
                .iter()
                .filter(|c| !c.accepted && c.residual_m.is_some())
                .copied()
                .collect();
            rejected.sort_by(|a, b| a.residual_m.partial_cmp(&b.residual_m).expect("finite residuals"));
            rejected.truncate(3);
            let summary = CalibrationSummary {
                candidates: report.candidates.len(),
                accepted,
                tolerance_m: report.tolerance_m,
                selected: report.selected().ok().copied(),
                runners_up: rejected,
            };
            emit(out, cfg.format, &summary)?;
            report.selected()?;
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = main_with_args(std::iter::once("tds").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn parsers() {
        let p = parse_position("36.2,-96.0,195").unwrap();
        assert_eq!(p.datum(), Datum::EllipsoidWgs84);
        assert_eq!(parse_position("36.2,-96.0,195,AMSL").unwrap().datum(), Datum::Amsl);
        assert!(parse_position("36.2,-96.0").is_err());
        assert_eq!(parse_res("1920x1080").unwrap(), (1920, 1080));
        assert!(parse_res("1920").is_err());
        assert_eq!(parse_quat("0,0,0,1").unwrap(), [0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn unknown_flag_is_usage_error() {
        let (code, _, err) = run(&["geolocate", "--bogus"]);
        assert_eq!(code, EXIT_USAGE);
        assert!(err.contains("Usage"));
    }

    #[test]
    fn usage_error_as_json() {
        let (code, _, err) = run(&["--format", "json", "stare", "--nope"]);
        assert_eq!(code, EXIT_USAGE);
        assert_eq!(err.lines().count(), 1);
        let v: serde_json::Value = serde_json::from_str(&err).unwrap();
        assert_eq!(v["error"], "usage");
    }

    #[test]
    fn validation_error_is_json_line() {
        let (code, _, err) = run(&["stare", "--drone", "36.2,-96.0,195", "--target", "36.2,-96.0,195"]);
        assert_eq!(code, EXIT_VALIDATION);
        let line = err.lines().next().unwrap();
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(v["error"], "invalid_input");
    }

    #[test]
    fn stare_outputs_angles() {
        let (code, out, _) = run(&["stare", "--drone", "36.2,-96.0,300", "--target", "36.201,-96.0,274"]);
        assert_eq!(code, 0);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert!(v["vehicle_yaw_deg"].as_f64().unwrap().abs() < 1e-9);
        assert!(v["gimbal_pitch_deg"].as_f64().unwrap() < 0.0);
    }
}
