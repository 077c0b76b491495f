//! JSON configuration file, dotted-key overrides and the key reference
//! printed by `--help`.
//!
//! Every section and field is optional; missing values take the defaults
//! below. Angles are given in degrees in the file and converted to radians
//! when building a [`RunConfig`].

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::arena::{load_arena, ArenaDoc};
use crate::detection::{DetectorModel, DetectorName};
use crate::error::{Error, Result};
use crate::harness::{spiral_limit, RunConfig, StartPose, SweepSpec, VehicleLimits};
use crate::metrics::EnergyModel;
use crate::policies::{PolicyConfig, PolicyKind, Side};
use crate::sensing::{CameraModel, TofConfig};
use crate::Vec2;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub schema_version: u32,
    /// Arena document path; `null` uses the built-in room.
    pub arena: Option<PathBuf>,
    pub run: RunSection,
    pub policy: PolicySection,
    pub detector: DetectorSection,
    pub tof: TofSection,
    pub camera: CameraSection,
    pub vehicle: VehicleSection,
    pub grid: GridSection,
    pub energy: EnergySection,
    pub sweep: SweepSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub duration: f64,
    pub seed: u64,
    pub control_dt: f64,
    pub start_x: Option<f64>,
    pub start_y: Option<f64>,
    pub start_heading_deg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PolicySection {
    pub kind: String,
    pub cruise_speed: f64,
    pub trigger_dist: f64,
    pub wall_standoff: f64,
    pub spiral_step: f64,
    pub spiral_max_offset: Option<f64>,
    pub scan_step_deg: f64,
    pub leg_max: f64,
    pub turn_rate: f64,
    pub wall_gain: f64,
    pub wall_damping: f64,
    pub follow_side: Side,
    pub corner_margin: f64,
    pub side_guard: f64,
    pub turn_min_deg: f64,
    pub turn_max_deg: f64,
    pub heading_tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectorSection {
    /// `ssd-1.0`, `ssd-0.75`, `ssd-0.5`, `custom` or `none`.
    pub model: String,
    pub fps: Option<f64>,
    pub p_detect: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TofSection {
    pub max_range: f64,
    pub rate_hz: f64,
    pub noise_sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CameraSection {
    pub fov_deg: f64,
    pub max_range: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VehicleSection {
    pub v_max: f64,
    pub omega_max: f64,
    pub drone_radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    pub cell_size: f64,
    pub heatmap_saturation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnergySection {
    pub p_motors: f64,
    pub p_cf: f64,
    pub p_aideck: f64,
    pub p_multiranger: f64,
    pub p_total: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub policies: Vec<String>,
    pub speeds: Vec<f64>,
    pub detectors: Vec<String>,
    pub runs_per_config: u32,
    pub base_seed: u64,
    pub jobs: usize,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            arena: None,
            run: RunSection::default(),
            policy: PolicySection::default(),
            detector: DetectorSection::default(),
            tof: TofSection::default(),
            camera: CameraSection::default(),
            vehicle: VehicleSection::default(),
            grid: GridSection::default(),
            energy: EnergySection::default(),
            sweep: SweepSection::default(),
        }
    }
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            duration: 180.0,
            seed: 42,
            control_dt: 0.02,
            start_x: None,
            start_y: None,
            start_heading_deg: 0.0,
        }
    }
}

impl Default for PolicySection {
    fn default() -> Self {
        let p = PolicyConfig::default();
        Self {
            kind: PolicyKind::PseudoRandom.token().to_string(),
            cruise_speed: p.cruise_speed,
            trigger_dist: p.trigger_dist,
            wall_standoff: p.wall_standoff,
            spiral_step: p.spiral_step,
            spiral_max_offset: None,
            scan_step_deg: p.scan_step.to_degrees(),
            leg_max: p.leg_max,
            turn_rate: p.turn_rate,
            wall_gain: p.wall_gain,
            wall_damping: p.wall_damping,
            follow_side: p.follow_side,
            corner_margin: p.corner_margin,
            side_guard: p.side_guard,
            turn_min_deg: p.turn_min.to_degrees(),
            turn_max_deg: p.turn_max.to_degrees(),
            heading_tolerance: p.heading_tolerance,
        }
    }
}

impl Default for DetectorSection {
    fn default() -> Self {
        Self {
            model: DetectorName::Ssd1_0.token().to_string(),
            fps: None,
            p_detect: None,
        }
    }
}

impl Default for TofSection {
    fn default() -> Self {
        let t = TofConfig::default();
        Self {
            max_range: t.max_range,
            rate_hz: t.rate,
            noise_sigma: t.noise_sigma,
        }
    }
}

impl Default for CameraSection {
    fn default() -> Self {
        let c = CameraModel::default();
        Self {
            fov_deg: c.fov.to_degrees(),
            max_range: c.max_detect_range,
        }
    }
}

impl Default for VehicleSection {
    fn default() -> Self {
        let v = VehicleLimits::default();
        Self {
            v_max: v.v_max,
            omega_max: v.omega_max,
            drone_radius: v.drone_radius,
        }
    }
}

impl Default for GridSection {
    fn default() -> Self {
        Self {
            cell_size: 0.5,
            heatmap_saturation: crate::metrics::HEATMAP_SATURATION,
        }
    }
}

impl Default for EnergySection {
    fn default() -> Self {
        let e = EnergyModel::default();
        Self {
            p_motors: e.p_motors,
            p_cf: e.p_cf,
            p_aideck: e.p_aideck,
            p_multiranger: e.p_multiranger,
            p_total: e.p_total,
        }
    }
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            policies: PolicyKind::ALL.iter().map(|k| k.token().to_string()).collect(),
            speeds: vec![0.1, 0.5, 1.0],
            detectors: vec![DetectorName::Ssd1_0.token().to_string()],
            runs_per_config: 5,
            base_seed: 42,
            jobs: 1,
        }
    }
}

/// `(key, default, meaning)` for every config leaf.
pub const CONFIG_KEYS: &[(&str, &str, &str)] = &[
    ("schema_version", "1", "config schema version; must be 1"),
    ("arena", "null", "arena JSON path (relative to the config file); null = built-in 6.5x5.5 m room, 6 objects"),
    ("run.duration", "180", "mission length, s (3 min flights)"),
    ("run.seed", "42", "run seed for `run`"),
    ("run.control_dt", "0.02", "control period, s (50 Hz)"),
    ("run.start_x", "null", "start x, m; null = room center"),
    ("run.start_y", "null", "start y, m; null = room center"),
    ("run.start_heading_deg", "0", "start heading, degrees CCW from +x"),
    ("policy.kind", "pseudo-random", "pseudo-random | wall-following | spiral | rotate-and-measure"),
    ("policy.cruise_speed", "0.5", "mean flight speed, m/s (0.1, 0.5, 1.0 in the protocol)"),
    ("policy.trigger_dist", "1.0", "front obstacle trigger, m (pseudo-random, rotate-and-measure)"),
    ("policy.wall_standoff", "0.5", "wall-following standoff and first spiral ring, m"),
    ("policy.spiral_step", "0.5", "spiral ring increment per lap, m"),
    ("policy.spiral_max_offset", "null", "largest spiral ring, m; null = min(w,h)/2 - drone radius"),
    ("policy.scan_step_deg", "45", "rotate-and-measure sample spacing, degrees"),
    ("policy.leg_max", "2.0", "rotate-and-measure maximum leg, m"),
    ("policy.turn_rate", "1.5", "in-place yaw rate, rad/s"),
    ("policy.wall_gain", "1.5", "wall tracking proportional gain, rad/s per m"),
    ("policy.wall_damping", "1.0", "wall tracking damping ratio (0 = pure proportional)"),
    ("policy.follow_side", "left", "wall kept on this side: left | right"),
    ("policy.corner_margin", "0.1", "corner turn starts at front <= standoff + margin, m"),
    ("policy.side_guard", "0.15", "side range that blocks straight flight, m"),
    ("policy.turn_min_deg", "90", "random turn lower bound, degrees"),
    ("policy.turn_max_deg", "270", "random turn upper bound (exclusive), degrees"),
    ("policy.heading_tolerance", "0.05", "turn completion tolerance, rad"),
    ("detector.model", "ssd-1.0", "ssd-1.0 | ssd-0.75 | ssd-0.5 | custom | none"),
    ("detector.fps", "null", "inference rate override, Hz (ssd-1.0 1.6, ssd-0.75 2.3, ssd-0.5 4.3)"),
    ("detector.p_detect", "null", "per-frame success override (int8 mAP 0.50, 0.48, 0.32)"),
    ("tof.max_range", "4.0", "ToF saturation range, m"),
    ("tof.rate_hz", "20", "ToF refresh rate, Hz"),
    ("tof.noise_sigma", "0", "Gaussian ToF noise, m"),
    ("camera.fov_deg", "63.03", "camera horizontal field of view, degrees (1.1 rad)"),
    ("camera.max_range", "2.0", "maximum detection distance, m"),
    ("vehicle.v_max", "1.0", "forward speed clamp, m/s"),
    ("vehicle.omega_max", "2.0", "yaw rate clamp, rad/s"),
    ("vehicle.drone_radius", "0.05", "collision disc radius, m"),
    ("grid.cell_size", "0.5", "coverage cell edge, m (143 cells in the default room)"),
    ("grid.heatmap_saturation", "18", "dwell time mapped to white, s"),
    ("energy.p_motors", "7.32", "motor power, W"),
    ("energy.p_cf", "0.277", "flight controller power, W"),
    ("energy.p_aideck", "0.134", "AI-deck power, W"),
    ("energy.p_multiranger", "0.286", "multi-ranger deck power, W"),
    ("energy.p_total", "8.02", "platform total power, W"),
    ("sweep.policies", "all four", "policies in the sweep"),
    ("sweep.speeds", "[0.1, 0.5, 1.0]", "cruise speeds in the sweep, m/s"),
    ("sweep.detectors", "[\"ssd-1.0\"]", "detectors in the sweep (`none` for exploration only)"),
    ("sweep.runs_per_config", "5", "runs per configuration"),
    ("sweep.base_seed", "42", "base seed mixed into every per-run seed"),
    ("sweep.jobs", "1", "worker threads; results do not depend on it"),
];

/// Help text listing every key.
pub fn keys_help() -> String {
    let width = CONFIG_KEYS.iter().map(|(k, _, _)| k.len()).max().unwrap_or(0);
    let dwidth = CONFIG_KEYS.iter().map(|(_, d, _)| d.len()).max().unwrap_or(0);
    let mut s = String::from("Config keys (JSON file, or --set key=value):\n");
    for (k, d, m) in CONFIG_KEYS {
        s.push_str(&format!("  {k:width$}  {d:dwidth$}  {m}\n"));
    }
    s
}

fn json_error(origin: &str, e: &serde_json::Error) -> Error {
    if e.line() > 0 {
        Error::config(
            format!("{origin} (line {}, column {})", e.line(), e.column()),
            e.to_string(),
        )
    } else {
        Error::config(origin, e.to_string())
    }
}

/// Sets `key` (dotted path) in `doc`. The value is read as JSON when it
/// parses, otherwise as a string. Only keys already present are accepted.
pub fn apply_override(doc: &mut Value, spec: &str) -> Result<()> {
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| Error::config(format!("--set {spec}"), "expected key=value"))?;
    let key = key.trim();
    let mut slot = &mut *doc;
    for part in key.split('.') {
        slot = slot
            .as_object_mut()
            .and_then(|m| m.get_mut(part))
            .ok_or_else(|| Error::config(format!("--set {key}"), "unknown config key (see --help)"))?;
    }
    if slot.is_object() {
        return Err(Error::config(format!("--set {key}"), "is a section, not a value"));
    }
    *slot = serde_json::from_str(raw.trim()).unwrap_or_else(|_| Value::String(raw.to_string()));
    Ok(())
}

impl Config {
    pub fn from_json(text: &str, origin: &str) -> Result<Self> {
        let cfg: Config = serde_json::from_str(text).map_err(|e| json_error(origin, &e))?;
        cfg.check_schema()?;
        Ok(cfg)
    }

    fn check_schema(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::config(
                "schema_version",
                format!("unsupported version {} (expected {SCHEMA_VERSION})", self.schema_version),
            ));
        }
        Ok(())
    }

    /// Loads an optional file and applies `--set` overrides in order.
    /// A relative arena path is resolved against the config file's directory.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let mut cfg = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| Error::config(p.display().to_string(), e.to_string()))?;
                let mut cfg = Self::from_json(&text, &p.display().to_string())?;
                if let (Some(a), Some(dir)) = (cfg.arena.as_ref(), p.parent()) {
                    if a.is_relative() {
                        cfg.arena = Some(dir.join(a));
                    }
                }
                cfg
            }
            None => Self::default(),
        };
        if !overrides.is_empty() {
            cfg = cfg.with_overrides(overrides)?;
        }
        Ok(cfg)
    }

    pub fn with_overrides(&self, overrides: &[String]) -> Result<Self> {
        let mut doc = serde_json::to_value(self).expect("config serializes");
        for o in overrides {
            apply_override(&mut doc, o)?;
        }
        let cfg: Config = serde_json::from_value(doc).map_err(|e| json_error("--set", &e))?;
        cfg.check_schema()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn load_arena(&self) -> Result<crate::Arena> {
        match &self.arena {
            None => ArenaDoc::default_room().to_arena(),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| Error::config(p.display().to_string(), e.to_string()))?;
                load_arena(&text)
            }
        }
    }

    pub fn policy_kind(&self) -> Result<PolicyKind> {
        self.policy.kind.parse()
    }

    /// `None` when the model is `none`.
    pub fn detector_model(&self) -> Result<Option<DetectorModel>> {
        parse_detector(&self.detector.model, self.detector.fps, self.detector.p_detect)
    }

    /// Builds a validated run configuration from the file values.
    pub fn run_config(&self) -> Result<RunConfig> {
        let arena = self.load_arena()?;
        let kind = self.policy_kind()?;
        let vehicle = VehicleLimits {
            v_max: self.vehicle.v_max,
            omega_max: self.vehicle.omega_max,
            drone_radius: self.vehicle.drone_radius,
        };
        let p = &self.policy;
        let policy_cfg = PolicyConfig {
            cruise_speed: p.cruise_speed,
            trigger_dist: p.trigger_dist,
            wall_standoff: p.wall_standoff,
            spiral_step: p.spiral_step,
            scan_step: p.scan_step_deg.to_radians(),
            leg_max: p.leg_max,
            turn_rate: p.turn_rate,
            wall_gain: p.wall_gain,
            wall_damping: p.wall_damping,
            follow_side: p.follow_side,
            corner_margin: p.corner_margin,
            side_guard: p.side_guard,
            turn_min: p.turn_min_deg.to_radians(),
            turn_max: p.turn_max_deg.to_radians(),
            heading_tolerance: p.heading_tolerance,
            spiral_max_offset: p
                .spiral_max_offset
                .unwrap_or_else(|| spiral_limit(&arena, vehicle.drone_radius)),
        };
        let start = match (self.run.start_x, self.run.start_y) {
            (None, None) => None,
            (Some(x), Some(y)) => Some(StartPose {
                position: Vec2::new(x, y),
                heading: self.run.start_heading_deg.to_radians(),
            }),
            _ => {
                return Err(Error::validation(
                    "run.start_x",
                    "start_x and start_y must be given together",
                ))
            }
        };
        let mut rc = RunConfig::new(arena, kind, p.cruise_speed);
        rc.policy_cfg = policy_cfg;
        rc.detector = self.detector_model()?;
        rc.duration = self.run.duration;
        rc.seed = self.run.seed;
        rc.control_dt = self.run.control_dt;
        rc.start = start;
        rc.tof = TofConfig {
            max_range: self.tof.max_range,
            rate: self.tof.rate_hz,
            noise_sigma: self.tof.noise_sigma,
        };
        rc.camera = CameraModel {
            fov: self.camera.fov_deg.to_radians(),
            max_detect_range: self.camera.max_range,
            mount_angle: 0.0,
        };
        rc.vehicle = vehicle;
        rc.cell_size = self.grid.cell_size;
        rc.energy = EnergyModel {
            p_motors: self.energy.p_motors,
            p_cf: self.energy.p_cf,
            p_aideck: self.energy.p_aideck,
            p_multiranger: self.energy.p_multiranger,
            p_total: self.energy.p_total,
        };
        if !(self.grid.heatmap_saturation > 0.0) {
            return Err(Error::validation("grid.heatmap_saturation", "must be > 0"));
        }
        rc.validate()?;
        Ok(rc)
    }

    /// Sweep specification using `run_config()` as the per-run template.
    pub fn sweep_spec(&self) -> Result<SweepSpec> {
        let s = &self.sweep;
        let policies = s
            .policies
            .iter()
            .map(|p| p.parse::<PolicyKind>())
            .collect::<Result<Vec<_>>>()
            .map_err(|e| Error::validation("sweep.policies", e.to_string()))?;
        let detectors = s
            .detectors
            .iter()
            .map(|d| parse_detector(d, self.detector.fps, self.detector.p_detect))
            .collect::<Result<Vec<_>>>()
            .map_err(|e| Error::validation("sweep.detectors", e.to_string()))?;
        for &v in &s.speeds {
            if !(v > 0.0 && v <= self.vehicle.v_max) {
                return Err(Error::validation(
                    "sweep.speeds",
                    format!("speed {v} must be in (0, vehicle.v_max]"),
                ));
            }
        }
        if s.jobs == 0 {
            return Err(Error::validation("sweep.jobs", "must be >= 1"));
        }
        // the template must validate with every speed, so build it at the first one
        let mut tmpl = self.clone();
        if let Some(&v) = s.speeds.first() {
            tmpl.policy.cruise_speed = v;
        }
        let template = tmpl.run_config()?;
        let spec = SweepSpec {
            policies,
            speeds: s.speeds.clone(),
            detectors,
            runs_per_config: s.runs_per_config,
            base_seed: s.base_seed,
            template,
            jobs: s.jobs,
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Parses a detector token; `fps` / `p_detect` override the built-in values.
pub fn parse_detector(token: &str, fps: Option<f64>, p_detect: Option<f64>) -> Result<Option<DetectorModel>> {
    let mut model = match token {
        "none" => return Ok(None),
        "custom" => match (fps, p_detect) {
            (Some(f), Some(p)) => DetectorModel::custom(f, p),
            _ => {
                return Err(Error::validation(
                    "detector.model",
                    "custom detector needs detector.fps and detector.p_detect",
                ))
            }
        },
        other => DetectorModel::builtin(other.parse().map_err(|_| {
            Error::validation(
                "detector.model",
                format!("unknown detector `{other}` (valid: ssd-1.0, ssd-0.75, ssd-0.5, custom, none)"),
            )
        })?),
    };
    if let Some(f) = fps {
        model.fps = f;
    }
    if let Some(p) = p_detect {
        model.p_detect = p;
    }
    model.validate()?;
    Ok(Some(model))
}
