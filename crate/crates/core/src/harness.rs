//! Deterministic mission loop and the multi-configuration sweep.
//!
//! One run is a fixed-step loop at `control_dt`. Each tick, in order: ToF
//! poll (zero-order hold at the sensor rate), policy step, trajectory log
//! row and grid mark for the current pose, any detector frames snapped to
//! this tick, vehicle integration, collision check. Detector frames fire at
//! `n / fps` and are handled on the last control tick at or before that
//! instant; a frame landing exactly on the mission end is handled against
//! the final pose.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::detection::{attempt_detection, detection_rate, DetectionLedger, DetectorModel};
use crate::digest::{derive_seed, fnv1a64, Fnv64};
use crate::error::{Error, Result};
use crate::metrics::{mission_energy, EnergyBreakdown, EnergyModel, OccupancyGrid};
use crate::policies::{policy_step, Observation, PolicyConfig, PolicyKind, PolicyState};
use crate::sensing::{objects_in_fov, CameraModel, TofBank, TofConfig};
use crate::vehicle::{check_collision, step, DEFAULT_DRONE_RADIUS};
use crate::{Arena, CollisionRecord, Vec2, VehicleState};

/// Header of the per-tick trajectory log.
pub const TRAJECTORY_HEADER: &str = "t,x,y,heading,v_cmd,omega_cmd";

const STREAM_POLICY: u64 = 1;
const STREAM_TOF: u64 = 2;
const STREAM_DETECTOR: u64 = 3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VehicleLimits {
    pub v_max: f64,
    pub omega_max: f64,
    pub drone_radius: f64,
}

impl Default for VehicleLimits {
    fn default() -> Self {
        Self {
            v_max: 1.0,
            omega_max: 2.0,
            drone_radius: DEFAULT_DRONE_RADIUS,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StartPose {
    pub position: Vec2,
    pub heading: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub arena: Arena,
    pub policy: PolicyKind,
    pub policy_cfg: PolicyConfig,
    pub detector: Option<DetectorModel>,
    pub duration: f64,
    pub seed: u64,
    /// `None` starts at the room center facing east.
    pub start: Option<StartPose>,
    pub control_dt: f64,
    pub tof: TofConfig,
    pub camera: CameraModel,
    pub vehicle: VehicleLimits,
    pub cell_size: f64,
    pub energy: EnergyModel,
    /// Keep the full trajectory log text in the result.
    pub keep_trajectory: bool,
}

impl RunConfig {
    /// Default mission in `arena`: 180 s, 50 Hz control, default sensors.
    pub fn new(arena: Arena, policy: PolicyKind, cruise_speed: f64) -> Self {
        let vehicle = VehicleLimits::default();
        let policy_cfg = PolicyConfig {
            cruise_speed,
            spiral_max_offset: spiral_limit(&arena, vehicle.drone_radius),
            ..PolicyConfig::default()
        };
        Self {
            arena,
            policy,
            policy_cfg,
            detector: None,
            duration: 180.0,
            seed: 42,
            start: None,
            control_dt: 0.02,
            tof: TofConfig::default(),
            camera: CameraModel::default(),
            vehicle,
            cell_size: 0.5,
            energy: EnergyModel::default(),
            keep_trajectory: false,
        }
    }

    pub fn with_detector(mut self, detector: DetectorModel) -> Self {
        self.detector = Some(detector);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_start(mut self, position: Vec2, heading: f64) -> Self {
        self.start = Some(StartPose { position, heading });
        self
    }

    pub fn ticks(&self) -> u64 {
        (self.duration / self.control_dt).round() as u64
    }

    pub fn start_pose(&self) -> StartPose {
        self.start.unwrap_or(StartPose {
            position: self.arena.center(),
            heading: 0.0,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.duration.is_finite() && self.duration > 0.0) {
            return Err(Error::validation("run.duration", "must be > 0"));
        }
        if !(self.control_dt.is_finite() && self.control_dt > 0.0) {
            return Err(Error::validation("run.control_dt", "must be > 0"));
        }
        let n = self.ticks();
        if n == 0 || (n as f64 * self.control_dt - self.duration).abs() > 1e-6 {
            return Err(Error::validation(
                "run.duration",
                "must be a whole number of control ticks",
            ));
        }
        self.policy_cfg.validate(self.tof.max_range)?;
        if self.policy_cfg.cruise_speed > self.vehicle.v_max {
            return Err(Error::validation(
                "policy.cruise_speed",
                format!("exceeds vehicle.v_max ({})", self.vehicle.v_max),
            ));
        }
        if self.policy_cfg.turn_rate > self.vehicle.omega_max {
            return Err(Error::validation(
                "policy.turn_rate",
                format!("exceeds vehicle.omega_max ({})", self.vehicle.omega_max),
            ));
        }
        if !(self.vehicle.drone_radius > 0.0) {
            return Err(Error::validation("vehicle.drone_radius", "must be > 0"));
        }
        self.tof.validate()?;
        self.camera.validate()?;
        self.energy.validate()?;
        if let Some(d) = &self.detector {
            d.validate()?;
        }
        if !(self.cell_size > 0.0) {
            return Err(Error::validation("grid.cell_size", "must be > 0"));
        }
        let start = self.start_pose();
        if !self.arena.in_free_space(start.position) {
            return Err(Error::InvalidStartPose {
                x: start.position.x,
                y: start.position.y,
            });
        }
        Ok(())
    }
}

/// Largest spiral ring offset for a room: half the short side minus the body radius.
pub fn spiral_limit(arena: &Arena, drone_radius: f64) -> f64 {
    arena.width().min(arena.height()) / 2.0 - drone_radius
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub seed: u64,
    pub coverage: f64,
    pub grid: OccupancyGrid,
    pub ledger: DetectionLedger,
    /// `None` without a detector or without target objects.
    pub detection_rate: Option<f64>,
    pub collision: CollisionRecord,
    /// FNV-1a 64 of the trajectory log bytes (header included).
    pub digest: u64,
    pub energy: EnergyBreakdown,
    /// Simulated flight time; shorter than the duration after a collision.
    pub elapsed: f64,
    /// `(t, coverage)` at every whole second.
    pub coverage_series: Vec<(f64, f64)>,
    pub trajectory_csv: Option<String>,
    pub total_objects: usize,
    pub final_state: VehicleState,
}

/// Formats one log row and returns the position exactly as logged, so the
/// grid can be rebuilt bit-for-bit from the log.
fn write_row(buf: &mut String, t: f64, s: &VehicleState, v: f64, w: f64) -> Vec2 {
    buf.clear();
    let _ = write!(buf, "{t:.6},");
    let x0 = buf.len();
    let _ = write!(buf, "{:.6}", s.position.x);
    let x1 = buf.len();
    buf.push(',');
    let _ = write!(buf, "{:.6}", s.position.y);
    let y1 = buf.len();
    let logged = Vec2::new(
        buf[x0..x1].parse().unwrap_or(s.position.x),
        buf[x1 + 1..y1].parse().unwrap_or(s.position.y),
    );
    let _ = writeln!(buf, ",{:.6},{v:.6},{w:.6}", s.heading);
    logged
}

/// Executes one mission.
pub fn run_single(cfg: &RunConfig) -> Result<RunResult> {
    cfg.validate()?;
    let dt = cfg.control_dt;
    let n_ticks = cfg.ticks();
    let duration = n_ticks as f64 * dt;
    let arena = &cfg.arena;

    let stream = |s: u64| {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(s);
        rng
    };
    let mut rng_policy = stream(STREAM_POLICY);
    let mut rng_tof = stream(STREAM_TOF);
    let mut rng_det = stream(STREAM_DETECTOR);

    let start = cfg.start_pose();
    let mut state = VehicleState::at(start.position, start.heading);
    let mut tof = TofBank::new(&cfg.tof);
    let mut policy = PolicyState::new(cfg.policy, &cfg.policy_cfg);
    let mut grid = OccupancyGrid::for_arena(arena, cfg.cell_size)?;
    let mut ledger = DetectionLedger::new();
    let mut collision = CollisionRecord::none();

    let mut hasher = Fnv64::new();
    let mut log = cfg.keep_trajectory.then(String::new);
    let mut row = String::with_capacity(96);
    row.push_str(TRAJECTORY_HEADER);
    row.push('\n');
    hasher.update(row.as_bytes());
    if let Some(l) = log.as_mut() {
        l.reserve(n_ticks as usize * 56);
        l.push_str(&row);
    }

    // detector frames: n = 1, 2, ... up to the mission end
    let frames_total = cfg.detector.map_or(0, |d| d.frames_within(duration));
    let frame_tick = |n: u64, d: &DetectorModel| (d.frame_instant(n) / dt + 1e-9).floor() as u64;
    let mut next_frame = 1u64;
    let mut run_frames = |k: u64, state: &VehicleState, ledger: &mut DetectionLedger, next: &mut u64| {
        let Some(det) = cfg.detector.as_ref() else {
            return;
        };
        while *next <= frames_total && frame_tick(*next, det) <= k {
            let visible = objects_in_fov(arena, state, &cfg.camera);
            attempt_detection(det, &visible, ledger, det.frame_instant(*next), &mut rng_det);
            *next += 1;
        }
    };

    let mut series = Vec::with_capacity(duration as usize + 1);
    let mut next_sample = 1.0;
    let mut elapsed = duration;

    for k in 0..n_ticks {
        let t = k as f64 * dt;
        state.t = t;
        let frame = tof.poll(arena, &state, &mut rng_tof)?;
        let obs = Observation {
            tof: frame,
            heading: state.heading,
            dt,
        };
        let (next_policy, sp) = policy_step(cfg.policy, &policy, &obs, &cfg.policy_cfg, &mut rng_policy);
        policy = next_policy;
        let sp = sp.clamped(cfg.vehicle.v_max, cfg.vehicle.omega_max);

        let logged = write_row(&mut row, t, &state, sp.v_cmd, sp.omega_cmd);
        hasher.update(row.as_bytes());
        if let Some(l) = log.as_mut() {
            l.push_str(&row);
        }
        grid.mark(logged, dt)?;

        run_frames(k, &state, &mut ledger, &mut next_frame);

        state = step(&state, sp, dt);
        state.t = (k + 1) as f64 * dt;

        if state.t + 1e-9 >= next_sample {
            series.push((next_sample, grid.coverage()));
            next_sample += 1.0;
        }

        if check_collision(arena, &state, cfg.vehicle.drone_radius) {
            collision = CollisionRecord::at(state.t, state.position);
            elapsed = state.t;
            break;
        }
    }
    if !collision.occurred {
        run_frames(n_ticks, &state, &mut ledger, &mut next_frame);
    }

    let total_objects = arena.objects().len();
    let rate = match cfg.detector {
        Some(_) if total_objects > 0 => Some(detection_rate(&ledger, total_objects)?),
        _ => None,
    };
    Ok(RunResult {
        seed: cfg.seed,
        coverage: grid.coverage(),
        grid,
        ledger,
        detection_rate: rate,
        collision,
        digest: hasher.finish(),
        energy: mission_energy(&cfg.energy, elapsed),
        elapsed,
        coverage_series: series,
        trajectory_csv: log,
        total_objects,
        final_state: state,
    })
}

/// Rebuilds the occupancy grid from a trajectory log. Every row marks one
/// control period at its logged position.
pub fn grid_from_trajectory(log: &str, arena: &Arena, cell_size: f64, control_dt: f64) -> Result<OccupancyGrid> {
    replay_trajectory(log, arena, cell_size, control_dt).map(|(g, _)| g)
}

/// Replays a trajectory log into a grid plus the `(t, coverage)` series
/// sampled at every whole second, matching [`RunResult::coverage_series`].
pub fn replay_trajectory(
    log: &str,
    arena: &Arena,
    cell_size: f64,
    control_dt: f64,
) -> Result<(OccupancyGrid, Vec<(f64, f64)>)> {
    let mut series = Vec::new();
    let mut next_sample = 1.0;
    let grid = replay_rows(log, arena, cell_size, control_dt, |t, grid| {
        if t + control_dt + 1e-9 >= next_sample {
            series.push((next_sample, grid.coverage()));
            next_sample += 1.0;
        }
    })?;
    Ok((grid, series))
}

/// Coverage reached once every logged pose up to each of `times` is marked.
/// `times` must be sorted.
pub fn coverage_at_times(log: &str, arena: &Arena, cell_size: f64, control_dt: f64, times: &[f64]) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(times.len());
    let mut last = 0.0;
    replay_rows(log, arena, cell_size, control_dt, |t, grid| {
        while out.len() < times.len() && times[out.len()] + 1e-9 < t {
            out.push(last);
        }
        last = grid.coverage();
    })?;
    out.resize(times.len(), last);
    Ok(out)
}

/// Marks every logged row; `after_row(t, grid)` sees the grid after each mark.
fn replay_rows(
    log: &str,
    arena: &Arena,
    cell_size: f64,
    control_dt: f64,
    mut after_row: impl FnMut(f64, &OccupancyGrid),
) -> Result<OccupancyGrid> {
    let mut grid = OccupancyGrid::for_arena(arena, cell_size)?;
    let mut lines = log.lines();
    match lines.next() {
        Some(h) if h.trim_end() == TRAJECTORY_HEADER => {}
        _ => return Err(Error::parse("trajectory.csv", "missing trajectory header")),
    }
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let mut next = |name: &str| -> Result<f64> {
            fields
                .next()
                .and_then(|f| f.trim().parse().ok())
                .ok_or_else(|| Error::parse(format!("trajectory.csv:{}", i + 2), format!("bad `{name}` field")))
        };
        let t = next("t")?;
        let x = next("x")?;
        let y = next("y")?;
        grid.mark(Vec2::new(x, y), control_dt)?;
        after_row(t, &grid);
    }
    Ok(grid)
}

// ---------------------------------------------------------------------------
// Sweep

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub policies: Vec<PolicyKind>,
    pub speeds: Vec<f64>,
    /// `None` runs exploration only.
    pub detectors: Vec<Option<DetectorModel>>,
    pub runs_per_config: u32,
    pub base_seed: u64,
    /// Template for every run; policy, speed, detector and seed are overwritten.
    pub template: RunConfig,
    /// Worker threads; results do not depend on it.
    pub jobs: usize,
}

impl SweepSpec {
    /// Four policies × three speeds, five runs each.
    pub fn standard_protocol(template: RunConfig, detector: Option<DetectorModel>) -> Self {
        Self {
            policies: PolicyKind::ALL.to_vec(),
            speeds: vec![0.1, 0.5, 1.0],
            detectors: vec![detector],
            runs_per_config: 5,
            base_seed: template.seed,
            template,
            jobs: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.policies.is_empty() {
            return Err(Error::validation("sweep.policies", "must not be empty"));
        }
        if self.speeds.is_empty() {
            return Err(Error::validation("sweep.speeds", "must not be empty"));
        }
        if self.detectors.is_empty() {
            return Err(Error::validation("sweep.detectors", "must not be empty"));
        }
        if self.runs_per_config == 0 {
            return Err(Error::validation("sweep.runs_per_config", "must be >= 1"));
        }
        Ok(())
    }
}

pub fn detector_label(d: &Option<DetectorModel>) -> String {
    d.as_ref().map_or_else(|| "none".to_string(), |d| d.name.token().to_string())
}

/// Hash of the trajectory-relevant part of a configuration. The detector is
/// left out so every detector sees the same flights for a given run index.
pub fn config_hash(policy: PolicyKind, speed: f64) -> u64 {
    fnv1a64(format!("{}|{speed:.6}", policy.token()).as_bytes())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub policy: PolicyKind,
    pub speed: f64,
    pub detector: String,
    pub run: u32,
    pub seed: u64,
    pub coverage: f64,
    pub detection_rate: Option<f64>,
    pub collision: bool,
    pub energy_j: f64,
    pub digest: u64,
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub rows: Vec<SweepRow>,
    /// Same order as `rows`.
    pub results: Vec<RunResult>,
    pub total_objects: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub policy: PolicyKind,
    pub speed: f64,
    pub detector: String,
    pub runs: usize,
    pub coverage_mean: f64,
    pub coverage_var: f64,
    pub detection_mean: Option<f64>,
    pub detection_var: Option<f64>,
    pub collisions: usize,
}

/// Mean and unbiased variance; a single sample has variance 0.
pub fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, var)
}

struct Job {
    policy: PolicyKind,
    speed: f64,
    detector: Option<DetectorModel>,
    run: u32,
    seed: u64,
}

/// Runs every configuration `runs_per_config` times. Rows come out in
/// policy, speed, detector, run order regardless of `jobs`.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepOutcome> {
    spec.validate()?;
    let mut jobs = Vec::new();
    for &policy in &spec.policies {
        for &speed in &spec.speeds {
            let hash = config_hash(policy, speed);
            for detector in &spec.detectors {
                for run in 0..spec.runs_per_config {
                    jobs.push(Job {
                        policy,
                        speed,
                        detector: *detector,
                        run,
                        seed: derive_seed(spec.base_seed, hash, u64::from(run)),
                    });
                }
            }
        }
    }

    let exec = |job: &Job| -> Result<RunResult> {
        let mut cfg = spec.template.clone();
        cfg.policy = job.policy;
        cfg.policy_cfg.cruise_speed = job.speed;
        cfg.detector = job.detector;
        cfg.seed = job.seed;
        cfg.keep_trajectory = false;
        run_single(&cfg).map_err(|e| Error::InConfiguration {
            config: format!(
                "{} @ {:.2} m/s, {}, run {}",
                job.policy,
                job.speed,
                detector_label(&job.detector),
                job.run
            ),
            source: Box::new(e),
        })
    };

    let results: Vec<Result<RunResult>> = if spec.jobs > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(spec.jobs)
            .build()
            .map_err(|e| Error::validation("sweep.jobs", e.to_string()))?;
        pool.install(|| jobs.par_iter().map(exec).collect())
    } else {
        jobs.iter().map(exec).collect()
    };
    let results = results.into_iter().collect::<Result<Vec<_>>>()?;

    let rows = jobs
        .iter()
        .zip(&results)
        .map(|(job, r)| SweepRow {
            policy: job.policy,
            speed: job.speed,
            detector: detector_label(&job.detector),
            run: job.run,
            seed: job.seed,
            coverage: r.coverage,
            detection_rate: r.detection_rate,
            collision: r.collision.occurred,
            energy_j: r.energy.total,
            digest: r.digest,
        })
        .collect();
    Ok(SweepOutcome {
        rows,
        results,
        total_objects: spec.template.arena.objects().len(),
    })
}

type GroupKey = (usize, String, String);

/// Groups rows by configuration, keeping first-appearance order.
pub fn group_rows(rows: &[SweepRow]) -> Vec<(PolicyKind, f64, String, Vec<usize>)> {
    let mut order: Vec<(PolicyKind, f64, String, Vec<usize>)> = Vec::new();
    let mut index: BTreeMap<GroupKey, usize> = BTreeMap::new();
    for (i, r) in rows.iter().enumerate() {
        let key = (r.policy as usize, format!("{:.6}", r.speed), r.detector.clone());
        match index.get(&key) {
            Some(&g) => order[g].3.push(i),
            None => {
                index.insert(key, order.len());
                order.push((r.policy, r.speed, r.detector.clone(), vec![i]));
            }
        }
    }
    order
}

/// Per-configuration mean and variance of coverage and detection rate.
pub fn aggregate(rows: &[SweepRow]) -> Vec<AggregateRow> {
    group_rows(rows)
        .into_iter()
        .map(|(policy, speed, detector, idx)| {
            let cov: Vec<f64> = idx.iter().map(|&i| rows[i].coverage).collect();
            let det: Vec<f64> = idx.iter().filter_map(|&i| rows[i].detection_rate).collect();
            let (coverage_mean, coverage_var) = mean_var(&cov);
            let (detection_mean, detection_var) = if det.len() == idx.len() && !det.is_empty() {
                let (m, v) = mean_var(&det);
                (Some(m), Some(v))
            } else {
                (None, None)
            };
            AggregateRow {
                policy,
                speed,
                detector,
                runs: idx.len(),
                coverage_mean,
                coverage_var,
                detection_mean,
                detection_var,
                collisions: idx.iter().filter(|&&i| rows[i].collision).count(),
            }
        })
        .collect()
}

/// Mean detection rate indexed by detector, speed and policy.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionTable {
    pub detectors: Vec<String>,
    pub speeds: Vec<f64>,
    pub policies: Vec<PolicyKind>,
    cells: BTreeMap<(String, String, PolicyKind), f64>,
}

impl DetectionTable {
    pub fn get(&self, detector: &str, speed: f64, policy: PolicyKind) -> Option<f64> {
        self.cells
            .get(&(detector.to_string(), format!("{speed:.6}"), policy))
            .copied()
    }

    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }
}

/// Builds the detector × speed × policy table of mean detection rates.
/// Configurations absent from the sweep stay empty.
pub fn aggregate_detection(rows: &[SweepRow], total_objects: usize) -> Result<DetectionTable> {
    if total_objects == 0 {
        return Err(Error::NoObjects);
    }
    let mut detectors: Vec<String> = Vec::new();
    let mut speeds: Vec<f64> = Vec::new();
    let mut cells = BTreeMap::new();
    for agg in aggregate(rows) {
        let Some(mean) = agg.detection_mean else {
            continue;
        };
        if !detectors.contains(&agg.detector) {
            detectors.push(agg.detector.clone());
        }
        if !speeds.iter().any(|s| (s - agg.speed).abs() < 1e-9) {
            speeds.push(agg.speed);
        }
        cells.insert((agg.detector, format!("{:.6}", agg.speed), agg.policy), mean);
    }
    speeds.sort_by(f64::total_cmp);
    Ok(DetectionTable {
        detectors,
        speeds,
        policies: PolicyKind::ALL.to_vec(),
        cells,
    })
}

// ---------------------------------------------------------------------------
// CSV rendering

pub const RUNS_HEADER: &str = "policy,speed,detector,run,seed,coverage,detection_rate,collision,energy_j,digest";
pub const AGGREGATE_HEADER: &str =
    "policy,speed,detector,runs,coverage_mean,coverage_var,detection_rate_mean,detection_rate_var,collisions";

fn opt6(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| format!("{x:.6}"))
}

pub fn runs_csv(rows: &[SweepRow]) -> String {
    let mut s = String::from(RUNS_HEADER);
    s.push('\n');
    for r in rows {
        let _ = writeln!(
            s,
            "{},{:.2},{},{},{},{:.6},{},{},{:.3},{:016x}",
            r.policy,
            r.speed,
            r.detector,
            r.run,
            r.seed,
            r.coverage,
            opt6(r.detection_rate),
            r.collision,
            r.energy_j,
            r.digest
        );
    }
    s
}

pub fn aggregate_csv(aggs: &[AggregateRow]) -> String {
    let mut s = String::from(AGGREGATE_HEADER);
    s.push('\n');
    for a in aggs {
        let _ = writeln!(
            s,
            "{},{:.2},{},{},{:.6},{:.6},{},{},{}",
            a.policy,
            a.speed,
            a.detector,
            a.runs,
            a.coverage_mean,
            a.coverage_var,
            opt6(a.detection_mean),
            opt6(a.detection_var),
            a.collisions
        );
    }
    s
}

/// Table with one row per (detector, speed) and one column per policy.
pub fn detection_table_csv(table: &DetectionTable) -> String {
    let mut s = String::from("detector,speed");
    for p in &table.policies {
        s.push(',');
        s.push_str(p.token());
    }
    s.push('\n');
    for d in &table.detectors {
        for &v in &table.speeds {
            let _ = write!(s, "{d},{v:.2}");
            for &p in &table.policies {
                s.push(',');
                s.push_str(&opt6(table.get(d, v, p)));
            }
            s.push('\n');
        }
    }
    s
}

/// Detections log: `object_id,class,t_first_seen`, in detection order.
pub fn detections_csv(arena: &Arena, ledger: &DetectionLedger) -> String {
    let mut s = String::from("object_id,class,t_first_seen\n");
    for &(id, t) in ledger.detections() {
        let class = arena.object(id).map_or("unknown", |o| o.class.as_str());
        let _ = writeln!(s, "{id},{class},{t:.6}");
    }
    s
}
