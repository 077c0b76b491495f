//! The four reactive exploration policies, each a finite state machine that
//! maps ToF frames to forward-speed / yaw-rate set-points.
//!
//! Policies see only the ranging frame, the current yaw and the control
//! period. They keep no map; all memory lives in [`PolicyState`].

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::normalize_angle;
use crate::sensing::TofFrame;
use crate::Setpoint;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PolicyKind {
    PseudoRandom,
    WallFollowing,
    Spiral,
    RotateAndMeasure,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 4] = [
        PolicyKind::PseudoRandom,
        PolicyKind::WallFollowing,
        PolicyKind::Spiral,
        PolicyKind::RotateAndMeasure,
    ];

    pub fn token(self) -> &'static str {
        match self {
            PolicyKind::PseudoRandom => "pseudo-random",
            PolicyKind::WallFollowing => "wall-following",
            PolicyKind::Spiral => "spiral",
            PolicyKind::RotateAndMeasure => "rotate-and-measure",
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for PolicyKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        PolicyKind::ALL
            .into_iter()
            .find(|k| k.token() == s)
            .ok_or_else(|| {
                Error::validation(
                    "policy.kind",
                    format!(
                        "unknown policy `{s}` (valid: pseudo-random, wall-following, spiral, rotate-and-measure)"
                    ),
                )
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolicyConfig {
    /// Commanded forward speed while translating.
    pub cruise_speed: f64,
    /// Front range that counts as an obstacle (pseudo-random, rotate-and-measure).
    pub trigger_dist: f64,
    /// Lateral standoff for wall following and the first spiral ring.
    pub wall_standoff: f64,
    pub spiral_step: f64,
    /// Angular spacing of rotate-and-measure samples.
    pub scan_step: f64,
    pub leg_max: f64,
    /// In-place rotation rate and yaw-rate clamp.
    pub turn_rate: f64,
    /// Proportional gain on lateral standoff error, rad/s per meter.
    pub wall_gain: f64,
    /// Damping ratio of the lateral tracking loop (0 disables the rate term).
    pub wall_damping: f64,
    pub follow_side: Side,
    /// Extra margin over the standoff at which a front wall starts a corner turn.
    pub corner_margin: f64,
    /// Side range under which a translating drone treats the side as blocked.
    pub side_guard: f64,
    /// Random turn offset is drawn uniformly from `[turn_min, turn_max)`.
    pub turn_min: f64,
    pub turn_max: f64,
    /// Heading error below which a turn is complete.
    pub heading_tolerance: f64,
    /// Largest ring offset the spiral may use; set from the room size.
    pub spiral_max_offset: f64,
}

impl Default for PolicyConfig {
    fn default() -> Self {
        Self {
            cruise_speed: 0.5,
            trigger_dist: 1.0,
            wall_standoff: 0.5,
            spiral_step: 0.5,
            scan_step: PI / 4.0,
            leg_max: 2.0,
            turn_rate: 1.5,
            wall_gain: 1.5,
            wall_damping: 1.0,
            follow_side: Side::Left,
            corner_margin: 0.1,
            side_guard: 0.15,
            turn_min: FRAC_PI_2,
            turn_max: 3.0 * FRAC_PI_2,
            heading_tolerance: 0.05,
            // 5.5 m room: half the short side minus the body radius
            spiral_max_offset: 2.7,
        }
    }
}

impl PolicyConfig {
    pub fn validate(&self, tof_max_range: f64) -> Result<()> {
        let positive = [
            ("policy.cruise_speed", self.cruise_speed),
            ("policy.trigger_dist", self.trigger_dist),
            ("policy.wall_standoff", self.wall_standoff),
            ("policy.spiral_step", self.spiral_step),
            ("policy.scan_step", self.scan_step),
            ("policy.leg_max", self.leg_max),
            ("policy.turn_rate", self.turn_rate),
            ("policy.wall_gain", self.wall_gain),
            ("policy.heading_tolerance", self.heading_tolerance),
        ];
        for (path, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::validation(path, format!("must be > 0 (got {v})")));
            }
        }
        if !(self.wall_damping >= 0.0) {
            return Err(Error::validation("policy.wall_damping", "must be >= 0"));
        }
        if !(self.corner_margin >= 0.0) {
            return Err(Error::validation("policy.corner_margin", "must be >= 0"));
        }
        if !(self.side_guard >= 0.0) {
            return Err(Error::validation("policy.side_guard", "must be >= 0"));
        }
        if self.trigger_dist > tof_max_range {
            return Err(Error::validation(
                "policy.trigger_dist",
                format!("must not exceed tof.max_range ({tof_max_range})"),
            ));
        }
        if !(self.turn_min >= 0.0 && self.turn_min < self.turn_max && self.turn_max <= 2.0 * PI) {
            return Err(Error::validation(
                "policy.turn_min",
                "need 0 <= turn_min < turn_max <= 2π",
            ));
        }
        if !(self.scan_step <= PI) {
            return Err(Error::validation("policy.scan_step", "must be <= π"));
        }
        Ok(())
    }

    /// Number of samples taken per rotate-and-measure scan.
    pub fn scan_samples(&self) -> usize {
        ((2.0 * PI / self.scan_step).round() as usize).max(1)
    }

    /// Rate gain that gives the configured damping ratio at cruise speed.
    fn wall_rate_gain(&self) -> f64 {
        // lateral error obeys ë = -v·(K·e + D·ė), so ζ = D·√v / (2√K)
        2.0 * self.wall_damping * (self.wall_gain / self.cruise_speed).sqrt()
    }
}

/// What a policy observes each control tick.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    pub tof: TofFrame,
    /// Current yaw from the flight controller's state estimate.
    pub heading: f64,
    /// Control period, used for odometry.
    pub dt: f64,
}

// ---------------------------------------------------------------------------
// State

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CruiseMode {
    Cruise,
    Turning,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PseudoRandomState {
    pub mode: CruiseMode,
    pub target_heading: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PerimeterMode {
    /// Flying straight to acquire a first wall.
    Seek,
    Follow,
    CornerTurn,
}

/// Lateral tracking state shared by wall following and the spiral.
#[derive(Debug, Clone, PartialEq)]
pub struct PerimeterTracker {
    pub mode: PerimeterMode,
    pub side: Side,
    pub target_heading: f64,
    /// Last distinct side reading `(frame time, range)` and its rate of change.
    last_side: Option<(f64, f64)>,
    side_rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WallFollowingState {
    pub tracker: PerimeterTracker,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpiralDirection {
    In,
    Out,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpiralState {
    pub tracker: PerimeterTracker,
    pub ring_offset: f64,
    pub direction: SpiralDirection,
    /// Corner turns completed in the current lap.
    pub corners: u32,
    pub laps: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScanMode {
    Scan,
    Travel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RotateMeasureState {
    pub mode: ScanMode,
    pub scan_index: usize,
    pub scan_table: Vec<f64>,
    pub scan_start: f64,
    /// Unwrapped rotation since the scan started.
    pub rotated: f64,
    last_heading: f64,
    pub leg_heading: f64,
    pub leg_length: f64,
    pub leg_travelled: f64,
    /// Travel phase has finished turning onto `leg_heading`.
    pub aligned: bool,
    /// Completed scan phases.
    pub scans: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PolicyState {
    PseudoRandom(PseudoRandomState),
    WallFollowing(WallFollowingState),
    Spiral(SpiralState),
    RotateMeasure(RotateMeasureState),
}

impl PolicyState {
    pub fn new(kind: PolicyKind, cfg: &PolicyConfig) -> Self {
        let tracker = || PerimeterTracker::new(cfg.follow_side);
        match kind {
            PolicyKind::PseudoRandom => PolicyState::PseudoRandom(PseudoRandomState {
                mode: CruiseMode::Cruise,
                target_heading: 0.0,
            }),
            PolicyKind::WallFollowing => PolicyState::WallFollowing(WallFollowingState {
                tracker: tracker(),
            }),
            PolicyKind::Spiral => PolicyState::Spiral(SpiralState {
                tracker: tracker(),
                ring_offset: cfg.wall_standoff,
                direction: SpiralDirection::In,
                corners: 0,
                laps: 0,
            }),
            PolicyKind::RotateAndMeasure => PolicyState::RotateMeasure(RotateMeasureState {
                mode: ScanMode::Scan,
                scan_index: 0,
                scan_table: vec![0.0; cfg.scan_samples()],
                scan_start: f64::NAN,
                rotated: 0.0,
                last_heading: f64::NAN,
                leg_heading: 0.0,
                leg_length: 0.0,
                leg_travelled: 0.0,
                aligned: false,
                scans: 0,
            }),
        }
    }

    pub fn kind(&self) -> PolicyKind {
        match self {
            PolicyState::PseudoRandom(_) => PolicyKind::PseudoRandom,
            PolicyState::WallFollowing(_) => PolicyKind::WallFollowing,
            PolicyState::Spiral(_) => PolicyKind::Spiral,
            PolicyState::RotateMeasure(_) => PolicyKind::RotateAndMeasure,
        }
    }
}

fn rotate_toward(heading: f64, target: f64, cfg: &PolicyConfig) -> Setpoint {
    let err = normalize_angle(target - heading);
    Setpoint::new(0.0, cfg.turn_rate.copysign(err))
}

fn aligned(heading: f64, target: f64, cfg: &PolicyConfig) -> bool {
    normalize_angle(target - heading).abs() < cfg.heading_tolerance
}

fn finish(sp: Setpoint, cfg: &PolicyConfig) -> Setpoint {
    sp.clamped(cfg.cruise_speed, cfg.turn_rate)
}

// ---------------------------------------------------------------------------
// A) pseudo-random

/// Turn offset for a uniform draw `u ∈ [0, 1)`.
pub fn random_turn_offset(u: f64, cfg: &PolicyConfig) -> f64 {
    cfg.turn_min + u * (cfg.turn_max - cfg.turn_min)
}

/// Straight flight until the front range drops to `trigger_dist`, then an
/// in-place turn by a random offset of at least 90°.
pub fn pseudo_random_step<R: Rng + ?Sized>(
    ps: &PseudoRandomState,
    obs: &Observation,
    cfg: &PolicyConfig,
    rng: &mut R,
) -> (PseudoRandomState, Setpoint) {
    let mut next = ps.clone();
    if next.mode == CruiseMode::Turning {
        if aligned(obs.heading, next.target_heading, cfg) {
            next.mode = CruiseMode::Cruise;
        } else {
            let sp = rotate_toward(obs.heading, next.target_heading, cfg);
            return (next, finish(sp, cfg));
        }
    }
    let tof = &obs.tof;
    let blocked = tof.front <= cfg.trigger_dist || tof.left.min(tof.right) <= cfg.side_guard;
    if !blocked {
        return (next, finish(Setpoint::new(cfg.cruise_speed, 0.0), cfg));
    }
    let u: f64 = rng.random();
    next.target_heading = normalize_angle(obs.heading + random_turn_offset(u, cfg));
    next.mode = CruiseMode::Turning;
    let sp = rotate_toward(obs.heading, next.target_heading, cfg);
    (next, finish(sp, cfg))
}

// ---------------------------------------------------------------------------
// B) wall following, C) spiral

impl PerimeterTracker {
    pub fn new(side: Side) -> Self {
        Self {
            mode: PerimeterMode::Seek,
            side,
            target_heading: 0.0,
            last_side: None,
            side_rate: 0.0,
        }
    }

    /// A tracker already locked onto a wall on `side`.
    pub fn following(side: Side) -> Self {
        Self {
            mode: PerimeterMode::Follow,
            ..Self::new(side)
        }
    }

    fn side_reading(&self, tof: &TofFrame) -> f64 {
        match self.side {
            Side::Left => tof.left,
            Side::Right => tof.right,
        }
    }

    fn reset_rate(&mut self) {
        self.last_side = None;
        self.side_rate = 0.0;
    }

    fn update_rate(&mut self, tof: &TofFrame) {
        let reading = self.side_reading(tof);
        match self.last_side {
            Some((t, r)) if tof.t > t => {
                self.side_rate = (reading - r) / (tof.t - t);
                self.last_side = Some((tof.t, reading));
            }
            Some(_) => {}
            None => {
                self.side_rate = 0.0;
                self.last_side = Some((tof.t, reading));
            }
        }
    }

    fn start_corner(&mut self, heading: f64, tof: &TofFrame) {
        // turn toward the more open side; ties turn away from the followed wall
        let turn = if tof.left > tof.right {
            FRAC_PI_2
        } else if tof.right > tof.left {
            -FRAC_PI_2
        } else {
            match self.side {
                Side::Left => -FRAC_PI_2,
                Side::Right => FRAC_PI_2,
            }
        };
        self.target_heading = normalize_angle(heading + turn);
        self.mode = PerimeterMode::CornerTurn;
        self.reset_rate();
    }

    /// One tick of the standoff-tracking law. Returns the set-point and
    /// whether a corner turn started on this tick from `Follow`.
    fn step(&mut self, obs: &Observation, standoff: f64, cfg: &PolicyConfig) -> (Setpoint, bool) {
        let tof = &obs.tof;
        let corner_at = standoff + cfg.corner_margin;
        match self.mode {
            PerimeterMode::Seek => {
                if self.side_reading(tof) <= standoff + 0.25 {
                    self.mode = PerimeterMode::Follow;
                    self.reset_rate();
                } else if tof.front <= corner_at {
                    self.start_corner(obs.heading, tof);
                    let sp = rotate_toward(obs.heading, self.target_heading, cfg);
                    return (finish(sp, cfg), false);
                } else {
                    return (finish(Setpoint::new(cfg.cruise_speed, 0.0), cfg), false);
                }
            }
            PerimeterMode::CornerTurn => {
                if aligned(obs.heading, self.target_heading, cfg) {
                    self.mode = PerimeterMode::Follow;
                    self.reset_rate();
                } else {
                    let sp = rotate_toward(obs.heading, self.target_heading, cfg);
                    return (finish(sp, cfg), false);
                }
            }
            PerimeterMode::Follow => {}
        }

        if tof.front <= corner_at {
            self.start_corner(obs.heading, tof);
            let sp = rotate_toward(obs.heading, self.target_heading, cfg);
            return (finish(sp, cfg), true);
        }
        self.update_rate(tof);
        let err = self.side_reading(tof) - standoff;
        let raw = cfg.wall_gain * err + cfg.wall_rate_gain() * self.side_rate;
        let omega = match self.side {
            Side::Left => raw,
            Side::Right => -raw,
        };
        (finish(Setpoint::new(cfg.cruise_speed, omega), cfg), false)
    }
}

/// Perimeter traversal at a constant lateral standoff.
pub fn wall_following_step(
    ps: &WallFollowingState,
    obs: &Observation,
    cfg: &PolicyConfig,
) -> (WallFollowingState, Setpoint) {
    let mut next = ps.clone();
    let (sp, _) = next.tracker.step(obs, cfg.wall_standoff, cfg);
    (next, sp)
}

/// Concentric perimeter laps; the standoff changes by `spiral_step` after
/// every four corner turns and reverses at the center and at the walls.
pub fn spiral_step(ps: &SpiralState, obs: &Observation, cfg: &PolicyConfig) -> (SpiralState, Setpoint) {
    let mut next = ps.clone();
    let (sp, cornered) = next.tracker.step(obs, next.ring_offset, cfg);
    if cornered {
        next.corners += 1;
        if next.corners >= 4 {
            next.corners = 0;
            next.laps += 1;
            next.complete_lap(cfg);
        }
    }
    (next, sp)
}

impl SpiralState {
    /// Ring update at the end of a lap. Reversals keep the ring for one more
    /// lap so each in/out cycle is palindromic.
    pub fn complete_lap(&mut self, cfg: &PolicyConfig) {
        const EPS: f64 = 1e-9;
        match self.direction {
            SpiralDirection::In => {
                if self.ring_offset + cfg.spiral_step > cfg.spiral_max_offset + EPS {
                    self.direction = SpiralDirection::Out;
                } else {
                    self.ring_offset += cfg.spiral_step;
                }
            }
            SpiralDirection::Out => {
                if self.ring_offset <= cfg.wall_standoff + EPS {
                    self.ring_offset = cfg.wall_standoff;
                    self.direction = SpiralDirection::In;
                } else {
                    self.ring_offset = (self.ring_offset - cfg.spiral_step).max(cfg.wall_standoff);
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// D) rotate-and-measure

/// Index of the largest entry; ties resolve to the lowest index.
pub fn argmax_lowest(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Leg length for a recorded free range.
pub fn leg_length(recorded: f64, cfg: &PolicyConfig) -> f64 {
    cfg.leg_max.min(recorded - cfg.wall_standoff).max(0.0)
}

impl RotateMeasureState {
    fn begin_scan(&mut self, heading: f64) {
        self.mode = ScanMode::Scan;
        self.scan_index = 0;
        self.scan_table.iter_mut().for_each(|v| *v = 0.0);
        self.scan_start = heading;
        self.last_heading = heading;
        self.rotated = 0.0;
    }

    /// Chooses the leg from a full scan table and enters `Travel`.
    pub fn plan_leg(&mut self, cfg: &PolicyConfig) {
        let best = argmax_lowest(&self.scan_table);
        self.leg_heading = normalize_angle(self.scan_start + cfg.scan_step * best as f64);
        self.leg_length = leg_length(self.scan_table[best], cfg);
        self.leg_travelled = 0.0;
        self.aligned = false;
        self.mode = ScanMode::Travel;
        self.scans += 1;
    }
}

/// In-place spin sampling the front range every `scan_step`, then a straight
/// leg toward the freest direction capped at `leg_max`.
pub fn rotate_measure_step(
    ps: &RotateMeasureState,
    obs: &Observation,
    cfg: &PolicyConfig,
) -> (RotateMeasureState, Setpoint) {
    let mut next = ps.clone();
    if next.scan_start.is_nan() {
        next.begin_scan(obs.heading);
    }
    if next.mode == ScanMode::Travel {
        if !next.aligned {
            if aligned(obs.heading, next.leg_heading, cfg) {
                next.aligned = true;
            } else {
                let sp = rotate_toward(obs.heading, next.leg_heading, cfg);
                return (next, finish(sp, cfg));
            }
        }
        let tof = &obs.tof;
        let done = next.leg_travelled >= next.leg_length
            || tof.front <= cfg.trigger_dist
            || tof.left.min(tof.right) <= cfg.side_guard;
        if !done {
            let hold = normalize_angle(next.leg_heading - obs.heading) / obs.dt;
            next.leg_travelled = (next.leg_travelled + cfg.cruise_speed * obs.dt).min(cfg.leg_max);
            return (next, finish(Setpoint::new(cfg.cruise_speed, hold), cfg));
        }
        next.begin_scan(obs.heading);
    }

    // Scan
    next.rotated += normalize_angle(obs.heading - next.last_heading);
    next.last_heading = obs.heading;
    let n = next.scan_table.len();
    while next.scan_index < n && next.rotated + 1e-9 >= cfg.scan_step * next.scan_index as f64 {
        next.scan_table[next.scan_index] = obs.tof.front;
        next.scan_index += 1;
    }
    if next.scan_index >= n {
        next.plan_leg(cfg);
        return rotate_measure_step(&next, obs, cfg);
    }
    (next, finish(Setpoint::new(0.0, cfg.turn_rate), cfg))
}

/// Dispatches to the step function of the state's variant.
///
/// # Panics
/// If `kind` does not match the variant of `ps`.
pub fn policy_step<R: Rng + ?Sized>(
    kind: PolicyKind,
    ps: &PolicyState,
    obs: &Observation,
    cfg: &PolicyConfig,
    rng: &mut R,
) -> (PolicyState, Setpoint) {
    match (kind, ps) {
        (PolicyKind::PseudoRandom, PolicyState::PseudoRandom(s)) => {
            let (s, sp) = pseudo_random_step(s, obs, cfg, rng);
            (PolicyState::PseudoRandom(s), sp)
        }
        (PolicyKind::WallFollowing, PolicyState::WallFollowing(s)) => {
            let (s, sp) = wall_following_step(s, obs, cfg);
            (PolicyState::WallFollowing(s), sp)
        }
        (PolicyKind::Spiral, PolicyState::Spiral(s)) => {
            let (s, sp) = spiral_step(s, obs, cfg);
            (PolicyState::Spiral(s), sp)
        }
        (PolicyKind::RotateAndMeasure, PolicyState::RotateMeasure(s)) => {
            let (s, sp) = rotate_measure_step(s, obs, cfg);
            (PolicyState::RotateMeasure(s), sp)
        }
        (kind, ps) => panic!("policy kind {kind} does not match state variant {}", ps.kind()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn frame(front: f64, left: f64, right: f64) -> TofFrame {
        TofFrame {
            front,
            left,
            right,
            back: 4.0,
            t: 0.0,
        }
    }

    fn obs(front: f64, left: f64, right: f64, heading: f64) -> Observation {
        Observation {
            tof: frame(front, left, right),
            heading,
            dt: 0.02,
        }
    }

    #[test]
    fn pseudo_random_cruises_when_clear() {
        let cfg = PolicyConfig::default();
        let ps = PseudoRandomState {
            mode: CruiseMode::Cruise,
            target_heading: 0.0,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (next, sp) = pseudo_random_step(&ps, &obs(1.5, 2.0, 2.0, 0.3), &cfg, &mut rng);
        assert_eq!(next.mode, CruiseMode::Cruise);
        assert_eq!(sp, Setpoint::new(0.5, 0.0));
    }

    struct ConstRng(u64);

    impl rand::RngCore for ConstRng {
        fn next_u32(&mut self) -> u32 {
            (self.0 >> 32) as u32
        }
        fn next_u64(&mut self) -> u64 {
            self.0
        }
        fn fill_bytes(&mut self, dst: &mut [u8]) {
            dst.fill(0);
        }
    }

    #[test]
    fn pseudo_random_midpoint_draw_turns_half_circle() {
        let cfg = PolicyConfig::default();
        assert!((random_turn_offset(0.5, &cfg) - PI).abs() < 1e-15);
        // a constant 2^63 word maps to u = 0.5 under rand's f64 sampling
        let mut rng = ConstRng(1 << 63);
        let ps = PseudoRandomState {
            mode: CruiseMode::Cruise,
            target_heading: 0.0,
        };
        let (next, sp) = pseudo_random_step(&ps, &obs(0.8, 2.0, 2.0, 0.0), &cfg, &mut rng);
        assert_eq!(next.mode, CruiseMode::Turning);
        assert!((next.target_heading.abs() - PI).abs() < 1e-12);
        assert_eq!(sp.v_cmd, 0.0);
        assert_eq!(sp.omega_cmd.abs(), cfg.turn_rate);
    }

    #[test]
    fn pseudo_random_exits_turn_when_aligned() {
        let cfg = PolicyConfig::default();
        let ps = PseudoRandomState {
            mode: CruiseMode::Turning,
            target_heading: 1.0,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (next, sp) = pseudo_random_step(&ps, &obs(3.0, 2.0, 2.0, 1.01), &cfg, &mut rng);
        assert_eq!(next.mode, CruiseMode::Cruise);
        assert_eq!(sp, Setpoint::new(0.5, 0.0));
    }

    #[test]
    fn pseudo_random_side_guard_triggers_turn() {
        let cfg = PolicyConfig::default();
        let ps = PseudoRandomState {
            mode: CruiseMode::Cruise,
            target_heading: 0.0,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (next, _) = pseudo_random_step(&ps, &obs(3.0, 0.1, 2.0, 0.0), &cfg, &mut rng);
        assert_eq!(next.mode, CruiseMode::Turning);
    }

    fn following(side: Side) -> WallFollowingState {
        WallFollowingState {
            tracker: PerimeterTracker::following(side),
        }
    }

    #[test]
    fn wall_following_proportional_law() {
        let cfg = PolicyConfig::default();
        let (_, sp) = wall_following_step(&following(Side::Left), &obs(3.0, 0.7, 3.0, 0.0), &cfg);
        assert!((sp.omega_cmd - 0.3).abs() < 1e-12);
        assert_eq!(sp.v_cmd, 0.5);
        let (_, sp) = wall_following_step(&following(Side::Left), &obs(3.0, 0.5, 3.0, 0.0), &cfg);
        assert_eq!(sp.omega_cmd, 0.0);
        let (_, sp) = wall_following_step(&following(Side::Right), &obs(3.0, 3.0, 0.7, 0.0), &cfg);
        assert!((sp.omega_cmd + 0.3).abs() < 1e-12);
    }

    #[test]
    fn wall_following_corner_turns_toward_open_side() {
        let cfg = PolicyConfig::default();
        let (next, sp) = wall_following_step(&following(Side::Left), &obs(0.55, 0.5, 3.2, 0.0), &cfg);
        assert_eq!(next.tracker.mode, PerimeterMode::CornerTurn);
        assert!((next.tracker.target_heading + FRAC_PI_2).abs() < 1e-12);
        assert_eq!(sp, Setpoint::new(0.0, -cfg.turn_rate));
    }

    #[test]
    fn wall_following_seeks_then_follows() {
        let cfg = PolicyConfig::default();
        let ps = WallFollowingState {
            tracker: PerimeterTracker::new(Side::Left),
        };
        let (ps, sp) = wall_following_step(&ps, &obs(3.0, 2.75, 2.75, 0.0), &cfg);
        assert_eq!(ps.tracker.mode, PerimeterMode::Seek);
        assert_eq!(sp, Setpoint::new(0.5, 0.0));
        // tie at the first wall turns away from the followed side
        let (ps, _) = wall_following_step(&ps, &obs(0.58, 2.75, 2.75, 0.0), &cfg);
        assert_eq!(ps.tracker.mode, PerimeterMode::CornerTurn);
        assert!((ps.tracker.target_heading + FRAC_PI_2).abs() < 1e-12);
        let (ps, sp) = wall_following_step(&ps, &obs(2.75, 0.58, 5.0, -FRAC_PI_2 + 0.01), &cfg);
        assert_eq!(ps.tracker.mode, PerimeterMode::Follow);
        assert_eq!(sp.v_cmd, 0.5);
    }

    #[test]
    fn wall_following_rate_term_damps() {
        let cfg = PolicyConfig::default();
        let mut ps = following(Side::Left);
        let mut o = obs(3.0, 0.6, 3.0, 0.0);
        ps = wall_following_step(&ps, &o, &cfg).0;
        // drifting away from the wall at 0.1 m/s adds a positive rate term
        o.tof.t = 0.05;
        o.tof.left = 0.605;
        let (_, sp) = wall_following_step(&ps, &o, &cfg);
        let d = 2.0 * (1.5_f64 / 0.5).sqrt();
        assert!((sp.omega_cmd - (1.5 * 0.105 + d * 0.1)).abs() < 1e-9);
    }

    #[test]
    fn spiral_ring_sequence_is_palindromic() {
        let cfg = PolicyConfig::default();
        let PolicyState::Spiral(mut s) = PolicyState::new(PolicyKind::Spiral, &cfg) else {
            unreachable!()
        };
        assert_eq!(s.ring_offset, 0.5);
        let mut rings = vec![s.ring_offset];
        for _ in 0..13 {
            s.complete_lap(&cfg);
            rings.push(s.ring_offset);
        }
        assert_eq!(
            rings,
            vec![0.5, 1.0, 1.5, 2.0, 2.5, 2.5, 2.0, 1.5, 1.0, 0.5, 0.5, 1.0, 1.5, 2.0]
        );
    }

    #[test]
    fn spiral_peak_in_default_room() {
        let cfg = PolicyConfig::default();
        let PolicyState::Spiral(mut s) = PolicyState::new(PolicyKind::Spiral, &cfg) else {
            unreachable!()
        };
        s.complete_lap(&cfg);
        assert_eq!(s.ring_offset, 1.0);
        let mut peak = s.ring_offset;
        while s.direction == SpiralDirection::In {
            s.complete_lap(&cfg);
            peak = peak.max(s.ring_offset);
        }
        assert_eq!(peak, 2.5);
    }

    #[test]
    fn spiral_counts_four_corners_per_lap() {
        let cfg = PolicyConfig::default();
        let mut s = SpiralState {
            tracker: PerimeterTracker::following(Side::Left),
            ring_offset: 0.5,
            direction: SpiralDirection::In,
            corners: 0,
            laps: 0,
        };
        let mut heading = 0.0;
        for _ in 0..4 {
            s = spiral_step(&s, &obs(0.55, s.ring_offset, 3.0, heading), &cfg).0;
            assert_eq!(s.tracker.mode, PerimeterMode::CornerTurn);
            heading = s.tracker.target_heading;
            s = spiral_step(&s, &obs(3.0, s.ring_offset, 3.0, heading), &cfg).0;
            assert_eq!(s.tracker.mode, PerimeterMode::Follow);
        }
        assert_eq!(s.laps, 1);
        assert_eq!(s.ring_offset, 1.0);
    }

    #[test]
    fn argmax_and_ties() {
        assert_eq!(argmax_lowest(&[0.6, 1.2, 4.0, 2.0, 1.1, 0.9, 3.3, 2.8]), 2);
        assert_eq!(argmax_lowest(&[1.0; 8]), 0);
        assert_eq!(leg_length(4.0, &PolicyConfig::default()), 2.0);
        assert!((leg_length(1.2, &PolicyConfig::default()) - 0.7).abs() < 1e-12);
    }

    #[test]
    fn plan_leg_uses_argmax_heading() {
        let cfg = PolicyConfig::default();
        let PolicyState::RotateMeasure(mut s) = PolicyState::new(PolicyKind::RotateAndMeasure, &cfg) else {
            unreachable!()
        };
        s.scan_start = 0.1;
        s.scan_table = vec![0.6, 1.2, 4.0, 2.0, 1.1, 0.9, 3.3, 2.8];
        s.plan_leg(&cfg);
        assert!((s.leg_heading - (0.1 + FRAC_PI_2)).abs() < 1e-12);
        assert_eq!(s.leg_length, 2.0);
        assert_eq!(s.mode, ScanMode::Travel);
    }

    #[test]
    fn rotate_measure_records_eight_samples_per_scan() {
        let cfg = PolicyConfig::default();
        let mut ps = PolicyState::new(PolicyKind::RotateAndMeasure, &cfg);
        let mut heading: f64 = 0.0;
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut ticks = 0;
        loop {
            // front range grows with the rotation angle so the last sample wins
            let rot = normalize_angle(heading).rem_euclid(2.0 * PI);
            let o = obs(1.0 + rot, 2.0, 2.0, heading);
            let (next, sp) = policy_step(PolicyKind::RotateAndMeasure, &ps, &o, &cfg, &mut rng);
            ps = next;
            heading = normalize_angle(heading + sp.omega_cmd * 0.02);
            ticks += 1;
            if let PolicyState::RotateMeasure(s) = &ps {
                if s.mode == ScanMode::Travel {
                    assert_eq!(s.scan_index, 8);
                    assert_eq!(s.scans, 1);
                    assert!(s.scan_table.iter().all(|&v| v > 0.0));
                    assert_eq!(argmax_lowest(&s.scan_table), 7);
                    break;
                }
            }
            assert!(ticks < 1000);
        }
    }

    #[test]
    fn dispatch_is_total_and_clamped() {
        let cfg = PolicyConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for kind in PolicyKind::ALL {
            let ps = PolicyState::new(kind, &cfg);
            let (next, sp) = policy_step(kind, &ps, &obs(2.0, 1.0, 1.5, 0.4), &cfg, &mut rng);
            assert_eq!(next.kind(), kind);
            assert!(sp.v_cmd.is_finite() && sp.omega_cmd.is_finite());
            assert!(sp.within(cfg.cruise_speed, cfg.turn_rate));
        }
    }

    #[test]
    #[should_panic(expected = "does not match")]
    fn dispatch_mismatch_panics() {
        let cfg = PolicyConfig::default();
        let ps = PolicyState::new(PolicyKind::Spiral, &cfg);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        policy_step(PolicyKind::PseudoRandom, &ps, &obs(2.0, 1.0, 1.0, 0.0), &cfg, &mut rng);
    }

    #[test]
    fn policy_tokens_parse() {
        for k in PolicyKind::ALL {
            assert_eq!(k.token().parse::<PolicyKind>().unwrap(), k);
        }
        let err = "bogus".parse::<PolicyKind>().unwrap_err().to_string();
        assert!(err.contains("rotate-and-measure"));
    }
}
