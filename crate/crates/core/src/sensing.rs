//! Time-of-flight ranging and the camera visibility test.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::geom::normalize_angle;
use crate::{Arena, VehicleState};

/// Floor applied to every ToF reading.
pub const MIN_READING: f64 = 0.001;

/// One single-beam ranging sensor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TofSensor {
    /// Relative to body heading: front 0, left +π/2, right −π/2, back π.
    pub mount_angle: f64,
    pub max_range: f64,
    pub rate: f64,
    pub noise_sigma: f64,
}

/// Shared parameters of the four-beam multi-ranger.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TofConfig {
    pub max_range: f64,
    pub rate: f64,
    pub noise_sigma: f64,
}

impl Default for TofConfig {
    fn default() -> Self {
        Self {
            max_range: 4.0,
            rate: 20.0,
            noise_sigma: 0.0,
        }
    }
}

impl TofConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.max_range > 0.0) {
            return Err(Error::validation("tof.max_range", "must be > 0"));
        }
        if !(self.rate > 0.0) {
            return Err(Error::validation("tof.rate_hz", "must be > 0"));
        }
        if !(self.noise_sigma >= 0.0) {
            return Err(Error::validation("tof.noise_sigma", "must be >= 0"));
        }
        Ok(())
    }

    fn sensor(&self, mount_angle: f64) -> TofSensor {
        TofSensor {
            mount_angle,
            max_range: self.max_range,
            rate: self.rate,
            noise_sigma: self.noise_sigma,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TofFrame {
    pub front: f64,
    pub left: f64,
    pub right: f64,
    pub back: f64,
    /// Time the frame was sampled.
    pub t: f64,
}

impl TofFrame {
    pub fn readings(&self) -> [f64; 4] {
        [self.front, self.left, self.right, self.back]
    }
}

/// Front/left/right/back sensors plus the zero-order-hold register.
#[derive(Debug, Clone)]
pub struct TofBank {
    pub front: TofSensor,
    pub left: TofSensor,
    pub right: TofSensor,
    pub back: TofSensor,
    hold: Option<TofFrame>,
    samples: u64,
}

impl TofBank {
    pub fn new(cfg: &TofConfig) -> Self {
        use std::f64::consts::{FRAC_PI_2, PI};
        Self {
            front: cfg.sensor(0.0),
            left: cfg.sensor(FRAC_PI_2),
            right: cfg.sensor(-FRAC_PI_2),
            back: cfg.sensor(PI),
            hold: None,
            samples: 0,
        }
    }

    pub fn last(&self) -> Option<&TofFrame> {
        self.hold.as_ref()
    }

    /// Returns the current frame, re-sampling only on ToF ticks (`k / rate`).
    /// Between ticks the held frame is returned unchanged.
    pub fn poll<R: Rng + ?Sized>(
        &mut self,
        arena: &Arena,
        state: &VehicleState,
        rng: &mut R,
    ) -> Result<TofFrame> {
        let due = self.samples as f64 / self.front.rate;
        match self.hold {
            Some(frame) if state.t + 1e-9 < due => Ok(frame),
            _ => {
                let frame = sample_tof(arena, state, self, rng)?;
                self.samples = (state.t * self.front.rate + 1e-9).floor() as u64 + 1;
                self.hold = Some(frame);
                Ok(frame)
            }
        }
    }
}

fn read_beam<R: Rng + ?Sized>(
    arena: &Arena,
    state: &VehicleState,
    sensor: &TofSensor,
    rng: &mut R,
) -> Result<f64> {
    let truth = arena
        .raycast(state.position, state.heading + sensor.mount_angle)?
        .min(sensor.max_range);
    let noisy = if sensor.noise_sigma > 0.0 {
        let n = Normal::new(0.0, sensor.noise_sigma).expect("sigma is finite and positive");
        truth + n.sample(rng)
    } else {
        truth
    };
    Ok(noisy.clamp(MIN_READING, sensor.max_range))
}

/// Samples all four beams at the current pose, bypassing the hold register.
pub fn sample_tof<R: Rng + ?Sized>(
    arena: &Arena,
    state: &VehicleState,
    bank: &TofBank,
    rng: &mut R,
) -> Result<TofFrame> {
    Ok(TofFrame {
        front: read_beam(arena, state, &bank.front, rng)?,
        left: read_beam(arena, state, &bank.left, rng)?,
        right: read_beam(arena, state, &bank.right, rng)?,
        back: read_beam(arena, state, &bank.back, rng)?,
        t: state.t,
    })
}

/// Forward-facing detection camera.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraModel {
    /// Horizontal field of view, radians.
    pub fov: f64,
    pub max_detect_range: f64,
    pub mount_angle: f64,
}

impl Default for CameraModel {
    fn default() -> Self {
        Self {
            fov: 1.1,
            max_detect_range: 2.0,
            mount_angle: 0.0,
        }
    }
}

impl CameraModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.fov > 0.0 && self.fov < std::f64::consts::PI) {
            return Err(Error::validation("camera.fov_deg", "must be in (0, 180) degrees"));
        }
        if !(self.max_detect_range > 0.0) {
            return Err(Error::validation("camera.max_range", "must be > 0"));
        }
        Ok(())
    }
}

/// Ids of objects inside the camera cone with a clear line of sight.
pub fn objects_in_fov(arena: &Arena, state: &VehicleState, cam: &CameraModel) -> Vec<u32> {
    let axis = state.heading + cam.mount_angle;
    arena
        .objects()
        .iter()
        .filter(|o| {
            let rel = o.position - state.position;
            let dist = rel.norm();
            if dist > cam.max_detect_range {
                return false;
            }
            let bearing = rel.angle();
            if normalize_angle(bearing - axis).abs() > cam.fov / 2.0 {
                return false;
            }
            match arena.raycast(state.position, bearing) {
                Ok(free) => free > dist - o.radius,
                Err(_) => false,
            }
        })
        .map(|o| o.id)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arena::{ObjectClass, TargetObject};
    use crate::geom::{Aabb, Vec2};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn room() -> Arena {
        Arena::empty(6.5, 5.5).unwrap()
    }

    #[test]
    fn saturates_at_max_range() {
        let bank = TofBank::new(&TofConfig::default());
        let s = VehicleState::at(Vec2::new(1.0, 2.75), 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let f = sample_tof(&room(), &s, &bank, &mut rng).unwrap();
        assert_eq!(f.front, 4.0);
        assert!((f.left - 2.75).abs() < 1e-12);
        assert!((f.right - 2.75).abs() < 1e-12);
        assert!((f.back - 1.0).abs() < 1e-12);
    }

    #[test]
    fn close_wall_reads_exact() {
        let bank = TofBank::new(&TofConfig::default());
        let s = VehicleState::at(Vec2::new(6.0, 2.75), 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let f = sample_tof(&room(), &s, &bank, &mut rng).unwrap();
        assert!((f.front - 0.5).abs() < 1e-12);
    }

    #[test]
    fn noise_statistics() {
        let cfg = TofConfig {
            noise_sigma: 0.02,
            ..TofConfig::default()
        };
        let bank = TofBank::new(&cfg);
        // 2.0 m true range straight ahead
        let s = VehicleState::at(Vec2::new(4.5, 2.75), 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 100_000;
        let xs: Vec<f64> = (0..n)
            .map(|_| read_beam(&room(), &s, &bank.front, &mut rng).unwrap())
            .collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!((mean - 2.0).abs() < 0.001, "mean {mean}");
        assert!((var.sqrt() - 0.02).abs() < 0.002, "std {}", var.sqrt());
    }

    #[test]
    fn zero_order_hold_between_ticks() {
        let mut bank = TofBank::new(&TofConfig::default());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = room();
        let mut s = VehicleState::at(Vec2::new(1.0, 2.75), 0.0);
        let mut refreshed = Vec::new();
        let mut prev: Option<TofFrame> = None;
        for k in 0..50 {
            s.t = k as f64 * 0.02;
            s.position.x = 1.0 + 0.01 * k as f64;
            let f = bank.poll(&a, &s, &mut rng).unwrap();
            if prev != Some(f) {
                refreshed.push(k);
            }
            prev = Some(f);
        }
        // 20 Hz refresh on a 50 Hz tick grid over one second
        assert_eq!(refreshed.len(), 20);
        assert_eq!(&refreshed[..5], &[0, 3, 5, 8, 10]);
    }

    fn with_object(pos: Vec2<f64>) -> Arena {
        Arena::new(
            6.5,
            5.5,
            vec![],
            vec![TargetObject {
                id: 3,
                class: ObjectClass::Bottle,
                position: pos,
                radius: 0.05,
            }],
        )
        .unwrap()
    }

    #[test]
    fn fov_ahead_and_behind() {
        let cam = CameraModel::default();
        let s = VehicleState::at(Vec2::new(3.0, 2.75), 0.0);
        assert_eq!(objects_in_fov(&with_object(Vec2::new(4.0, 2.75)), &s, &cam), vec![3]);
        assert!(objects_in_fov(&with_object(Vec2::new(2.0, 2.75)), &s, &cam).is_empty());
        // beyond detection range
        assert!(objects_in_fov(&with_object(Vec2::new(5.5, 2.75)), &s, &cam).is_empty());
    }

    #[test]
    fn fov_occluded_by_obstacle() {
        let cam = CameraModel::default();
        let a = with_object(Vec2::new(4.0, 2.75))
            .with_obstacle(Aabb::new(Vec2::new(3.4, 2.0), Vec2::new(3.5, 3.5)))
            .unwrap();
        let s = VehicleState::at(Vec2::new(3.0, 2.75), 0.0);
        assert!(objects_in_fov(&a, &s, &cam).is_empty());
    }
}
