//! Unicycle kinematics driven by forward-speed / yaw-rate set-points, and
//! disc collision checks against the arena.

use crate::arena::Arena;
use crate::geom::{normalize_angle, Scalar, Vec2};

/// Default drone body radius (10 cm diameter airframe).
pub const DEFAULT_DRONE_RADIUS: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct VehicleState<T> {
    pub position: Vec2<T>,
    /// Heading in `[-π, π)`.
    pub heading: T,
    /// Last commanded forward speed.
    pub v: T,
    /// Last commanded yaw rate.
    pub omega: T,
    /// Seconds since run start.
    pub t: T,
}

impl<T: Scalar> VehicleState<T> {
    pub fn at(position: Vec2<T>, heading: T) -> Self {
        Self {
            position,
            heading: normalize_angle(heading),
            v: T::zero(),
            omega: T::zero(),
            t: T::zero(),
        }
    }
}

/// Commanded forward speed (m/s) and yaw rate (rad/s).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Setpoint<T> {
    pub v_cmd: T,
    pub omega_cmd: T,
}

impl<T: Scalar> Setpoint<T> {
    pub fn new(v_cmd: T, omega_cmd: T) -> Self {
        Self { v_cmd, omega_cmd }
    }

    pub fn hover() -> Self {
        Self::new(T::zero(), T::zero())
    }

    /// Magnitude-clamps both components.
    pub fn clamped(self, v_max: T, omega_max: T) -> Self {
        Self {
            v_cmd: self.v_cmd.max(-v_max).min(v_max),
            omega_cmd: self.omega_cmd.max(-omega_max).min(omega_max),
        }
    }

    pub fn within(&self, v_max: T, omega_max: T) -> bool {
        self.v_cmd.abs() <= v_max && self.omega_cmd.abs() <= omega_max
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CollisionRecord<T> {
    pub occurred: bool,
    pub time: T,
    pub position: Vec2<T>,
}

impl<T: Scalar> CollisionRecord<T> {
    pub fn none() -> Self {
        Self {
            occurred: false,
            time: T::zero(),
            position: Vec2::new(T::zero(), T::zero()),
        }
    }

    pub fn at(time: T, position: Vec2<T>) -> Self {
        Self {
            occurred: true,
            time,
            position,
        }
    }
}

/// Advances the state by `dt` under a constant set-point.
///
/// Position uses the midpoint heading `heading + ω·dt/2`; set-points apply
/// instantly.
pub fn step<T: Scalar>(state: &VehicleState<T>, sp: Setpoint<T>, dt: T) -> VehicleState<T> {
    debug_assert!(dt > T::zero());
    let half = T::lit(0.5);
    let mid = state.heading + sp.omega_cmd * dt * half;
    VehicleState {
        position: state.position + Vec2::from_angle(mid) * (sp.v_cmd * dt),
        heading: normalize_angle(state.heading + sp.omega_cmd * dt),
        v: sp.v_cmd,
        omega: sp.omega_cmd,
        t: state.t + dt,
    }
}

/// True iff the body disc strictly intersects an obstacle or crosses a wall.
pub fn check_collision<T: Scalar>(arena: &Arena<T>, state: &VehicleState<T>, drone_radius: T) -> bool {
    let p = state.position;
    if !p.is_finite() {
        return true;
    }
    let zero = T::zero();
    if p.x - drone_radius < zero
        || p.y - drone_radius < zero
        || p.x + drone_radius > arena.width()
        || p.y + drone_radius > arena.height()
    {
        return true;
    }
    arena
        .obstacles()
        .iter()
        .any(|b| b.distance_to(p) < drone_radius)
}
