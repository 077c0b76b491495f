//! Deterministic 2D simulator and experiment harness for a ToF-driven
//! nano-drone exploring a room while a modeled onboard detector looks for
//! target objects.
//!
//! The geometry layer ([`geom`], [`arena`], [`vehicle`]) is generic over the
//! scalar type. Everything above it works in `f64`; the aliases at the crate
//! root name the `f64` instantiations.

// `!(x > 0.0)` is used on purpose so that NaN is rejected alongside non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod arena;
pub mod cli;
pub mod config;
pub mod detection;
pub mod digest;
pub mod error;
pub mod geom;
pub mod harness;
pub mod metrics;
pub mod policies;
pub mod report;
pub mod sensing;
pub mod vehicle;

pub use error::{Error, Result};
pub use geom::Scalar;

pub type Vec2 = geom::Vec2<f64>;
pub type Aabb = geom::Aabb<f64>;
pub type Arena = arena::Arena<f64>;
pub type TargetObject = arena::TargetObject<f64>;
pub type VehicleState = vehicle::VehicleState<f64>;
pub type Setpoint = vehicle::Setpoint<f64>;
pub type CollisionRecord = vehicle::CollisionRecord<f64>;

pub type Vec2f = geom::Vec2<f32>;
pub type Arenaf = arena::Arena<f32>;
pub type VehicleStatef = vehicle::VehicleState<f32>;
