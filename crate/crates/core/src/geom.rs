//! Scalar-generic planar geometry: vectors, axis-aligned boxes, angle wrapping.

use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{Float, FloatConst, FromPrimitive};

/// Floating point scalar the geometry layer is generic over (`f32` or `f64`).
pub trait Scalar: Float + FloatConst + FromPrimitive + Debug + Default + Send + Sync + 'static {
    /// Lossy conversion from an `f64` literal.
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal representable in scalar type")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec2<T> {
    pub x: T,
    pub y: T,
}

impl<T: Scalar> Vec2<T> {
    pub fn new(x: T, y: T) -> Self {
        Self { x, y }
    }

    /// Unit vector pointing along `angle` (counter-clockwise from +x).
    pub fn from_angle(angle: T) -> Self {
        let (s, c) = angle.sin_cos();
        Self { x: c, y: s }
    }

    pub fn dot(self, other: Self) -> T {
        self.x * other.x + self.y * other.y
    }

    pub fn norm(self) -> T {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Self) -> T {
        (self - other).norm()
    }

    /// Angle of the vector, in `(-π, π]`.
    pub fn angle(self) -> T {
        self.y.atan2(self.x)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn cast<U: Scalar>(self) -> Vec2<U> {
        Vec2 {
            x: U::from(self.x).expect("scalar cast"),
            y: U::from(self.y).expect("scalar cast"),
        }
    }
}

impl<T: Scalar> Add for Vec2<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl<T: Scalar> Sub for Vec2<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl<T: Scalar> Mul<T> for Vec2<T> {
    type Output = Self;
    fn mul(self, k: T) -> Self {
        Self::new(self.x * k, self.y * k)
    }
}

impl<T: Scalar> Neg for Vec2<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y)
    }
}

/// Axis-aligned rectangle with `min < max` on both axes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb<T> {
    pub min: Vec2<T>,
    pub max: Vec2<T>,
}

impl<T: Scalar> Aabb<T> {
    pub fn new(min: Vec2<T>, max: Vec2<T>) -> Self {
        Self { min, max }
    }

    /// Strict interior test; points on the boundary are not inside.
    pub fn contains_strict(&self, p: Vec2<T>) -> bool {
        p.x > self.min.x && p.x < self.max.x && p.y > self.min.y && p.y < self.max.y
    }

    /// Closed test; boundary points count as inside.
    pub fn contains_closed(&self, p: Vec2<T>) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    /// Euclidean distance from `p` to the rectangle (zero inside).
    pub fn distance_to(&self, p: Vec2<T>) -> T {
        let zero = T::zero();
        let dx = (self.min.x - p.x).max(zero).max(p.x - self.max.x);
        let dy = (self.min.y - p.y).max(zero).max(p.y - self.max.y);
        dx.hypot(dy)
    }

    /// Entry distance of the ray `origin + t·dir` (t ≥ 0) into the box, if it hits.
    ///
    /// Slab method. Rays starting inside the box report `Some(0)`.
    pub fn ray_entry(&self, origin: Vec2<T>, dir: Vec2<T>) -> Option<T> {
        let mut t_near = T::neg_infinity();
        let mut t_far = T::infinity();
        for (o, d, lo, hi) in [
            (origin.x, dir.x, self.min.x, self.max.x),
            (origin.y, dir.y, self.min.y, self.max.y),
        ] {
            if d == T::zero() {
                if o < lo || o > hi {
                    return None;
                }
                continue;
            }
            let inv = T::one() / d;
            let (a, b) = ((lo - o) * inv, (hi - o) * inv);
            let (a, b) = if a <= b { (a, b) } else { (b, a) };
            t_near = t_near.max(a);
            t_far = t_far.min(b);
            if t_near > t_far {
                return None;
            }
        }
        if t_far < T::zero() {
            return None;
        }
        Some(t_near.max(T::zero()))
    }
}

/// Wraps an angle into `[-π, π)`.
pub fn normalize_angle<T: Scalar>(a: T) -> T {
    let two_pi = T::TAU();
    let wrapped = a - two_pi * ((a + T::PI()) / two_pi).floor();
    // floor rounding can land exactly on +π for inputs just below it
    if wrapped >= T::PI() {
        wrapped - two_pi
    } else {
        wrapped
    }
}
