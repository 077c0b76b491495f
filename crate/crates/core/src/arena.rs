//! Static world model: a rectangular room with axis-aligned obstacles and
//! target objects, plus exact ray casting against it.
//!
//! Frame: origin at the south-west corner, x east, y north, headings
//! counter-clockwise from +x. The room walls are the rectangle boundary.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{Aabb, Scalar, Vec2};

/// Default physical radius of a target object, in meters.
pub const DEFAULT_OBJECT_RADIUS: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectClass {
    Bottle,
    TinCan,
}

impl ObjectClass {
    pub fn as_str(self) -> &'static str {
        match self {
            ObjectClass::Bottle => "bottle",
            ObjectClass::TinCan => "tin_can",
        }
    }
}

impl fmt::Display for ObjectClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ObjectClass {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bottle" => Ok(ObjectClass::Bottle),
            "tin_can" => Ok(ObjectClass::TinCan),
            other => Err(Error::validation(
                "class",
                format!("unknown object class `{other}` (expected bottle | tin_can)"),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetObject<T> {
    pub id: u32,
    pub class: ObjectClass,
    pub position: Vec2<T>,
    pub radius: T,
}

/// Validated, immutable room description.
#[derive(Debug, Clone, PartialEq)]
pub struct Arena<T> {
    width: T,
    height: T,
    obstacles: Vec<Aabb<T>>,
    objects: Vec<TargetObject<T>>,
}

impl<T: Scalar> Arena<T> {
    /// Builds an arena, checking every invariant.
    pub fn new(
        width: T,
        height: T,
        obstacles: Vec<Aabb<T>>,
        objects: Vec<TargetObject<T>>,
    ) -> Result<Self> {
        let zero = T::zero();
        if !(width.is_finite() && width > zero) {
            return Err(Error::validation("width", "must be finite and > 0"));
        }
        if !(height.is_finite() && height > zero) {
            return Err(Error::validation("height", "must be finite and > 0"));
        }
        for (i, b) in obstacles.iter().enumerate() {
            let path = format!("obstacles[{i}]");
            if !(b.min.is_finite() && b.max.is_finite()) {
                return Err(Error::validation(path, "corners must be finite"));
            }
            if !(b.min.x < b.max.x && b.min.y < b.max.y) {
                return Err(Error::validation(path, "min must be < max on both axes"));
            }
            if b.min.x < zero || b.min.y < zero || b.max.x > width || b.max.y > height {
                return Err(Error::validation(path, "rectangle must lie within the room"));
            }
        }
        let mut ids = BTreeSet::new();
        for (i, o) in objects.iter().enumerate() {
            let path = format!("objects[{i}]");
            if !ids.insert(o.id) {
                return Err(Error::validation(
                    format!("{path}.id"),
                    format!("duplicate object id {}", o.id),
                ));
            }
            if !(o.radius.is_finite() && o.radius > zero) {
                return Err(Error::validation(format!("{path}.radius"), "must be > 0"));
            }
            let inside_room = o.position.is_finite()
                && o.position.x > zero
                && o.position.x < width
                && o.position.y > zero
                && o.position.y < height;
            if !inside_room {
                return Err(Error::validation(format!("{path}.pos"), "object lies outside the room"));
            }
            if let Some(k) = obstacles.iter().position(|b| b.contains_closed(o.position)) {
                return Err(Error::validation(
                    format!("{path}.pos"),
                    format!("object lies inside obstacles[{k}]"),
                ));
            }
        }
        Ok(Self {
            width,
            height,
            obstacles,
            objects,
        })
    }

    /// Empty room without obstacles or objects.
    pub fn empty(width: T, height: T) -> Result<Self> {
        Self::new(width, height, Vec::new(), Vec::new())
    }

    pub fn width(&self) -> T {
        self.width
    }

    pub fn height(&self) -> T {
        self.height
    }

    pub fn obstacles(&self) -> &[Aabb<T>] {
        &self.obstacles
    }

    pub fn objects(&self) -> &[TargetObject<T>] {
        &self.objects
    }

    pub fn center(&self) -> Vec2<T> {
        let two = T::lit(2.0);
        Vec2::new(self.width / two, self.height / two)
    }

    pub fn object(&self, id: u32) -> Option<&TargetObject<T>> {
        self.objects.iter().find(|o| o.id == id)
    }

    /// Returns a copy of this arena with one more obstacle.
    pub fn with_obstacle(&self, b: Aabb<T>) -> Result<Self> {
        let mut obstacles = self.obstacles.clone();
        obstacles.push(b);
        Self::new(self.width, self.height, obstacles, self.objects.clone())
    }

    /// True iff `p` is strictly inside the room and strictly outside every obstacle.
    pub fn in_free_space(&self, p: Vec2<T>) -> bool {
        let zero = T::zero();
        p.is_finite()
            && p.x > zero
            && p.x < self.width
            && p.y > zero
            && p.y < self.height
            && !self.obstacles.iter().any(|b| b.contains_closed(p))
    }

    /// Exact distance from `origin` along `heading` to the first wall or obstacle face.
    ///
    /// Always finite, since the room walls enclose the free space.
    pub fn raycast(&self, origin: Vec2<T>, heading: T) -> Result<T> {
        if !self.in_free_space(origin) {
            return Err(Error::InvalidOrigin {
                x: origin.x.to_f64().unwrap_or(f64::NAN),
                y: origin.y.to_f64().unwrap_or(f64::NAN),
            });
        }
        let dir = Vec2::from_angle(heading);
        let zero = T::zero();
        let wall = |o: T, d: T, hi: T| {
            if d > zero {
                (hi - o) / d
            } else if d < zero {
                -o / d
            } else {
                T::infinity()
            }
        };
        let mut best = wall(origin.x, dir.x, self.width).min(wall(origin.y, dir.y, self.height));
        for b in &self.obstacles {
            if let Some(t) = b.ray_entry(origin, dir) {
                best = best.min(t);
            }
        }
        Ok(best)
    }
}

// ---------------------------------------------------------------------------
// Document schema (JSON reference encoding).

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObstacleDoc {
    pub min: [f64; 2],
    pub max: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectDoc {
    pub id: u32,
    pub class: ObjectClass,
    pub pos: [f64; 2],
    #[serde(default = "default_radius")]
    pub radius: f64,
}

fn default_radius() -> f64 {
    DEFAULT_OBJECT_RADIUS
}

/// Serialized arena: `width`, `height`, `obstacles`, `objects`; lengths in meters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArenaDoc {
    pub width: f64,
    pub height: f64,
    #[serde(default)]
    pub obstacles: Vec<ObstacleDoc>,
    #[serde(default)]
    pub objects: Vec<ObjectDoc>,
}

impl ArenaDoc {
    /// The 6.5 m × 5.5 m test room with three bottles and three tin cans:
    /// one of each near the center, the other four near the corners.
    pub fn default_room() -> Self {
        let obj = |id, class, x, y| ObjectDoc {
            id,
            class,
            pos: [x, y],
            radius: DEFAULT_OBJECT_RADIUS,
        };
        Self {
            width: 6.5,
            height: 5.5,
            obstacles: Vec::new(),
            objects: vec![
                obj(1, ObjectClass::Bottle, 2.9, 2.75),
                obj(2, ObjectClass::TinCan, 3.6, 2.75),
                obj(3, ObjectClass::Bottle, 0.8, 0.8),
                obj(4, ObjectClass::TinCan, 5.7, 0.8),
                obj(5, ObjectClass::TinCan, 0.8, 4.7),
                obj(6, ObjectClass::Bottle, 5.7, 4.7),
            ],
        }
    }

    pub fn to_arena<T: Scalar>(&self) -> Result<Arena<T>> {
        let v = |a: [f64; 2]| Vec2::new(T::lit(a[0]), T::lit(a[1]));
        Arena::new(
            T::lit(self.width),
            T::lit(self.height),
            self.obstacles
                .iter()
                .map(|o| Aabb::new(v(o.min), v(o.max)))
                .collect(),
            self.objects
                .iter()
                .map(|o| TargetObject {
                    id: o.id,
                    class: o.class,
                    position: v(o.pos),
                    radius: T::lit(o.radius),
                })
                .collect(),
        )
    }

    pub fn from_arena<T: Scalar>(arena: &Arena<T>) -> Self {
        let f = |x: T| x.to_f64().unwrap_or(f64::NAN);
        let p = |v: Vec2<T>| [f(v.x), f(v.y)];
        Self {
            width: f(arena.width),
            height: f(arena.height),
            obstacles: arena
                .obstacles
                .iter()
                .map(|b| ObstacleDoc {
                    min: p(b.min),
                    max: p(b.max),
                })
                .collect(),
            objects: arena
                .objects
                .iter()
                .map(|o| ObjectDoc {
                    id: o.id,
                    class: o.class,
                    pos: p(o.position),
                    radius: f(o.radius),
                })
                .collect(),
        }
    }
}

/// Parses and validates an arena document.
pub fn load_arena<T: Scalar>(document: &str) -> Result<Arena<T>> {
    let doc: ArenaDoc = serde_json::from_str(document).map_err(|e| {
        Error::validation(
            format!("arena (line {}, column {})", e.line(), e.column()),
            e.to_string(),
        )
    })?;
    doc.to_arena()
}

/// The default room as a JSON document.
pub fn default_arena_document() -> String {
    serde_json::to_string_pretty(&ArenaDoc::default_room()).expect("arena doc serializes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn room() -> Arena<f64> {
        Arena::empty(6.5, 5.5).unwrap()
    }

    fn boxed() -> Arena<f64> {
        room()
            .with_obstacle(Aabb::new(Vec2::new(2.0, 2.0), Vec2::new(3.0, 3.0)))
            .unwrap()
    }

    #[test]
    fn raycast_empty_room() {
        let a = room();
        assert!((a.raycast(Vec2::new(1.0, 2.75), 0.0).unwrap() - 5.5).abs() < 1e-12);
        assert!((a.raycast(Vec2::new(3.25, 2.75), FRAC_PI_2).unwrap() - 2.75).abs() < 1e-12);
        assert!((a.raycast(Vec2::new(1.0, 2.75), PI).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn raycast_hits_obstacle_face() {
        let d = boxed().raycast(Vec2::new(1.0, 2.5), 0.0).unwrap();
        assert!((d - 1.0).abs() < 1e-12);
    }

    #[test]
    fn raycast_rejects_bad_origin() {
        let a = boxed();
        assert!(matches!(
            a.raycast(Vec2::new(2.5, 2.5), 0.0),
            Err(Error::InvalidOrigin { .. })
        ));
        assert!(a.raycast(Vec2::new(-1.0, 2.5), 0.0).is_err());
    }

    #[test]
    fn raycast_works_in_f32() {
        let a: Arena<f32> = Arena::empty(6.5, 5.5).unwrap();
        let d = a.raycast(Vec2::new(1.0, 2.75), 0.0).unwrap();
        assert!((d - 5.5).abs() < 1e-5);
    }

    #[test]
    fn free_space_examples() {
        assert!(room().in_free_space(Vec2::new(3.25, 2.75)));
        assert!(!room().in_free_space(Vec2::new(-0.1, 2.0)));
        assert!(!boxed().in_free_space(Vec2::new(2.5, 2.5)));
        assert!(!boxed().in_free_space(Vec2::new(2.0, 2.5)));
    }

    #[test]
    fn default_document_loads() {
        let a: Arena<f64> = load_arena(&default_arena_document()).unwrap();
        assert_eq!(a.width(), 6.5);
        assert_eq!(a.height(), 5.5);
        assert_eq!(a.objects().len(), 6);
        let bottles = a.objects().iter().filter(|o| o.class == ObjectClass::Bottle).count();
        assert_eq!(bottles, 3);
    }

    #[test]
    fn object_inside_obstacle_is_rejected() {
        let doc = r#"{"width": 6.5, "height": 5.5,
            "obstacles": [{"min": [2, 2], "max": [3, 3]}],
            "objects": [{"id": 1, "class": "bottle", "pos": [2.5, 2.5], "radius": 0.05}]}"#;
        let err = load_arena::<f64>(doc).unwrap_err();
        assert!(err.to_string().contains("objects[0].pos"), "{err}");
    }

    #[test]
    fn zero_objects_is_valid() {
        let a: Arena<f64> = load_arena(r#"{"width": 6.5, "height": 5.5}"#).unwrap();
        assert!(a.objects().is_empty());
    }

    #[test]
    fn schema_violations_are_reported() {
        assert!(load_arena::<f64>(r#"{"width": 6.5}"#).is_err());
        assert!(load_arena::<f64>(r#"{"width": -1, "height": 5.5}"#).is_err());
        let err = load_arena::<f64>(
            r#"{"width": 6.5, "height": 5.5, "obstacles": [{"min": [3, 2], "max": [2, 3]}]}"#,
        )
        .unwrap_err();
        assert!(err.to_string().starts_with("obstacles[0]"), "{err}");
        let err = load_arena::<f64>(
            r#"{"width": 6.5, "height": 5.5, "objects": [
                {"id": 1, "class": "bottle", "pos": [1, 1]},
                {"id": 1, "class": "tin_can", "pos": [2, 1]}]}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("objects[1].id"), "{err}");
        assert!(load_arena::<f64>(
            r#"{"width": 6.5, "height": 5.5, "objects": [{"id": 1, "class": "mug", "pos": [1, 1]}]}"#
        )
        .is_err());
    }

    #[test]
    fn document_round_trip() {
        let doc = ArenaDoc::default_room();
        let a: Arena<f64> = doc.to_arena().unwrap();
        assert_eq!(ArenaDoc::from_arena(&a), doc);
    }
}
