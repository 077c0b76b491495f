//! Statistical stand-in for the onboard SSD detector: a fixed inference
//! cadence and an independent per-frame success probability, with
//! first-success latching per object.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Slack for comparing frame instants against the control-tick grid.
const TIME_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DetectorName {
    #[serde(rename = "ssd-1.0")]
    Ssd1_0,
    #[serde(rename = "ssd-0.75")]
    Ssd0_75,
    #[serde(rename = "ssd-0.5")]
    Ssd0_5,
    /// Explicit `{fps, p_detect}` override.
    #[serde(rename = "custom")]
    Custom,
}

impl DetectorName {
    pub const BUILTIN: [DetectorName; 3] = [DetectorName::Ssd1_0, DetectorName::Ssd0_75, DetectorName::Ssd0_5];

    pub fn token(self) -> &'static str {
        match self {
            DetectorName::Ssd1_0 => "ssd-1.0",
            DetectorName::Ssd0_75 => "ssd-0.75",
            DetectorName::Ssd0_5 => "ssd-0.5",
            DetectorName::Custom => "custom",
        }
    }
}

impl fmt::Display for DetectorName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for DetectorName {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        DetectorName::BUILTIN
            .into_iter()
            .find(|d| d.token() == s)
            .ok_or_else(|| {
                Error::validation(
                    "detector.model",
                    format!("unknown detector `{s}` (valid: ssd-1.0, ssd-0.75, ssd-0.5)"),
                )
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorModel {
    pub name: DetectorName,
    /// Inference throughput, frames per second.
    pub fps: f64,
    /// Success probability of one inference frame on one visible object.
    pub p_detect: f64,
    /// Parameter count, millions.
    pub params_m: f64,
    /// Multiply-accumulates per frame, millions.
    pub mmacs: f64,
}

impl DetectorModel {
    /// Onboard throughput and int8 mAP of the three SSD-MobileNetV2 widths.
    pub fn builtin(name: DetectorName) -> Self {
        let (fps, p_detect, params_m, mmacs) = match name {
            DetectorName::Ssd1_0 => (1.6, 0.50, 4.7, 534.0),
            DetectorName::Ssd0_75 => (2.3, 0.48, 2.7, 358.0),
            DetectorName::Ssd0_5 => (4.3, 0.32, 1.2, 193.0),
            DetectorName::Custom => (1.0, 1.0, 0.0, 0.0),
        };
        Self {
            name,
            fps,
            p_detect,
            params_m,
            mmacs,
        }
    }

    pub fn custom(fps: f64, p_detect: f64) -> Self {
        Self {
            name: DetectorName::Custom,
            fps,
            p_detect,
            params_m: 0.0,
            mmacs: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.fps.is_finite() && self.fps > 0.0) {
            return Err(Error::validation("detector.fps", "must be > 0"));
        }
        if !(0.0..=1.0).contains(&self.p_detect) {
            return Err(Error::validation("detector.p_detect", "must be in [0, 1]"));
        }
        Ok(())
    }

    pub fn period(&self) -> f64 {
        1.0 / self.fps
    }

    /// Instant of the `n`-th inference frame (1-based).
    pub fn frame_instant(&self, n: u64) -> f64 {
        n as f64 / self.fps
    }

    /// Number of frames that fire in `[0, duration]`.
    pub fn frames_within(&self, duration: f64) -> u64 {
        (duration * self.fps + TIME_EPS).floor() as u64
    }
}

/// True once a full inference period has elapsed since `last_fire`.
/// The first frame fires at `t = 1/fps` when `last_fire = 0`.
pub fn inference_due(model: &DetectorModel, t: f64, last_fire: f64) -> bool {
    t - last_fire + TIME_EPS >= model.period()
}

/// First-detection times per object plus frame counters for one run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DetectionLedger {
    /// `(object id, time)` in detection order.
    seen: Vec<(u32, f64)>,
    pub frames_fired: u64,
    /// Frames with at least one object in view.
    pub frames_with_target: u64,
}

impl DetectionLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn first_seen(&self, id: u32) -> Option<f64> {
        self.seen.iter().find(|(i, _)| *i == id).map(|&(_, t)| t)
    }

    /// Detections in the order they were recorded.
    pub fn detections(&self) -> &[(u32, f64)] {
        &self.seen
    }

    pub fn detected_count(&self) -> usize {
        self.seen.len()
    }

    pub fn record(&mut self, id: u32, t: f64) -> bool {
        if self.first_seen(id).is_some() {
            return false;
        }
        self.seen.push((id, t));
        true
    }
}

/// Runs one inference frame: each visible, not-yet-found object succeeds
/// independently with probability `p_detect`. Draws happen in ascending id
/// order.
pub fn attempt_detection<R: Rng + ?Sized>(
    model: &DetectorModel,
    visible: &[u32],
    ledger: &mut DetectionLedger,
    t: f64,
    rng: &mut R,
) {
    ledger.frames_fired += 1;
    if !visible.is_empty() {
        ledger.frames_with_target += 1;
    }
    let mut ids = visible.to_vec();
    ids.sort_unstable();
    ids.dedup();
    for id in ids {
        if ledger.first_seen(id).is_some() {
            continue;
        }
        if rng.random::<f64>() < model.p_detect {
            ledger.record(id, t);
        }
    }
}

/// Fraction of placed objects detected at least once.
pub fn detection_rate(ledger: &DetectionLedger, total_objects: usize) -> Result<f64> {
    if total_objects == 0 {
        return Err(Error::NoObjects);
    }
    Ok(ledger.detected_count() as f64 / total_objects as f64)
}
