//! Artifact files for runs and sweeps, and the offline report renderers.
//!
//! Run directory: `trajectory.csv`, `detections.csv`, `heatmap.csv`,
//! `heatmap.pgm`, `summary.json`. `report` adds `coverage_series.csv` and
//! `detection_markers.csv`.
//!
//! Sweep directory: `runs.csv`, `aggregate.csv`, `coverage_table.csv`,
//! `detection_table.csv` (when a detector ran), `heatmaps/<config>.{csv,pgm}`
//! with the mean dwell per configuration, and `series/<config>.csv` with the
//! mean and variance of coverage over time.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use crate::config::Config;
use crate::error::{Error, Result};
use crate::harness::{
    aggregate, aggregate_csv, aggregate_detection, detection_table_csv, detections_csv, group_rows, mean_var,
    coverage_at_times, replay_trajectory, runs_csv, AggregateRow, RunResult, SweepOutcome, SweepRow,
};
use crate::metrics::{export_heatmap, heatmap_pgm, parse_heatmap_csv, OccupancyGrid, HEATMAP_SCALE};
use crate::policies::PolicyKind;
use crate::Arena;

pub const TRAJECTORY_FILE: &str = "trajectory.csv";
pub const DETECTIONS_FILE: &str = "detections.csv";
pub const HEATMAP_STEM: &str = "heatmap";
pub const SUMMARY_FILE: &str = "summary.json";
pub const SERIES_FILE: &str = "coverage_series.csv";
pub const MARKERS_FILE: &str = "detection_markers.csv";
pub const RUNS_FILE: &str = "runs.csv";
pub const AGGREGATE_FILE: &str = "aggregate.csv";
pub const COVERAGE_TABLE_FILE: &str = "coverage_table.csv";
pub const DETECTION_TABLE_FILE: &str = "detection_table.csv";

/// Rounds to `digits` decimals so JSON numbers print in fixed precision.
fn fixed(x: f64, digits: i32) -> f64 {
    let s = 10f64.powi(digits);
    (x * s).round() / s
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

pub fn summary_json(cfg: &Config, result: &RunResult) -> Value {
    let e = &result.energy;
    let c = &result.collision;
    json!({
        "schema_version": crate::config::SCHEMA_VERSION,
        "policy": cfg.policy.kind,
        "cruise_speed": cfg.policy.cruise_speed,
        "detector": cfg.detector.model,
        "seed": result.seed,
        "duration_s": cfg.run.duration,
        "elapsed_s": fixed(result.elapsed, 6),
        "coverage": fixed(result.coverage, 6),
        "visited_cells": result.grid.visited_count(),
        "total_cells": result.grid.total_cells(),
        "detection_rate": result.detection_rate.map(|r| fixed(r, 6)),
        "detected_objects": result.ledger.detected_count(),
        "total_objects": result.total_objects,
        "frames_fired": result.ledger.frames_fired,
        "frames_with_target": result.ledger.frames_with_target,
        "collision": {
            "occurred": c.occurred,
            "t": c.occurred.then(|| fixed(c.time, 6)),
            "x": c.occurred.then(|| fixed(c.position.x, 6)),
            "y": c.occurred.then(|| fixed(c.position.y, 6)),
        },
        "energy_j": {
            "motors": fixed(e.motors, 6),
            "cf": fixed(e.cf, 6),
            "aideck": fixed(e.aideck, 6),
            "multiranger": fixed(e.multiranger, 6),
            "total": fixed(e.total, 6),
            "aideck_share": fixed(e.aideck_share(), 6),
        },
        "digest": format!("{:016x}", result.digest),
        "config": cfg,
    })
}

/// Writes the five run artifacts into `dir`. `result` must have been
/// produced with `keep_trajectory` set.
pub fn write_run_artifacts(dir: &Path, cfg: &Config, arena: &Arena, result: &RunResult) -> Result<Vec<PathBuf>> {
    create_dir(dir)?;
    let traj = result
        .trajectory_csv
        .as_deref()
        .ok_or_else(|| Error::validation("run", "trajectory log was not kept"))?;
    write(&dir.join(TRAJECTORY_FILE), traj.as_bytes())?;
    write(&dir.join(DETECTIONS_FILE), detections_csv(arena, &result.ledger).as_bytes())?;
    export_heatmap(&result.grid, dir, HEATMAP_STEM, cfg.grid.heatmap_saturation)?;
    let mut summary = serde_json::to_string_pretty(&summary_json(cfg, result)).expect("summary serializes");
    summary.push('\n');
    write(&dir.join(SUMMARY_FILE), summary.as_bytes())?;
    Ok([
        TRAJECTORY_FILE,
        DETECTIONS_FILE,
        "heatmap.csv",
        "heatmap.pgm",
        SUMMARY_FILE,
    ]
    .iter()
    .map(|f| dir.join(f))
    .collect())
}

pub fn config_stem(policy: PolicyKind, speed: f64, detector: &str) -> String {
    format!("{}_{speed:.2}_{detector}", policy.token())
}

/// Mean and variance of coverage at each sampled second across runs.
pub fn series_stats(results: &[&RunResult]) -> Vec<(f64, f64, f64)> {
    let len = results.iter().map(|r| r.coverage_series.len()).max().unwrap_or(0);
    (0..len)
        .map(|i| {
            // a run cut short by a collision keeps its final coverage
            let vals: Vec<f64> = results
                .iter()
                .map(|r| r.coverage_series.get(i).map_or(r.coverage, |&(_, c)| c))
                .collect();
            let (m, v) = mean_var(&vals);
            ((i + 1) as f64, m, v)
        })
        .collect()
}

pub fn series_stats_csv(stats: &[(f64, f64, f64)]) -> String {
    let mut s = String::from("t,coverage_mean,coverage_var\n");
    for (t, m, v) in stats {
        let _ = writeln!(s, "{t:.2},{m:.6},{v:.6}");
    }
    s
}

/// Mean coverage with one row per policy and one column per speed.
pub fn coverage_table_csv(aggs: &[AggregateRow]) -> String {
    let mut speeds: Vec<f64> = Vec::new();
    for a in aggs {
        if !speeds.iter().any(|s| (s - a.speed).abs() < 1e-9) {
            speeds.push(a.speed);
        }
    }
    speeds.sort_by(f64::total_cmp);
    let mut detectors: Vec<&str> = Vec::new();
    for a in aggs {
        if !detectors.contains(&a.detector.as_str()) {
            detectors.push(&a.detector);
        }
    }
    let mut s = String::from("detector,policy");
    for v in &speeds {
        let _ = write!(s, ",{v:.2}");
    }
    s.push('\n');
    for d in &detectors {
        for p in PolicyKind::ALL {
            let cells: Vec<Option<f64>> = speeds
                .iter()
                .map(|&v| {
                    aggs.iter()
                        .find(|a| a.policy == p && a.detector == *d && (a.speed - v).abs() < 1e-9)
                        .map(|a| a.coverage_mean)
                })
                .collect();
            if cells.iter().all(Option::is_none) {
                continue;
            }
            let _ = write!(s, "{d},{p}");
            for c in cells {
                match c {
                    Some(c) => {
                        let _ = write!(s, ",{c:.6}");
                    }
                    None => s.push(','),
                }
            }
            s.push('\n');
        }
    }
    s
}

/// Writes the sweep artifacts; returns the aggregate rows.
pub fn write_sweep_artifacts(dir: &Path, outcome: &SweepOutcome, saturation: f64) -> Result<Vec<AggregateRow>> {
    create_dir(dir)?;
    let heat_dir = dir.join("heatmaps");
    let series_dir = dir.join("series");
    create_dir(&heat_dir)?;
    create_dir(&series_dir)?;

    write(&dir.join(RUNS_FILE), runs_csv(&outcome.rows).as_bytes())?;
    let aggs = aggregate(&outcome.rows);
    write(&dir.join(AGGREGATE_FILE), aggregate_csv(&aggs).as_bytes())?;
    write(&dir.join(COVERAGE_TABLE_FILE), coverage_table_csv(&aggs).as_bytes())?;
    if outcome.rows.iter().any(|r| r.detection_rate.is_some()) {
        let table = aggregate_detection(&outcome.rows, outcome.total_objects)?;
        write(&dir.join(DETECTION_TABLE_FILE), detection_table_csv(&table).as_bytes())?;
    }

    for (policy, speed, detector, idx) in group_rows(&outcome.rows) {
        let stem = config_stem(policy, speed, &detector);
        let results: Vec<&RunResult> = idx.iter().map(|&i| &outcome.results[i]).collect();
        let grids: Vec<&OccupancyGrid> = results.iter().map(|r| &r.grid).collect();
        if let Some(mean) = OccupancyGrid::mean_of(&grids) {
            export_heatmap(&mean, &heat_dir, &stem, saturation)?;
        }
        write(
            &series_dir.join(format!("{stem}.csv")),
            series_stats_csv(&series_stats(&results)).as_bytes(),
        )?;
    }
    Ok(aggs)
}

// ---------------------------------------------------------------------------
// Offline reports

pub fn coverage_series_csv(series: &[(f64, f64)]) -> String {
    let mut s = String::from("t,coverage\n");
    for (t, c) in series {
        let _ = writeln!(s, "{t:.2},{c:.6}");
    }
    s
}

/// One detection marker per found object: its id, class, time and the
/// coverage reached at that time.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionMarker {
    pub object_id: u32,
    pub class: String,
    pub t: f64,
    pub coverage: f64,
}

pub fn parse_detections_csv(text: &str, origin: &str) -> Result<Vec<(u32, String, f64)>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim_end() == "object_id,class,t_first_seen" => {}
        _ => return Err(Error::parse(origin, "missing detections header")),
    }
    lines
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            let bad = || Error::parse(format!("{origin}:{}", i + 2), "expected object_id,class,t_first_seen");
            let mut f = l.split(',');
            let id = f.next().and_then(|v| v.trim().parse().ok()).ok_or_else(bad)?;
            let class = f.next().ok_or_else(bad)?.trim().to_string();
            let t = f.next().and_then(|v| v.trim().parse().ok()).ok_or_else(bad)?;
            Ok((id, class, t))
        })
        .collect()
}

pub fn markers_csv(markers: &[DetectionMarker]) -> String {
    let mut s = String::from("object_id,class,t,coverage\n");
    for m in markers {
        let _ = writeln!(s, "{},{},{:.6},{:.6}", m.object_id, m.class, m.t, m.coverage);
    }
    s
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub series: Vec<(f64, f64)>,
    pub markers: Vec<DetectionMarker>,
    pub coverage: f64,
}

/// Rebuilds the coverage series and detection markers of a run directory
/// and writes them next to the run artifacts.
pub fn report_run_dir(dir: &Path) -> Result<RunReport> {
    let summary_path = dir.join(SUMMARY_FILE);
    let summary: Value = serde_json::from_str(&read(&summary_path)?)
        .map_err(|e| Error::parse(summary_path.display().to_string(), e.to_string()))?;
    let cfg: Config = serde_json::from_value(summary.get("config").cloned().unwrap_or(Value::Null))
        .map_err(|e| Error::parse(summary_path.display().to_string(), format!("config: {e}")))?;
    let arena = cfg.load_arena()?;

    let traj_path = dir.join(TRAJECTORY_FILE);
    let traj = read(&traj_path)?;
    let in_traj = |e: Error| Error::parse(traj_path.display().to_string(), e.to_string());
    let (grid, series) = replay_trajectory(&traj, &arena, cfg.grid.cell_size, cfg.run.control_dt).map_err(in_traj)?;

    let det_path = dir.join(DETECTIONS_FILE);
    let mut detections = parse_detections_csv(&read(&det_path)?, &det_path.display().to_string())?;
    detections.sort_by(|a, b| a.2.total_cmp(&b.2));
    let times: Vec<f64> = detections.iter().map(|d| d.2).collect();
    let covs = coverage_at_times(&traj, &arena, cfg.grid.cell_size, cfg.run.control_dt, &times).map_err(in_traj)?;
    let markers: Vec<DetectionMarker> = detections
        .into_iter()
        .zip(covs)
        .map(|((object_id, class, t), coverage)| DetectionMarker {
            object_id,
            class,
            t,
            coverage,
        })
        .collect();

    write(&dir.join(SERIES_FILE), coverage_series_csv(&series).as_bytes())?;
    write(&dir.join(MARKERS_FILE), markers_csv(&markers).as_bytes())?;
    Ok(RunReport {
        series,
        markers,
        coverage: grid.coverage(),
    })
}

pub fn parse_runs_csv(text: &str, origin: &str) -> Result<Vec<SweepRow>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim_end() == crate::harness::RUNS_HEADER => {}
        _ => return Err(Error::parse(origin, "missing runs header")),
    }
    lines
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            let at = format!("{origin}:{}", i + 2);
            let f: Vec<&str> = l.split(',').map(str::trim).collect();
            if f.len() != 10 {
                return Err(Error::parse(at, format!("expected 10 fields, found {}", f.len())));
            }
            let num = |k: usize| -> Result<f64> {
                f[k].parse().map_err(|_| Error::parse(at.clone(), format!("bad number `{}`", f[k])))
            };
            Ok(SweepRow {
                policy: f[0].parse().map_err(|e: Error| Error::parse(at.clone(), e.to_string()))?,
                speed: num(1)?,
                detector: f[2].to_string(),
                run: f[3].parse().map_err(|_| Error::parse(at.clone(), "bad run index"))?,
                seed: f[4].parse().map_err(|_| Error::parse(at.clone(), "bad seed"))?,
                coverage: num(5)?,
                detection_rate: if f[6].is_empty() { None } else { Some(num(6)?) },
                collision: f[7] == "true",
                energy_j: num(8)?,
                digest: u64::from_str_radix(f[9], 16).map_err(|_| Error::parse(at.clone(), "bad digest"))?,
            })
        })
        .collect()
}

/// Re-aggregates a sweep directory's `runs.csv`; writes `report_aggregate.csv`
/// and `report_coverage_table.csv`.
pub fn report_sweep_dir(dir: &Path) -> Result<Vec<AggregateRow>> {
    let path = dir.join(RUNS_FILE);
    let rows = parse_runs_csv(&read(&path)?, &path.display().to_string())?;
    let aggs = aggregate(&rows);
    write(&dir.join("report_aggregate.csv"), aggregate_csv(&aggs).as_bytes())?;
    write(&dir.join("report_coverage_table.csv"), coverage_table_csv(&aggs).as_bytes())?;
    Ok(aggs)
}

/// Re-renders a dwell CSV as a PGM heatmap.
pub fn render_heatmap(input: &Path, output: &Path, saturation: f64) -> Result<()> {
    if !(saturation > 0.0) {
        return Err(Error::validation("--saturation", "must be > 0"));
    }
    let rows = parse_heatmap_csv(&read(input)?, &input.display().to_string())?;
    let ncols = rows.first().map_or(0, Vec::len);
    if ncols == 0 || rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::parse(input.display().to_string(), "empty or ragged dwell matrix"));
    }
    if let Some(parent) = output.parent().filter(|p| !p.as_os_str().is_empty()) {
        create_dir(parent)?;
    }
    write(output, &heatmap_pgm(&rows, saturation, HEATMAP_SCALE))
}

/// Plain-text summary line for a finished run.
pub fn run_summary_line(result: &RunResult) -> String {
    let rate = result
        .detection_rate
        .map_or_else(|| "n/a".to_string(), |r| format!("{:.1}%", r * 100.0));
    format!(
        "coverage {:.1}% ({} / {} cells), detection {rate} ({} / {}), energy {:.1} J, collision {}, digest {:016x}",
        result.coverage * 100.0,
        result.grid.visited_count(),
        result.grid.total_cells(),
        result.ledger.detected_count(),
        result.total_objects,
        result.energy.total,
        if result.collision.occurred { "yes" } else { "no" },
        result.digest
    )
}
