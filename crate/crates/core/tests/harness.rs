use std::f64::consts::PI;

use nano_explore::arena::ArenaDoc;
use nano_explore::detection::{DetectorModel, DetectorName};
use nano_explore::harness::{
    aggregate, aggregate_detection, coverage_at_times, replay_trajectory, run_single, run_sweep, RunConfig, SweepSpec,
};
use nano_explore::policies::PolicyKind;
use nano_explore::{Arena, Vec2};

fn room() -> Arena {
    ArenaDoc::default_room().to_arena().unwrap()
}

/// Poses on the 0.5 m standoff line with the wall on the left.
const STANDOFF_STARTS: [(f64, f64, f64); 5] = [
    (1.5, 5.0, 0.0),
    (6.0, 3.5, -PI / 2.0),
    (4.5, 0.5, PI),
    (0.5, 2.0, PI / 2.0),
    (3.0, 5.0, 0.0),
];

#[test]
fn wall_following_stays_on_the_perimeter() {
    for (x, y, h) in STANDOFF_STARTS {
        let cfg = RunConfig::new(room(), PolicyKind::WallFollowing, 0.5).with_start(Vec2::new(x, y), h);
        let r = run_single(&cfg).unwrap();
        assert!(!r.collision.occurred);
        for c in 2..=10 {
            for w in 2..=8 {
                assert!(!r.grid.visited(c, w), "inner cell ({c},{w}) visited from ({x},{y})");
            }
        }
        assert!(r.coverage > 0.2);
    }
}

#[test]
fn faster_detector_with_certain_success_dominates() {
    let ideal = DetectorModel::custom(100.0, 1.0);
    let real = DetectorModel::custom(1.6, 1.0);
    for seed in 0..5 {
        let cfg = RunConfig::new(room(), PolicyKind::PseudoRandom, 0.5).with_seed(seed);
        let a = run_single(&cfg.clone().with_detector(ideal)).unwrap();
        let b = run_single(&cfg.with_detector(real)).unwrap();
        assert_eq!(a.digest, b.digest, "detector must not change the flight");
        assert!(a.detection_rate.unwrap() >= b.detection_rate.unwrap());
    }
}

#[test]
fn certain_detector_finds_everything_it_sweeps() {
    let cfg = RunConfig::new(room(), PolicyKind::Spiral, 0.5).with_detector(DetectorModel::custom(50.0, 1.0));
    let r = run_single(&cfg).unwrap();
    assert_eq!(r.detection_rate, Some(1.0));
    let times: Vec<f64> = r.ledger.detections().iter().map(|d| d.1).collect();
    assert!(times.windows(2).all(|w| w[0] <= w[1]));
    assert!(times.iter().all(|&t| t <= 180.0));
}

fn small_spec(jobs: usize) -> SweepSpec {
    let mut tmpl = RunConfig::new(room(), PolicyKind::PseudoRandom, 0.5);
    tmpl.duration = 30.0;
    SweepSpec {
        policies: PolicyKind::ALL.to_vec(),
        speeds: vec![0.1, 0.5, 1.0],
        detectors: vec![Some(DetectorModel::builtin(DetectorName::Ssd1_0))],
        runs_per_config: 2,
        base_seed: 7,
        template: tmpl,
        jobs,
    }
}

#[test]
fn sweep_is_schedule_independent() {
    let a = run_sweep(&small_spec(1)).unwrap();
    let b = run_sweep(&small_spec(4)).unwrap();
    assert_eq!(a.rows, b.rows);
    assert_eq!(a.rows.len(), 24);
}

#[test]
fn single_run_configs_report_zero_variance() {
    let mut spec = small_spec(1);
    spec.runs_per_config = 1;
    let out = run_sweep(&spec).unwrap();
    assert_eq!(out.rows.len(), 12);
    for a in aggregate(&out.rows) {
        assert_eq!(a.coverage_var, 0.0);
        assert_eq!(a.detection_var, Some(0.0));
    }
}

#[test]
fn detection_table_shape() {
    let mut spec = small_spec(1);
    spec.detectors.push(Some(DetectorModel::builtin(DetectorName::Ssd0_75)));
    spec.runs_per_config = 1;
    let out = run_sweep(&spec).unwrap();
    let table = aggregate_detection(&out.rows, out.total_objects).unwrap();
    assert_eq!(table.cell_count(), 24);
    assert!(table.get("ssd-0.75", 1.0, PolicyKind::Spiral).is_some());
    assert!(table.get("ssd-0.5", 1.0, PolicyKind::Spiral).is_none());
}

#[test]
fn trajectory_log_is_self_sufficient() {
    for kind in PolicyKind::ALL {
        let mut cfg = RunConfig::new(room(), kind, 1.0);
        cfg.keep_trajectory = true;
        let r = run_single(&cfg).unwrap();
        let log = r.trajectory_csv.as_deref().unwrap();
        let (grid, series) = replay_trajectory(log, &cfg.arena, 0.5, 0.02).unwrap();
        assert_eq!(grid.coverage(), r.coverage, "{kind}");
        assert_eq!(series, r.coverage_series);
        let at = coverage_at_times(log, &cfg.arena, 0.5, 0.02, &[0.0, 90.0, 180.0]).unwrap();
        assert_eq!(at[0], 1.0 / 143.0);
        assert!(at[1] <= at[2] && at[2] == r.coverage);
    }
}

#[test]
fn collision_truncated_run_keeps_partial_metrics() {
    // with the trigger and side guard disabled the drone flies into the slab or a wall
    let arena = room()
        .with_obstacle(nano_explore::Aabb::new(Vec2::new(4.0, 1.0), Vec2::new(4.2, 4.5)))
        .unwrap();
    let mut cfg = RunConfig::new(arena, PolicyKind::PseudoRandom, 1.0).with_detector(DetectorModel::custom(10.0, 1.0));
    cfg.policy_cfg.trigger_dist = 0.01;
    cfg.policy_cfg.side_guard = 0.0;
    let r = run_single(&cfg).unwrap();
    assert!(r.collision.occurred);
    assert!(r.collision.time <= 180.0);
    assert!((r.grid.total_dwell() - r.elapsed).abs() < 1e-6);
    assert!(r.ledger.detections().iter().all(|d| d.1 <= r.elapsed));
}

#[test]
fn mission_is_fast() {
    let start = std::time::Instant::now();
    run_single(&RunConfig::new(room(), PolicyKind::Spiral, 1.0)).unwrap();
    // generous bound for unoptimized test builds
    assert!(start.elapsed().as_secs_f64() < 5.0);
}
