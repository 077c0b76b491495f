//! Command-line driver. Every flag is sugar for a `--set` override on the
//! config, so a run is fully described by the config file plus overrides.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::config::{keys_help, Config};
use crate::error::{Error, Result};
use crate::harness::{run_single, run_sweep};
use crate::report::{
    render_heatmap, report_run_dir, report_sweep_dir, run_summary_line, write_run_artifacts, write_sweep_artifacts,
    RUNS_FILE, SUMMARY_FILE,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "nano-explore",
    version,
    about = "Simulate ToF-driven nano-drone exploration with a modeled onboard object detector",
    after_help = keys_help()
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fly one mission and write its artifacts.
    Run(RunArgs),
    /// Run every (policy, speed, detector) configuration several times.
    Sweep(SweepArgs),
    /// Rebuild coverage series and tables from a run or sweep directory.
    Report(ReportArgs),
    /// Render a dwell CSV as a PGM heatmap.
    Heatmap(HeatmapArgs),
}

#[derive(Debug, Args)]
pub struct ConfigArgs {
    /// JSON config file (defaults are used for missing keys).
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Override a config key, e.g. `--set policy.trigger_dist=0.8`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub cfg: ConfigArgs,
    /// pseudo-random | wall-following | spiral | rotate-and-measure
    #[arg(long)]
    pub policy: Option<String>,
    /// Cruise speed, m/s.
    #[arg(long)]
    pub speed: Option<f64>,
    /// ssd-1.0 | ssd-0.75 | ssd-0.5 | custom | none
    #[arg(long)]
    pub detector: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Mission length, s.
    #[arg(long)]
    pub duration: Option<f64>,
    /// Output directory.
    #[arg(long, default_value = "out/run")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub cfg: ConfigArgs,
    #[arg(long)]
    pub runs_per_config: Option<u32>,
    /// Base seed for per-run seed derivation.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads.
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Comma-separated policy tokens.
    #[arg(long, value_delimiter = ',')]
    pub policies: Option<Vec<String>>,
    /// Comma-separated speeds, m/s.
    #[arg(long, value_delimiter = ',')]
    pub speeds: Option<Vec<f64>>,
    /// Comma-separated detector tokens (`none` for exploration only).
    #[arg(long, value_delimiter = ',')]
    pub detectors: Option<Vec<String>>,
    /// Mission length, s.
    #[arg(long)]
    pub duration: Option<f64>,
    #[arg(long, default_value = "out/sweep")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Run directory (with summary.json) or sweep directory (with runs.csv).
    #[arg(long)]
    pub input: PathBuf,
}

#[derive(Debug, Args)]
pub struct HeatmapArgs {
    /// Dwell CSV, north row first.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    /// Dwell seconds rendered as white.
    #[arg(long, default_value_t = crate::metrics::HEATMAP_SATURATION)]
    pub saturation: f64,
}

fn json_list<T: serde::Serialize>(v: &[T]) -> String {
    serde_json::to_string(v).expect("list serializes")
}

fn load(cfg: &ConfigArgs, extra: Vec<String>) -> Result<Config> {
    let mut overrides = cfg.overrides.clone();
    overrides.extend(extra);
    Config::load(cfg.config.as_deref(), &overrides)
}

fn cmd_run(args: &RunArgs) -> Result<()> {
    let mut extra = Vec::new();
    if let Some(p) = &args.policy {
        extra.push(format!("policy.kind={}", serde_json::Value::String(p.clone())));
    }
    if let Some(v) = args.speed {
        extra.push(format!("policy.cruise_speed={v}"));
    }
    if let Some(d) = &args.detector {
        extra.push(format!("detector.model={}", serde_json::Value::String(d.clone())));
    }
    if let Some(s) = args.seed {
        extra.push(format!("run.seed={s}"));
    }
    if let Some(d) = args.duration {
        extra.push(format!("run.duration={d}"));
    }
    let cfg = load(&args.cfg, extra)?;
    let mut rc = cfg.run_config()?;
    rc.keep_trajectory = true;
    let result = run_single(&rc)?;
    let files = write_run_artifacts(&args.out, &cfg, &rc.arena, &result)?;
    println!("{} @ {:.2} m/s: {}", rc.policy, rc.policy_cfg.cruise_speed, run_summary_line(&result));
    for f in files {
        println!("wrote {}", f.display());
    }
    Ok(())
}

fn cmd_sweep(args: &SweepArgs) -> Result<()> {
    let mut extra = Vec::new();
    if let Some(n) = args.runs_per_config {
        extra.push(format!("sweep.runs_per_config={n}"));
    }
    if let Some(s) = args.seed {
        extra.push(format!("sweep.base_seed={s}"));
    }
    if let Some(j) = args.jobs {
        extra.push(format!("sweep.jobs={j}"));
    }
    if let Some(p) = &args.policies {
        extra.push(format!("sweep.policies={}", json_list(p)));
    }
    if let Some(v) = &args.speeds {
        extra.push(format!("sweep.speeds={}", json_list(v)));
    }
    if let Some(d) = &args.detectors {
        extra.push(format!("sweep.detectors={}", json_list(d)));
    }
    if let Some(d) = args.duration {
        extra.push(format!("run.duration={d}"));
    }
    let cfg = load(&args.cfg, extra)?;
    let spec = cfg.sweep_spec()?;
    let started = Instant::now();
    let outcome = run_sweep(&spec)?;
    let elapsed = started.elapsed();
    let aggs = write_sweep_artifacts(&args.out, &outcome, cfg.grid.heatmap_saturation)?;
    println!(
        "{} runs in {:.2} s ({} jobs)",
        outcome.rows.len(),
        elapsed.as_secs_f64(),
        spec.jobs
    );
    print_aggregate(&aggs);
    println!("wrote {}", args.out.display());
    Ok(())
}

fn print_aggregate(aggs: &[crate::harness::AggregateRow]) {
    println!(
        "{:<20} {:>5} {:<9} {:>4} {:>9} {:>9} {:>9} {:>9} {:>4}",
        "policy", "speed", "detector", "runs", "cov_mean", "cov_var", "det_mean", "det_var", "coll"
    );
    let opt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| format!("{x:.4}"));
    for a in aggs {
        println!(
            "{:<20} {:>5.2} {:<9} {:>4} {:>9.4} {:>9.4} {:>9} {:>9} {:>4}",
            a.policy.token(),
            a.speed,
            a.detector,
            a.runs,
            a.coverage_mean,
            a.coverage_var,
            opt(a.detection_mean),
            opt(a.detection_var),
            a.collisions
        );
    }
}

fn cmd_report(args: &ReportArgs) -> Result<()> {
    let dir = args.input.as_path();
    if dir.join(SUMMARY_FILE).is_file() {
        let rep = report_run_dir(dir)?;
        println!("coverage {:.1}% after {} s", rep.coverage * 100.0, rep.series.len());
        for m in &rep.markers {
            println!(
                "  object {} ({}) found at {:.3} s, coverage {:.1}%",
                m.object_id,
                m.class,
                m.t,
                m.coverage * 100.0
            );
        }
        Ok(())
    } else if dir.join(RUNS_FILE).is_file() {
        print_aggregate(&report_sweep_dir(dir)?);
        Ok(())
    } else {
        Err(missing_input(dir))
    }
}

fn missing_input(dir: &Path) -> Error {
    Error::parse(
        dir.display().to_string(),
        format!("neither {SUMMARY_FILE} nor {RUNS_FILE} found"),
    )
}

/// Parses `args` (including the program name), runs the command and
/// returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let outcome = match &cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Report(a) => cmd_report(a),
        Command::Heatmap(a) => render_heatmap(&a.input, &a.output, a.saturation),
    };
    match outcome {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_usage() {
                EXIT_USAGE
            } else {
                EXIT_RUNTIME
            }
        }
    }
}
