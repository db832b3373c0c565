use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use rtcd_bench::{emit, run, summary_table, BenchConfig, Mode, RobotSource, SceneSource};

/// Ray-traced collision detection benchmarks.
#[derive(Debug, Parser)]
#[command(name = "rtcd", version)]
struct Args {
    /// Obstacle source, repeatable: builtin:simple|medium|dense or a mesh file.
    /// With none the scene is empty.
    #[arg(long = "scene")]
    scenes: Vec<SceneSource>,
    /// builtin:arm7 or a robot JSON document.
    #[arg(long, default_value = "builtin:arm7")]
    robot: RobotSource,
    #[arg(long, value_enum, default_value = "dcd-two-way")]
    mode: Mode,
    /// Comma-separated batch sizes.
    #[arg(long, value_delimiter = ',', default_value = "1,16,256,4096")]
    batch_sizes: Vec<usize>,
    /// Number of configurations for discrete modes.
    #[arg(long, default_value_t = 4096)]
    poses: usize,
    /// Number of trajectories for continuous and accuracy modes.
    #[arg(long, default_value_t = 100)]
    trajectories: usize,
    /// Comma-separated control point (or pose) counts per trajectory.
    #[arg(long, value_delimiter = ',', default_value = "8")]
    control_points: Vec<usize>,
    /// Waypoints per trajectory given to spline fits.
    #[arg(long, default_value_t = 32)]
    waypoints: usize,
    /// Per-joint bound on trajectory displacement; `inf` samples endpoints independently.
    #[arg(long, default_value_t = 0.8)]
    max_step: f64,
    /// Voxel edge length in meters for accuracy mode.
    #[arg(long, default_value_t = 0.002)]
    resolution: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads (defaults to all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// CSV output path.
    #[arg(long, default_value = "rtcd_results.csv")]
    out: PathBuf,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = Args::parse();
    let cfg = BenchConfig {
        scenes: args.scenes,
        robot: args.robot,
        mode: args.mode,
        batch_sizes: args.batch_sizes,
        poses: args.poses,
        trajectories: args.trajectories,
        control_points: args.control_points,
        waypoints: args.waypoints,
        max_step: args.max_step,
        resolution: args.resolution,
        seed: args.seed,
        threads: args.threads,
    };
    let result = run(&cfg).and_then(|report| {
        emit(&report, &args.out)?;
        Ok(report)
    });
    match result {
        Ok(report) => {
            print!("{}", summary_table(&report));
            println!("wrote {} record(s) to {}", report.records.len(), args.out.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
