//! Benchmark runner behind the `rtcd` binary: builds query sets from a seed, times
//! collision queries over a sweep of batch sizes, and measures swept-volume accuracy.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use anyhow::{bail, ensure, Context, Result};
use serde::Serialize;

use rtcd::assets::{arm7, scene_meshes, SceneKind};
use rtcd::ccd::{build_fit_operator, detect_swept, CurveKind};
use rtcd::dcd::{detect, CollisionScene, DcdOptions, Variant};
use rtcd::kinematics::{
    forward_kinematics_batch, interpolate_cspace, load_robot, sample_halton, sample_trajectory_pairs, sphere_centers,
    Configuration, RobotModel, Sphere,
};
use rtcd::mesh::{load_mesh, TriangleMesh};
use rtcd::volumetry::{
    coverage, fit_bounds, robot_bounds, swept_sphere_grid, swept_truth_converged, voxelize_robot_poses, voxelize_spheres,
    CoverageMetrics, VoxelGrid, DEFAULT_MARGIN,
};

/// Dense pose count the swept ground truth starts from.
pub const TRUTH_POSES: usize = 1024;
/// Pose count at which ground-truth refinement stops.
pub const TRUTH_POSE_CAP: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Mode {
    #[value(name = "dcd-obs2rob")]
    DcdObs2Rob,
    #[value(name = "dcd-rob2obs")]
    DcdRob2Obs,
    #[value(name = "dcd-two-way")]
    DcdTwoWay,
    #[value(name = "ccd-linear")]
    CcdLinear,
    #[value(name = "ccd-quadratic")]
    CcdQuadratic,
    /// Two-way mesh checks at `n` evenly spaced poses per trajectory.
    #[value(name = "ccd-discretized")]
    CcdDiscretized,
    Accuracy,
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Mode::DcdObs2Rob => "dcd-obs2rob",
            Mode::DcdRob2Obs => "dcd-rob2obs",
            Mode::DcdTwoWay => "dcd-two-way",
            Mode::CcdLinear => "ccd-linear",
            Mode::CcdQuadratic => "ccd-quadratic",
            Mode::CcdDiscretized => "ccd-discretized",
            Mode::Accuracy => "accuracy",
        }
    }
}

/// `builtin:simple|medium|dense` or a mesh file (OBJ, binary STL).
#[derive(Debug, Clone, PartialEq)]
pub enum SceneSource {
    Builtin(SceneKind),
    File(PathBuf),
}

impl FromStr for SceneSource {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.strip_prefix("builtin:") {
            Some(name) => SceneSource::Builtin(name.parse()?),
            None => SceneSource::File(PathBuf::from(s)),
        })
    }
}

impl SceneSource {
    fn label(&self) -> String {
        match self {
            SceneSource::Builtin(k) => k.name().to_string(),
            SceneSource::File(p) => p.file_stem().map_or_else(|| p.display().to_string(), |s| s.to_string_lossy().into_owned()),
        }
    }

    fn load(&self) -> Result<Vec<TriangleMesh>> {
        match self {
            SceneSource::Builtin(k) => Ok(scene_meshes(*k)),
            SceneSource::File(p) => Ok(vec![load_mesh(p).with_context(|| format!("loading scene mesh {}", p.display()))?]),
        }
    }
}

/// `builtin:arm7` or a robot model document.
#[derive(Debug, Clone, PartialEq)]
pub enum RobotSource {
    Arm7,
    File(PathBuf),
}

impl FromStr for RobotSource {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.strip_prefix("builtin:") {
            Some("arm7") => Ok(RobotSource::Arm7),
            Some(other) => bail!("unknown built-in robot {other:?} (available: arm7)"),
            None => Ok(RobotSource::File(PathBuf::from(s))),
        }
    }
}

impl RobotSource {
    fn load(&self) -> Result<RobotModel> {
        match self {
            RobotSource::Arm7 => Ok(arm7()),
            RobotSource::File(p) => load_robot(p).with_context(|| format!("loading robot {}", p.display())),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub scenes: Vec<SceneSource>,
    pub robot: RobotSource,
    pub mode: Mode,
    pub batch_sizes: Vec<usize>,
    pub poses: usize,
    pub trajectories: usize,
    pub control_points: Vec<usize>,
    /// Waypoints per trajectory fed to spline fits.
    pub waypoints: usize,
    /// Per-joint bound on trajectory displacement (radians or meters); infinite for
    /// independent start/end samples.
    pub max_step: f64,
    pub resolution: f64,
    pub seed: u64,
    /// Worker threads; `None` uses all cores.
    pub threads: Option<usize>,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            scenes: vec![SceneSource::Builtin(SceneKind::Medium)],
            robot: RobotSource::Arm7,
            mode: Mode::DcdTwoWay,
            batch_sizes: vec![1, 16, 256, 4096],
            poses: 4096,
            trajectories: 100,
            control_points: vec![8],
            waypoints: 32,
            max_step: 0.8,
            resolution: 0.002,
            seed: 0,
            threads: None,
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<()> {
        ensure!(!self.batch_sizes.is_empty(), "at least one batch size is required");
        ensure!(self.batch_sizes.iter().all(|&b| b >= 1), "batch sizes must be at least 1");
        ensure!(self.poses >= 1 && self.trajectories >= 1, "pose and trajectory counts must be at least 1");
        ensure!(!self.control_points.is_empty(), "at least one control point count is required");
        ensure!(self.resolution > 0.0, "resolution must be positive");
        ensure!(self.max_step > 0.0, "max step must be positive");
        ensure!(self.threads != Some(0), "thread count must be at least 1");
        match self.mode {
            Mode::CcdLinear | Mode::CcdDiscretized => {
                ensure!(self.control_points.iter().all(|&n| n >= 2), "{} needs at least 2 points per trajectory", self.mode.name())
            }
            Mode::CcdQuadratic => {
                for &n in &self.control_points {
                    ensure!(
                        (3..=self.waypoints).contains(&n),
                        "ccd-quadratic needs 3 <= control points <= waypoints ({}), got {n}",
                        self.waypoints
                    );
                }
            }
            _ => {}
        }
        Ok(())
    }
}

/// One timed or measured run. Optional fields are empty where they do not apply.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Record {
    pub mode: String,
    pub scene: String,
    pub representation: String,
    pub batch_size: Option<usize>,
    pub control_points: Option<usize>,
    pub queries: usize,
    pub batches: usize,
    pub wall_time_per_batch_s: Option<f64>,
    pub queries_per_s: Option<f64>,
    pub collision_fraction: Option<f64>,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    /// FNV-1a over the per-query results, for comparing runs.
    pub result_digest: String,
    pub seed: u64,
    pub threads: usize,
    pub platform: String,
}

pub const HEADER: [&str; 16] = [
    "mode",
    "scene",
    "representation",
    "batch_size",
    "control_points",
    "queries",
    "batches",
    "wall_time_per_batch_s",
    "queries_per_s",
    "collision_fraction",
    "precision",
    "recall",
    "result_digest",
    "seed",
    "threads",
    "platform",
];

impl Record {
    /// The record with timing fields cleared.
    pub fn without_timing(&self) -> Record {
        Record {
            wall_time_per_batch_s: None,
            queries_per_s: None,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct BenchReport {
    pub records: Vec<Record>,
}

fn fnv1a(bytes: impl IntoIterator<Item = u8>) -> String {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    format!("{h:016x}")
}

fn flags_digest(flags: &[bool]) -> String {
    fnv1a(flags.iter().map(|&f| u8::from(f)))
}

struct Context_ {
    cfg: BenchConfig,
    robot: RobotModel,
    scene: CollisionScene,
    scene_label: String,
    threads: usize,
}

impl Context_ {
    fn record(&self, representation: &str) -> Record {
        Record {
            mode: self.cfg.mode.name().to_string(),
            scene: self.scene_label.clone(),
            representation: representation.to_string(),
            batch_size: None,
            control_points: None,
            queries: 0,
            batches: 0,
            wall_time_per_batch_s: None,
            queries_per_s: None,
            collision_fraction: None,
            precision: None,
            recall: None,
            result_digest: String::new(),
            seed: self.cfg.seed,
            threads: self.threads,
            platform: format!("{}-{}", std::env::consts::OS, std::env::consts::ARCH),
        }
    }
}

/// Runs the configured suite. Scene, robot and precomputation happen before any timed
/// region; each batch-size sweep is preceded by one untimed warm-up batch.
pub fn run(cfg: &BenchConfig) -> Result<BenchReport> {
    cfg.validate()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cfg.threads {
        builder = builder.num_threads(t);
    }
    let pool = builder.build().context("building worker pool")?;
    pool.install(|| run_in_pool(cfg))
}

fn run_in_pool(cfg: &BenchConfig) -> Result<BenchReport> {
    let robot = cfg.robot.load()?;
    let mut meshes = Vec::new();
    for s in &cfg.scenes {
        meshes.extend(s.load()?);
    }
    let scene = if meshes.is_empty() {
        CollisionScene::empty()
    } else {
        CollisionScene::build(meshes).context("building collision scene")?
    };
    let scene_label = if cfg.scenes.is_empty() {
        "empty".to_string()
    } else {
        cfg.scenes.iter().map(SceneSource::label).collect::<Vec<_>>().join("+")
    };
    let ctx = Context_ {
        cfg: cfg.clone(),
        robot,
        scene,
        scene_label,
        threads: rayon::current_num_threads(),
    };
    let records = match cfg.mode {
        Mode::DcdObs2Rob => run_dcd(&ctx, Variant::ObsToRobot)?,
        Mode::DcdRob2Obs => run_dcd(&ctx, Variant::RobotToObs)?,
        Mode::DcdTwoWay => run_dcd(&ctx, Variant::TwoWay)?,
        Mode::CcdLinear => run_ccd(&ctx, CurveKind::PiecewiseLinear)?,
        Mode::CcdQuadratic => run_ccd(&ctx, CurveKind::QuadraticBSpline)?,
        Mode::CcdDiscretized => run_discretized(&ctx)?,
        Mode::Accuracy => run_accuracy(&ctx)?,
    };
    Ok(BenchReport { records })
}

/// Times `query` over consecutive chunks of `items`, after one warm-up call on the
/// first chunk. Returns the concatenated per-item flags and the elapsed seconds.
fn timed_sweep<T>(items: &[T], batch: usize, mut query: impl FnMut(&[T]) -> Result<Vec<bool>>) -> Result<(Vec<bool>, f64)> {
    query(&items[..batch.min(items.len())])?;
    let mut flags = Vec::with_capacity(items.len());
    let start = Instant::now();
    for chunk in items.chunks(batch) {
        flags.extend(query(chunk)?);
    }
    Ok((flags, start.elapsed().as_secs_f64()))
}

fn timing_record(ctx: &Context_, representation: &str, batch: usize, n: Option<usize>, flags: &[bool], secs: f64) -> Record {
    let batches = flags.len().div_ceil(batch);
    Record {
        batch_size: Some(batch),
        control_points: n,
        queries: flags.len(),
        batches,
        wall_time_per_batch_s: Some(secs / batches as f64),
        queries_per_s: Some(if secs > 0.0 { flags.len() as f64 / secs } else { f64::INFINITY }),
        collision_fraction: Some(flags.iter().filter(|&&f| f).count() as f64 / flags.len() as f64),
        result_digest: flags_digest(flags),
        ..ctx.record(representation)
    }
}

fn run_dcd(ctx: &Context_, variant: Variant) -> Result<Vec<Record>> {
    let configs = sample_halton(ctx.cfg.poses, &ctx.robot, ctx.cfg.seed)?;
    let opts = DcdOptions { variant, ..DcdOptions::default() };
    let mut out = Vec::new();
    for &b in &ctx.cfg.batch_sizes {
        let (flags, secs) = timed_sweep(&configs, b, |chunk| Ok(detect(&ctx.scene, &ctx.robot, chunk, opts)?.colliding))?;
        out.push(timing_record(ctx, "mesh", b, None, &flags, secs));
    }
    Ok(out)
}

fn trajectory_pairs(ctx: &Context_) -> Result<Vec<(Configuration, Configuration)>> {
    Ok(sample_trajectory_pairs(ctx.cfg.trajectories, &ctx.robot, ctx.cfg.seed, ctx.cfg.max_step)?)
}

fn run_ccd(ctx: &Context_, kind: CurveKind) -> Result<Vec<Record>> {
    let pairs = trajectory_pairs(ctx)?;
    let label = match kind {
        CurveKind::PiecewiseLinear => "linear",
        CurveKind::QuadraticBSpline => "quadratic",
        CurveKind::CubicBSpline => "cubic",
    };
    let mut out = Vec::new();
    for &n in &ctx.cfg.control_points {
        let m = if kind == CurveKind::PiecewiseLinear { n } else { ctx.cfg.waypoints };
        if kind != CurveKind::PiecewiseLinear {
            build_fit_operator(m, n, kind.degree())?;
        }
        let trajectories: Vec<Vec<Configuration>> =
            pairs.iter().map(|(a, b)| interpolate_cspace(a, b, m)).collect::<rtcd::Result<_>>()?;
        for &b in &ctx.cfg.batch_sizes {
            let (flags, secs) = timed_sweep(&trajectories, b, |chunk| {
                Ok(detect_swept(chunk, &ctx.robot, &ctx.scene, kind, n)?)
            })?;
            out.push(timing_record(ctx, label, b, Some(n), &flags, secs));
        }
    }
    Ok(out)
}

fn run_discretized(ctx: &Context_) -> Result<Vec<Record>> {
    let pairs = trajectory_pairs(ctx)?;
    let opts = DcdOptions::default();
    let mut out = Vec::new();
    for &n in &ctx.cfg.control_points {
        let trajectories: Vec<Vec<Configuration>> =
            pairs.iter().map(|(a, b)| interpolate_cspace(a, b, n)).collect::<rtcd::Result<_>>()?;
        for &b in &ctx.cfg.batch_sizes {
            let (flags, secs) = timed_sweep(&trajectories, b, |chunk| {
                let poses: Vec<Configuration> = chunk.iter().flatten().cloned().collect();
                let hits = detect(&ctx.scene, &ctx.robot, &poses, opts)?.colliding;
                Ok(hits.chunks(n).map(|c| c.iter().any(|&h| h)).collect())
            })?;
            out.push(timing_record(ctx, "mesh-poses", b, Some(n), &flags, secs));
        }
    }
    Ok(out)
}

/// Precision and recall of swept-sphere volumes (piecewise-linear and quadratic) and
/// of the discrete sphere model, against mesh ground truth; counts are pooled over
/// all trajectories.
fn run_accuracy(ctx: &Context_) -> Result<Vec<Record>> {
    let (robot, h, m) = (&ctx.robot, ctx.cfg.resolution, ctx.cfg.waypoints);
    let pairs = trajectory_pairs(ctx)?;
    let ns = &ctx.cfg.control_points;
    let zero = CoverageMetrics::from_counts(0, 0, 0);
    let mut linear = vec![zero; ns.len()];
    let mut quadratic = vec![zero; ns.len()];
    let mut spheres = vec![zero; ns.len()];
    for (i, (a, b)) in pairs.iter().enumerate() {
        let dense = interpolate_cspace(a, b, TRUTH_POSES)?;
        let bounds = fit_bounds(&robot_bounds(robot, &dense)?, DEFAULT_MARGIN);
        let truth = swept_truth_converged(robot, &[a.clone(), b.clone()], h, &bounds, TRUTH_POSES, TRUTH_POSE_CAP)?;
        log::info!("trajectory {i}: truth grid {} voxels from {} poses", truth.grid.count(), truth.poses);
        let waypoints = interpolate_cspace(a, b, m)?;
        for (j, &n) in ns.iter().enumerate() {
            let poses = interpolate_cspace(a, b, n.max(2))?;
            let g = swept_sphere_grid(robot, &poses, CurveKind::PiecewiseLinear, n, h, &bounds)?;
            linear[j] = linear[j].combine(&coverage(&g, &truth.grid)?);
            if (3..=m).contains(&n) {
                let g = swept_sphere_grid(robot, &waypoints, CurveKind::QuadraticBSpline, n, h, &bounds)?;
                quadratic[j] = quadratic[j].combine(&coverage(&g, &truth.grid)?);
            }
            let mut mesh = VoxelGrid::from_bounds(&bounds, h)?;
            voxelize_robot_poses(robot, &poses, &mut mesh)?;
            let world: Vec<Sphere> = sphere_centers(&forward_kinematics_batch(robot, &poses)?, robot).into_iter().flatten().collect();
            spheres[j] = spheres[j].combine(&coverage(&voxelize_spheres(&world, h, &bounds)?, &mesh)?);
        }
    }
    let mut out = Vec::new();
    for (label, metrics) in [("linear", &linear), ("quadratic", &quadratic), ("spheres-discrete", &spheres)] {
        for (&n, c) in ns.iter().zip(metrics.iter()) {
            if c.truth_total == 0 {
                continue;
            }
            let counts = [c.true_positive, c.approx_total, c.truth_total];
            out.push(Record {
                control_points: Some(n),
                queries: pairs.len(),
                precision: Some(c.precision),
                recall: Some(c.recall),
                result_digest: fnv1a(counts.iter().flat_map(|v| v.to_le_bytes())),
                ..ctx.record(label)
            });
        }
    }
    Ok(out)
}

/// Writes the report as CSV with a header row (header only when there are no records).
pub fn emit(report: &BenchReport, path: &Path) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)
        .with_context(|| format!("opening {}", path.display()))?;
    w.write_record(HEADER)?;
    for r in &report.records {
        w.serialize(r)?;
    }
    w.flush().with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// Human-readable table of the report.
pub fn summary_table(report: &BenchReport) -> String {
    let mut s = String::new();
    let opt = |v: Option<f64>, scale: f64, digits: usize| v.map_or("-".to_string(), |x| format!("{:.*}", digits, x * scale));
    let _ = writeln!(
        s,
        "{:<16} {:<14} {:<16} {:>6} {:>4} {:>7} {:>12} {:>12} {:>7} {:>8} {:>8}",
        "mode", "scene", "repr", "batch", "n", "queries", "ms/batch", "queries/s", "coll%", "prec%", "recall%"
    );
    for r in &report.records {
        let _ = writeln!(
            s,
            "{:<16} {:<14} {:<16} {:>6} {:>4} {:>7} {:>12} {:>12} {:>7} {:>8} {:>8}",
            r.mode,
            r.scene,
            r.representation,
            r.batch_size.map_or("-".into(), |b| b.to_string()),
            r.control_points.map_or("-".into(), |n| n.to_string()),
            r.queries,
            opt(r.wall_time_per_batch_s, 1e3, 3),
            opt(r.queries_per_s, 1.0, 0),
            opt(r.collision_fraction, 100.0, 1),
            opt(r.precision, 100.0, 2),
            opt(r.recall, 100.0, 2),
        );
    }
    s
}
