//! Batched discrete-pose mesh-to-mesh collision detection by edge-ray tracing.
//!
//! A penetrating pair of closed meshes either has a surface edge of one crossing the
//! other's surface, or one mesh contains the other. Edge rays of the obstacles are traced
//! against the posed links ([`Variant::ObsToRobot`]), edge rays of the links against the
//! obstacles ([`Variant::RobotToObs`]), or both ([`Variant::TwoWay`]); one containment ray
//! per mesh covers the nested case.

use std::collections::BTreeSet;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex};

use rayon::prelude::*;

use crate::ccd::{orient_edges, DirectedEdgeSet};
use crate::error::{Error, Result};
use crate::geometry::{Aabb, Iso3, Point3, Vec3};
use crate::kinematics::{forward_kinematics_batch, transform_robot_obbs, Configuration, PoseBatch, RobotModel};
use crate::mesh::{compute_obb, obb_overlap, Obb, TriangleMesh};
use crate::rt::{InstanceTag, MeshBvh, Ray, SceneIndex};

/// Direction of the containment ray.
pub const CONTAINMENT_DIR: Vec3 = Vec3::new(1.0, 0.0, 0.0);

#[derive(Debug)]
pub struct Obstacle {
    pub mesh: Arc<MeshBvh>,
    pub obb: Obb,
    pub aabb: Aabb,
    /// Strictly inside the mesh (parity-verified).
    pub interior: Point3,
    /// Edge rays as world-space segments, in mesh edge order.
    pub edge_segments: Vec<(Point3, Point3)>,
    pub directed_edges: DirectedEdgeSet,
}

/// Static obstacles in world coordinates with everything precomputed for queries.
#[derive(Debug)]
pub struct CollisionScene {
    obstacles: Vec<Obstacle>,
    index: SceneIndex,
}

impl CollisionScene {
    pub fn build(meshes: Vec<TriangleMesh>) -> Result<CollisionScene> {
        let obstacles: Vec<Obstacle> = meshes
            .into_par_iter()
            .map(|mesh| {
                let obb = compute_obb(&mesh);
                let aabb = mesh.aabb();
                let edge_segments = (0..mesh.edges().len()).map(|e| mesh.edge_points(e)).collect();
                let directed_edges = orient_edges(&mesh);
                let bvh = Arc::new(MeshBvh::build(Arc::new(mesh))?);
                Ok(Obstacle {
                    interior: bvh.interior_point()?,
                    mesh: bvh,
                    obb,
                    aabb,
                    edge_segments,
                    directed_edges,
                })
            })
            .collect::<Result<_>>()?;
        let index = SceneIndex::build(
            obstacles
                .iter()
                .enumerate()
                .map(|(i, o)| (o.mesh.clone(), Iso3::identity(), InstanceTag::Obstacle(i as u32))),
        );
        Ok(CollisionScene { obstacles, index })
    }

    pub fn empty() -> CollisionScene {
        CollisionScene {
            obstacles: Vec::new(),
            index: SceneIndex::build(Vec::new()),
        }
    }

    pub fn obstacles(&self) -> &[Obstacle] {
        &self.obstacles
    }

    pub fn index(&self) -> &SceneIndex {
        &self.index
    }

    pub fn triangle_count(&self) -> usize {
        self.obstacles.iter().map(|o| o.mesh.mesh().triangles().len()).sum()
    }
}

/// Per (config, link): the link OBB overlaps some obstacle OBB.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BroadPhaseMask {
    pub configs: usize,
    pub links: usize,
    pub bits: Vec<bool>,
}

impl BroadPhaseMask {
    pub fn all(configs: usize, links: usize, value: bool) -> BroadPhaseMask {
        BroadPhaseMask {
            configs,
            links,
            bits: vec![value; configs * links],
        }
    }

    pub fn get(&self, config: usize, link: usize) -> bool {
        self.bits[config * self.links + link]
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }
}

/// `robot_obbs` is config-major with `links` entries per configuration.
pub fn broad_phase(scene: &CollisionScene, robot_obbs: &[Obb], links: usize) -> BroadPhaseMask {
    let bits = robot_obbs
        .par_iter()
        .map(|r| scene.obstacles.iter().any(|o| obb_overlap(r, &o.obb)))
        .collect();
    BroadPhaseMask {
        configs: robot_obbs.len().checked_div(links).unwrap_or(0),
        links,
        bits,
    }
}

/// A posed link that survived the broad phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompactedLink {
    pub config: u32,
    pub link: u32,
    pub pose: Iso3,
}

/// Masked-in `(config, link)` pairs in config-major order.
pub fn compact(mask: &BroadPhaseMask, poses: &PoseBatch) -> Result<Vec<CompactedLink>> {
    if mask.configs != poses.configs() || mask.links != poses.links() {
        return Err(Error::InvalidArgument(format!(
            "mask is {}x{} but poses are {}x{}",
            mask.configs,
            mask.links,
            poses.configs(),
            poses.links()
        )));
    }
    Ok(mask
        .bits
        .iter()
        .enumerate()
        .filter(|(_, &b)| b)
        .map(|(i, _)| {
            let (config, link) = (i / mask.links, i % mask.links);
            CompactedLink {
                config: config as u32,
                link: link as u32,
                pose: *poses.get(config, link),
            }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    ObsToRobot,
    RobotToObs,
    TwoWay,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DcdOptions {
    pub variant: Variant,
    pub broad_phase: bool,
    /// Record every colliding (config, link, obstacle) triple instead of stopping at
    /// the first hit per configuration.
    pub detail: bool,
}

impl Default for DcdOptions {
    fn default() -> Self {
        DcdOptions {
            variant: Variant::TwoWay,
            broad_phase: true,
            detail: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Contact {
    pub config: u32,
    pub link: u32,
    pub obstacle: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DcdResult {
    pub colliding: Vec<bool>,
    /// Present in detail mode, sorted.
    pub contacts: Option<Vec<Contact>>,
}

impl DcdResult {
    pub fn collision_count(&self) -> usize {
        self.colliding.iter().filter(|&&c| c).count()
    }

    /// Per-configuration OR of two results over the same configurations.
    pub fn or(&self, other: &DcdResult) -> DcdResult {
        let colliding = self.colliding.iter().zip(&other.colliding).map(|(a, b)| *a || *b).collect();
        let contacts = match (&self.contacts, &other.contacts) {
            (Some(a), Some(b)) => Some(a.iter().chain(b).copied().collect::<BTreeSet<_>>().into_iter().collect()),
            _ => None,
        };
        DcdResult { colliding, contacts }
    }
}

/// Shared output of one query: an atomic flag per configuration plus optional contacts.
struct Sink {
    flags: Vec<AtomicBool>,
    detail: Option<Mutex<BTreeSet<Contact>>>,
}

impl Sink {
    fn new(configs: usize, detail: bool) -> Sink {
        Sink {
            flags: (0..configs).map(|_| AtomicBool::new(false)).collect(),
            detail: detail.then(|| Mutex::new(BTreeSet::new())),
        }
    }

    /// Whether more work for this configuration can change the output.
    #[inline]
    fn open(&self, config: u32) -> bool {
        self.detail.is_some() || !self.flags[config as usize].load(Ordering::Relaxed)
    }

    fn mark(&self, c: Contact) {
        self.flags[c.config as usize].store(true, Ordering::Relaxed);
        if let Some(d) = &self.detail {
            d.lock().expect("contact set poisoned").insert(c);
        }
    }

    fn finish(self) -> DcdResult {
        DcdResult {
            colliding: self.flags.into_iter().map(AtomicBool::into_inner).collect(),
            contacts: self.detail.map(|d| d.into_inner().expect("contact set poisoned").into_iter().collect()),
        }
    }
}

/// Obstacle edge rays (and obstacle containment rays) against one instanced index of
/// all compacted posed links.
pub fn detect_obs_to_robot(
    scene: &CollisionScene,
    robot: &RobotModel,
    links: &[CompactedLink],
    configs: usize,
    detail: bool,
) -> DcdResult {
    let sink = Sink::new(configs, detail);
    obs_to_robot_into(scene, robot, links, &sink);
    sink.finish()
}

fn link_index(robot: &RobotModel, links: &[CompactedLink]) -> SceneIndex {
    SceneIndex::build(links.iter().map(|c| {
        (
            robot.links()[c.link as usize].mesh.clone(),
            c.pose,
            InstanceTag::RobotLink {
                config: c.config,
                link: c.link,
            },
        )
    }))
}

fn robot_tag(tag: &InstanceTag) -> Option<(u32, u32)> {
    match *tag {
        InstanceTag::RobotLink { config, link } => Some((config, link)),
        InstanceTag::Obstacle(_) => None,
    }
}

fn obs_to_robot_into(scene: &CollisionScene, robot: &RobotModel, links: &[CompactedLink], sink: &Sink) {
    if links.is_empty() || scene.obstacles.is_empty() {
        return;
    }
    let index = link_index(robot, links);
    let bounds = index.world_aabb();
    let open = |tag: &InstanceTag| robot_tag(tag).is_some_and(|(c, _)| sink.open(c));

    let rays: Vec<(u32, Ray)> = scene
        .obstacles
        .iter()
        .enumerate()
        .filter(|(_, o)| o.aabb.overlaps(&bounds))
        .flat_map(|(i, o)| {
            o.edge_segments
                .iter()
                .filter_map(move |(a, b)| Ray::segment(*a, *b).map(|r| (i as u32, r)))
        })
        .collect();

    rays.par_iter().for_each(|(obstacle, ray)| {
        let _ = index.for_each_instance_hit(ray, open, |hit, inst| {
            if let Some((config, link)) = robot_tag(&inst.tag) {
                let _ = hit;
                sink.mark(Contact {
                    config,
                    link,
                    obstacle: *obstacle,
                });
            }
            std::ops::ControlFlow::Continue(())
        });
    });

    scene.obstacles.par_iter().enumerate().for_each(|(i, o)| {
        if !bounds.contains_point(&o.interior) {
            return;
        }
        let ray = Ray::infinite(o.interior, CONTAINMENT_DIR);
        for c in index.count_faces(&ray, open) {
            if c.back > c.front {
                let (config, link) = robot_tag(&index.instances()[c.instance_id as usize].tag).expect("robot instance");
                sink.mark(Contact {
                    config,
                    link,
                    obstacle: i as u32,
                });
            }
        }
    });
}

/// Link edge rays (and link containment rays) against the obstacle index.
pub fn detect_robot_to_obs(
    scene: &CollisionScene,
    robot: &RobotModel,
    links: &[CompactedLink],
    configs: usize,
    detail: bool,
) -> DcdResult {
    let sink = Sink::new(configs, detail);
    robot_to_obs_into(scene, robot, links, &sink);
    sink.finish()
}

fn robot_to_obs_into(scene: &CollisionScene, robot: &RobotModel, links: &[CompactedLink], sink: &Sink) {
    if scene.obstacles.is_empty() {
        return;
    }
    let obstacle_id = |tag: &InstanceTag| match *tag {
        InstanceTag::Obstacle(i) => i,
        InstanceTag::RobotLink { .. } => unreachable!("obstacle index holds obstacles only"),
    };
    let instances = scene.index.instances();
    links.par_iter().for_each(|c| {
        if !sink.open(c.config) {
            return;
        }
        let link = &robot.links()[c.link as usize];
        // Only obstacles overlapping the posed link's box can be hit by its edges or
        // contain it.
        let near = scene.index.overlapping(&link.mesh.aabb().transformed(&c.pose));
        if near.is_empty() {
            return;
        }
        let mesh = link.mesh.mesh();
        let world: Vec<Point3> = mesh.vertices().iter().map(|v| c.pose * v).collect();
        for e in mesh.edges() {
            if !sink.open(c.config) {
                return;
            }
            let (a, b) = (world[e.v[0] as usize], world[e.v[1] as usize]);
            let edge_box = Aabb::from_points([a, b].iter());
            let mut ray = None;
            for &id in &near {
                let inst = &instances[id as usize];
                if !inst.world_aabb.overlaps(&edge_box) {
                    continue;
                }
                let Some(r) = *ray.get_or_insert_with(|| Ray::segment(a, b)) else {
                    break;
                };
                if inst.mesh.any_hit_retraced(&r.transformed(&inst.inverse)).is_some() {
                    sink.mark(Contact {
                        config: c.config,
                        link: c.link,
                        obstacle: obstacle_id(&inst.tag),
                    });
                    if sink.detail.is_none() {
                        break;
                    }
                }
            }
        }
        if !sink.open(c.config) {
            return;
        }
        let ray = Ray::infinite(c.pose * link.interior, CONTAINMENT_DIR);
        for &id in &near {
            let inst = &instances[id as usize];
            let (front, back) = inst.mesh.count_faces(&ray.transformed(&inst.inverse));
            if back > front {
                sink.mark(Contact {
                    config: c.config,
                    link: c.link,
                    obstacle: obstacle_id(&inst.tag),
                });
            }
        }
    });
}

/// Both directions; per-configuration OR.
pub fn detect_two_way(
    scene: &CollisionScene,
    robot: &RobotModel,
    links: &[CompactedLink],
    configs: usize,
    detail: bool,
) -> DcdResult {
    let sink = Sink::new(configs, detail);
    obs_to_robot_into(scene, robot, links, &sink);
    robot_to_obs_into(scene, robot, links, &sink);
    sink.finish()
}

/// Full pipeline for a batch of configurations: kinematics, OBB broad phase,
/// compaction, then the chosen narrow phase.
pub fn detect(scene: &CollisionScene, robot: &RobotModel, configs: &[Configuration], opts: DcdOptions) -> Result<DcdResult> {
    let poses = forward_kinematics_batch(robot, configs)?;
    detect_posed(scene, robot, &poses, opts)
}

pub fn detect_posed(scene: &CollisionScene, robot: &RobotModel, poses: &PoseBatch, opts: DcdOptions) -> Result<DcdResult> {
    let mask = if opts.broad_phase {
        broad_phase(scene, &transform_robot_obbs(poses, robot), robot.link_count())
    } else {
        BroadPhaseMask::all(poses.configs(), robot.link_count(), true)
    };
    let links = compact(&mask, poses)?;
    let n = poses.configs();
    Ok(match opts.variant {
        Variant::ObsToRobot => detect_obs_to_robot(scene, robot, &links, n, opts.detail),
        Variant::RobotToObs => detect_robot_to_obs(scene, robot, &links, n, opts.detail),
        Variant::TwoWay => detect_two_way(scene, robot, &links, n, opts.detail),
    })
}
