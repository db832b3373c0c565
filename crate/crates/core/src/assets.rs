//! Built-in demo assets: a 7-DoF desk-scale arm with a 62-sphere model and three
//! procedural obstacle scenes.

use std::f64::consts::FRAC_PI_2;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::{Iso3, Point3, Vec3};
use crate::kinematics::{radical_inverse, Joint, JointDoc, JointType, LinkDoc, LinkSpec, OriginDoc, RobotDoc, RobotModel, Sphere};
use crate::mesh::{shapes, write_obj, TriangleMesh};

struct ArmLink {
    name: &'static str,
    /// Joint offset from the parent frame, along parent z.
    offset: f64,
    kind: JointType,
    axis: Vec3,
    limit: f64,
    radius: f64,
    length: f64,
    spheres: usize,
    /// Body lies along x (the hand) instead of z.
    sideways: bool,
}

const ARM7: [ArmLink; 8] = [
    ArmLink { name: "base", offset: 0.0, kind: JointType::Fixed, axis: Vec3::new(0.0, 0.0, 1.0), limit: 0.0, radius: 0.065, length: 0.18, spheres: 6, sideways: false },
    ArmLink { name: "shoulder_pan", offset: 0.18, kind: JointType::Revolute, axis: Vec3::new(0.0, 0.0, 1.0), limit: 2.8, radius: 0.06, length: 0.16, spheres: 6, sideways: false },
    ArmLink { name: "shoulder_lift", offset: 0.16, kind: JointType::Revolute, axis: Vec3::new(0.0, 1.0, 0.0), limit: 1.7, radius: 0.055, length: 0.32, spheres: 10, sideways: false },
    ArmLink { name: "upper_roll", offset: 0.32, kind: JointType::Revolute, axis: Vec3::new(0.0, 0.0, 1.0), limit: 2.8, radius: 0.05, length: 0.12, spheres: 6, sideways: false },
    ArmLink { name: "elbow", offset: 0.12, kind: JointType::Revolute, axis: Vec3::new(0.0, 1.0, 0.0), limit: 2.2, radius: 0.048, length: 0.3, spheres: 10, sideways: false },
    ArmLink { name: "forearm_roll", offset: 0.3, kind: JointType::Revolute, axis: Vec3::new(0.0, 0.0, 1.0), limit: 2.8, radius: 0.045, length: 0.12, spheres: 8, sideways: false },
    ArmLink { name: "wrist_pitch", offset: 0.12, kind: JointType::Revolute, axis: Vec3::new(0.0, 1.0, 0.0), limit: 1.9, radius: 0.042, length: 0.1, spheres: 6, sideways: false },
    ArmLink { name: "hand", offset: 0.1, kind: JointType::Revolute, axis: Vec3::new(0.0, 0.0, 1.0), limit: 2.8, radius: 0.035, length: 0.16, spheres: 10, sideways: true },
];

/// Sphere margin beyond the exact covering radius of each capsule link.
const SPHERE_PAD: f64 = 0.003;

/// Body frame of a link's capsule: axis along z from 0 to `length`, or for the hand
/// along x centered on the joint, lifted by its radius.
fn link_frame(l: &ArmLink) -> Iso3 {
    if l.sideways {
        Iso3::translation(-0.5 * l.length, 0.0, l.radius) * Iso3::rotation(Vec3::y() * FRAC_PI_2)
    } else {
        Iso3::identity()
    }
}

fn link_mesh(l: &ArmLink) -> TriangleMesh {
    shapes::capsule(l.radius, l.length, 16, 3).transformed(&link_frame(l))
}

/// Spheres evenly spaced along the capsule axis; neighbours overlap enough that the
/// whole capsule is covered.
fn link_spheres(l: &ArmLink) -> Vec<Sphere> {
    let frame = link_frame(l);
    let gap = l.length / (l.spheres - 1) as f64;
    let radius = (l.radius * l.radius + 0.25 * gap * gap).sqrt() + SPHERE_PAD;
    (0..l.spheres)
        .map(|i| Sphere::new(frame * Point3::new(0.0, 0.0, i as f64 * gap), radius))
        .collect()
}

fn link_joint(l: &ArmLink) -> Joint {
    let origin = Iso3::translation(0.0, 0.0, l.offset);
    match l.kind {
        JointType::Fixed => Joint::fixed(origin),
        JointType::Revolute => Joint::revolute(origin, l.axis, -l.limit, l.limit),
        JointType::Prismatic => Joint::prismatic(origin, l.axis, -l.limit, l.limit),
    }
}

/// Link specifications of the demo arm: 8 links, 7 revolute joints, 62 spheres.
pub fn arm7_specs() -> Vec<LinkSpec> {
    ARM7.iter()
        .enumerate()
        .map(|(i, l)| LinkSpec {
            name: l.name.to_string(),
            parent: i.checked_sub(1),
            joint: link_joint(l),
            mesh: link_mesh(l),
            spheres: link_spheres(l),
        })
        .collect()
}

pub fn arm7() -> RobotModel {
    RobotModel::new(arm7_specs()).expect("built-in arm is valid")
}

/// Writes the demo arm as a robot document (`arm7.json`) plus one OBJ per link.
/// Returns the document path.
pub fn write_arm7(dir: &Path) -> Result<std::path::PathBuf> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut links = Vec::new();
    for (i, l) in ARM7.iter().enumerate() {
        let mesh_path = format!("{}.obj", l.name);
        write_obj(&link_mesh(l), &dir.join(&mesh_path))?;
        links.push(LinkDoc {
            name: l.name.to_string(),
            mesh_path,
            parent: i.checked_sub(1),
            joint: JointDoc {
                kind: l.kind,
                axis: [l.axis.x, l.axis.y, l.axis.z],
                origin: OriginDoc { xyz: [0.0, 0.0, l.offset], rpy: [0.0; 3] },
                limits: [-l.limit, l.limit],
            },
            spheres: link_spheres(l)
                .iter()
                .map(|s| [s.center.x, s.center.y, s.center.z, s.radius])
                .collect(),
        });
    }
    let doc = RobotDoc { name: "arm7".into(), links };
    let path = dir.join("arm7.json");
    let text = serde_json::to_string_pretty(&doc).expect("robot document serializes");
    std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SceneKind {
    Simple,
    Medium,
    Dense,
}

impl SceneKind {
    pub const ALL: [SceneKind; 3] = [SceneKind::Simple, SceneKind::Medium, SceneKind::Dense];

    pub fn name(&self) -> &'static str {
        match self {
            SceneKind::Simple => "simple",
            SceneKind::Medium => "medium",
            SceneKind::Dense => "dense",
        }
    }
}

impl std::str::FromStr for SceneKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<SceneKind> {
        SceneKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown scene {s:?} (simple, medium, dense)")))
    }
}

/// Procedural obstacles around the arm's workspace. Deterministic; the base column
/// (radius 0.2 m around the z axis) is kept free.
pub fn scene_meshes(kind: SceneKind) -> Vec<TriangleMesh> {
    let table = |x0: f64, x1: f64, y0: f64, y1: f64, top: f64| {
        shapes::cuboid(Point3::new(x0, y0, top - 0.04), Point3::new(x1, y1, top), [4, 4, 1])
    };
    let (count, subdiv, segments) = match kind {
        SceneKind::Simple => (1, 1, 12),
        SceneKind::Medium => (8, 2, 16),
        SceneKind::Dense => (40, 3, 32),
    };
    let mut meshes = vec![table(0.35, 0.9, -0.4, 0.4, 0.25)];
    if kind == SceneKind::Dense {
        meshes.push(table(-0.4, 0.4, 0.4, 0.85, 0.4));
        meshes.push(table(-0.9, -0.35, -0.5, 0.3, 0.55));
    }
    for i in 0..count {
        let index = i as u64 + 1;
        let r = 0.3 + 0.55 * radical_inverse(index, 2);
        let phi = std::f64::consts::TAU * radical_inverse(index, 3);
        let z = 0.05 + 0.9 * radical_inverse(index, 5);
        let size = 0.03 + 0.05 * radical_inverse(index, 7);
        let c = Vec3::new(r * phi.cos(), r * phi.sin(), z);
        let at = Iso3::new(c, Vec3::new(0.3, 0.2, 1.0) * phi);
        let mesh = match i % 3 {
            0 => shapes::centered_box(Vec3::new(size, 0.7 * size, 1.3 * size), [2, 2, 3]),
            1 => shapes::icosphere(size, subdiv),
            _ => shapes::cylinder(0.6 * size, 2.5 * size, segments),
        };
        meshes.push(mesh.transformed(&at));
    }
    meshes
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinematics::{forward_kinematics_batch, sample_halton};

    #[test]
    fn arm_contract() {
        let robot = arm7();
        assert_eq!(robot.dof(), 7);
        assert_eq!(robot.link_count(), 8);
        assert_eq!(robot.sphere_count(), 62);
        for l in robot.links() {
            let t = l.mesh.mesh().triangles().len();
            assert!((100..=500).contains(&t), "{} has {t} triangles", l.name);
        }
    }

    #[test]
    fn spheres_cover_link_vertices() {
        let robot = arm7();
        for l in robot.links() {
            for v in l.mesh.mesh().vertices() {
                assert!(l.spheres.iter().any(|s| (v - s.center).norm() <= s.radius), "{}", l.name);
            }
        }
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_arm7(dir.path()).unwrap();
        let loaded = crate::kinematics::load_robot(&path).unwrap();
        let robot = arm7();
        let qs = sample_halton(8, &robot, 0).unwrap();
        let a = forward_kinematics_batch(&robot, &qs).unwrap();
        let b = forward_kinematics_batch(&loaded, &qs).unwrap();
        for (x, y) in a.as_slice().iter().zip(b.as_slice()) {
            assert!((x.translation.vector - y.translation.vector).norm() < 1e-12);
        }
        assert_eq!(loaded.sphere_count(), 62);
    }

    #[test]
    fn scenes_are_valid_and_clear_of_base() {
        for kind in SceneKind::ALL {
            let meshes = scene_meshes(kind);
            let base = crate::geometry::Aabb::new(Point3::new(-0.1, -0.1, -0.1), Point3::new(0.1, 0.1, 0.45));
            for m in &meshes {
                assert!(!m.aabb().overlaps(&base), "{kind:?} obstacle over the base");
            }
            assert_eq!(kind.name().parse::<SceneKind>().unwrap(), kind);
        }
        assert!(scene_meshes(SceneKind::Dense).len() > scene_meshes(SceneKind::Medium).len());
    }
}
