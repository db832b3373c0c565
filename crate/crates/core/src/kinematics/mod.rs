//! Kinematic chains with per-link meshes and sphere sets, batched forward kinematics,
//! and configuration sampling.

mod document;
mod sampling;

use std::sync::Arc;

use rayon::prelude::*;

pub use document::{load_robot, parse_robot, JointDoc, LinkDoc, OriginDoc, RobotDoc};
pub use sampling::{halton, interpolate_cspace, radical_inverse, sample_halton, sample_trajectory_pairs};

use crate::error::{Error, Result};
use crate::geometry::{Iso3, Point3, Vec3};
use crate::mesh::{compute_obb, Obb, TriangleMesh};
use crate::rt::MeshBvh;

/// Joint values, one per actuated joint (radians or meters).
pub type Configuration = Vec<f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JointType {
    Revolute,
    Prismatic,
    Fixed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Joint {
    pub kind: JointType,
    /// Unit axis in the joint frame.
    pub axis: Vec3,
    /// Parent link frame to joint frame.
    pub origin: Iso3,
    pub lower: f64,
    pub upper: f64,
}

impl Joint {
    pub fn fixed(origin: Iso3) -> Joint {
        Joint {
            kind: JointType::Fixed,
            axis: Vec3::z(),
            origin,
            lower: 0.0,
            upper: 0.0,
        }
    }

    pub fn revolute(origin: Iso3, axis: Vec3, lower: f64, upper: f64) -> Joint {
        Joint {
            kind: JointType::Revolute,
            axis: axis.normalize(),
            origin,
            lower,
            upper,
        }
    }

    pub fn prismatic(origin: Iso3, axis: Vec3, lower: f64, upper: f64) -> Joint {
        Joint {
            kind: JointType::Prismatic,
            axis: axis.normalize(),
            origin,
            lower,
            upper,
        }
    }

    /// Local transform for joint value `q` (ignored for fixed joints).
    #[inline]
    pub fn local_transform(&self, q: f64) -> Iso3 {
        match self.kind {
            JointType::Fixed => self.origin,
            JointType::Revolute => self.origin * Iso3::rotation(self.axis * q),
            JointType::Prismatic => self.origin * Iso3::translation(self.axis.x * q, self.axis.y * q, self.axis.z * q),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sphere {
    pub center: Point3,
    pub radius: f64,
}

impl Sphere {
    pub fn new(center: Point3, radius: f64) -> Sphere {
        Sphere { center, radius }
    }
}

/// Input for one link of [`RobotModel::new`].
#[derive(Debug, Clone)]
pub struct LinkSpec {
    pub name: String,
    pub parent: Option<usize>,
    pub joint: Joint,
    pub mesh: TriangleMesh,
    pub spheres: Vec<Sphere>,
}

#[derive(Debug)]
pub struct Link {
    pub name: String,
    pub parent: Option<usize>,
    pub joint: Joint,
    pub mesh: Arc<MeshBvh>,
    /// Body-frame OBB.
    pub obb: Obb,
    pub spheres: Vec<Sphere>,
    /// Body-frame point strictly inside the link mesh.
    pub interior: Point3,
    /// Index into the configuration vector, for actuated joints.
    pub dof_index: Option<usize>,
}

#[derive(Debug)]
pub struct RobotModel {
    links: Vec<Link>,
    dof: usize,
    sphere_count: usize,
}

impl RobotModel {
    /// Links must be ordered so every parent precedes its children.
    pub fn new(specs: Vec<LinkSpec>) -> Result<RobotModel> {
        if specs.is_empty() {
            return Err(Error::InvalidRobot("robot has no links".into()));
        }
        let mut links = Vec::with_capacity(specs.len());
        let mut dof = 0;
        for (i, s) in specs.into_iter().enumerate() {
            if let Some(p) = s.parent {
                if p >= i {
                    return Err(Error::InvalidRobot(format!(
                        "link {i} ({}) has parent {p}, which does not precede it",
                        s.name
                    )));
                }
            }
            let j = &s.joint;
            if !(j.lower <= j.upper) {
                return Err(Error::InvalidRobot(format!("link {i} ({}) has joint limits [{}, {}]", s.name, j.lower, j.upper)));
            }
            if j.kind != JointType::Fixed && !((j.axis.norm() - 1.0).abs() < 1e-9) {
                return Err(Error::InvalidRobot(format!("link {i} ({}) has a zero joint axis", s.name)));
            }
            if let Some(bad) = s.spheres.iter().find(|sp| !(sp.radius > 0.0)) {
                return Err(Error::InvalidRobot(format!("link {i} ({}) has sphere radius {}", s.name, bad.radius)));
            }
            let dof_index = (j.kind != JointType::Fixed).then(|| {
                dof += 1;
                dof - 1
            });
            let obb = compute_obb(&s.mesh);
            let mesh = Arc::new(MeshBvh::build(Arc::new(s.mesh))?);
            links.push(Link {
                name: s.name,
                parent: s.parent,
                joint: s.joint,
                interior: mesh.interior_point()?,
                mesh,
                obb,
                spheres: s.spheres,
                dof_index,
            });
        }
        let sphere_count = links.iter().map(|l| l.spheres.len()).sum();
        Ok(RobotModel { links, dof, sphere_count })
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn link_count(&self) -> usize {
        self.links.len()
    }

    /// Number of actuated joints.
    pub fn dof(&self) -> usize {
        self.dof
    }

    pub fn sphere_count(&self) -> usize {
        self.sphere_count
    }

    /// `(lower, upper)` per actuated joint.
    pub fn joint_limits(&self) -> Vec<(f64, f64)> {
        self.links
            .iter()
            .filter(|l| l.dof_index.is_some())
            .map(|l| (l.joint.lower, l.joint.upper))
            .collect()
    }

    /// Checks length and limits; `index` is only used in the error.
    pub fn check_configuration(&self, q: &[f64], index: usize) -> Result<()> {
        if q.len() != self.dof {
            return Err(Error::DofMismatch {
                config: index,
                got: q.len(),
                expected: self.dof,
            });
        }
        for (joint, (&v, (lower, upper))) in q.iter().zip(self.joint_limits()).enumerate() {
            if !(v >= lower && v <= upper) {
                return Err(Error::JointLimit {
                    config: index,
                    joint,
                    value: v,
                    lower,
                    upper,
                });
            }
        }
        Ok(())
    }

    /// Link poses for one configuration, written into `out` (one per link). No limit check.
    pub fn forward_kinematics_into(&self, q: &[f64], out: &mut [Iso3]) {
        for (i, link) in self.links.iter().enumerate() {
            let v = link.dof_index.map_or(0.0, |d| q[d]);
            let local = link.joint.local_transform(v);
            out[i] = match link.parent {
                Some(p) => out[p] * local,
                None => local,
            };
        }
    }

    pub fn forward_kinematics(&self, q: &[f64]) -> Result<Vec<Iso3>> {
        self.check_configuration(q, 0)?;
        let mut out = vec![Iso3::identity(); self.links.len()];
        self.forward_kinematics_into(q, &mut out);
        Ok(out)
    }

    /// Mid-range configuration.
    pub fn home(&self) -> Configuration {
        self.joint_limits().iter().map(|(l, u)| 0.5 * (l + u)).collect()
    }
}

/// Per-configuration, per-link world transforms, stored config-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PoseBatch {
    links: usize,
    poses: Vec<Iso3>,
}

impl PoseBatch {
    pub fn configs(&self) -> usize {
        self.poses.len().checked_div(self.links).unwrap_or(0)
    }

    pub fn links(&self) -> usize {
        self.links
    }

    pub fn get(&self, config: usize, link: usize) -> &Iso3 {
        &self.poses[config * self.links + link]
    }

    pub fn config(&self, config: usize) -> &[Iso3] {
        &self.poses[config * self.links..(config + 1) * self.links]
    }

    pub fn as_slice(&self) -> &[Iso3] {
        &self.poses
    }
}

/// Forward kinematics for every configuration, in parallel over configurations.
/// All configurations are limit-checked first.
pub fn forward_kinematics_batch(robot: &RobotModel, configs: &[Configuration]) -> Result<PoseBatch> {
    for (k, q) in configs.iter().enumerate() {
        robot.check_configuration(q, k)?;
    }
    let links = robot.link_count();
    let mut poses = vec![Iso3::identity(); configs.len() * links];
    poses
        .par_chunks_mut(links)
        .zip(configs.par_iter())
        .for_each(|(out, q)| robot.forward_kinematics_into(q, out));
    Ok(PoseBatch { links, poses })
}

/// World-frame link OBBs, indexed like the pose batch (config-major).
pub fn transform_robot_obbs(poses: &PoseBatch, robot: &RobotModel) -> Vec<Obb> {
    poses
        .as_slice()
        .par_iter()
        .enumerate()
        .map(|(i, pose)| robot.links[i % poses.links].obb.transformed(pose))
        .collect()
}

/// World spheres per configuration, flattened link-major in link and sphere order.
pub fn sphere_centers(poses: &PoseBatch, robot: &RobotModel) -> Vec<Vec<Sphere>> {
    (0..poses.configs())
        .into_par_iter()
        .map(|k| {
            let mut out = Vec::with_capacity(robot.sphere_count);
            for (l, link) in robot.links.iter().enumerate() {
                let pose = poses.get(k, l);
                out.extend(link.spheres.iter().map(|s| Sphere::new(pose * s.center, s.radius)));
            }
            out
        })
        .collect()
}
