//! JSON robot model document: an ordered link list with mesh paths, joints and spheres.
//!
//! ```json
//! {
//!   "name": "arm",
//!   "links": [
//!     { "name": "base", "mesh_path": "base.obj", "parent": null,
//!       "joint": { "type": "fixed" },
//!       "spheres": [[0.0, 0.0, 0.05, 0.08]] },
//!     { "name": "link1", "mesh_path": "link1.obj", "parent": 0,
//!       "joint": { "type": "revolute", "axis": [0, 0, 1],
//!                  "origin": { "xyz": [0, 0, 0.1], "rpy": [0, 0, 0] },
//!                  "limits": [-2.9, 2.9] },
//!       "spheres": [] }
//!   ]
//! }
//! ```
//! Mesh paths are relative to the document; lengths in meters, angles in radians.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Joint, JointType, LinkSpec, RobotModel, Sphere};
use crate::error::{Error, Result};
use crate::geometry::{Iso3, Point3, Vec3};
use crate::mesh::load_mesh;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobotDoc {
    #[serde(default)]
    pub name: String,
    pub links: Vec<LinkDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkDoc {
    pub name: String,
    pub mesh_path: String,
    #[serde(default)]
    pub parent: Option<usize>,
    pub joint: JointDoc,
    #[serde(default)]
    pub spheres: Vec<[f64; 4]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointDoc {
    #[serde(rename = "type")]
    pub kind: JointType,
    #[serde(default = "default_axis")]
    pub axis: [f64; 3],
    #[serde(default)]
    pub origin: OriginDoc,
    #[serde(default)]
    pub limits: [f64; 2],
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct OriginDoc {
    #[serde(default)]
    pub xyz: [f64; 3],
    /// Fixed-axis roll, pitch, yaw.
    #[serde(default)]
    pub rpy: [f64; 3],
}

fn default_axis() -> [f64; 3] {
    [0.0, 0.0, 1.0]
}

impl OriginDoc {
    pub fn to_iso(&self) -> Iso3 {
        let [x, y, z] = self.xyz;
        let [r, p, w] = self.rpy;
        Iso3::from_parts(
            nalgebra::Translation3::new(x, y, z),
            nalgebra::UnitQuaternion::from_euler_angles(r, p, w),
        )
    }
}

impl JointDoc {
    fn to_joint(&self, link: &str) -> Result<Joint> {
        let origin = self.origin.to_iso();
        let axis = Vec3::from(self.axis);
        let [lo, hi] = self.limits;
        Ok(match self.kind {
            JointType::Fixed => Joint::fixed(origin),
            kind => {
                if axis.norm() == 0.0 {
                    return Err(Error::InvalidRobot(format!("link {link}: zero joint axis")));
                }
                if kind == JointType::Revolute {
                    Joint::revolute(origin, axis, lo, hi)
                } else {
                    Joint::prismatic(origin, axis, lo, hi)
                }
            }
        })
    }
}

/// Parses a robot document; mesh paths resolve against `base_dir`.
pub fn parse_robot(text: &str, base_dir: &Path) -> Result<RobotModel> {
    let doc: RobotDoc = serde_json::from_str(text).map_err(|e| Error::parse("robot model", e.to_string()))?;
    let mut specs = Vec::with_capacity(doc.links.len());
    for l in &doc.links {
        let mesh = load_mesh(&base_dir.join(&l.mesh_path))?;
        specs.push(LinkSpec {
            name: l.name.clone(),
            parent: l.parent,
            joint: l.joint.to_joint(&l.name)?,
            mesh,
            spheres: l
                .spheres
                .iter()
                .map(|&[x, y, z, r]| Sphere::new(Point3::new(x, y, z), r))
                .collect(),
        });
    }
    RobotModel::new(specs)
}

pub fn load_robot(path: &Path) -> Result<RobotModel> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_robot(&text, path.parent().unwrap_or(Path::new(".")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{shapes, write_obj};

    #[test]
    fn round_trip_through_files() {
        let dir = tempfile::tempdir().unwrap();
        write_obj(&shapes::unit_cube(), &dir.path().join("cube.obj")).unwrap();
        let doc = r#"{
            "name": "two",
            "links": [
              {"name": "base", "mesh_path": "cube.obj", "joint": {"type": "fixed"}},
              {"name": "arm", "mesh_path": "cube.obj", "parent": 0,
               "joint": {"type": "revolute", "axis": [0, 0, 2],
                         "origin": {"xyz": [1, 0, 0], "rpy": [0, 0, 1.5707963267948966]},
                         "limits": [-1, 1]},
               "spheres": [[0.5, 0.5, 0.5, 0.6]]}
            ]
        }"#;
        let path = dir.path().join("robot.json");
        std::fs::write(&path, doc).unwrap();
        let robot = load_robot(&path).unwrap();
        assert_eq!(robot.link_count(), 2);
        assert_eq!(robot.dof(), 1);
        assert_eq!(robot.sphere_count(), 1);
        let poses = robot.forward_kinematics(&[0.0]).unwrap();
        let p = poses[1] * Point3::new(1.0, 0.0, 0.0);
        assert!((p - Point3::new(1.0, 1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn bad_documents() {
        assert!(matches!(parse_robot("{", Path::new(".")), Err(Error::Parse { .. })));
        let missing = r#"{"links": [{"name": "a", "mesh_path": "nope.obj", "joint": {"type": "fixed"}}]}"#;
        assert!(matches!(parse_robot(missing, Path::new("/nonexistent")), Err(Error::Io { .. })));
    }
}
