//! Software ray tracing: BVH, watertight triangle test, two-level instancing, capsules.

pub mod bvh;
pub mod curve;
pub mod mesh_bvh;
pub mod ray;
pub mod scene;
pub mod triangle;

pub use bvh::Bvh;
pub use curve::{Capsule, CurveScene};
pub use mesh_bvh::MeshBvh;
pub use ray::{FaceSide, Hit, Ray};
pub use scene::{FaceCount, Instance, InstanceTag, SceneIndex};
pub use triangle::{intersect_triangle, ShearedRay, TriangleHit};
