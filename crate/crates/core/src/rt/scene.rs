//! Two-level instanced index: posed references to shared [`MeshBvh`]s under a top BVH.

use std::ops::ControlFlow;
use std::sync::Arc;

use super::bvh::Bvh;
use super::mesh_bvh::MeshBvh;
use super::ray::{Hit, Ray};
use crate::geometry::{Aabb, Iso3};

/// Collision-pair role of an instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InstanceTag {
    Obstacle(u32),
    RobotLink { config: u32, link: u32 },
}

impl InstanceTag {
    pub fn is_obstacle(&self) -> bool {
        matches!(self, InstanceTag::Obstacle(_))
    }

    pub fn is_robot(&self) -> bool {
        matches!(self, InstanceTag::RobotLink { .. })
    }
}

#[derive(Debug, Clone)]
pub struct Instance {
    pub mesh: Arc<MeshBvh>,
    /// Local-to-world.
    pub transform: Iso3,
    pub inverse: Iso3,
    pub tag: InstanceTag,
    pub world_aabb: Aabb,
}

/// Per-instance face counts from [`SceneIndex::count_faces`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FaceCount {
    pub instance_id: u32,
    pub front: u32,
    pub back: u32,
}

#[derive(Debug, Clone)]
pub struct SceneIndex {
    instances: Vec<Instance>,
    top: Option<Bvh>,
}

impl SceneIndex {
    /// Instance ids are positions in `instances`. An empty list gives an index that
    /// never reports hits.
    pub fn build(instances: impl IntoIterator<Item = (Arc<MeshBvh>, Iso3, InstanceTag)>) -> SceneIndex {
        let instances: Vec<Instance> = instances
            .into_iter()
            .map(|(mesh, transform, tag)| Instance {
                world_aabb: mesh.aabb().transformed(&transform),
                inverse: transform.inverse(),
                mesh,
                transform,
                tag,
            })
            .collect();
        let boxes: Vec<Aabb> = instances.iter().map(|i| i.world_aabb).collect();
        let top = Bvh::build(&boxes).ok();
        SceneIndex { instances, top }
    }

    pub fn instances(&self) -> &[Instance] {
        &self.instances
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn world_aabb(&self) -> Aabb {
        self.top.as_ref().map_or(Aabb::empty(), |t| t.root_aabb())
    }

    /// Ids of instances whose world box overlaps `query`, ascending.
    pub fn overlapping(&self, query: &Aabb) -> Vec<u32> {
        let mut out = Vec::new();
        if let Some(top) = &self.top {
            let _ = top.traverse_aabb(query, |_, id| {
                if self.instances[id as usize].world_aabb.overlaps(query) {
                    out.push(id);
                }
                ControlFlow::Continue(())
            });
        }
        out.sort_unstable();
        out
    }

    /// Calls `visit` for each instance whose world box the ray touches and which passes `filter`.
    #[inline]
    fn candidates<F, V>(&self, ray: &Ray, filter: F, mut visit: V) -> ControlFlow<()>
    where
        F: Fn(&InstanceTag) -> bool,
        V: FnMut(u32, &Instance) -> ControlFlow<()>,
    {
        let Some(top) = &self.top else {
            return ControlFlow::Continue(());
        };
        top.traverse_ray(&ray.origin, &ray.inv_dir, ray.t_min, ray.t_max, |_, id| {
            let inst = &self.instances[id as usize];
            if filter(&inst.tag) {
                visit(id, inst)
            } else {
                ControlFlow::Continue(())
            }
        })
    }

    /// Some hit on a filtered instance, if the ray segment touches any.
    pub fn intersect_any<F>(&self, ray: &Ray, filter: F) -> Option<Hit>
    where
        F: Fn(&InstanceTag) -> bool,
    {
        let mut found = None;
        let _ = self.for_each_instance_hit(ray, filter, |hit, _| {
            found = Some(hit);
            ControlFlow::Break(())
        });
        found
    }

    /// Visits every filtered instance the ray hits, one hit per instance, with the
    /// degenerate re-trace policy applied per instance. `filter` is re-evaluated for each
    /// candidate, so callers may narrow it as results arrive.
    pub fn for_each_instance_hit<F, V>(&self, ray: &Ray, filter: F, mut visit: V) -> ControlFlow<()>
    where
        F: Fn(&InstanceTag) -> bool,
        V: FnMut(Hit, &Instance) -> ControlFlow<()>,
    {
        self.candidates(ray, filter, |id, inst| {
            let local = ray.transformed(&inst.inverse);
            match inst.mesh.any_hit_retraced(&local) {
                Some((prim, h)) => visit(
                    Hit {
                        t: h.t,
                        primitive_id: prim,
                        instance_id: id,
                        face_side: Some(h.side),
                    },
                    inst,
                ),
                None => ControlFlow::Continue(()),
            }
        })
    }

    /// All intersections along the ray, counted per filtered instance by face side.
    /// Instances with no intersection are omitted; order follows instance id.
    pub fn count_faces<F>(&self, ray: &Ray, filter: F) -> Vec<FaceCount>
    where
        F: Fn(&InstanceTag) -> bool,
    {
        let mut out = Vec::new();
        let _ = self.candidates(ray, filter, |id, inst| {
            let (front, back) = inst.mesh.count_faces(&ray.transformed(&inst.inverse));
            if front + back > 0 {
                out.push(FaceCount {
                    instance_id: id,
                    front,
                    back,
                });
            }
            ControlFlow::Continue(())
        });
        out.sort_by_key(|c| c.instance_id);
        out
    }
}
