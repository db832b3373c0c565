//! Binary BVH over primitive AABBs, built with a binned surface-area heuristic.

use std::ops::ControlFlow;

use crate::error::{Error, Result};
use crate::geometry::{Aabb, Point3, Vec3};

pub const SAH_BINS: usize = 16;
pub const MAX_LEAF_SIZE: usize = 4;
/// Primitive boxes are padded by this much so flat boxes never defeat the slab test.
pub const AABB_PAD: f64 = 1e-9;

const STACK_DEPTH: usize = 96;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BvhNode {
    pub aabb: Aabb,
    /// Leaf: first index into the primitive order. Internal: index of the left child
    /// (the right child follows it).
    start: u32,
    /// Zero for internal nodes.
    count: u32,
}

impl BvhNode {
    pub fn is_leaf(&self) -> bool {
        self.count > 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bvh {
    nodes: Vec<BvhNode>,
    order: Vec<u32>,
}

struct Builder<'a> {
    boxes: &'a [Aabb],
    centroids: Vec<Point3>,
    order: Vec<u32>,
    nodes: Vec<BvhNode>,
}

impl Builder<'_> {
    fn bounds(&self, lo: usize, hi: usize) -> (Aabb, Aabb) {
        let mut b = Aabb::empty();
        let mut cb = Aabb::empty();
        for &p in &self.order[lo..hi] {
            b = b.union(&self.boxes[p as usize]);
            cb.grow(&self.centroids[p as usize]);
        }
        (b, cb)
    }

    fn bin_of(&self, prim: u32, axis: usize, cb: &Aabb) -> usize {
        let ext = cb.max[axis] - cb.min[axis];
        let rel = (self.centroids[prim as usize][axis] - cb.min[axis]) / ext;
        ((rel * SAH_BINS as f64) as usize).min(SAH_BINS - 1)
    }

    /// Best (axis, last bin of the left side) by SAH cost, or `None` if centroids coincide.
    fn best_split(&self, lo: usize, hi: usize, cb: &Aabb) -> Option<(usize, usize)> {
        let mut best: Option<(f64, usize, usize)> = None;
        for axis in 0..3 {
            if cb.max[axis] - cb.min[axis] <= 0.0 {
                continue;
            }
            let mut counts = [0usize; SAH_BINS];
            let mut boxes = [Aabb::empty(); SAH_BINS];
            for &p in &self.order[lo..hi] {
                let b = self.bin_of(p, axis, cb);
                counts[b] += 1;
                boxes[b] = boxes[b].union(&self.boxes[p as usize]);
            }
            let mut right_area = [0.0; SAH_BINS];
            let mut right_count = [0usize; SAH_BINS];
            let (mut acc, mut n) = (Aabb::empty(), 0);
            for b in (1..SAH_BINS).rev() {
                acc = acc.union(&boxes[b]);
                n += counts[b];
                right_area[b] = acc.surface_area();
                right_count[b] = n;
            }
            let (mut acc, mut n) = (Aabb::empty(), 0);
            for split in 0..SAH_BINS - 1 {
                acc = acc.union(&boxes[split]);
                n += counts[split];
                let nr = right_count[split + 1];
                if n == 0 || nr == 0 {
                    continue;
                }
                let cost = acc.surface_area() * n as f64 + right_area[split + 1] * nr as f64;
                if best.is_none_or(|(c, _, _)| cost < c) {
                    best = Some((cost, axis, split));
                }
            }
        }
        best.map(|(_, a, s)| (a, s))
    }

    fn build(&mut self, node: usize, lo: usize, hi: usize) {
        let (aabb, cb) = self.bounds(lo, hi);
        let count = hi - lo;
        if count <= MAX_LEAF_SIZE {
            self.nodes[node] = BvhNode {
                aabb,
                start: lo as u32,
                count: count as u32,
            };
            return;
        }
        let mid = match self.best_split(lo, hi, &cb) {
            Some((axis, split)) => {
                // stable partition keeps index order inside each side
                let (left, right): (Vec<u32>, Vec<u32>) = self.order[lo..hi]
                    .iter()
                    .partition(|&&p| self.bin_of(p, axis, &cb) <= split);
                let mid = lo + left.len();
                self.order[lo..mid].copy_from_slice(&left);
                self.order[mid..hi].copy_from_slice(&right);
                mid
            }
            // coincident centroids: split the (index-ordered) range in half
            None => lo + count / 2,
        };
        let left = self.nodes.len();
        self.nodes.push(BvhNode { aabb, start: 0, count: 0 });
        self.nodes.push(BvhNode { aabb, start: 0, count: 0 });
        self.nodes[node] = BvhNode {
            aabb,
            start: left as u32,
            count: 0,
        };
        self.build(left, lo, mid);
        self.build(left + 1, mid, hi);
    }
}

impl Bvh {
    /// Builds over primitive boxes; primitive ids are indices into `boxes`.
    pub fn build(boxes: &[Aabb]) -> Result<Bvh> {
        if boxes.is_empty() {
            return Err(Error::EmptyInput("BVH needs at least one primitive"));
        }
        let padded: Vec<Aabb> = boxes.iter().map(|b| b.inflate(AABB_PAD)).collect();
        let mut builder = Builder {
            boxes: &padded,
            centroids: padded.iter().map(|b| b.center()).collect(),
            order: (0..boxes.len() as u32).collect(),
            nodes: vec![BvhNode {
                aabb: Aabb::empty(),
                start: 0,
                count: 0,
            }],
        };
        builder.build(0, 0, boxes.len());
        Ok(Bvh {
            nodes: builder.nodes,
            order: builder.order,
        })
    }

    pub fn nodes(&self) -> &[BvhNode] {
        &self.nodes
    }

    /// Primitive ids in leaf order.
    pub fn order(&self) -> &[u32] {
        &self.order
    }

    pub fn root_aabb(&self) -> Aabb {
        self.nodes[0].aabb
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.is_leaf()).count()
    }

    /// Visits `(position in order, primitive id)` for every leaf primitive whose node box
    /// the ray segment touches, near child first. Stops when `visit` breaks.
    #[inline]
    pub fn traverse_ray<F>(&self, origin: &Point3, inv_dir: &Vec3, t_min: f64, t_max: f64, mut visit: F) -> ControlFlow<()>
    where
        F: FnMut(usize, u32) -> ControlFlow<()>,
    {
        if self.nodes[0].aabb.ray_entry(origin, inv_dir, t_min, t_max).is_none() {
            return ControlFlow::Continue(());
        }
        let mut stack = [0u32; STACK_DEPTH];
        let mut sp = 1;
        while sp > 0 {
            sp -= 1;
            let node = &self.nodes[stack[sp] as usize];
            if node.is_leaf() {
                let s = node.start as usize;
                for pos in s..s + node.count as usize {
                    visit(pos, self.order[pos])?;
                }
                continue;
            }
            let l = node.start as usize;
            let tl = self.nodes[l].aabb.ray_entry(origin, inv_dir, t_min, t_max);
            let tr = self.nodes[l + 1].aabb.ray_entry(origin, inv_dir, t_min, t_max);
            match (tl, tr) {
                (Some(a), Some(b)) => {
                    let (near, far) = if a <= b { (l, l + 1) } else { (l + 1, l) };
                    stack[sp] = far as u32;
                    stack[sp + 1] = near as u32;
                    sp += 2;
                }
                (Some(_), None) => {
                    stack[sp] = l as u32;
                    sp += 1;
                }
                (None, Some(_)) => {
                    stack[sp] = (l + 1) as u32;
                    sp += 1;
                }
                (None, None) => {}
            }
        }
        ControlFlow::Continue(())
    }

    /// Visits every leaf primitive whose node box overlaps `query`.
    pub fn traverse_aabb<F>(&self, query: &Aabb, mut visit: F) -> ControlFlow<()>
    where
        F: FnMut(usize, u32) -> ControlFlow<()>,
    {
        let mut stack = [0u32; STACK_DEPTH];
        let mut sp = 1;
        while sp > 0 {
            sp -= 1;
            let node = &self.nodes[stack[sp] as usize];
            if !node.aabb.overlaps(query) {
                continue;
            }
            if node.is_leaf() {
                let s = node.start as usize;
                for pos in s..s + node.count as usize {
                    visit(pos, self.order[pos])?;
                }
            } else {
                stack[sp] = node.start;
                stack[sp + 1] = node.start + 1;
                sp += 2;
            }
        }
        ControlFlow::Continue(())
    }

    /// Checks the structural invariants against the boxes the tree was built from:
    /// primitives inside their leaf box, children inside parents, leaves partition the set.
    pub fn validate(&self, boxes: &[Aabb]) -> bool {
        let mut seen = vec![false; boxes.len()];
        let mut stack = vec![0usize];
        while let Some(i) = stack.pop() {
            let n = &self.nodes[i];
            if n.is_leaf() {
                if n.count as usize > MAX_LEAF_SIZE {
                    return false;
                }
                for pos in n.start..n.start + n.count {
                    let p = self.order[pos as usize] as usize;
                    if seen[p] || !n.aabb.contains_aabb(&boxes[p]) {
                        return false;
                    }
                    seen[p] = true;
                }
            } else {
                for c in [n.start as usize, n.start as usize + 1] {
                    if !n.aabb.contains_aabb(&self.nodes[c].aabb) {
                        return false;
                    }
                    stack.push(c);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }
}
