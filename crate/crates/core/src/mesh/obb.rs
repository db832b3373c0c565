//! Oriented bounding boxes for the broad phase.

use std::cmp::Ordering;

use nalgebra::SymmetricEigen;

use super::TriangleMesh;
use crate::geometry::{Iso3, Mat3, Point3, Vec3};

/// Smallest half extent; flat or linear point sets are clamped to this.
pub const MIN_HALF_EXTENT: f64 = 1e-6;

/// Inflation applied to both boxes in [`obb_overlap`], meters.
pub const OVERLAP_EPSILON: f64 = 1e-6;

/// Number of largest-area triangles whose edge frames are tried as tighter candidates.
const FACE_CANDIDATES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Obb {
    pub center: Point3,
    pub half_extents: Vec3,
    /// Columns are the box axes (orthonormal, right-handed).
    pub rotation: Mat3,
}

impl Obb {
    pub fn volume(&self) -> f64 {
        8.0 * self.half_extents.x * self.half_extents.y * self.half_extents.z
    }

    pub fn axis(&self, i: usize) -> Vec3 {
        self.rotation.column(i).into_owned()
    }

    /// Point coordinates in the box frame.
    pub fn local(&self, p: &Point3) -> Vec3 {
        self.rotation.transpose() * (p - self.center)
    }

    pub fn contains(&self, p: &Point3, tol: f64) -> bool {
        let l = self.local(p);
        (0..3).all(|i| l[i].abs() <= self.half_extents[i] + tol)
    }

    pub fn transformed(&self, iso: &Iso3) -> Obb {
        Obb {
            center: iso * self.center,
            half_extents: self.half_extents,
            rotation: iso.rotation.to_rotation_matrix().matrix() * self.rotation,
        }
    }

    pub fn corners(&self) -> [Point3; 8] {
        std::array::from_fn(|k| {
            let s = Vec3::new(
                if k & 1 == 0 { -1.0 } else { 1.0 },
                if k & 2 == 0 { -1.0 } else { 1.0 },
                if k & 4 == 0 { -1.0 } else { 1.0 },
            );
            self.center + self.rotation * s.component_mul(&self.half_extents)
        })
    }

    fn fit(points: &[Point3], rotation: Mat3) -> Obb {
        let rt = rotation.transpose();
        let mut lo = Vec3::repeat(f64::INFINITY);
        let mut hi = Vec3::repeat(f64::NEG_INFINITY);
        for p in points {
            let l = rt * p.coords;
            lo = lo.inf(&l);
            hi = hi.sup(&l);
        }
        let half = ((hi - lo) * 0.5).map(|h| h.max(MIN_HALF_EXTENT));
        Obb {
            center: Point3::from(rotation * ((hi + lo) * 0.5)),
            half_extents: half,
            rotation,
        }
    }
}

fn right_handed(a: Vec3, b: Vec3) -> Option<Mat3> {
    let a = a.try_normalize(1e-12)?;
    let b = (b - a * a.dot(&b)).try_normalize(1e-12)?;
    let c = a.cross(&b);
    Some(Mat3::from_columns(&[a, b, c]))
}

fn pca_frame(points: &[Point3]) -> Mat3 {
    let n = points.len() as f64;
    let mean = points.iter().fold(Vec3::zeros(), |acc, p| acc + p.coords) / n;
    let mut cov = Mat3::zeros();
    for p in points {
        let d = p.coords - mean;
        cov += d * d.transpose();
    }
    cov /= n;
    let eig = SymmetricEigen::new(cov);
    let mut order = [0usize, 1, 2];
    order.sort_by(|&i, &j| {
        eig.eigenvalues[j]
            .partial_cmp(&eig.eigenvalues[i])
            .unwrap_or(Ordering::Equal)
            .then(i.cmp(&j))
    });
    let a = eig.eigenvectors.column(order[0]).into_owned();
    let b = eig.eigenvectors.column(order[1]).into_owned();
    right_handed(a, b).unwrap_or_else(Mat3::identity)
}

/// PCA-fitted OBB, tightened by also trying frames spanned by the largest faces' edges.
/// Never looser than the box of the PCA frame.
pub fn compute_obb(mesh: &TriangleMesh) -> Obb {
    let points = mesh.vertices();
    let mut best = Obb::fit(points, pca_frame(points));

    // areas are quantized so rounding noise under a rigid motion does not reorder ties
    let max_area = (0..mesh.triangles().len()).map(|t| mesh.triangle_area(t)).fold(0.0, f64::max);
    let mut by_area: Vec<(i64, usize)> = (0..mesh.triangles().len())
        .map(|t| (-((mesh.triangle_area(t) / max_area * 1e9).round() as i64), t))
        .collect();
    by_area.sort();
    for &(_, t) in by_area.iter().take(FACE_CANDIDATES) {
        let normal = mesh.triangle_normal(t);
        let [a, b, c] = mesh.triangle_points(t);
        for edge in [b - a, c - b, a - c] {
            if let Some(frame) = right_handed(normal, edge) {
                let cand = Obb::fit(points, frame);
                if cand.volume() < best.volume() * (1.0 - 1e-12) {
                    best = cand;
                }
            }
        }
    }
    best
}

fn canonical_cmp(a: &Obb, b: &Obb) -> Ordering {
    let fa = a.center.iter().chain(a.half_extents.iter()).chain(a.rotation.iter());
    let fb = b.center.iter().chain(b.half_extents.iter()).chain(b.rotation.iter());
    for (x, y) in fa.zip(fb) {
        match x.total_cmp(y) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    Ordering::Equal
}

/// Separating-axis test over the 15 candidate axes, with both boxes inflated by
/// [`OVERLAP_EPSILON`]. Arguments are put in a canonical order first so the result is
/// exactly symmetric.
pub fn obb_overlap(a: &Obb, b: &Obb) -> bool {
    let (a, b) = if canonical_cmp(a, b) == Ordering::Greater {
        (b, a)
    } else {
        (a, b)
    };
    let ea = a.half_extents.add_scalar(OVERLAP_EPSILON);
    let eb = b.half_extents.add_scalar(OVERLAP_EPSILON);
    let r = a.rotation.transpose() * b.rotation;
    // Guards the cross-product axes of near-parallel edges.
    let abs_r = r.abs().add_scalar(1e-12);
    let t = a.rotation.transpose() * (b.center - a.center);

    for i in 0..3 {
        let ra = ea[i];
        let rb = eb[0] * abs_r[(i, 0)] + eb[1] * abs_r[(i, 1)] + eb[2] * abs_r[(i, 2)];
        if t[i].abs() > ra + rb {
            return false;
        }
    }
    for j in 0..3 {
        let ra = ea[0] * abs_r[(0, j)] + ea[1] * abs_r[(1, j)] + ea[2] * abs_r[(2, j)];
        let rb = eb[j];
        let tj = t[0] * r[(0, j)] + t[1] * r[(1, j)] + t[2] * r[(2, j)];
        if tj.abs() > ra + rb {
            return false;
        }
    }
    for i in 0..3 {
        let (i1, i2) = ((i + 1) % 3, (i + 2) % 3);
        for j in 0..3 {
            let (j1, j2) = ((j + 1) % 3, (j + 2) % 3);
            let ra = ea[i1] * abs_r[(i2, j)] + ea[i2] * abs_r[(i1, j)];
            let rb = eb[j1] * abs_r[(i, j2)] + eb[j2] * abs_r[(i, j1)];
            let tl = t[i2] * r[(i1, j)] - t[i1] * r[(i2, j)];
            if tl.abs() > ra + rb {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::shapes;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_PI_4;

    fn random_iso(rng: &mut ChaCha8Rng, span: f64) -> Iso3 {
        let t = Vec3::new(rng.random_range(-span..span), rng.random_range(-span..span), rng.random_range(-span..span));
        let r = Vec3::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
        Iso3::new(t, r)
    }

    #[test]
    fn unit_cube_obb() {
        let obb = compute_obb(&shapes::unit_cube());
        assert!((obb.center - Point3::new(0.5, 0.5, 0.5)).norm() < 1e-12);
        let mut h: Vec<f64> = obb.half_extents.iter().copied().collect();
        h.sort_by(f64::total_cmp);
        for v in h {
            assert!((v - 0.5).abs() < 1e-9);
        }
    }

    #[test]
    fn rotated_cube_keeps_extents() {
        let iso = Iso3::new(Vec3::zeros(), Vec3::z() * FRAC_PI_4);
        let obb = compute_obb(&shapes::unit_cube().transformed(&iso));
        for v in obb.half_extents.iter() {
            assert!((v - 0.5).abs() < 1e-9, "{:?}", obb.half_extents);
        }
        assert!((obb.center - iso * Point3::new(0.5, 0.5, 0.5)).norm() < 1e-9);
    }

    #[test]
    fn orthonormal_and_contains_vertices() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pts: Vec<Point3> = (0..100)
            .map(|_| Point3::new(rng.random_range(-1.0..2.0), rng.random_range(-0.2..0.1), rng.random_range(0.0..0.5)))
            .collect();
        let obb = Obb::fit(&pts, pca_frame(&pts));
        let rtr = obb.rotation.transpose() * obb.rotation;
        assert!((rtr - Mat3::identity()).abs().max() < 1e-6);
        assert!(obb.rotation.determinant() > 0.0);
        for p in &pts {
            assert!(obb.contains(p, 1e-9));
        }
    }

    #[test]
    fn mesh_obb_contains_vertices_and_is_rigidly_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let meshes = [shapes::torus(0.5, 0.1, 16, 8), shapes::capsule(0.1, 0.6, 12, 3), shapes::icosphere(0.3, 1)];
        for m in &meshes {
            let obb = compute_obb(m);
            for p in m.vertices() {
                assert!(obb.contains(p, 1e-9));
            }
            let iso = random_iso(&mut rng, 2.0);
            let moved = compute_obb(&m.transformed(&iso));
            let expected = obb.transformed(&iso);
            for p in m.vertices() {
                assert!(expected.contains(&(iso * p), 1e-6));
                assert!(moved.contains(&(iso * p), 1e-9));
            }
        }
    }

    #[test]
    fn degenerate_flat_mesh_clamps_extent() {
        let flat = [Point3::new(0.0, 0.0, 0.0), Point3::new(1.0, 0.0, 0.0), Point3::new(0.0, 1.0, 0.0)];
        let obb = Obb::fit(&flat, pca_frame(&flat));
        assert!(obb.half_extents.min() >= MIN_HALF_EXTENT);
    }

    fn unit_box_at(c: Point3) -> Obb {
        Obb {
            center: c,
            half_extents: Vec3::repeat(0.5),
            rotation: Mat3::identity(),
        }
    }

    #[test]
    fn overlap_basic_cases() {
        let a = unit_box_at(Point3::origin());
        assert!(obb_overlap(&a, &a));
        assert!(!obb_overlap(&a, &unit_box_at(Point3::new(3.0, 0.0, 0.0))));
        // touching faces count as overlapping thanks to the inflation
        assert!(obb_overlap(&a, &unit_box_at(Point3::new(1.0, 0.0, 0.0))));
        assert!(!obb_overlap(&a, &unit_box_at(Point3::new(1.0 + 1e-5, 0.0, 0.0))));
    }

    #[test]
    fn overlap_is_exactly_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..2000 {
            let mk = |rng: &mut ChaCha8Rng| {
                let iso = random_iso(rng, 1.0);
                Obb {
                    center: Point3::from(iso.translation.vector),
                    half_extents: Vec3::new(rng.random_range(0.05..0.8), rng.random_range(0.05..0.8), rng.random_range(0.05..0.8)),
                    rotation: *iso.rotation.to_rotation_matrix().matrix(),
                }
            };
            let (a, b) = (mk(&mut rng), mk(&mut rng));
            assert_eq!(obb_overlap(&a, &b), obb_overlap(&b, &a));
        }
    }
}
