use super::bspline::{bezier_segments, clamped_uniform_knots, evaluate, flatten_bezier};
use crate::error::{Error, Result};
use crate::geometry::{Aabb, Point3};
use crate::rt::{Capsule, CurveScene, Hit, Ray};

/// Flattening tolerance for spline curves, meters.
pub const FLATTEN_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CurveKind {
    PiecewiseLinear,
    QuadraticBSpline,
    CubicBSpline,
}

impl CurveKind {
    pub fn degree(&self) -> usize {
        match self {
            CurveKind::PiecewiseLinear => 1,
            CurveKind::QuadraticBSpline => 2,
            CurveKind::CubicBSpline => 3,
        }
    }
}

/// A sphere of constant radius swept along a path (polyline or clamped B-spline).
#[derive(Debug, Clone, PartialEq)]
pub struct SweptSphereCurve {
    pub kind: CurveKind,
    pub control: Vec<Point3>,
    pub radius: f64,
}

impl SweptSphereCurve {
    pub fn new(kind: CurveKind, control: Vec<Point3>, radius: f64) -> Result<SweptSphereCurve> {
        let need = match kind {
            CurveKind::PiecewiseLinear => 2,
            k => k.degree() + 1,
        };
        if control.len() < need {
            return Err(Error::InvalidArgument(format!(
                "{kind:?} curve needs at least {need} control points, got {}",
                control.len()
            )));
        }
        if !(radius > 0.0) {
            return Err(Error::InvalidArgument(format!("curve radius must be positive, got {radius}")));
        }
        Ok(SweptSphereCurve { kind, control, radius })
    }

    pub fn knots(&self) -> Vec<f64> {
        clamped_uniform_knots(self.control.len(), self.kind.degree())
    }

    /// Path point at `u ∈ [0, 1]`.
    pub fn point(&self, u: f64) -> Point3 {
        evaluate(&self.control, &self.knots(), self.kind.degree(), u.clamp(0.0, 1.0))
    }

    pub fn start(&self) -> Point3 {
        self.control[0]
    }

    pub fn end(&self) -> Point3 {
        self.control[self.control.len() - 1]
    }

    /// Polyline within `tolerance` of the path (exact for piecewise-linear curves).
    pub fn polyline(&self, tolerance: f64) -> Vec<Point3> {
        if self.kind == CurveKind::PiecewiseLinear {
            return self.control.clone();
        }
        let p = self.kind.degree();
        let mut out = Vec::new();
        for seg in bezier_segments(&self.control, &self.knots(), p) {
            flatten_bezier(&seg, tolerance, &mut out);
        }
        out
    }

    /// Capsule chain covering the swept volume, one capsule per polyline segment.
    pub fn capsules(&self, tolerance: f64) -> Vec<Capsule> {
        let poly = self.polyline(tolerance);
        if poly.len() == 1 {
            return vec![Capsule::new(poly[0], poly[0], self.radius)];
        }
        poly.windows(2).map(|w| Capsule::new(w[0], w[1], self.radius)).collect()
    }

    pub fn aabb(&self) -> Aabb {
        // control polygon hull encloses the path
        Aabb::from_points(self.control.iter()).inflate(self.radius)
    }

    /// Distance from `p` to the (flattened) path.
    pub fn distance_to_path(&self, p: &Point3) -> f64 {
        self.capsules(FLATTEN_TOLERANCE)
            .iter()
            .map(|c| c.distance_to_axis(p))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn contains(&self, p: &Point3) -> bool {
        self.distance_to_path(p) <= self.radius
    }
}

/// Entering hit of a ray segment on one swept-sphere curve.
pub fn intersect_curve(ray: &Ray, curve: &SweptSphereCurve) -> Option<Hit> {
    let caps = curve.capsules(FLATTEN_TOLERANCE);
    let owners = vec![0; caps.len()];
    let scene = CurveScene::build(caps, owners).ok()?;
    scene.intersect_any(ray)
}

/// One BVH over the flattened capsules of all curves; hits report the curve index.
pub fn build_curve_scene(curves: &[SweptSphereCurve]) -> Result<CurveScene> {
    let mut caps = Vec::new();
    let mut owners = Vec::new();
    for (i, c) in curves.iter().enumerate() {
        let cs = c.capsules(FLATTEN_TOLERANCE);
        owners.extend(std::iter::repeat_n(i as u32, cs.len()));
        caps.extend(cs);
    }
    CurveScene::build(caps, owners)
}
