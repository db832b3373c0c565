//! Continuous collision detection with swept-sphere curves: B-spline fitting, curve
//! generation from trajectories, directed obstacle edge rays, and the swept query.

pub mod bspline;
pub mod curve;
pub mod fit;
pub mod orient;
pub mod swept;

pub use curve::{build_curve_scene, intersect_curve, CurveKind, SweptSphereCurve, FLATTEN_TOLERANCE};
pub use fit::{build_fit_operator, fit_control_points, SplineFitOperator};
pub use orient::{is_strongly_connected, orient_edges, strongly_connected_components, DirectedEdgeSet};
pub use swept::{detect_curves, detect_swept, detect_swept_detail, generate_swept_curves, SweptHit};
