//! Ray-traced collision detection for articulated robots: discrete-pose mesh checks,
//! swept-sphere continuous checks, and voxel coverage metrics.

pub mod assets;
pub mod ccd;
pub mod dcd;
pub mod error;
pub mod geometry;
pub mod kinematics;
pub mod mesh;
pub mod rt;
pub mod volumetry;

pub use error::{Error, Result};
