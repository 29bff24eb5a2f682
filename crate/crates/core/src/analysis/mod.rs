//! Phase-plane and bifurcation analysis of the planar activity system.

mod attractors;
mod critical;
mod fixed_points;
pub mod lyapunov;
mod profile;
mod region_map;
pub mod timeseries;

pub use attractors::{
    detect_attractors, initial_conditions, Attractor, AttractorKind, AttractorReport, CycleInfo,
    DetectionSettings, InitGrid,
};
pub use critical::{nullcline_overlap_metric, pitchfork_boundary_wee, saddlenode_wee, Tangency};
pub use fixed_points::{find_fixed_points, FixedPoint, FIXED_POINT_RESIDUAL};
pub use profile::{covariance_profile, ProfileLine, ProfilePoint, ProfileSettings};
pub use region_map::{
    full_base, reduced_base, scan_region_map, Axis, BifurcationMap, RegionLabel, ScanParameter,
    MAX_UNCLASSIFIED_FRACTION,
};

use crate::dynamics::DynamicsError;

#[derive(Debug, thiserror::Error)]
pub enum AnalysisError {
    #[error("no nullcline tangency for w_ei={w_ei}, w_ii={w_ii}, w_ie={w_ie}, T={t}")]
    NoTangency { w_ei: f64, w_ii: f64, w_ie: f64, t: f64 },
    #[error("not applicable: {0}")]
    NotApplicable(String),
    #[error("{unclassified} of {cells} cells unclassified (limit 5%)")]
    TooManyUnclassified {
        unclassified: usize,
        cells: usize,
        map: Box<BifurcationMap>,
    },
    #[error("invalid scan: {0}")]
    InvalidScan(String),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
}
