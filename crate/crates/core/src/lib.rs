//! Numerical laboratory for fully nonlinear curvature flows `dX/dt = -F nu`
//! of closed plane curves and axisymmetric surfaces.
//!
//! The crate is organised bottom-up:
//!
//! * [`speed`]: homogeneous degree-one speeds `F(kappa)` and their calculus.
//! * [`geometry`]: discrete curves and surfaces of revolution, with normals,
//!   principal curvatures, resampling and embeddedness checks.
//! * [`flow`]: explicit time stepping under a chosen speed.
//! * [`noncollapse`]: the two-point function `Z`, interior and exterior sphere
//!   curvatures, and the ratio series along a flow.
//! * [`containment`]: simultaneous evolution of two bodies and their distance.
//! * [`linearized`]: residuals of known solutions of the linearized flow.

// `!(x > 0.0)` is used deliberately so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod containment;
pub mod error;
pub mod flow;
pub mod geometry;
pub mod linearized;
pub mod noncollapse;
pub mod speed;
pub mod vec;

pub use containment::{
    min_distance, run_pair, DistanceRow, DistanceSeries, MinDistance, OrientationCase,
    PairSnapshot, PairTrajectory,
};
pub use error::{Error, Result};
pub use flow::{cfl_dt, run, step, FlowConfig, FlowTrajectory, Snapshot, Termination};
pub use geometry::{
    AxisymmetricProfile, Backend, DiscreteHypersurface, PlaneCurve, PrincipalCurvatures,
    SurfaceSample, Topology,
};
pub use linearized::{
    convergence_order, flow_time_derivative, lin_operator, solution_residual, FieldLabel,
    ResidualReport, ResidualRow, ScalarField,
};
pub use noncollapse::{
    chordal_z, circum_inradius_ratio, circumradius, exterior_sphere_curvature, inradius,
    interior_sphere_curvature, ratio_series, tangency_residual, AnalyzerConfig, SeriesRecord,
    SeriesRow, SphereCurvatureField, Witness,
};
pub use speed::{Cone, Convexity, SpeedCertificate, SpeedEvaluation, SpeedFunction, SpeedKind};
