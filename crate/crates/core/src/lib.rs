//! Invariant metrics for volume-preserving maps.
//!
//! Fields of unit-determinant SPD matrices on a grid form a nonpositively curved
//! space `(X, delta)` on which volume-preserving maps act by pullback isometries.
//! Ergodic means of a bounded orbit converge to a metric the map preserves.

// `!(x > 0.0)` is how NaN gets rejected alongside nonpositive values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ergodic;
pub mod error;
pub mod field;
pub mod linalg;
pub mod npc;
pub mod sampling;
mod search;
pub mod space;
pub mod spd;
pub mod volumorphism;

pub use ergodic::{
    distance_convexity_probe, fixed_point_solve, hull_sampler, mean_sequence, orbit,
    orbit_diameter, weak_convergence_probe, MeanRunReport, SolverOptions, Verdict,
};
pub use error::{Error, Result};
pub use field::io::{load_field, read_field, save_field, write_field};
pub use field::{
    field_dist, field_dist_sq, field_exp, field_geodesic, field_log, field_mean, field_mean_with,
    project_field_to_geodesic, FieldGeodesic, MeasureGrid, MetricField, TangentField,
};
pub use linalg::Mat;
pub use npc::{Property, PropertyReport, Witness};
pub use space::{FieldSpace, GeodesicSpace, MatrixSpace};
pub use spd::{
    dist, dist_sq, exp_map, geodesic, karcher_mean, karcher_mean_with, log_map,
    project_to_geodesic, KarcherOptions, KarcherOutcome, SpdGeodesic, SpdMatrix, TangentSym,
};
pub use volumorphism::{
    isometry_check, make_torus_automorphism, make_translation, pullback, VolumorphismMap,
};
