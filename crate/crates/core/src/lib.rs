//! Slice-matching for discrete probability measures.
//!
//! The crate provides exact one-dimensional optimal transport, single-slice and
//! matrix-slice matching maps `T_{σ,μ;P}`, the slice-matching operator
//! `U(σ,μ,P) = (T_{σ,μ;P})♯σ`, the iterative slice-matching scheme, exact and
//! sliced Wasserstein distances, and closed-form affine registration.
//!
//! All measures are finite weighted point clouds ([`DiscreteMeasure`]).

pub mod distances;
mod error;
pub mod io;
pub mod matching;
pub mod measure;
pub mod ot1d;
pub mod registration;
pub mod slicing;

pub use distances::{haar_sliced_expectation, sw2, w2_exact, w2_exact_with_cap, McEstimate, Sw2Estimate};
pub use error::{Error, Result};
pub use matching::{
    apply_operator, compatible_residual, iterate, map_distance, matrix_slice_map, single_slice_map,
    sliced_residual, CompatibleMap, IterateOptions, IterationRecord, IterationTrace, MatrixSliceMap,
    PiecewiseLinear, Sampler, SingleSliceMap, StepRule, StepSchedule,
};
pub use measure::{Direction, DiscreteMeasure, FnMap, IntensityGrid, Moments, PointMap};
pub use ot1d::{cdf, ot_map_1d, quantile, w2_1d, SliceMap1D};
pub use registration::{
    haar_mean_scale_shift, register_axis_scaling, register_scale_shift, register_translation,
    registration_gap, AxisDiagnostics, AxisScaling, DistanceKind, HaarScaleShiftComparison, RegisteredMap,
    RegistrationGap, RegistrationReport, ScaleShift, Sw2Config,
};
pub use slicing::{sample_direction, sample_haar_orthogonal, stream_rng, validate_orthogonal, OrthoMatrix, RngSeed};
