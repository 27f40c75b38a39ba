//! Structured gain subspaces and sampled maps of the stabilizing set over them.

mod export;
mod grid;
mod instances;
mod paths;
mod subspace;

pub use grid::{
    count_components_product, label_components, sample_region, sample_region_with, RegionReport, SampleOptions,
    MAX_REGION_DIM, MIN_RESOLUTION,
};
pub use instances::{gen_instance, schur_2x2_endpoints, Instance, InstanceId, INSTANCE_NAMES};
pub use paths::{
    connect_convex_path_discrete, connect_shift_path, PathSample, StabilizingPath, ABSCISSA_SAMPLES, PATH_SAMPLES,
    SHIFT_MARGIN,
};
pub use subspace::GainSubspace;
