//! Numerical studies of the vanishing-diffusivity and vanishing-ν limits,
//! Gevrey-radius tracking and attractor sampling.

mod attractor;
mod gevrey;
mod sweep;

pub use attractor::{
    absorbing_horizon, absorbing_probe, attractor_sample, nu_sweep_attractor, semidistance,
    AbsorbingProbeRow, AttractorCloud, AttractorPlan, CloudNorm, NuSweepResult, NuSweepRow,
};
pub use gevrey::{gevrey_radius_track, GevreyTrack, GevreyTrackPlan, GevreyTrackRow};
pub use sweep::{
    kappa_sweep, validate_parameter_list, NormKind, NormTrend, SweepFailure, SweepPlan, SweepResult,
    SweepRow,
};
