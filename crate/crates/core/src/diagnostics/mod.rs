//! Density estimates, error metrics, and empirical checks of the
//! random-batch Hamiltonian error rates.

mod histogram;
mod occupancy;
mod reference;
mod sweep;

pub use histogram::{bin_count, relative_error, BinFrequencies, BinnedMasses, DensityHistogram};
pub use occupancy::{mode_occupancy, RunningOccupancy};
pub use reference::{binned_masses, mean_field_reference, MeanFieldGrid, semicircle_cdf, semicircle_density, semicircle_reference};
pub use sweep::{
    fit_slope, fourth_moment_trace, hamiltonian_error_sweep, ErrorSweepResult, FourthMomentTrace, SlopeFit, SweepConfig,
    TestFunction,
};
