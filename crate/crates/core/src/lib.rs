//! Spectral-Galerkin solvers for the heat equation on (0,1) with Dirichlet
//! boundary conditions, driven by a fractional Brownian signal:
//!
//! ```text
//! dy_t = Δy_t dt + Σ_i f_i(y_t) dx^i_t,   y_0 = ψ.
//! ```
//!
//! The crate is organized bottom-up:
//!
//! * [`spectral`]: eigenbasis, Sobolev norms, projection, semigroup, sine transforms.
//! * [`driver`]: fBm sampling, interpolation, Lévy areas, Hölder diagnostics.
//! * [`kernels`]: exponential-integrator weights for piecewise-linear drivers.
//! * [`schemes`]: the Euler and Milstein iterations.
//! * [`lab`]: reference solutions, error curves and rate fits.
//! * [`cli`]: configuration files and the batch commands behind the binary.

pub mod cli;
pub mod driver;
pub mod error;
pub mod io;
pub mod kernels;
pub mod lab;
pub mod schemes;
pub mod spectral;

pub use driver::{
    approximation_errors, holder_norm, interpolate, levy_area_linear, sample_fbm,
    sample_fbm_dyadic, DriverPath, FbmSampler, LevyArea, RoughnessReport,
};
pub use error::{Error, Result};
pub use kernels::{weight1, weight2, KernelWeights};
pub use schemes::{
    euler_run, eval_milstein_product, eval_nonlinearity, milstein_run, Nonlinearity, Scheme,
    SchemeConfig, Trajectory,
};
pub use spectral::{
    grid_to_spectral, project, semigroup_apply, sobolev_norm, spectral_to_grid, Eigensystem,
    GridFunction, SpectralState,
};
