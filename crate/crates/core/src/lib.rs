//! Exact Metropolis–Hastings kernels on finite and discretized state spaces.
//!
//! The crate builds the Metropolis–Hastings transition kernel of a strictly
//! positive target and a proposal family, evolves densities under it, studies
//! it as an operator on `L²(π)`, and runs the sampling chain itself. Every
//! convergence statement about reversible kernels (contraction,
//! self-adjointness, positivity of even powers, strong and total-variation
//! convergence, the truncation argument) is exposed as a check that returns
//! the quantities on both sides of the inequality.
//!
//! ```
//! use std::sync::Arc;
//! use mhlab::measure_space::{Density, StateSpace, TargetDensity};
//! use mhlab::mh_kernel::{MhKernel, ProposalFamily};
//! use mhlab::convergence_lab::tv_trace;
//!
//! let space = Arc::new(StateSpace::counting(2).unwrap());
//! let target = TargetDensity::from_unnormalized(space.clone(), vec![0.75, 0.25]).unwrap();
//! let kernel = MhKernel::build(&target, &ProposalFamily::uniform(space.clone())).unwrap();
//! let start = Density::point_mass(space, 0).unwrap();
//! let report = tv_trace(&start, &kernel, 10).unwrap();
//! assert!((report.records[3].tv - 0.25 / 27.0).abs() < 1e-12);
//! ```

pub mod chain_sampler;
pub mod convergence_lab;
pub mod error;
pub mod instances;
pub mod measure_space;
pub mod mh_kernel;
pub mod presets;
pub mod spectral_ops;
pub mod tolerances;

pub use error::{Error, Result};
