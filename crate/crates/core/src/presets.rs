//! The three reference problems used by the acceptance suite and the CLI.

use std::sync::Arc;

use crate::error::Result;
use crate::measure_space::{Density, StateSpace, TargetDensity};
use crate::mh_kernel::{MhKernel, ProposalFamily};

#[derive(Debug, Clone)]
pub struct Preset {
    pub name: &'static str,
    pub kernel: MhKernel,
    pub initial: Density,
}

/// Two points, counting measure, `π = (3/4, 1/4)`, uniform proposal,
/// started from the atom at point 0.
pub fn two_point() -> Result<Preset> {
    let space = Arc::new(StateSpace::counting(2)?);
    let target = TargetDensity::from_unnormalized(space.clone(), vec![0.75, 0.25])?;
    let kernel = MhKernel::build(&target, &ProposalFamily::uniform(space.clone()))?;
    Ok(Preset {
        name: "two-point",
        kernel,
        initial: Density::point_mass(space, 0)?,
    })
}

pub const GRID_LOWER: f64 = -6.0;
pub const GRID_UPPER: f64 = 6.0;
pub const GRID_CELLS: usize = 120;
pub const GRID_WIDTH: f64 = 1.0;
pub const GRID_START: usize = 60;

pub fn gaussian(x: f64, mean: f64, sd: f64) -> f64 {
    let z = (x - mean) / sd;
    (-0.5 * z * z).exp() / (sd * (2.0 * std::f64::consts::PI).sqrt())
}

/// Standard normal target on a 120-cell grid over `[-6, 6]` with a Gaussian
/// random-walk proposal of unit width, started from the cell just right of 0.
pub fn grid_gaussian_rw() -> Result<Preset> {
    let space = Arc::new(StateSpace::grid(GRID_LOWER, GRID_UPPER, GRID_CELLS)?);
    let values = (0..space.len())
        .map(|i| gaussian(space.coordinate(i), 0.0, 1.0))
        .collect();
    let target = TargetDensity::from_unnormalized(space.clone(), values)?;
    let proposal = ProposalFamily::random_walk(space.clone(), GRID_WIDTH)?;
    let kernel = MhKernel::build(&target, &proposal)?;
    Ok(Preset {
        name: "grid-gaussian-rw",
        kernel,
        initial: Density::point_mass(space, GRID_START)?,
    })
}

/// Four points in two blocks that the proposal never connects.
pub fn disconnected_blocks() -> Result<Preset> {
    let space = Arc::new(StateSpace::counting(4)?);
    let target = TargetDensity::new(Density::uniform(space.clone())?)?;
    let proposal = ProposalFamily::block_diagonal(space.clone(), 2)?;
    let kernel = MhKernel::build(&target, &proposal)?;
    Ok(Preset {
        name: "disconnected-negative-control",
        kernel,
        initial: Density::point_mass(space, 0)?,
    })
}

pub fn by_name(name: &str) -> Option<Result<Preset>> {
    match name {
        "two-point" => Some(two_point()),
        "grid-gaussian-rw" => Some(grid_gaussian_rw()),
        "disconnected-negative-control" => Some(disconnected_blocks()),
        _ => None,
    }
}

pub const NAMES: [&str; 3] = [
    "two-point",
    "grid-gaussian-rw",
    "disconnected-negative-control",
];
