//! Discretized measure spaces and densities with respect to the reference
//! measure.
//!
//! A [`StateSpace`] is a finite list of atoms, each carrying a strictly
//! positive weight (its reference mass). Continuous problems enter through
//! [`StateSpace::grid`], a midpoint discretization of an interval; the
//! discretized problem is then studied in its own right.

use std::ops::Deref;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::tolerances;

/// Finite set of points with positive reference weights.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StateSpace {
    weights: Vec<f64>,
    coords: Option<Vec<f64>>,
}

impl StateSpace {
    /// Space with the given per-point weights.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        if weights.len() < 2 {
            return Err(Error::InvalidSpace(format!(
                "need at least 2 points, got {}",
                weights.len()
            )));
        }
        if let Some((i, w)) = weights
            .iter()
            .enumerate()
            .find(|(_, w)| !(w.is_finite() && **w > 0.0))
        {
            return Err(Error::InvalidSpace(format!(
                "weight {w} at point {i} is not strictly positive and finite"
            )));
        }
        Ok(Self {
            weights,
            coords: None,
        })
    }

    /// Counting measure on `n` atoms.
    pub fn counting(n: usize) -> Result<Self> {
        Self::from_weights(vec![1.0; n])
    }

    /// Midpoint discretization of `[lower, upper]` into `n_cells` equal cells.
    pub fn grid(lower: f64, upper: f64, n_cells: usize) -> Result<Self> {
        if !(lower.is_finite() && upper.is_finite()) {
            return Err(Error::InvalidSpace(format!(
                "grid bounds must be finite, got [{lower}, {upper}]"
            )));
        }
        if lower >= upper {
            return Err(Error::InvalidSpace(format!(
                "grid needs lower < upper, got [{lower}, {upper}]"
            )));
        }
        if n_cells < 2 {
            return Err(Error::InvalidSpace(format!(
                "grid needs at least 2 cells, got {n_cells}"
            )));
        }
        let width = (upper - lower) / n_cells as f64;
        let coords = (0..n_cells)
            .map(|i| lower + width * (i as f64 + 0.5))
            .collect();
        Self::from_weights(vec![width; n_cells])?.with_coords(coords)
    }

    /// Attach per-point coordinates.
    pub fn with_coords(mut self, coords: Vec<f64>) -> Result<Self> {
        if coords.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                got: coords.len(),
            });
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidSpace("coordinates must be finite".into()));
        }
        self.coords = Some(coords);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    /// Always false; a valid space has at least two points.
    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn coords(&self) -> Option<&[f64]> {
        self.coords.as_deref()
    }

    /// Coordinate of point `i`, falling back to the index itself.
    pub fn coordinate(&self, i: usize) -> f64 {
        match &self.coords {
            Some(c) => c[i],
            None => i as f64,
        }
    }

    /// Index of the point closest to `x`; ties go to the higher index.
    pub fn nearest_point(&self, x: f64) -> usize {
        let mut best = 0;
        let mut best_dist = f64::INFINITY;
        for i in 0..self.len() {
            let d = (self.coordinate(i) - x).abs();
            if d <= best_dist {
                best = i;
                best_dist = d;
            }
        }
        best
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Sum of `values[i] * weight[i]`.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.len());
        values.iter().zip(&self.weights).map(|(v, w)| v * w).sum()
    }

    /// L¹ norm of a signed function.
    pub fn l1_norm(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.len());
        values
            .iter()
            .zip(&self.weights)
            .map(|(v, w)| v.abs() * w)
            .sum()
    }

    /// L¹ distance between two signed functions.
    pub fn l1_distance(&self, a: &[f64], b: &[f64]) -> f64 {
        debug_assert_eq!(a.len(), self.len());
        debug_assert_eq!(b.len(), self.len());
        a.iter()
            .zip(b)
            .zip(&self.weights)
            .map(|((x, y), w)| (x - y).abs() * w)
            .sum()
    }

    pub(crate) fn check_len(&self, values: &[f64]) -> Result<()> {
        if values.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                got: values.len(),
            });
        }
        Ok(())
    }
}

/// Midpoint grid on `[lower, upper]`.
pub fn build_grid_space(lower: f64, upper: f64, n_cells: usize) -> Result<StateSpace> {
    StateSpace::grid(lower, upper, n_cells)
}

/// Two spaces are the same when they share the allocation or all weights.
pub fn same_space(a: &Arc<StateSpace>, b: &Arc<StateSpace>) -> bool {
    Arc::ptr_eq(a, b) || a.weights == b.weights
}

/// Nonnegative function on a state space, a density with respect to its weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Density {
    space: Arc<StateSpace>,
    values: Vec<f64>,
}

impl Density {
    pub fn new(space: Arc<StateSpace>, values: Vec<f64>) -> Result<Self> {
        space.check_len(&values)?;
        if let Some((i, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v >= 0.0))
        {
            return Err(Error::InvalidDensity(format!(
                "value {v} at point {i} is negative or non-finite"
            )));
        }
        Ok(Self { space, values })
    }

    /// Density that must integrate to one.
    pub fn probability(space: Arc<StateSpace>, values: Vec<f64>) -> Result<Self> {
        let d = Self::new(space, values)?;
        d.ensure_probability()?;
        Ok(d)
    }

    /// Point mass at `index`: value `1 / weight` there, zero elsewhere.
    pub fn point_mass(space: Arc<StateSpace>, index: usize) -> Result<Self> {
        if index >= space.len() {
            return Err(Error::InvalidDensity(format!(
                "point {index} is outside a space of {} points",
                space.len()
            )));
        }
        let mut values = vec![0.0; space.len()];
        values[index] = 1.0 / space.weight(index);
        Self::new(space, values)
    }

    /// Uniform probability density.
    pub fn uniform(space: Arc<StateSpace>) -> Result<Self> {
        let v = 1.0 / space.total_mass();
        let values = vec![v; space.len()];
        Self::new(space, values)
    }

    /// Evaluate `f` at every coordinate.
    pub fn from_fn(space: Arc<StateSpace>, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = (0..space.len()).map(|i| f(space.coordinate(i))).collect();
        Self::new(space, values)
    }

    pub fn space(&self) -> &Arc<StateSpace> {
        &self.space
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn integrate(&self) -> f64 {
        self.space.integrate(&self.values)
    }

    pub fn is_probability(&self) -> bool {
        (self.integrate() - 1.0).abs() <= tolerances::NORMALIZATION
    }

    pub fn ensure_probability(&self) -> Result<()> {
        let mass = self.integrate();
        if (mass - 1.0).abs() > tolerances::NORMALIZATION {
            return Err(Error::NotNormalized {
                mass,
                tolerance: tolerances::NORMALIZATION,
            });
        }
        Ok(())
    }

    /// Rescale to unit mass.
    pub fn normalize(&self) -> Result<Self> {
        let mass = self.integrate();
        if !(mass.is_finite() && mass > 0.0) {
            return Err(Error::DegenerateMass(mass));
        }
        let values = self.values.iter().map(|v| v / mass).collect();
        Ok(Self {
            space: self.space.clone(),
            values,
        })
    }

    pub fn same_space(&self, other: &Density) -> bool {
        same_space(&self.space, &other.space)
    }

    pub fn l1_distance(&self, other: &Density) -> Result<f64> {
        if !self.same_space(other) {
            return Err(Error::SpaceMismatch);
        }
        Ok(self.space.l1_distance(&self.values, &other.values))
    }

    /// Half the L¹ distance.
    pub fn tv_distance(&self, other: &Density) -> Result<f64> {
        Ok(0.5 * self.l1_distance(other)?)
    }
}

pub fn integrate(f: &Density) -> f64 {
    f.integrate()
}

pub fn normalize(f: &Density) -> Result<Density> {
    f.normalize()
}

pub fn tv_distance(f: &Density, g: &Density) -> Result<f64> {
    f.tv_distance(g)
}

/// L¹ norm of signed values on `space`.
pub fn l1_norm(space: &StateSpace, values: &[f64]) -> Result<f64> {
    space.check_len(values)?;
    Ok(space.l1_norm(values))
}

/// Strictly positive probability density.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetDensity(Density);

impl TargetDensity {
    pub fn new(density: Density) -> Result<Self> {
        if let Some((index, &value)) = density
            .values()
            .iter()
            .enumerate()
            .find(|(_, v)| **v <= 0.0)
        {
            return Err(Error::NonPositiveTarget { index, value });
        }
        density.ensure_probability()?;
        Ok(Self(density))
    }

    /// Normalize positive values into a target.
    pub fn from_unnormalized(space: Arc<StateSpace>, values: Vec<f64>) -> Result<Self> {
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| **v <= 0.0) {
            return Err(Error::NonPositiveTarget { index, value });
        }
        Self::new(Density::new(space, values)?.normalize()?)
    }

    pub fn density(&self) -> &Density {
        &self.0
    }

    /// Pointwise ratio `f / target`.
    pub fn ratio(&self, f: &[f64]) -> Vec<f64> {
        f.iter().zip(self.values()).map(|(a, p)| a / p).collect()
    }

    /// Pointwise product `target * h`.
    pub fn times(&self, h: &[f64]) -> Vec<f64> {
        h.iter().zip(self.values()).map(|(a, p)| a * p).collect()
    }
}

impl Deref for TargetDensity {
    type Target = Density;

    fn deref(&self) -> &Density {
        &self.0
    }
}
