use std::sync::Arc;

use crate::error::{Error, Result};
use crate::measure_space::{same_space, StateSpace, TargetDensity};
use crate::tolerances;

/// Conditional proposal densities `q(x'|x)`, stored row-major by `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProposalFamily {
    space: Arc<StateSpace>,
    q: Vec<f64>,
}

impl ProposalFamily {
    /// Validates that each row integrates to one within the proposal tolerance,
    /// then rescales the rows so the integral is one to rounding.
    pub fn from_rows(space: Arc<StateSpace>, q: Vec<f64>) -> Result<Self> {
        let n = space.len();
        if q.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                got: q.len(),
            });
        }
        let mut q = q;
        for row in 0..n {
            let slice = &mut q[row * n..(row + 1) * n];
            if let Some(v) = slice.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
                return Err(Error::InvalidProposal {
                    row,
                    reason: format!("entry {v} is negative or non-finite"),
                });
            }
            let mass = space.integrate(slice);
            if (mass - 1.0).abs() > tolerances::PROPOSAL_ROW {
                return Err(Error::InvalidProposal {
                    row,
                    reason: format!("row integrates to {mass}, expected 1"),
                });
            }
            slice.iter_mut().for_each(|v| *v /= mass);
        }
        Ok(Self { space, q })
    }

    /// Rescales every row of nonnegative weights to a conditional density.
    pub fn from_unnormalized(space: Arc<StateSpace>, mut q: Vec<f64>) -> Result<Self> {
        let n = space.len();
        if q.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                got: q.len(),
            });
        }
        for row in 0..n {
            let slice = &mut q[row * n..(row + 1) * n];
            let mass = space.integrate(slice);
            if !(mass.is_finite() && mass > 0.0) || slice.iter().any(|v| *v < 0.0) {
                return Err(Error::InvalidProposal {
                    row,
                    reason: format!("row has invalid total mass {mass}"),
                });
            }
            slice.iter_mut().for_each(|v| *v /= mass);
        }
        Self::from_rows(space, q)
    }

    /// `q(x'|x) = 1 / λ(X)` for every pair.
    pub fn uniform(space: Arc<StateSpace>) -> Self {
        let n = space.len();
        let v = 1.0 / space.total_mass();
        Self {
            space,
            q: vec![v; n * n],
        }
    }

    /// Independence sampler, `q(x'|x) = π(x')`.
    pub fn independence(target: &TargetDensity) -> Self {
        let space = target.space().clone();
        let n = space.len();
        let mut q = Vec::with_capacity(n * n);
        for _ in 0..n {
            q.extend_from_slice(target.values());
        }
        Self { space, q }
    }

    /// Discretized Gaussian random walk with standard deviation `width`,
    /// each row renormalized over the space.
    pub fn random_walk(space: Arc<StateSpace>, width: f64) -> Result<Self> {
        if !(width.is_finite() && width > 0.0) {
            return Err(Error::InvalidProposal {
                row: 0,
                reason: format!("random-walk width must be positive, got {width}"),
            });
        }
        let n = space.len();
        let mut q = Vec::with_capacity(n * n);
        for i in 0..n {
            let xi = space.coordinate(i);
            for j in 0..n {
                let z = (space.coordinate(j) - xi) / width;
                q.push((-0.5 * z * z).exp());
            }
        }
        Self::from_unnormalized(space, q)
    }

    /// Uniform proposal restricted to `n_blocks` contiguous index blocks.
    /// Moves between blocks are impossible.
    pub fn block_diagonal(space: Arc<StateSpace>, n_blocks: usize) -> Result<Self> {
        let n = space.len();
        if n_blocks == 0 || n_blocks > n {
            return Err(Error::InvalidProposal {
                row: 0,
                reason: format!("cannot split {n} points into {n_blocks} blocks"),
            });
        }
        let block_of = |i: usize| i * n_blocks / n;
        let mut q = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                if block_of(i) == block_of(j) {
                    q[i * n + j] = 1.0;
                }
            }
        }
        Self::from_unnormalized(space, q)
    }

    pub fn space(&self) -> &Arc<StateSpace> {
        &self.space
    }

    pub fn len(&self) -> usize {
        self.space.len()
    }

    pub fn is_empty(&self) -> bool {
        self.space.is_empty()
    }

    /// `q(to | from)`.
    #[inline]
    pub fn density(&self, from: usize, to: usize) -> f64 {
        self.q[from * self.space.len() + to]
    }

    pub fn row(&self, from: usize) -> &[f64] {
        let n = self.space.len();
        &self.q[from * n..(from + 1) * n]
    }

    pub fn is_strictly_positive(&self) -> bool {
        self.q.iter().all(|v| *v > 0.0)
    }

    pub(crate) fn check_target(&self, target: &TargetDensity) -> Result<()> {
        if !same_space(&self.space, target.space()) {
            return Err(Error::SpaceMismatch);
        }
        Ok(())
    }
}
