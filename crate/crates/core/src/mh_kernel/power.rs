use nalgebra::DMatrix;

use super::{KernelId, MhKernel};
use crate::error::{Error, Result};
use crate::measure_space::TargetDensity;

/// `n`-step kernel with the rejection atoms folded in.
///
/// Stored as the row-stochastic matrix of one-step probabilities raised to
/// the `order`-th power; order 0 is the identity (a pure atom).
#[derive(Debug, Clone, PartialEq)]
pub struct KernelPower {
    base: KernelId,
    order: usize,
    matrix: DMatrix<f64>,
}

impl KernelPower {
    pub fn identity(k: &MhKernel) -> Self {
        Self {
            base: k.id(),
            order: 0,
            matrix: DMatrix::identity(k.len(), k.len()),
        }
    }

    /// Built by `n` successive one-step compositions.
    pub fn of(k: &MhKernel, n: usize) -> Self {
        let step = k.folded_matrix();
        let mut matrix = DMatrix::identity(k.len(), k.len());
        for _ in 0..n {
            matrix = &matrix * &step;
        }
        Self {
            base: k.id(),
            order: n,
            matrix,
        }
    }

    pub fn base(&self) -> KernelId {
        self.base
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Probability of `from → to` in `order` steps.
    pub fn probability(&self, from: usize, to: usize) -> f64 {
        self.matrix[(from, to)]
    }

    /// Largest `|π(x)κ_n(x→x') - π(x')κ_n(x'→x)|` for `x ≠ x'`, with
    /// `κ_n(x→x') = P_n(x,x') / λ(x')` off the diagonal.
    pub fn detailed_balance_residual(&self, target: &TargetDensity) -> f64 {
        let pi = target.values();
        let w = target.space().weights();
        let n = pi.len();
        let mut worst: f64 = 0.0;
        for x in 0..n {
            for y in (x + 1)..n {
                let fwd = pi[x] * self.matrix[(x, y)] / w[y];
                let back = pi[y] * self.matrix[(y, x)] / w[x];
                worst = worst.max((fwd - back).abs());
            }
        }
        worst
    }

    /// Largest `|Σ_x π(x)λ(x)P_n(x,x') / λ(x') - π(x')|`.
    pub fn stationarity_residual(&self, target: &TargetDensity) -> f64 {
        let pi = target.values();
        let w = target.space().weights();
        let n = pi.len();
        (0..n)
            .map(|y| {
                let inflow: f64 = (0..n).map(|x| pi[x] * w[x] * self.matrix[(x, y)]).sum();
                (inflow / w[y] - pi[y]).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Largest deviation of a row sum from one.
    pub fn row_sum_residual(&self) -> f64 {
        self.matrix
            .row_iter()
            .map(|r| (r.sum() - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// Chapman–Kolmogorov composition: order `m + n` from orders `m` and `n`.
pub fn compose(a: &KernelPower, b: &KernelPower) -> Result<KernelPower> {
    if a.base != b.base {
        return Err(Error::MismatchedKernels {
            left: a.base.to_string(),
            right: b.base.to_string(),
        });
    }
    Ok(KernelPower {
        base: a.base,
        order: a.order + b.order,
        matrix: &a.matrix * &b.matrix,
    })
}

/// `n`-fold composition of the sub-kernel alone, as a density in the second
/// argument: `κ̊_n(x→x') = Σ_z κ̊_{n-1}(x→z)κ̊(z→x')λ(z)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubKernelPower {
    order: usize,
    values: DMatrix<f64>,
    weights: Vec<f64>,
}

impl SubKernelPower {
    pub fn of(k: &MhKernel, n: usize) -> Self {
        assert!(n >= 1, "sub-kernel powers start at order 1");
        let mut power = Self {
            order: 1,
            values: k.sub_kernel_matrix().clone(),
            weights: k.weights().to_vec(),
        };
        for _ in 1..n {
            power = power.then(k);
        }
        power
    }

    /// One more composition with the base sub-kernel.
    pub fn then(&self, k: &MhKernel) -> Self {
        let scaled = DMatrix::from_fn(self.values.nrows(), self.values.ncols(), |i, j| {
            self.values[(i, j)] * self.weights[j]
        });
        Self {
            order: self.order + 1,
            values: scaled * k.sub_kernel_matrix(),
            weights: self.weights.clone(),
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn entry(&self, from: usize, to: usize) -> f64 {
        self.values[(from, to)]
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn min_entry(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn is_strictly_positive(&self) -> bool {
        self.values.iter().all(|v| *v > 0.0)
    }

    /// Largest `|π(x)κ̊_n(x→x') - π(x')κ̊_n(x'→x)|`.
    pub fn symmetry_residual(&self, target: &TargetDensity) -> f64 {
        let pi = target.values();
        let n = pi.len();
        let mut worst: f64 = 0.0;
        for x in 0..n {
            for y in (x + 1)..n {
                let r = (pi[x] * self.values[(x, y)] - pi[y] * self.values[(y, x)]).abs();
                worst = worst.max(r);
            }
        }
        worst
    }
}
