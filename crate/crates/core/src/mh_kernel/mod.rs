//! Exact Metropolis–Hastings kernels on a finite state space.
//!
//! The kernel is kept in its split form: an absolutely continuous sub-kernel
//! `κ̊(x→x') = min(q(x'|x), π(x')/π(x)·q(x|x'))` (a density in `x'` with
//! respect to the space weights) plus a rejection atom of mass `φ(x)` sitting
//! on the diagonal. The row-stochastic "folded" matrix
//! `P = κ̊·diag(λ) + diag(φ)` is derived from the split on demand.

mod power;
mod proposal;

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::Serialize;
use sha2::{Digest, Sha256};

pub use power::{compose, KernelPower, SubKernelPower};
pub use proposal::ProposalFamily;

use crate::error::{Error, Result};
use crate::measure_space::{StateSpace, TargetDensity};
use crate::tolerances;

/// Acceptance probability of a move `from → to`.
///
/// Equals `min(1, π(to)q(from|to) / (π(from)q(to|from)))`, and exactly 1
/// when the denominator vanishes.
pub fn acceptance(target: &TargetDensity, q: &ProposalFamily, from: usize, to: usize) -> f64 {
    let pi = target.values();
    let denom = pi[from] * q.density(from, to);
    if denom == 0.0 {
        return 1.0;
    }
    let ratio = (pi[to] / pi[from]) * (q.density(to, from) / q.density(from, to));
    ratio.min(1.0)
}

/// Content fingerprint of a kernel, used to pair powers with their base.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct KernelId(u64);

impl KernelId {
    fn of(sub: &DMatrix<f64>, phi: &[f64], weights: &[f64]) -> Self {
        let mut h = Sha256::new();
        for v in sub.iter().chain(phi).chain(weights) {
            h.update(v.to_bits().to_le_bytes());
        }
        let digest = h.finalize();
        let mut head = [0u8; 8];
        head.copy_from_slice(&digest[..8]);
        Self(u64::from_be_bytes(head))
    }
}

impl fmt::Display for KernelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:016x}", self.0)
    }
}

/// Metropolis–Hastings kernel in sub-kernel + rejection-atom form.
#[derive(Debug, Clone)]
pub struct MhKernel {
    target: TargetDensity,
    proposal: ProposalFamily,
    sub: DMatrix<f64>,
    phi: Vec<f64>,
    id: KernelId,
}

impl MhKernel {
    /// Builds the kernel for target `π` and proposal `q`.
    ///
    /// The rejection mass is `1 - ∫κ̊(x→x')λ(dx')`, which closes every row
    /// exactly; a row whose sub-kernel mass exceeds one by more than the
    /// closure gate is reported as a malformed proposal.
    pub fn build(target: &TargetDensity, proposal: &ProposalFamily) -> Result<Self> {
        proposal.check_target(target)?;
        let n = target.len();
        let pi = target.values();
        let weights = target.space().weights();
        let mut sub = DMatrix::zeros(n, n);
        let mut phi = vec![0.0; n];
        for x in 0..n {
            let mut mass = 0.0;
            for y in 0..n {
                let k = proposal
                    .density(x, y)
                    .min((pi[y] / pi[x]) * proposal.density(y, x));
                sub[(x, y)] = k;
                mass += k * weights[y];
            }
            let residual = mass - 1.0;
            if residual > tolerances::ROW_CLOSURE_GATE {
                return Err(Error::RowClosure { row: x, residual });
            }
            phi[x] = (1.0 - mass).clamp(0.0, 1.0);
        }
        let id = KernelId::of(&sub, &phi, weights);
        Ok(Self {
            target: target.clone(),
            proposal: proposal.clone(),
            sub,
            phi,
            id,
        })
    }

    pub fn id(&self) -> KernelId {
        self.id
    }

    pub fn len(&self) -> usize {
        self.phi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phi.is_empty()
    }

    pub fn space(&self) -> &Arc<StateSpace> {
        self.target.space()
    }

    pub fn weights(&self) -> &[f64] {
        self.target.space().weights()
    }

    pub fn target(&self) -> &TargetDensity {
        &self.target
    }

    pub fn proposal(&self) -> &ProposalFamily {
        &self.proposal
    }

    /// `κ̊(from → to)`.
    #[inline]
    pub fn sub_kernel(&self, from: usize, to: usize) -> f64 {
        self.sub[(from, to)]
    }

    pub fn sub_kernel_matrix(&self) -> &DMatrix<f64> {
        &self.sub
    }

    /// Rejection mass `φ`.
    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    /// Probability of moving `from → to` in one step, atom included.
    pub fn transition_probability(&self, from: usize, to: usize) -> f64 {
        let p = self.sub[(from, to)] * self.weights()[to];
        if from == to {
            p + self.phi[from]
        } else {
            p
        }
    }

    /// Row-stochastic matrix `κ̊·diag(λ) + diag(φ)`.
    pub fn folded_matrix(&self) -> DMatrix<f64> {
        let n = self.len();
        DMatrix::from_fn(n, n, |i, j| self.transition_probability(i, j))
    }

    /// Largest `|Σ_x' κ̊(x→x')λ(x') + φ(x) - 1|` over rows.
    pub fn row_closure_residual(&self) -> f64 {
        let w = self.weights();
        (0..self.len())
            .map(|x| {
                let mass: f64 = (0..self.len()).map(|y| self.sub[(x, y)] * w[y]).sum();
                (mass + self.phi[x] - 1.0).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Largest `|π(x)κ̊(x→x') - π(x')κ̊(x'→x)|` over pairs `x ≠ x'`.
    pub fn detailed_balance_residual(&self) -> f64 {
        let pi = self.target.values();
        let n = self.len();
        let mut worst: f64 = 0.0;
        for x in 0..n {
            for y in (x + 1)..n {
                let r = (pi[x] * self.sub[(x, y)] - pi[y] * self.sub[(y, x)]).abs();
                worst = worst.max(r);
            }
        }
        worst
    }

    /// Largest deviation of `π(x)κ̊(x→x')` from `min(π(x)q(x'|x), π(x')q(x|x'))`.
    pub fn closed_form_residual(&self) -> f64 {
        let pi = self.target.values();
        let q = &self.proposal;
        let n = self.len();
        let mut worst: f64 = 0.0;
        for x in 0..n {
            for y in 0..n {
                if x == y {
                    continue;
                }
                let closed = (pi[x] * q.density(x, y)).min(pi[y] * q.density(y, x));
                worst = worst.max((pi[x] * self.sub[(x, y)] - closed).abs());
            }
        }
        worst
    }

    /// Largest `|π(x') - (Σ_x π(x)κ̊(x→x')λ(x) + φ(x')π(x'))|`.
    pub fn stationarity_residual(&self) -> f64 {
        let pi = self.target.values();
        let w = self.weights();
        let n = self.len();
        (0..n)
            .map(|y| {
                let inflow: f64 = (0..n).map(|x| pi[x] * self.sub[(x, y)] * w[x]).sum();
                (pi[y] - inflow - self.phi[y] * pi[y]).abs()
            })
            .fold(0.0, f64::max)
    }

    /// `φ(x) = ∫(1 - α(x,z))q(z|x)λ(dz)` evaluated directly from the
    /// acceptance probability, independent of the row-closure route.
    pub fn rejection_mass_by_integration(&self) -> Vec<f64> {
        let w = self.weights();
        let n = self.len();
        (0..n)
            .map(|x| {
                (0..n)
                    .map(|z| {
                        let a = acceptance(&self.target, &self.proposal, x, z);
                        (1.0 - a) * self.proposal.density(x, z) * w[z]
                    })
                    .sum()
            })
            .collect()
    }

    /// Sub-kernel composed with itself `n` times (atom excluded).
    pub fn subkernel_power(&self, n: usize) -> SubKernelPower {
        SubKernelPower::of(self, n)
    }

    /// Whether the `nu`-th sub-kernel power is strictly positive everywhere.
    pub fn satisfies_positivity(&self, nu: usize) -> bool {
        nu >= 1 && self.subkernel_power(nu).is_strictly_positive()
    }

    /// Smallest `nu <= max_nu` with a strictly positive sub-kernel power.
    pub fn first_positive_power(&self, max_nu: usize) -> Option<usize> {
        let mut power = self.subkernel_power(1);
        for nu in 1..=max_nu {
            if power.is_strictly_positive() {
                return Some(nu);
            }
            if nu < max_nu {
                power = power.then(self);
            }
        }
        None
    }

    /// Full `n`-step kernel.
    pub fn power(&self, n: usize) -> KernelPower {
        KernelPower::of(self, n)
    }
}

/// Report of [`check_detailed_balance`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DetailedBalanceReport {
    pub max_residual: f64,
    pub closed_form_residual: f64,
}

pub fn build_kernel(target: &TargetDensity, q: &ProposalFamily) -> Result<MhKernel> {
    MhKernel::build(target, q)
}

pub fn check_detailed_balance(k: &MhKernel) -> DetailedBalanceReport {
    DetailedBalanceReport {
        max_residual: k.detailed_balance_residual(),
        closed_form_residual: k.closed_form_residual(),
    }
}

pub fn stationarity_check(k: &MhKernel) -> f64 {
    k.stationarity_residual()
}

pub fn subkernel_power(k: &MhKernel, n: usize) -> SubKernelPower {
    k.subkernel_power(n)
}

pub fn check_positivity_condition(k: &MhKernel, nu: usize) -> bool {
    k.satisfies_positivity(nu)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure_space::Density;
    use approx::assert_abs_diff_eq;

    fn two_point() -> MhKernel {
        let space = Arc::new(StateSpace::counting(2).unwrap());
        let target = TargetDensity::from_unnormalized(space.clone(), vec![0.75, 0.25]).unwrap();
        MhKernel::build(&target, &ProposalFamily::uniform(space)).unwrap()
    }

    #[test]
    fn acceptance_two_point() {
        let k = two_point();
        assert_abs_diff_eq!(
            acceptance(k.target(), k.proposal(), 0, 1),
            1.0 / 3.0,
            epsilon = 1e-15
        );
        assert_eq!(acceptance(k.target(), k.proposal(), 1, 0), 1.0);
        assert_eq!(acceptance(k.target(), k.proposal(), 0, 0), 1.0);
    }

    #[test]
    fn acceptance_zero_denominator_branch() {
        let space = Arc::new(StateSpace::counting(3).unwrap());
        let target = TargetDensity::from_unnormalized(space.clone(), vec![1.0, 2.0, 3.0]).unwrap();
        let q = ProposalFamily::from_unnormalized(
            space,
            vec![1.0, 0.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0],
        )
        .unwrap();
        assert_eq!(acceptance(&target, &q, 0, 1), 1.0);
    }

    #[test]
    fn independence_proposal_always_accepts() {
        let space = Arc::new(StateSpace::from_weights(vec![0.5, 1.0, 2.0]).unwrap());
        let target = TargetDensity::from_unnormalized(space, vec![1.0, 3.0, 0.5]).unwrap();
        let q = ProposalFamily::independence(&target);
        let k = MhKernel::build(&target, &q).unwrap();
        for x in 0..3 {
            for y in 0..3 {
                assert_abs_diff_eq!(acceptance(&target, &q, x, y), 1.0, epsilon = 1e-15);
                assert_abs_diff_eq!(k.sub_kernel(x, y), target.values()[y], epsilon = 1e-15);
            }
            assert_abs_diff_eq!(k.phi()[x], 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn two_point_kernel_entries() {
        let k = two_point();
        let expected_sub = [[0.5, 1.0 / 6.0], [0.5, 0.5]];
        for x in 0..2 {
            for y in 0..2 {
                assert_abs_diff_eq!(k.sub_kernel(x, y), expected_sub[x][y], epsilon = 1e-15);
            }
        }
        assert_abs_diff_eq!(k.phi()[0], 1.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(k.phi()[1], 0.0, epsilon = 1e-15);
        let p = k.folded_matrix();
        let expected = [[5.0 / 6.0, 1.0 / 6.0], [0.5, 0.5]];
        for x in 0..2 {
            for y in 0..2 {
                assert_abs_diff_eq!(p[(x, y)], expected[x][y], epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn uniform_target_symmetric_proposal_accepts_everything() {
        let n = 5;
        let space = Arc::new(StateSpace::counting(n).unwrap());
        let target = TargetDensity::new(Density::uniform(space.clone()).unwrap()).unwrap();
        // circulant weights in the cyclic distance give a symmetric q
        let mut raw = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let d = (i + n - j) % n;
                raw[i * n + j] = 1.0 / (1.0 + d.min(n - d) as f64);
            }
        }
        let q = ProposalFamily::from_unnormalized(space, raw).unwrap();
        let k = MhKernel::build(&target, &q).unwrap();
        for x in 0..n {
            for y in 0..n {
                assert_abs_diff_eq!(q.density(x, y), q.density(y, x), epsilon = 1e-15);
                assert_abs_diff_eq!(k.sub_kernel(x, y), q.density(x, y), epsilon = 1e-15);
            }
            assert!(k.phi()[x] < 1e-12);
        }
        assert!(k.detailed_balance_residual() < 1e-15);
    }

    #[test]
    fn detailed_balance_two_point_is_exact() {
        let k = two_point();
        let pi = k.target().values();
        assert_abs_diff_eq!(pi[0] * k.sub_kernel(0, 1), 0.125, epsilon = 1e-15);
        assert_abs_diff_eq!(pi[1] * k.sub_kernel(1, 0), 0.125, epsilon = 1e-15);
        let report = check_detailed_balance(&k);
        assert!(report.max_residual < 1e-15);
        assert!(report.closed_form_residual < 1e-15);
    }

    #[test]
    fn two_point_is_stationary() {
        let k = two_point();
        assert!(stationarity_check(&k) < 1e-15);
        assert!(k.row_closure_residual() < 1e-15);
    }

    #[test]
    fn rejection_mass_routes_agree() {
        let k = two_point();
        let direct = k.rejection_mass_by_integration();
        for (a, b) in direct.iter().zip(k.phi()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn positivity_condition() {
        let k = two_point();
        assert!(check_positivity_condition(&k, 1));
        assert_eq!(k.first_positive_power(10), Some(1));

        let space = Arc::new(StateSpace::counting(4).unwrap());
        let target = TargetDensity::new(Density::uniform(space.clone()).unwrap()).unwrap();
        let blocks = ProposalFamily::block_diagonal(space, 2).unwrap();
        let k = MhKernel::build(&target, &blocks).unwrap();
        for nu in 1..=6 {
            assert!(!check_positivity_condition(&k, nu));
        }
        assert_eq!(k.first_positive_power(10), None);
    }

    #[test]
    fn build_rejects_mismatched_spaces() {
        let a = Arc::new(StateSpace::counting(2).unwrap());
        let b = Arc::new(StateSpace::counting(3).unwrap());
        let target = TargetDensity::new(Density::uniform(a).unwrap()).unwrap();
        let q = ProposalFamily::uniform(b);
        assert_eq!(
            MhKernel::build(&target, &q).unwrap_err(),
            Error::SpaceMismatch
        );
    }

    #[test]
    fn kernel_id_tracks_content() {
        assert_eq!(two_point().id(), two_point().id());
        let space = Arc::new(StateSpace::counting(2).unwrap());
        let target = TargetDensity::from_unnormalized(space.clone(), vec![0.6, 0.4]).unwrap();
        let other = MhKernel::build(&target, &ProposalFamily::uniform(space)).unwrap();
        assert_ne!(two_point().id(), other.id());
    }
}
