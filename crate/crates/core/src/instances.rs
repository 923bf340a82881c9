//! Random problem instances for property tests and the acceptance suite.

use std::sync::Arc;

use rand::Rng;

use crate::error::Result;
use crate::measure_space::{Density, StateSpace, TargetDensity};
use crate::mh_kernel::{MhKernel, ProposalFamily};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InstanceOptions {
    /// Probability that an off-diagonal proposal entry is zeroed.
    pub zero_fraction: f64,
    /// Draw non-uniform reference weights instead of counting measure.
    pub random_weights: bool,
    /// Smallest unnormalized target value; keeps the target away from zero.
    pub target_floor: f64,
}

impl Default for InstanceOptions {
    fn default() -> Self {
        Self {
            zero_fraction: 0.0,
            random_weights: true,
            target_floor: 0.05,
        }
    }
}

impl InstanceOptions {
    pub fn sparse(zero_fraction: f64) -> Self {
        Self {
            zero_fraction,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone)]
pub struct Instance {
    pub target: TargetDensity,
    pub proposal: ProposalFamily,
}

impl Instance {
    pub fn space(&self) -> &Arc<StateSpace> {
        self.target.space()
    }

    pub fn kernel(&self) -> Result<MhKernel> {
        MhKernel::build(&self.target, &self.proposal)
    }
}

pub fn random_space<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    random_weights: bool,
) -> Arc<StateSpace> {
    let space = if random_weights {
        StateSpace::from_weights((0..n).map(|_| rng.random_range(0.2..2.0)).collect())
    } else {
        StateSpace::counting(n)
    };
    Arc::new(space.expect("generated weights are valid"))
}

pub fn random_target<R: Rng + ?Sized>(
    rng: &mut R,
    space: Arc<StateSpace>,
    floor: f64,
) -> TargetDensity {
    let values = (0..space.len())
        .map(|_| floor + rng.random::<f64>())
        .collect();
    TargetDensity::from_unnormalized(space, values).expect("generated target is positive")
}

/// Proposal with strictly positive diagonal; off-diagonal entries are
/// zeroed with probability `zero_fraction`.
pub fn random_proposal<R: Rng + ?Sized>(
    rng: &mut R,
    space: Arc<StateSpace>,
    zero_fraction: f64,
) -> ProposalFamily {
    let n = space.len();
    let mut q = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let v = 0.05 + rng.random::<f64>();
            let zeroed = i != j && rng.random::<f64>() < zero_fraction;
            q.push(if zeroed { 0.0 } else { v });
        }
    }
    ProposalFamily::from_unnormalized(space, q).expect("generated rows have positive mass")
}

pub fn random_instance<R: Rng + ?Sized>(rng: &mut R, n: usize, opts: InstanceOptions) -> Instance {
    let space = random_space(rng, n, opts.random_weights);
    let target = random_target(rng, space.clone(), opts.target_floor);
    let proposal = random_proposal(rng, space, opts.zero_fraction);
    Instance { target, proposal }
}

/// Real function with entries in `[-1, 1]`.
pub fn random_function<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..=1.0)).collect()
}

pub fn random_probability<R: Rng + ?Sized>(rng: &mut R, space: Arc<StateSpace>) -> Density {
    let values = (0..space.len())
        .map(|_| rng.random::<f64>() + 1e-3)
        .collect();
    Density::new(space, values)
        .and_then(|d| d.normalize())
        .expect("generated density has positive mass")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generated_instances_build() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in [2, 3, 17, 64] {
            let inst = random_instance(&mut rng, n, InstanceOptions::sparse(0.3));
            let k = inst.kernel().unwrap();
            assert_eq!(k.len(), n);
            assert!(k.row_closure_residual() < 1e-12);
            let f = random_probability(&mut rng, inst.space().clone());
            assert!(f.is_probability());
        }
    }

    #[test]
    fn sparse_proposals_contain_zeros() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let space = random_space(&mut rng, 20, false);
        let q = random_proposal(&mut rng, space, 0.5);
        let zeros = (0..20)
            .flat_map(|i| (0..20).map(move |j| (i, j)))
            .filter(|&(i, j)| q.density(i, j) == 0.0)
            .count();
        assert!(zeros > 0);
        assert!((0..20).all(|i| q.density(i, i) > 0.0));
    }
}
