//! The Metropolis–Hastings chain itself, and its agreement with the exact
//! density evolution.
//!
//! Random stream layout: replica `r` of a run seeded with `base_seed` draws
//! from ChaCha20 seeded by `seed_from_u64(base_seed)` on stream `r`. The
//! first variate picks the initial point; after that every step consumes
//! exactly two uniforms, the first for the proposal (inverse CDF over the
//! proposal row) and the second for the accept/reject decision. Uniforms are
//! the top 53 bits of one `u64` scaled to `[0, 1)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::measure_space::{same_space, Density};
use crate::mh_kernel::{acceptance, MhKernel};
use crate::tolerances;

/// Identity of the random stream, recorded in reports.
pub const STREAM_ALGORITHM: &str =
    "ChaCha20 (rand_chacha 0.9) seed_from_u64(base_seed), stream = replica index, 2 uniforms per step";

/// Generator for replica `replica` of a run.
pub fn replica_rng(base_seed: u64, replica: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(base_seed);
    rng.set_stream(replica);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ChainState {
    pub point: usize,
    pub step: u64,
    /// Stream index of the generator driving this chain.
    pub stream: u64,
}

/// Inverse-CDF index for `u`: the first entry whose cumulative mass exceeds
/// `u`, so boundary ties go to the higher index. Falls back to the last
/// entry with positive mass when rounding leaves `u` above the total.
fn inverse_cdf(cdf: &[f64], u: f64) -> usize {
    let i = cdf.partition_point(|c| *c <= u);
    if i < cdf.len() {
        return i;
    }
    let mut j = cdf.len() - 1;
    while j > 0 && cdf[j] == cdf[j - 1] {
        j -= 1;
    }
    j
}

fn cumulative(masses: impl Iterator<Item = f64>) -> Vec<f64> {
    masses
        .scan(0.0, |acc, m| {
            *acc += m;
            Some(*acc)
        })
        .collect()
}

/// Precomputed proposal CDFs and acceptance table for one kernel.
#[derive(Debug, Clone)]
pub struct Sampler<'k> {
    kernel: &'k MhKernel,
    cdf: Vec<Vec<f64>>,
    alpha: Vec<f64>,
}

impl<'k> Sampler<'k> {
    pub fn new(kernel: &'k MhKernel) -> Self {
        let n = kernel.len();
        let q = kernel.proposal();
        let w = kernel.weights();
        let cdf = (0..n)
            .map(|x| cumulative((0..n).map(|y| q.density(x, y) * w[y])))
            .collect();
        let mut alpha = Vec::with_capacity(n * n);
        for x in 0..n {
            for y in 0..n {
                alpha.push(acceptance(kernel.target(), q, x, y));
            }
        }
        Self { kernel, cdf, alpha }
    }

    pub fn kernel(&self) -> &MhKernel {
        self.kernel
    }

    /// Candidate drawn from the proposal row of `from` for uniform `u`.
    pub fn propose(&self, from: usize, u: f64) -> usize {
        inverse_cdf(&self.cdf[from], u)
    }

    /// One Metropolis–Hastings transition.
    pub fn step<R: Rng + ?Sized>(&self, state: ChainState, rng: &mut R) -> ChainState {
        let u_propose: f64 = rng.random();
        let u_accept: f64 = rng.random();
        let candidate = self.propose(state.point, u_propose);
        let a = self.alpha[state.point * self.kernel.len() + candidate];
        let point = if u_accept < a { candidate } else { state.point };
        ChainState {
            point,
            step: state.step + 1,
            stream: state.stream,
        }
    }

    /// Initial point drawn from `f0` with one uniform.
    pub fn draw_initial<R: Rng + ?Sized>(f0: &Density, rng: &mut R) -> usize {
        let w = f0.space().weights();
        let cdf = cumulative(f0.values().iter().zip(w).map(|(f, l)| f * l));
        inverse_cdf(&cdf, rng.random())
    }
}

pub fn mh_step<R: Rng + ?Sized>(
    state: ChainState,
    sampler: &Sampler<'_>,
    rng: &mut R,
) -> ChainState {
    sampler.step(state, rng)
}

/// Visit counts per step across independent replicas.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleTrace {
    pub n_replicas: usize,
    pub base_seed: u64,
    pub stream_algorithm: String,
    /// `counts[n][x]`: replicas at point `x` after `n` steps.
    pub counts: Vec<Vec<u64>>,
    pub weights: Vec<f64>,
}

impl EnsembleTrace {
    pub fn n_steps(&self) -> usize {
        self.counts.len() - 1
    }

    /// Frequency divided by weight at step `n`.
    pub fn empirical_values(&self, n: usize) -> Vec<f64> {
        let total = self.n_replicas as f64;
        self.counts[n]
            .iter()
            .zip(&self.weights)
            .map(|(c, w)| *c as f64 / total / w)
            .collect()
    }

    /// `n,count_0,count_1,…` rows, one per step.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n");
        for x in 0..self.weights.len() {
            out.push_str(&format!(",count_{x}"));
        }
        out.push('\n');
        for (n, row) in self.counts.iter().enumerate() {
            out.push_str(&n.to_string());
            for c in row {
                out.push_str(&format!(",{c}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Runs `n_replicas` independent chains from `f0` for `n_steps` steps.
pub fn run_ensemble(
    f0: &Density,
    k: &MhKernel,
    n_steps: usize,
    n_replicas: usize,
    base_seed: u64,
) -> Result<EnsembleTrace> {
    if !same_space(f0.space(), k.space()) {
        return Err(Error::SpaceMismatch);
    }
    f0.ensure_probability()?;
    let sampler = Sampler::new(k);
    let n = k.len();
    let empty = || vec![vec![0u64; n]; n_steps + 1];
    let counts = (0..n_replicas)
        .into_par_iter()
        .fold(empty, |mut acc, r| {
            let mut rng = replica_rng(base_seed, r as u64);
            let mut state = ChainState {
                point: Sampler::draw_initial(f0, &mut rng),
                step: 0,
                stream: r as u64,
            };
            acc[0][state.point] += 1;
            for row in acc.iter_mut().skip(1) {
                state = sampler.step(state, &mut rng);
                row[state.point] += 1;
            }
            acc
        })
        .reduce(empty, |mut a, b| {
            for (ra, rb) in a.iter_mut().zip(b) {
                for (x, y) in ra.iter_mut().zip(rb) {
                    *x += y;
                }
            }
            a
        });
    Ok(EnsembleTrace {
        n_replicas,
        base_seed,
        stream_algorithm: STREAM_ALGORITHM.to_string(),
        counts,
        weights: k.weights().to_vec(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepDiscrepancy {
    pub n: usize,
    /// `d_TV(empirical_n, f_n)`.
    pub tv: f64,
    pub envelope: f64,
    pub within_envelope: bool,
}

/// Statistical envelope `c·sqrt(n_points / n_replicas)`.
pub fn envelope(c: f64, n_points: usize, n_replicas: usize) -> f64 {
    c * (n_points as f64 / n_replicas as f64).sqrt()
}

/// Per-step total-variation distance between the ensemble and the exact
/// evolution, flagged against the default envelope.
pub fn empirical_vs_exact(
    trace: &EnsembleTrace,
    exact: &[Density],
) -> Result<Vec<StepDiscrepancy>> {
    empirical_vs_exact_with(trace, exact, tolerances::ENVELOPE_C)
}

pub fn empirical_vs_exact_with(
    trace: &EnsembleTrace,
    exact: &[Density],
    c: f64,
) -> Result<Vec<StepDiscrepancy>> {
    if exact.len() != trace.counts.len() {
        return Err(Error::MismatchedConfig(format!(
            "ensemble has {} steps, exact trace has {}",
            trace.counts.len(),
            exact.len()
        )));
    }
    if exact
        .iter()
        .any(|d| d.space().weights() != trace.weights.as_slice())
    {
        return Err(Error::MismatchedConfig(
            "ensemble and exact trace live on different spaces".into(),
        ));
    }
    let env = envelope(c, trace.weights.len(), trace.n_replicas);
    Ok(exact
        .iter()
        .enumerate()
        .map(|(n, f)| {
            let emp = trace.empirical_values(n);
            let tv = 0.5 * f.space().l1_distance(&emp, f.values());
            StepDiscrepancy {
                n,
                tv,
                envelope: env,
                within_envelope: tv <= env,
            }
        })
        .collect())
}

/// Ordered transition counts of one long chain.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransitionCounts {
    pub n_points: usize,
    /// Row-major `counts[from * n + to]`.
    pub counts: Vec<u64>,
    pub visits: Vec<u64>,
}

impl TransitionCounts {
    pub fn count(&self, from: usize, to: usize) -> u64 {
        self.counts[from * self.n_points + to]
    }

    /// Largest `|p̂(x,x') - P(x,x')| / (σ·sqrt(1/visits(x)))` over visited rows.
    /// At most one when every entry sits inside the σ-envelope.
    pub fn row_deviation_ratio(&self, k: &MhKernel, sigma: f64) -> f64 {
        let mut worst: f64 = 0.0;
        for x in 0..self.n_points {
            let v = self.visits[x];
            if v == 0 {
                continue;
            }
            let allowed = sigma * (1.0 / v as f64).sqrt();
            for y in 0..self.n_points {
                let p_hat = self.count(x, y) as f64 / v as f64;
                worst = worst.max((p_hat - k.transition_probability(x, y)).abs() / allowed);
            }
        }
        worst
    }

    /// Unordered pairs with at least one observed transition between them.
    pub fn observed_pairs(&self) -> usize {
        (0..self.n_points)
            .flat_map(|x| ((x + 1)..self.n_points).map(move |y| (x, y)))
            .filter(|&(x, y)| self.count(x, y) + self.count(y, x) > 0)
            .count()
    }

    /// Largest `|c(x→x') - c(x'→x)| / (σ·sqrt(c(x→x') + c(x'→x)))` over pairs.
    pub fn symmetry_ratio(&self, sigma: f64) -> f64 {
        let mut worst: f64 = 0.0;
        for x in 0..self.n_points {
            for y in (x + 1)..self.n_points {
                let (a, b) = (self.count(x, y) as f64, self.count(y, x) as f64);
                if a + b > 0.0 {
                    worst = worst.max((a - b).abs() / (sigma * (a + b).sqrt()));
                }
            }
        }
        worst
    }
}

/// Per-comparison sigma for `tests` simultaneous two-sided Gaussian
/// comparisons, chosen so that the union bound on the family stays near the
/// single-comparison tail at `sigma`.
pub fn family_sigma(sigma: f64, tests: usize) -> f64 {
    (sigma * sigma + 2.0 * (tests.max(1) as f64).ln()).sqrt()
}

/// Runs one chain started from a draw of `f0` and tallies its transitions.
pub fn long_chain_transitions(
    k: &MhKernel,
    f0: &Density,
    n_steps: usize,
    base_seed: u64,
) -> Result<TransitionCounts> {
    if !same_space(f0.space(), k.space()) {
        return Err(Error::SpaceMismatch);
    }
    f0.ensure_probability()?;
    let n = k.len();
    let sampler = Sampler::new(k);
    let mut rng = replica_rng(base_seed, 0);
    let mut state = ChainState {
        point: Sampler::draw_initial(f0, &mut rng),
        step: 0,
        stream: 0,
    };
    let mut counts = vec![0u64; n * n];
    let mut visits = vec![0u64; n];
    for _ in 0..n_steps {
        let next = sampler.step(state, &mut rng);
        counts[state.point * n + next.point] += 1;
        visits[state.point] += 1;
        state = next;
    }
    Ok(TransitionCounts {
        n_points: n,
        counts,
        visits,
    })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::convergence_lab::evolve;
    use crate::measure_space::{StateSpace, TargetDensity};
    use crate::mh_kernel::ProposalFamily;

    fn two_point() -> MhKernel {
        let space = Arc::new(StateSpace::counting(2).unwrap());
        let target = TargetDensity::from_unnormalized(space.clone(), vec![0.75, 0.25]).unwrap();
        MhKernel::build(&target, &ProposalFamily::uniform(space)).unwrap()
    }

    #[test]
    fn inverse_cdf_breaks_ties_upward() {
        let cdf = [0.25, 0.5, 0.5, 1.0];
        assert_eq!(inverse_cdf(&cdf, 0.0), 0);
        assert_eq!(inverse_cdf(&cdf, 0.25), 1);
        assert_eq!(inverse_cdf(&cdf, 0.49), 1);
        assert_eq!(inverse_cdf(&cdf, 0.5), 3);
        assert_eq!(inverse_cdf(&cdf, 0.999), 3);
        assert_eq!(inverse_cdf(&[0.5, 0.999_999, 0.999_999], 0.999_999_9), 1);
    }

    #[test]
    fn step_consumes_two_uniforms() {
        let k = two_point();
        let s = Sampler::new(&k);
        let mut a = replica_rng(7, 3);
        let mut b = replica_rng(7, 3);
        let state = ChainState {
            point: 0,
            step: 0,
            stream: 3,
        };
        let _ = s.step(state, &mut a);
        let _: f64 = b.random();
        let _: f64 = b.random();
        assert_eq!(a.random::<u64>(), b.random::<u64>());
    }

    #[test]
    fn move_probability_matches_kernel_entry() {
        let k = two_point();
        let s = Sampler::new(&k);
        let mut rng = replica_rng(11, 0);
        let trials = 200_000;
        let moves = (0..trials)
            .filter(|_| {
                s.step(
                    ChainState {
                        point: 0,
                        step: 0,
                        stream: 0,
                    },
                    &mut rng,
                )
                .point
                    == 1
            })
            .count();
        let p = k.transition_probability(0, 1);
        assert!((p - 1.0 / 6.0).abs() < 1e-15);
        let sd = (p * (1.0 - p) / trials as f64).sqrt();
        assert!((moves as f64 / trials as f64 - p).abs() < 4.0 * sd);
    }

    #[test]
    fn independence_chain_is_iid_from_target() {
        let space = Arc::new(StateSpace::counting(3).unwrap());
        let target = TargetDensity::from_unnormalized(space.clone(), vec![0.5, 0.3, 0.2]).unwrap();
        let k = MhKernel::build(&target, &ProposalFamily::independence(&target)).unwrap();
        let f0 = Density::point_mass(space, 2).unwrap();
        let trace = run_ensemble(&f0, &k, 1, 50_000, 5).unwrap();
        let emp = trace.empirical_values(1);
        for (e, p) in emp.iter().zip(target.values()) {
            assert!((e - p).abs() < 4.0 * (p * (1.0 - p) / 50_000.0).sqrt());
        }
    }

    #[test]
    fn uniform_symmetric_chain_accepts_every_proposal() {
        let space = Arc::new(StateSpace::counting(3).unwrap());
        let target = TargetDensity::new(Density::uniform(space.clone()).unwrap()).unwrap();
        let k = MhKernel::build(&target, &ProposalFamily::uniform(space.clone())).unwrap();
        let f0 = Density::uniform(space).unwrap();
        let steps = 300_000;
        let counts = long_chain_transitions(&k, &f0, steps, 21).unwrap();
        for x in 0..3 {
            let v = counts.visits[x] as f64;
            for y in 0..3 {
                let freq = counts.count(x, y) as f64 / v;
                assert!((freq - 1.0 / 3.0).abs() < 4.0 / v.sqrt());
            }
        }
        assert!(counts.row_deviation_ratio(&k, 4.0) <= 1.0);
        assert_eq!(counts.observed_pairs(), 3);
    }

    #[test]
    fn family_sigma_grows_with_the_family() {
        assert_eq!(family_sigma(4.0, 1), 4.0);
        assert_eq!(family_sigma(4.0, 0), 4.0);
        let s = family_sigma(4.0, 7000);
        assert!(s > 5.5 && s < 6.0);
    }

    #[test]
    fn ensemble_from_point_mass_matches_one_step() {
        let k = two_point();
        let f0 = Density::point_mass(k.space().clone(), 0).unwrap();
        let trace = run_ensemble(&f0, &k, 1, 100_000, 2024).unwrap();
        let exact = evolve(&f0, &k, 1).unwrap();
        let d = empirical_vs_exact(&trace, &exact).unwrap();
        let dkw = 3.0 * ((2.0f64).ln() / 2.0 * 1e-5).sqrt();
        assert_eq!(d[0].tv, 0.0);
        assert!(d[1].tv <= dkw, "{} > {}", d[1].tv, dkw);
    }

    #[test]
    fn ensemble_is_deterministic() {
        let k = two_point();
        let f0 = Density::point_mass(k.space().clone(), 0).unwrap();
        let a = run_ensemble(&f0, &k, 5, 5_000, 99).unwrap();
        let b = run_ensemble(&f0, &k, 5, 5_000, 99).unwrap();
        assert_eq!(a.to_csv(), b.to_csv());
        let c = run_ensemble(&f0, &k, 5, 5_000, 100).unwrap();
        assert_ne!(a.counts, c.counts);
    }

    #[test]
    fn stationary_ensemble_stays_inside_envelope() {
        let k = two_point();
        let f0 = k.target().density().clone();
        let trace = run_ensemble(&f0, &k, 6, 20_000, 3).unwrap();
        let exact = evolve(&f0, &k, 6).unwrap();
        assert!(empirical_vs_exact(&trace, &exact)
            .unwrap()
            .iter()
            .all(|d| d.within_envelope));
    }

    #[test]
    fn mismatched_traces_are_rejected() {
        let k = two_point();
        let f0 = Density::point_mass(k.space().clone(), 0).unwrap();
        let trace = run_ensemble(&f0, &k, 3, 100, 1).unwrap();
        let exact = evolve(&f0, &k, 2).unwrap();
        assert!(matches!(
            empirical_vs_exact(&trace, &exact),
            Err(Error::MismatchedConfig(_))
        ));
    }
}
