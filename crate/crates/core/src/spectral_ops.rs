//! The kernel as an operator on the weighted Hilbert space `L²(π)`.
//!
//! Two operators share the kernel: the conjugate operator
//! `K[f](x) = Σ κ(x→x') f(x') λ(x')`, which acts on functions, and the
//! transition operator `K̂[f](x') = Σ f(x) κ(x→x') λ(x)`, which pushes
//! densities forward one step. Reversibility makes `K` self-adjoint in the
//! inner product `⟨f,g⟩_π = Σ f g π λ`, so its spectrum is computed from the
//! symmetric matrix `S = D^{1/2} P D^{-1/2}` with `D = diag(π·λ)`.
//!
//! Powers are always applied to vectors step by step; no matrix power is
//! materialized here.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::measure_space::TargetDensity;
use crate::mh_kernel::MhKernel;
use crate::tolerances;

/// Inner product `⟨f,g⟩_π` over a fixed target.
#[derive(Debug, Clone, Copy)]
pub struct PiInnerProductSpace<'a> {
    target: &'a TargetDensity,
}

impl<'a> PiInnerProductSpace<'a> {
    pub fn new(target: &'a TargetDensity) -> Self {
        Self { target }
    }

    pub fn inner(&self, f: &[f64], g: &[f64]) -> Result<f64> {
        self.target.space().check_len(f)?;
        self.target.space().check_len(g)?;
        Ok(pi_inner(self.target, f, g))
    }

    pub fn norm(&self, f: &[f64]) -> Result<f64> {
        self.target.space().check_len(f)?;
        Ok(pi_norm(self.target, f))
    }
}

pub fn inner_product_pi(target: &TargetDensity, f: &[f64], g: &[f64]) -> Result<f64> {
    PiInnerProductSpace::new(target).inner(f, g)
}

pub(crate) fn pi_inner(target: &TargetDensity, f: &[f64], g: &[f64]) -> f64 {
    let pi = target.values();
    let w = target.space().weights();
    f.iter()
        .zip(g)
        .zip(pi.iter().zip(w))
        .map(|((a, b), (p, l))| a * b * p * l)
        .sum()
}

pub(crate) fn pi_norm(target: &TargetDensity, f: &[f64]) -> f64 {
    pi_inner(target, f, f).sqrt()
}

fn check_arg(k: &MhKernel, f: &[f64]) {
    assert_eq!(
        f.len(),
        k.len(),
        "function has {} values on a {}-point space",
        f.len(),
        k.len()
    );
}

/// One application of the conjugate operator `K`.
pub fn apply_k(k: &MhKernel, f: &[f64]) -> Vec<f64> {
    check_arg(k, f);
    let w = k.weights();
    let n = k.len();
    (0..n)
        .map(|x| {
            let smooth: f64 = (0..n).map(|y| k.sub_kernel(x, y) * f[y] * w[y]).sum();
            smooth + k.phi()[x] * f[x]
        })
        .collect()
}

/// One application of the transition operator `K̂`.
pub fn apply_k_hat(k: &MhKernel, f: &[f64]) -> Vec<f64> {
    check_arg(k, f);
    let w = k.weights();
    let n = k.len();
    (0..n)
        .map(|y| {
            let inflow: f64 = (0..n).map(|x| f[x] * k.sub_kernel(x, y) * w[x]).sum();
            inflow + k.phi()[y] * f[y]
        })
        .collect()
}

pub fn apply_k_power(k: &MhKernel, f: &[f64], n: usize) -> Vec<f64> {
    (0..n).fold(f.to_vec(), |v, _| apply_k(k, &v))
}

pub fn apply_k_hat_power(k: &MhKernel, f: &[f64], n: usize) -> Vec<f64> {
    (0..n).fold(f.to_vec(), |v, _| apply_k_hat(k, &v))
}

/// `[f, K f, K² f, …, K^n_max f]`.
pub fn conjugate_orbit(k: &MhKernel, f: &[f64], n_max: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(n_max + 1);
    out.push(f.to_vec());
    for i in 0..n_max {
        let next = apply_k(k, &out[i]);
        out.push(next);
    }
    out
}

/// `[f, K̂ f, …, K̂^n_max f]`.
pub fn transition_orbit(k: &MhKernel, f: &[f64], n_max: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(n_max + 1);
    out.push(f.to_vec());
    for i in 0..n_max {
        let next = apply_k_hat(k, &out[i]);
        out.push(next);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Direction {
    /// `K`, acting on functions.
    Conjugate,
    /// `K̂`, acting on densities.
    Transition,
}

/// A power of `K` or `K̂` bound to a kernel.
#[derive(Debug, Clone, Copy)]
pub struct OperatorView<'k> {
    kernel: &'k MhKernel,
    direction: Direction,
    power: usize,
}

impl<'k> OperatorView<'k> {
    pub fn new(kernel: &'k MhKernel, direction: Direction, power: usize) -> Self {
        Self {
            kernel,
            direction,
            power,
        }
    }

    pub fn conjugate(kernel: &'k MhKernel) -> Self {
        Self::new(kernel, Direction::Conjugate, 1)
    }

    pub fn transition(kernel: &'k MhKernel) -> Self {
        Self::new(kernel, Direction::Transition, 1)
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn power(&self) -> usize {
        self.power
    }

    pub fn apply(&self, f: &[f64]) -> Result<Vec<f64>> {
        self.kernel.space().check_len(f)?;
        Ok(match self.direction {
            Direction::Conjugate => apply_k_power(self.kernel, f, self.power),
            Direction::Transition => apply_k_hat_power(self.kernel, f, self.power),
        })
    }
}

/// `(‖K f‖_π, ‖f‖_π)`; the first never exceeds the second.
pub fn check_contraction(k: &MhKernel, f: &[f64]) -> (f64, f64) {
    let kf = apply_k(k, f);
    (pi_norm(k.target(), &kf), pi_norm(k.target(), f))
}

/// `|⟨K f, g⟩_π - ⟨f, K g⟩_π|`.
pub fn check_self_adjoint(k: &MhKernel, f: &[f64], g: &[f64]) -> f64 {
    let t = k.target();
    (pi_inner(t, &apply_k(k, f), g) - pi_inner(t, f, &apply_k(k, g))).abs()
}

/// `|⟨K^n f, g⟩_π - ⟨f, K^n g⟩_π|`.
pub fn adjointness_residual(k: &MhKernel, f: &[f64], g: &[f64], n: usize) -> f64 {
    let t = k.target();
    (pi_inner(t, &apply_k_power(k, f, n), g) - pi_inner(t, f, &apply_k_power(k, g, n))).abs()
}

/// `s_n = ⟨K^{2νn} f, f⟩_π` for `n = 0..=n_max`, evaluated as `‖K^{νn} f‖²_π`.
pub fn quadratic_form_sequence(k: &MhKernel, f: &[f64], nu: usize, n_max: usize) -> Vec<f64> {
    assert!(nu >= 1, "nu must be at least 1");
    let t = k.target();
    let mut v = f.to_vec();
    let mut out = Vec::with_capacity(n_max + 1);
    out.push(pi_inner(t, &v, &v));
    for _ in 0..n_max {
        v = apply_k_power(k, &v, nu);
        out.push(pi_inner(t, &v, &v));
    }
    out
}

/// Operator-norm bound used on the right-hand side of `‖Tu‖² ≤ ‖T‖⟨Tu,u⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OperatorNormBound {
    /// `‖T‖ ≤ 2`, valid for any difference of two contractions.
    Coarse,
    /// A precomputed norm, see [`Spectrum::difference_norm`].
    Exact(f64),
}

impl OperatorNormBound {
    pub fn value(self) -> f64 {
        match self {
            OperatorNormBound::Coarse => 2.0,
            OperatorNormBound::Exact(v) => v,
        }
    }
}

/// `(‖Tu‖²_π, ‖T‖·⟨Tu, u⟩_π)` for `T = K^{2νn} - K^{2νn+2νp}`.
pub fn verify_operator_inequality(
    k: &MhKernel,
    u: &[f64],
    nu: usize,
    n: usize,
    p: usize,
    bound: OperatorNormBound,
) -> (f64, f64) {
    let t = k.target();
    let a = apply_k_power(k, u, 2 * nu * n);
    let b = apply_k_power(k, &a, 2 * nu * p);
    let tu: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
    let lhs = pi_inner(t, &tu, &tu);
    let rhs = bound.value() * pi_inner(t, &tu, u);
    (lhs, rhs)
}

/// `e_n = ‖K^n f - ⟨f,1⟩_π 1‖_π` for `n = 0..=n_max`.
pub fn strong_limit_trace(k: &MhKernel, f: &[f64], n_max: usize) -> Vec<f64> {
    let t = k.target();
    let ones = vec![1.0; k.len()];
    let mean = pi_inner(t, f, &ones);
    let mut centered: Vec<f64> = f.iter().map(|v| v - mean).collect();
    let mut out = Vec::with_capacity(n_max + 1);
    out.push(pi_norm(t, &centered));
    for _ in 0..n_max {
        centered = apply_k(k, &centered);
        out.push(pi_norm(t, &centered));
    }
    out
}

/// `max_x |K̂^n[f](x) - π(x)·K^n[f/π](x)|` for `n = 0..=n_max`.
pub fn duality_residuals(k: &MhKernel, f: &[f64], n_max: usize) -> Vec<f64> {
    let t = k.target();
    let mut forward = f.to_vec();
    let mut pulled = t.ratio(f);
    let mut out = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        if n > 0 {
            forward = apply_k_hat(k, &forward);
            pulled = apply_k(k, &pulled);
        }
        let back = t.times(&pulled);
        let r = forward
            .iter()
            .zip(&back)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        out.push(r);
    }
    out
}

/// Eigen-decomposition of the conjugate operator.
///
/// Eigenvalues are sorted in decreasing order. Column `i` of the eigenvector
/// matrix is the right eigenvector for eigenvalue `i`, scaled to unit
/// `‖·‖_π` norm with a positive `⟨v, 1⟩_π` (or positive largest entry when
/// that inner product vanishes).
#[derive(Debug, Clone)]
pub struct Spectrum {
    eigenvalues: Vec<f64>,
    vectors: DMatrix<f64>,
    target: TargetDensity,
}

impl Spectrum {
    pub fn of(k: &MhKernel) -> Self {
        let n = k.len();
        let pi = k.target().values();
        let w = k.weights();
        let d: Vec<f64> = pi.iter().zip(w).map(|(p, l)| (p * l).sqrt()).collect();
        let p = k.folded_matrix();
        let s = DMatrix::from_fn(n, n, |i, j| {
            let a = d[i] * p[(i, j)] / d[j];
            let b = d[j] * p[(j, i)] / d[i];
            0.5 * (a + b)
        });
        let eig = SymmetricEigen::new(s);
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let mut vectors = DMatrix::zeros(n, n);
        for (col, &i) in order.iter().enumerate() {
            let mut v: Vec<f64> = (0..n).map(|r| eig.eigenvectors[(r, i)] / d[r]).collect();
            let norm = pi_norm(k.target(), &v);
            let mass = pi_inner(k.target(), &v, &vec![1.0; n]);
            let flip = if mass.abs() > 1e-9 {
                mass < 0.0
            } else {
                let big = v
                    .iter()
                    .copied()
                    .max_by(|a, b| a.abs().total_cmp(&b.abs()))
                    .unwrap_or(0.0);
                big < 0.0
            };
            let scale = if flip { -1.0 / norm } else { 1.0 / norm };
            v.iter_mut().for_each(|x| *x *= scale);
            for (r, x) in v.into_iter().enumerate() {
                vectors[(r, col)] = x;
            }
        }
        Self {
            eigenvalues,
            vectors,
            target: k.target().clone(),
        }
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvector(&self, i: usize) -> Vec<f64> {
        self.vectors.column(i).iter().copied().collect()
    }

    pub fn largest(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn second_largest(&self) -> f64 {
        self.eigenvalues[1]
    }

    pub fn smallest(&self) -> f64 {
        *self.eigenvalues.last().expect("non-empty spectrum")
    }

    /// Largest modulus among all eigenvalues except the top one.
    pub fn second_modulus(&self) -> f64 {
        self.eigenvalues[1..]
            .iter()
            .map(|v| v.abs())
            .fold(0.0, f64::max)
    }

    /// `1 - second_modulus()`.
    pub fn gap(&self) -> f64 {
        1.0 - self.second_modulus()
    }

    /// Number of eigenvalues within `tol` of 1.
    pub fn unit_multiplicity(&self, tol: f64) -> usize {
        self.eigenvalues.iter().filter(|v| **v >= 1.0 - tol).count()
    }

    /// Coordinates `⟨f, v_i⟩_π` in the eigenbasis.
    pub fn coefficients(&self, f: &[f64]) -> Vec<f64> {
        (0..self.eigenvalues.len())
            .map(|i| pi_inner(&self.target, f, &self.eigenvector(i)))
            .collect()
    }

    /// `K^n f` reconstructed from the eigenbasis.
    pub fn apply_power(&self, f: &[f64], n: usize) -> Vec<f64> {
        let c = self.coefficients(f);
        let dim = f.len();
        let mut out = vec![0.0; dim];
        for (i, ci) in c.iter().enumerate() {
            let scale = ci * self.eigenvalues[i].powi(n as i32);
            for (r, o) in out.iter_mut().enumerate() {
                *o += scale * self.vectors[(r, i)];
            }
        }
        out
    }

    /// Limit of `K^{2n} f` as `n → ∞`: the projection of `f` onto the
    /// eigenspace of eigenvalues with modulus within `tol` of 1.
    pub fn even_limit(&self, f: &[f64], tol: f64) -> Vec<f64> {
        let c = self.coefficients(f);
        let dim = f.len();
        let mut out = vec![0.0; dim];
        for (i, ci) in c.iter().enumerate() {
            if self.eigenvalues[i].abs() >= 1.0 - tol {
                for (r, o) in out.iter_mut().enumerate() {
                    *o += ci * self.vectors[(r, i)];
                }
            }
        }
        out
    }

    /// Exact norm of `K^{2νn} - K^{2νn+2νp}`.
    pub fn difference_norm(&self, nu: usize, n: usize, p: usize) -> f64 {
        let a = (2 * nu * n) as i32;
        let b = (2 * nu * (n + p)) as i32;
        self.eigenvalues
            .iter()
            .map(|l| (l.powi(a) - l.powi(b)).abs())
            .fold(0.0, f64::max)
    }
}

/// Eigenstructure summary around the fixed points of `K`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixedPointReport {
    pub nu: Option<usize>,
    pub eigenvalues: Vec<f64>,
    pub second_eigenvalue: f64,
    pub smallest_eigenvalue: f64,
    pub gap: f64,
    pub unit_multiplicity: usize,
    /// `max - min` of the top eigenvector normalized to unit `‖·‖_π`.
    pub constancy_spread: f64,
    pub simple: bool,
}

impl FixedPointReport {
    fn from_spectrum(spec: &Spectrum, nu: Option<usize>) -> Self {
        let top = spec.eigenvector(0);
        let max = top.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = top.iter().copied().fold(f64::INFINITY, f64::min);
        Self {
            nu,
            eigenvalues: spec.eigenvalues().to_vec(),
            second_eigenvalue: spec.second_largest(),
            smallest_eigenvalue: spec.smallest(),
            gap: spec.gap(),
            unit_multiplicity: spec.unit_multiplicity(tolerances::GAP_SIMPLICITY),
            constancy_spread: max - min,
            simple: spec.second_largest() <= 1.0 - tolerances::GAP_SIMPLICITY,
        }
    }
}

/// Eigenvalue 1 is simple and its eigenvector constant, provided the `nu`-th
/// sub-kernel power is strictly positive. Refuses otherwise.
pub fn fixed_point_constancy(k: &MhKernel, nu: usize) -> Result<FixedPointReport> {
    if !k.satisfies_positivity(nu) {
        let spec = Spectrum::of(k);
        return Err(Error::PositivityFails {
            nu,
            multiplicity: spec.unit_multiplicity(tolerances::GAP_SIMPLICITY),
        });
    }
    Ok(FixedPointReport::from_spectrum(&Spectrum::of(k), Some(nu)))
}

/// Same report without the positivity gate.
pub fn fixed_point_diagnostic(k: &MhKernel) -> FixedPointReport {
    FixedPointReport::from_spectrum(&Spectrum::of(k), None)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::measure_space::{Density, StateSpace};
    use crate::mh_kernel::ProposalFamily;
    use approx::assert_abs_diff_eq;

    fn two_point() -> MhKernel {
        let space = Arc::new(StateSpace::counting(2).unwrap());
        let target = TargetDensity::from_unnormalized(space.clone(), vec![0.75, 0.25]).unwrap();
        MhKernel::build(&target, &ProposalFamily::uniform(space)).unwrap()
    }

    fn blocks() -> MhKernel {
        let space = Arc::new(StateSpace::counting(4).unwrap());
        let target = TargetDensity::new(Density::uniform(space.clone()).unwrap()).unwrap();
        MhKernel::build(&target, &ProposalFamily::block_diagonal(space, 2).unwrap()).unwrap()
    }

    #[test]
    fn inner_product_examples() {
        let k = two_point();
        let t = k.target();
        assert_abs_diff_eq!(inner_product_pi(t, &[1.0, 1.0], &[1.0, 1.0]).unwrap(), 1.0);
        let f0 = [0.4, 0.6];
        let ratio = t.ratio(&f0);
        assert_abs_diff_eq!(
            inner_product_pi(t, &ratio, &[1.0, 1.0]).unwrap(),
            1.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            inner_product_pi(t, &[1.0, -1.0], &[1.0, -1.0]).unwrap(),
            1.0
        );
        assert!(inner_product_pi(t, &[1.0], &[1.0, 1.0]).is_err());
    }

    #[test]
    fn apply_k_examples() {
        let k = two_point();
        assert_eq!(apply_k(&k, &[1.0, 1.0]), vec![1.0, 1.0]);
        let kf = apply_k(&k, &[1.0, 0.0]);
        assert_abs_diff_eq!(kf[0], 5.0 / 6.0, epsilon = 1e-15);
        assert_abs_diff_eq!(kf[1], 0.5, epsilon = 1e-15);
        let kc = apply_k(&k, &[3.5, 3.5]);
        assert_abs_diff_eq!(kc[0], 3.5, epsilon = 1e-15);
        assert_abs_diff_eq!(kc[1], 3.5, epsilon = 1e-15);
    }

    #[test]
    fn apply_k_hat_examples() {
        let k = two_point();
        let pi = k.target().values().to_vec();
        let kp = apply_k_hat(&k, &pi);
        assert_abs_diff_eq!(kp[0], pi[0], epsilon = 1e-12);
        assert_abs_diff_eq!(kp[1], pi[1], epsilon = 1e-12);
        let kf = apply_k_hat(&k, &[1.0, 0.0]);
        assert_abs_diff_eq!(kf[0], 5.0 / 6.0, epsilon = 1e-15);
        assert_abs_diff_eq!(kf[1], 1.0 / 6.0, epsilon = 1e-15);
    }

    #[test]
    fn operator_view_dispatches() {
        let k = two_point();
        let conj = OperatorView::new(&k, Direction::Conjugate, 2)
            .apply(&[1.0, 0.0])
            .unwrap();
        assert_eq!(conj, apply_k(&k, &apply_k(&k, &[1.0, 0.0])));
        let tr = OperatorView::transition(&k).apply(&[1.0, 0.0]).unwrap();
        assert_eq!(tr, apply_k_hat(&k, &[1.0, 0.0]));
        assert!(OperatorView::conjugate(&k).apply(&[1.0]).is_err());
    }

    #[test]
    fn contraction_examples() {
        let k = two_point();
        let (a, b) = check_contraction(&k, &[1.0, 1.0]);
        assert_abs_diff_eq!(a, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(b, 1.0, epsilon = 1e-15);
        let (kf, f) = check_contraction(&k, &[1.0, 0.0]);
        assert_abs_diff_eq!(f * f, 0.75, epsilon = 1e-15);
        let oracle = 0.75 * (5.0f64 / 6.0).powi(2) + 0.25 * 0.25;
        assert_abs_diff_eq!(kf * kf, oracle, epsilon = 1e-15);
        assert!(kf < f);
    }

    #[test]
    fn self_adjoint_examples() {
        let k = two_point();
        assert_eq!(check_self_adjoint(&k, &[0.3, -2.0], &[0.3, -2.0]), 0.0);
        let t = k.target();
        let lhs = pi_inner(t, &apply_k(&k, &[1.0, 0.0]), &[0.0, 1.0]);
        let rhs = pi_inner(t, &[1.0, 0.0], &apply_k(&k, &[0.0, 1.0]));
        assert_abs_diff_eq!(lhs, 0.125, epsilon = 1e-15);
        assert_abs_diff_eq!(rhs, 0.125, epsilon = 1e-15);
        assert!(check_self_adjoint(&k, &[1.0, 0.0], &[0.0, 1.0]) < 1e-15);
    }

    #[test]
    fn quadratic_forms_two_point() {
        let k = two_point();
        let ones = quadratic_form_sequence(&k, &[1.0, 1.0], 1, 5);
        assert!(ones.iter().all(|s| (s - 1.0).abs() < 1e-14));
        for nu in 1..=3 {
            let s = quadratic_form_sequence(&k, &[1.0, -3.0], nu, 6);
            for (n, v) in s.iter().enumerate() {
                let oracle = 3.0 * (1.0f64 / 9.0).powi((nu * n) as i32);
                assert_abs_diff_eq!(*v, oracle, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn quadratic_forms_converge_to_squared_mean() {
        let k = two_point();
        let f = [2.0, -1.0];
        let mean = pi_inner(k.target(), &f, &[1.0, 1.0]);
        let s = quadratic_form_sequence(&k, &f, 1, 40);
        assert_abs_diff_eq!(s[40], mean * mean, epsilon = 1e-14);
    }

    #[test]
    fn operator_inequality_two_point() {
        let k = two_point();
        let (l, r) =
            verify_operator_inequality(&k, &[1.0, 1.0], 1, 1, 1, OperatorNormBound::Coarse);
        assert_abs_diff_eq!(l, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r, 0.0, epsilon = 1e-15);
        let (l, r) =
            verify_operator_inequality(&k, &[1.0, -3.0], 1, 1, 1, OperatorNormBound::Coarse);
        let eig = 8.0 / 81.0;
        assert_abs_diff_eq!(l, eig * eig * 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(r, 2.0 * eig * 3.0, epsilon = 1e-14);
        assert!(l < r);
        let spec = Spectrum::of(&k);
        assert_abs_diff_eq!(spec.difference_norm(1, 1, 1), eig, epsilon = 1e-14);
        let (l, r) = verify_operator_inequality(
            &k,
            &[1.0, -3.0],
            1,
            1,
            1,
            OperatorNormBound::Exact(spec.difference_norm(1, 1, 1)),
        );
        // the non-constant eigenvector makes the exact bound tight
        assert_abs_diff_eq!(l, r, epsilon = 1e-14);
    }

    #[test]
    fn spectrum_two_point() {
        let k = two_point();
        let spec = Spectrum::of(&k);
        // characteristic polynomial: trace 4/3, determinant 1/3
        let (tr, det) = (4.0 / 3.0, 1.0 / 3.0);
        let disc: f64 = tr * tr / 4.0 - det;
        let roots = [tr / 2.0 + disc.sqrt(), tr / 2.0 - disc.sqrt()];
        assert_abs_diff_eq!(spec.eigenvalues()[0], roots[0], epsilon = 1e-14);
        assert_abs_diff_eq!(spec.eigenvalues()[1], roots[1], epsilon = 1e-14);
        assert_abs_diff_eq!(roots[1], 1.0 / 3.0, epsilon = 1e-15);
        let report = fixed_point_constancy(&k, 1).unwrap();
        assert!(report.simple);
        assert!(report.constancy_spread < 1e-12);
        assert_abs_diff_eq!(report.gap, 2.0 / 3.0, epsilon = 1e-14);
        let top = spec.eigenvector(0);
        assert_abs_diff_eq!(top[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(top[1], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn spectrum_reconstructs_powers() {
        let k = two_point();
        let spec = Spectrum::of(&k);
        let f = [0.3, -1.7];
        for n in 0..12 {
            let direct = apply_k_power(&k, &f, n);
            let via = spec.apply_power(&f, n);
            for (a, b) in direct.iter().zip(&via) {
                assert_abs_diff_eq!(a, b, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn disconnected_kernel_is_refused() {
        let k = blocks();
        let err = fixed_point_constancy(&k, 1).unwrap_err();
        assert_eq!(
            err,
            Error::PositivityFails {
                nu: 1,
                multiplicity: 2
            }
        );
        let diag = fixed_point_diagnostic(&k);
        assert_eq!(diag.unit_multiplicity, 2);
        assert!(!diag.simple);
    }

    #[test]
    fn independence_kernel_is_rank_one() {
        let space = Arc::new(StateSpace::from_weights(vec![1.0, 0.5, 2.0, 1.5]).unwrap());
        let target = TargetDensity::from_unnormalized(space, vec![0.2, 1.0, 0.4, 0.3]).unwrap();
        let k = MhKernel::build(&target, &ProposalFamily::independence(&target)).unwrap();
        let spec = Spectrum::of(&k);
        assert_abs_diff_eq!(spec.eigenvalues()[0], 1.0, epsilon = 1e-12);
        for v in &spec.eigenvalues()[1..] {
            assert_abs_diff_eq!(*v, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn strong_limit_two_point() {
        let k = two_point();
        assert!(strong_limit_trace(&k, &[1.0, 1.0], 5)
            .iter()
            .all(|e| *e == 0.0));
        let e = strong_limit_trace(&k, &[1.0, 0.0], 20);
        let e0 = (0.25f64.powi(2) * 0.75 + 0.75f64.powi(2) * 0.25).sqrt();
        assert_abs_diff_eq!(e[0], e0, epsilon = 1e-15);
        for n in 0..20 {
            assert_abs_diff_eq!(e[n + 1] / e[n], 1.0 / 3.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn strong_limit_fails_without_positivity() {
        let k = blocks();
        let e = strong_limit_trace(&k, &[4.0, 4.0, 0.0, 0.0], 30);
        // the limit is a two-level step function, distance 1 from the mean
        assert_abs_diff_eq!(e[30], 2.0, epsilon = 1e-12);
        assert!(e[30] > 0.5);
    }

    #[test]
    fn duality_holds_on_two_point() {
        let k = two_point();
        let r = duality_residuals(&k, &[0.9, 0.1], 20);
        assert!(r.iter().all(|v| *v < 1e-14));
    }
}
