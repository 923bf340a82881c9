//! Deterministic density evolution and total-variation convergence checks.
//!
//! Densities are pushed forward with the transition operator `K̂`. Each
//! trace records the distance to the target together with the `L²(π)` bound
//! `‖K^n[f/π] - γ1‖_π`, which dominates the `L¹` distance by Cauchy–Schwarz.
//! The truncation family `X_m = {π ≥ 1/m}` and the three-term triangle split
//! extend the bound from densities with `f/π ∈ L²(π)` to all of `L¹`.

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::measure_space::{Density, TargetDensity};
use crate::mh_kernel::MhKernel;
use crate::spectral_ops::{apply_k, apply_k_hat, apply_k_hat_power, pi_norm, Spectrum};
use crate::tolerances;

/// One step of a convergence trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepRecord {
    pub n: usize,
    /// `d_TV(f_n, π)`.
    pub tv: f64,
    /// `‖f_n - γπ‖₁`.
    pub l1: f64,
    /// `‖K^n[f_0/π] - γ1‖_π`.
    pub l2pi_bound: f64,
    /// `‖f_n - f_{n-2}‖₁` from step 2 on; at even `n` this is the increment
    /// of the even-power sequence.
    pub cauchy_increment: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportMeta {
    pub kernel_id: String,
    pub initial_id: String,
    pub gamma: f64,
    /// Smallest `nu <= 10` with a strictly positive sub-kernel power.
    pub nu: Option<usize>,
    pub deterministic: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub meta: ReportMeta,
    pub records: Vec<StepRecord>,
}

pub const TRACE_HEADER: &str = "n,tv,l1,l2pi_bound,cauchy_inc";

impl ConvergenceReport {
    pub fn tv_values(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.tv).collect()
    }

    pub fn final_tv(&self) -> f64 {
        self.records.last().map(|r| r.tv).unwrap_or(f64::NAN)
    }

    /// Largest increase `tv_{n+1} - tv_n` (nonpositive for a monotone trace).
    pub fn max_tv_increase(&self) -> f64 {
        self.records
            .windows(2)
            .map(|w| w[1].tv - w[0].tv)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Largest `l1 - l2pi_bound` over the trace.
    pub fn max_sandwich_violation(&self) -> f64 {
        self.records
            .iter()
            .map(|r| r.l1 - r.l2pi_bound)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// First step with `tv < threshold`.
    pub fn first_below(&self, threshold: f64) -> Option<usize> {
        self.records.iter().find(|r| r.tv < threshold).map(|r| r.n)
    }

    /// Comma-separated table with [`TRACE_HEADER`]; empty field where the
    /// increment is undefined.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(64 * (self.records.len() + 1));
        out.push_str(TRACE_HEADER);
        out.push('\n');
        for r in &self.records {
            let inc = r
                .cauchy_increment
                .map(|v| format!("{v:e}"))
                .unwrap_or_default();
            out.push_str(&format!(
                "{},{:e},{:e},{:e},{}\n",
                r.n, r.tv, r.l1, r.l2pi_bound, inc
            ));
        }
        out
    }
}

fn check_same_space(f: &Density, k: &MhKernel) -> Result<()> {
    if !crate::measure_space::same_space(f.space(), k.space()) {
        return Err(Error::SpaceMismatch);
    }
    Ok(())
}

fn fingerprint(values: &[f64]) -> String {
    let mut h = Sha256::new();
    for v in values {
        h.update(v.to_bits().to_le_bytes());
    }
    let d = h.finalize();
    d[..8].iter().map(|b| format!("{b:02x}")).collect()
}

/// `f_0, f_1, …, f_{n_steps}` with `f_n = K̂ f_{n-1}`.
pub fn evolve(f0: &Density, k: &MhKernel, n_steps: usize) -> Result<Vec<Density>> {
    check_same_space(f0, k)?;
    f0.ensure_probability()?;
    let mut out = Vec::with_capacity(n_steps + 1);
    out.push(f0.clone());
    for i in 0..n_steps {
        let next = apply_k_hat(k, out[i].values());
        // K̂ preserves nonnegativity; clamp signed zeros from rounding
        let next = next.into_iter().map(|v| v.max(0.0)).collect();
        out.push(Density::new(f0.space().clone(), next)?);
    }
    Ok(out)
}

/// Full convergence trace of a probability density.
pub fn tv_trace(f0: &Density, k: &MhKernel, n_steps: usize) -> Result<ConvergenceReport> {
    let densities = evolve(f0, k, n_steps)?;
    let target = k.target();
    let space = k.space();
    let gamma = f0.integrate();
    let mut pulled = target.ratio(f0.values());
    let mut records = Vec::with_capacity(n_steps + 1);
    for (n, f) in densities.iter().enumerate() {
        if n > 0 {
            pulled = apply_k(k, &pulled);
        }
        let l1 = space.l1_distance(f.values(), target.values());
        let centered: Vec<f64> = pulled.iter().map(|v| v - gamma).collect();
        let cauchy_increment =
            (n >= 2).then(|| space.l1_distance(f.values(), densities[n - 2].values()));
        records.push(StepRecord {
            n,
            tv: 0.5 * l1,
            l1,
            l2pi_bound: pi_norm(target, &centered),
            cauchy_increment,
        });
    }
    Ok(ConvergenceReport {
        meta: ReportMeta {
            kernel_id: k.id().to_string(),
            initial_id: fingerprint(f0.values()),
            gamma,
            nu: k.first_positive_power(10),
            deterministic: true,
        },
        records,
    })
}

/// One step of [`l2pi_bound_trace`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundStep {
    /// `‖K̂^n f - γπ‖₁`.
    pub l1: f64,
    /// `‖K^n[f/π] - γ1‖_π`.
    pub bound: f64,
}

/// The `L¹` distance and its `L²(π)` bound for signed `f`, `n = 0..=n_steps`.
pub fn l2pi_bound_trace(f: &[f64], k: &MhKernel, n_steps: usize) -> Result<Vec<BoundStep>> {
    k.space().check_len(f)?;
    let target = k.target();
    let space = k.space();
    let gamma = space.integrate(f);
    let mut forward = f.to_vec();
    let mut pulled = target.ratio(f);
    let mut out = Vec::with_capacity(n_steps + 1);
    for n in 0..=n_steps {
        if n > 0 {
            forward = apply_k_hat(k, &forward);
            pulled = apply_k(k, &pulled);
        }
        let limit: Vec<f64> = target.values().iter().map(|p| gamma * p).collect();
        let centered: Vec<f64> = pulled.iter().map(|v| v - gamma).collect();
        out.push(BoundStep {
            l1: space.l1_distance(&forward, &limit),
            bound: pi_norm(target, &centered),
        });
    }
    Ok(out)
}

/// `(‖f‖₁, ‖f/π‖_π)`; the first never exceeds the second.
pub fn l1_embedding(target: &TargetDensity, f: &[f64]) -> Result<(f64, f64)> {
    target.space().check_len(f)?;
    let ratio = target.ratio(f);
    Ok((target.space().l1_norm(f), pi_norm(target, &ratio)))
}

/// Truncation of a function to `X_m = {x : π(x) ≥ 1/m}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TruncationFamily {
    pub m: usize,
    pub mask: Vec<bool>,
    /// `f_[m]`: `f` on `X_m`, zero elsewhere.
    pub truncated: Vec<f64>,
    pub gamma: f64,
    pub gamma_m: f64,
    /// `‖f - f_[m]‖₁`.
    pub tail_l1: f64,
    /// `‖γ_[m]π - γπ‖₁`.
    pub mass_gap_l1: f64,
    /// `‖f_[m]/π‖_π`.
    pub ratio_norm: f64,
    /// `C·m` with `C = max |f|`.
    pub ratio_bound: f64,
}

impl TruncationFamily {
    pub fn mass_bound_holds(&self, tol: f64) -> bool {
        self.mass_gap_l1 <= self.tail_l1 + tol
    }

    pub fn ratio_bound_holds(&self, tol: f64) -> bool {
        self.ratio_norm <= self.ratio_bound + tol
    }
}

pub fn truncate(f: &[f64], target: &TargetDensity, m: usize) -> Result<TruncationFamily> {
    assert!(m >= 1, "truncation level starts at 1");
    let space = target.space();
    space.check_len(f)?;
    let threshold = 1.0 / m as f64;
    let mask: Vec<bool> = target.values().iter().map(|p| *p >= threshold).collect();
    let truncated: Vec<f64> = f
        .iter()
        .zip(&mask)
        .map(|(v, keep)| if *keep { *v } else { 0.0 })
        .collect();
    let gamma = space.integrate(f);
    let gamma_m = space.integrate(&truncated);
    let bound_c = f.iter().map(|v| v.abs()).fold(0.0, f64::max);
    Ok(TruncationFamily {
        m,
        tail_l1: space.l1_distance(f, &truncated),
        mass_gap_l1: (gamma_m - gamma).abs() * target.integrate(),
        ratio_norm: pi_norm(target, &target.ratio(&truncated)),
        ratio_bound: bound_c * m as f64,
        mask,
        truncated,
        gamma,
        gamma_m,
    })
}

/// `f_m = f·1{|f| ≤ m}`.
pub fn bounded_cutoff(f: &[f64], m: f64) -> Vec<f64> {
    f.iter()
        .map(|v| if v.abs() <= m { *v } else { 0.0 })
        .collect()
}

/// `(‖K̂^n f - K̂^n g‖₁, ‖f - g‖₁)`.
pub fn nonexpansive_check(k: &MhKernel, f: &[f64], g: &[f64], n: usize) -> (f64, f64) {
    let space = k.space();
    let kf = apply_k_hat_power(k, f, n);
    let kg = apply_k_hat_power(k, g, n);
    (space.l1_distance(&kf, &kg), space.l1_distance(f, g))
}

/// Increments of the even-power sequences.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CauchyReport {
    /// `‖K̂^{2(n+1)} f - K̂^{2n} f‖₁` for `n = 0..n_max`.
    pub l1_increments: Vec<f64>,
    /// `‖K^{2(n+1)}[f/π] - K^{2n}[f/π]‖_π` for `n = 0..n_max`.
    pub l2_increments: Vec<f64>,
}

impl CauchyReport {
    /// Largest L¹ increment from index `window` on.
    pub fn max_beyond(&self, window: usize) -> f64 {
        self.l1_increments
            .iter()
            .skip(window)
            .copied()
            .fold(0.0, f64::max)
    }

    /// Largest `inc_{n+1} - inc_n` from index `burn_in` on.
    pub fn max_increase_after(&self, burn_in: usize) -> f64 {
        self.l1_increments
            .windows(2)
            .skip(burn_in)
            .map(|w| w[1] - w[0])
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn last(&self) -> f64 {
        self.l1_increments.last().copied().unwrap_or(0.0)
    }
}

pub fn cauchy_check_even_powers(k: &MhKernel, f: &[f64], n_max: usize) -> Result<CauchyReport> {
    k.space().check_len(f)?;
    let space = k.space();
    let target = k.target();
    let mut forward = f.to_vec();
    let mut pulled = target.ratio(f);
    let mut l1_increments = Vec::with_capacity(n_max);
    let mut l2_increments = Vec::with_capacity(n_max);
    for _ in 0..n_max {
        let next_forward = apply_k_hat(k, &apply_k_hat(k, &forward));
        let next_pulled = apply_k(k, &apply_k(k, &pulled));
        l1_increments.push(space.l1_distance(&next_forward, &forward));
        let diff: Vec<f64> = next_pulled
            .iter()
            .zip(&pulled)
            .map(|(a, b)| a - b)
            .collect();
        l2_increments.push(pi_norm(target, &diff));
        forward = next_forward;
        pulled = next_pulled;
    }
    Ok(CauchyReport {
        l1_increments,
        l2_increments,
    })
}

/// The three-term split of `‖K̂^n f - γπ‖₁` through the truncation `f_[m]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TriangleSplit {
    pub m: usize,
    pub n: usize,
    /// `‖K̂^n f - γπ‖₁`.
    pub total: f64,
    /// `‖K̂^n f - K̂^n f_[m]‖₁`.
    pub truncation_drift: f64,
    /// `‖K̂^n f_[m] - γ_[m]π‖₁`.
    pub truncated_convergence: f64,
    /// `‖γ_[m]π - γπ‖₁`.
    pub mass_mismatch: f64,
    /// `‖f - f_[m]‖₁`, which bounds the drift and the mass mismatch.
    pub tail_l1: f64,
    /// `‖K^n[f_[m]/π] - γ_[m]1‖_π`, which bounds the truncated convergence.
    pub truncated_l2_bound: f64,
}

impl TriangleSplit {
    pub fn sum(&self) -> f64 {
        self.truncation_drift + self.truncated_convergence + self.mass_mismatch
    }

    /// Every inequality of the split, within `tol`.
    pub fn holds(&self, tol: f64) -> bool {
        self.total <= self.sum() + tol
            && self.truncation_drift <= self.tail_l1 + tol
            && self.mass_mismatch <= self.tail_l1 + tol
            && self.truncated_convergence <= self.truncated_l2_bound + tol
    }

    /// Whether each addend is below `eps / 3`.
    pub fn certifies(&self, eps: f64) -> bool {
        let third = eps / 3.0;
        self.truncation_drift < third
            && self.truncated_convergence < third
            && self.mass_mismatch < third
    }
}

pub fn triangle_split(k: &MhKernel, f: &[f64], m: usize, n: usize) -> Result<TriangleSplit> {
    let target = k.target();
    let space = k.space();
    let trunc = truncate(f, target, m)?;
    let kf = apply_k_hat_power(k, f, n);
    let kfm = apply_k_hat_power(k, &trunc.truncated, n);
    let scaled = |c: f64| -> Vec<f64> { target.values().iter().map(|p| c * p).collect() };
    let gamma_pi = scaled(trunc.gamma);
    let gamma_m_pi = scaled(trunc.gamma_m);
    let bound = l2pi_bound_trace(&trunc.truncated, k, n)?;
    Ok(TriangleSplit {
        m,
        n,
        total: space.l1_distance(&kf, &gamma_pi),
        truncation_drift: space.l1_distance(&kf, &kfm),
        truncated_convergence: space.l1_distance(&kfm, &gamma_m_pi),
        mass_mismatch: space.l1_distance(&gamma_m_pi, &gamma_pi),
        tail_l1: trunc.tail_l1,
        truncated_l2_bound: bound[n].bound,
    })
}

/// Split through the bounded cutoff `f_m = f·1{|f| ≤ m}`:
/// `‖K̂^n f - γπ‖₁ ≤ ‖K̂^n f_m - γ_m π‖₁ + 2‖f_m - f‖₁`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CutoffSplit {
    pub total: f64,
    pub bounded_term: f64,
    pub cutoff_l1: f64,
}

impl CutoffSplit {
    pub fn holds(&self, tol: f64) -> bool {
        self.total <= self.bounded_term + 2.0 * self.cutoff_l1 + tol
    }
}

pub fn cutoff_split(k: &MhKernel, f: &[f64], m: f64, n: usize) -> Result<CutoffSplit> {
    k.space().check_len(f)?;
    let space = k.space();
    let pi = k.target().values();
    let fm = bounded_cutoff(f, m);
    let gamma = space.integrate(f);
    let gamma_m = space.integrate(&fm);
    let kf = apply_k_hat_power(k, f, n);
    let kfm = apply_k_hat_power(k, &fm, n);
    let full: Vec<f64> = pi.iter().map(|p| gamma * p).collect();
    let part: Vec<f64> = pi.iter().map(|p| gamma_m * p).collect();
    Ok(CutoffSplit {
        total: space.l1_distance(&kf, &full),
        bounded_term: space.l1_distance(&kfm, &part),
        cutoff_l1: space.l1_distance(f, &fm),
    })
}

/// Smallest `n` for which the spectral bound `|λ|^n·e_0 / 2` on `d_TV(f_n, π)`
/// is below `threshold`, with `e_0 = ‖f_0/π - γ1‖_π` and `|λ|` the second
/// eigenvalue modulus. `None` when the spectrum has no gap.
pub fn certified_steps(
    f0: &Density,
    k: &MhKernel,
    spectrum: &Spectrum,
    threshold: f64,
) -> Option<usize> {
    let target = k.target();
    let gamma = f0.integrate();
    let centered: Vec<f64> = target
        .ratio(f0.values())
        .iter()
        .map(|v| v - gamma)
        .collect();
    let e0 = pi_norm(target, &centered);
    if e0 / 2.0 < threshold {
        return Some(0);
    }
    let rate = spectrum.second_modulus();
    if rate >= 1.0 - tolerances::GAP_SIMPLICITY {
        return None;
    }
    if rate == 0.0 {
        return Some(1);
    }
    let n = ((2.0 * threshold / e0).ln() / rate.ln()).floor() as usize + 1;
    Some(n)
}

/// Default step budget `10·⌈1/gap⌉`.
pub fn default_max_steps(gap: f64) -> usize {
    10 * (1.0 / gap).ceil() as usize
}

/// `d_TV` between the target and the limit of the even-power sequence
/// `K̂^{2n} f_0`; zero whenever eigenvalue 1 is simple and -1 is absent.
pub fn predicted_plateau(f0: &Density, k: &MhKernel, spectrum: &Spectrum) -> f64 {
    let target = k.target();
    let limit = target.times(&spectrum.even_limit(&target.ratio(f0.values()), 1e-9));
    0.5 * k.space().l1_distance(&limit, target.values())
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::measure_space::StateSpace;
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

    fn row_vector_steps(p: [[f64; 2]; 2], f: [f64; 2], n: usize) -> [f64; 2] {
        (0..n).fold(f, |v, _| {
            [
                v[0] * p[0][0] + v[1] * p[1][0],
                v[0] * p[0][1] + v[1] * p[1][1],
            ]
        })
    }

    #[test]
    fn evolve_two_point() {
        let k = two_point();
        let f0 = Density::point_mass(k.space().clone(), 0).unwrap();
        let fs = evolve(&f0, &k, 2).unwrap();
        let p = [[5.0 / 6.0, 1.0 / 6.0], [0.5, 0.5]];
        for n in 0..=2 {
            let oracle = row_vector_steps(p, [1.0, 0.0], n);
            assert_abs_diff_eq!(fs[n].values()[0], oracle[0], epsilon = 1e-15);
            assert_abs_diff_eq!(fs[n].values()[1], oracle[1], epsilon = 1e-15);
        }
        assert_abs_diff_eq!(fs[1].values()[0], 5.0 / 6.0, epsilon = 1e-15);
        assert_abs_diff_eq!(fs[2].values()[0], 7.0 / 9.0, epsilon = 1e-15);
        assert_abs_diff_eq!(fs[2].values()[1], 2.0 / 9.0, epsilon = 1e-15);
    }

    #[test]
    fn evolve_from_target_is_constant() {
        let k = two_point();
        let fs = evolve(k.target(), &k, 5).unwrap();
        for f in &fs {
            assert!(f.tv_distance(k.target()).unwrap() < 1e-15);
        }
    }

    #[test]
    fn evolve_rejects_non_densities() {
        let k = two_point();
        let f = Density::new(k.space().clone(), vec![0.5, 0.1]).unwrap();
        assert!(matches!(
            evolve(&f, &k, 1),
            Err(Error::NotNormalized { .. })
        ));
    }

    #[test]
    fn independence_converges_in_one_step() {
        let space = Arc::new(StateSpace::from_weights(vec![1.0, 0.5, 2.0]).unwrap());
        let target = TargetDensity::from_unnormalized(space.clone(), vec![0.2, 1.0, 0.4]).unwrap();
        let k = MhKernel::build(&target, &ProposalFamily::independence(&target)).unwrap();
        let f0 = Density::point_mass(space, 2).unwrap();
        let fs = evolve(&f0, &k, 1).unwrap();
        assert!(fs[1].tv_distance(&target).unwrap() < 1e-15);
    }

    #[test]
    fn tv_trace_two_point_closed_form() {
        let k = two_point();
        let f0 = Density::point_mass(k.space().clone(), 0).unwrap();
        let report = tv_trace(&f0, &k, 10).unwrap();
        for r in &report.records {
            assert_abs_diff_eq!(
                r.tv,
                0.25 * (1.0f64 / 3.0).powi(r.n as i32),
                epsilon = 1e-10
            );
            assert_abs_diff_eq!(r.l1, 2.0 * r.tv, epsilon = 1e-12);
            assert!(r.l1 < r.l2pi_bound);
        }
        assert!(report.max_tv_increase() <= 1e-12);
        assert_eq!(report.meta.nu, Some(1));
        let zero = tv_trace(k.target(), &k, 5).unwrap();
        assert!(zero.tv_values().iter().all(|v| *v < 1e-15));
    }

    #[test]
    fn tv_trace_plateaus_without_positivity() {
        let k = blocks();
        let f0 = Density::point_mass(k.space().clone(), 0).unwrap();
        let report = tv_trace(&f0, &k, 30).unwrap();
        // block-wise limit: mass 1/2 on each point of the first block
        assert_abs_diff_eq!(report.final_tv(), 0.5, epsilon = 1e-12);
        let spec = Spectrum::of(&k);
        assert_abs_diff_eq!(predicted_plateau(&f0, &k, &spec), 0.5, epsilon = 1e-12);
        assert_eq!(report.meta.nu, None);
    }

    #[test]
    fn csv_has_fixed_header() {
        let k = two_point();
        let f0 = Density::point_mass(k.space().clone(), 0).unwrap();
        let csv = tv_trace(&f0, &k, 3).unwrap().to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "n,tv,l1,l2pi_bound,cauchy_inc");
        assert_eq!(lines.len(), 5);
        assert!(lines[1].ends_with(','));
        assert!(!lines[3].ends_with(','));
    }

    #[test]
    fn bound_trace_two_point() {
        let k = two_point();
        let steps = l2pi_bound_trace(&[1.0, 0.0], &k, 8).unwrap();
        for w in steps.windows(2) {
            assert_abs_diff_eq!(w[1].l1 / w[0].l1, 1.0 / 3.0, epsilon = 1e-9);
            assert_abs_diff_eq!(w[1].bound / w[0].bound, 1.0 / 3.0, epsilon = 1e-9);
        }
        assert!(steps.iter().all(|s| s.l1 < s.bound));
        let pi = k.target().values().to_vec();
        assert!(l2pi_bound_trace(&pi, &k, 4)
            .unwrap()
            .iter()
            .all(|s| s.l1 < 1e-15 && s.bound < 1e-15));
    }

    #[test]
    fn truncation_full_mask_on_uniform() {
        let space = Arc::new(StateSpace::counting(4).unwrap());
        let target = TargetDensity::new(Density::uniform(space).unwrap()).unwrap();
        let f = [0.1, 0.2, 0.3, 0.4];
        let t = truncate(&f, &target, 4).unwrap();
        assert!(t.mask.iter().all(|b| *b));
        assert_eq!(t.truncated, f.to_vec());
        assert_eq!(t.tail_l1, 0.0);
        assert_eq!(t.mass_gap_l1, 0.0);
        let t1 = truncate(&f, &target, 1).unwrap();
        assert!(t1.mask.iter().all(|b| !*b));
    }

    #[test]
    fn truncation_masks_are_nested() {
        let grid = Arc::new(StateSpace::grid(-6.0, 6.0, 120).unwrap());
        let target = TargetDensity::new(
            Density::from_fn(grid, |x| (-0.5 * x * x).exp())
                .unwrap()
                .normalize()
                .unwrap(),
        )
        .unwrap();
        let f = target.values().to_vec();
        let mut prev = truncate(&f, &target, 1).unwrap();
        for m in 2..=64 {
            let cur = truncate(&f, &target, m).unwrap();
            for (a, b) in prev.mask.iter().zip(&cur.mask) {
                assert!(!*a || *b);
            }
            assert!(cur.tail_l1 <= prev.tail_l1 + 1e-15);
            assert!(cur.mass_bound_holds(1e-12));
            assert!(cur.ratio_bound_holds(1e-12));
            prev = cur;
        }
    }

    #[test]
    fn truncation_tail_matches_direct_sum() {
        let grid = Arc::new(StateSpace::grid(-6.0, 6.0, 120).unwrap());
        let target = TargetDensity::new(
            Density::from_fn(grid, |x| (-0.5 * x * x).exp())
                .unwrap()
                .normalize()
                .unwrap(),
        )
        .unwrap();
        let f = target.values().to_vec();
        let m = 8;
        let t = truncate(&f, &target, m).unwrap();
        let mut tail = 0.0;
        for (i, p) in target.values().iter().enumerate() {
            if *p < 1.0 / m as f64 {
                tail += f[i].abs() * 0.1;
            }
        }
        assert!(tail > 0.0);
        assert_abs_diff_eq!(t.tail_l1, tail, epsilon = 1e-14);
    }

    #[test]
    fn bounded_cutoff_drops_large_values() {
        assert_eq!(
            bounded_cutoff(&[0.5, 3.0, -2.0, -0.1], 1.0),
            vec![0.5, 0.0, 0.0, -0.1]
        );
    }

    #[test]
    fn nonexpansive_two_point() {
        let k = two_point();
        assert_eq!(
            nonexpansive_check(&k, &[0.3, 0.7], &[0.3, 0.7], 3),
            (0.0, 0.0)
        );
        let pi = k.target().values().to_vec();
        let (l, r) = nonexpansive_check(&k, &[1.0, 0.0], &pi, 1);
        assert_abs_diff_eq!(l, 1.0 / 6.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn cauchy_two_point_decays_at_one_ninth() {
        let k = two_point();
        let pi = k.target().values().to_vec();
        let zero = cauchy_check_even_powers(&k, &pi, 5).unwrap();
        assert!(zero.l1_increments.iter().all(|v| *v < 1e-15));
        let c = cauchy_check_even_powers(&k, &[1.0, 0.0], 8).unwrap();
        for w in c.l1_increments.windows(2) {
            assert_abs_diff_eq!(w[1] / w[0], 1.0 / 9.0, epsilon = 1e-8);
        }
        for w in c.l2_increments.windows(2) {
            assert_abs_diff_eq!(w[1] / w[0], 1.0 / 9.0, epsilon = 1e-8);
        }
    }

    #[test]
    fn triangle_split_degenerate_cases() {
        let k = two_point();
        let f = [1.0, 0.0];
        let full = triangle_split(&k, &f, 100, 4).unwrap();
        assert_eq!(full.truncation_drift, 0.0);
        assert_eq!(full.mass_mismatch, 0.0);
        assert_abs_diff_eq!(full.truncated_convergence, full.total, epsilon = 1e-15);
        assert!(full.holds(1e-12));

        let pi = k.target().values().to_vec();
        let zero = triangle_split(&k, &pi, 100, 4).unwrap();
        assert!(zero.sum() < 1e-15 && zero.total < 1e-15);
    }

    #[test]
    fn cutoff_split_holds() {
        let k = two_point();
        let f = [1.5, 0.5];
        for m in [0.1, 0.6, 1.0, 2.0] {
            for n in [0, 1, 5] {
                assert!(cutoff_split(&k, &f, m, n).unwrap().holds(1e-12));
            }
        }
    }

    #[test]
    fn certified_steps_two_point() {
        let k = two_point();
        let spec = Spectrum::of(&k);
        let f0 = Density::point_mass(k.space().clone(), 0).unwrap();
        let n = certified_steps(&f0, &k, &spec, 1e-8).unwrap();
        let report = tv_trace(&f0, &k, n).unwrap();
        assert!(report.final_tv() < 1e-8);
        assert_eq!(certified_steps(k.target(), &k, &spec, 1e-8), Some(0));
        assert_eq!(
            certified_steps(&f0, &blocks(), &Spectrum::of(&blocks()), 1e-8),
            None
        );
        assert_eq!(default_max_steps(2.0 / 3.0), 20);
    }
}
