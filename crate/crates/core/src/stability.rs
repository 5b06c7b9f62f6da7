//! Monte-Carlo verification of argmin stability for finite Gaussian processes.
//!
//! A [`FiniteGp`] is `Omega(t) = m(t) + eta * omega(t)` with `Cov(omega) = K`.
//! Two statements are checked on sampled argmins:
//!
//! * the conditioned bound
//!   `P(t* = t) <= (1 + c) P(t* = t and not E) + delta`, where `E` is the event
//!   that a far index (`K(s,t*)/K(t*,t*) <= 1 - rho^2`) comes within `tau` of the
//!   minimum, `c = 2 tau / (eta kappa^2 rho^2) (G + sqrt(log(2/delta)))`;
//! * the distributional bound `P(f* = f) <= (1 + c') P(f*' = f) + delta` for two
//!   means within `tau` in sup norm, `c' = 32 tau / (eta rho^2) (G + sqrt(2 log(2/delta)))`.
//!
//! `G = E[sup omega]` is itself estimated; the noise threshold uses its upper
//! confidence value and the multiplicative allowance its lower one.

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fclass::FunctionClass;
use crate::perturb::{fill_gaussian, McEstimate, Restriction, DEFAULT_COMPLEXITY_TRIALS};
use crate::rng;
use crate::stats::{bonferroni_z, wilson_interval, Moments, CONFIDENCE};

const SYMMETRY_TOL: f64 = 1e-9;
const EIGEN_TOL: f64 = 1e-9;
const DIAG_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct GpSpec {
    mean: Vec<f64>,
    kernel: Vec<Vec<f64>>,
    eta: f64,
}

/// A Gaussian process over a finite index set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GpSpec", into = "GpSpec")]
pub struct FiniteGp {
    mean: Vec<f64>,
    kernel: Vec<Vec<f64>>,
    eta: f64,
    /// Row-major `N x N` factor `L` with `L L^T = K`.
    factor: Vec<f64>,
}

impl TryFrom<GpSpec> for FiniteGp {
    type Error = Error;
    fn try_from(s: GpSpec) -> Result<Self> {
        FiniteGp::new(s.mean, s.kernel, s.eta)
    }
}

impl From<FiniteGp> for GpSpec {
    fn from(g: FiniteGp) -> Self {
        GpSpec { mean: g.mean, kernel: g.kernel, eta: g.eta }
    }
}

fn validate_kernel(kernel: &[Vec<f64>]) -> Result<Vec<f64>> {
    let n = kernel.len();
    if n == 0 {
        return Err(Error::Empty("kernel"));
    }
    for (i, row) in kernel.iter().enumerate() {
        if row.len() != n {
            return Err(Error::DimensionMismatch(format!("kernel row {i} has {} entries, expected {n}", row.len())));
        }
        if let Some(v) = row.iter().find(|v| !v.is_finite()) {
            return Err(Error::invalid("kernel", format!("non-finite entry {v} in row {i}")));
        }
        let d = row[i];
        if !(-DIAG_TOL..=1.0 + DIAG_TOL).contains(&d) {
            return Err(Error::invalid("kernel", format!("diagonal entry {i} = {d} outside [0, 1]")));
        }
        for j in 0..i {
            if (kernel[i][j] - kernel[j][i]).abs() > SYMMETRY_TOL {
                return Err(Error::invalid("kernel", format!("not symmetric at ({i}, {j})")));
            }
        }
    }
    let k = DMatrix::from_fn(n, n, |i, j| 0.5 * (kernel[i][j] + kernel[j][i]));
    let eig = SymmetricEigen::new(k);
    let min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    if min < -EIGEN_TOL {
        return Err(Error::NotPsd(min));
    }
    let mut factor = vec![0.0; n * n];
    for j in 0..n {
        let s = eig.eigenvalues[j].max(0.0).sqrt();
        for i in 0..n {
            factor[i * n + j] = eig.eigenvectors[(i, j)] * s;
        }
    }
    Ok(factor)
}

impl FiniteGp {
    pub fn new(mean: Vec<f64>, kernel: Vec<Vec<f64>>, eta: f64) -> Result<Self> {
        let factor = validate_kernel(&kernel)?;
        if mean.len() != kernel.len() {
            return Err(Error::DimensionMismatch(format!(
                "mean has {} entries, kernel is {}x{}",
                mean.len(),
                kernel.len(),
                kernel.len()
            )));
        }
        if mean.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("mean", "entries must be finite"));
        }
        check_eta(eta)?;
        Ok(FiniteGp { mean, kernel, eta, factor })
    }

    pub fn len(&self) -> usize {
        self.mean.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mean.is_empty()
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn kernel(&self) -> &[Vec<f64>] {
        &self.kernel
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn with_eta(&self, eta: f64) -> Result<Self> {
        check_eta(eta)?;
        Ok(FiniteGp { eta, ..self.clone() })
    }

    pub fn with_mean(&self, mean: Vec<f64>) -> Result<Self> {
        if mean.len() != self.len() {
            return Err(Error::DimensionMismatch(format!("mean has {} entries, expected {}", mean.len(), self.len())));
        }
        if mean.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("mean", "entries must be finite"));
        }
        Ok(FiniteGp { mean, ..self.clone() })
    }

    fn omega_into(&self, z: &[f64], out: &mut [f64]) {
        let n = self.len();
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.factor[i * n..(i + 1) * n].iter().zip(z).map(|(a, b)| a * b).sum();
        }
    }

    /// Lowest index minimising `Omega` for the noise realisation `omega`.
    fn argmin(&self, omega: &[f64], values: &mut [f64]) -> usize {
        let mut best = 0;
        let mut best_val = f64::INFINITY;
        for (t, (v, (m, w))) in values.iter_mut().zip(self.mean.iter().zip(omega)).enumerate() {
            *v = m + self.eta * w;
            if *v < best_val {
                best_val = *v;
                best = t;
            }
        }
        best
    }
}

fn check_eta(eta: f64) -> Result<()> {
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::invalid("eta", format!("must be positive and finite, got {eta}")));
    }
    Ok(())
}

/// Runs `trials` draws of `omega` in fixed chunks with one substream each.
fn run_trials<A, I, S>(gp: &FiniteGp, trials: usize, seed: u64, component: &str, init: I, step: S) -> Vec<A>
where
    A: Send,
    I: Fn() -> A + Sync,
    S: Fn(&mut A, &[f64]) + Sync,
{
    rng::chunks(trials)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(chunk, n)| {
            let mut rng = rng::substream(seed, component, chunk);
            let mut z = vec![0.0; gp.len()];
            let mut omega = vec![0.0; gp.len()];
            let mut acc = init();
            for _ in 0..n {
                fill_gaussian(&mut rng, &mut z);
                gp.omega_into(&z, &mut omega);
                step(&mut acc, &omega);
            }
            acc
        })
        .collect()
}

fn sum_counts(parts: Vec<Vec<u64>>, n: usize) -> Vec<u64> {
    parts.into_iter().fold(vec![0; n], |mut acc, c| {
        acc.iter_mut().zip(c).for_each(|(a, b)| *a += b);
        acc
    })
}

fn argmin_counts(gp: &FiniteGp, trials: usize, seed: u64, component: &str) -> Vec<u64> {
    let n = gp.len();
    let parts = run_trials(
        gp,
        trials,
        seed,
        component,
        || (vec![0u64; n], vec![0.0; n]),
        |(counts, values), omega| counts[gp.argmin(omega, values)] += 1,
    );
    sum_counts(parts.into_iter().map(|(c, _)| c).collect(), n)
}

/// Empirical distribution of `argmin_t Omega(t)` over `trials` draws.
pub fn sample_argmin_distribution(gp: &FiniteGp, trials: usize, seed: u64) -> Result<Vec<f64>> {
    if trials == 0 {
        return Err(Error::invalid("trials", "must be at least 1"));
    }
    let counts = argmin_counts(gp, trials, seed, "gp-argmin");
    Ok(counts.into_iter().map(|c| c as f64 / trials as f64).collect())
}

/// Monte-Carlo estimate of `E[sup_t omega(t)]` for the process' kernel.
pub fn gp_complexity(gp: &FiniteGp, trials: usize, seed: u64) -> Result<McEstimate> {
    if trials < 2 {
        return Err(Error::invalid("trials", format!("need at least 2, got {trials}")));
    }
    let parts = run_trials(gp, trials, seed, "gp-complexity", Moments::default, |m, omega| {
        m.push(omega.iter().copied().fold(f64::NEG_INFINITY, f64::max))
    });
    Ok(McEstimate::from_moments(&parts.into_iter().fold(Moments::default(), Moments::merge)))
}

/// `K(f, g) = (1/m) sum_i f(z_i) g(z_i)` over the given points.
pub fn kernel_from_class(class: &FunctionClass, points: &[usize]) -> Result<Vec<Vec<f64>>> {
    let r = Restriction::new(class, points)?;
    let n = r.n_functions();
    let mut k = vec![vec![0.0; n]; n];
    for f in 0..n {
        for g in f..n {
            let v = r.kernel(f, g);
            k[f][g] = v;
            k[g][f] = v;
        }
    }
    Ok(k)
}

/// `sqrt(K(s,s) + K(t,t) - 2 K(s,t))`, clamped at zero.
pub fn kernel_distance(kernel: &[Vec<f64>], s: usize, t: usize) -> f64 {
    (kernel[s][s] + kernel[t][t] - 2.0 * kernel[s][t]).max(0.0).sqrt()
}

/// Smallest kernel distance between distinct indices (`inf` for one index).
pub fn kernel_separation(kernel: &[Vec<f64>]) -> f64 {
    let n = kernel.len();
    let mut best = f64::INFINITY;
    for s in 0..n {
        for t in s + 1..n {
            best = best.min(kernel_distance(kernel, s, t));
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StabilityKind {
    Conditioned,
    Distributional,
}

/// One checked inequality `lhs <= (1 + factor) rhs + delta` for an index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexMargin {
    pub index: usize,
    /// 0 for the primary ordering, 1 for the swapped ordering of a pair.
    pub ordering: u8,
    pub lhs: f64,
    pub lhs_ci: [f64; 2],
    pub rhs: f64,
    pub rhs_ci: [f64; 2],
    /// `(1 + factor) rhs + delta - lhs` from point estimates.
    pub margin: f64,
    /// Same margin with `lhs` at its upper and `rhs` at its lower confidence
    /// value.
    pub margin_strict: f64,
    /// Same margin with `lhs` at its lower and `rhs` at its upper confidence
    /// value; negative means a statistically significant violation.
    pub margin_slack: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityVerdict {
    pub kind: StabilityKind,
    pub trials: usize,
    pub eta: f64,
    pub eta_threshold: f64,
    /// Whether `eta` meets the threshold under which the bound is stated.
    pub bound_claimed: bool,
    pub complexity: McEstimate,
    pub factor: f64,
    pub delta: f64,
    pub z: f64,
    pub frequencies: Vec<f64>,
    pub frequencies_prime: Option<Vec<f64>>,
    pub margins: Vec<IndexMargin>,
    /// Positions in `margins` of significant violations of a claimed bound.
    pub violations: Vec<usize>,
    pub pass: bool,
}

fn check_common(rho: f64, tau: f64, delta: f64, trials: usize) -> Result<()> {
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(Error::invalid("rho", format!("must lie in (0, 1], got {rho}")));
    }
    if !(tau >= 0.0 && tau.is_finite()) {
        return Err(Error::invalid("tau", format!("must be nonnegative, got {tau}")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid("delta", format!("must lie in (0, 1), got {delta}")));
    }
    if trials < 2 {
        return Err(Error::invalid("trials", format!("need at least 2, got {trials}")));
    }
    Ok(())
}

fn complexity_for(gp: &FiniteGp, seed: u64) -> Result<McEstimate> {
    gp_complexity(gp, DEFAULT_COMPLEXITY_TRIALS, rng::derive_seed(seed, "stability-complexity", 0))
}

fn lower_g(g: &McEstimate) -> f64 {
    g.upper(-2.0).max(0.0)
}

fn conditioned_coefficient(rho: f64, tau: f64, delta: f64, kappa: f64, g: f64) -> f64 {
    2.0 * tau / (kappa * kappa * rho * rho) * (g + (2.0 / delta).ln().sqrt())
}

fn distributional_coefficient(rho: f64, tau: f64, delta: f64, g: f64) -> f64 {
    32.0 * tau / (rho * rho) * (g + (2.0 * (2.0 / delta).ln()).sqrt())
}

fn check_kappa(gp: &FiniteGp, kappa: f64) -> Result<()> {
    if !(kappa > 0.0 && kappa <= 1.0) {
        return Err(Error::invalid("kappa", format!("must lie in (0, 1], got {kappa}")));
    }
    let k2 = kappa * kappa;
    for (t, row) in gp.kernel.iter().enumerate() {
        if row[t] < k2 - DIAG_TOL {
            return Err(Error::Precondition(format!("kappa^2 = {k2} exceeds K({t},{t}) = {}", row[t])));
        }
    }
    Ok(())
}

/// Smallest `eta` for which the conditioned bound is claimed, together with
/// the complexity estimate it was computed from (same seed as the check).
pub fn conditioned_eta_threshold(
    gp: &FiniteGp,
    rho: f64,
    tau: f64,
    delta: f64,
    kappa: f64,
    seed: u64,
) -> Result<(f64, McEstimate)> {
    check_common(rho, tau, delta, 2)?;
    check_kappa(gp, kappa)?;
    let g = complexity_for(gp, seed)?;
    Ok((conditioned_coefficient(rho, tau, delta, kappa, g.conservative_upper()), g))
}

/// Smallest `eta` for which the distributional bound is claimed.
pub fn distributional_eta_threshold(
    kernel: &[Vec<f64>],
    rho: f64,
    tau: f64,
    delta: f64,
    seed: u64,
) -> Result<(f64, McEstimate)> {
    check_common(rho, tau, delta, 2)?;
    let gp = FiniteGp::new(vec![0.0; kernel.len()], kernel.to_vec(), 1.0)?;
    let g = complexity_for(&gp, seed)?;
    Ok((distributional_coefficient(rho, tau, delta, g.conservative_upper()), g))
}

struct Assessment {
    margins: Vec<IndexMargin>,
    violations: Vec<usize>,
}

fn margin(
    index: usize,
    ordering: u8,
    lhs: u64,
    rhs: u64,
    trials: usize,
    z: f64,
    factor: f64,
    delta: f64,
) -> IndexMargin {
    let n = trials as u64;
    let (llo, lhi) = wilson_interval(lhs, n, z);
    let (rlo, rhi) = wilson_interval(rhs, n, z);
    let lp = lhs as f64 / trials as f64;
    let rp = rhs as f64 / trials as f64;
    let bound = |r: f64| (1.0 + factor) * r + delta;
    IndexMargin {
        index,
        ordering,
        lhs: lp,
        lhs_ci: [llo, lhi],
        rhs: rp,
        rhs_ci: [rlo, rhi],
        margin: bound(rp) - lp,
        margin_strict: bound(rlo) - lhi,
        margin_slack: bound(rhi) - llo,
    }
}

fn assess(margins: Vec<IndexMargin>, claimed: bool) -> Assessment {
    let violations = if claimed {
        margins.iter().enumerate().filter(|(_, m)| m.margin_slack < 0.0).map(|(i, _)| i).collect()
    } else {
        Vec::new()
    };
    Assessment { margins, violations }
}

/// Conditioned far-approximate-minimiser bound, estimated jointly per index.
pub fn check_conditioned_stability(
    gp: &FiniteGp,
    rho: f64,
    tau: f64,
    delta: f64,
    kappa: f64,
    trials: usize,
    seed: u64,
) -> Result<StabilityVerdict> {
    check_common(rho, tau, delta, trials)?;
    check_kappa(gp, kappa)?;
    let g = complexity_for(gp, seed)?;
    let eta_threshold = conditioned_coefficient(rho, tau, delta, kappa, g.conservative_upper());
    let factor = conditioned_coefficient(rho, tau, delta, kappa, lower_g(&g)) / gp.eta;
    let bound_claimed = gp.eta >= eta_threshold;

    let n = gp.len();
    let limit = 1.0 - rho * rho;
    let far: Vec<Vec<usize>> = (0..n)
        .map(|t| {
            let ktt = gp.kernel[t][t];
            (0..n).filter(|&s| s != t && ktt > 0.0 && gp.kernel[s][t] / ktt <= limit).collect()
        })
        .collect();

    let parts = run_trials(
        gp,
        trials,
        seed,
        "conditioned",
        || (vec![0u64; n], vec![0u64; n], vec![0.0; n]),
        |(hit, clean, values), omega| {
            let t = gp.argmin(omega, values);
            hit[t] += 1;
            let cutoff = values[t] + tau;
            if !far[t].iter().any(|&s| values[s] <= cutoff) {
                clean[t] += 1;
            }
        },
    );
    let (mut hit, mut clean) = (vec![0u64; n], vec![0u64; n]);
    for (h, c, _) in parts {
        hit.iter_mut().zip(h).for_each(|(a, b)| *a += b);
        clean.iter_mut().zip(c).for_each(|(a, b)| *a += b);
    }

    let z = bonferroni_z(CONFIDENCE, 2 * n);
    let margins = (0..n).map(|t| margin(t, 0, hit[t], clean[t], trials, z, factor, delta)).collect();
    let a = assess(margins, bound_claimed);
    Ok(StabilityVerdict {
        kind: StabilityKind::Conditioned,
        trials,
        eta: gp.eta,
        eta_threshold,
        bound_claimed,
        complexity: g,
        factor,
        delta,
        z,
        frequencies: hit.iter().map(|&c| c as f64 / trials as f64).collect(),
        frequencies_prime: None,
        pass: a.violations.is_empty(),
        margins: a.margins,
        violations: a.violations,
    })
}

/// Two processes sharing kernel and noise scale, differing in their means.
#[derive(Debug, Clone, PartialEq)]
pub struct GpPair {
    pub first: FiniteGp,
    pub second: FiniteGp,
}

impl GpPair {
    pub fn new(mean: Vec<f64>, mean_prime: Vec<f64>, kernel: Vec<Vec<f64>>, eta: f64) -> Result<Self> {
        let first = FiniteGp::new(mean, kernel, eta)?;
        let second = first.with_mean(mean_prime)?;
        Ok(GpPair { first, second })
    }

    pub fn mean_gap(&self) -> f64 {
        self.first.mean.iter().zip(&self.second.mean).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

/// Distributional bound between the argmins of two mean-shifted processes,
/// checked in both orderings.
pub fn check_distributional_stability(
    pair: &GpPair,
    rho: f64,
    tau: f64,
    delta: f64,
    trials: usize,
    seed: u64,
) -> Result<StabilityVerdict> {
    check_common(rho, tau, delta, trials)?;
    let gap = pair.mean_gap();
    if gap > tau + 1e-12 {
        return Err(Error::Precondition(format!("sup |m - m'| = {gap} exceeds tau = {tau}")));
    }
    let sep = kernel_separation(&pair.first.kernel);
    if sep < rho - 1e-12 {
        return Err(Error::Precondition(format!("kernel separation {sep} is below rho = {rho}")));
    }
    let gp = &pair.first;
    let g = complexity_for(gp, seed)?;
    let eta_threshold = distributional_coefficient(rho, tau, delta, g.conservative_upper());
    let factor = distributional_coefficient(rho, tau, delta, lower_g(&g)) / gp.eta;
    let bound_claimed = gp.eta >= eta_threshold;

    let n = gp.len();
    let a = argmin_counts(&pair.first, trials, seed, "distributional-first");
    let b = argmin_counts(&pair.second, trials, seed, "distributional-second");
    let z = bonferroni_z(CONFIDENCE, 2 * n);
    let mut margins = Vec::with_capacity(2 * n);
    for t in 0..n {
        margins.push(margin(t, 0, a[t], b[t], trials, z, factor, delta));
        margins.push(margin(t, 1, b[t], a[t], trials, z, factor, delta));
    }
    let assessed = assess(margins, bound_claimed);
    let freq = |c: &[u64]| c.iter().map(|&v| v as f64 / trials as f64).collect::<Vec<_>>();
    Ok(StabilityVerdict {
        kind: StabilityKind::Distributional,
        trials,
        eta: gp.eta,
        eta_threshold,
        bound_claimed,
        complexity: g,
        factor,
        delta,
        z,
        frequencies: freq(&a),
        frequencies_prime: Some(freq(&b)),
        pass: assessed.violations.is_empty(),
        margins: assessed.margins,
        violations: assessed.violations,
    })
}

/// On-disk stability instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityFixture {
    pub mean: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_prime: Option<Vec<f64>>,
    pub kernel: Vec<Vec<f64>>,
    pub eta: f64,
    pub rho: f64,
    pub tau: f64,
    pub delta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
}

impl StabilityFixture {
    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn gp(&self) -> Result<FiniteGp> {
        FiniteGp::new(self.mean.clone(), self.kernel.clone(), self.eta)
    }

    pub fn pair(&self) -> Result<GpPair> {
        let prime = self
            .mean_prime
            .clone()
            .ok_or_else(|| Error::invalid("mean_prime", "required for the distributional check"))?;
        GpPair::new(self.mean.clone(), prime, self.kernel.clone(), self.eta)
    }
}
