//! Perturbed ERM as an (epsilon, delta)-differentially private learner.
//!
//! The learner returns `argmin_f sum_i l(f(x_i), y_i) + eta * omega(f)` with
//! `omega` the Gaussian process over a rho-separating point set, and
//! `eta = 8 tau / (rho^2 epsilon) * (G + sqrt(2 log(2/delta)))`.
//!
//! [`audit_privacy`] estimates the output distributions on a pair of
//! neighbouring datasets by Monte Carlo and reports the largest observed
//! privacy loss.

use rayon::prelude::*;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::fclass::{
    pairwise_separation, sample_separating_set, DiscreteMeasure, FunctionClass, SeparationCertificate,
};
use crate::oracle::{argmin_perturbed, cumulative_losses, perturbed_erm_dataset, Example, LossSpec, OracleAccount};
use crate::perturb::{fill_gaussian, PerturbationDraw, Restriction};
use crate::rng;
use crate::stats::{bonferroni_z, wilson_interval, CONFIDENCE};

/// Minimum audit size.
pub const MIN_AUDIT_TRIALS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrivacyBudget {
    pub epsilon: f64,
    pub delta: f64,
    /// Largest change of any cumulative loss between neighbouring datasets.
    pub tau: f64,
}

impl PrivacyBudget {
    pub fn new(epsilon: f64, delta: f64) -> Result<Self> {
        Self::with_tau(epsilon, delta, 1.0)
    }

    pub fn with_tau(epsilon: f64, delta: f64, tau: f64) -> Result<Self> {
        let b = PrivacyBudget { epsilon, delta, tau };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0) {
            return Err(Error::invalid("epsilon", format!("must be positive, got {}", self.epsilon)));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::invalid("delta", format!("must lie in (0,1), got {}", self.delta)));
        }
        if !(self.tau > 0.0) {
            return Err(Error::invalid("tau", format!("must be positive, got {}", self.tau)));
        }
        Ok(())
    }
}

fn dp_tail(delta: f64) -> f64 {
    (2.0 * (2.0 / delta).ln()).sqrt()
}

pub fn privacy_eta(rho: f64, budget: &PrivacyBudget, g_upper: f64) -> Result<f64> {
    budget.validate()?;
    if !(rho > 0.0) {
        return Err(Error::invalid("rho", format!("must be positive, got {rho}")));
    }
    Ok(8.0 * budget.tau / (rho * rho * budget.epsilon) * (g_upper + dp_tail(budget.delta)))
}

/// The epsilon guaranteed at noise level `eta`; inverse of [`privacy_eta`].
pub fn privacy_epsilon(eta: f64, rho: f64, delta: f64, tau: f64, g_upper: f64) -> Result<f64> {
    if !(eta > 0.0) || !(rho > 0.0) {
        return Err(Error::invalid("eta/rho", format!("must be positive, got eta={eta}, rho={rho}")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid("delta", format!("must lie in (0,1), got {delta}")));
    }
    Ok(8.0 * tau / (eta * rho * rho) * (g_upper + dp_tail(delta)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRequirement {
    pub n: u64,
    pub uniform_branch: f64,
    pub second_branch: f64,
    pub warnings: Vec<String>,
}

fn check_accuracy_params(alpha: f64, beta: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::invalid("alpha", format!("must lie in (0,1], got {alpha}")));
    }
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::invalid("beta", format!("must lie in (0,1), got {beta}")));
    }
    Ok(())
}

fn requirement(uniform_branch: f64, second_branch: f64, warnings: Vec<String>) -> SampleRequirement {
    let n = uniform_branch.max(second_branch).ceil().max(0.0) as u64;
    SampleRequirement { n, uniform_branch, second_branch, warnings }
}

/// `max((G^2 + log(1/beta)) / alpha^2,
///      (G^2 + sqrt(log(1/delta) log(1/beta))) / (alpha epsilon rho^2))`.
pub fn required_samples(
    alpha: f64,
    beta: f64,
    budget: &PrivacyBudget,
    rho: f64,
    g_upper: f64,
) -> Result<SampleRequirement> {
    check_accuracy_params(alpha, beta)?;
    budget.validate()?;
    if !(rho > 0.0) {
        return Err(Error::invalid("rho", format!("must be positive, got {rho}")));
    }
    let mut warnings = Vec::new();
    if budget.epsilon > 1.0 {
        warnings.push(format!("epsilon = {} > 1: the sample bound is only stated for epsilon <= 1", budget.epsilon));
    }
    let lb = (1.0 / beta).ln();
    let g2 = g_upper * g_upper;
    let uniform = (g2 + lb) / (alpha * alpha);
    let private = (g2 + ((1.0 / budget.delta).ln() * lb).sqrt()) / (alpha * budget.epsilon * rho * rho);
    Ok(requirement(uniform, private, warnings))
}

/// `max((G^2 + log(1/beta)) / alpha^2, eta (G + sqrt(log(1/beta))) / alpha)`.
pub fn accuracy_required_samples(alpha: f64, beta: f64, eta: f64, g_upper: f64) -> Result<SampleRequirement> {
    check_accuracy_params(alpha, beta)?;
    if !(eta >= 0.0) {
        return Err(Error::invalid("eta", format!("must be nonnegative, got {eta}")));
    }
    let lb = (1.0 / beta).ln();
    let uniform = (g_upper * g_upper + lb) / (alpha * alpha);
    let noise = eta * (g_upper + lb.sqrt()) / alpha;
    Ok(requirement(uniform, noise, Vec::new()))
}

/// Where the separating point set of a private run comes from.
#[derive(Debug, Clone, Copy)]
pub enum SeparationSource<'a> {
    Certificate(&'a SeparationCertificate),
    /// Draw `m` points from `mu`; the run then uses half the population
    /// separation of `mu`.
    Sampled {
        mu: &'a DiscreteMeasure,
        m: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrivateOutput {
    pub chosen: usize,
    pub eta: f64,
    /// Separation the noise level was calibrated with (`inf` for one function).
    #[serde(serialize_with = "finite_or_tag")]
    pub rho: f64,
    pub points: Vec<usize>,
    pub g_upper: f64,
    pub budget: PrivacyBudget,
    pub account: OracleAccount,
}

fn finite_or_tag<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else if *v > 0.0 {
        s.serialize_str("infinity")
    } else {
        s.serialize_str("-infinity")
    }
}

fn resolve_points(class: &FunctionClass, source: &SeparationSource<'_>, seed: u64) -> Result<(Vec<usize>, f64)> {
    match source {
        SeparationSource::Certificate(cert) => {
            if !cert.rho.is_positive() {
                return Err(Error::ZeroSeparation);
            }
            Ok((cert.points.clone(), cert.rho.as_f64()))
        }
        SeparationSource::Sampled { mu, m } => {
            let rho = pairwise_separation(class, mu)?;
            if !rho.is_positive() {
                return Err(Error::ZeroSeparation);
            }
            let cert = sample_separating_set(class, mu, *m, rng::derive_seed(seed, "private-points", 0))?;
            Ok((cert.points, rho.as_f64() / 2.0))
        }
    }
}

fn eta_for(rho: f64, budget: &PrivacyBudget, g_upper: f64) -> Result<f64> {
    if rho.is_infinite() {
        budget.validate()?;
        Ok(0.0)
    } else {
        privacy_eta(rho, budget, g_upper)
    }
}

pub fn private_learn(
    class: &FunctionClass,
    source: &SeparationSource<'_>,
    dataset: &[Example],
    loss: &LossSpec,
    budget: &PrivacyBudget,
    g_upper: f64,
    seed: u64,
) -> Result<PrivateOutput> {
    let (points, rho) = resolve_points(class, source, seed)?;
    let eta = eta_for(rho, budget, g_upper)?;
    let draw = PerturbationDraw::gaussian(points.len(), rng::derive_seed(seed, "private-noise", 0));
    let mut account = OracleAccount::new();
    let chosen = perturbed_erm_dataset(class, dataset, loss, eta, &points, &draw, &mut account)?;
    Ok(PrivateOutput { chosen, eta, rho, points, g_upper, budget: *budget, account })
}

/// Number of records by which two datasets differ: replacement of one
/// record, or insertion/removal of one record. Errors beyond one.
pub fn neighbor_distance(s: &[Example], s_prime: &[Example]) -> Result<usize> {
    let d = if s.len() == s_prime.len() {
        s.iter().zip(s_prime).filter(|(a, b)| a != b).count()
    } else {
        let (long, short) = if s.len() > s_prime.len() { (s, s_prime) } else { (s_prime, s) };
        if long.len() != short.len() + 1 {
            usize::MAX
        } else {
            let split = long.iter().zip(short).position(|(a, b)| a != b).unwrap_or(short.len());
            if long[split + 1..] == short[split..] {
                1
            } else {
                usize::MAX
            }
        }
    };
    if d > 1 {
        return Err(Error::Precondition("datasets must differ in at most one record".into()));
    }
    Ok(d)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditFunction {
    pub index: usize,
    #[serde(rename = "freq_S")]
    pub freq_s: f64,
    #[serde(rename = "freq_Sprime")]
    pub freq_s_prime: f64,
    pub ci: AuditCi,
}

/// Wilson intervals of the two output frequencies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AuditCi {
    #[serde(rename = "S")]
    pub s: [f64; 2],
    #[serde(rename = "Sprime")]
    pub s_prime: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub epsilon_target: f64,
    /// Point estimate of the privacy loss; `infinity` when one dataset puts
    /// significant mass on an output the other (statistically) never emits.
    #[serde(serialize_with = "finite_or_tag")]
    pub epsilon_hat: f64,
    /// Lower confidence bound on the privacy loss; the audit passes when it
    /// does not exceed the target.
    #[serde(serialize_with = "finite_or_tag")]
    pub epsilon_lower: f64,
    pub delta: f64,
    pub eta: f64,
    pub trials: usize,
    pub z: f64,
    pub per_function: Vec<AuditFunction>,
    /// Functions left out of some ratio because the denominator's lower
    /// confidence frequency is not above the noise floor `10 / trials`.
    pub excluded: Vec<usize>,
    pub pass: bool,
}

impl AuditReport {
    pub fn is_infinite(&self) -> bool {
        self.epsilon_hat.is_infinite()
    }
}

/// Counts of the perturbed argmin over `trials` independent draws.
pub(crate) fn argmin_counts(
    r: &Restriction,
    losses: &[f64],
    eta: f64,
    trials: usize,
    seed: u64,
    component: &str,
) -> Vec<u64> {
    let parts: Vec<Vec<u64>> = rng::chunks(trials)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(chunk, n)| {
            let mut rng = rng::substream(seed, component, chunk);
            let mut xi = vec![0.0; r.m()];
            let mut omega = vec![0.0; r.n_functions()];
            let mut counts = vec![0u64; r.n_functions()];
            for _ in 0..n {
                fill_gaussian(&mut rng, &mut xi);
                r.perturb_into(&xi, &mut omega);
                counts[argmin_perturbed(losses, &omega, eta)] += 1;
            }
            counts
        })
        .collect();
    parts.into_iter().fold(vec![0u64; r.n_functions()], |mut acc, c| {
        acc.iter_mut().zip(c).for_each(|(a, b)| *a += b);
        acc
    })
}

/// Audit at the calibrated noise level `privacy_eta(rho, budget, g_upper)`.
#[allow(clippy::too_many_arguments)]
pub fn audit_privacy(
    class: &FunctionClass,
    certificate: &SeparationCertificate,
    s: &[Example],
    s_prime: &[Example],
    loss: &LossSpec,
    budget: &PrivacyBudget,
    g_upper: f64,
    trials: usize,
    seed: u64,
) -> Result<AuditReport> {
    if !certificate.rho.is_positive() {
        return Err(Error::ZeroSeparation);
    }
    let eta = eta_for(certificate.rho.as_f64(), budget, g_upper)?;
    audit_privacy_with_eta(class, certificate, s, s_prime, loss, budget, eta, trials, seed)
}

/// Audit at an arbitrary noise level (including the non-private `eta = 0`).
#[allow(clippy::too_many_arguments)]
pub fn audit_privacy_with_eta(
    class: &FunctionClass,
    certificate: &SeparationCertificate,
    s: &[Example],
    s_prime: &[Example],
    loss: &LossSpec,
    budget: &PrivacyBudget,
    eta: f64,
    trials: usize,
    seed: u64,
) -> Result<AuditReport> {
    budget.validate()?;
    neighbor_distance(s, s_prime)?;
    if trials < MIN_AUDIT_TRIALS {
        return Err(Error::invalid(
            "trials",
            format!("{trials} is too small for a 99% audit; need at least {MIN_AUDIT_TRIALS}"),
        ));
    }
    if !(eta >= 0.0) {
        return Err(Error::invalid("eta", format!("must be nonnegative, got {eta}")));
    }
    let r = Restriction::new(class, &certificate.points)?;
    let loss_s = cumulative_losses(class, s, loss)?;
    let loss_sp = cumulative_losses(class, s_prime, loss)?;
    let counts_s = argmin_counts(&r, &loss_s, eta, trials, seed, "audit-s");
    let counts_sp = argmin_counts(&r, &loss_sp, eta, trials, seed, "audit-s-prime");
    Ok(assess(&counts_s, &counts_sp, budget, eta, trials))
}

fn assess(counts_s: &[u64], counts_sp: &[u64], budget: &PrivacyBudget, eta: f64, trials: usize) -> AuditReport {
    let n_f = counts_s.len();
    let n = trials as u64;
    let z = bonferroni_z(CONFIDENCE, 2 * n_f);
    let floor = 10.0 / trials as f64;
    let delta = budget.delta;

    let per_function: Vec<AuditFunction> = (0..n_f)
        .map(|f| {
            let (a, b) = wilson_interval(counts_s[f], n, z);
            let (c, d) = wilson_interval(counts_sp[f], n, z);
            AuditFunction {
                index: f,
                freq_s: counts_s[f] as f64 / trials as f64,
                freq_s_prime: counts_sp[f] as f64 / trials as f64,
                ci: AuditCi { s: [a, b], s_prime: [c, d] },
            }
        })
        .collect();

    let mut excluded = Vec::new();
    let mut best_point = 0.0f64;
    let mut best_lower = 0.0f64;
    for af in &per_function {
        let orderings = [
            (af.freq_s, af.ci.s, af.ci.s_prime, af.freq_s_prime),
            (af.freq_s_prime, af.ci.s_prime, af.ci.s, af.freq_s),
        ];
        for (p_num, ci_num, ci_den, p_den) in orderings {
            if ci_den[0] <= floor {
                if !excluded.contains(&af.index) {
                    excluded.push(af.index);
                }
                if ci_num[0] - delta > 0.0 {
                    best_point = f64::INFINITY;
                    best_lower = f64::INFINITY;
                }
                continue;
            }
            if p_num - delta > 0.0 && p_den > 0.0 {
                best_point = best_point.max(((p_num - delta) / p_den).ln());
            }
            if ci_num[0] - delta > 0.0 {
                best_lower = best_lower.max(((ci_num[0] - delta) / ci_den[1]).ln());
            }
        }
    }
    excluded.sort_unstable();
    AuditReport {
        epsilon_target: budget.epsilon,
        epsilon_hat: best_point.max(0.0),
        epsilon_lower: best_lower.max(0.0),
        delta,
        eta,
        trials,
        z,
        per_function,
        excluded,
        pass: best_lower <= budget.epsilon,
    }
}
