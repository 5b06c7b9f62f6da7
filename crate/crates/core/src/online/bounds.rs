//! Closed-form regret bounds and the eta tuning rule.

use crate::error::{Error, Result};

fn check_positive(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("must be positive, got {v}")))
    }
}

/// Smallest eta for which the per-round stability bound applies:
/// `(64 B / rho^2) (G + sqrt(log(2/delta)))`.
pub fn theorem_eta_threshold(bound: f64, rho: f64, delta: f64, g_upper: f64) -> Result<f64> {
    check_positive("B", bound)?;
    check_positive("rho", rho)?;
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::invalid("delta", format!("must lie in (0,1], got {delta}")));
    }
    Ok(64.0 * bound / (rho * rho) * (g_upper + (2.0 / delta).ln().sqrt()))
}

/// `max(threshold(delta), (2/rho) sqrt(B (L* + log F)))`.
pub fn tune_eta_with_delta(
    bound: f64,
    rho: f64,
    delta: f64,
    n_functions: usize,
    g_upper: f64,
    lstar_hint: f64,
) -> Result<f64> {
    if !(lstar_hint >= 0.0) {
        return Err(Error::invalid("lstar_hint", format!("must be nonnegative, got {lstar_hint}")));
    }
    if n_functions == 0 {
        return Err(Error::Empty("function class"));
    }
    let stability = theorem_eta_threshold(bound, rho, delta, g_upper)?;
    let balance = 2.0 / rho * (bound * (lstar_hint + (n_functions as f64).ln())).sqrt();
    Ok(stability.max(balance))
}

/// Theorem-tuned eta with `delta = 1 / (T |F|)`.
pub fn tune_eta(bound: f64, rho: f64, horizon: u64, n_functions: usize, g_upper: f64, lstar_hint: f64) -> Result<f64> {
    if horizon == 0 {
        return Err(Error::invalid("T", "horizon must be positive"));
    }
    let delta = 1.0 / (horizon as f64 * n_functions.max(1) as f64);
    tune_eta_with_delta(bound, rho, delta, n_functions, g_upper, lstar_hint)
}

/// `1 + 16 sqrt(B log(2 T F) L*) / rho + 64 B log(2 T F) / rho^2`.
pub fn regret_bound_gaussian(bound: f64, rho: f64, horizon: u64, n_functions: usize, lstar: f64) -> Result<f64> {
    check_positive("rho", rho)?;
    check_positive("B", bound)?;
    let log_term = (2.0 * horizon as f64 * n_functions as f64).ln();
    Ok(gaussian_bound_from_log(bound, rho, log_term, lstar))
}

fn gaussian_bound_from_log(bound: f64, rho: f64, log_term: f64, lstar: f64) -> f64 {
    1.0 + 16.0 * (bound * log_term * lstar.max(0.0)).sqrt() / rho + 64.0 * bound * log_term / (rho * rho)
}

/// The gamma-approximability regret curve, without its unspecified absolute
/// constant: `1 + (log F + sqrt(m log F) + gamma) sqrt(L*) + gamma^2
/// + gamma (log F + sqrt(m log F))`. Shape comparison only.
pub fn regret_bound_competitor(n_functions: usize, m: usize, gamma: f64, lstar: f64) -> f64 {
    let log_f = (n_functions.max(1) as f64).ln();
    let spread = log_f + (m as f64 * log_f).sqrt();
    1.0 + (spread + gamma) * lstar.max(0.0).sqrt() + gamma * gamma + gamma * spread
}

/// Dominant `sqrt(m log F L*)` term of [`regret_bound_competitor`]. Any point
/// set separating `F` binary functions has `m >= log2 |F| >= ln |F|`, so this
/// term dominates the `log F sqrt(L*)` term.
pub fn competitor_leading_term(n_functions: usize, m: usize, lstar: f64) -> f64 {
    (m as f64 * (n_functions.max(1) as f64).ln() * lstar.max(0.0)).sqrt()
}

/// `sqrt(log F L*)`: the Gaussian bound's small-loss term with its absolute
/// constant, `1/rho` and the `log T` factor dropped.
pub fn gaussian_leading_term(n_functions: usize, lstar: f64) -> f64 {
    ((n_functions.max(1) as f64).ln() * lstar.max(0.0)).sqrt()
}
