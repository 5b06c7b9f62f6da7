//! Gaussian follow-the-perturbed-leader.
//!
//! Each round draws a fresh `xi ~ N(0, I_m)`, plays
//! `f_t = argmin_f L_{t-1}(f) + eta * omega_t(f)` through one oracle call,
//! observes `(x_t, y_t)` and updates every cumulative loss. The trace keeps
//! the regret ledger (`regret = learner loss - L*`) and the be-the-leader
//! diagnostic `sum_t l_t(f_{t+1})`, where `f_{t+1}` is the choice made with
//! round `t+1`'s own draw (a phantom round `T+1` is drawn for the last term).

mod bounds;
mod btl;
mod environment;

pub use bounds::{
    competitor_leading_term, gaussian_leading_term, regret_bound_competitor, regret_bound_gaussian,
    theorem_eta_threshold, tune_eta, tune_eta_with_delta,
};
pub use btl::{btl_check, btl_check_tuned, BtlReport};
pub use environment::Environment;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fclass::{FunctionClass, Separation, SeparationCertificate};
use crate::oracle::{argmin_perturbed, LossSpec, OracleAccount};
use crate::perturb::{gaussian_complexity, McEstimate, Restriction, DEFAULT_COMPLEXITY_TRIALS};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseKind {
    Gaussian,
    /// Standard Laplace coordinates in place of Gaussians; an empirical
    /// baseline with no attached guarantee.
    Laplace,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum EtaPolicy {
    Explicit {
        value: f64,
    },
    /// Tuned from an `L*` hint and a Monte-Carlo Gaussian complexity estimate
    /// (used as `value + 2 stderr`). `delta` defaults to `1/(T |F|)`.
    TheoremTuned {
        lstar_hint: f64,
        #[serde(default)]
        delta: Option<f64>,
        #[serde(default = "default_trials")]
        complexity_trials: usize,
    },
    /// Doubling-trick wrapper around `TheoremTuned`: whenever the leader's
    /// loss within the current epoch exceeds the hint, the hint doubles and
    /// the selection losses restart from zero. No guarantee is claimed for
    /// this mode.
    Doubling {
        initial_hint: f64,
        #[serde(default = "default_trials")]
        complexity_trials: usize,
    },
}

fn default_trials() -> usize {
    DEFAULT_COMPLEXITY_TRIALS
}

impl EtaPolicy {
    pub fn explicit(value: f64) -> Self {
        EtaPolicy::Explicit { value }
    }

    pub fn tuned(lstar_hint: f64) -> Self {
        EtaPolicy::TheoremTuned { lstar_hint, delta: None, complexity_trials: DEFAULT_COMPLEXITY_TRIALS }
    }
}

/// Everything needed to recompute a tuned eta offline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EtaTuning {
    pub loss_bound: f64,
    pub rho: f64,
    pub delta: f64,
    pub horizon: u64,
    pub n_functions: usize,
    pub lstar_hint: f64,
    pub complexity: McEstimate,
    pub g_upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Round {
    pub t: usize,
    pub chosen: usize,
    pub point: usize,
    pub label: f64,
    pub loss: f64,
    pub cum_loss: f64,
    pub cum_leader_loss: f64,
    pub perturbation_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub noise: NoiseKind,
    pub horizon: usize,
    pub n_functions: usize,
    pub m: usize,
    pub rho: Separation,
    /// Final eta (the last epoch's value under the doubling policy).
    pub eta: f64,
    pub eta_tuning: Option<EtaTuning>,
    pub rounds: Vec<Round>,
    pub cumulative_loss: f64,
    pub function_losses: Vec<f64>,
    pub l_star: f64,
    pub regret: f64,
    pub btl_shifted_loss: f64,
    pub account: OracleAccount,
    pub restarts: usize,
}

impl Trace {
    pub const CSV_HEADER: &'static str = "t,chosen,loss,cum_loss,cum_leader_loss,regret";

    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(32 * (self.rounds.len() + 1));
        out.push_str(Self::CSV_HEADER);
        out.push('\n');
        for r in &self.rounds {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.t,
                r.chosen,
                r.loss,
                r.cum_loss,
                r.cum_leader_loss,
                r.cum_loss - r.cum_leader_loss
            ));
        }
        out
    }
}

struct Schedule {
    eta: f64,
    tuning: Option<EtaTuning>,
    doubling: Option<Doubling>,
}

struct Doubling {
    hint: f64,
    ctx: TuneCtx,
}

#[derive(Clone, Copy)]
struct TuneCtx {
    bound: f64,
    rho: f64,
    delta: f64,
    n_functions: usize,
    g_upper: f64,
}

impl TuneCtx {
    fn eta(&self, hint: f64) -> Result<f64> {
        if self.rho.is_infinite() {
            return Ok(0.0);
        }
        tune_eta_with_delta(self.bound, self.rho, self.delta, self.n_functions, self.g_upper, hint)
    }
}

fn schedule(
    class: &FunctionClass,
    cert: &SeparationCertificate,
    loss: &LossSpec,
    horizon: usize,
    policy: &EtaPolicy,
    seed: u64,
) -> Result<Schedule> {
    let (hint, delta, trials, doubling) = match policy {
        EtaPolicy::Explicit { value } => {
            if !(*value >= 0.0) || !value.is_finite() {
                return Err(Error::invalid("eta", format!("must be finite and nonnegative, got {value}")));
            }
            return Ok(Schedule { eta: *value, tuning: None, doubling: None });
        }
        EtaPolicy::TheoremTuned { lstar_hint, delta, complexity_trials } => {
            (*lstar_hint, *delta, *complexity_trials, false)
        }
        EtaPolicy::Doubling { initial_hint, complexity_trials } => (*initial_hint, None, *complexity_trials, true),
    };
    let n_functions = class.n_functions();
    let delta = delta.unwrap_or(1.0 / (horizon as f64 * n_functions as f64));
    let complexity = gaussian_complexity(class, &cert.points, trials, rng::derive_seed(seed, "eta-complexity", 0))?;
    let ctx = TuneCtx {
        bound: loss.bound,
        rho: cert.rho.as_f64(),
        delta,
        n_functions,
        g_upper: complexity.conservative_upper(),
    };
    let eta = ctx.eta(hint)?;
    let tuning = EtaTuning {
        loss_bound: loss.bound,
        rho: ctx.rho,
        delta,
        horizon: horizon as u64,
        n_functions,
        lstar_hint: hint,
        complexity,
        g_upper: ctx.g_upper,
    };
    Ok(Schedule { eta, tuning: Some(tuning), doubling: doubling.then_some(Doubling { hint, ctx }) })
}

fn draw_into(noise: NoiseKind, seed_id: u64, xi: &mut [f64]) {
    let mut r = rng::from_seed_id(seed_id);
    match noise {
        NoiseKind::Gaussian => crate::perturb::fill_gaussian(&mut r, xi),
        NoiseKind::Laplace => xi.copy_from_slice(&crate::perturb::laplace_vector(&mut r, xi.len())),
    }
}

#[allow(clippy::too_many_arguments)]
fn play(
    class: &FunctionClass,
    cert: &SeparationCertificate,
    loss: &LossSpec,
    env: &Environment,
    horizon: usize,
    mut sched: Schedule,
    noise: NoiseKind,
    seed: u64,
) -> Result<Trace> {
    if horizon == 0 {
        return Err(Error::invalid("T", "horizon must be positive"));
    }
    if !cert.rho.is_positive() {
        return Err(Error::ZeroSeparation);
    }
    let restriction = Restriction::new(class, &cert.points)?;
    let examples = env.generate(class, loss, horizon)?;
    let n_f = class.n_functions();
    let m = restriction.m();

    let mut xi = vec![0.0; m];
    let mut omega = vec![0.0; n_f];
    let mut function_losses = vec![0.0; n_f];
    // Losses the leader is selected on; differ from `function_losses` only
    // after a doubling restart.
    let mut selection_losses = vec![0.0; n_f];
    let mut account = OracleAccount::new();
    let mut rounds = Vec::with_capacity(horizon);
    let mut cumulative_loss = 0.0;
    let mut btl_shifted_loss = 0.0;
    let mut restarts = 0;

    for t in 1..=horizon + 1 {
        let seed_t = rng::derive_seed(seed, "ftpl-round", t as u64);
        draw_into(noise, seed_t, &mut xi);
        restriction.perturb_into(&xi, &mut omega);
        let chosen = argmin_perturbed(&selection_losses, &omega, sched.eta);

        if t >= 2 {
            let prev = examples[t - 2];
            btl_shifted_loss += loss.eval(class.value(chosen, prev.point), prev.label);
        }
        if t == horizon + 1 {
            break;
        }
        account.record((t - 1 + m) as u64);

        let ex = examples[t - 1];
        let incurred = loss.eval(class.value(chosen, ex.point), ex.label);
        cumulative_loss += incurred;
        for f in 0..n_f {
            let l = loss.eval(class.value(f, ex.point), ex.label);
            function_losses[f] += l;
            selection_losses[f] += l;
        }
        let leader = function_losses.iter().copied().fold(f64::INFINITY, f64::min);
        rounds.push(Round {
            t,
            chosen,
            point: ex.point,
            label: ex.label,
            loss: incurred,
            cum_loss: cumulative_loss,
            cum_leader_loss: leader,
            perturbation_seed: seed_t,
        });

        if let Some(d) = sched.doubling.as_mut() {
            let epoch_leader = selection_losses.iter().copied().fold(f64::INFINITY, f64::min);
            if epoch_leader > d.hint {
                d.hint = (2.0 * d.hint).max(1.0);
                sched.eta = d.ctx.eta(d.hint)?;
                selection_losses.iter_mut().for_each(|l| *l = 0.0);
                restarts += 1;
            }
        }
    }

    let l_star = function_losses.iter().copied().fold(f64::INFINITY, f64::min);
    if let (Some(tuning), Some(d)) = (sched.tuning.as_mut(), sched.doubling.as_ref()) {
        tuning.lstar_hint = d.hint;
    }
    Ok(Trace {
        noise,
        horizon,
        n_functions: n_f,
        m,
        rho: cert.rho,
        eta: sched.eta,
        eta_tuning: sched.tuning,
        rounds,
        cumulative_loss,
        function_losses,
        l_star,
        regret: cumulative_loss - l_star,
        btl_shifted_loss,
        account,
        restarts,
    })
}

/// Runs Gaussian FTPL for `horizon` rounds. Perturbation draws for round `t`
/// use `rng::derive_seed(seed, "ftpl-round", t)`; the environment carries
/// its own seed.
pub fn run_ftpl(
    class: &FunctionClass,
    certificate: &SeparationCertificate,
    loss: &LossSpec,
    env: &Environment,
    horizon: usize,
    eta_policy: &EtaPolicy,
    seed: u64,
) -> Result<Trace> {
    if horizon == 0 {
        return Err(Error::invalid("T", "horizon must be positive"));
    }
    let sched = schedule(class, certificate, loss, horizon, eta_policy, seed)?;
    play(class, certificate, loss, env, horizon, sched, NoiseKind::Gaussian, seed)
}

/// Same loop as [`run_ftpl`] with standard Laplace coordinates in place of
/// the Gaussian ones.
pub fn run_ftpl_laplace(
    class: &FunctionClass,
    certificate: &SeparationCertificate,
    loss: &LossSpec,
    env: &Environment,
    horizon: usize,
    eta: f64,
    seed: u64,
) -> Result<Trace> {
    let sched = schedule(class, certificate, loss, horizon, &EtaPolicy::explicit(eta), seed)?;
    play(class, certificate, loss, env, horizon, sched, NoiseKind::Laplace, seed)
}
