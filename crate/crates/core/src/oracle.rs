//! Brute-force perturbed ERM oracle:
//! `argmin_f L(f) + eta * omega(f)` over a finite class, with oracle-call
//! accounting (calls times input size).

use serde::{Deserialize, Serialize};

use crate::error::{check_index, Error, Result};
use crate::fclass::FunctionClass;
use crate::perturb::{perturbation_values, PerturbationDraw};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LossKind {
    ZeroOne,
    Absolute,
    Squared,
}

/// A loss on predictions and labels in `[-1, 1]`, bounded by `bound`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossSpec {
    pub kind: LossKind,
    pub bound: f64,
}

impl LossSpec {
    pub fn new(kind: LossKind) -> Self {
        let bound = match kind {
            LossKind::ZeroOne => 1.0,
            LossKind::Absolute => 2.0,
            LossKind::Squared => 4.0,
        };
        LossSpec { kind, bound }
    }

    pub fn zero_one() -> Self {
        Self::new(LossKind::ZeroOne)
    }

    #[inline]
    pub fn eval(&self, prediction: f64, label: f64) -> f64 {
        match self.kind {
            LossKind::ZeroOne => {
                if prediction == label {
                    0.0
                } else {
                    1.0
                }
            }
            LossKind::Absolute => (prediction - label).abs(),
            LossKind::Squared => (prediction - label) * (prediction - label),
        }
    }

    /// Zero-one loss takes binary labels (`0`, `1` or `-1`); the other kinds
    /// take labels in `[-1, 1]`.
    pub fn check_label(&self, label: f64) -> Result<()> {
        let ok = match self.kind {
            LossKind::ZeroOne => label == 0.0 || label == 1.0 || label == -1.0,
            LossKind::Absolute | LossKind::Squared => (-1.0..=1.0).contains(&label),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::invalid("label", format!("{label} is outside the domain of the {:?} loss", self.kind)))
        }
    }
}

/// A labelled domain point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Example {
    pub point: usize,
    pub label: f64,
}

impl Example {
    pub fn new(point: usize, label: f64) -> Self {
        Example { point, label }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct OracleAccount {
    pub calls: u64,
    pub total_input_size: u64,
    pub per_call_sizes: Vec<u64>,
}

impl OracleAccount {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&mut self, input_size: u64) {
        self.calls += 1;
        self.total_input_size += input_size;
        self.per_call_sizes.push(input_size);
    }

    pub fn is_consistent(&self) -> bool {
        self.calls == self.per_call_sizes.len() as u64
            && self.total_input_size == self.per_call_sizes.iter().sum::<u64>()
    }
}

/// Lowest index minimising `losses[f] + eta * omega[f]`.
#[inline]
pub(crate) fn argmin_perturbed(losses: &[f64], omega: &[f64], eta: f64) -> usize {
    let mut best = 0;
    let mut best_val = f64::INFINITY;
    for (f, (l, w)) in losses.iter().zip(omega).enumerate() {
        let v = if eta == 0.0 { *l } else { l + eta * w };
        if v < best_val {
            best_val = v;
            best = f;
        }
    }
    best
}

/// One perturbed ERM oracle call over precomputed cumulative losses.
///
/// `data_count` is the number of labelled examples the losses summarise; the
/// call is charged `data_count + m` inputs.
pub fn perturbed_erm(
    class: &FunctionClass,
    cumulative_loss: &[f64],
    eta: f64,
    points: &[usize],
    draw: &PerturbationDraw,
    data_count: usize,
    account: &mut OracleAccount,
) -> Result<usize> {
    if cumulative_loss.len() != class.n_functions() {
        return Err(Error::DimensionMismatch(format!(
            "{} cumulative losses for {} functions",
            cumulative_loss.len(),
            class.n_functions()
        )));
    }
    if !(eta >= 0.0) {
        return Err(Error::invalid("eta", format!("must be nonnegative, got {eta}")));
    }
    let omega = perturbation_values(class, points, draw)?;
    account.record((data_count + points.len()) as u64);
    Ok(argmin_perturbed(cumulative_loss, &omega, eta))
}

/// Per-function summed loss over a dataset.
pub fn cumulative_losses(class: &FunctionClass, dataset: &[Example], loss: &LossSpec) -> Result<Vec<f64>> {
    let mut out = vec![0.0; class.n_functions()];
    for ex in dataset {
        check_index("point", ex.point, class.n_points())?;
        loss.check_label(ex.label)?;
        for (f, o) in out.iter_mut().enumerate() {
            *o += loss.eval(class.value(f, ex.point), ex.label);
        }
    }
    Ok(out)
}

pub fn perturbed_erm_dataset(
    class: &FunctionClass,
    dataset: &[Example],
    loss: &LossSpec,
    eta: f64,
    points: &[usize],
    draw: &PerturbationDraw,
    account: &mut OracleAccount,
) -> Result<usize> {
    let losses = cumulative_losses(class, dataset, loss)?;
    perturbed_erm(class, &losses, eta, points, draw, dataset.len(), account)
}
