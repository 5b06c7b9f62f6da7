use serde::{Deserialize, Serialize};

use super::Trace;
use crate::error::{Error, Result};
use crate::perturb::McEstimate;
use crate::stats::Moments;

/// Pooled be-the-leader check over one or more traces:
/// `mean sum_t l_t(f_{t+1}) <= mean L* + 2 eta (G + 2 se_G) + 5 se_lhs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BtlReport {
    pub lhs: f64,
    pub lhs_stderr: f64,
    pub lstar: f64,
    pub rhs: f64,
    pub eta: f64,
    pub complexity: McEstimate,
    pub traces: usize,
    pub pass: bool,
}

pub fn btl_check(traces: &[Trace], eta: f64, complexity: &McEstimate) -> Result<BtlReport> {
    if traces.is_empty() {
        return Err(Error::Empty("trace list"));
    }
    if traces.iter().any(|t| t.rounds.is_empty()) {
        return Err(Error::Precondition("trace without rounds carries no diagnostic".into()));
    }
    let lhs: Moments = traces.iter().map(|t| t.btl_shifted_loss).collect();
    let lstar = traces.iter().map(|t| t.l_star).sum::<f64>() / traces.len() as f64;
    let rhs = lstar + 2.0 * eta * complexity.conservative_upper() + 5.0 * lhs.stderr();
    Ok(BtlReport {
        lhs: lhs.mean(),
        lhs_stderr: lhs.stderr(),
        lstar,
        rhs,
        eta,
        complexity: *complexity,
        traces: traces.len(),
        pass: lhs.mean() <= rhs,
    })
}

/// Same check for theorem-tuned traces, each charged with its own `eta` and
/// complexity estimate. The report carries the mean `eta` and the complexity
/// of the first trace.
pub fn btl_check_tuned(traces: &[Trace]) -> Result<BtlReport> {
    if traces.is_empty() {
        return Err(Error::Empty("trace list"));
    }
    let mut allowance = 0.0;
    for t in traces {
        let tuning =
            t.eta_tuning.as_ref().ok_or_else(|| Error::Precondition("trace was not run with a tuned eta".into()))?;
        allowance += 2.0 * t.eta * tuning.g_upper;
    }
    let n = traces.len() as f64;
    let first = traces[0].eta_tuning.as_ref().map(|t| t.complexity).expect("checked above");
    let mut report = btl_check(traces, 0.0, &first)?;
    report.rhs += allowance / n;
    report.eta = traces.iter().map(|t| t.eta).sum::<f64>() / n;
    report.pass = report.lhs <= report.rhs;
    Ok(report)
}
