use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use gaussftpl::fixtures::privacy_fixture;
use gaussftpl::stability::{conditioned_eta_threshold, distributional_eta_threshold};
use gaussftpl::{check_conditioned_stability, check_distributional_stability, StabilityFixture, StabilityVerdict};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::output::Sink;
use crate::{CliError, Outcome};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Builtin {
    /// Neighbouring-dataset loss means of the privacy fixture.
    PrivacyPair,
    /// The same class with rho = 0.5 and kappa = 1 for the conditioned check.
    Conditioned16,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Check {
    /// Distributional when the fixture has `mean_prime`, else conditioned.
    Auto,
    Conditioned,
    Distributional,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct StabilityArgs {
    /// Fixture JSON {mean, mean_prime?, kernel, eta, rho, tau, delta, kappa?}.
    #[arg(long, conflicts_with = "builtin")]
    pub fixture: Option<PathBuf>,

    /// Built-in fixture.
    #[arg(long, value_enum)]
    pub builtin: Option<Builtin>,

    #[arg(long, value_enum, default_value_t = Check::Auto)]
    pub check: Check,

    /// Override the fixture's kappa (conditioned check).
    #[arg(long)]
    pub kappa: Option<f64>,

    /// Replace the fixture's eta by the smallest value at which the bound is
    /// claimed (the default for built-in fixtures).
    #[arg(long)]
    pub eta_at_threshold: bool,

    #[arg(long, default_value_t = 200_000)]
    pub trials: usize,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

fn builtin(b: Builtin) -> Result<StabilityFixture, CliError> {
    let fx = privacy_fixture()?;
    let (mean, mean_prime) = fx.losses()?;
    let kernel = fx.kernel()?;
    Ok(match b {
        Builtin::PrivacyPair => StabilityFixture {
            mean,
            mean_prime: Some(mean_prime),
            kernel,
            eta: 1.0,
            rho: fx.certificate.rho.as_f64(),
            tau: 1.0,
            delta: 0.05,
            kappa: None,
        },
        Builtin::Conditioned16 => StabilityFixture {
            mean,
            mean_prime: None,
            kernel,
            eta: 1.0,
            rho: 0.5,
            tau: 1.0,
            delta: 0.05,
            kappa: Some(1.0),
        },
    })
}

fn verdict(args: &StabilityArgs, fx: &mut StabilityFixture) -> Result<StabilityVerdict, CliError> {
    let at_threshold = args.eta_at_threshold || args.builtin.is_some();
    let check = match args.check {
        Check::Auto if fx.mean_prime.is_some() => Check::Distributional,
        Check::Auto => Check::Conditioned,
        c => c,
    };
    match check {
        Check::Distributional => {
            if at_threshold {
                fx.eta = distributional_eta_threshold(&fx.kernel, fx.rho, fx.tau, fx.delta, args.seed)?.0;
            }
            Ok(check_distributional_stability(&fx.pair()?, fx.rho, fx.tau, fx.delta, args.trials, args.seed)?)
        }
        _ => {
            let kappa = args.kappa.or(fx.kappa).unwrap_or(1.0);
            fx.kappa = Some(kappa);
            if at_threshold {
                let gp = fx.gp()?;
                fx.eta = conditioned_eta_threshold(&gp, fx.rho, fx.tau, fx.delta, kappa, args.seed)?.0;
            }
            Ok(check_conditioned_stability(&fx.gp()?, fx.rho, fx.tau, fx.delta, kappa, args.trials, args.seed)?)
        }
    }
}

pub fn run(args: &StabilityArgs, out: &Path) -> Result<Outcome, CliError> {
    let mut fx = match (&args.fixture, args.builtin) {
        (Some(p), _) => StabilityFixture::from_json(&fs::read_to_string(p)?)?,
        (None, Some(b)) => builtin(b)?,
        (None, None) => return Err(CliError::Usage("give --fixture FILE or --builtin NAME".into())),
    };
    let sink = Sink::new(out, "stability", args)?;
    match verdict(args, &mut fx) {
        Ok(v) => {
            sink.write_json("fixture.json", &fx)?;
            let path = sink.write_json("verdict.json", &v)?;
            Ok(Outcome {
                summary: format!(
                    "{:?} check at eta {:.4} (threshold {:.4}, claimed {}): {} violation(s), {}; wrote {}",
                    v.kind,
                    v.eta,
                    v.eta_threshold,
                    v.bound_claimed,
                    v.violations.len(),
                    if v.pass { "pass" } else { "FAIL" },
                    path.display()
                ),
                passed: v.pass,
            })
        }
        Err(e) => {
            sink.write_json("error.json", &json!({ "error": e.to_string() }))?;
            Err(e)
        }
    }
}
