use std::path::{Path, PathBuf};

use clap::Args;
use gaussftpl::fixtures::privacy_fixture;
use gaussftpl::privacy::SampleRequirement;
use gaussftpl::rng::derive_seed;
use gaussftpl::{
    accuracy_required_samples, audit_privacy_with_eta, gaussian_complexity, privacy_eta, private_learn,
    required_samples, AuditReport, Example, FunctionClass, LossSpec, McEstimate, PrivacyBudget, SeparationCertificate,
    SeparationSource,
};
use serde::Serialize;

use crate::output::Sink;
use crate::source::{certificate, read_examples, ClassSource, Loss};
use crate::{CliError, Outcome};

#[derive(Args, Debug, Clone, Serialize)]
pub struct PrivacyArgs {
    /// Class to learn; without it the built-in 16-function fixture is used.
    #[command(flatten)]
    pub source: ClassSource,

    /// JSON list of {point, label} records.
    #[arg(long)]
    pub dataset: Option<PathBuf>,

    /// Neighbouring dataset for the audit (differs in at most one record).
    #[arg(long)]
    pub neighbor: Option<PathBuf>,

    /// Certificate JSON {points, rho, kind}.
    #[arg(long, conflicts_with = "points")]
    pub certificate: Option<PathBuf>,

    /// Separating point multiset (default every domain point).
    #[arg(long, value_delimiter = ',')]
    pub points: Option<Vec<usize>>,

    #[arg(long, value_enum, default_value_t = Loss::ZeroOne)]
    pub loss: Loss,

    #[arg(long, default_value_t = 1.0)]
    pub epsilon: f64,

    #[arg(long, default_value_t = 0.05)]
    pub delta: f64,

    /// Largest change of a cumulative loss between neighbouring datasets.
    #[arg(long, default_value_t = 1.0)]
    pub tau: f64,

    /// Accuracy target for the sample-size calculators.
    #[arg(long, default_value_t = 0.1)]
    pub alpha: f64,

    /// Failure probability for the sample-size calculators.
    #[arg(long, default_value_t = 0.05)]
    pub beta: f64,

    /// Audit at this noise scale instead of the calibrated one.
    #[arg(long)]
    pub audit_eta: Option<f64>,

    #[arg(long, default_value_t = 200_000)]
    pub trials: usize,

    /// Skip the audit and only train and evaluate the calculators.
    #[arg(long)]
    pub no_audit: bool,

    #[arg(long, default_value_t = 10_000)]
    pub complexity_trials: usize,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Serialize)]
struct PrivacySummary {
    n_functions: usize,
    m: usize,
    rho: f64,
    complexity: McEstimate,
    g_upper: f64,
    budget: PrivacyBudget,
    eta: f64,
    chosen: usize,
    required_samples: SampleRequirement,
    accuracy_required_samples: SampleRequirement,
    dataset_size: usize,
    audit_file: Option<String>,
    audit_pass: Option<bool>,
}

struct Instance {
    class: FunctionClass,
    cert: SeparationCertificate,
    loss: LossSpec,
    dataset: Vec<Example>,
    neighbor: Option<Vec<Example>>,
}

fn instance(args: &PrivacyArgs) -> Result<Instance, CliError> {
    if !args.source.is_given() {
        let fx = privacy_fixture()?;
        return Ok(Instance {
            class: fx.class,
            cert: fx.certificate,
            loss: fx.loss,
            dataset: fx.dataset,
            neighbor: Some(fx.neighbor),
        });
    }
    let class = args.source.load()?;
    let cert = certificate(&class, args.certificate.as_ref(), args.points.as_ref())?;
    let dataset = match &args.dataset {
        Some(p) => read_examples(p)?,
        None => return Err(CliError::Usage("--dataset is required with --class or --hadamard".into())),
    };
    let neighbor = args.neighbor.as_ref().map(read_examples).transpose()?;
    Ok(Instance { class, cert, loss: args.loss.spec(), dataset, neighbor })
}

pub fn run(args: &PrivacyArgs, out: &Path) -> Result<Outcome, CliError> {
    let budget = PrivacyBudget::with_tau(args.epsilon, args.delta, args.tau)?;
    let inst = instance(args)?;
    let sink = Sink::new(out, "privacy", args)?;
    let rho = inst.cert.rho.as_f64();
    let g = gaussian_complexity(
        &inst.class,
        &inst.cert.points,
        args.complexity_trials,
        derive_seed(args.seed, "cli-complexity", 0),
    )?;
    let g_upper = g.conservative_upper();
    let eta = if rho.is_finite() { privacy_eta(rho, &budget, g_upper)? } else { 0.0 };
    let learned = private_learn(
        &inst.class,
        &SeparationSource::Certificate(&inst.cert),
        &inst.dataset,
        &inst.loss,
        &budget,
        g_upper,
        derive_seed(args.seed, "cli-learn", 0),
    )?;
    let samples = if rho.is_finite() {
        required_samples(args.alpha, args.beta, &budget, rho, g.value)?
    } else {
        required_samples(args.alpha, args.beta, &budget, 1.0, g.value)?
    };
    let accuracy = accuracy_required_samples(args.alpha, args.beta, eta, g.value)?;

    let mut audit: Option<AuditReport> = None;
    if !args.no_audit {
        let neighbor = inst
            .neighbor
            .as_ref()
            .ok_or_else(|| CliError::Usage("the audit needs --neighbor FILE (or pass --no-audit)".into()))?;
        let audit_eta = args.audit_eta.unwrap_or(eta);
        audit = Some(audit_privacy_with_eta(
            &inst.class,
            &inst.cert,
            &inst.dataset,
            neighbor,
            &inst.loss,
            &budget,
            audit_eta,
            args.trials,
            derive_seed(args.seed, "cli-audit", 0),
        )?);
    }
    let audit_file = match &audit {
        Some(a) => Some(sink.write_json("audit.json", a)?.display().to_string()),
        None => None,
    };
    let summary = PrivacySummary {
        n_functions: inst.class.n_functions(),
        m: inst.cert.m(),
        rho,
        complexity: g,
        g_upper,
        budget,
        eta,
        chosen: learned.chosen,
        required_samples: samples,
        accuracy_required_samples: accuracy,
        dataset_size: inst.dataset.len(),
        audit_file,
        audit_pass: audit.as_ref().map(|a| a.pass),
    };
    let path = sink.write_json("privacy.json", &summary)?;
    let audit_line = match &audit {
        Some(a) => format!(
            "; audit at eta {:.4}: epsilon_hat {} ({})",
            a.eta,
            a.epsilon_hat,
            if a.pass { "pass" } else { "FAIL" }
        ),
        None => String::new(),
    };
    Ok(Outcome {
        summary: format!("eta {eta:.4}, chosen f{}{audit_line}; wrote {}", learned.chosen, path.display()),
        passed: audit.is_none_or(|a| a.pass),
    })
}
