use std::path::{Path, PathBuf};

use clap::Args;
use gaussftpl::fclass::{empirical_separation, recommended_sample_size, DEFAULT_SAMPLE_CONSTANT};
use gaussftpl::rng::derive_seed;
use gaussftpl::{
    is_separator_set, pairwise_separation, sample_separating_set, separation_from_singular_value, DiscreteMeasure,
    Separation, SeparationCertificate,
};
use serde::Serialize;

use crate::output::Sink;
use crate::source::ClassSource;
use crate::{CliError, Outcome};

#[derive(Args, Debug, Clone, Serialize)]
pub struct SeparationArgs {
    #[command(flatten)]
    pub source: ClassSource,

    /// Weights of the measure over domain points (default uniform).
    #[arg(long, value_delimiter = ',')]
    pub weights: Option<Vec<f64>>,

    /// Point multiset for the empirical and singular-value analysis
    /// (default every domain point once).
    #[arg(long, value_delimiter = ',')]
    pub points: Option<Vec<usize>>,

    /// Also draw a sampled certificate of this size from the measure.
    #[arg(long)]
    pub sample: Option<usize>,

    /// Failure probability used for the recommended sample size.
    #[arg(long, default_value_t = 0.05)]
    pub delta: f64,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Serialize)]
struct SampledReport {
    certificate: SeparationCertificate,
    recommended_m: Option<usize>,
}

#[derive(Serialize)]
struct SeparationReport {
    n_functions: usize,
    n_points: usize,
    bit_order: &'static str,
    rho: Separation,
    points: Vec<usize>,
    rho_on_points: Separation,
    singular_value_bound: f64,
    is_separator_set: Option<bool>,
    sampled: Option<SampledReport>,
}

pub fn run(args: &SeparationArgs, out: &Path) -> Result<Outcome, CliError> {
    let class = args.source.load()?;
    let sink = Sink::new(out, "separation", args)?;
    let mu = match &args.weights {
        Some(w) => DiscreteMeasure::new(w.clone())?,
        None => DiscreteMeasure::uniform(class.n_points())?,
    };
    let rho = pairwise_separation(&class, &mu)?;
    let points = args.points.clone().unwrap_or_else(|| (0..class.n_points()).collect());
    let rho_on_points = empirical_separation(&class, &points)?;
    let singular_value_bound = separation_from_singular_value(&class, &points)?;
    let is_sep = class.binary_alphabet().map(|_| is_separator_set(&class, &points)).transpose()?;
    let sampled = match args.sample {
        Some(m) => {
            let certificate = sample_separating_set(&class, &mu, m, derive_seed(args.seed, "cli-separation", 0))?;
            let recommended_m = rho
                .value()
                .map(|r| recommended_sample_size(class.n_functions(), r, args.delta, DEFAULT_SAMPLE_CONSTANT))
                .transpose()?;
            Some(SampledReport { certificate, recommended_m })
        }
        None => None,
    };
    let report = SeparationReport {
        n_functions: class.n_functions(),
        n_points: class.n_points(),
        bit_order: "little-endian",
        rho,
        points,
        rho_on_points,
        singular_value_bound,
        is_separator_set: is_sep,
        sampled,
    };
    let path: PathBuf = sink.write_json("separation.json", &report)?;
    Ok(Outcome {
        summary: format!("rho = {rho}, singular-value bound = {singular_value_bound}; wrote {}", path.display()),
        passed: true,
    })
}
