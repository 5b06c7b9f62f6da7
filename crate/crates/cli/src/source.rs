use std::fs;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use gaussftpl::{hadamard_class, Example, FunctionClass, HadamardDomain, LossKind, LossSpec, SeparationCertificate};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Domain {
    Full,
    Basis,
}

impl From<Domain> for HadamardDomain {
    fn from(d: Domain) -> Self {
        match d {
            Domain::Full => HadamardDomain::Full,
            Domain::Basis => HadamardDomain::Basis,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Loss {
    ZeroOne,
    Absolute,
    Squared,
}

impl Loss {
    pub fn spec(self) -> LossSpec {
        LossSpec::new(match self {
            Loss::ZeroOne => LossKind::ZeroOne,
            Loss::Absolute => LossKind::Absolute,
            Loss::Squared => LossKind::Squared,
        })
    }
}

/// A class read from a matrix file or built as a Hadamard class.
#[derive(Args, Debug, Clone, Serialize)]
pub struct ClassSource {
    /// Class matrix file: header "F X", then F rows of X values in [-1,1].
    #[arg(long, conflicts_with = "hadamard")]
    pub class: Option<PathBuf>,

    /// Build the parity class on this many bits (little-endian bit order).
    #[arg(long)]
    pub hadamard: Option<u32>,

    /// Domain of the parity class.
    #[arg(long, value_enum, default_value_t = Domain::Full)]
    pub domain: Domain,
}

impl ClassSource {
    pub fn is_given(&self) -> bool {
        self.class.is_some() || self.hadamard.is_some()
    }

    pub fn load(&self) -> Result<FunctionClass, CliError> {
        match (&self.class, self.hadamard) {
            (Some(p), _) => Ok(FunctionClass::read_file(p)?),
            (None, Some(n)) => Ok(hadamard_class(n, self.domain.into())?),
            (None, None) => Err(CliError::Usage("give --class FILE or --hadamard N".into())),
        }
    }
}

/// Point set for a certificate: a JSON certificate file, an explicit list,
/// or every domain point.
pub fn certificate(
    class: &FunctionClass,
    file: Option<&PathBuf>,
    points: Option<&Vec<usize>>,
) -> Result<SeparationCertificate, CliError> {
    match (file, points) {
        (Some(f), _) => Ok(SeparationCertificate::from_json(&fs::read_to_string(f)?)?),
        (None, Some(p)) => Ok(SeparationCertificate::exact(class, p.clone())?),
        (None, None) => Ok(SeparationCertificate::full_domain(class)?),
    }
}

pub fn read_examples(path: &PathBuf) -> Result<Vec<Example>, CliError> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}
