//! Deterministic instances shared by the privacy audit, the stability checks
//! and the command-line harness.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fclass::{random_sign_class, FunctionClass, SeparationCertificate};
use crate::oracle::{cumulative_losses, Example, LossSpec};
use crate::rng;
use crate::stability::{kernel_from_class, FiniteGp, GpPair};

pub const FIXTURE_SEED: u64 = 20_240_601;
pub const FIXTURE_FUNCTIONS: usize = 16;
pub const FIXTURE_POINTS: usize = 8;
pub const FIXTURE_SAMPLES: usize = 50;
pub const FIXTURE_NOISE: f64 = 0.2;

/// Random `+-1` class on 8 points, a noisy dataset labelled by function 0,
/// and a neighbour that replaces one record and changes the plain ERM winner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrivacyFixture {
    pub class: FunctionClass,
    pub certificate: SeparationCertificate,
    pub loss: LossSpec,
    pub target: usize,
    pub dataset: Vec<Example>,
    pub neighbor: Vec<Example>,
    pub replaced: usize,
}

fn erm(losses: &[f64]) -> usize {
    let mut best = 0;
    for (f, l) in losses.iter().enumerate() {
        if *l < losses[best] {
            best = f;
        }
    }
    best
}

fn winner_flipping_neighbor(
    class: &FunctionClass,
    data: &[Example],
    loss: &LossSpec,
) -> Result<Option<(usize, Example)>> {
    let base = erm(&cumulative_losses(class, data, loss)?);
    let mut trial = data.to_vec();
    for i in 0..data.len() {
        for x in 0..class.n_points() {
            for y in [-1.0, 1.0] {
                let e = Example::new(x, y);
                if e == data[i] {
                    continue;
                }
                trial[i] = e;
                if erm(&cumulative_losses(class, &trial, loss)?) != base {
                    return Ok(Some((i, e)));
                }
            }
        }
        trial[i] = data[i];
    }
    Ok(None)
}

impl PrivacyFixture {
    pub fn generate(seed: u64) -> Result<Self> {
        let loss = LossSpec::zero_one();
        for attempt in 0..64 {
            let class =
                random_sign_class(FIXTURE_FUNCTIONS, FIXTURE_POINTS, rng::derive_seed(seed, "fixture-class", attempt))?;
            let certificate = SeparationCertificate::exact(&class, (0..FIXTURE_POINTS).collect())?;
            let target = 0;
            let mut r = rng::substream(seed, "fixture-data", attempt);
            let dataset: Vec<Example> = (0..FIXTURE_SAMPLES)
                .map(|_| {
                    let x = r.random_range(0..FIXTURE_POINTS);
                    let y = class.value(target, x);
                    Example::new(x, if r.random::<f64>() < FIXTURE_NOISE { -y } else { y })
                })
                .collect();
            if let Some((replaced, e)) = winner_flipping_neighbor(&class, &dataset, &loss)? {
                let mut neighbor = dataset.clone();
                neighbor[replaced] = e;
                return Ok(PrivacyFixture { class, certificate, loss, target, dataset, neighbor, replaced });
            }
        }
        Err(Error::Precondition("no winner-flipping neighbour found".into()))
    }

    /// Cumulative losses on the dataset and on its neighbour.
    pub fn losses(&self) -> Result<(Vec<f64>, Vec<f64>)> {
        Ok((
            cumulative_losses(&self.class, &self.dataset, &self.loss)?,
            cumulative_losses(&self.class, &self.neighbor, &self.loss)?,
        ))
    }

    pub fn kernel(&self) -> Result<Vec<Vec<f64>>> {
        kernel_from_class(&self.class, &self.certificate.points)
    }

    /// Processes whose argmins are the perturbed ERM outputs on the two datasets.
    ///
    /// `omega = m^{-1/2} sum xi_i f(z_i)` has covariance `K` with the kernel
    /// above, so the argmin laws coincide with those of the learner.
    pub fn stability_pair(&self, eta: f64) -> Result<GpPair> {
        let (a, b) = self.losses()?;
        GpPair::new(a, b, self.kernel()?, eta)
    }

    /// The dataset process alone, for the conditioned check.
    pub fn conditioned_gp(&self, eta: f64) -> Result<FiniteGp> {
        let (a, _) = self.losses()?;
        FiniteGp::new(a, self.kernel()?, eta)
    }
}

pub fn privacy_fixture() -> Result<PrivacyFixture> {
    PrivacyFixture::generate(FIXTURE_SEED)
}
