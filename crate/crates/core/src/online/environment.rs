use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_index, Error, Result};
use crate::fclass::FunctionClass;
use crate::oracle::{Example, LossSpec};
use crate::rng;

/// An oblivious adversary: the whole `(x_t, y_t)` sequence is fixed before
/// the learner plays. Contexts are uniform over the domain points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Environment {
    /// Labels from `target`, each flipped independently with `flip_prob`.
    RealizableNoisy {
        target: usize,
        flip_prob: f64,
        seed: u64,
    },
    /// Labels uniform over the class alphabet (`{-1, 1}` or `[-1, 1]` for
    /// real-valued classes), independent of the context.
    IidRandomLabels {
        seed: u64,
    },
    FixedSequence {
        examples: Vec<Example>,
    },
}

impl Environment {
    pub fn realizable(target: usize, flip_prob: f64, seed: u64) -> Self {
        Environment::RealizableNoisy { target, flip_prob, seed }
    }

    pub fn generate(&self, class: &FunctionClass, loss: &LossSpec, horizon: usize) -> Result<Vec<Example>> {
        let alphabet = class.binary_alphabet();
        let examples = match self {
            Environment::RealizableNoisy { target, flip_prob, seed } => {
                check_index("target function", *target, class.n_functions())?;
                if !(0.0..=0.5).contains(flip_prob) {
                    return Err(Error::invalid("flip_prob", format!("must lie in [0, 1/2], got {flip_prob}")));
                }
                let mut rng = rng::substream(*seed, "env-realizable", 0);
                (0..horizon)
                    .map(|_| {
                        let x = rng.random_range(0..class.n_points());
                        let clean = class.value(*target, x);
                        let flip = *flip_prob > 0.0 && rng.random::<f64>() < *flip_prob;
                        let label = match (flip, alphabet) {
                            (false, _) => clean,
                            (true, Some(a)) => a.flip(clean),
                            (true, None) => -clean,
                        };
                        Example::new(x, label)
                    })
                    .collect()
            }
            Environment::IidRandomLabels { seed } => {
                let mut rng = rng::substream(*seed, "env-iid", 0);
                (0..horizon)
                    .map(|_| {
                        let x = rng.random_range(0..class.n_points());
                        let label = match alphabet {
                            Some(a) => a.symbols()[rng.random_range(0..2)],
                            None => rng.random_range(-1.0..=1.0),
                        };
                        Example::new(x, label)
                    })
                    .collect()
            }
            Environment::FixedSequence { examples } => {
                if examples.len() < horizon {
                    return Err(Error::invalid(
                        "environment",
                        format!("fixed sequence has {} examples, horizon is {horizon}", examples.len()),
                    ));
                }
                examples[..horizon].to_vec()
            }
        };
        for ex in &examples {
            check_index("point", ex.point, class.n_points())?;
            loss.check_label(ex.label)?;
        }
        Ok(examples)
    }
}
