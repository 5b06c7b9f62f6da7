//! The canonical Gaussian process of a class over a point set `Z_1..Z_m`:
//! `omega(f) = m^(-1/2) sum_i xi_i f(Z_i)` with i.i.d. standard normal `xi`.
//! Its covariance is the empirical inner product
//! `K(f, g) = (1/m) sum_i f(Z_i) g(Z_i)`.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_index, Error, Result};
use crate::fclass::FunctionClass;
use crate::rng::{self, SimRng};
use crate::stats::Moments;

/// Default Monte-Carlo trial count for Gaussian complexity estimates.
pub const DEFAULT_COMPLEXITY_TRIALS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbationDraw {
    pub xi: Vec<f64>,
    /// Seed the draw was generated from, when it came from one.
    pub seed_id: Option<u64>,
}

impl PerturbationDraw {
    pub fn gaussian(m: usize, seed_id: u64) -> Self {
        let mut rng = rng::from_seed_id(seed_id);
        PerturbationDraw { xi: gaussian_vector(&mut rng, m), seed_id: Some(seed_id) }
    }

    /// Standard Laplace coordinates (scale 1).
    pub fn laplace(m: usize, seed_id: u64) -> Self {
        let mut rng = rng::from_seed_id(seed_id);
        PerturbationDraw { xi: laplace_vector(&mut rng, m), seed_id: Some(seed_id) }
    }

    pub fn from_values(xi: Vec<f64>) -> Self {
        PerturbationDraw { xi, seed_id: None }
    }

    pub fn len(&self) -> usize {
        self.xi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xi.is_empty()
    }
}

pub(crate) fn gaussian_vector(rng: &mut SimRng, m: usize) -> Vec<f64> {
    (0..m).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

pub(crate) fn fill_gaussian(rng: &mut SimRng, out: &mut [f64]) {
    out.iter_mut().for_each(|v| *v = rng.sample(StandardNormal));
}

pub(crate) fn laplace_vector(rng: &mut SimRng, m: usize) -> Vec<f64> {
    (0..m)
        .map(|_| {
            // Inverse CDF on u in (-1/2, 1/2).
            let u: f64 = rng.random::<f64>() - 0.5;
            -u.signum() * (1.0 - 2.0 * u.abs()).max(f64::MIN_POSITIVE).ln()
        })
        .collect()
}

/// The class restricted to a point multiset: an `F x m` matrix kept
/// contiguous for the per-round perturbation products.
#[derive(Debug, Clone)]
pub struct Restriction {
    n_functions: usize,
    m: usize,
    values: Vec<f64>,
}

impl Restriction {
    pub fn new(class: &FunctionClass, points: &[usize]) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Empty("point list"));
        }
        class.check_points(points)?;
        let mut values = Vec::with_capacity(class.n_functions() * points.len());
        for f in 0..class.n_functions() {
            values.extend(points.iter().map(|&x| class.value(f, x)));
        }
        Ok(Restriction { n_functions: class.n_functions(), m: points.len(), values })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n_functions(&self) -> usize {
        self.n_functions
    }

    pub fn row(&self, f: usize) -> &[f64] {
        &self.values[f * self.m..(f + 1) * self.m]
    }

    /// Writes `m^(-1/2) sum_i xi_i f(Z_i)` for every `f` into `out`.
    pub fn perturb_into(&self, xi: &[f64], out: &mut [f64]) {
        debug_assert_eq!(xi.len(), self.m);
        let scale = 1.0 / (self.m as f64).sqrt();
        for (o, row) in out.iter_mut().zip(self.values.chunks_exact(self.m)) {
            *o = scale * row.iter().zip(xi).map(|(a, b)| a * b).sum::<f64>();
        }
    }

    pub fn kernel(&self, f: usize, g: usize) -> f64 {
        self.row(f).iter().zip(self.row(g)).map(|(a, b)| a * b).sum::<f64>() / self.m as f64
    }
}

pub fn perturbation_values(class: &FunctionClass, points: &[usize], draw: &PerturbationDraw) -> Result<Vec<f64>> {
    if draw.len() != points.len() {
        return Err(Error::DimensionMismatch(format!("draw of length {} for {} points", draw.len(), points.len())));
    }
    let r = Restriction::new(class, points)?;
    let mut out = vec![0.0; class.n_functions()];
    r.perturb_into(&draw.xi, &mut out);
    Ok(out)
}

pub fn covariance_kernel(class: &FunctionClass, points: &[usize], f: usize, g: usize) -> Result<f64> {
    check_index("function", f, class.n_functions())?;
    check_index("function", g, class.n_functions())?;
    if points.is_empty() {
        return Err(Error::Empty("point list"));
    }
    class.check_points(points)?;
    let s: f64 = points.iter().map(|&x| class.value(f, x) * class.value(g, x)).sum();
    Ok(s / points.len() as f64)
}

/// A Monte-Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub value: f64,
    pub stderr: f64,
    pub trials: u64,
}

impl McEstimate {
    pub fn from_moments(m: &Moments) -> Self {
        McEstimate { value: m.mean(), stderr: m.stderr(), trials: m.count }
    }

    /// `value + k * stderr`.
    pub fn upper(&self, k: f64) -> f64 {
        self.value + k * self.stderr
    }

    /// Conservative handle used inside eta formulas: `value + 2 stderr`.
    pub fn conservative_upper(&self) -> f64 {
        self.upper(2.0)
    }
}

/// Monte-Carlo estimate of `E[sup_f omega(f)]`.
pub fn gaussian_complexity(class: &FunctionClass, points: &[usize], trials: usize, seed: u64) -> Result<McEstimate> {
    if trials < 2 {
        return Err(Error::invalid("trials", format!("need at least 2, got {trials}")));
    }
    let r = Restriction::new(class, points)?;
    Ok(McEstimate::from_moments(&sup_moments(&r, trials, seed)))
}

pub(crate) fn sup_moments(r: &Restriction, trials: usize, seed: u64) -> Moments {
    let parts: Vec<Moments> = rng::chunks(trials)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(chunk, n)| {
            let mut rng = rng::substream(seed, "gaussian-complexity", chunk);
            let mut xi = vec![0.0; r.m()];
            let mut omega = vec![0.0; r.n_functions()];
            let mut acc = Moments::default();
            for _ in 0..n {
                fill_gaussian(&mut rng, &mut xi);
                r.perturb_into(&xi, &mut omega);
                acc.push(omega.iter().copied().fold(f64::NEG_INFINITY, f64::max));
            }
            acc
        })
        .collect();
    parts.into_iter().fold(Moments::default(), Moments::merge)
}
