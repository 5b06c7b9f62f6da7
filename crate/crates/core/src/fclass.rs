//! Finite function classes as dense evaluation matrices, and separation
//! analytics over them.
//!
//! Distances are empirical L² distances: under a measure `mu` on the domain,
//! `||f - g||_mu = sqrt(sum_x mu(x) (f(x) - g(x))^2)`. A class is
//! rho-separated by `mu` when every pair of distinct rows is at least `rho`
//! apart.

use std::fmt;
use std::path::Path;

use nalgebra::DMatrix;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{check_index, Error, Result};
use crate::rng;

/// Largest bit count accepted by [`hadamard_class`].
pub const MAX_HADAMARD_BITS: u32 = 16;

/// Constant `c` in the default separating-set size recipe.
pub const DEFAULT_SAMPLE_CONSTANT: f64 = 2.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionClass {
    n_functions: usize,
    n_points: usize,
    /// Row-major, `n_functions x n_points`.
    values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    function_labels: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    point_labels: Option<Vec<String>>,
}

/// Output alphabet of a binary-valued class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BinaryAlphabet {
    ZeroOne,
    PlusMinus,
}

impl BinaryAlphabet {
    pub fn contains(self, v: f64) -> bool {
        match self {
            BinaryAlphabet::ZeroOne => v == 0.0 || v == 1.0,
            BinaryAlphabet::PlusMinus => v == -1.0 || v == 1.0,
        }
    }

    pub fn flip(self, v: f64) -> f64 {
        match self {
            BinaryAlphabet::ZeroOne => 1.0 - v,
            BinaryAlphabet::PlusMinus => -v,
        }
    }

    pub fn symbols(self) -> [f64; 2] {
        match self {
            BinaryAlphabet::ZeroOne => [0.0, 1.0],
            BinaryAlphabet::PlusMinus => [-1.0, 1.0],
        }
    }
}

impl FunctionClass {
    pub fn from_flat(n_functions: usize, n_points: usize, values: Vec<f64>) -> Result<Self> {
        if n_functions == 0 {
            return Err(Error::Empty("function class"));
        }
        if n_points == 0 {
            return Err(Error::Empty("domain"));
        }
        if values.len() != n_functions * n_points {
            return Err(Error::DimensionMismatch(format!(
                "{} values for a {n_functions}x{n_points} class",
                values.len()
            )));
        }
        for (k, &v) in values.iter().enumerate() {
            if !(-1.0..=1.0).contains(&v) {
                return Err(Error::EntryOutOfRange { row: k / n_points, col: k % n_points, value: v });
            }
        }
        Ok(FunctionClass { n_functions, n_points, values, function_labels: None, point_labels: None })
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n_functions = rows.len();
        let n_points = rows.first().map_or(0, Vec::len);
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != n_points) {
            return Err(Error::DimensionMismatch(format!("row {i} has {} entries, expected {n_points}", r.len())));
        }
        Self::from_flat(n_functions, n_points, rows.into_iter().flatten().collect())
    }

    pub fn with_function_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.n_functions {
            return Err(Error::DimensionMismatch(format!(
                "{} function labels for {} functions",
                labels.len(),
                self.n_functions
            )));
        }
        self.function_labels = Some(labels);
        Ok(self)
    }

    pub fn with_point_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.n_points {
            return Err(Error::DimensionMismatch(format!(
                "{} point labels for {} points",
                labels.len(),
                self.n_points
            )));
        }
        self.point_labels = Some(labels);
        Ok(self)
    }

    pub fn n_functions(&self) -> usize {
        self.n_functions
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    #[inline]
    pub fn value(&self, f: usize, x: usize) -> f64 {
        self.values[f * self.n_points + x]
    }

    pub fn row(&self, f: usize) -> &[f64] {
        &self.values[f * self.n_points..(f + 1) * self.n_points]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.n_points)
    }

    pub fn function_labels(&self) -> Option<&[String]> {
        self.function_labels.as_deref()
    }

    pub fn point_labels(&self) -> Option<&[String]> {
        self.point_labels.as_deref()
    }

    /// The binary alphabet of the class, if every entry is in `{0,1}` or every
    /// entry is in `{-1,1}`. All-ones classes report `ZeroOne`.
    pub fn binary_alphabet(&self) -> Option<BinaryAlphabet> {
        [BinaryAlphabet::ZeroOne, BinaryAlphabet::PlusMinus]
            .into_iter()
            .find(|a| self.values.iter().all(|&v| a.contains(v)))
    }

    /// The class formed by the listed rows, in the listed order.
    pub fn subclass(&self, functions: &[usize]) -> Result<Self> {
        if functions.is_empty() {
            return Err(Error::Empty("function list"));
        }
        let mut values = Vec::with_capacity(functions.len() * self.n_points);
        for &f in functions {
            check_index("function", f, self.n_functions)?;
            values.extend_from_slice(self.row(f));
        }
        let mut out = Self::from_flat(functions.len(), self.n_points, values)?;
        if let Some(labels) = &self.function_labels {
            out.function_labels = Some(functions.iter().map(|&f| labels[f].clone()).collect());
        }
        out.point_labels = self.point_labels.clone();
        Ok(out)
    }

    pub(crate) fn check_points(&self, points: &[usize]) -> Result<()> {
        points.iter().try_for_each(|&x| check_index("point", x, self.n_points))
    }

    /// Parse the matrix text format: a header line `F X`, then `F` lines of
    /// `X` whitespace-separated decimals, then optionally a `functions:` line
    /// and a `points:` line carrying labels. Blank lines and `#` comments are
    /// ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());

        let (hline, header) = lines.next().ok_or(Error::Parse { line: 1, msg: "missing header".into() })?;
        let dims: Vec<usize> = header
            .split_whitespace()
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Parse { line: hline, msg: format!("bad header: {e}") })?;
        let [n_functions, n_points] = dims[..] else {
            return Err(Error::Parse { line: hline, msg: "header must be `F X`".into() });
        };

        let mut values = Vec::with_capacity(n_functions * n_points);
        for r in 0..n_functions {
            let (lno, line) =
                lines.next().ok_or(Error::Parse { line: hline + r + 1, msg: format!("missing row {r}") })?;
            let row: Vec<f64> = line
                .split_whitespace()
                .map(str::parse)
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Parse { line: lno, msg: format!("bad number: {e}") })?;
            if row.len() != n_points {
                return Err(Error::Parse {
                    line: lno,
                    msg: format!("expected {n_points} entries, found {}", row.len()),
                });
            }
            values.extend(row);
        }
        let mut class = Self::from_flat(n_functions, n_points, values)?;

        for (lno, line) in lines {
            let words = |s: &str| s.split_whitespace().map(String::from).collect::<Vec<_>>();
            if let Some(rest) = line.strip_prefix("functions:") {
                class = class.with_function_labels(words(rest))?;
            } else if let Some(rest) = line.strip_prefix("points:") {
                class = class.with_point_labels(words(rest))?;
            } else {
                return Err(Error::Parse { line: lno, msg: format!("unexpected line `{line}`") });
            }
        }
        Ok(class)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.n_functions, self.n_points);
        for row in self.rows() {
            let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            out.push_str(&cells.join(" "));
            out.push('\n');
        }
        if let Some(l) = &self.function_labels {
            out.push_str(&format!("functions: {}\n", l.join(" ")));
        }
        if let Some(l) = &self.point_labels {
            out.push_str(&format!("points: {}\n", l.join(" ")));
        }
        out
    }

    pub fn read_file(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn write_file(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }
}

/// Probability weights over the domain points of a class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteMeasure {
    weights: Vec<f64>,
}

impl DiscreteMeasure {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Empty("measure"));
        }
        if let Some(w) = weights.iter().find(|w| !(**w >= 0.0) || !w.is_finite()) {
            return Err(Error::invalid("measure", format!("negative or non-finite weight {w}")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::invalid("measure", format!("weights sum to {total}, not 1")));
        }
        Ok(DiscreteMeasure { weights })
    }

    pub fn uniform(n_points: usize) -> Result<Self> {
        if n_points == 0 {
            return Err(Error::Empty("measure"));
        }
        Ok(DiscreteMeasure { weights: vec![1.0 / n_points as f64; n_points] })
    }

    /// Empirical measure of a multiset of point indices.
    pub fn empirical(n_points: usize, points: &[usize]) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Empty("point list"));
        }
        let mut weights = vec![0.0; n_points];
        for &x in points {
            check_index("point", x, n_points)?;
            weights[x] += 1.0;
        }
        let m = points.len() as f64;
        weights.iter_mut().for_each(|w| *w /= m);
        Ok(DiscreteMeasure { weights })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// Minimum pairwise distance of a class; `NoPairs` for a single function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Separation {
    NoPairs,
    Value(f64),
}

impl Separation {
    /// `+inf` for `NoPairs`.
    pub fn as_f64(self) -> f64 {
        match self {
            Separation::NoPairs => f64::INFINITY,
            Separation::Value(v) => v,
        }
    }

    pub fn value(self) -> Option<f64> {
        match self {
            Separation::NoPairs => None,
            Separation::Value(v) => Some(v),
        }
    }

    pub fn is_positive(self) -> bool {
        self.as_f64() > 0.0
    }
}

impl fmt::Display for Separation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Separation::NoPairs => f.write_str("no-pairs"),
            Separation::Value(v) => write!(f, "{v}"),
        }
    }
}

impl Serialize for Separation {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Separation::NoPairs => s.serialize_str("no-pairs"),
            Separation::Value(v) => s.serialize_f64(*v),
        }
    }
}

impl<'de> Deserialize<'de> for Separation {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Tag(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(Separation::Value(v)),
            Repr::Tag(t) if t == "no-pairs" => Ok(Separation::NoPairs),
            Repr::Tag(t) => Err(serde::de::Error::custom(format!("unknown separation `{t}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CertificateKind {
    ExactPairwise,
    SingularValueBound,
    Sampled,
}

/// A point multiset `Z_1..Z_m` and a certified separation `rho` of the class
/// under the empirical measure of those points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparationCertificate {
    pub points: Vec<usize>,
    pub rho: Separation,
    pub kind: CertificateKind,
}

impl SeparationCertificate {
    /// Certificate carrying the exact minimum pairwise distance on `points`.
    pub fn exact(class: &FunctionClass, points: Vec<usize>) -> Result<Self> {
        let rho = empirical_separation(class, &points)?;
        Ok(SeparationCertificate { points, rho, kind: CertificateKind::ExactPairwise })
    }

    /// Certificate carrying the singular-value lower bound on `points`.
    pub fn singular_value(class: &FunctionClass, points: Vec<usize>) -> Result<Self> {
        let rho = if class.n_functions() == 1 {
            Separation::NoPairs
        } else {
            Separation::Value(separation_from_singular_value(class, &points)?)
        };
        Ok(SeparationCertificate { points, rho, kind: CertificateKind::SingularValueBound })
    }

    /// Exact certificate on every domain point once.
    pub fn full_domain(class: &FunctionClass) -> Result<Self> {
        Self::exact(class, (0..class.n_points()).collect())
    }

    pub fn m(&self) -> usize {
        self.points.len()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

fn min_pairwise<D: Fn(usize, usize) -> f64>(n: usize, dist_sq: D) -> Separation {
    if n < 2 {
        return Separation::NoPairs;
    }
    let mut best = f64::INFINITY;
    for f in 0..n {
        for g in f + 1..n {
            best = best.min(dist_sq(f, g));
        }
    }
    Separation::Value(best.max(0.0).sqrt())
}

pub fn pairwise_separation(class: &FunctionClass, mu: &DiscreteMeasure) -> Result<Separation> {
    if mu.len() != class.n_points() {
        return Err(Error::DimensionMismatch(format!(
            "measure over {} points, class over {}",
            mu.len(),
            class.n_points()
        )));
    }
    let w = mu.weights();
    Ok(min_pairwise(class.n_functions(), |f, g| {
        class.row(f).iter().zip(class.row(g)).zip(w).map(|((a, b), w)| w * (a - b) * (a - b)).sum()
    }))
}

/// Minimum pairwise distance under the empirical measure of a point multiset.
pub fn empirical_separation(class: &FunctionClass, points: &[usize]) -> Result<Separation> {
    if points.is_empty() {
        return Err(Error::Empty("point list"));
    }
    class.check_points(points)?;
    let m = points.len() as f64;
    Ok(min_pairwise(class.n_functions(), |f, g| {
        points
            .iter()
            .map(|&x| {
                let d = class.value(f, x) - class.value(g, x);
                d * d
            })
            .sum::<f64>()
            / m
    }))
}

/// Lower bound `sigma_min(A) * sqrt(2/m)` on the empirical separation, where
/// `A[i][j] = f_j(Z_i)` is the raw `m x F` evaluation matrix.
pub fn separation_from_singular_value(class: &FunctionClass, points: &[usize]) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::Empty("point list"));
    }
    class.check_points(points)?;
    let m = points.len();
    let n_f = class.n_functions();
    // A has F columns; with more columns than rows it is rank-deficient.
    if n_f > m {
        return Ok(0.0);
    }
    let a = DMatrix::from_fn(m, n_f, |i, j| class.value(j, points[i]));
    let sigma_min = a.singular_values().iter().copied().fold(f64::INFINITY, f64::min).max(0.0);
    Ok(sigma_min * (2.0 / m as f64).sqrt())
}

/// Whether every pair of distinct functions disagrees on some listed point.
pub fn is_separator_set(class: &FunctionClass, points: &[usize]) -> Result<bool> {
    if class.binary_alphabet().is_none() {
        return Err(Error::NonBinaryClass);
    }
    class.check_points(points)?;
    let n = class.n_functions();
    for f in 0..n {
        for g in f + 1..n {
            if points.iter().all(|&x| class.value(f, x) == class.value(g, x)) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Sample size `ceil(c * (log|F|^2 + log(1/delta)) / rho^2)` after which `m`
/// i.i.d. draws from a rho-separating measure are rho/2-separating with
/// probability at least `1 - delta`.
pub fn recommended_sample_size(n_functions: usize, rho: f64, delta: f64, c: f64) -> Result<usize> {
    if !(rho > 0.0) {
        return Err(Error::invalid("rho", format!("must be positive, got {rho}")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid("delta", format!("must lie in (0,1), got {delta}")));
    }
    let f = n_functions.max(1) as f64;
    let m = c * (2.0 * f.ln() + (1.0 / delta).ln()) / (rho * rho);
    Ok((m.ceil() as usize).max(1))
}

/// Draw `m` points i.i.d. from `mu` and certify their exact empirical
/// separation.
pub fn sample_separating_set(
    class: &FunctionClass,
    mu: &DiscreteMeasure,
    m: usize,
    seed: u64,
) -> Result<SeparationCertificate> {
    if m == 0 {
        return Err(Error::invalid("m", "sample size must be at least 1"));
    }
    if !pairwise_separation(class, mu)?.is_positive() {
        return Err(Error::ZeroSeparation);
    }
    let dist = WeightedIndex::new(mu.weights()).map_err(|e| Error::invalid("measure", e.to_string()))?;
    let mut rng = rng::substream(seed, "separating-set", 0);
    let points: Vec<usize> = (0..m).map(|_| dist.sample(&mut rng)).collect();
    let rho = empirical_separation(class, &points)?;
    Ok(SeparationCertificate { points, rho, kind: CertificateKind::Sampled })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HadamardDomain {
    /// All of `F_2^n`, `2^n` columns.
    Full,
    /// The standard basis vectors `e_1..e_n`, `n` columns.
    Basis,
}

/// The class of linear functions `f_y(x) = <x, y> mod 2` on `F_2^n`, valued in
/// `{0, 1}`.
///
/// Bit order is little-endian for both rows and columns: index `i` encodes
/// the vector whose coordinate `k` (0-based) is `(i >> k) & 1`. On the basis
/// domain, column `k` is `e_k` and `f_y(e_k) = (y >> k) & 1`.
pub fn hadamard_class(n: u32, domain: HadamardDomain) -> Result<FunctionClass> {
    if !(1..=MAX_HADAMARD_BITS).contains(&n) {
        return Err(Error::invalid("n", format!("bit count must lie in 1..={MAX_HADAMARD_BITS}, got {n}")));
    }
    let n_functions = 1usize << n;
    let columns: Vec<usize> = match domain {
        HadamardDomain::Full => (0..n_functions).collect(),
        HadamardDomain::Basis => (0..n).map(|k| 1usize << k).collect(),
    };
    let mut values = Vec::with_capacity(n_functions * columns.len());
    for y in 0..n_functions {
        values.extend(columns.iter().map(|&x| ((x & y).count_ones() & 1) as f64));
    }
    let class = FunctionClass::from_flat(n_functions, columns.len(), values)?;
    let bits = |v: usize| (0..n).map(|k| char::from(b'0' + ((v >> k) & 1) as u8)).collect::<String>();
    let f_labels = (0..n_functions).map(|y| format!("y={}", bits(y))).collect();
    let p_labels = columns.iter().map(|&x| format!("x={}", bits(x))).collect();
    class.with_function_labels(f_labels)?.with_point_labels(p_labels)
}

/// Rows of the identity matrix: `m` indicator functions on `m` points.
pub fn indicator_class(m: usize) -> Result<FunctionClass> {
    FunctionClass::from_flat(m, m, (0..m * m).map(|k| if k / m == k % m { 1.0 } else { 0.0 }).collect())
}

/// `n_functions` pairwise-distinct random `{-1, 1}` rows on `n_points` points.
pub fn random_sign_class(n_functions: usize, n_points: usize, seed: u64) -> Result<FunctionClass> {
    use rand::Rng;
    if n_points < usize::BITS as usize && n_functions > 1usize << n_points {
        return Err(Error::invalid("n_functions", format!("only 2^{n_points} distinct sign rows exist")));
    }
    let mut rng = rng::substream(seed, "random-sign-class", 0);
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(n_functions);
    while rows.len() < n_functions {
        let row: Vec<f64> = (0..n_points).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect();
        if !rows.contains(&row) {
            rows.push(row);
        }
    }
    FunctionClass::from_rows(rows)
}

/// Separation implied by a gamma-approximable matrix with `m` columns.
pub fn gamma_to_rho(gamma: f64, m: usize) -> Result<f64> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Error::invalid("gamma", format!("must be positive, got {gamma}")));
    }
    if m == 0 {
        return Err(Error::invalid("m", "must be at least 1"));
    }
    Ok(1.0 / (gamma * (m as f64).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn brute_min_distance(class: &FunctionClass, w: &[f64]) -> f64 {
        let mut best = f64::INFINITY;
        for f in 0..class.n_functions() {
            for g in 0..class.n_functions() {
                if f != g {
                    let d: f64 =
                        (0..class.n_points()).map(|x| w[x] * (class.value(f, x) - class.value(g, x)).powi(2)).sum();
                    best = best.min(d.sqrt());
                }
            }
        }
        best
    }

    #[test]
    fn hadamard_full_is_one_over_root_two_separated() {
        let class = hadamard_class(4, HadamardDomain::Full).unwrap();
        assert_eq!((class.n_functions(), class.n_points()), (16, 16));
        let rho = pairwise_separation(&class, &DiscreteMeasure::uniform(16).unwrap()).unwrap();
        assert!((rho.as_f64() - FRAC_1_SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn hadamard_basis_separation_is_one_over_root_n() {
        // Rows y, y' differing in a single bit disagree on exactly one of the
        // n basis points, so the uniform-measure distance is 1/sqrt(n).
        for n in 1..=6u32 {
            let class = hadamard_class(n, HadamardDomain::Basis).unwrap();
            let w = vec![1.0 / n as f64; n as usize];
            let rho = pairwise_separation(&class, &DiscreteMeasure::new(w.clone()).unwrap()).unwrap();
            let expected = 1.0 / (n as f64).sqrt();
            assert!((rho.as_f64() - expected).abs() < 1e-12, "n={n}");
            assert!((rho.as_f64() - brute_min_distance(&class, &w)).abs() < 1e-12);
        }
    }

    #[test]
    fn hadamard_bit_order_matches_enumeration() {
        // Independent enumeration: x and y as explicit coordinate vectors.
        let class = hadamard_class(2, HadamardDomain::Full).unwrap();
        let coords = |i: usize| [(i & 1) as u8, ((i >> 1) & 1) as u8];
        for y in 0..4 {
            for x in 0..4 {
                let (cx, cy) = (coords(x), coords(y));
                let ip = (cx[0] * cy[0] + cx[1] * cy[1]) % 2;
                assert_eq!(class.value(y, x), ip as f64);
            }
        }
        // y = (1, 0) is index 1; columns are x = (0,0), (1,0), (0,1), (1,1).
        assert_eq!(class.row(1), &[0.0, 1.0, 0.0, 1.0]);
        assert_eq!(class.function_labels().unwrap()[1], "y=10");
        assert!(class.row(0).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn hadamard_rows_closed_under_xor() {
        let class = hadamard_class(5, HadamardDomain::Full).unwrap();
        for y in 0..32 {
            for z in 0..32 {
                for x in 0..32 {
                    let sum = (class.value(y, x) + class.value(z, x)) as u32 % 2;
                    assert_eq!(sum as f64, class.value(y ^ z, x));
                }
            }
        }
    }

    #[test]
    fn hadamard_rejects_bad_n() {
        assert!(hadamard_class(0, HadamardDomain::Full).is_err());
        assert!(hadamard_class(17, HadamardDomain::Basis).is_err());
    }

    #[test]
    fn single_function_has_no_pairs() {
        let class = FunctionClass::from_rows(vec![vec![0.3, -0.2]]).unwrap();
        let rho = pairwise_separation(&class, &DiscreteMeasure::uniform(2).unwrap()).unwrap();
        assert_eq!(rho, Separation::NoPairs);
        assert_eq!(rho.as_f64(), f64::INFINITY);
        assert_eq!(serde_json::to_string(&rho).unwrap(), "\"no-pairs\"");
    }

    #[test]
    fn identical_rows_have_zero_separation() {
        let class = FunctionClass::from_rows(vec![vec![1.0, 0.5], vec![1.0, 0.5], vec![0.0, 0.0]]).unwrap();
        let rho = pairwise_separation(&class, &DiscreteMeasure::uniform(2).unwrap()).unwrap();
        assert_eq!(rho, Separation::Value(0.0));
    }

    #[test]
    fn measure_dimension_mismatch() {
        let class = indicator_class(3).unwrap();
        assert!(matches!(
            pairwise_separation(&class, &DiscreteMeasure::uniform(4).unwrap()),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn singular_value_bound_on_identity_is_tight() {
        for m in 1..=8 {
            let class = indicator_class(m).unwrap();
            let points: Vec<usize> = (0..m).collect();
            let lb = separation_from_singular_value(&class, &points).unwrap();
            assert!((lb - (2.0 / m as f64).sqrt()).abs() < 1e-12);
            if m > 1 {
                let exact = empirical_separation(&class, &points).unwrap().as_f64();
                assert!((lb - exact).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn singular_value_bound_is_zero_when_wide() {
        let class = hadamard_class(4, HadamardDomain::Basis).unwrap();
        let points: Vec<usize> = (0..4).collect();
        let lb = separation_from_singular_value(&class, &points).unwrap();
        assert_eq!(lb, 0.0);
        assert!(lb <= empirical_separation(&class, &points).unwrap().as_f64());
        assert!(separation_from_singular_value(&class, &[]).is_err());
    }

    #[test]
    fn separator_sets() {
        let class = hadamard_class(4, HadamardDomain::Full).unwrap();
        let basis: Vec<usize> = (0..4).map(|k| 1 << k).collect();
        assert!(is_separator_set(&class, &basis).unwrap());
        assert!(!is_separator_set(&class, &[0]).unwrap());

        let two = FunctionClass::from_rows(vec![vec![0.0, 1.0, 1.0], vec![1.0, 1.0, 1.0]]).unwrap();
        assert!(!is_separator_set(&two, &[1, 2]).unwrap());
        assert!(is_separator_set(&two, &[0]).unwrap());

        let real = FunctionClass::from_rows(vec![vec![0.5]]).unwrap();
        assert!(matches!(is_separator_set(&real, &[0]), Err(Error::NonBinaryClass)));
    }

    #[test]
    fn sampled_certificate_is_exact_on_sample() {
        let class = hadamard_class(4, HadamardDomain::Full).unwrap();
        let mu = DiscreteMeasure::uniform(16).unwrap();
        let cert = sample_separating_set(&class, &mu, 64, 11).unwrap();
        assert_eq!(cert.kind, CertificateKind::Sampled);
        assert_eq!(cert.points.len(), 64);
        let recomputed = brute_min_distance(&class, DiscreteMeasure::empirical(16, &cert.points).unwrap().weights());
        assert!((cert.rho.as_f64() - recomputed).abs() < 1e-12);
        assert!(cert.rho.as_f64() >= 1.0 / (2.0 * 2f64.sqrt()));
    }

    #[test]
    fn sampled_certificate_may_be_degenerate() {
        // Rows agree everywhere except point 0, which carries little mass.
        let class = FunctionClass::from_rows(vec![vec![1.0, 0.0, 0.0], vec![0.0, 0.0, 0.0]]).unwrap();
        let mu = DiscreteMeasure::new(vec![0.01, 0.495, 0.495]).unwrap();
        let zero_seen = (0..200).any(|s| {
            let c = sample_separating_set(&class, &mu, 1, s).unwrap();
            c.rho == Separation::Value(0.0)
        });
        assert!(zero_seen);
    }

    #[test]
    fn sampling_errors() {
        let class = FunctionClass::from_rows(vec![vec![1.0, 0.0], vec![1.0, 0.0]]).unwrap();
        let mu = DiscreteMeasure::uniform(2).unwrap();
        assert!(matches!(sample_separating_set(&class, &mu, 4, 0), Err(Error::ZeroSeparation)));
        let ok = indicator_class(2).unwrap();
        assert!(sample_separating_set(&ok, &mu, 0, 0).is_err());
    }

    #[test]
    fn gamma_conversion() {
        assert_eq!(gamma_to_rho(1.0, 4).unwrap(), 0.5);
        assert_eq!(gamma_to_rho(2.0, 1).unwrap(), 0.5);
        assert!((gamma_to_rho(0.1, 100).unwrap() - 1.0).abs() < 1e-15);
        assert!(gamma_to_rho(0.0, 1).is_err());
        assert!(gamma_to_rho(-1.0, 1).is_err());
    }

    #[test]
    fn text_format_round_trip_and_validation() {
        let class = hadamard_class(2, HadamardDomain::Basis).unwrap();
        let parsed = FunctionClass::parse(&class.to_text()).unwrap();
        assert_eq!(parsed, class);

        let err = FunctionClass::parse("1 2\n0.5 1.5\n").unwrap_err();
        assert!(err.to_string().contains("entry out of [-1,1]"), "{err}");
        assert!(FunctionClass::parse("2 2\n0 1\n").is_err());
        assert!(FunctionClass::parse("1 2\n0 1\nfunctions: a b\n").is_err());
        let labelled = FunctionClass::parse("# comment\n1 2\n0 1\nfunctions: a\npoints: p q\n").unwrap();
        assert_eq!(labelled.point_labels().unwrap(), &["p".to_string(), "q".to_string()]);
    }

    #[test]
    fn certificate_json_shape() {
        let class = indicator_class(2).unwrap();
        let cert = SeparationCertificate::exact(&class, vec![0, 1]).unwrap();
        let v: serde_json::Value = serde_json::from_str(&cert.to_json().unwrap()).unwrap();
        assert_eq!(v["kind"], "exact-pairwise");
        assert_eq!(v["points"], serde_json::json!([0, 1]));
        assert!((v["rho"].as_f64().unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(SeparationCertificate::from_json(&cert.to_json().unwrap()).unwrap(), cert);
    }

    #[test]
    fn recommended_size_recipe() {
        // c * (2 ln 16 + ln 20) / 0.5 with c = 2
        let m = recommended_sample_size(16, FRAC_1_SQRT_2, 0.05, DEFAULT_SAMPLE_CONSTANT).unwrap();
        let expected = (2.0 * (2.0 * 16f64.ln() + 20f64.ln()) / 0.5).ceil() as usize;
        assert_eq!(m, expected);
    }
}
