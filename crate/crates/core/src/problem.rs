//! Ground-truth labeling instances.
//!
//! Instances are opaque ids `0..n`; each carries a hidden class id in
//! `0..c`. Labels are drawn i.i.d. from the class distribution and the
//! whole assignment is redrawn until every class is populated, so that a
//! representative set of size exactly `c` always exists.

use std::fmt;
use std::str::FromStr;

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

use crate::seed;

/// Upper limit on wholesale redraws before giving up on full class coverage.
pub const MAX_COVERAGE_ATTEMPTS: usize = 10_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProblemError {
    #[error("need n >= c >= 1, got n={n}, c={c}")]
    Size { n: usize, c: usize },
    #[error("explicit distribution has {got} probabilities but c={c}")]
    ExplicitLength { got: usize, c: usize },
    #[error("class probabilities must be > 0 and sum to 1 (sum={sum})")]
    Probabilities { sum: f64 },
    #[error("zipf exponent must be finite and >= 0, got {0}")]
    ZipfExponent(f64),
    #[error("could not populate all {c} classes in {attempts} draws of n={n}")]
    Coverage { n: usize, c: usize, attempts: usize },
    #[error("bad distribution spec `{0}` (want uniform | zipf:<s> | explicit:<p1,p2,...>)")]
    Parse(String),
}

/// Class-probability model.
#[derive(Debug, Clone, Default, PartialEq)]
pub enum ClassDistribution {
    #[default]
    Uniform,
    /// `p_k` proportional to `(k + 1)^-s`.
    Zipf(f64),
    Explicit(Vec<f64>),
}

impl ClassDistribution {
    /// Normalized probabilities for `c` classes, validated.
    pub fn probabilities(&self, c: usize) -> Result<Vec<f64>, ProblemError> {
        match self {
            ClassDistribution::Uniform => Ok(vec![1.0 / c as f64; c]),
            ClassDistribution::Zipf(s) => {
                if !s.is_finite() || *s < 0.0 {
                    return Err(ProblemError::ZipfExponent(*s));
                }
                let weights: Vec<f64> = (1..=c).map(|k| (k as f64).powf(-s)).collect();
                let total: f64 = weights.iter().sum();
                Ok(weights.into_iter().map(|w| w / total).collect())
            }
            ClassDistribution::Explicit(probs) => {
                if probs.len() != c {
                    return Err(ProblemError::ExplicitLength { got: probs.len(), c });
                }
                let sum: f64 = probs.iter().sum();
                if probs.iter().any(|&p| p.is_nan() || p <= 0.0) || (sum - 1.0).abs() > 1e-12 {
                    return Err(ProblemError::Probabilities { sum });
                }
                Ok(probs.clone())
            }
        }
    }

    pub fn is_uniform(&self) -> bool {
        matches!(self, ClassDistribution::Uniform)
    }
}

impl fmt::Display for ClassDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClassDistribution::Uniform => write!(f, "uniform"),
            ClassDistribution::Zipf(s) => write!(f, "zipf:{s}"),
            ClassDistribution::Explicit(p) => {
                write!(f, "explicit:")?;
                for (i, v) in p.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{v}")?;
                }
                Ok(())
            }
        }
    }
}

impl FromStr for ClassDistribution {
    type Err = ProblemError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let bad = || ProblemError::Parse(s.to_string());
        if s.eq_ignore_ascii_case("uniform") {
            return Ok(ClassDistribution::Uniform);
        }
        if let Some(rest) = s.strip_prefix("zipf:") {
            let exp: f64 = rest.trim().parse().map_err(|_| bad())?;
            return Ok(ClassDistribution::Zipf(exp));
        }
        if let Some(rest) = s.strip_prefix("explicit:") {
            let probs =
                rest.split(',').map(|t| t.trim().parse::<f64>()).collect::<Result<Vec<_>, _>>().map_err(|_| bad())?;
            return Ok(ClassDistribution::Explicit(probs));
        }
        Err(bad())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemConfig {
    pub n: usize,
    pub c: usize,
    pub distribution: ClassDistribution,
    pub seed: u64,
}

impl ProblemConfig {
    pub fn uniform(n: usize, c: usize, seed: u64) -> Self {
        ProblemConfig { n, c, distribution: ClassDistribution::Uniform, seed }
    }

    pub fn validate(&self) -> Result<Vec<f64>, ProblemError> {
        if self.c < 1 || self.n < self.c || self.n > u32::MAX as usize {
            return Err(ProblemError::Size { n: self.n, c: self.c });
        }
        self.distribution.probabilities(self.c)
    }
}

/// Hidden class assignment over `n` instances.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub config: ProblemConfig,
    labels: Vec<u32>,
    class_probs: Vec<f64>,
}

impl GroundTruth {
    /// Builds a ground truth from an explicit assignment. Every class in
    /// `0..class_probs.len()` must occur at least once.
    pub fn from_labels(labels: Vec<u32>, class_probs: Vec<f64>) -> Result<Self, ProblemError> {
        let c = class_probs.len();
        let n = labels.len();
        let config = ProblemConfig { n, c, distribution: ClassDistribution::Explicit(class_probs.clone()), seed: 0 };
        if c == 0 || n < c || labels.iter().any(|&y| y as usize >= c) || !covers_all(&labels, c) {
            return Err(ProblemError::Size { n, c });
        }
        Ok(GroundTruth { config, labels, class_probs })
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn c(&self) -> usize {
        self.class_probs.len()
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    #[inline]
    pub fn label(&self, instance: u32) -> u32 {
        self.labels[instance as usize]
    }

    pub fn class_probs(&self) -> &[f64] {
        &self.class_probs
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.c()];
        for &y in &self.labels {
            counts[y as usize] += 1;
        }
        counts
    }
}

/// One known instance per class, with that class's probability.
#[derive(Debug, Clone, PartialEq)]
pub struct RepresentativeSet {
    /// `reps[k]` is an instance of class `k`.
    pub reps: Vec<u32>,
    pub probs: Vec<f64>,
}

fn covers_all(labels: &[u32], c: usize) -> bool {
    let mut seen = vec![false; c];
    let mut missing = c;
    for &y in labels {
        let slot = &mut seen[y as usize];
        if !*slot {
            *slot = true;
            missing -= 1;
            if missing == 0 {
                return true;
            }
        }
    }
    missing == 0
}

pub fn generate_problem(config: &ProblemConfig) -> Result<GroundTruth, ProblemError> {
    let class_probs = config.validate()?;
    let (n, c) = (config.n, config.c);
    let mut rng = seed::rng_from(config.seed);

    // Conditioned on full coverage with n == c every bijection has the same
    // probability (the product of all p_k), so a uniform permutation is the
    // exact conditional law.
    if n == c {
        let mut labels: Vec<u32> = (0..c as u32).collect();
        labels.shuffle(&mut rng);
        return Ok(GroundTruth { config: config.clone(), labels, class_probs });
    }

    let mut labels = vec![0u32; n];
    let weighted = match config.distribution {
        ClassDistribution::Uniform => None,
        _ => Some(
            WeightedIndex::new(&class_probs)
                .map_err(|_| ProblemError::Probabilities { sum: class_probs.iter().sum() })?,
        ),
    };
    for _ in 0..MAX_COVERAGE_ATTEMPTS {
        match &weighted {
            None => labels.iter_mut().for_each(|y| *y = rng.gen_range(0..c as u32)),
            Some(w) => labels.iter_mut().for_each(|y| *y = w.sample(&mut rng) as u32),
        }
        if covers_all(&labels, c) {
            return Ok(GroundTruth { config: config.clone(), labels, class_probs });
        }
    }
    Err(ProblemError::Coverage { n, c, attempts: MAX_COVERAGE_ATTEMPTS })
}

/// Lowest-index instance of each class, paired with the exact class
/// probabilities.
pub fn representatives_of(truth: &GroundTruth) -> RepresentativeSet {
    let c = truth.c();
    let mut reps = vec![u32::MAX; c];
    let mut found = 0;
    for (i, &y) in truth.labels().iter().enumerate() {
        let slot = &mut reps[y as usize];
        if *slot == u32::MAX {
            *slot = i as u32;
            found += 1;
            if found == c {
                break;
            }
        }
    }
    debug_assert_eq!(found, c);
    RepresentativeSet { reps, probs: truth.class_probs().to_vec() }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn n_equals_c_is_a_permutation() {
        for seed in 0..20 {
            let gt = generate_problem(&ProblemConfig::uniform(4, 4, seed)).unwrap();
            let mut sorted = gt.labels().to_vec();
            sorted.sort_unstable();
            assert_eq!(sorted, vec![0, 1, 2, 3]);
        }
    }

    #[test]
    fn explicit_two_classes() {
        let cfg = ProblemConfig { n: 2, c: 2, distribution: ClassDistribution::Explicit(vec![0.5, 0.5]), seed: 3 };
        let gt = generate_problem(&cfg).unwrap();
        let mut sorted = gt.labels().to_vec();
        sorted.sort_unstable();
        assert_eq!(sorted, vec![0, 1]);
    }

    #[test]
    fn same_seed_same_truth() {
        let cfg = ProblemConfig { n: 5000, c: 30, distribution: ClassDistribution::Zipf(1.1), seed: 11 };
        assert_eq!(generate_problem(&cfg).unwrap(), generate_problem(&cfg).unwrap());
        let other = ProblemConfig { seed: 12, ..cfg.clone() };
        assert_ne!(generate_problem(&cfg).unwrap().labels(), generate_problem(&other).unwrap().labels());
    }

    #[test]
    fn invalid_configs() {
        assert!(matches!(generate_problem(&ProblemConfig::uniform(3, 4, 0)), Err(ProblemError::Size { .. })));
        assert!(matches!(generate_problem(&ProblemConfig::uniform(10, 0, 0)), Err(ProblemError::Size { .. })));
        let bad_sum = ProblemConfig { n: 10, c: 2, distribution: ClassDistribution::Explicit(vec![0.5, 0.6]), seed: 0 };
        assert!(matches!(generate_problem(&bad_sum), Err(ProblemError::Probabilities { .. })));
        let zero = ProblemConfig { n: 10, c: 2, distribution: ClassDistribution::Explicit(vec![1.0, 0.0]), seed: 0 };
        assert!(matches!(generate_problem(&zero), Err(ProblemError::Probabilities { .. })));
        let short = ProblemConfig { n: 10, c: 3, distribution: ClassDistribution::Explicit(vec![0.5, 0.5]), seed: 0 };
        assert!(matches!(generate_problem(&short), Err(ProblemError::ExplicitLength { .. })));
    }

    #[test]
    fn representatives_are_first_occurrences() {
        let gt = GroundTruth::from_labels(vec![2, 0, 1, 0], vec![0.25, 0.25, 0.5]).unwrap();
        let reps = representatives_of(&gt);
        assert_eq!(reps.reps, vec![1, 2, 0]);
        assert_eq!(reps.probs, vec![0.25, 0.25, 0.5]);
    }

    #[test]
    fn representatives_cover_every_class() {
        for seed in 0..10 {
            let gt = generate_problem(&ProblemConfig::uniform(500, 40, seed)).unwrap();
            let reps = representatives_of(&gt);
            assert_eq!(reps.reps.len(), 40);
            for (k, &r) in reps.reps.iter().enumerate() {
                assert_eq!(gt.label(r), k as u32);
            }
        }
        let gt = generate_problem(&ProblemConfig::uniform(6, 6, 1)).unwrap();
        let mut all = representatives_of(&gt).reps;
        all.sort_unstable();
        assert_eq!(all, (0..6).collect::<Vec<_>>());
    }

    #[test]
    fn distribution_round_trips_through_text() {
        for d in
            [ClassDistribution::Uniform, ClassDistribution::Zipf(1.5), ClassDistribution::Explicit(vec![0.25, 0.75])]
        {
            assert_eq!(d.to_string().parse::<ClassDistribution>().unwrap(), d);
        }
        assert!("gauss:1".parse::<ClassDistribution>().is_err());
    }

    #[test]
    fn zipf_probabilities_are_normalized_and_decreasing() {
        let p = ClassDistribution::Zipf(1.0).probabilities(50).unwrap();
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(p.windows(2).all(|w| w[0] > w[1]));
    }
}
