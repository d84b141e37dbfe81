//! Seeded Monte Carlo experiments.
//!
//! Trial `i` of an experiment draws its problem, teachers and algorithm
//! randomness from seeds derived from `(master_seed, i)`, so two
//! experiments with the same master seed see identical problems and
//! teacher pools (paired comparisons). Trials run on a rayon pool and are
//! reduced in trial order; output never depends on the worker count.

use std::fmt;

use rayon::prelude::*;
use rustc_hash::FxHashMap;
use statrs::distribution::{ContinuousCDF, StudentsT};
use thiserror::Error;

use crate::algorithms::{
    run_c3, run_c4, run_representatives, verify_partition, AlgorithmError, ReprConfig, RunOptions, RunOutcome,
};
use crate::bounds::{self, BoundsError};
use crate::problem::{generate_problem, representatives_of, ProblemConfig, ProblemError};
use crate::seed;
use crate::teachers::{Name, NamingModel, TeacherPool};

/// Environment variable capping the number of worker threads (0 = auto).
pub const THREADS_ENV: &str = "LABELFUSE_THREADS";

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Algorithm(#[from] AlgorithmError),
    #[error(transparent)]
    Bounds(#[from] BoundsError),
    #[error("invalid experiment: {0}")]
    Config(String),
    #[error("trial {trial} recovered a wrong partition")]
    Integrity { trial: usize },
    #[error("cannot start worker threads: {0}")]
    Threads(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Algorithm {
    C3,
    Representatives(ReprConfig),
    C4,
}

impl Algorithm {
    pub fn short_name(&self) -> &'static str {
        match self {
            Algorithm::C3 => "c3",
            Algorithm::Representatives(_) => "repr",
            Algorithm::C4 => "c4",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

/// Per-teacher budget, either directly or as `alpha = l / c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Budget {
    /// `l = round(alpha * c)`.
    Alpha(f64),
    Labels(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    /// Size and class law; the seed is replaced per trial.
    pub problem: ProblemConfig,
    pub algorithm: Algorithm,
    pub budget: Budget,
    /// Name consistency, used by C4 only.
    pub p: f64,
    pub trials: usize,
    pub master_seed: u64,
}

impl ExperimentConfig {
    pub fn labels_per_teacher(&self) -> usize {
        match self.budget {
            Budget::Alpha(a) => (a * self.problem.c as f64).round().max(0.0) as usize,
            Budget::Labels(l) => l,
        }
    }

    /// Effective `alpha = l / c` after rounding the budget.
    pub fn alpha(&self) -> f64 {
        self.labels_per_teacher() as f64 / self.problem.c as f64
    }

    pub fn naming(&self) -> NamingModel {
        match self.algorithm {
            Algorithm::C4 => NamingModel::PartiallyConsistent(self.p),
            _ => NamingModel::Uncoordinated,
        }
    }

    /// Consistency actually in effect (0 unless the algorithm is C4).
    pub fn effective_p(&self) -> f64 {
        self.naming().consistency()
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        self.problem.validate()?;
        if let Budget::Alpha(a) = self.budget {
            if !(a.is_finite() && a > 0.0) {
                return Err(HarnessError::Config(format!("alpha must be positive, got {a}")));
            }
        }
        let l = self.labels_per_teacher();
        if l < 2 {
            return Err(HarnessError::Config(format!("teacher budget l = {l} must be at least 2")));
        }
        if self.trials == 0 {
            return Err(HarnessError::Config("trials must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.p) {
            return Err(HarnessError::Config(format!("p must lie in [0, 1], got {}", self.p)));
        }
        if let Algorithm::Representatives(cfg) = &self.algorithm {
            cfg.plan(l, self.problem.c)?;
        }
        Ok(())
    }

    /// Beta used by the representatives algorithm, if any.
    pub fn beta(&self) -> Result<Option<f64>, HarnessError> {
        match &self.algorithm {
            Algorithm::Representatives(cfg) => Ok(Some(cfg.plan(self.labels_per_teacher(), self.problem.c)?.beta)),
            _ => Ok(None),
        }
    }

    /// Theoretical lower bound matching the algorithm at this alpha.
    pub fn lower_bound(&self) -> Result<f64, HarnessError> {
        let alpha = self.alpha();
        Ok(match self.algorithm {
            Algorithm::C3 => bounds::c3_bound(alpha)?,
            Algorithm::Representatives(_) => {
                let beta = self.beta()?.expect("representatives has a beta");
                bounds::representatives_bound(alpha, beta)?
            }
            Algorithm::C4 => bounds::c4_bound(alpha, self.p)?,
        })
    }
}

/// Seeds of one trial, derived from the master seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialSeeds {
    pub problem: u64,
    pub teachers: u64,
    pub algorithm: u64,
}

impl TrialSeeds {
    pub fn derive(master: u64, trial: usize) -> Self {
        let base = seed::derive(master, trial as u64);
        TrialSeeds { problem: seed::derive(base, 0), teachers: seed::derive(base, 1), algorithm: seed::derive(base, 2) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialResult {
    pub labels_used: u64,
    pub efficiency: f64,
    pub rounds: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub n: usize,
    pub c: usize,
    pub l: usize,
    pub alpha: f64,
    pub beta: Option<f64>,
    pub p: f64,
    pub mean_labels: f64,
    /// Mean of per-trial `n / labels`.
    pub mean_efficiency: f64,
    /// `n / mean_labels`.
    pub ratio_of_means: f64,
    pub std_err: f64,
    pub ci95_low: f64,
    pub ci95_high: f64,
    pub mean_rounds: f64,
    pub per_trial: Vec<TrialResult>,
    pub bound_value: f64,
    pub upper_value: f64,
}

/// Runs trial `trial` of `config` and checks its partition.
pub fn run_trial(config: &ExperimentConfig, trial: usize, opts: &RunOptions) -> Result<RunOutcome, HarnessError> {
    let seeds = TrialSeeds::derive(config.master_seed, trial);
    let problem = ProblemConfig { seed: seeds.problem, ..config.problem.clone() };
    let truth = generate_problem(&problem)?;
    let mut pool = TeacherPool::new(&truth, config.naming(), config.labels_per_teacher(), seeds.teachers);
    let mut rng = seed::rng_from(seeds.algorithm);
    let outcome = match &config.algorithm {
        Algorithm::C3 => run_c3(&mut pool, &mut rng, opts)?,
        Algorithm::C4 => run_c4(&mut pool, &mut rng, opts)?,
        Algorithm::Representatives(cfg) => {
            let reps = representatives_of(&truth);
            run_representatives(&mut pool, &reps, cfg, &mut rng, opts)?
        }
    };
    if !verify_partition(&outcome.partition, &truth) {
        return Err(HarnessError::Integrity { trial });
    }
    Ok(outcome)
}

/// Worker count from [`THREADS_ENV`]; `None` lets rayon decide.
pub fn worker_threads() -> Option<usize> {
    std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse::<usize>().ok()).filter(|&t| t > 0)
}

fn thread_pool() -> Result<rayon::ThreadPool, HarnessError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = worker_threads() {
        builder = builder.num_threads(t);
    }
    builder.build().map_err(|e| HarnessError::Threads(e.to_string()))
}

fn mean(xs: impl Iterator<Item = f64>, len: usize) -> f64 {
    xs.sum::<f64>() / len as f64
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult, HarnessError> {
    config.validate()?;
    let opts = RunOptions::default();
    let outcomes: Vec<Result<TrialResult, HarnessError>> = thread_pool()?.install(|| {
        (0..config.trials)
            .into_par_iter()
            .map(|t| {
                run_trial(config, t, &opts).map(|o| TrialResult {
                    labels_used: o.labels_used,
                    efficiency: o.efficiency(),
                    rounds: o.rounds,
                })
            })
            .collect()
    });
    let per_trial = outcomes.into_iter().collect::<Result<Vec<_>, _>>()?;
    summarize(config, per_trial)
}

fn summarize(config: &ExperimentConfig, per_trial: Vec<TrialResult>) -> Result<ExperimentResult, HarnessError> {
    let k = per_trial.len();
    let n = config.problem.n;
    let mean_labels = mean(per_trial.iter().map(|t| t.labels_used as f64), k);
    let mean_efficiency = mean(per_trial.iter().map(|t| t.efficiency), k);
    let mean_rounds = mean(per_trial.iter().map(|t| t.rounds as f64), k);
    let (std_err, half_width) = if k > 1 {
        let var = per_trial.iter().map(|t| (t.efficiency - mean_efficiency).powi(2)).sum::<f64>() / (k - 1) as f64;
        let se = (var / k as f64).sqrt();
        let t = StudentsT::new(0.0, 1.0, (k - 1) as f64).expect("positive degrees of freedom").inverse_cdf(0.975);
        (se, t * se)
    } else {
        (0.0, 0.0)
    };
    let alpha = config.alpha();
    Ok(ExperimentResult {
        n,
        c: config.problem.c,
        l: config.labels_per_teacher(),
        alpha,
        beta: config.beta()?,
        p: config.effective_p(),
        mean_labels,
        mean_efficiency,
        ratio_of_means: n as f64 / mean_labels,
        std_err,
        ci95_low: mean_efficiency - half_width,
        ci95_high: mean_efficiency + half_width,
        mean_rounds,
        per_trial,
        bound_value: config.lower_bound()?,
        upper_value: bounds::upper_bound(alpha)?,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub alpha: f64,
    pub p: f64,
    pub result: ExperimentResult,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
}

/// One experiment per `(alpha, p)` grid point, rows sorted by `(alpha, p)`.
/// Every point reuses the base master seed. Without a p grid, the base p
/// is used.
pub fn sweep(base: &ExperimentConfig, alpha_grid: &[f64], p_grid: Option<&[f64]>) -> Result<SweepTable, HarnessError> {
    if alpha_grid.is_empty() || p_grid.is_some_and(|g| g.is_empty()) {
        return Err(HarnessError::Config("sweep grids must be nonempty".into()));
    }
    let mut alphas = alpha_grid.to_vec();
    alphas.sort_by(f64::total_cmp);
    let mut ps = p_grid.map_or_else(|| vec![base.p], <[f64]>::to_vec);
    ps.sort_by(f64::total_cmp);
    let mut rows = Vec::with_capacity(alphas.len() * ps.len());
    for &alpha in &alphas {
        for &p in &ps {
            let config = ExperimentConfig { budget: Budget::Alpha(alpha), p, ..base.clone() };
            let result = run_experiment(&config)?;
            rows.push(SweepRow { alpha, p: result.p, result });
        }
    }
    Ok(SweepTable { rows })
}

/// Splits the instances among `ceil(n / l)` teachers and trusts their
/// names. Only correct when every teacher uses the true names.
pub fn baseline_split(pool: &mut TeacherPool<'_>) -> Result<RunOutcome, HarnessError> {
    if pool.model() != NamingModel::PartiallyConsistent(1.0) {
        return Err(HarnessError::Config("the split baseline needs fully consistent names (p = 1)".into()));
    }
    let n = pool.truth().n() as u32;
    let l = pool.budget() as u32;
    let mut ids: FxHashMap<Name, u32> = FxHashMap::default();
    let mut partition = Vec::with_capacity(n as usize);
    let mut rounds = 0;
    let mut start = 0;
    while start < n {
        let batch: Vec<u32> = (start..n.min(start + l)).collect();
        let answer = pool.query(&batch).map_err(AlgorithmError::from)?;
        for name in answer.names {
            let next = ids.len() as u32;
            partition.push(*ids.entry(name).or_insert(next));
        }
        rounds += 1;
        start += l;
    }
    Ok(RunOutcome {
        partition,
        labels_used: pool.labels_used(),
        teachers_used: pool.teachers_used(),
        rounds,
        trace: Vec::new(),
    })
}
