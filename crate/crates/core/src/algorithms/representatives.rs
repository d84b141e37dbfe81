use rand::seq::SliceRandom;
use rand::Rng;

use super::{label_components, AlgorithmError, RoundTrace, RunOptions, RunOutcome};
use crate::bounds::{optimize_beta, BetaObjective};
use crate::graph::ContractionGraph;
use crate::problem::RepresentativeSet;
use crate::teachers::TeacherPool;

/// Slack for `floor(beta * l)` so that e.g. `0.3 * 10` counts as 3.
const ROUNDING_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BetaMode {
    Fixed(f64),
    /// Maximize the given bound at `alpha = l / c`.
    Auto(BetaObjective),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReprConfig {
    pub mode: BetaMode,
}

/// Batch layout derived from a [`ReprConfig`] for a concrete `(l, c)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReprPlan {
    pub beta: f64,
    /// Representatives per batch.
    pub reps_per_batch: usize,
    /// Ordinary points per batch.
    pub points_per_batch: usize,
    /// Number of representative sets.
    pub sets: usize,
}

impl ReprConfig {
    pub fn fixed(beta: f64) -> Self {
        ReprConfig { mode: BetaMode::Fixed(beta) }
    }

    pub fn auto() -> Self {
        ReprConfig { mode: BetaMode::Auto(BetaObjective::Theorem) }
    }

    pub fn plan(&self, l: usize, c: usize) -> Result<ReprPlan, AlgorithmError> {
        if l < 2 {
            return Err(AlgorithmError::BudgetTooSmall(l));
        }
        let lf = l as f64;
        let beta = match self.mode {
            BetaMode::Fixed(b) => {
                if !(b > 0.0 && b < 1.0) {
                    return Err(AlgorithmError::Config(format!("beta must lie in (0, 1), got {b}")));
                }
                b
            }
            BetaMode::Auto(objective) => {
                let alpha = lf / c as f64;
                let (b, _) = optimize_beta(alpha, objective).map_err(|e| AlgorithmError::Config(e.to_string()))?;
                b.clamp(1.0 / lf, 1.0 - 1.0 / lf)
            }
        };
        let reps_per_batch = (beta * lf + ROUNDING_SLACK).floor() as usize;
        let points_per_batch = ((1.0 - beta) * lf + ROUNDING_SLACK).floor() as usize;
        if reps_per_batch < 1 || points_per_batch < 1 {
            return Err(AlgorithmError::Config(format!(
                "beta = {beta} with l = {l} leaves {reps_per_batch} representatives and {points_per_batch} points per batch"
            )));
        }
        Ok(ReprPlan { beta, reps_per_batch, points_per_batch, sets: c.div_ceil(reps_per_batch) })
    }
}

/// The representatives algorithm: one pass over representative sets, most
/// probable classes first. Every remaining super-node is labeled together
/// with the current set, after which the set's classes are final and leave
/// the graph.
pub fn run_representatives<R: Rng + ?Sized>(
    pool: &mut TeacherPool<'_>,
    reps: &RepresentativeSet,
    config: &ReprConfig,
    rng: &mut R,
    opts: &RunOptions,
) -> Result<RunOutcome, AlgorithmError> {
    let truth = pool.truth();
    let c = truth.c();
    if reps.reps.len() != c || reps.probs.len() != c {
        return Err(AlgorithmError::Config(format!("{} representatives for {c} classes", reps.reps.len())));
    }
    let plan = config.plan(pool.budget(), c)?;

    let mut order: Vec<usize> = (0..c).collect();
    order.sort_by(|&a, &b| reps.probs[b].total_cmp(&reps.probs[a]).then(a.cmp(&b)));

    let n = truth.n();
    let mut g = ContractionGraph::with_dense_threshold(n, opts.dense_threshold);
    let mut in_set = vec![false; n];
    let mut batch = Vec::with_capacity(plan.reps_per_batch + plan.points_per_batch);
    let mut rounds = 0u64;
    let mut trace = Vec::new();

    for set in order.chunks(plan.reps_per_batch) {
        let mut set_roots: Vec<u32> = set.iter().map(|&k| g.find(reps.reps[k])).collect();
        for &r in &set_roots {
            in_set[r as usize] = true;
        }
        let mut rest: Vec<u32> = g.active_roots().iter().copied().filter(|&r| !in_set[r as usize]).collect();
        for &r in &set_roots {
            in_set[r as usize] = false;
        }
        rest.shuffle(rng);

        for chunk in rest.chunks(plan.points_per_batch) {
            for r in set_roots.iter_mut() {
                *r = g.find(*r);
            }
            batch.clear();
            batch.extend_from_slice(&set_roots);
            batch.extend_from_slice(chunk);
            let answer = pool.query(&batch)?;
            g.apply_batch(&batch, &answer.names)?;
            rounds += 1;
            if opts.trace {
                trace.push(RoundTrace { round: rounds, node_count: g.node_count(), labels_used: pool.labels_used() });
            }
        }
        for &k in set {
            g.remove(reps.reps[k]).expect("each class is removed once");
        }
    }

    if !g.is_empty() {
        return Err(AlgorithmError::NotEmpty { remaining: g.node_count() });
    }
    Ok(RunOutcome {
        partition: label_components(&mut g),
        labels_used: pool.labels_used(),
        teachers_used: pool.teachers_used(),
        rounds,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algorithms::verify_partition;
    use crate::problem::{generate_problem, representatives_of, ClassDistribution, ProblemConfig};
    use crate::seed::rng_from;
    use crate::teachers::NamingModel;

    #[test]
    fn plan_rounding() {
        let p = ReprConfig::fixed(0.3).plan(10, 7).unwrap();
        assert_eq!((p.reps_per_batch, p.points_per_batch, p.sets), (3, 7, 3));
        let p = ReprConfig::fixed(0.5).plan(4, 2).unwrap();
        assert_eq!((p.reps_per_batch, p.points_per_batch, p.sets), (2, 2, 1));
        assert!(matches!(ReprConfig::fixed(0.05).plan(10, 7), Err(AlgorithmError::Config(_))));
        assert!(matches!(ReprConfig::fixed(0.95).plan(10, 7), Err(AlgorithmError::Config(_))));
        assert!(matches!(ReprConfig::fixed(1.0).plan(10, 7), Err(AlgorithmError::Config(_))));
        let auto = ReprConfig::auto().plan(2, 1000).unwrap();
        assert_eq!((auto.reps_per_batch, auto.points_per_batch), (1, 1));
    }

    #[test]
    fn two_classes_one_pass() {
        let gt = generate_problem(&ProblemConfig::uniform(8, 2, 4)).unwrap();
        let reps = representatives_of(&gt);
        let mut pool = TeacherPool::new(&gt, NamingModel::Uncoordinated, 4, 1);
        let out =
            run_representatives(&mut pool, &reps, &ReprConfig::fixed(0.5), &mut rng_from(3), &RunOptions::default())
                .unwrap();
        assert!(verify_partition(&out.partition, &gt));
        assert_eq!(out.labels_used, 12);
        assert_eq!(out.rounds, 3);
    }

    #[test]
    fn skewed_classes_and_uneven_tails() {
        for seed in 0..10 {
            let cfg = ProblemConfig { n: 500, c: 37, distribution: ClassDistribution::Zipf(1.1), seed };
            let gt = generate_problem(&cfg).unwrap();
            let reps = representatives_of(&gt);
            let mut pool = TeacherPool::new(&gt, NamingModel::Uncoordinated, 11, seed);
            let out = run_representatives(
                &mut pool,
                &reps,
                &ReprConfig::fixed(0.4),
                &mut rng_from(seed),
                &RunOptions::default(),
            )
            .unwrap();
            assert!(verify_partition(&out.partition, &gt));
            assert!(out.rounds * 11 >= out.labels_used);
        }
    }

    #[test]
    fn trace_ends_with_empty_graph() {
        let gt = generate_problem(&ProblemConfig::uniform(300, 12, 2)).unwrap();
        let reps = representatives_of(&gt);
        let mut pool = TeacherPool::new(&gt, NamingModel::Uncoordinated, 6, 2);
        let opts = RunOptions { trace: true, ..Default::default() };
        let out = run_representatives(&mut pool, &reps, &ReprConfig::auto(), &mut rng_from(2), &opts).unwrap();
        assert_eq!(out.trace.len() as u64, out.rounds);
        assert_eq!(out.trace.last().unwrap().labels_used, out.labels_used);
    }
}
