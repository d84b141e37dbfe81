use rand::Rng;

use super::{ensure_progress, label_components, sample_roots, AlgorithmError, RoundTrace, RunOptions, RunOutcome};
use crate::graph::ContractionGraph;
use crate::teachers::TeacherPool;

/// Contract the connected components.
///
/// Until every pair of super-nodes is known to differ: send `l` random
/// super-nodes to a fresh teacher, contract equal names, separate the rest.
pub fn run_c3<R: Rng + ?Sized>(
    pool: &mut TeacherPool<'_>,
    rng: &mut R,
    opts: &RunOptions,
) -> Result<RunOutcome, AlgorithmError> {
    let l = pool.budget();
    if l < 2 {
        return Err(AlgorithmError::BudgetTooSmall(l));
    }
    let n = pool.truth().n();
    let mut g = ContractionGraph::with_dense_threshold(n, opts.dense_threshold);
    let mut batch = Vec::with_capacity(l);
    let mut rounds = 0u64;
    let mut trace = Vec::new();

    while !g.is_clique() {
        sample_roots(&g, l, rng, &mut batch);
        ensure_progress(&mut g, &mut batch, rng);
        let answer = pool.query(&batch)?;
        g.apply_batch(&batch, &answer.names)?;
        rounds += 1;
        if opts.trace {
            trace.push(RoundTrace { round: rounds, node_count: g.node_count(), labels_used: pool.labels_used() });
        }
    }

    Ok(RunOutcome {
        partition: label_components(&mut g),
        labels_used: pool.labels_used(),
        teachers_used: pool.teachers_used(),
        rounds,
        trace,
    })
}
