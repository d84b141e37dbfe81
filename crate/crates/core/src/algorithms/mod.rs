//! Label-fusion algorithms.
//!
//! Each algorithm owns a [`ContractionGraph`] and a teacher pool, repeatedly
//! sends batches of super-nodes to fresh teachers, contracts equal-named
//! nodes and separates the rest, and finally hands every surviving
//! super-node a dense label. Only one concrete instance per super-node is
//! ever queried: under class consistency any member answers for all.

mod c3;
mod c4;
mod replay;
mod representatives;

pub use c3::run_c3;
pub use c4::run_c4;
pub use replay::{replay_log, ReplayError, ReplayOutcome};
pub use representatives::{run_representatives, BetaMode, ReprConfig, ReprPlan};

use rand::Rng;
use thiserror::Error;

use crate::graph::{BatchViolation, ContractionGraph, DEFAULT_DENSE_THRESHOLD};
use crate::problem::GroundTruth;
use crate::teachers::TeacherError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AlgorithmError {
    #[error("teacher budget must be at least 2, got {0}")]
    BudgetTooSmall(usize),
    #[error(transparent)]
    Teacher(#[from] TeacherError),
    #[error("teacher answers contradict the graph: {0}")]
    Consistency(#[from] BatchViolation),
    #[error("invalid representatives configuration: {0}")]
    Config(String),
    #[error("{remaining} super-nodes left after the representatives pass")]
    NotEmpty { remaining: usize },
}

/// Per-round progress sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RoundTrace {
    pub round: u64,
    pub node_count: usize,
    pub labels_used: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOptions {
    /// Record a [`RoundTrace`] after every batch.
    pub trace: bool,
    /// Forwarded to [`ContractionGraph::with_dense_threshold`].
    pub dense_threshold: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { trace: false, dense_threshold: DEFAULT_DENSE_THRESHOLD }
    }
}

/// Recovered partition plus label accounting for one run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOutcome {
    /// Dense recovered class id per instance.
    pub partition: Vec<u32>,
    pub labels_used: u64,
    pub teachers_used: u64,
    /// Batches sent (one teacher each).
    pub rounds: u64,
    pub trace: Vec<RoundTrace>,
}

impl RunOutcome {
    pub fn class_count(&self) -> usize {
        self.partition.iter().map(|&y| y as usize + 1).max().unwrap_or(0)
    }

    /// Instances labeled per human label.
    pub fn efficiency(&self) -> f64 {
        if self.labels_used == 0 {
            return 1.0;
        }
        self.partition.len() as f64 / self.labels_used as f64
    }
}

/// True iff `partition` induces exactly the ground-truth partition, i.e.
/// the map between recovered and true ids is a bijection.
pub fn verify_partition(partition: &[u32], truth: &GroundTruth) -> bool {
    if partition.len() != truth.n() {
        return false;
    }
    let span = partition.iter().map(|&y| y as usize + 1).max().unwrap_or(0);
    let mut to_true = vec![u32::MAX; span];
    let mut to_recovered = vec![u32::MAX; truth.c()];
    for (&got, &want) in partition.iter().zip(truth.labels()) {
        let fwd = &mut to_true[got as usize];
        if *fwd == u32::MAX {
            *fwd = want;
        } else if *fwd != want {
            return false;
        }
        let back = &mut to_recovered[want as usize];
        if *back == u32::MAX {
            *back = got;
        } else if *back != got {
            return false;
        }
    }
    true
}

/// Labels live super-nodes `0, 1, ...` in order of their smallest member
/// and propagates the labels to every instance.
fn label_components(g: &mut ContractionGraph) -> Vec<u32> {
    let n = g.len();
    let mut root_label = vec![u32::MAX; n];
    let mut next = 0u32;
    let mut partition = Vec::with_capacity(n);
    for x in 0..n as u32 {
        let r = g.find(x) as usize;
        if root_label[r] == u32::MAX {
            root_label[r] = next;
            next += 1;
        }
        partition.push(root_label[r]);
    }
    partition
}

/// Draws `min(l, node_count)` distinct super-nodes uniformly at random.
fn sample_roots<R: Rng + ?Sized>(g: &ContractionGraph, l: usize, rng: &mut R, out: &mut Vec<u32>) {
    out.clear();
    let live = g.active_roots();
    let k = l.min(live.len());
    out.extend(rand::seq::index::sample(rng, live.len(), k).into_iter().map(|i| live[i]));
}

/// Makes sure the batch carries information: when every pair in it is
/// already separated, swaps in an unseparated pair of super-nodes.
fn ensure_progress<R: Rng + ?Sized>(g: &mut ContractionGraph, batch: &mut [u32], rng: &mut R) {
    if batch.len() < 2 || !g.batch_is_clique(batch) {
        return;
    }
    let (a, b) = g.find_unseparated_pair(rng).expect("graph is not a clique");
    let pa = batch.iter().position(|&x| x == a);
    let pb = batch.iter().position(|&x| x == b);
    match (pa, pb) {
        (Some(_), Some(_)) => {}
        (Some(i), None) => batch[usize::from(i == 0)] = b,
        (None, Some(j)) => batch[usize::from(j == 0)] = a,
        (None, None) => {
            batch[0] = a;
            batch[1] = b;
        }
    }
}
