use thiserror::Error;

use super::label_components;
use crate::graph::{ConsistencyError, ContractionGraph};
use crate::teachers::{LogError, ReplayLog, ReplayPool};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ReplayError {
    #[error(transparent)]
    Log(#[from] LogError),
    #[error("teacher {teacher} contradicts earlier labels (lines {first_line} and {second_line}): {error}")]
    Inconsistent { teacher: String, first_line: usize, second_line: usize, error: ConsistencyError },
}

/// What a recorded log establishes about its instances.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReplayOutcome {
    pub n: usize,
    /// Super-node id per instance, numbered by smallest member.
    pub partition: Vec<u32>,
    pub components: usize,
    pub labels_used: u64,
    pub teachers_used: u64,
    /// Every pair of components is known to differ.
    pub resolved: bool,
}

/// Folds every recorded batch into a contraction graph over `n` instances,
/// stopping at the first label that contradicts earlier ones.
pub fn replay_log(log: &ReplayLog, n: usize) -> Result<ReplayOutcome, ReplayError> {
    log.check_range(n)?;
    let mut g = ContractionGraph::new(n);
    let mut pool = ReplayPool::new(log);
    let mut nodes = Vec::new();
    let mut names = Vec::new();
    for batch in pool.by_ref() {
        nodes.clear();
        names.clear();
        for label in &batch.labels {
            nodes.push(label.instance);
            names.push(label.name.as_str());
        }
        if let Err(v) = g.apply_batch(&nodes, &names) {
            return Err(ReplayError::Inconsistent {
                teacher: batch.teacher.clone(),
                first_line: batch.labels[v.first].line,
                second_line: batch.labels[v.second].line,
                error: v.error,
            });
        }
    }
    let resolved = g.is_clique();
    let components = g.node_count();
    Ok(ReplayOutcome {
        n,
        partition: label_components(&mut g),
        components,
        labels_used: pool.labels_used(),
        teachers_used: pool.teachers_used(),
        resolved,
    })
}
