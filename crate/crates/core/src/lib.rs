//! Simulator and analysis toolkit for distributed labeling.
//!
//! A ground-truth partition of `n` instances into `c` classes is hidden
//! behind a pool of single-use teachers. Each teacher labels at most `l`
//! instances and is self-consistent inside its own batch, but its class
//! names carry no meaning for other teachers. The fusion algorithms in
//! [`algorithms`] recover the partition from such batches while counting
//! every label spent; [`bounds`] evaluates the closed-form efficiency
//! bounds those counts are checked against, and [`harness`] runs seeded
//! Monte Carlo experiments over both.

pub mod algorithms;
pub mod bounds;
pub mod cli;
pub mod graph;
pub mod harness;
pub mod problem;
pub mod seed;
pub mod teachers;

pub use algorithms::{verify_partition, AlgorithmError, ReprConfig, RunOutcome};
pub use graph::{ConsistencyError, ContractionGraph};
pub use problem::{generate_problem, representatives_of, ClassDistribution, GroundTruth, ProblemConfig};
pub use teachers::{Name, NamingModel, TeacherPool};
