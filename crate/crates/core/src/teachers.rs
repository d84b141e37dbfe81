//! Simulated teacher pool and recorded-log replay.
//!
//! Every query instantiates a fresh teacher with budget `l`. A teacher is
//! self-consistent inside its batch (equal names exactly for equal true
//! classes) but, unless the naming model says otherwise, its names mean
//! nothing to anyone else. Aliases are unique per (teacher, class) and live
//! in a namespace disjoint from the true class ids.

use std::collections::BTreeMap;
use std::fmt;
use std::io::BufRead;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::problem::GroundTruth;
use crate::seed;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TeacherError {
    #[error("batch of {size} exceeds the teacher budget of {budget}")]
    OverBudget { size: usize, budget: usize },
    #[error("empty batch")]
    EmptyBatch,
    #[error("instance {0} is out of range")]
    UnknownInstance(u32),
}

/// How teachers name classes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NamingModel {
    /// Every teacher invents its own names.
    Uncoordinated,
    /// Independently per (teacher, class), the true class id is used with
    /// probability `p`; otherwise a private alias.
    PartiallyConsistent(f64),
}

impl NamingModel {
    pub fn consistency(&self) -> f64 {
        match self {
            NamingModel::Uncoordinated => 0.0,
            NamingModel::PartiallyConsistent(p) => *p,
        }
    }
}

/// An opaque class name returned by a teacher.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Name {
    /// The global class id.
    True(u32),
    /// A name private to one teacher; `slot` numbers the classes in the
    /// order the teacher first met them.
    Alias { teacher: u64, slot: u32 },
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Name::True(k) => write!(f, "{k}"),
            Name::Alias { teacher, slot } => write!(f, "t{teacher}.{slot}"),
        }
    }
}

/// Names aligned with the queried instances.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BatchResponse {
    pub names: Vec<Name>,
}

pub struct TeacherPool<'a> {
    truth: &'a GroundTruth,
    model: NamingModel,
    budget: usize,
    labels_used: u64,
    teachers_used: u64,
    rng: ChaCha8Rng,
    // Per-class scratch: (teacher stamp, name).
    issued: Vec<(u64, Name)>,
}

impl<'a> TeacherPool<'a> {
    pub fn new(truth: &'a GroundTruth, model: NamingModel, budget: usize, seed: u64) -> Self {
        assert!(budget >= 1, "teacher budget must be positive");
        if let NamingModel::PartiallyConsistent(p) = model {
            assert!((0.0..=1.0).contains(&p), "name consistency must lie in [0, 1]");
        }
        TeacherPool {
            truth,
            model,
            budget,
            labels_used: 0,
            teachers_used: 0,
            rng: seed::rng_from(seed),
            issued: vec![(u64::MAX, Name::True(0)); truth.c()],
        }
    }

    pub fn truth(&self) -> &'a GroundTruth {
        self.truth
    }

    pub fn model(&self) -> NamingModel {
        self.model
    }

    /// Labels per teacher (`l`).
    pub fn budget(&self) -> usize {
        self.budget
    }

    pub fn labels_used(&self) -> u64 {
        self.labels_used
    }

    pub fn teachers_used(&self) -> u64 {
        self.teachers_used
    }

    /// Sends `batch` to a fresh teacher.
    pub fn query(&mut self, batch: &[u32]) -> Result<BatchResponse, TeacherError> {
        if batch.is_empty() {
            return Err(TeacherError::EmptyBatch);
        }
        if batch.len() > self.budget {
            return Err(TeacherError::OverBudget { size: batch.len(), budget: self.budget });
        }
        let n = self.truth.n() as u32;
        if let Some(&bad) = batch.iter().find(|&&x| x >= n) {
            return Err(TeacherError::UnknownInstance(bad));
        }
        let teacher = self.teachers_used;
        let mut next_slot = 0u32;
        let mut names = Vec::with_capacity(batch.len());
        for &x in batch {
            let class = self.truth.label(x);
            let entry = &mut self.issued[class as usize];
            if entry.0 != teacher {
                let truthful = match self.model {
                    NamingModel::Uncoordinated => false,
                    NamingModel::PartiallyConsistent(p) => self.rng.gen_bool(p),
                };
                let name = if truthful {
                    Name::True(class)
                } else {
                    next_slot += 1;
                    Name::Alias { teacher, slot: next_slot - 1 }
                };
                *entry = (teacher, name);
            }
            names.push(entry.1);
        }
        self.labels_used += batch.len() as u64;
        self.teachers_used += 1;
        debug_assert!(self.respects_class_consistency(batch, &names));
        Ok(BatchResponse { names })
    }

    fn respects_class_consistency(&self, batch: &[u32], names: &[Name]) -> bool {
        let mut by_name: BTreeMap<Name, u32> = BTreeMap::new();
        let mut by_class: BTreeMap<u32, Name> = BTreeMap::new();
        batch.iter().zip(names).all(|(&x, &name)| {
            let y = self.truth.label(x);
            *by_name.entry(name).or_insert(y) == y && *by_class.entry(y).or_insert(name) == name
        })
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LogError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("missing `#l=<int>` budget header")]
    MissingBudget,
    #[error("line {line}: teacher {teacher} labeled {size} instances, over the budget of {budget}")]
    OverBudget { line: usize, teacher: String, size: usize, budget: usize },
    #[error("line {line}: instance {instance} is outside 0..{n}")]
    InstanceRange { line: usize, instance: u32, n: usize },
    #[error("cannot read log: {0}")]
    Io(String),
}

/// One label from a recorded log.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoggedLabel {
    pub line: usize,
    pub instance: u32,
    pub name: String,
}

/// All labels one recorded teacher produced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoggedBatch {
    pub teacher: String,
    pub labels: Vec<LoggedLabel>,
}

/// A parsed annotator log: `teacher_id<TAB>instance_id<TAB>name` per line,
/// with a `#l=<int>` budget header and an optional `#n=<int>` header.
/// Other `#` lines and blank lines are ignored. Labels of one teacher form
/// one batch, in order of the teacher's first line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReplayLog {
    pub budget: usize,
    pub n: Option<usize>,
    pub batches: Vec<LoggedBatch>,
}

impl ReplayLog {
    pub fn parse<R: BufRead>(reader: R) -> Result<Self, LogError> {
        let mut budget = None;
        let mut n = None;
        let mut batches: Vec<LoggedBatch> = Vec::new();
        let mut batch_of: BTreeMap<String, usize> = BTreeMap::new();
        for (idx, line) in reader.lines().enumerate() {
            let lineno = idx + 1;
            let line = line.map_err(|e| LogError::Io(e.to_string()))?;
            let text = line.trim_end_matches(['\r', '\n']);
            if text.trim().is_empty() {
                continue;
            }
            if let Some(header) = text.strip_prefix('#') {
                let header = header.trim();
                let int = |v: &str| {
                    v.trim()
                        .parse::<usize>()
                        .map_err(|_| LogError::Syntax { line: lineno, message: format!("bad header value `{v}`") })
                };
                if let Some(v) = header.strip_prefix("l=") {
                    budget = Some(int(v)?);
                } else if let Some(v) = header.strip_prefix("n=") {
                    n = Some(int(v)?);
                }
                continue;
            }
            let fields: Vec<&str> = text.split('\t').collect();
            if fields.len() != 3 {
                return Err(LogError::Syntax {
                    line: lineno,
                    message: format!("expected 3 tab-separated fields, got {}", fields.len()),
                });
            }
            let instance: u32 = fields[1]
                .trim()
                .parse()
                .map_err(|_| LogError::Syntax { line: lineno, message: format!("bad instance id `{}`", fields[1]) })?;
            let teacher = fields[0].to_string();
            let slot = *batch_of.entry(teacher.clone()).or_insert_with(|| {
                batches.push(LoggedBatch { teacher, labels: Vec::new() });
                batches.len() - 1
            });
            batches[slot].labels.push(LoggedLabel { line: lineno, instance, name: fields[2].to_string() });
        }
        let budget = budget.ok_or(LogError::MissingBudget)?;
        for b in &batches {
            if b.labels.len() > budget {
                return Err(LogError::OverBudget {
                    line: b.labels[budget].line,
                    teacher: b.teacher.clone(),
                    size: b.labels.len(),
                    budget,
                });
            }
        }
        Ok(ReplayLog { budget, n, batches })
    }

    /// Instance count: the `#n=` header, else one past the largest id.
    pub fn instance_count(&self) -> usize {
        self.n.unwrap_or_else(|| {
            self.batches.iter().flat_map(|b| b.labels.iter()).map(|l| l.instance as usize + 1).max().unwrap_or(0)
        })
    }

    pub fn check_range(&self, n: usize) -> Result<(), LogError> {
        for l in self.batches.iter().flat_map(|b| b.labels.iter()) {
            if l.instance as usize >= n {
                return Err(LogError::InstanceRange { line: l.line, instance: l.instance, n });
            }
        }
        Ok(())
    }
}

/// Replays recorded batches with the same accounting as [`TeacherPool`].
pub struct ReplayPool<'a> {
    log: &'a ReplayLog,
    next: usize,
    labels_used: u64,
    teachers_used: u64,
}

impl<'a> ReplayPool<'a> {
    pub fn new(log: &'a ReplayLog) -> Self {
        ReplayPool { log, next: 0, labels_used: 0, teachers_used: 0 }
    }

    pub fn budget(&self) -> usize {
        self.log.budget
    }

    pub fn labels_used(&self) -> u64 {
        self.labels_used
    }

    pub fn teachers_used(&self) -> u64 {
        self.teachers_used
    }
}

impl<'a> Iterator for ReplayPool<'a> {
    type Item = &'a LoggedBatch;

    fn next(&mut self) -> Option<Self::Item> {
        let batch = self.log.batches.get(self.next)?;
        self.next += 1;
        self.labels_used += batch.labels.len() as u64;
        self.teachers_used += 1;
        Some(batch)
    }
}
