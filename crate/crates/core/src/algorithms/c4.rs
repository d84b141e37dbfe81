use std::collections::BTreeMap;

use indexmap::IndexSet;
use rand::seq::index;
use rand::Rng;
use rustc_hash::{FxBuildHasher, FxHashMap};

use super::{ensure_progress, label_components, AlgorithmError, RoundTrace, RunOptions, RunOutcome};
use crate::graph::ContractionGraph;
use crate::teachers::{Name, TeacherPool};

/// Name-tag carried by a super-node: the last name a teacher gave it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Tag {
    Fresh,
    Named(Name),
}

const UNTAGGED: u32 = u32::MAX;

/// Live roots grouped by tag, with groups bucketed by size.
struct TagGroups {
    ids: FxHashMap<Tag, u32>,
    tags: Vec<Tag>,
    free: Vec<u32>,
    members: Vec<Vec<u32>>,
    tag_of: Vec<u32>,
    pos: Vec<u32>,
    tiers: BTreeMap<usize, IndexSet<u32, FxBuildHasher>>,
}

impl TagGroups {
    fn new(n: usize) -> Self {
        let mut groups = TagGroups {
            ids: FxHashMap::default(),
            tags: Vec::new(),
            free: Vec::new(),
            members: Vec::new(),
            tag_of: vec![UNTAGGED; n],
            pos: vec![0; n],
            tiers: BTreeMap::new(),
        };
        let fresh = groups.intern(Tag::Fresh);
        groups.members[fresh as usize] = (0..n as u32).collect();
        groups.tag_of.fill(fresh);
        for (i, p) in groups.pos.iter_mut().enumerate() {
            *p = i as u32;
        }
        if n > 0 {
            groups.tiers.entry(n).or_default().insert(fresh);
        }
        groups
    }

    fn intern(&mut self, tag: Tag) -> u32 {
        if let Some(&id) = self.ids.get(&tag) {
            return id;
        }
        let id = match self.free.pop() {
            Some(id) => {
                self.tags[id as usize] = tag;
                id
            }
            None => {
                self.members.push(Vec::new());
                self.tags.push(tag);
                (self.members.len() - 1) as u32
            }
        };
        self.ids.insert(tag, id);
        id
    }

    fn retier(&mut self, id: u32, old: usize, new: usize) {
        if old > 0 {
            let tier = self.tiers.get_mut(&old).expect("tier of a non-empty group");
            tier.swap_remove(&id);
            if tier.is_empty() {
                self.tiers.remove(&old);
            }
        }
        if new > 0 {
            self.tiers.entry(new).or_default().insert(id);
        }
    }

    fn insert(&mut self, root: u32, tag: Tag) {
        let id = self.intern(tag);
        let group = &mut self.members[id as usize];
        self.pos[root as usize] = group.len() as u32;
        group.push(root);
        self.tag_of[root as usize] = id;
        let size = group.len();
        self.retier(id, size - 1, size);
    }

    fn detach(&mut self, root: u32) {
        let id = self.tag_of[root as usize];
        if id == UNTAGGED {
            return;
        }
        self.tag_of[root as usize] = UNTAGGED;
        let group = &mut self.members[id as usize];
        let at = self.pos[root as usize] as usize;
        group.swap_remove(at);
        if let Some(&moved) = group.get(at) {
            self.pos[moved as usize] = at as u32;
        }
        let size = group.len();
        self.retier(id, size + 1, size);
        if size == 0 {
            self.ids.remove(&self.tags[id as usize]);
            self.free.push(id);
        }
    }

    /// Fills `out` with up to `need` roots: random members of the largest
    /// group, then of successively smaller groups.
    fn select<R: Rng + ?Sized>(&self, need: usize, rng: &mut R, out: &mut Vec<u32>) {
        out.clear();
        for (&size, tier) in self.tiers.iter().rev() {
            let want = need - out.len();
            if want == 0 {
                break;
            }
            let whole = (want / size).min(tier.len());
            let partial = usize::from(whole < tier.len() && want > whole * size);
            for (k, t) in index::sample(rng, tier.len(), whole + partial).into_iter().enumerate() {
                let group = &self.members[tier[t] as usize];
                if k < whole {
                    out.extend_from_slice(group);
                } else {
                    let take = want - whole * size;
                    out.extend(index::sample(rng, size, take).into_iter().map(|i| group[i]));
                }
            }
        }
    }
}

/// Consistently contract the connected components: like C3, but each
/// batch is drawn from super-nodes that last received the same name.
/// Names only steer selection; equivalence still comes from within a batch.
pub fn run_c4<R: Rng + ?Sized>(
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
    let mut groups = TagGroups::new(n);
    let mut batch = Vec::with_capacity(l);
    let mut rounds = 0u64;
    let mut trace = Vec::new();

    while !g.is_clique() {
        groups.select(l.min(g.node_count()), rng, &mut batch);
        ensure_progress(&mut g, &mut batch, rng);
        for &r in &batch {
            groups.detach(r);
        }
        let answer = pool.query(&batch)?;
        let effect = g.apply_batch(&batch, &answer.names)?;
        let mut tagged = vec![false; effect.roots.len()];
        for (pos, &grp) in effect.group_of.iter().enumerate() {
            if !std::mem::replace(&mut tagged[grp as usize], true) {
                groups.insert(effect.roots[grp as usize], Tag::Named(answer.names[pos]));
            }
        }
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

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algorithms::verify_partition;
    use crate::problem::{generate_problem, GroundTruth, ProblemConfig};
    use crate::seed::rng_from;
    use crate::teachers::NamingModel;

    #[test]
    fn groups_track_sizes() {
        let mut groups = TagGroups::new(6);
        assert_eq!(groups.tiers.keys().copied().collect::<Vec<_>>(), vec![6]);
        let name = Tag::Named(Name::True(3));
        for r in [0, 1, 2] {
            groups.detach(r);
            groups.insert(r, name);
        }
        assert_eq!(groups.tiers.keys().copied().collect::<Vec<_>>(), vec![3]);
        assert_eq!(groups.tiers[&3].len(), 2);
        groups.detach(4);
        let mut out = Vec::new();
        groups.select(4, &mut rng_from(1), &mut out);
        assert_eq!(out.len(), 4);
        out.sort_unstable();
        out.dedup();
        assert_eq!(out.len(), 4);
        assert!(!out.contains(&4));
        for r in [0, 1, 2] {
            groups.detach(r);
        }
        assert_eq!(groups.ids.len(), 1, "empty named group is dropped");
    }

    #[test]
    fn select_prefers_largest_group() {
        let mut groups = TagGroups::new(10);
        let big = Tag::Named(Name::True(0));
        for r in 0..4 {
            groups.detach(r);
            groups.insert(r, big);
        }
        for r in 4..10 {
            groups.detach(r);
            groups.insert(r, Tag::Named(Name::Alias { teacher: 0, slot: r }));
        }
        let mut out = Vec::new();
        groups.select(3, &mut rng_from(5), &mut out);
        assert!(out.iter().all(|&r| r < 4));
        groups.select(6, &mut rng_from(5), &mut out);
        assert_eq!(out.iter().filter(|&&r| r < 4).count(), 4);
    }

    #[test]
    fn correct_for_any_consistency() {
        for (i, p) in [0.0, 0.3, 0.7, 1.0].into_iter().enumerate() {
            let gt = generate_problem(&ProblemConfig::uniform(2000, 40, i as u64)).unwrap();
            let mut pool = TeacherPool::new(&gt, NamingModel::PartiallyConsistent(p), 8, 3);
            let out = run_c4(&mut pool, &mut rng_from(4), &RunOptions::default()).unwrap();
            assert!(verify_partition(&out.partition, &gt), "p = {p}");
            assert!(out.rounds * 8 >= out.labels_used);
        }
    }

    #[test]
    fn single_class_matches_c3() {
        let gt = GroundTruth::from_labels(vec![0; 100], vec![1.0]).unwrap();
        let mut pool = TeacherPool::new(&gt, NamingModel::PartiallyConsistent(0.5), 10, 1);
        let out = run_c4(&mut pool, &mut rng_from(2), &RunOptions::default()).unwrap();
        assert_eq!(out.labels_used, 110);
    }

    #[test]
    fn full_consistency_beats_uncoordinated() {
        let gt = generate_problem(&ProblemConfig::uniform(20_000, 200, 1)).unwrap();
        let labels = |p| {
            let mut pool = TeacherPool::new(&gt, NamingModel::PartiallyConsistent(p), 20, 3);
            run_c4(&mut pool, &mut rng_from(4), &RunOptions::default()).unwrap().labels_used
        };
        assert!(2 * labels(1.0) < labels(0.0));
    }
}
