//! Contraction graph: super-nodes of known-equivalent instances plus
//! separation edges between super-nodes known to differ.
//!
//! Super-nodes live in a union-find forest (union by size, path halving).
//! Separation knowledge is kept in one of two representations:
//!
//! * **sparse**: every separation event is stored as a *clique* of root ids
//!   that are pairwise different, and each root keeps the set of cliques it
//!   takes part in. Two roots are separated iff they share a clique. A
//!   labeled batch of `l` nodes costs `l` entries instead of `l²/2` edges,
//!   which is what keeps million-instance runs in memory.
//! * **dense**: a bit matrix over the surviving roots with an exact edge
//!   count. The graph switches to it once the node count drops to the dense
//!   threshold; cliques are expanded once and discarded.
//!
//! Contractions are irreversible. Merging two roots unions their
//! separation knowledge, so `separated(u, v)` is inherited by whatever the
//! endpoints are later merged into.

use rand::Rng;
use rustc_hash::{FxHashMap, FxHashSet};
use std::hash::Hash;
use thiserror::Error;

/// Node count at or below which separations switch to the bit matrix.
pub const DEFAULT_DENSE_THRESHOLD: usize = 8192;

const NONE: u32 = u32::MAX;

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum ConsistencyError {
    #[error("cannot contract {u} and {v}: their super-nodes are known to differ")]
    ContractSeparated { u: u32, v: u32 },
    #[error("cannot separate {u} and {v}: they are in the same super-node")]
    SeparateMerged { u: u32, v: u32 },
    #[error("instance {0} belongs to a super-node that was removed")]
    Removed(u32),
}

/// A consistency error located inside a labeled batch.
#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
#[error("batch positions {first} and {second}: {error}")]
pub struct BatchViolation {
    pub first: usize,
    pub second: usize,
    #[source]
    pub error: ConsistencyError,
}

/// Result of folding one labeled batch into the graph.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BatchEffect {
    /// Name group of each batch position, numbered by first appearance.
    pub group_of: Vec<u32>,
    /// Surviving root of each name group.
    pub roots: Vec<u32>,
    /// Effective contractions performed.
    pub contractions: usize,
}

#[derive(Debug, Clone)]
struct SparseSeps {
    cliques: Vec<Vec<u32>>,
    member_of: Vec<FxHashSet<u32>>,
    /// Instances whose roots were last seen unseparated.
    witness: Option<(u32, u32)>,
    cursor: usize,
}

#[derive(Debug, Clone)]
struct DenseSeps {
    slot_of: Vec<u32>,
    root_of: Vec<u32>,
    words: usize,
    bits: Vec<u64>,
    live: Vec<u64>,
    edges: usize,
}

#[derive(Debug, Clone)]
enum Separations {
    Sparse(SparseSeps),
    Dense(DenseSeps),
}

#[derive(Debug, Clone)]
pub struct ContractionGraph {
    parent: Vec<u32>,
    size: Vec<u32>,
    removed: Vec<bool>,
    active: Vec<u32>,
    active_pos: Vec<u32>,
    seps: Separations,
    dense_threshold: usize,
    marks: Vec<u32>,
    mark_gen: u32,
}

#[inline]
fn find_in(parent: &mut [u32], mut x: u32) -> u32 {
    while parent[x as usize] != x {
        let grand = parent[parent[x as usize] as usize];
        parent[x as usize] = grand;
        x = grand;
    }
    x
}

#[inline]
fn find_ro(parent: &[u32], mut x: u32) -> u32 {
    while parent[x as usize] != x {
        x = parent[x as usize];
    }
    x
}

impl DenseSeps {
    #[inline]
    fn get(&self, a: usize, b: usize) -> bool {
        self.bits[a * self.words + b / 64] >> (b % 64) & 1 == 1
    }

    #[inline]
    fn set(&mut self, a: usize, b: usize) -> bool {
        let w = &mut self.bits[a * self.words + b / 64];
        let mask = 1u64 << (b % 64);
        let fresh = *w & mask == 0;
        *w |= mask;
        fresh
    }

    #[inline]
    fn clear(&mut self, a: usize, b: usize) {
        self.bits[a * self.words + b / 64] &= !(1u64 << (b % 64));
    }

    fn row(&self, a: usize) -> &[u64] {
        &self.bits[a * self.words..(a + 1) * self.words]
    }

    fn degree(&self, a: usize) -> usize {
        self.row(a).iter().map(|w| w.count_ones() as usize).sum()
    }

    fn row_members(&self, a: usize) -> Vec<usize> {
        let mut out = Vec::new();
        for (wi, &w) in self.row(a).iter().enumerate() {
            let mut w = w;
            while w != 0 {
                let b = w.trailing_zeros() as usize;
                out.push(wi * 64 + b);
                w &= w - 1;
            }
        }
        out
    }

    /// Adds a separation between two slots; returns true if it was new.
    fn link(&mut self, a: usize, b: usize) -> bool {
        if self.set(a, b) {
            self.set(b, a);
            self.edges += 1;
            true
        } else {
            false
        }
    }

    fn merge(&mut self, winner: usize, loser: usize) {
        let before = self.degree(winner) + self.degree(loser);
        for x in self.row_members(loser) {
            self.clear(x, loser);
            self.set(x, winner);
        }
        let (w0, l0) = (winner * self.words, loser * self.words);
        for i in 0..self.words {
            let lw = self.bits[l0 + i];
            self.bits[w0 + i] |= lw;
            self.bits[l0 + i] = 0;
        }
        let after = self.degree(winner);
        self.edges = self.edges + after - before;
        self.live[loser / 64] &= !(1u64 << (loser % 64));
    }

    fn drop_slot(&mut self, s: usize) {
        let members = self.row_members(s);
        for &x in &members {
            self.clear(x, s);
        }
        self.edges -= members.len();
        let s0 = s * self.words;
        self.bits[s0..s0 + self.words].iter_mut().for_each(|w| *w = 0);
        self.live[s / 64] &= !(1u64 << (s % 64));
    }

    /// A live slot other than `s` not separated from it, scanning words
    /// from `start_word`.
    fn unseparated_partner(&self, s: usize, start_word: usize) -> Option<usize> {
        let row = self.row(s);
        for k in 0..self.words {
            let wi = (start_word + k) % self.words;
            let mut cand = self.live[wi] & !row[wi];
            if wi == s / 64 {
                cand &= !(1u64 << (s % 64));
            }
            if cand != 0 {
                return Some(wi * 64 + cand.trailing_zeros() as usize);
            }
        }
        None
    }
}

impl ContractionGraph {
    pub fn new(n: usize) -> Self {
        Self::with_dense_threshold(n, DEFAULT_DENSE_THRESHOLD)
    }

    /// A graph that keeps sparse separations until at most `threshold`
    /// super-nodes remain.
    pub fn with_dense_threshold(n: usize, threshold: usize) -> Self {
        assert!(n < NONE as usize, "instance count exceeds u32 range");
        let mut g = ContractionGraph {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
            removed: vec![false; n],
            active: (0..n as u32).collect(),
            active_pos: (0..n as u32).collect(),
            seps: Separations::Sparse(SparseSeps {
                cliques: Vec::new(),
                member_of: vec![FxHashSet::default(); n],
                witness: None,
                cursor: 0,
            }),
            dense_threshold: threshold,
            marks: vec![0; n],
            mark_gen: 0,
        };
        g.maybe_densify();
        g
    }

    /// Number of instances.
    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.active.is_empty()
    }

    /// Number of live super-nodes.
    pub fn node_count(&self) -> usize {
        self.active.len()
    }

    /// Live super-node roots, in internal order.
    pub fn active_roots(&self) -> &[u32] {
        &self.active
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.seps, Separations::Dense(_))
    }

    pub fn find(&mut self, x: u32) -> u32 {
        find_in(&mut self.parent, x)
    }

    /// Root lookup without path compression.
    pub fn root_of(&self, x: u32) -> u32 {
        find_ro(&self.parent, x)
    }

    pub fn is_root(&self, x: u32) -> bool {
        self.parent[x as usize] == x
    }

    /// True if `x`'s super-node is still in the graph.
    pub fn is_live(&self, x: u32) -> bool {
        !self.removed[self.root_of(x) as usize]
    }

    /// Number of instances merged into `x`'s super-node.
    pub fn class_size(&self, x: u32) -> usize {
        self.size[self.root_of(x) as usize] as usize
    }

    fn next_mark(&mut self) -> u32 {
        if self.mark_gen == u32::MAX {
            self.marks.iter_mut().for_each(|m| *m = 0);
            self.mark_gen = 0;
        }
        self.mark_gen += 1;
        self.mark_gen
    }

    fn live_root(&mut self, x: u32) -> Result<u32, ConsistencyError> {
        let r = self.find(x);
        if self.removed[r as usize] {
            Err(ConsistencyError::Removed(x))
        } else {
            Ok(r)
        }
    }

    fn deactivate(&mut self, root: u32) {
        let pos = self.active_pos[root as usize] as usize;
        debug_assert_ne!(pos, NONE as usize);
        let last = *self.active.last().expect("active root");
        self.active.swap_remove(pos);
        if last != root {
            self.active_pos[last as usize] = pos as u32;
        }
        self.active_pos[root as usize] = NONE;
    }

    /// True iff the two roots are known to differ. Both must be live roots.
    fn roots_separated(&self, a: u32, b: u32) -> bool {
        match &self.seps {
            Separations::Sparse(s) => {
                let (sa, sb) = (&s.member_of[a as usize], &s.member_of[b as usize]);
                let (small, large) = if sa.len() <= sb.len() { (sa, sb) } else { (sb, sa) };
                small.iter().any(|id| large.contains(id))
            }
            Separations::Dense(d) => d.get(d.slot_of[a as usize] as usize, d.slot_of[b as usize] as usize),
        }
    }

    /// Whether the super-nodes of `u` and `v` are known to differ.
    pub fn separated(&mut self, u: u32, v: u32) -> bool {
        let (a, b) = (self.find(u), self.find(v));
        if a == b || self.removed[a as usize] || self.removed[b as usize] {
            return false;
        }
        self.roots_separated(a, b)
    }

    /// Merges the super-nodes of `u` and `v`. Returns whether a merge
    /// happened (`false` when they already coincide).
    pub fn contract(&mut self, u: u32, v: u32) -> Result<bool, ConsistencyError> {
        let a = self.live_root(u)?;
        let b = self.live_root(v)?;
        if a == b {
            return Ok(false);
        }
        if self.roots_separated(a, b) {
            return Err(ConsistencyError::ContractSeparated { u, v });
        }
        let (winner, loser) = if self.size[a as usize] >= self.size[b as usize] { (a, b) } else { (b, a) };
        self.parent[loser as usize] = winner;
        self.size[winner as usize] += self.size[loser as usize];
        match &mut self.seps {
            Separations::Sparse(s) => {
                let mut lost = std::mem::take(&mut s.member_of[loser as usize]);
                let mut kept = std::mem::take(&mut s.member_of[winner as usize]);
                if lost.len() > kept.len() {
                    std::mem::swap(&mut lost, &mut kept);
                }
                kept.extend(lost);
                s.member_of[winner as usize] = kept;
            }
            Separations::Dense(d) => {
                let (ws, ls) = (d.slot_of[winner as usize] as usize, d.slot_of[loser as usize] as usize);
                d.merge(ws, ls);
                d.slot_of[loser as usize] = NONE;
            }
        }
        self.deactivate(loser);
        self.maybe_densify();
        Ok(true)
    }

    /// Records that the super-nodes of `u` and `v` differ. Returns whether
    /// the edge is new.
    pub fn separate(&mut self, u: u32, v: u32) -> Result<bool, ConsistencyError> {
        let a = self.live_root(u)?;
        let b = self.live_root(v)?;
        if a == b {
            return Err(ConsistencyError::SeparateMerged { u, v });
        }
        if self.roots_separated(a, b) {
            return Ok(false);
        }
        self.add_clique(&[a, b]);
        Ok(true)
    }

    /// Records that the given distinct live roots are pairwise different.
    fn add_clique(&mut self, roots: &[u32]) {
        if roots.len() < 2 {
            return;
        }
        match &mut self.seps {
            Separations::Sparse(s) => {
                let id = s.cliques.len() as u32;
                s.cliques.push(roots.to_vec());
                for &r in roots {
                    s.member_of[r as usize].insert(id);
                }
            }
            Separations::Dense(d) => {
                for i in 0..roots.len() {
                    let si = d.slot_of[roots[i] as usize] as usize;
                    for &rj in &roots[i + 1..] {
                        d.link(si, d.slot_of[rj as usize] as usize);
                    }
                }
            }
        }
    }

    /// Takes the super-node of `u` out of the graph (its label is final).
    /// Its separations disappear with it.
    pub fn remove(&mut self, u: u32) -> Result<(), ConsistencyError> {
        let r = self.live_root(u)?;
        self.removed[r as usize] = true;
        match &mut self.seps {
            Separations::Sparse(s) => {
                s.member_of[r as usize] = FxHashSet::default();
            }
            Separations::Dense(d) => {
                let slot = d.slot_of[r as usize] as usize;
                d.drop_slot(slot);
                d.slot_of[r as usize] = NONE;
            }
        }
        self.deactivate(r);
        self.maybe_densify();
        Ok(())
    }

    /// Folds one teacher's answer into the graph: equal names are
    /// contracted, then all distinct name groups are separated pairwise.
    pub fn apply_batch<N: Eq + Hash>(&mut self, nodes: &[u32], names: &[N]) -> Result<BatchEffect, BatchViolation> {
        assert_eq!(nodes.len(), names.len(), "one name per queried node");
        let mut index: FxHashMap<&N, u32> = FxHashMap::default();
        let mut leaders: Vec<usize> = Vec::new();
        let mut group_of = Vec::with_capacity(nodes.len());
        for (pos, name) in names.iter().enumerate() {
            let next = leaders.len() as u32;
            let g = *index.entry(name).or_insert(next);
            if g == next {
                leaders.push(pos);
            }
            group_of.push(g);
        }

        let mut contractions = 0;
        for (pos, &g) in group_of.iter().enumerate() {
            let lead = leaders[g as usize];
            if pos == lead {
                if let Err(error) = self.live_root(nodes[pos]) {
                    return Err(BatchViolation { first: pos, second: pos, error });
                }
                continue;
            }
            match self.contract(nodes[lead], nodes[pos]) {
                Ok(true) => contractions += 1,
                Ok(false) => {}
                Err(error) => return Err(BatchViolation { first: lead, second: pos, error }),
            }
        }

        let roots: Vec<u32> = leaders.iter().map(|&p| self.find(nodes[p])).collect();
        let gen = self.next_mark();
        let mut owner: FxHashMap<u32, usize> = FxHashMap::default();
        for (g, &r) in roots.iter().enumerate() {
            if self.marks[r as usize] == gen {
                let other = owner[&r];
                return Err(BatchViolation {
                    first: leaders[other],
                    second: leaders[g],
                    error: ConsistencyError::SeparateMerged { u: nodes[leaders[other]], v: nodes[leaders[g]] },
                });
            }
            self.marks[r as usize] = gen;
            owner.insert(r, g);
        }
        self.add_clique(&roots);
        Ok(BatchEffect { group_of, roots, contractions })
    }

    /// Marks (with a fresh generation) every live root separated from
    /// `root` under the sparse representation.
    fn mark_sparse_neighbours(&mut self, root: u32) -> u32 {
        let gen = self.next_mark();
        let Separations::Sparse(s) = &self.seps else { unreachable!("sparse representation expected") };
        let parent = &mut self.parent;
        for &cid in &s.member_of[root as usize] {
            for &m in &s.cliques[cid as usize] {
                let r = find_in(parent, m);
                if r != root && !self.removed[r as usize] {
                    self.marks[r as usize] = gen;
                }
            }
        }
        gen
    }

    fn sparse_witness_alive(&mut self) -> bool {
        let Separations::Sparse(s) = &self.seps else { return false };
        let Some((x, y)) = s.witness else { return false };
        let (a, b) = (self.find(x), self.find(y));
        a != b && !self.removed[a as usize] && !self.removed[b as usize] && !self.roots_separated(a, b)
    }

    /// Scans roots starting at `start` for one with an unseparated partner,
    /// looking for partners from `offset` onwards in the active list.
    fn scan_unseparated(&mut self, start: usize, offset: usize) -> Option<(u32, u32)> {
        let n = self.active.len();
        if n < 2 {
            return None;
        }
        for k in 0..n {
            let root = self.active[(start + k) % n];
            if let Separations::Dense(d) = &self.seps {
                let slot = d.slot_of[root as usize] as usize;
                let start_word = offset % d.words.max(1);
                if let Some(other) = d.unseparated_partner(slot, start_word) {
                    return Some((root, d.root_of[other]));
                }
                continue;
            }
            let gen = self.mark_sparse_neighbours(root);
            for j in 0..n {
                let other = self.active[(offset + j) % n];
                if other != root && self.marks[other as usize] != gen {
                    return Some((root, other));
                }
            }
        }
        None
    }

    /// True iff every pair of live super-nodes is separated.
    pub fn is_clique(&mut self) -> bool {
        let n = self.active.len();
        if n < 2 {
            return true;
        }
        if let Separations::Dense(d) = &self.seps {
            return d.edges == n * (n - 1) / 2;
        }
        if self.sparse_witness_alive() {
            return false;
        }
        let cursor = match &self.seps {
            Separations::Sparse(s) => s.cursor,
            Separations::Dense(_) => 0,
        };
        let found = self.scan_unseparated(cursor % n, cursor.wrapping_mul(31) % n);
        if let Separations::Sparse(s) = &mut self.seps {
            s.cursor = s.cursor.wrapping_add(1);
            s.witness = found;
        }
        found.is_none()
    }

    /// Some pair of distinct live roots with no separation edge, found by a
    /// randomized scan; `None` iff the graph is a clique.
    pub fn find_unseparated_pair<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Option<(u32, u32)> {
        let n = self.active.len();
        if n < 2 {
            return None;
        }
        let start = rng.gen_range(0..n);
        let offset = rng.gen_range(0..n);
        let found = self.scan_unseparated(start, offset);
        if let Separations::Sparse(s) = &mut self.seps {
            s.witness = found;
        }
        found
    }

    /// True iff the given live roots are already pairwise separated.
    pub fn batch_is_clique(&mut self, roots: &[u32]) -> bool {
        if roots.len() < 2 {
            return true;
        }
        if let Separations::Dense(d) = &self.seps {
            let slots: Vec<usize> = roots.iter().map(|&r| d.slot_of[r as usize] as usize).collect();
            return slots.iter().enumerate().all(|(i, &a)| slots[i + 1..].iter().all(|&b| d.get(a, b)));
        }
        // Pairwise set intersections: a batch that is not yet a clique
        // almost always fails on its first pair.
        roots.iter().enumerate().all(|(i, &a)| roots[i + 1..].iter().all(|&b| self.roots_separated(a, b)))
    }

    /// Exact number of separation edges between live super-nodes. Constant
    /// time in the dense representation, a full scan otherwise.
    pub fn separation_count(&mut self) -> usize {
        if let Separations::Dense(d) = &self.seps {
            return d.edges;
        }
        let roots = self.active.clone();
        let mut twice = 0usize;
        for r in roots {
            let gen = self.mark_sparse_neighbours(r);
            twice += self.active.iter().filter(|&&o| self.marks[o as usize] == gen).count();
        }
        twice / 2
    }

    /// Partition of all instances (removed super-nodes included) into
    /// super-node member lists, ordered by smallest member.
    pub fn components(&mut self) -> Vec<Vec<u32>> {
        let n = self.len();
        let mut part_of: Vec<u32> = vec![NONE; n];
        let mut parts: Vec<Vec<u32>> = Vec::new();
        for x in 0..n as u32 {
            let r = self.find(x) as usize;
            if part_of[r] == NONE {
                part_of[r] = parts.len() as u32;
                parts.push(Vec::new());
            }
            parts[part_of[r] as usize].push(x);
        }
        parts
    }

    fn maybe_densify(&mut self) {
        if self.is_dense() || self.active.len() > self.dense_threshold {
            return;
        }
        let Separations::Sparse(sparse) = std::mem::replace(
            &mut self.seps,
            Separations::Dense(DenseSeps {
                slot_of: Vec::new(),
                root_of: Vec::new(),
                words: 0,
                bits: Vec::new(),
                live: Vec::new(),
                edges: 0,
            }),
        ) else {
            unreachable!()
        };
        let slots = self.active.len();
        let words = slots.div_ceil(64).max(1);
        let mut dense = DenseSeps {
            slot_of: vec![NONE; self.len()],
            root_of: self.active.clone(),
            words,
            bits: vec![0; slots * words],
            live: vec![0; words],
            edges: 0,
        };
        for (i, &r) in self.active.iter().enumerate() {
            dense.slot_of[r as usize] = i as u32;
            dense.live[i / 64] |= 1u64 << (i % 64);
        }
        let mut members: Vec<usize> = Vec::new();
        for clique in &sparse.cliques {
            let gen = self.next_mark();
            members.clear();
            for &m in clique {
                let r = find_in(&mut self.parent, m);
                if !self.removed[r as usize] && self.marks[r as usize] != gen {
                    self.marks[r as usize] = gen;
                    members.push(dense.slot_of[r as usize] as usize);
                }
            }
            for i in 0..members.len() {
                for j in i + 1..members.len() {
                    dense.link(members[i], members[j]);
                }
            }
        }
        self.seps = Separations::Dense(dense);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn both_modes(n: usize) -> [ContractionGraph; 2] {
        [ContractionGraph::with_dense_threshold(n, 0), ContractionGraph::with_dense_threshold(n, n)]
    }

    #[test]
    fn fresh_graphs() {
        let mut g = ContractionGraph::new(1);
        assert_eq!(g.node_count(), 1);
        assert!(g.is_clique());
        for mut g in both_modes(5) {
            assert_eq!(g.node_count(), 5);
            assert_eq!(g.separation_count(), 0);
            assert!(!g.is_clique());
        }
        let mut g = ContractionGraph::new(2);
        assert_eq!(g.components(), vec![vec![0], vec![1]]);
    }

    #[test]
    fn contract_examples() {
        for mut g in both_modes(3) {
            assert!(g.contract(0, 1).unwrap());
            assert_eq!(g.node_count(), 2);
            assert!(!g.contract(1, 1).unwrap());
            assert!(!g.contract(0, 1).unwrap());
            assert_eq!(g.node_count(), 2);
        }
        for mut g in both_modes(3) {
            g.separate(0, 1).unwrap();
            g.contract(1, 2).unwrap();
            assert!(g.separated(0, 2));
            assert_eq!(g.components(), vec![vec![0], vec![1, 2]]);
        }
    }

    #[test]
    fn separate_examples() {
        for mut g in both_modes(2) {
            assert!(g.separate(0, 1).unwrap());
            assert_eq!(g.separation_count(), 1);
            assert!(g.is_clique());
            assert!(!g.separate(1, 0).unwrap());
            assert_eq!(g.separation_count(), 1);
        }
        for mut g in both_modes(4) {
            for u in 0..4 {
                for v in u + 1..4 {
                    g.separate(u, v).unwrap();
                }
            }
            assert!(g.is_clique());
            assert_eq!(g.node_count(), 4);
            assert_eq!(g.separation_count(), 6);
        }
    }

    #[test]
    fn violations_are_reported() {
        for mut g in both_modes(3) {
            g.separate(0, 1).unwrap();
            assert_eq!(g.contract(0, 1), Err(ConsistencyError::ContractSeparated { u: 0, v: 1 }));
            g.contract(1, 2).unwrap();
            assert_eq!(g.separate(2, 1), Err(ConsistencyError::SeparateMerged { u: 2, v: 1 }));
            assert_eq!(g.contract(0, 2), Err(ConsistencyError::ContractSeparated { u: 0, v: 2 }));
        }
    }

    #[test]
    fn unseparated_pair_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for mut g in both_modes(3) {
            assert!(g.find_unseparated_pair(&mut rng).is_some());
            g.separate(0, 1).unwrap();
            for _ in 0..20 {
                let (a, b) = g.find_unseparated_pair(&mut rng).unwrap();
                let pair = (a.min(b), a.max(b));
                assert!(pair == (0, 2) || pair == (1, 2), "{pair:?}");
            }
            g.separate(0, 2).unwrap();
            g.separate(1, 2).unwrap();
            assert_eq!(g.find_unseparated_pair(&mut rng), None);
        }
    }

    #[test]
    fn batch_application() {
        for mut g in both_modes(6) {
            let eff = g.apply_batch(&[0, 1, 2, 3], &["a", "b", "a", "c"]).unwrap();
            assert_eq!(eff.group_of, vec![0, 1, 0, 2]);
            assert_eq!(eff.contractions, 1);
            assert_eq!(g.node_count(), 5);
            assert!(g.separated(2, 1) && g.separated(3, 0) && g.separated(1, 3));
            assert!(!g.separated(4, 0));
            let err = g.apply_batch(&[0, 1], &["x", "x"]).unwrap_err();
            assert_eq!((err.first, err.second), (0, 1));
            let err = g.apply_batch(&[0, 2], &["x", "y"]).unwrap_err();
            assert!(matches!(err.error, ConsistencyError::SeparateMerged { .. }));
        }
    }

    #[test]
    fn removal_drops_node_and_edges() {
        for mut g in both_modes(4) {
            g.apply_batch(&[0, 1, 2], &[1, 2, 1]).unwrap();
            g.separate(3, 1).unwrap();
            assert_eq!(g.separation_count(), 2);
            g.remove(2).unwrap();
            assert_eq!(g.node_count(), 2);
            assert_eq!(g.separation_count(), 1);
            assert!(g.is_clique());
            assert_eq!(g.contract(0, 3), Err(ConsistencyError::Removed(0)));
            g.remove(1).unwrap();
            g.remove(3).unwrap();
            assert!(g.is_empty());
            assert_eq!(g.components(), vec![vec![0, 2], vec![1], vec![3]]);
        }
    }

    #[test]
    fn densify_mid_script_keeps_knowledge() {
        let mut g = ContractionGraph::with_dense_threshold(10, 6);
        g.apply_batch(&[0, 1, 2, 3], &[0, 1, 2, 3]).unwrap();
        g.apply_batch(&[4, 5, 6], &[0, 0, 1]).unwrap();
        assert!(!g.is_dense());
        g.contract(7, 8).unwrap();
        g.contract(8, 9).unwrap();
        assert!(!g.is_dense());
        g.contract(0, 4).unwrap();
        assert!(g.is_dense());
        assert_eq!(g.node_count(), 6);
        assert!(g.separated(5, 3) && g.separated(6, 0) && g.separated(1, 2));
        assert!(!g.separated(9, 0));
        assert!(!g.separated(6, 1));
        // 6 edges from the first batch, plus {0,4,5}-6.
        assert_eq!(g.separation_count(), 6 + 1);
    }

    /// Brute-force reference: component labels plus an instance-level
    /// separation matrix kept closed under contraction.
    struct Oracle {
        comp: Vec<usize>,
        sep: Vec<Vec<bool>>,
        removed: Vec<bool>,
    }

    impl Oracle {
        fn new(n: usize) -> Self {
            Oracle { comp: (0..n).collect(), sep: vec![vec![false; n]; n], removed: vec![false; n] }
        }
        fn members(&self, u: usize) -> Vec<usize> {
            (0..self.comp.len()).filter(|&x| self.comp[x] == self.comp[u]).collect()
        }
        fn separated(&self, u: usize, v: usize) -> bool {
            self.sep[u][v]
        }
        fn mark_pairs(&mut self, u: usize, v: usize) {
            for a in self.members(u) {
                for b in self.members(v) {
                    self.sep[a][b] = true;
                    self.sep[b][a] = true;
                }
            }
        }
        fn contract(&mut self, u: usize, v: usize) -> Result<bool, ()> {
            if self.removed[self.comp[u]] || self.removed[self.comp[v]] {
                return Err(());
            }
            if self.comp[u] == self.comp[v] {
                return Ok(false);
            }
            if self.separated(u, v) {
                return Err(());
            }
            let (cu, cv) = (self.comp[u], self.comp[v]);
            let mu = self.members(u);
            let mv = self.members(v);
            let n = self.comp.len();
            for x in 0..n {
                if self.comp[x] == cv {
                    self.comp[x] = cu;
                }
            }
            for &a in mu.iter().chain(mv.iter()) {
                for y in 0..n {
                    let s = mu.iter().chain(mv.iter()).any(|&b| self.sep[b][y]);
                    self.sep[a][y] = s;
                    self.sep[y][a] = s;
                }
            }
            Ok(true)
        }
        fn separate(&mut self, u: usize, v: usize) -> Result<bool, ()> {
            if self.removed[self.comp[u]] || self.removed[self.comp[v]] || self.comp[u] == self.comp[v] {
                return Err(());
            }
            let fresh = !self.separated(u, v);
            self.mark_pairs(u, v);
            Ok(fresh)
        }
        /// One member per live component.
        fn live_comps(&self) -> Vec<usize> {
            let mut reps: Vec<usize> = Vec::new();
            for x in 0..self.comp.len() {
                let k = self.comp[x];
                if !self.removed[k] && !reps.iter().any(|&r| self.comp[r] == k) {
                    reps.push(x);
                }
            }
            reps
        }
        fn sep_count(&self) -> usize {
            let reps = self.live_comps();
            let mut count = 0;
            for i in 0..reps.len() {
                for j in i + 1..reps.len() {
                    if self.separated(reps[i], reps[j]) {
                        count += 1;
                    }
                }
            }
            count
        }
        fn components(&self) -> Vec<Vec<u32>> {
            let mut seen = vec![false; self.comp.len()];
            let mut out = Vec::new();
            for x in 0..self.comp.len() {
                if !seen[x] {
                    let m = self.members(x);
                    m.iter().for_each(|&y| seen[y] = true);
                    out.push(m.into_iter().map(|y| y as u32).collect());
                }
            }
            out
        }
    }

    #[derive(Debug, Clone)]
    enum Op {
        Contract(usize, usize),
        Separate(usize, usize),
        Remove(usize),
    }

    fn script() -> impl Strategy<Value = (usize, usize, Vec<Op>)> {
        (2usize..=12).prop_flat_map(|n| {
            let op = prop_oneof![
                4 => (0..n, 0..n).prop_map(|(u, v)| Op::Contract(u, v)),
                5 => (0..n, 0..n).prop_map(|(u, v)| Op::Separate(u, v)),
                1 => (0..n).prop_map(Op::Remove),
            ];
            (Just(n), 0..=n, prop::collection::vec(op, 0..40))
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(2500))]

        #[test]
        fn matches_brute_force((n, threshold, ops) in script(), seed in any::<u64>()) {
            let mut g = ContractionGraph::with_dense_threshold(n, threshold);
            let mut o = Oracle::new(n);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for op in ops {
                let before = g.node_count();
                match op {
                    Op::Contract(u, v) => {
                        let got = g.contract(u as u32, v as u32);
                        let want = o.contract(u, v);
                        prop_assert_eq!(got.is_ok(), want.is_ok());
                        if let (Ok(a), Ok(b)) = (got, want) {
                            prop_assert_eq!(a, b);
                            prop_assert_eq!(g.node_count(), before - usize::from(a));
                        }
                    }
                    Op::Separate(u, v) => {
                        let got = g.separate(u as u32, v as u32);
                        let want = o.separate(u, v);
                        prop_assert_eq!(got.is_ok(), want.is_ok());
                        if let (Ok(a), Ok(b)) = (got, want) {
                            prop_assert_eq!(a, b);
                        }
                    }
                    Op::Remove(u) => {
                        let live = !o.removed[o.comp[u]];
                        prop_assert_eq!(g.remove(u as u32).is_ok(), live);
                        if live {
                            let k = o.comp[u];
                            o.removed[k] = true;
                        }
                    }
                }
                prop_assert!(g.node_count() <= before);
                prop_assert_eq!(g.components(), o.components());
                let reps = o.live_comps();
                prop_assert_eq!(g.node_count(), reps.len());
                for u in 0..n {
                    for v in 0..n {
                        let live = !o.removed[o.comp[u]] && !o.removed[o.comp[v]];
                        prop_assert_eq!(g.separated(u as u32, v as u32), live && o.separated(u, v));
                    }
                }
                let count = o.sep_count();
                prop_assert_eq!(g.separation_count(), count);
                let k = reps.len();
                let clique = k < 2 || count == k * (k - 1) / 2;
                prop_assert_eq!(g.is_clique(), clique);
                match g.find_unseparated_pair(&mut rng) {
                    None => prop_assert!(clique),
                    Some((a, b)) => {
                        prop_assert!(!clique);
                        prop_assert!(a != b && g.is_root(a) && g.is_root(b));
                        prop_assert!(g.is_live(a) && g.is_live(b));
                        prop_assert!(!o.separated(a as usize, b as usize));
                    }
                }
            }
        }
    }
}
