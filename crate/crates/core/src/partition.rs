//! Relations and partitions over the states of an [`Lts`].

use std::collections::HashMap;
use std::hash::Hash;

use serde::{Deserialize, Serialize};

use crate::error::{CcsError, Result};
use crate::lts::{Lts, StateId};

/// A dense binary relation on `0..n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Relation {
    n: usize,
    bits: Vec<bool>,
    symmetric: bool,
}

impl Relation {
    pub fn empty(n: usize) -> Self {
        Relation { n, bits: vec![false; n * n], symmetric: false }
    }

    pub fn identity(n: usize) -> Self {
        let mut r = Self::empty(n);
        for s in 0..n {
            r.bits[s * n + s] = true;
        }
        r.symmetric = true;
        r
    }

    /// With `symmetric` set, the stored pairs are closed under inversion.
    pub fn from_pairs(n: usize, pairs: &[(StateId, StateId)], symmetric: bool) -> Self {
        let mut r = Self::empty(n);
        r.symmetric = symmetric;
        for &(a, b) in pairs {
            r.insert(a, b);
        }
        r
    }

    pub fn from_partition(p: &Partition) -> Self {
        let n = p.num_states();
        let mut r = Self::empty(n);
        for block in p.blocks() {
            for &a in block {
                for &b in block {
                    r.bits[a * n + b] = true;
                }
            }
        }
        r.symmetric = true;
        r
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn is_symmetric_flagged(&self) -> bool {
        self.symmetric
    }

    pub fn contains(&self, a: StateId, b: StateId) -> bool {
        self.bits[a * self.n + b]
    }

    pub fn insert(&mut self, a: StateId, b: StateId) {
        assert!(a < self.n && b < self.n, "pair ({a}, {b}) out of range");
        self.bits[a * self.n + b] = true;
        if self.symmetric {
            self.bits[b * self.n + a] = true;
        }
    }

    pub fn pairs(&self) -> Vec<(StateId, StateId)> {
        let n = self.n;
        (0..n * n).filter(|&i| self.bits[i]).map(|i| (i / n, i % n)).collect()
    }

    pub fn len(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn symmetric_closure(&self) -> Self {
        let mut r = self.clone();
        r.symmetric = true;
        for (a, b) in self.pairs() {
            r.insert(a, b);
        }
        r
    }

    pub fn is_symmetric(&self) -> bool {
        self.pairs().iter().all(|&(a, b)| self.contains(b, a))
    }

    pub fn is_reflexive(&self) -> bool {
        (0..self.n).all(|s| self.contains(s, s))
    }

    pub fn is_transitive(&self) -> bool {
        let n = self.n;
        for a in 0..n {
            for b in 0..n {
                if !self.contains(a, b) {
                    continue;
                }
                for c in 0..n {
                    if self.contains(b, c) && !self.contains(a, c) {
                        return false;
                    }
                }
            }
        }
        true
    }

    pub fn is_equivalence(&self) -> bool {
        self.is_reflexive() && self.is_symmetric() && self.is_transitive()
    }

    /// Relational composition `self ; other`.
    pub fn compose(&self, other: &Relation) -> Relation {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut r = Relation::empty(n);
        for (a, b) in self.pairs() {
            for c in 0..n {
                if other.contains(b, c) {
                    r.bits[a * n + c] = true;
                }
            }
        }
        r.symmetric = r.is_symmetric();
        r
    }

    /// Reads pairs of expression strings; each must parse to a state of `lts`.
    pub fn from_expr_pairs(lts: &Lts, pairs: &[(String, String)], symmetric: bool) -> Result<Self> {
        let state = |text: &str| -> Result<StateId> {
            let e = crate::syntax::parse(text)?;
            lts.state_of(&e)
                .ok_or_else(|| CcsError::Relation(format!("`{text}` is not a state of the transition system")))
        };
        let mut r = Self::empty(lts.num_states());
        r.symmetric = symmetric;
        for (a, b) in pairs {
            r.insert(state(a)?, state(b)?);
        }
        Ok(r)
    }

    pub fn to_expr_pairs(&self, lts: &Lts) -> Vec<(String, String)> {
        self.pairs().into_iter().map(|(a, b)| (lts.state_name(a), lts.state_name(b))).collect()
    }

    /// Equivalence classes, when the relation is an equivalence.
    pub fn to_partition(&self, lts: &Lts) -> Result<Partition> {
        if !self.is_equivalence() {
            return Err(CcsError::NotEquivalence(
                "expected a reflexive, symmetric and transitive relation".into(),
            ));
        }
        let mut class = vec![usize::MAX; self.n];
        for a in 0..self.n {
            if class[a] == usize::MAX {
                for (b, slot) in class.iter_mut().enumerate().skip(a) {
                    if self.contains(a, b) {
                        *slot = a;
                    }
                }
            }
        }
        Ok(Partition::from_keys(lts, &class))
    }
}

/// A partition of the states of an [`Lts`] with a divergence marker per
/// block. Blocks are ordered by their least state, states within a block
/// ascending, so equal partitions compare equal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    blocks: Vec<Vec<StateId>>,
    block_of: Vec<usize>,
    divergent: Vec<bool>,
}

impl Partition {
    /// Groups states with equal keys; `keys[s]` is the key of state `s`.
    pub fn from_keys<K: Eq + Hash + Clone>(lts: &Lts, keys: &[K]) -> Self {
        assert_eq!(keys.len(), lts.num_states());
        let mut ids: HashMap<K, usize> = HashMap::new();
        let mut blocks: Vec<Vec<StateId>> = Vec::new();
        for (s, k) in keys.iter().enumerate() {
            let b = *ids.entry(k.clone()).or_insert_with(|| {
                blocks.push(Vec::new());
                blocks.len() - 1
            });
            blocks[b].push(s);
        }
        Self::from_sorted_blocks(lts, blocks)
    }

    /// Validates that `blocks` is a partition of the states.
    pub fn from_blocks(lts: &Lts, mut blocks: Vec<Vec<StateId>>) -> Result<Self> {
        let n = lts.num_states();
        let mut seen = vec![false; n];
        for block in &mut blocks {
            if block.is_empty() {
                return Err(CcsError::Relation("empty block".into()));
            }
            for &s in block.iter() {
                if s >= n || seen[s] {
                    return Err(CcsError::Relation(format!("state {s} is invalid or repeated")));
                }
                seen[s] = true;
            }
            block.sort_unstable();
        }
        if seen.iter().any(|b| !b) {
            return Err(CcsError::Relation("blocks do not cover every state".into()));
        }
        blocks.sort_unstable_by_key(|b| b[0]);
        Ok(Self::from_sorted_blocks(lts, blocks))
    }

    fn from_sorted_blocks(lts: &Lts, blocks: Vec<Vec<StateId>>) -> Self {
        // Blocks built in state order are already sorted by least member.
        let mut block_of = vec![0; lts.num_states()];
        for (i, block) in blocks.iter().enumerate() {
            for &s in block {
                block_of[s] = i;
            }
        }
        let divergent = blocks.iter().map(|b| lts.block_diverges(b)).collect();
        Partition { blocks, block_of, divergent }
    }

    pub fn discrete(lts: &Lts) -> Self {
        Self::from_keys(lts, &(0..lts.num_states()).collect::<Vec<_>>())
    }

    pub fn universal(lts: &Lts) -> Self {
        Self::from_keys(lts, &vec![(); lts.num_states()])
    }

    pub fn blocks(&self) -> &[Vec<StateId>] {
        &self.blocks
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn num_states(&self) -> usize {
        self.block_of.len()
    }

    pub fn block_of(&self, s: StateId) -> usize {
        self.block_of[s]
    }

    pub fn block_ids(&self) -> &[usize] {
        &self.block_of
    }

    pub fn same_block(&self, a: StateId, b: StateId) -> bool {
        self.block_of[a] == self.block_of[b]
    }

    pub fn is_divergent(&self, block: usize) -> bool {
        self.divergent[block]
    }

    pub fn divergent_flags(&self) -> &[bool] {
        &self.divergent
    }

    pub fn block_mask(&self, block: usize) -> Vec<bool> {
        let mut mask = vec![false; self.num_states()];
        for &s in &self.blocks[block] {
            mask[s] = true;
        }
        mask
    }

    pub fn to_json(&self, lts: &Lts) -> PartitionJson {
        PartitionJson {
            blocks: self
                .blocks
                .iter()
                .zip(&self.divergent)
                .map(|(b, &divergent)| BlockJson {
                    states: b.iter().map(|&s| lts.state_name(s)).collect(),
                    divergent,
                })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockJson {
    pub states: Vec<String>,
    pub divergent: bool,
}

/// JSON shape of a partition export.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionJson {
    pub blocks: Vec<BlockJson>,
}
