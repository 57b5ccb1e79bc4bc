//! Greedy beam search over link additions.
//!
//! Search starts from the empty alignment and repeatedly tries to add one
//! link to each beam state, keeping a child only when the incremental score
//! gain is strictly positive. Every state the search scores (the root plus
//! every surviving child) is offered to a bounded best-n container, so the
//! harvested set doubles as a cheap approximation of the highest-scoring
//! alignments.

use std::cmp::Ordering;
use std::collections::{btree_map, BTreeMap, BTreeSet};

use crate::corpus::{Link, SentencePair, TTable};
use crate::features::{AlignStats, Alignment, FeatureVector, WeightVector};
use crate::scalar::Real;

/// Beam width used by the trainer and CLI when none is given.
pub const DEFAULT_BEAM: usize = 8;

/// An alignment together with its feature vector and linear score.
#[derive(Clone, Debug)]
pub struct ScoredAlignment<S: Real> {
    pub alignment: Alignment,
    pub features: FeatureVector<S>,
    pub score: S,
}

struct Entry<S: Real>(ScoredAlignment<S>);

impl<S: Real> Ord for Entry<S> {
    fn cmp(&self, other: &Self) -> Ordering {
        // Higher score first; exact ties fall back to canonical link order,
        // smallest first.
        Real::total_cmp(&other.0.score, &self.0.score)
            .then_with(|| self.0.alignment.cmp(&other.0.alignment))
    }
}

impl<S: Real> PartialOrd for Entry<S> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<S: Real> PartialEq for Entry<S> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<S: Real> Eq for Entry<S> {}

/// Keeps the best `cap` scored alignments seen so far, ordered by
/// descending score with canonical tie-breaking.
pub struct TopN<S: Real> {
    cap: usize,
    set: BTreeSet<Entry<S>>,
}

impl<S: Real> TopN<S> {
    /// Panics if `cap` is zero; an empty container has no use.
    pub fn new(cap: usize) -> Self {
        assert!(cap >= 1, "top-n capacity must be at least 1");
        TopN {
            cap,
            set: BTreeSet::new(),
        }
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn len(&self) -> usize {
        self.set.len()
    }

    pub fn is_empty(&self) -> bool {
        self.set.is_empty()
    }

    /// Inserts unless already present or worse than a full container's
    /// current worst. Returns whether the item was kept.
    pub fn offer(&mut self, item: ScoredAlignment<S>) -> bool {
        let score = item.score;
        let alignment = item.alignment.clone();
        if !self.set.insert(Entry(item)) {
            return false;
        }
        if self.set.len() > self.cap {
            let dropped = self.set.pop_last().unwrap();
            let was_offered = Real::total_cmp(&dropped.0.score, &score) == Ordering::Equal
                && dropped.0.alignment == alignment;
            return !was_offered;
        }
        true
    }

    /// Best first.
    pub fn iter(&self) -> impl Iterator<Item = &ScoredAlignment<S>> {
        self.set.iter().map(|e| &e.0)
    }

    pub fn best(&self) -> Option<&ScoredAlignment<S>> {
        self.set.iter().next().map(|e| &e.0)
    }
}

/// Runs the beam search and returns the `n` best scored states it visited.
///
/// The root (empty alignment) always participates, so the result is never
/// empty. With all-zero weights no addition has positive gain and the
/// result is exactly the empty alignment.
pub fn beam_search<S: Real>(
    pair: &SentencePair,
    weights: &WeightVector<S>,
    ttable: &TTable<S>,
    b: usize,
    n: usize,
) -> TopN<S> {
    assert!(b >= 1, "beam width must be at least 1");
    let mut topn = TopN::new(n);
    let root = AlignStats::<S>::empty(pair);
    topn.offer(ScoredAlignment {
        alignment: root.alignment(),
        features: *root.features(),
        score: weights.dot(root.features()),
    });

    let (l, m) = (pair.l(), pair.m());
    let mut beam = vec![root];
    while !beam.is_empty() {
        // Dedup expansions by alignment; identical alignments reached along
        // different paths have identical cached features, so any surviving
        // copy is interchangeable.
        let mut pool: BTreeMap<Alignment, (AlignStats<S>, S)> = BTreeMap::new();
        for state in &beam {
            for i in 0..l {
                for j in 0..m {
                    let link = Link::new(i, j);
                    if state.contains(link) {
                        continue;
                    }
                    let delta = state
                        .delta_add(link, pair, ttable)
                        .expect("in-bounds absent link");
                    if weights.dot(&delta) <= S::zero() {
                        continue;
                    }
                    let mut child = state.clone();
                    child.apply_add(link, &delta);
                    let score = weights.dot(child.features());
                    match pool.entry(child.alignment()) {
                        btree_map::Entry::Vacant(slot) => {
                            slot.insert((child, score));
                        }
                        btree_map::Entry::Occupied(_) => {}
                    }
                }
            }
        }
        // BTreeMap yields alignments in canonical order; a stable sort by
        // descending score therefore breaks ties canonically.
        let mut candidates: Vec<(AlignStats<S>, S)> = pool.into_values().collect();
        candidates.sort_by(|a, b| Real::total_cmp(&b.1, &a.1));
        for (child, score) in &candidates {
            topn.offer(ScoredAlignment {
                alignment: child.alignment(),
                features: *child.features(),
                score: *score,
            });
        }
        candidates.truncate(b);
        beam = candidates.into_iter().map(|(child, _)| child).collect();
    }
    topn
}

/// The single highest-scoring alignment the beam search can find.
pub fn viterbi<S: Real>(
    pair: &SentencePair,
    weights: &WeightVector<S>,
    ttable: &TTable<S>,
    b: usize,
) -> ScoredAlignment<S> {
    beam_search(pair, weights, ttable, b, 1)
        .best()
        .expect("beam search always yields the root")
        .clone()
}
