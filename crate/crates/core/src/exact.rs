//! Exhaustive enumeration over all 2^(l*m) alignments of a small pair.
//!
//! This is the slow, trustworthy reference: exact posteriors, exact feature
//! expectations, exact best-n sets and posterior mass curves, all by brute
//! force. A hard guard refuses pairs whose grid exceeds [`ENUM_CAP`] cells,
//! since the table would not fit in time or memory anyway.
//!
//! Every feature vector here comes from from-scratch extraction, never from
//! the incremental deltas, so the two paths stay independently testable.

use crate::corpus::{Link, SentencePair, TTable};
use crate::error::{Error, Result};
use crate::features::{features_of_links, Alignment, FeatureVector, WeightVector};
use crate::scalar::Real;
use crate::search::{ScoredAlignment, TopN};

/// Largest l*m grid the enumeration accepts (2^24 alignments).
pub const ENUM_CAP: usize = 24;

/// Returns whether the pair is small enough to enumerate.
pub fn within_cap(pair: &SentencePair) -> bool {
    pair.l() * pair.m() <= ENUM_CAP
}

fn guard(pair: &SentencePair) -> Result<usize> {
    let links = pair.l() * pair.m();
    if links > ENUM_CAP {
        return Err(Error::EnumerationGuard {
            links,
            cap: ENUM_CAP,
        });
    }
    Ok(links)
}

fn grid(pair: &SentencePair) -> Vec<Link> {
    let mut links = Vec::with_capacity(pair.l() * pair.m());
    for i in 0..pair.l() {
        for j in 0..pair.m() {
            links.push(Link::new(i, j));
        }
    }
    links
}

fn links_of_mask(grid: &[Link], mask: u64, buf: &mut Vec<Link>) {
    buf.clear();
    for (p, &link) in grid.iter().enumerate() {
        if mask >> p & 1 == 1 {
            buf.push(link);
        }
    }
}

/// All alignments of the pair, in mask order: bit p of the mask selects the
/// p-th link of the row-major grid, so index 0 is the empty alignment.
pub fn enumerate(pair: &SentencePair) -> Result<impl Iterator<Item = Alignment>> {
    guard(pair)?;
    let grid = grid(pair);
    let count: u64 = 1 << grid.len();
    Ok((0..count).map(move |mask| {
        let mut buf = Vec::new();
        links_of_mask(&grid, mask, &mut buf);
        Alignment::from_links(buf)
    }))
}

/// Feature vectors for every alignment of one pair, indexed by mask.
/// Building it costs 2^(l*m) full extractions; reuse it across weight
/// vectors whenever possible.
pub struct ExactTable<S: Real> {
    grid: Vec<Link>,
    feats: Vec<FeatureVector<S>>,
}

impl<S: Real> ExactTable<S> {
    pub fn build(pair: &SentencePair, ttable: &TTable<S>) -> Result<Self> {
        let n = guard(pair)?;
        let grid = grid(pair);
        let mut feats = Vec::with_capacity(1usize << n);
        let mut buf = Vec::with_capacity(n);
        for mask in 0..(1u64 << n) {
            links_of_mask(&grid, mask, &mut buf);
            feats.push(features_of_links(pair, &buf, ttable));
        }
        Ok(ExactTable { grid, feats })
    }

    /// Number of alignments (2^(l*m)).
    pub fn len(&self) -> usize {
        self.feats.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn alignment(&self, index: usize) -> Alignment {
        let mut buf = Vec::new();
        links_of_mask(&self.grid, index as u64, &mut buf);
        Alignment::from_links(buf)
    }

    pub fn features(&self, index: usize) -> &FeatureVector<S> {
        &self.feats[index]
    }

    /// Linear scores for every alignment.
    pub fn scores(&self, weights: &WeightVector<S>) -> Vec<S> {
        self.feats.iter().map(|phi| weights.dot(phi)).collect()
    }

    /// log of the partition function: log-sum-exp over all scores.
    pub fn log_partition(&self, weights: &WeightVector<S>) -> S {
        log_sum_exp(&self.scores(weights))
    }

    /// Exact posterior probability of every alignment; sums to one.
    pub fn posterior_probs(&self, weights: &WeightVector<S>) -> Vec<S> {
        let scores = self.scores(weights);
        let lse = log_sum_exp(&scores);
        scores.into_iter().map(|s| (s - lse).exp()).collect()
    }

    /// Exact expectation of the feature vector under the posterior.
    pub fn expectation(&self, weights: &WeightVector<S>) -> FeatureVector<S> {
        let probs = self.posterior_probs(weights);
        let mut acc = FeatureVector::zeros();
        for (phi, p) in self.feats.iter().zip(&probs) {
            acc.add_assign(&phi.scale(*p));
        }
        acc
    }

    /// Exact best-n alignments with the same ordering and tie-breaking as
    /// the beam search container.
    pub fn topn(&self, weights: &WeightVector<S>, n: usize) -> TopN<S> {
        let mut top = TopN::new(n);
        for (index, phi) in self.feats.iter().enumerate() {
            top.offer(ScoredAlignment {
                alignment: self.alignment(index),
                features: *phi,
                score: weights.dot(phi),
            });
        }
        top
    }

    /// The exact argmax alignment and its score.
    pub fn argmax(&self, weights: &WeightVector<S>) -> (Alignment, S) {
        let best = self.topn(weights, 1);
        let item = best.best().expect("enumeration is never empty");
        (item.alignment.clone(), item.score)
    }

    /// Cumulative posterior mass of the k highest-probability alignments,
    /// for k = 1..=k_max. Past the table size the curve stays at one.
    pub fn mass_curve(&self, weights: &WeightVector<S>, k_max: usize) -> Vec<S> {
        let mut probs = self.posterior_probs(weights);
        probs.sort_by(|a, b| Real::total_cmp(b, a));
        let mut curve = Vec::with_capacity(k_max);
        let mut mass = S::zero();
        for k in 0..k_max {
            if k < probs.len() {
                mass += probs[k];
            }
            curve.push(mass);
        }
        curve
    }
}

fn log_sum_exp<S: Real>(scores: &[S]) -> S {
    let max = scores.iter().copied().fold(S::neg_infinity(), |a, b| {
        if Real::total_cmp(&b, &a).is_gt() {
            b
        } else {
            a
        }
    });
    let sum: S = scores.iter().map(|&s| (s - max).exp()).sum();
    max + sum.ln()
}

/// Exact posterior over all alignments, paired with the alignments
/// themselves in mask order.
pub fn posterior<S: Real>(
    pair: &SentencePair,
    weights: &WeightVector<S>,
    ttable: &TTable<S>,
) -> Result<Vec<(Alignment, S)>> {
    let table = ExactTable::build(pair, ttable)?;
    let probs = table.posterior_probs(weights);
    Ok(probs
        .into_iter()
        .enumerate()
        .map(|(index, p)| (table.alignment(index), p))
        .collect())
}

/// Exact feature expectation for one pair.
pub fn exact_expectation<S: Real>(
    pair: &SentencePair,
    weights: &WeightVector<S>,
    ttable: &TTable<S>,
) -> Result<FeatureVector<S>> {
    Ok(ExactTable::build(pair, ttable)?.expectation(weights))
}

/// Exact best-n alignments for one pair.
pub fn exact_topn<S: Real>(
    pair: &SentencePair,
    weights: &WeightVector<S>,
    ttable: &TTable<S>,
    n: usize,
) -> Result<TopN<S>> {
    Ok(ExactTable::build(pair, ttable)?.topn(weights, n))
}

/// log of the partition function for one pair.
pub fn log_partition<S: Real>(
    pair: &SentencePair,
    weights: &WeightVector<S>,
    ttable: &TTable<S>,
) -> Result<S> {
    Ok(ExactTable::build(pair, ttable)?.log_partition(weights))
}

/// Posterior mass captured by the top k alignments, k = 1..=k_max.
pub fn mass_curve<S: Real>(
    pair: &SentencePair,
    weights: &WeightVector<S>,
    ttable: &TTable<S>,
    k_max: usize,
) -> Result<Vec<S>> {
    Ok(ExactTable::build(pair, ttable)?.mass_curve(weights, k_max))
}
