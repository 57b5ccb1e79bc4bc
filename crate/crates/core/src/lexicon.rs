//! IBM Model 1 expectation-maximization, run in both directions to fill a
//! bidirectional translation table.
//!
//! No NULL word: every observed token pair co-occurring in some sentence
//! pair gets probability mass, nothing else does. EM on this model has a
//! non-decreasing log-likelihood, which the tests pin down.

use std::collections::{HashMap, HashSet};

use crate::corpus::{Corpus, TTable};
use crate::scalar::{real, Real};

/// Conditional probabilities: `table[cond][out] = t(out|cond)`.
pub type CondProbs<S> = HashMap<String, HashMap<String, S>>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    /// t(target|source): conditioning on source words.
    Forward,
    /// t(source|target): conditioning on target words.
    Backward,
}

const PROB_FLOOR: f64 = 1e-12;

fn sides<'a>(corpus: &'a Corpus, direction: Direction) -> Vec<(&'a [String], &'a [String])> {
    corpus
        .pairs
        .iter()
        .map(|p| match direction {
            Direction::Forward => (p.source.as_slice(), p.target.as_slice()),
            Direction::Backward => (p.target.as_slice(), p.source.as_slice()),
        })
        .collect()
}

/// Uniform initialization over co-occurring pairs only.
fn init_uniform<S: Real>(pairs: &[(&[String], &[String])]) -> CondProbs<S> {
    let mut seen: HashMap<&str, HashSet<&str>> = HashMap::new();
    for (cond, out) in pairs {
        for c in cond.iter() {
            let entry = seen.entry(c).or_default();
            for o in out.iter() {
                entry.insert(o);
            }
        }
    }
    seen.into_iter()
        .map(|(c, outs)| {
            let p = S::one() / S::from_usize(outs.len()).unwrap();
            let row = outs.into_iter().map(|o| (o.to_owned(), p)).collect();
            (c.to_owned(), row)
        })
        .collect()
}

/// One direction of Model 1 EM. Deterministic: expected counts accumulate
/// in corpus order, never in hash-map order.
pub fn train_model1<S: Real>(corpus: &Corpus, iters: usize, direction: Direction) -> CondProbs<S> {
    let pairs = sides(corpus, direction);
    let mut t = init_uniform::<S>(&pairs);
    let floor = real::<S>(PROB_FLOOR);
    for _ in 0..iters {
        let mut counts: CondProbs<S> = HashMap::new();
        let mut totals: HashMap<String, S> = HashMap::new();
        for (cond, out) in &pairs {
            for o in out.iter() {
                let denom: S = cond.iter().map(|c| t[c.as_str()][o.as_str()]).sum();
                for c in cond.iter() {
                    let post = t[c.as_str()][o.as_str()] / denom;
                    *counts
                        .entry(c.clone())
                        .or_default()
                        .entry(o.clone())
                        .or_insert_with(S::zero) += post;
                    *totals.entry(c.clone()).or_insert_with(S::zero) += post;
                }
            }
        }
        for (c, row) in counts {
            let total = totals[&c];
            let trow = t.get_mut(&c).unwrap();
            for (o, cnt) in row {
                trow.insert(o, (cnt / total).max(floor));
            }
        }
    }
    t
}

/// Corpus log-likelihood under one direction of the model, including the
/// uniform 1/|cond| alignment factor.
pub fn log_likelihood<S: Real>(corpus: &Corpus, table: &CondProbs<S>, direction: Direction) -> S {
    let pairs = sides(corpus, direction);
    let mut ll = S::zero();
    for (cond, out) in &pairs {
        let len = S::from_usize(cond.len()).unwrap();
        for o in out.iter() {
            let p: S = cond
                .iter()
                .map(|c| {
                    table
                        .get(c.as_str())
                        .and_then(|row| row.get(o.as_str()))
                        .copied()
                        .unwrap_or_else(S::zero)
                })
                .sum();
            ll += (p / len).ln();
        }
    }
    ll
}

/// Trains both directions and packs them into a table.
pub fn train_ttable<S: Real>(corpus: &Corpus, iters: usize) -> TTable<S> {
    TTable::from_parts(
        train_model1(corpus, iters, Direction::Forward),
        train_model1(corpus, iters, Direction::Backward),
    )
}
