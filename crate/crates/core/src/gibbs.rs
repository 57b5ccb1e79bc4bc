//! Single-site Gibbs sampling of alignments, used as a baseline estimator
//! of posterior feature expectations.
//!
//! The chain visits every grid cell once per pass in a freshly shuffled
//! order and resamples that link's on/off state from its exact conditional,
//! which for a log-linear model is a sigmoid of the score difference between
//! the two states. The chain starts from an alignment with each link on with
//! probability one half, and one sample is recorded after every single-site
//! draw, so a sample budget counts conditional draws, not full passes; early
//! samples still carry the randomized initial state.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::corpus::{Link, SentencePair, TTable};
use crate::features::{AlignStats, FeatureVector, WeightVector};
use crate::rng::substream;
use crate::scalar::{real, Real};

fn sigmoid<S: Real>(x: S) -> S {
    // Split on sign so exp never overflows.
    if x >= S::zero() {
        S::one() / (S::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (S::one() + e)
    }
}

/// Averages the feature vector over `samples` post-burn-in snapshots, one
/// recorded after every single-site conditional draw. `burn_in` is counted
/// in the same unit of site updates.
pub fn gibbs_expectation<S: Real>(
    pair: &SentencePair,
    weights: &WeightVector<S>,
    ttable: &TTable<S>,
    samples: usize,
    burn_in: usize,
    seed: u64,
) -> FeatureVector<S> {
    assert!(samples >= 1, "at least one sample is required");
    let mut rng = substream(seed, "gibbs");

    let mut grid = Vec::with_capacity(pair.l() * pair.m());
    for i in 0..pair.l() {
        for j in 0..pair.m() {
            grid.push(Link::new(i, j));
        }
    }

    let mut stats = AlignStats::<S>::empty(pair);
    for &link in &grid {
        if rng.random_bool(0.5) {
            let delta = stats.delta_add(link, pair, ttable).unwrap();
            stats.apply_add(link, &delta);
        }
    }

    let mut acc = FeatureVector::zeros();
    let mut taken = 0usize;
    let mut visits = 0usize;
    'chain: loop {
        grid.shuffle(&mut rng);
        for &link in &grid {
            let present = stats.contains(link);
            // Score difference between link-on and link-off at the current
            // state of every other cell.
            let (delta, gain_on) = if present {
                let d = stats.delta_remove(link).unwrap();
                let g = weights.dot(&d);
                (d, -g)
            } else {
                let d = stats.delta_add(link, pair, ttable).unwrap();
                let g = weights.dot(&d);
                (d, g)
            };
            let p_on = sigmoid(gain_on);
            // Always consume one draw per visit so the stream position is
            // independent of the current state.
            let on = real::<S>(rng.random::<f64>()) < p_on;
            if on && !present {
                stats.apply_add(link, &delta);
            } else if !on && present {
                stats.apply_remove(link, &delta);
            }
            visits += 1;
            if visits > burn_in {
                acc.add_assign(stats.features());
                taken += 1;
                if taken == samples {
                    break 'chain;
                }
            }
        }
    }
    acc.scale(S::one() / S::from_usize(samples).unwrap())
}
