//! Evaluation: alignment error rate against gold links, and the gap
//! between approximate and exact contrastive gradients.

use crate::corpus::{Corpus, GoldAlignment, SentencePair, TTable};
use crate::error::{Error, Result};
use crate::exact::ExactTable;
use crate::features::{Alignment, FeatureVector, WeightVector, K};
use crate::gibbs::gibbs_expectation;
use crate::rng::{mix, substream};
use crate::scalar::{to_f64, Real};
use crate::search::beam_search;
use crate::trainer::topn_expectation;

/// Alignment error rate of one prediction:
/// 1 - (|A ∩ S| + |A ∩ P|) / (|A| + |S|), where S are sure and P possible
/// gold links. Zero when both the prediction and the sure set are empty.
pub fn aer(pred: &Alignment, gold: &GoldAlignment) -> f64 {
    let a = pred.len();
    let s = gold.sure().len();
    if a == 0 && s == 0 {
        return 0.0;
    }
    let a_s = pred.iter().filter(|l| gold.sure().contains(l)).count();
    let a_p = pred.iter().filter(|l| gold.possible().contains(l)).count();
    1.0 - (a_s + a_p) as f64 / (a + s) as f64
}

/// Micro-averaged corpus error rate: intersections and sizes are summed
/// over all pairs before the final ratio.
pub fn corpus_aer(preds: &[Alignment], golds: &[GoldAlignment]) -> Result<f64> {
    if preds.len() != golds.len() {
        return Err(Error::LengthMismatch {
            left: preds.len(),
            right: golds.len(),
            what: "predictions vs gold annotations",
        });
    }
    let mut num = 0usize;
    let mut den = 0usize;
    for (pred, gold) in preds.iter().zip(golds) {
        num += pred.iter().filter(|l| gold.sure().contains(l)).count();
        num += pred.iter().filter(|l| gold.possible().contains(l)).count();
        den += pred.len() + gold.sure().len();
    }
    if den == 0 {
        return Ok(0.0);
    }
    Ok(1.0 - num as f64 / den as f64)
}

/// How a posterior feature expectation is approximated.
#[derive(Clone, Copy, Debug)]
pub enum Estimator {
    /// Renormalize over the best n alignments of a width-b beam search.
    TopN { n: usize, b: usize },
    /// Average over Gibbs samples, one per single-site draw after burn-in.
    Gibbs {
        samples: usize,
        burn_in: usize,
        seed: u64,
    },
}

impl Estimator {
    pub fn name(&self) -> &'static str {
        match self {
            Estimator::TopN { .. } => "topn",
            Estimator::Gibbs { .. } => "gibbs",
        }
    }

    /// The accuracy knob: n for the beam harvest, samples for the sampler.
    pub fn param(&self) -> usize {
        match *self {
            Estimator::TopN { n, .. } => n,
            Estimator::Gibbs { samples, .. } => samples,
        }
    }
}

/// Exact contrastive gradient for one pair, by enumeration.
pub fn delta_true<S: Real>(
    observed: &SentencePair,
    noisy: &SentencePair,
    weights: &WeightVector<S>,
    ttable: &TTable<S>,
) -> Result<FeatureVector<S>> {
    let e_obs = ExactTable::build(observed, ttable)?.expectation(weights);
    let e_noi = ExactTable::build(noisy, ttable)?.expectation(weights);
    Ok(e_obs.sub(&e_noi))
}

/// Approximate contrastive gradient for one pair under the estimator.
pub fn delta_approx<S: Real>(
    observed: &SentencePair,
    noisy: &SentencePair,
    weights: &WeightVector<S>,
    ttable: &TTable<S>,
    estimator: &Estimator,
) -> FeatureVector<S> {
    match *estimator {
        Estimator::TopN { n, b } => {
            let top_obs = beam_search(observed, weights, ttable, b, n);
            let top_noi = beam_search(noisy, weights, ttable, b, n);
            let e_obs = topn_expectation(&top_obs, weights).expect("harvest contains the root");
            let e_noi = topn_expectation(&top_noi, weights).expect("harvest contains the root");
            e_obs.sub(&e_noi)
        }
        Estimator::Gibbs {
            samples,
            burn_in,
            seed,
        } => {
            // Separate streams per side so the two chains never share draws.
            let e_obs =
                gibbs_expectation(observed, weights, ttable, samples, burn_in, mix(seed, 0));
            let e_noi = gibbs_expectation(noisy, weights, ttable, samples, burn_in, mix(seed, 1));
            e_obs.sub(&e_noi)
        }
    }
}

/// Mean absolute gap, per pair and per feature, between the exact and the
/// approximate gradient at one weight vector.
pub fn approx_error<S: Real>(
    corpus: &Corpus,
    noisy: &Corpus,
    weights: &WeightVector<S>,
    ttable: &TTable<S>,
    estimator: &Estimator,
) -> Result<S> {
    if corpus.len() != noisy.len() {
        return Err(Error::LengthMismatch {
            left: corpus.len(),
            right: noisy.len(),
            what: "observed vs noisy pairs",
        });
    }
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus("approximation diagnostics"));
    }
    let mut sum = S::zero();
    for (obs, noi) in corpus.pairs.iter().zip(&noisy.pairs) {
        let dt = delta_true(obs, noi, weights, ttable)?;
        let da = delta_approx(obs, noi, weights, ttable, estimator);
        sum += dt.sub(&da).l1_norm();
    }
    Ok(sum / S::from_usize(corpus.len() * K).unwrap())
}

#[derive(Clone, Debug)]
pub struct ApproxErrorReport {
    /// Estimator family, "topn" or "gibbs".
    pub estimator: &'static str,
    /// n or samples, respectively.
    pub param: usize,
    /// Number of pairs the averages run over.
    pub pairs: usize,
    /// One mean absolute gradient gap per sampled weight vector.
    pub per_trial: Vec<f64>,
    /// Mean of `per_trial`.
    pub avg: f64,
}

/// Draws `trials` standard-normal weight vectors from a stream derived from
/// `seed` and reports the approximation error at each. Exact enumeration
/// tables are built once per pair and reused across all weight draws.
pub fn avg_approx_error<S: Real>(
    corpus: &Corpus,
    noisy: &Corpus,
    ttable: &TTable<S>,
    trials: usize,
    estimator: &Estimator,
    seed: u64,
) -> Result<ApproxErrorReport> {
    assert!(trials >= 1, "at least one weight draw is required");
    if corpus.len() != noisy.len() {
        return Err(Error::LengthMismatch {
            left: corpus.len(),
            right: noisy.len(),
            what: "observed vs noisy pairs",
        });
    }
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus("approximation diagnostics"));
    }

    let mut rng = substream(seed, "theta");
    let thetas: Vec<WeightVector<S>> = (0..trials)
        .map(|_| WeightVector::standard_normal(&mut rng))
        .collect();

    let mut sums = vec![S::zero(); trials];
    for (obs, noi) in corpus.pairs.iter().zip(&noisy.pairs) {
        let table_obs = ExactTable::build(obs, ttable)?;
        let table_noi = ExactTable::build(noi, ttable)?;
        for (t, theta) in thetas.iter().enumerate() {
            let dt = table_obs
                .expectation(theta)
                .sub(&table_noi.expectation(theta));
            let per_pair = match *estimator {
                Estimator::Gibbs {
                    samples,
                    burn_in,
                    seed,
                } => Estimator::Gibbs {
                    samples,
                    burn_in,
                    seed: mix(mix(seed, t as u64), obs.id as u64),
                },
                e => e,
            };
            let da = delta_approx(obs, noi, theta, ttable, &per_pair);
            sums[t] += dt.sub(&da).l1_norm();
        }
    }

    let scale = (corpus.len() * K) as f64;
    let per_trial: Vec<f64> = sums.into_iter().map(|s| to_f64(s) / scale).collect();
    let avg = per_trial.iter().sum::<f64>() / trials as f64;
    Ok(ApproxErrorReport {
        estimator: estimator.name(),
        param: estimator.param(),
        pairs: corpus.len(),
        per_trial,
        avg,
    })
}
