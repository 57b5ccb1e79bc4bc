//! Contrastive stochastic gradient training.
//!
//! Each observed pair is contrasted with a corrupted twin. The per-pair
//! gradient is the difference between approximate posterior feature
//! expectations on the observed and the noisy pair, each computed by
//! renormalizing over the best-n alignments the beam search visited. The
//! weight update follows that gradient with an inverse-epoch learning-rate
//! decay and optional L2 shrinkage.

use rand::seq::SliceRandom;

use crate::corpus::{Corpus, SentencePair, TTable};
use crate::error::{Error, Result};
use crate::exact::{log_partition, within_cap};
use crate::features::{Alignment, FeatureVector, WeightVector, K};
use crate::metrics::corpus_aer;
use crate::noise::{make_noisy_corpus, NoiseSpec};
use crate::rng::{mix, substream};
use crate::scalar::{real, to_f64, Real};
use crate::search::{beam_search, viterbi, TopN, DEFAULT_BEAM};

/// Salt for the per-epoch noise streams when the noisy corpus is redrawn.
const RESAMPLE_SALT: u64 = 0x7265_6472_6177;
/// Salt for the probe corpus noise stream, kept apart from training noise.
const PROBE_SALT: u64 = 0x70_726f_6265;

#[derive(Clone, Debug)]
pub struct TrainConfig<S: Real> {
    /// Expectations renormalize over the best n alignments found.
    pub n: usize,
    /// Beam width of the underlying search.
    pub beam: usize,
    /// Base learning rate; epoch e uses lr / (1 + e).
    pub lr: f64,
    pub epochs: usize,
    /// L2 shrinkage strength applied inside each update.
    pub l2: f64,
    /// Seed for the pair-visiting order.
    pub seed: u64,
    pub noise: NoiseSpec,
    /// Redraws the noisy corpus every epoch instead of freezing the one
    /// drawn up front.
    pub resample_noise: bool,
    pub init: WeightVector<S>,
    /// Features whose entry is false are pinned to zero: excluded from the
    /// initialization and never updated.
    pub feature_mask: [bool; K],
}

impl<S: Real> TrainConfig<S> {
    pub fn new(noise: NoiseSpec) -> Self {
        TrainConfig {
            n: 1,
            beam: DEFAULT_BEAM,
            lr: 0.05,
            epochs: 5,
            l2: 0.0,
            seed: 0,
            noise,
            resample_noise: false,
            init: WeightVector::warm_start(),
            feature_mask: [true; K],
        }
    }
}

impl<S: Real> Default for TrainConfig<S> {
    fn default() -> Self {
        TrainConfig::new(NoiseSpec::default())
    }
}

/// Expectation of the feature vector under the softmax over the harvested
/// alignments' scores. Fails only on an empty harvest.
pub fn topn_expectation<S: Real>(
    top: &TopN<S>,
    weights: &WeightVector<S>,
) -> Result<FeatureVector<S>> {
    if top.is_empty() {
        return Err(Error::EmptyTopN);
    }
    let scores: Vec<S> = top.iter().map(|item| weights.dot(&item.features)).collect();
    let max = scores.iter().copied().fold(S::neg_infinity(), |a, b| {
        if Real::total_cmp(&b, &a).is_gt() {
            b
        } else {
            a
        }
    });
    let mut acc = FeatureVector::zeros();
    let mut z = S::zero();
    for (item, &s) in top.iter().zip(&scores) {
        let w = (s - max).exp();
        z += w;
        acc.add_assign(&item.features.scale(w));
    }
    Ok(acc.scale(S::one() / z))
}

/// Approximate contrastive gradient for one pair: expectation on the
/// observed pair minus expectation on its noisy twin.
pub fn pair_gradient<S: Real>(
    observed: &SentencePair,
    noisy: &SentencePair,
    weights: &WeightVector<S>,
    ttable: &TTable<S>,
    config: &TrainConfig<S>,
) -> FeatureVector<S> {
    let top_obs = beam_search(observed, weights, ttable, config.beam, config.n);
    let top_noi = beam_search(noisy, weights, ttable, config.beam, config.n);
    let e_obs = topn_expectation(&top_obs, weights).expect("harvest contains the root");
    let e_noi = topn_expectation(&top_noi, weights).expect("harvest contains the root");
    e_obs.sub(&e_noi)
}

/// Exact value of the contrastive objective, summed over the corpus. Only
/// feasible when every pair fits under the enumeration cap.
pub fn exact_objective<S: Real>(
    corpus: &Corpus,
    noisy: &Corpus,
    weights: &WeightVector<S>,
    ttable: &TTable<S>,
) -> Result<S> {
    if corpus.len() != noisy.len() {
        return Err(Error::LengthMismatch {
            left: corpus.len(),
            right: noisy.len(),
            what: "observed vs noisy pairs",
        });
    }
    let mut j = S::zero();
    for (obs, noi) in corpus.pairs.iter().zip(&noisy.pairs) {
        j += log_partition(obs, weights, ttable)? - log_partition(noi, weights, ttable)?;
    }
    Ok(j)
}

#[derive(Clone, Debug)]
pub struct EpochStats {
    pub epoch: usize,
    /// Mean L1 norm of the per-pair gradient over the epoch.
    pub mean_grad_l1: f64,
    /// Mean exact objective on probe pairs small enough to enumerate.
    pub probe_j: Option<f64>,
    /// Alignment error rate on the probe corpus when it carries gold links.
    pub probe_aer: Option<f64>,
}

#[derive(Clone, Debug, Default)]
pub struct TrainLog {
    pub epochs: Vec<EpochStats>,
}

impl TrainLog {
    /// One CSV row per epoch; missing probe columns stay empty.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "epoch,mean_grad_l1,probe_j,probe_aer")?;
        for e in &self.epochs {
            let pj = e.probe_j.map(|v| format!("{v:.6e}")).unwrap_or_default();
            let pa = e.probe_aer.map(|v| format!("{v:.4}")).unwrap_or_default();
            writeln!(w, "{},{:.6e},{},{}", e.epoch, e.mean_grad_l1, pj, pa)?;
        }
        Ok(())
    }
}

/// Runs contrastive SGD and returns the final weights plus per-epoch
/// statistics. The probe corpus, when given, is never trained on; it only
/// feeds the objective and error columns of the log.
pub fn train<S: Real>(
    corpus: &Corpus,
    ttable: &TTable<S>,
    config: &TrainConfig<S>,
    probe: Option<&Corpus>,
) -> Result<(WeightVector<S>, TrainLog)> {
    let mut theta = config.init;
    for k in 0..K {
        if !config.feature_mask[k] {
            theta[k] = S::zero();
        }
    }

    let mut noisy = make_noisy_corpus(corpus, &config.noise)?;
    let probe_noisy = match probe {
        Some(p) => {
            if let Some(gold) = &p.gold {
                if gold.len() != p.len() {
                    return Err(Error::LengthMismatch {
                        left: gold.len(),
                        right: p.len(),
                        what: "gold annotations vs probe pairs",
                    });
                }
            }
            let spec = NoiseSpec {
                seed: mix(config.noise.seed, PROBE_SALT),
                ..config.noise
            };
            Some(make_noisy_corpus(p, &spec)?)
        }
        None => None,
    };

    let mut rng = substream(config.seed, "sgd");
    let mut log = TrainLog::default();
    for epoch in 0..config.epochs {
        if config.resample_noise && epoch > 0 {
            let spec = NoiseSpec {
                seed: mix(mix(config.noise.seed, RESAMPLE_SALT), epoch as u64),
                ..config.noise
            };
            noisy = make_noisy_corpus(corpus, &spec)?;
        }
        let eta = real::<S>(config.lr / (1.0 + epoch as f64));
        let l2 = real::<S>(config.l2);
        let mut order: Vec<usize> = (0..corpus.len()).collect();
        order.shuffle(&mut rng);
        let mut grad_l1 = 0.0f64;
        for &i in &order {
            let g = pair_gradient(&corpus.pairs[i], &noisy.pairs[i], &theta, ttable, config);
            grad_l1 += to_f64(g.l1_norm());
            for k in 0..K {
                if config.feature_mask[k] {
                    let step = eta * (g[k] - l2 * theta[k]);
                    theta[k] += step;
                }
            }
            if !theta.is_finite() {
                return Err(Error::Diverged { epoch });
            }
        }
        let mean_grad_l1 = if corpus.is_empty() {
            0.0
        } else {
            grad_l1 / corpus.len() as f64
        };
        let (probe_j, probe_aer) = match (probe, &probe_noisy) {
            (Some(p), Some(pn)) => probe_stats(p, pn, &theta, ttable, config.beam)?,
            _ => (None, None),
        };
        log.epochs.push(EpochStats {
            epoch,
            mean_grad_l1,
            probe_j,
            probe_aer,
        });
    }
    Ok((theta, log))
}

fn probe_stats<S: Real>(
    probe: &Corpus,
    probe_noisy: &Corpus,
    theta: &WeightVector<S>,
    ttable: &TTable<S>,
    beam: usize,
) -> Result<(Option<f64>, Option<f64>)> {
    let mut j_sum = 0.0;
    let mut j_count = 0usize;
    for (obs, noi) in probe.pairs.iter().zip(&probe_noisy.pairs) {
        if within_cap(obs) && within_cap(noi) {
            let j = log_partition(obs, theta, ttable)? - log_partition(noi, theta, ttable)?;
            j_sum += to_f64(j);
            j_count += 1;
        }
    }
    let probe_j = (j_count > 0).then(|| j_sum / j_count as f64);
    let probe_aer = match &probe.gold {
        Some(gold) => {
            let preds: Vec<Alignment> = probe
                .pairs
                .iter()
                .map(|p| viterbi(p, theta, ttable, beam).alignment)
                .collect();
            Some(corpus_aer(&preds, gold)?)
        }
        None => None,
    };
    Ok((probe_j, probe_aer))
}
