//! Corruptions that turn an observed sentence pair into its contrastive
//! twin. Both sides of a pair are corrupted independently, each from its
//! own deterministic random stream derived from the noise seed and the
//! pair id, so corpus order and batching never change the result.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Corpus, SentencePair};
use crate::error::{Error, Result};
use crate::rng::substream;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NoiseStrategy {
    /// Random permutation of the tokens; the multiset is unchanged.
    Shuffle,
    /// Removes ceil(rate * len) random tokens, always leaving at least one.
    Delete,
    /// Inserts ceil(rate * len) vocabulary tokens at random positions.
    Insert,
    /// Overwrites ceil(rate * len) distinct positions with vocabulary tokens.
    Replace,
    /// Picks one of the four above uniformly, per side.
    Mixed,
}

impl FromStr for NoiseStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "shuffle" => Ok(NoiseStrategy::Shuffle),
            "delete" => Ok(NoiseStrategy::Delete),
            "insert" => Ok(NoiseStrategy::Insert),
            "replace" => Ok(NoiseStrategy::Replace),
            "mixed" => Ok(NoiseStrategy::Mixed),
            other => Err(Error::Parse {
                path: "<noise strategy>".into(),
                line: 0,
                msg: format!(
                    "unknown strategy {other:?}, expected shuffle|delete|insert|replace|mixed"
                ),
            }),
        }
    }
}

impl fmt::Display for NoiseStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            NoiseStrategy::Shuffle => "shuffle",
            NoiseStrategy::Delete => "delete",
            NoiseStrategy::Insert => "insert",
            NoiseStrategy::Replace => "replace",
            NoiseStrategy::Mixed => "mixed",
        };
        f.write_str(name)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct NoiseSpec {
    pub strategy: NoiseStrategy,
    pub rate: f64,
    pub seed: u64,
}

impl NoiseSpec {
    /// Rejects rates outside (0, 1].
    pub fn new(strategy: NoiseStrategy, rate: f64, seed: u64) -> Result<Self> {
        if !(rate > 0.0 && rate <= 1.0) {
            return Err(Error::NoiseRate(rate));
        }
        Ok(NoiseSpec {
            strategy,
            rate,
            seed,
        })
    }
}

impl Default for NoiseSpec {
    fn default() -> Self {
        NoiseSpec {
            strategy: NoiseStrategy::Shuffle,
            rate: 0.25,
            seed: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Source,
    Target,
}

/// Sorted deduplicated vocabulary of one corpus side, the sampling pool
/// for insert and replace noise.
pub fn side_vocab(corpus: &Corpus, side: Side) -> Vec<String> {
    let mut words: Vec<String> = corpus
        .pairs
        .iter()
        .flat_map(|p| match side {
            Side::Source => p.source.iter(),
            Side::Target => p.target.iter(),
        })
        .cloned()
        .collect();
    words.sort_unstable();
    words.dedup();
    words
}

fn corrupt_side(
    tokens: &[String],
    spec: &NoiseSpec,
    vocab: &[String],
    side: &'static str,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<String>> {
    let strategy = match spec.strategy {
        NoiseStrategy::Mixed => match rng.random_range(0..4u8) {
            0 => NoiseStrategy::Shuffle,
            1 => NoiseStrategy::Delete,
            2 => NoiseStrategy::Insert,
            _ => NoiseStrategy::Replace,
        },
        s => s,
    };
    let len = tokens.len();
    let k = (spec.rate * len as f64).ceil() as usize;
    match strategy {
        NoiseStrategy::Shuffle => {
            let mut out = tokens.to_vec();
            out.shuffle(rng);
            Ok(out)
        }
        NoiseStrategy::Delete => {
            // Never delete the whole sentence.
            let k = k.min(len - 1);
            let mut out = tokens.to_vec();
            if k > 0 {
                let mut victims = rand::seq::index::sample(rng, len, k).into_vec();
                victims.sort_unstable_by(|a, b| b.cmp(a));
                for v in victims {
                    out.remove(v);
                }
            }
            Ok(out)
        }
        NoiseStrategy::Insert => {
            if vocab.is_empty() {
                return Err(Error::EmptyVocab(side));
            }
            let mut out = tokens.to_vec();
            for _ in 0..k {
                let pos = rng.random_range(0..=out.len());
                let word = vocab[rng.random_range(0..vocab.len())].clone();
                out.insert(pos, word);
            }
            Ok(out)
        }
        NoiseStrategy::Replace => {
            if vocab.is_empty() {
                return Err(Error::EmptyVocab(side));
            }
            let mut out = tokens.to_vec();
            let mut targets = rand::seq::index::sample(rng, len, k).into_vec();
            targets.sort_unstable();
            for t in targets {
                out[t] = vocab[rng.random_range(0..vocab.len())].clone();
            }
            Ok(out)
        }
        NoiseStrategy::Mixed => unreachable!("mixed resolves to a concrete strategy"),
    }
}

/// Corrupts one pair. The stream depends only on the spec seed and the
/// pair id, never on the surrounding corpus.
pub fn make_noise(
    pair: &SentencePair,
    spec: &NoiseSpec,
    src_vocab: &[String],
    tgt_vocab: &[String],
) -> Result<SentencePair> {
    let mut rng = substream(spec.seed ^ pair.id as u64, "noise");
    let source = corrupt_side(&pair.source, spec, src_vocab, "source", &mut rng)?;
    let target = corrupt_side(&pair.target, spec, tgt_vocab, "target", &mut rng)?;
    SentencePair::new(pair.id, source, target)
}

/// Corrupts every pair of the corpus; ids and order are preserved and gold
/// annotations are dropped, since they no longer describe the text.
pub fn make_noisy_corpus(corpus: &Corpus, spec: &NoiseSpec) -> Result<Corpus> {
    let src_vocab = side_vocab(corpus, Side::Source);
    let tgt_vocab = side_vocab(corpus, Side::Target);
    let pairs = corpus
        .pairs
        .iter()
        .map(|p| make_noise(p, spec, &src_vocab, &tgt_vocab))
        .collect::<Result<Vec<_>>>()?;
    Ok(Corpus { pairs, gold: None })
}
