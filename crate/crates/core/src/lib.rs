//! Word alignment with a latent-variable log-linear model trained by
//! contrastive estimation.
//!
//! The model scores an arbitrary alignment (any set of links between a
//! source and a target sentence) as a dot product between a fixed 16-feature
//! vector and a weight vector. Training never sees gold alignments: each
//! observed sentence pair is contrasted against a synthetically corrupted
//! version of itself, and weights move toward feature expectations on the
//! observed pair and away from expectations on the noisy one. Expectations
//! over the exponentially large alignment space are approximated by the
//! top-n alignments harvested from a greedy beam search; exact enumeration
//! and a Gibbs sampler are provided as references to measure that
//! approximation.
//!
//! All numeric entry points are generic over the [`Real`] scalar trait
//! (implemented for `f32` and `f64`); the aliases at the crate root pick a
//! concrete precision.

pub mod corpus;
pub mod error;
pub mod exact;
pub mod features;
pub mod gibbs;
pub mod lexicon;
pub mod metrics;
pub mod noise;
pub mod rng;
pub mod scalar;
pub mod search;
pub mod trainer;

pub use corpus::{Corpus, GoldAlignment, Link, SentencePair, TTable};
pub use error::{Error, Result};
pub use features::{AlignStats, Alignment, FeatureVector, WeightVector, FEATURE_NAMES, K};
pub use scalar::Real;
pub use search::{ScoredAlignment, TopN};

pub type FeatureVec32 = FeatureVector<f32>;
pub type FeatureVec64 = FeatureVector<f64>;
pub type WeightVec32 = WeightVector<f32>;
pub type WeightVec64 = WeightVector<f64>;
pub type TTable32 = TTable<f32>;
pub type TTable64 = TTable<f64>;
pub type AlignStats64 = AlignStats<f64>;
pub type TopN64 = TopN<f64>;
pub type ScoredAlignment64 = ScoredAlignment<f64>;
