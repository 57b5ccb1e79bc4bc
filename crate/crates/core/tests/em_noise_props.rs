//! Random-corpus invariants for the lexicon trainer and the noise
//! strategies.

use proptest::prelude::*;
use rand::Rng;

use contralign::corpus::{Corpus, SentencePair};
use contralign::lexicon::{log_likelihood, train_model1, Direction};
use contralign::noise::{make_noise, NoiseSpec, NoiseStrategy};
use contralign::rng::substream;

fn random_corpus(seed: u64, pairs: usize, vocab: usize, max_len: usize) -> Corpus {
    let mut rng = substream(seed, "corpus");
    let mk_side = |rng: &mut rand_chacha::ChaCha8Rng, tag: &str| -> Vec<String> {
        let len = rng.random_range(1..=max_len);
        (0..len)
            .map(|_| format!("{tag}{}", rng.random_range(0..vocab)))
            .collect()
    };
    let pairs = (0..pairs)
        .map(|id| {
            let src = mk_side(&mut rng, "s");
            let tgt = mk_side(&mut rng, "t");
            SentencePair::new(id, src, tgt).unwrap()
        })
        .collect();
    Corpus { pairs, gold: None }
}

#[test]
fn em_likelihood_never_decreases_on_random_corpora() {
    for seed in 0..12u64 {
        let corpus = random_corpus(seed, 6, 5, 4);
        for direction in [Direction::Forward, Direction::Backward] {
            let mut prev = f64::NEG_INFINITY;
            for iters in 0..6 {
                let t = train_model1::<f64>(&corpus, iters, direction);
                let ll = log_likelihood(&corpus, &t, direction);
                assert!(
                    ll >= prev - 1e-9,
                    "seed {seed}: LL fell from {prev} to {ll} at iteration {iters}"
                );
                prev = ll;
            }
        }
    }
}

#[test]
fn em_rows_are_distributions_on_random_corpora() {
    for seed in 20..28u64 {
        let corpus = random_corpus(seed, 5, 4, 4);
        let t = train_model1::<f64>(&corpus, 4, Direction::Forward);
        for (cond, row) in &t {
            let sum: f64 = row.values().sum();
            assert!(
                (sum - 1.0).abs() < 1e-9,
                "seed {seed}: row {cond} sums to {sum}"
            );
            for p in row.values() {
                assert!(*p > 0.0 && *p <= 1.0);
            }
        }
    }
}

fn vocab_strategy() -> impl Strategy<Value = Vec<String>> {
    Just((0..6).map(|k| format!("w{k}")).collect())
}

fn sentence(max_len: usize) -> impl Strategy<Value = Vec<String>> {
    prop::collection::vec(0usize..6, 1..=max_len)
        .prop_map(|ids| ids.into_iter().map(|k| format!("w{k}")).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn noise_respects_per_strategy_length_laws(
        src in sentence(7),
        tgt in sentence(7),
        vocab in vocab_strategy(),
        seed in any::<u64>(),
        rate in prop::sample::select(vec![0.1, 0.25, 0.5, 1.0]),
        strategy in prop::sample::select(vec![
            NoiseStrategy::Shuffle,
            NoiseStrategy::Delete,
            NoiseStrategy::Insert,
            NoiseStrategy::Replace,
            NoiseStrategy::Mixed,
        ]),
    ) {
        let pair = SentencePair::new(3, src.clone(), tgt.clone()).unwrap();
        let spec = NoiseSpec::new(strategy, rate, seed).unwrap();
        let noisy = make_noise(&pair, &spec, &vocab, &vocab).unwrap();

        let laws = |orig: &[String], got: &[String]| {
            let n = orig.len();
            let k = (rate * n as f64).ceil() as usize;
            let shuffle_len = n;
            let delete_len = n - k.min(n - 1);
            let insert_len = n + k;
            let replace_len = n;
            let allowed: Vec<usize> = match strategy {
                NoiseStrategy::Shuffle => vec![shuffle_len],
                NoiseStrategy::Delete => vec![delete_len],
                NoiseStrategy::Insert => vec![insert_len],
                NoiseStrategy::Replace => vec![replace_len],
                NoiseStrategy::Mixed => vec![shuffle_len, delete_len, insert_len, replace_len],
            };
            prop_assert!(
                allowed.contains(&got.len()),
                "strategy {:?}: length {} not among {:?}",
                strategy, got.len(), allowed
            );
            prop_assert!(!got.is_empty());
            // Every token is either original or drawn from the vocabulary.
            for w in got {
                prop_assert!(orig.contains(w) || vocab.contains(w), "token {:?}", w);
            }
            // Deletion and shuffling introduce nothing new.
            if matches!(strategy, NoiseStrategy::Shuffle | NoiseStrategy::Delete) {
                for w in got {
                    prop_assert!(orig.contains(w));
                }
            }
            if matches!(strategy, NoiseStrategy::Shuffle) {
                let mut a = orig.to_vec();
                let mut b = got.to_vec();
                a.sort();
                b.sort();
                prop_assert_eq!(a, b);
            }
            Ok(())
        };
        laws(&src, &noisy.source)?;
        laws(&tgt, &noisy.target)?;

        // Byte-identical under replay.
        let again = make_noise(&pair, &spec, &vocab, &vocab).unwrap();
        prop_assert_eq!(noisy.source, again.source);
        prop_assert_eq!(noisy.target, again.target);
    }
}
