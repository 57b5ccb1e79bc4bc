//! Synthetic bilingual data for the acceptance suite. Two regimes share the
//! same templated sentence shapes with deterministic reordering, so gold
//! alignments are known by construction:
//!
//! * a dense 50-word identity dictionary, where every word pair co-occurs
//!   often enough for smooth lexical estimates (training and AER checks);
//! * sparse ambiguous dictionaries of word groups with interchangeable
//!   surface forms per side, where correct lexical probabilities land near
//!   1/forms and almost every cross-group pair is never co-observed, so
//!   random weight vectors produce sharply concentrated, often multi-modal
//!   posteriors (estimator diagnostics).

use std::ops::Range;

use contralign::corpus::{Corpus, GoldAlignment, Link, SentencePair, TTable};
use contralign::lexicon::train_ttable;
use contralign::rng::substream;
use rand::Rng;

const SUBJ: Range<usize> = 0..10;
const VERB: Range<usize> = 10..20;
const OBJ: Range<usize> = 20..30;
const PREP: Range<usize> = 30..35;
const NOUN: Range<usize> = 35..45;
const ADV: Range<usize> = 45..50;
pub const VOCAB: usize = 50;

fn src_word(k: usize) -> String {
    format!("s{k:02}")
}

fn tgt_word(k: usize) -> String {
    format!("t{k:02}")
}

/// One sentence pair from a template. Source order is always S V O (P N);
/// template 1 moves the prepositional phrase ahead of the verb phrase,
/// template 2 swaps the adverb and the verb.
fn template<R: Rng>(rng: &mut R, id: usize, kind: usize) -> (SentencePair, GoldAlignment) {
    let s = rng.random_range(SUBJ);
    let v = rng.random_range(VERB);
    let o = rng.random_range(OBJ);
    let (src, tgt, links): (Vec<usize>, Vec<usize>, Vec<(usize, usize)>) = match kind {
        0 => (vec![s, v, o], vec![s, v, o], vec![(0, 0), (1, 1), (2, 2)]),
        1 => {
            let p = rng.random_range(PREP);
            let n = rng.random_range(NOUN);
            (
                vec![s, v, o, p, n],
                vec![s, p, n, v, o],
                vec![(0, 0), (1, 3), (2, 4), (3, 1), (4, 2)],
            )
        }
        _ => {
            let a = rng.random_range(ADV);
            (vec![s, v, a], vec![s, a, v], vec![(0, 0), (1, 2), (2, 1)])
        }
    };
    let pair = SentencePair::new(
        id,
        src.iter().copied().map(src_word).collect(),
        tgt.iter().copied().map(tgt_word).collect(),
    )
    .unwrap();
    let sure: Vec<Link> = links.iter().map(|&(i, j)| Link::new(i, j)).collect();
    (pair, GoldAlignment::new(sure, []))
}

/// Reordering corpus cycling through all three templates.
pub fn toy_corpus(n: usize, seed: u64) -> Corpus {
    build(n, seed, &[0, 1, 2])
}

/// Three-word-only variant (monotone and adverb-swap templates), so every
/// pair fits exact enumeration and diagnostic length filters.
pub fn short_corpus(n: usize, seed: u64) -> Corpus {
    build(n, seed, &[0, 2])
}

fn build(n: usize, seed: u64, kinds: &[usize]) -> Corpus {
    let mut rng = substream(seed, "toy");
    let mut pairs = Vec::with_capacity(n);
    let mut gold = Vec::with_capacity(n);
    for id in 0..n {
        let (pair, g) = template(&mut rng, id, kinds[id % kinds.len()]);
        pairs.push(pair);
        gold.push(g);
    }
    Corpus {
        pairs,
        gold: Some(gold),
    }
}

/// Splits off the last `held_out` pairs for evaluation.
pub fn split(corpus: Corpus, held_out: usize) -> (Corpus, Corpus) {
    let cut = corpus.len() - held_out;
    let gold = corpus.gold.unwrap();
    let (train_pairs, eval_pairs) = {
        let mut pairs = corpus.pairs;
        let tail = pairs.split_off(cut);
        (pairs, tail)
    };
    let (train_gold, eval_gold) = {
        let mut g = gold;
        let tail = g.split_off(cut);
        (g, tail)
    };
    (
        Corpus {
            pairs: train_pairs,
            gold: Some(train_gold),
        },
        Corpus {
            pairs: eval_pairs,
            gold: Some(eval_gold),
        },
    )
}

/// Lexical table fit on the corpus itself.
pub fn table(corpus: &Corpus) -> TTable<f64> {
    train_ttable(corpus, 5)
}

/// Shape of a group-structured bilingual dictionary. Words come in groups
/// (one per semantic role slot) with several interchangeable surface forms
/// per group and side, so lexical probabilities sit near 1/forms and a wrong
/// link costs tens of nats while a right one costs a few.
#[derive(Clone, Copy)]
pub struct SparseCfg {
    /// Distinct word groups per major role (subject, verb, object).
    pub groups: usize,
    /// Interchangeable surface forms per group and side.
    pub forms: usize,
    /// Group numbering offset, so differently shaped families can share one
    /// vocabulary without their words colliding.
    pub base: usize,
}

/// Many groups and forms: right form pairs co-observed often enough for
/// near-symmetric estimates, wrong form pairs almost never, so a right link
/// costs about 3.6 nats and a wrong one tens.
pub const SPARSE_DEEP: SparseCfg = SparseCfg {
    groups: 50,
    forms: 6,
    base: 0,
};

/// Few groups and forms for small corpora: a fifth or so of the right form
/// pairs stay unobserved, which knocks whole rows of the alignment grid down
/// to the floor probability and sharpens posteriors.
pub const SPARSE_THIN: SparseCfg = SparseCfg {
    groups: 30,
    forms: 3,
    base: 0,
};

/// Two forms per group: right links cost about 1.4 nats instead of 3.6, so
/// the lexical weight bites three times less. Blending these with the deep
/// family gives a corpus whose pairs react to a shared weight vector at
/// different lexical scales.
pub const SPARSE_GLIB: SparseCfg = SparseCfg {
    groups: 40,
    forms: 2,
    base: 500,
};

fn sparse_src(group: usize, form: usize) -> String {
    format!("s{group:03}{form}")
}

fn sparse_tgt(group: usize, form: usize) -> String {
    format!("t{group:03}{form}")
}

/// One sentence pair over word groups. Each slot draws a group for its role
/// and then an independent surface form per side, so the right group is
/// translated by any of its forms. Template 1 swaps the adverb and the
/// verb; template 2 moves the adverb ahead of the verb phrase; templates 3
/// and 4 repeat the subject group on both sides but push the later source
/// copies out of the dictionary, so their rows sit at the floor probability
/// while the leading copy stays lexically torn between the target twins.
fn sparse_template<R: Rng>(
    rng: &mut R,
    cfg: SparseCfg,
    id: usize,
    kind: usize,
) -> (SentencePair, GoldAlignment) {
    let g = cfg.groups;
    let s = rng.random_range(0..g);
    let v = rng.random_range(g..2 * g);
    let (src_groups, tgt_groups, links): (Vec<usize>, Vec<usize>, Vec<(usize, usize)>) = match kind
    {
        0 => {
            let o = rng.random_range(2 * g..3 * g);
            (vec![s, v, o], vec![s, v, o], vec![(0, 0), (1, 1), (2, 2)])
        }
        1 => {
            let a = rng.random_range(3 * g..3 * g + g / 2);
            (vec![s, v, a], vec![s, a, v], vec![(0, 0), (1, 2), (2, 1)])
        }
        2 => {
            let o = rng.random_range(2 * g..3 * g);
            let a = rng.random_range(3 * g..3 * g + g / 2);
            (
                vec![s, v, o, a],
                vec![s, a, v, o],
                vec![(0, 0), (1, 2), (2, 3), (3, 1)],
            )
        }
        3 => (vec![s, s, v], vec![s, s, v], vec![(0, 0), (1, 1), (2, 2)]),
        _ => (vec![s, s], vec![s, s], vec![(0, 0), (1, 1)]),
    };
    let mut form = |_g: usize| rng.random_range(0..cfg.forms);
    let src_forms: Vec<usize> = src_groups.iter().map(|&x| form(x)).collect();
    let src: Vec<String> = src_groups
        .iter()
        .zip(&src_forms)
        .enumerate()
        .map(|(slot, (&x, &f))| {
            if kind >= 3 && slot >= 1 {
                // Form indices past the dictionary range never occur in
                // training corpora, so both directional probabilities for
                // these words are zero everywhere.
                sparse_src(cfg.base + x, cfg.forms + slot)
            } else {
                sparse_src(cfg.base + x, f)
            }
        })
        .collect();
    let tgt = tgt_groups
        .iter()
        .map(|&x| sparse_tgt(cfg.base + x, form(x)))
        .collect();
    let pair = SentencePair::new(id, src, tgt).unwrap();
    let sure: Vec<Link> = links.iter().map(|&(i, j)| Link::new(i, j)).collect();
    (pair, GoldAlignment::new(sure, []))
}

fn sparse_build(n: usize, seed: u64, cfg: SparseCfg, kinds: &[usize]) -> Corpus {
    let specs: Vec<(SparseCfg, usize)> = kinds.iter().map(|&k| (cfg, k)).collect();
    sparse_blend(n, seed, &specs)
}

/// Corpus cycling through (dictionary shape, template) slots, so one corpus
/// can mix word families of different lexical depth.
pub fn sparse_blend(n: usize, seed: u64, specs: &[(SparseCfg, usize)]) -> Corpus {
    let mut rng = substream(seed, "sparse");
    let mut pairs = Vec::with_capacity(n);
    let mut gold = Vec::with_capacity(n);
    for id in 0..n {
        let (cfg, kind) = specs[id % specs.len()];
        let (pair, g) = sparse_template(&mut rng, cfg, id, kind);
        pairs.push(pair);
        gold.push(g);
    }
    Corpus {
        pairs,
        gold: Some(gold),
    }
}

/// Sparse-dictionary corpus over the plain templates (three- and four-word
/// pairs) at a given dictionary shape.
pub fn sparse_corpus_cfg(n: usize, seed: u64, cfg: SparseCfg) -> Corpus {
    sparse_build(n, seed, cfg, &[0, 1, 2])
}

/// Lexical table for the sparse regime; more passes because each surface
/// form pair is only co-observed a handful of times.
pub fn sparse_table(corpus: &Corpus) -> TTable<f64> {
    train_ttable(corpus, 10)
}

/// A pair with uniformly random words and lengths in 1..=max_len per side.
pub fn random_pair<R: Rng>(rng: &mut R, id: usize, max_len: usize) -> SentencePair {
    let l = rng.random_range(1..=max_len);
    let m = rng.random_range(1..=max_len);
    let src = (0..l)
        .map(|_| src_word(rng.random_range(0..VOCAB)))
        .collect();
    let tgt = (0..m)
        .map(|_| tgt_word(rng.random_range(0..VOCAB)))
        .collect();
    SentencePair::new(id, src, tgt).unwrap()
}
