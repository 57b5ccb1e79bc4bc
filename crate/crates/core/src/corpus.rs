//! Sentence pairs, gold alignments, translation tables, and their on-disk
//! formats.
//!
//! Parallel text is one sentence per line, tokens separated by whitespace
//! runs. Gold alignments use the usual `s-t` (sure) / `s?t` (possible)
//! items with 1-based positions. Translation tables are line-oriented:
//! `F <src> <tgt> <prob>` for t(tgt|src) and `B <tgt> <src> <prob>` for
//! t(src|tgt), conditioning word first.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::features::{WeightVector, FEATURE_NAMES, K};
use crate::scalar::{real, to_f64, Real};

/// One alignment link: source position `src`, target position `tgt`,
/// both 0-based. Ordering is lexicographic, which defines the canonical
/// order used everywhere links are listed or compared.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Link {
    pub src: usize,
    pub tgt: usize,
}

impl Link {
    pub fn new(src: usize, tgt: usize) -> Self {
        Link { src, tgt }
    }
}

impl fmt::Display for Link {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.src, self.tgt)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SentencePair {
    pub id: usize,
    pub source: Vec<String>,
    pub target: Vec<String>,
}

impl SentencePair {
    pub fn new(id: usize, source: Vec<String>, target: Vec<String>) -> Result<Self> {
        for tok in source.iter().chain(target.iter()) {
            if tok.is_empty() || tok.chars().any(char::is_whitespace) {
                return Err(Error::BadToken(tok.clone()));
            }
        }
        if source.is_empty() || target.is_empty() {
            return Err(Error::Parse {
                path: Default::default(),
                line: 0,
                msg: "sentence pair with an empty side".into(),
            });
        }
        Ok(SentencePair { id, source, target })
    }

    /// Source length.
    pub fn l(&self) -> usize {
        self.source.len()
    }

    /// Target length.
    pub fn m(&self) -> usize {
        self.target.len()
    }

    pub fn contains(&self, link: Link) -> bool {
        link.src < self.l() && link.tgt < self.m()
    }
}

/// Gold annotation for one pair. Sure links are a subset of possible links
/// by construction.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GoldAlignment {
    sure: BTreeSet<Link>,
    possible: BTreeSet<Link>,
}

impl GoldAlignment {
    pub fn new<I, J>(sure: I, possible: J) -> Self
    where
        I: IntoIterator<Item = Link>,
        J: IntoIterator<Item = Link>,
    {
        let sure: BTreeSet<Link> = sure.into_iter().collect();
        let mut possible: BTreeSet<Link> = possible.into_iter().collect();
        possible.extend(sure.iter().copied());
        GoldAlignment { sure, possible }
    }

    pub fn sure(&self) -> &BTreeSet<Link> {
        &self.sure
    }

    pub fn possible(&self) -> &BTreeSet<Link> {
        &self.possible
    }

    pub fn is_empty(&self) -> bool {
        self.possible.is_empty()
    }
}

#[derive(Clone, Debug, Default)]
pub struct Corpus {
    pub pairs: Vec<SentencePair>,
    /// Parallel to `pairs` when present.
    pub gold: Option<Vec<GoldAlignment>>,
}

impl Corpus {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// Bidirectional lexical translation table.
///
/// `forward` conditions on the source word: `forward[s][t] = t(t|s)`.
/// `backward` conditions on the target word: `backward[t][s] = t(s|t)`.
/// Missing entries read as probability zero.
#[derive(Clone, Debug, Default)]
pub struct TTable<S> {
    forward: HashMap<String, HashMap<String, S>>,
    backward: HashMap<String, HashMap<String, S>>,
}

impl<S: Real> TTable<S> {
    pub fn new() -> Self {
        TTable {
            forward: HashMap::new(),
            backward: HashMap::new(),
        }
    }

    pub fn from_parts(
        forward: HashMap<String, HashMap<String, S>>,
        backward: HashMap<String, HashMap<String, S>>,
    ) -> Self {
        TTable { forward, backward }
    }

    /// Table with forward and backward maps exchanged; models the same
    /// lexicon seen from the swapped language pair.
    pub fn transposed(&self) -> Self {
        TTable {
            forward: self.backward.clone(),
            backward: self.forward.clone(),
        }
    }

    pub fn insert_forward(&mut self, src: &str, tgt: &str, p: S) {
        self.forward
            .entry(src.to_owned())
            .or_default()
            .insert(tgt.to_owned(), p);
    }

    pub fn insert_backward(&mut self, tgt: &str, src: &str, p: S) {
        self.backward
            .entry(tgt.to_owned())
            .or_default()
            .insert(src.to_owned(), p);
    }

    /// t(tgt|src); zero when the pair was never seen.
    pub fn p_tgt_given_src(&self, src: &str, tgt: &str) -> S {
        self.forward
            .get(src)
            .and_then(|row| row.get(tgt))
            .copied()
            .unwrap_or_else(S::zero)
    }

    /// t(src|tgt); zero when the pair was never seen.
    pub fn p_src_given_tgt(&self, tgt: &str, src: &str) -> S {
        self.backward
            .get(tgt)
            .and_then(|row| row.get(src))
            .copied()
            .unwrap_or_else(S::zero)
    }

    pub fn forward(&self) -> &HashMap<String, HashMap<String, S>> {
        &self.forward
    }

    pub fn backward(&self) -> &HashMap<String, HashMap<String, S>> {
        &self.backward
    }
}

fn read_lines(path: &Path) -> Result<Vec<String>> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })?;
    Ok(text.lines().map(str::to_owned).collect())
}

/// Loads a sentence-aligned corpus from two files with equal line counts.
pub fn load_parallel(source_path: &Path, target_path: &Path) -> Result<Corpus> {
    let src_lines = read_lines(source_path)?;
    let tgt_lines = read_lines(target_path)?;
    if src_lines.len() != tgt_lines.len() {
        return Err(Error::LineCountMismatch {
            source_path: source_path.to_owned(),
            source_lines: src_lines.len(),
            target_path: target_path.to_owned(),
            target_lines: tgt_lines.len(),
        });
    }
    let mut pairs = Vec::with_capacity(src_lines.len());
    for (idx, (s, t)) in src_lines.iter().zip(tgt_lines.iter()).enumerate() {
        let source: Vec<String> = s.split_whitespace().map(str::to_owned).collect();
        let target: Vec<String> = t.split_whitespace().map(str::to_owned).collect();
        if source.is_empty() {
            return Err(Error::EmptySentence {
                path: source_path.to_owned(),
                line: idx + 1,
            });
        }
        if target.is_empty() {
            return Err(Error::EmptySentence {
                path: target_path.to_owned(),
                line: idx + 1,
            });
        }
        pairs.push(SentencePair {
            id: idx,
            source,
            target,
        });
    }
    Ok(Corpus { pairs, gold: None })
}

/// Writes a corpus back out as two parallel text files.
pub fn save_parallel(corpus: &Corpus, source_path: &Path, target_path: &Path) -> Result<()> {
    let wrap = |path: &Path, e: std::io::Error| Error::Io {
        path: path.to_owned(),
        source: e,
    };
    let mut src = String::new();
    let mut tgt = String::new();
    for pair in &corpus.pairs {
        src.push_str(&pair.source.join(" "));
        src.push('\n');
        tgt.push_str(&pair.target.join(" "));
        tgt.push('\n');
    }
    fs::write(source_path, src).map_err(|e| wrap(source_path, e))?;
    fs::write(target_path, tgt).map_err(|e| wrap(target_path, e))?;
    Ok(())
}

/// Parses a gold-format file (`s-t` sure, `s?t` possible, 1-based, one line
/// per pair) and checks every position against the paired sentence lengths.
pub fn load_alignments(path: &Path, corpus: &Corpus) -> Result<Vec<GoldAlignment>> {
    let lines = read_lines(path)?;
    if lines.len() != corpus.len() {
        return Err(Error::LengthMismatch {
            left: lines.len(),
            right: corpus.len(),
            what: "alignment lines vs sentence pairs",
        });
    }
    let mut out = Vec::with_capacity(lines.len());
    for (idx, line) in lines.iter().enumerate() {
        let pair = &corpus.pairs[idx];
        let mut sure = Vec::new();
        let mut possible = Vec::new();
        for item in line.split_whitespace() {
            let (sep_pos, is_sure) = match (item.find('-'), item.find('?')) {
                (Some(p), None) => (p, true),
                (None, Some(p)) => (p, false),
                _ => {
                    return Err(Error::Parse {
                        path: path.to_owned(),
                        line: idx + 1,
                        msg: format!("malformed alignment item {item:?}"),
                    })
                }
            };
            let (s_str, t_str) = (&item[..sep_pos], &item[sep_pos + 1..]);
            let parse = |txt: &str| -> Result<usize> {
                txt.parse::<usize>().map_err(|_| Error::Parse {
                    path: path.to_owned(),
                    line: idx + 1,
                    msg: format!("malformed alignment item {item:?}"),
                })
            };
            let (s, t) = (parse(s_str)?, parse(t_str)?);
            if s == 0 || t == 0 || s > pair.l() || t > pair.m() {
                return Err(Error::Parse {
                    path: path.to_owned(),
                    line: idx + 1,
                    msg: format!(
                        "alignment item {item:?} out of bounds for a {}x{} pair",
                        pair.l(),
                        pair.m()
                    ),
                });
            }
            let link = Link::new(s - 1, t - 1);
            if is_sure {
                sure.push(link);
            } else {
                possible.push(link);
            }
        }
        out.push(GoldAlignment::new(sure, possible));
    }
    Ok(out)
}

/// Attaches gold alignments to a corpus.
pub fn load_gold(path: &Path, corpus: Corpus) -> Result<Corpus> {
    let gold = load_alignments(path, &corpus)?;
    Ok(Corpus {
        gold: Some(gold),
        ..corpus
    })
}

pub fn load_ttable<S: Real>(path: &Path) -> Result<TTable<S>> {
    let lines = read_lines(path)?;
    let mut table = TTable::new();
    for (idx, line) in lines.iter().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let err = |msg: String| Error::Parse {
            path: path.to_owned(),
            line: idx + 1,
            msg,
        };
        if fields.len() != 4 {
            return Err(err(format!("expected 4 fields, got {}", fields.len())));
        }
        let (dir, cond, out, prob_str) = (fields[0], fields[1], fields[2], fields[3]);
        let prob: f64 = prob_str
            .parse()
            .map_err(|_| err(format!("bad probability {prob_str:?}")))?;
        if !(prob > 0.0 && prob <= 1.0) {
            return Err(err(format!("probability {prob} outside (0, 1]")));
        }
        let map = match dir {
            "F" => &mut table.forward,
            "B" => &mut table.backward,
            _ => return Err(err(format!("bad direction {dir:?}, expected F or B"))),
        };
        let prev = map
            .entry(cond.to_owned())
            .or_default()
            .insert(out.to_owned(), real::<S>(prob));
        if prev.is_some() {
            return Err(err(format!("duplicate entry {dir} {cond} {out}")));
        }
    }
    Ok(table)
}

/// Writes a table with entries sorted by (direction, conditioning word,
/// output word) so identical tables serialize byte-identically.
pub fn save_ttable<S: Real>(table: &TTable<S>, path: &Path) -> Result<()> {
    let mut out = Vec::new();
    let mut dump = |tag: &str, map: &HashMap<String, HashMap<String, S>>| {
        let mut conds: Vec<&String> = map.keys().collect();
        conds.sort();
        for cond in conds {
            let row = &map[cond];
            let mut outs: Vec<&String> = row.keys().collect();
            outs.sort();
            for o in outs {
                writeln!(out, "{tag} {cond} {o} {:.12e}", to_f64(row[o])).unwrap();
            }
        }
    };
    dump("F", &table.forward);
    dump("B", &table.backward);
    fs::write(path, out).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })
}

/// Writes feature weights as `index name value` lines, one per feature,
/// with enough digits to round-trip exactly.
pub fn save_weights<S: Real>(weights: &WeightVector<S>, path: &Path) -> Result<()> {
    let mut out = Vec::new();
    for (k, name) in FEATURE_NAMES.iter().enumerate() {
        writeln!(out, "{k} {name} {:.16e}", to_f64(weights[k])).unwrap();
    }
    fs::write(path, out).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })
}

/// Reads a weights file, insisting on the full feature list in order with
/// matching names and finite values.
pub fn load_weights<S: Real>(path: &Path) -> Result<WeightVector<S>> {
    let lines = read_lines(path)?;
    let err = |line: usize, msg: String| Error::Parse {
        path: path.to_owned(),
        line,
        msg,
    };
    let body: Vec<(usize, &String)> = lines
        .iter()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .collect();
    if body.len() != K {
        return Err(err(
            0,
            format!("expected {K} weight lines, got {}", body.len()),
        ));
    }
    let mut weights = WeightVector::zeros();
    for (k, (line_no, line)) in body.into_iter().enumerate() {
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(err(
                line_no + 1,
                format!("expected 3 fields, got {}", fields.len()),
            ));
        }
        let index: usize = fields[0]
            .parse()
            .map_err(|_| err(line_no + 1, format!("bad index {:?}", fields[0])))?;
        if index != k {
            return Err(err(line_no + 1, format!("expected index {k}, got {index}")));
        }
        if fields[1] != FEATURE_NAMES[k] {
            return Err(err(
                line_no + 1,
                format!(
                    "expected feature {:?}, got {:?}",
                    FEATURE_NAMES[k], fields[1]
                ),
            ));
        }
        let value: f64 = fields[2]
            .parse()
            .map_err(|_| err(line_no + 1, format!("bad value {:?}", fields[2])))?;
        if !value.is_finite() {
            return Err(err(line_no + 1, format!("non-finite weight {value}")));
        }
        weights[k] = real::<S>(value);
    }
    Ok(weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::tempdir;

    fn write(dir: &Path, name: &str, contents: &str) -> std::path::PathBuf {
        let p = dir.join(name);
        fs::write(&p, contents).unwrap();
        p
    }

    #[test]
    fn load_parallel_tokenizes_on_whitespace_runs() {
        let dir = tempdir().unwrap();
        let s = write(dir.path(), "s", "le  chat\n");
        let t = write(dir.path(), "t", "the cat\n");
        let corpus = load_parallel(&s, &t).unwrap();
        assert_eq!(corpus.len(), 1);
        assert_eq!(corpus.pairs[0].source, vec!["le", "chat"]);
        assert_eq!(corpus.pairs[0].target, vec!["the", "cat"]);
        assert_eq!(corpus.pairs[0].id, 0);
        assert_eq!((corpus.pairs[0].l(), corpus.pairs[0].m()), (2, 2));
    }

    #[test]
    fn load_parallel_rejects_line_count_mismatch() {
        let dir = tempdir().unwrap();
        let s = write(dir.path(), "s", "a\nb\nc\n");
        let t = write(dir.path(), "t", "x\ny\n");
        let err = load_parallel(&s, &t).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("3") && msg.contains("2"), "{msg}");
    }

    #[test]
    fn load_parallel_rejects_empty_line_with_its_number() {
        let dir = tempdir().unwrap();
        let s = write(dir.path(), "s", "a\n \nb\n");
        let t = write(dir.path(), "t", "x\ny\nz\n");
        let msg = load_parallel(&s, &t).unwrap_err().to_string();
        assert!(msg.contains(":2"), "{msg}");
    }

    #[test]
    fn gold_items_parse_with_sure_and_possible() {
        let dir = tempdir().unwrap();
        let s = write(dir.path(), "s", "a b\n");
        let t = write(dir.path(), "t", "x y z\n");
        let g = write(dir.path(), "g", "1-1 2?3\n");
        let corpus = load_parallel(&s, &t).unwrap();
        let corpus = load_gold(&g, corpus).unwrap();
        let gold = &corpus.gold.as_ref().unwrap()[0];
        assert_eq!(
            gold.sure().iter().copied().collect::<Vec<_>>(),
            vec![Link::new(0, 0)]
        );
        assert_eq!(
            gold.possible().iter().copied().collect::<Vec<_>>(),
            vec![Link::new(0, 0), Link::new(1, 2)]
        );
    }

    #[test]
    fn gold_empty_line_means_no_links() {
        let dir = tempdir().unwrap();
        let s = write(dir.path(), "s", "a\nb\n");
        let t = write(dir.path(), "t", "x\ny\n");
        let g = write(dir.path(), "g", "1-1\n\n");
        let corpus = load_gold(&g, load_parallel(&s, &t).unwrap()).unwrap();
        let gold = corpus.gold.unwrap();
        assert!(!gold[0].is_empty());
        assert!(gold[1].is_empty());
    }

    #[test]
    fn gold_rejects_out_of_bounds_link() {
        let dir = tempdir().unwrap();
        let s = write(dir.path(), "s", "a b\n");
        let t = write(dir.path(), "t", "x y z\n");
        let g = write(dir.path(), "g", "5-1\n");
        let corpus = load_parallel(&s, &t).unwrap();
        let msg = load_gold(&g, corpus).unwrap_err().to_string();
        assert!(msg.contains("5-1") && msg.contains(":1"), "{msg}");
    }

    #[test]
    fn gold_rejects_malformed_item() {
        let dir = tempdir().unwrap();
        let s = write(dir.path(), "s", "a\n");
        let t = write(dir.path(), "t", "x\n");
        let g = write(dir.path(), "g", "1_1\n");
        let corpus = load_parallel(&s, &t).unwrap();
        assert!(load_gold(&g, corpus).is_err());
    }

    #[test]
    fn ttable_lines_parse_into_directed_maps() {
        let dir = tempdir().unwrap();
        let p = write(dir.path(), "tt", "F chat cat 0.9\nB cat chat 0.7\n");
        let table: TTable<f64> = load_ttable(&p).unwrap();
        assert_eq!(table.p_tgt_given_src("chat", "cat"), 0.9);
        assert_eq!(table.p_src_given_tgt("cat", "chat"), 0.7);
        assert_eq!(table.p_tgt_given_src("chat", "dog"), 0.0);
    }

    #[test]
    fn ttable_round_trips_probabilities() {
        let dir = tempdir().unwrap();
        let mut table: TTable<f64> = TTable::new();
        table.insert_forward("a", "x", 0.123456789012345);
        table.insert_forward("a", "y", 1.0);
        table.insert_backward("x", "a", 3.2e-7);
        let p = dir.path().join("tt");
        save_ttable(&table, &p).unwrap();
        let loaded: TTable<f64> = load_ttable(&p).unwrap();
        for (orig, back) in [
            (0.123456789012345, loaded.p_tgt_given_src("a", "x")),
            (1.0, loaded.p_tgt_given_src("a", "y")),
            (3.2e-7, loaded.p_src_given_tgt("x", "a")),
        ] {
            let rel = ((orig - back) / orig).abs();
            assert!(rel < 1e-12, "{orig} vs {back}");
        }
    }

    #[test]
    fn ttable_save_is_deterministic() {
        let dir = tempdir().unwrap();
        let mut table: TTable<f64> = TTable::new();
        for (s, t, p) in [("b", "y", 0.5), ("a", "x", 0.25), ("a", "y", 0.75)] {
            table.insert_forward(s, t, p);
            table.insert_backward(t, s, p);
        }
        let p1 = dir.path().join("t1");
        let p2 = dir.path().join("t2");
        save_ttable(&table, &p1).unwrap();
        save_ttable(&table, &p2).unwrap();
        assert_eq!(fs::read(&p1).unwrap(), fs::read(&p2).unwrap());
    }

    #[test]
    fn ttable_rejects_out_of_range_probability() {
        let dir = tempdir().unwrap();
        let p = write(dir.path(), "tt", "F chat cat 1.5\n");
        assert!(load_ttable::<f64>(&p).is_err());
        let p = write(dir.path(), "tt0", "F chat cat 0\n");
        assert!(load_ttable::<f64>(&p).is_err());
    }

    #[test]
    fn ttable_rejects_duplicate_key() {
        let dir = tempdir().unwrap();
        let p = write(dir.path(), "tt", "F chat cat 0.9\nF chat cat 0.8\n");
        let msg = load_ttable::<f64>(&p).unwrap_err().to_string();
        assert!(msg.contains("chat") && msg.contains("cat"), "{msg}");
    }

    #[test]
    fn sentence_pair_rejects_bad_tokens() {
        assert!(SentencePair::new(0, vec!["a b".into()], vec!["x".into()]).is_err());
        assert!(SentencePair::new(0, vec!["".into()], vec!["x".into()]).is_err());
        assert!(SentencePair::new(0, vec![], vec!["x".into()]).is_err());
    }

    #[test]
    fn gold_alignment_keeps_sure_inside_possible() {
        let g = GoldAlignment::new([Link::new(0, 0)], [Link::new(1, 1)]);
        assert!(g.possible().contains(&Link::new(0, 0)));
        assert!(g.possible().contains(&Link::new(1, 1)));
        assert!(!g.sure().contains(&Link::new(1, 1)));
    }

    #[test]
    fn weights_round_trip_bit_exactly() {
        let dir = tempdir().unwrap();
        let mut w = WeightVector::<f64>::zeros();
        for k in 0..K {
            w[k] = (k as f64 + 1.0).ln() * if k % 2 == 0 { 1.0 } else { -1.0 };
        }
        let p = dir.path().join("w");
        save_weights(&w, &p).unwrap();
        let got = load_weights::<f64>(&p).unwrap();
        for k in 0..K {
            assert_eq!(w[k].to_bits(), got[k].to_bits(), "feature {k}");
        }
        let text = fs::read_to_string(&p).unwrap();
        assert_eq!(text.lines().count(), K);
        assert!(text.starts_with("0 "));
    }

    #[test]
    fn weights_loader_rejects_bad_files() {
        let dir = tempdir().unwrap();
        let p = write(dir.path(), "short", "0 x 1.0\n");
        assert!(load_weights::<f64>(&p).is_err());
        let w = WeightVector::<f64>::zeros();
        let good = dir.path().join("good");
        save_weights(&w, &good).unwrap();
        let text = fs::read_to_string(&good).unwrap();
        let renamed = text.replacen(FEATURE_NAMES[0], "mystery", 1);
        let bad = write(dir.path(), "renamed", &renamed);
        assert!(load_weights::<f64>(&bad).is_err());
        let nan = text.replacen("0.0000000000000000e0", "NaN", 1);
        let bad = write(dir.path(), "nan", &nan);
        assert!(load_weights::<f64>(&bad).is_err());
    }
}
