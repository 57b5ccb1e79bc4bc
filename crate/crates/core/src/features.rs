//! The 16-feature catalog over (sentence pair, alignment) plus incremental
//! feature maintenance for single-link edits.
//!
//! An alignment is an arbitrary set of links, so fertilities, crossings and
//! sibling gaps are all well defined without any 1:1 restriction. Feature
//! values are stored in the working scalar type; the combinatorial ones are
//! small integers and stay exact.

use std::collections::BTreeSet;

use crate::corpus::{Link, SentencePair, TTable};
use crate::error::{Error, Result};
use crate::scalar::{real, Real};

pub const K: usize = 16;

pub const FEATURE_NAMES: [&str; K] = [
    "tprob",
    "relpos",
    "linkcount",
    "monotone",
    "swap",
    "cross",
    "src_linked",
    "tgt_linked",
    "src_sibling",
    "tgt_sibling",
    "src_max_fert",
    "tgt_max_fert",
    "one_to_one",
    "one_to_many",
    "many_to_one",
    "many_to_many",
];

/// Feature indices, fixed across the crate and the weights file format.
pub mod idx {
    /// Sum over links of ln(t(tgt|src)+eps) + ln(t(src|tgt)+eps).
    pub const TPROB: usize = 0;
    /// Sum over links of |(i+1)/l - (j+1)/m|.
    pub const RELPOS: usize = 1;
    pub const LINKS: usize = 2;
    /// Pairs ((i,j),(i+1,j+1)) both present.
    pub const MONOTONE: usize = 3;
    /// Pairs ((i,j),(i+1,j-1)) both present.
    pub const SWAP: usize = 4;
    /// Unordered pairs with (i-i')(j-j') < 0.
    pub const CROSS: usize = 5;
    pub const SRC_LINKED: usize = 6;
    pub const TGT_LINKED: usize = 7;
    /// Sum over source words of gaps between consecutive linked targets.
    pub const SRC_SIB: usize = 8;
    pub const TGT_SIB: usize = 9;
    pub const SRC_MAX_FERT: usize = 10;
    pub const TGT_MAX_FERT: usize = 11;
    /// Links whose source and target fertilities are both exactly 1.
    pub const ONE_ONE: usize = 12;
    /// Links with source fertility >= 2 and target fertility 1.
    pub const ONE_MANY: usize = 13;
    /// Links with source fertility 1 and target fertility >= 2.
    pub const MANY_ONE: usize = 14;
    pub const MANY_MANY: usize = 15;
}

const TPROB_EPS: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FeatureVector<S>(pub [S; K]);

impl<S: Real> FeatureVector<S> {
    pub fn zeros() -> Self {
        FeatureVector([S::zero(); K])
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = *self;
        out.add_assign(other);
        out
    }

    pub fn add_assign(&mut self, other: &Self) {
        for k in 0..K {
            self.0[k] += other.0[k];
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = *self;
        for k in 0..K {
            out.0[k] -= other.0[k];
        }
        out
    }

    pub fn scale(&self, c: S) -> Self {
        let mut out = *self;
        for k in 0..K {
            out.0[k] *= c;
        }
        out
    }

    pub fn l1_norm(&self) -> S {
        self.0.iter().map(|x| x.abs()).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }
}

impl<S> std::ops::Index<usize> for FeatureVector<S> {
    type Output = S;
    fn index(&self, k: usize) -> &S {
        &self.0[k]
    }
}

impl<S> std::ops::IndexMut<usize> for FeatureVector<S> {
    fn index_mut(&mut self, k: usize) -> &mut S {
        &mut self.0[k]
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeightVector<S>(pub [S; K]);

impl<S: Real> WeightVector<S> {
    pub fn zeros() -> Self {
        WeightVector([S::zero(); K])
    }

    /// Lexical warm start: positive translation-probability weight plus a
    /// per-link bonus, so greedy search adds exactly the links whose
    /// bidirectional lexical odds beat e^-5. All-zero weights are a
    /// stationary point of the contrastive objective (the search adds no
    /// links and shuffle noise preserves every feature expectation), so
    /// training has to start somewhere off the saddle.
    pub fn warm_start() -> Self {
        let mut w = Self::zeros();
        w.0[idx::TPROB] = S::one();
        w.0[idx::LINKS] = real(5.0);
        w
    }

    /// One independent standard-normal draw per coordinate.
    pub fn standard_normal<R: rand::Rng + ?Sized>(rng: &mut R) -> Self {
        let mut w = Self::zeros();
        for k in 0..K {
            w.0[k] = real(rng.sample(rand_distr::StandardNormal));
        }
        w
    }

    pub fn dot(&self, phi: &FeatureVector<S>) -> S {
        let mut acc = S::zero();
        for k in 0..K {
            acc += self.0[k] * phi.0[k];
        }
        acc
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }
}

impl<S> std::ops::Index<usize> for WeightVector<S> {
    type Output = S;
    fn index(&self, k: usize) -> &S {
        &self.0[k]
    }
}

impl<S> std::ops::IndexMut<usize> for WeightVector<S> {
    fn index_mut(&mut self, k: usize) -> &mut S {
        &mut self.0[k]
    }
}

pub fn score<S: Real>(features: &FeatureVector<S>, weights: &WeightVector<S>) -> S {
    weights.dot(features)
}

/// A set of links; any subset of the l*m grid is a valid alignment.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Alignment {
    links: BTreeSet<Link>,
}

impl Alignment {
    pub fn empty() -> Self {
        Alignment::default()
    }

    pub fn from_links<I: IntoIterator<Item = Link>>(links: I) -> Self {
        Alignment {
            links: links.into_iter().collect(),
        }
    }

    pub fn contains(&self, link: Link) -> bool {
        self.links.contains(&link)
    }

    pub fn insert(&mut self, link: Link) -> bool {
        self.links.insert(link)
    }

    pub fn remove(&mut self, link: Link) -> bool {
        self.links.remove(&link)
    }

    pub fn len(&self) -> usize {
        self.links.len()
    }

    pub fn is_empty(&self) -> bool {
        self.links.is_empty()
    }

    /// Links in canonical (src, tgt) order.
    pub fn iter(&self) -> impl Iterator<Item = Link> + '_ {
        self.links.iter().copied()
    }

    pub fn to_vec(&self) -> Vec<Link> {
        self.links.iter().copied().collect()
    }
}

impl FromIterator<Link> for Alignment {
    fn from_iter<I: IntoIterator<Item = Link>>(iter: I) -> Self {
        Alignment::from_links(iter)
    }
}

/// ln-translation-odds and relative-position cost of a single link. Shared
/// by full extraction and the incremental deltas so both paths produce
/// bit-identical values.
pub(crate) fn link_local<S: Real>(pair: &SentencePair, ttable: &TTable<S>, link: Link) -> (S, S) {
    let s = &pair.source[link.src];
    let t = &pair.target[link.tgt];
    let eps = real::<S>(TPROB_EPS);
    let lnt = (ttable.p_tgt_given_src(s, t) + eps).ln() + (ttable.p_src_given_tgt(t, s) + eps).ln();
    let src_pos = S::from_usize(link.src + 1).unwrap() / S::from_usize(pair.l()).unwrap();
    let tgt_pos = S::from_usize(link.tgt + 1).unwrap() / S::from_usize(pair.m()).unwrap();
    (lnt, (src_pos - tgt_pos).abs())
}

fn sib_value(first: usize, last: usize, count: usize) -> i64 {
    // Telescoped gap sum: sum of (next - prev - 1) over consecutive
    // positions equals last - first - (count - 1).
    if count >= 2 {
        last as i64 - first as i64 - (count as i64 - 1)
    } else {
        0
    }
}

fn cat_index(src_many: bool, tgt_many: bool) -> usize {
    match (src_many, tgt_many) {
        (false, false) => idx::ONE_ONE,
        (true, false) => idx::ONE_MANY,
        (false, true) => idx::MANY_ONE,
        (true, true) => idx::MANY_MANY,
    }
}

/// Full feature extraction; the ground truth the incremental path is
/// checked against. Links must be sorted, unique and in bounds.
pub(crate) fn features_of_links<S: Real>(
    pair: &SentencePair,
    links: &[Link],
    ttable: &TTable<S>,
) -> FeatureVector<S> {
    let (l, m) = (pair.l(), pair.m());
    let mut tprob = S::zero();
    let mut relpos = S::zero();
    let mut rows: Vec<Vec<usize>> = vec![Vec::new(); l];
    let mut cols: Vec<Vec<usize>> = vec![Vec::new(); m];
    for &lk in links {
        let (lnt, rp) = link_local(pair, ttable, lk);
        tprob += lnt;
        relpos += rp;
        rows[lk.src].push(lk.tgt);
        cols[lk.tgt].push(lk.src);
    }

    let mut ints = [0i64; K];
    ints[idx::LINKS] = links.len() as i64;
    for &lk in links {
        if links
            .binary_search(&Link::new(lk.src + 1, lk.tgt + 1))
            .is_ok()
        {
            ints[idx::MONOTONE] += 1;
        }
        if lk.tgt >= 1
            && links
                .binary_search(&Link::new(lk.src + 1, lk.tgt - 1))
                .is_ok()
        {
            ints[idx::SWAP] += 1;
        }
    }
    for (a, &la) in links.iter().enumerate() {
        for &lb in &links[a + 1..] {
            let d = (la.src as i64 - lb.src as i64) * (la.tgt as i64 - lb.tgt as i64);
            if d < 0 {
                ints[idx::CROSS] += 1;
            }
        }
    }
    ints[idx::SRC_LINKED] = rows.iter().filter(|r| !r.is_empty()).count() as i64;
    ints[idx::TGT_LINKED] = cols.iter().filter(|c| !c.is_empty()).count() as i64;
    for row in &rows {
        for w in row.windows(2) {
            ints[idx::SRC_SIB] += w[1] as i64 - w[0] as i64 - 1;
        }
    }
    for col in &cols {
        for w in col.windows(2) {
            ints[idx::TGT_SIB] += w[1] as i64 - w[0] as i64 - 1;
        }
    }
    ints[idx::SRC_MAX_FERT] = rows.iter().map(Vec::len).max().unwrap_or(0) as i64;
    ints[idx::TGT_MAX_FERT] = cols.iter().map(Vec::len).max().unwrap_or(0) as i64;
    for &lk in links {
        let f = rows[lk.src].len();
        let g = cols[lk.tgt].len();
        ints[cat_index(f >= 2, g >= 2)] += 1;
    }

    let mut phi = FeatureVector::zeros();
    phi.0[idx::TPROB] = tprob;
    phi.0[idx::RELPOS] = relpos;
    for k in idx::LINKS..K {
        phi.0[k] = S::from_i64(ints[k]).unwrap();
    }
    phi
}

/// Computes the full feature vector from scratch.
pub fn extract_features<S: Real>(
    pair: &SentencePair,
    alignment: &Alignment,
    ttable: &TTable<S>,
) -> Result<FeatureVector<S>> {
    for link in alignment.iter() {
        if !pair.contains(link) {
            return Err(Error::LinkOutOfBounds {
                link,
                l: pair.l(),
                m: pair.m(),
            });
        }
    }
    let links = alignment.to_vec();
    Ok(features_of_links(pair, &links, ttable))
}

#[derive(Clone, Copy, Debug)]
struct RowEntry<S> {
    tgt: usize,
    lnt: S,
    rp: S,
}

/// Incrementally maintained alignment state: per-word link lists,
/// fertilities and the cached feature vector. Single-link deltas cost
/// O(|y| + l + m); applying one keeps the cache equal to a from-scratch
/// extraction (the two real-valued features are re-summed in canonical
/// order, the rest are integer arithmetic).
#[derive(Clone, Debug)]
pub struct AlignStats<S> {
    l: usize,
    m: usize,
    rows: Vec<Vec<RowEntry<S>>>,
    cols: Vec<Vec<usize>>,
    n_links: usize,
    src_max_fert: usize,
    tgt_max_fert: usize,
    feats: FeatureVector<S>,
}

impl<S: Real> AlignStats<S> {
    pub fn empty(pair: &SentencePair) -> Self {
        AlignStats {
            l: pair.l(),
            m: pair.m(),
            rows: vec![Vec::new(); pair.l()],
            cols: vec![Vec::new(); pair.m()],
            n_links: 0,
            src_max_fert: 0,
            tgt_max_fert: 0,
            feats: FeatureVector::zeros(),
        }
    }

    /// Builds the state by adding the alignment's links one at a time.
    pub fn build(pair: &SentencePair, alignment: &Alignment, ttable: &TTable<S>) -> Result<Self> {
        let mut stats = AlignStats::empty(pair);
        for link in alignment.iter() {
            let delta = stats.delta_add(link, pair, ttable)?;
            stats.apply_add(link, &delta);
        }
        Ok(stats)
    }

    pub fn features(&self) -> &FeatureVector<S> {
        &self.feats
    }

    pub fn len(&self) -> usize {
        self.n_links
    }

    pub fn is_empty(&self) -> bool {
        self.n_links == 0
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn contains(&self, link: Link) -> bool {
        link.src < self.l
            && self.rows[link.src]
                .binary_search_by_key(&link.tgt, |e| e.tgt)
                .is_ok()
    }

    /// Links in canonical order.
    pub fn links(&self) -> Vec<Link> {
        let mut out = Vec::with_capacity(self.n_links);
        for (i, row) in self.rows.iter().enumerate() {
            for e in row {
                out.push(Link::new(i, e.tgt));
            }
        }
        out
    }

    pub fn alignment(&self) -> Alignment {
        Alignment::from_links(self.links())
    }

    fn check_bounds(&self, link: Link) -> Result<()> {
        if link.src >= self.l || link.tgt >= self.m {
            return Err(Error::LinkOutOfBounds {
                link,
                l: self.l,
                m: self.m,
            });
        }
        Ok(())
    }

    /// Crossings between `link` and every present link; a link never
    /// crosses itself or anything sharing its row or column.
    fn crossings(&self, link: Link) -> i64 {
        let mut c = 0;
        for (i2, row) in self.rows.iter().enumerate() {
            let di = link.src as i64 - i2 as i64;
            if di == 0 {
                continue;
            }
            for e in row {
                if di * (link.tgt as i64 - e.tgt as i64) < 0 {
                    c += 1;
                }
            }
        }
        c
    }

    /// Feature change from adding an absent link, without modifying state.
    pub fn delta_add(
        &self,
        link: Link,
        pair: &SentencePair,
        ttable: &TTable<S>,
    ) -> Result<FeatureVector<S>> {
        self.check_bounds(link)?;
        if self.contains(link) {
            return Err(Error::LinkPresent(link));
        }
        debug_assert!(pair.l() == self.l && pair.m() == self.m);
        let (i, j) = (link.src, link.tgt);
        let (lnt, rp) = link_local(pair, ttable, link);

        let mut ints = [0i64; K];
        ints[idx::LINKS] = 1;
        if i >= 1 && j >= 1 && self.contains(Link::new(i - 1, j - 1)) {
            ints[idx::MONOTONE] += 1;
        }
        if self.contains(Link::new(i + 1, j + 1)) {
            ints[idx::MONOTONE] += 1;
        }
        if i >= 1 && self.contains(Link::new(i - 1, j + 1)) {
            ints[idx::SWAP] += 1;
        }
        if j >= 1 && self.contains(Link::new(i + 1, j - 1)) {
            ints[idx::SWAP] += 1;
        }
        ints[idx::CROSS] = self.crossings(link);

        let row = &self.rows[i];
        let col = &self.cols[j];
        ints[idx::SRC_LINKED] = i64::from(row.is_empty());
        ints[idx::TGT_LINKED] = i64::from(col.is_empty());

        if !row.is_empty() {
            let old = sib_value(row[0].tgt, row[row.len() - 1].tgt, row.len());
            let new = sib_value(
                row[0].tgt.min(j),
                row[row.len() - 1].tgt.max(j),
                row.len() + 1,
            );
            ints[idx::SRC_SIB] = new - old;
        }
        if !col.is_empty() {
            let old = sib_value(col[0], col[col.len() - 1], col.len());
            let new = sib_value(col[0].min(i), col[col.len() - 1].max(i), col.len() + 1);
            ints[idx::TGT_SIB] = new - old;
        }

        ints[idx::SRC_MAX_FERT] =
            (row.len() + 1).max(self.src_max_fert) as i64 - self.src_max_fert as i64;
        ints[idx::TGT_MAX_FERT] =
            (col.len() + 1).max(self.tgt_max_fert) as i64 - self.tgt_max_fert as i64;

        // The new link's own category uses post-add fertilities.
        ints[cat_index(!row.is_empty(), !col.is_empty())] += 1;
        // A row mate crossing fertility 1 -> 2 switches category; its own
        // target fertility is untouched because it sits in another column.
        if row.len() == 1 {
            let mate_tgt_many = self.cols[row[0].tgt].len() >= 2;
            ints[cat_index(false, mate_tgt_many)] -= 1;
            ints[cat_index(true, mate_tgt_many)] += 1;
        }
        if col.len() == 1 {
            let mate_src_many = self.rows[col[0]].len() >= 2;
            ints[cat_index(mate_src_many, false)] -= 1;
            ints[cat_index(mate_src_many, true)] += 1;
        }

        let mut delta = FeatureVector::zeros();
        delta.0[idx::TPROB] = lnt;
        delta.0[idx::RELPOS] = rp;
        for k in idx::LINKS..K {
            delta.0[k] = S::from_i64(ints[k]).unwrap();
        }
        Ok(delta)
    }

    /// Feature change from removing a present link.
    pub fn delta_remove(&self, link: Link) -> Result<FeatureVector<S>> {
        self.check_bounds(link)?;
        let (i, j) = (link.src, link.tgt);
        let row = &self.rows[i];
        let pos = row
            .binary_search_by_key(&j, |e| e.tgt)
            .map_err(|_| Error::LinkAbsent(link))?;
        let entry = row[pos];
        let col = &self.cols[j];

        let mut ints = [0i64; K];
        ints[idx::LINKS] = -1;
        if i >= 1 && j >= 1 && self.contains(Link::new(i - 1, j - 1)) {
            ints[idx::MONOTONE] -= 1;
        }
        if self.contains(Link::new(i + 1, j + 1)) {
            ints[idx::MONOTONE] -= 1;
        }
        if i >= 1 && self.contains(Link::new(i - 1, j + 1)) {
            ints[idx::SWAP] -= 1;
        }
        if j >= 1 && self.contains(Link::new(i + 1, j - 1)) {
            ints[idx::SWAP] -= 1;
        }
        ints[idx::CROSS] = -self.crossings(link);

        ints[idx::SRC_LINKED] = -i64::from(row.len() == 1);
        ints[idx::TGT_LINKED] = -i64::from(col.len() == 1);

        {
            let old = sib_value(row[0].tgt, row[row.len() - 1].tgt, row.len());
            let new = if row.len() >= 3 {
                let first = if pos == 0 { row[1].tgt } else { row[0].tgt };
                let last = if pos == row.len() - 1 {
                    row[row.len() - 2].tgt
                } else {
                    row[row.len() - 1].tgt
                };
                sib_value(first, last, row.len() - 1)
            } else {
                0
            };
            ints[idx::SRC_SIB] = new - old;
        }
        {
            let cpos = col.binary_search(&i).expect("row/col views out of sync");
            let old = sib_value(col[0], col[col.len() - 1], col.len());
            let new = if col.len() >= 3 {
                let first = if cpos == 0 { col[1] } else { col[0] };
                let last = if cpos == col.len() - 1 {
                    col[col.len() - 2]
                } else {
                    col[col.len() - 1]
                };
                sib_value(first, last, col.len() - 1)
            } else {
                0
            };
            ints[idx::TGT_SIB] = new - old;
        }

        if row.len() == self.src_max_fert {
            let new_max = self
                .rows
                .iter()
                .enumerate()
                .map(|(i2, r)| r.len() - usize::from(i2 == i))
                .max()
                .unwrap_or(0);
            ints[idx::SRC_MAX_FERT] = new_max as i64 - self.src_max_fert as i64;
        }
        if col.len() == self.tgt_max_fert {
            let new_max = self
                .cols
                .iter()
                .enumerate()
                .map(|(j2, c)| c.len() - usize::from(j2 == j))
                .max()
                .unwrap_or(0);
            ints[idx::TGT_MAX_FERT] = new_max as i64 - self.tgt_max_fert as i64;
        }

        ints[cat_index(row.len() >= 2, col.len() >= 2)] -= 1;
        if row.len() == 2 {
            let mate = if pos == 0 { row[1] } else { row[0] };
            let mate_tgt_many = self.cols[mate.tgt].len() >= 2;
            ints[cat_index(true, mate_tgt_many)] -= 1;
            ints[cat_index(false, mate_tgt_many)] += 1;
        }
        if col.len() == 2 {
            let cpos = col.binary_search(&i).unwrap();
            let mate_src = if cpos == 0 { col[1] } else { col[0] };
            let mate_src_many = self.rows[mate_src].len() >= 2;
            ints[cat_index(mate_src_many, true)] -= 1;
            ints[cat_index(mate_src_many, false)] += 1;
        }

        let mut delta = FeatureVector::zeros();
        delta.0[idx::TPROB] = -entry.lnt;
        delta.0[idx::RELPOS] = -entry.rp;
        for k in idx::LINKS..K {
            delta.0[k] = S::from_i64(ints[k]).unwrap();
        }
        Ok(delta)
    }

    /// Re-derives the two real-valued features by summing per-link values
    /// in canonical order, so the cache matches full extraction exactly.
    fn resum_reals(&mut self) {
        let mut tprob = S::zero();
        let mut relpos = S::zero();
        for row in &self.rows {
            for e in row {
                tprob += e.lnt;
                relpos += e.rp;
            }
        }
        self.feats.0[idx::TPROB] = tprob;
        self.feats.0[idx::RELPOS] = relpos;
    }

    /// Applies an addition. `delta` must be the vector returned by
    /// `delta_add` for this link on this state (its first two components
    /// carry the link's own local values).
    pub fn apply_add(&mut self, link: Link, delta: &FeatureVector<S>) {
        let (i, j) = (link.src, link.tgt);
        let pos = self.rows[i]
            .binary_search_by_key(&j, |e| e.tgt)
            .expect_err("apply_add on a present link");
        self.rows[i].insert(
            pos,
            RowEntry {
                tgt: j,
                lnt: delta.0[idx::TPROB],
                rp: delta.0[idx::RELPOS],
            },
        );
        let cpos = self.cols[j]
            .binary_search(&i)
            .expect_err("row/col views out of sync");
        self.cols[j].insert(cpos, i);
        self.n_links += 1;
        self.src_max_fert = self.src_max_fert.max(self.rows[i].len());
        self.tgt_max_fert = self.tgt_max_fert.max(self.cols[j].len());
        for k in idx::LINKS..K {
            self.feats.0[k] += delta.0[k];
        }
        self.resum_reals();
    }

    /// Applies a removal; `delta` must come from `delta_remove` on this
    /// state.
    pub fn apply_remove(&mut self, link: Link, delta: &FeatureVector<S>) {
        let (i, j) = (link.src, link.tgt);
        let pos = self.rows[i]
            .binary_search_by_key(&j, |e| e.tgt)
            .expect("apply_remove on an absent link");
        self.rows[i].remove(pos);
        let cpos = self.cols[j]
            .binary_search(&i)
            .expect("row/col views out of sync");
        self.cols[j].remove(cpos);
        self.n_links -= 1;
        if self.rows[i].len() + 1 == self.src_max_fert {
            self.src_max_fert = self.rows.iter().map(Vec::len).max().unwrap_or(0);
        }
        if self.cols[j].len() + 1 == self.tgt_max_fert {
            self.tgt_max_fert = self.cols.iter().map(Vec::len).max().unwrap_or(0);
        }
        for k in idx::LINKS..K {
            self.feats.0[k] += delta.0[k];
        }
        self.resum_reals();
    }
}
