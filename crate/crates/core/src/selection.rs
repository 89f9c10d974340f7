// Copyright 2026 The domadapt Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! Cross-entropy difference ranking and pseudo in-domain selection.

use std::cmp::Ordering;
use std::fs;
use std::path::Path;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::{write_lines, Corpus, Sentence};
use crate::error::{Error, Result};
use crate::ngram::NGramLm;
use crate::par;

/// Default selection size for full-scale corpora.
pub const FULL_SCALE_K: usize = 20_000;

#[derive(Clone, Debug, PartialEq)]
pub struct ScoredSentence {
    /// Position in the scored corpus.
    pub index: usize,
    pub sentence: Sentence,
    pub ce_in: f64,
    pub ce_out: f64,
    /// `ce_in - ce_out`; lower means more in-domain-like.
    pub ced: f64,
}

impl ScoredSentence {
    pub fn new(index: usize, sentence: Sentence, ce_in: f64, ce_out: f64) -> Self {
        ScoredSentence {
            index,
            sentence,
            ce_in,
            ce_out,
            ced: ce_in - ce_out,
        }
    }
}

/// Ranking key for selection.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Criterion {
    /// `CE_in - CE_out`.
    #[default]
    CrossEntropyDifference,
    /// `CE_in` alone.
    InDomainCrossEntropy,
}

impl Criterion {
    pub fn key(self, s: &ScoredSentence) -> f64 {
        match self {
            Criterion::CrossEntropyDifference => s.ced,
            Criterion::InDomainCrossEntropy => s.ce_in,
        }
    }
}

/// Scores every sentence of `corpus` under both models, keeping order.
pub fn ced_score(in_lm: &NGramLm, out_lm: &NGramLm, corpus: &Corpus) -> Result<Vec<ScoredSentence>> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let scored = par::map_enumerated(&corpus.sentences, |index, sentence| {
        let ce_in = in_lm.cross_entropy(sentence)?;
        let ce_out = out_lm.cross_entropy(sentence)?;
        Ok(ScoredSentence::new(index, sentence.clone(), ce_in, ce_out))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    debug_assert!(scored.iter().all(|s| s.ced.is_finite()));
    Ok(scored)
}

fn rank(criterion: Criterion) -> impl Fn(&ScoredSentence, &ScoredSentence) -> Ordering {
    move |a, b| {
        criterion
            .key(a)
            .total_cmp(&criterion.key(b))
            .then(a.index.cmp(&b.index))
    }
}

/// The `k` lowest-CED sentences, sorted by `(ced, index)`.
pub fn select_lowest_k(scored: &[ScoredSentence], k: usize) -> Vec<ScoredSentence> {
    select_lowest_k_by(scored, k, Criterion::CrossEntropyDifference)
}

/// The `k` lowest sentences under `criterion`, ties broken by smaller index.
/// When `k` exceeds the input every sentence is returned and a warning logged.
pub fn select_lowest_k_by(scored: &[ScoredSentence], k: usize, criterion: Criterion) -> Vec<ScoredSentence> {
    if k > scored.len() {
        log::warn!("selection size {k} exceeds {} scored sentences; keeping all", scored.len());
    }
    let k = k.min(scored.len());
    if k == 0 {
        return Vec::new();
    }
    let cmp = rank(criterion);
    let mut pool: Vec<&ScoredSentence> = scored.iter().collect();
    if k < pool.len() {
        pool.select_nth_unstable_by(k - 1, |a, b| cmp(a, b));
        pool.truncate(k);
    }
    pool.sort_unstable_by(|a, b| cmp(a, b));
    pool.into_iter().cloned().collect()
}

/// Uniform sample of `min(target_size, |corpus|)` sentences without
/// replacement, in original order. Deterministic for a given seed.
pub fn size_matched_subsample(corpus: &Corpus, target_size: usize, seed: u64) -> Corpus {
    let n = corpus.len();
    let mut out = Corpus::new(corpus.language, corpus.domain, Vec::new());
    out.source_path = corpus.source_path.clone();
    if target_size >= n {
        out.sentences = corpus.sentences.clone();
        return out;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = index::sample(&mut rng, n, target_size).into_vec();
    picked.sort_unstable();
    out.sentences = picked.into_iter().map(|i| corpus.sentences[i].clone()).collect();
    out
}

/// Writes `index<TAB>ced<TAB>ce_in<TAB>ce_out<TAB>raw` lines.
pub fn write_scored(path: &Path, scored: &[ScoredSentence]) -> Result<()> {
    let lines: Vec<String> = scored
        .iter()
        .map(|s| format!("{}\t{}\t{}\t{}\t{}", s.index, s.ced, s.ce_in, s.ce_out, s.sentence.raw))
        .collect();
    write_lines(path, lines.iter().map(String::as_str))
}

/// Reads a file written by [`write_scored`]. Tokens are re-derived from the
/// raw text, so rescoring is not possible from this form.
pub fn read_scored(path: &Path) -> Result<Vec<ScoredSentence>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let fields: Vec<&str> = line.splitn(5, '\t').collect();
        let [index, ced, ce_in, ce_out, raw] = fields[..] else {
            return Err(Error::parse(path, i + 1, "expected 5 tab-separated fields"));
        };
        let num = |s: &str| s.parse::<f64>().map_err(|_| Error::parse(path, i + 1, format!("bad number {s:?}")));
        let index = index
            .parse::<usize>()
            .map_err(|_| Error::parse(path, i + 1, format!("bad index {index:?}")))?;
        let (ced, ce_in, ce_out) = (num(ced)?, num(ce_in)?, num(ce_out)?);
        out.push(ScoredSentence {
            index,
            sentence: Sentence::from_raw(raw),
            ce_in,
            ce_out,
            ced,
        });
    }
    Ok(out)
}

/// Writes the selected raw sentences and a sidecar with their indices,
/// one per line, in the same order.
pub fn write_selection(corpus_path: &Path, index_path: &Path, selected: &[ScoredSentence]) -> Result<()> {
    write_lines(corpus_path, selected.iter().map(|s| s.sentence.raw.as_str()))?;
    let idx: Vec<String> = selected.iter().map(|s| s.index.to_string()).collect();
    write_lines(index_path, idx.iter().map(String::as_str))
}
