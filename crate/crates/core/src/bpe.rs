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

//! Byte-pair-encoding subword segmentation with a vocabulary shared across
//! both languages.
//!
//! Words are split into characters followed by a separate end-of-word symbol
//! [`END_OF_WORD`]. Merges are learned greedily by pair frequency. On output
//! the end-of-word symbol is glued onto the final subword of each word, so
//! `"abab"` encodes to `["ab", "ab</w>"]` and decoding strips the marker.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fs;
use std::path::Path;

use crate::corpus::{write_lines, Corpus, Sentence};
use crate::error::{Error, Result};
use crate::par;

pub const END_OF_WORD: &str = "</w>";

/// Merge count used when none is configured. Full-scale systems use ~60k.
pub const DEFAULT_MERGE_COUNT: usize = 2000;

const FORMAT_HEADER: &str = "#bpe-model v1";

type SymbolId = u32;

#[derive(Clone, Debug)]
pub struct BpeModel {
    merges: Vec<(String, String)>,
    merge_count: usize,
    alphabet: BTreeSet<char>,
    symbols: Vec<String>,
    symbol_ids: HashMap<String, SymbolId>,
    // (left, right) -> (rank, merged symbol)
    merge_table: HashMap<(SymbolId, SymbolId), (usize, SymbolId)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Sym {
    Known(SymbolId),
    Unknown(char),
}

impl BpeModel {
    fn from_parts(alphabet: BTreeSet<char>, merges: Vec<(String, String)>, merge_count: usize) -> Self {
        let mut model = BpeModel {
            merges: Vec::with_capacity(merges.len()),
            merge_count,
            alphabet,
            symbols: Vec::new(),
            symbol_ids: HashMap::new(),
            merge_table: HashMap::new(),
        };
        let chars: Vec<char> = model.alphabet.iter().copied().collect();
        for c in chars {
            model.intern(c.to_string());
        }
        model.intern(END_OF_WORD.to_owned());
        for (left, right) in merges {
            model.push_merge(left, right);
        }
        model
    }

    fn intern(&mut self, symbol: String) -> SymbolId {
        if let Some(&id) = self.symbol_ids.get(&symbol) {
            return id;
        }
        let id = self.symbols.len() as SymbolId;
        self.symbols.push(symbol.clone());
        self.symbol_ids.insert(symbol, id);
        id
    }

    fn push_merge(&mut self, left: String, right: String) {
        let l = self.intern(left.clone());
        let r = self.intern(right.clone());
        let merged = self.intern(format!("{left}{right}"));
        let rank = self.merges.len();
        self.merge_table.entry((l, r)).or_insert((rank, merged));
        self.merges.push((left, right));
    }

    /// Learned merges in application order.
    pub fn merges(&self) -> &[(String, String)] {
        &self.merges
    }

    /// The merge budget the model was trained with; `merges().len()` can be
    /// smaller when the training text ran out of pairs.
    pub fn merge_count(&self) -> usize {
        self.merge_count
    }

    pub fn alphabet(&self) -> &BTreeSet<char> {
        &self.alphabet
    }

    /// Base characters, the end-of-word symbol, and every merged symbol.
    pub fn vocab(&self) -> BTreeSet<String> {
        self.symbols.iter().cloned().collect()
    }

    fn symbol(&self, s: Sym) -> String {
        match s {
            Sym::Known(id) => self.symbols[id as usize].clone(),
            Sym::Unknown(c) => c.to_string(),
        }
    }

    /// Splits one word into subwords; the last carries [`END_OF_WORD`].
    pub fn segment(&self, word: &str) -> Vec<String> {
        let eow = self.symbol_ids[END_OF_WORD];
        let mut syms: Vec<Sym> = word
            .chars()
            .map(|c| match self.symbol_ids.get(c.encode_utf8(&mut [0; 4]) as &str) {
                Some(&id) if self.alphabet.contains(&c) => Sym::Known(id),
                _ => Sym::Unknown(c),
            })
            .collect();
        syms.push(Sym::Known(eow));

        loop {
            let mut best: Option<(usize, SymbolId, SymbolId, SymbolId)> = None;
            for w in syms.windows(2) {
                if let (Sym::Known(l), Sym::Known(r)) = (w[0], w[1]) {
                    if let Some(&(rank, merged)) = self.merge_table.get(&(l, r)) {
                        if best.is_none_or(|b| rank < b.0) {
                            best = Some((rank, l, r, merged));
                        }
                    }
                }
            }
            let Some((_, l, r, merged)) = best else { break };
            let mut out = Vec::with_capacity(syms.len());
            let mut i = 0;
            while i < syms.len() {
                if i + 1 < syms.len() && syms[i] == Sym::Known(l) && syms[i + 1] == Sym::Known(r) {
                    out.push(Sym::Known(merged));
                    i += 2;
                } else {
                    out.push(syms[i]);
                    i += 1;
                }
            }
            syms = out;
        }

        let mut pieces: Vec<String> = syms.into_iter().map(|s| self.symbol(s)).collect();
        if pieces.len() > 1 && pieces.last().map(String::as_str) == Some(END_OF_WORD) {
            pieces.pop();
            pieces.last_mut().unwrap().push_str(END_OF_WORD);
        }
        pieces
    }

    /// Writes the model: a header with the merge budget, the character
    /// alphabet, then one `left right` merge per line in application order.
    pub fn save(&self, path: &Path) -> Result<()> {
        let alphabet: Vec<String> = self.alphabet.iter().map(|c| c.to_string()).collect();
        let mut lines = vec![
            format!("{FORMAT_HEADER} merge_count={}", self.merge_count),
            format!("#alphabet {}", alphabet.join(" ")),
        ];
        lines.extend(self.merges.iter().map(|(l, r)| format!("{l} {r}")));
        write_lines(path, lines.iter().map(String::as_str))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut lines = text.lines();
        let header = lines.next().unwrap_or_default();
        let merge_count = header
            .strip_prefix(FORMAT_HEADER)
            .and_then(|rest| rest.trim().strip_prefix("merge_count="))
            .and_then(|n| n.parse::<usize>().ok())
            .ok_or_else(|| Error::parse(path, 1, "expected `#bpe-model v1 merge_count=N`"))?;
        let alphabet_line = lines
            .next()
            .and_then(|l| l.strip_prefix("#alphabet"))
            .ok_or_else(|| Error::parse(path, 2, "expected `#alphabet` line"))?;
        let mut alphabet = BTreeSet::new();
        for sym in alphabet_line.split_whitespace() {
            let mut chars = sym.chars();
            match (chars.next(), chars.next()) {
                (Some(c), None) => {
                    alphabet.insert(c);
                }
                _ => return Err(Error::parse(path, 2, format!("bad alphabet entry {sym:?}"))),
            }
        }
        let mut merges = Vec::new();
        for (i, line) in lines.enumerate() {
            let mut parts = line.split(' ');
            match (parts.next(), parts.next(), parts.next()) {
                (Some(l), Some(r), None) if !l.is_empty() && !r.is_empty() => {
                    merges.push((l.to_owned(), r.to_owned()))
                }
                _ => return Err(Error::parse(path, i + 3, "expected `left right`")),
            }
        }
        Ok(BpeModel::from_parts(alphabet, merges, merge_count))
    }
}

/// Learns `merge_count` merges over the pooled word frequencies of all
/// corpora. Ties go to the lexicographically smallest `(left, right)` pair.
pub fn bpe_train(corpora: &[&Corpus], merge_count: usize) -> Result<BpeModel> {
    let mut word_freq: BTreeMap<&str, i64> = BTreeMap::new();
    for corpus in corpora {
        for sentence in &corpus.sentences {
            for token in &sentence.tokens {
                *word_freq.entry(token.as_str()).or_default() += 1;
            }
        }
    }
    if word_freq.is_empty() {
        return Err(Error::NoTrainingText);
    }

    let alphabet: BTreeSet<char> = word_freq.keys().flat_map(|w| w.chars()).collect();
    let mut model = BpeModel::from_parts(alphabet, Vec::new(), merge_count);
    let eow = model.symbol_ids[END_OF_WORD];

    let freqs: Vec<i64> = word_freq.values().copied().collect();
    let mut words: Vec<Vec<SymbolId>> = word_freq
        .keys()
        .map(|w| {
            let mut syms: Vec<SymbolId> = w.chars().map(|c| model.symbol_ids[&c.to_string()]).collect();
            syms.push(eow);
            syms
        })
        .collect();

    let mut pair_counts: HashMap<(SymbolId, SymbolId), i64> = HashMap::new();
    let mut pair_words: HashMap<(SymbolId, SymbolId), HashSet<usize>> = HashMap::new();
    for (wi, syms) in words.iter().enumerate() {
        for p in syms.windows(2) {
            *pair_counts.entry((p[0], p[1])).or_default() += freqs[wi];
            pair_words.entry((p[0], p[1])).or_default().insert(wi);
        }
    }

    for _ in 0..merge_count {
        let best = pair_counts
            .iter()
            .filter(|(_, &n)| n > 0)
            .min_by(|(pa, na), (pb, nb)| {
                nb.cmp(na).then_with(|| {
                    let a = (&model.symbols[pa.0 as usize], &model.symbols[pa.1 as usize]);
                    let b = (&model.symbols[pb.0 as usize], &model.symbols[pb.1 as usize]);
                    a.cmp(&b)
                })
            })
            .map(|(&p, _)| p);
        let Some((l, r)) = best else { break };

        let left = model.symbols[l as usize].clone();
        let right = model.symbols[r as usize].clone();
        model.push_merge(left, right);
        let merged = model.merge_table[&(l, r)].1;

        let mut affected: Vec<usize> = pair_words.remove(&(l, r)).unwrap_or_default().into_iter().collect();
        affected.sort_unstable();
        for wi in affected {
            let syms = &mut words[wi];
            let f = freqs[wi];
            for p in syms.windows(2) {
                *pair_counts.get_mut(&(p[0], p[1])).unwrap() -= f;
            }
            let mut out = Vec::with_capacity(syms.len());
            let mut i = 0;
            while i < syms.len() {
                if i + 1 < syms.len() && syms[i] == l && syms[i + 1] == r {
                    out.push(merged);
                    i += 2;
                } else {
                    out.push(syms[i]);
                    i += 1;
                }
            }
            *syms = out;
            for p in syms.windows(2) {
                *pair_counts.entry((p[0], p[1])).or_default() += f;
                pair_words.entry((p[0], p[1])).or_default().insert(wi);
            }
        }
        pair_counts.remove(&(l, r));
    }
    Ok(model)
}

/// Segments every word of `sentence`; `raw` is carried over untouched.
pub fn bpe_apply(model: &BpeModel, sentence: &Sentence) -> Sentence {
    Sentence {
        raw: sentence.raw.clone(),
        tokens: sentence.tokens.iter().flat_map(|w| model.segment(w)).collect(),
    }
}

/// Encodes a whole corpus. Distinct words are segmented once, in parallel.
pub fn bpe_apply_corpus(model: &BpeModel, corpus: &Corpus) -> Corpus {
    let unique: BTreeSet<&str> = corpus
        .sentences
        .iter()
        .flat_map(|s| s.tokens.iter().map(String::as_str))
        .collect();
    let unique: Vec<&str> = unique.into_iter().collect();
    let segmented = par::map(&unique, |w| model.segment(w));
    let table: HashMap<&str, &Vec<String>> = unique.iter().copied().zip(segmented.iter()).collect();

    let sentences = par::map(&corpus.sentences, |s| Sentence {
        raw: s.raw.clone(),
        tokens: s
            .tokens
            .iter()
            .flat_map(|w| table[w.as_str()].iter().cloned())
            .collect(),
    });
    Corpus {
        language: corpus.language,
        domain: corpus.domain,
        sentences,
        source_path: corpus.source_path.clone(),
        blank_lines: corpus.blank_lines,
    }
}

/// Rejoins subwords into words by stripping end-of-word markers.
pub fn desegment<S: AsRef<str>>(subwords: &[S]) -> Vec<String> {
    let mut words = Vec::new();
    let mut current = String::new();
    for piece in subwords {
        let piece = piece.as_ref();
        match piece.strip_suffix(END_OF_WORD) {
            Some(stem) => {
                current.push_str(stem);
                words.push(std::mem::take(&mut current));
            }
            None => current.push_str(piece),
        }
    }
    if !current.is_empty() {
        words.push(current);
    }
    words
}
