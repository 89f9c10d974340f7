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

//! Interpolated n-gram language models over (subword) tokens.
//!
//! Each order `k` contributes an additively smoothed estimate
//!
//! ```text
//! p_k(w | h) = (c(h w) + alpha) / (c(h) + alpha * |V|)
//! ```
//!
//! where `h` is the last `k - 1` context tokens and `V` is the event space:
//! the training vocabulary plus `</s>` and `<unk>`. The model probability is
//! the fixed-weight mixture `sum_k lambda_k * p_k(w | h)`. Every component is
//! normalized over `V`, so the mixture is too, and every probability is
//! strictly positive.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Sentence};
use crate::error::{Error, Result};

pub const UNK: &str = "<unk>";
pub const BOS: &str = "<s>";
pub const EOS: &str = "</s>";

const UNK_ID: u32 = 0;
const BOS_ID: u32 = 1;
const EOS_ID: u32 = 2;
const FORMAT_HEADER: &str = "\\lm-v1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LmParams {
    pub order: usize,
    pub alpha: f64,
    pub weights: Vec<f64>,
    /// Map tokens seen exactly once in training to `<unk>`.
    #[serde(default)]
    pub unk_singletons: bool,
}

impl Default for LmParams {
    fn default() -> Self {
        LmParams::uniform(4, 0.1)
    }
}

impl LmParams {
    /// Equal interpolation weights across orders `1..=order`.
    pub fn uniform(order: usize, alpha: f64) -> Self {
        let w = if order == 0 { 0.0 } else { 1.0 / order as f64 };
        LmParams {
            order,
            alpha,
            weights: vec![w; order],
            unk_singletons: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.order == 0 {
            return Err(Error::InvalidParameter("order must be at least 1".into()));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!("alpha must be > 0, got {}", self.alpha)));
        }
        if self.weights.len() != self.order {
            return Err(Error::InvalidParameter(format!(
                "{} interpolation weights for order {}",
                self.weights.len(),
                self.order
            )));
        }
        if self.weights.iter().any(|w| !(*w >= 0.0 && w.is_finite())) {
            return Err(Error::InvalidParameter("interpolation weights must be >= 0".into()));
        }
        let sum: f64 = self.weights.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!("interpolation weights sum to {sum}, not 1")));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct NGramLm {
    params: LmParams,
    // id -> token; 0..3 are <unk>, <s>, </s>, the rest sorted training words
    tokens: Vec<String>,
    ids: HashMap<String, u32>,
    // counts[k - 1]: k-gram counts; contexts[k - 1]: totals for (k-1)-token contexts
    counts: Vec<HashMap<Vec<u32>, u64>>,
    contexts: Vec<HashMap<Vec<u32>, u64>>,
}

impl NGramLm {
    fn with_vocab(params: LmParams, words: impl IntoIterator<Item = String>) -> Self {
        let mut tokens = vec![UNK.to_owned(), BOS.to_owned(), EOS.to_owned()];
        let mut words: Vec<String> = words
            .into_iter()
            .filter(|w| w != UNK && w != BOS && w != EOS)
            .collect();
        words.sort();
        words.dedup();
        tokens.extend(words);
        let ids = tokens.iter().enumerate().map(|(i, t)| (t.clone(), i as u32)).collect();
        let order = params.order;
        NGramLm {
            params,
            tokens,
            ids,
            counts: vec![HashMap::new(); order],
            contexts: vec![HashMap::new(); order],
        }
    }

    pub fn params(&self) -> &LmParams {
        &self.params
    }

    pub fn order(&self) -> usize {
        self.params.order
    }

    /// Size of the predicted event space: vocabulary, `</s>` and `<unk>`.
    pub fn event_space_size(&self) -> usize {
        self.tokens.len() - 1
    }

    /// Every token that can be predicted, including `</s>` and `<unk>`.
    pub fn event_space(&self) -> impl Iterator<Item = &str> {
        self.tokens
            .iter()
            .enumerate()
            .filter(|(i, _)| *i as u32 != BOS_ID)
            .map(|(_, t)| t.as_str())
    }

    /// Training vocabulary without reserved symbols.
    pub fn vocab(&self) -> &[String] {
        &self.tokens[3..]
    }

    fn id(&self, token: &str) -> u32 {
        match self.ids.get(token) {
            Some(&id) if id != BOS_ID || token == BOS => id,
            _ => UNK_ID,
        }
    }

    /// Raw count of an n-gram (1 ≤ length ≤ order).
    pub fn count(&self, ngram: &[&str]) -> u64 {
        if ngram.is_empty() || ngram.len() > self.order() {
            return 0;
        }
        let key: Vec<u32> = ngram.iter().map(|t| self.id(t)).collect();
        self.counts[ngram.len() - 1].get(&key).copied().unwrap_or(0)
    }

    /// How often `context` was followed by any token (length < order).
    pub fn context_count(&self, context: &[&str]) -> u64 {
        if context.len() >= self.order() {
            return 0;
        }
        let key: Vec<u32> = context.iter().map(|t| self.id(t)).collect();
        self.contexts[context.len()].get(&key).copied().unwrap_or(0)
    }

    /// `gram` is a full window ending in the predicted word; order `k`
    /// reads its last `k` ids.
    fn component(&self, k: usize, gram: &[u32]) -> f64 {
        let key = &gram[gram.len() - k..];
        let v = self.event_space_size() as f64;
        let alpha = self.params.alpha;
        let total = self.contexts[k - 1].get(&key[..k - 1]).copied().unwrap_or(0) as f64;
        let c = self.counts[k - 1].get(key).copied().unwrap_or(0) as f64;
        (c + alpha) / (total + alpha * v)
    }

    fn prob_gram(&self, gram: &[u32]) -> f64 {
        (1..=self.order())
            .zip(&self.params.weights)
            .filter(|(_, w)| **w > 0.0)
            .map(|(k, w)| w * self.component(k, gram))
            .sum()
    }

    fn history(&self, context: &[&str]) -> Vec<u32> {
        let n = self.order() - 1;
        let mut h = vec![BOS_ID; n];
        let tail = &context[context.len().saturating_sub(n)..];
        let start = n - tail.len();
        for (slot, tok) in h[start..].iter_mut().zip(tail) {
            *slot = self.id(tok);
        }
        h
    }

    /// `p(word | context)`. Short contexts are left-padded with `<s>`;
    /// out-of-vocabulary tokens are read as `<unk>`.
    pub fn prob(&self, context: &[&str], word: &str) -> f64 {
        let word = match self.id(word) {
            BOS_ID => UNK_ID,
            id => id,
        };
        let mut gram = self.history(context);
        gram.push(word);
        self.prob_gram(&gram)
    }

    /// Probability under a single order's smoothed estimate, before mixing.
    pub fn component_prob(&self, k: usize, context: &[&str], word: &str) -> f64 {
        assert!(k >= 1 && k <= self.order(), "order {k} out of range");
        let word = match self.id(word) {
            BOS_ID => UNK_ID,
            id => id,
        };
        let mut gram = self.history(context);
        gram.push(word);
        self.component(k, &gram)
    }

    /// Per-token cross-entropy in nats: `-(1/T) * sum ln p(w_t | h_t)` with
    /// `T` the token count plus one for `</s>`.
    pub fn cross_entropy(&self, sentence: &Sentence) -> Result<f64> {
        if sentence.tokens.is_empty() {
            return Err(Error::EmptySentence);
        }
        let n = self.order() - 1;
        let mut padded = vec![BOS_ID; n];
        padded.extend(sentence.tokens.iter().map(|t| self.id(t)).map(|id| if id == BOS_ID { UNK_ID } else { id }));
        padded.push(EOS_ID);
        let mut log_sum = 0.0;
        for t in n..padded.len() {
            log_sum += self.prob_gram(&padded[t - n..=t]).ln();
        }
        let steps = (padded.len() - n) as f64;
        Ok(-log_sum / steps)
    }

    /// Serializes to a versioned ARPA-like text format: a header with the
    /// hyperparameters, then one block per order with `ngram<TAB>count`
    /// lines sorted lexicographically.
    pub fn to_text(&self) -> String {
        let p = &self.params;
        let mut out = String::new();
        let weights: Vec<String> = p.weights.iter().map(|w| w.to_string()).collect();
        let _ = writeln!(out, "{FORMAT_HEADER}");
        let _ = writeln!(out, "order={}", p.order);
        let _ = writeln!(out, "alpha={}", p.alpha);
        let _ = writeln!(out, "weights={}", weights.join(" "));
        let _ = writeln!(out, "unk_singletons={}", p.unk_singletons);
        for (k, table) in self.counts.iter().enumerate() {
            let _ = writeln!(out, "\n\\{}-grams:", k + 1);
            let sorted: BTreeMap<String, u64> = table
                .iter()
                .map(|(key, &c)| {
                    let words: Vec<&str> = key.iter().map(|&id| self.tokens[id as usize].as_str()).collect();
                    (words.join(" "), c)
                })
                .collect();
            for (ngram, c) in sorted {
                let _ = writeln!(out, "{ngram}\t{c}");
            }
        }
        let _ = writeln!(out, "\n\\end\\");
        out
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text).map_err(|(line, msg)| Error::parse(path, line, msg))
    }

    fn from_text(text: &str) -> std::result::Result<Self, (usize, String)> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        fn expect<'a>(
            lines: &mut impl Iterator<Item = (usize, &'a str)>,
            prefix: &str,
        ) -> std::result::Result<(usize, String), (usize, String)> {
            match lines.next() {
                Some((n, l)) => match l.strip_prefix(prefix) {
                    Some(rest) => Ok((n, rest.to_owned())),
                    None => Err((n, format!("expected `{prefix}`"))),
                },
                None => Err((0, format!("unexpected end of file, expected `{prefix}`"))),
            }
        }
        let bad = |n: usize, what: &str| (n, format!("invalid {what}"));

        expect(&mut lines, FORMAT_HEADER)?;
        let (n, order) = expect(&mut lines, "order=")?;
        let order: usize = order.parse().map_err(|_| bad(n, "order"))?;
        let (n, alpha) = expect(&mut lines, "alpha=")?;
        let alpha: f64 = alpha.parse().map_err(|_| bad(n, "alpha"))?;
        let (n, weights) = expect(&mut lines, "weights=")?;
        let weights: Vec<f64> = weights
            .split(' ')
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| bad(n, "weights"))?;
        let (n, unk) = expect(&mut lines, "unk_singletons=")?;
        let unk_singletons: bool = unk.parse().map_err(|_| bad(n, "unk_singletons"))?;
        let params = LmParams { order, alpha, weights, unk_singletons };
        params.validate().map_err(|e| (n, e.to_string()))?;

        let mut blocks: Vec<Vec<(Vec<String>, u64)>> = Vec::with_capacity(order);
        expect(&mut lines, "")?;
        for k in 1..=order {
            expect(&mut lines, &format!("\\{k}-grams:"))?;
            let mut entries = Vec::new();
            loop {
                let Some((n, line)) = lines.next() else {
                    return Err((0, "unexpected end of file".into()));
                };
                if line.is_empty() {
                    break;
                }
                let (gram, count) = line.split_once('\t').ok_or_else(|| bad(n, "n-gram line"))?;
                let words: Vec<String> = gram.split(' ').map(str::to_owned).collect();
                if words.len() != k {
                    return Err(bad(n, "n-gram length"));
                }
                let count: u64 = count.parse().map_err(|_| bad(n, "count"))?;
                entries.push((words, count));
            }
            blocks.push(entries);
        }
        match lines.next() {
            Some((_, "\\end\\")) => {}
            Some((n, _)) => return Err((n, "expected `\\end\\`".into())),
            None => return Err((0, "missing `\\end\\`".into())),
        }

        let words: Vec<String> = blocks[0].iter().map(|(w, _)| w[0].clone()).collect();
        let mut lm = NGramLm::with_vocab(params, words);
        for (k, entries) in blocks.into_iter().enumerate() {
            for (words, count) in entries {
                let key: Vec<u32> = words.iter().map(|w| lm.ids.get(w.as_str()).copied().unwrap_or(UNK_ID)).collect();
                *lm.contexts[k].entry(key[..k].to_vec()).or_default() += count;
                *lm.counts[k].entry(key).or_default() += count;
            }
        }
        Ok(lm)
    }
}

/// Counts n-grams over the concatenation of `corpora`. Each sentence is
/// padded with `order - 1` `<s>` symbols and terminated by `</s>`.
pub fn train_lm(corpora: &[&Corpus], params: &LmParams) -> Result<NGramLm> {
    params.validate()?;
    let mut freq: HashMap<&str, u64> = HashMap::new();
    for corpus in corpora {
        for s in &corpus.sentences {
            for t in &s.tokens {
                *freq.entry(t.as_str()).or_default() += 1;
            }
        }
    }
    if freq.is_empty() {
        return Err(Error::NoTrainingText);
    }
    let words = freq
        .iter()
        .filter(|(_, &c)| !(params.unk_singletons && c == 1))
        .map(|(w, _)| (*w).to_owned());
    let mut lm = NGramLm::with_vocab(params.clone(), words);

    let n = params.order - 1;
    let mut padded = Vec::new();
    for corpus in corpora {
        for s in &corpus.sentences {
            if s.tokens.is_empty() {
                continue;
            }
            padded.clear();
            padded.resize(n, BOS_ID);
            padded.extend(s.tokens.iter().map(|t| lm.id(t)).map(|id| if id == BOS_ID { UNK_ID } else { id }));
            padded.push(EOS_ID);
            for t in n..padded.len() {
                for k in 1..=params.order {
                    let gram = &padded[t + 1 - k..=t];
                    *lm.counts[k - 1].entry(gram.to_vec()).or_default() += 1;
                    *lm.contexts[k - 1].entry(gram[..k - 1].to_vec()).or_default() += 1;
                }
            }
        }
    }
    Ok(lm)
}

/// Free-function form of [`NGramLm::cross_entropy`].
pub fn cross_entropy(model: &NGramLm, sentence: &Sentence) -> Result<f64> {
    model.cross_entropy(sentence)
}
