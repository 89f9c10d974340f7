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

//! Synthetic two-domain corpora shared by the integration tests.

#![allow(dead_code)]

use std::collections::{BTreeMap, HashMap};

use domadapt::{BilingualLexicon, Corpus, Domain, Language, Sentence};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Token distribution for one domain: `(token, weight)` pairs.
pub struct Vocab {
    pub tokens: Vec<(String, f64)>,
}

impl Vocab {
    pub fn uniform(tokens: Vec<String>) -> Self {
        Vocab { tokens: tokens.into_iter().map(|t| (t, 1.0)).collect() }
    }

    /// Zipf weights `1 / (rank + 1)` in the given token order.
    pub fn zipf(tokens: Vec<String>) -> Self {
        Vocab { tokens: tokens.into_iter().enumerate().map(|(i, t)| (t, 1.0 / (i + 1) as f64)).collect() }
    }

    pub fn sample(&self, rng: &mut ChaCha8Rng) -> &str {
        let total: f64 = self.tokens.iter().map(|(_, w)| w).sum();
        let mut x = rng.gen::<f64>() * total;
        for (t, w) in &self.tokens {
            if x < *w {
                return t;
            }
            x -= w;
        }
        &self.tokens.last().unwrap().0
    }

    pub fn sentence(&self, rng: &mut ChaCha8Rng, min: usize, max: usize) -> String {
        let n = rng.gen_range(min..=max);
        (0..n).map(|_| self.sample(rng)).collect::<Vec<_>>().join(" ")
    }
}

pub fn words(prefix: &str, range: std::ops::Range<usize>) -> Vec<String> {
    range.map(|i| format!("{prefix}{}", letters(i))).collect()
}

/// Letter-only suffixes so that no two domains share characters by accident
/// beyond the prefix.
fn letters(mut i: usize) -> String {
    let mut s = String::new();
    loop {
        s.push((b'a' + (i % 26) as u8) as char);
        i /= 26;
        if i == 0 {
            break;
        }
    }
    s
}

/// Inclusive token-count range of generated sentences.
pub const SENTENCE_LENGTH: (usize, usize) = (4, 14);

/// An IO-scenario dataset: L2 in-domain text, a lexicon into L1, and an L1
/// out-of-domain corpus that mixes in-domain-like and out-of-domain-like
/// sentences with known labels.
pub struct IoDataset {
    pub l2_in: Corpus,
    pub l1_out: Corpus,
    /// `true` where the L1 out-of-domain sentence was drawn from the
    /// in-domain distribution.
    pub is_in_domain: Vec<bool>,
    pub lexicon: BilingualLexicon,
}

impl IoDataset {
    pub fn in_domain_count(&self) -> usize {
        self.is_in_domain.iter().filter(|b| **b).count()
    }
}

/// `in_l1` and `out_l1` are the L1 distributions for the two domains. The
/// first `translated` in-domain tokens get a distinct L2 form (`x` prefix)
/// and a lexicon entry; the rest are spelled the same in both languages and
/// are reached through the lexicon's identity fallback.
pub fn io_dataset(
    in_l1: &Vocab,
    out_l1: &Vocab,
    translated: usize,
    l2_in_size: usize,
    l1_out_in_like: usize,
    l1_out_out_like: usize,
    seed: u64,
) -> IoDataset {
    let (lo, hi) = SENTENCE_LENGTH;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut to_l2: HashMap<String, String> = HashMap::new();
    let mut entries = HashMap::new();
    for (t, _) in in_l1.tokens.iter().take(translated) {
        let l2 = format!("x{t}");
        entries.insert(l2.clone(), t.clone());
        to_l2.insert(t.clone(), l2);
    }
    let l2_lines: Vec<String> = (0..l2_in_size)
        .map(|_| {
            in_l1
                .sentence(&mut rng, lo, hi)
                .split(' ')
                .map(|w| to_l2.get(w).cloned().unwrap_or_else(|| w.to_owned()))
                .collect::<Vec<_>>()
                .join(" ")
        })
        .collect();

    let mut mixed: Vec<(String, bool)> = Vec::with_capacity(l1_out_in_like + l1_out_out_like);
    for _ in 0..l1_out_in_like {
        mixed.push((in_l1.sentence(&mut rng, lo, hi), true));
    }
    for _ in 0..l1_out_out_like {
        mixed.push((out_l1.sentence(&mut rng, lo, hi), false));
    }
    use rand::seq::SliceRandom;
    mixed.shuffle(&mut rng);

    IoDataset {
        l2_in: Corpus::from_lines(Language::L2, Domain::InDomain, l2_lines),
        l1_out: Corpus::from_lines(Language::L1, Domain::OutOfDomain, mixed.iter().map(|(s, _)| s.clone())),
        is_in_domain: mixed.iter().map(|(_, b)| *b).collect(),
        lexicon: BilingualLexicon::new(entries),
    }
}

/// Direct Lidstone-interpolated n-gram probability from raw string counts.
/// Shares nothing with the library's counting or lookup code.
pub struct BruteForceLm {
    order: usize,
    alpha: f64,
    weights: Vec<f64>,
    grams: BTreeMap<Vec<String>, f64>,
    events: Vec<String>,
}

impl BruteForceLm {
    pub fn train(sentences: &[Vec<String>], order: usize, alpha: f64, weights: Vec<f64>) -> Self {
        let mut grams = BTreeMap::new();
        let mut vocab: Vec<String> = sentences.iter().flatten().cloned().collect();
        vocab.sort();
        vocab.dedup();
        for s in sentences {
            let padded = Self::pad(s, order);
            for end in (order - 1)..padded.len() {
                for k in 1..=order {
                    *grams.entry(padded[end + 1 - k..=end].to_vec()).or_insert(0.0) += 1.0;
                }
            }
        }
        let mut events = vocab;
        events.push("</s>".into());
        events.push("<unk>".into());
        BruteForceLm { order, alpha, weights, grams, events }
    }

    fn pad(s: &[String], order: usize) -> Vec<String> {
        let mut v = vec!["<s>".to_owned(); order - 1];
        v.extend(s.iter().cloned());
        v.push("</s>".into());
        v
    }

    fn count(&self, g: &[String]) -> f64 {
        self.grams.get(g).copied().unwrap_or(0.0)
    }

    pub fn prob(&self, history: &[String], w: &str) -> f64 {
        let v = self.events.len() as f64;
        let w = if self.events.iter().any(|e| e == w) { w.to_owned() } else { "<unk>".to_owned() };
        let mut p = 0.0;
        for k in 1..=self.order {
            let h = &history[history.len() + 1 - k..];
            // context total: sum of counts of every k-gram starting with h
            let total: f64 = self
                .grams
                .iter()
                .filter(|(g, _)| g.len() == k && g[..k - 1] == *h)
                .map(|(_, c)| c)
                .sum();
            let mut g = h.to_vec();
            g.push(w.clone());
            p += self.weights[k - 1] * (self.count(&g) + self.alpha) / (total + self.alpha * v);
        }
        p
    }

    pub fn cross_entropy(&self, s: &[String]) -> f64 {
        let known = |t: &String| if self.events.contains(t) { t.clone() } else { "<unk>".to_owned() };
        let mapped: Vec<String> = s.iter().map(known).collect();
        let padded = Self::pad(&mapped, self.order);
        let n = self.order - 1;
        let mut sum = 0.0;
        for t in n..padded.len() {
            sum += self.prob(&padded[t - n..t], &padded[t]).ln();
        }
        -sum / (padded.len() - n) as f64
    }
}

pub fn tokens(c: &Corpus) -> Vec<Vec<String>> {
    c.sentences.iter().map(|s| s.tokens.clone()).collect()
}

pub fn sentence(tokens: &[String]) -> Sentence {
    Sentence::from_raw(tokens.join(" "))
}
