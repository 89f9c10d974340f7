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

//! Corpus BLEU against a straightforward re-implementation on a fixed
//! 20-pair fixture.

use std::collections::HashMap;

use domadapt::{corpus_bleu, Sentence};

const PAIRS: [(&str, &str); 20] = [
    ("the cat sat on the mat", "the cat sat on the mat"),
    ("a cat is on the mat", "there is a cat on the mat"),
    ("the weather is nice today", "the weather is lovely today"),
    ("he reads a book", "he is reading a book"),
    ("we went to the market yesterday", "yesterday we went to the market"),
    ("the patient was given aspirin", "the patient received aspirin"),
    ("dose of 5 mg daily", "a daily dose of 5 mg"),
    ("side effects include nausea", "side effects include nausea and headache"),
    ("store below 25 degrees", "store below 25 degrees celsius"),
    ("do not use after expiry", "do not use after the expiry date"),
    ("the tablets are white", "the tablets are white and round"),
    ("consult your doctor", "consult your doctor or pharmacist"),
    ("keep out of reach of children", "keep out of the reach and sight of children"),
    ("take with food", "take with or without food"),
    ("the study included 300 patients", "the study enrolled 300 patients"),
    ("results were similar in both groups", "results were similar in both groups"),
    ("no interaction was observed", "no interaction has been observed"),
    ("the Committee recommended approval", "the committee recommended approval"),
    ("it is injected under the skin", "it is given as an injection under the skin"),
    ("blood pressure may decrease", "blood pressure may fall"),
];

fn ngrams(tokens: &[&str], n: usize) -> HashMap<Vec<String>, usize> {
    let mut m = HashMap::new();
    if tokens.len() >= n {
        for w in tokens.windows(n) {
            *m.entry(w.iter().map(|s| s.to_string()).collect()).or_insert(0) += 1;
        }
    }
    m
}

fn oracle_bleu(pairs: &[(&str, &str)]) -> f64 {
    let mut matched = [0usize; 4];
    let mut possible = [0usize; 4];
    let (mut hyp_len, mut ref_len) = (0usize, 0usize);
    for (h, r) in pairs {
        let h: Vec<&str> = h.split_whitespace().collect();
        let r: Vec<&str> = r.split_whitespace().collect();
        hyp_len += h.len();
        ref_len += r.len();
        for n in 1..=4 {
            let rc = ngrams(&r, n);
            for (g, c) in ngrams(&h, n) {
                matched[n - 1] += c.min(*rc.get(&g).unwrap_or(&0));
            }
            possible[n - 1] += h.len().saturating_sub(n - 1);
        }
    }
    let log_p: f64 = (0..4).map(|i| (matched[i] as f64 / possible[i] as f64).ln()).sum::<f64>() / 4.0;
    let bp = if hyp_len >= ref_len { 1.0 } else { (1.0 - ref_len as f64 / hyp_len as f64).exp() };
    100.0 * bp * log_p.exp()
}

#[test]
fn matches_reimplementation_on_fixture() {
    let hyps: Vec<Sentence> = PAIRS.iter().map(|(h, _)| Sentence::from_raw(*h)).collect();
    let refs: Vec<Sentence> = PAIRS.iter().map(|(_, r)| Sentence::from_raw(*r)).collect();
    let report = corpus_bleu(&hyps, &refs).unwrap();
    let expected = oracle_bleu(&PAIRS);
    assert!((report.bleu - expected).abs() <= 0.01, "{} vs {expected}", report.bleu);
    assert!(report.brevity_penalty < 1.0);
    assert!(report.to_string().starts_with(&format!("BLEU = {:.2}", report.bleu)));
}

#[test]
fn length_mismatch_is_rejected() {
    let one = vec![Sentence::from_raw("a b")];
    assert!(corpus_bleu(&one, &[]).is_err());
}
