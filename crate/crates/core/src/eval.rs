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

//! Corpus-level 4-gram BLEU and learning-curve logs.

use std::collections::HashMap;
use std::fmt;
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::corpus::Sentence;
use crate::error::{Error, Result};

const MAX_ORDER: usize = 4;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BleuReport {
    /// 0..=100.
    pub bleu: f64,
    pub precisions: [f64; MAX_ORDER],
    pub brevity_penalty: f64,
    pub hyp_length: usize,
    pub ref_length: usize,
}

impl fmt::Display for BleuReport {
    /// `BLEU = 77.88, 100.0/100.0/100.0/100.0 (BP=0.779, ratio=0.800, hyp_len=4, ref_len=5)`
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p: Vec<String> = self.precisions.iter().map(|p| format!("{:.1}", p * 100.0)).collect();
        let ratio = if self.ref_length == 0 { 0.0 } else { self.hyp_length as f64 / self.ref_length as f64 };
        write!(
            f,
            "BLEU = {:.2}, {} (BP={:.3}, ratio={:.3}, hyp_len={}, ref_len={})",
            self.bleu,
            p.join("/"),
            self.brevity_penalty,
            ratio,
            self.hyp_length,
            self.ref_length
        )
    }
}

fn ngram_counts(tokens: &[String], n: usize) -> HashMap<&[String], usize> {
    let mut counts = HashMap::new();
    for gram in tokens.windows(n) {
        *counts.entry(gram).or_insert(0) += 1;
    }
    counts
}

/// Case-sensitive corpus BLEU over whitespace tokens, one reference per
/// hypothesis, no smoothing: any order with zero matches yields 0.
pub fn corpus_bleu(hypotheses: &[Sentence], references: &[Sentence]) -> Result<BleuReport> {
    if hypotheses.len() != references.len() {
        return Err(Error::LengthMismatch { hypotheses: hypotheses.len(), references: references.len() });
    }
    if hypotheses.is_empty() {
        return Err(Error::InvalidParameter("BLEU needs at least one sentence pair".into()));
    }
    let mut matched = [0usize; MAX_ORDER];
    let mut total = [0usize; MAX_ORDER];
    let (mut hyp_len, mut ref_len) = (0, 0);
    for (hyp, reference) in hypotheses.iter().zip(references) {
        hyp_len += hyp.tokens.len();
        ref_len += reference.tokens.len();
        for n in 1..=MAX_ORDER {
            let ref_counts = ngram_counts(&reference.tokens, n);
            for (gram, count) in ngram_counts(&hyp.tokens, n) {
                matched[n - 1] += count.min(ref_counts.get(gram).copied().unwrap_or(0));
                total[n - 1] += count;
            }
        }
    }
    let mut precisions = [0.0; MAX_ORDER];
    for n in 0..MAX_ORDER {
        if total[n] > 0 {
            precisions[n] = matched[n] as f64 / total[n] as f64;
        }
    }
    let brevity_penalty = if hyp_len >= ref_len {
        1.0
    } else {
        (1.0 - ref_len as f64 / hyp_len.max(1) as f64).exp()
    };
    let bleu = if precisions.iter().all(|&p| p > 0.0) {
        let mean_log = precisions.iter().map(|p| p.ln()).sum::<f64>() / MAX_ORDER as f64;
        100.0 * brevity_penalty * mean_log.exp()
    } else {
        0.0
    };
    Ok(BleuReport {
        bleu,
        precisions,
        brevity_penalty,
        hyp_length: hyp_len,
        ref_length: ref_len,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct CurveRecord {
    pub step: u64,
    pub metric: String,
    pub value: f64,
    pub timestamp: String,
}

/// Append-only learning curves, one `<run_id>.tsv` file per run under a
/// directory. Lines are `step<TAB>metric<TAB>value<TAB>timestamp`.
#[derive(Clone, Debug)]
pub struct CurveLog {
    dir: PathBuf,
}

impl CurveLog {
    pub fn new(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        Ok(CurveLog { dir })
    }

    pub fn path(&self, run_id: &str) -> PathBuf {
        self.dir.join(format!("{run_id}.tsv"))
    }

    /// Appends one record. Steps must not decrease within a run.
    pub fn log_curve(&self, run_id: &str, step: u64, metric: &str, value: f64) -> Result<CurveRecord> {
        if metric.contains(['\t', '\n']) {
            return Err(Error::InvalidParameter(format!("metric name {metric:?} contains a tab or newline")));
        }
        let path = self.path(run_id);
        if let Some(last) = self.read(run_id)?.last() {
            if step < last.step {
                return Err(Error::StepRegression { run_id: run_id.to_owned(), step, last: last.step });
            }
        }
        let record = CurveRecord {
            step,
            metric: metric.to_owned(),
            value,
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true),
        };
        let mut file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .map_err(|e| Error::io(&path, e))?;
        writeln!(file, "{}\t{}\t{}\t{}", record.step, record.metric, record.value, record.timestamp)
            .map_err(|e| Error::io(&path, e))?;
        Ok(record)
    }

    /// All records of a run, in append order. A missing run is empty.
    pub fn read(&self, run_id: &str) -> Result<Vec<CurveRecord>> {
        let path = self.path(run_id);
        let text = match fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
            Err(e) => return Err(Error::io(&path, e)),
        };
        text.lines()
            .enumerate()
            .map(|(i, line)| {
                let f: Vec<&str> = line.split('\t').collect();
                let [step, metric, value, ts] = f[..] else {
                    return Err(Error::parse(&path, i + 1, "expected 4 tab-separated fields"));
                };
                Ok(CurveRecord {
                    step: step.parse().map_err(|_| Error::parse(&path, i + 1, "bad step"))?,
                    metric: metric.to_owned(),
                    value: value.parse().map_err(|_| Error::parse(&path, i + 1, "bad value"))?,
                    timestamp: ts.to_owned(),
                })
            })
            .collect()
    }
}

/// Free-function form of [`CurveLog::log_curve`].
pub fn log_curve(dir: &Path, run_id: &str, step: u64, metric: &str, value: f64) -> Result<CurveRecord> {
    CurveLog::new(dir)?.log_curve(run_id, step, metric, value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn sents(lines: &[&str]) -> Vec<Sentence> {
        lines.iter().map(|l| Sentence::from_raw(*l)).collect()
    }

    #[test]
    fn identity_is_100() {
        let r = sents(&["the cat sat on the mat", "a b c d e f"]);
        let rep = corpus_bleu(&r, &r).unwrap();
        assert_relative_eq!(rep.bleu, 100.0, epsilon = 1e-12);
        assert_eq!(rep.brevity_penalty, 1.0);
    }

    #[test]
    fn short_hypothesis_by_hand() {
        let rep = corpus_bleu(&sents(&["a b c d"]), &sents(&["a b c d e"])).unwrap();
        assert_eq!(rep.precisions, [1.0; 4]);
        assert_relative_eq!(rep.brevity_penalty, (-0.25f64).exp(), epsilon = 1e-15);
        assert!((rep.bleu - 77.88).abs() < 0.01);
        assert_eq!(rep.to_string(), "BLEU = 77.88, 100.0/100.0/100.0/100.0 (BP=0.779, ratio=0.800, hyp_len=4, ref_len=5)");
    }

    #[test]
    fn clipping() {
        // "the the the the" vs "the cat": unigram matches clipped to 1
        let rep = corpus_bleu(&sents(&["the the the the"]), &sents(&["the cat"])).unwrap();
        assert_relative_eq!(rep.precisions[0], 0.25, epsilon = 1e-15);
        assert_eq!(rep.bleu, 0.0);
    }

    #[test]
    fn no_four_gram_overlap_is_zero() {
        let rep = corpus_bleu(&sents(&["a b c x e f"]), &sents(&["a b c d e f"])).unwrap();
        assert_eq!(rep.precisions[3], 0.0);
        assert_eq!(rep.bleu, 0.0);
    }

    #[test]
    fn case_sensitive() {
        let r = sents(&["The Cat sat on the mat"]);
        let h = sents(&["the cat sat on the mat"]);
        assert!(corpus_bleu(&h, &r).unwrap().bleu < corpus_bleu(&r, &r).unwrap().bleu);
    }

    #[test]
    fn input_errors() {
        assert!(matches!(corpus_bleu(&sents(&["a"]), &sents(&[])), Err(Error::LengthMismatch { .. })));
        assert!(corpus_bleu(&[], &[]).is_err());
    }

    #[test]
    fn curve_append_and_reopen() {
        let dir = tempfile::tempdir().unwrap();
        let log = CurveLog::new(dir.path()).unwrap();
        log.log_curve("run", 1, "bleu", 10.5).unwrap();
        log.log_curve("run", 2, "bleu", 11.0).unwrap();
        log.log_curve("run", 2, "loss", 0.25).unwrap();
        let recs = log.read("run").unwrap();
        assert_eq!(recs.iter().map(|r| r.step).collect::<Vec<_>>(), vec![1, 2, 2]);
        assert_eq!(recs[2].metric, "loss");

        let reopened = CurveLog::new(dir.path()).unwrap();
        reopened.log_curve("run", 5, "bleu", 12.0).unwrap();
        assert_eq!(reopened.read("run").unwrap().len(), 4);
        assert!(matches!(
            reopened.log_curve("run", 4, "bleu", 1.0),
            Err(Error::StepRegression { step: 4, last: 5, .. })
        ));
        // other runs are independent
        reopened.log_curve("other", 0, "bleu", 1.0).unwrap();
    }

    proptest! {
        #[test]
        fn bounds_and_permutation_invariance(pairs in proptest::collection::vec(("[abc]( [abc]){0,7}", "[abc]( [abc]){0,7}"), 1..12),
                                             rot in 0usize..12) {
            let h: Vec<Sentence> = pairs.iter().map(|(a, _)| Sentence::from_raw(a.as_str())).collect();
            let r: Vec<Sentence> = pairs.iter().map(|(_, b)| Sentence::from_raw(b.as_str())).collect();
            let rep = corpus_bleu(&h, &r).unwrap();
            prop_assert!((0.0..=100.0 + 1e-9).contains(&rep.bleu));
            prop_assert!(rep.brevity_penalty > 0.0 && rep.brevity_penalty <= 1.0);
            let k = rot % h.len();
            let (mut h2, mut r2) = (h.clone(), r.clone());
            h2.rotate_left(k);
            r2.rotate_left(k);
            let rep2 = corpus_bleu(&h2, &r2).unwrap();
            prop_assert!((rep.bleu - rep2.bleu).abs() < 1e-9);
        }
    }
}
