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

//! Batch weighting: a deterministic stream that interleaves out-of-domain
//! and in-domain mini-batches at a fixed `n_out : n_in` ratio.
//!
//! Every cycle of `n_in + n_out` batches starts with `n_out` out-of-domain
//! batches followed by `n_in` in-domain batches. Each side walks a seeded
//! permutation of its corpus and reshuffles when the pass is exhausted, so a
//! small in-domain corpus is revisited while the out-of-domain corpus is
//! consumed at full weight.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{write_lines, Corpus, Domain, Sentence};
use crate::error::{Error, Result};

pub const DEFAULT_BATCH_SIZE: usize = 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BatchWeightingSchedule {
    pub n_in: usize,
    pub n_out: usize,
    pub batch_size: usize,
}

impl Default for BatchWeightingSchedule {
    /// The out-of-domain-heavy setting, `n_in = 1`, `n_out = 30`.
    fn default() -> Self {
        BatchWeightingSchedule::modified()
    }
}

impl BatchWeightingSchedule {
    pub fn new(n_in: usize, n_out: usize, batch_size: usize) -> Result<Self> {
        let s = BatchWeightingSchedule { n_in, n_out, batch_size };
        s.validate()?;
        Ok(s)
    }

    /// `n_in = 1`, `n_out = 30`: favours the large out-of-domain side.
    pub fn modified() -> Self {
        BatchWeightingSchedule { n_in: 1, n_out: 30, batch_size: DEFAULT_BATCH_SIZE }
    }

    /// `n_in = 10`, `n_out = 1`: the in-domain-heavy supervised setting.
    pub fn original() -> Self {
        BatchWeightingSchedule { n_in: 10, n_out: 1, batch_size: DEFAULT_BATCH_SIZE }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_in + self.n_out == 0 {
            return Err(Error::InvalidParameter("n_in and n_out cannot both be zero".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidParameter("batch_size must be at least 1".into()));
        }
        Ok(())
    }

    pub fn cycle_len(&self) -> usize {
        self.n_in + self.n_out
    }

    /// Origin of the batch at `ordinal`.
    pub fn origin_at(&self, ordinal: usize) -> Domain {
        if ordinal % self.cycle_len() < self.n_out {
            Domain::OutOfDomain
        } else {
            Domain::InDomain
        }
    }

    /// Out-of-domain share `n_out / (n_out + n_in)`.
    pub fn r_out(&self) -> Result<f64> {
        if self.cycle_len() == 0 {
            return Err(Error::InvalidParameter("n_in and n_out cannot both be zero".into()));
        }
        Ok(self.n_out as f64 / self.cycle_len() as f64)
    }
}

/// Free-function form of [`BatchWeightingSchedule::r_out`].
pub fn r_out(schedule: &BatchWeightingSchedule) -> Result<f64> {
    schedule.r_out()
}

#[derive(Clone, Debug, PartialEq)]
pub struct Batch<'a> {
    pub ordinal: usize,
    pub origin: Domain,
    /// Positions in the origin corpus.
    pub indices: Vec<usize>,
    pub sentences: Vec<&'a Sentence>,
}

/// One side's seeded epoch-by-epoch permutation.
#[derive(Debug)]
struct Cycler {
    len: usize,
    order: Vec<usize>,
    pos: usize,
    rng: ChaCha8Rng,
}

impl Cycler {
    fn new(len: usize, seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Cycler { len, order: Vec::new(), pos: 0, rng }
    }

    /// Up to `n` indices; never crosses a pass boundary.
    fn draw(&mut self, n: usize) -> Vec<usize> {
        if self.pos == self.order.len() {
            self.order = (0..self.len).collect();
            self.order.shuffle(&mut self.rng);
            self.pos = 0;
        }
        let end = (self.pos + n).min(self.order.len());
        let out = self.order[self.pos..end].to_vec();
        self.pos = end;
        out
    }
}

/// Lazily generated batch stream. Single consumer.
#[derive(Debug)]
pub struct BatchStream<'a> {
    schedule: BatchWeightingSchedule,
    in_corpus: &'a Corpus,
    out_corpus: &'a Corpus,
    in_side: Cycler,
    out_side: Cycler,
    next: usize,
    total: usize,
}

impl<'a> Iterator for BatchStream<'a> {
    type Item = Batch<'a>;

    fn next(&mut self) -> Option<Batch<'a>> {
        if self.next >= self.total {
            return None;
        }
        let ordinal = self.next;
        self.next += 1;
        let origin = self.schedule.origin_at(ordinal);
        let (side, corpus) = match origin {
            Domain::InDomain => (&mut self.in_side, self.in_corpus),
            Domain::OutOfDomain => (&mut self.out_side, self.out_corpus),
        };
        let indices = side.draw(self.schedule.batch_size);
        let sentences = indices.iter().map(|&i| &corpus.sentences[i]).collect();
        Some(Batch { ordinal, origin, indices, sentences })
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = self.total - self.next;
        (left, Some(left))
    }
}

impl ExactSizeIterator for BatchStream<'_> {}

/// Builds the first `total_batches` batches of the weighted stream.
pub fn build_stream<'a>(
    schedule: &BatchWeightingSchedule,
    in_corpus: &'a Corpus,
    out_corpus: &'a Corpus,
    total_batches: usize,
    seed: u64,
) -> Result<BatchStream<'a>> {
    schedule.validate()?;
    if schedule.n_in > 0 && in_corpus.is_empty() {
        return Err(Error::RequiredCorpusEmpty("in-domain"));
    }
    if schedule.n_out > 0 && out_corpus.is_empty() {
        return Err(Error::RequiredCorpusEmpty("out-of-domain"));
    }
    Ok(BatchStream {
        schedule: *schedule,
        in_corpus,
        out_corpus,
        in_side: Cycler::new(in_corpus.len(), seed, 0),
        out_side: Cycler::new(out_corpus.len(), seed, 1),
        next: 0,
        total: total_batches,
    })
}

/// One line per batch: `ordinal<TAB>origin<TAB>i,j,k` with origin `in`/`out`.
pub fn manifest_line(batch: &Batch<'_>) -> String {
    let idx: Vec<String> = batch.indices.iter().map(usize::to_string).collect();
    format!("{}\t{}\t{}", batch.ordinal, batch.origin, idx.join(","))
}

pub fn write_stream_manifest<'a>(path: &Path, stream: impl Iterator<Item = Batch<'a>>) -> Result<usize> {
    let lines: Vec<String> = stream.map(|b| manifest_line(&b)).collect();
    write_lines(path, lines.iter().map(String::as_str))?;
    Ok(lines.len())
}
