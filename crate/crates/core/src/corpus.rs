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

//! Sentence-per-line monolingual corpora.

use std::fmt;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One of the two languages of a translation pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Language {
    L1,
    L2,
}

impl Language {
    pub fn other(self) -> Language {
        match self {
            Language::L1 => Language::L2,
            Language::L2 => Language::L1,
        }
    }
}

impl fmt::Display for Language {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Language::L1 => f.write_str("L1"),
            Language::L2 => f.write_str("L2"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Domain {
    InDomain,
    OutOfDomain,
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Domain::InDomain => f.write_str("in"),
            Domain::OutOfDomain => f.write_str("out"),
        }
    }
}

/// A line of text and its tokens.
///
/// `raw` is kept exactly as read. `tokens` starts out as the whitespace
/// split of `raw` and is replaced by subwords after BPE encoding.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sentence {
    pub raw: String,
    pub tokens: Vec<String>,
}

impl Sentence {
    pub fn from_raw(raw: impl Into<String>) -> Self {
        let raw = raw.into();
        let tokens = raw.split_whitespace().map(str::to_owned).collect();
        Sentence { raw, tokens }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Tokens joined by single spaces.
    pub fn joined(&self) -> String {
        self.tokens.join(" ")
    }
}

#[derive(Clone, Debug)]
pub struct Corpus {
    pub language: Language,
    pub domain: Domain,
    pub sentences: Vec<Sentence>,
    pub source_path: Option<PathBuf>,
    /// Blank lines skipped while loading.
    pub blank_lines: usize,
}

impl Corpus {
    pub fn new(language: Language, domain: Domain, sentences: Vec<Sentence>) -> Self {
        Corpus {
            language,
            domain,
            sentences,
            source_path: None,
            blank_lines: 0,
        }
    }

    /// Builds a corpus from in-memory lines, dropping blank ones.
    pub fn from_lines<I, S>(language: Language, domain: Domain, lines: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut corpus = Corpus::new(language, domain, Vec::new());
        for line in lines {
            let line = line.into();
            if line.trim().is_empty() {
                corpus.blank_lines += 1;
            } else {
                corpus.sentences.push(Sentence::from_raw(line));
            }
        }
        corpus
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    pub fn token_count(&self) -> usize {
        self.sentences.iter().map(Sentence::len).sum()
    }

    /// Writes the raw lines, one per line, LF-terminated.
    pub fn write_raw(&self, path: &Path) -> Result<()> {
        write_lines(path, self.sentences.iter().map(|s| s.raw.as_str()))
    }

    /// Writes the current tokens joined by spaces, one sentence per line.
    pub fn write_tokens(&self, path: &Path) -> Result<()> {
        let lines: Vec<String> = self.sentences.iter().map(Sentence::joined).collect();
        write_lines(path, lines.iter().map(String::as_str))
    }

    /// Concatenates corpora in order. Tags come from the first argument.
    pub fn concat(language: Language, domain: Domain, parts: &[&Corpus]) -> Corpus {
        let sentences = parts
            .iter()
            .flat_map(|c| c.sentences.iter().cloned())
            .collect();
        Corpus::new(language, domain, sentences)
    }
}

/// Reads a UTF-8 corpus file. Every non-blank line becomes a sentence;
/// invalid UTF-8 is reported with its 1-based line number.
pub fn load_corpus(path: &Path, language: Language, domain: Domain) -> Result<Corpus> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let mut corpus = Corpus::new(language, domain, Vec::new());
    corpus.source_path = Some(path.to_path_buf());

    let body = bytes.strip_suffix(b"\n").unwrap_or(&bytes);
    if bytes.is_empty() {
        return Ok(corpus);
    }
    for (i, line) in body.split(|&b| b == b'\n').enumerate() {
        let line = std::str::from_utf8(line).map_err(|_| Error::InvalidUtf8 {
            path: path.to_path_buf(),
            line: i + 1,
        })?;
        if line.trim().is_empty() {
            corpus.blank_lines += 1;
        } else {
            corpus.sentences.push(Sentence::from_raw(line));
        }
    }
    Ok(corpus)
}

pub(crate) fn write_lines<'a>(path: &Path, lines: impl Iterator<Item = &'a str>) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    for line in lines {
        out.write_all(line.as_bytes())
            .and_then(|_| out.write_all(b"\n"))
            .map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}
