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

use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("{path}: line {line} is not valid UTF-8")]
    InvalidUtf8 { path: PathBuf, line: usize },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("no training text")]
    NoTrainingText,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("cannot score an empty sentence")]
    EmptySentence,

    #[error("corpus is empty")]
    EmptyCorpus,

    #[error("corpus {0} is required but empty")]
    RequiredCorpusEmpty(&'static str),

    #[error("lexicon not found: {0}")]
    MissingLexicon(PathBuf),

    #[error("translator precondition: {0}")]
    WrongCorpusTag(String),

    #[error("external translator failed: {0}")]
    ExternalCommand(String),

    #[error("external translator returned {found} lines for a {expected}-line corpus")]
    LineCountMismatch { expected: usize, found: usize },

    #[error("untrainable manifest: {0} has no corpus")]
    Untrainable(&'static str),

    #[error("missing corpus for {0}")]
    MissingCorpus(&'static str),

    #[error("scenario {0} needs a selected pseudo in-domain corpus")]
    MissingSelection(&'static str),

    #[error("plan for scenario {0} does not include fine tuning")]
    NoFineTuning(&'static str),

    #[error("hypothesis/reference count mismatch: {hypotheses} vs {references}")]
    LengthMismatch {
        hypotheses: usize,
        references: usize,
    },

    #[error("run {run_id}: step {step} precedes last logged step {last}")]
    StepRegression {
        run_id: String,
        step: u64,
        last: u64,
    },

    #[error("config: {0}")]
    Config(String),

    #[error("[{stage}] {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }

    /// Stage name for errors raised inside the pipeline runner.
    pub fn stage(&self) -> Option<&'static str> {
        match self {
            Error::Stage { stage, .. } => Some(stage),
            _ => None,
        }
    }
}
