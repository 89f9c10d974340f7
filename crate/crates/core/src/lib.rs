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

//! Corpus-side domain adaptation for unsupervised machine translation.
//!
//! The crate decides which adaptation methods fit the monolingual data at
//! hand and prepares the data they need:
//!
//! * [`planner`] classifies which of the four corpora (two languages, in- and
//!   out-of-domain) exist and maps the scenario to batch weighting and/or
//!   fine tuning.
//! * [`scheduler`] produces the deterministic batch-weighted stream that
//!   interleaves out-of-domain and in-domain mini-batches.
//! * [`selection`] ranks out-of-domain sentences by cross-entropy difference
//!   under in-domain and out-of-domain [`ngram`] models, with the in-domain
//!   model trained on [`backtranslate`]d pseudo in-domain text.
//! * [`corpus`] and [`bpe`] load and subword-encode the data; [`eval`]
//!   computes corpus BLEU.
//! * [`pipeline`] runs the whole recipe for a manifest.
//!
//! With the default `parallel` feature the per-sentence work (subword
//! encoding, scoring, dictionary translation) runs on rayon.

pub mod backtranslate;
pub mod bpe;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod ngram;
mod par;
pub mod pipeline;
pub mod planner;
pub mod scheduler;
pub mod selection;

pub use error::{Error, Result};
pub use par::is_parallel;

pub use backtranslate::{back_translate, BilingualLexicon, Translator, TranslatorSpec};
pub use bpe::{bpe_apply, bpe_apply_corpus, bpe_train, desegment, BpeModel};
pub use corpus::{load_corpus, Corpus, Domain, Language, Sentence};
pub use eval::{corpus_bleu, BleuReport, CurveLog};
pub use ngram::{cross_entropy, train_lm, LmParams, NGramLm};
pub use pipeline::{run_pipeline, PipelineConfig, PipelineReport};
pub use planner::{
    assemble_finetune_corpora, classify_scenario, plan_methods, AdaptationPlan, CorpusManifest, Method, Scenario,
    ScenarioLabel,
};
pub use scheduler::{build_stream, r_out, Batch, BatchWeightingSchedule};
pub use selection::{ced_score, select_lowest_k, size_matched_subsample, ScoredSentence};
