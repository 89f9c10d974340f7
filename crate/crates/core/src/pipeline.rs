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

//! End-to-end runner: classify, plan, encode, select, assemble, schedule.
//!
//! Every artifact lands under the configured output directory, and
//! `artifacts.sha256` lists a SHA-256 per artifact so that reruns can be
//! compared byte for byte.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::backtranslate::{back_translate, TranslatorSpec};
use crate::bpe::{bpe_apply_corpus, bpe_train, desegment, DEFAULT_MERGE_COUNT};
use crate::corpus::{write_lines, Corpus, Domain, Language};
use crate::error::{Error, Result};
use crate::ngram::{train_lm, LmParams, NGramLm};
use crate::planner::{
    assemble_finetune_corpora, classify_scenario, plan_methods, AdaptationPlan, CorpusManifest, CorpusSet,
    CorpusSource, Method, Scenario, SelectionRecipe,
};
use crate::scheduler::{build_stream, write_stream_manifest, BatchWeightingSchedule, DEFAULT_BATCH_SIZE};
use crate::selection::{ced_score, select_lowest_k, size_matched_subsample, write_scored, write_selection, ScoredSentence};

pub const HASH_MANIFEST: &str = "artifacts.sha256";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BpeConfig {
    pub merge_count: usize,
}

impl Default for BpeConfig {
    fn default() -> Self {
        BpeConfig { merge_count: DEFAULT_MERGE_COUNT }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LmConfig {
    pub order: usize,
    pub alpha: f64,
    /// Uniform over orders when absent.
    pub weights: Option<Vec<f64>>,
    pub unk_singletons: bool,
}

impl Default for LmConfig {
    fn default() -> Self {
        let p = LmParams::default();
        LmConfig { order: p.order, alpha: p.alpha, weights: None, unk_singletons: false }
    }
}

impl LmConfig {
    pub fn params(&self) -> LmParams {
        let mut p = LmParams::uniform(self.order, self.alpha);
        if let Some(w) = &self.weights {
            p.weights = w.clone();
        }
        p.unk_singletons = self.unk_singletons;
        p
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScheduleConfig {
    pub n_in: usize,
    pub n_out: usize,
    pub batch_size: usize,
    /// Batches in the main-phase stream; one pass over the out-of-domain
    /// pool (rounded up to whole cycles) when absent.
    pub total_batches: Option<usize>,
    /// Batches in the fine-tune stream; one pass when absent.
    pub finetune_batches: Option<usize>,
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        let s = BatchWeightingSchedule::modified();
        ScheduleConfig {
            n_in: s.n_in,
            n_out: s.n_out,
            batch_size: DEFAULT_BATCH_SIZE,
            total_batches: None,
            finetune_batches: None,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SelectionConfig {
    /// Pseudo in-domain size; a tenth of the L2 in-domain corpus when absent.
    pub k: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub manifest: PathBuf,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub bpe: BpeConfig,
    #[serde(default)]
    pub lm: LmConfig,
    #[serde(default)]
    pub schedule: ScheduleConfig,
    #[serde(default)]
    pub selection: SelectionConfig,
    pub translator: Option<TranslatorSpec>,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

impl PipelineConfig {
    pub fn new(manifest: impl Into<PathBuf>, output_dir: impl Into<PathBuf>) -> Self {
        PipelineConfig {
            manifest: manifest.into(),
            output_dir: output_dir.into(),
            seed: 0,
            bpe: BpeConfig::default(),
            lm: LmConfig::default(),
            schedule: ScheduleConfig::default(),
            selection: SelectionConfig::default(),
            translator: None,
        }
    }

    /// Reads a TOML config; relative paths are taken from the config's
    /// directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let config: PipelineConfig =
            toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Ok(config.rebased(base))
    }

    pub fn rebased(mut self, base: &Path) -> Self {
        self.manifest = base.join(&self.manifest);
        self.output_dir = base.join(&self.output_dir);
        self.translator = self.translator.map(|t| t.rebased(base));
        self
    }

    pub fn schedule(&self) -> BatchWeightingSchedule {
        BatchWeightingSchedule {
            n_in: self.schedule.n_in,
            n_out: self.schedule.n_out,
            batch_size: self.schedule.batch_size,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.lm.params().validate()?;
        self.schedule().validate()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Artifact {
    pub name: String,
    pub sha256: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct CorpusSizes {
    pub l1_in: Option<usize>,
    pub l2_in: Option<usize>,
    pub l1_out: Option<usize>,
    pub l2_out: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PipelineReport {
    pub plan: AdaptationPlan,
    /// Canonical slot sizes.
    pub corpus_sizes: CorpusSizes,
    pub bpe_merges: usize,
    pub selected: Option<usize>,
    pub warnings: Vec<String>,
    #[serde(skip)]
    pub artifacts: Vec<Artifact>,
}

impl PipelineReport {
    pub fn scenario(&self) -> Scenario {
        self.plan.scenario
    }
}

/// What the selection recipe produced.
#[derive(Debug)]
pub struct SelectionOutcome {
    pub in_lm: NGramLm,
    pub out_lm: NGramLm,
    pub scored: Vec<ScoredSentence>,
    pub selected: Vec<ScoredSentence>,
}

/// Subword-encoded inputs to the selection recipe, in canonical slots.
#[derive(Clone, Copy, Debug)]
pub struct SelectionInputs<'a> {
    pub l2_in: &'a Corpus,
    pub pseudo_l1_in: &'a Corpus,
    pub l1_out: &'a Corpus,
    pub l2_out: Option<&'a Corpus>,
}

/// Trains the in-domain LM on L2 in-domain plus its back-translation, the
/// out-of-domain LM on size-matched out-of-domain subsamples, scores the
/// L1 out-of-domain corpus and keeps the `k` lowest.
pub fn select_pseudo_in_domain(
    recipe: &SelectionRecipe,
    inputs: SelectionInputs<'_>,
    lm: &LmParams,
    seed: u64,
) -> Result<SelectionOutcome> {
    let fetch = |source: CorpusSource| -> Result<Corpus> {
        let target = inputs.l2_in.len();
        match source {
            CorpusSource::L2In => Ok(inputs.l2_in.clone()),
            CorpusSource::PseudoL1In => Ok(inputs.pseudo_l1_in.clone()),
            CorpusSource::L1Out => Ok(inputs.l1_out.clone()),
            CorpusSource::SubsampledL1Out => Ok(size_matched_subsample(inputs.l1_out, target, seed)),
            CorpusSource::SubsampledL2Out => {
                let l2_out = inputs.l2_out.ok_or(Error::MissingCorpus("L2 out-of-domain"))?;
                Ok(size_matched_subsample(l2_out, target, seed.wrapping_add(1)))
            }
            other => Err(Error::InvalidParameter(format!("{other:?} cannot feed selection"))),
        }
    };
    let gather = |sources: &[CorpusSource]| -> Result<Vec<Corpus>> { sources.iter().map(|&s| fetch(s)).collect() };
    let in_parts = gather(&recipe.in_lm)?;
    let out_parts = gather(&recipe.out_lm)?;
    let in_lm = train_lm(&in_parts.iter().collect::<Vec<_>>(), lm)?;
    let out_lm = train_lm(&out_parts.iter().collect::<Vec<_>>(), lm)?;
    let target = fetch(recipe.target)?;
    let scored = ced_score(&in_lm, &out_lm, &target)?;
    let selected = select_lowest_k(&scored, recipe.k);
    Ok(SelectionOutcome { in_lm, out_lm, scored, selected })
}

fn at<T>(stage: &'static str, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Stage { .. } => e,
        other => Error::Stage { stage, source: Box::new(other) },
    })
}

fn check_round_trip(original: &Corpus, encoded: &Corpus) -> Result<()> {
    for (i, (o, e)) in original.sentences.iter().zip(&encoded.sentences).enumerate() {
        if desegment(&e.tokens) != o.tokens {
            return Err(Error::InvalidParameter(format!("subword encoding of sentence {i} does not round-trip")));
        }
    }
    Ok(())
}

fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

struct Outputs {
    dir: PathBuf,
    names: Vec<String>,
}

impl Outputs {
    fn path(&mut self, name: &str) -> PathBuf {
        self.names.push(name.to_owned());
        self.dir.join(name)
    }
}

fn one_pass_batches(len: usize, batch_size: usize) -> usize {
    len.div_ceil(batch_size).max(1)
}

/// Runs every stage that applies to the manifest's scenario.
pub fn run_pipeline(config: &PipelineConfig) -> Result<PipelineReport> {
    at("config", config.validate())?;
    let manifest = at("plan", CorpusManifest::load(&config.manifest))?;
    let scenario = at("plan", classify_scenario(&manifest))?;
    let mut plan = plan_methods(scenario);
    let mut warnings = Vec::new();

    let raw = at("load", CorpusSet::load(&manifest, &scenario))?;
    for c in raw.iter() {
        if c.is_empty() {
            warnings.push(format!("{} {} corpus has no sentences", c.language, c.domain));
        }
        if c.blank_lines > 0 {
            warnings.push(format!("{} {} corpus: {} blank lines dropped", c.language, c.domain, c.blank_lines));
        }
    }
    if let (true, Some(l2_in)) = (plan.selection.is_some(), raw.l2_in.as_ref()) {
        let k = config.selection.k.unwrap_or((l2_in.len() / 10).max(1));
        plan = plan.with_selection_size(k);
    }

    at(
        "report",
        fs::create_dir_all(&config.output_dir).map_err(|e| Error::io(&config.output_dir, e)),
    )?;
    let mut out = Outputs { dir: config.output_dir.clone(), names: Vec::new() };

    // subword model over everything, both languages pooled
    let bpe = at("bpe", bpe_train(&raw.iter().collect::<Vec<_>>(), config.bpe.merge_count))?;
    at("bpe", bpe.save(&out.path("bpe.model")))?;
    let encoded = raw.map(|c| bpe_apply_corpus(&bpe, c));
    for (o, e) in raw.iter().zip(encoded.iter()) {
        at("bpe", check_round_trip(o, e))?;
    }

    let lm_params = config.lm.params();
    let mut selected_corpus = None;
    let mut selected_count = None;
    if let Some(recipe) = plan.selection.clone() {
        let l2_in_raw = raw.l2_in.as_ref().expect("selection scenarios have L2 in-domain");
        let spec = config
            .translator
            .as_ref()
            .ok_or_else(|| Error::Stage { stage: "backtranslate", source: Box::new(Error::Config("scenario needs a [translator]".into())) })?;
        let translator = at("backtranslate", spec.resolve())?;
        let pseudo = at("backtranslate", back_translate(l2_in_raw, translator.as_ref()))?;
        at("backtranslate", pseudo.write_raw(&out.path("pseudo_l1_in.txt")))?;
        let pseudo_enc = bpe_apply_corpus(&bpe, &pseudo);

        let inputs = SelectionInputs {
            l2_in: encoded.l2_in.as_ref().expect("checked above"),
            pseudo_l1_in: &pseudo_enc,
            l1_out: encoded.l1_out.as_ref().expect("selection scenarios have L1 out-of-domain"),
            l2_out: encoded.l2_out.as_ref(),
        };
        let outcome = at("lm", select_pseudo_in_domain(&recipe, inputs, &lm_params, config.seed))?;
        at("lm", outcome.in_lm.save(&out.path("lm_in.arpa")))?;
        at("lm", outcome.out_lm.save(&out.path("lm_out.arpa")))?;
        at("score", write_scored(&out.path("scored.tsv"), &outcome.scored))?;
        if recipe.k > outcome.scored.len() {
            warnings.push(format!(
                "selection size {} exceeds {} scored sentences; all were selected",
                recipe.k,
                outcome.scored.len()
            ));
        }
        at(
            "select",
            write_selection(&out.path("selected.txt"), &out.path("selected.idx"), &outcome.selected),
        )?;
        let l1_out_raw = raw.l1_out.as_ref().expect("checked above");
        let picked = Corpus {
            language: Language::L1,
            domain: Domain::InDomain,
            sentences: outcome.selected.iter().map(|s| l1_out_raw.sentences[s.index].clone()).collect(),
            source_path: None,
            blank_lines: 0,
        };
        selected_count = Some(picked.len());
        selected_corpus = Some(picked);
    }

    let schedule = config.schedule();
    if let Some(bw) = plan.batch_weighting.clone() {
        let pool = |sources: &[CorpusSource], domain: Domain| -> Corpus {
            let parts: Vec<&Corpus> = sources
                .iter()
                .filter_map(|s| match s {
                    CorpusSource::L1In => encoded.l1_in.as_ref(),
                    CorpusSource::L2In => encoded.l2_in.as_ref(),
                    CorpusSource::L1Out => encoded.l1_out.as_ref(),
                    CorpusSource::L2Out => encoded.l2_out.as_ref(),
                    _ => None,
                })
                .collect();
            Corpus::concat(Language::L1, domain, &parts)
        };
        let in_pool = pool(&bw.in_stream, Domain::InDomain);
        let out_pool = pool(&bw.out_stream, Domain::OutOfDomain);
        at("schedule", in_pool.write_tokens(&out.path("stream_main.in.bpe")))?;
        at("schedule", out_pool.write_tokens(&out.path("stream_main.out.bpe")))?;
        let total = config.schedule.total_batches.unwrap_or_else(|| {
            if schedule.n_out == 0 {
                one_pass_batches(in_pool.len(), schedule.batch_size)
            } else {
                one_pass_batches(out_pool.len(), schedule.batch_size).div_ceil(schedule.n_out) * schedule.cycle_len()
            }
        });
        let stream = at("schedule", build_stream(&schedule, &in_pool, &out_pool, total, config.seed))?;
        at("schedule", write_stream_manifest(&out.path("stream_main.tsv"), stream))?;
    }

    if plan.uses(Method::FineTuning) {
        let (ft_l1, ft_l2) = at("assemble", assemble_finetune_corpora(&plan, &raw, selected_corpus.as_ref()))?;
        let ft_l1 = bpe_apply_corpus(&bpe, &ft_l1);
        let ft_l2 = bpe_apply_corpus(&bpe, &ft_l2);
        at("assemble", ft_l1.write_tokens(&out.path("ft_l1.bpe")))?;
        at("assemble", ft_l2.write_tokens(&out.path("ft_l2.bpe")))?;

        // fine-tuning sees in-domain data only
        let ft_pool = Corpus::concat(Language::L1, Domain::InDomain, &[&ft_l1, &ft_l2]);
        let ft_schedule = BatchWeightingSchedule { n_in: 1, n_out: 0, batch_size: schedule.batch_size };
        let total = config
            .schedule
            .finetune_batches
            .unwrap_or_else(|| one_pass_batches(ft_pool.len(), schedule.batch_size));
        let empty = Corpus::new(Language::L1, Domain::OutOfDomain, Vec::new());
        let stream = at("schedule", build_stream(&ft_schedule, &ft_pool, &empty, total, config.seed))?;
        at("schedule", write_stream_manifest(&out.path("stream_ft.tsv"), stream))?;
    }

    let corpus_sizes = CorpusSizes {
        l1_in: raw.l1_in.as_ref().map(Corpus::len),
        l2_in: raw.l2_in.as_ref().map(Corpus::len),
        l1_out: raw.l1_out.as_ref().map(Corpus::len),
        l2_out: raw.l2_out.as_ref().map(Corpus::len),
    };
    let mut report = PipelineReport {
        plan,
        corpus_sizes,
        bpe_merges: bpe.merges().len(),
        selected: selected_count,
        warnings,
        artifacts: Vec::new(),
    };

    let text = report.plan.render(&manifest);
    at("report", fs::write(out.path("plan.txt"), text).map_err(|e| Error::io(&config.output_dir, e)))?;
    let json = serde_json::to_string_pretty(&report.plan).expect("plan serializes");
    at("report", fs::write(out.path("plan.json"), json + "\n").map_err(|e| Error::io(&config.output_dir, e)))?;
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    at("report", fs::write(out.path("report.json"), json + "\n").map_err(|e| Error::io(&config.output_dir, e)))?;

    let mut names = out.names.clone();
    names.sort();
    for name in names {
        let sha256 = at("report", sha256_file(&out.dir.join(&name)))?;
        report.artifacts.push(Artifact { name, sha256 });
    }
    let lines: Vec<String> = report.artifacts.iter().map(|a| format!("{}  {}", a.sha256, a.name)).collect();
    at("report", write_lines(&out.dir.join(HASH_MANIFEST), lines.iter().map(String::as_str)))?;
    Ok(report)
}
