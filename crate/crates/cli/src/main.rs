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

//! `domadapt` command-line front-end.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use domadapt::backtranslate::ExternalCommand;
use domadapt::pipeline::HASH_MANIFEST;
use domadapt::planner::CorpusSet;
use domadapt::scheduler::write_stream_manifest;
use domadapt::selection::{read_scored, select_lowest_k_by, write_scored, write_selection, Criterion};
use domadapt::{
    assemble_finetune_corpora, back_translate, bpe_apply_corpus, bpe_train, build_stream, ced_score, classify_scenario,
    corpus_bleu, desegment, load_corpus, plan_methods, run_pipeline, size_matched_subsample, train_lm,
    BatchWeightingSchedule, BilingualLexicon, BpeModel, Corpus, CorpusManifest, CurveLog, Domain, Language,
    LmParams, NGramLm, PipelineConfig, Sentence, Translator,
};

#[derive(Parser)]
#[command(name = "domadapt", version, about = "Domain adaptation data pipeline for low-resource translation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify a corpus manifest and print the adaptation plan.
    Plan {
        manifest: PathBuf,
        /// Print the plan as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Learn a subword model from one or more corpora.
    BpeTrain {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long, default_value_t = domadapt::bpe::DEFAULT_MERGE_COUNT)]
        merges: usize,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Segment a corpus with a trained subword model.
    BpeApply {
        #[arg(long)]
        model: PathBuf,
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Train an n-gram language model.
    TrainLm {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[command(flatten)]
        lm: LmArgs,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Score every sentence by cross-entropy difference.
    Score {
        #[arg(long)]
        in_lm: PathBuf,
        #[arg(long)]
        out_lm: PathBuf,
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Keep the k lowest-scoring sentences of a scored file.
    Select {
        scored: PathBuf,
        #[arg(short)]
        k: usize,
        #[arg(long, value_enum, default_value_t = Rank::Ced)]
        by: Rank,
        #[arg(short, long)]
        output: PathBuf,
        /// Sidecar file listing the selected line indices.
        #[arg(long)]
        index: Option<PathBuf>,
    },
    /// Draw a uniform sample of sentences, keeping their original order.
    Subsample {
        input: PathBuf,
        #[arg(long)]
        size: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Translate an in-domain corpus line by line.
    Backtranslate {
        input: PathBuf,
        #[command(flatten)]
        translator: TranslatorArgs,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Write the batch-origin manifest of a weighted batch stream.
    Schedule {
        #[arg(long = "in")]
        in_corpus: PathBuf,
        #[arg(long = "out")]
        out_corpus: PathBuf,
        #[arg(long, default_value_t = 1)]
        n_in: usize,
        #[arg(long, default_value_t = 30)]
        n_out: usize,
        #[arg(long, default_value_t = 32)]
        batch_size: usize,
        #[arg(long)]
        total: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Assemble the fine-tuning corpora of a manifest's plan.
    AssembleFt {
        manifest: PathBuf,
        /// Selected pseudo in-domain corpus, for scenarios that need one.
        #[arg(long)]
        selected: Option<PathBuf>,
        #[arg(long)]
        output_dir: PathBuf,
    },
    /// Corpus BLEU of hypotheses against references.
    Bleu {
        hypotheses: PathBuf,
        references: PathBuf,
        /// Undo subword segmentation of the hypotheses first.
        #[arg(long)]
        desegment: bool,
        #[command(flatten)]
        curve: CurveArgs,
    },
    /// Run the whole pipeline from a TOML config.
    Run {
        config: PathBuf,
        /// Override the config's output directory.
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Rank {
    /// Cross-entropy difference.
    Ced,
    /// In-domain cross-entropy only.
    Ce,
}

#[derive(Args)]
struct LmArgs {
    #[arg(long, default_value_t = 4)]
    order: usize,
    #[arg(long, default_value_t = 0.1)]
    alpha: f64,
    /// Comma-separated interpolation weights, lowest order first.
    #[arg(long, value_delimiter = ',')]
    weights: Vec<f64>,
    /// Read singleton training tokens as `<unk>`.
    #[arg(long)]
    unk_singletons: bool,
}

impl LmArgs {
    fn params(&self) -> LmParams {
        let mut p = LmParams::uniform(self.order, self.alpha);
        if !self.weights.is_empty() {
            p.weights = self.weights.clone();
        }
        p.unk_singletons = self.unk_singletons;
        p
    }
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct TranslatorArgs {
    /// Tab-separated `source<TAB>target` lexicon.
    #[arg(long)]
    lexicon: Option<PathBuf>,
    /// Shell command with `{input}` and `{output}` placeholders.
    #[arg(long)]
    command: Option<String>,
}

#[derive(Args)]
struct CurveArgs {
    /// Append the score to `<dir>/<run-id>.tsv`.
    #[arg(long, requires_all = ["run_id", "step"])]
    log_dir: Option<PathBuf>,
    #[arg(long)]
    run_id: Option<String>,
    #[arg(long)]
    step: Option<u64>,
}

fn load(path: &Path, language: Language, domain: Domain) -> Result<Corpus> {
    Ok(load_corpus(path, language, domain)?)
}

fn load_all(paths: &[PathBuf]) -> Result<Vec<Corpus>> {
    paths.iter().map(|p| load(p, Language::L1, Domain::InDomain)).collect()
}

fn with_desegmentation(corpus: Corpus) -> Vec<Sentence> {
    corpus.sentences.iter().map(|s| Sentence::from_raw(desegment(&s.tokens).join(" "))).collect()
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Plan { manifest, json } => {
            let m = CorpusManifest::load(&manifest)?;
            let plan = plan_methods(classify_scenario(&m)?);
            if json {
                println!("{}", serde_json::to_string_pretty(&plan)?);
            } else {
                print!("{}", plan.render(&m));
            }
        }
        Command::BpeTrain { inputs, merges, output } => {
            let corpora = load_all(&inputs)?;
            let model = bpe_train(&corpora.iter().collect::<Vec<_>>(), merges)?;
            model.save(&output)?;
            log::info!("learned {} merges", model.merges().len());
        }
        Command::BpeApply { model, input, output } => {
            let model = BpeModel::load(&model)?;
            let corpus = load(&input, Language::L1, Domain::InDomain)?;
            bpe_apply_corpus(&model, &corpus).write_tokens(&output)?;
        }
        Command::TrainLm { inputs, lm, output } => {
            let corpora = load_all(&inputs)?;
            train_lm(&corpora.iter().collect::<Vec<_>>(), &lm.params())?.save(&output)?;
        }
        Command::Score { in_lm, out_lm, input, output } => {
            let in_lm = NGramLm::load(&in_lm)?;
            let out_lm = NGramLm::load(&out_lm)?;
            let corpus = load(&input, Language::L1, Domain::OutOfDomain)?;
            write_scored(&output, &ced_score(&in_lm, &out_lm, &corpus)?)?;
        }
        Command::Select { scored, k, by, output, index } => {
            let scored = read_scored(&scored)?;
            if k > scored.len() {
                log::warn!("k = {k} exceeds {} scored sentences; selecting all", scored.len());
            }
            let criterion = match by {
                Rank::Ced => Criterion::CrossEntropyDifference,
                Rank::Ce => Criterion::InDomainCrossEntropy,
            };
            let selected = select_lowest_k_by(&scored, k, criterion);
            let index = index.unwrap_or_else(|| output.with_extension("idx"));
            write_selection(&output, &index, &selected)?;
        }
        Command::Subsample { input, size, seed, output } => {
            let corpus = load(&input, Language::L1, Domain::OutOfDomain)?;
            size_matched_subsample(&corpus, size, seed).write_raw(&output)?;
        }
        Command::Backtranslate { input, translator, output } => {
            let corpus = load(&input, Language::L2, Domain::InDomain)?;
            let translator: Box<dyn Translator> = match (translator.lexicon, translator.command) {
                (Some(lexicon), _) => Box::new(BilingualLexicon::load(&lexicon)?),
                (None, Some(command)) => Box::new(ExternalCommand::new(command)),
                (None, None) => unreachable!("clap enforces one translator"),
            };
            back_translate(&corpus, translator.as_ref())?.write_raw(&output)?;
        }
        Command::Schedule { in_corpus, out_corpus, n_in, n_out, batch_size, total, seed, output } => {
            let schedule = BatchWeightingSchedule::new(n_in, n_out, batch_size)?;
            let in_c = load(&in_corpus, Language::L1, Domain::InDomain)?;
            let out_c = load(&out_corpus, Language::L1, Domain::OutOfDomain)?;
            let written = write_stream_manifest(&output, build_stream(&schedule, &in_c, &out_c, total, seed)?)?;
            log::info!("{written} batches, r_out = {:.4}", schedule.r_out()?);
        }
        Command::AssembleFt { manifest, selected, output_dir } => {
            let m = CorpusManifest::load(&manifest)?;
            let scenario = classify_scenario(&m)?;
            let plan = plan_methods(scenario);
            let corpora = CorpusSet::load(&m, &scenario)?;
            let selected = selected.map(|p| load(&p, Language::L1, Domain::InDomain)).transpose()?;
            let (l1, l2) = assemble_finetune_corpora(&plan, &corpora, selected.as_ref())?;
            fs::create_dir_all(&output_dir).with_context(|| format!("creating {}", output_dir.display()))?;
            for (canonical, corpus) in [(Language::L1, l1), (Language::L2, l2)] {
                let name = m.name(scenario.user_language(canonical));
                corpus.write_raw(&output_dir.join(format!("ft.{name}.txt")))?;
            }
        }
        Command::Bleu { hypotheses, references, desegment, curve } => {
            let hyp = load(&hypotheses, Language::L1, Domain::InDomain)?;
            let reference = load(&references, Language::L1, Domain::InDomain)?;
            let hyp = if desegment { with_desegmentation(hyp) } else { hyp.sentences };
            let report = corpus_bleu(&hyp, &reference.sentences)?;
            println!("{report}");
            if let (Some(dir), Some(run_id), Some(step)) = (curve.log_dir, curve.run_id, curve.step) {
                CurveLog::new(dir)?.log_curve(&run_id, step, "bleu", report.bleu)?;
            }
        }
        Command::Run { config, output_dir } => {
            let mut config = PipelineConfig::load(&config)?;
            if let Some(dir) = output_dir {
                config.output_dir = dir;
            }
            let report = run_pipeline(&config)?;
            for warning in &report.warnings {
                log::warn!("{warning}");
            }
            print!("{}", fs::read_to_string(config.output_dir.join("plan.txt"))?);
            println!("artifacts: {}", config.output_dir.join(HASH_MANIFEST).display());
            if report.artifacts.is_empty() {
                bail!("pipeline produced no artifacts");
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("domadapt: {e:#}");
            ExitCode::FAILURE
        }
    }
}
