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

//! Scenario classification, method planning and fine-tune corpus assembly.
//!
//! A scenario is determined by which of the four monolingual corpora exist.
//! Mirror-image patterns (for example L1 in-domain + L2 out-of-domain and
//! L2 in-domain + L1 out-of-domain) share a label; the manifest is then
//! *canonicalized* by swapping languages so that internally L2 is always
//! the in-domain-bearing language for `IOO`/`IO`, and the language lacking
//! out-of-domain data for `IIO`. Reports map back to the user's names.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::corpus::{load_corpus, Corpus, Domain, Language};
use crate::error::{Error, Result};
use crate::selection::FULL_SCALE_K;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ScenarioLabel {
    II,
    OO,
    IIOO,
    IOO,
    IIO,
    IO,
}

impl ScenarioLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioLabel::II => "II",
            ScenarioLabel::OO => "OO",
            ScenarioLabel::IIOO => "IIOO",
            ScenarioLabel::IOO => "IOO",
            ScenarioLabel::IIO => "IIO",
            ScenarioLabel::IO => "IO",
        }
    }
}

impl fmt::Display for ScenarioLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Which corpora exist, in the user's language order.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Availability {
    pub l1_in: bool,
    pub l2_in: bool,
    pub l1_out: bool,
    pub l2_out: bool,
}

impl Availability {
    pub fn new(l1_in: bool, l2_in: bool, l1_out: bool, l2_out: bool) -> Self {
        Availability { l1_in, l2_in, l1_out, l2_out }
    }

    fn swapped(self) -> Self {
        Availability {
            l1_in: self.l2_in,
            l2_in: self.l1_in,
            l1_out: self.l2_out,
            l2_out: self.l1_out,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scenario {
    pub label: ScenarioLabel,
    /// True when the user's L1/L2 were swapped to reach the canonical form.
    pub swapped: bool,
}

impl Scenario {
    /// The user-facing language behind a canonical language slot.
    pub fn user_language(&self, canonical: Language) -> Language {
        if self.swapped {
            canonical.other()
        } else {
            canonical
        }
    }
}

/// Maps availability bits to a scenario. Only patterns in which both
/// languages have at least one corpus are trainable, and all nine of those
/// are covered.
pub fn classify_availability(a: Availability) -> Result<Scenario> {
    use ScenarioLabel::*;
    if !(a.l1_in || a.l1_out) {
        return Err(Error::Untrainable("L1"));
    }
    if !(a.l2_in || a.l2_out) {
        return Err(Error::Untrainable("L2"));
    }
    let bits = (a.l1_in, a.l2_in, a.l1_out, a.l2_out);
    let (label, swapped) = match bits {
        (true, true, false, false) => (II, false),
        (false, false, true, true) => (OO, false),
        (true, true, true, true) => (IIOO, false),
        (false, true, true, true) => (IOO, false),
        (true, false, true, true) => (IOO, true),
        (true, true, true, false) => (IIO, false),
        (true, true, false, true) => (IIO, true),
        (false, true, true, false) => (IO, false),
        (true, false, false, true) => (IO, true),
        _ => unreachable!("every trainable pattern is listed"),
    };
    debug_assert!(!swapped || classify_availability(a.swapped()).map(|s| !s.swapped).unwrap_or(false));
    Ok(Scenario { label, swapped })
}

/// Corpus locations and language names, as written by the user.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusManifest {
    #[serde(default = "default_l1_name")]
    pub l1_name: String,
    #[serde(default = "default_l2_name")]
    pub l2_name: String,
    pub l1_in: Option<PathBuf>,
    pub l2_in: Option<PathBuf>,
    pub l1_out: Option<PathBuf>,
    pub l2_out: Option<PathBuf>,
}

fn default_l1_name() -> String {
    "L1".into()
}

fn default_l2_name() -> String {
    "L2".into()
}

impl CorpusManifest {
    pub fn availability(&self) -> Availability {
        Availability::new(
            self.l1_in.is_some(),
            self.l2_in.is_some(),
            self.l1_out.is_some(),
            self.l2_out.is_some(),
        )
    }

    /// Reads a TOML manifest; relative corpus paths are resolved against
    /// the manifest's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut manifest: CorpusManifest =
            toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        for slot in [&mut manifest.l1_in, &mut manifest.l2_in, &mut manifest.l1_out, &mut manifest.l2_out] {
            if let Some(p) = slot.as_mut() {
                *p = base.join(&*p);
            }
        }
        Ok(manifest)
    }

    pub fn name(&self, language: Language) -> &str {
        match language {
            Language::L1 => &self.l1_name,
            Language::L2 => &self.l2_name,
        }
    }
}

pub fn classify_scenario(manifest: &CorpusManifest) -> Result<Scenario> {
    classify_availability(manifest.availability())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    BatchWeighting,
    FineTuning,
}

/// Where a corpus in a recipe comes from, in canonical language slots.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CorpusSource {
    L1In,
    L2In,
    L1Out,
    L2Out,
    /// L2 in-domain back-translated into L1.
    PseudoL1In,
    /// Random L1 out-of-domain subset the size of L2 in-domain.
    SubsampledL1Out,
    /// Random L2 out-of-domain subset the size of L2 in-domain.
    SubsampledL2Out,
    /// Lowest-CED L1 out-of-domain sentences.
    SelectedL1,
}

impl CorpusSource {
    fn describe(self, names: &dyn Fn(Language) -> String) -> String {
        let (l1, l2) = (names(Language::L1), names(Language::L2));
        match self {
            CorpusSource::L1In => format!("{l1} in-domain"),
            CorpusSource::L2In => format!("{l2} in-domain"),
            CorpusSource::L1Out => format!("{l1} out-of-domain"),
            CorpusSource::L2Out => format!("{l2} out-of-domain"),
            CorpusSource::PseudoL1In => format!("{l1} pseudo in-domain (back-translated from {l2} in-domain)"),
            CorpusSource::SubsampledL1Out => format!("{l1} out-of-domain, size-matched subsample"),
            CorpusSource::SubsampledL2Out => format!("{l2} out-of-domain, size-matched subsample"),
            CorpusSource::SelectedL1 => format!("{l1} selected pseudo in-domain"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FinetuneRecipe {
    pub l1: CorpusSource,
    pub l2: CorpusSource,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectionRecipe {
    pub in_lm: Vec<CorpusSource>,
    pub out_lm: Vec<CorpusSource>,
    pub target: CorpusSource,
    pub k: usize,
}

/// Pools feeding the two sides of the weighted stream.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BatchWeightingRecipe {
    pub in_stream: Vec<CorpusSource>,
    pub out_stream: Vec<CorpusSource>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdaptationPlan {
    pub scenario: Scenario,
    pub methods: Vec<Method>,
    pub batch_weighting: Option<BatchWeightingRecipe>,
    pub finetune: Option<FinetuneRecipe>,
    pub selection: Option<SelectionRecipe>,
}

impl AdaptationPlan {
    pub fn uses(&self, method: Method) -> bool {
        self.methods.contains(&method)
    }

    pub fn with_selection_size(mut self, k: usize) -> Self {
        if let Some(sel) = self.selection.as_mut() {
            sel.k = k;
        }
        self
    }

    /// Human-readable report in the user's language names.
    pub fn render(&self, manifest: &CorpusManifest) -> String {
        let names = |canonical: Language| manifest.name(self.scenario.user_language(canonical)).to_owned();
        let mut out = String::new();
        out.push_str(&format!("scenario: {}\n", self.scenario.label));
        out.push_str(&format!(
            "languages: L1 = {}, L2 = {}{}\n",
            names(Language::L1),
            names(Language::L2),
            if self.scenario.swapped { " (swapped from manifest order)" } else { "" }
        ));
        if self.methods.is_empty() {
            out.push_str("methods: none (baseline scenario)\n");
        } else {
            let m: Vec<&str> = self
                .methods
                .iter()
                .map(|m| match m {
                    Method::BatchWeighting => "batch weighting",
                    Method::FineTuning => "fine tuning",
                })
                .collect();
            out.push_str(&format!("methods: {}\n", m.join(", ")));
        }
        let list = |v: &[CorpusSource]| v.iter().map(|s| s.describe(&names)).collect::<Vec<_>>().join(" + ");
        if let Some(bw) = &self.batch_weighting {
            out.push_str(&format!("batch weighting in-stream: {}\n", list(&bw.in_stream)));
            out.push_str(&format!("batch weighting out-stream: {}\n", list(&bw.out_stream)));
        }
        if let Some(sel) = &self.selection {
            out.push_str(&format!("selection in-domain LM: {}\n", list(&sel.in_lm)));
            out.push_str(&format!("selection out-of-domain LM: {}\n", list(&sel.out_lm)));
            out.push_str(&format!("selection target: {}, k = {}\n", sel.target.describe(&names), sel.k));
        }
        if let Some(ft) = &self.finetune {
            out.push_str(&format!(
                "fine-tune corpora: {} / {}\n",
                ft.l1.describe(&names),
                ft.l2.describe(&names)
            ));
        }
        out
    }
}

/// The method table: which adaptation methods apply to each scenario.
pub fn plan_methods(scenario: Scenario) -> AdaptationPlan {
    use CorpusSource::*;
    use ScenarioLabel::*;
    let methods = match scenario.label {
        II | OO => vec![],
        IIOO | IOO => vec![Method::FineTuning],
        IIO | IO => vec![Method::BatchWeighting, Method::FineTuning],
    };
    let batch_weighting = match scenario.label {
        IIO => Some(BatchWeightingRecipe { in_stream: vec![L1In, L2In], out_stream: vec![L1Out] }),
        IO => Some(BatchWeightingRecipe { in_stream: vec![L2In], out_stream: vec![L1Out] }),
        _ => None,
    };
    let finetune = match scenario.label {
        II | OO => None,
        IIOO | IIO => Some(FinetuneRecipe { l1: L1In, l2: L2In }),
        IOO | IO => Some(FinetuneRecipe { l1: SelectedL1, l2: L2In }),
    };
    let selection = match scenario.label {
        IOO => Some(SelectionRecipe {
            in_lm: vec![L2In, PseudoL1In],
            out_lm: vec![SubsampledL1Out, SubsampledL2Out],
            target: L1Out,
            k: FULL_SCALE_K,
        }),
        IO => Some(SelectionRecipe {
            in_lm: vec![L2In, PseudoL1In],
            out_lm: vec![SubsampledL1Out],
            target: L1Out,
            k: FULL_SCALE_K,
        }),
        _ => None,
    };
    AdaptationPlan { scenario, methods, batch_weighting, finetune, selection }
}

/// Loaded corpora in canonical language slots.
#[derive(Clone, Debug, Default)]
pub struct CorpusSet {
    pub l1_in: Option<Corpus>,
    pub l2_in: Option<Corpus>,
    pub l1_out: Option<Corpus>,
    pub l2_out: Option<Corpus>,
}

impl CorpusSet {
    /// Loads every corpus in the manifest, swapping slots when the scenario
    /// was canonicalized. Corpora are tagged with canonical languages.
    pub fn load(manifest: &CorpusManifest, scenario: &Scenario) -> Result<Self> {
        let slot = |canonical: Language, domain: Domain| -> Result<Option<Corpus>> {
            let user = scenario.user_language(canonical);
            let path = match (user, domain) {
                (Language::L1, Domain::InDomain) => &manifest.l1_in,
                (Language::L2, Domain::InDomain) => &manifest.l2_in,
                (Language::L1, Domain::OutOfDomain) => &manifest.l1_out,
                (Language::L2, Domain::OutOfDomain) => &manifest.l2_out,
            };
            path.as_ref().map(|p| load_corpus(p, canonical, domain)).transpose()
        };
        Ok(CorpusSet {
            l1_in: slot(Language::L1, Domain::InDomain)?,
            l2_in: slot(Language::L2, Domain::InDomain)?,
            l1_out: slot(Language::L1, Domain::OutOfDomain)?,
            l2_out: slot(Language::L2, Domain::OutOfDomain)?,
        })
    }

    pub fn get(&self, language: Language, domain: Domain) -> Option<&Corpus> {
        match (language, domain) {
            (Language::L1, Domain::InDomain) => self.l1_in.as_ref(),
            (Language::L2, Domain::InDomain) => self.l2_in.as_ref(),
            (Language::L1, Domain::OutOfDomain) => self.l1_out.as_ref(),
            (Language::L2, Domain::OutOfDomain) => self.l2_out.as_ref(),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = &Corpus> {
        [&self.l1_in, &self.l2_in, &self.l1_out, &self.l2_out]
            .into_iter()
            .filter_map(Option::as_ref)
    }

    pub fn map(&self, f: impl Fn(&Corpus) -> Corpus) -> CorpusSet {
        CorpusSet {
            l1_in: self.l1_in.as_ref().map(&f),
            l2_in: self.l2_in.as_ref().map(&f),
            l1_out: self.l1_out.as_ref().map(&f),
            l2_out: self.l2_out.as_ref().map(&f),
        }
    }
}

/// The `(L1, L2)` fine-tuning corpora for a plan, in canonical slots.
pub fn assemble_finetune_corpora(
    plan: &AdaptationPlan,
    corpora: &CorpusSet,
    selected: Option<&Corpus>,
) -> Result<(Corpus, Corpus)> {
    let label = plan.scenario.label.as_str();
    let recipe = plan.finetune.as_ref().ok_or(Error::NoFineTuning(label))?;
    let fetch = |source: CorpusSource| -> Result<Corpus> {
        match source {
            CorpusSource::L1In => corpora.l1_in.clone().ok_or(Error::MissingCorpus("L1 in-domain")),
            CorpusSource::L2In => corpora.l2_in.clone().ok_or(Error::MissingCorpus("L2 in-domain")),
            CorpusSource::SelectedL1 => {
                let mut c = selected.cloned().ok_or(Error::MissingSelection(label))?;
                c.language = Language::L1;
                c.domain = Domain::InDomain;
                Ok(c)
            }
            _ => unreachable!("fine-tune recipes only use in-domain or selected corpora"),
        }
    };
    Ok((fetch(recipe.l1)?, fetch(recipe.l2)?))
}
