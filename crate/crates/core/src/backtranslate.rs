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

//! Pseudo in-domain L1 text from L2 in-domain text, through a pluggable
//! translator.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use serde::{Deserialize, Serialize};

use crate::corpus::{write_lines, Corpus, Domain, Language, Sentence};
use crate::error::{Error, Result};
use crate::par;

/// How to translate. In config files:
///
/// ```toml
/// [translator]
/// kind = "dictionary"
/// lexicon = "lexicon.tsv"
/// ```
///
/// or `kind = "external"` with `command = "mytranslate {input} {output}"`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum TranslatorSpec {
    Dictionary { lexicon: PathBuf },
    External { command: String },
}

impl TranslatorSpec {
    pub fn resolve(&self) -> Result<Box<dyn Translator>> {
        match self {
            TranslatorSpec::Dictionary { lexicon } => Ok(Box::new(BilingualLexicon::load(lexicon)?)),
            TranslatorSpec::External { command } => Ok(Box::new(ExternalCommand::new(command.clone()))),
        }
    }

    /// Resolves relative lexicon paths against `base`.
    pub fn rebased(&self, base: &Path) -> TranslatorSpec {
        match self {
            TranslatorSpec::Dictionary { lexicon } => TranslatorSpec::Dictionary { lexicon: base.join(lexicon) },
            other => other.clone(),
        }
    }
}

/// Translates a whole corpus into line-aligned output text.
pub trait Translator: Send + Sync {
    fn translate(&self, corpus: &Corpus) -> Result<Vec<String>>;
}

/// Word-for-word lexicon; tokens without an entry are copied unchanged.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BilingualLexicon {
    entries: HashMap<String, String>,
}

impl BilingualLexicon {
    pub fn new(entries: HashMap<String, String>) -> Self {
        BilingualLexicon { entries }
    }

    /// Reads `source<TAB>target` lines. Later duplicates win.
    pub fn load(path: &Path) -> Result<Self> {
        if !path.exists() {
            return Err(Error::MissingLexicon(path.to_path_buf()));
        }
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut entries = HashMap::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let (src, tgt) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse(path, i + 1, "expected source<TAB>target"))?;
            let (src, tgt) = (src.trim(), tgt.trim());
            if src.is_empty() || tgt.is_empty() || tgt.contains(char::is_whitespace) {
                return Err(Error::parse(path, i + 1, "entries must be single non-empty tokens"));
            }
            entries.insert(src.to_owned(), tgt.to_owned());
        }
        Ok(BilingualLexicon { entries })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn lookup<'a>(&'a self, token: &'a str) -> &'a str {
        self.entries.get(token).map_or(token, String::as_str)
    }

    pub fn translate_sentence(&self, sentence: &Sentence) -> String {
        let words: Vec<&str> = sentence.tokens.iter().map(|t| self.lookup(t)).collect();
        words.join(" ")
    }
}

impl Translator for BilingualLexicon {
    fn translate(&self, corpus: &Corpus) -> Result<Vec<String>> {
        Ok(par::map(&corpus.sentences, |s| self.translate_sentence(s)))
    }
}

/// Runs a shell command once per corpus. `{input}` and `{output}` in the
/// template are replaced by file paths; the command must write exactly one
/// output line per input line.
#[derive(Clone, Debug)]
pub struct ExternalCommand {
    template: String,
}

impl ExternalCommand {
    pub fn new(template: String) -> Self {
        ExternalCommand { template }
    }
}

impl Translator for ExternalCommand {
    fn translate(&self, corpus: &Corpus) -> Result<Vec<String>> {
        let dir = tempfile::tempdir().map_err(|e| Error::io(std::env::temp_dir(), e))?;
        let input = dir.path().join("input.txt");
        let output = dir.path().join("output.txt");
        corpus.write_raw(&input)?;
        let cmd = self
            .template
            .replace("{input}", &input.to_string_lossy())
            .replace("{output}", &output.to_string_lossy());
        let result = Command::new("sh")
            .arg("-c")
            .arg(&cmd)
            .output()
            .map_err(|e| Error::ExternalCommand(format!("cannot spawn `{cmd}`: {e}")))?;
        if !result.status.success() {
            return Err(Error::ExternalCommand(format!(
                "`{cmd}` exited with {}: {}",
                result.status,
                String::from_utf8_lossy(&result.stderr).trim()
            )));
        }
        let text = fs::read_to_string(&output).map_err(|e| Error::io(&output, e))?;
        Ok(text.lines().map(str::to_owned).collect())
    }
}

/// Translates an L2 in-domain corpus into a pseudo in-domain L1 corpus with
/// the same sentence count and order.
pub fn back_translate(corpus: &Corpus, translator: &dyn Translator) -> Result<Corpus> {
    if corpus.language != Language::L2 || corpus.domain != Domain::InDomain {
        return Err(Error::WrongCorpusTag(format!(
            "expected an L2 in-domain corpus, got {} {}",
            corpus.language, corpus.domain
        )));
    }
    let lines = translator.translate(corpus)?;
    if lines.len() != corpus.len() {
        return Err(Error::LineCountMismatch { expected: corpus.len(), found: lines.len() });
    }
    let mut sentences = Vec::with_capacity(lines.len());
    for (i, line) in lines.into_iter().enumerate() {
        let s = Sentence::from_raw(line);
        if s.is_empty() {
            return Err(Error::ExternalCommand(format!("empty translation for sentence {}", i + 1)));
        }
        sentences.push(s);
    }
    Ok(Corpus::new(Language::L1, Domain::InDomain, sentences))
}

/// Writes a lexicon in the `source<TAB>target` format, sorted by source.
pub fn write_lexicon(path: &Path, lexicon: &BilingualLexicon) -> Result<()> {
    let mut pairs: Vec<(&String, &String)> = lexicon.entries.iter().collect();
    pairs.sort();
    let lines: Vec<String> = pairs.into_iter().map(|(s, t)| format!("{s}\t{t}")).collect();
    write_lines(path, lines.iter().map(String::as_str))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn l2_in(lines: &[&str]) -> Corpus {
        Corpus::from_lines(Language::L2, Domain::InDomain, lines.iter().copied())
    }

    fn lexicon() -> BilingualLexicon {
        BilingualLexicon::new(
            [("chat", "cat"), ("noir", "black")]
                .iter()
                .map(|(a, b)| (a.to_string(), b.to_string()))
                .collect(),
        )
    }

    #[test]
    fn dictionary_lookup_and_fallback() {
        let out = back_translate(&l2_in(&["chat noir", "le chat dort"]), &lexicon()).unwrap();
        assert_eq!(out.sentences[0].raw, "cat black");
        assert_eq!(out.sentences[1].raw, "le cat dort");
        assert_eq!((out.language, out.domain), (Language::L1, Domain::InDomain));
    }

    #[test]
    fn rejects_wrong_tags() {
        let c = Corpus::from_lines(Language::L1, Domain::InDomain, ["chat"]);
        assert!(matches!(back_translate(&c, &lexicon()), Err(Error::WrongCorpusTag(_))));
        let c = Corpus::from_lines(Language::L2, Domain::OutOfDomain, ["chat"]);
        assert!(matches!(back_translate(&c, &lexicon()), Err(Error::WrongCorpusTag(_))));
    }

    #[test]
    fn lexicon_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("lex.tsv");
        fs::write(&path, "chat\tcat\n\nnoir\tblack\n").unwrap();
        let lex = BilingualLexicon::load(&path).unwrap();
        assert_eq!(lex, lexicon());
        let copy = dir.path().join("copy.tsv");
        write_lexicon(&copy, &lex).unwrap();
        assert_eq!(fs::read_to_string(&copy).unwrap(), "chat\tcat\nnoir\tblack\n");

        let missing = TranslatorSpec::Dictionary { lexicon: dir.path().join("nope.tsv") };
        assert!(matches!(missing.resolve(), Err(Error::MissingLexicon(_))));

        fs::write(&path, "only-one-column\n").unwrap();
        assert!(matches!(BilingualLexicon::load(&path), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn external_identity_command() {
        let t = ExternalCommand::new("cp {input} {output}".into());
        let out = back_translate(&l2_in(&["a b", "c"]), &t).unwrap();
        assert_eq!(out.sentences[1].raw, "c");
    }

    #[test]
    fn external_line_count_mismatch() {
        let lines: Vec<String> = (0..10).map(|i| format!("s{i}")).collect();
        let c = Corpus::from_lines(Language::L2, Domain::InDomain, lines);
        let t = ExternalCommand::new("head -n 9 {input} > {output}".into());
        match back_translate(&c, &t) {
            Err(Error::LineCountMismatch { expected: 10, found: 9 }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn external_failure() {
        let t = ExternalCommand::new("exit 3".into());
        assert!(matches!(back_translate(&l2_in(&["a"]), &t), Err(Error::ExternalCommand(_))));
    }

    #[test]
    fn spec_parses_from_toml() {
        let spec: TranslatorSpec = toml::from_str("kind = \"dictionary\"\nlexicon = \"lex.tsv\"").unwrap();
        assert_eq!(spec, TranslatorSpec::Dictionary { lexicon: "lex.tsv".into() });
        let spec: TranslatorSpec = toml::from_str("kind = \"external\"\ncommand = \"x {input} {output}\"").unwrap();
        assert!(matches!(spec, TranslatorSpec::External { .. }));
        assert!(toml::from_str::<TranslatorSpec>("kind = \"dictionary\"").is_err());
    }
}
