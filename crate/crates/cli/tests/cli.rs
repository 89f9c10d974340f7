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

//! Drives the `domadapt` binary end to end.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const IN_DE: &str = "die tablette ist weiss\nnimm eine tablette taeglich\ndie dosis ist niedrig\n";
const OUT_EN: &str = "the game starts now\nthe tablet is white\nthe team won again\nplayers run fast\n";
const LEXICON: &str = "die\tthe\ntablette\ttablet\nist\tis\nweiss\twhite\nnimm\ttake\neine\tone\n";

fn domadapt(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_domadapt")).current_dir(dir).args(args).output().unwrap()
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = domadapt(dir, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn io_fixture(dir: &Path) {
    fs::write(dir.join("de.in"), IN_DE).unwrap();
    fs::write(dir.join("en.out"), OUT_EN).unwrap();
    fs::write(dir.join("lexicon.tsv"), LEXICON).unwrap();
    fs::write(dir.join("manifest.toml"), "l1_name = \"en\"\nl2_name = \"de\"\nl2_in = \"de.in\"\nl1_out = \"en.out\"\n").unwrap();
}

#[test]
fn plan_reports_scenario_and_methods() {
    let dir = tempfile::tempdir().unwrap();
    io_fixture(dir.path());
    let text = ok(dir.path(), &["plan", "manifest.toml"]);
    assert!(text.contains("scenario: IO"), "{text}");
    let json: serde_json::Value = serde_json::from_str(&ok(dir.path(), &["plan", "manifest.toml", "--json"])).unwrap();
    assert_eq!(json["methods"].as_array().unwrap().len(), 2);
}

#[test]
fn step_by_step_selection_chain() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    io_fixture(d);
    ok(d, &["backtranslate", "de.in", "--lexicon", "lexicon.tsv", "-o", "pseudo.en"]);
    assert_eq!(fs::read_to_string(d.join("pseudo.en")).unwrap().lines().next(), Some("the tablet is white"));
    ok(d, &["bpe-train", "de.in", "en.out", "pseudo.en", "--merges", "40", "-o", "bpe.model"]);
    for name in ["de.in", "pseudo.en", "en.out"] {
        ok(d, &["bpe-apply", "--model", "bpe.model", name, "-o", &format!("{name}.bpe")]);
    }
    ok(d, &["subsample", "en.out.bpe", "--size", "3", "--seed", "1", "-o", "out.sub"]);
    assert_eq!(fs::read_to_string(d.join("out.sub")).unwrap().lines().count(), 3);
    ok(d, &["train-lm", "de.in.bpe", "pseudo.en.bpe", "--order", "2", "-o", "in.arpa"]);
    ok(d, &["train-lm", "out.sub", "--order", "2", "--weights", "0.5,0.5", "-o", "out.arpa"]);
    ok(d, &["score", "--in-lm", "in.arpa", "--out-lm", "out.arpa", "en.out.bpe", "-o", "scored.tsv"]);
    assert_eq!(fs::read_to_string(d.join("scored.tsv")).unwrap().lines().count(), 4);
    ok(d, &["select", "scored.tsv", "-k", "1", "-o", "selected.bpe"]);
    assert_eq!(fs::read_to_string(d.join("selected.idx")).unwrap(), "1\n");
}

#[test]
fn schedule_writes_one_line_per_batch() {
    let dir = tempfile::tempdir().unwrap();
    io_fixture(dir.path());
    let args = ["schedule", "--in", "de.in", "--out", "en.out", "--n-in", "1", "--n-out", "3", "--batch-size", "1"];
    ok(dir.path(), &[&args[..], &["--total", "8", "-o", "stream.tsv"]].concat());
    let origins: String = fs::read_to_string(dir.path().join("stream.tsv"))
        .unwrap()
        .lines()
        .map(|l| if l.split('\t').nth(1) == Some("in") { 'I' } else { 'O' })
        .collect();
    assert_eq!(origins, "OOOIOOOI");
}

#[test]
fn bleu_prints_summary_and_logs_curve() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("hyp"), "a b c d\n").unwrap();
    fs::write(d.join("ref"), "a b c d e\n").unwrap();
    let line = ok(d, &["bleu", "hyp", "ref", "--log-dir", "curves", "--run-id", "r1", "--step", "10"]);
    assert!(line.starts_with("BLEU = 77.88"), "{line}");
    let curve = fs::read_to_string(d.join("curves/r1.tsv")).unwrap();
    assert!(curve.starts_with("10\tbleu\t77.88"), "{curve}");
    let out = domadapt(d, &["bleu", "hyp", "ref", "--log-dir", "curves", "--run-id", "r1", "--step", "5"]);
    assert!(!out.status.success());
}

#[test]
fn bleu_desegments_subwords() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("hyp"), "the</w> ta b</w> is</w> he re</w>\n").unwrap();
    fs::write(dir.path().join("ref"), "the tab is here\n").unwrap();
    let raw = ok(dir.path(), &["bleu", "hyp", "ref"]);
    let joined = ok(dir.path(), &["bleu", "hyp", "ref", "--desegment"]);
    assert!(raw.starts_with("BLEU = 0.00"), "{raw}");
    assert!(joined.starts_with("BLEU = 100.00"), "{joined}");
}

#[test]
fn external_translator_command() {
    let dir = tempfile::tempdir().unwrap();
    io_fixture(dir.path());
    ok(dir.path(), &["backtranslate", "de.in", "--command", "tr a-z A-Z < {input} > {output}", "-o", "up"]);
    assert_eq!(fs::read_to_string(dir.path().join("up")).unwrap(), IN_DE.to_uppercase());
}

#[test]
fn run_and_assemble_ft() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    io_fixture(d);
    fs::write(
        d.join("config.toml"),
        "manifest = \"manifest.toml\"\nseed = 1\n[bpe]\nmerge_count = 40\n[selection]\nk = 2\n\
         [translator]\nkind = \"dictionary\"\nlexicon = \"lexicon.tsv\"\n",
    )
    .unwrap();
    let text = ok(d, &["run", "config.toml", "--output-dir", "run1"]);
    assert!(text.contains("scenario: IO"), "{text}");
    assert!(d.join("run1/artifacts.sha256").exists());
    ok(d, &["assemble-ft", "manifest.toml", "--selected", "run1/selected.txt", "--output-dir", "ft"]);
    assert_eq!(fs::read_to_string(d.join("ft/ft.de.txt")).unwrap(), IN_DE);
    assert_eq!(fs::read_to_string(d.join("ft/ft.en.txt")).unwrap().lines().count(), 2);
}

#[test]
fn failures_exit_nonzero_with_stage() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("de.in"), IN_DE).unwrap();
    fs::write(d.join("manifest.toml"), "l2_in = \"de.in\"\n").unwrap();
    fs::write(d.join("config.toml"), "manifest = \"manifest.toml\"\n").unwrap();
    let out = domadapt(d, &["run", "config.toml"]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("[plan]") && err.contains("untrainable"), "{err}");
    let out = domadapt(d, &["bpe-apply", "--model", "missing.model", "de.in", "-o", "x"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.model"));
}
