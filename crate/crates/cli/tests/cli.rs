//! Integration tests driving the compiled `wikityper` binary end to end.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_wikityper"))
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    bin()
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn assert_success(out: &Output) {
    assert!(
        out.status.success(),
        "command failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn write_dump(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("dump.xml");
    std::fs::write(
        &path,
        "<mediawiki>\n\
         <page><title>P1</title><ns>0</ns><id>1</id>\
         <revision><id>10</id><text>the goverment acted</text></revision>\
         <revision><id>11</id><text>the government acted</text></revision></page>\n\
         <page><title>P2</title><ns>0</ns><id>2</id>\
         <revision><id>20</id><text>untill next time</text></revision>\
         <revision><id>21</id><text>until next time</text></revision></page>\n\
         </mediawiki>\n",
    )
    .unwrap();
    path
}

fn write_ic_dataset(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("ic.jsonl");
    std::fs::write(
        &path,
        "{\"text\":\"the government acted until night\",\"label\":\"a\"}\n\
         {\"text\":\"we meet until the government falls\",\"label\":\"b\"}\n",
    )
    .unwrap();
    path
}

#[test]
fn layouts_lists_builtins() {
    let out = bin().arg("layouts").output().unwrap();
    assert_success(&out);
    let stdout = String::from_utf8(out.stdout).unwrap();
    for name in ["qwerty-en", "qwertz-de", "azerty-fr", "qwerty-es", "qwerty-tr"] {
        assert!(stdout.contains(name), "missing {name} in {stdout}");
    }
}

#[test]
fn mine_from_dump_writes_dictionary_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    write_dump(dir.path());
    let args = [
        "mine", "--source", "dump", "--dump-path", "dump.xml", "--pages", "2", "--out",
        "dict/wikitypo.en.tsv",
    ];
    assert_success(&run_in(dir.path(), &args));
    let tsv = std::fs::read_to_string(dir.path().join("dict/wikitypo.en.tsv")).unwrap();
    assert!(tsv.contains("goverment\tgovernment\t1"));
    assert!(tsv.contains("untill\tuntil\t1"));
    let manifest = std::fs::read_to_string(dir.path().join("dict/manifest.json")).unwrap();
    let manifest: serde_json::Value = serde_json::from_str(&manifest).unwrap();
    assert_eq!(manifest["command"], "mine");
    assert_eq!(manifest["config_snapshot"]["source"], "dump");
    assert!(manifest["input_hashes"]["dump.xml"].as_str().unwrap().len() == 64);

    // Identical rerun: byte-identical dictionary.
    assert_success(&run_in(dir.path(), &args));
    assert_eq!(
        tsv,
        std::fs::read_to_string(dir.path().join("dict/wikitypo.en.tsv")).unwrap()
    );
}

#[test]
fn inject_is_deterministic_and_leaves_input_untouched() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_ic_dataset(dir.path());
    let input_before = std::fs::read(&input).unwrap();
    std::fs::write(
        dir.path().join("dict.tsv"),
        "language\tmisspelled\tcorrect\tfrequency\nen\tgoverment\tgovernment\t3\nen\tuntill\tuntil\t1\n",
    )
    .unwrap();
    let args = [
        "inject", "--task", "ic", "--mode", "dictionary", "--dict", "dict.tsv", "--ratio", "0.2",
        "--max-words", "4", "--seed", "7", "--in", "ic.jsonl", "--out", "out/ic.noisy.jsonl",
        "--report", "out/report.json",
    ];
    assert_success(&run_in(dir.path(), &args));
    let first = std::fs::read(dir.path().join("out/ic.noisy.jsonl")).unwrap();
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("out/report.json")).unwrap())
            .unwrap();
    assert_eq!(report["records_processed"], 2);
    assert!(report["replacements_made"].as_u64().unwrap() > 0);
    assert!(dir.path().join("out/manifest.json").exists());

    assert_success(&run_in(dir.path(), &args));
    let second = std::fs::read(dir.path().join("out/ic.noisy.jsonl")).unwrap();
    assert_eq!(first, second, "same seed must reproduce identical bytes");
    assert_eq!(input_before, std::fs::read(&input).unwrap(), "input was mutated");
}

#[test]
fn inject_keyboard_mode_handles_ner_conll() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("ner.conll"),
        "John\tB-PER\nSmith\tI-PER\nvisited\tO\nParis\tB-LOC\n\nNothing\tO\nhappened\tO\n\n",
    )
    .unwrap();
    let args = [
        "inject", "--task", "ner", "--seed", "3", "--in", "ner.conll", "--out", "ner.noisy.conll",
    ];
    assert_success(&run_in(dir.path(), &args));
    let noisy = std::fs::read_to_string(dir.path().join("ner.noisy.conll")).unwrap();
    let clean = std::fs::read_to_string(dir.path().join("ner.conll")).unwrap();
    let tags = |text: &str| -> Vec<String> {
        text.lines()
            .filter(|l| !l.is_empty())
            .map(|l| l.split('\t').nth(1).unwrap().to_string())
            .collect()
    };
    assert_eq!(tags(&clean), tags(&noisy), "tags must be preserved");
    assert_eq!(clean.lines().count(), noisy.lines().count());
}

#[test]
fn invalid_ratio_exits_one_with_message() {
    let dir = tempfile::tempdir().unwrap();
    write_ic_dataset(dir.path());
    std::fs::write(dir.path().join("dict.tsv"), "language\tmisspelled\tcorrect\tfrequency\n").unwrap();
    let out = run_in(
        dir.path(),
        &[
            "inject", "--task", "ic", "--dict", "dict.tsv", "--ratio", "1.5", "--in", "ic.jsonl",
            "--out", "x.jsonl",
        ],
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("ratio must be in [0,1]"));
}

#[test]
fn missing_input_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("dict.tsv"), "language\tmisspelled\tcorrect\tfrequency\n").unwrap();
    let out = run_in(
        dir.path(),
        &[
            "inject", "--task", "ic", "--dict", "dict.tsv", "--in", "absent.jsonl", "--out",
            "x.jsonl",
        ],
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_subcommand_prints_usage_and_exits_one() {
    let out = bin().arg("frobnicate").output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("Usage"), "no usage text: {stderr}");
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    write_ic_dataset(dir.path());
    std::fs::write(
        dir.path().join("dict.tsv"),
        "language\tmisspelled\tcorrect\tfrequency\nen\tgoverment\tgovernment\t1\n",
    )
    .unwrap();
    std::fs::write(
        dir.path().join("run.toml"),
        "[inject]\ntask = \"ic\"\ndict = \"dict.tsv\"\nratio = 0.5\nseed = 11\n\
         input = \"ic.jsonl\"\nout = \"out/noisy.jsonl\"\n",
    )
    .unwrap();
    // All parameters come from the file except ratio, which the flag overrides.
    assert_success(&run_in(
        dir.path(),
        &["inject", "--config", "run.toml", "--ratio", "0.25"],
    ));
    let manifest: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("out/manifest.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(manifest["config_snapshot"]["ratio"], 0.25);
    assert_eq!(manifest["config_snapshot"]["seed"], 11);
    assert_eq!(manifest["seed"], 11);
}

#[test]
fn stats_reports_token_and_noise_counts() {
    let dir = tempfile::tempdir().unwrap();
    write_ic_dataset(dir.path());
    std::fs::write(
        dir.path().join("report.json"),
        serde_json::json!({
            "records_processed": 2,
            "records_rejected": 0,
            "rejected_indices": [],
            "tokens_total": 11,
            "replacements_made": 2,
            "noise_ratio": 2.0 / 11.0,
            "per_record_replacements": {"1": 2},
        })
        .to_string(),
    )
    .unwrap();
    assert_success(&run_in(
        dir.path(),
        &[
            "stats", "--task", "ic", "--lang", "en", "--dataset", "demo", "--in", "ic.jsonl",
            "--report", "report.json", "--out", "stats.csv",
        ],
    ));
    let csv = std::fs::read_to_string(dir.path().join("stats.csv")).unwrap();
    assert!(csv.contains("demo,en,11,6,2,0.18"), "unexpected stats: {csv}");
}

#[test]
fn stats_pos_builds_histogram() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("tagged.tsv"), "ran\tVERB\ndog\tNOUN\ndog\tNOUN\nbroken\n").unwrap();
    assert_success(&run_in(
        dir.path(),
        &["stats", "pos", "--in", "tagged.tsv", "--out", "pos.csv"],
    ));
    let csv = std::fs::read_to_string(dir.path().join("pos.csv")).unwrap();
    assert!(csv.contains("NOUN,2"));
    assert!(csv.contains("VERB,1"));
}

#[test]
fn eval_and_report_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    write_ic_dataset(dir.path());
    std::fs::write(
        dir.path().join("clean.pred"),
        "{\"id\":0,\"label\":\"a\"}\n{\"id\":1,\"label\":\"b\"}\n",
    )
    .unwrap();
    std::fs::write(
        dir.path().join("noisy.pred"),
        "{\"id\":0,\"label\":\"a\"}\n{\"id\":1,\"label\":\"a\"}\n",
    )
    .unwrap();
    let out = run_in(
        dir.path(),
        &[
            "eval", "--task", "ic", "--lang", "en", "--model", "demo", "--gold", "ic.jsonl",
            "--clean-pred", "clean.pred", "--noisy-pred", "noisy.pred", "--out-dir", "runs",
        ],
    );
    assert_success(&out);
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("100.00\t50.00\t50.00"), "unexpected scores: {stdout}");

    assert_success(&run_in(
        dir.path(),
        &["eval", "report", "--runs", "runs", "--out-dir", "report"],
    ));
    let csv = std::fs::read_to_string(dir.path().join("report/gap_report.csv")).unwrap();
    assert!(csv.contains("demo,ic,en,100.00,50.00,50.00"), "unexpected report: {csv}");
    assert!(dir.path().join("report/gap_report.md").exists());
    assert!(dir.path().join("report/aggregates.csv").exists());
    assert!(dir.path().join("report/manifest.json").exists());
}
