use std::path::Path;
use std::process::{Command, Output};

use senseball::encoder::{load_checkpoint, Architecture};
use senseball::{EncoderParams, TrainConfig};

fn senseball(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_senseball"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

const TOY_TAXONOMY: &str = "apple.n.01\tfruit.n.01\npear.n.01\tfruit.n.01\noak.n.01\ttree.n.01\n\
fruit.n.01\tentity.n.01\ntree.n.01\tentity.n.01\napple.n.02\ttree.n.01\n";

const TOY_EMBEDDINGS: &str = "apple 1 0 0 0\npear 0.8 0.2 0 0\noak 0 1 0 0.1\nfruit 0.7 0.1 0.2 0\ntree 0.1 0.9 0.1 0\nentity 0.3 0.3 0.3 0.3\n";

const TOY_CORPUS: &str = "apple.n.01\t2\twe ate an apple today\n\
apple.n.02\t1\tthe apple grew tall\n\
pear.n.01\t0\tpear juice\n\
oak.n.01\t3\tunder the old oak\n\
banana.n.01\t0\tbanana bread\n";

fn toy_dir() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("tax.tsv"), TOY_TAXONOMY).unwrap();
    std::fs::write(dir.path().join("emb.txt"), TOY_EMBEDDINGS).unwrap();
    std::fs::write(dir.path().join("corpus.tsv"), TOY_CORPUS).unwrap();
    std::fs::write(
        dir.path().join("run.cfg"),
        "inventory = tax.tsv\nembeddings = emb.txt\nballs = balls.tsv\ncheckpoint = enc.ckpt\nepochs = 2\n",
    )
    .unwrap();
    dir
}

#[test]
fn help_version_and_usage_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&senseball(dir.path(), &["--help"])), 0);
    assert_eq!(code(&senseball(dir.path(), &["--version"])), 0);
    assert_eq!(code(&senseball(dir.path(), &[])), 1);
    assert_eq!(code(&senseball(dir.path(), &["frobnicate"])), 1);
    assert_eq!(code(&senseball(dir.path(), &["show-config", "--epochs", "many"])), 1);
    assert_eq!(code(&senseball(dir.path(), &["build-balls"])), 1, "missing inventory path");
    std::fs::write(dir.path().join("bad.cfg"), "colour = red\n").unwrap();
    assert_eq!(code(&senseball(dir.path(), &["-c", "bad.cfg", "show-config"])), 1);
}

#[test]
fn show_config_round_trips_through_a_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let o = senseball(dir.path(), &["show-config", "--seed", "9", "--levels", "1,0"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert!(text.contains("seed = 9\n"), "{text}");
    assert!(text.contains("levels = 0,1\n"), "{text}");
    assert!(text.contains("learning_rate = 0.01\n"), "{text}");
    std::fs::write(dir.path().join("c.cfg"), &text).unwrap();
    let again = senseball(dir.path(), &["-c", "c.cfg", "show-config"]);
    assert_eq!(stdout(&again), text);
}

#[test]
fn build_verify_and_query_toy_inventory() {
    let dir = toy_dir();
    let p = dir.path();
    let o = senseball(p, &["-c", "run.cfg", "build-balls"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("0 containment, 0 overlap"));
    assert!(p.join("balls.tsv.manifest.json").is_file());
    assert!(p.join("balls.tsv.report.txt").is_file());
    assert_eq!(code(&senseball(p, &["-c", "run.cfg", "verify-balls"])), 0);

    let ask = |a: &str, b: &str| stdout(&senseball(p, &["-c", "run.cfg", "query", a, b]));
    assert_eq!(ask("apple.n.01", "fruit.n.01"), "yes\n");
    assert_eq!(ask("apple.n.01", "entity.n.01"), "yes\n");
    assert_eq!(ask("apple.n.01", "pear.n.01"), "no\n");
    assert_eq!(ask("oak.n.01", "oak.n.01"), "yes\n");
    assert_eq!(code(&senseball(p, &["-c", "run.cfg", "query", "kiwi.n.01", "fruit.n.01"])), 2);
    assert_eq!(code(&senseball(p, &["-c", "run.cfg", "query", "kiwi", "fruit.n.01"])), 1);

    // shrink fruit.n.01 so its children stick out
    let balls = std::fs::read_to_string(p.join("balls.tsv")).unwrap();
    let broken: String = balls
        .lines()
        .map(|l| {
            let mut cols: Vec<String> = l.split('\t').map(str::to_string).collect();
            if cols[0] == "fruit.n.01" {
                cols[1] = "0.01".into();
            }
            cols.join("\t") + "\n"
        })
        .collect();
    std::fs::write(p.join("broken.tsv"), broken).unwrap();
    let o = senseball(p, &["-c", "run.cfg", "verify-balls", "--balls", "broken.tsv"]);
    assert_eq!(code(&o), 3);
    assert!(stdout(&o).contains("fruit.n.01"), "{}", stdout(&o));
}

#[test]
fn corrupted_embeddings_are_a_data_error() {
    let dir = toy_dir();
    std::fs::write(dir.path().join("emb.txt"), "apple 1 0 0\npear 0.8 oops 0\n").unwrap();
    let o = senseball(dir.path(), &["-c", "run.cfg", "build-balls"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("emb.txt"));
}

#[test]
fn prepare_train_eval_toy() {
    let dir = toy_dir();
    let p = dir.path();
    assert_eq!(code(&senseball(p, &["-c", "run.cfg", "build-balls"])), 0);
    let o = senseball(p, &["-c", "run.cfg", "prepare", "--out", "prep", "--corpus", "toy=corpus.tsv"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let l0 = std::fs::read_to_string(p.join("prep/toy.L0.tsv")).unwrap();
    assert_eq!(l0.lines().count(), 4, "banana has no ball");
    let l1 = std::fs::read_to_string(p.join("prep/toy.L1.tsv")).unwrap();
    assert!(l1.starts_with("fruit.n.01\tapple.n.01\t2\twe ate an apple today\n"), "{l1}");
    let l3 = std::fs::read_to_string(p.join("prep/toy.L3.tsv")).unwrap();
    assert!(l3.is_empty());
    let stats = std::fs::read_to_string(p.join("prep/stats.tsv")).unwrap();
    assert!(stats.contains("toy\t0\t5\t5\t4\t4\t4\t0.8000\t0.8000"), "{stats}");

    let o = senseball(p, &["-c", "run.cfg", "train", "--data", "prep/toy.L1.tsv"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let curve = std::fs::read_to_string(p.join("enc.ckpt.curve.tsv")).unwrap();
    assert_eq!(curve.lines().count(), 1 + 3);

    let o = senseball(p, &["-c", "run.cfg", "eval", "--data", "prep", "--dataset", "toy", "--out", "ev"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report = std::fs::read_to_string(p.join("ev/report.tsv")).unwrap();
    assert_eq!(report.lines().count(), 1 + 5);
    // L2 and above: every apple candidate shares entity.n.01
    assert!(report.contains("toy\t2\t1.000000\t1.000000\t1.000000\t4\t4\t0\t4\t"), "{report}");
    assert!(report.contains("toy\t3\t0.000000\t0.000000\t0.000000\t0\t0\t0\t0\t"), "{report}");
    let preds = std::fs::read_to_string(p.join("ev/predictions.toy.L1.tsv")).unwrap();
    assert_eq!(preds.lines().count(), 1 + 4);

    // a level without a prepared file is an explicit error
    let o = senseball(p, &["-c", "run.cfg", "eval", "--data", "prep", "--dataset", "other", "--out", "ev2"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("other.L0.tsv"));
}

#[test]
fn empty_corpus_and_zero_epochs() {
    let dir = toy_dir();
    let p = dir.path();
    std::fs::write(p.join("empty.tsv"), "").unwrap();
    assert_eq!(code(&senseball(p, &["-c", "run.cfg", "build-balls"])), 0);
    let o = senseball(p, &["-c", "run.cfg", "prepare", "--out", "prep", "--corpus", "e=empty.tsv", "--corpus", "toy=corpus.tsv"]);
    assert_eq!(code(&o), 0);
    assert!(std::fs::read_to_string(p.join("prep/e.L1.tsv")).unwrap().is_empty());
    let stats = std::fs::read_to_string(p.join("prep/stats.tsv")).unwrap();
    assert!(stats.contains("e\t1\t0\t0\t0\t0\t0\t0.0000\t0.0000"), "{stats}");

    // training on nothing fails as a data error
    assert_eq!(code(&senseball(p, &["-c", "run.cfg", "train", "--data", "prep/e.L1.tsv"])), 2);

    let o = senseball(p, &["-c", "run.cfg", "train", "--data", "prep/toy.L0.tsv", "--epochs", "0", "--seed", "5"]);
    assert_eq!(code(&o), 0);
    let params = load_checkpoint(p.join("enc.ckpt")).unwrap();
    let cfg = TrainConfig {
        epochs: 0,
        seed: 5,
        ..TrainConfig::default()
    };
    let arch = Architecture::new(4, params.arch.output_dim, &cfg).unwrap();
    assert_eq!(params, EncoderParams::init(arch, &cfg).unwrap());

    // empty test set gives zero counts
    let o = senseball(p, &["-c", "run.cfg", "eval", "--data", "prep", "--dataset", "e", "--out", "ev", "--levels", "1"]);
    assert_eq!(code(&o), 0);
    let report = std::fs::read_to_string(p.join("ev/report.tsv")).unwrap();
    assert!(report.contains("e\t1\t0.000000\t0.000000\t0.000000\t0\t0\t0\t0\t"), "{report}");
}

#[test]
fn fixture_overfits_from_the_command_line() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let o = senseball(
        p,
        &[
            "make-fixture", "--out", "fx", "--n-top", "1", "--senses-per-parent", "1",
            "--records-per-sense", "1", "--test-per-sense", "0", "--embedding-dim", "4",
        ],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let train = std::fs::read_to_string(p.join("fx/train.tsv")).unwrap();
    let first = train.lines().next().unwrap().to_string() + "\n";
    std::fs::write(p.join("one.tsv"), first).unwrap();
    let args = [
        "--inventory", "fx/taxonomy.tsv", "--embeddings", "fx/embeddings.txt", "--balls", "b.tsv",
        "--checkpoint", "c.ckpt", "--extension-code-width", "4",
    ];
    let mut build = vec!["build-balls"];
    build.extend(args);
    assert_eq!(code(&senseball(p, &build)), 0);
    let mut tr = vec!["train", "--data", "one.tsv", "--epochs", "300", "--batch-size", "1", "--learning-rate", "0.05"];
    tr.extend(args);
    assert_eq!(code(&senseball(p, &tr)), 0);
    let curve = std::fs::read_to_string(p.join("c.ckpt.curve.tsv")).unwrap();
    let last: f64 = curve.lines().last().unwrap().split('\t').nth(1).unwrap().parse().unwrap();
    assert!(last < 1e-3, "final loss {last}");
}
