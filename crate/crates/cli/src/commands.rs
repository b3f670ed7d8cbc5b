use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

use senseball::corpus::{dataset_report, filter_by_ball_coverage, lift_to_level, load_corpus, save_records, DatasetStats};
use senseball::encoder::{load_checkpoint, save_checkpoint, train};
use senseball::evaluator::{evaluate_level, make_synthetic_fixture, ExperimentEnv, FixtureSpec, ReportTable};
use senseball::geometry::{construct_balls, verify_configuration};
use senseball::selector::{deduction_query, write_predictions};
use senseball::{BallConfiguration, EmbeddingTable, Inventory, SenseId};

use crate::config::{usage, RunConfig};
use crate::manifest::{sidecar, write_manifest};

/// The configuration is valid but the geometry is not.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct VerificationFailed(pub String);

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn parent_dir(path: &Path) -> Result<()> {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => create_dir(p),
        _ => Ok(()),
    }
}

pub fn show_config(cfg: &RunConfig) -> Result<()> {
    print!("{}", cfg.render());
    Ok(())
}

pub fn build_balls(cfg: &RunConfig) -> Result<()> {
    let inv_path = cfg.require(&cfg.inventory, "inventory")?;
    let emb_path = cfg.require(&cfg.embeddings, "embeddings")?;
    let out = cfg.require(&cfg.balls, "balls")?;
    let inv = Inventory::load(inv_path)?;
    let table = EmbeddingTable::load(emb_path)?;
    let balls = match construct_balls(inv.taxonomy(), &table, &cfg.geometry) {
        Ok(b) => b,
        Err(senseball::Error::Construction(msg)) => bail!(VerificationFailed(format!("construction failed: {msg}"))),
        Err(e) => return Err(e.into()),
    };
    let report = verify_configuration(&balls, inv.taxonomy(), &cfg.geometry)?;
    parent_dir(out)?;
    balls.save(out)?;
    let report_path = sidecar(out, ".report.txt");
    write_text(&report_path, &format!("{report}\n"))?;
    write_manifest(
        "build-balls",
        cfg,
        &[inv_path.to_path_buf(), emb_path.to_path_buf()],
        &[out.to_path_buf(), report_path.clone()],
        &sidecar(out, ".manifest.json"),
    )?;
    println!("{} balls of dimension {} written to {}", balls.len(), balls.dim(), out.display());
    println!("{report}");
    if !report.is_empty() {
        bail!(VerificationFailed(format!("{} violations", report.len())));
    }
    Ok(())
}

pub fn verify_balls(cfg: &RunConfig) -> Result<()> {
    let inv = Inventory::load(cfg.require(&cfg.inventory, "inventory")?)?;
    let balls = BallConfiguration::load(cfg.require(&cfg.balls, "balls")?)?;
    let report = verify_configuration(&balls, inv.taxonomy(), &cfg.geometry)?;
    println!("{report}");
    if !report.is_empty() {
        bail!(VerificationFailed(format!("{} violations", report.len())));
    }
    Ok(())
}

/// Splits `name=path`.
pub fn named_path(s: &str) -> Result<(String, PathBuf), String> {
    match s.split_once('=') {
        Some((n, p)) if !n.is_empty() && !p.is_empty() && !n.contains(['/', '.']) => Ok((n.to_string(), PathBuf::from(p))),
        _ => Err(format!("expected NAME=PATH with a plain name, got {s:?}")),
    }
}

pub fn dataset_file(dir: &Path, name: &str, level: usize) -> PathBuf {
    dir.join(format!("{name}.L{level}.tsv"))
}

pub fn prepare(cfg: &RunConfig, corpora: &[(String, PathBuf)]) -> Result<()> {
    if corpora.is_empty() {
        return Err(usage("prepare needs at least one --corpus NAME=PATH"));
    }
    let inv_path = cfg.require(&cfg.inventory, "inventory")?;
    let balls_path = cfg.require(&cfg.balls, "balls")?;
    let out = cfg.require(&cfg.out, "out")?;
    let inv = Inventory::load(inv_path)?;
    let balls = BallConfiguration::load(balls_path)?;
    create_dir(out)?;
    let mut inputs = vec![inv_path.to_path_buf(), balls_path.to_path_buf()];
    let mut outputs = Vec::new();
    let mut rows: Vec<(String, DatasetStats)> = Vec::new();
    for (name, path) in corpora {
        let records = load_corpus(path)?;
        inputs.push(path.clone());
        for &level in &cfg.levels {
            let (kept, stats) = if level == 0 {
                filter_by_ball_coverage(&records, &balls)
            } else {
                lift_to_level(&records, level, &inv, &balls)
            };
            let file = dataset_file(out, name, level);
            save_records(&file, &kept, level > 0)?;
            outputs.push(file);
            rows.push((name.clone(), stats));
        }
    }
    let table = dataset_report(rows);
    let tsv = out.join("stats.tsv");
    let txt = out.join("stats.txt");
    write_text(&tsv, &table.to_tsv())?;
    write_text(&txt, &table.to_string())?;
    outputs.push(tsv);
    outputs.push(txt);
    write_manifest("prepare", cfg, &inputs, &outputs, &out.join("manifest.json"))?;
    print!("{table}");
    Ok(())
}

pub fn train_cmd(cfg: &RunConfig, data: &Path) -> Result<()> {
    let balls_path = cfg.require(&cfg.balls, "balls")?;
    let emb_path = cfg.require(&cfg.embeddings, "embeddings")?;
    let out = cfg.require(&cfg.checkpoint, "checkpoint")?;
    let balls = BallConfiguration::load(balls_path)?;
    let table = EmbeddingTable::load(emb_path)?;
    let records = load_corpus(data)?;
    let outcome = train(&records, &balls, &table, &cfg.train)?;
    parent_dir(out)?;
    save_checkpoint(&outcome.params, out)?;
    let curve_path = sidecar(out, ".curve.tsv");
    let mut curve = String::from("epoch\tmean_loss\n");
    for (e, l) in outcome.curve.iter().enumerate() {
        let _ = writeln!(curve, "{e}\t{l:e}");
    }
    write_text(&curve_path, &curve)?;
    write_manifest(
        "train",
        cfg,
        &[balls_path.to_path_buf(), emb_path.to_path_buf(), data.to_path_buf()],
        &[out.to_path_buf(), curve_path],
        &sidecar(out, ".manifest.json"),
    )?;
    println!(
        "trained on {} records for {} epochs: loss {:.6} -> {:.6}",
        records.len(),
        cfg.train.epochs,
        outcome.curve[0],
        outcome.curve.last().copied().unwrap_or(f64::NAN)
    );
    Ok(())
}

pub fn eval(cfg: &RunConfig, data_dir: &Path, datasets: &[String]) -> Result<()> {
    if datasets.is_empty() {
        return Err(usage("eval needs at least one --dataset NAME"));
    }
    let inv_path = cfg.require(&cfg.inventory, "inventory")?;
    let balls_path = cfg.require(&cfg.balls, "balls")?;
    let emb_path = cfg.require(&cfg.embeddings, "embeddings")?;
    let ckpt_path = cfg.require(&cfg.checkpoint, "checkpoint")?;
    let out = cfg.require(&cfg.out, "out")?;
    let mut inputs = vec![
        inv_path.to_path_buf(),
        balls_path.to_path_buf(),
        emb_path.to_path_buf(),
        ckpt_path.to_path_buf(),
    ];
    // every requested file must exist before any work starts
    for name in datasets {
        for &level in &cfg.levels {
            let f = dataset_file(data_dir, name, level);
            if !f.is_file() {
                return Err(senseball::Error::MissingDataset(f.display().to_string()).into());
            }
            inputs.push(f);
        }
    }
    let params = load_checkpoint(ckpt_path)?;
    let env = ExperimentEnv {
        inventory: Inventory::load(inv_path)?,
        balls: BallConfiguration::load(balls_path)?,
        embeddings: EmbeddingTable::load(emb_path)?,
        geometry: cfg.geometry.clone(),
        datasets: Default::default(),
    };
    create_dir(out)?;
    let mut table = ReportTable::default();
    let mut outputs = Vec::new();
    for name in datasets {
        for &level in &cfg.levels {
            let records = load_corpus(dataset_file(data_dir, name, level))?;
            let r = evaluate_level(&params, name, &records, level, &env, params.config.window)?;
            let pred_path = out.join(format!("predictions.{name}.L{level}.tsv"));
            let mut buf = Vec::new();
            write_predictions(&mut buf, r.predictions.iter().map(|(id, p)| (id.as_str(), p)))?;
            std::fs::write(&pred_path, buf).with_context(|| format!("writing {}", pred_path.display()))?;
            outputs.push(pred_path);
            table.push(name.clone(), level, r.report);
        }
    }
    let collisions = env.inventory.all_hypernym_collisions();
    let mut coll = String::from("sense_a\tsense_b\n");
    for (a, b) in &collisions {
        let _ = writeln!(coll, "{a}\t{b}");
    }
    let mut text = table.to_string();
    let _ = writeln!(text, "\n{} sense pairs share a direct hypernym (see collisions.tsv)", collisions.len());
    let files = [
        ("report.tsv", table.to_tsv()),
        ("report.txt", text.clone()),
        ("collisions.tsv", coll),
    ];
    for (f, body) in files {
        let p = out.join(f);
        write_text(&p, &body)?;
        outputs.push(p);
    }
    write_manifest("eval", cfg, &inputs, &outputs, &out.join("manifest.json"))?;
    print!("{text}");
    Ok(())
}

pub fn query(cfg: &RunConfig, a: &SenseId, b: &SenseId) -> Result<()> {
    let balls = BallConfiguration::load(cfg.require(&cfg.balls, "balls")?)?;
    let yes = deduction_query(&balls, a, b, &cfg.geometry)?;
    let mut stdout = std::io::stdout().lock();
    writeln!(stdout, "{}", if yes { "yes" } else { "no" })?;
    Ok(())
}

pub fn make_fixture(cfg: &RunConfig, spec: &FixtureSpec) -> Result<()> {
    let out = cfg.require(&cfg.out, "out")?;
    let f = make_synthetic_fixture(spec).map_err(|e| usage(e.to_string()))?;
    create_dir(out)?;
    let tax = out.join("taxonomy.tsv");
    let emb = out.join("embeddings.txt");
    let train = out.join("train.tsv");
    let test = out.join("test.tsv");
    let mut buf = Vec::new();
    f.inventory.write(&mut buf)?;
    std::fs::write(&tax, buf).with_context(|| format!("writing {}", tax.display()))?;
    let mut buf = Vec::new();
    f.embeddings.write(&mut buf)?;
    std::fs::write(&emb, buf).with_context(|| format!("writing {}", emb.display()))?;
    save_records(&train, &f.train, false)?;
    save_records(&test, &f.test, false)?;
    let outputs = [tax, emb, train, test];
    write_manifest("make-fixture", cfg, &[], &outputs, &out.join("manifest.json"))?;
    println!(
        "fixture with {} senses, {} training and {} test records written to {}",
        f.inventory.taxonomy().len(),
        f.train.len(),
        f.test.len(),
        out.display()
    );
    Ok(())
}
