//! Sense-annotated corpora, ball-coverage filtering and hypernym lifting.
//!
//! Line format, tab-separated:
//!
//! ```text
//! sense_id  idx1,idx2,...  tok1 tok2 ... tokm                  (level 0)
//! target    original       idx1,idx2,...  tok1 tok2 ... tokm   (lifted)
//! ```
//!
//! Importing the standard XML evaluation corpora is left to an external
//! script. The mapping: one record per `<instance>`, tokens are the lowercased
//! `<wf>`/`<instance>` surface forms of its `<sentence>`, `indices` is the
//! instance position (multiword lemmas cover consecutive positions), and the
//! sense key from the gold key file becomes `lemma.pos.nn` via the lexical
//! database's key-to-synset index. Instances with several gold keys keep the
//! first.

use std::collections::BTreeSet;
use std::fmt::{self, Write as _};
use std::io::{BufRead, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::BallConfiguration;
use crate::inventory::{Inventory, ParseSenseIdError, SenseId};

/// One annotated target occurrence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrainingRecord {
    /// The label to predict (the annotation itself, or its lifted hypernym).
    pub target: SenseId,
    /// The annotated sense.
    pub original: SenseId,
    pub tokens: Vec<String>,
    /// Sorted 0-based positions of the annotated word(s).
    pub indices: Vec<usize>,
}

impl TrainingRecord {
    /// A level-0 record. Tokens are lower-cased and indices sorted.
    pub fn new(sense: SenseId, tokens: Vec<String>, mut indices: Vec<usize>) -> Result<Self> {
        indices.sort_unstable();
        indices.dedup();
        if indices.is_empty() {
            return Err(Error::Config("record without target index".into()));
        }
        if let Some(&bad) = indices.iter().find(|&&i| i >= tokens.len()) {
            return Err(Error::Config(format!(
                "index {bad} out of range for {} tokens",
                tokens.len()
            )));
        }
        Ok(TrainingRecord {
            target: sense.clone(),
            original: sense,
            tokens: tokens.into_iter().map(|t| t.to_lowercase()).collect(),
            indices,
        })
    }

    pub fn is_lifted(&self) -> bool {
        self.target != self.original
    }
}

fn parse_indices(field: &str) -> Option<Vec<usize>> {
    field.split(',').map(|s| s.trim().parse().ok()).collect()
}

/// Parses a corpus in either the three-column or four-column form.
pub fn parse_annotated_corpus<R: BufRead>(reader: R, source_name: &str) -> Result<Vec<TrainingRecord>> {
    let mut out = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = lineno + 1;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        let sense = |s: &str| -> Result<SenseId> {
            s.trim()
                .parse()
                .map_err(|e: ParseSenseIdError| Error::parse(source_name, lineno, e.to_string()))
        };
        let (target, original, idx, toks) = match cols.as_slice() {
            [t, i, toks] => (sense(t)?, None, *i, *toks),
            [t, o, i, toks] => (sense(t)?, Some(sense(o)?), *i, *toks),
            _ => return Err(Error::parse(source_name, lineno, "expected 3 or 4 tab-separated columns")),
        };
        let indices =
            parse_indices(idx).ok_or_else(|| Error::parse(source_name, lineno, format!("bad index list {idx:?}")))?;
        let tokens: Vec<String> = toks.split_whitespace().map(str::to_string).collect();
        let mut rec = TrainingRecord::new(target, tokens, indices).map_err(|e| Error::parse(source_name, lineno, e.to_string()))?;
        if let Some(o) = original {
            rec.original = o;
        }
        out.push(rec);
    }
    Ok(out)
}

pub fn load_corpus(path: impl AsRef<Path>) -> Result<Vec<TrainingRecord>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_annotated_corpus(std::io::BufReader::new(file), &path.display().to_string())
}

/// Writes records; `with_original` selects the four-column form.
pub fn write_records<W: Write>(mut out: W, records: &[TrainingRecord], with_original: bool) -> std::io::Result<()> {
    for r in records {
        let idx = r.indices.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(",");
        if with_original {
            writeln!(out, "{}\t{}\t{}\t{}", r.target, r.original, idx, r.tokens.join(" "))?;
        } else {
            writeln!(out, "{}\t{}\t{}", r.target, idx, r.tokens.join(" "))?;
        }
    }
    Ok(())
}

pub fn save_records(path: impl AsRef<Path>, records: &[TrainingRecord], with_original: bool) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    write_records(&mut w, records, with_original).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

/// Coverage counts for one dataset at one hypernym level.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DatasetStats {
    pub level: usize,
    /// Distinct annotated senses in the input.
    pub n_senses: usize,
    pub n_records: usize,
    /// Distinct targets of the kept records (the level-`level` hypernyms).
    pub n_ball_senses: usize,
    /// Distinct annotated senses whose records were kept.
    pub n_covered_senses: usize,
    pub n_ball_records: usize,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl DatasetStats {
    fn tally(level: usize, input: &[TrainingRecord], kept: &[TrainingRecord]) -> Self {
        let distinct = |it: &mut dyn Iterator<Item = &SenseId>| it.collect::<BTreeSet<_>>().len();
        DatasetStats {
            level,
            n_senses: distinct(&mut input.iter().map(|r| &r.original)),
            n_records: input.len(),
            n_ball_senses: distinct(&mut kept.iter().map(|r| &r.target)),
            n_covered_senses: distinct(&mut kept.iter().map(|r| &r.original)),
            n_ball_records: kept.len(),
        }
    }

    /// Share of annotated senses whose records survive.
    pub fn ball_ratio(&self) -> f64 {
        ratio(self.n_covered_senses, self.n_senses)
    }

    /// Share of records that survive.
    pub fn record_ratio(&self) -> f64 {
        ratio(self.n_ball_records, self.n_records)
    }
}

/// Keeps records whose target has a ball.
pub fn filter_by_ball_coverage(records: &[TrainingRecord], config: &BallConfiguration) -> (Vec<TrainingRecord>, DatasetStats) {
    let kept: Vec<TrainingRecord> = records.iter().filter(|r| config.has(&r.target)).cloned().collect();
    let stats = DatasetStats::tally(0, records, &kept);
    (kept, stats)
}

/// Replaces each target with the `level`-th hypernym of the annotated sense,
/// dropping records whose hypernym is missing or has no ball.
pub fn lift_to_level(
    records: &[TrainingRecord],
    level: usize,
    inv: &Inventory,
    config: &BallConfiguration,
) -> (Vec<TrainingRecord>, DatasetStats) {
    let mut kept = Vec::new();
    for r in records {
        let Ok(Some(h)) = inv.hypernym_at(&r.original, level) else {
            continue;
        };
        if !config.has(&h) {
            continue;
        }
        kept.push(TrainingRecord {
            target: h,
            ..r.clone()
        });
    }
    let stats = DatasetStats::tally(level, records, &kept);
    (kept, stats)
}

/// Per-dataset, per-level coverage table.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StatsTable {
    pub rows: Vec<(String, DatasetStats)>,
}

/// Collects stats rows in the given order.
pub fn dataset_report(rows: impl IntoIterator<Item = (String, DatasetStats)>) -> StatsTable {
    StatsTable {
        rows: rows.into_iter().collect(),
    }
}

impl StatsTable {
    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Tab-separated, one row per dataset and level.
    pub fn to_tsv(&self) -> String {
        let mut s = String::from("dataset\tlevel\tsenses\trecords\tball_senses\tcovered_senses\tball_records\tball_ratio\trecord_ratio\n");
        for (name, st) in &self.rows {
            let _ = writeln!(
                s,
                "{name}\t{}\t{}\t{}\t{}\t{}\t{}\t{:.4}\t{:.4}",
                st.level,
                st.n_senses,
                st.n_records,
                st.n_ball_senses,
                st.n_covered_senses,
                st.n_ball_records,
                st.ball_ratio(),
                st.record_ratio()
            );
        }
        s
    }
}

impl fmt::Display for StatsTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.rows.is_empty() {
            return Ok(());
        }
        let w = self.rows.iter().map(|(n, _)| n.len()).max().unwrap_or(0).max(7);
        writeln!(
            f,
            "{:<w$}  {:>5}  {:>8}  {:>8}  {:>8}  {:>8}  {:>10}  {:>8}  {:>8}",
            "dataset", "level", "#senses", "#records", "#ball", "#covered", "#ball-rec", "ball%", "rec%"
        )?;
        for (name, st) in &self.rows {
            let label = if st.level == 0 { "-".to_string() } else { format!("L{}", st.level) };
            writeln!(
                f,
                "{:<w$}  {:>5}  {:>8}  {:>8}  {:>8}  {:>8}  {:>10}  {:>7.2}%  {:>7.2}%",
                name,
                label,
                st.n_senses,
                st.n_records,
                st.n_ball_senses,
                st.n_covered_senses,
                st.n_ball_records,
                100.0 * st.ball_ratio(),
                100.0 * st.record_ratio()
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Ball, Vector};

    fn sid(s: &str) -> SenseId {
        s.parse().unwrap()
    }

    const AIM_LINE: &str = "aim.n.02\t4\thave you set specific objectives for your career\n";

    fn aim_inventory() -> Inventory {
        Inventory::parse(
            "aim.n.02\tgoal.n.01\ngoal.n.01\tcontent.n.05\ncontent.n.05\tcognition.n.01\n".as_bytes(),
            "aim",
        )
        .unwrap()
    }

    fn balls_for(senses: &[&str]) -> BallConfiguration {
        let mut c = BallConfiguration::new(2, 1).unwrap();
        for s in senses {
            c.insert(Ball::new(sid(s), Vector::new(vec![1.0, 0.0]).unwrap(), 1.0).unwrap()).unwrap();
        }
        c
    }

    #[test]
    fn parses_worked_example() {
        let recs = parse_annotated_corpus(AIM_LINE.as_bytes(), "aim").unwrap();
        assert_eq!(recs.len(), 1);
        let r = &recs[0];
        assert_eq!(r.target, sid("aim.n.02"));
        assert_eq!(r.original, r.target);
        assert_eq!(r.tokens, ["have", "you", "set", "specific", "objectives", "for", "your", "career"]);
        assert_eq!(r.indices, vec![4]);
        assert_eq!(r.tokens[r.indices[0]], "objectives");
    }

    #[test]
    fn parses_multiword_and_case() {
        let recs = parse_annotated_corpus("ice_cream.n.01\t3,2\tI Like Ice Cream\n".as_bytes(), "x").unwrap();
        assert_eq!(recs[0].indices, vec![2, 3]);
        assert_eq!(recs[0].tokens, ["i", "like", "ice", "cream"]);
    }

    #[test]
    fn empty_corpus() {
        assert!(parse_annotated_corpus("".as_bytes(), "e").unwrap().is_empty());
    }

    #[test]
    fn rejects_bad_lines() {
        for (src, line) in [
            ("aim.n.02\t9\ta b c\n", 1),
            ("aim.n.02\t4\ta b c d e\nbad\n", 2),
            ("aim.n.02\tx\ta\n", 1),
            ("aim.q.02\t0\ta\n", 1),
            ("aim.n.02\t\ta\n", 1),
        ] {
            match parse_annotated_corpus(src.as_bytes(), "bad") {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{src:?}"),
                other => panic!("{src:?}: {other:?}"),
            }
        }
    }

    #[test]
    fn four_column_round_trip() {
        let inv = aim_inventory();
        let recs = parse_annotated_corpus(AIM_LINE.as_bytes(), "aim").unwrap();
        let (lifted, _) = lift_to_level(&recs, 1, &inv, &balls_for(&["goal.n.01"]));
        let mut buf = Vec::new();
        write_records(&mut buf, &lifted, true).unwrap();
        assert_eq!(
            String::from_utf8(buf.clone()).unwrap(),
            "goal.n.01\taim.n.02\t4\thave you set specific objectives for your career\n"
        );
        assert_eq!(parse_annotated_corpus(buf.as_slice(), "rt").unwrap(), lifted);
    }

    #[test]
    fn lifts_worked_example() {
        let inv = aim_inventory();
        let balls = balls_for(&["aim.n.02", "goal.n.01", "content.n.05"]);
        let recs = parse_annotated_corpus(AIM_LINE.as_bytes(), "aim").unwrap();
        let (l1, s1) = lift_to_level(&recs, 1, &inv, &balls);
        assert_eq!(l1[0].target, sid("goal.n.01"));
        assert_eq!(l1[0].original, sid("aim.n.02"));
        assert_eq!(l1[0].indices, vec![4]);
        assert_eq!(s1.n_ball_records, 1);
        let (l2, _) = lift_to_level(&recs, 2, &inv, &balls);
        assert_eq!(l2[0].target, sid("content.n.05"));
        // cognition.n.01 has no ball
        let (l3, s3) = lift_to_level(&recs, 3, &inv, &balls);
        assert!(l3.is_empty());
        assert_eq!((s3.n_records, s3.n_ball_records), (1, 0));
        // past the root
        let (l4, _) = lift_to_level(&recs, 4, &inv, &balls);
        assert!(l4.is_empty());
    }

    #[test]
    fn coverage_ratios() {
        let src = "a.n.01\t0\tx\nb.n.01\t0\tx\nc.n.01\t0\tx\nd.n.01\t0\tx\ne.n.01\t0\tx\n";
        let recs = parse_annotated_corpus(src.as_bytes(), "r").unwrap();
        let (kept, st) = filter_by_ball_coverage(&recs, &balls_for(&["a.n.01", "c.n.01", "e.n.01"]));
        assert_eq!(kept.len(), 3);
        assert_eq!(st.ball_ratio(), 0.6);
        assert_eq!(st.record_ratio(), 0.6);
        let (all, st) = filter_by_ball_coverage(&recs, &balls_for(&["a.n.01", "b.n.01", "c.n.01", "d.n.01", "e.n.01"]));
        assert_eq!(all, recs);
        assert_eq!(st.ball_ratio(), 1.0);
        let (none, st) = filter_by_ball_coverage(&recs, &balls_for(&[]));
        assert!(none.is_empty());
        assert_eq!(st.record_ratio(), 0.0);
    }

    #[test]
    fn published_ratios_render() {
        let semcor = DatasetStats {
            n_senses: 25845,
            n_covered_senses: 15025,
            n_ball_senses: 15025,
            ..Default::default()
        };
        assert_eq!(format!("{:.2}", 100.0 * semcor.ball_ratio()), "58.14");
        let senseval2 = DatasetStats {
            n_records: 2275,
            n_ball_records: 1459,
            ..Default::default()
        };
        let table = dataset_report([("Senseval-2".to_string(), senseval2)]);
        assert!(table.to_tsv().contains("\t0.6413\n"));
        assert!(table.to_string().contains("64.13%"));
        assert_eq!(dataset_report(Vec::new()).to_string(), "");
    }
}
