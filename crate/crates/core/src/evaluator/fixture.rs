//! Seeded synthetic taxonomies, embeddings and annotated corpora.
//!
//! The fixture taxonomy is `entity.n.01 -> n_top categories -> leaves`, with
//! an optional chain of single-child ancestors above `entity.n.01` so that
//! deeper hypernym levels exist. Lemmas come in pairs: consecutive leaves
//! (and consecutive categories) share a lemma, so many words have two senses
//! under the same parent. A sentence's context words are drawn from a cue
//! vocabulary of the target sense's direct hypernym, which makes the
//! hypernym recoverable from context while sibling senses stay ambiguous.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::corpus::TrainingRecord;
use crate::embedding::EmbeddingTable;
use crate::error::{Error, Result};
use crate::geometry::Vector;
use crate::inventory::{Inventory, Pos, SenseId, Taxonomy};

#[derive(Debug, Clone, PartialEq)]
pub struct FixtureSpec {
    pub seed: u64,
    pub n_top: usize,
    pub senses_per_parent: usize,
    /// Size of the filler vocabulary.
    pub vocab_size: usize,
    /// Training records per sense.
    pub records_per_sense: usize,
    /// Test records per sense, generated before the training records.
    pub test_per_sense: usize,
    /// Single-child ancestors above the root category.
    pub upper_chain: usize,
    pub embedding_dim: usize,
    /// Cue words per hypernym.
    pub cue_words: usize,
    /// Chance that a context position holds a cue word rather than filler.
    pub cue_rate: f64,
    pub sentence_len: usize,
}

impl Default for FixtureSpec {
    fn default() -> Self {
        FixtureSpec {
            seed: 42,
            n_top: 4,
            senses_per_parent: 3,
            vocab_size: 200,
            records_per_sense: 200,
            test_per_sense: 50,
            upper_chain: 0,
            embedding_dim: 16,
            cue_words: 8,
            cue_rate: 0.75,
            sentence_len: 7,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticFixture {
    pub inventory: Inventory,
    pub embeddings: EmbeddingTable,
    /// Records whose senses are the categories and leaves, grouped by sense.
    pub train: Vec<TrainingRecord>,
    pub test: Vec<TrainingRecord>,
}

const ROOT: &str = "entity";

fn unit(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let n = crate::geometry::norm(&v);
        if n > 1e-6 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

fn paired(lemma: &str, i: usize) -> SenseId {
    SenseId::new(format!("{lemma}{}", i / 2), Pos::Noun, (i % 2) as u32 + 1)
}

fn cue(h: usize, j: usize) -> String {
    format!("cue{h}x{j}")
}

/// Builds the fixture described by `spec`; identical specs give identical fixtures.
pub fn make_synthetic_fixture(spec: &FixtureSpec) -> Result<SyntheticFixture> {
    if spec.n_top == 0
        || spec.senses_per_parent == 0
        || spec.vocab_size == 0
        || spec.embedding_dim == 0
        || spec.cue_words == 0
        || spec.sentence_len < 2
        || !(0.0..=1.0).contains(&spec.cue_rate)
    {
        return Err(Error::Config("fixture sizes must be positive".into()));
    }
    let root = SenseId::new(ROOT, Pos::Noun, 1);
    let tops: Vec<SenseId> = (0..spec.n_top).map(|t| paired("category", t)).collect();
    let mut edges = Vec::new();
    let mut upper = root.clone();
    for k in 0..spec.upper_chain {
        let a = SenseId::new(format!("abstraction{k}"), Pos::Noun, 1);
        edges.push((upper, a.clone()));
        upper = a;
    }
    // senses with records, each with the index of its cue vocabulary
    // (0 for the root, t + 1 for category t)
    let mut labelled: Vec<(SenseId, usize)> = Vec::new();
    for t in &tops {
        edges.push((t.clone(), root.clone()));
        labelled.push((t.clone(), 0));
    }
    for (t, top) in tops.iter().enumerate() {
        for j in 0..spec.senses_per_parent {
            let leaf = paired("word", t * spec.senses_per_parent + j);
            edges.push((leaf.clone(), top.clone()));
            labelled.push((leaf, t + 1));
        }
    }
    let (taxonomy, dropped) = Taxonomy::from_edges(edges, [])?;
    debug_assert!(dropped.is_empty());
    let inventory = Inventory::from_taxonomy(taxonomy);

    let dim = spec.embedding_dim;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut embeddings = EmbeddingTable::new(dim);
    let mut lemmas: Vec<&str> = inventory.words().map(|(l, _)| l).collect();
    lemmas.dedup();
    for l in lemmas {
        embeddings.insert(l, Vector::new(unit(&mut rng, dim))?)?;
    }
    for h in 0..=spec.n_top {
        let topic = unit(&mut rng, dim);
        for j in 0..spec.cue_words {
            let noise = unit(&mut rng, dim);
            let v: Vec<f64> = topic.iter().zip(&noise).map(|(a, b)| a + 0.5 * b).collect();
            let n = crate::geometry::norm(&v);
            embeddings.insert(&cue(h, j), Vector::new(v.into_iter().map(|x| x / n).collect())?)?;
        }
    }
    let fillers: Vec<String> = (0..spec.vocab_size).map(|j| format!("filler{j}")).collect();
    for f in &fillers {
        embeddings.insert(f, Vector::new(unit(&mut rng, dim))?)?;
    }

    let mut train = Vec::new();
    let mut test = Vec::new();
    for (i, (sense, h)) in labelled.iter().enumerate() {
        // one stream per sense: more training records never change the test set
        let mut srng = ChaCha8Rng::seed_from_u64(spec.seed);
        srng.set_stream(i as u64 + 1);
        for r in 0..spec.test_per_sense + spec.records_per_sense {
            let at = srng.random_range(0..spec.sentence_len);
            let tokens: Vec<String> = (0..spec.sentence_len)
                .map(|p| {
                    if p == at {
                        sense.lemma.clone()
                    } else if srng.random_bool(spec.cue_rate) {
                        cue(*h, srng.random_range(0..spec.cue_words))
                    } else {
                        fillers.choose(&mut srng).cloned().unwrap_or_default()
                    }
                })
                .collect();
            let rec = TrainingRecord::new(sense.clone(), tokens, vec![at])?;
            if r < spec.test_per_sense {
                test.push(rec);
            } else {
                train.push(rec);
            }
        }
    }
    Ok(SyntheticFixture {
        inventory,
        embeddings,
        train,
        test,
    })
}

/// A random forest of `n` senses. Node `i` attaches to a uniformly chosen
/// earlier node, or starts a new tree with probability `root_rate`. Lemmas
/// are drawn from a pool of about `n / 2` words so some senses share one.
pub fn random_taxonomy(seed: u64, n: usize, root_rate: f64) -> Result<Taxonomy> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pool = (n / 2).max(1);
    let mut next_index = vec![0u32; pool];
    let mut nodes = Vec::with_capacity(n);
    let mut edges = Vec::new();
    let mut isolated = Vec::new();
    for i in 0..n {
        let w = rng.random_range(0..pool);
        next_index[w] += 1;
        let s = SenseId::new(format!("lemma{w}"), Pos::Noun, next_index[w]);
        if i == 0 || rng.random_bool(root_rate) {
            isolated.push(s.clone());
        } else {
            let p: &SenseId = &nodes[rng.random_range(0..i)];
            edges.push((s.clone(), p.clone()));
        }
        nodes.push(s);
    }
    Ok(Taxonomy::from_edges(edges, isolated)?.0)
}

/// Random unit vectors for every lemma in `taxonomy`.
pub fn random_embeddings(taxonomy: &Taxonomy, dim: usize, seed: u64) -> Result<EmbeddingTable> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut table = EmbeddingTable::new(dim);
    let mut lemmas: Vec<&str> = taxonomy.nodes().map(|s| s.lemma.as_str()).collect();
    lemmas.sort_unstable();
    lemmas.dedup();
    for l in lemmas {
        table.insert(l, Vector::new(unit(&mut rng, dim))?)?;
    }
    Ok(table)
}
