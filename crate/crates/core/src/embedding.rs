//! Static word embeddings in GloVe text format.

use std::collections::HashMap;
use std::io::{BufRead, Write};
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::geometry::Vector;

/// Word vectors keyed by lower-cased surface form.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    dim: usize,
    vectors: HashMap<String, Vector>,
}

impl EmbeddingTable {
    pub fn new(dim: usize) -> Self {
        EmbeddingTable {
            dim,
            vectors: HashMap::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn insert(&mut self, word: &str, v: Vector) -> Result<()> {
        if v.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: v.dim(),
            });
        }
        self.vectors.insert(word.to_lowercase(), v);
        Ok(())
    }

    pub fn get(&self, word: &str) -> Option<&Vector> {
        match self.vectors.get(word) {
            Some(v) => Some(v),
            None => self.vectors.get(&word.to_lowercase()),
        }
    }

    /// Table row for `word`, or the deterministic out-of-vocabulary vector.
    pub fn lookup(&self, word: &str) -> Vector {
        match self.get(word) {
            Some(v) => v.clone(),
            None => oov_vector(&word.to_lowercase(), self.dim),
        }
    }

    /// Parses `word c1 ... cd` lines. A leading word2vec-style `count dim`
    /// header line is accepted and skipped.
    pub fn parse<R: BufRead>(reader: R, source_name: &str) -> Result<Self> {
        let mut table: Option<EmbeddingTable> = None;
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            let lineno = lineno + 1;
            let mut fields = line.split_whitespace();
            let Some(word) = fields.next() else { continue };
            let values: Vec<&str> = fields.collect();
            if lineno == 1 && values.len() == 1 && word.parse::<usize>().is_ok() && values[0].parse::<usize>().is_ok() {
                continue;
            }
            let mut comps = Vec::with_capacity(values.len());
            for v in values {
                let x: f64 = v
                    .parse()
                    .map_err(|_| Error::parse(source_name, lineno, format!("bad float {v:?}")))?;
                comps.push(x);
            }
            let v = Vector::new(comps).map_err(|e| Error::parse(source_name, lineno, e.to_string()))?;
            let table = table.get_or_insert_with(|| EmbeddingTable::new(v.dim()));
            if v.dim() != table.dim {
                return Err(Error::parse(
                    source_name,
                    lineno,
                    format!("expected {} components, found {}", table.dim, v.dim()),
                ));
            }
            table.vectors.insert(word.to_lowercase(), v);
        }
        table.ok_or_else(|| Error::parse(source_name, 0, "no embeddings"))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        EmbeddingTable::parse(std::io::BufReader::new(file), &path.display().to_string())
    }

    /// Writes rows sorted by word so output is deterministic.
    pub fn write<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let mut words: Vec<&String> = self.vectors.keys().collect();
        words.sort();
        for w in words {
            write!(out, "{w}")?;
            for x in self.vectors[w].as_slice() {
                write!(out, " {x}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// Unit vector seeded from a SHA-256 of the surface form.
pub fn oov_vector(word: &str, dim: usize) -> Vector {
    let digest = Sha256::digest(word.as_bytes());
    let mut seed = [0u8; 32];
    seed.copy_from_slice(&digest);
    let mut rng = ChaCha8Rng::from_seed(seed);
    loop {
        let comps: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
        let norm = comps.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return Vector::new(comps.into_iter().map(|x| x / norm).collect()).expect("finite");
        }
    }
}
