//! Sense inventory and hypernym taxonomy.
//!
//! Senses are identified WordNet-style as `lemma.pos.NN`. The taxonomy is a
//! forest: every sense has at most one hypernym. Input files may list several
//! hypernyms for a sense; only the first one listed is kept and the rest are
//! recorded in [`Inventory::dropped_edges`].

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::BufRead;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Part-of-speech tag of a sense.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pos {
    Noun,
    Verb,
    Adjective,
    AdjectiveSatellite,
    Adverb,
}

impl Pos {
    pub fn tag(self) -> char {
        match self {
            Pos::Noun => 'n',
            Pos::Verb => 'v',
            Pos::Adjective => 'a',
            Pos::AdjectiveSatellite => 's',
            Pos::Adverb => 'r',
        }
    }

    pub fn from_tag(tag: &str) -> Option<Pos> {
        match tag {
            "n" => Some(Pos::Noun),
            "v" => Some(Pos::Verb),
            "a" => Some(Pos::Adjective),
            "s" => Some(Pos::AdjectiveSatellite),
            "r" => Some(Pos::Adverb),
            _ => None,
        }
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.tag())
    }
}

/// A word sense, rendered `lemma.pos.NN` (e.g. `aim.n.02`).
///
/// Ordering is by lemma, then part of speech, then sense index, so the senses
/// of one word sort by ascending index.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SenseId {
    pub lemma: String,
    pub pos: Pos,
    pub index: u32,
}

impl SenseId {
    pub fn new(lemma: impl Into<String>, pos: Pos, index: u32) -> Self {
        SenseId {
            lemma: lemma.into(),
            pos,
            index,
        }
    }
}

impl fmt::Display for SenseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}.{:02}", self.lemma, self.pos, self.index)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("malformed sense id {0:?}")]
pub struct ParseSenseIdError(pub String);

impl FromStr for SenseId {
    type Err = ParseSenseIdError;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        // Lemmas may themselves contain dots, so split from the right.
        let err = || ParseSenseIdError(s.to_string());
        let mut parts = s.rsplitn(3, '.');
        let index = parts.next().ok_or_else(err)?;
        let pos = parts.next().ok_or_else(err)?;
        let lemma = parts.next().ok_or_else(err)?;
        if lemma.is_empty() || index.is_empty() || !index.bytes().all(|b| b.is_ascii_digit()) {
            return Err(err());
        }
        let index: u32 = index.parse().map_err(|_| err())?;
        if index == 0 {
            return Err(err());
        }
        let pos = Pos::from_tag(pos).ok_or_else(err)?;
        Ok(SenseId::new(lemma, pos, index))
    }
}

/// Hypernym forest over senses.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Taxonomy {
    nodes: BTreeSet<SenseId>,
    parent: BTreeMap<SenseId, SenseId>,
    children: BTreeMap<SenseId, Vec<SenseId>>,
}

impl Taxonomy {
    /// Builds a taxonomy from `(child, parent)` edges plus isolated nodes.
    ///
    /// When a child appears with more than one parent the first edge wins and
    /// the others are returned as dropped.
    pub fn from_edges<I>(edges: I, isolated: impl IntoIterator<Item = SenseId>) -> Result<(Self, Vec<(SenseId, SenseId)>)>
    where
        I: IntoIterator<Item = (SenseId, SenseId)>,
    {
        let mut tax = Taxonomy::default();
        let mut dropped = Vec::new();
        for node in isolated {
            tax.nodes.insert(node);
        }
        for (child, parent) in edges {
            tax.nodes.insert(child.clone());
            tax.nodes.insert(parent.clone());
            if tax.parent.contains_key(&child) {
                dropped.push((child, parent));
                continue;
            }
            tax.parent.insert(child, parent);
        }
        for (child, parent) in &tax.parent {
            tax.children.entry(parent.clone()).or_default().push(child.clone());
        }
        // BTreeMap iteration already yields children in sorted order.
        tax.check_acyclic()?;
        Ok((tax, dropped))
    }

    fn check_acyclic(&self) -> Result<()> {
        // 0 = unvisited, 1 = on current path, 2 = reaches a root
        let mut state: BTreeMap<&SenseId, u8> = BTreeMap::new();
        for start in &self.nodes {
            if state.get(start) == Some(&2) {
                continue;
            }
            let mut path = Vec::new();
            let mut cur = start;
            loop {
                match state.get(cur) {
                    Some(2) => break,
                    Some(1) => return Err(Error::Cycle(cur.clone())),
                    _ => {}
                }
                state.insert(cur, 1);
                path.push(cur);
                match self.parent.get(cur) {
                    Some(p) => cur = p,
                    None => break,
                }
            }
            for node in path {
                state.insert(node, 2);
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn contains(&self, s: &SenseId) -> bool {
        self.nodes.contains(s)
    }

    pub fn nodes(&self) -> impl Iterator<Item = &SenseId> {
        self.nodes.iter()
    }

    pub fn parent(&self, s: &SenseId) -> Option<&SenseId> {
        self.parent.get(s)
    }

    /// Children in ascending [`SenseId`] order.
    pub fn children(&self, s: &SenseId) -> &[SenseId] {
        self.children.get(s).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Nodes without a hypernym, in ascending order.
    pub fn roots(&self) -> impl Iterator<Item = &SenseId> {
        self.nodes.iter().filter(|n| !self.parent.contains_key(*n))
    }

    pub fn edges(&self) -> impl Iterator<Item = (&SenseId, &SenseId)> {
        self.parent.iter()
    }

    /// Whether `ancestor` lies on the hypernym path of `s` (or equals it).
    pub fn is_ancestor_or_self(&self, ancestor: &SenseId, s: &SenseId) -> bool {
        let mut cur = Some(s);
        while let Some(c) = cur {
            if c == ancestor {
                return true;
            }
            cur = self.parent.get(c);
        }
        false
    }

    /// The hypernym path starting at `s` itself and ending at its root.
    pub fn path_to_root(&self, s: &SenseId) -> Vec<SenseId> {
        let mut path = vec![s.clone()];
        let mut cur = s;
        while let Some(p) = self.parent.get(cur) {
            path.push(p.clone());
            cur = p;
        }
        path
    }

    /// Depth of `s`: 0 for roots.
    pub fn depth(&self, s: &SenseId) -> usize {
        self.path_to_root(s).len() - 1
    }
}

/// Words, their ordered sense lists, and the hypernym taxonomy.
#[derive(Debug, Clone, Default)]
pub struct Inventory {
    senses_of: BTreeMap<(String, Pos), Vec<SenseId>>,
    taxonomy: Taxonomy,
    dropped_edges: Vec<(SenseId, SenseId)>,
}

impl Inventory {
    pub fn from_taxonomy(taxonomy: Taxonomy) -> Self {
        let mut senses_of: BTreeMap<(String, Pos), Vec<SenseId>> = BTreeMap::new();
        for node in taxonomy.nodes() {
            senses_of
                .entry((node.lemma.clone(), node.pos))
                .or_default()
                .push(node.clone());
        }
        for senses in senses_of.values_mut() {
            senses.sort_by_key(|s| s.index);
        }
        Inventory {
            senses_of,
            taxonomy,
            dropped_edges: Vec::new(),
        }
    }

    /// Parses the tab-separated taxonomy format: `child<TAB>parent` per line,
    /// `sense<TAB>-` for an isolated root, `#` comments.
    pub fn parse<R: BufRead>(reader: R, source_name: &str) -> Result<Self> {
        let mut edges = Vec::new();
        let mut isolated = Vec::new();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            let lineno = lineno + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let mut cols = trimmed.split('\t');
            let (Some(child), Some(parent), None) = (cols.next(), cols.next(), cols.next()) else {
                return Err(Error::parse(source_name, lineno, "expected two tab-separated columns"));
            };
            let child: SenseId = child
                .trim()
                .parse()
                .map_err(|e: ParseSenseIdError| Error::parse(source_name, lineno, e.to_string()))?;
            let parent = parent.trim();
            if parent == "-" {
                isolated.push(child);
                continue;
            }
            let parent: SenseId = parent
                .parse()
                .map_err(|e: ParseSenseIdError| Error::parse(source_name, lineno, e.to_string()))?;
            if parent == child {
                return Err(Error::Cycle(child));
            }
            edges.push((child, parent));
        }
        let (taxonomy, dropped) = Taxonomy::from_edges(edges, isolated)?;
        for (child, parent) in &dropped {
            log::warn!("{source_name}: dropped extra hypernym edge {child} -> {parent}");
        }
        let mut inv = Inventory::from_taxonomy(taxonomy);
        inv.dropped_edges = dropped;
        Ok(inv)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Inventory::parse(std::io::BufReader::new(file), &path.display().to_string())
    }

    /// Writes the taxonomy back out in the format accepted by [`Inventory::parse`].
    pub fn write<W: std::io::Write>(&self, mut out: W) -> std::io::Result<()> {
        for node in self.taxonomy.nodes() {
            match self.taxonomy.parent(node) {
                Some(p) => writeln!(out, "{node}\t{p}")?,
                None if self.taxonomy.children(node).is_empty() => writeln!(out, "{node}\t-")?,
                None => {}
            }
        }
        Ok(())
    }

    pub fn taxonomy(&self) -> &Taxonomy {
        &self.taxonomy
    }

    pub fn dropped_edges(&self) -> &[(SenseId, SenseId)] {
        &self.dropped_edges
    }

    /// Senses of a word in ascending sense-index order.
    pub fn senses_of(&self, lemma: &str, pos: Pos) -> Option<&[SenseId]> {
        self.senses_of
            .get(&(lemma.to_string(), pos))
            .map(Vec::as_slice)
    }

    pub fn words(&self) -> impl Iterator<Item = (&str, Pos)> {
        self.senses_of.keys().map(|(l, p)| (l.as_str(), *p))
    }

    /// The `level`-th hypernym of `s`; level 0 is `s` itself.
    pub fn hypernym_at(&self, s: &SenseId, level: usize) -> Result<Option<SenseId>> {
        if !self.taxonomy.contains(s) {
            return Err(Error::UnknownSense(s.clone()));
        }
        let mut cur = s;
        for _ in 0..level {
            match self.taxonomy.parent(cur) {
                Some(p) => cur = p,
                None => return Ok(None),
            }
        }
        Ok(Some(cur.clone()))
    }

    /// Pairs of senses of one word that share a direct hypernym.
    ///
    /// Root senses have no hypernym and never collide.
    pub fn check_distinct_hypernym_assumption(&self, lemma: &str, pos: Pos) -> Result<Vec<(SenseId, SenseId)>> {
        let senses = self.senses_of(lemma, pos).ok_or_else(|| Error::UnknownWord {
            lemma: lemma.to_string(),
            pos: pos.to_string(),
        })?;
        let mut by_parent: BTreeMap<&SenseId, Vec<&SenseId>> = BTreeMap::new();
        for s in senses {
            if let Some(p) = self.taxonomy.parent(s) {
                by_parent.entry(p).or_default().push(s);
            }
        }
        let mut out = Vec::new();
        for group in by_parent.values() {
            for (i, a) in group.iter().enumerate() {
                for b in &group[i + 1..] {
                    out.push(((*a).clone(), (*b).clone()));
                }
            }
        }
        out.sort();
        Ok(out)
    }

    /// Collision pairs over every word in the inventory.
    pub fn all_hypernym_collisions(&self) -> Vec<(SenseId, SenseId)> {
        self.words()
            .flat_map(|(l, p)| self.check_distinct_hypernym_assumption(l, p).unwrap_or_default())
            .collect()
    }
}
