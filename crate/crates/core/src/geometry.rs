//! Vector and ball arithmetic, nested-ball construction and verification.
//!
//! A [`BallConfiguration`] encodes a taxonomy when every child ball lies
//! inside its parent ball and sibling balls are disconnected. Each center is
//! `(prefix, extension)`: the prefix is the unit-normalized word embedding of
//! the sense's lemma, the extension carries the tree layout.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{BufRead, Write};
use std::ops::Deref;
use std::path::Path;

use crate::embedding::{oov_vector, EmbeddingTable};
use crate::error::{Error, Result};
use crate::inventory::{SenseId, Taxonomy};

/// A finite, non-empty real vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Vector(Vec<f64>);

impl Vector {
    pub fn new(components: Vec<f64>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::DimensionMismatch { expected: 1, found: 0 });
        }
        if let Some(i) = components.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite(format!("vector component {i}")));
        }
        Ok(Vector(components))
    }

    pub fn zeros(dim: usize) -> Self {
        Vector(vec![0.0; dim.max(1)])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn norm(&self) -> f64 {
        norm(&self.0)
    }

    pub fn scaled(&self, alpha: f64) -> Vector {
        Vector(self.0.iter().map(|x| x * alpha).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0.0)
    }
}

impl Deref for Vector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn same_dim(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch { expected: a, found: b });
    }
    Ok(())
}

/// Cosine similarity, clamped to `[-1, 1]`.
pub fn cos_sim(u: &[f64], v: &[f64]) -> Result<f64> {
    same_dim(u.len(), v.len())?;
    let nu = norm(u);
    let nv = norm(v);
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::ZeroNorm);
    }
    Ok((dot(u, v) / (nu * nv)).clamp(-1.0, 1.0))
}

/// Tolerances and construction parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometryConfig {
    /// Slack for every geometric predicate.
    pub epsilon: f64,
    /// Separation factor applied to sibling spacing and parent radii; must exceed 1.
    pub margin: f64,
    pub initial_leaf_radius: f64,
    /// Number of extension dimensions appended to the word-embedding prefix.
    pub extension_code_width: usize,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        GeometryConfig {
            epsilon: 1e-9,
            margin: 1.1,
            initial_leaf_radius: 0.1,
            extension_code_width: 16,
        }
    }
}

impl GeometryConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::Config(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        if !(self.margin > 1.0 && self.margin.is_finite()) {
            return Err(Error::Config(format!("margin must exceed 1, got {}", self.margin)));
        }
        if !(self.initial_leaf_radius > 0.0 && self.initial_leaf_radius.is_finite()) {
            return Err(Error::Config(format!(
                "initial_leaf_radius must be positive, got {}",
                self.initial_leaf_radius
            )));
        }
        if self.extension_code_width == 0 {
            return Err(Error::Config("extension_code_width must be positive".into()));
        }
        Ok(())
    }
}

/// The region of one sense. Radius zero is a plain vector embedding.
#[derive(Debug, Clone, PartialEq)]
pub struct Ball {
    pub sense_id: SenseId,
    pub center: Vector,
    pub radius: f64,
}

impl Ball {
    pub fn new(sense_id: SenseId, center: Vector, radius: f64) -> Result<Self> {
        if !(radius >= 0.0 && radius.is_finite()) {
            return Err(Error::Config(format!("radius of {sense_id} must be finite and non-negative")));
        }
        Ok(Ball {
            sense_id,
            center,
            radius,
        })
    }

    pub fn dim(&self) -> usize {
        self.center.dim()
    }
}

/// `inner` lies inside `outer`: `|c_i - c_o| + r_i <= r_o + eps`.
pub fn contains(outer: &Ball, inner: &Ball, cfg: &GeometryConfig) -> Result<bool> {
    same_dim(outer.dim(), inner.dim())?;
    let d = distance(&outer.center, &inner.center);
    Ok(d + inner.radius <= outer.radius + cfg.epsilon)
}

/// `a` and `b` do not overlap: `|c_a - c_b| >= r_a + r_b - eps`.
pub fn disconnected(a: &Ball, b: &Ball, cfg: &GeometryConfig) -> Result<bool> {
    same_dim(a.dim(), b.dim())?;
    let d = distance(&a.center, &b.center);
    Ok(d >= a.radius + b.radius - cfg.epsilon)
}

pub fn point_inside(b: &Ball, v: &[f64], cfg: &GeometryConfig) -> Result<bool> {
    same_dim(b.dim(), v.len())?;
    Ok(distance(&b.center, v) <= b.radius + cfg.epsilon)
}

/// Balls keyed by sense.
#[derive(Debug, Clone, PartialEq)]
pub struct BallConfiguration {
    balls: BTreeMap<SenseId, Ball>,
    dim: usize,
    embedding_prefix_dim: usize,
}

impl BallConfiguration {
    pub fn new(dim: usize, embedding_prefix_dim: usize) -> Result<Self> {
        if dim == 0 || embedding_prefix_dim == 0 || embedding_prefix_dim > dim {
            return Err(Error::Config(format!(
                "invalid dimensions: dim {dim}, prefix {embedding_prefix_dim}"
            )));
        }
        Ok(BallConfiguration {
            balls: BTreeMap::new(),
            dim,
            embedding_prefix_dim,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn embedding_prefix_dim(&self) -> usize {
        self.embedding_prefix_dim
    }

    pub fn insert(&mut self, ball: Ball) -> Result<()> {
        same_dim(self.dim, ball.dim())?;
        self.balls.insert(ball.sense_id.clone(), ball);
        Ok(())
    }

    pub fn get(&self, s: &SenseId) -> Option<&Ball> {
        self.balls.get(s)
    }

    pub fn get_mut(&mut self, s: &SenseId) -> Option<&mut Ball> {
        self.balls.get_mut(s)
    }

    pub fn ball(&self, s: &SenseId) -> Result<&Ball> {
        self.balls.get(s).ok_or_else(|| Error::MissingBall(s.clone()))
    }

    pub fn has(&self, s: &SenseId) -> bool {
        self.balls.contains_key(s)
    }

    pub fn len(&self) -> usize {
        self.balls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.balls.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Ball> {
        self.balls.values()
    }

    /// Text format: header `#dim n prefix p`, then
    /// `sense<TAB>radius<TAB>c1 ... cn` per ball with 17 significant digits.
    pub fn write<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "#dim {} prefix {}", self.dim, self.embedding_prefix_dim)?;
        for ball in self.balls.values() {
            write!(out, "{}\t{:.16e}\t", ball.sense_id, ball.radius)?;
            for (i, x) in ball.center.iter().enumerate() {
                if i > 0 {
                    out.write_all(b" ")?;
                }
                write!(out, "{x:.16e}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = std::io::BufWriter::new(file);
        self.write(&mut out).map_err(|e| Error::io(path, e))?;
        out.flush().map_err(|e| Error::io(path, e))
    }

    pub fn parse<R: BufRead>(reader: R, source_name: &str) -> Result<Self> {
        let mut config: Option<BallConfiguration> = None;
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            let lineno = lineno + 1;
            if line.trim().is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                if config.is_none() {
                    let f: Vec<&str> = rest.split_whitespace().collect();
                    let header = match f.as_slice() {
                        ["dim", n, "prefix", p] => n.parse().ok().zip(p.parse().ok()),
                        _ => None,
                    };
                    let (n, p) = header.ok_or_else(|| Error::parse(source_name, lineno, "expected `#dim n prefix p` header"))?;
                    config = Some(
                        BallConfiguration::new(n, p).map_err(|e| Error::parse(source_name, lineno, e.to_string()))?,
                    );
                }
                continue;
            }
            let cfg = config
                .as_mut()
                .ok_or_else(|| Error::parse(source_name, lineno, "ball line before header"))?;
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 3 {
                return Err(Error::parse(source_name, lineno, "expected three tab-separated columns"));
            }
            let sense: SenseId = cols[0]
                .parse()
                .map_err(|e: crate::inventory::ParseSenseIdError| Error::parse(source_name, lineno, e.to_string()))?;
            let radius: f64 = cols[1]
                .parse()
                .map_err(|_| Error::parse(source_name, lineno, format!("bad radius {:?}", cols[1])))?;
            let comps = cols[2]
                .split(' ')
                .map(|t| t.parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|_| Error::parse(source_name, lineno, "bad center component"))?;
            if comps.len() != cfg.dim {
                return Err(Error::parse(
                    source_name,
                    lineno,
                    format!("expected {} components, found {}", cfg.dim, comps.len()),
                ));
            }
            let center = Vector::new(comps).map_err(|e| Error::parse(source_name, lineno, e.to_string()))?;
            let ball = Ball::new(sense, center, radius).map_err(|e| Error::parse(source_name, lineno, e.to_string()))?;
            cfg.insert(ball)?;
        }
        config.ok_or_else(|| Error::parse(source_name, 0, "missing `#dim n prefix p` header"))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        BallConfiguration::parse(std::io::BufReader::new(file), &path.display().to_string())
    }
}

/// Unit code vector for the `index`-th child among siblings.
///
/// The first `2w` codes are `±e_k`; after that come `(±e_a ± e_b)/√2` for
/// `a < b`. Returns `None` once the `2w²` available codes are used up.
pub fn extension_code(index: usize, width: usize) -> Option<Vec<f64>> {
    let mut code = vec![0.0; width];
    if index < 2 * width {
        let k = index % width;
        code[k] = if index < width { 1.0 } else { -1.0 };
        return Some(code);
    }
    let mut rest = index - 2 * width;
    let h = std::f64::consts::FRAC_1_SQRT_2;
    for a in 0..width {
        for b in (a + 1)..width {
            if rest < 4 {
                code[a] = if rest & 1 == 0 { h } else { -h };
                code[b] = if rest & 2 == 0 { h } else { -h };
                return Some(code);
            }
            rest -= 4;
        }
    }
    None
}

/// Unit prefix for a lemma: its embedding direction, or the OOV vector when
/// the lemma is missing or maps to the zero vector.
fn lemma_prefix(table: &EmbeddingTable, lemma: &str) -> Vec<f64> {
    let v = match table.get(lemma) {
        Some(v) if !v.is_zero() => v.clone(),
        _ => oov_vector(&lemma.to_lowercase(), table.dim()),
    };
    let n = v.norm();
    v.iter().map(|x| x / n).collect()
}

/// Builds a configuration encoding `taxonomy` whose center prefixes are the
/// unit word embeddings of each sense's lemma.
///
/// Children are laid out bottom-up: sibling `j` is offset from its parent in
/// the extension block by `D·u_j`, with `u_j` from [`extension_code`] and `D`
/// the smallest spacing that keeps every sibling pair `margin` apart. The
/// parent radius is then `margin` times the farthest child reach. Roots are
/// treated as children of a virtual node at the origin. The result is checked
/// with [`verify_configuration`] before being returned.
pub fn construct_balls(taxonomy: &Taxonomy, table: &EmbeddingTable, cfg: &GeometryConfig) -> Result<BallConfiguration> {
    cfg.validate()?;
    let prefix_dim = table.dim();
    let width = cfg.extension_code_width;
    let dim = prefix_dim + width;
    let mut config = BallConfiguration::new(dim, prefix_dim)?;
    if taxonomy.is_empty() {
        return Ok(config);
    }

    let prefixes: BTreeMap<&SenseId, Vec<f64>> = taxonomy
        .nodes()
        .map(|s| (s, lemma_prefix(table, &s.lemma)))
        .collect();

    // Post-order over the forest: radius of each node and the sibling spacing
    // it imposes on its own children.
    let roots: Vec<&SenseId> = taxonomy.roots().collect();
    let mut radius: BTreeMap<&SenseId, f64> = BTreeMap::new();
    let mut spacing: BTreeMap<&SenseId, f64> = BTreeMap::new();
    let mut stack: Vec<(&SenseId, bool)> = roots.iter().rev().map(|r| (*r, false)).collect();
    while let Some((node, expanded)) = stack.pop() {
        let children = taxonomy.children(node);
        if !expanded {
            stack.push((node, true));
            for c in children.iter().rev() {
                stack.push((c, false));
            }
            continue;
        }
        if children.is_empty() {
            radius.insert(node, cfg.initial_leaf_radius);
            continue;
        }
        let child_radii: Vec<f64> = children.iter().map(|c| radius[c]).collect();
        let d = sibling_spacing(&child_radii, width, cfg.margin).map_err(|m| {
            Error::Construction(format!("{node}: {m}"))
        })?;
        let parent_prefix = &prefixes[node];
        let mut reach: f64 = 0.0;
        for (c, r) in children.iter().zip(&child_radii) {
            let pd = distance(parent_prefix, &prefixes[c]);
            reach = reach.max((pd * pd + d * d).sqrt() + r);
        }
        spacing.insert(node, d);
        radius.insert(node, cfg.margin * reach);
    }
    let root_radii: Vec<f64> = roots.iter().map(|r| radius[r]).collect();
    let root_spacing = sibling_spacing(&root_radii, width, cfg.margin)
        .map_err(|m| Error::Construction(format!("roots: {m}")))?;

    // Pre-order: absolute extension coordinates.
    let mut stack: Vec<(&SenseId, Vec<f64>)> = Vec::new();
    for (j, r) in roots.iter().enumerate().rev() {
        let code = extension_code(j, width).expect("checked by sibling_spacing");
        stack.push((r, code.iter().map(|x| x * root_spacing).collect()));
    }
    while let Some((node, ext)) = stack.pop() {
        let d = spacing.get(node).copied().unwrap_or(0.0);
        for (j, c) in taxonomy.children(node).iter().enumerate().rev() {
            let code = extension_code(j, width).expect("checked by sibling_spacing");
            let child_ext: Vec<f64> = ext.iter().zip(&code).map(|(e, u)| e + d * u).collect();
            stack.push((c, child_ext));
        }
        let mut center = prefixes[node].clone();
        center.extend_from_slice(&ext);
        let center = Vector::new(center).map_err(|e| Error::Construction(format!("{node}: {e}")))?;
        config.insert(Ball::new(node.clone(), center, radius[node])?)?;
    }

    let report = verify_configuration(&config, taxonomy, cfg)?;
    if let Some(msg) = report.first_violation() {
        return Err(Error::Construction(msg));
    }
    Ok(config)
}

/// Spacing `D` so that `D·|u_i − u_j| >= margin·(r_i + r_j)` for all sibling
/// pairs. A single child sits at its parent's extension coordinates.
fn sibling_spacing(radii: &[f64], width: usize, margin: f64) -> std::result::Result<f64, String> {
    if radii.len() <= 1 {
        return Ok(0.0);
    }
    let codes: Vec<Vec<f64>> = (0..radii.len())
        .map(|j| extension_code(j, width))
        .collect::<Option<_>>()
        .ok_or_else(|| format!("{} children exceed the {} extension codes of width {width}", radii.len(), 2 * width * width))?;
    let mut d: f64 = 0.0;
    for i in 0..radii.len() {
        for j in (i + 1)..radii.len() {
            let sep = distance(&codes[i], &codes[j]);
            d = d.max(margin * (radii[i] + radii[j]) / sep);
        }
    }
    Ok(d)
}

/// Every nesting condition a configuration fails.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ViolationReport {
    /// `(parent, child)` pairs where the child is not contained.
    pub containment: Vec<(SenseId, SenseId)>,
    /// Sibling pairs whose balls overlap.
    pub overlap: Vec<(SenseId, SenseId)>,
    pub checked_pairs: usize,
}

impl ViolationReport {
    pub fn is_empty(&self) -> bool {
        self.containment.is_empty() && self.overlap.is_empty()
    }

    pub fn len(&self) -> usize {
        self.containment.len() + self.overlap.len()
    }

    fn first_violation(&self) -> Option<String> {
        if let Some((p, c)) = self.containment.first() {
            return Some(format!("{c} not inside {p}"));
        }
        self.overlap.first().map(|(a, b)| format!("siblings {a} and {b} overlap"))
    }
}

impl fmt::Display for ViolationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "checked {} pairs: {} containment, {} overlap violations",
            self.checked_pairs,
            self.containment.len(),
            self.overlap.len()
        )?;
        for (p, c) in &self.containment {
            writeln!(f, "containment\t{p}\t{c}")?;
        }
        for (a, b) in &self.overlap {
            writeln!(f, "overlap\t{a}\t{b}")?;
        }
        Ok(())
    }
}

/// Checks every parent-child containment and every sibling disconnection.
/// Taxonomy roots count as siblings of one another.
pub fn verify_configuration(config: &BallConfiguration, taxonomy: &Taxonomy, cfg: &GeometryConfig) -> Result<ViolationReport> {
    let mut report = ViolationReport::default();
    for node in taxonomy.nodes() {
        config.ball(node)?;
    }
    for (child, parent) in taxonomy.edges() {
        report.checked_pairs += 1;
        if !contains(config.ball(parent)?, config.ball(child)?, cfg)? {
            report.containment.push((parent.clone(), child.clone()));
        }
    }
    let roots: Vec<SenseId> = taxonomy.roots().cloned().collect();
    let groups = std::iter::once(roots.as_slice()).chain(taxonomy.nodes().map(|n| taxonomy.children(n)));
    for group in groups {
        for (i, a) in group.iter().enumerate() {
            let ba = config.ball(a)?;
            for b in &group[i + 1..] {
                report.checked_pairs += 1;
                if !disconnected(ba, config.ball(b)?, cfg)? {
                    report.overlap.push((a.clone(), b.clone()));
                }
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inventory::Inventory;

    fn v(c: &[f64]) -> Vector {
        Vector::new(c.to_vec()).unwrap()
    }

    fn ball(c: &[f64], r: f64) -> Ball {
        Ball::new("x.n.01".parse().unwrap(), v(c), r).unwrap()
    }

    fn cfg() -> GeometryConfig {
        GeometryConfig::default()
    }

    #[test]
    fn cos_sim_examples() {
        assert_eq!(cos_sim(&[1.0, 0.0], &[1.0, 0.0]).unwrap(), 1.0);
        assert_eq!(cos_sim(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        assert!((cos_sim(&[3.0, 4.0], &[4.0, 3.0]).unwrap() - 0.96).abs() < 1e-15);
        assert!(matches!(cos_sim(&[1.0], &[1.0, 2.0]), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(cos_sim(&[0.0, 0.0], &[1.0, 2.0]), Err(Error::ZeroNorm)));
    }

    #[test]
    fn containment_examples() {
        let outer = ball(&[0.0, 0.0], 5.0);
        assert!(contains(&outer, &ball(&[1.0, 0.0], 2.0), &cfg()).unwrap());
        assert!(!contains(&outer, &ball(&[4.0, 0.0], 2.0), &cfg()).unwrap());
        assert!(contains(&outer, &outer, &cfg()).unwrap());
        // tangent from inside
        assert!(contains(&outer, &ball(&[3.0, 0.0], 2.0), &cfg()).unwrap());
        assert!(contains(&outer, &ball(&[1.0], 1.0), &cfg()).is_err());
    }

    #[test]
    fn disconnection_examples() {
        assert!(disconnected(&ball(&[0.0, 0.0], 1.0), &ball(&[3.0, 0.0], 1.0), &cfg()).unwrap());
        assert!(!disconnected(&ball(&[0.0, 0.0], 2.0), &ball(&[3.0, 0.0], 2.0), &cfg()).unwrap());
        assert!(disconnected(&ball(&[0.0, 0.0], 0.0), &ball(&[1e-3, 0.0], 0.0), &cfg()).unwrap());
        // tangent counts as disconnected
        assert!(disconnected(&ball(&[0.0, 0.0], 1.5), &ball(&[3.0, 0.0], 1.5), &cfg()).unwrap());
    }

    #[test]
    fn point_examples() {
        assert!(point_inside(&ball(&[0.0, 0.0], 1.0), &[0.5, 0.0], &cfg()).unwrap());
        let zero = ball(&[0.3, 0.4], 0.0);
        assert!(point_inside(&zero, &[0.3, 0.4], &cfg()).unwrap());
        assert!(!point_inside(&zero, &[0.3, 0.41], &cfg()).unwrap());
        assert!(!point_inside(&ball(&[1.0, 1.0], 1.0), &[2.0, 2.0], &cfg()).unwrap());
    }

    #[test]
    fn vector_rejects_non_finite() {
        assert!(Vector::new(vec![1.0, f64::NAN]).is_err());
        assert!(Vector::new(vec![]).is_err());
        assert!(Ball::new("x.n.01".parse().unwrap(), v(&[0.0]), -1.0).is_err());
    }

    #[test]
    fn codes_are_distinct_units() {
        let w = 3;
        let codes: Vec<Vec<f64>> = (0..2 * w * w).map(|j| extension_code(j, w).unwrap()).collect();
        assert!(extension_code(2 * w * w, w).is_none());
        for (i, a) in codes.iter().enumerate() {
            assert!((norm(a) - 1.0).abs() < 1e-12);
            for b in &codes[i + 1..] {
                assert!(distance(a, b) > 0.5);
            }
        }
    }

    fn two_leaf_setup() -> (Inventory, EmbeddingTable) {
        let inv = Inventory::parse("a.n.01\troot.n.01\nb.n.01\troot.n.01\n".as_bytes(), "t").unwrap();
        let mut table = EmbeddingTable::new(2);
        table.insert("a", v(&[1.0, 0.0])).unwrap();
        table.insert("b", v(&[0.0, 2.0])).unwrap();
        table.insert("root", v(&[1.0, 0.2])).unwrap();
        (inv, table)
    }

    #[test]
    fn two_leaves_construct_cleanly() {
        let (inv, table) = two_leaf_setup();
        let conf = construct_balls(inv.taxonomy(), &table, &cfg()).unwrap();
        assert_eq!(conf.len(), 3);
        assert_eq!(conf.dim(), 2 + cfg().extension_code_width);
        let report = verify_configuration(&conf, inv.taxonomy(), &cfg()).unwrap();
        assert!(report.is_empty(), "{report}");
        assert_eq!(report.checked_pairs, 3);
        let b = conf.get(&"b.n.01".parse().unwrap()).unwrap();
        assert_eq!(&b.center[..2], &[0.0, 1.0]);
    }

    #[test]
    fn single_node_is_valid() {
        let inv = Inventory::parse("solo.n.01\t-\n".as_bytes(), "t").unwrap();
        let table = EmbeddingTable::new(3);
        let conf = construct_balls(inv.taxonomy(), &table, &cfg()).unwrap();
        assert_eq!(conf.len(), 1);
        let b = conf.iter().next().unwrap();
        assert_eq!(b.radius, cfg().initial_leaf_radius);
        // OOV prefix is a unit vector
        assert!((norm(&b.center[..3]) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn shrunk_parent_is_reported() {
        let (inv, table) = two_leaf_setup();
        let mut conf = construct_balls(inv.taxonomy(), &table, &cfg()).unwrap();
        let root: SenseId = "root.n.01".parse().unwrap();
        let a: SenseId = "a.n.01".parse().unwrap();
        let reach_b = {
            let r = conf.get(&root).unwrap();
            let b = conf.get(&"b.n.01".parse().unwrap()).unwrap();
            distance(&r.center, &b.center) + b.radius
        };
        let reach_a = {
            let r = conf.get(&root).unwrap();
            let b = conf.get(&a).unwrap();
            distance(&r.center, &b.center) + b.radius
        };
        // shrink so that only the farther child sticks out
        let (far, near_reach) = if reach_a > reach_b { (a.clone(), reach_b) } else { ("b.n.01".parse().unwrap(), reach_a) };
        conf.get_mut(&root).unwrap().radius = near_reach + 1e-6;
        let report = verify_configuration(&conf, inv.taxonomy(), &cfg()).unwrap();
        assert_eq!(report.containment, vec![(root, far)]);
        assert!(report.overlap.is_empty());
    }

    #[test]
    fn overlapping_siblings_are_reported() {
        let (inv, table) = two_leaf_setup();
        let mut conf = construct_balls(inv.taxonomy(), &table, &cfg()).unwrap();
        let a: SenseId = "a.n.01".parse().unwrap();
        let b: SenseId = "b.n.01".parse().unwrap();
        let center_a = conf.get(&a).unwrap().center.clone();
        conf.get_mut(&b).unwrap().center = center_a;
        let report = verify_configuration(&conf, inv.taxonomy(), &cfg()).unwrap();
        assert_eq!(report.overlap, vec![(a, b)]);
    }

    #[test]
    fn missing_ball_is_an_error() {
        let (inv, _) = two_leaf_setup();
        let conf = BallConfiguration::new(4, 2).unwrap();
        assert!(matches!(
            verify_configuration(&conf, inv.taxonomy(), &cfg()),
            Err(Error::MissingBall(_))
        ));
    }

    #[test]
    fn too_many_children_fails_construction() {
        let src: String = (1..=9).map(|i| format!("c.n.{i:02}\tp.n.01\n")).collect();
        let inv = Inventory::parse(src.as_bytes(), "wide").unwrap();
        let table = EmbeddingTable::new(2);
        let narrow = GeometryConfig {
            extension_code_width: 2,
            ..cfg()
        };
        assert!(matches!(
            construct_balls(inv.taxonomy(), &table, &narrow),
            Err(Error::Construction(_))
        ));
        let wide = GeometryConfig {
            extension_code_width: 3,
            ..cfg()
        };
        assert!(construct_balls(inv.taxonomy(), &table, &wide).is_ok());
    }

    #[test]
    fn ball_file_round_trips_bit_exactly() {
        let (inv, table) = two_leaf_setup();
        let conf = construct_balls(inv.taxonomy(), &table, &cfg()).unwrap();
        let mut buf = Vec::new();
        conf.write(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("#dim 18 prefix 2\n"));
        let back = BallConfiguration::parse(buf.as_slice(), "rt").unwrap();
        assert_eq!(back, conf);
        for (x, y) in conf.iter().zip(back.iter()) {
            assert_eq!(x.radius.to_bits(), y.radius.to_bits());
            for (a, b) in x.center.iter().zip(y.center.iter()) {
                assert_eq!(a.to_bits(), b.to_bits());
            }
        }
    }

    #[test]
    fn ball_file_errors() {
        assert!(BallConfiguration::parse("a.n.01\t1\t0 0\n".as_bytes(), "x").is_err());
        let err = BallConfiguration::parse("#dim 2 prefix 1\na.n.01\t1\t0\n".as_bytes(), "x").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        assert!(BallConfiguration::parse("#dim 2 prefix 3\n".as_bytes(), "x").is_err());
    }
}
