//! Sense selection by cosine to the ball centers of hypernym anchors.
//!
//! At level `L` each sense of the word is represented by the ball of its
//! `L`-th hypernym (the sense itself at level 0). The chosen sense maximizes
//! `cos(V, anchor center)`; ties go to the lowest sense index.

use std::io::Write;

use crate::error::{Error, Result};
use crate::geometry::{contains, cos_sim, point_inside, BallConfiguration, GeometryConfig, Vector};
use crate::inventory::{Inventory, Pos, SenseId};

/// One sense of a word together with the ball it is scored against.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub sense: SenseId,
    pub anchor: SenseId,
    pub anchor_center: Vector,
    pub anchor_radius: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub chosen: SenseId,
    /// The anchor of the chosen sense.
    pub anchor: SenseId,
    pub score: f64,
    /// Whether `V` itself lies in the chosen anchor's ball.
    pub inside_anchor_ball: bool,
    /// Score gap to the runner-up; infinite for a single candidate.
    pub margin: f64,
}

/// Candidates for `lemma.pos` at `level`, in ascending sense-index order.
///
/// Senses whose anchor is missing or has no ball are left out; an unknown
/// word yields no candidates.
pub fn candidate_set(lemma: &str, pos: Pos, level: usize, inv: &Inventory, balls: &BallConfiguration) -> Vec<Candidate> {
    let Some(senses) = inv.senses_of(lemma, pos) else {
        log::debug!("no candidates: unknown word {lemma}.{pos}");
        return Vec::new();
    };
    senses
        .iter()
        .filter_map(|s| {
            let anchor = inv.hypernym_at(s, level).ok()??;
            let ball = balls.get(&anchor)?;
            Some(Candidate {
                sense: s.clone(),
                anchor,
                anchor_center: ball.center.clone(),
                anchor_radius: ball.radius,
            })
        })
        .collect()
}

/// Argmax-cosine choice among `candidates`.
pub fn select_sense(v: &[f64], candidates: &[Candidate], cfg: &GeometryConfig) -> Result<Prediction> {
    if candidates.is_empty() {
        return Err(Error::NoCandidates);
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("network output".into()));
    }
    let mut scores = Vec::with_capacity(candidates.len());
    for c in candidates {
        scores.push(cos_sim(v, &c.anchor_center)?);
    }
    // lowest sense index wins ties
    let mut order: Vec<usize> = (0..candidates.len()).collect();
    order.sort_by(|&a, &b| {
        scores[b]
            .total_cmp(&scores[a])
            .then_with(|| candidates[a].sense.index.cmp(&candidates[b].sense.index))
            .then_with(|| candidates[a].sense.cmp(&candidates[b].sense))
    });
    let best = order[0];
    let margin = order.get(1).map_or(f64::INFINITY, |&r| scores[best] - scores[r]);
    let winner = &candidates[best];
    let ball = crate::geometry::Ball::new(winner.anchor.clone(), winner.anchor_center.clone(), winner.anchor_radius)?;
    Ok(Prediction {
        chosen: winner.sense.clone(),
        anchor: winner.anchor.clone(),
        score: scores[best],
        inside_anchor_ball: point_inside(&ball, v, cfg)?,
        margin,
    })
}

/// Whether `a` IS-A `b` geometrically: the ball of `a` lies inside the ball of `b`.
pub fn deduction_query(balls: &BallConfiguration, a: &SenseId, b: &SenseId, cfg: &GeometryConfig) -> Result<bool> {
    contains(balls.ball(b)?, balls.ball(a)?, cfg)
}

/// Writes `instance_id<TAB>chosen<TAB>score<TAB>inside<TAB>margin` rows.
pub fn write_predictions<'a, W: Write>(
    mut out: W,
    rows: impl IntoIterator<Item = (&'a str, &'a Prediction)>,
) -> std::io::Result<()> {
    writeln!(out, "#instance_id\tchosen_sense\tscore\tinside\tmargin")?;
    for (id, p) in rows {
        writeln!(
            out,
            "{id}\t{}\t{:.17e}\t{}\t{:.17e}",
            p.chosen,
            p.score,
            u8::from(p.inside_anchor_ball),
            p.margin
        )?;
    }
    Ok(())
}
