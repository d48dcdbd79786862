//! Good-subgraph witnesses and their verifier.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::chains::{ChainCheck, ChainRelation};
use crate::error::{Error, Result};
use crate::graph::{Colour, ColouredCompleteGraph};
use crate::rng;
use crate::sequence::{member, BipartiteMember, SequenceSpec};
use crate::tiling::Embedding;
use crate::vertex_set::VertexSet;

/// A copy `F = (X, Y)` of a member in one colour with the parts `Y_1..Y_t` of `Y`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GoodSubgraphWitness {
    pub colour: Colour,
    pub spec: SequenceSpec,
    /// `embedding.vertices[j]` is the host image of member vertex `j`.
    pub embedding: Embedding,
    pub x: Vec<usize>,
    pub y: Vec<usize>,
    pub parts: Vec<Vec<usize>>,
    pub eta: f64,
    pub theta: f64,
}

impl GoodSubgraphWitness {
    pub fn order(&self) -> usize {
        self.embedding.order
    }

    pub fn member(&self) -> Result<BipartiteMember> {
        member(&self.spec, self.embedding.order)
    }

    /// Host `N_F(y)` for every `y ∈ Y`.
    pub fn f_neighbourhoods(&self, f: &BipartiteMember) -> HashMap<usize, Vec<usize>> {
        let img = &self.embedding.vertices;
        f.y_side()
            .iter()
            .map(|&v| (img[v], f.neighbours(v).iter().map(|&u| img[u]).collect()))
            .collect()
    }

    pub fn vertex_set(&self, n: usize) -> VertexSet {
        self.embedding.vertex_set(n)
    }
}

/// `u ∼ v`: every edge from `v` to `N_F(u)` has colour `colour`.
pub fn related(g: &ColouredCompleteGraph, colour: Colour, nf_u: &[usize], v: usize) -> bool {
    nf_u.iter().all(|&x| x != v && g.colour_of(x, v) == colour)
}

/// Host vertices `v ∈ within` with `N_F(u) ⊆ N_colour(v)`.
pub fn successors(g: &ColouredCompleteGraph, colour: Colour, nf_u: &[usize], within: &VertexSet) -> VertexSet {
    let mut s = within.clone();
    for &x in nf_u {
        s.intersect_with(g.neighbours(colour, x));
    }
    s
}

fn part_seed(part: &[usize]) -> u64 {
    part.iter().fold(rng::mix64(part.len() as u64), |h, &v| rng::mix64(h ^ v as u64))
}

/// Chain counts inside one part, using the same sampling as [`verify_good`].
pub fn part_chains(
    g: &ColouredCompleteGraph,
    colour: Colour,
    nf: &HashMap<usize, Vec<usize>>,
    part: &[usize],
) -> ChainCheck {
    let rel = ChainRelation::from_fn(part.len(), |a, b| related(g, colour, &nf[&part[a]], part[b]));
    rel.check(part_seed(part))
}

/// Largest `η` for which conditions 3 and 5 hold with the measured chain counts.
pub fn certified_eta(parts: &[Vec<usize>], checks: &[ChainCheck], y_len: usize) -> f64 {
    parts
        .iter()
        .zip(checks)
        .map(|(p, c)| {
            let size = p.len() as f64 / y_len.max(1) as f64;
            match c.min_chains {
                Some(m) => size.min(m as f64 / p.len() as f64),
                None => size,
            }
        })
        .fold(1.0, f64::min)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GoodFailure {
    /// Which of the five goodness conditions failed.
    pub condition: u8,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GoodReport {
    pub pass: bool,
    pub first_failure: Option<GoodFailure>,
    /// Chain counts per part; sampled parts are flagged.
    pub parts: Vec<ChainCheck>,
}

fn fail(condition: u8, detail: String) -> GoodReport {
    GoodReport { pass: false, first_failure: Some(GoodFailure { condition, detail }), parts: Vec::new() }
}

/// Checks the five goodness conditions.
pub fn verify_good(g: &ColouredCompleteGraph, w: &GoodSubgraphWitness) -> GoodReport {
    let f = match w.member() {
        Ok(f) => f,
        Err(e) => return fail(2, e.to_string()),
    };
    if w.embedding.colour.is_none() && f.edge_count() > 0 {
        return fail(1, "no colour recorded".into());
    }
    if w.embedding.colour.is_some_and(|c| c != w.colour) {
        return fail(1, "embedding colour differs from the witness colour".into());
    }
    if let Err(v) = w.embedding.check(g, &f) {
        return fail(1, format!("{v:?}"));
    }
    let img = &w.embedding.vertices;
    let side = |s: &[usize]| {
        let mut v: Vec<usize> = s.iter().map(|&j| img[j]).collect();
        v.sort_unstable();
        v
    };
    let (mut x, mut y) = (w.x.clone(), w.y.clone());
    x.sort_unstable();
    y.sort_unstable();
    if x != side(f.x_side()) || y != side(f.y_side()) {
        return fail(2, "X and Y are not the images of the member's sides".into());
    }

    let n = g.n();
    let y_set = VertexSet::from_iter_in(n, y.iter().copied());
    let mut covered = VertexSet::new(n);
    for (i, p) in w.parts.iter().enumerate() {
        for &v in p {
            if v >= n || !y_set.contains(v) {
                return fail(3, format!("part {i} has vertex {v} outside Y"));
            }
            if !covered.insert(v) {
                return fail(3, format!("vertex {v} lies in two parts"));
            }
        }
        if (p.len() as f64) < w.eta * y.len() as f64 {
            return fail(3, format!("part {i} has {} < η|Y| = {:.4} vertices", p.len(), w.eta * y.len() as f64));
        }
    }
    let rest = y.len() - covered.len();
    if rest as f64 > w.theta * y.len() as f64 {
        return fail(4, format!("{rest} vertices of Y lie in no part, above θ|Y| = {:.4}", w.theta * y.len() as f64));
    }

    let nf = w.f_neighbourhoods(&f);
    let mut checks = Vec::with_capacity(w.parts.len());
    for (i, p) in w.parts.iter().enumerate() {
        let c = part_chains(g, w.colour, &nf, p);
        let need = w.eta * p.len() as f64;
        if !c.meets(need) {
            let (a, b) = c.worst.expect("a failing check has a worst pair");
            let mut r = fail(
                5,
                format!(
                    "part {i}: pair ({}, {}) has {} disjoint chains, below η|Y_i| = {need:.4}",
                    p[a],
                    p[b],
                    c.min_chains.unwrap_or(0)
                ),
            );
            checks.push(c);
            r.parts = checks;
            return r;
        }
        checks.push(c);
    }
    GoodReport { pass: true, first_failure: None, parts: checks }
}

impl GoodReport {
    pub fn into_result(self) -> Result<Vec<ChainCheck>> {
        match self.first_failure {
            None => Ok(self.parts),
            Some(f) => Err(Error::precondition(
                "verify good",
                format!("condition {} fails: {}", f.condition, f.detail),
            )),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Generator;

    fn single_edge() -> GoodSubgraphWitness {
        let f = member(&SequenceSpec::path(), 2).unwrap();
        let embedding = Embedding::new(&f, 0, vec![3, 5]);
        let y = vec![embedding.vertices[f.y_side()[0]]];
        let x = vec![embedding.vertices[f.x_side()[0]]];
        GoodSubgraphWitness {
            colour: 0,
            spec: SequenceSpec::path(),
            embedding,
            x,
            parts: vec![y.clone()],
            y,
            eta: 1.0,
            theta: 0.0,
        }
    }

    #[test]
    fn single_edge_is_good() {
        let g = ColouredCompleteGraph::generate(&Generator::SingleColour, 8, 2, 0).unwrap();
        let w = single_edge();
        let r = verify_good(&g, &w);
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn uncovered_remainder_fails_condition_four() {
        let g = ColouredCompleteGraph::generate(&Generator::SingleColour, 8, 2, 0).unwrap();
        let mut w = single_edge();
        w.parts.clear();
        w.eta = 0.5;
        let r = verify_good(&g, &w);
        assert_eq!(r.first_failure.unwrap().condition, 4);
    }

    #[test]
    fn wrong_colour_fails_condition_one() {
        let g = ColouredCompleteGraph::generate(&Generator::SingleColour, 8, 2, 0).unwrap();
        let mut w = single_edge();
        w.colour = 1;
        w.embedding.colour = Some(1);
        assert_eq!(verify_good(&g, &w).first_failure.unwrap().condition, 1);
    }

    #[test]
    fn witness_round_trips_through_json() {
        let w = single_edge();
        let back: GoodSubgraphWitness = serde_json::from_str(&serde_json::to_string(&w).unwrap()).unwrap();
        assert_eq!(back, w);
    }
}
