//! Monochromatic tiles, tilings, and the tiling verifier.

use std::collections::HashMap;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::graph::{Colour, ColouredCompleteGraph};
use crate::sequence::{member, BipartiteMember, SequenceSpec};
use crate::vertex_set::VertexSet;

/// A copy of `F_order` in the host: `vertices[j]` is the image of member vertex `j`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Embedding {
    /// `None` only for tiles whose member has no edges; serialized as `-1`.
    #[serde(serialize_with = "ser_colour", deserialize_with = "de_colour")]
    pub colour: Option<Colour>,
    pub order: usize,
    pub vertices: Vec<usize>,
}

fn ser_colour<S: Serializer>(c: &Option<Colour>, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_i64(c.map_or(-1, i64::from))
}

fn de_colour<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Colour>, D::Error> {
    let v = i64::deserialize(d)?;
    match v {
        -1 => Ok(None),
        0..=253 => Ok(Some(v as Colour)),
        _ => Err(serde::de::Error::custom(format!("colour {v} out of range"))),
    }
}

impl Embedding {
    pub fn singleton(v: usize) -> Self {
        Embedding { colour: None, order: 1, vertices: vec![v] }
    }

    /// Tile for `f` with the given images; the colour is dropped when `f` has no edges.
    pub fn new(f: &BipartiteMember, colour: Colour, vertices: Vec<usize>) -> Self {
        debug_assert_eq!(f.order(), vertices.len());
        Embedding {
            colour: (f.edge_count() > 0).then_some(colour),
            order: f.order(),
            vertices,
        }
    }

    pub fn vertex_set(&self, n: usize) -> VertexSet {
        VertexSet::from_iter_in(n, self.vertices.iter().copied())
    }

    /// Checks that the images of every member edge carry the tile colour.
    pub fn check(&self, g: &ColouredCompleteGraph, f: &BipartiteMember) -> Result<(), Violation> {
        if f.order() != self.order || self.vertices.len() != self.order {
            return Err(Violation::WrongOrder {
                order: self.order,
                vertices: self.vertices.len(),
            });
        }
        if let Some(&v) = self.vertices.iter().find(|&&v| v >= g.n()) {
            return Err(Violation::OutOfRange { vertex: v });
        }
        let mut sorted = self.vertices.clone();
        sorted.sort_unstable();
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(Violation::NotInjective { vertex: w[0] });
        }
        if f.edge_count() == 0 {
            return Ok(());
        }
        let Some(c) = self.colour else {
            return Err(Violation::MissingColour);
        };
        for &(a, b) in f.edges() {
            let (u, v) = (self.vertices[a], self.vertices[b]);
            if g.colour_of(u, v) != c {
                return Err(Violation::WrongColour {
                    edge: (u, v),
                    expected: c,
                    found: g.colour_of(u, v),
                });
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tiling {
    pub tiles: Vec<Embedding>,
}

impl Tiling {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.tiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tiles.is_empty()
    }

    pub fn push(&mut self, e: Embedding) {
        self.tiles.push(e);
    }

    pub fn extend(&mut self, other: Tiling) {
        self.tiles.extend(other.tiles);
    }

    pub fn covered(&self, n: usize) -> VertexSet {
        let mut s = VertexSet::new(n);
        for t in &self.tiles {
            for &v in &t.vertices {
                if v < n {
                    s.insert(v);
                }
            }
        }
        s
    }

    /// Sorts tiles by their smallest vertex so equal tilings serialize identically.
    pub fn canonicalize(&mut self) {
        self.tiles
            .sort_by_key(|t| t.vertices.iter().copied().min().unwrap_or(usize::MAX));
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Violation {
    WrongOrder { order: usize, vertices: usize },
    OutOfRange { vertex: usize },
    NotInjective { vertex: usize },
    MissingColour,
    WrongColour { edge: (usize, usize), expected: Colour, found: Colour },
    MemberUnavailable { order: usize, detail: String },
    NotAPartition { vertex: usize, times: usize },
    Uncovered { vertex: usize },
    OutsideTarget { vertex: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TileViolation {
    /// Index of the offending tile, absent for partition-level problems.
    pub tile: Option<usize>,
    pub violation: Violation,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct TilingReport {
    pub violations: Vec<TileViolation>,
}

impl TilingReport {
    pub fn pass(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks that the tiles partition `target` exactly and each tile is a valid copy.
pub fn verify_cover(
    g: &ColouredCompleteGraph,
    spec: &SequenceSpec,
    tiling: &Tiling,
    target: &VertexSet,
) -> TilingReport {
    let mut report = TilingReport::default();
    let mut members: HashMap<usize, Option<BipartiteMember>> = HashMap::new();
    let mut times = vec![0usize; g.n()];
    for (idx, tile) in tiling.tiles.iter().enumerate() {
        let mut push = |violation| report.violations.push(TileViolation { tile: Some(idx), violation });
        for &v in &tile.vertices {
            if v < g.n() {
                times[v] += 1;
            }
        }
        if tile.order == 0 {
            push(Violation::WrongOrder { order: 0, vertices: tile.vertices.len() });
            continue;
        }
        let entry = members.entry(tile.order).or_insert_with(|| member(spec, tile.order).ok());
        let Some(f) = entry.as_ref() else {
            let detail = member(spec, tile.order).err().map(|e| e.to_string()).unwrap_or_default();
            push(Violation::MemberUnavailable { order: tile.order, detail });
            continue;
        };
        if let Err(v) = tile.check(g, f) {
            push(v);
        }
    }
    for (v, &k) in times.iter().enumerate() {
        let violation = match (target.contains(v), k) {
            (true, 1) | (false, 0) => continue,
            (true, 0) => Violation::Uncovered { vertex: v },
            (false, _) => Violation::OutsideTarget { vertex: v },
            (true, _) => Violation::NotAPartition { vertex: v, times: k },
        };
        report.violations.push(TileViolation { tile: None, violation });
    }
    report
}

/// Checks that the tiles partition all host vertices.
pub fn verify_tiling(g: &ColouredCompleteGraph, spec: &SequenceSpec, tiling: &Tiling) -> TilingReport {
    verify_cover(g, spec, tiling, &g.all_vertices())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Generator;

    fn red_k6() -> ColouredCompleteGraph {
        ColouredCompleteGraph::generate(&Generator::SingleColour, 6, 2, 0).unwrap()
    }

    #[test]
    fn two_red_paths_tile_k6() {
        let g = red_k6();
        let p3 = member(&SequenceSpec::path(), 3).unwrap();
        let tiling = Tiling {
            tiles: vec![
                Embedding::new(&p3, 0, vec![0, 1, 2]),
                Embedding::new(&p3, 0, vec![5, 3, 4]),
            ],
        };
        assert!(verify_tiling(&g, &SequenceSpec::path(), &tiling).pass());
    }

    #[test]
    fn duplicated_vertex_is_not_a_partition() {
        let g = red_k6();
        let p3 = member(&SequenceSpec::path(), 3).unwrap();
        let tiling = Tiling {
            tiles: vec![
                Embedding::new(&p3, 0, vec![0, 1, 2]),
                Embedding::new(&p3, 0, vec![2, 3, 4]),
                Embedding::singleton(5),
            ],
        };
        let report = verify_tiling(&g, &SequenceSpec::path(), &tiling);
        assert!(report
            .violations
            .iter()
            .any(|v| v.violation == Violation::NotAPartition { vertex: 2, times: 2 }));
    }

    #[test]
    fn wrong_colour_and_uncovered_are_reported() {
        let g = red_k6();
        let p2 = member(&SequenceSpec::path(), 2).unwrap();
        let tiling = Tiling { tiles: vec![Embedding::new(&p2, 1, vec![0, 1])] };
        let report = verify_tiling(&g, &SequenceSpec::path(), &tiling);
        assert!(matches!(report.violations[0].violation, Violation::WrongColour { .. }));
        assert_eq!(report.violations.len(), 5);
    }

    #[test]
    fn singleton_accepts_any_colour_and_serializes_sentinel() {
        let g = red_k6();
        let t = Embedding { colour: Some(1), order: 1, vertices: vec![3] };
        assert!(t.check(&g, &member(&SequenceSpec::path(), 1).unwrap()).is_ok());
        let json = serde_json::to_string(&Embedding::singleton(4)).unwrap();
        assert_eq!(json, r#"{"colour":-1,"order":1,"vertices":[4]}"#);
        let back: Embedding = serde_json::from_str(&json).unwrap();
        assert_eq!(back, Embedding::singleton(4));
    }
}
