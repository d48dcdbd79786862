//! Edge-coloured complete graphs.
//!
//! Colours are dense ids `0..r`. Colour `0` plays the role of "red" inside the
//! absorption routines; callers pick a different colour by passing it
//! explicitly.

use std::fmt::Write as _;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::rng;
use crate::vertex_set::VertexSet;

pub type Colour = u8;

/// Largest supported colour count.
pub const MAX_COLOURS: usize = 254;

const NO_COLOUR: Colour = Colour::MAX;

/// Read access to a simple graph through bitset rows.
pub trait Adjacency {
    fn order(&self) -> usize;
    fn neighbours(&self, v: usize) -> &VertexSet;

    fn has_edge(&self, u: usize, v: usize) -> bool {
        self.neighbours(u).contains(v)
    }

    /// Number of edges with both ends in `within`.
    fn edges_within(&self, within: &VertexSet) -> usize {
        within
            .iter()
            .map(|v| self.neighbours(v).intersection_len(within))
            .sum::<usize>()
            / 2
    }
}

/// A simple graph stored as symmetric bitset rows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitGraph {
    rows: Vec<VertexSet>,
}

impl BitGraph {
    pub fn empty(n: usize) -> Self {
        BitGraph {
            rows: vec![VertexSet::new(n); n],
        }
    }

    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut g = Self::empty(n);
        for (u, v) in edges {
            g.add_edge(u, v);
        }
        g
    }

    pub fn add_edge(&mut self, u: usize, v: usize) {
        assert_ne!(u, v, "self-loop");
        self.rows[u].insert(v);
        self.rows[v].insert(u);
    }
}

impl Adjacency for BitGraph {
    fn order(&self) -> usize {
        self.rows.len()
    }

    fn neighbours(&self, v: usize) -> &VertexSet {
        &self.rows[v]
    }
}

/// One colour class of a coloured complete graph, viewed as a simple graph.
#[derive(Clone, Copy)]
pub struct ColourClass<'g> {
    graph: &'g ColouredCompleteGraph,
    colour: Colour,
}

impl Adjacency for ColourClass<'_> {
    fn order(&self) -> usize {
        self.graph.n
    }

    #[inline]
    fn neighbours(&self, v: usize) -> &VertexSet {
        self.graph.neighbours(self.colour, v)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ColouredCompleteGraph {
    n: usize,
    r: usize,
    /// Dense `n × n` colour matrix; the diagonal holds `NO_COLOUR`.
    matrix: Vec<Colour>,
    /// `adj[c][v]` = vertices joined to `v` in colour `c`.
    adj: Vec<Vec<VertexSet>>,
}

/// How to produce a colouring.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Generator {
    UniformRandom,
    SingleColour,
    /// Consecutive vertex blocks of the given sizes; the pair colour is
    /// `matrix[block(u)][block(v)]`, including inside a block.
    Blocks {
        sizes: Vec<usize>,
        matrix: Vec<Vec<Colour>>,
    },
}

impl ColouredCompleteGraph {
    /// Builds a colouring from a pair function evaluated on `u < v`.
    pub fn from_fn(n: usize, r: usize, mut colour: impl FnMut(usize, usize) -> Colour) -> Result<Self> {
        check_r(r)?;
        let mut matrix = vec![NO_COLOUR; n * n];
        for u in 0..n {
            for v in u + 1..n {
                let c = colour(u, v);
                if c as usize >= r {
                    return Err(Error::Parse(format!(
                        "colour {c} on pair ({u},{v}) is not below r = {r}"
                    )));
                }
                matrix[u * n + v] = c;
                matrix[v * n + u] = c;
            }
        }
        Ok(Self::from_matrix(n, r, matrix))
    }

    fn from_matrix(n: usize, r: usize, matrix: Vec<Colour>) -> Self {
        let mut adj = vec![vec![VertexSet::new(n); n]; r];
        for u in 0..n {
            for v in 0..n {
                if u != v {
                    adj[matrix[u * n + v] as usize][u].insert(v);
                }
            }
        }
        ColouredCompleteGraph { n, r, matrix, adj }
    }

    /// Builds from colour ids listed in row-major upper-triangle order.
    pub fn from_upper_triangle(n: usize, r: usize, colours: &[u64]) -> Result<Self> {
        let expected = n * n.saturating_sub(1) / 2;
        if colours.len() != expected {
            return Err(Error::Parse(format!(
                "expected {expected} colour ids for n = {n}, found {}",
                colours.len()
            )));
        }
        if let Some((i, &c)) = colours.iter().enumerate().find(|(_, &c)| c >= r as u64) {
            return Err(Error::Parse(format!(
                "colour id {c} at position {i} is not below r = {r}"
            )));
        }
        let mut it = colours.iter();
        Self::from_fn(n, r, |_, _| *it.next().expect("length checked") as Colour)
    }

    pub fn generate(generator: &Generator, n: usize, r: usize, seed: u64) -> Result<Self> {
        match generator {
            Generator::SingleColour => Self::from_fn(n, r, |_, _| 0),
            Generator::UniformRandom => {
                check_r(r)?;
                let mut rng = rng::from_seed(seed);
                Self::from_fn(n, r, |_, _| rng.gen_range(0..r) as Colour)
            }
            Generator::Blocks { sizes, matrix } => {
                if sizes.iter().sum::<usize>() != n {
                    return Err(Error::InvalidArgument(format!(
                        "block sizes {sizes:?} do not sum to n = {n}"
                    )));
                }
                let p = sizes.len();
                if matrix.len() != p || matrix.iter().any(|row| row.len() != p) {
                    return Err(Error::InvalidArgument(format!(
                        "block colour matrix must be {p} x {p}"
                    )));
                }
                for i in 0..p {
                    for j in 0..p {
                        if matrix[i][j] != matrix[j][i] {
                            return Err(Error::InvalidArgument(
                                "block colour matrix must be symmetric".into(),
                            ));
                        }
                    }
                }
                let block: Vec<usize> = sizes
                    .iter()
                    .enumerate()
                    .flat_map(|(i, &s)| std::iter::repeat_n(i, s))
                    .collect();
                Self::from_fn(n, r, |u, v| matrix[block[u]][block[v]])
            }
        }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn r(&self) -> usize {
        self.r
    }

    #[inline]
    pub fn colour_of(&self, u: usize, v: usize) -> Colour {
        debug_assert_ne!(u, v);
        self.matrix[u * self.n + v]
    }

    #[inline]
    pub fn neighbours(&self, colour: Colour, v: usize) -> &VertexSet {
        &self.adj[colour as usize][v]
    }

    pub fn class(&self, colour: Colour) -> ColourClass<'_> {
        assert!((colour as usize) < self.r, "colour {colour} out of range");
        ColourClass { graph: self, colour }
    }

    pub fn all_vertices(&self) -> VertexSet {
        VertexSet::full(self.n)
    }

    pub fn empty_set(&self) -> VertexSet {
        VertexSet::new(self.n)
    }

    /// `{ v ∈ within \ S : colour_of(v, s) = colour for every s ∈ S }`.
    pub fn common_neighbourhood(&self, set: &VertexSet, colour: Colour, within: &VertexSet) -> VertexSet {
        let mut out = within.difference(set);
        for s in set {
            out.intersect_with(self.neighbours(colour, s));
        }
        out
    }

    /// Size of the common `colour`-neighbourhood of the listed vertices inside `within`.
    pub fn common_neighbourhood_len(&self, vertices: &[usize], colour: Colour, within: &VertexSet) -> usize {
        match vertices {
            [] => within.len(),
            [a] => self.neighbours(colour, *a).intersection_len(within),
            [a, b] => {
                let (ra, rb, rw) = (
                    self.neighbours(colour, *a).words(),
                    self.neighbours(colour, *b).words(),
                    within.words(),
                );
                ra.iter()
                    .zip(rb)
                    .zip(rw)
                    .map(|((x, y), z)| (x & y & z).count_ones() as usize)
                    .sum()
            }
            _ => {
                let mut acc = within.clone();
                for &v in vertices {
                    acc.intersect_with(self.neighbours(colour, v));
                }
                acc.len()
            }
        }
    }

    /// Edge counts per colour among pairs inside `within`.
    pub fn colour_counts_within(&self, within: &VertexSet) -> Vec<usize> {
        (0..self.r)
            .map(|c| self.class(c as Colour).edges_within(within))
            .collect()
    }

    /// Edge counts per colour between two disjoint sets.
    pub fn colour_counts_between(&self, a: &VertexSet, b: &VertexSet) -> Vec<usize> {
        (0..self.r)
            .map(|c| a.iter().map(|u| self.neighbours(c as Colour, u).intersection_len(b)).sum())
            .collect()
    }

    /// Colours sorted by decreasing count, ties by lower id.
    pub fn colours_by_frequency(counts: &[usize]) -> Vec<Colour> {
        let mut order: Vec<Colour> = (0..counts.len() as Colour).collect();
        order.sort_by(|&a, &b| counts[b as usize].cmp(&counts[a as usize]).then(a.cmp(&b)));
        order
    }

    /// Colour ids in row-major upper-triangle order.
    pub fn upper_triangle(&self) -> Vec<Colour> {
        let mut out = Vec::with_capacity(self.n * self.n.saturating_sub(1) / 2);
        for u in 0..self.n {
            for v in u + 1..self.n {
                out.push(self.colour_of(u, v));
            }
        }
        out
    }

    /// Canonical text format: header `n r`, then one line of colour ids per row `u`.
    pub fn to_text(&self) -> String {
        let mut s = format!("{} {}\n", self.n, self.r);
        for u in 0..self.n.saturating_sub(1) {
            let row: Vec<String> = (u + 1..self.n).map(|v| self.colour_of(u, v).to_string()).collect();
            s.push_str(&row.join(" "));
            s.push('\n');
        }
        s
    }

    pub fn parse_text(text: &str) -> Result<Self> {
        let mut tokens = text.split_whitespace();
        let mut header = |name: &str| -> Result<usize> {
            tokens
                .next()
                .ok_or_else(|| Error::Parse(format!("missing header field {name}")))?
                .parse::<usize>()
                .map_err(|e| Error::Parse(format!("header field {name}: {e}")))
        };
        let n = header("n")?;
        let r = header("r")?;
        let colours = tokens
            .map(|t| t.parse::<u64>().map_err(|e| Error::Parse(format!("colour id {t:?}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        Self::from_upper_triangle(n, r, &colours)
    }

    pub fn to_json(&self) -> ColouringJson {
        ColouringJson {
            n: self.n,
            r: self.r,
            colours: self.upper_triangle().into_iter().map(u64::from).collect(),
        }
    }

    pub fn from_json(json: &ColouringJson) -> Result<Self> {
        Self::from_upper_triangle(json.n, json.r, &json.colours)
    }

    /// Reads either format; JSON is recognised by a leading `{`.
    pub fn parse_any(text: &str) -> Result<Self> {
        if text.trim_start().starts_with('{') {
            let json: ColouringJson = serde_json::from_str(text)?;
            Self::from_json(&json)
        } else {
            Self::parse_text(text)
        }
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse_any(&std::fs::read_to_string(path)?)
    }

    /// Hex SHA-256 of the canonical text format, truncated to 16 characters.
    pub fn digest(&self) -> String {
        let hash = Sha256::digest(self.to_text().as_bytes());
        let mut s = String::with_capacity(16);
        for b in &hash[..8] {
            let _ = write!(s, "{b:02x}");
        }
        s
    }
}

fn check_r(r: usize) -> Result<()> {
    if r == 0 || r > MAX_COLOURS {
        return Err(Error::InvalidArgument(format!(
            "colour count must be in 1..={MAX_COLOURS}, got {r}"
        )));
    }
    Ok(())
}

/// JSON mirror of the text format.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColouringJson {
    pub n: usize,
    pub r: usize,
    pub colours: Vec<u64>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn single_colour_k3() {
        let g = ColouredCompleteGraph::generate(&Generator::SingleColour, 3, 2, 0).unwrap();
        assert_eq!(g.upper_triangle(), vec![0, 0, 0]);
        assert!(g.neighbours(1, 0).is_empty());
    }

    #[test]
    fn uniform_random_is_reproducible() {
        let a = ColouredCompleteGraph::generate(&Generator::UniformRandom, 5, 2, 1).unwrap();
        let b = ColouredCompleteGraph::generate(&Generator::UniformRandom, 5, 2, 1).unwrap();
        assert_eq!(a, b);
        let c = ColouredCompleteGraph::generate(&Generator::UniformRandom, 40, 2, 2).unwrap();
        assert_ne!(c, ColouredCompleteGraph::generate(&Generator::UniformRandom, 40, 2, 3).unwrap());
    }

    #[test]
    fn text_file_matches_upper_triangle_order() {
        let g = ColouredCompleteGraph::parse_text("4 2\n0 1 1\n0 1\n1\n").unwrap();
        assert_eq!(g.colour_of(0, 1), 0);
        assert_eq!(g.colour_of(0, 2), 1);
        assert_eq!(g.colour_of(0, 3), 1);
        assert_eq!(g.colour_of(1, 2), 0);
        assert_eq!(g.colour_of(1, 3), 1);
        assert_eq!(g.colour_of(3, 2), 1);
        let back = ColouredCompleteGraph::parse_text(&g.to_text()).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn rejects_bad_files() {
        assert!(matches!(ColouredCompleteGraph::parse_text("3 2\n0 2 1"), Err(Error::Parse(_))));
        assert!(matches!(ColouredCompleteGraph::parse_text("3 2\n0 1"), Err(Error::Parse(_))));
        assert!(matches!(ColouredCompleteGraph::parse_text("3"), Err(Error::Parse(_))));
        assert!(matches!(ColouredCompleteGraph::parse_text("2 2\nx"), Err(Error::Parse(_))));
    }

    #[test]
    fn tiny_graphs_are_legal() {
        for n in [0, 1] {
            let g = ColouredCompleteGraph::parse_text(&format!("{n} 3\n")).unwrap();
            assert_eq!(g.n(), n);
            assert!(g.upper_triangle().is_empty());
        }
    }

    #[test]
    fn blocks_generator() {
        let gen = Generator::Blocks {
            sizes: vec![2, 3],
            matrix: vec![vec![0, 1], vec![1, 0]],
        };
        let g = ColouredCompleteGraph::generate(&gen, 5, 2, 0).unwrap();
        assert_eq!(g.colour_of(0, 1), 0);
        assert_eq!(g.colour_of(0, 2), 1);
        assert_eq!(g.colour_of(3, 4), 0);
        assert!(ColouredCompleteGraph::generate(&gen, 6, 2, 0).is_err());
    }

    #[test]
    fn common_neighbourhood_examples() {
        let g = ColouredCompleteGraph::generate(&Generator::SingleColour, 4, 2, 0).unwrap();
        let s0 = VertexSet::from_iter_in(4, [0]);
        assert_eq!(g.common_neighbourhood(&s0, 0, &g.all_vertices()).to_vec(), vec![1, 2, 3]);
        assert!(g.common_neighbourhood(&s0, 1, &g.all_vertices()).is_empty());

        let g = ColouredCompleteGraph::generate(&Generator::UniformRandom, 8, 2, 7).unwrap();
        let s = VertexSet::from_iter_in(8, [0, 1]);
        let brute: Vec<usize> = (2..8)
            .filter(|&v| g.colour_of(v, 0) == 0 && g.colour_of(v, 1) == 0)
            .collect();
        assert_eq!(g.common_neighbourhood(&s, 0, &g.all_vertices()).to_vec(), brute);
        assert_eq!(g.common_neighbourhood_len(&[0, 1], 0, &g.all_vertices()), brute.len());
    }

    proptest! {
        #[test]
        fn colour_classes_partition_the_complete_graph(n in 0usize..40, r in 1usize..5, seed: u64) {
            let g = ColouredCompleteGraph::generate(&Generator::UniformRandom, n, r, seed).unwrap();
            for u in 0..n {
                for v in 0..n {
                    if u == v { continue; }
                    let holders: Vec<usize> = (0..r).filter(|&c| g.neighbours(c as Colour, u).contains(v)).collect();
                    prop_assert_eq!(holders, vec![g.colour_of(u, v) as usize]);
                    prop_assert_eq!(g.colour_of(u, v), g.colour_of(v, u));
                }
            }
            let back = ColouredCompleteGraph::parse_text(&g.to_text()).unwrap();
            prop_assert_eq!(&back, &g);
            let json = serde_json::to_string(&g.to_json()).unwrap();
            prop_assert_eq!(&ColouredCompleteGraph::parse_any(&json).unwrap(), &g);
        }

        #[test]
        fn common_neighbourhood_stays_inside_within(n in 1usize..30, seed: u64, picks in proptest::collection::vec(0usize..30, 1..4)) {
            let g = ColouredCompleteGraph::generate(&Generator::UniformRandom, n, 3, seed).unwrap();
            let set = VertexSet::from_iter_in(n, picks.iter().map(|p| p % n));
            let within = VertexSet::from_iter_in(n, (0..n).filter(|v| v % 3 != 1));
            let cn = g.common_neighbourhood(&set, 1, &within);
            prop_assert!(cn.is_subset(&within));
            prop_assert!(cn.is_disjoint(&set));
        }
    }
}
