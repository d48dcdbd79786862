//! Bipartite graphs `(A, B)` with bitset rows on both sides.

use rand::Rng;

use crate::graph::{Colour, ColouredCompleteGraph};
use crate::rng;
use crate::vertex_set::VertexSet;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BipartiteGraph {
    /// `a_rows[i]` ⊆ `[0, |B|)`.
    a_rows: Vec<VertexSet>,
    /// `b_rows[j]` ⊆ `[0, |A|)`.
    b_rows: Vec<VertexSet>,
}

impl BipartiteGraph {
    pub fn empty(a: usize, b: usize) -> Self {
        BipartiteGraph {
            a_rows: vec![VertexSet::new(b); a],
            b_rows: vec![VertexSet::new(a); b],
        }
    }

    pub fn from_edges(a: usize, b: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut h = Self::empty(a, b);
        for (i, j) in edges {
            h.add_edge(i, j);
        }
        h
    }

    pub fn complete(a: usize, b: usize) -> Self {
        BipartiteGraph {
            a_rows: vec![VertexSet::full(b); a],
            b_rows: vec![VertexSet::full(a); b],
        }
    }

    /// Each pair is an edge independently with probability `p`.
    pub fn random(a: usize, b: usize, p: f64, seed: u64) -> Self {
        let mut rng = rng::substream(seed, "bipartite/random");
        let mut h = Self::empty(a, b);
        for i in 0..a {
            for j in 0..b {
                if rng.gen_bool(p) {
                    h.add_edge(i, j);
                }
            }
        }
        h
    }

    /// Colour-`colour` edges between the listed host vertices, indexed by list position.
    pub fn between(g: &ColouredCompleteGraph, colour: Colour, a: &[usize], b: &[usize]) -> Self {
        let b_set = VertexSet::from_iter_in(g.n(), b.iter().copied());
        let mut h = Self::empty(a.len(), b.len());
        let mut pos = vec![usize::MAX; g.n()];
        for (j, &v) in b.iter().enumerate() {
            pos[v] = j;
        }
        for (i, &u) in a.iter().enumerate() {
            for v in &g.neighbours(colour, u).intersection(&b_set) {
                h.add_edge(i, pos[v]);
            }
        }
        h
    }

    pub fn add_edge(&mut self, i: usize, j: usize) {
        self.a_rows[i].insert(j);
        self.b_rows[j].insert(i);
    }

    #[inline]
    pub fn a_len(&self) -> usize {
        self.a_rows.len()
    }

    #[inline]
    pub fn b_len(&self) -> usize {
        self.b_rows.len()
    }

    #[inline]
    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.a_rows[i].contains(j)
    }

    /// Neighbours in B of `i ∈ A`.
    #[inline]
    pub fn a_neighbours(&self, i: usize) -> &VertexSet {
        &self.a_rows[i]
    }

    /// Neighbours in A of `j ∈ B`.
    #[inline]
    pub fn b_neighbours(&self, j: usize) -> &VertexSet {
        &self.b_rows[j]
    }

    pub fn edge_count(&self) -> usize {
        self.a_rows.iter().map(VertexSet::len).sum()
    }

    pub fn density(&self) -> f64 {
        let cells = self.a_len() * self.b_len();
        if cells == 0 {
            1.0
        } else {
            self.edge_count() as f64 / cells as f64
        }
    }

    pub fn min_a_degree(&self) -> usize {
        self.a_rows.iter().map(VertexSet::len).min().unwrap_or(0)
    }

    /// Common neighbourhood in B of a set of A-vertices.
    pub fn common_b(&self, a_vertices: &[usize]) -> VertexSet {
        let mut s = VertexSet::full(self.b_len());
        for &i in a_vertices {
            s.intersect_with(&self.a_rows[i]);
        }
        s
    }

    /// Common neighbourhood in A of a set of B-vertices.
    pub fn common_a(&self, b_vertices: &[usize]) -> VertexSet {
        let mut s = VertexSet::full(self.a_len());
        for &j in b_vertices {
            s.intersect_with(&self.b_rows[j]);
        }
        s
    }

    /// Subgraph induced on the listed positions, reindexed by list order.
    pub fn induced(&self, a: &[usize], b: &[usize]) -> Self {
        let mut pos = vec![usize::MAX; self.b_len()];
        for (j, &v) in b.iter().enumerate() {
            pos[v] = j;
        }
        let mut h = Self::empty(a.len(), b.len());
        for (i, &u) in a.iter().enumerate() {
            for v in &self.a_rows[u] {
                if pos[v] != usize::MAX {
                    h.add_edge(i, pos[v]);
                }
            }
        }
        h
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Generator;

    #[test]
    fn rows_are_mirrored() {
        let h = BipartiteGraph::random(20, 30, 0.4, 3);
        for i in 0..20 {
            for j in 0..30 {
                assert_eq!(h.a_neighbours(i).contains(j), h.b_neighbours(j).contains(i));
            }
        }
        assert_eq!(h.edge_count(), (0..30).map(|j| h.b_neighbours(j).len()).sum::<usize>());
    }

    #[test]
    fn between_reads_colour_class() {
        let g = ColouredCompleteGraph::generate(&Generator::UniformRandom, 12, 2, 4).unwrap();
        let a = [0, 3, 5];
        let b = [1, 2, 7, 11];
        let h = BipartiteGraph::between(&g, 1, &a, &b);
        for (i, &u) in a.iter().enumerate() {
            for (j, &v) in b.iter().enumerate() {
                assert_eq!(h.has_edge(i, j), g.colour_of(u, v) == 1);
            }
        }
        let sub = h.induced(&[2, 0], &[3, 1]);
        assert_eq!(sub.has_edge(0, 0), h.has_edge(2, 3));
        assert_eq!(sub.has_edge(1, 1), h.has_edge(0, 1));
    }
}
