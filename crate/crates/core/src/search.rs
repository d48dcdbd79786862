//! Backtracking subgraph embedder over bitset adjacency.
//!
//! Member vertices are placed in BFS order, so every vertex after the first of
//! its component has an already placed neighbour and its candidates come from
//! one bitset intersection per placed neighbour.

use rand::seq::SliceRandom;

use crate::graph::Adjacency;
use crate::rng;
use crate::sequence::BipartiteMember;
use crate::vertex_set::VertexSet;

pub const DEFAULT_BUDGET: u64 = 1_000_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SearchOutcome {
    /// `images[j]` is the host vertex of member vertex `j`.
    Found(Vec<usize>),
    /// Exhaustive search proved no copy exists.
    Absent,
    BudgetExhausted,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchResult {
    pub outcome: SearchOutcome,
    pub nodes: u64,
}

impl SearchResult {
    pub fn found(&self) -> Option<&[usize]> {
        match &self.outcome {
            SearchOutcome::Found(v) => Some(v),
            _ => None,
        }
    }

    pub fn into_found(self) -> Option<Vec<usize>> {
        match self.outcome {
            SearchOutcome::Found(v) => Some(v),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchConfig {
    pub budget: u64,
    /// Shuffles candidate tie-breaks; `None` keeps increasing vertex order.
    pub shuffle_seed: Option<u64>,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig { budget: DEFAULT_BUDGET, shuffle_seed: None }
    }
}

impl SearchConfig {
    pub fn with_budget(budget: u64) -> Self {
        SearchConfig { budget, shuffle_seed: None }
    }
}

/// Finds a copy of `f` in `host` using only vertices of `within`.
pub fn find_copy<A: Adjacency>(
    host: &A,
    within: &VertexSet,
    f: &BipartiteMember,
    cfg: &SearchConfig,
) -> SearchResult {
    find_copy_split(host, within, within, f, cfg)
}

/// Like [`find_copy`], but X'-side member vertices must land in `x_within`
/// and Y'-side ones in `y_within`.
pub fn find_copy_split<A: Adjacency>(
    host: &A,
    x_within: &VertexSet,
    y_within: &VertexSet,
    f: &BipartiteMember,
    cfg: &SearchConfig,
) -> SearchResult {
    let k = f.order();
    let all = x_within.union(y_within);
    if k == 0 {
        return SearchResult { outcome: SearchOutcome::Found(Vec::new()), nodes: 0 };
    }
    if all.len() < k
        || f.x_side().len() > x_within.len()
        || f.y_side().len() > y_within.len()
    {
        return SearchResult { outcome: SearchOutcome::Absent, nodes: 0 };
    }

    let mut order: Vec<usize> = f.bfs_order().into_iter().filter(|&v| f.degree(v) > 0).collect();
    order.extend((0..k).filter(|&v| f.degree(v) == 0));
    let mut pos = vec![0; k];
    for (d, &v) in order.iter().enumerate() {
        pos[v] = d;
    }
    let parents: Vec<Vec<usize>> = order
        .iter()
        .enumerate()
        .map(|(d, &v)| f.neighbours(v).iter().copied().filter(|&u| pos[u] < d).collect())
        .collect();
    let needed: Vec<usize> = (0..k).map(|d| f.degree(order[d]) - parents[d].len()).collect();

    let mut rng = cfg.shuffle_seed.map(|s| rng::substream(s, "search/tie-break"));
    let mut used = VertexSet::new(all.universe());
    let mut images = vec![usize::MAX; k];
    let mut stack: Vec<Vec<usize>> = Vec::with_capacity(k);
    let mut nodes = 0u64;

    let candidates = |d: usize, used: &VertexSet, images: &[usize], rng: &mut Option<rng::StreamRng>| {
        let v = order[d];
        let (own, other) = if f.in_x(v) { (x_within, y_within) } else { (y_within, x_within) };
        let mut cand = own.difference(used);
        for &p in &parents[d] {
            cand.intersect_with(host.neighbours(images[p]));
        }
        if parents[d].is_empty() && needed[d] == 0 {
            // Isolated member vertex: every free vertex is interchangeable.
            return cand.first().into_iter().collect();
        }
        let onward = other.difference(used);
        let mut scored: Vec<(usize, usize)> = cand
            .iter()
            .filter_map(|c| {
                let s = host.neighbours(c).intersection_len(&onward);
                (s >= needed[d]).then_some((s, c))
            })
            .collect();
        // Ties pop in increasing vertex order unless shuffled.
        match rng.as_mut() {
            Some(r) => scored.shuffle(r),
            None => scored.reverse(),
        }
        // Popped from the back: low onward degree first for path-like steps,
        // high onward degree first when several children still need room.
        if needed[d] >= 2 {
            scored.sort_by_key(|&(s, _)| s);
        } else {
            scored.sort_by_key(|&(s, _)| std::cmp::Reverse(s));
        }
        scored.into_iter().map(|(_, c)| c).collect::<Vec<usize>>()
    };

    stack.push(candidates(0, &used, &images, &mut rng));
    loop {
        let depth = stack.len() - 1;
        match stack[depth].pop() {
            Some(c) => {
                nodes += 1;
                if nodes > cfg.budget {
                    return SearchResult { outcome: SearchOutcome::BudgetExhausted, nodes };
                }
                images[order[depth]] = c;
                used.insert(c);
                if depth + 1 == k {
                    return SearchResult { outcome: SearchOutcome::Found(images), nodes };
                }
                let next = candidates(depth + 1, &used, &images, &mut rng);
                stack.push(next);
            }
            None => {
                stack.pop();
                if stack.is_empty() {
                    return SearchResult { outcome: SearchOutcome::Absent, nodes };
                }
                let d = stack.len() - 1;
                used.remove(images[order[d]]);
                images[order[d]] = usize::MAX;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{BitGraph, ColouredCompleteGraph, Generator};
    use crate::sequence::{member, SequenceSpec};

    fn check_copy<A: Adjacency>(host: &A, f: &BipartiteMember, images: &[usize]) {
        let mut seen = images.to_vec();
        seen.sort_unstable();
        seen.dedup();
        assert_eq!(seen.len(), f.order());
        for &(a, b) in f.edges() {
            assert!(host.has_edge(images[a], images[b]));
        }
    }

    #[test]
    fn single_edge_found_in_any_nonempty_graph() {
        let host = BitGraph::from_edges(5, [(3, 4)]);
        let f = member(&SequenceSpec::path(), 2).unwrap();
        let r = find_copy(&host, &VertexSet::full(5), &f, &SearchConfig::default());
        check_copy(&host, &f, r.found().unwrap());
    }

    #[test]
    fn absence_is_proved_exhaustively() {
        // A star has no P_4.
        let host = BitGraph::from_edges(5, [(0, 1), (0, 2), (0, 3), (0, 4)]);
        let f = member(&SequenceSpec::path(), 4).unwrap();
        let r = find_copy(&host, &VertexSet::full(5), &f, &SearchConfig::default());
        assert_eq!(r.outcome, SearchOutcome::Absent);
    }

    #[test]
    fn budget_is_respected() {
        let host = BitGraph::from_edges(8, (0..7).map(|i| (i, i + 1)));
        let f = member(&SequenceSpec::blocky(2), 4).unwrap();
        let r = find_copy(&host, &VertexSet::full(8), &f, &SearchConfig::with_budget(3));
        assert_eq!(r.outcome, SearchOutcome::BudgetExhausted);
    }

    #[test]
    fn split_domains_are_respected() {
        let g = ColouredCompleteGraph::generate(&Generator::SingleColour, 10, 1, 0).unwrap();
        let f = member(&SequenceSpec::random(3, 2), 8).unwrap();
        let xs = VertexSet::range(10, 0, 5);
        let ys = VertexSet::range(10, 5, 10);
        let r = find_copy_split(&g.class(0), &xs, &ys, &f, &SearchConfig::default());
        let images = r.into_found().unwrap();
        for v in 0..f.order() {
            assert_eq!(f.in_x(v), images[v] < 5);
        }
    }

    #[test]
    fn hamiltonian_path_in_random_half_graph() {
        let g = ColouredCompleteGraph::generate(&Generator::UniformRandom, 60, 2, 5).unwrap();
        let f = member(&SequenceSpec::path(), 60).unwrap();
        let class = g.class(0);
        let r = find_copy(&class, &g.all_vertices(), &f, &SearchConfig::default());
        check_copy(&class, &f, r.found().expect("dense random graphs are Hamiltonian"));
    }

    #[test]
    fn shuffled_search_is_reproducible() {
        let g = ColouredCompleteGraph::generate(&Generator::UniformRandom, 30, 2, 1).unwrap();
        let f = member(&SequenceSpec::random(3, 4), 12).unwrap();
        let cfg = SearchConfig { budget: 100_000, shuffle_seed: Some(9) };
        let a = find_copy(&g.class(1), &g.all_vertices(), &f, &cfg);
        let b = find_copy(&g.class(1), &g.all_vertices(), &f, &cfg);
        assert_eq!(a, b);
        check_copy(&g.class(1), &f, a.found().unwrap());
    }
}
