//! Down-closed hypergraphs, rich sets, and greedy hypergraph embeddings.
//!
//! Hypergraph vertices are local indices `0..n`. The common-neighbourhood
//! hypergraph never materializes its edges; membership is a bitset count.

use std::collections::{HashMap, HashSet};

use rand::seq::index::sample;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use crate::drc::binomial;
use crate::error::{Error, Result};
use crate::graph::{Colour, ColouredCompleteGraph};
use crate::rng::{self, StreamRng};
use crate::sequence::DerivedMultiHypergraph;
use crate::vertex_set::VertexSet;

/// Above this many supersets richness is estimated by sampling.
pub const EXACT_RICH_LIMIT: u128 = 10_000_000;
const RICH_SAMPLES: usize = 4_000;

/// A hypergraph whose edge set is closed under subsets.
pub trait DownClosed {
    fn vertex_count(&self) -> usize;
    /// Size Δ of the largest edges that matter.
    fn rank(&self) -> usize;
    /// `s` is sorted, distinct, and has at most `rank()` elements.
    fn is_edge(&self, s: &[usize]) -> bool;
}

/// Edges are the sets with at least `threshold` common `colour`-neighbours in `v`.
pub struct CommonNeighbourHypergraph<'g> {
    g: &'g ColouredCompleteGraph,
    colour: Colour,
    /// Host vertex of each local index.
    u: Vec<usize>,
    v: VertexSet,
    threshold: usize,
    rank: usize,
}

impl<'g> CommonNeighbourHypergraph<'g> {
    pub fn new(
        g: &'g ColouredCompleteGraph,
        colour: Colour,
        u: Vec<usize>,
        v: VertexSet,
        threshold: usize,
        rank: usize,
    ) -> Self {
        CommonNeighbourHypergraph { g, colour, u, v, threshold, rank }
    }

    pub fn host_vertex(&self, local: usize) -> usize {
        self.u[local]
    }

    pub fn host_vertices(&self) -> &[usize] {
        &self.u
    }

    /// Common neighbours in `V` of the host images of `s`.
    pub fn common(&self, s: &[usize]) -> VertexSet {
        let mut out = self.v.clone();
        for &x in s {
            out.intersect_with(self.g.neighbours(self.colour, self.u[x]));
        }
        out
    }
}

impl DownClosed for CommonNeighbourHypergraph<'_> {
    fn vertex_count(&self) -> usize {
        self.u.len()
    }

    fn rank(&self) -> usize {
        self.rank
    }

    fn is_edge(&self, s: &[usize]) -> bool {
        let hosts: Vec<usize> = s.iter().map(|&x| self.u[x]).collect();
        self.g.common_neighbourhood_len(&hosts, self.colour, &self.v) >= self.threshold
    }
}

/// The down-closure of an explicit list of Δ-sets.
pub struct ExplicitHypergraph {
    n: usize,
    rank: usize,
    closure: HashSet<Vec<usize>>,
}

impl ExplicitHypergraph {
    pub fn new(n: usize, rank: usize, top_edges: impl IntoIterator<Item = Vec<usize>>) -> Self {
        let mut closure = HashSet::new();
        closure.insert(Vec::new());
        for mut e in top_edges {
            e.sort_unstable();
            for mask in 0u32..(1 << e.len()) {
                let sub: Vec<usize> = (0..e.len()).filter(|&i| mask >> i & 1 == 1).map(|i| e[i]).collect();
                closure.insert(sub);
            }
        }
        ExplicitHypergraph { n, rank, closure }
    }

    /// All Δ-sets except the listed ones.
    pub fn complete_minus(n: usize, rank: usize, missing: &[Vec<usize>]) -> Self {
        let missing: HashSet<Vec<usize>> = missing
            .iter()
            .map(|e| {
                let mut e = e.clone();
                e.sort_unstable();
                e
            })
            .collect();
        let mut tops = Vec::new();
        for_each_subset(&(0..n).collect::<Vec<_>>(), rank, &mut |s| {
            if !missing.contains(s) {
                tops.push(s.to_vec());
            }
        });
        Self::new(n, rank, tops)
    }
}

impl DownClosed for ExplicitHypergraph {
    fn vertex_count(&self) -> usize {
        self.n
    }

    fn rank(&self) -> usize {
        self.rank
    }

    fn is_edge(&self, s: &[usize]) -> bool {
        self.closure.contains(s)
    }
}

/// Calls `f` on every `k`-subset of `items`, each in increasing position order.
pub fn for_each_subset(items: &[usize], k: usize, f: &mut impl FnMut(&[usize])) {
    fn rec(items: &[usize], k: usize, from: usize, cur: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if cur.len() == k {
            f(cur);
            return;
        }
        for i in from..items.len() {
            if items.len() - i < k - cur.len() {
                break;
            }
            cur.push(items[i]);
            rec(items, k, i + 1, cur, f);
            cur.pop();
        }
    }
    rec(items, k, 0, &mut Vec::with_capacity(k), f);
}

fn sorted_union(s: &[usize], extra: &[usize]) -> Vec<usize> {
    let mut u: Vec<usize> = s.iter().chain(extra).copied().collect();
    u.sort_unstable();
    u
}

/// Number of Δ-edges, exact.
pub fn count_top_edges<G: DownClosed>(g: &G) -> u128 {
    let mut count = 0u128;
    let all: Vec<usize> = (0..g.vertex_count()).collect();
    for_each_subset(&all, g.rank(), &mut |s| count += u128::from(g.is_edge(s)));
    count
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct RichStats {
    pub queries: u64,
    pub exact: u64,
    pub sampled: u64,
}

/// Memoized rich-set classification.
///
/// The memo needs `&mut self`, so an oracle belongs to one worker; parallel
/// callers build their own.
pub struct RichSetOracle<'a, G: DownClosed> {
    g: &'a G,
    lambda: f64,
    memo: HashMap<Vec<usize>, bool>,
    rng: StreamRng,
    pub stats: RichStats,
}

impl<'a, G: DownClosed> RichSetOracle<'a, G> {
    pub fn new(g: &'a G, lambda: f64, seed: u64) -> Self {
        RichSetOracle {
            g,
            lambda,
            memo: HashMap::new(),
            rng: rng::substream(seed, "rich-set/sample"),
            stats: RichStats::default(),
        }
    }

    pub fn graph(&self) -> &'a G {
        self.g
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Number of Δ-supersets of `s` that are edges, and the number of Δ-supersets.
    pub fn superset_edges(&mut self, s: &[usize]) -> (u128, u128, bool) {
        let n = self.g.vertex_count();
        let j = self.g.rank() - s.len();
        let total = binomial(n - s.len(), j);
        let rest: Vec<usize> = (0..n).filter(|v| s.binary_search(v).is_err()).collect();
        if total <= EXACT_RICH_LIMIT {
            let mut count = 0u128;
            for_each_subset(&rest, j, &mut |extra| {
                count += u128::from(self.g.is_edge(&sorted_union(s, extra)));
            });
            (count, total, true)
        } else {
            let mut hits = 0u128;
            for _ in 0..RICH_SAMPLES {
                let extra: Vec<usize> = sample(&mut self.rng, rest.len(), j).into_iter().map(|i| rest[i]).collect();
                hits += u128::from(self.g.is_edge(&sorted_union(s, &extra)));
            }
            let scaled = (hits as f64 / RICH_SAMPLES as f64 * total as f64).round() as u128;
            (scaled, total, false)
        }
    }

    /// `s` (sorted, at most Δ elements) lies in more than `(1−λ^{Δ−|s|})·C(n−|s|, Δ−|s|)` Δ-edges.
    pub fn is_rich(&mut self, s: &[usize]) -> bool {
        debug_assert!(s.windows(2).all(|w| w[0] < w[1]));
        if s.len() > self.g.rank() {
            return false;
        }
        self.stats.queries += 1;
        if let Some(&hit) = self.memo.get(s) {
            return hit;
        }
        let (count, total, exact) = self.superset_edges(s);
        if exact {
            self.stats.exact += 1;
        } else {
            self.stats.sampled += 1;
        }
        let j = self.g.rank() - s.len();
        let rich = count as f64 > (1.0 - self.lambda.powi(j as i32)) * total as f64;
        self.memo.insert(s.to_vec(), rich);
        rich
    }

    /// Vertices outside `s` that are not rich with respect to `s`.
    pub fn non_rich_extensions(&mut self, s: &[usize]) -> usize {
        (0..self.g.vertex_count())
            .filter(|v| s.binary_search(v).is_err())
            .filter(|&v| !self.is_rich(&sorted_union(s, &[v])))
            .count()
    }
}

/// Hyperedges incident to each vertex.
fn incidence(h: &DerivedMultiHypergraph) -> Vec<Vec<usize>> {
    let mut inc = vec![Vec::new(); h.vertex_count()];
    for (i, e) in h.edges.iter().enumerate() {
        for &v in e {
            inc[v].push(i);
        }
    }
    inc
}

fn check_embedding_inputs<G: DownClosed>(h: &DerivedMultiHypergraph, g: &G, lambda: f64) -> Result<()> {
    let (m, n, d) = (h.vertex_count(), g.vertex_count(), g.rank());
    if d == 0 {
        return Err(Error::precondition("embed hypergraph", "rank must be positive"));
    }
    if 2 * m > n {
        return Err(Error::precondition("embed hypergraph", format!("m = {m} exceeds n/2 = {}", n / 2)));
    }
    if !(lambda > 0.0 && lambda < 1.0 / (2.0 * d as f64)) {
        return Err(Error::precondition(
            "embed hypergraph",
            format!("lambda = {lambda} is outside (0, 1/(2Δ)) for Δ = {d}"),
        ));
    }
    if let Some(e) = h.edges.iter().find(|e| e.len() > d) {
        return Err(Error::precondition("embed hypergraph", format!("hyperedge {e:?} exceeds rank {d}")));
    }
    Ok(())
}

/// Vertex `v` keeps every incident partial hyperedge image rich.
fn rich_compatible<G: DownClosed>(
    oracle: &mut RichSetOracle<'_, G>,
    h: &DerivedMultiHypergraph,
    inc: &[Vec<usize>],
    map: &[usize],
    x: usize,
    v: usize,
) -> bool {
    inc[x].iter().all(|&ei| {
        let mut img: Vec<usize> = h.edges[ei]
            .iter()
            .filter(|&&y| map[y] != usize::MAX)
            .map(|&y| map[y])
            .collect();
        img.push(v);
        img.sort_unstable();
        oracle.is_rich(&img)
    })
}

/// Greedy labelled embedding keeping every partial hyperedge image rich.
///
/// Returns `map[x]` = local vertex of `g` for each hypergraph vertex `x`.
pub fn embed_hypergraph<G: DownClosed>(
    h: &DerivedMultiHypergraph,
    oracle: &mut RichSetOracle<'_, G>,
    seed: u64,
) -> Result<Vec<usize>> {
    let g = oracle.graph();
    check_embedding_inputs(h, g, oracle.lambda())?;
    let inc = incidence(h);
    let mut rng = rng::substream(seed, "embed-hypergraph/candidates");
    let n = g.vertex_count();
    let mut map = vec![usize::MAX; h.vertex_count()];
    let mut used = vec![false; n];
    if !oracle.is_rich(&[]) {
        return Err(Error::EmbeddingStuck { placed: 0, total: h.vertex_count() });
    }
    for x in 0..h.vertex_count() {
        let mut cand: Vec<usize> = (0..n).filter(|&v| !used[v]).collect();
        cand.shuffle(&mut rng);
        let pick = cand.into_iter().find(|&v| rich_compatible(oracle, h, &inc, &map, x, v));
        let Some(v) = pick else {
            return Err(Error::EmbeddingStuck { placed: x, total: h.vertex_count() });
        };
        map[x] = v;
        used[v] = true;
    }
    debug_assert!(h.edges.iter().all(|e| {
        let mut img: Vec<usize> = e.iter().map(|&x| map[x]).collect();
        img.sort_unstable();
        g.is_edge(&img)
    }));
    Ok(map)
}

/// Hyperedges (with multiplicity) whose image lies inside `r`.
pub fn count_edges_in(h: &DerivedMultiHypergraph, map: &[usize], r: &VertexSet) -> usize {
    h.edges.iter().filter(|e| e.iter().all(|&x| r.contains(map[x]))).count()
}

/// `e(H) / (Δ² (32r)^Δ)`.
pub fn careful_threshold(edges: usize, delta: usize, r: usize) -> f64 {
    edges as f64 / ((delta * delta) as f64 * (32.0 * r as f64).powi(delta as i32))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CarefulOptions {
    pub r: usize,
    /// The constant `c` bounding the number of constraints by `exp(c^Δ m)`.
    pub c: f64,
    pub enforce_preconditions: bool,
    pub max_retries: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CarefulEmbedding {
    pub map: Vec<usize>,
    /// `counts[i]` = hyperedges mapped inside constraint `i`.
    pub counts: Vec<usize>,
    pub threshold: f64,
    /// Constraints whose count stayed below the threshold; empty for a certified result.
    pub unsatisfied: Vec<usize>,
    pub retries_used: usize,
}

fn careful_preconditions<G: DownClosed>(
    h: &DerivedMultiHypergraph,
    g: &G,
    constraints: &[VertexSet],
    opts: &CarefulOptions,
) -> Result<()> {
    let (m, n, d, r) = (h.vertex_count(), g.vertex_count(), g.rank(), opts.r);
    if n < 16 * r * m {
        return Err(Error::precondition("embed carefully", format!("n = {n} is below 16rm = {}", 16 * r * m)));
    }
    let need = n as f64 / (8.0 * r as f64);
    if let Some((i, c)) = constraints.iter().enumerate().find(|(_, c)| (c.len() as f64) < need) {
        return Err(Error::precondition(
            "embed carefully",
            format!("constraint {i} has {} vertices, below n/(8r) = {need:.2}", c.len()),
        ));
    }
    let log_cap = opts.c.powi(d as i32) * m as f64;
    if (constraints.len() as f64).ln() > log_cap {
        return Err(Error::precondition(
            "embed carefully",
            format!("{} constraints exceed exp(c^Δ m) = exp({log_cap:.3})", constraints.len()),
        ));
    }
    Ok(())
}

/// Vertex order of the random-embedding argument: a greedy family of pairwise
/// disjoint hyperedges first, then everything else.
fn disjoint_edges_first(h: &DerivedMultiHypergraph) -> Vec<usize> {
    let mut taken = vec![false; h.vertex_count()];
    let mut order = Vec::with_capacity(h.vertex_count());
    for e in &h.edges {
        if e.iter().all(|&x| !taken[x]) {
            for &x in e {
                taken[x] = true;
                order.push(x);
            }
        }
    }
    order.extend((0..h.vertex_count()).filter(|&x| !taken[x]));
    order
}

fn careful_attempt<G: DownClosed>(
    h: &DerivedMultiHypergraph,
    oracle: &mut RichSetOracle<'_, G>,
    inc: &[Vec<usize>],
    constraints: &[VertexSet],
    threshold: f64,
    order: &[usize],
    rng: &mut StreamRng,
) -> Option<(Vec<usize>, Vec<usize>)> {
    let n = oracle.graph().vertex_count();
    let mut map = vec![usize::MAX; h.vertex_count()];
    let mut used = vec![false; n];
    // Hyperedges fully placed inside each constraint so far.
    let mut counts = vec![0usize; constraints.len()];
    for &x in order {
        let deficit: Vec<f64> = counts.iter().map(|&c| (threshold - c as f64).max(0.0)).collect();
        let mut best: Vec<usize> = Vec::new();
        let mut best_score = f64::NEG_INFINITY;
        let mut cand: Vec<usize> = (0..n).filter(|&v| !used[v]).collect();
        cand.shuffle(rng);
        for v in cand {
            if !rich_compatible(oracle, h, inc, &map, x, v) {
                continue;
            }
            // Reward keeping incident hyperedges inside deficient constraints.
            let mut score = 0.0;
            for (i, r) in constraints.iter().enumerate() {
                if deficit[i] == 0.0 || !r.contains(v) {
                    continue;
                }
                for &ei in &inc[x] {
                    let inside = h.edges[ei]
                        .iter()
                        .all(|&y| map[y] == usize::MAX || r.contains(map[y]));
                    if inside {
                        score += deficit[i];
                    }
                }
            }
            if score > best_score {
                best_score = score;
                best.clear();
            }
            if score == best_score {
                best.push(v);
            }
        }
        let v = *best.first()?;
        let v = if best.len() > 1 { best[rng.gen_range(0..best.len())] } else { v };
        map[x] = v;
        used[v] = true;
        for &ei in &inc[x] {
            let e = &h.edges[ei];
            if e.iter().all(|&y| map[y] != usize::MAX) {
                for (i, r) in constraints.iter().enumerate() {
                    if e.iter().all(|&y| r.contains(map[y])) {
                        counts[i] += 1;
                    }
                }
            }
        }
    }
    Some((map, counts))
}

/// Las Vegas embedding that also places at least `e(H)/(Δ²(32r)^Δ)` hyperedges
/// inside every constraint set. Returns the best attempt, listing any
/// constraints still short when the retries run out.
pub fn embed_carefully_best_effort<G: DownClosed>(
    h: &DerivedMultiHypergraph,
    oracle: &mut RichSetOracle<'_, G>,
    constraints: &[VertexSet],
    opts: &CarefulOptions,
) -> Result<CarefulEmbedding> {
    let g = oracle.graph();
    check_embedding_inputs(h, g, oracle.lambda())?;
    if opts.enforce_preconditions {
        careful_preconditions(h, g, constraints, opts)?;
    }
    let threshold = careful_threshold(h.edge_count(), g.rank(), opts.r);
    let inc = incidence(h);
    let order = disjoint_edges_first(h);
    let mut rng = rng::substream(opts.seed, "embed-carefully");
    let mut best: Option<CarefulEmbedding> = None;
    let mut stuck = 0;
    for attempt in 1..=opts.max_retries.max(1) {
        let Some((map, counts)) = careful_attempt(h, oracle, &inc, constraints, threshold, &order, &mut rng) else {
            stuck += 1;
            continue;
        };
        let unsatisfied: Vec<usize> = (0..counts.len()).filter(|&i| (counts[i] as f64) < threshold).collect();
        let done = unsatisfied.is_empty();
        let better = best.as_ref().is_none_or(|b| unsatisfied.len() < b.unsatisfied.len());
        if better {
            best = Some(CarefulEmbedding { map, counts, threshold, unsatisfied, retries_used: attempt });
        }
        if done {
            break;
        }
    }
    best.ok_or(Error::RetriesExhausted {
        op: "embed carefully",
        retries: opts.max_retries,
        detail: format!("all {stuck} attempts got stuck keeping hyperedge images rich"),
    })
}

/// [`embed_carefully_best_effort`], failing unless every constraint is met.
pub fn embed_carefully<G: DownClosed>(
    h: &DerivedMultiHypergraph,
    oracle: &mut RichSetOracle<'_, G>,
    constraints: &[VertexSet],
    opts: &CarefulOptions,
) -> Result<CarefulEmbedding> {
    let res = embed_carefully_best_effort(h, oracle, constraints, opts)?;
    if res.unsatisfied.is_empty() {
        Ok(res)
    } else {
        let starving: Vec<String> = res
            .unsatisfied
            .iter()
            .take(5)
            .map(|&i| format!("R_{i} has {} < {:.4}", res.counts[i], res.threshold))
            .collect();
        Err(Error::RetriesExhausted {
            op: "embed carefully",
            retries: opts.max_retries,
            detail: format!("{} constraints starved: {}", res.unsatisfied.len(), starving.join(", ")),
        })
    }
}
