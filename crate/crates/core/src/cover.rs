//! Monochromatic copies in dense colour classes and the greedy almost-cover.

use serde::Serialize;

use crate::bipartite::BipartiteGraph;
use crate::drc::{dependent_random_choice, DrcParams};
use crate::error::{Error, Result};
use crate::graph::{Adjacency, ColouredCompleteGraph};
use crate::search::{find_copy, find_copy_split, SearchConfig, SearchOutcome};
use crate::sequence::{member, BipartiteMember, SequenceSpec};
use crate::tiling::{Embedding, Tiling};
use crate::vertex_set::VertexSet;

/// `32 Δ ε^{−Δ} k`: above this host size a copy is guaranteed.
pub fn dense_threshold(delta: usize, epsilon: f64, k: usize) -> f64 {
    32.0 * delta as f64 * epsilon.powi(-(delta as i32)) * k as f64
}

/// `64 Δ r^Δ`.
pub fn cover_unit(delta: usize, r: usize) -> f64 {
    64.0 * delta as f64 * (r as f64).powi(delta as i32)
}

/// `64 Δ r^Δ (ln(s/t) + 2)`.
pub fn greedy_bound(delta: usize, r: usize, s: usize, t: f64) -> f64 {
    cover_unit(delta, r) * ((s as f64 / t).ln() + 2.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CopyPath {
    /// The member has no edges.
    Trivial,
    /// X' restricted to a dependent-random-choice set, then backtracking.
    DrcGuided,
    Backtracking,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DenseCopy {
    pub images: Vec<usize>,
    pub path: CopyPath,
    pub nodes: u64,
}

/// Looks for `f` inside `host[within]`, which must have at least `ε·C(|S|,2)` edges.
///
/// `Ok(None)` means exhaustive search proved there is no copy.
pub fn find_dense_copy<A: Adjacency>(
    host: &A,
    within: &VertexSet,
    f: &BipartiteMember,
    epsilon: f64,
    cfg: &SearchConfig,
) -> Result<Option<DenseCopy>> {
    let s = within.len();
    if f.order() > s {
        return Ok(None);
    }
    if f.edge_count() == 0 {
        return Ok(Some(DenseCopy {
            images: within.iter().take(f.order()).collect(),
            path: CopyPath::Trivial,
            nodes: 0,
        }));
    }
    let pairs = (s * s.saturating_sub(1) / 2) as f64;
    let edges = host.edges_within(within) as f64;
    if !(epsilon > 0.0) || edges < epsilon * pairs {
        return Err(Error::precondition(
            "find dense copy",
            format!("{edges} edges on {s} vertices is below epsilon = {epsilon}"),
        ));
    }
    let delta = f.max_degree();
    let mut nodes = 0;
    if s as f64 >= dense_threshold(delta, epsilon, f.order()) {
        if let Some(u) = drc_domain(host, within, delta, epsilon, cfg) {
            let guided = SearchConfig { budget: cfg.budget / 4 + 1, ..*cfg };
            let res = find_copy_split(host, &u, within, f, &guided);
            nodes += res.nodes;
            if let SearchOutcome::Found(images) = res.outcome {
                return Ok(Some(DenseCopy { images, path: CopyPath::DrcGuided, nodes }));
            }
        }
    }
    let res = find_copy(host, within, f, cfg);
    nodes += res.nodes;
    match res.outcome {
        SearchOutcome::Found(images) => Ok(Some(DenseCopy { images, path: CopyPath::Backtracking, nodes })),
        SearchOutcome::Absent => Ok(None),
        SearchOutcome::BudgetExhausted => Err(Error::BudgetExhausted {
            op: "find dense copy",
            budget: cfg.budget,
        }),
    }
}

/// A set whose Δ-subsets mostly have many common neighbours in `within`.
fn drc_domain<A: Adjacency>(
    host: &A,
    within: &VertexSet,
    delta: usize,
    epsilon: f64,
    cfg: &SearchConfig,
) -> Option<VertexSet> {
    let verts = within.to_vec();
    let mut h = BipartiteGraph::empty(verts.len(), verts.len());
    let mut pos = vec![usize::MAX; within.universe()];
    for (i, &v) in verts.iter().enumerate() {
        pos[v] = i;
    }
    for (i, &u) in verts.iter().enumerate() {
        for v in &host.neighbours(u).intersection(within) {
            h.add_edge(i, pos[v]);
        }
    }
    let eps = epsilon.min(h.density());
    // t = 2 and δ = 1/2 make δε^{2Δ} ≥ 2γ² hold with equality for γ = ε^Δ / 2.
    let params = DrcParams {
        k: delta,
        t: 2,
        epsilon: eps,
        delta: 0.5,
        gamma: eps.powi(delta as i32) / 2.0,
        max_retries: 8,
        seed: cfg.shuffle_seed.unwrap_or(0),
    };
    let res = dependent_random_choice(&h, &params).ok()?;
    Some(VertexSet::from_iter_in(within.universe(), res.s.iter().map(|i| verts[i])))
}

/// A monochromatic copy of `F_k` inside `within`, trying colours by frequency.
pub fn find_mono_copy(
    g: &ColouredCompleteGraph,
    within: &VertexSet,
    k: usize,
    spec: &SequenceSpec,
    cfg: &SearchConfig,
) -> Result<Embedding> {
    if k == 0 || k > within.len() {
        return Err(Error::InvalidArgument(format!(
            "copy order {k} must lie in 1..={}",
            within.len()
        )));
    }
    if k == 1 {
        return Ok(Embedding::singleton(within.first().expect("nonempty")));
    }
    let f = member(spec, k)?;
    find_member_copy(g, within, &f, cfg)
}

/// [`find_mono_copy`] for an already built member.
pub fn find_member_copy(
    g: &ColouredCompleteGraph,
    within: &VertexSet,
    f: &BipartiteMember,
    cfg: &SearchConfig,
) -> Result<Embedding> {
    if f.edge_count() == 0 {
        return Ok(Embedding::new(f, 0, within.iter().take(f.order()).collect()));
    }
    let counts = g.colour_counts_within(within);
    let eps = 1.0 / g.r() as f64;
    let mut exhausted = false;
    for c in ColouredCompleteGraph::colours_by_frequency(&counts) {
        let class = g.class(c);
        let pairs = within.len() * within.len().saturating_sub(1) / 2;
        let density = if pairs == 0 { 0.0 } else { counts[c as usize] as f64 / pairs as f64 };
        if density <= 0.0 {
            break;
        }
        match find_dense_copy(&class, within, f, eps.min(density), cfg) {
            Ok(Some(copy)) => return Ok(Embedding::new(f, c, copy.images)),
            Ok(None) => {}
            Err(Error::BudgetExhausted { .. }) => exhausted = true,
            Err(e) => return Err(e),
        }
    }
    if exhausted {
        Err(Error::BudgetExhausted { op: "find mono copy", budget: cfg.budget })
    } else {
        Err(Error::NotFound {
            op: "find mono copy",
            detail: format!("no monochromatic copy of order {} in a set of {}", f.order(), within.len()),
        })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoverStrategy {
    /// `ℓ = ⌊s/(32Δr^Δ)⌋`, singletons once `s ≤ 64Δr^Δ`.
    Threshold,
    /// Each step looks for the largest extractable copy, never below the target `ℓ`.
    #[default]
    LargestFirst,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoverResult {
    pub tiling: Tiling,
    pub residual: VertexSet,
    /// Steps where the target `ℓ` could not be found within budget and a smaller copy was used.
    pub shortfalls: usize,
}

/// Covers all but fewer than `t` vertices of `within` with disjoint monochromatic members.
pub fn greedy_cover(
    g: &ColouredCompleteGraph,
    within: &VertexSet,
    t: f64,
    spec: &SequenceSpec,
    strategy: CoverStrategy,
    cfg: &SearchConfig,
) -> Result<CoverResult> {
    if !(t > 0.0) {
        return Err(Error::InvalidArgument(format!("target residual t = {t} must be positive")));
    }
    let unit = cover_unit(spec.delta, g.r());
    let mut left = within.clone();
    let mut tiling = Tiling::new();
    let mut shortfalls = 0;
    while left.len() as f64 >= t && !left.is_empty() {
        let s = left.len();
        let target_l = if s as f64 <= unit {
            1
        } else {
            ((s as f64 / (unit / 2.0)).floor() as usize).max(1)
        };
        let tile = match strategy {
            CoverStrategy::Threshold => None,
            CoverStrategy::LargestFirst => largest_copy(g, &left, target_l, t, spec, cfg)?,
        };
        let tile = match tile {
            Some(tile) => tile,
            None => {
                let (tile, short) = copy_at_most(g, &left, target_l, spec, cfg)?;
                shortfalls += usize::from(short);
                tile
            }
        };
        for &v in &tile.vertices {
            left.remove(v);
        }
        tiling.push(tile);
    }
    Ok(CoverResult { tiling, residual: left, shortfalls })
}

/// A copy of order `l`, or the largest smaller one found if the search runs out of budget.
fn copy_at_most(
    g: &ColouredCompleteGraph,
    left: &VertexSet,
    l: usize,
    spec: &SequenceSpec,
    cfg: &SearchConfig,
) -> Result<(Embedding, bool)> {
    let mut l = l;
    let mut short = false;
    loop {
        match find_mono_copy(g, left, l, spec, cfg) {
            Ok(e) => return Ok((e, short)),
            Err(Error::BudgetExhausted { .. } | Error::NotFound { .. } | Error::UnsatisfiableFamily { .. }) if l > 1 => {
                l /= 2;
                short = true;
            }
            Err(e) => return Err(e),
        }
    }
}

/// Largest copy of order in `[lo, s − ⌈t⌉ + 1]` found with cheap probes.
fn largest_copy(
    g: &ColouredCompleteGraph,
    left: &VertexSet,
    lo: usize,
    t: f64,
    spec: &SequenceSpec,
    cfg: &SearchConfig,
) -> Result<Option<Embedding>> {
    let s = left.len();
    let hi = s + 1 - (t.ceil() as usize).clamp(1, s);
    if hi <= lo {
        return Ok(None);
    }
    let probe = |l: usize| -> Option<Embedding> {
        if l == 1 {
            return Some(Embedding::singleton(left.first()?));
        }
        let f = member(spec, l).ok()?;
        let budget = (2 * l as u64 + 500).min(cfg.budget);
        find_member_copy(g, left, &f, &SearchConfig { budget, ..*cfg }).ok()
    };
    if let Some(e) = probe(hi) {
        return Ok(Some(e));
    }
    let (mut good, mut bad) = (None, hi);
    let mut low = lo;
    while low < bad {
        let mid = low + (bad - low) / 2;
        match probe(mid) {
            Some(e) => {
                low = mid + 1;
                good = Some(e);
            }
            None => bad = mid,
        }
    }
    Ok(good)
}
