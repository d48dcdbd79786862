//! Bipartite Δ-bounded graph sequences.
//!
//! A sequence is never stored: `member(spec, i)` builds the order-`i` member on
//! demand. Every member comes back normalized: bipartite, maximum degree at
//! most Δ, and at most one isolated vertex.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    /// `P_i`.
    Path,
    /// A perfect matching, plus one isolated vertex when `i` is odd.
    Matching,
    /// A spine path where every spine vertex carries up to Δ−2 leaves.
    Caterpillar,
    /// Disjoint copies of `K_{Δ,Δ}`; the remainder is a smaller complete bipartite block.
    Blocky,
    /// Balanced bipartition plus a seeded degree-capped edge sampler.
    Random { seed: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SequenceSpec {
    pub family: Family,
    pub delta: usize,
}

impl SequenceSpec {
    pub fn path() -> Self {
        SequenceSpec { family: Family::Path, delta: 2 }
    }

    pub fn matching() -> Self {
        SequenceSpec { family: Family::Matching, delta: 1 }
    }

    pub fn caterpillar(delta: usize) -> Self {
        SequenceSpec { family: Family::Caterpillar, delta }
    }

    pub fn blocky(delta: usize) -> Self {
        SequenceSpec { family: Family::Blocky, delta }
    }

    pub fn random(delta: usize, seed: u64) -> Self {
        SequenceSpec { family: Family::Random { seed }, delta }
    }
}

impl fmt::Display for SequenceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.family {
            Family::Path => write!(f, "path"),
            Family::Matching => write!(f, "matching"),
            Family::Caterpillar => write!(f, "caterpillar:D={}", self.delta),
            Family::Blocky => write!(f, "blocky:D={}", self.delta),
            Family::Random { seed } => write!(f, "random:D={}:seed={}", self.delta, seed),
        }
    }
}

impl FromStr for SequenceSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.trim().split(':');
        let name = parts.next().unwrap_or_default();
        let mut delta = None;
        let mut seed = None;
        for (i, kv) in parts.enumerate() {
            // `random:2` is shorthand for `random:D=2`.
            if i == 0 && !kv.contains('=') {
                if let Ok(d) = kv.parse::<usize>() {
                    delta = Some(d);
                    continue;
                }
            }
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("sequence spec {s:?}: expected key=value, got {kv:?}")))?;
            let value: u64 = v
                .parse()
                .map_err(|e| Error::Parse(format!("sequence spec {s:?}: {k}: {e}")))?;
            match k {
                "D" => delta = Some(value as usize),
                "seed" => seed = Some(value),
                _ => return Err(Error::Parse(format!("sequence spec {s:?}: unknown key {k:?}"))),
            }
        }
        let need_delta = || {
            delta.ok_or_else(|| Error::Parse(format!("sequence spec {s:?}: missing D=<max degree>")))
        };
        let spec = match name {
            "path" | "matching" if delta.is_some() || seed.is_some() => {
                return Err(Error::Parse(format!("sequence spec {s:?}: {name} takes no parameters")))
            }
            "path" => SequenceSpec::path(),
            "matching" => SequenceSpec::matching(),
            "caterpillar" | "blocky" if seed.is_some() => {
                return Err(Error::Parse(format!("sequence spec {s:?}: {name} takes no seed")))
            }
            "caterpillar" => SequenceSpec::caterpillar(need_delta()?),
            "blocky" => SequenceSpec::blocky(need_delta()?),
            "random" => SequenceSpec::random(need_delta()?, seed.unwrap_or(0)),
            _ => return Err(Error::Parse(format!("unknown sequence family in {s:?}"))),
        };
        if spec.delta == 0 {
            return Err(Error::Parse(format!("sequence spec {s:?}: D must be at least 1")));
        }
        Ok(spec)
    }
}

impl Serialize for SequenceSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for SequenceSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// One member `F_i` with a fixed bipartition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BipartiteMember {
    order: usize,
    edges: Vec<(usize, usize)>,
    adj: Vec<Vec<usize>>,
    /// Side holding the smallest vertex of each component; never contains an isolated vertex.
    x_side: Vec<usize>,
    y_side: Vec<usize>,
    in_x: Vec<bool>,
}

impl BipartiteMember {
    /// Builds a member from an edge list, orienting each component so its
    /// smallest vertex lies in X'. Isolated vertices go to Y'.
    pub fn from_edges(order: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        let mut adj = vec![Vec::new(); order];
        for &(u, v) in &edges {
            if u >= order || v >= order || u == v {
                return Err(Error::InvalidArgument(format!("bad edge ({u},{v}) for order {order}")));
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        for row in adj.iter_mut() {
            row.sort_unstable();
            if row.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidArgument("repeated edge".into()));
            }
        }
        let mut side: Vec<Option<bool>> = vec![None; order];
        for root in 0..order {
            if side[root].is_some() {
                continue;
            }
            if adj[root].is_empty() {
                side[root] = Some(false);
                continue;
            }
            side[root] = Some(true);
            let mut queue = VecDeque::from([root]);
            while let Some(u) = queue.pop_front() {
                let su = side[u].expect("visited");
                for &v in &adj[u] {
                    match side[v] {
                        None => {
                            side[v] = Some(!su);
                            queue.push_back(v);
                        }
                        Some(sv) if sv == su => {
                            return Err(Error::InvalidArgument(format!(
                                "member of order {order} is not bipartite"
                            )))
                        }
                        Some(_) => {}
                    }
                }
            }
        }
        let in_x: Vec<bool> = side.into_iter().map(|s| s.expect("all visited")).collect();
        let x_side = (0..order).filter(|&v| in_x[v]).collect();
        let y_side = (0..order).filter(|&v| !in_x[v]).collect();
        Ok(BipartiteMember { order, edges, adj, x_side, y_side, in_x })
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    #[inline]
    pub fn neighbours(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.adj.iter().map(Vec::len).collect()
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn isolated_count(&self) -> usize {
        self.adj.iter().filter(|a| a.is_empty()).count()
    }

    pub fn x_side(&self) -> &[usize] {
        &self.x_side
    }

    pub fn y_side(&self) -> &[usize] {
        &self.y_side
    }

    pub fn in_x(&self, v: usize) -> bool {
        self.in_x[v]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u].binary_search(&v).is_ok()
    }

    /// Vertices in BFS order, components taken by smallest vertex.
    pub fn bfs_order(&self) -> Vec<usize> {
        let mut seen = vec![false; self.order];
        let mut out = Vec::with_capacity(self.order);
        for root in 0..self.order {
            if seen[root] {
                continue;
            }
            seen[root] = true;
            let mut queue = VecDeque::from([root]);
            while let Some(u) = queue.pop_front() {
                out.push(u);
                for &v in &self.adj[u] {
                    if !seen[v] {
                        seen[v] = true;
                        queue.push_back(v);
                    }
                }
            }
        }
        out
    }
}

/// Multihypergraph on X' whose hyperedges are `N(y)` for `y ∈ Y'`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DerivedMultiHypergraph {
    /// Member vertex carried by each hypergraph vertex.
    pub vertices: Vec<usize>,
    /// Hyperedges over hypergraph vertex indices, each sorted.
    pub edges: Vec<Vec<usize>>,
    /// Member vertex in Y' that produced each hyperedge.
    pub edge_source: Vec<usize>,
}

impl DerivedMultiHypergraph {
    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.vertices.len()];
        for e in &self.edges {
            for &v in e {
                deg[v] += 1;
            }
        }
        deg
    }

    pub fn max_edge_size(&self) -> usize {
        self.edges.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Hypergraph built directly from edges on `0..m`; sources are the edge indices.
    pub fn from_edges(m: usize, edges: Vec<Vec<usize>>) -> Self {
        let edges: Vec<Vec<usize>> = edges
            .into_iter()
            .map(|mut e| {
                e.sort_unstable();
                e
            })
            .collect();
        DerivedMultiHypergraph {
            vertices: (0..m).collect(),
            edge_source: (0..edges.len()).collect(),
            edges,
        }
    }
}

pub fn derive_hypergraph(m: &BipartiteMember) -> DerivedMultiHypergraph {
    let mut index = vec![usize::MAX; m.order];
    for (i, &x) in m.x_side.iter().enumerate() {
        index[x] = i;
    }
    let edges = m
        .y_side
        .iter()
        .map(|&y| m.adj[y].iter().map(|&x| index[x]).collect())
        .collect();
    DerivedMultiHypergraph {
        vertices: m.x_side.clone(),
        edges,
        edge_source: m.y_side.clone(),
    }
}

/// The order-`i` member of the sequence.
pub fn member(spec: &SequenceSpec, i: usize) -> Result<BipartiteMember> {
    if i == 0 {
        return Err(Error::InvalidArgument("member order must be at least 1".into()));
    }
    let d = spec.delta;
    if d == 0 {
        return Err(Error::InvalidArgument("maximum degree bound must be at least 1".into()));
    }
    let edges = match spec.family {
        Family::Path => {
            if d < 2 && i >= 3 {
                return Err(Error::UnsatisfiableFamily {
                    order: i,
                    detail: "a path on 3 or more vertices needs degree 2".into(),
                });
            }
            (0..i - 1).map(|j| (j, j + 1)).collect()
        }
        Family::Matching => (0..i / 2).map(|j| (2 * j, 2 * j + 1)).collect(),
        Family::Caterpillar => caterpillar_edges(i, d)?,
        Family::Blocky => blocky_edges(i, d),
        Family::Random { seed } => random_edges(i, d, seed)?,
    };
    let m = BipartiteMember::from_edges(i, edges)?;
    debug_assert!(m.max_degree() <= d);
    debug_assert!(m.isolated_count() <= 1);
    Ok(m)
}

fn caterpillar_edges(i: usize, d: usize) -> Result<Vec<(usize, usize)>> {
    if d < 2 && i >= 3 {
        return Err(Error::UnsatisfiableFamily {
            order: i,
            detail: format!("caterpillar with maximum degree {d} is connected only up to 2 vertices"),
        });
    }
    let leaves = d.saturating_sub(2);
    let mut edges = Vec::with_capacity(i.saturating_sub(1));
    let mut spine: Option<usize> = None;
    let mut v = 0;
    while v < i {
        if let Some(s) = spine {
            edges.push((s, v));
        }
        let s = v;
        spine = Some(s);
        v += 1;
        for _ in 0..leaves {
            if v >= i {
                break;
            }
            edges.push((s, v));
            v += 1;
        }
    }
    Ok(edges)
}

fn blocky_edges(i: usize, d: usize) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    let mut start = 0;
    while start < i {
        let size = (i - start).min(2 * d);
        let a = size.div_ceil(2);
        for u in start..start + a {
            for v in start + a..start + size {
                edges.push((u, v));
            }
        }
        start += size;
    }
    edges
}

fn random_edges(i: usize, d: usize, seed: u64) -> Result<Vec<(usize, usize)>> {
    let a = i.div_ceil(2);
    let b = i - a;
    if b == 0 {
        return Ok(Vec::new());
    }
    let mut rng = rng::substream(seed, &format!("random-bipartite/D={d}/i={i}"));
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); i];
    let attempts = 2 * i * d;
    for _ in 0..attempts {
        let u = rng.gen_range(0..a);
        let v = a + rng.gen_range(0..b);
        if adj[u].len() < d && adj[v].len() < d && !adj[u].contains(&v) {
            adj[u].push(v);
            adj[v].push(u);
        }
    }
    normalize_isolated(&mut adj, a, d);
    if adj.iter().filter(|n| n.is_empty()).count() > 1 {
        return Err(Error::UnsatisfiableFamily {
            order: i,
            detail: "could not reduce isolated vertices to at most one".into(),
        });
    }
    let mut edges: Vec<(usize, usize)> = (0..a)
        .flat_map(|u| adj[u].iter().map(move |&v| (u, v)))
        .collect();
    edges.sort_unstable();
    Ok(edges)
}

/// Adds edges across the fixed bipartition `[0,a) | [a,n)` until at most one
/// vertex is isolated, never exceeding degree `d`.
fn normalize_isolated(adj: &mut [Vec<usize>], a: usize, d: usize) {
    let n = adj.len();
    let link = |adj: &mut [Vec<usize>], u: usize, v: usize| {
        adj[u].push(v);
        adj[v].push(u);
    };
    // Pair isolated vertices across the two sides.
    let iso_left: Vec<usize> = (0..a).filter(|&u| adj[u].is_empty()).collect();
    let iso_right: Vec<usize> = (a..n).filter(|&v| adj[v].is_empty()).collect();
    for (&u, &v) in iso_left.iter().zip(&iso_right) {
        link(adj, u, v);
    }
    let isolated: Vec<usize> = (0..n).filter(|&v| adj[v].is_empty()).collect();
    for &u in &isolated {
        let other: Vec<usize> = if u < a { (a..n).collect() } else { (0..a).collect() };
        if let Some(&v) = other.iter().find(|&&v| adj[v].len() < d) {
            link(adj, u, v);
            continue;
        }
        // Steal an edge (w, v) where w keeps another neighbour.
        let steal = other.iter().find_map(|&v| {
            adj[v].iter().copied().find(|&w| adj[w].len() >= 2).map(|w| (v, w))
        });
        if let Some((v, w)) = steal {
            adj[v].retain(|&x| x != w);
            adj[w].retain(|&x| x != v);
            link(adj, u, v);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check(m: &BipartiteMember, i: usize, d: usize) {
        assert_eq!(m.order(), i);
        assert!(m.max_degree() <= d, "degree {} > {d}", m.max_degree());
        assert!(m.isolated_count() <= 1);
        for &(u, v) in m.edges() {
            assert_ne!(m.in_x(u), m.in_x(v));
        }
        for &x in m.x_side() {
            assert!(m.degree(x) >= 1);
        }
    }

    #[test]
    fn grammar_round_trips() {
        for s in ["path", "matching", "caterpillar:D=3", "blocky:D=3", "random:D=3:seed=9"] {
            let spec: SequenceSpec = s.parse().unwrap();
            assert_eq!(spec.to_string(), s);
        }
        assert_eq!("random:D=2".parse::<SequenceSpec>().unwrap(), SequenceSpec::random(2, 0));
        assert_eq!("random:2".parse::<SequenceSpec>().unwrap(), SequenceSpec::random(2, 0));
        for bad in ["", "cycle", "path:D=2", "random", "random:D=0", "blocky:D=x", "caterpillar:D"] {
            assert!(bad.parse::<SequenceSpec>().is_err(), "{bad}");
        }
    }

    #[test]
    fn path_members() {
        let p1 = member(&SequenceSpec::path(), 1).unwrap();
        assert_eq!(p1.edge_count(), 0);
        let p4 = member(&SequenceSpec::path(), 4).unwrap();
        assert_eq!(p4.edges(), &[(0, 1), (1, 2), (2, 3)]);
        assert_eq!(p4.x_side(), &[0, 2]);
        assert_eq!(p4.y_side(), &[1, 3]);
        assert_eq!(p4.max_degree(), 2);
    }

    #[test]
    fn derived_hypergraph_of_small_paths() {
        let h = derive_hypergraph(&member(&SequenceSpec::path(), 2).unwrap());
        assert_eq!(h.vertex_count(), 1);
        assert_eq!(h.edges, vec![vec![0]]);
        let h = derive_hypergraph(&member(&SequenceSpec::path(), 4).unwrap());
        assert_eq!(h.vertices, vec![0, 2]);
        assert_eq!(h.edges, vec![vec![0, 1], vec![1]]);
        assert_eq!(h.edge_source, vec![1, 3]);
    }

    #[test]
    fn caterpillar_needs_degree_two() {
        assert!(member(&SequenceSpec::caterpillar(1), 2).is_ok());
        assert!(matches!(
            member(&SequenceSpec::caterpillar(1), 3),
            Err(Error::UnsatisfiableFamily { order: 3, .. })
        ));
    }

    #[test]
    fn every_family_is_normalized() {
        let specs = [
            SequenceSpec::path(),
            SequenceSpec::matching(),
            SequenceSpec::caterpillar(2),
            SequenceSpec::caterpillar(3),
            SequenceSpec::caterpillar(5),
            SequenceSpec::blocky(1),
            SequenceSpec::blocky(3),
            SequenceSpec::random(1, 4),
            SequenceSpec::random(2, 0),
            SequenceSpec::random(3, 9),
            SequenceSpec::random(4, 123),
        ];
        for spec in specs {
            for i in 1..=64 {
                let m = member(&spec, i).unwrap();
                check(&m, i, spec.delta);
                assert_eq!(m, member(&spec, i).unwrap());
                let h = derive_hypergraph(&m);
                let total: usize = h.edges.iter().map(Vec::len).sum();
                assert_eq!(total, m.edge_count());
                assert!(2 * m.edge_count() + 1 >= i);
                assert!(h.degrees().iter().all(|&d| (1..=spec.delta).contains(&d)));
            }
        }
    }
}
