//! Exact minimum tilings of small colourings by iterative deepening.

use std::collections::{HashMap, HashSet};

use rayon::prelude::*;
use serde::Serialize;

use crate::cover::{greedy_cover, CoverStrategy};
use crate::error::{Error, Result};
use crate::graph::{ColouredCompleteGraph, Generator};
use crate::search::{find_copy, SearchConfig, SearchOutcome};
use crate::sequence::{member, BipartiteMember, SequenceSpec};
use crate::tiling::{Embedding, Tiling};
use crate::vertex_set::VertexSet;

pub const DEFAULT_ORACLE_CAP: usize = 12;
pub const DEFAULT_ORACLE_BUDGET: u64 = 5_000_000;
/// Cap on the number of cached tileable-set answers.
const CACHE_LIMIT: usize = 1 << 20;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OracleResult {
    pub min_size: usize,
    pub tiling: Tiling,
    pub nodes: u64,
    pub digest: String,
    /// `false` when the budget ran out; `min_size` is then only an upper bound.
    pub optimal: bool,
}

struct Search<'a> {
    g: &'a ColouredCompleteGraph,
    members: Vec<Option<BipartiteMember>>,
    tileable: HashMap<u32, Option<Embedding>>,
    dead: HashSet<(u32, usize)>,
    nodes: u64,
    budget: u64,
    /// Some answer was cut short by the budget, so failures are not proofs.
    incomplete: bool,
}

impl Search<'_> {
    fn set_of(&self, mask: u32) -> VertexSet {
        VertexSet::from_iter_in(self.g.n(), (0..self.g.n()).filter(|&v| mask >> v & 1 == 1))
    }

    /// A monochromatic copy of `F_|mask|` spanning exactly `mask`.
    fn tile_on(&mut self, mask: u32) -> Option<Embedding> {
        if let Some(hit) = self.tileable.get(&mask) {
            return hit.clone();
        }
        let l = mask.count_ones() as usize;
        let within = self.set_of(mask);
        let res = match &self.members[l] {
            None => None,
            Some(f) if f.edge_count() == 0 => Some(Embedding::new(f, 0, within.to_vec())),
            Some(f) => {
                let mut found = None;
                for c in 0..self.g.r() {
                    let cfg = SearchConfig::with_budget(self.budget.saturating_sub(self.nodes).max(1));
                    let r = find_copy(&self.g.class(c as u8), &within, f, &cfg);
                    self.nodes += r.nodes;
                    match r.outcome {
                        SearchOutcome::Found(images) => {
                            found = Some(Embedding::new(f, c as u8, images));
                            break;
                        }
                        SearchOutcome::BudgetExhausted => self.incomplete = true,
                        SearchOutcome::Absent => {}
                    }
                }
                found
            }
        };
        if self.tileable.len() < CACHE_LIMIT {
            self.tileable.insert(mask, res.clone());
        }
        res
    }

    /// Whether `left` splits into at most `s` tiles; pushes them onto `out`.
    fn cover(&mut self, left: u32, s: usize, out: &mut Vec<Embedding>) -> bool {
        if left == 0 {
            return true;
        }
        if s == 0 || self.nodes >= self.budget || self.dead.contains(&(left, s)) {
            return false;
        }
        self.nodes += 1;
        // Every tile contains the lowest uncovered vertex of some branch.
        let v = left.trailing_zeros();
        let rest = left & !(1 << v);
        let others: Vec<u32> = (0..32).filter(|&b| rest >> b & 1 == 1).collect();
        // Larger tiles first: the last tile can only be the whole remainder.
        let mut subsets: Vec<u32> = if s == 1 {
            vec![rest]
        } else {
            (0..1u32 << others.len())
                .map(|bits| others.iter().enumerate().filter(|(i, _)| bits >> i & 1 == 1).fold(0, |m, (_, &b)| m | 1 << b))
                .collect()
        };
        subsets.sort_by_key(|m| std::cmp::Reverse(m.count_ones()));
        for sub in subsets {
            let tile = sub | 1 << v;
            let Some(e) = self.tile_on(tile) else { continue };
            out.push(e);
            if self.cover(left & !tile, s - 1, out) {
                return true;
            }
            out.pop();
            if self.nodes >= self.budget {
                return false;
            }
        }
        if self.nodes < self.budget && !self.incomplete {
            self.dead.insert((left, s));
        }
        false
    }
}

/// Minimum number of tiles over all monochromatic tilings of `g`.
pub fn exact_min_tiling(g: &ColouredCompleteGraph, spec: &SequenceSpec, budget: u64) -> Result<OracleResult> {
    exact_min_tiling_capped(g, spec, budget, DEFAULT_ORACLE_CAP)
}

pub fn exact_min_tiling_capped(
    g: &ColouredCompleteGraph,
    spec: &SequenceSpec,
    budget: u64,
    cap: usize,
) -> Result<OracleResult> {
    let n = g.n();
    if n > cap.min(31) {
        return Err(Error::precondition("exact oracle", format!("n = {n} exceeds the cap of {}", cap.min(31))));
    }
    let digest = g.digest();
    if n == 0 {
        return Ok(OracleResult { min_size: 0, tiling: Tiling::new(), nodes: 0, digest, optimal: true });
    }
    let mut search = Search {
        g,
        members: (0..=n).map(|l| if l == 0 { None } else { member(spec, l).ok() }).collect(),
        tileable: HashMap::new(),
        dead: HashSet::new(),
        nodes: 0,
        budget,
        incomplete: false,
    };
    let all = (1u32 << n) - 1;
    for s in 1..=n {
        let mut tiles = Vec::new();
        if search.cover(all, s, &mut tiles) {
            let mut tiling = Tiling { tiles };
            tiling.canonicalize();
            return Ok(OracleResult {
                min_size: s,
                tiling,
                nodes: search.nodes,
                digest,
                optimal: !search.incomplete,
            });
        }
        if search.nodes >= search.budget {
            break;
        }
    }
    // Out of budget: the greedy cover is the best known upper bound.
    let mut tiling = greedy_cover(g, &g.all_vertices(), 1.0, spec, CoverStrategy::LargestFirst, &SearchConfig::default())?.tiling;
    tiling.canonicalize();
    Ok(OracleResult { min_size: tiling.len(), tiling, nodes: search.nodes, digest, optimal: false })
}

/// Which colourings of `K_n` a sweep visits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Enumerator {
    /// Every colouring; refused above [`FULL_ENUMERATION_LIMIT`] colourings per `n`.
    All,
    Sampled { per_n: usize, seed: u64 },
    SingleColour,
}

pub const FULL_ENUMERATION_LIMIT: u64 = 1 << 15;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SweepRow {
    pub instance_digest: String,
    pub n: usize,
    pub r: usize,
    pub spec: String,
    pub min_size: usize,
    pub optimal: bool,
}

pub const SWEEP_CSV_HEADER: &str = "instance_digest,n,r,spec,min_size,optimal";

impl SweepRow {
    pub fn csv_line(&self) -> String {
        format!("{},{},{},{},{},{}", self.instance_digest, self.n, self.r, self.spec, self.min_size, self.optimal)
    }
}

fn colourings(n: usize, r: usize, e: &Enumerator) -> Result<Vec<ColouredCompleteGraph>> {
    let pairs = n * n.saturating_sub(1) / 2;
    match e {
        Enumerator::SingleColour => Ok(vec![ColouredCompleteGraph::generate(&Generator::SingleColour, n, r, 0)?]),
        Enumerator::Sampled { per_n, seed } => (0..*per_n as u64)
            .map(|i| ColouredCompleteGraph::generate(&Generator::UniformRandom, n, r, crate::rng::derive_seed(*seed, &format!("sweep/{n}/{i}"))))
            .collect(),
        Enumerator::All => {
            let total = (r as u64).checked_pow(pairs as u32).filter(|&t| t <= FULL_ENUMERATION_LIMIT).ok_or_else(|| {
                Error::precondition("exact sweep", format!("{r}^{pairs} colourings of K_{n} is too many to enumerate"))
            })?;
            (0..total)
                .map(|code| {
                    let mut c = code;
                    let tri: Vec<u64> = (0..pairs)
                        .map(|_| {
                            let d = c % r as u64;
                            c /= r as u64;
                            d
                        })
                        .collect();
                    ColouredCompleteGraph::from_upper_triangle(n, r, &tri)
                })
                .collect()
        }
    }
}

/// Oracle values for every colouring the enumerator yields, `n = 1..=n_max`, in enumeration order.
pub fn exact_sweep(n_max: usize, r: usize, spec: &SequenceSpec, e: &Enumerator, budget: u64) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::new();
    for n in 1..=n_max {
        let gs = colourings(n, r, e)?;
        let part: Vec<SweepRow> = gs
            .par_iter()
            .map(|g| {
                exact_min_tiling(g, spec, budget).map(|o| SweepRow {
                    instance_digest: o.digest,
                    n,
                    r,
                    spec: spec.to_string(),
                    min_size: o.min_size,
                    optimal: o.optimal,
                })
            })
            .collect::<Result<_>>()?;
        rows.extend(part);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tiling::verify_tiling;

    #[test]
    fn single_colour_triangle_is_one_path() {
        let g = ColouredCompleteGraph::generate(&Generator::SingleColour, 3, 2, 0).unwrap();
        let o = exact_min_tiling(&g, &SequenceSpec::path(), 10_000).unwrap();
        assert_eq!(o.min_size, 1);
        assert!(o.optimal);
        assert!(verify_tiling(&g, &SequenceSpec::path(), &o.tiling).pass());
    }

    #[test]
    fn one_vertex() {
        let g = ColouredCompleteGraph::generate(&Generator::SingleColour, 1, 2, 0).unwrap();
        assert_eq!(exact_min_tiling(&g, &SequenceSpec::path(), 10).unwrap().min_size, 1);
    }

    #[test]
    fn cap_is_enforced() {
        let g = ColouredCompleteGraph::generate(&Generator::UniformRandom, 13, 2, 0).unwrap();
        assert!(exact_min_tiling(&g, &SequenceSpec::path(), 10).is_err());
    }

    #[test]
    fn full_enumeration_of_triangles() {
        let rows = exact_sweep(3, 2, &SequenceSpec::path(), &Enumerator::All, 10_000).unwrap();
        assert_eq!(rows.len(), 1 + 2 + 8);
        // Every 2-coloured triangle has a monochromatic P_3.
        assert!(rows.iter().all(|r| r.min_size == 1 && r.optimal));
    }
}
