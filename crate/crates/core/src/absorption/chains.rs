//! Disjoint switching chains `x → z → w → y` over a relation on `[0, s)`.

use rand::Rng;
use serde::Serialize;

use crate::rng;
use crate::vertex_set::VertexSet;

/// Above this many elements only a sample of ordered pairs is checked.
pub const EXACT_CHAIN_LIMIT: usize = 64;
pub const CHAIN_SAMPLES: usize = 200;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainRelation {
    out: Vec<VertexSet>,
    inn: Vec<VertexSet>,
}

impl ChainRelation {
    pub fn from_fn(s: usize, mut rel: impl FnMut(usize, usize) -> bool) -> Self {
        let mut out = vec![VertexSet::new(s); s];
        let mut inn = vec![VertexSet::new(s); s];
        for a in 0..s {
            for b in 0..s {
                if rel(a, b) {
                    out[a].insert(b);
                    inn[b].insert(a);
                }
            }
        }
        ChainRelation { out, inn }
    }

    pub fn len(&self) -> usize {
        self.out.len()
    }

    pub fn is_empty(&self) -> bool {
        self.out.is_empty()
    }

    pub fn related(&self, a: usize, b: usize) -> bool {
        self.out[a].contains(b)
    }

    /// Greedy maximal family of pairwise disjoint pairs `(z, w)`, `z ≠ w`,
    /// with `x → z → w → y`. Elements of `avoid` are never used.
    pub fn disjoint_chains(&self, x: usize, y: usize, avoid: &VertexSet) -> Vec<(usize, usize)> {
        let w_cand = self.inn[y].difference(avoid);
        let mut zs: Vec<(usize, usize)> = self.out[x]
            .difference(avoid)
            .iter()
            .map(|z| (self.out[z].intersection_len(&w_cand), z))
            .filter(|&(d, _)| d > 0)
            .collect();
        // Scarce z first keeps the greedy packing close to maximum.
        zs.sort_unstable();
        let mut used = VertexSet::new(self.len());
        let mut pairs = Vec::new();
        for (_, z) in zs {
            if used.contains(z) {
                continue;
            }
            let mut ws = self.out[z].intersection(&w_cand);
            ws.difference_with(&used);
            ws.remove(z);
            if let Some(w) = ws.first() {
                used.insert(z);
                used.insert(w);
                pairs.push((z, w));
            }
        }
        pairs
    }

    /// Minimum chain count over ordered pairs of distinct elements; exhaustive
    /// up to [`EXACT_CHAIN_LIMIT`] elements, else over [`CHAIN_SAMPLES`] seeded pairs.
    pub fn check(&self, seed: u64) -> ChainCheck {
        let s = self.len();
        let none = VertexSet::new(s);
        let mut res = ChainCheck { min_chains: None, worst: None, pairs_checked: 0, sampled: s > EXACT_CHAIN_LIMIT };
        let visit = |x: usize, y: usize, res: &mut ChainCheck| {
            let c = self.disjoint_chains(x, y, &none).len();
            res.pairs_checked += 1;
            if res.min_chains.is_none_or(|m| c < m) {
                res.min_chains = Some(c);
                res.worst = Some((x, y));
            }
        };
        if s < 2 {
            return res;
        }
        if res.sampled {
            let mut rng = rng::substream(seed, "chains/sample");
            for _ in 0..CHAIN_SAMPLES {
                let x = rng.gen_range(0..s);
                let mut y = rng.gen_range(0..s - 1);
                if y >= x {
                    y += 1;
                }
                visit(x, y, &mut res);
            }
        } else {
            for x in 0..s {
                for y in 0..s {
                    if x != y {
                        visit(x, y, &mut res);
                    }
                }
            }
        }
        res
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ChainCheck {
    /// `None` when there are fewer than two elements.
    pub min_chains: Option<usize>,
    pub worst: Option<(usize, usize)>,
    pub pairs_checked: usize,
    pub sampled: bool,
}

impl ChainCheck {
    /// Whether every checked pair has at least `need` chains.
    pub fn meets(&self, need: f64) -> bool {
        self.min_chains.is_none_or(|m| m as f64 >= need)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complete_relation_packs_half() {
        let rel = ChainRelation::from_fn(10, |_, _| true);
        let pairs = rel.disjoint_chains(0, 1, &VertexSet::new(10));
        assert_eq!(pairs.len(), 5);
        let check = rel.check(0);
        assert_eq!(check.min_chains, Some(5));
        assert_eq!(check.pairs_checked, 90);
        assert!(!check.sampled);
    }

    #[test]
    fn chains_respect_relation_and_avoid() {
        // a → a+1 and a → a+2 (mod 9).
        let rel = ChainRelation::from_fn(9, |a, b| b == (a + 1) % 9 || b == (a + 2) % 9 || a == b);
        let avoid = VertexSet::from_iter_in(9, [4]);
        let pairs = rel.disjoint_chains(0, 5, &avoid);
        let mut seen = VertexSet::new(9);
        for &(z, w) in &pairs {
            assert!(rel.related(0, z) && rel.related(z, w) && rel.related(w, 5));
            assert!(z != w && !avoid.contains(z) && !avoid.contains(w));
            assert!(seen.insert(z) && seen.insert(w));
        }
        assert!(!pairs.is_empty());
    }

    #[test]
    fn singletons_are_vacuous() {
        let rel = ChainRelation::from_fn(1, |_, _| true);
        assert!(rel.check(0).meets(1.0));
        let empty = ChainRelation::from_fn(3, |a, b| a == b);
        assert_eq!(empty.check(0).min_chains, Some(0));
    }

    #[test]
    fn large_sets_are_sampled() {
        let rel = ChainRelation::from_fn(70, |_, _| true);
        let c = rel.check(3);
        assert!(c.sampled);
        assert_eq!(c.pairs_checked, CHAIN_SAMPLES);
        assert_eq!(rel.check(3), c);
    }
}
