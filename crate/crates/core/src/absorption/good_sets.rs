//! Sets with many switching chains in a bipartite graph `(A, B)`.

use rand::seq::SliceRandom;
use serde::Serialize;

use super::chains::{ChainCheck, ChainRelation};
use super::max_matching;
use crate::bipartite::BipartiteGraph;
use crate::drc::pair_drc;
use crate::error::{Error, Result};
use crate::params::Mode;
use crate::rng;
use crate::vertex_set::VertexSet;

/// `δ` with `δ + 2δ/ε³ = 1/3`.
pub fn good_set_delta(eps: f64) -> f64 {
    let e3 = eps.powi(3);
    e3 / (3.0 * (e3 + 2.0))
}

/// The proven constant: trimming keeps `ε¹³/128` of `A`, the rest keeps `ε¹⁴/256` of that.
pub fn good_set_constant(eps: f64) -> f64 {
    eps.powi(27) / 32768.0
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GoodSetOptions {
    pub mode: Mode,
    /// `ε` must stay below this.
    pub eps_max: f64,
    pub max_retries: usize,
    pub drc_retries: usize,
    pub seed: u64,
}

impl GoodSetOptions {
    pub fn new(mode: Mode, seed: u64) -> Self {
        GoodSetOptions {
            mode,
            eps_max: if mode == Mode::Faithful { 0.01 } else { 1.0 },
            max_retries: 16,
            drc_retries: 16,
            seed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GoodSet {
    /// `s[i] ∈ A` is matched to `f[i] ∈ B`.
    pub s: Vec<usize>,
    pub f: Vec<usize>,
    /// `min(|S|/|A|, chains/|S|)` as measured.
    pub c: f64,
    pub c_target: f64,
    pub chains: ChainCheck,
    pub delta: f64,
    /// Sizes of `A` after trimming, `S_0` and `S_1`.
    pub trimmed: usize,
    pub s0: usize,
    pub s1: usize,
    pub drc_used: bool,
    pub retries_used: usize,
}

fn check_inputs(h: &BipartiteGraph, eps: f64, op: &'static str) -> Result<()> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::precondition(op, format!("epsilon = {eps} is outside (0, 1]")));
    }
    if h.a_len() == 0 {
        return Err(Error::precondition(op, "A is empty"));
    }
    let need = eps * h.b_len() as f64;
    if let Some(x) = (0..h.a_len()).find(|&x| (h.a_neighbours(x).len() as f64) < need) {
        return Err(Error::precondition(
            op,
            format!("vertex {x} of A has degree {} < ε|B| = {need:.3}", h.a_neighbours(x).len()),
        ));
    }
    Ok(())
}

fn chain_relation(h: &BipartiteGraph, s: &[usize], f: &[usize]) -> ChainRelation {
    // x → z iff f(x) ∈ N(z).
    ChainRelation::from_fn(s.len(), |a, b| h.has_edge(s[b], f[a]))
}

/// A set `S ⊆ A` with a matching into `B` such that every ordered pair of
/// distinct elements is joined by many disjoint chains.
pub fn find_one_good_set(h: &BipartiteGraph, eps: f64, opts: &GoodSetOptions) -> Result<GoodSet> {
    const OP: &str = "find one good set";
    check_inputs(h, eps, OP)?;
    if h.a_len() > h.b_len() {
        return Err(Error::precondition(OP, format!("|A| = {} exceeds |B| = {}", h.a_len(), h.b_len())));
    }
    if eps >= opts.eps_max {
        return Err(Error::precondition(OP, format!("epsilon = {eps} is not below {}", opts.eps_max)));
    }
    let faithful = opts.mode == Mode::Faithful;
    let a_all = h.a_len();
    let b = h.b_len();
    let mut rng = rng::substream(opts.seed, "good-set/trim");

    let mut a_list: Vec<usize> = (0..a_all).collect();
    if faithful {
        let cap = (eps.powi(13) / 128.0 * b as f64).floor() as usize;
        if cap == 0 {
            return Err(Error::precondition(OP, format!("trimming A to ε¹³|B|/128 leaves nothing at |B| = {b}")));
        }
        if a_all > cap {
            a_list.shuffle(&mut rng);
            a_list.truncate(cap);
            a_list.sort_unstable();
        }
    }
    let trimmed = a_list.len();
    let ht = h.induced(&a_list, &(0..b).collect::<Vec<_>>());
    let delta = good_set_delta(eps);

    let drc_ok = delta / 8.0 >= 2.0 * eps.powi(4) && eps < 1.0;
    let big_enough = 0.5 * eps.powi(4) * trimmed as f64 >= 8.0;
    let drc = if faithful {
        Some(pair_drc(&ht, eps, delta / 8.0, rng::derive_seed(opts.seed, "good-set/drc"), opts.drc_retries)?)
    } else if drc_ok && big_enough {
        pair_drc(&ht, eps, delta / 8.0, rng::derive_seed(opts.seed, "good-set/drc"), opts.drc_retries).ok()
    } else {
        None
    };
    let drc_used = drc.is_some();
    let s0: Vec<usize> = match drc {
        Some(d) => d.s.to_vec(),
        None => (0..trimmed).collect(),
    };

    // Partners y with |N(x) ∩ N(y)| < ε³|B|.
    let thin = eps.powi(3) * b as f64;
    let bad: Vec<usize> = s0
        .iter()
        .map(|&x| {
            s0.iter()
                .filter(|&&y| y != x && (ht.a_neighbours(x).intersection_len(ht.a_neighbours(y)) as f64) < thin)
                .count()
        })
        .collect();
    let mut s1: Vec<usize> =
        s0.iter().zip(&bad).filter(|(_, &c)| c as f64 <= delta / 2.0 * s0.len() as f64).map(|(&x, _)| x).collect();
    if !faithful && 2 * s1.len() < s0.len() {
        let mut by_bad: Vec<(usize, usize)> = bad.iter().copied().zip(s0.iter().copied()).collect();
        by_bad.sort_unstable();
        s1 = by_bad.into_iter().take(s0.len().div_ceil(2)).map(|(_, x)| x).collect();
        s1.sort_unstable();
    }
    if s1.is_empty() {
        return Err(Error::precondition(OP, "the degree filter removed every vertex"));
    }

    let s1_set = VertexSet::from_iter_in(trimmed, s1.iter().copied());
    let b_prime = VertexSet::from_iter_in(
        b,
        (0..b).filter(|&u| ht.b_neighbours(u).intersection_len(&s1_set) as f64 >= delta * s1.len() as f64),
    );

    let c_target = good_set_constant(eps);
    let mut rng = rng::substream(opts.seed, "good-set/g");
    let mut best: Option<GoodSet> = None;
    for attempt in 1..=opts.max_retries.max(1) {
        let mut used = VertexSet::new(b);
        let (mut s, mut f) = (Vec::new(), Vec::new());
        for &x in &s1 {
            let mut pool = ht.a_neighbours(x).intersection(&b_prime);
            if pool.is_empty() {
                pool = ht.a_neighbours(x).clone();
            }
            if !faithful && !pool.is_subset(&used) {
                // Repair collisions by redrawing among unused targets.
                pool.difference_with(&used);
            }
            let pool = pool.to_vec();
            let &u = pool.choose(&mut rng).expect("degree is positive");
            if used.insert(u) {
                s.push(x);
                f.push(u);
            }
        }
        let seed = rng::derive_seed(opts.seed, &format!("good-set/check/{attempt}"));
        let mut check = chain_relation(&ht, &s, &f).check(seed);
        if !faithful {
            // Drop an endpoint of the worst pair until every pair has a chain.
            while !check.meets(1.0) {
                let (x, _) = check.worst.expect("failing check has a pair");
                s.remove(x);
                f.remove(x);
                check = chain_relation(&ht, &s, &f).check(seed);
            }
        }
        let c = {
            let size = s.len() as f64 / a_all as f64;
            check.min_chains.map_or(size, |m| size.min(m as f64 / s.len() as f64))
        };
        let ok = if faithful { c >= c_target } else { !s.is_empty() };
        let cand = GoodSet {
            s: s.iter().map(|&i| a_list[i]).collect(),
            f,
            c,
            c_target,
            chains: check,
            delta,
            trimmed,
            s0: s0.len(),
            s1: s1.len(),
            drc_used,
            retries_used: attempt,
        };
        if ok && (faithful || 2 * cand.s.len() >= s1.len()) {
            return Ok(cand);
        }
        if ok && best.as_ref().is_none_or(|bs| cand.s.len() > bs.s.len()) {
            best = Some(cand);
        }
    }
    best.ok_or(Error::RetriesExhausted {
        op: OP,
        retries: opts.max_retries,
        detail: format!("no attempt certified c ≥ {c_target:.3e}"),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ManyGoodSets {
    pub sets: Vec<Vec<usize>>,
    /// `f[x]` for every `x ∈ A`.
    pub f: Vec<usize>,
    /// Measured `min_i min(|S_i|/|A|, chains_i/|S_i|)`.
    pub eta: f64,
    pub checks: Vec<ChainCheck>,
    pub residual: Vec<usize>,
}

/// Peels good sets off `A` until at most `θ|A|` vertices remain.
pub fn find_many_good_sets(
    h: &BipartiteGraph,
    eps: f64,
    theta: f64,
    opts: &GoodSetOptions,
) -> Result<ManyGoodSets> {
    const OP: &str = "find many good sets";
    check_inputs(h, eps, OP)?;
    let (a, b) = (h.a_len(), h.b_len());
    let cap = if opts.mode == Mode::Faithful { eps / 2.0 * b as f64 } else { b as f64 };
    if a as f64 > cap {
        return Err(Error::precondition(OP, format!("|A| = {a} exceeds {cap:.2}")));
    }
    let mut f = vec![usize::MAX; a];
    let mut a_left = VertexSet::full(a);
    let mut b_left = VertexSet::full(b);
    let mut sets = Vec::new();
    let mut checks = Vec::new();
    let mut round = 0;
    while a_left.len() as f64 > theta * a as f64 {
        round += 1;
        let a_k = a_left.to_vec();
        let b_k = b_left.to_vec();
        let h_k = h.induced(&a_k, &b_k);
        let eps_k = match opts.mode {
            Mode::Faithful => eps / 2.0,
            Mode::Practical => {
                let measured = h_k.min_a_degree() as f64 / b_k.len().max(1) as f64;
                if measured <= 0.0 {
                    break;
                }
                (eps / 2.0).min(measured)
            }
        };
        let sub = GoodSetOptions { seed: rng::derive_seed(opts.seed, &format!("many/{round}")), ..*opts };
        let one = find_one_good_set(&h_k, eps_k, &sub).map_err(|e| e.in_stage(format!("good set {round}")))?;
        let s: Vec<usize> = one.s.iter().map(|&i| a_k[i]).collect();
        for (&x, &u) in s.iter().zip(&one.f) {
            f[x] = b_k[u];
            a_left.remove(x);
            b_left.remove(b_k[u]);
        }
        sets.push(s);
        checks.push(one.chains);
    }

    let residual = a_left.to_vec();
    let adj: Vec<Vec<usize>> = residual.iter().map(|&x| h.a_neighbours(x).intersection(&b_left).to_vec()).collect();
    let free = b_left.to_vec();
    let local: Vec<Vec<usize>> =
        adj.iter().map(|ns| ns.iter().map(|u| free.binary_search(u).expect("free")).collect()).collect();
    let partner = max_matching(&local, free.len());
    for (&x, p) in residual.iter().zip(&partner) {
        match p {
            Some(j) => f[x] = free[*j],
            None => return Err(Error::precondition(OP, format!("residual vertex {x} has no free neighbour"))),
        }
    }
    let eta = sets
        .iter()
        .zip(&checks)
        .map(|(s, c)| {
            let size = s.len() as f64 / a as f64;
            c.min_chains.map_or(size, |m| size.min(m as f64 / s.len() as f64))
        })
        .fold(1.0, f64::min);
    Ok(ManyGoodSets { sets, f, eta, checks, residual })
}
