//! Dependent random choice as a Las Vegas routine, plus the Chernoff tail.
//!
//! Every attempt samples `t` vertices of B with replacement, takes their
//! common neighbourhood `S` in A, and keeps it only if both result bounds
//! hold. The sample `T` is returned so callers can re-check `S = N(T)`.

use rand::seq::index::sample;
use rand::Rng;
use serde::Serialize;

use crate::bipartite::BipartiteGraph;
use crate::error::{Error, Result};
use crate::rng;
use crate::vertex_set::VertexSet;

pub const DEFAULT_RETRIES: usize = 64;

/// Above this many k-subsets the bad-set count is estimated by sampling.
pub const EXACT_COUNT_LIMIT: u128 = 1_000_000;

const COUNT_SAMPLES: usize = 20_000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DrcParams {
    pub k: usize,
    pub t: usize,
    pub epsilon: f64,
    pub delta: f64,
    pub gamma: f64,
    pub max_retries: usize,
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum CountMode {
    Exact,
    /// Upper confidence bound from uniformly sampled k-subsets.
    Sampled { samples: usize, bad_in_sample: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DrcResult {
    /// Subset of A, indexed by A-position.
    pub s: VertexSet,
    /// Sampled B-vertices (with repetition) whose common neighbourhood is `s`.
    pub witness: Vec<usize>,
    pub bad_k_set_count: u64,
    pub count_mode: CountMode,
    pub retries_used: usize,
    /// `½ ε^t |A|`.
    pub size_bound: f64,
    /// `δ |S|^k`.
    pub bad_bound: f64,
    /// Smallest C with `½(1/r)^t ≥ δ^C`; set by [`k_set_drc`] only.
    pub c_exponent: Option<u32>,
}

fn check_unit(name: &str, v: f64, allow_one: bool) -> Result<()> {
    let ok = v > 0.0 && (v < 1.0 || (allow_one && v == 1.0));
    if !ok || !v.is_finite() {
        return Err(Error::precondition(
            "dependent random choice",
            format!("{name} = {v} is outside {}", if allow_one { "(0, 1]" } else { "(0, 1)" }),
        ));
    }
    Ok(())
}

/// Whether `δ ε^{kt} ≥ 2 γ^t`, compared in log space.
pub fn parameters_admissible(p: &DrcParams) -> bool {
    let lhs = p.delta.ln() + (p.k * p.t) as f64 * p.epsilon.ln();
    let rhs = std::f64::consts::LN_2 + p.t as f64 * p.gamma.ln();
    lhs >= rhs - 1e-12 * rhs.abs().max(1.0)
}

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    acc
}

/// Counts k-subsets of `s` whose common B-neighbourhood has fewer than `threshold` vertices.
pub fn count_bad_k_sets(h: &BipartiteGraph, s: &VertexSet, k: usize, threshold: f64) -> u64 {
    let members = s.to_vec();
    let mut chosen = Vec::with_capacity(k);
    let start = VertexSet::full(h.b_len());
    count_rec(h, &members, 0, k, threshold, &start, &mut chosen)
}

fn count_rec(
    h: &BipartiteGraph,
    members: &[usize],
    from: usize,
    k: usize,
    threshold: f64,
    common: &VertexSet,
    chosen: &mut Vec<usize>,
) -> u64 {
    if chosen.len() == k {
        return u64::from((common.len() as f64) < threshold);
    }
    let need = k - chosen.len();
    let mut total = 0u64;
    for idx in from..members.len() {
        if members.len() - idx < need {
            break;
        }
        let next = common.intersection(h.a_neighbours(members[idx]));
        if (next.len() as f64) < threshold {
            // Common neighbourhoods only shrink, so every completion is bad.
            total += binomial(members.len() - idx - 1, need - 1) as u64;
            continue;
        }
        chosen.push(members[idx]);
        total += count_rec(h, members, idx + 1, k, threshold, &next, chosen);
        chosen.pop();
    }
    total
}

fn sampled_bad_upper_bound(
    h: &BipartiteGraph,
    s: &VertexSet,
    k: usize,
    threshold: f64,
    rng: &mut rng::StreamRng,
) -> (u64, usize) {
    let members = s.to_vec();
    let mut bad = 0usize;
    for _ in 0..COUNT_SAMPLES {
        let pick: Vec<usize> = sample(rng, members.len(), k).into_iter().map(|i| members[i]).collect();
        if (h.common_b(&pick).len() as f64) < threshold {
            bad += 1;
        }
    }
    let total = binomial(members.len(), k) as f64;
    let p = bad as f64 / COUNT_SAMPLES as f64;
    let se = (p.max(1.0 / COUNT_SAMPLES as f64) * (1.0 - p) / COUNT_SAMPLES as f64).sqrt();
    (((p + 3.0 * se) * total).ceil() as u64, bad)
}

/// The general lemma. `ε = 1` is accepted; the other parameters must lie in (0, 1).
pub fn dependent_random_choice(h: &BipartiteGraph, p: &DrcParams) -> Result<DrcResult> {
    check_unit("epsilon", p.epsilon, true)?;
    check_unit("delta", p.delta, false)?;
    check_unit("gamma", p.gamma, false)?;
    if p.k == 0 || p.t == 0 {
        return Err(Error::precondition("dependent random choice", "k and t must be positive"));
    }
    let (a, b) = (h.a_len(), h.b_len());
    if (h.edge_count() as f64) < p.epsilon * (a * b) as f64 {
        return Err(Error::precondition(
            "dependent random choice",
            format!("density {:.4} is below epsilon = {}", h.density(), p.epsilon),
        ));
    }
    if !parameters_admissible(p) {
        return Err(Error::precondition(
            "dependent random choice",
            format!(
                "delta * epsilon^(kt) < 2 gamma^t for k={}, t={}, eps={}, delta={}, gamma={}",
                p.k, p.t, p.epsilon, p.delta, p.gamma
            ),
        ));
    }
    let size_bound = 0.5 * p.epsilon.powi(p.t as i32) * a as f64;
    let threshold = p.gamma * b as f64;
    let mut rng = rng::substream(p.seed, "drc");
    let mut last_size = 0;
    for attempt in 1..=p.max_retries {
        let witness: Vec<usize> = if b == 0 {
            Vec::new()
        } else {
            (0..p.t).map(|_| rng.gen_range(0..b)).collect()
        };
        let s = h.common_a(&witness);
        last_size = s.len();
        if (s.len() as f64) < size_bound {
            continue;
        }
        let bad_bound = p.delta * (s.len() as f64).powi(p.k as i32);
        let (bad, mode) = if binomial(s.len(), p.k) <= EXACT_COUNT_LIMIT {
            (count_bad_k_sets(h, &s, p.k, threshold), CountMode::Exact)
        } else {
            let (upper, in_sample) = sampled_bad_upper_bound(h, &s, p.k, threshold, &mut rng);
            (upper, CountMode::Sampled { samples: COUNT_SAMPLES, bad_in_sample: in_sample })
        };
        if bad as f64 > bad_bound {
            continue;
        }
        return Ok(DrcResult {
            s,
            witness,
            bad_k_set_count: bad,
            count_mode: mode,
            retries_used: attempt,
            size_bound,
            bad_bound,
            c_exponent: None,
        });
    }
    Err(Error::RetriesExhausted {
        op: "dependent random choice",
        retries: p.max_retries,
        detail: format!("last |S| = {last_size}, needed at least {size_bound:.2}"),
    })
}

/// `t` with `2^{t−2} ≤ 1/δ < 2^{t−1}`.
pub fn t_for_delta(delta: f64) -> usize {
    let inv = 1.0 / delta;
    let mut j = 0usize;
    while 2f64.powi(j as i32 + 1) <= inv {
        j += 1;
    }
    j + 2
}

/// Smallest integer C with `½(1/r)^t ≥ δ^C`.
pub fn c_exponent(r: usize, t: usize, delta: f64) -> u32 {
    let need = (std::f64::consts::LN_2 + t as f64 * (r as f64).ln()) / -delta.ln();
    let mut c = need.ceil().max(0.0) as u32;
    // Guard the boundary against rounding in `need`.
    while c > 0 && 0.5 * (1.0 / r as f64).powi(t as i32) >= delta.powi(c as i32 - 1) {
        c -= 1;
    }
    while 0.5 * (1.0 / r as f64).powi(t as i32) < delta.powi(c as i32) {
        c += 1;
    }
    c
}

/// Specialization with `ε = 1/r` and `γ = (1/r)^k / 2`.
pub fn k_set_drc(
    h: &BipartiteGraph,
    r: usize,
    k: usize,
    delta: f64,
    seed: u64,
    max_retries: usize,
) -> Result<DrcResult> {
    if !(delta > 0.0 && delta < 0.5) {
        return Err(Error::precondition("k-set drc", format!("delta = {delta} is outside (0, 1/2)")));
    }
    if r == 0 {
        return Err(Error::precondition("k-set drc", "r must be positive"));
    }
    let eps = 1.0 / r as f64;
    let t = t_for_delta(delta);
    let params = DrcParams {
        k,
        t,
        epsilon: eps,
        delta,
        gamma: eps.powi(k as i32) / 2.0,
        max_retries,
        seed,
    };
    let mut res = dependent_random_choice(h, &params)?;
    res.c_exponent = Some(c_exponent(r, t, delta));
    Ok(res)
}

/// Specialization with `k = 2`, `t = 4`, `γ = ε³`.
pub fn pair_drc(h: &BipartiteGraph, epsilon: f64, delta: f64, seed: u64, max_retries: usize) -> Result<DrcResult> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::precondition("pair drc", format!("epsilon = {epsilon} is outside (0, 1)")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::precondition("pair drc", format!("delta = {delta} is outside (0, 1)")));
    }
    if delta < 2.0 * epsilon.powi(4) {
        return Err(Error::precondition(
            "pair drc",
            format!("delta = {delta} is below 2 epsilon^4 = {}", 2.0 * epsilon.powi(4)),
        ));
    }
    let params = DrcParams {
        k: 2,
        t: 4,
        epsilon,
        delta,
        gamma: epsilon.powi(3),
        max_retries,
        seed,
    };
    dependent_random_choice(h, &params)
}

/// `e^{−μδ²/2}`, the lower-tail bound for a sum of independent indicators.
pub fn chernoff_lower_tail(mu: f64, delta: f64) -> Result<f64> {
    if !(mu >= 0.0) || !mu.is_finite() {
        return Err(Error::InvalidArgument(format!("mu = {mu} must be a finite non-negative number")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidArgument(format!("delta = {delta} is outside (0, 1)")));
    }
    Ok((-mu * delta * delta / 2.0).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complete_bipartite_returns_everything_first_try() {
        let h = BipartiteGraph::complete(10, 7);
        let p = DrcParams { k: 3, t: 2, epsilon: 1.0, delta: 0.5, gamma: 0.5, max_retries: 8, seed: 1 };
        let res = dependent_random_choice(&h, &p).unwrap();
        assert_eq!(res.s.len(), 10);
        assert_eq!(res.bad_k_set_count, 0);
        assert_eq!(res.retries_used, 1);
        let ks = k_set_drc(&h, 2, 2, 0.2, 5, 8).unwrap();
        assert_eq!(ks.s.len(), 10);
    }

    #[test]
    fn t_window() {
        assert_eq!(t_for_delta(0.25), 4);
        assert_eq!(t_for_delta(0.2), 4);
        assert_eq!(t_for_delta(0.49), 3);
        assert_eq!(t_for_delta(0.125), 5);
        for delta in [0.4, 0.3, 0.1, 0.01, 1e-5] {
            let t = t_for_delta(delta) as i32;
            assert!(2f64.powi(t - 2) <= 1.0 / delta && 1.0 / delta < 2f64.powi(t - 1));
        }
    }

    #[test]
    fn k_set_parameters_are_admissible() {
        for r in 2..5usize {
            for k in 1..4usize {
                for delta in [0.4, 0.2, 0.05, 0.001] {
                    let eps = 1.0 / r as f64;
                    let p = DrcParams {
                        k,
                        t: t_for_delta(delta),
                        epsilon: eps,
                        delta,
                        gamma: eps.powi(k as i32) / 2.0,
                        max_retries: 1,
                        seed: 0,
                    };
                    assert!(parameters_admissible(&p), "r={r} k={k} delta={delta}");
                    let c = c_exponent(r, p.t, delta);
                    assert!(0.5 * eps.powi(p.t as i32) >= delta.powi(c as i32));
                    assert!(c == 0 || 0.5 * eps.powi(p.t as i32) < delta.powi(c as i32 - 1));
                }
            }
        }
    }

    #[test]
    fn pair_preconditions() {
        let h = BipartiteGraph::complete(4, 4);
        assert!(matches!(pair_drc(&h, 1.0, 0.5, 0, 4), Err(Error::Precondition { .. })));
        assert!(matches!(pair_drc(&h, 0.5, 0.1, 0, 4), Err(Error::Precondition { .. })));
        assert!(pair_drc(&h, 0.5, 0.25, 0, 4).is_ok());
    }

    #[test]
    fn pruned_count_matches_plain_enumeration() {
        let h = BipartiteGraph::random(14, 20, 0.5, 11);
        let s = VertexSet::full(14);
        for k in 1..=4 {
            let thr = 20.0 * 0.5f64.powi(k as i32);
            let mut plain = 0u64;
            let n = 14usize;
            for mask in 0u32..(1 << n) {
                if mask.count_ones() as usize != k {
                    continue;
                }
                let pick: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
                if (h.common_b(&pick).len() as f64) < thr {
                    plain += 1;
                }
            }
            assert_eq!(count_bad_k_sets(&h, &s, k, thr), plain, "k={k}");
        }
    }

    #[test]
    fn chernoff_values() {
        assert_eq!(chernoff_lower_tail(0.0, 0.3).unwrap(), 1.0);
        assert!((chernoff_lower_tail(10.0, 0.5).unwrap() - (-1.25f64).exp()).abs() < 1e-15);
        assert!((chernoff_lower_tail(10.0, 0.5).unwrap() - 0.2865).abs() < 1e-4);
        assert!(chernoff_lower_tail(-1.0, 0.5).is_err());
        assert!(chernoff_lower_tail(1.0, 1.0).is_err());
    }
}
