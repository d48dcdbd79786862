//! The induction over colours and the resulting ladder of absorbers.

use rand::seq::{index, SliceRandom};
use serde::Serialize;

use super::combine::{combine_absorbers, CombinedAbsorber};
use crate::bipartite::BipartiteGraph;
use crate::drc::{binomial, count_bad_k_sets, k_set_drc, EXACT_COUNT_LIMIT};
use crate::error::{Error, Result};
use crate::graph::{Colour, ColouredCompleteGraph};
use crate::params::{Mode, PipelineParams};
use crate::rng::{self, StreamRng};
use crate::sequence::SequenceSpec;
use crate::vertex_set::VertexSet;

const BAD_SAMPLES: usize = 2_000;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StepStats {
    pub a: usize,
    pub b: usize,
    pub u: usize,
    /// The k-set DRC failed and `U` was taken by degree instead.
    pub u_by_degree: bool,
    pub w: usize,
    pub d: usize,
    pub resample_attempts: usize,
    /// Practical mode kept the best split after the retries ran out.
    pub resample_exhausted: bool,
    /// `|B′|/|A′|`, recorded in place of an explicit cap.
    pub ratio: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Step {
    /// Colours `1..=k` in host ids; the last one is this level's colour.
    pub colours: Vec<Colour>,
    pub absorber: CombinedAbsorber,
    pub a_next: VertexSet,
    pub b_next: VertexSet,
    pub vs_next: Vec<(Colour, VertexSet)>,
    /// Colour for the next level, `None` when the ladder ends here.
    pub next_colour: Option<Colour>,
    /// `|A|` was too small and everything goes to the greedy cover.
    pub escaped: bool,
    pub stats: StepStats,
}

impl Step {
    pub fn terminal(&self) -> bool {
        self.next_colour.is_none()
    }

    /// `T_{k+1} = A′ ∪ B′`.
    pub fn t_next(&self) -> VertexSet {
        self.a_next.union(&self.b_next)
    }
}

fn log_escape(params: &PipelineParams, k: usize, a: usize, d: usize) -> bool {
    match params.gates.level_escape_a {
        Some(min) => a < min,
        None => {
            // |A| < 4Δ(δ'')^{−C}, compared in log space.
            let ln_bound = (4.0 * d as f64).ln() - params.big_c as f64 * params.ln_delta_dd(k);
            (a.max(1) as f64).ln() < ln_bound
        }
    }
}

/// Upper estimate of the fraction of `k`-sets of `A` (all of `h`'s A side)
/// whose common neighbourhood is below `threshold`.
fn bad_fraction(h: &BipartiteGraph, k: usize, threshold: f64, rng: &mut StreamRng) -> f64 {
    let a = h.a_len();
    if a < k {
        return 0.0;
    }
    let total = binomial(a, k);
    if total <= EXACT_COUNT_LIMIT {
        let all = VertexSet::full(a);
        return count_bad_k_sets(h, &all, k, threshold) as f64 / total as f64;
    }
    let bad = (0..BAD_SAMPLES)
        .filter(|_| {
            let pick = index::sample(rng, a, k).into_vec();
            (h.common_b(&pick).len() as f64) < threshold
        })
        .count();
    bad as f64 / BAD_SAMPLES as f64
}

fn ln_or_value(ln: f64, value: Option<f64>) -> f64 {
    value.unwrap_or_else(|| ln.exp())
}

/// One round of the induction: absorbers for colours `1..=k`, then a random
/// split of what is left into `A′`, `B′` and the next colour.
#[allow(clippy::too_many_arguments)]
pub fn induction_step(
    g: &ColouredCompleteGraph,
    a: &VertexSet,
    b: &VertexSet,
    vs: &[(Colour, VertexSet)],
    colours: &[Colour],
    params: &PipelineParams,
    spec: &SequenceSpec,
    seed: u64,
) -> Result<Step> {
    let n = g.n();
    let r = g.r();
    let d = spec.delta.max(1);
    let k = colours.len();
    let colour = *colours.last().ok_or_else(|| Error::InvalidArgument("induction step needs a colour".into()))?;
    if vs.len() + 1 != k {
        return Err(Error::InvalidArgument(format!("{} target sets for level {k}", vs.len())));
    }
    if !a.is_disjoint(b) {
        return Err(Error::precondition("induction step", "A and B overlap"));
    }
    let faithful = params.mode == Mode::Faithful;
    let mut stats = StepStats {
        a: a.len(),
        b: b.len(),
        u: 0,
        u_by_degree: false,
        w: 0,
        d: 0,
        resample_attempts: 0,
        resample_exhausted: false,
        ratio: None,
    };
    let ab = a.union(b);
    let mut vs_all: Vec<(Colour, VertexSet)> = vs.to_vec();
    vs_all.push((colour, b.clone()));

    if log_escape(params, k, a.len(), d) {
        let absorber = combine_absorbers(g, &VertexSet::new(n), &[], &ab, params, spec, seed)?;
        stats.w = ab.len();
        return Ok(Step {
            colours: colours.to_vec(),
            absorber,
            a_next: VertexSet::new(n),
            b_next: VertexSet::new(n),
            vs_next: vs_all,
            next_colour: None,
            escaped: true,
            stats,
        });
    }

    // U from the k-set DRC on the colour-k graph between A and B.
    let a_list = a.to_vec();
    let b_list = b.to_vec();
    let h = BipartiteGraph::between(g, colour, &a_list, &b_list);
    let delta_dd = ln_or_value(params.ln_delta_dd(k), params.gates.delta_dd);
    let mut rng = rng::substream(seed, "induction/split");
    let mut u = match k_set_drc(&h, r, d, delta_dd, rng::derive_seed(seed, "induction/drc"), params.drc_retries) {
        Ok(res) => VertexSet::from_iter_in(n, res.s.iter().map(|i| a_list[i])),
        Err(e) if faithful => return Err(e.in_stage(format!("induction step {k}: k-set drc"))),
        Err(_) => {
            stats.u_by_degree = true;
            let mut order: Vec<usize> = (0..a_list.len()).collect();
            order.sort_by_key(|&i| (std::cmp::Reverse(h.a_neighbours(i).len()), i));
            VertexSet::from_iter_in(n, order[..a_list.len() / 2].iter().map(|&i| a_list[i]))
        }
    };
    let cap = match params.gates.u_fraction {
        Some(f) => (f * a.len() as f64).floor() as usize,
        None => (params.big_c as f64 * params.ln_delta_dd(k) + (a.len().max(1) as f64).ln()).exp().floor() as usize,
    };
    if u.len() > cap.max(1) {
        let mut members = u.to_vec();
        members.shuffle(&mut rng);
        u = VertexSet::from_iter_in(n, members.into_iter().take(cap.max(1)));
    }
    stats.u = u.len();

    // W: vertices with a dense colour among 1..=k into U.
    let need = u.len() as f64 / (4.0 * r as f64);
    let w = VertexSet::from_iter_in(
        n,
        ab.iter().filter(|&x| colours.iter().any(|&c| g.neighbours(c, x).intersection_len(&u) as f64 >= need)),
    );
    let absorber = combine_absorbers(g, &u, &vs_all, &w, params, spec, rng::derive_seed(seed, "induction/combine"))
        .map_err(|e| e.in_stage(format!("induction step {k}")))?;
    stats.w = absorber.w.len();
    stats.d = absorber.d.len();

    let s = ab.difference(&absorber.d).difference(&absorber.w);
    let u_left = u.difference(&absorber.d);
    let vs_next: Vec<(Colour, VertexSet)> =
        vs_all.iter().map(|(c, v)| (*c, v.difference(&absorber.d))).collect();

    // Random split with the two resampling conditions.
    let half = s.len() / 2;
    let eps_next = params.eps_prime(k);
    let delta_next = ln_or_value(params.ln_delta_prime(k), params.gates.delta_dd);
    let check = |a_next: &VertexSet, b_next: &VertexSet, rng: &mut StreamRng| -> (bool, bool) {
        let counts = g.colour_counts_between(a_next, b_next);
        let used: usize = colours.iter().map(|&c| counts[c as usize]).sum();
        let cond_a = (used as f64) < k as f64 / r as f64 * (a_next.len() * b_next.len()) as f64;
        let a_list = a_next.to_vec();
        let cond_b = vs_next.iter().all(|(c, v)| {
            let h = BipartiteGraph::between(g, *c, &a_list, &v.to_vec());
            bad_fraction(&h, d, eps_next * v.len() as f64, rng) <= delta_next
        });
        (cond_a, cond_b)
    };
    let deterministic = u_left.len() <= half;
    let mut best: Option<(usize, VertexSet, VertexSet)> = None;
    let mut failing = (0usize, 0usize);
    let attempts = if s.len() <= 2 { 0 } else { params.resample_retries.max(1) };
    if attempts == 0 {
        best = Some((0, VertexSet::new(n), s.clone()));
    }
    for attempt in 0..attempts {
        let a_next = if deterministic {
            u_left.clone()
        } else {
            let members = u_left.to_vec();
            VertexSet::from_iter_in(n, index::sample(&mut rng, members.len(), half).into_iter().map(|i| members[i]))
        };
        let b_next = s.difference(&a_next);
        let (ca, cb) = check(&a_next, &b_next, &mut rng);
        stats.resample_attempts = attempt + 1;
        let score = usize::from(!ca) + usize::from(!cb);
        failing.0 += usize::from(!ca);
        failing.1 += usize::from(!cb);
        if best.as_ref().is_none_or(|(bs, _, _)| score < *bs) {
            best = Some((score, a_next, b_next));
        }
        if score == 0 || deterministic {
            break;
        }
    }
    let (score, a_next, b_next) = best.expect("at least one attempt");
    if score > 0 {
        if faithful {
            return Err(Error::RetriesExhausted {
                op: "induction step resampling",
                retries: stats.resample_attempts,
                detail: format!("colour-density condition failed {} times, Δ-set condition failed {} times", failing.0, failing.1),
            });
        }
        stats.resample_exhausted = true;
    }
    stats.ratio = (!a_next.is_empty()).then(|| b_next.len() as f64 / a_next.len() as f64);

    let t_next = a_next.union(&b_next);
    let next_colour = if t_next.len() <= 2 || a_next.is_empty() || b_next.is_empty() {
        None
    } else {
        let counts = g.colour_counts_between(&a_next, &b_next);
        ColouredCompleteGraph::colours_by_frequency(&counts)
            .into_iter()
            .find(|c| !colours.contains(c) && counts[*c as usize] > 0)
    };
    Ok(Step {
        colours: colours.to_vec(),
        absorber,
        a_next,
        b_next,
        vs_next,
        next_colour,
        escaped: false,
        stats,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AbsorberLadder {
    /// `T_1 ⊇ T_2 ⊇ …`; one more entry than there are levels.
    pub t: Vec<VertexSet>,
    pub levels: Vec<Step>,
    /// A level failed (practical mode) and the ladder stops early; the last `T` is left to the greedy cover.
    pub fallback: bool,
    pub failure: Option<String>,
}

impl AbsorberLadder {
    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn terminal(&self) -> &VertexSet {
        self.t.last().expect("T_1 is always present")
    }

    /// `D_1 ∪ … ∪ D_ℓ`.
    pub fn d_union(&self, n: usize) -> VertexSet {
        let mut d = VertexSet::new(n);
        for l in &self.levels {
            d.union_with(&l.absorber.d);
        }
        d
    }
}

/// Runs the induction from a halving of `V(G)` for at most `r` levels.
pub fn iterated_absorbers(
    g: &ColouredCompleteGraph,
    params: &PipelineParams,
    spec: &SequenceSpec,
    seed: u64,
) -> Result<AbsorberLadder> {
    let n = g.n();
    let all = g.all_vertices();
    let mut ladder = AbsorberLadder { t: vec![all], levels: Vec::new(), fallback: false, failure: None };
    if n <= 2 {
        return Ok(ladder);
    }
    let mut a = VertexSet::range(n, 0, n / 2);
    let mut b = VertexSet::range(n, n / 2, n);
    let counts = g.colour_counts_between(&a, &b);
    let mut colours = vec![ColouredCompleteGraph::colours_by_frequency(&counts)[0]];
    let mut vs: Vec<(Colour, VertexSet)> = Vec::new();
    while colours.len() <= g.r() {
        let k = colours.len();
        let step = match induction_step(g, &a, &b, &vs, &colours, params, spec, rng::derive_seed(seed, &format!("level/{k}"))) {
            Ok(step) => step,
            Err(e) if params.mode == Mode::Faithful => return Err(e),
            Err(e) => {
                ladder.fallback = true;
                ladder.failure = Some(e.to_string());
                break;
            }
        };
        ladder.t.push(step.t_next());
        let next = step.next_colour;
        a = step.a_next.clone();
        b = step.b_next.clone();
        vs = step.vs_next.clone();
        ladder.levels.push(step);
        match next {
            Some(c) => colours.push(c),
            None => break,
        }
    }
    if ladder.terminal().len() > 2 {
        ladder.fallback = true;
    }
    assert!(ladder.len() <= g.r());
    Ok(ladder)
}
