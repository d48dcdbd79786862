//! Several good subgraphs, one per colour, sharing an absorbable set `W`.

use serde::Serialize;

use crate::absorption::{absorb, find_good_subgraph, AbsorbOptions, GoodSubgraphParams, GoodSubgraphWitness, SwitchOptions};
use crate::cover::{greedy_cover, CoverStrategy};
use crate::error::{Error, Result};
use crate::graph::{Colour, ColouredCompleteGraph};
use crate::params::{Mode, PipelineParams};
use crate::rng;
use crate::search::SearchConfig;
use crate::sequence::SequenceSpec;
use crate::tiling::Tiling;
use crate::vertex_set::VertexSet;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ColourAbsorber {
    pub colour: Colour,
    /// Vertices of `W` routed to this colour and certified by the witness.
    pub w: VertexSet,
    /// `X ∪ Y` of the witness, empty without one.
    pub d: VertexSet,
    pub witness: Option<GoodSubgraphWitness>,
    /// Vertices of this colour's share of `W` the witness could not certify.
    pub uncertified: usize,
    pub failure: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CombinedAbsorber {
    pub d: VertexSet,
    /// Union of the certified shares; any subset can be handed to [`CombinedAbsorber::absorb`].
    pub w: VertexSet,
    pub parts: Vec<ColourAbsorber>,
    /// `|U|` was too small, so `D = ∅` and absorbing means covering greedily.
    pub escaped: bool,
    pub mode: Mode,
    pub spec: SequenceSpec,
    #[serde(skip)]
    budget: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct AbsorbReport {
    /// Colours whose switching failed and were covered greedily instead.
    pub greedy_colours: Vec<Colour>,
    pub moved: usize,
}

impl CombinedAbsorber {
    fn empty(n: usize, spec: &SequenceSpec, mode: Mode, budget: u64, w: VertexSet) -> Self {
        CombinedAbsorber {
            d: VertexSet::new(n),
            w,
            parts: Vec::new(),
            escaped: true,
            mode,
            spec: *spec,
            budget,
        }
    }

    /// Tiling of exactly `D ∪ Z` for `Z ⊆ W`.
    pub fn absorb(&self, g: &ColouredCompleteGraph, z: &VertexSet) -> Result<(Tiling, AbsorbReport)> {
        let cfg = SearchConfig::with_budget(self.budget);
        let greedy = |set: &VertexSet| -> Result<Tiling> {
            Ok(greedy_cover(g, set, 1.0, &self.spec, CoverStrategy::LargestFirst, &cfg)?.tiling)
        };
        let mut report = AbsorbReport::default();
        let mut z = z.difference(&self.d);
        if self.mode == Mode::Faithful {
            if let Some(stray) = z.difference(&self.w).first() {
                return Err(Error::precondition("combined absorb", format!("vertex {stray} is not absorbable")));
            }
        }
        let mut tiling = Tiling::new();
        let opts = AbsorbOptions {
            switch: SwitchOptions { mode: self.mode, strategy: CoverStrategy::LargestFirst, cfg },
            k_cap: None,
        };
        for part in &self.parts {
            let zi = z.intersection(&part.w);
            z.difference_with(&zi);
            let Some(witness) = &part.witness else {
                tiling.extend(greedy(&zi)?);
                continue;
            };
            match absorb(g, witness, &zi, &opts) {
                Ok(out) => {
                    report.moved += out.moved;
                    tiling.extend(out.tiling);
                }
                Err(e) if self.mode == Mode::Faithful => return Err(e.in_stage(format!("absorb colour {}", part.colour))),
                Err(_) => {
                    report.greedy_colours.push(part.colour);
                    tiling.extend(greedy(&part.d.union(&zi))?);
                }
            }
        }
        // Escaped absorbers and stray vertices in practical mode.
        tiling.extend(greedy(&z)?);
        Ok((tiling, report))
    }
}

/// Builds one absorber per colour in `vs`, each with `X ⊆ U` and `Y ⊆ V_i`.
///
/// `vs` pairs every colour with its target set. Vertices of `W` whose share is
/// not certified are left out of the returned `w`.
pub fn combine_absorbers(
    g: &ColouredCompleteGraph,
    u: &VertexSet,
    vs: &[(Colour, VertexSet)],
    w: &VertexSet,
    params: &PipelineParams,
    spec: &SequenceSpec,
    seed: u64,
) -> Result<CombinedAbsorber> {
    let n = g.n();
    let r = g.r();
    let d = spec.delta.max(1);
    let gate = params.gates.combine_min_u_per_r2_delta * (r * r * d) as f64;
    if (u.len() as f64) < gate || vs.is_empty() {
        return Ok(CombinedAbsorber::empty(n, spec, params.mode, params.search_budget, w.clone()));
    }
    if params.mode == Mode::Faithful {
        let ln_cap = params.c.powi((d * d) as i32) * u.len() as f64 / (160.0 * (r * r * d) as f64);
        if (w.len().max(1) as f64).ln() > ln_cap {
            return Ok(CombinedAbsorber::empty(n, spec, params.mode, params.search_budget, w.clone()));
        }
    }

    // Share of W per colour: the first colour with |N_i(w) ∩ U| ≥ |U|/(4r).
    let need = u.len() as f64 / (4.0 * r as f64);
    let mut shares = vec![VertexSet::new(n); vs.len()];
    let mut unrouted = 0;
    for x in w.iter() {
        match vs.iter().position(|(c, _)| g.neighbours(*c, x).intersection_len(u) as f64 >= need) {
            Some(i) => {
                shares[i].insert(x);
            }
            None => unrouted += 1,
        }
    }
    if unrouted > 0 && params.mode == Mode::Faithful {
        return Err(Error::precondition("combine absorbers", format!("{unrouted} vertices of W have no dense colour into U")));
    }

    let mut out = CombinedAbsorber {
        d: VertexSet::new(n),
        w: VertexSet::new(n),
        parts: Vec::with_capacity(vs.len()),
        escaped: false,
        mode: params.mode,
        spec: *spec,
        budget: params.search_budget,
    };
    let k = vs.len();
    for (i, ((colour, v), share)) in vs.iter().zip(shares).enumerate() {
        let u_left = u.difference(&out.d);
        let v_left = v.difference(&out.d).difference(&u_left);
        let share = share.difference(&out.d);
        let mut part = ColourAbsorber {
            colour: *colour,
            w: VertexSet::new(n),
            d: VertexSet::new(n),
            witness: None,
            uncertified: share.len(),
            failure: None,
        };
        // D grows colour by colour, so a share may lose its degree into what is left of U.
        let eps = params.eps(k);
        let gp = GoodSubgraphParams::from_pipeline(params, *colour, eps);
        let weak = |x: usize| (g.neighbours(*colour, x).intersection_len(&u_left) as f64) < u_left.len() as f64 / (8.0 * r as f64);
        let (strong, dropped): (Vec<usize>, Vec<usize>) = share.iter().partition(|&x| !weak(x));
        let strong = VertexSet::from_iter_in(n, strong);
        let result = if !dropped.is_empty() && params.mode == Mode::Faithful {
            Err(Error::precondition("combine absorbers", format!("{} vertices lost their degree into U", dropped.len())))
        } else {
            if strong.is_empty() {
                Err(Error::precondition("combine absorbers", "nothing to absorb"))
            } else {
                find_good_subgraph(g, &u_left, &v_left, &strong, &gp, spec, rng::derive_seed(seed, &format!("combine/{i}")))
            }
        };
        match result {
            Ok(gs) => {
                part.d = gs.vertex_set(n);
                part.w = gs.certified(n).difference(&part.d);
                part.uncertified = share.len() - part.w.len();
                part.witness = Some(gs.witness);
            }
            Err(e) if params.mode == Mode::Faithful && !strong.is_empty() => {
                return Err(e.in_stage(format!("combine absorbers, colour {colour}")));
            }
            Err(e) => part.failure = Some(e.to_string()),
        }
        out.d.union_with(&part.d);
        out.parts.push(part);
    }
    // A vertex certified for one colour may sit inside a later colour's D.
    for part in &mut out.parts {
        part.w.difference_with(&out.d);
        out.w.union_with(&part.w);
    }
    Ok(out)
}
