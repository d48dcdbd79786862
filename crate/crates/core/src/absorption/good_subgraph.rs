//! Construction of a good subgraph between `U` and `V` that can absorb `W`.

use serde::Serialize;

use super::good_sets::{find_many_good_sets, good_set_constant, GoodSetOptions};
use super::witness::{certified_eta, part_chains, related, verify_good, GoodSubgraphWitness};
use crate::bipartite::BipartiteGraph;
use crate::error::{Error, Result};
use crate::graph::{Colour, ColouredCompleteGraph};
use crate::hypergraph::{
    embed_carefully, embed_carefully_best_effort, CarefulOptions, CommonNeighbourHypergraph, RichSetOracle,
};
use crate::params::{theta, Mode, PipelineParams};
use crate::rng;
use crate::sequence::{derive_hypergraph, member, SequenceSpec};
use crate::tiling::Embedding;
use crate::vertex_set::VertexSet;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GoodSubgraphParams {
    pub mode: Mode,
    pub colour: Colour,
    /// Common neighbourhoods in `V` must reach `ε|V|`.
    pub epsilon: f64,
    pub c: f64,
    pub lambda: f64,
    /// Smallest accepted `|U|`.
    pub min_u: usize,
    /// `k = ⌊|U| / k_divisor⌋`.
    pub k_divisor: f64,
    pub eps_max: f64,
    pub careful_retries: usize,
    pub good_set_retries: usize,
    pub drc_retries: usize,
}

impl GoodSubgraphParams {
    pub fn from_pipeline(p: &PipelineParams, colour: Colour, epsilon: f64) -> Self {
        let r2 = (p.r * p.r) as f64;
        GoodSubgraphParams {
            mode: p.mode,
            colour,
            epsilon,
            c: p.c,
            lambda: p.lambda(),
            min_u: (p.gates.good_subgraph_min_u_per_r2 * r2).ceil() as usize,
            k_divisor: p.gates.k_divisor_per_r2 * r2,
            eps_max: p.gates.good_set_eps_max,
            careful_retries: p.careful_retries,
            good_set_retries: 16,
            drc_retries: p.drc_retries,
        }
    }

    /// Practical defaults with `ε = 1/(2r^Δ)`.
    pub fn practical(r: usize, delta: usize, colour: Colour) -> Self {
        let p = PipelineParams::new(Mode::Practical, r, delta, 0);
        Self::from_pipeline(&p, colour, p.eps(1))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WCertificate {
    pub w: usize,
    /// `#{y ∈ Y : N_F(y) ⊆ N_colour(w)}`.
    pub count: usize,
    pub needed: f64,
    pub certified: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GoodSubgraph {
    pub witness: GoodSubgraphWitness,
    pub certificates: Vec<WCertificate>,
    pub k: usize,
    /// Constraints the careful embedding left short (practical mode only).
    pub careful_unsatisfied: usize,
    pub eta_target: f64,
}

impl GoodSubgraph {
    /// `X ∪ Y`.
    pub fn vertex_set(&self, n: usize) -> VertexSet {
        self.witness.vertex_set(n)
    }

    /// Vertices of `W` that the witness provably absorbs.
    pub fn certified(&self, n: usize) -> VertexSet {
        VertexSet::from_iter_in(n, self.certificates.iter().filter(|c| c.certified).map(|c| c.w))
    }
}

/// Builds a good subgraph in `params.colour` with `X ⊆ U`, `Y ⊆ V` and
/// certifies which vertices of `W` it can absorb.
pub fn find_good_subgraph(
    g: &ColouredCompleteGraph,
    u: &VertexSet,
    v: &VertexSet,
    w: &VertexSet,
    params: &GoodSubgraphParams,
    spec: &SequenceSpec,
    seed: u64,
) -> Result<GoodSubgraph> {
    const OP: &str = "find good subgraph";
    let n = g.n();
    let r = g.r();
    let d = spec.delta.max(1);
    let colour = params.colour;
    let faithful = params.mode == Mode::Faithful;
    if !u.is_disjoint(v) {
        return Err(Error::precondition(OP, "U and V overlap"));
    }
    if u.len() < params.min_u.max(2) {
        return Err(Error::precondition(OP, format!("|U| = {} is below {}", u.len(), params.min_u.max(2))));
    }
    let deg_need = u.len() as f64 / (8.0 * r as f64);
    if let Some(bad) = w.iter().find(|&x| (g.neighbours(colour, x).intersection_len(u) as f64) < deg_need) {
        return Err(Error::precondition(
            OP,
            format!(
                "w = {bad} has {} neighbours of colour {colour} in U, below |U|/(8r) = {deg_need:.2}",
                g.neighbours(colour, bad).intersection_len(u)
            ),
        ));
    }
    if faithful {
        if u.len() as f64 > params.epsilon / 2.0 * v.len() as f64 {
            return Err(Error::precondition(OP, format!("|U| = {} exceeds ε|V|/2", u.len())));
        }
        let log_cap = params.c.powi(d as i32) * u.len() as f64 / (80.0 * (r * r * d) as f64);
        if (w.len() as f64).ln() > log_cap {
            return Err(Error::precondition(OP, format!("|W| = {} exceeds exp({log_cap:.3e})", w.len())));
        }
    }

    // Largest k whose member fits: 2|X'| ≤ |U| and |Y'| ≤ |V|.
    let mut k = (u.len() as f64 / params.k_divisor).floor() as usize;
    let f = loop {
        if k < 2 {
            return Err(Error::precondition(OP, format!("k = {k} is too small to build an absorber")));
        }
        let f = member(spec, k)?;
        if 2 * f.x_side().len() <= u.len() && f.y_side().len() <= v.len() {
            break f;
        }
        if faithful {
            return Err(Error::precondition(OP, format!("F_{k} does not fit into U and V")));
        }
        k -= 1;
    };
    let hyper = derive_hypergraph(&f);

    let u_list = u.to_vec();
    let v_list = v.to_vec();
    let threshold = (params.epsilon * v.len() as f64).ceil() as usize;
    let cn = CommonNeighbourHypergraph::new(g, colour, u_list.clone(), v.clone(), threshold, d);
    let mut oracle = RichSetOracle::new(&cn, params.lambda, rng::derive_seed(seed, "good-subgraph/rich"));
    if !oracle.is_rich(&[]) {
        return Err(Error::precondition(
            OP,
            format!("too many Δ-sets in U have fewer than ε|V| = {threshold} common neighbours"),
        ));
    }
    let pos_u: std::collections::HashMap<usize, usize> = u_list.iter().enumerate().map(|(i, &x)| (x, i)).collect();
    let w_list = w.to_vec();
    let constraints: Vec<VertexSet> = w_list
        .iter()
        .map(|&x| {
            VertexSet::from_iter_in(u_list.len(), g.neighbours(colour, x).intersection(u).iter().map(|y| pos_u[&y]))
        })
        .collect();
    let copts = CarefulOptions {
        r,
        c: params.c,
        enforce_preconditions: faithful,
        max_retries: params.careful_retries,
        seed: rng::derive_seed(seed, "good-subgraph/careful"),
    };
    let careful = if faithful {
        embed_carefully(&hyper, &mut oracle, &constraints, &copts)
    } else {
        embed_carefully_best_effort(&hyper, &mut oracle, &constraints, &copts)
    }
    .map_err(|e| e.in_stage("careful embedding"))?;
    let map = &careful.map;

    // Hyperedge e ↦ common neighbourhood of g(e) inside V.
    let mut h = BipartiteGraph::empty(hyper.edge_count(), v_list.len());
    for (ei, e) in hyper.edges.iter().enumerate() {
        let img: Vec<usize> = e.iter().map(|&x| map[x]).collect();
        let common = cn.common(&img);
        for (j, &y) in v_list.iter().enumerate() {
            if common.contains(y) {
                h.add_edge(ei, j);
            }
        }
    }
    let th = theta(r, d);
    let eps_h = if faithful {
        params.epsilon
    } else {
        let measured = h.min_a_degree() as f64 / v_list.len() as f64;
        params.epsilon.min(measured)
    };
    let gs_opts = GoodSetOptions {
        mode: params.mode,
        eps_max: params.eps_max,
        max_retries: params.good_set_retries,
        drc_retries: params.drc_retries,
        seed: rng::derive_seed(seed, "good-subgraph/sets"),
    };
    let many = find_many_good_sets(&h, eps_h, th, &gs_opts).map_err(|e| e.in_stage("good sets"))?;

    let mut verts = vec![usize::MAX; f.order()];
    for (i, &p) in hyper.vertices.iter().enumerate() {
        verts[p] = u_list[map[i]];
    }
    for (ei, &y) in hyper.edge_source.iter().enumerate() {
        verts[y] = v_list[many.f[ei]];
    }
    let embedding = Embedding::new(&f, colour, verts);
    if let Err(vi) = embedding.check(g, &f) {
        return Err(Error::precondition(OP, format!("assembled copy is not monochromatic: {vi:?}")));
    }
    let img = &embedding.vertices;
    let x: Vec<usize> = f.x_side().iter().map(|&p| img[p]).collect();
    let y: Vec<usize> = f.y_side().iter().map(|&p| img[p]).collect();
    let mut parts: Vec<Vec<usize>> = many
        .sets
        .iter()
        .map(|s| s.iter().map(|&e| v_list[many.f[e]]).collect())
        .collect();

    let mut witness =
        GoodSubgraphWitness { colour, spec: *spec, embedding, x, y, parts: Vec::new(), eta: 0.0, theta: th };
    let nf = witness.f_neighbourhoods(&f);
    let mut checks = Vec::new();
    let mut i = 0;
    while i < parts.len() {
        let c = part_chains(g, colour, &nf, &parts[i]);
        if c.min_chains == Some(0) && !faithful {
            // A sampled pair without chains: fall back to singletons for this part.
            let p = parts.remove(i);
            parts.extend(p.into_iter().map(|v| vec![v]));
            continue;
        }
        checks.push(c);
        i += 1;
    }
    witness.eta = certified_eta(&parts, &checks, witness.y.len());
    witness.parts = parts;
    let eta_target = th * good_set_constant(params.epsilon / 2.0);
    if faithful && witness.eta < eta_target {
        return Err(Error::precondition(OP, format!("certified η = {:.3e} is below {eta_target:.3e}", witness.eta)));
    }
    verify_good(g, &witness).into_result().map_err(|e| e.in_stage("self-check"))?;

    let y_len = witness.y.len();
    let needed = 2.0 * th * y_len as f64;
    let xy = witness.vertex_set(n);
    let certificates = w_list
        .iter()
        .map(|&wv| {
            let count = witness.y.iter().filter(|yv| related(g, colour, &nf[yv], wv)).count();
            let certified = xy.contains(wv) || (count > 0 && count as f64 >= needed);
            WCertificate { w: wv, count, needed, certified }
        })
        .collect();
    Ok(GoodSubgraph { witness, certificates, k, careful_unsatisfied: careful.unsatisfied.len(), eta_target })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::absorption::switching::{absorb, AbsorbOptions};
    use crate::graph::Generator;

    #[test]
    fn theta_anchor() {
        assert_eq!(theta(2, 1), 1.0 / 128.0);
    }

    #[test]
    fn all_red_halves_give_a_good_witness() {
        let g = ColouredCompleteGraph::generate(&Generator::SingleColour, 120, 2, 0).unwrap();
        let u = VertexSet::range(120, 0, 40);
        let v = VertexSet::range(120, 40, 100);
        let w = VertexSet::range(120, 100, 120);
        let params = GoodSubgraphParams::practical(2, 2, 0);
        let res = find_good_subgraph(&g, &u, &v, &w, &params, &SequenceSpec::path(), 3).unwrap();
        assert!(verify_good(&g, &res.witness).pass);
        assert!(res.certificates.iter().all(|c| c.certified));
        let out = absorb(&g, &res.witness, &w, &AbsorbOptions::default()).unwrap();
        let target = res.vertex_set(120).union(&w);
        assert_eq!(out.tiling.covered(120), target);
    }

    #[test]
    fn weak_w_is_rejected_by_name() {
        // Vertex 119 sees U only in colour 1.
        let g = ColouredCompleteGraph::from_fn(120, 2, |a, b| u8::from(a.max(b) == 119 && a.min(b) < 40)).unwrap();
        let u = VertexSet::range(120, 0, 40);
        let v = VertexSet::range(120, 40, 100);
        let w = VertexSet::from_iter_in(120, [100, 119]);
        let params = GoodSubgraphParams::practical(2, 2, 0);
        let err = find_good_subgraph(&g, &u, &v, &w, &params, &SequenceSpec::path(), 3).unwrap_err();
        assert!(err.to_string().contains("w = 119"), "{err}");
    }
}
