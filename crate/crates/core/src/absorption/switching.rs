//! Switching along 3-step chains and absorption of outside vertices.

use std::collections::HashMap;

use serde::Serialize;

use super::max_matching;
use super::witness::{related, successors, GoodSubgraphWitness};
use crate::cover::{cover_unit, find_mono_copy, greedy_cover, CoverStrategy};
use crate::error::{Error, Result};
use crate::graph::{Colour, ColouredCompleteGraph};
use crate::params::Mode;
use crate::search::SearchConfig;
use crate::sequence::SequenceSpec;
use crate::tiling::{verify_cover, Embedding, Tiling};
use crate::vertex_set::VertexSet;

/// A relation on `Y × (Y ∪ Z)` over host vertices, reflexive on `Y`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SwitchRelation {
    pub y: Vec<usize>,
    pub z: Vec<usize>,
    /// `succ[i]` = vertices `v ∈ Y ∪ Z` with `y[i] ∼ v`.
    succ: Vec<VertexSet>,
    pos: HashMap<usize, usize>,
}

impl SwitchRelation {
    pub fn new(n: usize, y: Vec<usize>, z: Vec<usize>, mut rel: impl FnMut(usize, usize) -> bool) -> Self {
        let ground = VertexSet::from_iter_in(n, y.iter().chain(&z).copied());
        let succ = y
            .iter()
            .map(|&u| VertexSet::from_iter_in(n, ground.iter().filter(|&v| rel(u, v))))
            .collect();
        Self::from_rows(y, z, succ)
    }

    /// `u ∼ v` iff `N_F(u) ⊆ N_colour(v)`, given host `N_F(u)` for each `u ∈ Y`.
    pub fn from_neighbourhoods(
        g: &ColouredCompleteGraph,
        colour: Colour,
        nf: &HashMap<usize, Vec<usize>>,
        y: Vec<usize>,
        z: Vec<usize>,
    ) -> Self {
        let ground = VertexSet::from_iter_in(g.n(), y.iter().chain(&z).copied());
        let succ = y
            .iter()
            .map(|u| {
                let mut s = successors(g, colour, &nf[u], &ground);
                // N_F(u) never meets Y ∪ Z, but guard the reflexive entry anyway.
                s.insert(*u);
                s
            })
            .collect();
        Self::from_rows(y, z, succ)
    }

    fn from_rows(y: Vec<usize>, z: Vec<usize>, succ: Vec<VertexSet>) -> Self {
        let pos = y.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        SwitchRelation { y, z, succ, pos }
    }

    pub fn related(&self, u: usize, v: usize) -> bool {
        self.pos.get(&u).is_some_and(|&i| self.succ[i].contains(v))
    }

    fn succ_of(&self, u: usize) -> &VertexSet {
        &self.succ[self.pos[&u]]
    }

    /// Members of `Y` related to `v`.
    pub fn predecessors(&self, v: usize) -> Vec<usize> {
        self.y.iter().copied().filter(|&u| self.related(u, v)).collect()
    }

    pub fn is_reflexive(&self) -> bool {
        self.y.iter().all(|&u| self.related(u, u))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SwitchOptions {
    pub mode: Mode,
    pub strategy: CoverStrategy,
    pub cfg: SearchConfig,
}

impl Default for SwitchOptions {
    fn default() -> Self {
        SwitchOptions { mode: Mode::Practical, strategy: CoverStrategy::default(), cfg: SearchConfig::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SwitchOutcome {
    /// `f[i]` is the image of `y[i]`.
    pub f: Vec<usize>,
    /// Tiles covering `(Y ∪ Z) \ f(Y)`.
    pub leftover: Tiling,
    /// Cover target used in the final attempt.
    pub t: f64,
    /// `|T|`, the outside vertices switched into the copy.
    pub moved: usize,
    /// Chains `x → z → w → y` used.
    pub chains: usize,
    pub attempts: usize,
    /// Outside vertices with fewer than `θ|Y|` predecessors.
    pub thin_outside: Vec<usize>,
}

/// The cover target `min(η|Y|/100, θ|Y|, |Y|/(32Δr^Δ), |Z|)`.
pub fn bound_switch_t(eta: f64, theta: f64, y: usize, z: usize, delta: usize, r: usize) -> f64 {
    let y = y as f64;
    (eta * y / 100.0)
        .min(theta * y)
        .min(y / (cover_unit(delta, r) / 2.0))
        .min(z as f64)
}

/// Injective `f: Y → Y ∪ Z` with `y ∼ f(y)` and a tiling of `(Y ∪ Z) \ f(Y)`.
pub fn switch_matching(
    g: &ColouredCompleteGraph,
    rel: &SwitchRelation,
    eta: f64,
    theta: f64,
    spec: &SequenceSpec,
    opts: &SwitchOptions,
) -> Result<SwitchOutcome> {
    let n = g.n();
    let y_set = VertexSet::from_iter_in(n, rel.y.iter().copied());
    let z_set = VertexSet::from_iter_in(n, rel.z.iter().copied());
    if !y_set.is_disjoint(&z_set) {
        return Err(Error::precondition("switch matching", "Y and Z overlap"));
    }
    if !rel.is_reflexive() {
        return Err(Error::precondition("switch matching", "relation is not reflexive on Y"));
    }
    let thin_outside: Vec<usize> = rel
        .z
        .iter()
        .copied()
        .filter(|&v| (rel.predecessors(v).len() as f64) < theta * rel.y.len() as f64)
        .collect();
    if rel.z.is_empty() {
        return Ok(SwitchOutcome {
            f: rel.y.clone(),
            leftover: Tiling::new(),
            t: 0.0,
            moved: 0,
            chains: 0,
            attempts: 0,
            thin_outside,
        });
    }

    let mut t = match opts.mode {
        Mode::Faithful => bound_switch_t(eta, theta, rel.y.len(), rel.z.len(), spec.delta, g.r()),
        Mode::Practical => ((rel.z.len() + 1) as f64).min(rel.y.len() as f64 / 4.0),
    };
    let mut attempts = 0;
    loop {
        attempts += 1;
        // Residual below t ≤ 1 means Z is covered completely.
        let t_eff = t.max(0.5);
        match switch_once(g, rel, &y_set, &z_set, t_eff, spec, opts) {
            Ok((f, leftover, moved, chains)) => {
                return Ok(SwitchOutcome { f, leftover, t: t_eff, moved, chains, attempts, thin_outside });
            }
            Err(_) if opts.mode == Mode::Practical && t_eff > 0.5 => {
                t =if t_eff <= 1.0 { 0.5 } else { t_eff / 2.0 };
            }
            Err(e) => return Err(e),
        }
    }
}

type Switched = (Vec<usize>, Tiling, usize, usize);

fn switch_once(
    g: &ColouredCompleteGraph,
    rel: &SwitchRelation,
    y_set: &VertexSet,
    z_set: &VertexSet,
    t: f64,
    spec: &SequenceSpec,
    opts: &SwitchOptions,
) -> Result<Switched> {
    let cover = greedy_cover(g, z_set, t, spec, opts.strategy, &opts.cfg)?;
    let mut leftover = cover.tiling;
    let t_set = cover.residual.to_vec();
    let mut f: Vec<usize> = rel.y.clone();
    if t_set.is_empty() {
        return Ok((f, leftover, 0, 0));
    }

    // g: T → Y with g(u) ∼ u.
    let adj: Vec<Vec<usize>> = t_set
        .iter()
        .map(|&u| rel.predecessors(u).iter().map(|y| rel.pos[y]).collect())
        .collect();
    let partner = max_matching(&adj, rel.y.len());
    if let Some(k) = partner.iter().position(Option::is_none) {
        return Err(Error::precondition(
            "switch matching",
            format!("outside vertex {} has no free related vertex in Y", t_set[k]),
        ));
    }
    let g_img: Vec<usize> = partner.iter().map(|p| rel.y[p.expect("checked")]).collect();
    let g_inv: HashMap<usize, usize> = g_img.iter().copied().zip(t_set.iter().copied()).collect();

    let copy = find_mono_copy(g, y_set, t_set.len(), spec, &opts.cfg)?;
    let r_set = copy.vertex_set(g.n());
    let gt_set = VertexSet::from_iter_in(g.n(), g_img.iter().copied());
    let xs: Vec<usize> = r_set.difference(&gt_set).to_vec();
    let ys: Vec<usize> = gt_set.difference(&r_set).to_vec();
    let mut image: HashMap<usize, usize> = HashMap::new();
    for v in r_set.intersection(&gt_set).iter() {
        image.insert(v, g_inv[&v]);
    }

    let mut avail = y_set.difference(&r_set);
    avail.difference_with(&gt_set);
    for (&x, &y) in xs.iter().zip(&ys) {
        let preds_y = VertexSet::from_iter_in(g.n(), rel.predecessors(y));
        let mut chosen = None;
        for z in rel.succ_of(x).intersection(&avail).iter() {
            let mut ws = rel.succ_of(z).intersection(&avail);
            ws.intersect_with(&preds_y);
            ws.remove(z);
            if let Some(w) = ws.first() {
                chosen = Some((z, w));
                break;
            }
        }
        let Some((z, w)) = chosen else {
            return Err(Error::ChainExhausted { x, y });
        };
        avail.remove(z);
        avail.remove(w);
        image.insert(x, z);
        image.insert(z, w);
        image.insert(w, y);
        image.insert(y, g_inv[&y]);
    }
    for v in f.iter_mut() {
        if let Some(&img) = image.get(v) {
            *v = img;
        }
    }
    leftover.push(copy);
    check_switch(g, rel, &f, &leftover, spec)?;
    Ok((f, leftover, t_set.len(), xs.len()))
}

fn check_switch(
    g: &ColouredCompleteGraph,
    rel: &SwitchRelation,
    f: &[usize],
    leftover: &Tiling,
    spec: &SequenceSpec,
) -> Result<()> {
    let n = g.n();
    let img = VertexSet::from_iter_in(n, f.iter().copied());
    if img.len() != f.len() {
        return Err(Error::precondition("switch matching", "switched map is not injective"));
    }
    if let Some((u, v)) = rel.y.iter().zip(f).find(|(&u, &v)| !rel.related(u, v)) {
        return Err(Error::precondition("switch matching", format!("{u} is not related to its image {v}")));
    }
    let mut target = VertexSet::from_iter_in(n, rel.y.iter().chain(&rel.z).copied());
    target.difference_with(&img);
    let report = verify_cover(g, spec, leftover, &target);
    if !report.pass() {
        return Err(Error::precondition(
            "switch matching",
            format!("leftover tiling is invalid: {:?}", report.violations.first()),
        ));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[derive(Default)]
pub struct AbsorbOptions {
    pub switch: SwitchOptions,
    /// Cap `K` on `|Z|/|Y|`; `None` leaves it unchecked.
    pub k_cap: Option<f64>,
}


#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AbsorbOutcome {
    /// Tiling of exactly `X ∪ Y ∪ Z`; the last tile is the rebuilt copy of `F`.
    pub tiling: Tiling,
    /// `|Z_i|` per part.
    pub routed: Vec<usize>,
    pub moved: usize,
}

/// Tiles `X ∪ Y ∪ Z` with one copy of `F` plus the switching leftovers.
pub fn absorb(
    g: &ColouredCompleteGraph,
    w: &GoodSubgraphWitness,
    z: &VertexSet,
    opts: &AbsorbOptions,
) -> Result<AbsorbOutcome> {
    let n = g.n();
    let f_member = w.member()?;
    let nf = w.f_neighbourhoods(&f_member);
    let xy = w.vertex_set(n);
    let z = z.difference(&xy);
    let y_len = w.y.len();
    if let Some(k) = opts.k_cap {
        if z.len() as f64 > k * y_len as f64 {
            return Err(Error::precondition("absorb", format!("|Z| = {} exceeds K|Y| = {}", z.len(), k * y_len as f64)));
        }
    }
    let mut routed: Vec<Vec<usize>> = vec![Vec::new(); w.parts.len()];
    for v in z.iter() {
        let count = w.y.iter().filter(|y| related(g, w.colour, &nf[y], v)).count();
        if (count as f64) < 2.0 * w.theta * y_len as f64 || count == 0 {
            return Err(Error::precondition(
                "absorb",
                format!("vertex {v} has {count} related vertices in Y, below 2θ|Y| = {:.4}", 2.0 * w.theta * y_len as f64),
            ));
        }
        let best = w
            .parts
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let c = p.iter().filter(|y| related(g, w.colour, &nf[y], v)).count();
                (c as f64 / p.len() as f64, c, i)
            })
            .filter(|&(_, c, _)| c > 0)
            .max_by(|a, b| a.0.total_cmp(&b.0).then(b.2.cmp(&a.2)));
        let Some((_, _, i)) = best else {
            return Err(Error::precondition("absorb", format!("vertex {v} is related only to Y outside the parts")));
        };
        routed[i].push(v);
    }

    let mut tiling = Tiling::new();
    let mut moved = 0;
    let mut new_image: HashMap<usize, usize> = HashMap::new();
    for (i, zi) in routed.iter().enumerate() {
        if zi.is_empty() {
            continue;
        }
        let rel = SwitchRelation::from_neighbourhoods(g, w.colour, &nf, w.parts[i].clone(), zi.clone());
        let out = switch_matching(g, &rel, w.eta, w.theta, &w.spec, &opts.switch)
            .map_err(|e| e.in_stage(format!("switch part {i}")))?;
        moved += out.moved;
        new_image.extend(rel.y.iter().copied().zip(out.f.iter().copied()));
        tiling.extend(out.leftover);
    }
    let verts: Vec<usize> =
        w.embedding.vertices.iter().map(|v| new_image.get(v).copied().unwrap_or(*v)).collect();
    tiling.push(Embedding::new(&f_member, w.colour, verts));

    let target = xy.union(&z);
    let report = verify_cover(g, &w.spec, &tiling, &target);
    if !report.pass() {
        return Err(Error::precondition("absorb", format!("assembled tiling is invalid: {:?}", report.violations.first())));
    }
    Ok(AbsorbOutcome { tiling, routed: routed.iter().map(Vec::len).collect(), moved })
}
